//! The hybrid QAOA loop: parameterized evolution, expectation evaluation,
//! derivative-free angle optimization, and solution extraction.
//!
//! An angle vector of length `2p` is laid out interleaved,
//! `[γ1, β1, γ2, β2, ...]`: layer `i` applies the phase separator at `γi`
//! and then the Grover mixer at `βi`. "Optimizer iterations" throughout this
//! crate means objective-function evaluations, the only count that is
//! portable across optimizer implementations; the one extra evolution used
//! to extract the final distribution is not counted.

mod optimizer;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{build_encoding, enumerate_feasible, AnyEncoding, EncodingKind, FeasibleSet};
use crate::exact::held_karp;
use crate::instance::{NormalizedInstance, Tour, TspInstance};
use crate::simulator::{
    apply_grover_mixer, measure_distribution, prepare_feasible_superposition, PhaseSeparator,
    StateVector,
};
use crate::{Error, Result};

/// Default layer count.
pub const DEFAULT_LAYERS: usize = 2;
/// Default objective-evaluation budget.
pub const DEFAULT_MAX_EVALS: usize = 200;
/// COBYLA initial trust radius / Nelder-Mead initial simplex step.
pub const INITIAL_STEP: f64 = 0.5;
/// Convergence tolerance handed to both optimizers.
pub const TOLERANCE: f64 = 1e-4;

/// Which derivative-free optimizer drives the angle search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Cobyla,
    NelderMead,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Cobyla => "cobyla",
            OptimizerKind::NelderMead => "nelder-mead",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cobyla" => Ok(OptimizerKind::Cobyla),
            "nelder-mead" => Ok(OptimizerKind::NelderMead),
            other => Err(Error::BadConfig(format!(
                "unknown optimizer '{other}' (expected 'cobyla' or 'nelder-mead')"
            ))),
        }
    }
}

/// Which cost function the phase separator encodes.
///
/// `Plain` phases feasible states by the normalized tour cost itself. `Eq1`
/// uses the affine form `4·f - (n-2)·Σ c(e)` that the conventional
/// construction produces; the offset is a global phase on the feasible
/// subspace and the factor 4 rescales γ, so the two forms explore the same
/// physics on different angle scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostForm {
    Plain,
    Eq1,
}

impl CostForm {
    pub fn name(self) -> &'static str {
        match self {
            CostForm::Plain => "plain",
            CostForm::Eq1 => "eq1",
        }
    }
}

impl fmt::Display for CostForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(CostForm::Plain),
            "eq1" => Ok(CostForm::Eq1),
            other => Err(Error::BadConfig(format!(
                "unknown cost form '{other}' (expected 'plain' or 'eq1')"
            ))),
        }
    }
}

/// Settings for one QAOA run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaoaConfig {
    /// Layer count p.
    pub layers: usize,
    pub encoding: EncodingKind,
    pub optimizer: OptimizerKind,
    pub max_evals: usize,
    /// Fixed starting angles; when absent, 2p angles are drawn uniformly
    /// from [0, 2π) with `ChaCha8Rng::seed_from_u64(seed)`.
    pub initial_angles: Option<Vec<f64>>,
    pub seed: u64,
    pub cost_form: CostForm,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            layers: DEFAULT_LAYERS,
            encoding: EncodingKind::Edge,
            optimizer: OptimizerKind::Cobyla,
            max_evals: DEFAULT_MAX_EVALS,
            initial_angles: None,
            seed: 0,
            cost_form: CostForm::Plain,
        }
    }
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::BadConfig("layer count must be at least 1".into()));
        }
        if self.max_evals < 2 * self.layers + 1 {
            return Err(Error::BadConfig(format!(
                "max_evals = {} cannot cover the initial 2p+1 = {} evaluations",
                self.max_evals,
                2 * self.layers + 1
            )));
        }
        if let Some(angles) = &self.initial_angles {
            if angles.len() != 2 * self.layers {
                return Err(Error::BadAngleCount {
                    expected: 2 * self.layers,
                    actual: angles.len(),
                });
            }
        }
        Ok(())
    }
}

/// Outcome of one optimized QAOA run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaoaResult {
    pub best_angles: Vec<f64>,
    /// ⟨C⟩ at the best angles, in normalized cost units.
    pub expectation: f64,
    /// Objective evaluations consumed by the optimizer.
    pub eval_count: usize,
    /// Probability per feasible basis-state index at the best angles.
    pub final_distribution: Vec<(usize, f64)>,
    /// Highest-probability feasible state, decoded.
    pub found_tour: Tour,
    /// Raw-unit cost of `found_tour`.
    pub found_cost: f64,
    /// `(found_cost - optimal) / optimal` against the Held-Karp optimum.
    pub relative_error: f64,
}

/// A fixed instance/encoding pair ready to be evolved at any angles.
pub struct Evolution {
    encoding: AnyEncoding,
    feasible: FeasibleSet,
    separator: PhaseSeparator,
}

impl Evolution {
    pub fn new(norm: &NormalizedInstance, kind: EncodingKind, cost_form: CostForm) -> Result<Self> {
        let encoding = build_encoding(kind, norm);
        let feasible = enumerate_feasible(&encoding)?;
        let separator = match (&encoding, cost_form) {
            (AnyEncoding::Edge(edge), CostForm::Plain) => {
                let (p0, p1) = edge.branch_phases();
                PhaseSeparator::QubitBranches {
                    phase0: p0.to_vec(),
                    phase1: p1.to_vec(),
                }
            }
            _ => {
                let angles = feasible
                    .states()
                    .iter()
                    .map(|s| (s.index, cost_form_angle(norm, cost_form, s.cost)))
                    .collect();
                PhaseSeparator::Indexed { angles }
            }
        };
        Ok(Self {
            encoding,
            feasible,
            separator,
        })
    }

    pub fn encoding(&self) -> &AnyEncoding {
        &self.encoding
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    /// Runs `p` alternating separator/mixer layers from |F>.
    pub fn evolve(&self, angles: &[f64]) -> Result<StateVector> {
        if angles.is_empty() || !angles.len().is_multiple_of(2) {
            return Err(Error::BadAngleCount {
                expected: angles.len() + angles.len() % 2,
                actual: angles.len(),
            });
        }
        let mut state = prepare_feasible_superposition(&self.feasible)?;
        for layer in angles.chunks_exact(2) {
            self.separator.apply(&mut state, layer[0])?;
            apply_grover_mixer(&mut state, &self.feasible, layer[1])?;
        }
        Ok(state)
    }

    /// ⟨C⟩ over the feasible states, in normalized units.
    pub fn expectation(&self, state: &StateVector) -> f64 {
        self.feasible
            .states()
            .iter()
            .map(|s| state.probability(s.index) * s.cost)
            .sum()
    }
}

fn cost_form_angle(norm: &NormalizedInstance, form: CostForm, cost: f64) -> f64 {
    match form {
        CostForm::Plain => cost,
        CostForm::Eq1 => {
            let n = norm.vertex_count();
            let mut total = 0.0;
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        total += norm.weight(j, k);
                    }
                }
            }
            4.0 * cost - (n as f64 - 2.0) * total
        }
    }
}

/// Expected normalized cost after evolving at the given interleaved angles.
pub fn evaluate_expectation(
    norm: &NormalizedInstance,
    encoding: EncodingKind,
    angles: &[f64],
    cost_form: CostForm,
) -> Result<f64> {
    let evo = Evolution::new(norm, encoding, cost_form)?;
    let state = evo.evolve(angles)?;
    Ok(evo.expectation(&state))
}

/// The seeded starting point of the angle search: 2p draws uniform in
/// [0, 2π), interleaved [γ1, β1, ...].
pub fn initial_angles(layers: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * layers).map(|_| rng.gen::<f64>() * TAU).collect()
}

/// Runs the full hybrid loop on one instance and extracts the best tour.
pub fn optimize(inst: &TspInstance, config: &QaoaConfig) -> Result<QaoaResult> {
    config.validate()?;
    let optimal = held_karp(inst)?;
    let norm = NormalizedInstance::new(inst.clone())?;
    let evo = Evolution::new(&norm, config.encoding, config.cost_form)?;

    let x0 = match &config.initial_angles {
        Some(angles) => angles.clone(),
        None => initial_angles(config.layers, config.seed),
    };
    let objective = |angles: &[f64]| {
        let state = evo
            .evolve(angles)
            .expect("evolution cannot fail on a validated configuration");
        evo.expectation(&state)
    };
    let outcome = match config.optimizer {
        OptimizerKind::Cobyla => {
            optimizer::minimize_cobyla(&objective, &x0, config.max_evals, INITIAL_STEP, TOLERANCE)?
        }
        OptimizerKind::NelderMead => optimizer::minimize_nelder_mead(
            &objective,
            &x0,
            config.max_evals,
            INITIAL_STEP,
            TOLERANCE,
        )?,
    };

    let state = evo.evolve(&outcome.x)?;
    let expectation = outcome.value;
    let dist = measure_distribution(&state, evo.feasible());
    let best_index = dist.argmax().ok_or(Error::EmptyFeasibleSet)?;
    let order = evo
        .feasible()
        .state_by_index(best_index)
        .expect("argmax index comes from the feasible set")
        .order
        .clone();
    let found_tour = Tour::new(inst, order)?;
    let found_cost = found_tour.cost;
    Ok(QaoaResult {
        best_angles: outcome.x,
        expectation,
        eval_count: outcome.evals,
        final_distribution: dist.feasible,
        found_tour,
        found_cost,
        relative_error: relative_error(found_cost, optimal.cost),
    })
}

/// `(found - optimal) / optimal`; a zero-cost optimum only matches itself.
pub fn relative_error(found_cost: f64, optimal_cost: f64) -> f64 {
    if optimal_cost > 0.0 {
        (found_cost - optimal_cost) / optimal_cost
    } else if found_cost == optimal_cost {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Draws `shots` multinomial samples from a feasible-state distribution and
/// decodes the most frequent outcome; ties break toward the smaller index.
pub fn sample_solution(
    distribution: &[(usize, f64)],
    feasible: &FeasibleSet,
    inst: &TspInstance,
    shots: usize,
    seed: u64,
) -> Result<Tour> {
    if shots == 0 {
        return Err(Error::BadConfig("shots must be at least 1".into()));
    }
    let total: f64 = distribution.iter().map(|(_, p)| p).sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::EmptyFeasibleSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; distribution.len()];
    for _ in 0..shots {
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = distribution.len() - 1;
        for (i, (_, p)) in distribution.iter().enumerate() {
            if u < *p {
                chosen = i;
                break;
            }
            u -= p;
        }
        counts[chosen] += 1;
    }
    let winner = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("distribution is non-empty");
    let index = distribution[winner].0;
    let order = feasible
        .state_by_index(index)
        .ok_or(Error::InfeasibleState {
            index,
            kind: "sampled",
        })?
        .order
        .clone();
    Tour::new(inst, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixed_start_orders;
    use num_complex::Complex64;

    fn norm_for(n: usize, seed: u64) -> NormalizedInstance {
        let inst = TspInstance::generate_random(n, seed, 1, 20).unwrap();
        NormalizedInstance::new(inst).unwrap()
    }

    #[test]
    fn zero_angles_give_mean_tour_cost() {
        for n in [3usize, 4] {
            let norm = norm_for(n, 5);
            let mean = fixed_start_orders(n)
                .map(|o| norm.tour_cost(&o).unwrap())
                .sum::<f64>()
                / (1..n).product::<usize>() as f64;
            for kind in [EncodingKind::Edge, EncodingKind::OneHot] {
                let e = evaluate_expectation(&norm, kind, &[0.0, 0.0, 0.0, 0.0], CostForm::Plain)
                    .unwrap();
                assert!((e - mean).abs() < 1e-10, "n={n} kind={kind}: {e} vs {mean}");
            }
        }
    }

    #[test]
    fn expectation_stays_between_extreme_costs() {
        let norm = norm_for(4, 6);
        let costs: Vec<f64> = fixed_start_orders(4)
            .map(|o| norm.tour_cost(&o).unwrap())
            .collect();
        let lo = costs.iter().cloned().fold(f64::INFINITY, f64::min) - 1e-12;
        let hi = costs.iter().cloned().fold(0.0, f64::max) + 1e-12;
        for seed in 0..20 {
            let angles = initial_angles(2, seed);
            let e =
                evaluate_expectation(&norm, EncodingKind::Edge, &angles, CostForm::Plain).unwrap();
            assert!((lo..=hi).contains(&e), "{e} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn encodings_agree_at_equal_angles_with_plain_form() {
        for n in [3usize, 4] {
            let norm = norm_for(n, 7);
            for seed in 0..5 {
                let angles = initial_angles(1, 100 + seed);
                let a = evaluate_expectation(&norm, EncodingKind::Edge, &angles, CostForm::Plain)
                    .unwrap();
                let b = evaluate_expectation(&norm, EncodingKind::OneHot, &angles, CostForm::Plain)
                    .unwrap();
                assert!((a - b).abs() < 1e-9, "n={n} seed={seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eq1_form_at_gamma_matches_plain_at_four_gamma() {
        // Up to a global phase on the feasible subspace.
        let norm = norm_for(4, 8);
        let gamma = 0.37;
        let beta = 0.0; // isolate the separator
        let plain = Evolution::new(&norm, EncodingKind::OneHot, CostForm::Plain).unwrap();
        let eq1 = Evolution::new(&norm, EncodingKind::OneHot, CostForm::Eq1).unwrap();
        let a = plain.evolve(&[4.0 * gamma, beta]).unwrap();
        let b = eq1.evolve(&[gamma, beta]).unwrap();
        // Find the relative phase on one feasible state, then demand it is
        // uniform across all of them.
        let reference = plain.feasible().states()[0].index;
        let ratio = b.amp(reference) / a.amp(reference);
        assert!((ratio.norm() - 1.0).abs() < 1e-10);
        for s in plain.feasible().states() {
            let diff: Complex64 = b.amp(s.index) - ratio * a.amp(s.index);
            assert!(diff.norm() < 1e-10);
        }
    }

    #[test]
    fn easy_instance_is_solved_by_most_seeds() {
        // Tour (0,1,2,3) costs 4; every other edge costs 20, so the optimum
        // is unique and far below the rest.
        let mut weights = vec![vec![20.0; 4]; 4];
        for (j, row) in weights.iter_mut().enumerate() {
            row[j] = 0.0;
        }
        for (j, k) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            weights[j][k] = 1.0;
        }
        let inst = TspInstance::new(weights).unwrap();
        let mut zeros = 0;
        for seed in 0..10 {
            let config = QaoaConfig {
                seed,
                ..QaoaConfig::default()
            };
            let result = optimize(&inst, &config).unwrap();
            if result.relative_error == 0.0 {
                zeros += 1;
            }
        }
        assert!(zeros >= 7, "optimum found in only {zeros}/10 runs");
    }

    #[test]
    fn tight_budget_is_respected() {
        let inst = TspInstance::generate_random(4, 9, 1, 20).unwrap();
        let config = QaoaConfig {
            layers: 2,
            max_evals: 5,
            ..QaoaConfig::default()
        };
        let result = optimize(&inst, &config).unwrap();
        assert!(result.eval_count <= 5);
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let inst = TspInstance::generate_random(4, 10, 1, 20).unwrap();
        let config = QaoaConfig {
            seed: 3,
            ..QaoaConfig::default()
        };
        let a = optimize(&inst, &config).unwrap();
        let b = optimize(&inst, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn relative_error_zero_iff_optimal() {
        let inst = TspInstance::generate_random(4, 11, 1, 20).unwrap();
        let best = held_karp(&inst).unwrap();
        for seed in 0..5 {
            let config = QaoaConfig {
                seed,
                ..QaoaConfig::default()
            };
            let result = optimize(&inst, &config).unwrap();
            assert_eq!(result.relative_error == 0.0, result.found_cost == best.cost);
            assert!(result.relative_error >= 0.0);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let ok = QaoaConfig::default();
        assert!(ok.validate().is_ok());
        let zero_layers = QaoaConfig {
            layers: 0,
            ..QaoaConfig::default()
        };
        assert!(zero_layers.validate().is_err());
        let starved = QaoaConfig {
            layers: 2,
            max_evals: 4,
            ..QaoaConfig::default()
        };
        assert!(starved.validate().is_err());
        let short_angles = QaoaConfig {
            initial_angles: Some(vec![0.1; 3]),
            ..QaoaConfig::default()
        };
        assert!(short_angles.validate().is_err());
    }

    #[test]
    fn concentrated_distribution_always_samples_its_peak() {
        let norm = norm_for(4, 12);
        let evo = Evolution::new(&norm, EncodingKind::Edge, CostForm::Plain).unwrap();
        let states = evo.feasible().states();
        let mut dist: Vec<(usize, f64)> = states.iter().map(|s| (s.index, 0.001)).collect();
        dist[3].1 = 0.995;
        for seed in 0..5 {
            let tour = sample_solution(&dist, evo.feasible(), norm.base(), 64, seed).unwrap();
            assert_eq!(tour.order, states[3].order);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_matches_argmax_in_the_limit() {
        let norm = norm_for(4, 13);
        let evo = Evolution::new(&norm, EncodingKind::Edge, CostForm::Plain).unwrap();
        let state = evo.evolve(&initial_angles(2, 77)).unwrap();
        let dist = measure_distribution(&state, evo.feasible());
        let a = sample_solution(&dist.feasible, evo.feasible(), norm.base(), 100_000, 5).unwrap();
        let b = sample_solution(&dist.feasible, evo.feasible(), norm.base(), 100_000, 5).unwrap();
        assert_eq!(a, b);
        let argmax = dist.argmax().unwrap();
        let argmax_order = &evo.feasible().state_by_index(argmax).unwrap().order;
        assert_eq!(&a.order, argmax_order);
    }

    #[test]
    fn initial_angles_are_seeded_and_in_range() {
        let a = initial_angles(3, 42);
        let b = initial_angles(3, 42);
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert!(a.iter().all(|&x| (0.0..TAU).contains(&x)));
        assert_ne!(initial_angles(3, 43), a);
    }
}
