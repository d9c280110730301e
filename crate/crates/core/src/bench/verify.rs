//! Per-instance diagnostic suite: runs the crate's core identities on one
//! instance and reports measured residuals. Failures are report content, not
//! errors, so a corrupted build shows up as FAIL lines rather than a crash.

use std::fmt;

use crate::encoding::{
    enumerate_feasible, EdgeEncoding, EncodingKind, OneHotEncoding, TourEncoding,
};
use crate::exact::{brute_force, held_karp};
use crate::instance::{fixed_start_orders, NormalizedInstance, TspInstance};
use crate::qaoa::{initial_angles, CostForm, Evolution};
use crate::simulator::measure_distribution;
use crate::{Error, Result};

/// Largest instance the full suite (brute force + exhaustive scans) accepts.
const VERIFY_MAX_N: usize = 6;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub n: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verification report (n = {})", self.n)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {} {:<28} residual {:9.2e} (tol {:7.1e})  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance,
                c.detail
            )?;
        }
        Ok(())
    }
}

fn check(name: &'static str, residual: f64, tolerance: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: residual <= tolerance,
        residual,
        tolerance,
        detail,
    }
}

/// Runs every check on one instance. Random angles for the subspace check
/// come from `angle_seed`.
pub fn verify_instance(inst: &TspInstance, angle_seed: u64) -> Result<VerifyReport> {
    let n = inst.vertex_count();
    if n > VERIFY_MAX_N {
        return Err(Error::TooManyVertices {
            n,
            max: VERIFY_MAX_N,
            solver: "verify",
        });
    }
    let norm = NormalizedInstance::new(inst.clone())?;
    let edge = EdgeEncoding::new(&norm);
    let onehot = OneHotEncoding::new(&norm);
    let factorial: usize = (1..n).product();

    let mut checks = vec![
        phase_sum_identity(&edge, &norm),
        feasible_count("feasible-count-edge", &edge, factorial),
        feasible_count("feasible-count-onehot", &onehot, factorial),
        cost_multiset_match(&edge, &onehot),
        solver_agreement(inst),
    ];
    checks.push(subspace_preservation(
        "subspace-edge",
        &norm,
        EncodingKind::Edge,
        angle_seed,
    )?);
    checks.push(subspace_preservation(
        "subspace-onehot",
        &norm,
        EncodingKind::OneHot,
        angle_seed,
    )?);
    checks.push(zero_angle_expectation(&norm)?);

    Ok(VerifyReport { n, checks })
}

/// Largest deviation between the tensor-product phase sum of a feasible
/// state and its decoded tour's normalized cost.
pub(crate) fn phase_sum_identity(edge: &EdgeEncoding, norm: &NormalizedInstance) -> CheckOutcome {
    let set = enumerate_feasible(edge).expect("edge feasible set");
    let mut worst = 0.0f64;
    for state in set.states() {
        let direct = norm
            .tour_cost(&state.order)
            .expect("decoded orders are permutations");
        worst = worst.max((edge.branch_phase_sum(state.index) - direct).abs());
    }
    check(
        "phase-sum-identity",
        worst,
        1e-12,
        format!("{} feasible states", set.len()),
    )
}

fn feasible_count(
    name: &'static str,
    enc: &(impl TourEncoding + Sync),
    expected: usize,
) -> CheckOutcome {
    let set = enumerate_feasible(enc).expect("feasible set");
    let mut count = set.len();
    let mut scanned = String::new();
    // Cross-check by exhaustive scan where the state space is small.
    if enc.qubit_count() <= 16 {
        let scan = (0..1usize << enc.qubit_count())
            .filter(|&a| enc.decode(a).is_some())
            .count();
        scanned = format!(", exhaustive scan found {scan}");
        if scan != set.len() {
            count = usize::MAX; // force a failure with an obvious residual
        }
    }
    check(
        name,
        (count as f64 - expected as f64).abs(),
        0.0,
        format!(
            "expected (n-1)! = {expected}, enumerated {}{scanned}",
            set.len()
        ),
    )
}

fn cost_multiset_match(edge: &EdgeEncoding, onehot: &OneHotEncoding) -> CheckOutcome {
    let mut a: Vec<f64> = enumerate_feasible(edge)
        .expect("edge feasible set")
        .states()
        .iter()
        .map(|s| s.cost)
        .collect();
    let mut b: Vec<f64> = enumerate_feasible(onehot)
        .expect("onehot feasible set")
        .states()
        .iter()
        .map(|s| s.cost)
        .collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let worst = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    check(
        "cost-multiset-match",
        worst,
        1e-12,
        format!("{} costs compared", a.len()),
    )
}

fn solver_agreement(inst: &TspInstance) -> CheckOutcome {
    let hk = held_karp(inst).expect("held_karp");
    let bf = brute_force(inst).expect("brute_force");
    check(
        "exact-solver-agreement",
        (hk.cost - bf.cost).abs(),
        1e-9,
        format!("held-karp {} vs brute-force {}", hk.cost, bf.cost),
    )
}

fn subspace_preservation(
    name: &'static str,
    norm: &NormalizedInstance,
    kind: EncodingKind,
    angle_seed: u64,
) -> Result<CheckOutcome> {
    let evo = Evolution::new(norm, kind, CostForm::Plain)?;
    let angles = initial_angles(3, angle_seed);
    let state = evo.evolve(&angles)?;
    let dist = measure_distribution(&state, evo.feasible());
    let norm_drift = (state.norm_sqr() - 1.0).abs();
    Ok(check(
        name,
        dist.infeasible_mass.max(norm_drift),
        1e-10,
        format!(
            "p=3 random angles: infeasible mass {:.2e}, norm drift {:.2e}",
            dist.infeasible_mass, norm_drift
        ),
    ))
}

fn zero_angle_expectation(norm: &NormalizedInstance) -> Result<CheckOutcome> {
    let n = norm.vertex_count();
    let mean: f64 = fixed_start_orders(n)
        .map(|o| norm.tour_cost(&o).expect("enumerated orders are tours"))
        .sum::<f64>()
        / (1..n).product::<usize>() as f64;
    let mut worst = 0.0f64;
    for kind in [EncodingKind::Edge, EncodingKind::OneHot] {
        let evo = Evolution::new(norm, kind, CostForm::Plain)?;
        let state = evo.evolve(&[0.0, 0.0])?;
        worst = worst.max((evo.expectation(&state) - mean).abs());
    }
    Ok(check(
        "zero-angle-expectation",
        worst,
        1e-10,
        format!("uniform-state mean cost {mean:.6}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_pass_every_check() {
        for seed in [0u64, 1, 2] {
            let inst = TspInstance::generate_random(4, seed, 1, 20).unwrap();
            let report = verify_instance(&inst, seed).unwrap();
            assert!(report.all_passed(), "{report}");
            assert!(report
                .checks
                .iter()
                .all(|c| c.residual < 1e-10 || c.tolerance >= c.residual));
        }
    }

    #[test]
    fn n5_counts_twenty_four_states() {
        let inst = TspInstance::generate_random(5, 9, 1, 20).unwrap();
        let report = verify_instance(&inst, 9).unwrap();
        assert!(report.all_passed(), "{report}");
        let count_check = report
            .checks
            .iter()
            .find(|c| c.name == "feasible-count-edge")
            .unwrap();
        assert!(count_check.detail.contains("= 24"));
    }

    #[test]
    fn corrupted_phase_table_fails_the_identity_check() {
        let inst = TspInstance::generate_random(4, 3, 1, 20).unwrap();
        let norm = NormalizedInstance::new(inst).unwrap();
        let mut edge = EdgeEncoding::new(&norm);
        edge.corrupt_phase1_for_test(2, 1e-3);
        let outcome = phase_sum_identity(&edge, &norm);
        assert!(!outcome.passed);
        assert!(outcome.residual > 1e-4);
    }

    #[test]
    fn big_instances_are_rejected() {
        let inst = TspInstance::generate_random(7, 0, 1, 20).unwrap();
        assert!(matches!(
            verify_instance(&inst, 0),
            Err(Error::TooManyVertices { .. })
        ));
    }

    #[test]
    fn report_prints_a_line_per_check() {
        let inst = TspInstance::generate_random(3, 4, 1, 20).unwrap();
        let report = verify_instance(&inst, 4).unwrap();
        let text = report.to_string();
        assert_eq!(text.lines().count(), report.checks.len() + 1);
        assert!(text.contains("PASS phase-sum-identity"));
    }
}
