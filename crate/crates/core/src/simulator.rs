//! Dense statevector backend with the three primitives QAOA needs:
//! feasible-superposition preparation, diagonal phase separators, and the
//! Grover mixer applied as an exact projector exponential.
//!
//! The mixer `e^{-iβ|F><F|}` is applied analytically rather than as a gate
//! decomposition: `|ψ> + (e^{-iβ} - 1) <F|ψ> |F>`, an O(|F|) update. Any
//! future mixer circuit for the edge encoding has to match this operator.
//!
//! Phase conventions follow the evolution `e^{-iβB} e^{-iγC}`: a diagonal
//! angle θ multiplies an amplitude by `e^{-iθ}`. Global phase is never
//! normalized away; tests compare states up to global phase where needed.

use num_complex::Complex64;

use crate::encoding::FeasibleSet;
use crate::{Error, Result};

/// Dense-simulation limit: 2^26 amplitudes is ~1 GiB of complex doubles.
pub const MAX_QUBITS: usize = 26;

/// A normalized vector of 2^q complex amplitudes; basis index bit `t` is
/// qubit `t`.
#[derive(Debug, Clone)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// All-zero amplitudes (not normalized; callers fill it in).
    fn zeroed(qubits: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(Self {
            qubits,
            amps: vec![Complex64::new(0.0, 0.0); 1 << qubits],
        })
    }

    /// Uniform superposition over the given basis indices.
    pub fn uniform_over(qubits: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyFeasibleSet);
        }
        let mut state = Self::zeroed(qubits)?;
        let amp = Complex64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
        for &i in indices {
            state.amps[i] = amp;
        }
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }
}

/// |F>: the uniform superposition over all feasible basis states.
pub fn prepare_feasible_superposition(feasible: &FeasibleSet) -> Result<StateVector> {
    let indices: Vec<usize> = feasible.states().iter().map(|s| s.index).collect();
    StateVector::uniform_over(feasible.qubit_count(), &indices)
}

/// A diagonal phase separator, materialized either from per-qubit branch
/// angles (edge encoding) or from explicit per-index angles on the feasible
/// states (1-hot encoding); never as a 2^q table.
#[derive(Debug, Clone)]
pub enum PhaseSeparator {
    /// Angle of basis state `a` is the sum over qubits of `phase1[t]` when
    /// bit `t` of `a` is set, else `phase0[t]`.
    QubitBranches { phase0: Vec<f64>, phase1: Vec<f64> },
    /// Explicit angles on listed indices; identity elsewhere.
    Indexed { angles: Vec<(usize, f64)> },
}

impl PhaseSeparator {
    /// Applies `amp(a) <- e^{-iγθ(a)} amp(a)`.
    pub fn apply(&self, state: &mut StateVector, gamma: f64) -> Result<()> {
        match self {
            PhaseSeparator::QubitBranches { phase0, phase1 } => {
                if phase0.len() != state.qubits || phase1.len() != state.qubits {
                    return Err(Error::DimensionMismatch {
                        expected: state.qubits,
                        actual: phase0.len(),
                    });
                }
                let q = state.qubits;
                for (a, amp) in state.amps.iter_mut().enumerate() {
                    let mut theta = 0.0;
                    for t in 0..q {
                        theta += if a >> t & 1 == 1 {
                            phase1[t]
                        } else {
                            phase0[t]
                        };
                    }
                    *amp *= Complex64::from_polar(1.0, -gamma * theta);
                }
            }
            PhaseSeparator::Indexed { angles } => {
                let dim = state.amps.len();
                for &(index, theta) in angles {
                    if index >= dim {
                        return Err(Error::DimensionMismatch {
                            expected: state.qubits,
                            actual: usize::BITS as usize - index.leading_zeros() as usize,
                        });
                    }
                    state.amps[index] *= Complex64::from_polar(1.0, -gamma * theta);
                }
            }
        }
        Ok(())
    }
}

/// Applies the Grover mixer `e^{-iβ|F><F|} = I + (e^{-iβ} - 1)|F><F|`.
pub fn apply_grover_mixer(
    state: &mut StateVector,
    feasible: &FeasibleSet,
    beta: f64,
) -> Result<()> {
    if feasible.is_empty() {
        return Err(Error::EmptyFeasibleSet);
    }
    if feasible.qubit_count() != state.qubits {
        return Err(Error::DimensionMismatch {
            expected: feasible.qubit_count(),
            actual: state.qubits,
        });
    }
    let inv_sqrt = 1.0 / (feasible.len() as f64).sqrt();
    let mut overlap = Complex64::new(0.0, 0.0); // <F|ψ>
    for s in feasible.states() {
        overlap += state.amps[s.index];
    }
    overlap *= inv_sqrt;
    let shift = (Complex64::from_polar(1.0, -beta) - 1.0) * overlap * inv_sqrt;
    for s in feasible.states() {
        state.amps[s.index] += shift;
    }
    Ok(())
}

/// Measurement probabilities over the feasible states, plus the total
/// probability mass sitting on infeasible basis states (ideally ~0).
#[derive(Debug, Clone)]
pub struct Distribution {
    pub feasible: Vec<(usize, f64)>,
    pub infeasible_mass: f64,
}

impl Distribution {
    /// Feasible index with the highest probability; ties break toward the
    /// smaller index.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &(index, p) in &self.feasible {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((index, p));
            }
        }
        best.map(|(index, _)| index)
    }
}

pub fn measure_distribution(state: &StateVector, feasible: &FeasibleSet) -> Distribution {
    let probs: Vec<(usize, f64)> = feasible
        .states()
        .iter()
        .map(|s| (s.index, state.probability(s.index)))
        .collect();
    let feasible_mass: f64 = probs.iter().map(|(_, p)| p).sum();
    Distribution {
        feasible: probs,
        infeasible_mass: (state.norm_sqr() - feasible_mass).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{enumerate_feasible, EdgeEncoding, OneHotEncoding, TourEncoding};
    use crate::instance::{NormalizedInstance, TspInstance};

    fn edge_setup(n: usize, seed: u64) -> (NormalizedInstance, EdgeEncoding, FeasibleSet) {
        let inst = TspInstance::generate_random(n, seed, 1, 20).unwrap();
        let norm = NormalizedInstance::new(inst).unwrap();
        let enc = EdgeEncoding::new(&norm);
        let feasible = enumerate_feasible(&enc).unwrap();
        (norm, enc, feasible)
    }

    #[test]
    fn uniform_preparation_n4() {
        let (_, _, feasible) = edge_setup(4, 0);
        let state = prepare_feasible_superposition(&feasible).unwrap();
        let expect = 1.0 / 6.0f64.sqrt();
        let mut zeros = 0;
        for a in 0..state.len() {
            let amp = state.amp(a);
            if amp.norm() == 0.0 {
                zeros += 1;
            } else {
                assert!((amp.re - expect).abs() < 1e-15 && amp.im == 0.0);
            }
        }
        assert_eq!(zeros, 64 - 6);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_state_preparation_n3() {
        let (_, _, feasible) = edge_setup(3, 1);
        let state = prepare_feasible_superposition(&feasible).unwrap();
        for s in feasible.states() {
            assert!((state.probability(s.index) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_angle_separator_is_identity() {
        let (_, enc, feasible) = edge_setup(4, 2);
        let mut state = prepare_feasible_superposition(&feasible).unwrap();
        let before = state.clone();
        let (p0, p1) = enc.branch_phases();
        let sep = PhaseSeparator::QubitBranches {
            phase0: p0.to_vec(),
            phase1: p1.to_vec(),
        };
        sep.apply(&mut state, 0.0).unwrap();
        for a in 0..state.len() {
            assert!((state.amp(a) - before.amp(a)).norm() < 1e-15);
        }
    }

    #[test]
    fn separator_phases_basis_states_by_cost() {
        let (_, enc, feasible) = edge_setup(4, 3);
        let gamma = 0.83;
        let (p0, p1) = enc.branch_phases();
        let sep = PhaseSeparator::QubitBranches {
            phase0: p0.to_vec(),
            phase1: p1.to_vec(),
        };
        for s in feasible.states() {
            let mut state = StateVector::uniform_over(enc.qubit_count(), &[s.index]).unwrap();
            sep.apply(&mut state, gamma).unwrap();
            let expect = Complex64::from_polar(1.0, -gamma * enc.basis_cost(s.index).unwrap());
            assert!((state.amp(s.index) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn separator_angles_add() {
        let (_, enc, feasible) = edge_setup(4, 4);
        let (p0, p1) = enc.branch_phases();
        let sep = PhaseSeparator::QubitBranches {
            phase0: p0.to_vec(),
            phase1: p1.to_vec(),
        };
        let mut twice = prepare_feasible_superposition(&feasible).unwrap();
        sep.apply(&mut twice, 0.3).unwrap();
        sep.apply(&mut twice, 0.9).unwrap();
        let mut once = prepare_feasible_superposition(&feasible).unwrap();
        sep.apply(&mut once, 1.2).unwrap();
        for a in 0..once.len() {
            assert!((twice.amp(a) - once.amp(a)).norm() < 1e-12);
        }
    }

    #[test]
    fn indexed_separator_matches_qubitwise_on_feasible_support() {
        let (_, enc, feasible) = edge_setup(4, 5);
        let gamma = 1.37;
        let (p0, p1) = enc.branch_phases();
        let qubitwise = PhaseSeparator::QubitBranches {
            phase0: p0.to_vec(),
            phase1: p1.to_vec(),
        };
        let indexed = PhaseSeparator::Indexed {
            angles: feasible
                .states()
                .iter()
                .map(|s| (s.index, s.cost))
                .collect(),
        };
        let mut a = prepare_feasible_superposition(&feasible).unwrap();
        let mut b = a.clone();
        qubitwise.apply(&mut a, gamma).unwrap();
        indexed.apply(&mut b, gamma).unwrap();
        for i in 0..a.len() {
            assert!((a.amp(i) - b.amp(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn mixer_zero_angle_is_identity() {
        let (_, _, feasible) = edge_setup(4, 6);
        let mut state = prepare_feasible_superposition(&feasible).unwrap();
        let before = state.clone();
        apply_grover_mixer(&mut state, &feasible, 0.0).unwrap();
        for a in 0..state.len() {
            assert!((state.amp(a) - before.amp(a)).norm() < 1e-15);
        }
    }

    #[test]
    fn mixer_eigenstate_gets_global_phase() {
        let (_, _, feasible) = edge_setup(4, 7);
        let beta = 0.77;
        let mut state = prepare_feasible_superposition(&feasible).unwrap();
        let before = state.clone();
        apply_grover_mixer(&mut state, &feasible, beta).unwrap();
        let phase = Complex64::from_polar(1.0, -beta);
        for a in 0..state.len() {
            assert!((state.amp(a) - phase * before.amp(a)).norm() < 1e-12);
        }
    }

    #[test]
    fn mixer_leaves_orthogonal_states_alone() {
        let (_, enc, feasible) = edge_setup(4, 8);
        // Index 0 is infeasible (no bits set), hence orthogonal to |F>.
        assert!(enc.decode(0).is_none());
        let mut state = StateVector::uniform_over(enc.qubit_count(), &[0]).unwrap();
        apply_grover_mixer(&mut state, &feasible, 1.9).unwrap();
        assert!((state.amp(0).re - 1.0).abs() < 1e-15);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm_and_feasible_subspace() {
        let (_, enc, feasible) = edge_setup(4, 9);
        let (p0, p1) = enc.branch_phases();
        let sep = PhaseSeparator::QubitBranches {
            phase0: p0.to_vec(),
            phase1: p1.to_vec(),
        };
        let mut state = prepare_feasible_superposition(&feasible).unwrap();
        for layer in 0..3 {
            sep.apply(&mut state, 0.41 + layer as f64).unwrap();
            apply_grover_mixer(&mut state, &feasible, 1.3 - 0.2 * layer as f64).unwrap();
        }
        assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        let dist = measure_distribution(&state, &feasible);
        assert!(dist.infeasible_mass <= 1e-10);
        let total: f64 = dist.feasible.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn onehot_setup_works_the_same() {
        let inst = TspInstance::generate_random(4, 10, 1, 20).unwrap();
        let norm = NormalizedInstance::new(inst).unwrap();
        let enc = OneHotEncoding::new(&norm);
        let feasible = enumerate_feasible(&enc).unwrap();
        let mut state = prepare_feasible_superposition(&feasible).unwrap();
        let sep = PhaseSeparator::Indexed {
            angles: feasible
                .states()
                .iter()
                .map(|s| (s.index, s.cost))
                .collect(),
        };
        sep.apply(&mut state, 0.6).unwrap();
        apply_grover_mixer(&mut state, &feasible, 0.4).unwrap();
        let dist = measure_distribution(&state, &feasible);
        assert!(dist.infeasible_mass <= 1e-12);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_guard_trips() {
        assert!(matches!(
            StateVector::uniform_over(27, &[0]),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn distribution_argmax_breaks_ties_low() {
        let dist = Distribution {
            feasible: vec![(3, 0.25), (5, 0.5), (9, 0.5)],
            infeasible_mass: 0.0,
        };
        assert_eq!(dist.argmax(), Some(5));
    }
}
