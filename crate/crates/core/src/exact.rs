//! Exact TSP solvers used as ground truth for relative errors and tests.

use crate::instance::{fixed_start_orders, Tour, TspInstance};
use crate::{Error, Result};

/// Hard ceiling for the Held-Karp table (`2^(n-1) * n` doubles); the
/// practical range is n <= 18.
const HELD_KARP_MAX_N: usize = 24;

/// Factorial guard for exhaustive enumeration.
const BRUTE_FORCE_MAX_N: usize = 10;

/// Solves the instance optimally with bitmask dynamic programming over
/// subsets of the non-start vertices, vertex 0 fixed as the anchor.
///
/// Ties between optimal tours are broken toward the lexicographically
/// smallest order, so the output is deterministic and matches
/// [`brute_force`] exactly.
pub fn held_karp(inst: &TspInstance) -> Result<Tour> {
    let n = inst.vertex_count();
    if n > HELD_KARP_MAX_N {
        return Err(Error::TooManyVertices {
            n,
            max: HELD_KARP_MAX_N,
            solver: "held_karp",
        });
    }

    // best[mask * n + v] = cheapest path that starts at v, visits exactly the
    // inner vertices in `mask` (bit b <-> vertex b+1), and returns to 0.
    let inner = n - 1;
    let full: usize = (1 << inner) - 1;
    let mut best = vec![0.0f64; (full + 1) * n];
    for (v, slot) in best.iter_mut().enumerate().take(n) {
        *slot = inst.weight(v, 0); // empty mask: go straight home
    }
    for mask in 1..=full {
        for v in 0..n {
            if mask & vertex_bit(v) != 0 {
                continue; // v still unvisited by definition of the state
            }
            let mut min = f64::INFINITY;
            let mut rest = mask;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let w = b + 1;
                let cand = inst.weight(v, w) + best[(mask ^ (1 << b)) * n + w];
                if cand < min {
                    min = cand;
                }
            }
            best[mask * n + v] = min;
        }
    }

    // Walk forward, always taking the smallest next vertex that still
    // completes at the optimal cost. Comparisons reuse the exact values the
    // minima were taken over, so `==` is safe.
    let mut order = Vec::with_capacity(n);
    order.push(0);
    let mut at = 0usize;
    let mut mask = full;
    while mask != 0 {
        let target = best[mask * n + at];
        let mut rest = mask;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let w = b + 1;
            if inst.weight(at, w) + best[(mask ^ (1 << b)) * n + w] == target {
                order.push(w);
                mask ^= 1 << b;
                at = w;
                break;
            }
        }
    }
    Tour::new(inst, order)
}

fn vertex_bit(v: usize) -> usize {
    if v == 0 {
        0
    } else {
        1 << (v - 1)
    }
}

/// Enumerates all `(n-1)!` fixed-start orders and returns the cheapest;
/// ties keep the lexicographically smallest order.
pub fn brute_force(inst: &TspInstance) -> Result<Tour> {
    let n = inst.vertex_count();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooManyVertices {
            n,
            max: BRUTE_FORCE_MAX_N,
            solver: "brute_force",
        });
    }
    let mut best: Option<Tour> = None;
    for order in fixed_start_orders(n) {
        let cost = inst.tour_cost(&order)?;
        if best.as_ref().is_none_or(|t| cost < t.cost) {
            best = Some(Tour { order, cost });
        }
    }
    Ok(best.expect("n >= 3 guarantees at least one tour"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::NormalizedInstance;

    #[test]
    fn uniform_triangle_has_cost_three() {
        let inst = TspInstance::generate_random(3, 0, 1, 1).unwrap();
        let tour = held_karp(&inst).unwrap();
        assert_eq!(tour.cost, 3.0);
        assert_eq!(tour.order[0], 0);
    }

    #[test]
    fn asymmetric_triangle_picks_cheap_direction() {
        // Forward cycle 0->1->2->0 costs 3; every reverse edge costs 10.
        let inst = TspInstance::new(vec![
            vec![0.0, 1.0, 10.0],
            vec![10.0, 0.0, 1.0],
            vec![1.0, 10.0, 0.0],
        ])
        .unwrap();
        let tour = held_karp(&inst).unwrap();
        assert_eq!(tour.order, vec![0, 1, 2]);
        assert_eq!(tour.cost, 3.0);
        let other = inst.tour_cost(&[0, 2, 1]).unwrap();
        assert_eq!(other, 30.0);
    }

    #[test]
    fn uniform_weights_cost_n_times_w() {
        let inst = TspInstance::generate_random(4, 2, 6, 6).unwrap();
        let tour = brute_force(&inst).unwrap();
        assert_eq!(tour.cost, 24.0);
    }

    #[test]
    fn brute_force_is_minimal_over_enumeration() {
        let inst = TspInstance::generate_random(5, 33, 1, 20).unwrap();
        let best = brute_force(&inst).unwrap();
        for order in fixed_start_orders(5) {
            assert!(best.cost <= inst.tour_cost(&order).unwrap());
        }
    }

    #[test]
    fn solvers_agree_on_random_instances() {
        for n in 4..=7 {
            for seed in 0..50 {
                let inst = TspInstance::generate_random(n, seed, 1, 20).unwrap();
                let hk = held_karp(&inst).unwrap();
                let bf = brute_force(&inst).unwrap();
                assert_eq!(hk.cost, bf.cost, "n={n} seed={seed}");
                assert_eq!(hk.order, bf.order, "tie-break mismatch n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn solvers_agree_on_real_weights() {
        for seed in 0..20 {
            let inst = TspInstance::generate_random(6, seed, 1, 20).unwrap();
            let norm = NormalizedInstance::new(inst).unwrap();
            // Re-wrap the normalized matrix as an instance to exercise reals.
            let real = TspInstance::new(
                norm.base()
                    .weights()
                    .iter()
                    .map(|row| row.iter().map(|w| w / norm.scale()).collect())
                    .collect(),
            )
            .unwrap();
            let hk = held_karp(&real).unwrap();
            let bf = brute_force(&real).unwrap();
            assert!((hk.cost - bf.cost).abs() < 1e-9);
        }
    }

    #[test]
    fn reported_cost_matches_recomputation() {
        for seed in 0..20 {
            let inst = TspInstance::generate_random(6, seed + 100, 1, 20).unwrap();
            let tour = held_karp(&inst).unwrap();
            assert_eq!(tour.cost, inst.tour_cost(&tour.order).unwrap());
        }
    }

    #[test]
    fn brute_force_guard() {
        let inst = TspInstance::generate_random(11, 0, 1, 20).unwrap();
        assert!(matches!(
            brute_force(&inst),
            Err(Error::TooManyVertices { .. })
        ));
    }
}
