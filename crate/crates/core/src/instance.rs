//! TSP instances: weight matrices, random generation, normalization, tour
//! costs, and file round-trips.
//!
//! Instances are complete directed graphs on `n >= 3` vertices with
//! nonnegative real edge weights and a zero diagonal. No symmetry or triangle
//! inequality is assumed. Weights are stored as `f64` even when generated as
//! integers so raw and normalized matrices share one code path.
//!
//! Random generation uses `ChaCha8Rng` seeded with a `u64`, filling the
//! off-diagonal entries in row-major order; with the dependency versions
//! pinned in the lockfile this is reproducible across platforms.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A complete directed TSP instance with raw (unnormalized) weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    n: usize,
    weights: Vec<Vec<f64>>,
}

/// On-disk JSON layout: `{"n": 4, "weights": [[...], ...]}`.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    weights: Vec<Vec<f64>>,
}

impl TspInstance {
    /// Builds an instance from an `n x n` weight matrix, validating shape,
    /// the zero diagonal, and nonnegativity.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.len();
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        for (j, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NonSquareMatrix {
                    rows: n,
                    row: j,
                    cols: row.len(),
                });
            }
            for (k, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::BadWeight {
                        from: j,
                        to: k,
                        value: w,
                    });
                }
                if j == k && w != 0.0 {
                    return Err(Error::NonzeroDiagonal(j));
                }
            }
        }
        Ok(Self { n, weights })
    }

    /// Draws integer off-diagonal weights i.i.d. uniform from `[lo, hi]`.
    ///
    /// Entries are filled row-major with `ChaCha8Rng::seed_from_u64(seed)`,
    /// so equal arguments always produce equal matrices.
    pub fn generate_random(n: usize, seed: u64, lo: u32, hi: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        if lo < 1 || lo > hi {
            return Err(Error::BadWeightRange { lo, hi });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = vec![vec![0.0; n]; n];
        for (j, row) in weights.iter_mut().enumerate() {
            for (k, w) in row.iter_mut().enumerate() {
                if j != k {
                    *w = f64::from(rng.gen_range(lo..=hi));
                }
            }
        }
        Ok(Self { n, weights })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Weight of the directed edge `from -> to`.
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from][to]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Largest off-diagonal weight.
    pub fn max_weight(&self) -> f64 {
        let mut max = 0.0;
        for j in 0..self.n {
            for k in 0..self.n {
                if j != k && self.weights[j][k] > max {
                    max = self.weights[j][k];
                }
            }
        }
        max
    }

    /// Closed-cycle cost of `order`, including the return edge to
    /// `order[0]`. Accepts any permutation of `0..n`.
    pub fn tour_cost(&self, order: &[usize]) -> Result<f64> {
        validate_permutation(order, self.n)?;
        let mut cost = 0.0;
        for i in 0..order.len() {
            cost += self.weights[order[i]][order[(i + 1) % order.len()]];
        }
        Ok(cost)
    }

    /// Reads an instance from the JSON file format documented in the README.
    pub fn read_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: InstanceFile =
            serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        if file.weights.len() != file.n {
            return Err(Error::Format(format!(
                "field n = {} does not match {} weight rows",
                file.n,
                file.weights.len()
            )));
        }
        Self::new(file.weights)
    }

    /// Writes the instance as JSON; `read_from` then reproduces it exactly.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let file = InstanceFile {
            n: self.n,
            weights: self.weights.clone(),
        };
        let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// An instance rescaled so that every closed tour cost lies in `(0, 1]`,
/// keeping all phase sums strictly below 2π.
///
/// The scale is `n * max`, where `max` is the largest single edge weight: the
/// longest possible tour has `n` edges, so its normalized cost is at most 1.
#[derive(Debug, Clone)]
pub struct NormalizedInstance {
    base: TspInstance,
    scale: f64,
    norm_weights: Vec<Vec<f64>>,
}

impl NormalizedInstance {
    /// Errors with [`Error::AllZeroWeights`] when the matrix has no positive
    /// off-diagonal entry.
    pub fn new(base: TspInstance) -> Result<Self> {
        let max = base.max_weight();
        if max <= 0.0 {
            return Err(Error::AllZeroWeights);
        }
        let scale = base.vertex_count() as f64 * max;
        let norm_weights = base
            .weights
            .iter()
            .map(|row| row.iter().map(|w| w / scale).collect())
            .collect();
        Ok(Self {
            base,
            scale,
            norm_weights,
        })
    }

    pub fn base(&self) -> &TspInstance {
        &self.base
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn vertex_count(&self) -> usize {
        self.base.n
    }

    /// Normalized weight of the directed edge `from -> to`.
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.norm_weights[from][to]
    }

    /// Closed-cycle cost of `order` in normalized units.
    pub fn tour_cost(&self, order: &[usize]) -> Result<f64> {
        validate_permutation(order, self.base.n)?;
        let mut cost = 0.0;
        for i in 0..order.len() {
            cost += self.norm_weights[order[i]][order[(i + 1) % order.len()]];
        }
        Ok(cost)
    }
}

/// A closed tour anchored at vertex 0, with its cost in raw weight units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tour {
    /// Permutation of `0..n` with `order[0] == 0`.
    pub order: Vec<usize>,
    /// Closed-cycle cost under the instance's raw weights.
    pub cost: f64,
}

impl Tour {
    /// Builds a tour from a fixed-start order, computing its raw cost.
    pub fn new(inst: &TspInstance, order: Vec<usize>) -> Result<Self> {
        if order.first() != Some(&0) {
            return Err(Error::NotAPermutation(order, inst.n));
        }
        let cost = inst.tour_cost(&order)?;
        Ok(Self { order, cost })
    }
}

pub(crate) fn validate_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::NotAPermutation(order.to_vec(), n));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::NotAPermutation(order.to_vec(), n));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Iterates all `(n-1)!` vertex orders that start at 0, in lexicographic
/// order of the trailing `n-1` vertices.
pub fn fixed_start_orders(n: usize) -> FixedStartOrders {
    assert!(n >= 3, "fixed_start_orders requires n >= 3");
    FixedStartOrders {
        tail: (1..n).collect(),
        done: false,
    }
}

pub struct FixedStartOrders {
    tail: Vec<usize>,
    done: bool,
}

impl Iterator for FixedStartOrders {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let mut order = Vec::with_capacity(self.tail.len() + 1);
        order.push(0);
        order.extend_from_slice(&self.tail);
        self.done = !next_permutation(&mut self.tail);
        Some(order)
    }
}

/// Advances `items` to its next lexicographic permutation; returns `false`
/// after the last one.
fn next_permutation(items: &mut [usize]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut i = items.len() - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = items.len() - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}
