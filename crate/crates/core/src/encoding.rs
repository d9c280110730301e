//! Qubit encodings of fixed-start TSP tours.
//!
//! Two encodings are provided. [`OneHotEncoding`] is the conventional scheme:
//! a time-step-by-vertex grid of indicator qubits whose feasible states are
//! permutation matrices. [`EdgeEncoding`] assigns one qubit per directed edge
//! between non-start vertices; set bits select the edges of the tour, and the
//! edges touching the start vertex are implicit. Costs of edges to and from
//! vertex 0 are spread across the per-qubit phase branches so that the sum of
//! single-qubit phases over any feasible state reproduces the tour cost.
//!
//! Basis-state indices use a frozen convention throughout the crate: qubit
//! `t` is bit `t` of the index (bit 0 is the least significant). Edge-encoding
//! qubits are laid out row-major over ordered pairs `(j, k)`,
//! `1 <= j, k <= n-1`, `j != k`, with `j` outer and `k` inner. 1-hot qubits
//! are laid out row-major over `(time step, vertex)` with the time step
//! outer; vertex 0 at time step 1 is fixed and carries no qubit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::instance::{fixed_start_orders, validate_permutation, NormalizedInstance};
use crate::simulator::MAX_QUBITS;
use crate::{Error, Result};

/// Which of the two tour encodings is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingKind {
    /// Edge-selection encoding, `(n-1)(n-2)` qubits.
    Edge,
    /// Conventional fixed-start 1-hot encoding, `(n-1)^2` qubits.
    OneHot,
}

impl EncodingKind {
    pub fn name(self) -> &'static str {
        match self {
            EncodingKind::Edge => "edge",
            EncodingKind::OneHot => "onehot",
        }
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EncodingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(EncodingKind::Edge),
            "onehot" => Ok(EncodingKind::OneHot),
            other => Err(Error::BadConfig(format!(
                "unknown encoding '{other}' (expected 'edge' or 'onehot')"
            ))),
        }
    }
}

/// A bidirectional map between fixed-start tours and basis-state indices,
/// plus per-basis-state cost evaluation in normalized units.
pub trait TourEncoding {
    fn kind(&self) -> EncodingKind;

    fn vertex_count(&self) -> usize;

    fn qubit_count(&self) -> usize;

    /// Basis-state index of a fixed-start tour order.
    fn encode(&self, order: &[usize]) -> Result<usize>;

    /// Decodes a basis-state index into a tour order, or `None` when the
    /// bitstring does not describe a valid tour.
    fn decode(&self, index: usize) -> Option<Vec<usize>>;

    /// Normalized cost of a feasible basis state; errors on infeasible
    /// indices, which carry no defined cost.
    fn basis_cost(&self, index: usize) -> Result<f64>;
}

// ---------------------------------------------------------------------------
// Edge-selection encoding
// ---------------------------------------------------------------------------

/// One qubit per directed edge `(j, k)` among the non-start vertices.
///
/// A qubit in state 1 puts edge `e_{j,k}` into the tour. The two phase
/// branches per qubit are, in normalized cost units,
///
/// ```text
/// phase0 = (c(j,0) + c(0,k)) / (n-2)
/// phase1 = c(j,k) - (n-3) * (c(j,0) + c(0,k)) / (n-2)
/// ```
///
/// so that summing the selected branch over all qubits of a feasible state
/// yields exactly the decoded tour's normalized cost: the fractions of the
/// start-vertex edge costs contributed by 0-branches add up to the one
/// implicit outgoing and incoming edge the tour actually uses.
#[derive(Debug, Clone)]
pub struct EdgeEncoding {
    n: usize,
    pairs: Vec<(usize, usize)>,
    index_of: Vec<Option<usize>>,
    phase0: Vec<f64>,
    phase1: Vec<f64>,
    /// Eq-style affine form: `affine_const + sum over set bits of delta`.
    affine_const: f64,
    delta: Vec<f64>,
}

impl EdgeEncoding {
    pub fn new(norm: &NormalizedInstance) -> Self {
        let n = norm.vertex_count();
        let spread = (n - 2) as f64;
        let mut pairs = Vec::with_capacity((n - 1) * (n - 2));
        let mut index_of = vec![None; n * n];
        let mut phase0 = Vec::new();
        let mut phase1 = Vec::new();
        let mut delta = Vec::new();
        let mut affine_const = 0.0;
        for j in 1..n {
            for k in 1..n {
                if k == j {
                    continue;
                }
                let implicit = norm.weight(j, 0) + norm.weight(0, k);
                index_of[j * n + k] = Some(pairs.len());
                pairs.push((j, k));
                phase0.push(implicit / spread);
                phase1.push(norm.weight(j, k) - (n as f64 - 3.0) * implicit / spread);
                delta.push(norm.weight(j, k) - implicit);
                affine_const += implicit / spread;
            }
        }
        Self {
            n,
            pairs,
            index_of,
            phase0,
            phase1,
            affine_const,
            delta,
        }
    }

    /// Qubit position of decision variable `x_{j,k}`, if `(j, k)` is one.
    pub fn qubit_index(&self, j: usize, k: usize) -> Option<usize> {
        self.index_of.get(j * self.n + k).copied().flatten()
    }

    /// The directed edge `(j, k)` a qubit decides.
    pub fn pair(&self, qubit: usize) -> (usize, usize) {
        self.pairs[qubit]
    }

    /// Per-qubit `(phase0, phase1)` branch angles in normalized cost units.
    pub fn phase_table(&self) -> Vec<(f64, f64)> {
        self.phase0
            .iter()
            .zip(&self.phase1)
            .map(|(&a, &b)| (a, b))
            .collect()
    }

    /// Branch slices consumed by the simulator's per-qubit separator.
    pub fn branch_phases(&self) -> (&[f64], &[f64]) {
        (&self.phase0, &self.phase1)
    }

    /// Sum of per-qubit branch phases over an arbitrary bitstring, feasible
    /// or not: the phase the tensor-product separator accumulates on that
    /// basis state.
    pub fn branch_phase_sum(&self, index: usize) -> f64 {
        assert!(index < 1usize << self.qubit_count(), "index out of range");
        let mut total = 0.0;
        for t in 0..self.pairs.len() {
            total += if index >> t & 1 == 1 {
                self.phase1[t]
            } else {
                self.phase0[t]
            };
        }
        total
    }

    /// The affine cost form (constant plus per-set-bit deltas) evaluated at
    /// an arbitrary bitstring. Agrees with [`Self::branch_phase_sum`] up to
    /// floating-point rounding.
    pub fn affine_form(&self, index: usize) -> f64 {
        assert!(index < 1usize << self.qubit_count(), "index out of range");
        let mut total = self.affine_const;
        for t in 0..self.delta.len() {
            if index >> t & 1 == 1 {
                total += self.delta[t];
            }
        }
        total
    }

    #[cfg(test)]
    pub(crate) fn corrupt_phase1_for_test(&mut self, qubit: usize, delta: f64) {
        self.phase1[qubit] += delta;
    }
}

impl TourEncoding for EdgeEncoding {
    fn kind(&self) -> EncodingKind {
        EncodingKind::Edge
    }

    fn vertex_count(&self) -> usize {
        self.n
    }

    fn qubit_count(&self) -> usize {
        self.pairs.len()
    }

    fn encode(&self, order: &[usize]) -> Result<usize> {
        validate_permutation(order, self.n)?;
        if order[0] != 0 {
            return Err(Error::NotAPermutation(order.to_vec(), self.n));
        }
        let mut index = 0usize;
        for i in 1..self.n - 1 {
            let qubit = self
                .qubit_index(order[i], order[i + 1])
                .expect("consecutive inner vertices form a decision pair");
            index |= 1 << qubit;
        }
        Ok(index)
    }

    /// Feasible bitstrings are exactly those whose selected edges form one
    /// directed Hamiltonian path over the inner vertices `1..n`: `n-2`
    /// edges, in- and out-degree at most 1, no cycle. The tour is then
    /// `0 -> path -> 0`.
    fn decode(&self, index: usize) -> Option<Vec<usize>> {
        assert!(index < 1usize << self.qubit_count(), "index out of range");
        let n = self.n;
        let mut next = vec![0usize; n]; // 0 = no outgoing edge selected
        let mut has_incoming = vec![false; n];
        let mut edges = 0usize;
        for t in 0..self.pairs.len() {
            if index >> t & 1 == 0 {
                continue;
            }
            let (j, k) = self.pairs[t];
            if next[j] != 0 || has_incoming[k] {
                return None; // out- or in-degree above 1
            }
            next[j] = k;
            has_incoming[k] = true;
            edges += 1;
        }
        if edges != n - 2 {
            return None;
        }
        // Unique path start: the inner vertex nothing points at.
        let mut start = 0usize;
        for (v, &incoming) in has_incoming.iter().enumerate().skip(1) {
            if !incoming {
                if start != 0 {
                    return None; // two starts: disjoint paths
                }
                start = v;
            }
        }
        if start == 0 {
            return None; // every vertex has an incoming edge: a cycle
        }
        let mut order = Vec::with_capacity(n);
        order.push(0);
        let mut at = start;
        while at != 0 {
            order.push(at);
            at = next[at];
        }
        if order.len() != n {
            return None; // disconnected: a path plus a cycle
        }
        Some(order)
    }

    fn basis_cost(&self, index: usize) -> Result<f64> {
        if self.decode(index).is_none() {
            return Err(Error::InfeasibleState {
                index,
                kind: "edge",
            });
        }
        Ok(self.affine_form(index))
    }
}

// ---------------------------------------------------------------------------
// Conventional 1-hot encoding
// ---------------------------------------------------------------------------

/// Indicator qubit grid: qubit `(i, j)` means "vertex `j` is visited at time
/// step `i`", for time steps `2..=n` and vertices `1..=n-1`; vertex 0 at time
/// step 1 is fixed and not represented.
#[derive(Debug, Clone)]
pub struct OneHotEncoding {
    n: usize,
    norm_weights: Vec<Vec<f64>>,
}

impl OneHotEncoding {
    pub fn new(norm: &NormalizedInstance) -> Self {
        let n = norm.vertex_count();
        let norm_weights = (0..n)
            .map(|j| (0..n).map(|k| norm.weight(j, k)).collect())
            .collect();
        Self { n, norm_weights }
    }

    /// Qubit position for "vertex `v` at time step `step`", where
    /// `2 <= step <= n` and `1 <= v <= n-1`.
    pub fn qubit_index(&self, step: usize, v: usize) -> usize {
        debug_assert!((2..=self.n).contains(&step) && (1..self.n).contains(&v));
        (step - 2) * (self.n - 1) + (v - 1)
    }

    fn tour_cost(&self, order: &[usize]) -> f64 {
        let mut cost = 0.0;
        for i in 0..order.len() {
            cost += self.norm_weights[order[i]][order[(i + 1) % order.len()]];
        }
        cost
    }
}

impl TourEncoding for OneHotEncoding {
    fn kind(&self) -> EncodingKind {
        EncodingKind::OneHot
    }

    fn vertex_count(&self) -> usize {
        self.n
    }

    fn qubit_count(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    fn encode(&self, order: &[usize]) -> Result<usize> {
        validate_permutation(order, self.n)?;
        if order[0] != 0 {
            return Err(Error::NotAPermutation(order.to_vec(), self.n));
        }
        let mut index = 0usize;
        for (i, &v) in order.iter().enumerate().skip(1) {
            index |= 1 << self.qubit_index(i + 1, v);
        }
        Ok(index)
    }

    /// Feasible bitstrings are permutation matrices on the
    /// `(n-1) x (n-1)` grid: one set bit per time step and per vertex.
    fn decode(&self, index: usize) -> Option<Vec<usize>> {
        assert!(index < 1usize << self.qubit_count(), "index out of range");
        let m = self.n - 1;
        let mut order = Vec::with_capacity(self.n);
        order.push(0);
        let mut used = vec![false; self.n];
        for row in 0..m {
            let bits = index >> (row * m) & ((1 << m) - 1);
            if bits.count_ones() != 1 {
                return None;
            }
            let v = bits.trailing_zeros() as usize + 1;
            if used[v] {
                return None;
            }
            used[v] = true;
            order.push(v);
        }
        Some(order)
    }

    fn basis_cost(&self, index: usize) -> Result<f64> {
        match self.decode(index) {
            Some(order) => Ok(self.tour_cost(&order)),
            None => Err(Error::InfeasibleState {
                index,
                kind: "onehot",
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Encoding dispatch and the feasible set
// ---------------------------------------------------------------------------

/// Either encoding behind one concrete type.
#[derive(Debug, Clone)]
pub enum AnyEncoding {
    Edge(EdgeEncoding),
    OneHot(OneHotEncoding),
}

/// Constructs the requested encoding for a normalized instance.
pub fn build_encoding(kind: EncodingKind, norm: &NormalizedInstance) -> AnyEncoding {
    match kind {
        EncodingKind::Edge => AnyEncoding::Edge(EdgeEncoding::new(norm)),
        EncodingKind::OneHot => AnyEncoding::OneHot(OneHotEncoding::new(norm)),
    }
}

impl TourEncoding for AnyEncoding {
    fn kind(&self) -> EncodingKind {
        match self {
            AnyEncoding::Edge(e) => e.kind(),
            AnyEncoding::OneHot(e) => e.kind(),
        }
    }

    fn vertex_count(&self) -> usize {
        match self {
            AnyEncoding::Edge(e) => e.vertex_count(),
            AnyEncoding::OneHot(e) => e.vertex_count(),
        }
    }

    fn qubit_count(&self) -> usize {
        match self {
            AnyEncoding::Edge(e) => e.qubit_count(),
            AnyEncoding::OneHot(e) => e.qubit_count(),
        }
    }

    fn encode(&self, order: &[usize]) -> Result<usize> {
        match self {
            AnyEncoding::Edge(e) => e.encode(order),
            AnyEncoding::OneHot(e) => e.encode(order),
        }
    }

    fn decode(&self, index: usize) -> Option<Vec<usize>> {
        match self {
            AnyEncoding::Edge(e) => e.decode(index),
            AnyEncoding::OneHot(e) => e.decode(index),
        }
    }

    fn basis_cost(&self, index: usize) -> Result<f64> {
        match self {
            AnyEncoding::Edge(e) => e.basis_cost(index),
            AnyEncoding::OneHot(e) => e.basis_cost(index),
        }
    }
}

/// One feasible basis state with its decoded tour and normalized cost.
#[derive(Debug, Clone)]
pub struct FeasibleState {
    pub index: usize,
    pub order: Vec<usize>,
    pub cost: f64,
}

/// All `(n-1)!` feasible basis states of an encoding, sorted by index.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    kind: EncodingKind,
    qubit_count: usize,
    states: Vec<FeasibleState>,
}

impl FeasibleSet {
    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FeasibleState] {
        &self.states
    }

    pub fn state_by_index(&self, index: usize) -> Option<&FeasibleState> {
        self.states
            .binary_search_by_key(&index, |s| s.index)
            .ok()
            .map(|pos| &self.states[pos])
    }

    /// Arithmetic mean of the normalized costs.
    pub fn mean_cost(&self) -> f64 {
        self.states.iter().map(|s| s.cost).sum::<f64>() / self.states.len() as f64
    }

    pub fn min_cost(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.cost)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_cost(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.cost)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Enumerates the feasible set by encoding all `(n-1)!` fixed-start orders
/// rather than scanning `2^q` bitstrings. Tests cross-check against an
/// exhaustive scan at small sizes.
pub fn enumerate_feasible(enc: &impl TourEncoding) -> Result<FeasibleSet> {
    let q = enc.qubit_count();
    if q > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: q,
            max: MAX_QUBITS,
        });
    }
    let mut states = Vec::new();
    for order in fixed_start_orders(enc.vertex_count()) {
        let index = enc.encode(&order)?;
        let cost = enc.basis_cost(index)?;
        states.push(FeasibleState { index, order, cost });
    }
    states.sort_by_key(|s| s.index);
    Ok(FeasibleSet {
        kind: enc.kind(),
        qubit_count: q,
        states,
    })
}

// ---------------------------------------------------------------------------
// Analytic resource counts
// ---------------------------------------------------------------------------

/// Analytic qubit and phase-separator gate counts for both encodings; no
/// circuit is built.
///
/// The conventional separator needs one ZZ rotation per ordered pair of
/// inner vertices and per adjacent pair of free time steps, giving
/// `(n-1)(n-2)^2` RZZ gates, plus `2(n-1)` single-qubit rotations for the
/// edges touching the fixed start vertex. The edge-selection separator needs
/// one pair of single-qubit phase gates per decision qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCountReport {
    pub n: usize,
    pub onehot_qubits: usize,
    pub edge_qubits: usize,
    /// Edge-encoding qubit count when edge costs are symmetric and one qubit
    /// serves each undirected edge (reported only; not an implemented mode).
    pub edge_qubits_symmetric: usize,
    pub onehot_separator_rzz: usize,
    pub onehot_separator_rz: usize,
    pub edge_separator_phase_gate_pairs: usize,
}

pub fn gate_count_report(n: usize) -> Result<GateCountReport> {
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    Ok(GateCountReport {
        n,
        onehot_qubits: (n - 1) * (n - 1),
        edge_qubits: (n - 1) * (n - 2),
        edge_qubits_symmetric: (n - 1) * (n - 2) / 2,
        onehot_separator_rzz: (n - 1) * (n - 2) * (n - 2),
        onehot_separator_rz: 2 * (n - 1),
        edge_separator_phase_gate_pairs: (n - 1) * (n - 2),
    })
}

impl fmt::Display for GateCountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(
            f,
            "qubits:            onehot {} | edge {} (symmetric-cost mode would use {})",
            self.onehot_qubits, self.edge_qubits, self.edge_qubits_symmetric
        )?;
        writeln!(
            f,
            "phase separator:   onehot {} RZZ + {} RZ | edge {} single-qubit phase-gate pairs",
            self.onehot_separator_rzz,
            self.onehot_separator_rz,
            self.edge_separator_phase_gate_pairs
        )
    }
}
