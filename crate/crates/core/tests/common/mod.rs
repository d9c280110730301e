//! Test-only dense linear algebra, independent of the simulator's
//! implementation paths: full 2^q x 2^q matrices, a Taylor-series matrix
//! exponential with scaling and squaring, and explicit operator builders.
#![allow(dead_code)] // not every test target uses every oracle

use num_complex::Complex64;

#[derive(Clone)]
pub struct CMatrix {
    pub dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zero(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    fn max_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// exp(A) by Taylor series after scaling A down to norm <= 0.5, then
/// repeated squaring. Terms are added until they fall below 1e-20.
pub fn expm(a: &CMatrix) -> CMatrix {
    let norm = a.max_row_sum();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scaled(Complex64::new(1.0 / f64::from(1 << squarings), 0.0));

    let mut result = CMatrix::identity(a.dim);
    let mut term = CMatrix::identity(a.dim);
    for k in 1..200 {
        term = term
            .matmul(&scaled)
            .scaled(Complex64::new(1.0 / k as f64, 0.0));
        result = result.plus(&term);
        if term.max_row_sum() < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// |F><F| over the given basis indices.
pub fn uniform_projector(dim: usize, indices: &[usize]) -> CMatrix {
    let mut p = CMatrix::zero(dim);
    let amp = Complex64::new(1.0 / indices.len() as f64, 0.0);
    for &a in indices {
        for &b in indices {
            p.set(a, b, amp);
        }
    }
    p
}

/// Diagonal unitary with `e^{-i gamma theta}` on the listed indices and 1
/// elsewhere.
pub fn diagonal_phase(dim: usize, angles: &[(usize, f64)], gamma: f64) -> CMatrix {
    let mut d = CMatrix::identity(dim);
    for &(index, theta) in angles {
        d.set(index, index, Complex64::from_polar(1.0, -gamma * theta));
    }
    d
}

/// The Grover mixer as a dense matrix exponential exp(-i beta |F><F|),
/// computed the slow way.
pub fn dense_grover_mixer(dim: usize, indices: &[usize], beta: f64) -> CMatrix {
    expm(&uniform_projector(dim, indices).scaled(Complex64::new(0.0, -beta)))
}
