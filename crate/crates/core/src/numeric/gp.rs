//! Generalized permutation matrices.
//!
//! The image of any quantum-torus monomial under an irreducible
//! representation has exactly one nonzero entry per row and column.
//! Keeping that structure explicit makes monomial algebra O(dim) and is
//! the performance core of the whole pipeline: densification happens only
//! for genuinely dense operators (functional-calculus outputs and
//! intertwiners).

use super::dense::DenseMatrix;
use super::{abs1_c, Prec};
use crate::error::{Error, Result};
use rug::{Assign, Complex};

/// Matrix with one nonzero per row and column: column `j` holds the value
/// `scales[j]` at row `perm[j]`, i.e. `M e_j = scales[j] e_{perm[j]}`.
#[derive(Clone, Debug)]
pub struct GPMatrix {
    pub dim: usize,
    pub perm: Vec<usize>,
    pub scales: Vec<Complex>,
}

impl GPMatrix {
    pub fn identity(dim: usize, prec: Prec) -> Self {
        GPMatrix {
            dim,
            perm: (0..dim).collect(),
            scales: (0..dim).map(|_| prec.one()).collect(),
        }
    }

    pub fn new(perm: Vec<usize>, scales: Vec<Complex>) -> Self {
        let dim = perm.len();
        debug_assert_eq!(scales.len(), dim);
        debug_assert!(is_permutation(&perm));
        GPMatrix { dim, perm, scales }
    }

    pub fn prec(&self) -> Prec {
        Prec(self.scales[0].prec().0)
    }

    /// `self * other`, still a generalized permutation matrix; O(dim).
    pub fn compose(&self, other: &GPMatrix) -> Result<GPMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "gp compose {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut perm = vec![0usize; self.dim];
        let mut scales = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let mid = other.perm[j];
            perm[j] = self.perm[mid];
            scales.push(Complex::from(other.scales[j].clone() * &self.scales[mid]));
        }
        Ok(GPMatrix {
            dim: self.dim,
            perm,
            scales,
        })
    }

    pub fn inverse(&self) -> GPMatrix {
        let mut perm = vec![0usize; self.dim];
        let mut scales = vec![self.prec().zero(); self.dim];
        for j in 0..self.dim {
            perm[self.perm[j]] = j;
            scales[self.perm[j]] = self.scales[j].clone().recip();
        }
        GPMatrix {
            dim: self.dim,
            perm,
            scales,
        }
    }

    pub fn pow(&self, k: u32) -> GPMatrix {
        let mut acc = GPMatrix::identity(self.dim, self.prec());
        for _ in 0..k {
            acc = self.compose(&acc).expect("same dim");
        }
        acc
    }

    pub fn scale(&self, c: &Complex) -> GPMatrix {
        GPMatrix {
            dim: self.dim,
            perm: self.perm.clone(),
            scales: self.scales.iter().map(|s| s.clone() * c).collect(),
        }
    }

    /// `self * v` for a dense vector.
    pub fn apply_vec(&self, v: &[Complex]) -> Vec<Complex> {
        let prec = self.prec();
        let mut out = vec![prec.zero(); self.dim];
        for j in 0..self.dim {
            out[self.perm[j]].assign(&self.scales[j] * &v[j]);
        }
        out
    }

    /// `self * d` for dense `d`; O(dim^2) scalar multiplications.
    pub fn apply_left(&self, d: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(self.dim, d.dim);
        let mut out = DenseMatrix::zero(d.dim, self.prec());
        for j in 0..self.dim {
            let r = self.perm[j];
            for c in 0..d.dim {
                out.at_mut(r, c).assign(&self.scales[j] * d.at(j, c));
            }
        }
        out
    }

    /// `d * self` for dense `d`.
    pub fn apply_right(&self, d: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(self.dim, d.dim);
        let mut out = DenseMatrix::zero(d.dim, self.prec());
        for j in 0..self.dim {
            let src = self.perm[j];
            for r in 0..d.dim {
                out.at_mut(r, j).assign(d.at(r, src) * &self.scales[j]);
            }
        }
        out
    }

    pub fn dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zero(self.dim, self.prec());
        for j in 0..self.dim {
            out.at_mut(self.perm[j], j).assign(&self.scales[j]);
        }
        out
    }

    /// Exact determinant: `sign(perm) * prod(scales)`; O(dim).
    pub fn det(&self) -> Complex {
        let sign = perm_sign(&self.perm);
        let mut acc = self.prec().one();
        let mut tmp = self.prec().zero();
        for s in &self.scales {
            tmp.assign(&acc * s);
            std::mem::swap(&mut acc, &mut tmp);
        }
        if sign < 0 {
            acc = -acc;
        }
        acc
    }

    /// Trace: sum of scales on fixed points of the permutation.
    pub fn trace(&self) -> Complex {
        let mut acc = self.prec().zero();
        for j in 0..self.dim {
            if self.perm[j] == j {
                acc += &self.scales[j];
            }
        }
        acc
    }

    /// Cycles of the underlying permutation, each as the column sequence
    /// `j, perm[j], perm[perm[j]], ...`.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.dim];
        let mut out = Vec::new();
        for start in 0..self.dim {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                cyc.push(j);
                j = self.perm[j];
            }
            out.push(cyc);
        }
        out
    }

    /// Max entry modulus (1-norm proxy).
    pub fn max_abs(&self) -> rug::Float {
        let mut m = rug::Float::new(self.prec().0);
        for s in &self.scales {
            let a = abs1_c(s);
            if a > m {
                m = a;
            }
        }
        m
    }
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

pub fn perm_sign(p: &[usize]) -> i32 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0usize;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            len += 1;
            j = p[j];
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::super::{abs_c, Prec, RootOfUnity};
    use super::*;

    fn clock(n: usize, q: &RootOfUnity) -> GPMatrix {
        // S e_j = q^{2j} e_j
        GPMatrix::new(
            (0..n).collect(),
            (0..n).map(|j| q.pow(2 * j as i64)).collect(),
        )
    }

    fn shift(n: usize, prec: Prec) -> GPMatrix {
        // T e_j = e_{j+1}
        GPMatrix::new(
            (0..n).map(|j| (j + 1) % n).collect(),
            (0..n).map(|_| prec.one()).collect(),
        )
    }

    #[test]
    fn identity_composes() {
        let prec = Prec::default();
        let id = GPMatrix::identity(5, prec);
        let c = id.compose(&id).unwrap();
        assert_eq!(c.perm, id.perm);
    }

    #[test]
    fn clock_shift_against_dense_product() {
        let prec = Prec::default();
        let q = RootOfUnity::new(3, 1, prec);
        let s = clock(3, &q);
        let t = shift(3, prec);
        let st = s.compose(&t).unwrap();
        let dense_prod = s.dense().mul(&t.dense());
        let diff = st.dense().sub(&dense_prod).max_abs();
        assert!(diff < prec.tol(8));

        // q-commutation: S T = q^2 T S for q = exp(2 pi i/3)
        let ts = t.compose(&s).unwrap().scale(&q.pow(2));
        let diff2 = st.dense().sub(&ts.dense()).max_abs();
        assert!(diff2 < prec.tol(8));
    }

    #[test]
    fn cycle_power_is_identity() {
        let prec = Prec::default();
        let t = shift(7, prec);
        let t7 = t.pow(7);
        let diff = t7
            .dense()
            .sub(&GPMatrix::identity(7, prec).dense())
            .max_abs();
        assert!(diff < prec.tol(8));
    }

    #[test]
    fn det_matches_dense_lu() {
        let prec = Prec::default();
        let q = RootOfUnity::new(5, 2, prec);
        let s = clock(5, &q);
        let t = shift(5, prec);
        let m = s.compose(&t).unwrap();
        let d1 = m.det();
        let d2 = m.dense().lu_det();
        let diff = abs_c(&rug::Complex::from(d1.clone() - &d2));
        assert!(diff < prec.tol(16));
    }
}
