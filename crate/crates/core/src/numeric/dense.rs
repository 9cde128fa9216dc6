//! Dense complex matrices at working precision, with pivoted LU.
//!
//! Dense storage is reserved for operators that are provably not
//! generalized-permutation: functional-calculus outputs, intertwiners and
//! their products. Inner loops use preallocated scratch to avoid
//! per-operation allocation of multiprecision temporaries.

use super::{abs1_c, Prec};
use rug::{Assign, Complex, Float};

#[derive(Clone, Debug)]
pub struct DenseMatrix {
    pub dim: usize,
    data: Vec<Complex>,
}

impl DenseMatrix {
    pub fn zero(dim: usize, prec: Prec) -> Self {
        DenseMatrix {
            dim,
            data: vec![prec.zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize, prec: Prec) -> Self {
        let mut m = Self::zero(dim, prec);
        for i in 0..dim {
            m.at_mut(i, i).assign(1);
        }
        m
    }

    pub fn prec(&self) -> Prec {
        Prec(self.data[0].prec().0)
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Complex {
        &self.data[r * self.dim + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Complex {
        &mut self.data[r * self.dim + c]
    }

    pub fn row(&self, r: usize) -> &[Complex] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<Complex> {
        (0..self.dim).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex]) {
        for r in 0..self.dim {
            self.at_mut(r, c).assign(&v[r]);
        }
    }

    /// `self * other` with the classical i-k-j loop.
    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let prec = self.prec();
        let mut out = DenseMatrix::zero(n, prec);
        let mut tmp = prec.zero();
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a.real().is_zero() && a.imag().is_zero() {
                    continue;
                }
                let orow = i * n;
                let brow = k * n;
                for j in 0..n {
                    tmp.assign(a * &other.data[brow + j]);
                    out.data[orow + j] += &tmp;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        let n = self.dim;
        let prec = self.prec();
        let mut out = vec![prec.zero(); n];
        let mut tmp = prec.zero();
        for i in 0..n {
            for k in 0..n {
                tmp.assign(self.at(i, k) * &v[k]);
                out[i] += &tmp;
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: &Complex) -> DenseMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            let t = (*a).clone() * c;
            a.assign(&t);
        }
        out
    }

    pub fn conj_transpose(&self) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zero(n, self.prec());
        for i in 0..n {
            for j in 0..n {
                out.at_mut(j, i).assign(self.at(i, j).clone().conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex {
        let mut acc = self.prec().zero();
        for i in 0..self.dim {
            acc += self.at(i, i);
        }
        acc
    }

    /// Max entry modulus (1-norm proxy `|re|+|im|`).
    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec().0);
        for z in &self.data {
            let a = abs1_c(z);
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Kronecker product; `self` indexes the slow (left) factor.
    pub fn tensor(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        let m = other.dim;
        let prec = self.prec();
        let mut out = DenseMatrix::zero(n * m, prec);
        for i in 0..n {
            for j in 0..n {
                let a = self.at(i, j);
                if a.real().is_zero() && a.imag().is_zero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.at_mut(i * m + k, j * m + l).assign(a * other.at(k, l));
                    }
                }
            }
        }
        out
    }

    /// Determinant by LU with partial pivoting on entry modulus.
    ///
    /// Singular (to working accuracy) inputs return 0.
    pub fn lu_det(&self) -> Complex {
        let n = self.dim;
        let prec = self.prec();
        let mut a = self.clone();
        let mut det = prec.one();
        let mut tmp = prec.zero();
        let tiny = prec.tol(8);
        for k in 0..n {
            // pivot row
            let mut best = k;
            let mut best_mag = abs1_c(a.at(k, k));
            for r in k + 1..n {
                let mag = abs1_c(a.at(r, k));
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag < tiny {
                return prec.zero();
            }
            if best != k {
                for c in 0..n {
                    let (i1, i2) = (k * n + c, best * n + c);
                    a.data.swap(i1, i2);
                }
                det = -det;
            }
            let pivot = a.at(k, k).clone();
            tmp.assign(&det * &pivot);
            std::mem::swap(&mut det, &mut tmp);
            let inv_pivot = pivot.clone().recip();
            for r in k + 1..n {
                let factor = a.at(r, k).clone() * &inv_pivot;
                if factor.real().is_zero() && factor.imag().is_zero() {
                    continue;
                }
                for c in k + 1..n {
                    tmp.assign(&factor * a.at(k, c));
                    *a.at_mut(r, c) -= &tmp;
                }
                a.at_mut(r, k).assign(0);
            }
        }
        det
    }

    /// Solve `self * X = B` by LU with partial pivoting.
    ///
    /// Returns `None` when a pivot falls below working accuracy.
    pub fn lu_solve(&self, b: &DenseMatrix) -> Option<DenseMatrix> {
        let n = self.dim;
        let prec = self.prec();
        let mut a = self.clone();
        let mut x = b.clone();
        let mut tmp = prec.zero();
        let tiny = prec.tol(8);
        for k in 0..n {
            let mut best = k;
            let mut best_mag = abs1_c(a.at(k, k));
            for r in k + 1..n {
                let mag = abs1_c(a.at(r, k));
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag < tiny {
                return None;
            }
            if best != k {
                for c in 0..n {
                    a.data.swap(k * n + c, best * n + c);
                    x.data.swap(k * n + c, best * n + c);
                }
            }
            let inv_pivot = a.at(k, k).clone().recip();
            for r in k + 1..n {
                let factor = a.at(r, k).clone() * &inv_pivot;
                if factor.real().is_zero() && factor.imag().is_zero() {
                    continue;
                }
                for c in k + 1..n {
                    tmp.assign(&factor * a.at(k, c));
                    *a.at_mut(r, c) -= &tmp;
                }
                for c in 0..n {
                    tmp.assign(&factor * x.at(k, c));
                    *x.at_mut(r, c) -= &tmp;
                }
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let inv_pivot = a.at(k, k).clone().recip();
            for c in 0..n {
                let t = x.at(k, c).clone() * &inv_pivot;
                x.at_mut(k, c).assign(&t);
            }
            for r in 0..k {
                let factor = a.at(r, k).clone();
                if factor.real().is_zero() && factor.imag().is_zero() {
                    continue;
                }
                for c in 0..n {
                    tmp.assign(&factor * x.at(k, c));
                    *x.at_mut(r, c) -= &tmp;
                }
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{abs_c, Prec};
    use super::*;

    #[test]
    fn identity_det() {
        let prec = Prec::default();
        let m = DenseMatrix::identity(9, prec);
        let d = m.lu_det();
        assert!(abs_c(&Complex::from(d.clone() - 1u32)) < prec.tol(8));
    }

    #[test]
    fn diag_roots_of_unity_det_one() {
        // diag(q, q^2, 1) with q^3 = 1 has determinant q^3 = 1
        let prec = Prec::default();
        let q = super::super::RootOfUnity::new(3, 1, prec);
        let mut m = DenseMatrix::zero(3, prec);
        m.at_mut(0, 0).assign(&q.pow(1));
        m.at_mut(1, 1).assign(&q.pow(2));
        m.at_mut(2, 2).assign(1);
        let d = m.lu_det();
        assert!(abs_c(&Complex::from(d.clone() - 1u32)) < prec.tol(8));
    }

    /// Cofactor-expansion oracle, exponential cost; test-only.
    fn cofactor_det(m: &DenseMatrix) -> Complex {
        fn rec(m: &DenseMatrix, rows: &[usize], cols: &[usize]) -> Complex {
            let prec = m.prec();
            if rows.len() == 1 {
                return m.at(rows[0], cols[0]).clone();
            }
            let mut acc = prec.zero();
            let sub_rows: Vec<usize> = rows[1..].to_vec();
            for (i, &c) in cols.iter().enumerate() {
                let sub_cols: Vec<usize> = cols
                    .iter()
                    .cloned()
                    .filter(|&x| x != c)
                    .collect();
                let minor = rec(m, &sub_rows, &sub_cols);
                let term = m.at(rows[0], c).clone() * &minor;
                if i % 2 == 0 {
                    acc += &term;
                } else {
                    acc -= &term;
                }
            }
            acc
        }
        let idx: Vec<usize> = (0..m.dim).collect();
        rec(m, &idx, &idx)
    }

    #[test]
    fn lu_det_matches_cofactor_oracle() {
        // random 8x8 with entries in {±1, ±i}
        let prec = Prec::default();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut m = DenseMatrix::zero(8, prec);
        for r in 0..8 {
            for c in 0..8 {
                let v = match next() % 4 {
                    0 => (1, 0),
                    1 => (-1, 0),
                    2 => (0, 1),
                    _ => (0, -1),
                };
                m.at_mut(r, c).assign(v);
            }
        }
        let lu = m.lu_det();
        let co = cofactor_det(&m);
        let diff = abs_c(&Complex::from(lu.clone() - &co));
        let bound = Float::with_val(prec.0, 1e-70);
        assert!(diff < bound, "lu {} vs cofactor {}", lu, co);
    }

    #[test]
    fn lu_det_multiplicative() {
        let prec = Prec::default();
        let mut state = 0x853c49e6748fea9bu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..3 {
            let mut a = DenseMatrix::zero(6, prec);
            let mut b = DenseMatrix::zero(6, prec);
            for r in 0..6 {
                for c in 0..6 {
                    a.at_mut(r, c).assign((next(), next()));
                    b.at_mut(r, c).assign((next(), next()));
                }
            }
            let dab = a.mul(&b).lu_det();
            let d = Complex::from(a.lu_det().clone() * &b.lu_det());
            let diff = abs_c(&Complex::from(dab.clone() - &d));
            assert!(diff < prec.tol(16));
        }
    }

    #[test]
    fn solve_roundtrip() {
        let prec = Prec::default();
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = DenseMatrix::zero(5, prec);
        for r in 0..5 {
            for c in 0..5 {
                a.at_mut(r, c).assign((next(), next()));
            }
        }
        let b = DenseMatrix::identity(5, prec);
        let inv = a.lu_solve(&b).unwrap();
        let prod = a.mul(&inv);
        let diff = prod.sub(&DenseMatrix::identity(5, prec)).max_abs();
        assert!(diff < prec.tol(40), "residual {}", diff);
    }
}
