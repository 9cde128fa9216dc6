//! Exact integer matrices: Smith normal form, integer solves, kernels,
//! and the signature of small symmetric matrices.
//!
//! Entries are i64 with i128 intermediates; every lattice showing up here
//! is small (ranks under ~40) and reduction pivots on smallest modulus,
//! which keeps coefficient growth tame. Overflow panics rather than
//! wrapping.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMat {
    pub nr: usize,
    pub nc: usize,
    pub d: Vec<i64>,
}

impl IMat {
    pub fn zero(nr: usize, nc: usize) -> Self {
        IMat {
            nr,
            nc,
            d: vec![0; nr * nc],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        let mut d = Vec::with_capacity(nr * nc);
        for r in rows {
            assert_eq!(r.len(), nc);
            d.extend(r);
        }
        IMat { nr, nc, d }
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.d[r * self.nc..(r + 1) * self.nc]
    }

    pub fn col(&self, c: usize) -> Vec<i64> {
        (0..self.nr).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> IMat {
        let mut t = IMat::zero(self.nc, self.nr);
        for r in 0..self.nr {
            for c in 0..self.nc {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.nc, other.nr);
        let mut out = IMat::zero(self.nr, other.nc);
        for i in 0..self.nr {
            for k in 0..self.nc {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.nc {
                    let p = (a as i128) * (other[(k, j)] as i128) + out[(i, j)] as i128;
                    out[(i, j)] = i64::try_from(p).expect("integer overflow in IMat::mul");
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.nc, v.len());
        (0..self.nr)
            .map(|i| {
                let mut acc = 0i128;
                for k in 0..self.nc {
                    acc += (self[(i, k)] as i128) * (v[k] as i128);
                }
                i64::try_from(acc).expect("integer overflow in IMat::mul_vec")
            })
            .collect()
    }

    pub fn neg(&self) -> IMat {
        let mut m = self.clone();
        for x in m.d.iter_mut() {
            *x = -*x;
        }
        m
    }

    pub fn sub(&self, other: &IMat) -> IMat {
        assert_eq!((self.nr, self.nc), (other.nr, other.nc));
        let mut m = self.clone();
        for (a, b) in m.d.iter_mut().zip(other.d.iter()) {
            *a -= *b;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|&x| x == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.nc {
            self.d.swap(a * self.nc + c, b * self.nc + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.nr {
            self.d.swap(r * self.nc + a, r * self.nc + b);
        }
    }

    /// row[a] += k * row[b]
    fn add_row(&mut self, a: usize, b: usize, k: i64) {
        for c in 0..self.nc {
            let v = self[(a, c)] as i128 + (k as i128) * (self[(b, c)] as i128);
            self[(a, c)] = i64::try_from(v).expect("integer overflow in row op");
        }
    }

    /// col[a] += k * col[b]
    fn add_col(&mut self, a: usize, b: usize, k: i64) {
        for r in 0..self.nr {
            let v = self[(r, a)] as i128 + (k as i128) * (self[(r, b)] as i128);
            self[(r, a)] = i64::try_from(v).expect("integer overflow in col op");
        }
    }

    fn negate_row(&mut self, a: usize) {
        for c in 0..self.nc {
            self[(a, c)] = -self[(a, c)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = i64;
    fn index(&self, (r, c): (usize, usize)) -> &i64 {
        &self.d[r * self.nc + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut i64 {
        &mut self.d[r * self.nc + c]
    }
}

/// Smith normal form: returns `(u, d, v)` with `u * m * v = d`, `u` and
/// `v` unimodular and `d` diagonal with a divisibility chain
/// `d[0] | d[1] | ...`, all nonnegative.
pub fn smith_form(m: &IMat) -> (IMat, IMat, IMat) {
    let mut a = m.clone();
    let mut u = IMat::identity(m.nr);
    let mut v = IMat::identity(m.nc);
    let n = m.nr.min(m.nc);

    for t in 0..n {
        loop {
            // smallest nonzero entry in the remaining block
            let mut pivot: Option<(usize, usize)> = None;
            let mut best: i64 = 0;
            for r in t..a.nr {
                for c in t..a.nc {
                    let x = a[(r, c)].abs();
                    if x != 0 && (pivot.is_none() || x < best) {
                        pivot = Some((r, c));
                        best = x;
                    }
                }
            }
            let (pr, pc) = match pivot {
                None => {
                    // block is zero; done
                    return finish_smith(a, u, v, t);
                }
                Some(p) => p,
            };
            a.swap_rows(t, pr);
            u.swap_rows(t, pr);
            a.swap_cols(t, pc);
            v.swap_cols(t, pc);

            let p = a[(t, t)];
            let mut clean = true;
            for r in t + 1..a.nr {
                let q = a[(r, t)].div_euclid(p);
                if q != 0 {
                    a.add_row(r, t, -q);
                    u.add_row(r, t, -q);
                }
                if a[(r, t)] != 0 {
                    clean = false;
                }
            }
            for c in t + 1..a.nc {
                let q = a[(t, c)].div_euclid(p);
                if q != 0 {
                    a.add_col(c, t, -q);
                    v.add_col(c, t, -q);
                }
                if a[(t, c)] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // pivot must divide the rest of the block
            let mut offender = None;
            'outer: for r in t + 1..a.nr {
                for c in t + 1..a.nc {
                    if a[(r, c)] % p != 0 {
                        offender = Some(r);
                        break 'outer;
                    }
                }
            }
            match offender {
                Some(r) => {
                    a.add_row(t, r, 1);
                    u.add_row(t, r, 1);
                }
                None => break,
            }
        }
        if a[(t, t)] < 0 {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    finish_smith(a, u, v, n)
}

fn finish_smith(mut a: IMat, mut u: IMat, v: IMat, upto: usize) -> (IMat, IMat, IMat) {
    for t in 0..upto.min(a.nr).min(a.nc) {
        if a[(t, t)] < 0 {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    (u, a, v)
}

/// Rank over the integers (= rank over Q).
pub fn rank(m: &IMat) -> usize {
    let (_, d, _) = smith_form(m);
    let n = d.nr.min(d.nc);
    (0..n).filter(|&i| d[(i, i)] != 0).count()
}

/// Elementary divisors (nonzero diagonal of the Smith form).
pub fn elementary_divisors(m: &IMat) -> Vec<i64> {
    let (_, d, _) = smith_form(m);
    let n = d.nr.min(d.nc);
    (0..n).filter(|&i| d[(i, i)] != 0).map(|i| d[(i, i)]).collect()
}

/// Solve `m * x = b` over the integers; `None` when no integer solution.
pub fn solve(m: &IMat, b: &[i64]) -> Option<Vec<i64>> {
    let (u, d, v) = smith_form(m);
    let ub = u.mul_vec(b);
    let mut y = vec![0i64; m.nc];
    let n = d.nr.min(d.nc);
    for i in 0..n {
        let di = d[(i, i)];
        if di == 0 {
            if ub[i] != 0 {
                return None;
            }
        } else {
            if ub[i] % di != 0 {
                return None;
            }
            y[i] = ub[i] / di;
        }
    }
    for i in n..m.nr {
        if ub[i] != 0 {
            return None;
        }
    }
    Some(v.mul_vec(&y))
}

/// Basis of the integer kernel of `m` (columns combining to zero).
pub fn kernel_basis(m: &IMat) -> Vec<Vec<i64>> {
    let (_, d, v) = smith_form(m);
    let n = d.nr.min(d.nc);
    let mut out = Vec::new();
    for j in 0..m.nc {
        let zero = j >= n || d[(j, j)] == 0;
        if zero {
            out.push(v.col(j));
        }
    }
    out
}

/// Inverse of a unimodular square matrix.
pub fn unimodular_inverse(m: &IMat) -> IMat {
    assert_eq!(m.nr, m.nc);
    let (u, d, v) = smith_form(m);
    for i in 0..m.nr {
        assert_eq!(d[(i, i)].abs(), 1, "matrix is not unimodular");
    }
    // m = u^-1 d v^-1, d = diag(±1) => m^-1 = v d u
    let mut dv = v.clone();
    for j in 0..m.nr {
        if d[(j, j)] < 0 {
            for r in 0..m.nr {
                dv[(r, j)] = -dv[(r, j)];
            }
        }
    }
    dv.mul(&u)
}

/// Signature (p - q) of a symmetric integer matrix, computed exactly by
/// rational congruence reduction.
pub fn signature(m: &IMat) -> i32 {
    assert_eq!(m.nr, m.nc);
    let n = m.nr;
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| BigRational::from(BigInt::from(m[(r, c)])))
                .collect()
        })
        .collect();
    let mut sig = 0i32;
    let mut rows: Vec<usize> = (0..n).collect();
    while let Some(&_first) = rows.first() {
        // find a nonzero diagonal entry among active rows
        let diag = rows.iter().position(|&i| !a[i][i].is_zero());
        match diag {
            Some(pos) => {
                let i = rows[pos];
                let pii = a[i][i].clone();
                sig += if pii.is_positive() { 1 } else { -1 };
                rows.remove(pos);
                for &r in rows.iter() {
                    let f = &a[r][i] / &pii;
                    if f.is_zero() {
                        continue;
                    }
                    for &c in rows.iter() {
                        let sub = &f * &a[i][c];
                        a[r][c] = &a[r][c] - sub;
                    }
                }
                // symmetrize the cleared column
                for &r in rows.iter() {
                    a[r][i] = BigRational::zero();
                    a[i][r] = BigRational::zero();
                }
            }
            None => {
                // all active diagonal entries zero: find off-diagonal pair
                let mut found = None;
                'search: for (pi, &i) in rows.iter().enumerate() {
                    for &j in rows.iter().skip(pi + 1) {
                        if !a[i][j].is_zero() {
                            found = Some((i, j));
                            break 'search;
                        }
                    }
                }
                match found {
                    None => break, // zero block
                    Some((i, j)) => {
                        // row/col i += row/col j creates 2*a[i][j] on the diagonal
                        for c in 0..n {
                            let add = a[j][c].clone();
                            a[i][c] = &a[i][c] + add;
                        }
                        for r in 0..n {
                            let add = a[r][j].clone();
                            a[r][i] = &a[r][i] + add;
                        }
                    }
                }
            }
        }
    }
    sig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_diag_2_3() {
        let m = IMat::from_rows(vec![vec![2, 0], vec![0, 3]]);
        let (u, d, v) = smith_form(&m);
        assert_eq!(d[(0, 0)], 1);
        assert_eq!(d[(1, 1)], 6);
        assert_eq!(u.mul(&m).mul(&v), d);
    }

    #[test]
    fn smith_zero() {
        let m = IMat::zero(3, 2);
        let (_, d, _) = smith_form(&m);
        assert!(d.is_zero());
    }

    #[test]
    fn smith_unimodular() {
        let m = IMat::from_rows(vec![vec![1, 1], vec![1, 0]]);
        let (u, d, v) = smith_form(&m);
        assert_eq!(d[(0, 0)], 1);
        assert_eq!(d[(1, 1)], 1);
        assert_eq!(u.mul(&m).mul(&v), d);
        let inv = unimodular_inverse(&m);
        assert_eq!(m.mul(&inv), IMat::identity(2));
    }

    #[test]
    fn smith_divisibility_chain() {
        let m = IMat::from_rows(vec![vec![4, 2, 0], vec![2, 8, 2], vec![0, 2, 12]]);
        let (u, d, v) = smith_form(&m);
        assert_eq!(u.mul(&m).mul(&v), d);
        let mut prev = d[(0, 0)];
        for i in 1..3 {
            let cur = d[(i, i)];
            if cur != 0 {
                assert_eq!(cur % prev.max(1), 0);
            }
            prev = cur;
        }
    }

    #[test]
    fn solve_and_kernel() {
        let m = IMat::from_rows(vec![vec![2, 4, 6], vec![1, 2, 3]]);
        let x = solve(&m, &[4, 2]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![4, 2]);
        assert!(solve(&m, &[1, 1]).is_none());
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 2);
        for kv in &k {
            assert_eq!(m.mul_vec(kv), vec![0, 0]);
        }
    }

    #[test]
    fn signature_examples() {
        let id = IMat::identity(3);
        assert_eq!(signature(&id), 3);
        let hyperbolic = IMat::from_rows(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(signature(&hyperbolic), 0);
        let mixed = IMat::from_rows(vec![vec![-1, 0, 0], vec![0, 0, 2], vec![0, 2, 0]]);
        assert_eq!(signature(&mixed), -1);
    }
}
