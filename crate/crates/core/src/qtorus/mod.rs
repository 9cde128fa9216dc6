//! Lattices with integer skew forms, their quantum tori at a root of
//! unity q, and irreducible representations by clock and shift operators.
//!
//! A representation is pinned by an adapted (symplectic-plus-radical)
//! basis and a scalar map extending the central character. Monomial
//! images are generalized permutation matrices throughout; the only dense
//! operators are produced in `intertwine` and by functional calculus.

pub mod intertwine;

use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, GPMatrix, IMat, LogVal, Prec, RootOfUnity};
use rug::{Assign, Complex};

pub use intertwine::{intertwine_reps, intertwining_residual, monomial_intertwiner};

/// Free abelian group of finite rank with an integer skew form.
#[derive(Clone, Debug)]
pub struct SkewLattice {
    pub rank: usize,
    pub gram: IMat,
}

impl SkewLattice {
    pub fn new(gram: IMat) -> Self {
        assert_eq!(gram.nr, gram.nc);
        let t = gram.transpose().neg();
        assert_eq!(t, gram, "gram matrix must be skew-symmetric");
        SkewLattice {
            rank: gram.nr,
            gram,
        }
    }

    /// omega(k, l).
    pub fn form(&self, k: &[i64], l: &[i64]) -> i64 {
        let gl = self.gram.mul_vec(l);
        k.iter()
            .zip(gl.iter())
            .map(|(&a, &b)| (a as i128) * (b as i128))
            .sum::<i128>()
            .try_into()
            .expect("form overflow")
    }
}

/// Change of basis bringing a skew form to `⊕ d_i J_2 ⊕ 0`.
///
/// Columns of `change` list the adapted basis in the original
/// coordinates, ordered `a_1, b_1, ..., a_r, b_r, g_1, ..., g_s` with
/// `omega(a_i, b_i) = d_i > 0` and `g_j` spanning the radical.
#[derive(Clone, Debug)]
pub struct SymplecticBasis {
    pub change: IMat,
    pub change_inv: IMat,
    pub blocks: Vec<i64>,
    pub radical_rank: usize,
}

impl SymplecticBasis {
    pub fn pairs(&self) -> usize {
        self.blocks.len()
    }

    pub fn alpha(&self, i: usize) -> Vec<i64> {
        self.change.col(2 * i)
    }

    pub fn beta(&self, i: usize) -> Vec<i64> {
        self.change.col(2 * i + 1)
    }

    pub fn radical_vector(&self, j: usize) -> Vec<i64> {
        self.change.col(2 * self.pairs() + j)
    }

    /// Coordinates of `k` in the adapted basis.
    pub fn adapted_coords(&self, k: &[i64]) -> Vec<i64> {
        self.change_inv.mul_vec(k)
    }
}

/// Skew normal form by integer congruence, deterministic: the pivot is
/// always a smallest-modulus entry, ties broken lexicographically.
pub fn skew_normal_form(l: &SkewLattice) -> SymplecticBasis {
    skew_normal_form_adapted(l, &[], &[]).expect("unconstrained reduction cannot fail")
}

/// Skew normal form with prescribed structure: `trailing_pairs` are
/// hyperbolic pairs `(v, w)` with `omega(v, w) = 1` that must appear as
/// the final symplectic pairs, and `radical_prefix` lists radical vectors
/// that must appear as the leading radical basis vectors.
pub fn skew_normal_form_adapted(
    l: &SkewLattice,
    trailing_pairs: &[(Vec<i64>, Vec<i64>)],
    radical_prefix: &[Vec<i64>],
) -> Result<SymplecticBasis> {
    let m = l.rank;
    // current basis, as columns in original coordinates
    let mut cols: Vec<Vec<i64>> = (0..m).map(|i| unit_vec(m, i)).collect();

    // Seed prescribed hyperbolic pairs: symplectic Gram-Schmidt against
    // each pair splits off its orthogonal complement.
    let mut fixed_pairs: Vec<(Vec<i64>, Vec<i64>)> = Vec::new();
    for (v, w) in trailing_pairs {
        let d = l.form(v, w);
        if d != 1 {
            return Err(Error::BadInput(format!(
                "prescribed pair must have omega(v, w) = 1, got {d}"
            )));
        }
        for c in cols.iter_mut() {
            let a = l.form(w, c);
            let b = l.form(v, c);
            // c += a*v - b*w  makes c orthogonal to both v and w
            for i in 0..m {
                c[i] += a * v[i] - b * w[i];
            }
        }
        // prescribed vectors themselves must be orthogonal to earlier pairs
        for (pv, pw) in &fixed_pairs {
            if l.form(pv, v) != 0 || l.form(pv, w) != 0 || l.form(pw, v) != 0 || l.form(pw, w) != 0
            {
                return Err(Error::BadInput(
                    "prescribed pairs are not mutually orthogonal".into(),
                ));
            }
        }
        fixed_pairs.push((v.clone(), w.clone()));
    }
    // Drop linear dependencies introduced by the projection: keep a
    // maximal independent subset of the projected columns.
    let complement = independent_subset(&cols, m - 2 * fixed_pairs.len());

    // Reduce the complement.
    let (mut pairs, mut radical) = reduce_complement(l, complement);

    // Sort free pairs by descending block size (powers of 2 chain).
    pairs.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));

    // Prescribed radical vectors go first; complete with reduced radical.
    if !radical_prefix.is_empty() {
        let mut rad_cols = radical_prefix.to_vec();
        for v in radical_prefix {
            let gv = l.gram.mul_vec(v);
            if gv.iter().any(|&x| x != 0) {
                return Err(Error::BadInput(
                    "prescribed radical vector is not in the radical".into(),
                ));
            }
        }
        for r in &radical {
            rad_cols.push(r.clone());
        }
        let picked = independent_subset(&rad_cols, radical.len());
        if picked.len() != radical.len() || picked[..radical_prefix.len()] != *radical_prefix {
            return Err(Error::BadInput(
                "prescribed radical vectors are dependent".into(),
            ));
        }
        radical = picked;
    }

    let mut change = IMat::zero(m, m);
    let mut blocks = Vec::new();
    let mut cidx = 0;
    for (a, b, d) in &pairs {
        set_col(&mut change, cidx, a);
        set_col(&mut change, cidx + 1, b);
        blocks.push(*d);
        cidx += 2;
    }
    for (v, w) in &fixed_pairs {
        set_col(&mut change, cidx, v);
        set_col(&mut change, cidx + 1, w);
        blocks.push(1);
        cidx += 2;
    }
    for r in &radical {
        set_col(&mut change, cidx, r);
        cidx += 1;
    }
    debug_assert_eq!(cidx, m);

    // The collected columns generate a finite-index sublattice when the
    // input data is off; unimodularity is the real contract.
    let (_, dd, _) = crate::numeric::intmat::smith_form(&change);
    for i in 0..m {
        if dd[(i, i)].abs() != 1 {
            return Err(Error::BadInput(
                "adapted basis is not unimodular; prescribed data does not split".into(),
            ));
        }
    }
    let change_inv = crate::numeric::intmat::unimodular_inverse(&change);
    let radical_rank = radical.len();
    let basis = SymplecticBasis {
        change,
        change_inv,
        blocks,
        radical_rank,
    };
    debug_assert!(check_block_form(l, &basis));
    Ok(basis)
}

fn check_block_form(l: &SkewLattice, b: &SymplecticBasis) -> bool {
    let g = b.change.transpose().mul(&l.gram).mul(&b.change);
    let r = b.pairs();
    for i in 0..g.nr {
        for j in 0..g.nc {
            let expected = if i / 2 == j / 2 && i < 2 * r && j < 2 * r {
                if i == j {
                    0
                } else if i < j {
                    b.blocks[i / 2]
                } else {
                    -b.blocks[i / 2]
                }
            } else {
                0
            };
            if g[(i, j)] != expected {
                return false;
            }
        }
    }
    true
}

fn unit_vec(m: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; m];
    v[i] = 1;
    v
}

fn set_col(m: &mut IMat, c: usize, v: &[i64]) {
    for r in 0..m.nr {
        m[(r, c)] = v[r];
    }
}

/// Greedy maximal independent subset (over Q) of the given vectors,
/// keeping at most `want` of them in order.
fn independent_subset(vecs: &[Vec<i64>], want: usize) -> Vec<Vec<i64>> {
    let mut picked: Vec<Vec<i64>> = Vec::new();
    for v in vecs {
        if picked.len() == want {
            break;
        }
        let mut rows = picked.clone();
        rows.push(v.clone());
        let mat = IMat::from_rows(rows);
        if crate::numeric::intmat::rank(&mat) == picked.len() + 1 {
            picked.push(v.clone());
        }
    }
    picked
}

/// Symplectic reduction of a list of columns spanning a sublattice
/// orthogonal to everything already split off.
#[allow(clippy::type_complexity)]
fn reduce_complement(
    l: &SkewLattice,
    mut cols: Vec<Vec<i64>>,
) -> (Vec<(Vec<i64>, Vec<i64>, i64)>, Vec<Vec<i64>>) {
    let mut pairs = Vec::new();
    loop {
        let k = cols.len();
        // smallest nonzero pairing
        let mut best: Option<(usize, usize, i64)> = None;
        for i in 0..k {
            for j in i + 1..k {
                let d = l.form(&cols[i], &cols[j]).abs();
                if d != 0 && (best.is_none() || d < best.unwrap().2) {
                    best = Some((i, j, d));
                }
            }
        }
        let (mut pi, mut pj) = match best {
            None => break,
            Some((i, j, _)) => (i, j),
        };
        if l.form(&cols[pi], &cols[pj]) < 0 {
            std::mem::swap(&mut pi, &mut pj);
        }

        // Euclidean passes until the pivot divides every pairing with
        // the pair vectors.
        loop {
            let d = l.form(&cols[pi], &cols[pj]);
            debug_assert!(d > 0);
            let mut improved = false;
            for t in 0..k {
                if t == pi || t == pj {
                    continue;
                }
                let a = l.form(&cols[pi], &cols[t]);
                if a % d != 0 {
                    // replace pj by combination achieving gcd(d, a)
                    let q = a.div_euclid(d);
                    for x in 0..cols[t].len() {
                        let sub = q * cols[pj][x];
                        cols[t][x] -= sub;
                    }
                    // now omega(pi, t) = a - q d, smaller than d; swap in
                    std::mem::swap(&mut pj, &mut pi);
                    std::mem::swap(&mut pi, &mut pj); // no-op, keep names
                    let tmp = cols[pj].clone();
                    cols[pj] = cols[t].clone();
                    cols[t] = tmp;
                    improved = true;
                    break;
                }
                let b = l.form(&cols[pj], &cols[t]);
                if b % d != 0 {
                    let q = b.div_euclid(d);
                    for x in 0..cols[t].len() {
                        let sub = q * cols[pi][x];
                        cols[t][x] += sub;
                    }
                    let tmp = cols[pi].clone();
                    cols[pi] = cols[t].clone();
                    cols[t] = tmp;
                    improved = true;
                    break;
                }
            }
            if !improved {
                break;
            }
        }

        // clear pairings against the rest
        let d = l.form(&cols[pi], &cols[pj]);
        let alpha = cols[pi].clone();
        let beta = cols[pj].clone();
        let mut rest = Vec::new();
        for (t, c) in cols.iter().enumerate() {
            if t == pi || t == pj {
                continue;
            }
            let a = l.form(&beta, c); // coefficient along alpha
            let b = l.form(&alpha, c);
            debug_assert_eq!(a % d, 0);
            debug_assert_eq!(b % d, 0);
            let mut nc = c.clone();
            for x in 0..nc.len() {
                nc[x] += (a / d) * alpha[x] - (b / d) * beta[x];
            }
            rest.push(nc);
        }
        pairs.push((alpha, beta, d));
        cols = rest;
    }
    (pairs, cols)
}

/// Group homomorphism `L -> C*` given by a log-value on each basis
/// vector of the ambient lattice; extended multiplicatively.
#[derive(Clone, Debug)]
pub struct ScalarMap {
    pub values: Vec<LogVal>,
}

impl ScalarMap {
    pub fn trivial(rank: usize, prec: Prec) -> Self {
        ScalarMap {
            values: (0..rank).map(|_| LogVal::one(prec)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn prec(&self) -> Prec {
        Prec(self.values[0].log.prec().0)
    }

    pub fn eval(&self, k: &[i64]) -> LogVal {
        assert_eq!(k.len(), self.values.len());
        let prec = self.prec();
        let mut log = prec.zero();
        let mut tmp = prec.zero();
        for (ki, v) in k.iter().zip(self.values.iter()) {
            if *ki == 0 {
                continue;
            }
            tmp.assign(&v.log * *ki);
            log += &tmp;
        }
        LogVal::from_log(log)
    }

    /// Pointwise product with another scalar map on the same lattice.
    pub fn mul(&self, other: &ScalarMap) -> ScalarMap {
        ScalarMap {
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }
}

/// Rescaled monomial map `f_{s, s'} : T_q(L') -> T_q(L)`, acting by
/// `x'^k  |->  (s'(k)/s(f k)) x^{f k}`.
#[derive(Clone, Debug)]
pub struct MonomialMap {
    /// integer matrix of the lattice map f : L' -> L
    pub lattice_map: IMat,
    /// s' on the source lattice L'
    pub source_scalar: ScalarMap,
    /// s on the target lattice L
    pub target_scalar: ScalarMap,
}

impl MonomialMap {
    pub fn rescale(&self, k: &[i64]) -> LogVal {
        let fk = self.lattice_map.mul_vec(k);
        self.source_scalar.eval(k).mul(&self.target_scalar.eval(&fk).inv())
    }

    /// Form compatibility `f^T omega_target f = omega_source`.
    pub fn check_forms(&self, source: &SkewLattice, target: &SkewLattice) -> Result<()> {
        let lhs = self
            .lattice_map
            .transpose()
            .mul(&target.gram)
            .mul(&self.lattice_map);
        if lhs == source.gram {
            Ok(())
        } else {
            Err(Error::FormIncompatible)
        }
    }

    /// Composition `self ∘ other` (apply `other` first).
    ///
    /// The composite rescale is
    /// `s'_other(k)/s_other(g k) * s'_self(g k)/s_self(f g k)`; folding
    /// the middle factors into the source scalar keeps the result in the
    /// two-scalar normal form. When the chain telescopes
    /// (`self.source_scalar = other.target_scalar`) the correction is
    /// trivial.
    pub fn compose(&self, other: &MonomialMap) -> MonomialMap {
        let rank = other.lattice_map.nc;
        let mut values = Vec::with_capacity(rank);
        for j in 0..rank {
            let mut e = vec![0i64; rank];
            e[j] = 1;
            let ge = other.lattice_map.mul_vec(&e);
            let mid = self
                .source_scalar
                .eval(&ge)
                .mul(&other.target_scalar.eval(&ge).inv());
            values.push(other.source_scalar.values[j].mul(&mid));
        }
        MonomialMap {
            lattice_map: self.lattice_map.mul(&other.lattice_map),
            source_scalar: ScalarMap { values },
            target_scalar: self.target_scalar.clone(),
        }
    }
}

/// Irreducible representation of the reduced quantum torus at `q`,
/// realized on `C^(n^r)` by clocks and shifts in the adapted basis.
#[derive(Clone, Debug)]
pub struct TorusRepresentation {
    pub lattice: SkewLattice,
    pub basis: SymplecticBasis,
    pub scalar: ScalarMap,
    pub q: RootOfUnity,
}

impl TorusRepresentation {
    pub fn new(
        lattice: SkewLattice,
        basis: SymplecticBasis,
        scalar: ScalarMap,
        q: RootOfUnity,
    ) -> Self {
        assert_eq!(scalar.rank(), lattice.rank);
        TorusRepresentation {
            lattice,
            basis,
            scalar,
            q,
        }
    }

    pub fn prec(&self) -> Prec {
        self.q.prec()
    }

    pub fn factors(&self) -> usize {
        self.basis.pairs()
    }

    pub fn dim(&self) -> usize {
        (self.q.n as usize).pow(self.factors() as u32)
    }

    /// Tensor index <-> flat index, factor 0 slowest.
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        let n = self.q.n as usize;
        digits.iter().fold(0, |acc, &d| acc * n + d)
    }

    pub fn digits(&self, mut flat: usize) -> Vec<usize> {
        let n = self.q.n as usize;
        let r = self.factors();
        let mut d = vec![0; r];
        for i in (0..r).rev() {
            d[i] = flat % n;
            flat /= n;
        }
        d
    }

    /// sigma(k) = s(n k): the reduction character, with log branch.
    pub fn sigma(&self, k: &[i64]) -> LogVal {
        self.scalar.eval(k).pow_i64(self.q.n as i64)
    }

    /// Whether `x^k` is central: all symplectic pairings vanish mod n.
    pub fn is_central(&self, k: &[i64]) -> bool {
        let n = self.q.n as i64;
        let a = self.basis.adapted_coords(k);
        for i in 0..self.factors() {
            if (self.basis.blocks[i] * a[2 * i]).rem_euclid(n) != 0
                || (self.basis.blocks[i] * a[2 * i + 1]).rem_euclid(n) != 0
            {
                return false;
            }
        }
        true
    }

    /// Image of the Weyl-ordered monomial `x^k` (original coordinates).
    pub fn monomial(&self, k: &[i64]) -> GPMatrix {
        self.monomial_scaled(k, None)
    }

    /// Image of `c * x^k`, with `c` given as an extra log-scalar.
    pub fn monomial_scaled(&self, k: &[i64], extra: Option<&LogVal>) -> GPMatrix {
        let n = self.q.n as i64;
        let r = self.factors();
        let nn = self.q.n as usize;
        let a = self.basis.adapted_coords(k);
        let mut scalar = self.scalar.eval(k);
        if let Some(e) = extra {
            scalar = scalar.mul(e);
        }
        // Weyl correction q^{-sum d_i a_i b_i}
        let mut weyl: i64 = 0;
        for i in 0..r {
            weyl = (weyl - self.basis.blocks[i] * a[2 * i].rem_euclid(n) % n * (a[2 * i + 1].rem_euclid(n)) % n)
                .rem_euclid(n);
        }
        // radical part contributes only scalars, already in scalar.eval
        let base = Complex::from(scalar.value() * self.q.pow(weyl));

        let dim = self.dim();
        let mut perm = vec![0usize; dim];
        let mut scales = Vec::with_capacity(dim);
        let prec = self.prec();
        let mut digits = vec![0usize; r];
        for j in 0..dim {
            // decode digits incrementally
            if j > 0 {
                let mut i = r;
                loop {
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] == nn {
                        digits[i] = 0;
                        if i == 0 {
                            break;
                        }
                    } else {
                        break;
                    }
                }
            }
            let mut exp: i64 = 0;
            let mut target = 0usize;
            for i in 0..r {
                let ai = a[2 * i].rem_euclid(n);
                let bi = a[2 * i + 1].rem_euclid(n);
                let jn = (digits[i] as i64 + bi).rem_euclid(n);
                exp = (exp + 2 * self.basis.blocks[i] % n * ai % n * jn) % n;
                target = target * nn + jn as usize;
            }
            perm[j] = target;
            let mut s = prec.zero();
            s.assign(&base * self.q.pow(exp));
            scales.push(s);
        }
        GPMatrix::new(perm, scales)
    }

    /// Eigenvalues of a non-central monomial, with common multiplicity,
    /// plus eigenvectors assembled from permutation cycles (sparse pairs).
    #[allow(clippy::type_complexity)]
    pub fn monomial_eigendata(
        &self,
        k: &[i64],
    ) -> Result<(Vec<(Complex, Vec<(usize, Complex)>)>, usize)> {
        if self.is_central(k) {
            return Err(Error::CentralMonomial);
        }
        let g = self.monomial(k);
        let prec = self.prec();
        let mut out: Vec<(Complex, Vec<(usize, Complex)>)> = Vec::new();
        for cyc in g.cycles() {
            let m = cyc.len() as u32;
            // product of scales along the cycle, with a log branch for roots
            let mut prod = prec.one();
            for &c in &cyc {
                prod = Complex::from(prod.clone() * &g.scales[c]);
            }
            let lp = LogVal::from_value_principal(&prod);
            for l in 0..m {
                // lambda = exp((log prod + 2 pi i l)/m)
                let mut log = lp.log.clone();
                let two_pi_i = Complex::from(prec.pi_i().clone() * 2u32);
                log += Complex::from(two_pi_i.clone() * l);
                let lambda = LogVal::from_log(Complex::from(log.clone() / m)).value();
                // v_{t+1} = v_t * scale_t / lambda walking the cycle
                let mut coeffs = Vec::with_capacity(cyc.len());
                let mut cur = prec.one();
                let inv_lambda = lambda.clone().recip();
                for (t, &c) in cyc.iter().enumerate() {
                    coeffs.push((c, cur.clone()));
                    if t + 1 < cyc.len() {
                        cur = Complex::from(cur.clone() * &g.scales[c]);
                        cur = Complex::from(cur.clone() * &inv_lambda);
                    }
                }
                out.push((lambda, coeffs));
            }
        }
        let mult = self.dim() / self.q.n as usize;
        Ok((out, mult))
    }

    /// `f(rho(c x^k))` where `f` is the unique degree < n polynomial with
    /// the prescribed values on the n-th roots of the central value of
    /// `(c x^k)^n`; `values_on_roots[j]` is the value at root `q^{2j} y`.
    pub fn functional_calculus(
        &self,
        g: &GPMatrix,
        y: &Complex,
        values_on_roots: &[Complex],
    ) -> Result<MonomialPolynomial> {
        let n = self.q.n as usize;
        if values_on_roots.len() != n {
            return Err(Error::MissingRootValue(values_on_roots.len()));
        }
        let prec = self.prec();
        // f_m = (1/n) y^{-m} sum_j v_j q^{-2jm}
        let inv_y = y.clone().recip();
        let mut coeffs = Vec::with_capacity(n);
        let mut ypow = prec.one();
        let nc = prec.cplx_i64(n as i64, 0);
        for m in 0..n {
            let mut acc = prec.zero();
            let mut tmp = prec.zero();
            for (j, v) in values_on_roots.iter().enumerate() {
                tmp.assign(v * self.q.pow(-2 * (j as i64) * (m as i64)));
                acc += &tmp;
            }
            acc = Complex::from(acc.clone() * &ypow);
            acc = Complex::from(acc.clone() / &nc);
            coeffs.push(acc);
            ypow = Complex::from(ypow.clone() * &inv_y);
        }
        Ok(MonomialPolynomial {
            gp: g.clone(),
            coeffs,
        })
    }

    /// Partition of the standard basis into simultaneous eigenspaces of a
    /// family of diagonally-acting monomials.
    ///
    /// Keys are the exact integer exponent patterns `(e_f)` with the
    /// eigenvalue on member `f` equal to `s(v_f) q^(2 e_f)`.
    pub fn weight_blocks(&self, family: &[Vec<i64>]) -> Result<WeightBlocks> {
        let n = self.q.n as i64;
        let r = self.factors();
        // each family member must act diagonally: shift part = 0 mod n
        let mut clock_exps: Vec<Vec<i64>> = Vec::new();
        for v in family {
            let a = self.basis.adapted_coords(v);
            for i in 0..r {
                if (self.basis.blocks[i] * a[2 * i + 1]).rem_euclid(n) != 0 {
                    return Err(Error::NonDiagonalAction);
                }
            }
            clock_exps.push((0..r).map(|i| (self.basis.blocks[i] * a[2 * i]).rem_euclid(n)).collect());
        }
        let dim = self.dim();
        let mut blocks: std::collections::BTreeMap<Vec<i64>, Vec<usize>> =
            std::collections::BTreeMap::new();
        for flat in 0..dim {
            let digits = self.digits(flat);
            let key: Vec<i64> = clock_exps
                .iter()
                .map(|ce| {
                    ce.iter()
                        .zip(digits.iter())
                        .map(|(&c, &d)| c * d as i64)
                        .sum::<i64>()
                        .rem_euclid(n)
                })
                .collect();
            blocks.entry(key).or_default().push(flat);
        }
        Ok(WeightBlocks {
            family: family.to_vec(),
            blocks,
        })
    }
}

/// Simultaneous eigenspace partition of the standard basis; each block is
/// a coordinate subspace listed by flat indices.
#[derive(Clone, Debug)]
pub struct WeightBlocks {
    pub family: Vec<Vec<i64>>,
    pub blocks: std::collections::BTreeMap<Vec<i64>, Vec<usize>>,
}

impl WeightBlocks {
    pub fn block_indices(&self, key: &[i64]) -> Option<&[usize]> {
        self.blocks.get(key).map(|v| v.as_slice())
    }
}

/// A degree < n polynomial in a generalized permutation matrix, kept in
/// factored form so application to a dense matrix costs O(n dim^2).
#[derive(Clone, Debug)]
pub struct MonomialPolynomial {
    pub gp: GPMatrix,
    pub coeffs: Vec<Complex>,
}

impl MonomialPolynomial {
    pub fn prec(&self) -> Prec {
        self.gp.prec()
    }

    /// `(sum_m c_m G^m) * d`.
    pub fn apply_left(&self, d: &DenseMatrix) -> DenseMatrix {
        let prec = self.prec();
        let dim = self.gp.dim;
        let mut acc = d.scale(&self.coeffs[0]);
        let mut power = d.clone();
        let mut tmp = prec.zero();
        for c in self.coeffs.iter().skip(1) {
            power = self.gp.apply_left(&power);
            for r in 0..dim {
                for col in 0..dim {
                    tmp.assign(c * power.at(r, col));
                    *acc.at_mut(r, col) += &tmp;
                }
            }
        }
        acc
    }

    pub fn apply_vec(&self, v: &[Complex]) -> Vec<Complex> {
        let prec = self.prec();
        let dim = self.gp.dim;
        let mut acc: Vec<Complex> = v
            .iter()
            .map(|x| x.clone() * &self.coeffs[0])
            .collect();
        let mut power = v.to_vec();
        let mut tmp = prec.zero();
        for c in self.coeffs.iter().skip(1) {
            power = self.gp.apply_vec(&power);
            for r in 0..dim {
                tmp.assign(c * &power[r]);
                acc[r] += &tmp;
            }
        }
        acc
    }

    pub fn dense(&self) -> DenseMatrix {
        self.apply_left(&DenseMatrix::identity(self.gp.dim, self.prec()))
    }

    /// Determinant via the spectrum of the underlying permutation cycles:
    /// `det f(G) = prod over eigenvalues lambda of f(lambda)`; O(dim n).
    pub fn det_via_spectrum(&self) -> Complex {
        let prec = self.prec();
        let mut det = prec.one();
        for cyc in self.gp.cycles() {
            let m = cyc.len() as u32;
            let mut prod = prec.one();
            for &c in &cyc {
                prod = Complex::from(prod.clone() * &self.gp.scales[c]);
            }
            let lp = LogVal::from_value_principal(&prod);
            for l in 0..m {
                let two_pi_i = Complex::from(prec.pi_i().clone() * 2u32);
                let mut log = lp.log.clone();
                log += Complex::from(two_pi_i.clone() * l);
                let lambda = LogVal::from_log(Complex::from(log.clone() / m)).value();
                // Horner
                let mut val = self.coeffs.last().unwrap().clone();
                for c in self.coeffs.iter().rev().skip(1) {
                    val = Complex::from(val.clone() * &lambda);
                    val += c;
                }
                det = Complex::from(det.clone() * &val);
            }
        }
        det
    }
}

/// Residual of the defining relations `x_i x_j = q^{2 w_ij} x_j x_i`
/// over all basis pairs; should vanish to working accuracy.
pub fn relations_residual(rep: &TorusRepresentation) -> rug::Float {
    let m = rep.lattice.rank;
    let prec = rep.prec();
    let mut worst = rug::Float::new(prec.0);
    let gens: Vec<GPMatrix> = (0..m)
        .map(|i| {
            let mut k = vec![0i64; m];
            k[i] = 1;
            rep.monomial(&k)
        })
        .collect();
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let mut ki = vec![0i64; m];
            ki[i] = 1;
            let mut kj = vec![0i64; m];
            kj[j] = 1;
            let w = rep.lattice.form(&ki, &kj);
            let lhs = gens[i].compose(&gens[j]).unwrap();
            let rhs = gens[j].compose(&gens[i]).unwrap().scale(&rep.q.pow(2 * w));
            let d = lhs.dense().sub(&rhs.dense()).max_abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{abs_c, Prec};

    fn j2() -> IMat {
        IMat::from_rows(vec![vec![0, 1], vec![-1, 0]])
    }

    #[test]
    fn normal_form_j2() {
        let l = SkewLattice::new(j2());
        let b = skew_normal_form(&l);
        assert_eq!(b.blocks, vec![1]);
        assert_eq!(b.radical_rank, 0);
    }

    #[test]
    fn normal_form_once_punctured_torus_epsilon() {
        // standard once-punctured-torus triangulation form
        let g = IMat::from_rows(vec![vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]]);
        let l = SkewLattice::new(g);
        let b = skew_normal_form(&l);
        assert_eq!(b.blocks, vec![2]);
        assert_eq!(b.radical_rank, 1);
    }

    #[test]
    fn weyl_composition_law() {
        // rank-4: blocks (2, 1); random-ish scalar map
        let g = IMat::from_rows(vec![
            vec![0, 2, 0, 0],
            vec![-2, 0, 0, 0],
            vec![0, 0, 0, 1],
            vec![0, 0, -1, 0],
        ]);
        let l = SkewLattice::new(g.clone());
        let prec = Prec::default();
        let q = RootOfUnity::new(3, 1, prec);
        let b = skew_normal_form(&l);
        let mut vals = Vec::new();
        for i in 0..4 {
            vals.push(LogVal::from_log(prec.cplx_f64(0.1 * i as f64, 0.2 + i as f64)));
        }
        let rep = TorusRepresentation::new(l.clone(), b, ScalarMap { values: vals }, q.clone());

        let ks = [
            vec![1i64, 0, -1, 2],
            vec![0i64, 1, 1, 0],
            vec![2i64, -1, 0, 1],
        ];
        for k in &ks {
            for m in &ks {
                let w = l.form(k, m);
                let sum: Vec<i64> = k.iter().zip(m.iter()).map(|(a, b)| a + b).collect();
                let lhs = rep.monomial(k).compose(&rep.monomial(m)).unwrap();
                let rhs = rep.monomial(&sum).scale(&q.pow(w));
                let d = lhs.dense().sub(&rhs.dense()).max_abs();
                assert!(d < prec.tol(16), "weyl law failed: {}", d);
            }
        }
    }

    #[test]
    fn defining_relations() {
        let g = IMat::from_rows(vec![
            vec![0, 1, 0, -2],
            vec![-1, 0, 3, 0],
            vec![0, -3, 0, 1],
            vec![2, 0, -1, 0],
        ]);
        let l = SkewLattice::new(g);
        let prec = Prec::default();
        let q = RootOfUnity::new(3, 1, prec);
        let b = skew_normal_form(&l);
        let rep = TorusRepresentation::new(
            l,
            b,
            ScalarMap::trivial(4, prec),
            q,
        );
        let r = relations_residual(&rep);
        assert!(r < prec.tol(16), "relations residual {}", r);
    }

    #[test]
    fn central_monomial_is_scalar() {
        let g = IMat::from_rows(vec![vec![0, 1], vec![-1, 0]]);
        let l = SkewLattice::new(g);
        let prec = Prec::default();
        let q = RootOfUnity::new(3, 1, prec);
        let b = skew_normal_form(&l);
        let rep = TorusRepresentation::new(l, b, ScalarMap::trivial(2, prec), q.clone());
        // k = n * alpha_1 acts by sigma(alpha_1) = 1
        let k = vec![3i64, 0];
        assert!(rep.is_central(&k));
        let gc = rep.monomial(&k);
        let d = gc
            .dense()
            .sub(&GPMatrix::identity(rep.dim(), prec).dense())
            .max_abs();
        assert!(d < prec.tol(16));
        assert!(rep.monomial_eigendata(&k).is_err());
    }

    #[test]
    fn eigendata_spectrum_law() {
        // non-central monomials on a rank-2 symplectic lattice at n = 3
        let g = IMat::from_rows(vec![vec![0, 1], vec![-1, 0]]);
        let l = SkewLattice::new(g);
        let prec = Prec::default();
        let q = RootOfUnity::new(3, 1, prec);
        let b = skew_normal_form(&l);
        let mut vals = Vec::new();
        vals.push(LogVal::from_log(prec.cplx_f64(0.3, 1.1)));
        vals.push(LogVal::from_log(prec.cplx_f64(-0.2, 0.4)));
        let rep = TorusRepresentation::new(l, b, ScalarMap { values: vals }, q.clone());
        for k in [vec![1i64, 0], vec![0i64, 1], vec![1i64, 2]] {
            let (eigs, mult) = rep.monomial_eigendata(&k).unwrap();
            assert_eq!(mult, 1);
            assert_eq!(eigs.len(), 3);
            let sigma = rep.sigma(&k).value();
            let g = rep.monomial(&k);
            for (lambda, vec_pairs) in &eigs {
                // lambda^3 = sigma(k)
                let l3 = lambda.clone() * lambda * lambda.clone();
                let d = abs_c(&Complex::from(l3.clone() - &sigma));
                assert!(d < prec.tol(16));
                // G v = lambda v
                let mut v = vec![prec.zero(); rep.dim()];
                for (i, c) in vec_pairs {
                    v[*i] = c.clone();
                }
                let gv = g.apply_vec(&v);
                for (gvi, vi) in gv.iter().zip(v.iter()) {
                    let want = Complex::from(lambda.clone() * vi);
                    let d = abs_c(&(gvi.clone() - &want));
                    assert!(d < prec.tol(16));
                }
            }
        }
    }

    #[test]
    fn functional_calculus_identity_and_monomial() {
        let g = IMat::from_rows(vec![vec![0, 1], vec![-1, 0]]);
        let l = SkewLattice::new(g);
        let prec = Prec::default();
        let q = RootOfUnity::new(3, 1, prec);
        let b = skew_normal_form(&l);
        let rep = TorusRepresentation::new(l, b, ScalarMap::trivial(2, prec), q.clone());
        let k = vec![0i64, 1];
        let gp = rep.monomial(&k);
        let y = prec.one();
        // values == 1 -> identity
        let ones: Vec<Complex> = (0..3).map(|_| prec.one()).collect();
        let f = rep.functional_calculus(&gp, &y, &ones).unwrap();
        let d = f
            .dense()
            .sub(&DenseMatrix::identity(rep.dim(), prec))
            .max_abs();
        assert!(d < prec.tol(16));
        // values == root itself -> the monomial back
        let roots: Vec<Complex> = (0..3).map(|j| q.pow(2 * j)).collect();
        let f2 = rep.functional_calculus(&gp, &y, &roots).unwrap();
        let d2 = f2.dense().sub(&gp.dense()).max_abs();
        assert!(d2 < prec.tol(16));
        // determinant via spectrum matches dense LU
        let d3 = abs_c(&(f2.det_via_spectrum() - f2.dense().lu_det()));
        assert!(d3 < prec.tol(16));
    }

    #[test]
    fn weight_blocks_clock() {
        // n = 3 clock on V: three one-dimensional blocks
        let g = IMat::from_rows(vec![vec![0, 1], vec![-1, 0]]);
        let l = SkewLattice::new(g);
        let prec = Prec::default();
        let q = RootOfUnity::new(3, 1, prec);
        let b = skew_normal_form(&l);
        let rep = TorusRepresentation::new(l, b, ScalarMap::trivial(2, prec), q);
        let alpha = rep.basis.alpha(0);
        let wb = rep.weight_blocks(&[alpha]).unwrap();
        assert_eq!(wb.blocks.len(), 3);
        for idxs in wb.blocks.values() {
            assert_eq!(idxs.len(), 1);
        }
        // empty family: single block
        let wb0 = rep.weight_blocks(&[]).unwrap();
        assert_eq!(wb0.blocks.len(), 1);
        assert_eq!(wb0.blocks.values().next().unwrap().len(), 3);
    }
}
