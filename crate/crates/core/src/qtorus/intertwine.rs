//! Intertwiners of quantum-torus representations.
//!
//! Columns of the intertwiner are built combinatorially: a joint
//! eigenvector of the clock images is produced by spectral projection,
//! then shifted around by ladder operators. No general eigensolver is
//! involved, and every operator applied is a generalized permutation
//! matrix, so the construction costs O(dim^2).

use super::{MonomialMap, TorusRepresentation};
use crate::error::{Error, Result};
use crate::numeric::{abs1_c, abs_c, DenseMatrix, GPMatrix, Prec};
use rug::{Assign, Complex, Float};

/// The action whose intertwiner with `rep_source` is being computed:
/// either a second representation of the same lattice, or
/// `rep_target ∘ map` for a rescaled monomial map.
enum Side<'a> {
    Plain(&'a TorusRepresentation),
    Mapped(&'a TorusRepresentation, &'a MonomialMap),
}

impl<'a> Side<'a> {
    fn monomial(&self, k: &[i64]) -> GPMatrix {
        match self {
            Side::Plain(rep) => rep.monomial(k),
            Side::Mapped(rep, map) => {
                let fk = map.lattice_map.mul_vec(k);
                let scale = map.rescale(k);
                rep.monomial_scaled(&fk, Some(&scale))
            }
        }
    }

    fn sigma_value(&self, k: &[i64]) -> Complex {
        match self {
            Side::Plain(rep) => rep.sigma(k).value(),
            Side::Mapped(rep, map) => {
                let fk = map.lattice_map.mul_vec(k);
                let n = rep.q.n as i64;
                let scale_n = map.rescale(k).pow_i64(n).value();
                Complex::from(scale_n.clone() * &rep.sigma(&fk).value())
            }
        }
    }
}

/// Intertwiner `B` with `B . rho_src(x) = rho'(x) . B` where
/// `rho' = rep_target ∘ map`; unitary, with the global phase fixed so the
/// first nonzero entry of column 0 is positive real.
///
/// Central characters are verified, never assumed: a mismatch names the
/// offending lattice vector, which is the symptom of non-invariant input
/// data upstream.
pub fn monomial_intertwiner(
    rep_source: &TorusRepresentation,
    rep_target: &TorusRepresentation,
    map: &MonomialMap,
) -> Result<DenseMatrix> {
    map.check_forms(&rep_source.lattice, &rep_target.lattice)?;
    build_intertwiner(rep_source, Side::Mapped(rep_target, map))
}

/// Intertwiner between two representations of the same lattice with the
/// same central character: `U . rho_a(x) = rho_b(x) . U`.
pub fn intertwine_reps(
    rep_a: &TorusRepresentation,
    rep_b: &TorusRepresentation,
) -> Result<DenseMatrix> {
    if rep_a.lattice.gram != rep_b.lattice.gram {
        return Err(Error::DimensionMismatch(
            "intertwine_reps requires identical lattices".into(),
        ));
    }
    build_intertwiner(rep_a, Side::Plain(rep_b))
}

fn build_intertwiner(src: &TorusRepresentation, other: Side) -> Result<DenseMatrix> {
    let prec = src.prec();
    let n = src.q.n as usize;
    let r = src.factors();
    let dim = src.dim();
    let rank = src.lattice.rank;

    check_central_characters(src, &other)?;

    // Clock images on the other side and their target eigenvalues.
    let mut clocks = Vec::with_capacity(r);
    let mut mus = Vec::with_capacity(r);
    for i in 0..r {
        let alpha = src.basis.alpha(i);
        clocks.push(other.monomial(&alpha));
        mus.push(src.scalar.eval(&alpha).value());
    }

    // v0: joint eigenvector via iterated spectral projection
    //     P_i = (1/n) sum_m (G_i / mu_i)^m.
    let mut v0: Option<Vec<Complex>> = None;
    let nc = prec.cplx_i64(n as i64, 0);
    let seed_tol = prec.tol(prec.bits() / 2);
    for seed in 0..dim {
        let mut w: Vec<Complex> = (0..dim).map(|_| prec.zero()).collect();
        w[seed].assign(1);
        for i in 0..r {
            let ginv = mus[i].clone().recip();
            let gnorm = clocks[i].scale(&ginv);
            let mut acc = w.clone();
            let mut power = w.clone();
            for _ in 1..n {
                power = gnorm.apply_vec(&power);
                for (a, p) in acc.iter_mut().zip(power.iter()) {
                    *a += p;
                }
            }
            for a in acc.iter_mut() {
                let t = (*a).clone() / &nc;
                a.assign(&t);
            }
            w = acc;
        }
        let nrm = vec_norm(&w);
        if nrm > seed_tol {
            let inv = Float::with_val(prec.bits(), 1u32) / &nrm;
            for a in w.iter_mut() {
                let t = (*a).clone() * &inv;
                a.assign(&t);
            }
            v0 = Some(w);
            break;
        }
    }
    let v0 = v0.ok_or_else(|| {
        Error::CentralCharacterMismatch(vec![], "joint eigenspace projection vanished".into())
    })?;

    // Ladder operators rho'(s(beta_i)^{-1} x^{beta_i}).
    let mut ladders = Vec::with_capacity(r);
    for i in 0..r {
        let beta = src.basis.beta(i);
        let g = other.monomial(&beta);
        let inv = src.scalar.eval(&beta).value().recip();
        ladders.push(g.scale(&inv));
    }

    // Columns by odometer over tensor digits; bases[i] holds the vector
    // for the prefix with digits i..r-1 all zero.
    let mut b = DenseMatrix::zero(dim, prec);
    let mut bases: Vec<Vec<Complex>> = vec![v0.clone(); r + 1];
    let mut digits = vec![0usize; r];
    let mut col = 0usize;
    loop {
        b.set_column(col_index(src, &digits), &bases[r]);
        col += 1;
        if col == dim {
            break;
        }
        // increment odometer, fastest digit last
        let mut i = r - 1;
        loop {
            digits[i] += 1;
            if digits[i] < n {
                break;
            }
            digits[i] = 0;
            i -= 1;
        }
        // recompute chain from level i
        bases[i + 1] = if digits[i] == 0 {
            bases[i].clone()
        } else {
            ladders[i].apply_vec(&bases[i + 1])
        };
        for j in i + 1..r {
            debug_assert_eq!(digits[j], 0);
            bases[j + 1] = bases[j].clone();
        }
    }

    // Phase convention: first nonzero entry of column 0 positive real.
    let tol = prec.tol(prec.bits() / 2);
    let mut phase = None;
    for row in 0..dim {
        let z = b.at(row, 0);
        if abs1_c(z) > tol {
            let m = abs_c(z);
            let mut p = z.clone().conj();
            p = Complex::from(p.clone() / &m);
            phase = Some(p);
            break;
        }
    }
    if let Some(p) = phase {
        b = b.scale(&p);
    }

    // Guard: verify one defining relation to catch wiring errors early.
    debug_assert!({
        let mut k = vec![0i64; rank];
        k[0] = 1;
        let res = intertwining_residual(&b, src, |kk| other.monomial(kk), &[k]);
        res < prec.tol(breathing_room(prec))
    });

    Ok(b)
}

fn breathing_room(prec: Prec) -> u32 {
    // 24 bits of slack on intertwining residuals
    24.min(prec.bits() - 1)
}

fn col_index(rep: &TorusRepresentation, digits: &[usize]) -> usize {
    rep.flat_index(digits)
}

fn vec_norm(v: &[Complex]) -> Float {
    let prec = v[0].prec().0;
    let mut acc = Float::new(prec);
    for z in v {
        acc += z.real().clone().square();
        acc += z.imag().clone().square();
    }
    acc.sqrt()
}

fn check_central_characters(src: &TorusRepresentation, other: &Side) -> Result<()> {
    let prec = src.prec();
    let rank = src.lattice.rank;
    let tol = prec.tol(prec.bits() / 2);
    // sigma agrees on every basis vector, and radical scalars agree exactly.
    for i in 0..rank {
        let mut k = vec![0i64; rank];
        k[i] = 1;
        let a = src.sigma(&k).value();
        let b = other.sigma_value(&k);
        let diff = abs_c(&Complex::from(a.clone() - &b));
        let scale = abs_c(&a);
        if diff > Float::with_val(prec.bits(), &tol * &scale) {
            return Err(Error::CentralCharacterMismatch(
                k,
                format!("{:.3e}", (diff / scale).to_f64()),
            ));
        }
    }
    for j in 0..src.basis.radical_rank {
        let g = src.basis.radical_vector(j);
        let a = src.scalar.eval(&g).value();
        let gm = other.monomial(&g);
        // must be scalar * identity with the same scalar
        for (jcol, &p) in gm.perm.iter().enumerate() {
            if p != jcol {
                return Err(Error::CentralCharacterMismatch(
                    g.clone(),
                    "radical vector does not act diagonally".into(),
                ));
            }
        }
        for s in &gm.scales {
            let diff = abs_c(&Complex::from(s.clone() - &a));
            if diff > Float::with_val(prec.bits(), &tol * &abs_c(&a)) {
                return Err(Error::CentralCharacterMismatch(
                    g,
                    "radical scalar differs".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Max over the given lattice vectors of
/// `|| rho'(x^k) . B - B . rho_src(x^k) ||_max / ||B||_max`.
pub fn intertwining_residual<F>(
    b: &DenseMatrix,
    src: &TorusRepresentation,
    other_monomial: F,
    gens: &[Vec<i64>],
) -> Float
where
    F: Fn(&[i64]) -> GPMatrix,
{
    let prec = src.prec();
    let bnorm = b.max_abs();
    let mut worst = Float::new(prec.bits());
    for k in gens {
        let lhs = other_monomial(k).apply_left(b);
        let rhs = src.monomial(k).apply_right(b);
        let d = lhs.sub(&rhs).max_abs();
        if d > worst {
            worst = d;
        }
    }
    worst / bnorm
}

/// Residual helper for the mapped case.
pub fn mapped_residual(
    b: &DenseMatrix,
    src: &TorusRepresentation,
    tgt: &TorusRepresentation,
    map: &MonomialMap,
    gens: &[Vec<i64>],
) -> Float {
    intertwining_residual(
        b,
        src,
        |k| {
            let fk = map.lattice_map.mul_vec(k);
            let scale = map.rescale(k);
            tgt.monomial_scaled(&fk, Some(&scale))
        },
        gens,
    )
}

/// `|| B* B - c I ||_max` for the best scalar `c`; unitarity up to scale.
pub fn unitarity_defect(b: &DenseMatrix) -> Float {
    let prec = b.prec();
    let bb = b.conj_transpose().mul(b);
    let dim = b.dim;
    let mut c = prec.zero();
    for i in 0..dim {
        c += bb.at(i, i);
    }
    c = Complex::from(c.clone() / &prec.cplx_i64(dim as i64, 0));
    let diff = bb.sub(&DenseMatrix::identity(dim, prec).scale(&c));
    diff.max_abs()
}

#[cfg(test)]
mod tests {
    use super::super::{skew_normal_form, ScalarMap, SkewLattice, TorusRepresentation};
    use super::*;
    use crate::numeric::{IMat, LogVal, RootOfUnity};

    fn symplectic_rank2() -> SkewLattice {
        SkewLattice::new(IMat::from_rows(vec![vec![0, 1], vec![-1, 0]]))
    }

    fn simple_rep(prec: Prec, n: u32, logs: [(f64, f64); 2]) -> TorusRepresentation {
        let l = symplectic_rank2();
        let b = skew_normal_form(&l);
        let q = RootOfUnity::new(n, 1, prec);
        let vals = logs
            .iter()
            .map(|&(re, im)| LogVal::from_log(prec.cplx_f64(re, im)))
            .collect();
        TorusRepresentation::new(l, b, ScalarMap { values: vals }, q)
    }

    #[test]
    fn identity_map_gives_identity() {
        let prec = Prec::default();
        let rep = simple_rep(prec, 3, [(0.1, 0.7), (-0.3, 0.2)]);
        let map = MonomialMap {
            lattice_map: IMat::identity(2),
            source_scalar: rep.scalar.clone(),
            target_scalar: rep.scalar.clone(),
        };
        let b = monomial_intertwiner(&rep, &rep, &map).unwrap();
        let d = b.sub(&DenseMatrix::identity(rep.dim(), prec)).max_abs();
        assert!(d < prec.tol(24), "got {}", d);
    }

    #[test]
    fn fourier_for_alpha_beta_swap() {
        // map alpha -> beta, beta -> -alpha (symplectic rotation); the
        // intertwiner solves the 9 linear equations and must match the
        // direct linear solve up to the fixed phase.
        let prec = Prec::default();
        let rep = simple_rep(prec, 3, [(0.0, 0.0), (0.0, 0.0)]);
        let f = IMat::from_rows(vec![vec![0, -1], vec![1, 0]]);
        let map = MonomialMap {
            lattice_map: f.clone(),
            source_scalar: rep.scalar.clone(),
            target_scalar: rep.scalar.clone(),
        };
        let b = monomial_intertwiner(&rep, &rep, &map).unwrap();
        // residual over both generators
        let gens = vec![vec![1i64, 0], vec![0i64, 1]];
        let res = mapped_residual(&b, &rep, &rep, &map, &gens);
        assert!(res < prec.tol(24), "residual {}", res);
        // unitary
        let u = unitarity_defect(&b);
        assert!(u < prec.tol(24), "unitarity {}", u);

        // oracle: solve the intertwining equations directly as a linear
        // system in the 9 unknown entries and compare up to scalar.
        let n = rep.dim();
        let g1 = rep.monomial(&[1, 0]);
        let g2 = rep.monomial(&[0, 1]);
        let h1 = rep.monomial_scaled(&f.col(0), None); // image of alpha
        let h2 = rep.monomial_scaled(&f.col(1), None);
        // Build (I ⊗ h - g^T ⊗ I) style system by brute force.
        let mut rows: Vec<Vec<Complex>> = Vec::new();
        for (g, h) in [(g1, h1), (g2, h2)] {
            let gd = g.dense();
            let hd = h.dense();
            for i in 0..n {
                for j in 0..n {
                    let mut row = vec![prec.zero(); n * n];
                    for k in 0..n {
                        // (h b)_{ij} = sum_k h_{ik} b_{kj}
                        row[k * n + j] += hd.at(i, k);
                        // (b g)_{ij} = sum_k b_{ik} g_{kj}
                        row[i * n + k] -= gd.at(k, j);
                    }
                    rows.push(row);
                }
            }
        }
        // find kernel vector by inverse iteration on normal equations:
        // simplest path is to solve rows * x = 0 with x constrained by
        // matching one entry of b.
        let mut anchor = (0usize, 0usize);
        'outer: for i in 0..n {
            for j in 0..n {
                if abs1_c(b.at(i, j)) > prec.tol(32) {
                    anchor = (i, j);
                    break 'outer;
                }
            }
        }
        // Solve least-squares style: A^* A x = conj-anchored unit.
        // With kernel dimension 1 (Schur), x must be proportional to b.
        let dim2 = n * n;
        let mut aa = DenseMatrix::zero(dim2, prec);
        for r in &rows {
            for i in 0..dim2 {
                for j in 0..dim2 {
                    let t = r[i].clone().conj() * &r[j];
                    *aa.at_mut(i, j) += &t;
                }
            }
        }
        // add anchor row to make the system nonsingular
        let aidx = anchor.0 * n + anchor.1;
        *aa.at_mut(aidx, aidx) += &prec.one();
        let mut rhs = DenseMatrix::zero(dim2, prec);
        rhs.at_mut(aidx, 0).assign(b.at(anchor.0, anchor.1));
        let sol = aa.lu_solve(&rhs).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = b.at(i, j);
                let got = sol.at(i * n + j, 0);
                let d = abs_c(&(want.clone() - got));
                assert!(d < prec.tol(40), "entry ({i},{j}) differs by {}", d);
            }
        }
    }

    #[test]
    fn diagonal_rescaling_gives_diagonal_power_matrix() {
        // rescale beta by an n-th root of unity: intertwiner diag(q^j)
        let prec = Prec::default();
        let n = 3u32;
        let rep = simple_rep(prec, n, [(0.0, 0.0), (0.0, 0.0)]);
        let q = rep.q.clone();
        // target scalar differs from source by q on beta
        let mut vals2 = rep.scalar.values.clone();
        let two_pi_i = Complex::from(prec.pi_i().clone() * 2u32);
        vals2[1] = LogVal::from_log(Complex::from(two_pi_i.clone() / n) ).mul(&vals2[1]);
        let rep2 = TorusRepresentation::new(
            rep.lattice.clone(),
            rep.basis.clone(),
            ScalarMap { values: vals2 },
            q.clone(),
        );
        let u = intertwine_reps(&rep, &rep2).unwrap();
        // oracle: diag(q^{-j}) or diag(q^{j}) up to phase; check residual
        let gens = vec![vec![1i64, 0], vec![0i64, 1]];
        let res = intertwining_residual(&u, &rep, |k| rep2.monomial(k), &gens);
        assert!(res < prec.tol(24), "residual {}", res);
        // must be diagonal
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(abs1_c(u.at(i, j)) < prec.tol(32));
                }
            }
        }
    }

    #[test]
    fn permuted_basis_reps_intertwine() {
        // rep_b built from the swapped symplectic basis: rank-2 so this
        // exercises the plain intertwine_reps path with a nontrivial U.
        let prec = Prec::default();
        let rep = simple_rep(prec, 3, [(0.2, 0.4), (0.1, -0.3)]);
        // same lattice, basis with alpha and beta exchanged (negated).
        let mut basis2 = rep.basis.clone();
        let swap = IMat::from_rows(vec![vec![0, -1], vec![1, 0]]);
        basis2.change = basis2.change.mul(&swap);
        basis2.change_inv = crate::numeric::intmat::unimodular_inverse(&basis2.change);
        let rep2 = TorusRepresentation::new(
            rep.lattice.clone(),
            basis2,
            rep.scalar.clone(),
            rep.q.clone(),
        );
        // central characters agree (same scalar map), so U exists.
        let u = intertwine_reps(&rep, &rep2).unwrap();
        let gens = vec![vec![1i64, 0], vec![0i64, 1]];
        let res = intertwining_residual(&u, &rep, |k| rep2.monomial(k), &gens);
        assert!(res < prec.tol(24), "residual {}", res);
        let ud = unitarity_defect(&u);
        assert!(ud < prec.tol(24));
    }

    #[test]
    fn schur_uniqueness_rank1_ratio() {
        // two independently computed intertwiners differ by one scalar
        let prec = Prec::default();
        let rep = simple_rep(prec, 3, [(0.05, 0.9), (0.0, 0.13)]);
        let f = IMat::from_rows(vec![vec![1, 1], vec![0, 1]]); // transvection-ish
        // check form compatibility: f^T J f = J for SL2
        let map = MonomialMap {
            lattice_map: f,
            source_scalar: rep.scalar.clone(),
            target_scalar: rep.scalar.clone(),
        };
        let b1 = monomial_intertwiner(&rep, &rep, &map).unwrap();
        // second computation path: conjugate problem by a ladder shift of
        // v0 (the construction is deterministic, so rebuild from the map
        // composed with identity; ratios must be rank one).
        let id = MonomialMap {
            lattice_map: IMat::identity(2),
            source_scalar: rep.scalar.clone(),
            target_scalar: rep.scalar.clone(),
        };
        let composed = map.compose(&id);
        let b2 = monomial_intertwiner(&rep, &rep, &composed).unwrap();
        // rank-1 ratio test
        let mut ratio: Option<Complex> = None;
        for i in 0..rep.dim() {
            for j in 0..rep.dim() {
                if abs1_c(b2.at(i, j)) > prec.tol(40) {
                    let r = b1.at(i, j).clone() / b2.at(i, j);
                    match &ratio {
                        None => ratio = Some(r),
                        Some(r0) => {
                            let d = abs_c(&Complex::from(r.clone() - r0));
                            assert!(d < prec.tol(24), "ratios differ: {}", d);
                        }
                    }
                }
            }
        }
    }
}
