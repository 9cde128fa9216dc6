//! The flip factorization chain: rescaled monomial maps between
//! consecutive layers, the scalar-map chain they generate, and the
//! pushed monomials whose Psi weights assemble the intertwiners.
//!
//! Everything exists twice: on the Kashaev lattice of each layer, and
//! pulled back to the edge (Chekhov-Fock) lattice. The two chains share
//! the shear-bends and theta roots.

use super::psi::{psi_table, PsiTable};
use crate::error::{Error, Result};
use crate::geometry::{LayeredTriangulation, ShearBendLayers};
use crate::numeric::{abs_c, IMat, LogVal, Prec, RootOfUnity};
use crate::qtorus::{MonomialMap, ScalarMap, SkewLattice};
use crate::surface::epsilon_form;
use crate::surface::kashaev::{cfr_embedding, kashaev_gram, side_vector};
use crate::surface::mapclass::MappingClassCertificate;
use rug::Complex;

/// One flip's worth of factorization data, on one of the two lattices.
#[derive(Clone, Debug)]
pub struct FlipFactor {
    /// the pushed monomial X_i^# = M_i(X_{e_i}): lattice vector in the
    /// layer-0 lattice plus a scalar
    pub vector: Vec<i64>,
    pub scale: LogVal,
    pub psi: PsiTable,
}

/// The full factorization of the coordinate change.
#[derive(Clone, Debug)]
pub struct ChainFactorization {
    pub factors: Vec<FlipFactor>,
    /// composite rescaled monomial map including the relabeling
    /// (the map whose intertwiner is B)
    pub total_map: MonomialMap,
    /// scalar map at layer 0 (extension of sigma0 by n-th roots)
    pub s0: ScalarMap,
}

/// Kashaev-side chain. `sigma0` is the invariant lift on the layer-0
/// Kashaev lattice.
pub fn kashaev_chain(
    cert: &MappingClassCertificate,
    lt: &LayeredTriangulation,
    sbl: &ShearBendLayers,
    sigma0: &ScalarMap,
    q: &RootOfUnity,
) -> Result<ChainFactorization> {
    let n = q.n;
    let prec = q.prec();
    // s_0 = sigma0^{1/n} along stored logs
    let s0 = ScalarMap {
        values: sigma0.values.iter().map(|v| v.nth_root(n)).collect(),
    };

    let mut factors: Vec<FlipFactor> = Vec::new();
    let mut s_cur = s0.clone();
    // partial composite P_i : L_{lambda_i} -> L_{lambda_0}
    let rank = sigma0.rank();
    let mut p_mat = IMat::identity(rank);
    let mut p_scale: Vec<LogVal> = (0..rank).map(|_| LogVal::one(prec)).collect();

    for (i, frame) in cert.frames.iter().enumerate() {
        let tri = &cert.stages[i];
        let gram = kashaev_gram(tri.num_faces);
        let lat = SkewLattice::new(gram);
        // chi_e in the layer-i lattice
        let chi_e = {
            let (s1, s2) = tri.sides_of_edge(frame.edge);
            let mut v = side_vector(tri, s1);
            for (t, x) in side_vector(tri, s2).into_iter().enumerate() {
                v[t] += x;
            }
            v
        };
        // pushed monomial: X_i^# = P_i(X_{e_i})
        let vector = p_mat.mul_vec(&chi_e);
        let mut scale = LogVal::one(prec);
        for (t, &c) in chi_e.iter().enumerate() {
            if c != 0 {
                scale = scale.mul(&p_scale[t].pow_i64(c));
            }
        }
        // psi table for this flip
        let theta = sbl.theta[i].clone();
        let t_e = sbl.log_t[i][frame.edge].clone();
        let psi = psi_table(q, &t_e, &theta)?;
        factors.push(FlipFactor {
            vector,
            scale,
            psi,
        });

        // flip lattice map m_i : L_{i+1} -> L_i and the theta-rescaled
        // scalar s_{i+1}(k) = s_i(m k) theta^{omega(m k, chi_e)}
        let m_i = crate::geometry::lift::flip_kashaev_matrix(tri, frame);
        let mut next_vals = Vec::with_capacity(rank);
        for col in 0..rank {
            let mk = m_i.col(col);
            let w = lat.form(&mk, &chi_e);
            let v = s_cur.eval(&mk).mul(&theta.pow_i64(w));
            next_vals.push(v);
        }
        let s_next = ScalarMap { values: next_vals };

        // extend the partial composite: P_{i+1} = P_i o m_i with the
        // rescale of m_i folded in
        let mut new_scale = Vec::with_capacity(rank);
        for col in 0..rank {
            let mk = m_i.col(col);
            // rescale of m_i on basis vector: s_{i+1}(e) / s_i(m e)
            let resc = s_next.values[col].mul(&s_cur.eval(&mk).inv());
            // total: rescale(m_i) * previous scale at m_i(e)
            let mut prev = LogVal::one(prec);
            for (t, &c) in mk.iter().enumerate() {
                if c != 0 {
                    prev = prev.mul(&p_scale[t].pow_i64(c));
                }
            }
            new_scale.push(resc.mul(&prev));
        }
        p_mat = p_mat.mul(&m_i);
        p_scale = new_scale;
        s_cur = s_next;
    }

    // total map: f = P_N o phi_*, scalars (s_N o phi_*, s_0)
    let phi = crate::geometry::lift::phi_star_matrix(cert);
    let f = p_mat.mul(&phi);
    let src_vals: Vec<LogVal> = (0..rank)
        .map(|col| s_cur.eval(&phi.col(col)))
        .collect();
    let total_map = MonomialMap {
        lattice_map: f,
        source_scalar: ScalarMap { values: src_vals },
        target_scalar: s0.clone(),
    };

    audit_chain(&factors, sigma0, sbl, cert, prec)?;
    Ok(ChainFactorization {
        factors,
        total_map,
        s0,
    })
}

fn audit_chain(
    factors: &[FlipFactor],
    sigma0: &ScalarMap,
    sbl: &ShearBendLayers,
    cert: &MappingClassCertificate,
    prec: Prec,
) -> Result<()> {
    // (X_i^#)^n = t_{e_i}: scale^n sigma0(vector) = t_i
    let tol = prec.tol(24);
    let n = sbl.theta.len();
    let _ = n;
    for (i, f) in factors.iter().enumerate() {
        let e = cert.frames[i].edge;
        let want = sbl.t_value(i, e);
        let got = {
            let num_n = f.psi.values_on_roots.len() as i64;
            let sn = f.scale.pow_i64(num_n).value();
            Complex::from(sn * &sigma0.eval(&f.vector).value())
        };
        let scale = abs_c(&want);
        if abs_c(&(got.clone() - &want)) > tol.clone() * scale {
            return Err(Error::VerificationFailed(format!(
                "pushed monomial {i} has (X^#)^n = {got}, want t = {want}"
            )));
        }
    }
    Ok(())
}

/// Chekhov-Fock-side chain on the edge lattices (mod the all-ones
/// vector: coordinates drop the last edge).
pub struct CfChain {
    pub factors: Vec<FlipFactor>,
    pub total_map: MonomialMap,
    pub s0: ScalarMap,
}

/// Reduce an integer edge vector to R-coordinates (drop the last edge).
pub fn r_coords(v: &[i64]) -> Vec<i64> {
    let last = v[v.len() - 1];
    v[..v.len() - 1].iter().map(|&x| x - last).collect()
}

/// The lattice map of a flip on edge coordinates.
pub fn flip_cf_matrix(eps: &IMat, e: usize) -> IMat {
    let ne = eps.nr;
    let mut m = IMat::zero(ne, ne);
    for x in 0..ne {
        if x == e {
            m[(x, e)] = -1;
        } else {
            m[(x, x)] = 1;
            let k = eps[(x, e)];
            if k > 0 {
                m[(e, x)] = k;
            }
        }
    }
    m
}

/// CF chain: `s0_cf` is the n-th root of the layer-0 shear-bends twisted
/// by the requested puncture weights (an extension of sigma with central
/// weights zeta).
pub fn cf_chain(
    cert: &MappingClassCertificate,
    sbl: &ShearBendLayers,
    s0_cf: &ScalarMap,
    q: &RootOfUnity,
) -> Result<CfChain> {
    let prec = q.prec();
    let tri0 = cert.initial();
    let ne = tri0.num_edges();
    let rank = ne - 1;
    assert_eq!(s0_cf.rank(), rank);

    let mut factors = Vec::new();
    let mut s_cur = s0_cf.clone();
    let mut p_mat = IMat::identity(rank);
    let mut p_scale: Vec<LogVal> = (0..rank).map(|_| LogVal::one(prec)).collect();

    for (i, frame) in cert.frames.iter().enumerate() {
        let tri = &cert.stages[i];
        let eps = epsilon_form(tri).matrix;
        let e = frame.edge;
        // chi_e in R-coordinates
        let mut chi_full = vec![0i64; ne];
        chi_full[e] = 1;
        let chi_e = r_coords(&chi_full);

        let vector = p_mat.mul_vec(&chi_e);
        let mut scale = LogVal::one(prec);
        for (t, &c) in chi_e.iter().enumerate() {
            if c != 0 {
                scale = scale.mul(&p_scale[t].pow_i64(c));
            }
        }
        let theta = sbl.theta[i].clone();
        let t_e = sbl.log_t[i][e].clone();
        let psi = psi_table(q, &t_e, &theta)?;
        factors.push(FlipFactor {
            vector,
            scale,
            psi,
        });

        // m_i on edge coordinates, then R-reduced
        let m_full = flip_cf_matrix(&eps, e);
        let mut m_r = IMat::zero(rank, rank);
        for col in 0..rank {
            let mut v_full = vec![0i64; ne];
            v_full[col] = 1;
            let img = m_full.mul_vec(&v_full);
            let img_r = r_coords(&img);
            for r in 0..rank {
                m_r[(r, col)] = img_r[r];
            }
        }
        // epsilon pairing of m k with chi_e, computed in full edge
        // coordinates (well-defined since 1 is radical)
        let mut next_vals = Vec::with_capacity(rank);
        for col in 0..rank {
            let mk = m_r.col(col);
            // lift: R-coords back to a representative in Z^E
            let mut lift = vec![0i64; ne];
            lift[..rank].copy_from_slice(&mk);
            let echi = {
                let col_e = (0..ne).map(|r| eps[(r, e)]).collect::<Vec<_>>();
                lift.iter()
                    .zip(col_e.iter())
                    .map(|(&a, &b)| a * b)
                    .sum::<i64>()
            };
            let v = s_cur.eval(&mk).mul(&theta.pow_i64(echi));
            next_vals.push(v);
        }
        let s_next = ScalarMap { values: next_vals };
        let mut new_scale = Vec::with_capacity(rank);
        for col in 0..rank {
            let mk = m_r.col(col);
            let resc = s_next.values[col].mul(&s_cur.eval(&mk).inv());
            let mut prev = LogVal::one(prec);
            for (t, &c) in mk.iter().enumerate() {
                if c != 0 {
                    prev = prev.mul(&p_scale[t].pow_i64(c));
                }
            }
            new_scale.push(resc.mul(&prev));
        }
        p_mat = p_mat.mul(&m_r);
        p_scale = new_scale;
        s_cur = s_next;
    }

    // relabeling on edge coordinates
    let last = cert.final_tri();
    let mut phi = IMat::zero(rank, rank);
    // phi_*: R_{lambda_0} -> R_{lambda_N}: edge of lambda_0 -> edge of
    // lambda_N mapping onto it
    let mut inv_edge = vec![0usize; ne];
    for x in 0..ne {
        let s = last.edge_positive_side[x];
        inv_edge[tri0.edge_of[cert.relabeling.side_map[s]]] = x;
    }
    for col in 0..rank {
        let mut full = vec![0i64; ne];
        full[inv_edge[col]] = 1;
        let red = r_coords(&full);
        for r in 0..rank {
            phi[(r, col)] = red[r];
        }
    }
    let f = p_mat.mul(&phi);
    let src_vals: Vec<LogVal> = (0..rank).map(|col| s_cur.eval(&phi.col(col))).collect();
    let total_map = MonomialMap {
        lattice_map: f,
        source_scalar: ScalarMap { values: src_vals },
        target_scalar: s0_cf.clone(),
    };
    Ok(CfChain {
        factors,
        total_map,
        s0: s0_cf.clone(),
    })
}

/// Base CF scalar map: n-th roots of the layer-0 shear-bends on the
/// first E-1 edges.
pub fn cf_base_scalar(sbl: &ShearBendLayers, ne: usize, n: u32) -> ScalarMap {
    let values: Vec<LogVal> = (0..ne - 1)
        .map(|e| sbl.log_t[0][e].nth_root(n))
        .collect();
    ScalarMap { values }
}

/// Twist a CF scalar map by integer weight exponents: multiplies the
/// value on basis edge `j` by `q^{2 w_j}`.
pub fn twist_cf_scalar(s: &ScalarMap, q: &RootOfUnity, w: &[i64]) -> ScalarMap {
    let prec = q.prec();
    let two_pi_i = prec.pi_i() * 2u32;
    let n = q.n as i64;
    let values = s
        .values
        .iter()
        .zip(w.iter())
        .map(|(v, &wj)| {
            let shift = two_pi_i.clone() * (((2 * wj * q.k as i64) % n + n) % n) / n as u32;
            LogVal::from_log(Complex::from(&v.log + &shift))
        })
        .collect();
    ScalarMap { values }
}

/// Solve for integer edge exponents `w` with `<w, c_v> = r_v (mod n)`;
/// used to hit prescribed puncture weights.
pub fn weight_exponents(
    cvs: &[Vec<i64>],
    targets: &[i64],
    n: u32,
    rank: usize,
) -> Result<Vec<i64>> {
    // solve [C^T | n I] x = r over Z, take the first `rank` coordinates
    let p1 = cvs.len();
    let mut m = IMat::zero(p1, rank + p1);
    for (i, c) in cvs.iter().enumerate() {
        for j in 0..rank {
            m[(i, j)] = c[j];
        }
        m[(i, rank + i)] = n as i64;
    }
    let sol = crate::numeric::intmat::solve(&m, targets)
        .ok_or_else(|| Error::BadInput("puncture weight targets are inconsistent".into()))?;
    Ok(sol[..rank].to_vec())
}

/// `i_CFr` pullback of puncture vectors in R-coordinates.
pub fn cv_in_r_coords(tri: &crate::surface::IdealTriangulation) -> Vec<Vec<i64>> {
    tri.puncture_edge_counts()
        .iter()
        .map(|c| r_coords(c))
        .collect()
}
