//! Lifting shear-bend coordinates to a monodromy-invariant character of
//! the Kashaev lattice.
//!
//! The character is pinned on the Chekhov-Fock image by the layer-0
//! shear-bends and declared trivial on the multicurve image of homology;
//! a Smith complement fixes the rest, with roots taken along stored log
//! branches. The only genuine freedom left is the decoration torus, and
//! monodromy invariance is restored there by a puncture-weighted
//! correction character.

use super::{LayeredTriangulation, ShearBendLayers};
use crate::error::{Error, Result};
use crate::numeric::{abs_c, intmat, IMat, LogVal, Prec};
use crate::qtorus::ScalarMap;
use crate::surface::homology::HomologyBasis;
use crate::surface::kashaev::{i_h, side_vector, KashaevLattice};
use crate::surface::mapclass::MappingClassCertificate;
use crate::surface::{FlipFrame, IdealTriangulation};
use rug::{Assign, Complex};

#[derive(Clone, Debug)]
pub struct KashaevCoordinateLift {
    /// invariant character on the Kashaev lattice of the initial layer
    pub sigma0: ScalarMap,
    /// log decoration correction per puncture (last one gauged to 0)
    pub decoration_log: Vec<Complex>,
}

/// Lattice map of the flip, Kashaev side: new-basis columns expressed in
/// the old basis.
pub fn flip_kashaev_matrix(old: &IdealTriangulation, frame: &FlipFrame) -> IMat {
    let rank = 2 * old.num_faces;
    let mut m = IMat::zero(rank, rank);
    let chi = |s: usize| side_vector(old, s);
    let e_img = {
        let mut v = chi(frame.old_e1);
        for (i, x) in chi(frame.old_e2).into_iter().enumerate() {
            v[i] += x;
        }
        v
    };
    let (f1, f2) = frame.quad_faces;
    for f in 0..old.num_faces {
        for pos in 0..2 {
            let col = 2 * f + pos;
            let val: Vec<i64> = if f == f1 {
                if pos == 0 {
                    // e1' -> chi_b + chi_c
                    add(&chi(frame.old_b), &chi(frame.old_c))
                } else {
                    // d' -> chi_d + chi_e
                    add(&chi(frame.old_d), &e_img)
                }
            } else if f == f2 {
                if pos == 0 {
                    // c' -> chi_c
                    chi(frame.old_c)
                } else {
                    // e2' -> chi_a + chi_d
                    add(&chi(frame.old_a), &chi(frame.old_d))
                }
            } else {
                let mut v = vec![0i64; rank];
                v[col] = 1;
                v
            };
            for r in 0..rank {
                m[(r, col)] = val[r];
            }
        }
    }
    m
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

/// Lattice map of the relabeling: basis vectors of the initial lattice
/// expressed in the final layer's lattice (phi_* : L_0 -> L_N).
pub fn phi_star_matrix(cert: &MappingClassCertificate) -> IMat {
    let tri0 = cert.initial();
    let last = cert.final_tri();
    let rank = 2 * tri0.num_faces;
    let mut inv_side = vec![0usize; last.num_sides()];
    for s in 0..last.num_sides() {
        inv_side[cert.relabeling.side_map[s]] = s;
    }
    let mut m = IMat::zero(rank, rank);
    for f in 0..tri0.num_faces {
        for pos in 0..2 {
            let col = 2 * f + pos;
            let s0 = tri0.side(f, pos);
            let sn = inv_side[s0];
            let v = side_vector(last, sn);
            for r in 0..rank {
                m[(r, col)] = v[r];
            }
        }
    }
    m
}

/// Classical propagation of Kashaev coordinates through one flip,
/// using the principal branch for log(1 + t_e).
pub fn propagate_sigma(
    old: &IdealTriangulation,
    frame: &FlipFrame,
    sigma: &ScalarMap,
    prec: Prec,
) -> ScalarMap {
    let rank = sigma.rank();
    let chi = |s: usize| side_vector(old, s);
    let t_e = {
        let mut v = chi(frame.old_e1);
        for (i, x) in chi(frame.old_e2).into_iter().enumerate() {
            v[i] += x;
        }
        sigma.eval(&v)
    };
    let one_plus = Complex::from(1u32 + t_e.value());
    let log_one_plus = LogVal::from_value_principal(&one_plus);
    let (f1, f2) = frame.quad_faces;
    let mut values = Vec::with_capacity(rank);
    for f in 0..old.num_faces {
        for pos in 0..2 {
            let lv = if f == f1 {
                if pos == 0 {
                    // sigma'(e1') = sigma(b) sigma(c)
                    sigma.eval(&chi(frame.old_b)).mul(&sigma.eval(&chi(frame.old_c)))
                } else {
                    // sigma'(d') = sigma(d) t_e / (1 + t_e)
                    sigma
                        .eval(&chi(frame.old_d))
                        .mul(&t_e)
                        .mul(&log_one_plus.inv())
                }
            } else if f == f2 {
                if pos == 0 {
                    // sigma'(c') = sigma(c) (1 + t_e)
                    sigma.eval(&chi(frame.old_c)).mul(&log_one_plus)
                } else {
                    // sigma'(e2') = sigma(a) sigma(d)
                    sigma.eval(&chi(frame.old_a)).mul(&sigma.eval(&chi(frame.old_d)))
                }
            } else {
                sigma.values[2 * f + pos].clone()
            };
            values.push(lv);
        }
    }
    let _ = prec;
    ScalarMap { values }
}

/// Decoration weight of a lattice basis vector: +1 at the head puncture,
/// -1 at the tail of the corresponding side.
fn weight_matrix(tri: &IdealTriangulation) -> IMat {
    let rank = 2 * tri.num_faces;
    let mut w = IMat::zero(tri.punctures, rank);
    for f in 0..tri.num_faces {
        for pos in 0..2 {
            let (tail, head) = tri.side_ends(tri.side(f, pos));
            w[(head, 2 * f + pos)] += 1;
            w[(tail, 2 * f + pos)] -= 1;
        }
    }
    w
}

pub fn lift_to_kashaev_coordinates(
    lt: &LayeredTriangulation,
    cert: &MappingClassCertificate,
    sbl: &ShearBendLayers,
    kl: &KashaevLattice,
    homology: &HomologyBasis,
) -> Result<KashaevCoordinateLift> {
    let tri0 = cert.initial();
    let prec = Prec(sbl.log_t[0][0].log.prec().0);
    let rank = kl.rank();
    let ne = tri0.num_edges();

    // generic condition
    for (layer, row) in sbl.log_t.iter().enumerate() {
        for (e, lv) in row.iter().enumerate() {
            let one_plus = Complex::from(1u32 + lv.value());
            if abs_c(&one_plus) < prec.tol(prec.bits() / 2) {
                return Err(Error::DegenerateShear(format!("edge {e} at layer {layer}")));
            }
        }
    }

    // prescribed sublattice: i_CFr(edges) with shear-bend logs, i_H(flow
    // basis) with log 0
    let mut cols: Vec<Vec<i64>> = Vec::new();
    let mut logs: Vec<Complex> = Vec::new();
    for e in 0..ne {
        cols.push(kl.cfr_embedding.col(e));
        logs.push(sbl.log_t[0][e].log.clone());
    }
    for z in &homology.cycles {
        cols.push(i_h(tri0, z));
        logs.push(prec.zero());
    }
    // independent subset forming a basis of the span
    let mut picked_idx: Vec<usize> = Vec::new();
    {
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for (i, c) in cols.iter().enumerate() {
            rows.push(c.clone());
            let m = IMat::from_rows(rows.clone());
            if intmat::rank(&m) == rows.len() {
                picked_idx.push(i);
            } else {
                rows.pop();
            }
        }
    }
    let sub_rank = picked_idx.len();
    let mut s_mat = IMat::zero(rank, sub_rank);
    for (j, &i) in picked_idx.iter().enumerate() {
        for r in 0..rank {
            s_mat[(r, j)] = cols[i][r];
        }
    }

    // Smith: u * s * v = d; basis u_i of the ambient lattice with
    // d_i u_i in the sublattice.
    let (u, d, v) = intmat::smith_form(&s_mat);
    let u_inv = intmat::unimodular_inverse(&u);
    // log values on the ambient basis u_inv columns
    let mut basis_logs: Vec<Complex> = Vec::with_capacity(rank);
    for i in 0..rank {
        if i < sub_rank && d[(i, i)] != 0 {
            // d_i u_i = sum_j s_col_j * (v * e_i)-combination:
            // s * v e_i = u^{-1} d e_i = d_i u_i
            let mut log = prec.zero();
            let mut tmp = prec.zero();
            for j in 0..sub_rank {
                let coeff = v[(j, i)];
                if coeff != 0 {
                    tmp.assign(&logs[picked_idx[j]] * coeff);
                    log += &tmp;
                }
            }
            basis_logs.push(log / d[(i, i)] as u32);
        } else {
            basis_logs.push(prec.zero());
        }
    }

    // sigma0 on the standard basis of the Kashaev lattice
    let assemble = |basis_logs: &[Complex]| -> ScalarMap {
        let mut values = Vec::with_capacity(rank);
        for r in 0..rank {
            // e_r = sum_i (u row) ... e_r = sum_i u[(i, r)]-inverse comb:
            // columns of u_inv are the u-basis in standard coords, so
            // standard basis e_r = sum_i u[(i, r)] ... use: coords of e_r
            // in the u-basis are (u e_r)_i.
            let mut log = prec.zero();
            let mut tmp = prec.zero();
            for i in 0..rank {
                let c = u[(i, r)];
                if c != 0 {
                    tmp.assign(&basis_logs[i] * c);
                    log += &tmp;
                }
            }
            values.push(LogVal::from_log(log));
        }
        ScalarMap { values }
    };
    let mut sigma0 = assemble(&basis_logs);

    // audits: pullback along i_CFr equals layer-0 shear-bends (values),
    // triviality on the multicurve image, puncture holonomy
    let audit = |sigma0: &ScalarMap| -> Result<()> {
        let tol = prec.tol(24);
        for e in 0..ne {
            let got = sigma0.eval(&kl.cfr_embedding.col(e)).value();
            let want = sbl.t_value(0, e);
            if abs_c(&(got.clone() - &want)) > tol.clone() * abs_c(&want) {
                return Err(Error::VerificationFailed(format!(
                    "sigma0 pullback differs from shear-bend on edge {e}"
                )));
            }
        }
        for z in &homology.cycles {
            let got = sigma0.eval(&i_h(tri0, z)).value();
            if abs_c(&(got.clone() - 1u32)) > tol {
                return Err(Error::VerificationFailed(
                    "sigma0 is not trivial on the homology image".into(),
                ));
            }
        }
        for c in &kl.puncture_vectors {
            let got = sigma0.eval(&kl.embed_edges(c)).value();
            if abs_c(&(got.clone() - 1u32)) > tol {
                return Err(Error::VerificationFailed(
                    "puncture holonomy of sigma0 is not parabolic".into(),
                ));
            }
        }
        Ok(())
    };
    audit(&sigma0)?;

    // monodromy mismatch delta = (prop sigma0) o phi_* / sigma0
    let phi = phi_star_matrix(cert);
    let mismatch = |sigma0: &ScalarMap| -> (ScalarMap, Vec<Complex>) {
        let mut cur = sigma0.clone();
        for (i, frame) in cert.frames.iter().enumerate() {
            cur = propagate_sigma(&cert.stages[i], frame, &cur, prec);
        }
        // delta(x) = cur(phi x) / sigma0(x) on standard basis vectors
        let mut delta = Vec::with_capacity(rank);
        for r in 0..rank {
            let mut e = vec![0i64; rank];
            e[r] = 1;
            let fx = phi.mul_vec(&e);
            let val = cur.eval(&fx).mul(&sigma0.eval(&e).inv());
            delta.push(val.value());
        }
        (cur, delta)
    };
    let (_, delta) = mismatch(&sigma0);

    // solve the decoration correction: kappa/(kappa o f) = delta with
    // kappa = D_ell, using the weight difference matrix
    let w = weight_matrix(tri0);
    let m_chain = {
        let mut m = IMat::identity(rank);
        for (i, frame) in cert.frames.iter().enumerate() {
            // m_i maps L_{i+1} -> L_i; chain = m_1 ... m_N
            let mi = flip_kashaev_matrix(&cert.stages[i], frame);
            m = m.mul(&mi);
        }
        m.mul(&phi)
    };
    // W(x) - W(f x) rows per basis vector, columns per puncture (last
    // puncture gauged away)
    let p = tri0.punctures;
    let mut decoration_log = vec![prec.zero(); p];
    let tol = prec.tol(24);
    let needs_fix = delta
        .iter()
        .any(|d| abs_c(&(d.clone() - 1u32)) > tol);
    if needs_fix {
        if p < 2 {
            return Err(Error::NoInvariantDecoration(
                "mismatch with a single puncture".into(),
            ));
        }
        let wf = w.mul(&m_chain);
        // coefficient of ell_v in equation for basis vector r:
        // W[(v, r)] - Wf[(v, r)] for v < p-1 (ell_{p-1} = 0)
        let mut solved = false;
        'rows: for r in 0..rank {
            // look for an equation involving exactly one unknown
            let mut nz: Vec<(usize, i64)> = Vec::new();
            for v in 0..p - 1 {
                let c = w[(v, r)] - wf[(v, r)];
                if c != 0 {
                    nz.push((v, c));
                }
            }
            if nz.len() != 1 {
                continue;
            }
            let (v, c) = nz[0];
            let logd = delta[r].clone().ln();
            // tau = log delta / c, with branch choices tried until the
            // full mismatch vanishes
            for branch in 0..c.unsigned_abs() {
                let mut tau = logd.clone();
                let two_pi_i = prec.pi_i() * 2u32;
                tau += two_pi_i.clone() * branch as i64;
                tau = Complex::from(tau / c as i32);
                let mut dec = vec![prec.zero(); p];
                dec[v] = tau.clone();
                let fixed = apply_decoration(tri0, &sigma0, &dec, prec);
                let (_, delta2) = mismatch(&fixed);
                if delta2
                    .iter()
                    .all(|d| abs_c(&(d.clone() - 1u32)) < tol)
                {
                    sigma0 = fixed;
                    decoration_log = dec;
                    solved = true;
                    break 'rows;
                }
            }
        }
        if !solved {
            return Err(Error::NoInvariantDecoration(
                "decoration correction did not converge".into(),
            ));
        }
    }

    audit(&sigma0)?;
    let _ = lt;
    Ok(KashaevCoordinateLift {
        sigma0,
        decoration_log,
    })
}

/// Multiply sigma by the decoration character with log parameters `dec`.
fn apply_decoration(
    tri: &IdealTriangulation,
    sigma: &ScalarMap,
    dec: &[Complex],
    prec: Prec,
) -> ScalarMap {
    let mut values = Vec::with_capacity(sigma.rank());
    for f in 0..tri.num_faces {
        for pos in 0..2 {
            let (tail, head) = tri.side_ends(tri.side(f, pos));
            let mut log = sigma.values[2 * f + pos].log.clone();
            log += &dec[head];
            log -= &dec[tail];
            let _ = prec;
            values.push(LogVal::from_log(log));
        }
    }
    ScalarMap { values }
}
