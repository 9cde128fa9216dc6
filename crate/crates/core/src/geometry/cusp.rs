//! Completeness (cusp) equations from puncture holonomy.
//!
//! The derivative of the peripheral holonomy at a puncture is the
//! product of the layer-0 shear-bends weighted by edge-end counts; it is
//! 1 at the complete structure. In Neumann-Zagier terms this gives one
//! integer row per cusp whose pi*i right-hand side is pinned only after
//! a coarse solution fixes the 2*pi*i multiple, which is how the rows
//! exported here get their final nu.

use super::gluing::{GluingRow, GluingSystem, RowKind};
use super::{param_kind, LayeredTriangulation, ParamKind};
use crate::error::{Error, Result};
use crate::numeric::abs_c;
use crate::surface::mapclass::MappingClassCertificate;
use rug::Complex;

/// Raw holonomy row: `A log z + B log z'' + K pi i = 2 pi i m` with the
/// integer `m` unknown until a solution is available.
#[derive(Clone, Debug)]
pub struct RawCuspRow {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub k: i64,
    pub puncture: usize,
}

/// One raw row per puncture orbit of the monodromy.
pub fn raw_cusp_rows(
    lt: &LayeredTriangulation,
    cert: &MappingClassCertificate,
) -> Result<Vec<RawCuspRow>> {
    let tri0 = cert.initial();
    let n = lt.num_tets;
    let counts = tri0.puncture_edge_counts();
    // orbit representatives of the puncture permutation
    let mut seen = vec![false; tri0.punctures];
    let mut reps = Vec::new();
    for v in 0..tri0.punctures {
        if seen[v] {
            continue;
        }
        reps.push(v);
        let mut w = v;
        while !seen[w] {
            seen[w] = true;
            w = cert.puncture_permutation[w];
        }
    }
    let mut out = Vec::new();
    for v in reps {
        let mut a = vec![0i64; n];
        let mut b = vec![0i64; n];
        let mut k = 0i64;
        for (e, &m) in counts[v].iter().enumerate() {
            if m == 0 {
                continue;
            }
            // log t_e = sum over fan of log params - pi i
            let fan = lt.fan_above(cert, 0, e)?;
            for (t, pr) in fan {
                match param_kind(pr) {
                    ParamKind::Z => a[t] += m,
                    ParamKind::Zpp => b[t] += m,
                    ParamKind::Zp => {
                        a[t] -= m;
                        b[t] -= m;
                        k += m;
                    }
                }
            }
            k -= m;
        }
        out.push(RawCuspRow { a, b, k, puncture: v });
    }
    Ok(out)
}

/// Resolve the integer right-hand sides of the raw cusp rows at a coarse
/// solution and return finished rows. The coarse solve runs the system
/// with the cusp residuals reduced mod 2 pi i, then reads off the
/// multiples.
pub fn resolve_cusp_rows(
    edge_rows: &[GluingRow],
    raw: &[RawCuspRow],
    num_tets: usize,
    prec_bits: u32,
) -> Result<Vec<GluingRow>> {
    // provisional system: nu = -k (so the log-residual is 0 mod 2 pi i)
    let mut rows = edge_rows.to_vec();
    for r in raw {
        rows.push(GluingRow {
            a: r.a.clone(),
            b: r.b.clone(),
            nu: -r.k,
            kind: RowKind::Cusp,
        });
    }
    let sys = GluingSystem { num_tets, rows };
    let sol = super::newton::newton_refine_reduced(&sys, &[], prec_bits)?;
    // measure multiples
    let prec = sol.prec();
    let pi_i = prec.pi_i();
    let two_pi_i = pi_i.clone() * 2u32;
    let mut out = Vec::new();
    for r in raw {
        let mut acc = pi_i.clone() * r.k;
        for j in 0..num_tets {
            acc += sol.log_z[j].log.clone() * r.a[j];
            acc += sol.log_zpp[j].log.clone() * r.b[j];
        }
        let ratio = acc.clone() / &two_pi_i;
        let m = ratio.real().to_f64().round() as i64;
        let resid = abs_c(&(acc - two_pi_i.clone() * m));
        if resid > prec.tol(16) {
            return Err(Error::NonConvergence(
                "cusp holonomy is not a 2 pi i multiple at the coarse solution".into(),
            ));
        }
        out.push(GluingRow {
            a: r.a.clone(),
            b: r.b.clone(),
            nu: 2 * m - r.k,
            kind: RowKind::Cusp,
        });
    }
    Ok(out)
}
