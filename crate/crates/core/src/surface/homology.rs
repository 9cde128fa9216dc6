//! First homology of the punctured surface in flow coordinates.
//!
//! A class is a flow: an integer weight per edge subject to conservation
//! at each face (signed by edge orientations). Flows are the cycle space
//! of the dual spine, so no quotient is involved, transport through a
//! flip is a local conservation solve, and the multicurve embedding into
//! the Kashaev lattice becomes a corner-current decomposition that is
//! canonical because face vortices die in Z^3/Z1.

use super::IdealTriangulation;
use crate::error::{Error, Result};
use crate::numeric::{intmat, IMat};

/// Flow into face `f` across side `(f, j)` carried by flow vector `z`.
fn side_inflow(tri: &IdealTriangulation, z: &[i64], side: usize) -> i64 {
    tri.side_sign(side) * z[tri.edge_of[side]]
}

/// Check conservation at every face.
pub fn is_flow(tri: &IdealTriangulation, z: &[i64]) -> bool {
    (0..tri.num_faces).all(|f| {
        (0..3)
            .map(|j| side_inflow(tri, z, tri.side(f, j)))
            .sum::<i64>()
            == 0
    })
}

/// Conservation matrix: one row per face, one column per edge.
pub fn conservation_matrix(tri: &IdealTriangulation) -> IMat {
    let mut m = IMat::zero(tri.num_faces, tri.num_edges());
    for f in 0..tri.num_faces {
        for j in 0..3 {
            let s = tri.side(f, j);
            m[(f, tri.edge_of[s])] += tri.side_sign(s);
        }
    }
    m
}

/// Basis of flows plus the data needed to express arbitrary flows in it.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    /// rank = 2g + p - 1 cycles, each an edge-weight vector
    pub cycles: Vec<Vec<i64>>,
    /// Gram matrix of twice the intersection form in this basis
    pub gram: IMat,
    /// puncture loop classes (counterclockwise link of each puncture)
    pub puncture_loops: Vec<Vec<i64>>,
}

impl HomologyBasis {
    pub fn rank(&self) -> usize {
        self.cycles.len()
    }

    /// Coordinates of a flow in this basis.
    pub fn coordinates(&self, tri: &IdealTriangulation, z: &[i64]) -> Result<Vec<i64>> {
        debug_assert!(is_flow(tri, z));
        let rank = self.rank();
        let ne = tri.num_edges();
        let mut cols: Vec<Vec<i64>> = self.cycles.clone();
        // flows form a free module; solve cycles * x = z
        let mut m = IMat::zero(ne, rank);
        for (j, c) in cols.drain(..).enumerate() {
            for (i, v) in c.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        intmat::solve(&m, z).ok_or_else(|| {
            Error::BadInput("edge vector is not in the span of the flow basis".into())
        })
    }
}

/// Compute a flow basis and the pairing data for a triangulation.
pub fn homology_basis(tri: &IdealTriangulation) -> HomologyBasis {
    let m = conservation_matrix(tri);
    let cycles = intmat::kernel_basis(&m);
    debug_assert_eq!(
        cycles.len(),
        2 * tri.genus + tri.punctures - 1,
        "flow space has wrong rank"
    );
    let rank = cycles.len();
    let mut gram = IMat::zero(rank, rank);
    for i in 0..rank {
        for j in 0..rank {
            gram[(i, j)] = flow_pairing(tri, &cycles[i], &cycles[j]);
        }
    }
    let puncture_loops = (0..tri.punctures).map(|v| puncture_loop(tri, v)).collect();
    HomologyBasis {
        cycles,
        gram,
        puncture_loops,
    }
}

/// Twice the intersection number of two flows: the cyclic determinant of
/// their corner currents summed over faces. Face vortices drop out, so
/// the current normalization is irrelevant; this is the form the
/// homology sub-torus of the Kashaev algebra carries.
pub fn flow_pairing(tri: &IdealTriangulation, z: &[i64], w: &[i64]) -> i64 {
    let zc = corner_currents(tri, z);
    let wc = corner_currents(tri, w);
    let mut acc: i64 = 0;
    for f in 0..tri.num_faces {
        let y = zc[f];
        let u = wc[f];
        for j in 0..3 {
            let k = (j + 1) % 3;
            acc += y[j] * u[k] - y[k] * u[j];
        }
    }
    acc
}

/// Corner currents of a flow: per face, `y[j]` strands pass around
/// corner `j` (entering across side `j-1` and leaving across side `j`),
/// normalized by `y[0] = 0`; any other normalization differs by a face
/// vortex, which is invisible in the Kashaev lattice.
pub fn corner_currents(tri: &IdealTriangulation, z: &[i64]) -> Vec<[i64; 3]> {
    let mut out = Vec::with_capacity(tri.num_faces);
    for f in 0..tri.num_faces {
        let x0 = side_inflow(tri, z, tri.side(f, 0));
        let x1 = side_inflow(tri, z, tri.side(f, 1));
        debug_assert_eq!(
            x0 + x1 + side_inflow(tri, z, tri.side(f, 2)),
            0,
            "not a flow"
        );
        // x_j = y_{j+1} - y_j with y_0 = 0
        out.push([0, x0, x0 + x1]);
    }
    out
}

/// Counterclockwise link of puncture `v` as a flow vector.
pub fn puncture_loop(tri: &IdealTriangulation, v: usize) -> Vec<i64> {
    // The link crosses side (f, j) once for each corner (f, j) at v
    // (leaving the face) and once for each corner (f, j+1) at v
    // (entering); contributions add with into-face signs.
    let mut z = vec![0i64; tri.num_edges()];
    for f in 0..tri.num_faces {
        for j in 0..3 {
            let s = tri.side(f, j);
            // corner j at v: segment enters across side j-1, leaves across side j
            if tri.puncture_at[tri.side(f, j)] == v {
                z[tri.edge_of[s]] -= tri.side_sign(s);
            }
            if tri.puncture_at[tri.side(f, j + 1)] == v {
                z[tri.edge_of[s]] += tri.side_sign(s);
            }
        }
    }
    debug_assert!(is_flow(tri, &z));
    z
}

/// Transport a flow through a flip: surviving edges keep their weights,
/// and the weight on the new edge is pinned by conservation in the new
/// first face. The two descriptions agree outside a disk, hence are
/// homologous.
pub fn transport_flow(
    old_tri: &IdealTriangulation,
    new_tri: &IdealTriangulation,
    frame: &super::FlipFrame,
    z: &[i64],
) -> Vec<i64> {
    debug_assert!(is_flow(old_tri, z));
    let mut out = vec![0i64; new_tri.num_edges()];
    for e in 0..new_tri.num_edges() {
        if e != frame.edge {
            out[e] = z[e];
        }
    }
    // conservation in new face f1' = (e1', d, a)
    let f1 = new_tri.face_of(frame.new_e1);
    let mut rest = 0i64;
    for j in 0..3 {
        let s = new_tri.side(f1, j);
        if s == frame.new_e1 {
            continue;
        }
        rest += new_tri.side_sign(s) * out[new_tri.edge_of[s]];
    }
    out[frame.edge] = -new_tri.side_sign(frame.new_e1) * rest;
    debug_assert!(is_flow(new_tri, &out), "flow transport broke conservation");
    out
}

/// Push a flow through a relabeling (side map from tri_a to tri_b).
pub fn relabel_flow(
    tri_a: &IdealTriangulation,
    tri_b: &IdealTriangulation,
    side_map: &[usize],
    z: &[i64],
) -> Vec<i64> {
    let mut out = vec![0i64; tri_b.num_edges()];
    for e in 0..tri_a.num_edges() {
        let s = tri_a.edge_positive_side[e];
        let t = side_map[s];
        out[tri_b.edge_of[t]] = tri_b.side_sign(t) * z[e];
    }
    debug_assert!(is_flow(tri_b, &out));
    out
}

/// Product of transvections `b -> b + sign * <b, c> c` on a lattice with
/// the given intersection form (not doubled); rightmost twist first.
pub fn twist_word_action(gram_intersection: &IMat, word: &[(Vec<i64>, i64)]) -> IMat {
    let rank = gram_intersection.nr;
    let mut total = IMat::identity(rank);
    for (curve, sign) in word.iter().rev() {
        let mut t = IMat::identity(rank);
        // T(b) = b + sign * <b, c> * c; columns are images of basis vectors
        for j in 0..rank {
            let mut b = vec![0i64; rank];
            b[j] = 1;
            let pairing: i64 = {
                let gc = gram_intersection.mul_vec(curve);
                b.iter().zip(gc.iter()).map(|(&x, &y)| x * y).sum()
            };
            for i in 0..rank {
                t[(i, j)] = b[i] + sign * pairing * curve[i];
            }
        }
        total = t.mul(&total);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::super::test_surfaces::once_punctured_torus;
    use super::*;

    #[test]
    fn torus_flow_rank_and_pairing() {
        let tri = once_punctured_torus();
        let h = homology_basis(&tri);
        assert_eq!(h.rank(), 2);
        // twice the intersection form on a once-punctured torus is 2 J
        assert_eq!(h.gram[(0, 0)], 0);
        assert_eq!(h.gram[(1, 1)], 0);
        assert_eq!(h.gram[(0, 1)], -h.gram[(1, 0)]);
        assert_eq!(h.gram[(0, 1)].abs(), 2);
        // pairing is even: intersection numbers are integers
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h.gram[(i, j)] % 2, 0);
            }
        }
    }

    #[test]
    fn puncture_loop_is_flow_and_nullhomologous_on_torus() {
        // single puncture: the boundary loop is a commutator, zero in H1
        let tri = once_punctured_torus();
        let h = homology_basis(&tri);
        let z = puncture_loop(&tri, 0);
        assert!(is_flow(&tri, &z));
        let coords = h.coordinates(&tri, &z).unwrap();
        assert!(coords.iter().all(|&c| c == 0), "coords {:?}", coords);
    }

    #[test]
    fn flow_transport_preserves_class_pairing() {
        let tri = once_punctured_torus();
        let h = homology_basis(&tri);
        let (t2, frame) = super::super::flip(&tri, 2).unwrap();
        let za = transport_flow(&tri, &t2, &frame, &h.cycles[0]);
        let zb = transport_flow(&tri, &t2, &frame, &h.cycles[1]);
        // pairing is a homeomorphism invariant
        assert_eq!(
            flow_pairing(&t2, &za, &zb),
            flow_pairing(&tri, &h.cycles[0], &h.cycles[1])
        );
    }

    #[test]
    fn transvection_matrices() {
        // on H1(T^2 - pt) with intersection <a,b> = 1
        let gram = IMat::from_rows(vec![vec![0, 1], vec![-1, 0]]);
        let a = vec![1i64, 0];
        let t = twist_word_action(&gram, &[(a, 1)]);
        // T_a: a -> a, b -> b + <b,a>... sign convention: det = 1 and
        // fixes a
        assert_eq!(t.mul_vec(&[1, 0]), vec![1, 0]);
        let det = t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(1, 0)];
        assert_eq!(det, 1);
        // empty word
        let id = twist_word_action(&gram, &[]);
        assert_eq!(id, IMat::identity(2));
        // product of two twists has det 1
        let w = vec![(vec![1i64, 0], 1i64), (vec![0i64, 1], -1i64)];
        let m = twist_word_action(&gram, &w);
        let det2 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert_eq!(det2, 1);
    }
}
