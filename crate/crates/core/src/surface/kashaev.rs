//! The Kashaev lattice of a triangulation: one rank-2 symplectic piece
//! per face (Z^3 modulo the all-ones vector), with the Chekhov-Fock and
//! homology sub-lattices embedded in it.
//!
//! Basis: face `f` contributes the classes of its sides 0 and 1; side 2
//! is `-side0 - side1` in the quotient. In this basis the per-face form
//! `[[0,1,-1],[-1,0,1],[1,-1,0]]` becomes the standard `J_2`.

use super::homology::{corner_currents, homology_basis, puncture_loop, HomologyBasis};
use super::{epsilon_form, IdealTriangulation};
use crate::error::{Error, Result};
use crate::numeric::{intmat, IMat};
use crate::qtorus::SkewLattice;

#[derive(Clone, Debug)]
pub struct KashaevLattice {
    pub lattice: SkewLattice,
    /// columns = images of the edge generators under i_CFr
    pub cfr_embedding: IMat,
    /// edge-end count vectors c_v (edge coordinates)
    pub puncture_vectors: Vec<Vec<i64>>,
    /// symplectic duals b_v in the Kashaev lattice, omega(b_v, c_w) = delta_vw
    /// for v, w among the first p-1 punctures
    pub puncture_duals: Vec<Vec<i64>>,
    /// flow basis and pairing data of the underlying surface
    pub homology: HomologyBasis,
}

/// Kashaev-lattice coordinates of a single side.
pub fn side_vector(tri: &IdealTriangulation, side: usize) -> Vec<i64> {
    let mut v = vec![0i64; 2 * tri.num_faces];
    let f = tri.face_of(side);
    match tri.pos_of(side) {
        0 => v[2 * f] = 1,
        1 => v[2 * f + 1] = 1,
        _ => {
            v[2 * f] = -1;
            v[2 * f + 1] = -1;
        }
    }
    v
}

/// The per-face symplectic form in the (side0, side1) basis.
pub fn kashaev_gram(num_faces: usize) -> IMat {
    let mut g = IMat::zero(2 * num_faces, 2 * num_faces);
    for f in 0..num_faces {
        g[(2 * f, 2 * f + 1)] = 1;
        g[(2 * f + 1, 2 * f)] = -1;
    }
    g
}

/// i_CFr: an edge maps to the sum of its two sides.
pub fn cfr_embedding(tri: &IdealTriangulation) -> IMat {
    let rank = 2 * tri.num_faces;
    let ne = tri.num_edges();
    let mut m = IMat::zero(rank, ne);
    for e in 0..ne {
        let (s1, s2) = tri.sides_of_edge(e);
        for (r, val) in side_vector(tri, s1).into_iter().enumerate() {
            m[(r, e)] += val;
        }
        for (r, val) in side_vector(tri, s2).into_iter().enumerate() {
            m[(r, e)] += val;
        }
    }
    m
}

/// Multicurve embedding of a flow into the Kashaev lattice: each corner
/// current contributes the generator of the side opposite the corner,
/// signed by the direction of travel.
pub fn i_h(tri: &IdealTriangulation, z: &[i64]) -> Vec<i64> {
    let rank = 2 * tri.num_faces;
    let mut out = vec![0i64; rank];
    let currents = corner_currents(tri, z);
    for f in 0..tri.num_faces {
        for j in 0..3 {
            let y = currents[f][j];
            if y == 0 {
                continue;
            }
            // side opposite corner j is side j+1
            let sv = side_vector(tri, tri.side(f, j + 1));
            for r in 0..rank {
                out[r] += y * sv[r];
            }
        }
    }
    out
}

pub fn kashaev_lattice(tri: &IdealTriangulation) -> Result<KashaevLattice> {
    let gram = kashaev_gram(tri.num_faces);
    let lattice = SkewLattice::new(gram);
    let cfr = cfr_embedding(tri);

    // form compatibility: pullback of omega along i_CFr equals epsilon
    let eps = epsilon_form(tri);
    let pulled = cfr.transpose().mul(&lattice.gram).mul(&cfr);
    if pulled != eps.matrix {
        return Err(Error::FormIncompatible);
    }

    let puncture_vectors = tri.puncture_edge_counts();

    // b_v from a maximal tree on the punctures: path from the base
    // puncture (last one) to v, summing the left sides.
    let p = tri.punctures;
    let base = p - 1;
    // adjacency via edges: pick a spanning tree by BFS
    let ne = tri.num_edges();
    let mut parent_edge: Vec<Option<(usize, bool)>> = vec![None; p]; // (edge, traverse positive?)
    let mut visited = vec![false; p];
    visited[base] = true;
    let mut queue = std::collections::VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        for e in 0..ne {
            let s = tri.edge_positive_side[e];
            let (tail, head) = tri.side_ends(s);
            for (from, to, fwd) in [(tail, head, true), (head, tail, false)] {
                if from == v && !visited[to] {
                    visited[to] = true;
                    parent_edge[to] = Some((e, fwd));
                    queue.push_back(to);
                }
            }
        }
    }
    if visited.iter().any(|&x| !x) {
        return Err(Error::BadInput("triangulation 1-skeleton disconnected".into()));
    }
    let mut puncture_duals = Vec::with_capacity(p.saturating_sub(1));
    for v in 0..p - 1 {
        let mut b = vec![0i64; 2 * tri.num_faces];
        let mut cur = v;
        // walk v -> base, negating (the path is base -> v traversed backward)
        while cur != base {
            let (e, fwd) = parent_edge[cur].expect("tree path");
            let s_pos = tri.edge_positive_side[e];
            // traversing base->...->cur uses direction fwd at this step
            // (fwd means positive direction); the left side of the
            // positive direction is the positive side itself.
            let left = if fwd { s_pos } else { tri.glue[s_pos] };
            let sv = side_vector(tri, left);
            for r in 0..b.len() {
                b[r] += sv[r];
            }
            let (tail, head) = tri.side_ends(s_pos);
            cur = if fwd { tail } else { head };
        }
        puncture_duals.push(b);
    }

    // audit: omega(b_v, i(c_w)) = +-delta_vw; normalize signs so it is
    // exactly delta.
    for v in 0..p.saturating_sub(1) {
        for w in 0..p - 1 {
            let icw = cfr.mul_vec(&puncture_vectors[w]);
            let val = lattice.form(&puncture_duals[v], &icw);
            if v == w && val == -1 {
                for x in puncture_duals[v].iter_mut() {
                    *x = -*x;
                }
            }
        }
    }
    for v in 0..p.saturating_sub(1) {
        for w in 0..p - 1 {
            let icw = cfr.mul_vec(&puncture_vectors[w]);
            let val = lattice.form(&puncture_duals[v], &icw);
            let want = if v == w { 1 } else { 0 };
            if val != want {
                return Err(Error::BadInput(format!(
                    "puncture dual pairing omega(b_{v}, c_{w}) = {val}, want {want}"
                )));
            }
        }
    }

    let homology = homology_basis(tri);

    let kl = KashaevLattice {
        lattice,
        cfr_embedding: cfr,
        puncture_vectors,
        puncture_duals,
        homology,
    };
    kl.audit(tri)?;
    Ok(kl)
}

impl KashaevLattice {
    pub fn rank(&self) -> usize {
        self.lattice.rank
    }

    /// i_CFr of an edge vector.
    pub fn embed_edges(&self, x: &[i64]) -> Vec<i64> {
        self.cfr_embedding.mul_vec(x)
    }

    /// Structural audits: the homology embedding is orthogonal to the
    /// Chekhov-Fock image, carries twice the intersection form, and sends
    /// puncture loops to the puncture vectors; the combined sublattice
    /// has corank p - 1.
    fn audit(&self, tri: &IdealTriangulation) -> Result<()> {
        let h = &self.homology;
        for z in &h.cycles {
            let ihz = i_h(tri, z);
            // orthogonal to every i_CFr(edge)
            for e in 0..tri.num_edges() {
                let col = self.cfr_embedding.col(e);
                if self.lattice.form(&ihz, &col) != 0 {
                    return Err(Error::FormIncompatible);
                }
            }
        }
        for (i, zi) in h.cycles.iter().enumerate() {
            for (j, zj) in h.cycles.iter().enumerate() {
                let want = h.gram[(i, j)];
                let got = self
                    .lattice
                    .form(&i_h(tri, zi), &i_h(tri, zj));
                if got != want {
                    return Err(Error::FormIncompatible);
                }
            }
        }
        // i_H(gamma_v) = i_CFr(c_v)
        for v in 0..tri.punctures {
            let loop_v = puncture_loop(tri, v);
            let lhs = i_h(tri, &loop_v);
            let rhs = self.embed_edges(&self.puncture_vectors[v]);
            if lhs != rhs {
                return Err(Error::BadInput(format!(
                    "i_H(gamma_{v}) != i_CFr(c_{v}): {:?} vs {:?}",
                    lhs, rhs
                )));
            }
        }
        // corank audit: reduced CF + homology spans corank p-1
        let mut cols: Vec<Vec<i64>> = Vec::new();
        for e in 0..tri.num_edges() {
            cols.push(self.cfr_embedding.col(e));
        }
        for z in &h.cycles {
            cols.push(i_h(tri, z));
        }
        let rank = self.rank();
        let mut m = IMat::zero(rank, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        let r = intmat::rank(&m);
        if r + (tri.punctures - 1) != rank {
            return Err(Error::BadInput(format!(
                "combined sublattice rank {r}, expected corank p-1 in rank {rank}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_surfaces::once_punctured_torus;
    use super::*;

    #[test]
    fn once_punctured_torus_kashaev() {
        let tri = once_punctured_torus();
        let kl = kashaev_lattice(&tri).unwrap();
        assert_eq!(kl.rank(), 4);
        // cfr image rank 2
        assert_eq!(intmat::rank(&kl.cfr_embedding), 2);
        // p = 1: no duals
        assert!(kl.puncture_duals.is_empty());
    }

    #[test]
    fn flip_commutes_with_structure() {
        let tri = once_punctured_torus();
        let (t2, _) = super::super::flip(&tri, 0).unwrap();
        // audits run inside
        kashaev_lattice(&t2).unwrap();
    }
}
