//! Ideal triangulations of punctured surfaces and their flips.
//!
//! Conventions: face `f` has corners `0,1,2` counterclockwise; side `j`
//! of `f` runs from corner `j` to corner `j+1`, and its global id is
//! `3f + j`. Each edge consists of two glued sides running in opposite
//! directions; one of them is distinguished as the edge's positive side,
//! which orients the edge.

pub mod homology;
pub mod kashaev;
pub mod mapclass;

use crate::error::{Error, Result};
use crate::numeric::IMat;
use serde::{Deserialize, Serialize};

pub use homology::HomologyBasis;
pub use kashaev::KashaevLattice;
pub use mapclass::{apply_mapping_class, find_isomorphisms, MappingClassCertificate, Relabeling};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdealTriangulation {
    pub genus: usize,
    pub punctures: usize,
    pub num_faces: usize,
    /// side -> glued side (fixed-point-free involution)
    pub glue: Vec<usize>,
    /// side -> edge label in 0..num_edges
    pub edge_of: Vec<usize>,
    /// edge -> its positive side
    pub edge_positive_side: Vec<usize>,
    /// corner (3f + j) -> puncture id
    pub puncture_at: Vec<usize>,
}

impl IdealTriangulation {
    pub fn num_sides(&self) -> usize {
        3 * self.num_faces
    }

    pub fn num_edges(&self) -> usize {
        3 * self.num_faces / 2
    }

    pub fn face_of(&self, side: usize) -> usize {
        side / 3
    }

    pub fn pos_of(&self, side: usize) -> usize {
        side % 3
    }

    pub fn side(&self, face: usize, pos: usize) -> usize {
        3 * face + pos % 3
    }

    /// The two sides of an edge, positive side first.
    pub fn sides_of_edge(&self, e: usize) -> (usize, usize) {
        let s = self.edge_positive_side[e];
        (s, self.glue[s])
    }

    /// +1 when `side` is its edge's positive side.
    pub fn side_sign(&self, side: usize) -> i64 {
        if self.edge_positive_side[self.edge_of[side]] == side {
            1
        } else {
            -1
        }
    }

    /// Tail and head punctures of a side (in its own direction).
    pub fn side_ends(&self, side: usize) -> (usize, usize) {
        let f = self.face_of(side);
        let j = self.pos_of(side);
        (
            self.puncture_at[self.side(f, j)],
            self.puncture_at[self.side(f, j + 1)],
        )
    }

    /// Walk counterclockwise around the vertex at corner `(f, j)`:
    /// crossing side `j` lands at the corner just past the glued side.
    pub fn next_corner_ccw(&self, corner: usize) -> usize {
        let s = self.glue[corner];
        let f = self.face_of(s);
        let j = self.pos_of(s);
        self.side(f, j + 1)
    }

    /// Edge-end counts at each puncture (the vectors `c_v`).
    pub fn puncture_edge_counts(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; self.num_edges()]; self.punctures];
        for s in 0..self.num_sides() {
            // each side contributes its tail end; over both sides of an
            // edge this counts each end of the edge exactly once
            let (tail, _) = self.side_ends(s);
            if self.side_sign(s) == 1 {
                let (_, head) = self.side_ends(s);
                out[tail][self.edge_of[s]] += 1;
                out[head][self.edge_of[s]] += 1;
            }
        }
        out
    }

    /// Faces with two sides on the same edge.
    pub fn self_folded_faces(&self) -> Vec<usize> {
        (0..self.num_faces)
            .filter(|&f| {
                let e: Vec<usize> = (0..3).map(|j| self.edge_of[self.side(f, j)]).collect();
                e[0] == e[1] || e[1] == e[2] || e[0] == e[2]
            })
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.punctures as i64 - self.num_edges() as i64 + self.num_faces as i64
    }

    pub fn validate(&self) -> Result<()> {
        let ns = self.num_sides();
        if self.glue.len() != ns || self.edge_of.len() != ns || self.puncture_at.len() != ns {
            return Err(Error::BadInput("side arrays have wrong length".into()));
        }
        for s in 0..ns {
            if self.glue[s] >= ns || self.glue[self.glue[s]] != s || self.glue[s] == s {
                return Err(Error::BadInput(format!(
                    "gluing is not a fixed-point-free involution at side {s}"
                )));
            }
            if self.edge_of[self.glue[s]] != self.edge_of[s] {
                return Err(Error::BadInput(format!(
                    "glued sides {s} and {} carry different edge labels",
                    self.glue[s]
                )));
            }
            // opposite directions: tail(s) = head(glue s), head(s) = tail(glue s)
            let (t, h) = self.side_ends(s);
            let (t2, h2) = self.side_ends(self.glue[s]);
            if t != h2 || h != t2 {
                return Err(Error::BadInput(format!(
                    "puncture data inconsistent across gluing at side {s}"
                )));
            }
        }
        // edge labels: each label 0..E exactly twice, positive side correct
        let ne = self.num_edges();
        let mut count = vec![0usize; ne];
        for s in 0..ns {
            let e = self.edge_of[s];
            if e >= ne {
                return Err(Error::BadInput(format!("edge label {e} out of range")));
            }
            count[e] += 1;
        }
        if count.iter().any(|&c| c != 2) {
            return Err(Error::BadInput("edge labels are not two sides each".into()));
        }
        for e in 0..ne {
            let s = self.edge_positive_side[e];
            if s >= ns || self.edge_of[s] != e {
                return Err(Error::BadInput(format!(
                    "positive side of edge {e} is invalid"
                )));
            }
        }
        // vertex classes via corner walking must match puncture_at
        let mut seen = vec![false; ns];
        let mut classes = 0usize;
        for start in 0..ns {
            if seen[start] {
                continue;
            }
            classes += 1;
            let p = self.puncture_at[start];
            let mut c = start;
            loop {
                if self.puncture_at[c] != p {
                    return Err(Error::BadInput(format!(
                        "corner walk around puncture {p} meets corner labeled {}",
                        self.puncture_at[c]
                    )));
                }
                seen[c] = true;
                c = self.next_corner_ccw(c);
                if c == start {
                    break;
                }
            }
        }
        if classes != self.punctures {
            return Err(Error::BadInput(format!(
                "{classes} vertex classes but {} punctures declared",
                self.punctures
            )));
        }
        // Euler count: chi(closed) = 2 - 2g with ideal vertices as punctures
        if self.euler_characteristic() != 2 - 2 * self.genus as i64 {
            return Err(Error::BadInput("Euler characteristic mismatch".into()));
        }
        if 2 - 2 * (self.genus as i64) - (self.punctures as i64) >= 0 {
            return Err(Error::BadInput(
                "surface must have negative Euler characteristic".into(),
            ));
        }
        Ok(())
    }
}

/// The skew form counting corner pairs: per face with ccw sides
/// `(s0, s1, s2)`, the pairs `(s0,s1), (s1,s2), (s2,s0)` each contribute
/// `+1` to epsilon(first, second).
#[derive(Clone, Debug)]
pub struct EpsilonForm {
    pub matrix: IMat,
    /// Edge-variable generating set; identity unless self-folded faces
    /// forced the modified generators (X_i replaced by X_i X_b).
    pub generators: IMat,
}

pub fn epsilon_form(tri: &IdealTriangulation) -> EpsilonForm {
    let ne = tri.num_edges();
    let mut m = IMat::zero(ne, ne);
    for f in 0..tri.num_faces {
        for j in 0..3 {
            let a = tri.edge_of[tri.side(f, j)];
            let b = tri.edge_of[tri.side(f, j + 1)];
            m[(a, b)] += 1;
            m[(b, a)] -= 1;
        }
    }
    let mut generators = IMat::identity(ne);
    for f in tri.self_folded_faces() {
        // sides i, i, b: replace X_i by X_i X_b
        let e: Vec<usize> = (0..3).map(|j| tri.edge_of[tri.side(f, j)]).collect();
        let (i, b) = if e[0] == e[1] {
            (e[0], e[2])
        } else if e[1] == e[2] {
            (e[1], e[0])
        } else {
            (e[0], e[1])
        };
        generators[(b, i)] += 1;
    }
    if tri.self_folded_faces().is_empty() {
        EpsilonForm { matrix: m, generators }
    } else {
        let matrix = generators.transpose().mul(&m).mul(&generators);
        EpsilonForm { matrix, generators }
    }
}

/// Local data of one flip, in terms of the triangulations before and
/// after. Sides `a, b, c, d` are the quadrilateral boundary: `b` and `a`
/// flank the flipped side in the first face, `c` and `d` in the second,
/// so that before the flip the faces read `(b, e, a)` and `(c, d, e)`
/// counterclockwise, and after it `(e', d, a)` and `(c, e', b)`.
#[derive(Clone, Debug)]
pub struct FlipFrame {
    pub edge: usize,
    /// old side ids
    pub old_e1: usize,
    pub old_e2: usize,
    pub old_a: usize,
    pub old_b: usize,
    pub old_c: usize,
    pub old_d: usize,
    /// new side ids
    pub new_e1: usize,
    pub new_e2: usize,
    pub new_a: usize,
    pub new_b: usize,
    pub new_c: usize,
    pub new_d: usize,
    /// map old side -> new side for sides untouched by the flip
    /// (identity outside the quad)
    pub quad_faces: (usize, usize),
}

impl FlipFrame {
    /// New side id of an old side.
    pub fn map_side(&self, old: usize) -> Option<usize> {
        if old == self.old_e1 || old == self.old_e2 {
            None
        } else if old == self.old_a {
            Some(self.new_a)
        } else if old == self.old_b {
            Some(self.new_b)
        } else if old == self.old_c {
            Some(self.new_c)
        } else if old == self.old_d {
            Some(self.new_d)
        } else {
            Some(old)
        }
    }
}

/// Flip the given edge. The new edge keeps the same label, oriented from
/// the corner between `b` and `a`'s far end toward the corner between
/// `c` and `d` (the `e1` side of the new first face).
pub fn flip(tri: &IdealTriangulation, edge: usize) -> Result<(IdealTriangulation, FlipFrame)> {
    let (s1, s2) = tri.sides_of_edge(edge);
    let f1 = tri.face_of(s1);
    let f2 = tri.face_of(s2);
    if f1 == f2 {
        return Err(Error::UnflippableEdge(edge));
    }
    let j1 = tri.pos_of(s1);
    let j2 = tri.pos_of(s2);
    // quad sides in the old triangulation
    let old_b = tri.side(f1, j1 + 2);
    let old_a = tri.side(f1, j1 + 1);
    let old_c = tri.side(f2, j2 + 1);
    let old_d = tri.side(f2, j2 + 2);
    // quad corner punctures: e1 runs Q -> S, b runs P -> Q, c runs Q -> R
    let punc_p = tri.puncture_at[tri.side(f1, j1 + 2)];
    let punc_q = tri.puncture_at[tri.side(f1, j1)];
    let punc_r = tri.puncture_at[tri.side(f2, j2 + 2)];
    let punc_s = tri.puncture_at[tri.side(f1, j1 + 1)];

    let mut out = tri.clone();
    // new f1 = (e1', d, a) with corners (P, R, S)
    // new f2 = (c, e2', b) with corners (Q, R, P)
    let new_e1 = out.side(f1, 0);
    let new_d = out.side(f1, 1);
    let new_a = out.side(f1, 2);
    let new_c = out.side(f2, 0);
    let new_e2 = out.side(f2, 1);
    let new_b = out.side(f2, 2);

    out.puncture_at[3 * f1] = punc_p;
    out.puncture_at[3 * f1 + 1] = punc_r;
    out.puncture_at[3 * f1 + 2] = punc_s;
    out.puncture_at[3 * f2] = punc_q;
    out.puncture_at[3 * f2 + 1] = punc_r;
    out.puncture_at[3 * f2 + 2] = punc_p;

    let frame = FlipFrame {
        edge,
        old_e1: s1,
        old_e2: s2,
        old_a,
        old_b,
        old_c,
        old_d,
        new_e1,
        new_e2,
        new_a,
        new_b,
        new_c,
        new_d,
        quad_faces: (f1, f2),
    };

    // gluing: new diagonal glues to itself across the two faces
    out.glue[new_e1] = new_e2;
    out.glue[new_e2] = new_e1;
    out.edge_of[new_e1] = edge;
    out.edge_of[new_e2] = edge;
    out.edge_positive_side[edge] = new_e1;

    // surviving quad sides keep their outer partners (which may be other
    // quad sides when the quad is glued to itself)
    for (old, new) in [
        (old_a, new_a),
        (old_b, new_b),
        (old_c, new_c),
        (old_d, new_d),
    ] {
        let partner_old = tri.glue[old];
        let partner_new = frame.map_side(partner_old).expect("partner is not the diagonal");
        out.glue[new] = partner_new;
        out.glue[partner_new] = new;
        let e = tri.edge_of[old];
        out.edge_of[new] = e;
        out.edge_of[partner_new] = e;
        let pos_old = tri.edge_positive_side[e];
        out.edge_positive_side[e] = frame.map_side(pos_old).expect("positive side survives");
    }

    debug_assert!(out.validate().is_ok(), "flip produced invalid triangulation");
    Ok((out, frame))
}

#[cfg(test)]
pub(crate) mod test_surfaces {
    use super::IdealTriangulation;

    /// Standard once-punctured torus: square with one diagonal, both
    /// faces reading (a, b, d) counterclockwise; edges 0 = a, 1 = b,
    /// 2 = d.
    pub fn once_punctured_torus() -> IdealTriangulation {
        // face 0 sides: (a, b, d) = edges (0, 1, 2)
        // face 1 sides: (d, a, b) -> labels chosen so gluing is opposite
        let tri = IdealTriangulation {
            genus: 1,
            punctures: 1,
            num_faces: 2,
            // side ids: f0: 0,1,2   f1: 3,4,5
            // f0 = (a+, b+, d+), f1 = (d-, a-, b-)
            glue: vec![4, 5, 3, 2, 0, 1],
            edge_of: vec![0, 1, 2, 2, 0, 1],
            edge_positive_side: vec![0, 1, 2],
            puncture_at: vec![0, 0, 0, 0, 0, 0],
        };
        tri.validate().unwrap();
        tri
    }
}

#[cfg(test)]
mod tests {
    use super::test_surfaces::once_punctured_torus;
    use super::*;

    #[test]
    fn once_punctured_torus_epsilon() {
        let tri = once_punctured_torus();
        let eps = epsilon_form(&tri);
        let expect = IMat::from_rows(vec![vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]]);
        assert_eq!(eps.matrix, expect);
    }

    #[test]
    fn epsilon_radical_contains_counts_and_ones() {
        let tri = once_punctured_torus();
        let eps = epsilon_form(&tri);
        for c in tri.puncture_edge_counts() {
            assert!(eps.matrix.mul_vec(&c).iter().all(|&x| x == 0));
        }
        let ones = vec![1i64; tri.num_edges()];
        assert!(eps.matrix.mul_vec(&ones).iter().all(|&x| x == 0));
    }

    #[test]
    fn flip_preserves_topology_and_involutes() {
        let tri = once_punctured_torus();
        for e in 0..tri.num_edges() {
            let (t2, _) = flip(&tri, e).unwrap();
            t2.validate().unwrap();
            assert_eq!(t2.genus, 1);
            assert_eq!(t2.punctures, 1);
            // flip the new edge back: isomorphic to the start
            let (t3, _) = flip(&t2, e).unwrap();
            t3.validate().unwrap();
            let isos = super::mapclass::find_isomorphisms(&t3, &tri);
            assert!(!isos.is_empty(), "double flip not isomorphic to start");
        }
    }

    #[test]
    fn flip_epsilon_still_skew_with_radical() {
        let tri = once_punctured_torus();
        let (t2, _) = flip(&tri, 2).unwrap();
        let eps = epsilon_form(&t2);
        for c in t2.puncture_edge_counts() {
            assert!(eps.matrix.mul_vec(&c).iter().all(|&x| x == 0));
        }
    }
}
