//! Layered triangulations of mapping tori, their gluing equations,
//! high-precision shape solving, and shear-bend coordinates.
//!
//! One tetrahedron per flip, vertices `0,1,2,3` with the shape variable
//! `z` on edges 01/23, `z'` on 02/13 and `z''` on 03/12. The flipped-away
//! edge is 02, the new edge 13; in the flip quadrilateral (sides b, c, d,
//! a going around, diagonals e and e') this puts `z` on b and d and `z''`
//! on a and c, which is exactly what the classical shear mutation
//! demands.

pub mod cusp;
pub mod gluing;
pub mod lift;
pub mod newton;
pub mod volume;

use crate::error::{Error, Result};
use crate::numeric::{LogVal, Prec};
use crate::surface::mapclass::MappingClassCertificate;
use rug::Complex;
use std::collections::HashMap;

pub use gluing::{GluingRow, GluingSystem, RowKind};
pub use lift::KashaevCoordinateLift;
pub use newton::ShapeSolution;

/// Tetrahedron edge slots, ordered 01, 02, 03, 12, 13, 23.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Shape parameter carried by a tetrahedron edge slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Z,
    Zp,
    Zpp,
}

pub fn pair_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair")
}

pub fn param_kind(pair: usize) -> ParamKind {
    match pair {
        0 | 5 => ParamKind::Z,
        1 | 4 => ParamKind::Zp,
        _ => ParamKind::Zpp,
    }
}

/// A tetrahedron face, addressed by the omitted vertex.
pub type TetFace = (usize, usize);

/// Gluing of one tet face to another, with the edge correspondence
/// expressed as pair-index maps.
#[derive(Clone, Debug)]
pub struct FaceGluing {
    pub to: TetFace,
    /// maps a pair index of an edge on the source face to one on the target
    pub edge_map: HashMap<usize, usize>,
}

/// Where a surface face currently sits in the 3-complex.
#[derive(Clone, Debug)]
enum Owner {
    /// face of the initial layer, not yet covered from below within the
    /// fundamental domain; resolved through the monodromy at the end
    Initial(usize),
    Tet(TetFace),
}

#[derive(Clone, Debug)]
struct FaceCover {
    owner: Owner,
    /// per side position of the surface face, the tet edge pair index
    /// (meaningless for Owner::Initial, which uses the side ids
    /// directly)
    side_pairs: [usize; 3],
}

/// The layered triangulation of the mapping torus of a certificate.
#[derive(Clone, Debug)]
pub struct LayeredTriangulation {
    pub num_tets: usize,
    /// per tet: the edge labels sitting on the quad slots
    /// (flipped edge, b, d, a, c) in the layer where the flip happens
    pub tet_quads: Vec<QuadLabels>,
    /// face gluings, both directions present
    pub face_glue: HashMap<TetFace, FaceGluing>,
    /// 3-manifold edge class of each tet edge slot (6 per tet)
    pub edge_class: Vec<usize>,
    pub num_classes: usize,
}

#[derive(Clone, Debug)]
pub struct QuadLabels {
    pub flipped_edge: usize,
    pub b: usize,
    pub d: usize,
    pub a: usize,
    pub c: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
            r
        } else {
            x
        }
    }
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Build the layered triangulation from a replayed mapping class.
///
/// Vertex assignment per flip: with quad corners P (between b and a),
/// Q (tail of the flipped diagonal), R (between c and d), S (head of the
/// diagonal), the tetrahedron vertices are `(0,1,2,3) = (Q,P,S,R)`.
pub fn build_layered(cert: &MappingClassCertificate) -> Result<LayeredTriangulation> {
    let n = cert.num_flips();
    if n == 0 {
        return Err(Error::BadInput(
            "identity word has no layered triangulation".into(),
        ));
    }
    let tri0 = cert.initial();
    let num_faces = tri0.num_faces;
    let num_sides = tri0.num_sides();

    // union-find over tet edge slots plus virtual nodes for initial sides
    let mut uf = UnionFind::new(6 * n + num_sides);
    let init_node = |s: usize| 6 * n + s;

    let mut face_glue: HashMap<TetFace, FaceGluing> = HashMap::new();
    let mut glue_faces = |fa: TetFace,
                          fb: TetFace,
                          pairs: &[(usize, usize)],
                          face_glue: &mut HashMap<TetFace, FaceGluing>,
                          uf: &mut UnionFind| {
        let mut fwd = HashMap::new();
        let mut bwd = HashMap::new();
        for &(pa, pb) in pairs {
            fwd.insert(pa, pb);
            bwd.insert(pb, pa);
            uf.union(6 * fa.0 + pa, 6 * fb.0 + pb);
        }
        face_glue.insert(fa, FaceGluing { to: fb, edge_map: fwd });
        face_glue.insert(fb, FaceGluing { to: fa, edge_map: bwd });
    };

    // pending: consuming tet edge above each initial side
    let mut initial_above: Vec<Option<(usize, usize, usize)>> = vec![None; num_sides];

    let mut covers: Vec<FaceCover> = (0..num_faces)
        .map(|f| FaceCover {
            owner: Owner::Initial(f),
            side_pairs: [0, 1, 2], // positions double as side markers
        })
        .collect();
    let mut cover_snapshots: Vec<Vec<FaceCover>> = vec![covers.clone()];

    let mut tet_quads = Vec::with_capacity(n);

    for (m, frame) in cert.frames.iter().enumerate() {
        let old = &cert.stages[m];
        let (f1, f2) = frame.quad_faces;
        let j1 = old.pos_of(frame.old_e1);
        let j2 = old.pos_of(frame.old_e2);

        tet_quads.push(QuadLabels {
            flipped_edge: frame.edge,
            b: old.edge_of[frame.old_b],
            d: old.edge_of[frame.old_d],
            a: old.edge_of[frame.old_a],
            c: old.edge_of[frame.old_c],
        });

        // bottom face over f1: omit 3, sides (pos j1 -> 02, j1+1 -> 12, j1+2 -> 01)
        let bottom1: [(usize, usize); 3] = [
            (j1, pair_index(0, 2)),
            ((j1 + 1) % 3, pair_index(1, 2)),
            ((j1 + 2) % 3, pair_index(0, 1)),
        ];
        // bottom face over f2: omit 1, sides (pos j2 -> 02, j2+1 -> 03, j2+2 -> 23)
        let bottom2: [(usize, usize); 3] = [
            (j2, pair_index(0, 2)),
            ((j2 + 1) % 3, pair_index(0, 3)),
            ((j2 + 2) % 3, pair_index(2, 3)),
        ];
        for (face_id, omit, spec) in [(f1, 3usize, &bottom1), (f2, 1usize, &bottom2)] {
            let cov = covers[face_id].clone();
            match cov.owner {
                Owner::Initial(f0) => {
                    for &(pos, pr) in spec.iter() {
                        let side = 3 * f0 + pos;
                        initial_above[side] = Some((m, pr, omit));
                        uf.union(init_node(side), 6 * m + pr);
                    }
                    // the face gluing to the wrapped-around top face is
                    // recorded at monodromy time
                }
                Owner::Tet(tf) => {
                    let pairs: Vec<(usize, usize)> = spec
                        .iter()
                        .map(|&(pos, pr)| (pr, cov.side_pairs[pos]))
                        .collect();
                    glue_faces((m, omit), tf, &pairs, &mut face_glue, &mut uf);
                }
            }
        }

        // top faces: new f1 = (e1', d, a) omit 0; new f2 = (c, e2', b) omit 2
        covers[f1] = FaceCover {
            owner: Owner::Tet((m, 0)),
            side_pairs: [pair_index(1, 3), pair_index(2, 3), pair_index(1, 2)],
        };
        covers[f2] = FaceCover {
            owner: Owner::Tet((m, 2)),
            side_pairs: [pair_index(0, 3), pair_index(1, 3), pair_index(0, 1)],
        };
        cover_snapshots.push(covers.clone());
    }

    // monodromy closure: top covers glue to the initial sides through the
    // relabeling
    let last = cert.final_tri();
    for f in 0..num_faces {
        let cov = &covers[f];
        let tf = match cov.owner {
            Owner::Initial(_) => {
                return Err(Error::BadInput(format!(
                    "face {f} untouched by the flip word; complex is degenerate"
                )))
            }
            Owner::Tet(tf) => tf,
        };
        // side correspondence into the consumed initial face
        let mut pairs = Vec::new();
        let mut consumer: Option<(usize, usize)> = None;
        for pos in 0..3 {
            let side_n = last.side(f, pos);
            let side_0 = cert.relabeling.side_map[side_n];
            uf.union(6 * tf.0 + cov.side_pairs[pos], init_node(side_0));
            match initial_above[side_0] {
                None => {
                    return Err(Error::BadInput(format!(
                        "initial side {side_0} never consumed; complex is degenerate"
                    )))
                }
                Some((t, pr, omit)) => {
                    // the consuming tet face must be the same for all
                    // three sides of the target face
                    pairs.push((cov.side_pairs[pos], pr));
                    match consumer {
                        None => consumer = Some((t, omit)),
                        Some(c) => {
                            if c != (t, omit) {
                                return Err(Error::BadInput(
                                    "inconsistent consumers across one initial face".into(),
                                ));
                            }
                        }
                    }
                }
            }
        }
        let cons = consumer.unwrap();
        glue_faces(tf, cons, &pairs, &mut face_glue, &mut uf);
    }

    // every tet face glued exactly once
    for t in 0..n {
        for omit in 0..4 {
            if !face_glue.contains_key(&(t, omit)) {
                return Err(Error::BadInput(format!(
                    "tet {t} face {omit} left unglued"
                )));
            }
        }
    }

    // edge classes over the tet edge slots only
    let mut class_of_root: HashMap<usize, usize> = HashMap::new();
    let mut edge_class = vec![0usize; 6 * n];
    let mut num_classes = 0;
    for slot in 0..6 * n {
        let r = uf.find(slot);
        let c = *class_of_root.entry(r).or_insert_with(|| {
            let c = num_classes;
            num_classes += 1;
            c
        });
        edge_class[slot] = c;
    }
    if num_classes != n {
        return Err(Error::BadInput(format!(
            "{num_classes} edge classes for {n} tetrahedra; not an ideal triangulation"
        )));
    }

    let _ = cover_snapshots;
    Ok(LayeredTriangulation {
        num_tets: n,
        tet_quads,
        face_glue,
        edge_class,
        num_classes,
    })
}

impl LayeredTriangulation {
    /// Contributions (tet, pair) of the tetrahedra stacked directly
    /// above edge `e` of layer `i`: walk the layers upward tracking the
    /// persistent label, collecting quad-side incidences, wrapping
    /// through the monodromy relabeling, until the edge is flipped away
    /// (which contributes the z' slot and ends the fan).
    pub fn fan_above(
        &self,
        cert: &MappingClassCertificate,
        layer: usize,
        e: usize,
    ) -> Result<Vec<(usize, usize)>> {
        let n = self.num_tets;
        let tri0 = cert.initial();
        let last = cert.final_tri();
        let edge_map: Vec<usize> = (0..last.num_edges())
            .map(|x| tri0.edge_of[cert.relabeling.side_map[last.edge_positive_side[x]]])
            .collect();
        let mut out = Vec::new();
        let mut label = e;
        let mut j = layer;
        let guard = (tri0.num_edges() + 2) * n + layer;
        for _ in 0..guard {
            if j == n {
                label = edge_map[label];
                j = 0;
            }
            let q = &self.tet_quads[j];
            if q.flipped_edge == label {
                out.push((j, pair_index(0, 2)));
                return Ok(out);
            }
            for (slot_label, pr) in [
                (q.b, pair_index(0, 1)),
                (q.d, pair_index(2, 3)),
                (q.a, pair_index(1, 2)),
                (q.c, pair_index(0, 3)),
            ] {
                if slot_label == label {
                    out.push((j, pr));
                }
            }
            j += 1;
        }
        Err(Error::BadInput(format!(
            "edge {e} of layer {layer} is never flipped; complex is degenerate"
        )))
    }

    /// Gluing-equation rows from the edge classes, in Neumann-Zagier form
    /// `A log z + B log z'' = pi i nu`.
    pub fn edge_rows(&self) -> Vec<GluingRow> {
        let n = self.num_tets;
        let mut rows = vec![
            GluingRow {
                a: vec![0; n],
                b: vec![0; n],
                nu: 2,
                kind: RowKind::Edge,
            };
            self.num_classes
        ];
        for t in 0..n {
            for pr in 0..6 {
                let c = self.edge_class[6 * t + pr];
                match param_kind(pr) {
                    ParamKind::Z => rows[c].a[t] += 1,
                    ParamKind::Zpp => rows[c].b[t] += 1,
                    ParamKind::Zp => {
                        // log z' = pi i - log z - log z''
                        rows[c].a[t] -= 1;
                        rows[c].b[t] -= 1;
                        rows[c].nu -= 1;
                    }
                }
            }
        }
        rows
    }
}

/// Shear-bend coordinates of every layer with their log branches.
#[derive(Clone, Debug)]
pub struct ShearBendLayers {
    /// per layer 0..=N, per edge: log of the shear-bend
    pub log_t: Vec<Vec<LogVal>>,
    /// per tet: theta = exp(log z'' / n)
    pub theta: Vec<LogVal>,
}

impl ShearBendLayers {
    pub fn t_value(&self, layer: usize, e: usize) -> Complex {
        self.log_t[layer][e].value()
    }
}

/// Compute shear-bends of all layers via fan walks, audit the flipped
/// edge values and the classical mutation consistency.
pub fn shear_bend_layers(
    lt: &LayeredTriangulation,
    cert: &MappingClassCertificate,
    sol: &ShapeSolution,
    n_root: u32,
) -> Result<ShearBendLayers> {
    let prec = Prec(sol.log_z[0].log.prec().0);
    let num_layers = lt.num_tets + 1;
    let mut log_t = Vec::with_capacity(num_layers);
    for layer in 0..num_layers {
        let tri = &cert.stages[layer];
        let ne = tri.num_edges();
        let mut row = Vec::with_capacity(ne);
        for e in 0..ne {
            let fan = lt.fan_above(cert, layer, e)?;
            let mut log = prec.pi_i();
            log = -log;
            for (t, pr) in fan {
                let lv = match param_kind(pr) {
                    ParamKind::Z => &sol.log_z[t].log,
                    ParamKind::Zpp => &sol.log_zpp[t].log,
                    ParamKind::Zp => &sol.log_zp[t].log,
                };
                log += lv;
            }
            row.push(LogVal::from_log(log));
        }
        log_t.push(row);
    }

    // theta_i = exp(log z''_i / n)
    let theta: Vec<LogVal> = sol
        .log_zpp
        .iter()
        .map(|lv| lv.nth_root(n_root))
        .collect();

    let sbl = ShearBendLayers { log_t, theta };
    audit_shear_bends(lt, cert, sol, &sbl, prec)?;
    Ok(sbl)
}

fn audit_shear_bends(
    lt: &LayeredTriangulation,
    cert: &MappingClassCertificate,
    sol: &ShapeSolution,
    sbl: &ShearBendLayers,
    prec: Prec,
) -> Result<()> {
    use crate::numeric::abs_c;
    let tol = prec.tol(24);
    // flipped edge at layer i carries -z'_i; one layer up, -1/z'_i
    for (i, q) in lt.tet_quads.iter().enumerate() {
        let e = q.flipped_edge;
        let zp = sol.log_zp[i].value();
        let t_i = sbl.t_value(i, e);
        let want = -zp.clone();
        if abs_c(&(t_i.clone() - &want)) > tol.clone() * abs_c(&want) {
            return Err(Error::VerificationFailed(format!(
                "shear-bend of flipped edge {e} at layer {i} is {t_i}, want -z' = {want}"
            )));
        }
        let t_up = sbl.t_value(i + 1, e);
        let want_up = -zp.recip();
        if abs_c(&(t_up.clone() - &want_up)) > tol.clone() * abs_c(&want_up) {
            return Err(Error::VerificationFailed(format!(
                "shear-bend of new edge {e} at layer {} is {t_up}, want -1/z' = {want_up}",
                i + 1
            )));
        }
        // generic condition: t != -1 i.e. 1 + t = 1 - z' != 0 given; and t != 0
        if abs_c(&t_i) < prec.tol(prec.bits() / 2) {
            return Err(Error::DegenerateShear(format!("edge {e} layer {i}")));
        }
    }
    // classical mutation consistency: layer i -> i+1
    for (i, q) in lt.tet_quads.iter().enumerate() {
        let tri = &cert.stages[i];
        let eps = crate::surface::epsilon_form(tri);
        let e = q.flipped_edge;
        let te = sbl.t_value(i, e);
        for x in 0..tri.num_edges() {
            let want = if x == e {
                sbl.t_value(i, e).recip()
            } else {
                let k = eps.matrix[(x, e)];
                let mut v = sbl.t_value(i, x);
                if k != 0 {
                    let base = Complex::from(1u32 + te.clone());
                    let mut fac = prec.one();
                    for _ in 0..k.unsigned_abs() {
                        fac = fac * &base;
                    }
                    if k > 0 {
                        // t_x' = t_x t_e^k (1+t_e)^{-k}
                        let mut tk = prec.one();
                        for _ in 0..k {
                            tk = tk * &te;
                        }
                        v = v * tk / fac;
                    } else {
                        v = v * fac;
                    }
                }
                v
            };
            let got = sbl.t_value(i + 1, x);
            if abs_c(&(got.clone() - &want)) > prec.tol(20).clone() * (abs_c(&want) + 1u32) {
                return Err(Error::VerificationFailed(format!(
                    "mutation mismatch at layer {i} edge {x}: {got} vs {want}"
                )));
            }
        }
    }
    // monodromy invariance: layer N relabeled equals layer 0
    let last = cert.final_tri();
    let tri0 = cert.initial();
    let tol2 = prec.tol(24);
    for e in 0..last.num_edges() {
        let s = cert.relabeling.side_map[last.edge_positive_side[e]];
        let e0 = tri0.edge_of[s];
        let a = sbl.t_value(lt.num_tets, e);
        let b = sbl.t_value(0, e0);
        if abs_c(&(a.clone() - &b)) > tol2.clone() * abs_c(&b) {
            return Err(Error::VerificationFailed(format!(
                "monodromy invariance fails for edge {e}: {a} vs {b}"
            )));
        }
    }
    Ok(())
}
