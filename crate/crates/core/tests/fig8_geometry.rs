//! End-to-end geometry on the simplest pseudo-Anosov: the figure-eight
//! monodromy on the once-punctured torus. The flip word is discovered by
//! searching length-2 words whose homology action has trace 3; the
//! layered complex must then reproduce the census geometry: two regular
//! ideal tetrahedra, volume 2.029883..., shear-bends never -1, and a
//! monodromy-invariant Kashaev character.

use pa_inv_core::geometry::cusp::{raw_cusp_rows, resolve_cusp_rows};
use pa_inv_core::geometry::volume::total_volume;
use pa_inv_core::geometry::{
    build_layered, lift::lift_to_kashaev_coordinates, newton::newton_refine, shear_bend_layers,
    GluingSystem,
};
use pa_inv_core::numeric::abs_c;
use pa_inv_core::surface::homology::homology_basis;
use pa_inv_core::surface::kashaev::kashaev_lattice;
use pa_inv_core::surface::mapclass::{
    apply_mapping_class, find_isomorphisms, MappingClassCertificate, MappingClassWord,
};
use pa_inv_core::surface::{flip, IdealTriangulation};

fn once_punctured_torus() -> IdealTriangulation {
    let tri = IdealTriangulation {
        genus: 1,
        punctures: 1,
        num_faces: 2,
        glue: vec![4, 5, 3, 2, 0, 1],
        edge_of: vec![0, 1, 2, 2, 0, 1],
        edge_positive_side: vec![0, 1, 2],
        puncture_at: vec![0; 6],
    };
    tri.validate().unwrap();
    tri
}

/// Search length-2 flip words whose homology action has trace +3.
pub fn fig8_certificate() -> MappingClassCertificate {
    let tri = once_punctured_torus();
    for e1 in 0..3usize {
        let (t1, _) = flip(&tri, e1).unwrap();
        for e2 in 0..3usize {
            let step = flip(&t1, e2);
            let t2 = match step {
                Ok((t, _)) => t,
                Err(_) => continue,
            };
            for iso in find_isomorphisms(&t2, &tri) {
                let word = MappingClassWord {
                    flips: vec![e1, e2],
                    relabeling: iso,
                    homology_action: None,
                };
                if let Ok(cert) = apply_mapping_class(&tri, &word) {
                    let m = &cert.homology_action;
                    let trace = m[(0, 0)] + m[(1, 1)];
                    if trace == 3 {
                        return cert;
                    }
                }
            }
        }
    }
    panic!("no trace-3 length-2 word found");
}

#[test]
fn figure_eight_geometry_end_to_end() {
    let cert = fig8_certificate();
    assert_eq!(cert.num_flips(), 2);

    let lt = build_layered(&cert).unwrap();
    assert_eq!(lt.num_tets, 2);
    assert_eq!(lt.num_classes, 2);

    // gluing system: internal edge rows + derived cusp rows
    let edge_rows = lt.edge_rows();
    let raw = raw_cusp_rows(&lt, &cert).unwrap();
    assert_eq!(raw.len(), 1);
    let cusp_rows = resolve_cusp_rows(&edge_rows, &raw, lt.num_tets, 160).unwrap();
    let mut rows = edge_rows;
    rows.extend(cusp_rows);
    let sys = GluingSystem {
        num_tets: 2,
        rows,
    };

    let sol = newton_refine(&sys, &[], 256).unwrap();
    // both tetrahedra regular: z = exp(i pi / 3)
    for z in &sol.shapes {
        let re = z.real().to_f64();
        let im = z.imag().to_f64();
        assert!((re - 0.5).abs() < 1e-30, "re = {re}");
        assert!((im - 0.866025403784438646).abs() < 1e-15, "im = {im}");
    }
    let shapes64: Vec<num_complex::Complex64> = sol
        .shapes
        .iter()
        .map(|z| num_complex::Complex64::new(z.real().to_f64(), z.imag().to_f64()))
        .collect();
    let vol = total_volume(&shapes64);
    assert!(
        (vol - 2.029883212819307).abs() < 1e-10,
        "volume = {vol}, want 2.0298832..."
    );

    // shear-bends with audits (flipped-edge identities, mutation
    // consistency, monodromy invariance run inside)
    let sbl = shear_bend_layers(&lt, &cert, &sol, 3).unwrap();

    // the product of all layer-0 shear-bends is 1 (restricted
    // Chekhov-Fock consistency)
    let prec = sol.prec();
    let tri0 = cert.initial();
    let mut prod = prec.one();
    for e in 0..tri0.num_edges() {
        prod = prod * sbl.t_value(0, e);
    }
    let d = abs_c(&(prod.clone() - 1u32));
    assert!(d < prec.tol(24), "product of shear-bends = {prod}");

    // Kashaev lift: single puncture, so no decoration correction
    let kl = kashaev_lattice(tri0).unwrap();
    let h = homology_basis(tri0);
    let lift = lift_to_kashaev_coordinates(&lt, &cert, &sbl, &kl, &h).unwrap();
    for d in &lift.decoration_log {
        assert!(abs_c(d) < prec.tol(24));
    }

    // theta^n = z'' for each tetrahedron
    for (i, th) in sbl.theta.iter().enumerate() {
        let mut p = prec.one();
        for _ in 0..3 {
            p = p * th.value();
        }
        let want = sol.log_zpp[i].value();
        let diff = abs_c(&(p - want));
        assert!(diff < prec.tol(24));
    }
}
