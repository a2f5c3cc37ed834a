//! Property tests of the mesh generators, the serialization round trips,
//! and the assembled-matrix structure.

use proptest::prelude::*;

use convdiff::assembly::{assemble_convection, assemble_diffusion};
use convdiff::market::{read_matrix_market, write_matrix_market};
use convdiff::mesh_io::{export_triangle, import_triangle};
use convdiff::{Mesh, ScalarField, SparseMatrix, VectorField};

#[test]
fn closed_form_counts_hold_up_to_64() {
    for m in 1..=64u32 {
        let mesh = Mesh::hex_structured(m).unwrap();
        let mu = m as usize;
        assert_eq!(mesh.n_interior(), 3 * mu * mu - 3 * mu + 1);
    }
    for m in 2..=64u32 {
        let mesh = Mesh::square_fk(m).unwrap();
        let mu = m as usize;
        assert_eq!(mesh.n_interior(), (mu - 1) * (mu - 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn structured_meshes_validate(m in 1u32..10, fk in proptest::bool::ANY) {
        let mesh = if fk {
            Mesh::square_fk(m.max(2)).unwrap()
        } else {
            Mesh::hex_structured(m).unwrap()
        };
        mesh.validate().unwrap();
    }

    #[test]
    fn refinement_quadruples_triangles(m in 1u32..6, fk in proptest::bool::ANY) {
        let mesh = if fk {
            Mesh::square_fk(m.max(2)).unwrap()
        } else {
            Mesh::hex_structured(m).unwrap()
        };
        let refined = mesh.refine_midpoint();
        prop_assert_eq!(refined.n_triangles(), 4 * mesh.n_triangles());
        prop_assert_eq!(refined.h(), mesh.h() / 2.0);
        refined.validate().unwrap();
    }

    #[test]
    fn perturbed_meshes_round_trip_in_triangle_format(
        m in 2u32..6,
        alpha in 0.0f64..0.45,
        seed in proptest::num::u64::ANY,
    ) {
        let mesh = Mesh::hex_structured(m).unwrap().perturb(alpha, seed).unwrap();
        mesh.validate().unwrap();
        let (node, ele) = export_triangle(&mesh);
        let back = import_triangle(&node, &ele).unwrap();
        prop_assert_eq!(mesh.n_nodes(), back.n_nodes());
        for (p, q) in mesh.nodes().iter().zip(back.nodes()) {
            prop_assert_eq!(p.x.to_bits(), q.x.to_bits());
            prop_assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        for k in 0..mesh.n_nodes() {
            prop_assert_eq!(mesh.is_boundary(k), back.is_boundary(k));
        }
    }

    #[test]
    fn matrix_market_round_trips(
        entries in proptest::collection::vec(
            (0usize..12, 0usize..12, -1.0e3f64..1.0e3),
            0..60,
        ),
        symmetric in proptest::bool::ANY,
    ) {
        let matrix = if symmetric {
            let mirrored: Vec<(usize, usize, f64)> = entries
                .iter()
                .flat_map(|&(i, j, v)| [(i, j, v), (j, i, v)])
                .collect();
            SparseMatrix::from_triplets(12, 12, &mirrored).unwrap()
        } else {
            SparseMatrix::from_triplets(12, 12, &entries).unwrap()
        };
        let text = write_matrix_market(&matrix);
        let back = read_matrix_market(&text).unwrap();
        prop_assert!(matrix.max_abs_diff(&back) == 0.0);
    }

    #[test]
    fn stiffness_is_spd_and_convection_bounded(m in 2u32..5, c in 0.5f64..4.0) {
        let mesh = Mesh::hex_structured(m).unwrap();
        let theta = assemble_diffusion(&mesh, &ScalarField::Constant(c)).unwrap();
        prop_assert!(theta.is_symmetric());
        prop_assert!(convdiff::cholesky::SpdFactor::new(&theta).is_ok());
        let psi = assemble_convection(&mesh, &VectorField::Linear).unwrap();
        prop_assert!(psi.inf_norm() < 4.0 * mesh.h());
    }
}
