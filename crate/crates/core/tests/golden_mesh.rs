//! Golden-file checks of the canonical mesh dump and the Triangle-format
//! round trip.

use convdiff::mesh_io::{canonical_dump, export_triangle, import_triangle, parse_canonical};
use convdiff::Mesh;

#[test]
fn hex_m2_dump_matches_golden_file() {
    let mesh = Mesh::hex_structured(2).unwrap();
    let golden = include_str!("golden/hex_m2.dump");
    assert_eq!(canonical_dump(&mesh), golden);
}

#[test]
fn golden_dump_parses_back() {
    let golden = include_str!("golden/hex_m2.dump");
    let mesh = parse_canonical(golden).unwrap();
    assert_eq!(mesh.n_nodes(), 19);
    assert_eq!(mesh.n_interior(), 7);
    mesh.validate().unwrap();
}

#[test]
fn refined_import_keeps_counts() {
    let mesh = Mesh::hex_structured(2).unwrap();
    let (node, ele) = export_triangle(&mesh);
    let imported = import_triangle(&node, &ele).unwrap();
    let refined = imported.refine_midpoint();
    assert_eq!(
        refined.n_interior(),
        Mesh::hex_structured(4).unwrap().n_interior()
    );
}
