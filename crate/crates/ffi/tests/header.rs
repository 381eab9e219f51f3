//! The checked-in header must declare every exported symbol and type.

const HEADER: &str = include_str!("../include/feynbohm.h");
const SOURCE: &str = include_str!("../src/lib.rs");

#[test]
fn every_export_is_declared() {
    let exports: Vec<&str> = SOURCE
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 20, "{exports:?}");
    for name in exports {
        assert!(HEADER.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["FbStatus", "FbBoundary", "FbMeasureVariant", "FbGrid", "FbHamiltonian", "FbUnitary", "FbWaveFunction"] {
        assert!(HEADER.contains(&format!("typedef struct {ty}")) || HEADER.contains(&format!("typedef enum {ty}")), "{ty}");
    }
    assert!(HEADER.contains("FB_STATUS_OK = 0"));
}
