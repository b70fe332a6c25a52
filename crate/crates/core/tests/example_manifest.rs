//! The shipped example manifest stays loadable.

use std::path::Path;

use refined_bias_core::data::load_manifest;
use refined_bias_core::Dominance;

#[test]
fn example_manifest_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/example_manifest.json");
    let m = load_manifest(&path).unwrap();
    assert_eq!(m.label_space_size(), 1000);
    assert_eq!(m.superclasses().ids_with_dominance(Dominance::Shape).len(), 4);
    assert_eq!(m.superclasses().ids_with_dominance(Dominance::Texture).len(), 5);
    assert_eq!(m.superclasses().get("clock").unwrap().members, vec![409, 530, 892]);
    assert_eq!(m.stimuli().len(), 3);
}
