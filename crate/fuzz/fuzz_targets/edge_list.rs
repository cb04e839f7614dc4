#![no_main]
#[macro_use]
extern crate libfuzzer_sys;

use fj_core::graph::{load_edge_list, IngestOptions};

fuzz_target!(|data: &[u8]| {
    // First byte picks whether to keep only the largest component.
    let Some((&flag, rest)) = data.split_first() else { return };
    let options = IngestOptions { largest_component: flag & 1 == 1 };
    if let Ok(g) = load_edge_list(rest, options) {
        let degrees: f64 = (0..g.n()).map(|u| g.weighted_degree(fj_core::VertexId::new(u))).sum();
        let edges: f64 = g.edges().map(|(_, _, w)| w).sum();
        assert!((degrees - 2.0 * edges).abs() <= 1e-9 * degrees.max(1.0));
    }
});
