use fj_core::exact::{conservation_residual, fixed_point_residual, measures_exact, solve_dense};
use fj_core::graph::{largest_connected_component, load_edge_list, read_id_map, write_edge_list, write_id_map, IngestOptions};
use fj_core::innate::{estimate_s, estimate_s_exact, SEstimatorConfig, SMethod};
use fj_core::ppr::{estimate_z_regular, estimate_z_regular_traced};
use fj_core::{synth, Expressed, Graph, OpinionVector, Oracle, RandomStream, VertexId};
use proptest::prelude::*;

fn weighted_graph() -> impl Strategy<Value = Graph> {
    (2usize..30).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0.01f64..=1.0), 1..80).prop_filter_map("needs an edge", move |edges| {
            let g = Graph::from_edges(n, edges).ok()?;
            (g.m() > 0).then(|| largest_connected_component(&g))
        })
    })
}

fn with_opinions() -> impl Strategy<Value = (Graph, OpinionVector)> {
    weighted_graph().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), prop::collection::vec(0.0f64..=1.0, n).prop_map(|v| OpinionVector::new(v).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sum_is_twice_edge_weight(g in weighted_graph()) {
        let degrees: f64 = (0..g.n()).map(|u| g.weighted_degree(VertexId::new(u))).sum();
        let edges: f64 = g.edges().map(|(_, _, w)| w).sum();
        prop_assert!((degrees - 2.0 * edges).abs() <= 1e-12 * degrees.max(1.0));
    }

    #[test]
    fn adjacency_is_symmetric(g in weighted_graph()) {
        for u in 0..g.n() {
            let u = VertexId::new(u);
            for (v, w) in g.neighbors(u) {
                prop_assert_ne!(u, v);
                prop_assert_eq!(g.edge_weight(v, u), Some(w));
            }
        }
    }

    #[test]
    fn dump_and_reload_is_isomorphic(g in weighted_graph()) {
        let mut edges = Vec::new();
        write_edge_list(&g, &mut edges).unwrap();
        let mut ids = Vec::new();
        write_id_map(&g, &mut ids).unwrap();
        let h = load_edge_list(&edges[..], IngestOptions::default()).unwrap();
        let map = read_id_map(&ids[..]).unwrap();
        prop_assert_eq!(h.n(), g.n());
        prop_assert_eq!(h.m(), g.m());
        prop_assert_eq!(&map[..], g.original_ids());
        for (u, v, w) in h.edges() {
            let a = g.dense_id(h.original_id(u)).unwrap();
            let b = g.dense_id(h.original_id(v)).unwrap();
            prop_assert_eq!(g.edge_weight(a, b), Some(w));
        }
    }

    #[test]
    fn equilibrium_properties((g, s) in with_opinions()) {
        let z = solve_dense(&g, &s).unwrap();
        prop_assert!(fixed_point_residual(&g, &s, &z).unwrap() <= 1e-9);
        let (ss, zs) = (s.as_slice().iter().sum::<f64>(), z.as_slice().iter().sum::<f64>());
        prop_assert!((ss - zs).abs() <= 1e-9 * ss.max(1.0));
        let lo = s.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(z.as_slice().iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
        let report = measures_exact(&g, &s, &z).unwrap();
        prop_assert!(conservation_residual(&report) <= 1e-8);
        for u in 0..g.n() {
            let u = VertexId::new(u);
            prop_assert!((estimate_s_exact(&g, &z, u).unwrap() - s.get(u)).abs() <= 1e-9);
        }
    }

    #[test]
    fn innate_queries_bounded_by_degree((g, s) in with_opinions(), seed in any::<u64>(), collision in any::<bool>()) {
        let z = solve_dense(&g, &s).unwrap();
        let cfg = SEstimatorConfig {
            threshold: 0,
            method: if collision { SMethod::Collision } else { SMethod::MeanSampling },
            ..SEstimatorConfig::default()
        };
        let mut rng = RandomStream::new(seed);
        for u in 0..g.n() {
            let u = VertexId::new(u);
            let oracle: Oracle<Expressed> = Oracle::new(&z);
            let est = estimate_s(&g, &oracle, u, &cfg, &mut rng).unwrap();
            prop_assert!((0.0..=1.0).contains(&est));
            prop_assert!(oracle.query_count() as usize <= g.unweighted_degree(u) + 1);
        }
    }

    #[test]
    fn push_residual_decays_geometrically(seed in any::<u64>(), eps in 0.01f64..0.5) {
        let mut rng = RandomStream::new(seed);
        let g = synth::random_regular(60, 3, &mut rng).unwrap();
        let s = fj_core::opinions::gen_uniform(60, &mut rng);
        let u = g.sample_vertex(&mut rng);
        let mut norms = vec![1.0];
        let first = estimate_z_regular_traced(&g, &s, u, eps, |st| {
            norms.push(st.r_norm());
            assert!((st.total_mass() - 1.0).abs() < 1e-9);
        }).unwrap();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= 0.75 * w[0] + 1e-12);
        }
        let again = estimate_z_regular(&g, &s, u, eps).unwrap();
        prop_assert_eq!(first.estimate.to_bits(), again.estimate.to_bits());
        prop_assert_eq!(first.queries, again.queries);
    }
}
