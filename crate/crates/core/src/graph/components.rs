use std::collections::VecDeque;

use super::{Graph, VertexId};

/// Induced subgraph on the largest connected component, re-densified in
/// the original vertex order. Ties go to the component containing the
/// smallest original ID.
pub fn largest_connected_component(g: &Graph) -> Graph {
    let n = g.n();
    let mut comp = vec![u32::MAX; n];
    let mut best: Option<(usize, u64, u32)> = None;
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = next;
        next += 1;
        comp[start] = id;
        queue.push_back(start);
        let mut size = 0usize;
        let mut min_orig = u64::MAX;
        while let Some(u) = queue.pop_front() {
            size += 1;
            min_orig = min_orig.min(g.original_ids[u]);
            for (v, _) in g.neighbors(VertexId::new(u)) {
                if comp[v.index()] == u32::MAX {
                    comp[v.index()] = id;
                    queue.push_back(v.index());
                }
            }
        }
        let better = match best {
            None => true,
            Some((s, m, _)) => size > s || (size == s && min_orig < m),
        };
        if better {
            best = Some((size, min_orig, id));
        }
    }
    let (size, _, keep) = best.expect("graph has at least one vertex");
    if size == n {
        return g.clone();
    }
    let mut remap = vec![usize::MAX; n];
    let mut ids = Vec::with_capacity(size);
    for u in 0..n {
        if comp[u] == keep {
            remap[u] = ids.len();
            ids.push(g.original_ids[u]);
        }
    }
    let edges: Vec<_> = g
        .edges()
        .filter(|(u, _, _)| comp[u.index()] == keep)
        .map(|(u, v, w)| (remap[u.index()], remap[v.index()], w))
        .collect();
    Graph::from_edges_with_ids(ids, edges).expect("subgraph of a valid graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_components(g: &Graph) -> Vec<Vec<usize>> {
        // Repeated relaxation of labels to the minimum reachable index.
        let n = g.n();
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for (u, v, _) in g.edges() {
                let m = label[u.index()].min(label[v.index()]);
                for x in [u.index(), v.index()] {
                    if label[x] != m {
                        label[x] = m;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for root in 0..n {
            let members: Vec<usize> = (0..n).filter(|&u| label[u] == root).collect();
            if !members.is_empty() {
                groups.push(members);
            }
        }
        groups
    }

    #[test]
    fn path_unchanged() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let h = largest_connected_component(&g);
        assert_eq!(h.original_ids(), g.original_ids());
        assert_eq!(h.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn picks_larger_component() {
        let g = Graph::from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let h = largest_connected_component(&g);
        assert_eq!(h.original_ids(), &[2, 3, 4]);
        assert_eq!(h.m(), 2);
        let comps = brute_force_components(&g);
        let largest = comps.iter().max_by_key(|c| c.len()).unwrap();
        assert_eq!(largest, &vec![2, 3, 4]);
    }

    #[test]
    fn tie_goes_to_smallest_original_id() {
        let g = Graph::from_edges_with_ids(vec![7, 0, 3, 9], [(0, 3, 1.0), (1, 2, 1.0)]).unwrap();
        let h = largest_connected_component(&g);
        assert_eq!(h.original_ids(), &[0, 3]);
    }
}
