use crate::error::{Error, Result};
use crate::estimators::DependenceGraph;
use crate::partition::Partition;
use crate::union_find::UnionFind;

fn check(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("greedy partitioning needs 2 <= k <= n = {n}, got {k}")));
    }
    Ok(())
}

/// Edges in removal order: increasing weight, then smaller endpoint, then
/// larger endpoint.
pub fn removal_order(graph: &DependenceGraph) -> Vec<(usize, usize, f64)> {
    let mut edges = graph.edges();
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    edges
}

/// Removes the lightest remaining edge until `k` components remain; the
/// components are the blocks.
///
/// Runs as a maximum-weight spanning forest: edges are added in reverse
/// removal order and the first edge that would leave fewer than `k`
/// components marks where removal stops.
pub fn greedy_pairwise_partition(graph: &DependenceGraph, k: usize) -> Result<Partition> {
    let n = graph.n();
    check(n, k)?;
    let mut uf = UnionFind::new(n);
    for &(i, j, _) in removal_order(graph).iter().rev() {
        if uf.find(i) != uf.find(j) {
            if uf.components() == k {
                break;
            }
            uf.union(i, j);
        }
    }
    Partition::from_labels(&uf.labels())
}

/// Literal edge-removal simulation with a connectivity recount after every
/// removal. Quadratic in the edge count; kept as a reference.
pub fn greedy_by_edge_removal(graph: &DependenceGraph, k: usize) -> Result<Partition> {
    let n = graph.n();
    check(n, k)?;
    let order = removal_order(graph);
    let labels_after = |removed: usize| {
        let mut uf = UnionFind::new(n);
        for &(i, j, _) in &order[removed..] {
            uf.union(i, j);
        }
        uf
    };
    let mut removed = 0;
    let mut uf = labels_after(0);
    while uf.components() < k {
        removed += 1;
        uf = labels_after(removed);
    }
    Partition::from_labels(&uf.labels())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_variable_example() {
        let g = DependenceGraph::from_edges(3, &[(0, 1, 2.0), (1, 2, 1.0), (0, 2, 0.0)]).unwrap();
        let p = greedy_pairwise_partition(&g, 2).unwrap();
        assert_eq!(p, Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap());
        assert_eq!(greedy_by_edge_removal(&g, 2).unwrap(), p);
    }

    #[test]
    fn equal_weights_follow_the_tie_rule() {
        let edges: Vec<_> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j, 1.0))).collect();
        let g = DependenceGraph::from_edges(4, &edges).unwrap();
        // Removal order (0,1),(0,2),(0,3),(1,2),...: vertex 0 is cut off first.
        let p = greedy_pairwise_partition(&g, 2).unwrap();
        assert_eq!(p, Partition::new(4, vec![vec![0], vec![1, 2, 3]]).unwrap());
        assert_eq!(greedy_by_edge_removal(&g, 2).unwrap(), p);
    }

    #[test]
    fn k_bounds() {
        let g = DependenceGraph::from_edges(3, &[]).unwrap();
        assert!(greedy_pairwise_partition(&g, 1).is_err());
        assert!(greedy_pairwise_partition(&g, 4).is_err());
        assert_eq!(greedy_pairwise_partition(&g, 3).unwrap(), Partition::singletons(3));
    }
}
