//! All-pairs shortest paths on small dense graphs.

use std::collections::VecDeque;

/// Relative improvement a relaxation must achieve to replace an entry.
///
/// Candidates that beat the current value only by rounding noise are
/// ignored, so an edge weight that is already geodesic in exact arithmetic
/// comes back bit-for-bit unchanged.
const RELAX_SLACK: f64 = 4.0 * f64::EPSILON;

/// Floyd–Warshall over a dense row-major weight matrix, in place.
///
/// `f64::INFINITY` marks a missing edge. Iteration order is fixed, so the
/// output is bit-stable for a given input.
pub fn floyd_warshall(n: usize, w: &mut [f64]) {
    assert_eq!(w.len(), n * n);
    for k in 0..n {
        for i in 0..n {
            let wik = w[i * n + k];
            if !wik.is_finite() {
                continue;
            }
            for j in 0..n {
                let cand = wik + w[k * n + j];
                let cur = &mut w[i * n + j];
                if cand < *cur * (1.0 - RELAX_SLACK) {
                    *cur = cand;
                }
            }
        }
    }
}

/// Hop distances from every vertex of an unweighted graph given by
/// adjacency lists. Unreachable pairs are `None`.
pub fn bfs_all_pairs(adj: &[Vec<usize>]) -> Vec<Vec<Option<usize>>> {
    let n = adj.len();
    (0..n)
        .map(|s| {
            let mut dist = vec![None; n];
            dist[s] = Some(0);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                let du = dist[u].unwrap_or(0);
                for &v in &adj[u] {
                    if dist[v].is_none() {
                        dist[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let inf = f64::INFINITY;
        let mut w = vec![0.0, 1.0, inf, 1.0, 0.0, 2.0, inf, 2.0, 0.0];
        floyd_warshall(3, &mut w);
        assert_eq!(w, vec![0.0, 1.0, 3.0, 1.0, 0.0, 2.0, 3.0, 2.0, 0.0]);
    }

    #[test]
    fn geodesic_edges_unchanged() {
        // 0.1 + 0.2 rounds above 0.3, but an exact tie must not replace the edge
        let mut w = vec![0.0, 0.1, 0.3, 0.1, 0.0, 0.2, 0.3, 0.2, 0.0];
        floyd_warshall(3, &mut w);
        assert_eq!(w[2], 0.3);
        let mut w = vec![0.0, 0.7, 1.0, 0.7, 0.0, 0.3, 1.0, 0.3, 0.0];
        floyd_warshall(3, &mut w);
        assert_eq!(w[2], 1.0);
    }

    #[test]
    fn bfs_cycle() {
        let adj = vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![2, 0]];
        let d = bfs_all_pairs(&adj);
        assert_eq!(d[0], vec![Some(0), Some(1), Some(2), Some(1)]);
        let d = bfs_all_pairs(&[vec![], vec![]]);
        assert_eq!(d[0][1], None);
    }
}
