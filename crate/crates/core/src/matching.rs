//! Hopcroft–Karp maximum bipartite matching.

use std::collections::VecDeque;

const INF: usize = usize::MAX;

/// Maximum matching between `adj.len()` left vertices and `n_right` right
/// vertices. Returns the right partner of every left vertex.
///
/// Neighbours are tried in the order given, so the result is deterministic.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut left = vec![INF; n_left];
    let mut right = vec![INF; n_right];
    let mut dist = vec![INF; n_left];

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if left[u] == INF {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match right[v] {
                    INF => found = true,
                    w if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        for u in 0..n_left {
            if left[u] == INF {
                augment(u, adj, &mut left, &mut right, &mut dist);
            }
        }
    }
    left.into_iter().map(|v| (v != INF).then_some(v)).collect()
}

fn augment(u: usize, adj: &[Vec<usize>], left: &mut [usize], right: &mut [usize], dist: &mut [usize]) -> bool {
    for &v in &adj[u] {
        let w = right[v];
        if w == INF || (dist[w] == dist[u] + 1 && augment(w, adj, left, right, dist)) {
            left[u] = v;
            right[v] = u;
            return true;
        }
    }
    dist[u] = INF;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn size(m: &[Option<usize>]) -> usize {
        m.iter().flatten().count()
    }

    /// Maximum matching size by trying every injective assignment.
    fn brute(adj: &[Vec<usize>], n_right: usize) -> usize {
        fn go(u: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if u == adj.len() {
                return 0;
            }
            let mut best = go(u + 1, adj, used);
            for &v in &adj[u] {
                if !used[v] {
                    used[v] = true;
                    best = best.max(1 + go(u + 1, adj, used));
                    used[v] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    #[test]
    fn small_cases() {
        assert!(hopcroft_karp(&[], 3).is_empty());
        assert_eq!(hopcroft_karp(&[vec![]], 2), vec![None]);
        // the greedy choice 0-0 must be undone
        let m = hopcroft_karp(&[vec![0, 1], vec![0]], 2);
        assert_eq!(m, vec![Some(1), Some(0)]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            nl in 0usize..6,
            nr in 1usize..6,
            bits in prop::collection::vec(any::<bool>(), 36),
        ) {
            let adj: Vec<Vec<usize>> = (0..nl)
                .map(|u| (0..nr).filter(|&v| bits[u * 6 + v]).collect())
                .collect();
            let m = hopcroft_karp(&adj, nr);
            prop_assert_eq!(size(&m), brute(&adj, nr));
            let mut seen = vec![false; nr];
            for (u, v) in m.iter().enumerate() {
                if let Some(v) = *v {
                    prop_assert!(adj[u].contains(&v));
                    prop_assert!(!seen[v]);
                    seen[v] = true;
                }
            }
        }
    }
}
