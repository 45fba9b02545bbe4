//! Directed-graph view of a square matrix.
//!
//! Edge `j -> i` exists whenever the off-diagonal entry `a[i][j]` is
//! structurally nonzero. Irreducibility of the matrix is strong connectivity
//! of this graph.

use nalgebra::DMatrix;

/// Off-diagonal entries with magnitude below this are structural zeros.
pub const STRUCTURAL_ZERO: f64 = 1e-14;

#[inline]
pub(crate) fn is_edge(value: f64) -> bool {
    value.abs() >= STRUCTURAL_ZERO
}

/// Out-neighbour lists: `out[j]` holds every `i != j` with `a[i][j]` nonzero.
pub(crate) fn out_edges(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut out = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..n {
            if i != j && is_edge(a[(i, j)]) {
                out[j].push(i);
            }
        }
    }
    out
}

fn transpose(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut t = vec![Vec::new(); adj.len()];
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            t[v].push(u);
        }
    }
    t
}

fn reachable_count(adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count
}

/// Strong connectivity via forward and reverse reachability from node 0.
pub fn is_strongly_connected(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    if n <= 1 {
        return true;
    }
    let adj = out_edges(a);
    reachable_count(&adj, 0) == n && reachable_count(&transpose(&adj), 0) == n
}

/// Strongly connected components (Kosaraju). Indices inside a component are
/// sorted and components are ordered by their smallest index.
pub fn strongly_connected_components(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let adj = out_edges(a);
    let radj = transpose(&adj);

    // First pass: iterative DFS recording finish order.
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&v) = adj[u].get(*next) {
                *next += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }

    // Second pass on the transpose in reverse finish order.
    let mut comp = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// True when some edge joins two different components.
pub(crate) fn has_cross_edges(a: &DMatrix<f64>, components: &[Vec<usize>]) -> bool {
    let n = a.nrows();
    let mut comp = vec![0usize; n];
    for (id, members) in components.iter().enumerate() {
        for &i in members {
            comp[i] = id;
        }
    }
    (0..n).any(|i| (0..n).any(|j| i != j && comp[i] != comp[j] && is_edge(a[(i, j)])))
}
