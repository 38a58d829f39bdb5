//! Fill-reducing symmetric ordering by nested dissection with level-structure
//! separators.

use super::csr::SparseMatrix;

const LEAF_SIZE: usize = 96;

/// Undirected graph of the pattern of `A + A^T` without self loops.
pub struct Graph {
    xadj: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    pub fn from_matrix(a: &SparseMatrix) -> Self {
        let n = a.n_rows();
        let at = a.transpose();
        let mut mark = vec![usize::MAX; n];
        let mut lists: Vec<usize> = Vec::with_capacity(2 * a.nnz());
        let mut xadj = vec![0usize];
        for i in 0..n {
            mark[i] = i;
            for (j, _) in a.row(i).chain(at.row(i)) {
                if mark[j] != i {
                    mark[j] = i;
                    lists.push(j);
                }
            }
            xadj.push(lists.len());
        }
        Self { xadj, adj: lists }
    }

    pub fn n(&self) -> usize {
        self.xadj.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.xadj[v]..self.xadj[v + 1]]
    }

    fn degree(&self, v: usize) -> usize {
        self.xadj[v + 1] - self.xadj[v]
    }
}

/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(a: &SparseMatrix) -> Vec<usize> {
    let g = Graph::from_matrix(a);
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    // Isolated vertices (pinned rows) cause no fill; emit them first.
    let mut rest = Vec::new();
    for v in 0..n {
        if g.degree(v) == 0 {
            order.push(v);
        } else {
            rest.push(v);
        }
    }

    enum Task {
        Dissect(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut label = vec![usize::MAX; n];
    let mut next_label = 0usize;
    let mut level = vec![usize::MAX; n];
    let mut stack = vec![Task::Dissect(rest)];
    while let Some(task) = stack.pop() {
        let nodes = match task {
            Task::Emit(s) => {
                order.extend(s);
                continue;
            }
            Task::Dissect(s) => s,
        };
        if nodes.len() <= LEAF_SIZE {
            order.extend(nodes);
            continue;
        }
        let id = next_label;
        next_label += 1;
        for &v in &nodes {
            label[v] = id;
        }

        let start = pseudo_peripheral(&g, &nodes, &label, id, &mut level);
        let levels = bfs_levels(&g, start, &label, id, &mut level);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < nodes.len() {
            for comp in components(&g, &nodes, &label, id, &mut level) {
                stack.push(Task::Dissect(comp));
            }
            continue;
        }
        if levels.len() < 3 {
            order.extend(nodes);
            continue;
        }

        let total = nodes.len() as f64;
        let mut best: Option<(usize, usize)> = None;
        let mut before = 0usize;
        for (m, lv) in levels.iter().enumerate().take(levels.len() - 1).skip(1) {
            let lo = before as f64 / total;
            let hi = (before + lv.len()) as f64 / total;
            if lo <= 0.65 && hi >= 0.35 && best.is_none_or(|(_, w)| lv.len() < w) {
                best = Some((m, lv.len()));
            }
            before += lv.len();
        }
        let m = best.map_or(levels.len() / 2, |(m, _)| m);

        // Keep only separator nodes that actually touch the far side.
        for (d, lv) in levels.iter().enumerate() {
            for &v in lv {
                level[v] = d;
            }
        }
        let mut part_a: Vec<usize> = levels[..m].iter().flatten().copied().collect();
        let part_b: Vec<usize> = levels[m + 1..].iter().flatten().copied().collect();
        let mut sep = Vec::new();
        for &v in &levels[m] {
            if g.neighbors(v).iter().any(|&u| label[u] == id && level[u] == m + 1) {
                sep.push(v);
            } else {
                part_a.push(v);
            }
        }
        stack.push(Task::Emit(sep));
        stack.push(Task::Dissect(part_b));
        stack.push(Task::Dissect(part_a));
    }
    debug_assert_eq!(order.len(), n);
    order
}

fn bfs_levels(g: &Graph, start: usize, label: &[usize], id: usize, seen: &mut [usize]) -> Vec<Vec<usize>> {
    let stamp = usize::MAX - 1 - id;
    let mut levels = vec![vec![start]];
    seen[start] = stamp;
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &u in g.neighbors(v) {
                if label[u] == id && seen[u] != stamp {
                    seen[u] = stamp;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    // Clear the stamp so later BFS passes over the same set start fresh.
    for lv in &levels {
        for &v in lv {
            seen[v] = usize::MAX;
        }
    }
    levels
}

fn pseudo_peripheral(g: &Graph, nodes: &[usize], label: &[usize], id: usize, seen: &mut [usize]) -> usize {
    let mut start = *nodes.iter().min_by_key(|&&v| (g.degree(v), v)).unwrap();
    let mut ecc = 0;
    for _ in 0..4 {
        let levels = bfs_levels(g, start, label, id, seen);
        if levels.len() <= ecc {
            break;
        }
        ecc = levels.len();
        start = *levels.last().unwrap().iter().min_by_key(|&&v| (g.degree(v), v)).unwrap();
    }
    start
}

fn components(g: &Graph, nodes: &[usize], label: &[usize], id: usize, seen: &mut [usize]) -> Vec<Vec<usize>> {
    let stamp = usize::MAX - 1 - id;
    let mut out = Vec::new();
    for &s in nodes {
        if seen[s] == stamp {
            continue;
        }
        seen[s] = stamp;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &u in g.neighbors(v) {
                if label[u] == id && seen[u] != stamp {
                    seen[u] = stamp;
                    comp.push(u);
                }
            }
        }
        out.push(comp);
    }
    for &v in nodes {
        seen[v] = usize::MAX;
    }
    out
}

pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::csr::TripletBuilder;

    fn grid_laplacian(m: usize) -> SparseMatrix {
        let n = m * m;
        let mut t = TripletBuilder::new(n, n);
        for i in 0..m {
            for j in 0..m {
                let v = i * m + j;
                t.push(v, v, 4.0);
                if i + 1 < m {
                    t.push(v, v + m, -1.0);
                    t.push(v + m, v, -1.0);
                }
                if j + 1 < m {
                    t.push(v, v + 1, -1.0);
                    t.push(v + 1, v, -1.0);
                }
            }
        }
        t.build()
    }

    #[test]
    fn ordering_is_a_permutation() {
        for m in [1, 5, 40] {
            let a = grid_laplacian(m);
            let mut p = nested_dissection(&a);
            p.sort_unstable();
            assert_eq!(p, (0..m * m).collect::<Vec<_>>());
        }
    }

    #[test]
    fn ordering_is_deterministic() {
        let a = grid_laplacian(30);
        assert_eq!(nested_dissection(&a), nested_dissection(&a));
    }

    #[test]
    fn disconnected_graph() {
        let mut t = TripletBuilder::new(300, 300);
        for i in 0..300 {
            t.push(i, i, 1.0);
            if i % 150 != 149 {
                t.push(i, i + 1, 1.0);
            }
        }
        let mut p = nested_dissection(&t.build());
        p.sort_unstable();
        assert_eq!(p, (0..300).collect::<Vec<_>>());
    }
}
