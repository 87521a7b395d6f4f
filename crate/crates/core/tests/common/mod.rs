//! Reference computations written independently of the library algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use num::{One, Zero};
use pathtower::{build_ball, build_path_graph, PathGraph, Scalar, TreeBall, TreeParams};

pub fn ball(q: usize, r: usize) -> Arc<TreeBall> {
    Arc::new(build_ball(TreeParams::new(q, r).unwrap()).unwrap())
}

pub fn tower(q: usize, r: usize, k: usize) -> PathGraph {
    build_path_graph(ball(q, r), k).unwrap()
}

/// The grid of acceptance instances with a nonempty path graph.
pub fn grid() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for q in [2, 3] {
        for r in 1..=4 {
            for k in 0..=3 {
                if k <= 2 * r {
                    out.push((q, r, k));
                }
            }
        }
    }
    out
}

/// All-pairs distances by breadth-first search over the adjacency lists.
pub fn bfs_distances(ball: &TreeBall) -> Vec<Vec<usize>> {
    let n = ball.num_vertices();
    (0..n)
        .map(|s| {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in ball.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Weak components by breadth-first search on head/tail incidences.
pub fn bfs_components(pg: &PathGraph) -> (Vec<usize>, usize) {
    let n = pg.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for a in 0..pg.num_edges() {
        adj[pg.head(a)].push(pg.tail(a));
        adj[pg.tail(a)].push(pg.head(a));
    }
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = count;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = count;
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

pub type Row = BTreeMap<usize, Scalar>;

/// Gauss-Jordan elimination of an augmented system. Returns the rank of the
/// coefficient part and, when consistent, the solution with free variables
/// set to zero.
pub fn solve(rows: Vec<(Row, Scalar)>, ncols: usize) -> (usize, Option<Vec<Scalar>>) {
    let mut pivots: Vec<(usize, Row, Scalar)> = Vec::new();
    let mut consistent = true;
    for (mut row, mut rhs) in rows {
        for (col, prow, prhs) in &pivots {
            if let Some(c) = row.get(col).cloned() {
                for (j, v) in prow {
                    let e = row.entry(*j).or_insert_with(Scalar::zero);
                    *e -= &c * v;
                }
                rhs -= &c * prhs;
                row.retain(|_, v| !v.is_zero());
            }
        }
        match row.iter().next().map(|(c, v)| (*c, v.clone())) {
            None => {
                if !rhs.is_zero() {
                    consistent = false;
                }
            }
            Some((col, lead)) => {
                let inv = Scalar::one() / lead;
                for v in row.values_mut() {
                    *v *= &inv;
                }
                rhs *= &inv;
                // keep earlier pivots reduced against the new one
                for (_, prow, prhs) in &mut pivots {
                    if let Some(c) = prow.get(&col).cloned() {
                        for (j, v) in &row {
                            let e = prow.entry(*j).or_insert_with(Scalar::zero);
                            *e -= &c * v;
                        }
                        *prhs -= &c * &rhs;
                        prow.retain(|_, v| !v.is_zero());
                    }
                }
                pivots.push((col, row, rhs));
            }
        }
    }
    let rank = pivots.len();
    if !consistent {
        return (rank, None);
    }
    let mut x = vec![Scalar::zero(); ncols];
    for (col, _, rhs) in pivots {
        if col < ncols {
            x[col] = rhs;
        }
    }
    (rank, Some(x))
}

pub fn rank(rows: Vec<Row>) -> usize {
    solve(rows.into_iter().map(|r| (r, Scalar::zero())).collect(), 0).0
}

pub fn row_of(entries: &[(usize, i64)]) -> Row {
    let mut r = Row::new();
    for &(c, v) in entries {
        *r.entry(c).or_insert_with(Scalar::zero) += Scalar::from_integer(v.into());
    }
    r.retain(|_, v| !v.is_zero());
    r
}
