//! The directed graph of k-paths over a ball.
//!
//! Vertices are k-paths `(s_0, ..., s_k)` of the ball, edges are
//! (k+1)-paths `a = (t_0, ..., t_{k+1})` with head `(t_1, ..., t_{k+1})` and
//! tail `(t_0, ..., t_k)`. For `k = 0` this is the ball with every edge
//! doubled into two opposite arcs.
//!
//! Paths near the leaves have fewer continuations than in the infinite tree,
//! so connectivity is measured by [`PathGraph::components`] rather than
//! assumed.

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{BallAutomorphism, GeodesicSegment, TreeBall};

/// Injective sequence of adjacent tree vertices; a k-path has `k + 1` entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KPath(pub Vec<usize>);

impl KPath {
    pub fn level(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn head(&self) -> KPath {
        KPath(self.0[1..].to_vec())
    }

    pub fn tail(&self) -> KPath {
        KPath(self.0[..self.0.len() - 1].to_vec())
    }

    pub fn is_valid_in(&self, ball: &TreeBall) -> bool {
        let n = ball.num_vertices();
        if self.0.is_empty() || self.0.iter().any(|&v| v >= n) {
            return false;
        }
        let adjacent = self.0.windows(2).all(|w| ball.are_adjacent(w[0], w[1]));
        let mut sorted = self.0.clone();
        sorted.sort_unstable();
        sorted.dedup();
        adjacent && sorted.len() == self.0.len()
    }

    /// Image under a ball automorphism, entrywise.
    pub fn map(&self, g: &BallAutomorphism) -> KPath {
        KPath(self.0.iter().map(|&v| g.apply(v)).collect())
    }

    /// Deepest vertex; paths in a rooted tree are deepest at an endpoint.
    pub fn max_depth(&self, ball: &TreeBall) -> usize {
        self.0.iter().map(|&v| ball.depth(v)).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Incidence {
    Head,
    Tail,
    Unrelated,
}

impl Incidence {
    pub fn value(self) -> i64 {
        match self {
            Incidence::Head => 1,
            Incidence::Tail => -1,
            Incidence::Unrelated => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathGraph {
    ball: Arc<TreeBall>,
    k: usize,
    vertex_paths: Vec<KPath>,
    edge_paths: Vec<KPath>,
    vertex_index: HashMap<KPath, usize>,
    edge_index: HashMap<KPath, usize>,
    head: Vec<usize>,
    tail: Vec<usize>,
    with_head: Vec<Vec<usize>>,
    with_tail: Vec<Vec<usize>>,
}

/// Every injective path with `len` vertices, in lexicographic order of the
/// id sequence.
fn enumerate_paths(ball: &TreeBall, len: usize) -> Vec<KPath> {
    fn extend(ball: &TreeBall, len: usize, path: &mut Vec<usize>, out: &mut Vec<KPath>) {
        if path.len() == len {
            out.push(KPath(path.clone()));
            return;
        }
        let last = *path.last().expect("nonempty");
        for &w in ball.neighbors(last) {
            // a path in a tree is injective iff it never steps straight back
            if path.len() >= 2 && path[path.len() - 2] == w {
                continue;
            }
            path.push(w);
            extend(ball, len, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    for v in 0..ball.num_vertices() {
        let mut path = vec![v];
        extend(ball, len, &mut path, &mut out);
    }
    // neighbours are visited in sorted order, so this is already sorted
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    out
}

pub fn build_path_graph(ball: Arc<TreeBall>, k: usize) -> Result<PathGraph> {
    if k > 2 * ball.radius() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds twice the radius {}; there are no {k}-paths",
            ball.radius()
        )));
    }
    let vertex_paths = enumerate_paths(&ball, k + 1);
    let edge_paths = enumerate_paths(&ball, k + 2);
    let vertex_index: HashMap<KPath, usize> =
        vertex_paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let edge_index: HashMap<KPath, usize> =
        edge_paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();

    let mut head = Vec::with_capacity(edge_paths.len());
    let mut tail = Vec::with_capacity(edge_paths.len());
    let mut with_head = vec![Vec::new(); vertex_paths.len()];
    let mut with_tail = vec![Vec::new(); vertex_paths.len()];
    for (a, path) in edge_paths.iter().enumerate() {
        let h = vertex_index[&path.head()];
        let t = vertex_index[&path.tail()];
        head.push(h);
        tail.push(t);
        with_head[h].push(a);
        with_tail[t].push(a);
    }
    Ok(PathGraph {
        ball,
        k,
        vertex_paths,
        edge_paths,
        vertex_index,
        edge_index,
        head,
        tail,
        with_head,
        with_tail,
    })
}

/// Images of all path-graph vertices and edges under a ball automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMap {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl PathMap {
    pub fn is_identity(&self) -> bool {
        self.vertices.iter().enumerate().all(|(i, &j)| i == j)
            && self.edges.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PathMap) -> PathMap {
        PathMap {
            vertices: other.vertices.iter().map(|&v| self.vertices[v]).collect(),
            edges: other.edges.iter().map(|&a| self.edges[a]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component label per vertex, labels numbered by smallest member.
    pub of: Vec<usize>,
    pub count: usize,
}

impl Components {
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.of.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

impl PathGraph {
    pub fn ball(&self) -> &TreeBall {
        &self.ball
    }

    pub fn ball_arc(&self) -> &Arc<TreeBall> {
        &self.ball
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_paths.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_paths.len()
    }

    pub fn vertex_paths(&self) -> &[KPath] {
        &self.vertex_paths
    }

    pub fn edge_paths(&self) -> &[KPath] {
        &self.edge_paths
    }

    pub fn vertex_path(&self, s: usize) -> &KPath {
        &self.vertex_paths[s]
    }

    pub fn edge_path(&self, a: usize) -> &KPath {
        &self.edge_paths[a]
    }

    pub fn vertex_id(&self, path: &KPath) -> Option<usize> {
        self.vertex_index.get(path).copied()
    }

    pub fn edge_id(&self, path: &KPath) -> Option<usize> {
        self.edge_index.get(path).copied()
    }

    pub fn head(&self, a: usize) -> usize {
        self.head[a]
    }

    pub fn tail(&self, a: usize) -> usize {
        self.tail[a]
    }

    pub fn check_vertex(&self, s: usize) -> Result<()> {
        if s < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::UnknownId { kind: "path-graph vertex", id: s })
        }
    }

    pub fn check_edge(&self, a: usize) -> Result<()> {
        if a < self.num_edges() {
            Ok(())
        } else {
            Err(Error::UnknownId { kind: "path-graph edge", id: a })
        }
    }

    /// `[a : s]`.
    pub fn incidence(&self, a: usize, s: usize) -> Result<Incidence> {
        self.check_edge(a)?;
        self.check_vertex(s)?;
        Ok(if self.head[a] == s {
            Incidence::Head
        } else if self.tail[a] == s {
            Incidence::Tail
        } else {
            Incidence::Unrelated
        })
    }

    /// `A_s^+`: the edges whose head is `s`.
    pub fn edges_with_head(&self, s: usize) -> Result<&[usize]> {
        self.check_vertex(s)?;
        Ok(&self.with_head[s])
    }

    /// `A_s^-`: the edges whose tail is `s`.
    pub fn edges_with_tail(&self, s: usize) -> Result<&[usize]> {
        self.check_vertex(s)?;
        Ok(&self.with_tail[s])
    }

    /// Edges incident to `s` with their incidence numbers, in edge order.
    pub fn star(&self, s: usize) -> Vec<(usize, i64)> {
        let mut out: Vec<(usize, i64)> = self.with_head[s]
            .iter()
            .map(|&a| (a, 1))
            .chain(self.with_tail[s].iter().map(|&a| (a, -1)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn apply_automorphism(&self, g: &BallAutomorphism) -> Result<PathMap> {
        BallAutomorphism::from_image(&self.ball, g.image().to_vec())?;
        let vertices = self
            .vertex_paths
            .iter()
            .map(|p| self.vertex_index[&p.map(g)])
            .collect();
        let edges = self.edge_paths.iter().map(|p| self.edge_index[&p.map(g)]).collect();
        Ok(PathMap { vertices, edges })
    }

    /// Certifies that a walk with constant incidence signs is a geodesic of
    /// the tree, and returns it oriented along the edges.
    ///
    /// Consecutive edges must chain head-to-tail (every sign `+1`) or
    /// tail-to-head (every sign `-1`). For `k >= 1` such a walk is always a
    /// geodesic. For `k = 0` an arc followed by its reverse chains head to tail
    /// but steps back; that case is reported as [`Error::Backtracking`].
    pub fn monotone_path_check(&self, walk: &[usize]) -> Result<GeodesicSegment> {
        if walk.is_empty() {
            return Err(Error::MalformedWalk("empty walk".into()));
        }
        for &a in walk {
            self.check_edge(a)?;
        }
        let forward = walk.windows(2).all(|w| self.head[w[0]] == self.tail[w[1]]);
        let backward = walk.windows(2).all(|w| self.tail[w[0]] == self.head[w[1]]);
        let ordered: Vec<usize> = if forward {
            walk.to_vec()
        } else if backward {
            walk.iter().rev().copied().collect()
        } else {
            let shares = |x: usize, y: usize| {
                [self.head[x], self.tail[x]].iter().any(|v| *v == self.head[y] || *v == self.tail[y])
            };
            if let Some(u) = walk.windows(2).position(|w| !shares(w[0], w[1])) {
                return Err(Error::MalformedWalk(format!(
                    "edges {} and {} share no vertex",
                    walk[u],
                    walk[u + 1]
                )));
            }
            let fwd_break = walk.windows(2).position(|w| self.head[w[0]] != self.tail[w[1]]);
            let bwd_break = walk.windows(2).position(|w| self.tail[w[0]] != self.head[w[1]]);
            return Err(Error::SignsNotConstant(fwd_break.max(bwd_break).unwrap_or(0)));
        };
        let mut seq = self.edge_paths[ordered[0]].0.clone();
        for &a in &ordered[1..] {
            seq.push(*self.edge_paths[a].0.last().expect("nonempty"));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, &v) in seq.iter().enumerate() {
            if !seen.insert(v) {
                return Err(Error::Backtracking(i));
            }
        }
        debug_assert!(KPath(seq.clone()).is_valid_in(&self.ball));
        Ok(GeodesicSegment(seq))
    }

    /// Connected components of the underlying undirected graph.
    pub fn components(&self) -> Components {
        let n = self.num_vertices();
        let mut uf = UnionFind::<usize>::new(n);
        for a in 0..self.num_edges() {
            uf.union(self.head[a], self.tail[a]);
        }
        let mut label: HashMap<usize, usize> = HashMap::new();
        let mut of = Vec::with_capacity(n);
        for v in 0..n {
            let root = uf.find(v);
            let next = label.len();
            of.push(*label.entry(root).or_insert(next));
        }
        Components { of, count: label.len() }
    }

    pub fn to_json_value(&self) -> PathGraphJson {
        PathGraphJson {
            k: self.k,
            vertices: self.vertex_paths.iter().map(|p| p.0.clone()).collect(),
            edges: self
                .edge_paths
                .iter()
                .enumerate()
                .map(|(a, p)| EdgeJson { seq: p.0.clone(), head: self.head[a], tail: self.tail[a] })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn to_dot(&self) -> String {
        let label = |p: &KPath| p.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("digraph tower_k{} {{\n", self.k);
        for (i, p) in self.vertex_paths.iter().enumerate() {
            s.push_str(&format!("  {i} [label=\"({})\"];\n", label(p)));
        }
        for a in 0..self.num_edges() {
            s.push_str(&format!("  {} -> {};\n", self.tail[a], self.head[a]));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub seq: Vec<usize>,
    pub head: usize,
    pub tail: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathGraphJson {
    pub k: usize,
    pub vertices: Vec<Vec<usize>>,
    pub edges: Vec<EdgeJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_ball, swap_root_subtrees, TreeParams};

    fn pg(q: usize, r: usize, k: usize) -> PathGraph {
        let ball = Arc::new(build_ball(TreeParams::new(q, r).unwrap()).unwrap());
        build_path_graph(ball, k).unwrap()
    }

    #[test]
    fn radius_one_levels() {
        let g0 = pg(2, 1, 0);
        assert_eq!((g0.num_vertices(), g0.num_edges()), (4, 6));
        let g1 = pg(2, 1, 1);
        assert_eq!((g1.num_vertices(), g1.num_edges()), (6, 6));
        let g2 = pg(2, 1, 2);
        assert_eq!((g2.num_vertices(), g2.num_edges()), (6, 0));
    }

    #[test]
    fn k_too_large_is_rejected() {
        let ball = Arc::new(build_ball(TreeParams::new(2, 1).unwrap()).unwrap());
        assert!(build_path_graph(ball, 3).is_err());
    }

    #[test]
    fn incidence_values() {
        let g = pg(2, 2, 1);
        for a in 0..g.num_edges() {
            assert_eq!(g.incidence(a, g.head(a)).unwrap(), Incidence::Head);
            assert_eq!(g.incidence(a, g.tail(a)).unwrap(), Incidence::Tail);
            let other = (0..g.num_vertices()).find(|&s| s != g.head(a) && s != g.tail(a)).unwrap();
            assert_eq!(g.incidence(a, other).unwrap().value(), 0);
        }
        assert!(g.incidence(999, 0).is_err());
        assert!(g.incidence(0, 999).is_err());
    }

    #[test]
    fn head_and_tail_sets_at_level_zero() {
        let g = pg(2, 1, 0);
        assert_eq!(g.edges_with_head(0).unwrap().len(), 3);
        assert_eq!(g.edges_with_tail(0).unwrap().len(), 3);
        assert_eq!(g.edges_with_head(1).unwrap().len(), 1);
        assert_eq!(g.edges_with_tail(1).unwrap().len(), 1);
        assert!(g.edges_with_head(17).is_err());
    }

    #[test]
    fn walks_with_mixed_signs_are_rejected() {
        let g = pg(2, 2, 1);
        // an edge followed by one sharing only its tail
        let a = 0;
        let b = g
            .edges_with_tail(g.tail(a))
            .unwrap()
            .iter()
            .copied()
            .find(|&b| b != a)
            .unwrap();
        assert!(matches!(g.monotone_path_check(&[a, b]), Err(Error::SignsNotConstant(_))));
        assert!(g.monotone_path_check(&[]).is_err());
    }

    #[test]
    fn level_zero_backtracking_is_reported() {
        let g = pg(2, 1, 0);
        let a = g.edge_id(&KPath(vec![0, 1])).unwrap();
        let b = g.edge_id(&KPath(vec![1, 0])).unwrap();
        assert!(matches!(g.monotone_path_check(&[a, b]), Err(Error::Backtracking(2))));
    }

    #[test]
    fn single_edge_walk_is_its_path() {
        let g = pg(2, 2, 1);
        for a in 0..g.num_edges() {
            assert_eq!(g.monotone_path_check(&[a]).unwrap().0, g.edge_path(a).0);
        }
    }

    #[test]
    fn involution_on_path_graph() {
        let g = pg(2, 3, 1);
        let s = swap_root_subtrees(g.ball(), 0, 1).unwrap();
        let m = g.apply_automorphism(&s).unwrap();
        assert!(!m.is_identity());
        assert!(m.compose(&m).is_identity());
    }

    #[test]
    fn level_zero_is_connected() {
        assert_eq!(pg(2, 1, 0).components().count, 1);
    }
}
