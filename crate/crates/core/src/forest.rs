//! Breadth-first spanning forests of a path graph (or of a sub-graph given by
//! an edge filter).

use std::collections::VecDeque;

use crate::tower::PathGraph;

#[derive(Debug, Clone)]
pub struct SpanningForest {
    /// `(edge, parent vertex)` for every reached non-root vertex.
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    root: Vec<Option<usize>>,
    order: Vec<usize>,
    tree_edge: Vec<bool>,
    allowed: Vec<bool>,
}

impl SpanningForest {
    /// Grows trees from `roots` first (in the given order), then from every
    /// remaining vertex touched by an allowed edge, smallest id first.
    pub fn grow<F, I>(pg: &PathGraph, allowed: F, roots: I) -> Self
    where
        F: Fn(usize) -> bool,
        I: IntoIterator<Item = usize>,
    {
        let nv = pg.num_vertices();
        let ne = pg.num_edges();
        let allowed: Vec<bool> = (0..ne).map(&allowed).collect();
        let mut touched = vec![false; nv];
        for a in (0..ne).filter(|&a| allowed[a]) {
            touched[pg.head(a)] = true;
            touched[pg.tail(a)] = true;
        }
        let mut forest = Self {
            parent: vec![None; nv],
            depth: vec![0; nv],
            root: vec![None; nv],
            order: Vec::new(),
            tree_edge: vec![false; ne],
            allowed,
        };
        let starts: Vec<usize> = roots.into_iter().chain((0..nv).filter(|&v| touched[v])).collect();
        for r in starts {
            if forest.root[r].is_some() {
                continue;
            }
            forest.root[r] = Some(r);
            forest.order.push(r);
            let mut queue = VecDeque::from([r]);
            while let Some(v) = queue.pop_front() {
                for (a, _) in pg.star(v) {
                    if !forest.allowed[a] {
                        continue;
                    }
                    let w = if pg.head(a) == v { pg.tail(a) } else { pg.head(a) };
                    if forest.root[w].is_none() {
                        forest.root[w] = Some(r);
                        forest.parent[w] = Some((a, v));
                        forest.depth[w] = forest.depth[v] + 1;
                        forest.tree_edge[a] = true;
                        forest.order.push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        forest
    }

    pub fn full(pg: &PathGraph) -> Self {
        Self::grow(pg, |_| true, std::iter::empty())
    }

    pub fn root_of(&self, v: usize) -> Option<usize> {
        self.root[v]
    }

    pub fn parent(&self, v: usize) -> Option<(usize, usize)> {
        self.parent[v]
    }

    /// Reached vertices in breadth-first order, tree by tree.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_tree_edge(&self, a: usize) -> bool {
        self.tree_edge[a]
    }

    pub fn is_allowed(&self, a: usize) -> bool {
        self.allowed[a]
    }

    /// Allowed edges outside the forest; each closes one fundamental loop.
    pub fn non_tree_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.allowed.len()).filter(|&a| self.allowed[a] && !self.tree_edge[a])
    }

    /// Tree route from `x` to `y` as `(vertices, edges)`; `None` when they are
    /// in different trees.
    pub fn route(&self, x: usize, y: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        if self.root[x].is_none() || self.root[x] != self.root[y] {
            return None;
        }
        let (mut u, mut v) = (x, y);
        let mut up_v = vec![x];
        let mut up_e = Vec::new();
        let mut down_v = vec![y];
        let mut down_e = Vec::new();
        while self.depth[u] > self.depth[v] {
            let (a, p) = self.parent[u].expect("non-root");
            up_e.push(a);
            up_v.push(p);
            u = p;
        }
        while self.depth[v] > self.depth[u] {
            let (a, p) = self.parent[v].expect("non-root");
            down_e.push(a);
            down_v.push(p);
            v = p;
        }
        while u != v {
            let (a, p) = self.parent[u].expect("non-root");
            up_e.push(a);
            up_v.push(p);
            u = p;
            let (b, r) = self.parent[v].expect("non-root");
            down_e.push(b);
            down_v.push(r);
            v = r;
        }
        down_v.pop();
        up_v.extend(down_v.into_iter().rev());
        up_e.extend(down_e.into_iter().rev());
        Some((up_v, up_e))
    }
}
