//! Finite balls in the (q+1)-homogeneous tree.
//!
//! A ball of radius `R` around a root is built breadth-first. The root has
//! `q + 1` children labelled `0..=q`; every other non-leaf vertex has `q`
//! children labelled `0..q`. Vertex ids are assigned in breadth-first order
//! with children in label order, so the numbering depends on `(q, R)` only.
//!
//! The vertices at depth `R` are the *leaves* of the ball. They are an
//! artifact of truncation: every vertex of the infinite tree has degree
//! `q + 1`. Downstream code uses the leaves as the stand-in for the ends of
//! the tree (oriented diameters play the role of apartments) and measures
//! distance-to-leaves as an interior margin.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on ball size, keeps accidental huge parameters from allocating.
pub const MAX_BALL_VERTICES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeParams {
    pub q: usize,
    pub radius: usize,
}

impl TreeParams {
    pub fn new(q: usize, radius: usize) -> Result<Self> {
        let p = Self { q, radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidParameter(format!("q must be >= 2, got {}", self.q)));
        }
        if self.radius < 1 {
            return Err(Error::InvalidParameter(format!(
                "radius must be >= 1, got {}",
                self.radius
            )));
        }
        match self.expected_vertex_count() {
            Some(n) if n <= MAX_BALL_VERTICES => Ok(()),
            _ => Err(Error::InvalidParameter(format!(
                "ball (q={}, radius={}) exceeds {} vertices",
                self.q, self.radius, MAX_BALL_VERTICES
            ))),
        }
    }

    /// `1 + (q+1)(q^R - 1)/(q - 1)`, or `None` on overflow.
    pub fn expected_vertex_count(&self) -> Option<usize> {
        let qr = self.q.checked_pow(u32::try_from(self.radius).ok()?)?;
        let geometric = (qr - 1) / (self.q - 1);
        (self.q + 1).checked_mul(geometric)?.checked_add(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeVertex {
    pub id: usize,
    pub address: Vec<usize>,
}

impl TreeVertex {
    pub fn depth(&self) -> usize {
        self.address.len()
    }
}

#[derive(Debug, Clone)]
pub struct TreeBall {
    params: TreeParams,
    vertices: Vec<TreeVertex>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    leaves: Vec<usize>,
    by_address: HashMap<Vec<usize>, usize>,
}

/// Injective sequence of pairwise adjacent tree vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeodesicSegment(pub Vec<usize>);

impl GeodesicSegment {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Number of tree edges.
    pub fn len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.0.clone();
        v.reverse();
        Self(v)
    }

    /// Whether `path` occurs as a contiguous window, read in this orientation.
    pub fn contains_window(&self, path: &[usize]) -> bool {
        !path.is_empty() && self.0.windows(path.len()).any(|w| w == path)
    }
}

pub fn build_ball(params: TreeParams) -> Result<TreeBall> {
    params.validate()?;
    let n = params.expected_vertex_count().expect("validated");
    let mut vertices = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    let mut children: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));

    vertices.push(TreeVertex { id: 0, address: Vec::new() });
    parent.push(None);
    children.push(Vec::new());

    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let depth = vertices[v].depth();
        if depth == params.radius {
            continue;
        }
        let branching = if depth == 0 { params.q + 1 } else { params.q };
        for label in 0..branching {
            let id = vertices.len();
            let mut address = vertices[v].address.clone();
            address.push(label);
            vertices.push(TreeVertex { id, address });
            parent.push(Some(v));
            children.push(Vec::new());
            children[v].push(id);
            edges.push((v, id));
            queue.push_back(id);
        }
    }

    let mut neighbors: Vec<Vec<usize>> = children.clone();
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            neighbors[v].push(*p);
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    let leaves = vertices
        .iter()
        .filter(|v| v.depth() == params.radius)
        .map(|v| v.id)
        .collect();
    let by_address = vertices.iter().map(|v| (v.address.clone(), v.id)).collect();

    Ok(TreeBall { params, vertices, parent, children, neighbors, edges, leaves, by_address })
}

impl TreeBall {
    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn q(&self) -> usize {
        self.params.q
    }

    pub fn radius(&self) -> usize {
        self.params.radius
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[TreeVertex] {
        &self.vertices
    }

    /// Undirected edges as `(parent, child)`, ordered by child id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.depth(v) == self.params.radius
    }

    pub fn depth(&self, v: usize) -> usize {
        self.vertices[v].depth()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        self.parent[u] == Some(v) || self.parent[v] == Some(u)
    }

    pub fn id_of(&self, address: &[usize]) -> Option<usize> {
        self.by_address.get(address).copied()
    }

    pub fn check_id(&self, v: usize) -> Result<()> {
        if v < self.vertices.len() {
            Ok(())
        } else {
            Err(Error::UnknownId { kind: "tree vertex", id: v })
        }
    }

    /// Distance from `v` to the nearest leaf.
    pub fn leaf_margin(&self, v: usize) -> usize {
        self.params.radius - self.depth(v)
    }

    /// Deepest common ancestor.
    pub fn meet(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth(u) > self.depth(v) {
            u = self.parent[u].expect("non-root");
        }
        while self.depth(v) > self.depth(u) {
            v = self.parent[v].expect("non-root");
        }
        while u != v {
            u = self.parent[u].expect("non-root");
            v = self.parent[v].expect("non-root");
        }
        u
    }

    pub fn distance(&self, u: usize, v: usize) -> usize {
        let m = self.meet(u, v);
        self.depth(u) + self.depth(v) - 2 * self.depth(m)
    }

    pub fn geodesic_between(&self, u: usize, v: usize) -> Result<GeodesicSegment> {
        self.check_id(u)?;
        self.check_id(v)?;
        let m = self.meet(u, v);
        let mut up = vec![u];
        let mut x = u;
        while x != m {
            x = self.parent[x].expect("non-root");
            up.push(x);
        }
        let mut down = Vec::new();
        let mut y = v;
        while y != m {
            down.push(y);
            y = self.parent[y].expect("non-root");
        }
        down.reverse();
        up.extend(down);
        Ok(GeodesicSegment(up))
    }

    /// All oriented leaf-to-leaf geodesics, ordered by `(from, to)`.
    pub fn enumerate_oriented_diameters(&self) -> Vec<GeodesicSegment> {
        let mut out = Vec::with_capacity(self.leaves.len() * (self.leaves.len() - 1));
        for &a in &self.leaves {
            for &b in &self.leaves {
                if a != b {
                    out.push(self.geodesic_between(a, b).expect("leaves are valid"));
                }
            }
        }
        out
    }

    /// Smallest subtree containing `set`.
    pub fn convex_hull(&self, set: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
        let Some(&first) = set.iter().next() else {
            return Err(Error::Empty("convex hull of an empty set"));
        };
        let mut hull = BTreeSet::new();
        for &v in set {
            hull.extend(self.geodesic_between(first, v)?.0);
        }
        Ok(hull)
    }

    /// All vertices within distance `delta` of `center`.
    pub fn sub_ball(&self, center: usize, delta: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([center]);
        let mut frontier = vec![center];
        for _ in 0..delta {
            let mut next = Vec::new();
            for v in frontier {
                for &w in self.neighbors(v) {
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        seen
    }

    pub fn to_json_value(&self) -> BallJson {
        BallJson {
            q: self.params.q,
            radius: self.params.radius,
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            leaves: self.leaves.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn to_dot(&self) -> String {
        let mut s = format!("graph ball_q{}_r{} {{\n", self.params.q, self.params.radius);
        for v in &self.vertices {
            let shape = if v.depth() == self.params.radius { "box" } else { "ellipse" };
            s.push_str(&format!("  {} [label=\"{}\", shape={}];\n", v.id, address_label(&v.address), shape));
        }
        for &(u, v) in &self.edges {
            s.push_str(&format!("  {u} -- {v};\n"));
        }
        s.push_str("}\n");
        s
    }
}

fn address_label(address: &[usize]) -> String {
    if address.is_empty() {
        return "root".to_string();
    }
    address.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(".")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallJson {
    pub q: usize,
    pub radius: usize,
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<[usize; 2]>,
    pub leaves: Vec<usize>,
}

/// A graph automorphism of a ball, stored as the image of every vertex id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallAutomorphism {
    image: Vec<usize>,
}

impl BallAutomorphism {
    pub fn identity(ball: &TreeBall) -> Self {
        Self { image: (0..ball.num_vertices()).collect() }
    }

    /// Checks that `image` is a permutation mapping the edge set onto itself.
    pub fn from_image(ball: &TreeBall, image: Vec<usize>) -> Result<Self> {
        let n = ball.num_vertices();
        if image.len() != n {
            return Err(Error::NotAutomorphism(format!(
                "permutation has {} entries, ball has {n} vertices",
                image.len()
            )));
        }
        let mut seen = vec![false; n];
        for &w in &image {
            if w >= n || std::mem::replace(&mut seen[w], true) {
                return Err(Error::NotAutomorphism("not a permutation".into()));
            }
        }
        for &(u, v) in ball.edges() {
            if !ball.are_adjacent(image[u], image[v]) {
                return Err(Error::NotAutomorphism(format!("edge {{{u},{v}}} is not preserved")));
            }
        }
        Ok(Self { image })
    }

    /// Subtree transplant from the root: the children of `v` are sent to the
    /// children of `g(v)` according to `perm(v)`, a permutation of child
    /// positions. The result is always an automorphism fixing the root.
    pub fn from_child_permutations<F>(ball: &TreeBall, mut perm: F) -> Self
    where
        F: FnMut(usize) -> Vec<usize>,
    {
        let mut image = vec![usize::MAX; ball.num_vertices()];
        image[0] = 0;
        // breadth-first ids guarantee parents are handled first
        for v in 0..ball.num_vertices() {
            let kids = ball.children(v);
            if kids.is_empty() {
                continue;
            }
            let p = perm(v);
            assert_eq!(p.len(), kids.len(), "child permutation has wrong length");
            let target_kids = ball.children(image[v]);
            for (i, &c) in kids.iter().enumerate() {
                image[c] = target_kids[p[i]];
            }
        }
        Self { image }
    }

    pub fn apply(&self, v: usize) -> usize {
        self.image[v]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { image: other.image.iter().map(|&v| self.image[v]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (v, &w) in self.image.iter().enumerate() {
            inv[w] = v;
        }
        Self { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(v, &w)| v == w)
    }
}

/// Seeded random automorphism obtained by shuffling child subtrees at every
/// vertex. Deterministic given `(ball, seed)`.
pub fn random_automorphism(ball: &TreeBall, seed: u64) -> BallAutomorphism {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BallAutomorphism::from_child_permutations(ball, |v| {
        let mut p: Vec<usize> = (0..ball.children(v).len()).collect();
        p.shuffle(&mut rng);
        p
    })
}

/// The involution exchanging the subtrees below root children `i` and `j`.
pub fn swap_root_subtrees(ball: &TreeBall, i: usize, j: usize) -> Result<BallAutomorphism> {
    let n = ball.children(0).len();
    if i >= n || j >= n {
        return Err(Error::InvalidParameter(format!("root has {n} children")));
    }
    Ok(BallAutomorphism::from_child_permutations(ball, |v| {
        let mut p: Vec<usize> = (0..ball.children(v).len()).collect();
        if v == 0 {
            p.swap(i, j);
        }
        p
    }))
}
