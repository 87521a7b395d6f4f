//! The geodesic Radon transform on 1-cochains of a path graph.
//!
//! Oriented apartments of the ball are its oriented leaf-to-leaf geodesics.
//! At level `k` an apartment contributes the (k+1)-paths read off as
//! consecutive windows of its vertex sequence, in its orientation; the Radon
//! transform sums a 1-cochain over those windows.
//!
//! Truncation matters in two places. A leaf-to-leaf segment is finite, so
//! `R(df)` telescopes to `f(last window) - f(first window)` instead of zero;
//! it vanishes when `f` is zero on the k-paths touching the leaves. And
//! exactness (`ker R = im d`) is stated for cochains supported on an
//! *interior*: the edges whose tree vertices stay at least `margin` away
//! from every leaf.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use num::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cochain::{coboundary, Cochain, Level};
use crate::error::{Error, Result};
use crate::forest::SpanningForest;
use crate::linalg::{self, Echelon, SparseRow};
use crate::scalar::{int, Scalar};
use crate::tower::{build_path_graph, KPath, PathGraph};
use crate::tree::{BallAutomorphism, GeodesicSegment, TreeBall};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedApartment {
    /// Index of the underlying diameter in the list the set was built from.
    pub id: usize,
    pub base: GeodesicSegment,
    pub k: usize,
    /// Path-graph edges along the apartment, in orientation order.
    pub induced_edges: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ApartmentSet {
    k: usize,
    num_edges: usize,
    total: usize,
    apartments: Vec<OrientedApartment>,
    position: HashMap<usize, usize>,
    by_ends: HashMap<(usize, usize), usize>,
    through: Vec<Vec<usize>>,
}

pub fn induced_apartments(pg: &PathGraph, diameters: &[GeodesicSegment]) -> Result<ApartmentSet> {
    let ball = pg.ball();
    let k = pg.k();
    let mut apartments = Vec::new();
    let mut by_ends = HashMap::new();
    let mut through = vec![Vec::new(); pg.num_edges()];
    for (id, d) in diameters.iter().enumerate() {
        let path = KPath(d.0.clone());
        let valid = !d.is_empty() && path.is_valid_in(ball) && ball.is_leaf(d.first()) && ball.is_leaf(d.last());
        if !valid {
            return Err(Error::LevelMismatch {
                expected: format!("a leaf-to-leaf geodesic of ball (q={}, R={})", ball.q(), ball.radius()),
                found: format!("{:?}", d.0),
            });
        }
        by_ends.insert((d.first(), d.last()), id);
        if d.len() < k + 1 {
            continue;
        }
        let induced_edges: Vec<usize> = d
            .0
            .windows(k + 2)
            .map(|w| pg.edge_id(&KPath(w.to_vec())).expect("window of a geodesic is an edge"))
            .collect();
        for &a in &induced_edges {
            through[a].push(apartments.len());
        }
        apartments.push(OrientedApartment { id, base: d.clone(), k, induced_edges });
    }
    let position = apartments.iter().enumerate().map(|(i, ap)| (ap.id, i)).collect();
    Ok(ApartmentSet {
        k,
        num_edges: pg.num_edges(),
        total: diameters.len(),
        apartments,
        position,
        by_ends,
        through,
    })
}

impl ApartmentSet {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of diameters the set was built from, including those too short
    /// to carry an edge at this level.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.apartments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.apartments.is_empty()
    }

    pub fn apartments(&self) -> &[OrientedApartment] {
        &self.apartments
    }

    pub fn get(&self, id: usize) -> Option<&OrientedApartment> {
        self.position.get(&id).map(|&i| &self.apartments[i])
    }

    fn check_level(&self, pg: &PathGraph) -> Result<()> {
        if self.k != pg.k() || self.num_edges != pg.num_edges() {
            return Err(Error::LevelMismatch {
                expected: format!("apartments of level {}", pg.k()),
                found: format!("apartments of level {}", self.k),
            });
        }
        Ok(())
    }

    /// `Ã_a`: apartments whose induced edges contain `a`.
    pub fn apartments_through(&self, a: usize) -> Result<Vec<&OrientedApartment>> {
        if a >= self.num_edges {
            return Err(Error::UnknownId { kind: "path-graph edge", id: a });
        }
        Ok(self.through[a].iter().map(|&i| &self.apartments[i]).collect())
    }

    /// Id of the apartment `g·Ã`.
    pub fn map_apartment(&self, g: &BallAutomorphism, id: usize) -> Option<usize> {
        let ap = self.get(id)?;
        self.by_ends.get(&(g.apply(ap.base.first()), g.apply(ap.base.last()))).copied()
    }

    /// Id of the apartment running from leaf `from` to leaf `to`.
    pub fn id_by_ends(&self, from: usize, to: usize) -> Option<usize> {
        self.by_ends.get(&(from, to)).copied()
    }

    /// First and last k-path (path-graph vertex) of an apartment.
    pub fn end_vertices(&self, pg: &PathGraph, ap: &OrientedApartment) -> (usize, usize) {
        let first = *ap.induced_edges.first().expect("apartments carry an edge");
        let last = *ap.induced_edges.last().expect("apartments carry an edge");
        (pg.tail(first), pg.head(last))
    }

    /// Path-graph vertices that start or end some apartment.
    pub fn boundary_vertices(&self, pg: &PathGraph) -> BTreeSet<usize> {
        self.apartments
            .iter()
            .flat_map(|ap| {
                let (s, t) = self.end_vertices(pg, ap);
                [s, t]
            })
            .collect()
    }

    pub fn manifest(&self, ball: &TreeBall) -> Vec<ApartmentJson> {
        let _ = ball;
        self.apartments
            .iter()
            .map(|ap| ApartmentJson {
                id: ap.id,
                leaf_from: ap.base.first(),
                leaf_to: ap.base.last(),
                induced_edges: ap.induced_edges.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApartmentJson {
    pub id: usize,
    pub leaf_from: usize,
    pub leaf_to: usize,
    pub induced_edges: Vec<usize>,
}

/// Finitely supported function on apartment ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RadonImage {
    pub values: BTreeMap<usize, Scalar>,
}

impl RadonImage {
    pub fn get(&self, id: usize) -> Scalar {
        self.values.get(&id).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("apartment_id,numerator,denominator\n");
        for (id, v) in &self.values {
            let _ = writeln!(s, "{id},{},{}", v.numer(), v.denom());
        }
        s
    }
}

/// `R(ω)(Ã) = Σ_{a ∈ Ã} ω(a)`.
pub fn radon_transform(pg: &PathGraph, aps: &ApartmentSet, omega: &Cochain) -> Result<RadonImage> {
    aps.check_level(pg)?;
    if omega.level() != Level::Edge {
        return Err(Error::LevelMismatch { expected: Level::Edge.to_string(), found: omega.level().to_string() });
    }
    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (a, v) in omega.iter() {
        let hits = aps.apartments_through(a)?;
        for ap in hits {
            *acc.entry(ap.id).or_insert_with(Scalar::zero) += v;
        }
    }
    acc.retain(|_, v| !v.is_zero());
    Ok(RadonImage { values: acc })
}

/// Edges and vertices of the path graph that stay clear of the leaves.
#[derive(Debug, Clone)]
pub struct Interior {
    pub margin: usize,
    /// Edges all of whose tree vertices are at distance `>= margin` from
    /// every leaf.
    pub edges: Vec<usize>,
    /// Vertices every incident edge of which is interior. These are exactly
    /// the supports `f` for which `df` stays interior.
    pub vertices: Vec<usize>,
    is_edge: Vec<bool>,
    is_vertex: Vec<bool>,
}

impl Interior {
    pub fn new(pg: &PathGraph, margin: usize) -> Result<Self> {
        let ball = pg.ball();
        let limit = ball.radius().checked_sub(margin);
        let is_edge: Vec<bool> = (0..pg.num_edges())
            .map(|a| limit.is_some_and(|lim| pg.edge_path(a).max_depth(ball) <= lim))
            .collect();
        let edges: Vec<usize> = (0..pg.num_edges()).filter(|&a| is_edge[a]).collect();
        if edges.is_empty() {
            return Err(Error::EmptyInterior { margin, radius: ball.radius(), k: pg.k() });
        }
        let is_vertex: Vec<bool> = (0..pg.num_vertices())
            .map(|s| {
                let star = pg.star(s);
                !star.is_empty() && star.iter().all(|&(a, _)| is_edge[a])
            })
            .collect();
        let vertices = (0..pg.num_vertices()).filter(|&s| is_vertex[s]).collect();
        Ok(Self { margin, edges, vertices, is_edge, is_vertex })
    }

    pub fn contains_edge(&self, a: usize) -> bool {
        self.is_edge[a]
    }

    pub fn contains_vertex(&self, s: usize) -> bool {
        self.is_vertex[s]
    }

    pub fn supports(&self, omega: &Cochain) -> bool {
        omega.support().all(|a| self.is_edge.get(a).copied().unwrap_or(false))
    }
}

/// Exact basis of `{ ω supported on interior edges : R(ω) = 0 }`.
pub fn radon_kernel_interior(pg: &PathGraph, aps: &ApartmentSet, margin: usize) -> Result<Vec<Cochain>> {
    aps.check_level(pg)?;
    let interior = Interior::new(pg, margin)?;
    Ok(kernel_on(pg, aps, &interior))
}

fn kernel_on(pg: &PathGraph, aps: &ApartmentSet, interior: &Interior) -> Vec<Cochain> {
    let local: HashMap<usize, usize> = interior.edges.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let _ = pg;
    let rows = aps.apartments().iter().map(|ap| {
        linalg::sparse_row(
            ap.induced_edges
                .iter()
                .filter_map(|a| local.get(a).map(|&i| (i, Scalar::one()))),
        )
    });
    linalg::nullspace(rows, interior.edges.len())
        .into_iter()
        .map(|v| Cochain::from_pairs(Level::Edge, v.into_iter().map(|(i, x)| (interior.edges[i], x))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub q: usize,
    #[serde(rename = "R")]
    pub radius: usize,
    pub k: usize,
    pub margin: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub equal: bool,
}

/// Compares `ker R` on interior cochains with `d` of the 0-cochains
/// supported on interior vertices, as subspaces of `C¹`.
pub fn exactness_check(pg: &PathGraph, aps: &ApartmentSet, margin: usize) -> Result<ExactnessReport> {
    aps.check_level(pg)?;
    let interior = Interior::new(pg, margin)?;
    let kernel = kernel_on(pg, aps, &interior);
    let image_rows: Vec<SparseRow> = interior
        .vertices
        .iter()
        .map(|&s| coboundary(pg, &Cochain::indicator(Level::Vertex, s)).expect("valid vertex").to_row())
        .collect();
    let image_dim = linalg::rank(image_rows.clone());
    let mut joint = Echelon::new();
    for w in &kernel {
        joint.insert(w.to_row());
    }
    for r in image_rows {
        joint.insert(r);
    }
    let kernel_dim = kernel.len();
    let ball = pg.ball();
    Ok(ExactnessReport {
        q: ball.q(),
        radius: ball.radius(),
        k: pg.k(),
        margin,
        kernel_dim,
        image_dim,
        equal: joint.rank() == kernel_dim && kernel_dim == image_dim,
    })
}

/// Smallest margin at which the interior is nonempty and exactness holds.
pub fn minimal_exact_margin(pg: &PathGraph, aps: &ApartmentSet) -> Result<Option<usize>> {
    for margin in 0..=pg.ball().radius() {
        match exactness_check(pg, aps, margin) {
            Ok(r) if r.equal => return Ok(Some(margin)),
            Ok(_) => {}
            Err(Error::EmptyInterior { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// A walk `x_0, a_0, x_1, ..., a_{l-1}, x_l` in the path graph. The sign of a
/// step is `+1` exactly when the edge runs from `x_u` to `x_{u+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkWithSigns {
    vertices: Vec<usize>,
    edges: Vec<usize>,
    signs: Vec<i64>,
}

impl WalkWithSigns {
    pub fn new(pg: &PathGraph, vertices: Vec<usize>, edges: Vec<usize>) -> Result<Self> {
        if vertices.len() != edges.len() + 1 {
            return Err(Error::MalformedWalk(format!(
                "{} vertices for {} edges",
                vertices.len(),
                edges.len()
            )));
        }
        for &v in &vertices {
            pg.check_vertex(v)?;
        }
        let mut signs = Vec::with_capacity(edges.len());
        for (u, &a) in edges.iter().enumerate() {
            pg.check_edge(a)?;
            let (x, y) = (vertices[u], vertices[u + 1]);
            if pg.tail(a) == x && pg.head(a) == y {
                signs.push(1);
            } else if pg.head(a) == x && pg.tail(a) == y {
                signs.push(-1);
            } else {
                return Err(Error::MalformedWalk(format!("edge {a} does not join {x} and {y}")));
            }
        }
        Ok(Self { vertices, edges, signs })
    }

    /// Walk from `start` along `edges`, each step leaving through the far end.
    pub fn from_edges(pg: &PathGraph, start: usize, edges: Vec<usize>) -> Result<Self> {
        let mut vertices = vec![start];
        let mut x = start;
        for &a in &edges {
            pg.check_edge(a)?;
            x = if pg.tail(a) == x {
                pg.head(a)
            } else if pg.head(a) == x {
                pg.tail(a)
            } else {
                return Err(Error::MalformedWalk(format!("edge {a} does not touch {x}")));
            };
            vertices.push(x);
        }
        Self::new(pg, vertices, edges)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn signs(&self) -> &[i64] {
        &self.signs
    }

    pub fn is_loop(&self) -> bool {
        !self.edges.is_empty() && self.vertices.first() == self.vertices.last()
    }
}

/// `∫_p ω = Σ_u [p:a_u] ω(a_u)`.
pub fn path_integral(omega: &Cochain, p: &WalkWithSigns) -> Scalar {
    p.edges
        .iter()
        .zip(&p.signs)
        .map(|(&a, &s)| omega.get(a) * int(s))
        .fold(Scalar::zero(), |acc, x| acc + x)
}

/// One fundamental loop per allowed edge outside a spanning forest of the
/// allowed sub-graph.
pub fn fundamental_loops<F: Fn(usize) -> bool>(pg: &PathGraph, allowed: F) -> Vec<WalkWithSigns> {
    let forest = SpanningForest::grow(pg, allowed, std::iter::empty());
    forest
        .non_tree_edges()
        .map(|a| {
            let (route_v, route_e) = forest.route(pg.head(a), pg.tail(a)).expect("same tree");
            let mut vertices = vec![pg.tail(a)];
            vertices.extend(route_v);
            let mut edges = vec![a];
            edges.extend(route_e);
            WalkWithSigns::new(pg, vertices, edges).expect("fundamental loop is a walk")
        })
        .collect()
}

/// Random closed walk over allowed edges: `steps` random moves from `start`
/// followed by the forest route back. `None` if `start` has no allowed edge.
pub fn random_loop<R: Rng>(
    pg: &PathGraph,
    forest: &SpanningForest,
    start: usize,
    steps: usize,
    rng: &mut R,
) -> Option<WalkWithSigns> {
    let mut vertices = vec![start];
    let mut edges = Vec::new();
    let mut x = start;
    for _ in 0..steps {
        let options: Vec<usize> = pg.star(x).into_iter().map(|(a, _)| a).filter(|&a| forest.is_allowed(a)).collect();
        if options.is_empty() {
            break;
        }
        let a = options[rng.gen_range(0..options.len())];
        x = if pg.tail(a) == x { pg.head(a) } else { pg.tail(a) };
        vertices.push(x);
        edges.push(a);
    }
    if edges.is_empty() {
        return None;
    }
    let (back_v, back_e) = forest.route(x, start)?;
    vertices.extend(back_v.into_iter().skip(1));
    edges.extend(back_e);
    WalkWithSigns::new(pg, vertices, edges).ok()
}

/// The region where a primitive of `ω` may be supported: the k-paths whose
/// vertices meet the tree ball `X(t, δ)`, where `t` is a centre of the
/// union `S` of the edge paths in the support of `ω` and `δ` is the
/// eccentricity of `t` in `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportRegion {
    pub hull: BTreeSet<usize>,
    pub center: Option<usize>,
    pub delta: usize,
    pub vertices: BTreeSet<usize>,
}

pub fn support_region(pg: &PathGraph, omega: &Cochain) -> SupportRegion {
    let ball = pg.ball();
    let hull: BTreeSet<usize> = omega
        .support()
        .flat_map(|a| pg.edge_path(a).0.iter().copied())
        .collect();
    let Some((center, delta)) = hull
        .iter()
        .map(|&t| (t, hull.iter().map(|&s| ball.distance(t, s)).max().unwrap_or(0)))
        .min_by_key(|&(t, e)| (e, t))
    else {
        return SupportRegion { hull, center: None, delta: 0, vertices: BTreeSet::new() };
    };
    let disc = ball.sub_ball(center, delta);
    let vertices = (0..pg.num_vertices())
        .filter(|&s| pg.vertex_path(s).0.iter().any(|v| disc.contains(v)))
        .collect();
    SupportRegion { hull, center: Some(center), delta, vertices }
}

#[derive(Debug, Clone)]
pub struct Primitive {
    pub f: Cochain,
    pub region: SupportRegion,
    /// Base vertex per component that carries support, where `f = 0`.
    pub bases: Vec<usize>,
}

/// Integrates `ω` along a breadth-first spanning forest from a base vertex
/// outside the support region (`f(base) = 0`), then checks every non-tree
/// edge. A mismatch means `ω` has a nonzero loop integral, so it is not in
/// `ker R` on a region where exactness holds; the offending loop is returned.
///
/// `base` fixes the base of its own component; components without a given
/// base get the smallest vertex outside the region.
pub fn primitive(pg: &PathGraph, omega: &Cochain, base: Option<usize>) -> Result<Primitive> {
    if omega.level() != Level::Edge {
        return Err(Error::LevelMismatch { expected: Level::Edge.to_string(), found: omega.level().to_string() });
    }
    for a in omega.support() {
        pg.check_edge(a)?;
    }
    let region = support_region(pg, omega);
    if let Some(b) = base {
        pg.check_vertex(b)?;
        if region.vertices.contains(&b) {
            return Err(Error::BaseInsideSupport(b));
        }
    }
    let comps = pg.components();
    let mut supported = BTreeSet::new();
    for a in omega.support() {
        supported.insert(comps.of[pg.head(a)]);
    }
    let mut bases = Vec::new();
    if let Some(b) = base {
        bases.push(b);
    }
    let members = comps.members();
    for &c in &supported {
        if base.is_some_and(|b| comps.of[b] == c) {
            continue;
        }
        let b = members[c]
            .iter()
            .copied()
            .find(|s| !region.vertices.contains(s))
            .ok_or(Error::NoBaseVertex(c))?;
        bases.push(b);
    }

    let forest = SpanningForest::grow(pg, |_| true, bases.iter().copied());
    let mut f = vec![Scalar::zero(); pg.num_vertices()];
    for &w in forest.order() {
        if let Some((a, v)) = forest.parent(w) {
            f[w] = if pg.tail(a) == v { &f[v] + omega.get(a) } else { &f[v] - omega.get(a) };
        }
    }
    for a in forest.non_tree_edges() {
        let diff = &f[pg.head(a)] - &f[pg.tail(a)];
        if diff != omega.get(a) {
            let (route_v, route_e) = forest.route(pg.head(a), pg.tail(a)).expect("same tree");
            let mut loop_vertices = vec![pg.tail(a)];
            loop_vertices.extend(route_v);
            let mut loop_edges = vec![a];
            loop_edges.extend(route_e);
            let walk = WalkWithSigns::new(pg, loop_vertices.clone(), loop_edges.clone())?;
            let integral = path_integral(omega, &walk);
            return Err(Error::PathDependent {
                loop_vertices,
                loop_edges,
                integral: crate::scalar::to_fraction_string(&integral),
            });
        }
    }
    Ok(Primitive {
        f: Cochain::from_pairs(Level::Vertex, f.into_iter().enumerate()),
        region,
        bases,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanReport {
    pub max_k: usize,
    pub rank: usize,
    pub apartments: usize,
    pub spans: bool,
}

/// Rank of the characteristic functions `Char(Ã_a)` over all edges of all
/// given levels, as vectors indexed by apartment id `< total`.
pub fn characteristic_span_rank(sets: &[ApartmentSet], total: usize) -> usize {
    let mut e = Echelon::new();
    for aps in sets {
        for a in 0..aps.num_edges {
            if e.rank() == total {
                return total;
            }
            let row = linalg::sparse_row(aps.through[a].iter().map(|&i| (aps.apartments[i].id, Scalar::one())));
            if !row.is_empty() {
                e.insert(row);
            }
        }
    }
    e.rank()
}

/// Whether the `Char(Ã_a)` for edges `a` of every level `k <= max_k` span all
/// functions on the oriented diameters.
pub fn span_check(ball: &Arc<TreeBall>, max_k: usize) -> Result<SpanReport> {
    let diameters = ball.enumerate_oriented_diameters();
    let levels = max_k.min(2 * ball.radius());
    let mut sets = Vec::new();
    for k in 0..=levels {
        let pg = build_path_graph(Arc::clone(ball), k)?;
        sets.push(induced_apartments(&pg, &diameters)?);
    }
    let rank = characteristic_span_rank(&sets, diameters.len());
    Ok(SpanReport { max_k, rank, apartments: diameters.len(), spans: rank == diameters.len() })
}
