//! Finitely supported cochains on a path graph, the coboundary `d`, its
//! adjoint `d*` and harmonic forms.
//!
//! All coefficients are exact rationals. The operators have integer
//! matrices, so kernels, ranks and intersections are computed without any
//! tolerance. On a finite graph every cochain has finite support, so there is
//! no separate notion of smooth or compactly supported forms here.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::forest::SpanningForest;
use crate::linalg::{self, Echelon, SparseRow};
use crate::scalar::{from_parts, int, Scalar};
use crate::tower::{PathGraph, PathMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    /// 0-cochains, indexed by path-graph vertices.
    Vertex,
    /// 1-cochains, indexed by path-graph edges.
    Edge,
}

impl Level {
    pub fn csv_kind(self) -> &'static str {
        match self {
            Level::Vertex => "V",
            Level::Edge => "E",
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Level::Vertex => "0-cochain",
            Level::Edge => "1-cochain",
        })
    }
}

/// Sparse cochain. Zero values are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    level: Level,
    values: BTreeMap<usize, Scalar>,
}

impl Cochain {
    pub fn zero(level: Level) -> Self {
        Self { level, values: BTreeMap::new() }
    }

    pub fn indicator(level: Level, id: usize) -> Self {
        let mut c = Self::zero(level);
        c.set(id, Scalar::one());
        c
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Scalar)>>(level: Level, pairs: I) -> Self {
        let mut c = Self::zero(level);
        for (id, v) in pairs {
            c.add_at(id, &v);
        }
        c
    }

    pub fn from_row(level: Level, row: &SparseRow) -> Self {
        Self::from_pairs(level, row.iter().cloned())
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn get(&self, id: usize) -> Scalar {
        self.values.get(&id).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, id: usize, value: Scalar) {
        if value.is_zero() {
            self.values.remove(&id);
        } else {
            self.values.insert(id, value);
        }
    }

    pub fn add_at(&mut self, id: usize, value: &Scalar) {
        let v = self.get(id) + value;
        self.set(id, v);
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_row(&self) -> SparseRow {
        self.values.iter().map(|(k, v)| (*k, v.clone())).collect()
    }

    pub fn scaled(&self, c: &Scalar) -> Self {
        Self::from_pairs(self.level, self.values.iter().map(|(k, v)| (*k, v * c)))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        same_level(self, other)?;
        let mut out = self.clone();
        for (k, v) in &other.values {
            out.add_at(*k, v);
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scaled(&-Scalar::one()))
    }

    /// `(g·f)(g x) = f(x)`.
    pub fn push_forward(&self, map: &PathMap) -> Self {
        let ids = match self.level {
            Level::Vertex => &map.vertices,
            Level::Edge => &map.edges,
        };
        Self::from_pairs(self.level, self.values.iter().map(|(k, v)| (ids[*k], v.clone())))
    }

    fn check_support(&self, pg: &PathGraph, expected: Level) -> Result<()> {
        if self.level != expected {
            return Err(Error::LevelMismatch {
                expected: expected.to_string(),
                found: self.level.to_string(),
            });
        }
        let bound = match expected {
            Level::Vertex => pg.num_vertices(),
            Level::Edge => pg.num_edges(),
        };
        match self.values.keys().next_back() {
            Some(&id) if id >= bound => Err(Error::UnknownId {
                kind: match expected {
                    Level::Vertex => "path-graph vertex",
                    Level::Edge => "path-graph edge",
                },
                id,
            }),
            _ => Ok(()),
        }
    }

    /// One line per nonzero value, after a header line:
    /// `kind,id,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,id,numerator,denominator\n");
        for (k, v) in &self.values {
            let _ = writeln!(s, "{},{},{},{}", self.level.csv_kind(), k, v.numer(), v.denom());
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut level = None;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("kind")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [kind, id, num, den] = fields[..] else {
                return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 1)));
            };
            let l = match kind {
                "V" => Level::Vertex,
                "E" => Level::Edge,
                other => return Err(Error::Parse(format!("line {}: unknown kind {other:?}", lineno + 1))),
            };
            if *level.get_or_insert(l) != l {
                return Err(Error::Parse("mixed cochain kinds".into()));
            }
            let id: usize = id.parse().map_err(|_| Error::Parse(format!("line {}: bad id", lineno + 1)))?;
            pairs.push((id, from_parts(num, den)?));
        }
        let level = level.ok_or(Error::Parse("no rows; cannot infer the cochain kind".into()))?;
        Ok(Self::from_pairs(level, pairs))
    }
}

fn same_level(x: &Cochain, y: &Cochain) -> Result<()> {
    if x.level == y.level {
        Ok(())
    } else {
        Err(Error::LevelMismatch { expected: x.level.to_string(), found: y.level.to_string() })
    }
}

/// `(df)(a) = f(head a) - f(tail a)`.
pub fn coboundary(pg: &PathGraph, f: &Cochain) -> Result<Cochain> {
    f.check_support(pg, Level::Vertex)?;
    let mut out = Cochain::zero(Level::Edge);
    for (s, v) in f.iter() {
        for (a, sign) in pg.star(s) {
            out.add_at(a, &(v * int(sign)));
        }
    }
    Ok(out)
}

/// `(d*ω)(s) = Σ_a [a:s] ω(a)`.
pub fn adjoint(pg: &PathGraph, omega: &Cochain) -> Result<Cochain> {
    omega.check_support(pg, Level::Edge)?;
    let mut out = Cochain::zero(Level::Vertex);
    for (a, v) in omega.iter() {
        out.add_at(pg.head(a), v);
        out.add_at(pg.tail(a), &-v);
    }
    Ok(out)
}

pub fn pairing(x: &Cochain, y: &Cochain) -> Result<Scalar> {
    same_level(x, y)?;
    Ok(linalg::dot(&x.to_row(), &y.to_row()))
}

pub fn l2_norm_squared(omega: &Cochain) -> Scalar {
    omega.iter().map(|(_, v)| v * v).fold(Scalar::zero(), |acc, x| acc + x)
}

/// Basis of `ker d*`.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub vectors: Vec<Cochain>,
}

impl HarmonicBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Exact basis of the harmonic forms: one fundamental cycle per edge outside
/// a breadth-first spanning forest, with coefficient `+1` on that edge and
/// `±1` along the tree route closing it. The closing edge appears in no other
/// basis vector, which makes the family independent; every cycle is a
/// circulation, so `d*` kills it.
pub fn harmonic_space(pg: &PathGraph) -> HarmonicBasis {
    let forest = SpanningForest::full(pg);
    let vectors = forest
        .non_tree_edges()
        .map(|a| fundamental_cycle(pg, &forest, a))
        .collect();
    HarmonicBasis { vectors }
}

fn fundamental_cycle(pg: &PathGraph, forest: &SpanningForest, a: usize) -> Cochain {
    let (verts, edges) = forest.route(pg.head(a), pg.tail(a)).expect("endpoints share a tree");
    let mut c = Cochain::indicator(Level::Edge, a);
    for (i, &e) in edges.iter().enumerate() {
        let sign = if pg.tail(e) == verts[i] { 1 } else { -1 };
        c.add_at(e, &int(sign));
    }
    c
}

/// Incidence rows of `d` (one per edge, `+1` at the head and `-1` at the
/// tail), over path-graph vertex columns.
fn coboundary_rows(pg: &PathGraph) -> impl Iterator<Item = SparseRow> + '_ {
    (0..pg.num_edges()).map(move |a| {
        linalg::sparse_row([(pg.head(a), int(1)), (pg.tail(a), int(-1))])
    })
}

pub fn coboundary_rank(pg: &PathGraph) -> usize {
    linalg::rank(coboundary_rows(pg))
}

/// `dim C¹ - rank d`.
pub fn h1c_dimension(pg: &PathGraph) -> usize {
    pg.num_edges() - coboundary_rank(pg)
}

/// `dim(ker d* ∩ im d)`, computed as `dim H + rank d - rank[H ; im d]`.
pub fn intersect_harmonic_exact(pg: &PathGraph) -> usize {
    let h = harmonic_space(pg);
    let mut stacked = Echelon::new();
    let mut image_rank = 0;
    for s in 0..pg.num_vertices() {
        let row: SparseRow = pg.star(s).into_iter().map(|(a, sign)| (a, int(sign))).collect();
        if stacked.insert(row) {
            image_rank += 1;
        }
    }
    for w in &h.vectors {
        stacked.insert(w.to_row());
    }
    h.dim() + image_rank - stacked.rank()
}

/// Random cochain with at most `max_support` nonzero entries drawn from
/// `candidates`, values small signed fractions.
pub fn random_sparse<R: Rng>(
    level: Level,
    candidates: &[usize],
    max_support: usize,
    rng: &mut R,
) -> Cochain {
    let mut c = Cochain::zero(level);
    if candidates.is_empty() {
        return c;
    }
    let n = rng.gen_range(1..=max_support.max(1));
    for _ in 0..n {
        let id = candidates[rng.gen_range(0..candidates.len())];
        let num: i64 = rng.gen_range(-9..=9);
        let den: i64 = rng.gen_range(1..=4);
        c.add_at(id, &crate::scalar::ratio(num, den));
    }
    c
}
