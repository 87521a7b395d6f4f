//! Verification suites run by the command-line harness. Each suite returns a
//! [`CheckReport`]; a report that fails carries the smallest counterexample
//! found.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cochain::{
    adjoint, coboundary, h1c_dimension, harmonic_space, intersect_harmonic_exact, pairing, random_sparse, Cochain,
    Level,
};
use crate::error::{Error, Result};
use crate::forest::SpanningForest;
use crate::padic::{
    act, embed_ball, fixes_pointwise, in_gamma0, random_group_element, sample_exact_level, sample_gamma0,
    standard_path_labels, tree_distance, valuation, LatticeClassVertex, Side,
};
use crate::radon::{
    exactness_check, fundamental_loops, induced_apartments, path_integral, primitive, radon_kernel_interior,
    radon_transform, random_loop, span_check, ApartmentSet, Interior,
};
use crate::scalar::{ratio, to_fraction_string};
use crate::tower::{build_path_graph, KPath, PathGraph};
use crate::tree::{build_ball, random_automorphism, TreeBall, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Euler,
    Adjoint,
    RadonD,
    Exactness,
    Loops,
    Primitive,
    Equivariance,
    Padic,
    Stabilizer,
    Span,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Euler,
        Suite::Adjoint,
        Suite::RadonD,
        Suite::Exactness,
        Suite::Loops,
        Suite::Primitive,
        Suite::Equivariance,
        Suite::Padic,
        Suite::Stabilizer,
        Suite::Span,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Euler => "euler",
            Suite::Adjoint => "adjoint",
            Suite::RadonD => "radon-d",
            Suite::Exactness => "exactness",
            Suite::Loops => "loops",
            Suite::Primitive => "primitive",
            Suite::Equivariance => "equivariance",
            Suite::Padic => "padic",
            Suite::Stabilizer => "stabilizer",
            Suite::Span => "span",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckParams {
    pub q: usize,
    pub radius: usize,
    pub k: usize,
    /// Interior margin; `None` means `k + 2`.
    pub margin: Option<usize>,
    pub seed: u64,
    pub samples: Option<usize>,
    /// Congruence level for the stabilizer suite.
    pub n: u32,
    /// Exponent `m` of the sampling modulus `p^m`.
    pub modulus: u32,
}

impl Default for CheckParams {
    fn default() -> Self {
        Self { q: 2, radius: 3, k: 0, margin: None, seed: 0, samples: None, n: 0, modulus: 6 }
    }
}

impl CheckParams {
    pub fn margin(&self) -> usize {
        self.margin.unwrap_or(self.k + 2)
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn ball(&self) -> Result<Arc<TreeBall>> {
        Ok(Arc::new(build_ball(TreeParams::new(self.q, self.radius)?)?))
    }

    fn tower(&self) -> Result<PathGraph> {
        build_path_graph(self.ball()?, self.k)
    }

    fn apartments(&self, pg: &PathGraph) -> Result<ApartmentSet> {
        induced_apartments(pg, &pg.ball().enumerate_oriented_diameters())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: CheckParams,
    pub samples: usize,
    pub passed: bool,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl CheckReport {
    fn new(suite: Suite, params: &CheckParams, samples: usize) -> Self {
        Self {
            check: suite.name().to_string(),
            params: params.clone(),
            samples,
            passed: true,
            details: json!({}),
            counterexample: None,
        }
    }

    /// Records the first failure only.
    fn fail(&mut self, witness: Value) {
        if self.passed {
            self.passed = false;
            self.counterexample = Some(witness);
        }
    }

    fn expect(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        if !ok {
            self.fail(witness());
        }
    }
}

pub fn run(suite: Suite, params: &CheckParams) -> Result<CheckReport> {
    match suite {
        Suite::Euler => euler(params),
        Suite::Adjoint => adjointness(params),
        Suite::RadonD => radon_d(params),
        Suite::Exactness => exactness(params),
        Suite::Loops => loops(params),
        Suite::Primitive => primitives(params),
        Suite::Equivariance => equivariance(params),
        Suite::Padic => padic(params),
        Suite::Stabilizer => stabilizer(params),
        Suite::Span => span(params),
    }
}

fn cochain_json(c: &Cochain) -> Value {
    Value::Object(c.iter().map(|(id, v)| (id.to_string(), Value::String(to_fraction_string(v)))).collect())
}

fn euler(params: &CheckParams) -> Result<CheckReport> {
    let pg = params.tower()?;
    let mut report = CheckReport::new(Suite::Euler, params, 1);
    let (v, e, c) = (pg.num_vertices(), pg.num_edges(), pg.components().count);
    let harmonic = harmonic_space(&pg).dim();
    let h1c = h1c_dimension(&pg);
    let intersection = intersect_harmonic_exact(&pg);
    let euler = e + c - v;
    report.details = json!({
        "V": v, "E": e, "C": c,
        "harmonic_dim": harmonic, "h1c_dim": h1c, "euler": euler,
        "harmonic_exact_intersection": intersection,
    });
    let witness = report.details.clone();
    report.expect(harmonic == euler && h1c == euler && intersection == 0, || witness);
    Ok(report)
}

fn adjointness(params: &CheckParams) -> Result<CheckReport> {
    let pg = params.tower()?;
    let n = params.samples_or(100);
    let mut report = CheckReport::new(Suite::Adjoint, params, n);
    let mut rng = params.rng();
    let vs: Vec<usize> = (0..pg.num_vertices()).collect();
    let es: Vec<usize> = (0..pg.num_edges()).collect();
    for _ in 0..n {
        let f = random_sparse(Level::Vertex, &vs, 6, &mut rng);
        let w = random_sparse(Level::Edge, &es, 6, &mut rng);
        let lhs = pairing(&w, &coboundary(&pg, &f)?)?;
        let rhs = pairing(&adjoint(&pg, &w)?, &f)?;
        if lhs != rhs {
            report.fail(json!({"f": cochain_json(&f), "omega": cochain_json(&w)}));
        }
    }
    Ok(report)
}

/// On a truncated ball `R(df)(Ã) = f(end) - f(start)`; it vanishes when `f`
/// is zero on the k-paths where apartments start and end.
fn radon_d(params: &CheckParams) -> Result<CheckReport> {
    let pg = params.tower()?;
    let aps = params.apartments(&pg)?;
    let n = params.samples_or(100);
    let mut report = CheckReport::new(Suite::RadonD, params, pg.num_vertices() + n);
    let boundary = aps.boundary_vertices(&pg);
    let telescopes = |f: &Cochain| -> Result<bool> {
        let image = radon_transform(&pg, &aps, &coboundary(&pg, f)?)?;
        Ok(aps.apartments().iter().all(|ap| {
            let (s, t) = aps.end_vertices(&pg, ap);
            image.get(ap.id) == f.get(t) - f.get(s)
        }))
    };
    for s in 0..pg.num_vertices() {
        let f = Cochain::indicator(Level::Vertex, s);
        let image = radon_transform(&pg, &aps, &coboundary(&pg, &f)?)?;
        let ok = if boundary.contains(&s) { telescopes(&f)? } else { image.is_zero() };
        report.expect(ok, || json!({"indicator": s, "image": image.to_csv()}));
    }
    let inner: Vec<usize> = (0..pg.num_vertices()).filter(|s| !boundary.contains(s)).collect();
    let mut rng = params.rng();
    for _ in 0..n {
        let f = random_sparse(Level::Vertex, &inner, 8, &mut rng);
        let image = radon_transform(&pg, &aps, &coboundary(&pg, &f)?)?;
        report.expect(image.is_zero(), || json!({"f": cochain_json(&f), "image": image.to_csv()}));
    }
    report.details = json!({
        "vertices": pg.num_vertices(),
        "apartments": aps.len(),
        "boundary_vertices": boundary.len(),
        "random_samples": n,
    });
    Ok(report)
}

fn exactness(params: &CheckParams) -> Result<CheckReport> {
    let pg = params.tower()?;
    let aps = params.apartments(&pg)?;
    let mut report = CheckReport::new(Suite::Exactness, params, 1);
    let r = exactness_check(&pg, &aps, params.margin())?;
    report.details = serde_json::to_value(&r).expect("serializable");
    let witness = report.details.clone();
    report.expect(r.equal, || witness);
    Ok(report)
}

fn loops(params: &CheckParams) -> Result<CheckReport> {
    let pg = params.tower()?;
    let aps = params.apartments(&pg)?;
    let margin = params.margin();
    let interior = Interior::new(&pg, margin)?;
    let kernel = radon_kernel_interior(&pg, &aps, margin)?;
    let n = params.samples_or(200);
    let cycles = fundamental_loops(&pg, |a| interior.contains_edge(a));
    let forest = SpanningForest::grow(&pg, |a| interior.contains_edge(a), std::iter::empty());
    let starts: Vec<usize> = (0..pg.num_vertices()).filter(|&s| forest.root_of(s).is_some()).collect();
    let mut rng = params.rng();
    let mut sampled = Vec::new();
    if !starts.is_empty() {
        use rand::Rng;
        for _ in 0..n {
            let s = starts[rng.gen_range(0..starts.len())];
            let steps = rng.gen_range(1..=12);
            if let Some(w) = random_loop(&pg, &forest, s, steps, &mut rng) {
                sampled.push(w);
            }
        }
    }
    let mut report = CheckReport::new(Suite::Loops, params, kernel.len() * (cycles.len() + sampled.len()));
    for (i, w) in kernel.iter().enumerate() {
        for p in cycles.iter().chain(&sampled) {
            let v = path_integral(w, p);
            report.expect(v.is_zero(), || {
                json!({"kernel_index": i, "loop_edges": p.edges(), "integral": to_fraction_string(&v)})
            });
        }
    }
    report.details = json!({
        "kernel_dim": kernel.len(),
        "cycle_basis_loops": cycles.len(),
        "random_loops": sampled.len(),
    });
    Ok(report)
}

fn primitives(params: &CheckParams) -> Result<CheckReport> {
    let pg = params.tower()?;
    let aps = params.apartments(&pg)?;
    let margin = params.margin();
    let interior = Interior::new(&pg, margin)?;
    let kernel = radon_kernel_interior(&pg, &aps, margin)?;
    let mut report = CheckReport::new(Suite::Primitive, params, kernel.len());
    for (i, w) in kernel.iter().enumerate() {
        match primitive(&pg, w, None) {
            Ok(p) => {
                let df = coboundary(&pg, &p.f)?;
                let matches = interior.edges.iter().all(|&a| df.get(a) == w.get(a));
                let contained = p.f.support().all(|s| p.region.vertices.contains(&s));
                report.expect(matches && contained, || {
                    json!({"kernel_index": i, "omega": cochain_json(w), "f": cochain_json(&p.f)})
                });
            }
            Err(e) => report.fail(json!({"kernel_index": i, "error": e.to_string()})),
        }
    }
    report.details = json!({"kernel_dim": kernel.len(), "interior_edges": interior.edges.len()});
    Ok(report)
}

fn equivariance(params: &CheckParams) -> Result<CheckReport> {
    let pg = params.tower()?;
    let aps = params.apartments(&pg)?;
    let n = params.samples_or(20);
    let mut report = CheckReport::new(Suite::Equivariance, params, n);
    let mut rng = params.rng();
    let vs: Vec<usize> = (0..pg.num_vertices()).collect();
    let es: Vec<usize> = (0..pg.num_edges()).collect();
    for i in 0..n {
        let g = random_automorphism(pg.ball(), params.seed.wrapping_add(i as u64));
        let map = pg.apply_automorphism(&g)?;
        // [g.a : g.s] = [a : s] for all s iff g commutes with head and tail
        let incidence = (0..pg.num_edges())
            .all(|a| pg.head(map.edges[a]) == map.vertices[pg.head(a)] && pg.tail(map.edges[a]) == map.vertices[pg.tail(a)]);
        report.expect(incidence, || json!({"automorphism": i, "failed": "incidence"}));
        let f = random_sparse(Level::Vertex, &vs, 6, &mut rng);
        let w = random_sparse(Level::Edge, &es, 6, &mut rng);
        let d_ok = coboundary(&pg, &f.push_forward(&map))? == coboundary(&pg, &f)?.push_forward(&map);
        let ds_ok = adjoint(&pg, &w.push_forward(&map))? == adjoint(&pg, &w)?.push_forward(&map);
        let before = radon_transform(&pg, &aps, &w)?;
        let after = radon_transform(&pg, &aps, &w.push_forward(&map))?;
        let r_ok = aps.apartments().iter().all(|ap| {
            aps.map_apartment(&g, ap.id).is_some_and(|gid| after.get(gid) == before.get(ap.id))
        });
        report.expect(d_ok && ds_ok && r_ok, || {
            json!({"automorphism": i, "d": d_ok, "adjoint": ds_ok, "radon": r_ok, "omega": cochain_json(&w)})
        });
    }
    report.details = json!({"automorphisms": n, "apartments": aps.len()});
    Ok(report)
}

fn padic(params: &CheckParams) -> Result<CheckReport> {
    let p = params.q as u64;
    let ball = params.ball()?;
    let lb = embed_ball(Arc::clone(&ball), p)?;
    let n = params.samples_or(100);
    let nv = ball.num_vertices();
    let mut report = CheckReport::new(Suite::Padic, params, nv * nv + 3 * n);
    for u in 0..nv {
        for v in 0..nv {
            let dl = tree_distance(lb.label(u), lb.label(v), p);
            let dt = ball.distance(u, v);
            report.expect(dl == dt, || json!({"u": u, "v": v, "lattice": dl, "tree": dt}));
        }
    }
    let mut rng = params.rng();
    for _ in 0..n {
        let g = random_group_element(6, &mut rng);
        let h = random_group_element(6, &mut rng);
        let v = act(&random_group_element(6, &mut rng), &LatticeClassVertex::root(), p)?;
        let left = act(&g.mul(&h), &v, p)? == act(&g, &act(&h, &v, p)?, p)?;
        let inverse = act(&g, &act(&g.inverse(), &v, p)?, p)? == v;
        report.expect(left && inverse, || json!({"g": g.to_json_value(), "h": h.to_json_value(), "v": v.to_string()}));
        let lambda = loop {
            use rand::Rng;
            let x = ratio(rng.gen_range(-30..=30), rng.gen_range(1..=30));
            if !x.is_zero() {
                break x;
            }
        };
        for level in 0..3 {
            let scaled = g.scaled(&lambda)?;
            report.expect(in_gamma0(&scaled, level, p) == in_gamma0(&g, level, p), || {
                json!({"g": g.to_json_value(), "lambda": to_fraction_string(&lambda), "n": level})
            });
        }
    }
    report.details = json!({"vertices": nv, "action_samples": n});
    Ok(report)
}

/// Sampled elements of Γ₀(p^{n+1}) fix `a_o`; some element with `v(c) = n`
/// moves it; `Γ_root` is transitive on the neighbours of the root.
fn stabilizer(params: &CheckParams) -> Result<CheckReport> {
    let p = params.q as u64;
    let samples = params.samples_or(200);
    let mut report = CheckReport::new(Suite::Stabilizer, params, 2 * samples);
    let path = standard_path_labels(params.n as usize);
    let mut rng = params.rng();
    for _ in 0..samples {
        let g = sample_gamma0(p, params.n + 1, params.modulus, &mut rng)?;
        report.expect(fixes_pointwise(&g, &path, p), || json!({"g": g.to_json_value(), "failed": "fix"}));
    }
    let mut moved = 0;
    for _ in 0..samples {
        let g = sample_exact_level(p, params.n, params.modulus, &mut rng)?;
        debug_assert_eq!(valuation(g.c(), p), Some(params.n as i64));
        if !fixes_pointwise(&g, &path, p) {
            moved += 1;
        }
    }
    report.expect(moved > 0, || json!({"failed": "no element of exact level moved a_o"}));
    let ball = Arc::new(build_ball(TreeParams::new(params.q, params.n as usize + 2)?)?);
    let lb = embed_ball(ball, p)?;
    let transitive = lb.stabilizer_transitivity_check(&KPath(vec![0]), Side::Plus, 1)?;
    report.expect(transitive, || json!({"failed": "root stabilizer not transitive"}));
    report.details = json!({
        "standard_path": path.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "moved_by_exact_level": moved,
        "root_transitive": transitive,
    });
    Ok(report)
}

fn span(params: &CheckParams) -> Result<CheckReport> {
    let ball = params.ball()?;
    let r = span_check(&ball, params.k)?;
    let mut report = CheckReport::new(Suite::Span, params, 1);
    report.details = serde_json::to_value(&r).expect("serializable");
    let witness = report.details.clone();
    report.expect(r.spans, || witness);
    Ok(report)
}
