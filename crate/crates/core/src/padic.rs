//! The tree of PGL(2, ℚ_p) realized on lattice classes.
//!
//! A vertex `(n, u)` is the class of the lattice spanned by the columns of
//! `[[pⁿ, u], [0, 1]]`, with `u` read modulo `pⁿℤ_p`. Group elements act on
//! the left; right multiplication by GL(2, ℤ_p) and scalars does not change
//! the class.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::{Integer, One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{int, parse_fraction, to_fraction_string, Scalar};
use crate::tower::KPath;
use crate::tree::{BallAutomorphism, TreeBall};

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} is not prime")))
    }
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `v_p(x)`, or `None` for zero.
pub fn valuation(x: &Scalar, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    Some(int_valuation(x.numer(), &p) - int_valuation(x.denom(), &p))
}

/// `p^e` as a rational, for any integer `e`.
pub fn p_power(p: u64, e: i64) -> Scalar {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Scalar::from_integer(base)
    } else {
        Scalar::new(BigInt::one(), base)
    }
}

/// A rational together with its p-adic valuation (`None` meaning +∞).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicScalar {
    value: Scalar,
    p: u64,
    valuation: Option<i64>,
}

impl PadicScalar {
    pub fn new(value: Scalar, p: u64) -> Result<Self> {
        check_prime(p)?;
        let valuation = valuation(&value, p);
        Ok(Self { value, p, valuation })
    }

    pub fn value(&self) -> &Scalar {
        &self.value
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn is_unit(&self) -> bool {
        self.valuation == Some(0)
    }

    pub fn is_integral(&self) -> bool {
        self.valuation.is_none_or(|v| v >= 0)
    }
}

/// Canonical representative of `u mod pⁿℤ_p`: the unique element of
/// `ℤ[1/p] ∩ [0, pⁿ)` in its class.
pub fn reduce_mod_power(u: &Scalar, p: u64, n: i64) -> Scalar {
    if u.is_zero() {
        return Scalar::zero();
    }
    let pb = BigInt::from(p);
    let mut den = u.denom().clone();
    let mut j: i64 = 0;
    while (&den % &pb).is_zero() {
        den /= &pb;
        j += 1;
    }
    if n + j <= 0 {
        return Scalar::zero();
    }
    let modulus = pb.pow((n + j) as u32);
    let inv = mod_inverse(&den, &modulus).expect("coprime to p");
    let t = (u.numer() * inv).mod_floor(&modulus);
    Scalar::new(t, pb.pow(j as u32))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if g.gcd.is_one() {
        Some(g.x.mod_floor(m))
    } else if m.is_one() {
        Some(BigInt::zero())
    } else {
        None
    }
}

/// Invertible 2×2 rational matrix `[[a, b], [c, d]]`, read in PGL(2).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    m: [[Scalar; 2]; 2],
}

impl GroupElement {
    pub fn new(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Result<Self> {
        let g = Self { m: [[a, b], [c, d]] };
        if g.det().is_zero() {
            return Err(Error::Singular);
        }
        Ok(g)
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(int(a), int(b), int(c), int(d))
    }

    pub fn identity() -> Self {
        Self::from_ints(1, 0, 0, 1).expect("invertible")
    }

    pub fn entries(&self) -> &[[Scalar; 2]; 2] {
        &self.m
    }

    pub fn a(&self) -> &Scalar {
        &self.m[0][0]
    }

    pub fn b(&self) -> &Scalar {
        &self.m[0][1]
    }

    pub fn c(&self) -> &Scalar {
        &self.m[1][0]
    }

    pub fn d(&self) -> &Scalar {
        &self.m[1][1]
    }

    pub fn det(&self) -> Scalar {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let e = |i: usize, j: usize| &self.m[i][0] * &other.m[0][j] + &self.m[i][1] * &other.m[1][j];
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        let [[a, b], [c, d]] = &self.m;
        Self { m: [[d / &det, -b / &det], [-c / &det, a / &det]] }
    }

    pub fn scaled(&self, lambda: &Scalar) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::Singular);
        }
        let [[a, b], [c, d]] = &self.m;
        Ok(Self { m: [[a * lambda, b * lambda], [c * lambda, d * lambda]] })
    }

    /// Smallest valuation among the entries.
    pub fn min_valuation(&self, p: u64) -> i64 {
        self.m
            .iter()
            .flatten()
            .filter_map(|x| valuation(x, p))
            .min()
            .expect("an invertible matrix has a nonzero entry")
    }

    /// The multiple `p^{-e} g` whose entries have minimum valuation 0.
    pub fn canonically_scaled(&self, p: u64) -> Self {
        let e = self.min_valuation(p);
        self.scaled(&p_power(p, -e)).expect("nonzero scalar")
    }

    pub fn to_json_value(&self) -> [[String; 2]; 2] {
        let s = |x: &Scalar| to_fraction_string(x);
        [[s(self.a()), s(self.b())], [s(self.c()), s(self.d())]]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: [[String; 2]; 2] = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_strings(&raw)
    }

    pub fn from_strings(raw: &[[String; 2]; 2]) -> Result<Self> {
        let f = |s: &String| parse_fraction(s.trim());
        Self::new(f(&raw[0][0])?, f(&raw[0][1])?, f(&raw[1][0])?, f(&raw[1][1])?)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Lattice class `[[pⁿ, u], [0, 1]]` with `u` reduced by [`reduce_mod_power`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeClassVertex {
    pub n: i64,
    pub u: Scalar,
}

impl LatticeClassVertex {
    pub fn new(n: i64, u: Scalar, p: u64) -> Self {
        let u = reduce_mod_power(&u, p, n);
        Self { n, u }
    }

    pub fn root() -> Self {
        Self { n: 0, u: Scalar::zero() }
    }

    pub fn matrix(&self, p: u64) -> GroupElement {
        GroupElement::new(p_power(p, self.n), self.u.clone(), Scalar::zero(), Scalar::one()).expect("invertible")
    }
}

impl fmt::Display for LatticeClassVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, to_fraction_string(&self.u))
    }
}

/// Column Hermite reduction over ℤ_p modulo scalars.
pub fn canonicalize(g: &GroupElement, p: u64) -> Result<LatticeClassVertex> {
    check_prime(p)?;
    if g.det().is_zero() {
        return Err(Error::Singular);
    }
    let [[a, b], [c, d]] = g.entries().clone();
    // bring the bottom entry of smaller valuation into the second column
    let swap = match (valuation(&c, p), valuation(&d, p)) {
        (_, None) => true,
        (None, _) => false,
        (Some(vc), Some(vd)) => vc < vd,
    };
    let (x0, y, z, w) = if swap { (b, a, d, c) } else { (a, b, c, d) };
    // clear the lower-left entry: first column -= (z / w) second column
    let ratio = &z / &w;
    let x = x0 - &ratio * &y;
    let vx = valuation(&x, p).expect("invertible");
    let vw = valuation(&w, p).expect("invertible");
    let n = vx - vw;
    Ok(LatticeClassVertex::new(n, y / w, p))
}

/// `g · v`.
pub fn act(g: &GroupElement, v: &LatticeClassVertex, p: u64) -> Result<LatticeClassVertex> {
    canonicalize(&g.mul(&v.matrix(p)), p)
}

/// Difference of the elementary-divisor valuations of `M(v)⁻¹ M(w)`.
pub fn tree_distance(v: &LatticeClassVertex, w: &LatticeClassVertex, p: u64) -> usize {
    let h = v.matrix(p).inverse().mul(&w.matrix(p));
    let det_v = valuation(&h.det(), p).expect("invertible");
    let e1 = h.min_valuation(p);
    (det_v - 2 * e1) as usize
}

/// The `p + 1` neighbours of `v`, in the order `[[p, i], [0, 1]]` for
/// `i = 0..p`, then `[[1, 0], [0, p]]`.
pub fn lattice_neighbors(v: &LatticeClassVertex, p: u64) -> Vec<LatticeClassVertex> {
    let m = v.matrix(p);
    let mut out: Vec<LatticeClassVertex> = (0..p as i64)
        .map(|i| {
            let step = GroupElement::from_ints(p as i64, i, 0, 1).expect("invertible");
            canonicalize(&m.mul(&step), p).expect("invertible")
        })
        .collect();
    let step = GroupElement::from_ints(1, 0, 0, p as i64).expect("invertible");
    out.push(canonicalize(&m.mul(&step), p).expect("invertible"));
    out
}

/// The abstract ball matched with the lattice classes within distance `R` of
/// the standard lattice.
#[derive(Debug, Clone)]
pub struct LatticeBall {
    p: u64,
    ball: Arc<TreeBall>,
    labels: Vec<LatticeClassVertex>,
    index: HashMap<LatticeClassVertex, usize>,
}

/// Root children get the neighbours of the root in [`lattice_neighbors`]
/// order; a deeper vertex hands its neighbours other than its parent to its
/// children in the same order.
pub fn embed_ball(ball: Arc<TreeBall>, p: u64) -> Result<LatticeBall> {
    check_prime(p)?;
    if ball.q() as u64 != p {
        return Err(Error::InvalidParameter(format!("ball has q = {} but p = {p}", ball.q())));
    }
    let n = ball.num_vertices();
    let mut labels: Vec<Option<LatticeClassVertex>> = vec![None; n];
    labels[0] = Some(LatticeClassVertex::root());
    for v in 0..n {
        let here = labels[v].clone().expect("parents are labelled first");
        let parent = ball.parent(v).map(|u| labels[u].clone().expect("labelled"));
        let fresh = lattice_neighbors(&here, p).into_iter().filter(|x| Some(x) != parent.as_ref());
        for (&child, label) in ball.children(v).iter().zip(fresh) {
            labels[child] = Some(label);
        }
    }
    let labels: Vec<LatticeClassVertex> = labels.into_iter().map(|l| l.expect("all labelled")).collect();
    let index = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
    Ok(LatticeBall { p, ball, labels, index })
}

/// Which extensions of a k-path: `Plus` prepends a vertex (edges with head
/// `s`), `Minus` appends one (edges with tail `s`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl LatticeBall {
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn ball(&self) -> &TreeBall {
        &self.ball
    }

    pub fn labels(&self) -> &[LatticeClassVertex] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &LatticeClassVertex {
        &self.labels[v]
    }

    pub fn id_of(&self, v: &LatticeClassVertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Image of every ball vertex under `g`, `None` where it leaves the ball.
    pub fn vertex_images(&self, g: &GroupElement) -> Vec<Option<usize>> {
        self.labels
            .iter()
            .map(|l| self.id_of(&act(g, l, self.p).expect("invertible")))
            .collect()
    }

    /// The ball automorphism induced by `g`, when `g` maps the ball onto
    /// itself (for instance when `g` fixes the root).
    pub fn automorphism_of(&self, g: &GroupElement) -> Result<BallAutomorphism> {
        let image: Option<Vec<usize>> = self.vertex_images(g).into_iter().collect();
        let image = image.ok_or_else(|| Error::NotAutomorphism(format!("{g} moves part of the ball outside it")))?;
        BallAutomorphism::from_image(&self.ball, image)
    }

    /// `a_o` of level `n`: the (n+1)-path `(0,0), (-1,0), ..., (-(n+1),0)`.
    pub fn standard_path(&self, n: usize) -> Result<KPath> {
        standard_path_labels(n)
            .iter()
            .map(|l| self.id_of(l))
            .collect::<Option<Vec<usize>>>()
            .map(KPath)
            .ok_or_else(|| Error::InvalidParameter(format!("radius {} < {}", self.ball.radius(), n + 1)))
    }

    /// Whether `Γ_s` acts transitively on the extensions of `s` on `side`
    /// inside the ball, by enumerating `Γ_s ∩ GL(2, ℤ_p)` modulo the
    /// principal congruence subgroup `K_m`. `K_m` fixes the radius-`m` ball
    /// about the root pointwise, so the enumeration is exact once every
    /// vertex involved lies within distance `m` of the root.
    pub fn stabilizer_transitivity_check(&self, s: &KPath, side: Side, m: u32) -> Result<bool> {
        let ball = &*self.ball;
        if !s.is_valid_in(ball) {
            return Err(Error::InvalidParameter(format!("{:?} is not a path of the ball", s.0)));
        }
        let extensions = self.extensions(s, side);
        if extensions.len() <= 1 {
            return Ok(true);
        }
        let reach = extensions.iter().flat_map(|e| e.0.iter()).map(|&v| ball.depth(v)).max().unwrap_or(0);
        if (m as usize) < reach {
            return Err(Error::Inconclusive(format!("modulus p^{m} does not see depth {reach}")));
        }
        let pm = (self.p as u128).pow(m);
        if pm.pow(4) > 1 << 24 {
            return Err(Error::Inconclusive(format!("GL(2, Z/{pm}) too large to enumerate")));
        }
        let pm = pm as i64;
        let start = &extensions[0];
        let targets: BTreeSet<&Vec<usize>> = extensions.iter().map(|e| &e.0).collect();
        let mut orbit: BTreeSet<Vec<usize>> = BTreeSet::new();
        let p = self.p as i64;
        for a in 0..pm {
            for b in 0..pm {
                for c in 0..pm {
                    for d in 0..pm {
                        if (a * d - b * c).rem_euclid(p) == 0 {
                            continue;
                        }
                        let g = GroupElement::from_ints(a, b, c, d).expect("unit determinant");
                        let map = |v: usize| self.id_of(&act(&g, &self.labels[v], self.p).expect("invertible"));
                        if s.0.iter().any(|&v| map(v) != Some(v)) {
                            continue;
                        }
                        let image: Option<Vec<usize>> = start.0.iter().map(|&v| map(v)).collect();
                        orbit.insert(image.expect("g fixes the root"));
                        if targets.iter().all(|t| orbit.contains(*t)) {
                            return Ok(true);
                        }
                    }
                }
            }
        }
        if s.0.contains(&0) {
            // Γ_s fixes the root here, so the enumeration saw all of it
            Ok(false)
        } else {
            Err(Error::Inconclusive("only Γ_s ∩ GL(2, Z_p) was enumerated".into()))
        }
    }

    /// Extensions of `s` inside the ball on the given side, by vertex list.
    pub fn extensions(&self, s: &KPath, side: Side) -> Vec<KPath> {
        let ball = &*self.ball;
        let verts = &s.0;
        match side {
            Side::Plus => {
                let end = verts[0];
                ball.neighbors(end)
                    .iter()
                    .filter(|t| !verts.contains(t))
                    .map(|&t| {
                        let mut e = vec![t];
                        e.extend_from_slice(verts);
                        KPath(e)
                    })
                    .collect()
            }
            Side::Minus => {
                let end = *verts.last().expect("nonempty");
                ball.neighbors(end)
                    .iter()
                    .filter(|t| !verts.contains(t))
                    .map(|&t| {
                        let mut e = verts.clone();
                        e.push(t);
                        KPath(e)
                    })
                    .collect()
            }
        }
    }
}

pub fn standard_path_labels(n: usize) -> Vec<LatticeClassVertex> {
    (0..=n as i64 + 1).map(|i| LatticeClassVertex { n: -i, u: Scalar::zero() }).collect()
}

/// Whether some scalar multiple of `g` lies in Γ₀(pⁿ): GL(2, ℤ_p) for
/// `n = 0`; unit diagonal, integral `b` and `c ∈ pⁿℤ_p` for `n ≥ 1`.
pub fn in_gamma0(g: &GroupElement, n: u32, p: u64) -> bool {
    let h = g.canonically_scaled(p);
    let v = |x: &Scalar| valuation(x, p);
    if n == 0 {
        return v(&h.det()) == Some(0);
    }
    v(h.a()) == Some(0)
        && v(h.d()) == Some(0)
        && v(h.b()).is_none_or(|e| e >= 0)
        && v(h.c()).is_none_or(|e| e >= n as i64)
}

/// Whether `g` fixes every vertex of the given labelled path.
pub fn fixes_pointwise(g: &GroupElement, path: &[LatticeClassVertex], p: u64) -> bool {
    path.iter().all(|x| act(g, x, p).is_ok_and(|y| &y == x))
}

fn random_unit<R: Rng>(rng: &mut R, p: i64, modulus: i64) -> i64 {
    loop {
        let x = rng.gen_range(0..modulus);
        if x % p != 0 {
            return x;
        }
    }
}

/// Integer matrix in Γ₀(p^level) with entries reduced modulo `p^m`.
pub fn sample_gamma0<R: Rng>(p: u64, level: u32, m: u32, rng: &mut R) -> Result<GroupElement> {
    check_prime(p)?;
    if level > m {
        return Err(Error::InvalidParameter(format!("level {level} exceeds modulus exponent {m}")));
    }
    let p = p as i64;
    let modulus = p.checked_pow(m).ok_or_else(|| Error::InvalidParameter(format!("p^{m} overflows")))?;
    let a = random_unit(rng, p, modulus);
    let d = random_unit(rng, p, modulus);
    let b = rng.gen_range(0..modulus);
    let c = p.pow(level) * rng.gen_range(0..p.pow(m - level));
    GroupElement::from_ints(a, b, c, d)
}

/// Element of Γ₀(p^level) whose lower-left entry has valuation exactly
/// `level` (so it lies outside Γ₀(p^{level+1})).
pub fn sample_exact_level<R: Rng>(p: u64, level: u32, m: u32, rng: &mut R) -> Result<GroupElement> {
    check_prime(p)?;
    if level >= m {
        return Err(Error::InvalidParameter(format!("level {level} needs modulus exponent > {level}")));
    }
    let pi = p as i64;
    let modulus = pi.pow(m);
    let a = random_unit(rng, pi, modulus);
    let d = random_unit(rng, pi, modulus);
    let b = rng.gen_range(0..modulus);
    let c = pi.pow(level) * random_unit(rng, pi, pi.pow(m - level));
    // n = 0 needs a unit determinant as well
    let det = a * d - b * c;
    if level == 0 && det.rem_euclid(pi) == 0 {
        return GroupElement::from_ints(a, 0, c, d);
    }
    GroupElement::from_ints(a, b, c, d)
}

/// Random invertible rational matrix with numerators in `-h..=h` and
/// denominators in `1..=h`.
pub fn random_group_element<R: Rng>(h: i64, rng: &mut R) -> GroupElement {
    loop {
        let mut e = || Scalar::new(BigInt::from(rng.gen_range(-h..=h)), BigInt::from(rng.gen_range(1..=h)));
        if let Ok(g) = GroupElement::new(e(), e(), e(), e()) {
            return g;
        }
    }
}
