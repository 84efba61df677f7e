//! Rational convex polytopes `P ⊂ (R⁺)^d`.
//!
//! Bodies carry exact rational vertices and (for `d > 1`) an exact
//! halfspace description `normal · x <= offset`. All lattice and volume
//! computations stay in rational/integer arithmetic; only the logarithmic
//! indicator [`ConvexBody::h_p`] goes through floating point.

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Halfspace `normal · x <= offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Facet {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Self {
        Facet { normal, offset }
    }

    fn value(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x)
    }

    /// Integer form `a · x <= b` with the same solution set.
    fn integer_form(&self) -> (Vec<i128>, i128) {
        let lcm = self
            .normal
            .iter()
            .chain(std::iter::once(&self.offset))
            .fold(1i128, |acc, r| acc.lcm(r.denom()));
        let scale = |r: &Rational| (r * Rational::from_integer(lcm)).to_integer();
        (self.normal.iter().map(scale).collect(), scale(&self.offset))
    }
}

/// A rational polytope with nonempty interior in the closed positive orthant.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexBody {
    dim: usize,
    vertices: Vec<Vec<Rational>>,
    facets: Option<Vec<Facet>>,
    int_facets: Option<Vec<(Vec<i128>, i128)>>,
}

/// `k`: least positive integer with `Σ ⊂ kP` (absent if none);
/// `a`: least positive integer with `P ⊂ aΣ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InclusionConstants {
    pub k: Option<u64>,
    pub a: u64,
}

/// Exact volume data of a body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeInfo {
    pub volume: Rational,
    /// `∫_P (x_1 + ... + x_d) dx`.
    pub c_p: Rational,
    /// `d! · Vol(P)`, the total Monge–Ampère mass of the class.
    pub n_d: Rational,
}

impl ConvexBody {
    /// Validates and normalizes a body. Duplicate vertices are dropped;
    /// non-extreme vertices, negative coordinates, lower-dimensional bodies
    /// and inconsistent facets are rejected.
    pub fn new(dim: usize, vertices: Vec<Vec<Rational>>, facets: Option<Vec<Facet>>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut uniq: Vec<Vec<Rational>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            if v.iter().any(|c| c.is_negative()) {
                return Err(Error::InvalidBody("vertex coordinates must be >= 0".into()));
            }
            if !uniq.contains(&v) {
                uniq.push(v);
            }
        }
        if affine_rank(&uniq) < dim {
            return Err(Error::InvalidBody("body has empty interior".into()));
        }
        for i in 0..uniq.len() {
            let others: Vec<Vec<Rational>> = uniq
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.clone())
                .collect();
            if in_hull(&others, &uniq[i]) {
                return Err(Error::InvalidBody(format!("vertex {i} is not an extreme point")));
            }
        }
        if let Some(fs) = &facets {
            for (fi, f) in fs.iter().enumerate() {
                if f.normal.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: f.normal.len() });
                }
                if f.normal.iter().all(Zero::is_zero) {
                    return Err(Error::InvalidBody(format!("facet {fi} has zero normal")));
                }
                let mut tight = 0;
                for v in &uniq {
                    let val = f.value(v);
                    if val > f.offset {
                        return Err(Error::InvalidBody(format!("facet {fi} cuts off a vertex")));
                    }
                    if val == f.offset {
                        tight += 1;
                    }
                }
                if tight < dim {
                    return Err(Error::InvalidBody(format!(
                        "facet {fi} is tight at {tight} vertices, need at least {dim}"
                    )));
                }
            }
        }
        let int_facets = facets.as_ref().map(|fs| fs.iter().map(Facet::integer_form).collect());
        Ok(ConvexBody { dim, vertices: uniq, facets, int_facets })
    }

    /// The standard simplex `Σ = conv{0, e_1, ..., e_d}`.
    pub fn simplex(dim: usize) -> Result<Self> {
        let mut vertices = vec![vec![Rational::zero(); dim]];
        for i in 0..dim {
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::one();
            vertices.push(e);
        }
        let mut facets = nonneg_facets(dim);
        facets.push(Facet::new(vec![Rational::one(); dim], Rational::one()));
        ConvexBody::new(dim, vertices, Some(facets))
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit_box(dim: usize) -> Result<Self> {
        let vertices = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|i| Rational::from_integer(((mask >> i) & 1) as i128))
                    .collect()
            })
            .collect();
        let mut facets = nonneg_facets(dim);
        for i in 0..dim {
            let mut n = vec![Rational::zero(); dim];
            n[i] = Rational::one();
            facets.push(Facet::new(n, Rational::one()));
        }
        ConvexBody::new(dim, vertices, Some(facets))
    }

    /// The interval `[lo, hi] ⊂ R`.
    pub fn interval(lo: Rational, hi: Rational) -> Result<Self> {
        if hi <= lo {
            return Err(Error::InvalidBody("interval needs lo < hi".into()));
        }
        let facets = vec![
            Facet::new(vec![-Rational::one()], -lo),
            Facet::new(vec![Rational::one()], hi),
        ];
        ConvexBody::new(1, vec![vec![lo], vec![hi]], Some(facets))
    }

    /// Parses a builtin name: `simplex(d)`, `box(d)`, `interval(a,b)`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (head, args) = split_call(name)?;
        match head.as_str() {
            "simplex" => ConvexBody::simplex(parse_usize(&args, 0)?),
            "box" => ConvexBody::unit_box(parse_usize(&args, 0)?),
            "interval" => {
                if args.len() != 2 {
                    return Err(Error::Parse(format!("interval takes two endpoints: {name}")));
                }
                ConvexBody::interval(parse_rational(&args[0])?, parse_rational(&args[1])?)
            }
            _ => Err(Error::Parse(format!("unknown body '{name}'"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BodyJson = serde_json::from_str(text)?;
        raw.into_body()
    }

    pub fn to_json(&self) -> String {
        let raw = BodyJson {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(RatJson::from).collect())
                .collect(),
            facets: self.facets.as_ref().map(|fs| {
                fs.iter()
                    .map(|f| FacetJson {
                        normal: f.normal.iter().map(RatJson::from).collect(),
                        offset: RatJson::from(&f.offset),
                    })
                    .collect()
            }),
        };
        serde_json::to_string(&raw).expect("body serializes")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn facets(&self) -> Option<&[Facet]> {
        self.facets.as_deref()
    }

    /// `[lo, hi]` for a one-dimensional body.
    fn interval_bounds(&self) -> (Rational, Rational) {
        let lo = self.vertices.iter().map(|v| v[0]).min().expect("nonempty");
        let hi = self.vertices.iter().map(|v| v[0]).max().expect("nonempty");
        (lo, hi)
    }

    /// Exact membership of `x` in `nP`.
    pub fn contains_dilated(&self, x: &[Rational], n: u64) -> bool {
        let scale = Rational::from_integer(n as i128);
        if let Some(fs) = &self.facets {
            return fs.iter().all(|f| f.value(x) <= f.offset * scale);
        }
        if self.dim == 1 {
            let (lo, hi) = self.interval_bounds();
            return lo * scale <= x[0] && x[0] <= hi * scale;
        }
        let scaled: Vec<Vec<Rational>> =
            self.vertices.iter().map(|v| v.iter().map(|c| c * scale).collect()).collect();
        in_hull(&scaled, x)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.contains_dilated(x, 1)
    }

    /// `nP ∩ Z^d` in graded-lex order: total degree ascending, then
    /// lexicographically descending (so `(1,0)` precedes `(0,1)`).
    pub fn lattice_points(&self, n: u64) -> Result<Vec<Vec<u32>>> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let d = self.dim;
        let upper: Vec<i128> = (0..d)
            .map(|i| {
                let m = self.vertices.iter().map(|v| v[i]).max().expect("nonempty");
                (m * Rational::from_integer(n as i128)).floor().to_integer()
            })
            .collect();
        let n_i = n as i128;
        let member: Box<dyn Fn(&[i128]) -> bool> = match (&self.int_facets, d) {
            (Some(fs), _) => Box::new(move |j: &[i128]| {
                fs.iter().all(|(a, b)| a.iter().zip(j).map(|(x, y)| x * y).sum::<i128>() <= n_i * b)
            }),
            (None, 1) => {
                let (lo, hi) = self.interval_bounds();
                let scale = Rational::from_integer(n_i);
                let (lo, hi) = (lo * scale, hi * scale);
                Box::new(move |j: &[i128]| {
                    let x = Rational::from_integer(j[0]);
                    lo <= x && x <= hi
                })
            }
            _ => return Err(Error::MissingFacets),
        };
        let mut out = Vec::new();
        let mut cur = vec![0i128; d];
        'outer: loop {
            if member(&cur) {
                out.push(cur.iter().map(|&c| c as u32).collect::<Vec<u32>>());
            }
            for i in 0..d {
                if cur[i] < upper[i] {
                    cur[i] += 1;
                    continue 'outer;
                }
                cur[i] = 0;
            }
            break;
        }
        out.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        Ok(out)
    }

    /// `H_P(z) = max_{J ∈ P} log|z^J|`, attained at a vertex. Uses
    /// `0 · log 0 = 0`, so a vertex at the origin contributes 0.
    pub fn h_p(&self, z: &[Complex64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim);
        let logs: Vec<f64> = z.iter().map(|c| c.norm().ln()).collect();
        self.vertices
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&logs)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, l)| rat_to_f64(c) * l)
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact `Vol(P)`, `C_P` and `n_d` by fan triangulation.
    pub fn volume_and_cp(&self) -> Result<VolumeInfo> {
        self.volume_and_cp_from(0)
    }

    /// Same as [`volume_and_cp`](Self::volume_and_cp) with the fan rooted at
    /// vertex `apex`; every apex yields the same rationals.
    pub fn volume_and_cp_from(&self, apex: usize) -> Result<VolumeInfo> {
        if apex >= self.vertices.len() {
            return Err(Error::InvalidParameter(format!("apex {apex} out of range")));
        }
        let d = self.dim;
        let (volume, c_p) = if d == 1 {
            let (lo, hi) = self.interval_bounds();
            (hi - lo, (hi * hi - lo * lo) / Rational::from_integer(2))
        } else {
            let facets = self.facets.as_ref().ok_or(Error::MissingFacets)?;
            let tight: Vec<BTreeSet<usize>> = facets
                .iter()
                .map(|f| {
                    self.vertices
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| f.value(v) == f.offset)
                        .map(|(i, _)| i)
                        .collect()
                })
                .collect();
            let all: BTreeSet<usize> = (0..self.vertices.len()).collect();
            let simplices = self.triangulate(&all, d, Some(apex), &tight);
            let fact = Rational::from_integer((1..=d as i128).product());
            let mut vol = Rational::zero();
            let mut cp = Rational::zero();
            for s in simplices {
                let base = &self.vertices[s[0]];
                let rows: Vec<Vec<Rational>> = s[1..]
                    .iter()
                    .map(|&i| self.vertices[i].iter().zip(base).map(|(a, b)| a - b).collect())
                    .collect();
                let sv = determinant(rows).abs() / fact;
                let mean = s
                    .iter()
                    .map(|&i| self.vertices[i].iter().copied().sum::<Rational>())
                    .sum::<Rational>()
                    / Rational::from_integer(d as i128 + 1);
                vol += sv;
                cp += sv * mean;
            }
            (vol, cp)
        };
        if volume.is_zero() {
            return Err(Error::DegenerateBody);
        }
        let fact = Rational::from_integer((1..=d as i128).product());
        Ok(VolumeInfo { volume, c_p, n_d: fact * volume })
    }

    /// Fan triangulation of the `k`-dimensional face with vertex set `face`.
    fn triangulate(
        &self,
        face: &BTreeSet<usize>,
        k: usize,
        apex: Option<usize>,
        tight: &[BTreeSet<usize>],
    ) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![face.iter().copied().collect()];
        }
        let apex = apex
            .filter(|a| face.contains(a))
            .unwrap_or_else(|| *face.iter().next().expect("nonempty face"));
        let mut subfaces: Vec<BTreeSet<usize>> = Vec::new();
        for t in tight {
            let s: BTreeSet<usize> = face.intersection(t).copied().collect();
            if s.contains(&apex) || subfaces.contains(&s) {
                continue;
            }
            let pts: Vec<Vec<Rational>> = s.iter().map(|&i| self.vertices[i].clone()).collect();
            if !pts.is_empty() && affine_rank(&pts) == k - 1 {
                subfaces.push(s);
            }
        }
        let mut out = Vec::new();
        for s in &subfaces {
            for mut simplex in self.triangulate(s, k - 1, None, tight) {
                simplex.insert(0, apex);
                out.push(simplex);
            }
        }
        out
    }

    /// Least `k` with `Σ ⊂ kP` and least `A` with `P ⊂ AΣ`.
    pub fn simplex_inclusion(&self) -> InclusionConstants {
        let max_sum = self
            .vertices
            .iter()
            .map(|v| v.iter().copied().sum::<Rational>())
            .max()
            .expect("nonempty");
        let a = max_sum.ceil().to_integer().max(1) as u64;
        let d = self.dim;
        let origin = vec![Rational::zero(); d];
        if !self.contains(&origin) {
            return InclusionConstants { k: None, a };
        }
        let mut k_max = 1u64;
        for i in 0..d {
            let reach = match &self.facets {
                Some(fs) => fs
                    .iter()
                    .filter(|f| f.normal[i].is_positive())
                    .map(|f| f.offset / f.normal[i])
                    .min(),
                None if d == 1 => Some(self.interval_bounds().1),
                None => self.axis_reach_by_search(i),
            };
            match reach {
                Some(t) if t.is_positive() => {
                    let k_i = (Rational::one() / t).ceil().to_integer() as u64;
                    k_max = k_max.max(k_i.max(1));
                }
                _ => return InclusionConstants { k: None, a },
            }
        }
        InclusionConstants { k: Some(k_max), a }
    }

    /// Vertex-only fallback: finds the least `k` with `e_i / k ∈ P` by
    /// doubling plus bisection, returned as the reach `1/k`.
    fn axis_reach_by_search(&self, axis: usize) -> Option<Rational> {
        let inside = |k: u64| {
            let mut e = vec![Rational::zero(); self.dim];
            e[axis] = Rational::new(1, k as i128);
            self.contains(&e)
        };
        let mut hi = 1u64;
        while !inside(hi) {
            hi *= 2;
            if hi > 1 << 32 {
                return None;
            }
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if inside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(Rational::new(1, hi as i128))
    }
}

fn nonneg_facets(dim: usize) -> Vec<Facet> {
    (0..dim)
        .map(|i| {
            let mut n = vec![Rational::zero(); dim];
            n[i] = -Rational::one();
            Facet::new(n, Rational::zero())
        })
        .collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn rat_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Row-reduces in place and returns the rank.
fn row_reduce(rows: &mut [Vec<Rational>]) -> usize {
    let m = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col];
        for r in 0..m {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col] / pivot;
                for c in col..ncols {
                    let sub = rows[rank][c] * f;
                    rows[r][c] -= sub;
                }
            }
        }
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank
}

fn affine_rank(points: &[Vec<Rational>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let base = &points[0];
    let mut rows: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    row_reduce(&mut rows)
}

fn determinant(mut rows: Vec<Vec<Rational>>) -> Rational {
    let n = rows.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            rows.swap(p, col);
            det = -det;
        }
        let pivot = rows[col][col];
        det *= pivot;
        for r in col + 1..n {
            let f = rows[r][col] / pivot;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let sub = rows[col][c] * f;
                rows[r][c] -= sub;
            }
        }
    }
    det
}

/// Exact test `x ∈ conv(points)` via Carathéodory: some affinely
/// independent subset of at most `d+1` points carries `x` with
/// nonnegative barycentric coordinates.
fn in_hull(points: &[Vec<Rational>], x: &[Rational]) -> bool {
    let d = x.len();
    let m = points.len();
    for size in 1..=(d + 1).min(m) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let subset: Vec<&Vec<Rational>> = idx.iter().map(|&i| &points[i]).collect();
            if barycentric_nonneg(&subset, x) {
                return true;
            }
            // next combination
            let mut i = size;
            while i > 0 && idx[i - 1] == m - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    false
}

fn barycentric_nonneg(subset: &[&Vec<Rational>], x: &[Rational]) -> bool {
    let d = x.len();
    let k = subset.len();
    let owned: Vec<Vec<Rational>> = subset.iter().map(|p| (*p).clone()).collect();
    if affine_rank(&owned) != k - 1 {
        return false;
    }
    // augmented system: rows = coordinates + affine row, columns = λ + rhs
    let mut rows: Vec<Vec<Rational>> = (0..=d)
        .map(|r| {
            let mut row: Vec<Rational> = subset
                .iter()
                .map(|p| if r < d { p[r] } else { Rational::one() })
                .collect();
            row.push(if r < d { x[r] } else { Rational::one() });
            row
        })
        .collect();
    let rank = row_reduce(&mut rows);
    // inconsistent if a pivot landed in the rhs column
    for row in rows.iter().take(rank) {
        let lead = row.iter().position(|c| !c.is_zero());
        if lead == Some(k) {
            return false;
        }
    }
    // columns are independent, so rows 0..k hold the identity on λ
    rows.iter().take(k).all(|row| {
        let lead = row.iter().position(|c| !c.is_zero()).expect("pivot row");
        !(row[k] / row[lead]).is_negative()
    })
}

fn split_call(s: &str) -> Result<(String, Vec<String>)> {
    let s = s.trim();
    let open = s.find('(').ok_or_else(|| Error::Parse(format!("expected name(args): {s}")))?;
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("unbalanced parentheses: {s}")));
    }
    let head = s[..open].trim().to_ascii_lowercase();
    let inner = &s[open + 1..s.len() - 1];
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|a| a.trim().to_string()).collect()
    };
    Ok((head, args))
}

pub(crate) fn parse_call(s: &str) -> Result<(String, Vec<String>)> {
    split_call(s)
}

fn parse_usize(args: &[String], i: usize) -> Result<usize> {
    args.get(i)
        .ok_or_else(|| Error::Parse("missing argument".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("{e}")))
}

/// Parses `p`, `p/q` or a terminating decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i128.pow(frac.len() as u32);
        let frac_part: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int_part.abs() * den + frac_part;
        return Ok(Rational::new(if neg { -num } else { num }, den));
    }
    s.parse::<i128>().map(Rational::from_integer).map_err(|_| bad())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RatJson {
    Int(i64),
    Pair([i64; 2]),
}

impl From<&Rational> for RatJson {
    fn from(r: &Rational) -> Self {
        RatJson::Pair([*r.numer() as i64, *r.denom() as i64])
    }
}

impl RatJson {
    fn to_rational(&self) -> Result<Rational> {
        match *self {
            RatJson::Int(v) => Ok(Rational::from_integer(v as i128)),
            RatJson::Pair([_, 0]) => Err(Error::Parse("zero denominator".into())),
            RatJson::Pair([p, q]) => Ok(Rational::new(p as i128, q as i128)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FacetJson {
    normal: Vec<RatJson>,
    offset: RatJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyJson {
    dim: usize,
    vertices: Vec<Vec<RatJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    facets: Option<Vec<FacetJson>>,
}

impl BodyJson {
    fn into_body(self) -> Result<ConvexBody> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().map(RatJson::to_rational).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let facets = match self.facets {
            None => None,
            Some(fs) => Some(
                fs.iter()
                    .map(|f| {
                        Ok(Facet::new(
                            f.normal.iter().map(RatJson::to_rational).collect::<Result<_>>()?,
                            f.offset.to_rational()?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        ConvexBody::new(self.dim, vertices, facets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i128, q: i128) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn simplex_lattice_n1() {
        let s = ConvexBody::simplex(2).unwrap();
        assert_eq!(s.lattice_points(1).unwrap(), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn interval_and_box_lattice() {
        let p = ConvexBody::from_name("interval(0,2)").unwrap();
        let pts = p.lattice_points(3).unwrap();
        assert_eq!(pts, (0..=6).map(|i| vec![i]).collect::<Vec<_>>());
        let b = ConvexBody::unit_box(2).unwrap();
        assert_eq!(b.lattice_points(2).unwrap().len(), 9);
    }

    #[test]
    fn vertex_only_body_needs_facets_in_2d() {
        let v = vec![vec![r(0, 1), r(0, 1)], vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]];
        let body = ConvexBody::new(2, v, None).unwrap();
        assert!(matches!(body.lattice_points(1), Err(Error::MissingFacets)));
        // inclusion constants still work through the hull test
        assert_eq!(body.simplex_inclusion(), InclusionConstants { k: Some(1), a: 1 });
        let one_d = ConvexBody::new(1, vec![vec![r(0, 1)], vec![r(3, 2)]], None).unwrap();
        assert_eq!(one_d.lattice_points(2).unwrap().len(), 4);
    }

    #[test]
    fn h_p_examples() {
        let p = ConvexBody::from_name("interval(0,1)").unwrap();
        let z = [Complex64::new(2f64.exp(), 0.0)];
        assert!((p.h_p(&z) - 2.0).abs() < 1e-14);
        let s = ConvexBody::simplex(2).unwrap();
        let h = s.h_p(&[Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0)]);
        assert!((h - 2f64.ln()).abs() < 1e-15);
        assert_eq!(s.h_p(&[Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]), 0.0);
    }

    #[test]
    fn h_p_without_origin_is_minus_infinity_at_zero() {
        let p = ConvexBody::from_name("interval(1,2)").unwrap();
        assert_eq!(p.h_p(&[Complex64::new(0.0, 0.0)]), f64::NEG_INFINITY);
    }

    #[test]
    fn volumes() {
        let s = ConvexBody::simplex(2).unwrap().volume_and_cp().unwrap();
        assert_eq!((s.volume, s.c_p, s.n_d), (r(1, 2), r(1, 3), r(1, 1)));
        let b = ConvexBody::unit_box(2).unwrap().volume_and_cp().unwrap();
        assert_eq!((b.volume, b.c_p), (r(1, 1), r(1, 1)));
        let i = ConvexBody::interval(r(0, 1), r(5, 3)).unwrap().volume_and_cp().unwrap();
        assert_eq!((i.volume, i.c_p), (r(5, 3), r(25, 18)));
        let c = ConvexBody::unit_box(3).unwrap().volume_and_cp().unwrap();
        assert_eq!((c.volume, c.c_p, c.n_d), (r(1, 1), r(3, 2), r(6, 1)));
        let t = ConvexBody::simplex(3).unwrap().volume_and_cp().unwrap();
        assert_eq!((t.volume, t.c_p), (r(1, 6), r(1, 8)));
    }

    #[test]
    fn inclusion_examples() {
        let s = ConvexBody::simplex(2).unwrap();
        assert_eq!(s.simplex_inclusion(), InclusionConstants { k: Some(1), a: 1 });
        let half = ConvexBody::interval(r(0, 1), r(1, 2)).unwrap();
        assert_eq!(half.simplex_inclusion(), InclusionConstants { k: Some(2), a: 1 });
        let shifted = ConvexBody::interval(r(1, 1), r(2, 1)).unwrap();
        assert_eq!(shifted.simplex_inclusion(), InclusionConstants { k: None, a: 2 });
        let b = ConvexBody::unit_box(2).unwrap();
        assert_eq!(b.simplex_inclusion(), InclusionConstants { k: Some(1), a: 2 });
    }

    #[test]
    fn rejects_bad_bodies() {
        assert!(matches!(ConvexBody::simplex(4), Err(Error::UnsupportedDimension(4))));
        let neg = ConvexBody::new(1, vec![vec![r(-1, 1)], vec![r(1, 1)]], None);
        assert!(matches!(neg, Err(Error::InvalidBody(_))));
        let flat = ConvexBody::new(2, vec![vec![r(0, 1), r(0, 1)], vec![r(1, 1), r(1, 1)]], None);
        assert!(matches!(flat, Err(Error::InvalidBody(_))));
        let interior = ConvexBody::new(
            2,
            vec![
                vec![r(0, 1), r(0, 1)],
                vec![r(2, 1), r(0, 1)],
                vec![r(0, 1), r(2, 1)],
                vec![r(1, 2), r(1, 2)],
            ],
            None,
        );
        assert!(matches!(interior, Err(Error::InvalidBody(_))));
        let mut s = ConvexBody::simplex(2).unwrap();
        let mut fs = s.facets().unwrap().to_vec();
        fs[2].offset = r(1, 2);
        assert!(ConvexBody::new(2, s.vertices().to_vec(), Some(fs)).is_err());
        // duplicate vertices are dropped
        s.vertices.push(s.vertices[0].clone());
        let dedup = ConvexBody::new(2, s.vertices.clone(), s.facets.clone()).unwrap();
        assert_eq!(dedup.vertices().len(), 3);
    }

    #[test]
    fn json_roundtrip_and_schema() {
        let b = ConvexBody::simplex(3).unwrap();
        let back = ConvexBody::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        let text = r#"{"dim":1,"vertices":[[[0,1]],[[1,2]]],"facets":[{"normal":[-1],"offset":0},{"normal":[[1,1]],"offset":[1,2]}]}"#;
        let half = ConvexBody::from_json(text).unwrap();
        assert_eq!(half.lattice_points(4).unwrap().len(), 3);
        assert!(ConvexBody::from_json(r#"{"dim":1}"#).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/4").unwrap(), r(3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), r(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), r(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), r(7, 1));
        assert!(parse_rational("x").is_err());
    }
}
