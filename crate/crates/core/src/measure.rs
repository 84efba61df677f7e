//! Discretizations of compact sets, reference measures and weights
//! `w = e^{-Q}`.
//!
//! Every compact set is a finite point cloud; sup-norms are grid sup-norms.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::MultiIndexBasis;
use crate::error::{Error, Result};
use crate::geometry::parse_call;
use crate::gram::GramSystem;
use crate::linalg::pairwise_sum;
use crate::output::fmt_f64;

pub type Point = Vec<Complex64>;

/// Weighted point cloud in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<Point>,
    masses: Vec<f64>,
    label: String,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Point>, masses: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("measure needs at least one point".into()));
        }
        if points.len() != masses.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: masses.len() });
        }
        let dim = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidParameter("masses must be finite and nonnegative".into()));
        }
        if !masses.iter().any(|&m| m > 0.0) {
            return Err(Error::InvalidParameter("at least one mass must be positive".into()));
        }
        Ok(DiscreteMeasure { dim, points, masses, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.masses)
    }

    /// Total mass equals 1 within `1e-12`.
    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    /// Number of distinct points carrying positive mass.
    pub fn support_size(&self) -> usize {
        self.points
            .iter()
            .zip(&self.masses)
            .filter(|(_, &m)| m > 0.0)
            .map(|(p, _)| point_key(p))
            .collect::<HashSet<_>>()
            .len()
    }

    pub fn distinct_points(&self) -> usize {
        self.points.iter().map(|p| point_key(p)).collect::<HashSet<_>>().len()
    }

    /// Same points, new masses.
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        DiscreteMeasure::new(self.points.clone(), masses, self.label.clone())
    }

    pub fn normalized(&self) -> Self {
        let t = self.total_mass();
        DiscreteMeasure {
            dim: self.dim,
            points: self.points.clone(),
            masses: self.masses.iter().map(|m| m / t).collect(),
            label: self.label.clone(),
        }
    }

    /// Drops atoms with mass below `threshold`.
    pub fn pruned(&self, threshold: f64) -> Result<Self> {
        let (points, masses): (Vec<Point>, Vec<f64>) = self
            .points
            .iter()
            .zip(&self.masses)
            .filter(|(_, &m)| m >= threshold)
            .map(|(p, &m)| (p.clone(), m))
            .unzip();
        DiscreteMeasure::new(points, masses, self.label.clone())
    }

    /// Uniform probability measure on the given points.
    pub fn uniform(points: Vec<Point>, label: impl Into<String>) -> Result<Self> {
        let m = 1.0 / points.len().max(1) as f64;
        let masses = vec![m; points.len()];
        DiscreteMeasure::new(points, masses, label)
    }

    /// CSV with columns `re_1,im_1,...,re_d,im_d,mass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in 1..=self.dim {
            out.push_str(&format!("re_{c},im_{c},"));
        }
        out.push_str("mass\n");
        for (p, m) in self.points.iter().zip(&self.masses) {
            for z in p {
                out.push_str(&format!("{},{},", fmt_f64(z.re), fmt_f64(z.im)));
            }
            out.push_str(&fmt_f64(*m));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn point_key(p: &[Complex64]) -> Vec<(u64, u64)> {
    // +0.0 and -0.0 compare equal
    p.iter().map(|z| ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())).collect()
}

/// Weight `w = e^{-Q}`.
#[derive(Clone, Debug)]
pub enum WeightSpec {
    /// `Q = 0`.
    Zero,
    /// `Q = c`.
    Constant(f64),
    /// `Q = c · Σ |z_i|²`.
    Quadratic(f64),
    /// `Q` given pointwise on a fixed point list.
    Table(WeightTable),
}

#[derive(Clone, Debug)]
pub struct WeightTable {
    points: Vec<Point>,
    q: Vec<f64>,
    index: HashMap<Vec<(u64, u64)>, usize>,
}

impl WeightSpec {
    pub fn table(points: Vec<Point>, q: Vec<f64>) -> Result<Self> {
        if points.len() != q.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: q.len() });
        }
        let index = points.iter().enumerate().map(|(i, p)| (point_key(p), i)).collect();
        Ok(WeightSpec::Table(WeightTable { points, q, index }))
    }

    /// Parses `zero`, `const(c)`, `quadratic(c)`.
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        if name == "zero" || name == "0" {
            return Ok(WeightSpec::Zero);
        }
        let (head, args) = parse_call(name)?;
        let arg = || -> Result<f64> {
            args.first()
                .ok_or_else(|| Error::Parse(format!("missing argument in '{name}'")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{e} in '{name}'")))
        };
        match head.as_str() {
            "const" | "constant" => Ok(WeightSpec::Constant(arg()?)),
            "quadratic" => Ok(WeightSpec::Quadratic(arg()?)),
            _ => Err(Error::Parse(format!("unknown weight '{name}'"))),
        }
    }

    /// `Q(z)`; tables only answer on their own points.
    pub fn q(&self, z: &[Complex64]) -> Result<f64> {
        let v = match self {
            WeightSpec::Zero => 0.0,
            WeightSpec::Constant(c) => *c,
            WeightSpec::Quadratic(c) => c * z.iter().map(|x| x.norm_sqr()).sum::<f64>(),
            WeightSpec::Table(t) => {
                let i = t.index.get(&point_key(z)).ok_or(Error::MissingWeight)?;
                t.q[*i]
            }
        };
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("weight Q = {v}")));
        }
        Ok(v)
    }

    pub fn q_on(&self, points: &[Point]) -> Result<Vec<f64>> {
        points.iter().map(|p| self.q(p)).collect()
    }

    /// Finite on every point of `support`.
    pub fn is_admissible_on(&self, support: &[Point]) -> bool {
        self.q_on(support).is_ok()
    }

    /// `Q + t·u` tabulated on `points`.
    pub fn perturbed(&self, points: &[Point], u: &[f64], t: f64) -> Result<Self> {
        if points.len() != u.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: u.len() });
        }
        let q = self.q_on(points)?;
        WeightSpec::table(points.to_vec(), q.iter().zip(u).map(|(a, b)| a + t * b).collect())
    }

    /// The constant value of `Q`, if the weight is constant.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            WeightSpec::Zero => Some(0.0),
            WeightSpec::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn table_points(&self) -> Option<&[Point]> {
        match self {
            WeightSpec::Table(t) => Some(&t.points),
            _ => None,
        }
    }
}

/// Quadrature rule for interval grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalRule {
    /// Gauss–Chebyshev nodes with equal masses (arcsine measure).
    Chebyshev,
    /// Equispaced nodes including both endpoints, equal masses.
    Uniform,
}

/// Grid description; JSON form is tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridSpec {
    Circle { n: usize },
    Interval { a: f64, b: f64, rule: IntervalRule, n: usize },
    Torus { d: usize, n: usize },
    Disk { r: f64, n_r: usize, n_theta: usize },
    Annulus { r_in: f64, r_out: f64, n_r: usize, n_theta: usize },
    Product { factors: Vec<GridSpec> },
}

impl GridSpec {
    /// Parses `circle(N)`, `interval(a,b,chebyshev|uniform,N)`,
    /// `torus(d,N)`, `disk(R,Nr,Ntheta)`, `annulus(r,R,Nr,Ntheta)` and
    /// `product(G1*G2*...)`, or a JSON object.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let factors = inner.split('*').map(GridSpec::parse).collect::<Result<Vec<_>>>()?;
            return Ok(GridSpec::Product { factors });
        }
        let (head, args) = parse_call(s)?;
        let num = |i: usize| -> Result<f64> {
            args.get(i)
                .ok_or_else(|| Error::Parse(format!("missing argument {i} in '{s}'")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{e} in '{s}'")))
        };
        let count = |i: usize| -> Result<usize> {
            args.get(i)
                .ok_or_else(|| Error::Parse(format!("missing argument {i} in '{s}'")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("{e} in '{s}'")))
        };
        match head.as_str() {
            "circle" => Ok(GridSpec::Circle { n: count(0)? }),
            "interval" => {
                let rule = match args.get(2).map(String::as_str) {
                    Some("chebyshev") => IntervalRule::Chebyshev,
                    Some("uniform") => IntervalRule::Uniform,
                    other => return Err(Error::Parse(format!("unknown interval rule {other:?}"))),
                };
                Ok(GridSpec::Interval { a: num(0)?, b: num(1)?, rule, n: count(3)? })
            }
            "torus" => Ok(GridSpec::Torus { d: count(0)?, n: count(1)? }),
            "disk" => Ok(GridSpec::Disk { r: num(0)?, n_r: count(1)?, n_theta: count(2)? }),
            "annulus" => Ok(GridSpec::Annulus { r_in: num(0)?, r_out: num(1)?, n_r: count(2)?, n_theta: count(3)? }),
            _ => Err(Error::Parse(format!("unknown grid '{s}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GridSpec::Torus { d, .. } => *d,
            GridSpec::Product { factors } => factors.iter().map(GridSpec::dim).sum(),
            _ => 1,
        }
    }
}

fn need(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

/// Builds the point cloud described by `spec`. Point order is deterministic.
pub fn make_grid(spec: &GridSpec) -> Result<DiscreteMeasure> {
    match *spec {
        GridSpec::Circle { n } => {
            need(n >= 1, "circle needs N >= 1")?;
            let pts = (0..n).map(|k| vec![root_of_unity(k, n)]).collect();
            DiscreteMeasure::new(pts, vec![1.0 / n as f64; n], format!("circle({n})"))
        }
        GridSpec::Interval { a, b, rule, n } => {
            need(n >= 1, "interval needs N >= 1")?;
            need(a.is_finite() && b.is_finite() && b > a, "interval needs a < b")?;
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let xs: Vec<f64> = match rule {
                IntervalRule::Chebyshev => (1..=n)
                    .map(|k| mid + half * ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos())
                    .collect(),
                IntervalRule::Uniform if n == 1 => vec![mid],
                IntervalRule::Uniform => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            };
            let pts = xs.into_iter().map(|x| vec![Complex64::new(x, 0.0)]).collect();
            let tag = match rule {
                IntervalRule::Chebyshev => "chebyshev",
                IntervalRule::Uniform => "uniform",
            };
            DiscreteMeasure::new(pts, vec![1.0 / n as f64; n], format!("interval({a},{b},{tag},{n})"))
        }
        GridSpec::Torus { d, n } => {
            need(d >= 1 && n >= 1, "torus needs d >= 1 and N >= 1")?;
            let roots: Vec<Complex64> = (0..n).map(|k| root_of_unity(k, n)).collect();
            let total = n.checked_pow(d as u32).ok_or_else(|| Error::InvalidParameter("torus too large".into()))?;
            let pts = (0..total)
                .map(|mut idx| {
                    let mut p = vec![Complex64::new(0.0, 0.0); d];
                    for c in (0..d).rev() {
                        p[c] = roots[idx % n];
                        idx /= n;
                    }
                    p
                })
                .collect();
            DiscreteMeasure::new(pts, vec![1.0 / total as f64; total], format!("torus({d},{n})"))
        }
        GridSpec::Disk { r, n_r, n_theta } => polar_grid(0.0, r, n_r, n_theta, format!("disk({r},{n_r},{n_theta})")),
        GridSpec::Annulus { r_in, r_out, n_r, n_theta } => {
            need(r_in >= 0.0, "annulus needs r >= 0")?;
            need(r_in < r_out, "annulus needs r < R")?;
            polar_grid(r_in, r_out, n_r, n_theta, format!("annulus({r_in},{r_out},{n_r},{n_theta})"))
        }
        GridSpec::Product { ref factors } => {
            need(!factors.is_empty(), "product needs at least one factor")?;
            let grids = factors.iter().map(make_grid).collect::<Result<Vec<_>>>()?;
            let mut points: Vec<Point> = vec![Vec::new()];
            let mut masses = vec![1.0];
            for g in &grids {
                let mut np = Vec::with_capacity(points.len() * g.len());
                let mut nm = Vec::with_capacity(points.len() * g.len());
                for (p, m) in points.iter().zip(&masses) {
                    for (q, w) in g.points().iter().zip(g.masses()) {
                        let mut r = p.clone();
                        r.extend_from_slice(q);
                        np.push(r);
                        nm.push(m * w);
                    }
                }
                points = np;
                masses = nm;
            }
            let label = grids.iter().map(|g| g.label().to_string()).collect::<Vec<_>>().join("*");
            DiscreteMeasure::new(points, masses, format!("product({label})"))
        }
    }
}

fn root_of_unity(k: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Midpoint polar grid with area-element masses (total `π(R² - r²)`).
fn polar_grid(r_in: f64, r_out: f64, n_r: usize, n_theta: usize, label: String) -> Result<DiscreteMeasure> {
    need(n_r >= 1 && n_theta >= 1, "polar grid needs N_r, N_theta >= 1")?;
    need(r_out.is_finite() && r_out > r_in, "polar grid needs r < R")?;
    let dr = (r_out - r_in) / n_r as f64;
    let dt = 2.0 * PI / n_theta as f64;
    let mut pts = Vec::with_capacity(n_r * n_theta);
    let mut masses = Vec::with_capacity(n_r * n_theta);
    for i in 0..n_r {
        let rho = r_in + (i as f64 + 0.5) * dr;
        for j in 0..n_theta {
            pts.push(vec![Complex64::from_polar(rho, j as f64 * dt)]);
            masses.push(rho * dr * dt);
        }
    }
    DiscreteMeasure::new(pts, masses, label)
}

/// Empirical Bernstein–Markov constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BmConstant {
    /// `M_n = sqrt(max_K B_n^{μ,w})`.
    pub m_n: f64,
    /// `sqrt(d_n / μ(K))`, a lower bound for `M_n` from the trace identity.
    pub lower_bound: f64,
    pub argmax: usize,
}

/// `M_n` over the support of `measure`.
pub fn bm_constant(measure: &DiscreteMeasure, weight: &WeightSpec, basis: &MultiIndexBasis) -> Result<BmConstant> {
    if measure.support_size() < basis.len() {
        return Err(Error::DegenerateGram);
    }
    let g = GramSystem::build(basis, measure, weight)?;
    bm_constant_on(&g, measure.points())
}

/// `M_n` with the sup taken over `points` instead of the support.
pub fn bm_constant_on(g: &GramSystem, points: &[Point]) -> Result<BmConstant> {
    g.ensure_nondegenerate()?;
    let values = g.bergman_at(points, true)?;
    let (argmax, max) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    Ok(BmConstant {
        m_n: max.sqrt(),
        lower_bound: (g.basis().len() as f64 / g.measure().total_mass()).sqrt(),
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexBody;

    #[test]
    fn circle_grid() {
        let g = make_grid(&GridSpec::parse("circle(8)").unwrap()).unwrap();
        assert_eq!(g.len(), 8);
        for (k, p) in g.points().iter().enumerate() {
            assert!((p[0] - Complex64::from_polar(1.0, PI * k as f64 / 4.0)).norm() < 1e-15);
        }
        assert!(g.is_probability());
    }

    #[test]
    fn chebyshev_grid() {
        let g = make_grid(&GridSpec::parse("interval(-1,1,chebyshev,5)").unwrap()).unwrap();
        for (k, p) in g.points().iter().enumerate() {
            let x = ((2 * k + 1) as f64 * PI / 10.0).cos();
            assert!((p[0].re - x).abs() < 1e-15 && p[0].im == 0.0);
        }
        assert!(g.masses().iter().all(|&m| m == 0.2));
    }

    #[test]
    fn torus_and_product() {
        let t = make_grid(&GridSpec::Torus { d: 2, n: 5 }).unwrap();
        assert_eq!(t.len(), 25);
        assert!(t.is_probability());
        let z = root_of_unity(1, 5);
        assert!((t.points()[7][0] - z).norm() < 1e-15);
        assert!((t.points()[7][1] - z * z).norm() < 1e-15);
        let p = make_grid(&GridSpec::parse("product(interval(-1,1,uniform,3)*circle(4))").unwrap()).unwrap();
        assert_eq!((p.len(), p.dim()), (12, 2));
        assert!(p.is_probability());
    }

    #[test]
    fn polar_masses_integrate_area() {
        let d = make_grid(&GridSpec::Disk { r: 2.0, n_r: 7, n_theta: 9 }).unwrap();
        assert!((d.total_mass() - 4.0 * PI).abs() < 1e-12);
        let a = make_grid(&GridSpec::parse("annulus(0.5,1,4,6)").unwrap()).unwrap();
        assert!((a.total_mass() - 0.75 * PI).abs() < 1e-12);
    }

    #[test]
    fn invalid_grids() {
        assert!(make_grid(&GridSpec::Circle { n: 0 }).is_err());
        assert!(make_grid(&GridSpec::parse("annulus(1,1,3,3)").unwrap()).is_err());
        assert!(make_grid(&GridSpec::parse("interval(1,-1,uniform,3)").unwrap()).is_err());
        assert!(GridSpec::parse("hexagon(3)").is_err());
    }

    #[test]
    fn grid_json_schema() {
        let g = GridSpec::parse(r#"{"kind":"interval","a":-1.0,"b":1.0,"rule":"chebyshev","n":7}"#).unwrap();
        assert_eq!(g, GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: 7 });
        let back: GridSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn weights() {
        let z = [Complex64::new(1.0, 1.0)];
        assert_eq!(WeightSpec::from_name("zero").unwrap().q(&z).unwrap(), 0.0);
        assert_eq!(WeightSpec::from_name("const(0.5)").unwrap().q(&z).unwrap(), 0.5);
        assert_eq!(WeightSpec::from_name("quadratic(2)").unwrap().q(&z).unwrap(), 4.0);
        let t = WeightSpec::table(vec![z.to_vec()], vec![3.0]).unwrap();
        assert_eq!(t.q(&z).unwrap(), 3.0);
        assert!(matches!(t.q(&[Complex64::new(0.0, 0.0)]), Err(Error::MissingWeight)));
        let bad = WeightSpec::Constant(f64::INFINITY);
        assert!(matches!(bad.q(&z), Err(Error::NonFinite(_))));
    }

    #[test]
    fn bm_circle_and_interval() {
        let body = ConvexBody::from_name("interval(0,1)").unwrap();
        for n in [1u64, 3, 7] {
            let b = MultiIndexBasis::new(&body, n).unwrap();
            let circle = make_grid(&GridSpec::Circle { n: 2 * n as usize + 3 }).unwrap();
            let bm = bm_constant(&circle, &WeightSpec::Zero, &b).unwrap();
            assert!((bm.m_n - ((n + 1) as f64).sqrt()).abs() < 1e-12);
            assert!(bm.m_n >= bm.lower_bound - 1e-12);
        }
        // arcsine grid: B peaks at the ends with value 2n+1
        let n = 6u64;
        let b = MultiIndexBasis::new(&body, n).unwrap();
        let cheb = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: 400 }).unwrap();
        let g = GramSystem::build(&b, &cheb, &WeightSpec::Zero).unwrap();
        let ends = vec![vec![Complex64::new(-1.0, 0.0)], vec![Complex64::new(1.0, 0.0)]];
        let at_ends = g.bergman_at(&ends, false).unwrap();
        for v in at_ends {
            assert!((v - (2 * n + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn bm_single_point_is_degenerate() {
        let body = ConvexBody::from_name("interval(0,1)").unwrap();
        let b = MultiIndexBasis::new(&body, 2).unwrap();
        let one = DiscreteMeasure::new(vec![vec![Complex64::new(0.3, 0.0)]], vec![1.0], "pt").unwrap();
        assert!(matches!(bm_constant(&one, &WeightSpec::Zero, &b), Err(Error::DegenerateGram)));
    }

    #[test]
    fn csv_export() {
        let g = make_grid(&GridSpec::Circle { n: 2 }).unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("re_1,im_1,mass\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
