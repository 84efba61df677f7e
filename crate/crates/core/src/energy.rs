//! One-variable discrete potential theory on a square lattice: Laplacian
//! masses `dd^c u = (1/2π) Δu`, the energy
//! `E(u,v) = ∫ (u - v)(dd^c u + dd^c v)`, its cocycle and derivative
//! identities.
//!
//! Mass outside the square is accounted for by the asymptotic slope `b` of
//! a grid function (`u = b log|z| + O(1)`): the flux is `b` minus the
//! circulation `(1/2π) ∮ ∂u/∂n` through the square boundary, and the
//! energy pairs it with the mean of `u - v` on the boundary ring.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::ExtremalCase;
use crate::geometry::{parse_call, ConvexBody};
use crate::gram::DerivativeCheck;
use crate::linalg::pairwise_sum;

pub const DEFAULT_N: usize = 1024;
/// Side length of the default square `[-2,2]²`.
pub const DEFAULT_EXTENT: f64 = 4.0;

/// Samples of a real function on an `N × N` lattice centred at `center`
/// with half-width `half_width`. Node `(i, j)` sits at
/// `center + (-hw + i h) + i(-hw + j h)`, stored at `j N + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction1D {
    center: Complex64,
    half_width: f64,
    n: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
    slope: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridHeader {
    center: [f64; 2],
    half_width: f64,
    n: usize,
    slope: Option<f64>,
}

impl GridFunction1D {
    /// Non-finite values are masked out.
    pub fn new(center: Complex64, half_width: f64, n: usize, values: Vec<f64>, slope: Option<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("grid needs N >= 3 (got {n})")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!("half-width must be positive (got {half_width})")));
        }
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: values.len() });
        }
        if slope.is_some_and(|b| !b.is_finite()) {
            return Err(Error::NonFinite("asymptotic slope".into()));
        }
        let mask = values.iter().map(|v| v.is_finite()).collect();
        Ok(GridFunction1D { center, half_width, n, values, mask, slope })
    }

    /// Samples `f` in parallel.
    pub fn sample<F>(center: Complex64, half_width: f64, n: usize, slope: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        let h = 2.0 * half_width / (n.max(2) - 1) as f64;
        let values: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % n, k / n);
                f(center + Complex64::new(-half_width + i as f64 * h, -half_width + j as f64 * h))
            })
            .collect();
        GridFunction1D::new(center, half_width, n, values, slope)
    }

    /// The closed-form extremal function of `case` (one variable only),
    /// tagged with its slope.
    pub fn from_case(case: &ExtremalCase, half_width: f64, n: usize) -> Result<Self> {
        if case.dim() != 1 {
            return Err(Error::UnsupportedDimension(case.dim()));
        }
        let slope = case.slope()?;
        GridFunction1D::sample(Complex64::new(0.0, 0.0), half_width, n, Some(slope), |z| {
            case.eval(&[z]).unwrap_or(f64::NAN)
        })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `2 hw / (N - 1)`.
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn slope(&self) -> Option<f64> {
        self.slope
    }

    pub fn with_slope(mut self, slope: Option<f64>) -> Self {
        self.slope = slope;
        self
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let h = self.h();
        self.center + Complex64::new(-self.half_width + i as f64 * h, -self.half_width + j as f64 * h)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.center == other.center && self.half_width == other.half_width && self.n == other.n
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::MaskMismatch)
        }
    }

    /// Nodewise `f(self, other)`; the result has no slope tag.
    pub fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        self.check_grid(other)?;
        let values = self
            .values
            .par_iter()
            .zip(&other.values)
            .zip(self.mask.par_iter().zip(&other.mask))
            .map(|((a, b), (ma, mb))| if *ma && *mb { f(*a, *b) } else { f64::NAN })
            .collect();
        GridFunction1D::new(self.center, self.half_width, self.n, values, None)
    }

    /// `self + c`, same slope.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.par_iter_mut().for_each(|v| *v += c);
        out
    }

    /// `self + t (other - self)`, with the slope interpolated likewise.
    pub fn lerp(&self, other: &Self, t: f64) -> Result<Self> {
        let out = self.combine(other, |a, b| a + t * (b - a))?;
        let slope = match (self.slope, other.slope) {
            (Some(a), Some(b)) => Some(a + t * (b - a)),
            _ => None,
        };
        Ok(out.with_slope(slope))
    }

    fn is_ring(&self, k: usize) -> bool {
        let (i, j) = (k % self.n, k / self.n);
        i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1
    }

    /// Mean over the boundary ring of the square.
    pub fn ring_mean(&self) -> Result<f64> {
        let ring: Vec<f64> = (0..self.values.len()).filter(|&k| self.is_ring(k)).map(|k| self.values[k]).collect();
        if ring.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid function on the boundary ring".into()));
        }
        Ok(pairwise_sum(&ring) / ring.len() as f64)
    }

    /// JSON header line followed by `N²` little-endian `f64` (masked nodes
    /// written as NaN).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let header = GridHeader {
            center: [self.center.re, self.center.im],
            half_width: self.half_width,
            n: self.n,
            slope: self.slope,
        };
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for (v, m) in self.values.iter().zip(&self.mask) {
            let x = if *m { *v } else { f64::NAN };
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: GridHeader = serde_json::from_str(line.trim_end())?;
        let count = header
            .n
            .checked_mul(header.n)
            .ok_or_else(|| Error::InvalidParameter("grid size overflows".into()))?;
        let mut buf = [0u8; 8];
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            values.push(f64::from_le_bytes(buf));
        }
        GridFunction1D::new(
            Complex64::new(header.center[0], header.center[1]),
            header.half_width,
            header.n,
            values,
            header.slope,
        )
    }
}

/// Discrete `dd^c u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianMass {
    /// Node masses `(1/2π)(Σ neighbours - 4u)`; zero on the boundary ring
    /// and wherever the stencil leaves the mask.
    pub masses: Vec<f64>,
    pub interior: f64,
    /// `(1/2π) ∮ ∂u/∂n ds` over the square boundary.
    pub circulation: f64,
    /// Mass outside the square: `slope - circulation`.
    pub flux: f64,
    /// `interior + flux`.
    pub total: f64,
}

/// Laplacian masses of a slope-tagged grid function.
pub fn ddc_1d(u: &GridFunction1D) -> Result<LaplacianMass> {
    let slope = u
        .slope
        .ok_or_else(|| Error::InvalidParameter("dd^c needs a grid function with an asymptotic slope tag".into()))?;
    let n = u.n;
    let v = &u.values;
    let ok = &u.mask;
    let inv = 1.0 / (2.0 * std::f64::consts::PI);
    let masses: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            if u.is_ring(k) {
                return 0.0;
            }
            let nb = [k - 1, k + 1, k - n, k + n];
            if !ok[k] || nb.iter().any(|&m| !ok[m]) {
                return 0.0;
            }
            inv * (v[k - 1] + v[k + 1] + v[k - n] + v[k + n] - 4.0 * v[k])
        })
        .collect();
    let interior = pairwise_sum(&masses);
    let circulation = circulation(u)? * inv;
    let flux = slope - circulation;
    Ok(LaplacianMass { masses, interior, circulation, flux, total: interior + flux })
}

/// `∮ ∂u/∂n ds` with second-order one-sided normal derivatives and the
/// trapezoid rule along each edge.
fn circulation(u: &GridFunction1D) -> Result<f64> {
    let n = u.n;
    let h = u.h();
    let at = |i: usize, j: usize| u.values[j * n + i];
    let one_sided = |a: f64, b: f64, c: f64| (3.0 * a - 4.0 * b + c) / (2.0 * h);
    let mut terms = Vec::with_capacity(4 * n);
    for t in 0..n {
        let w = if t == 0 || t == n - 1 { 0.5 * h } else { h };
        terms.push(w * one_sided(at(n - 1, t), at(n - 2, t), at(n - 3, t)));
        terms.push(w * one_sided(at(0, t), at(1, t), at(2, t)));
        terms.push(w * one_sided(at(t, n - 1), at(t, n - 2), at(t, n - 3)));
        terms.push(w * one_sided(at(t, 0), at(t, 1), at(t, 2)));
    }
    if terms.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("grid function near the boundary".into()));
    }
    Ok(pairwise_sum(&terms))
}

fn check_pair(u: &GridFunction1D, v: &GridFunction1D) -> Result<()> {
    if !u.same_grid(v) || u.mask != v.mask {
        return Err(Error::MaskMismatch);
    }
    match (u.slope, v.slope) {
        (Some(a), Some(b)) if (a - b).abs() <= 1e-12 * a.abs().max(1.0) => Ok(()),
        (Some(a), Some(b)) => Err(Error::SlopeMismatch(a, b)),
        _ => Err(Error::InvalidParameter("energy needs slope-tagged grid functions".into())),
    }
}

/// `Σ f·m + ring_mean(f)·flux`: the pairing `∫ f dd^c u` including the
/// mass outside the square.
fn pair(f: &GridFunction1D, m: &LaplacianMass) -> Result<f64> {
    let terms: Vec<f64> = f
        .values
        .par_iter()
        .zip(&m.masses)
        .map(|(x, w)| if *w == 0.0 { 0.0 } else { x * w })
        .collect();
    Ok(pairwise_sum(&terms) + f.ring_mean()? * m.flux)
}

fn energy_from_masses(u: &GridFunction1D, mu: &LaplacianMass, v: &GridFunction1D, mv: &LaplacianMass) -> Result<f64> {
    let diff = u.combine(v, |a, b| a - b)?;
    let terms: Vec<f64> = diff
        .values
        .par_iter()
        .zip(mu.masses.par_iter().zip(&mv.masses))
        .map(|(d, (a, b))| {
            let s = a + b;
            if s == 0.0 {
                0.0
            } else {
                d * s
            }
        })
        .collect();
    Ok(pairwise_sum(&terms) + diff.ring_mean()? * (mu.flux + mv.flux))
}

/// `E(u, v) = Σ (u - v)(m_u + m_v) + ring_mean(u - v)(flux_u + flux_v)`.
pub fn energy_1d(u: &GridFunction1D, v: &GridFunction1D) -> Result<f64> {
    check_pair(u, v)?;
    energy_from_masses(u, &ddc_1d(u)?, v, &ddc_1d(v)?)
}

/// `E(u,v) + E(v,w) + E(w,u)`.
pub fn cocycle_check(u: &GridFunction1D, v: &GridFunction1D, w: &GridFunction1D) -> Result<f64> {
    check_pair(u, v)?;
    check_pair(v, w)?;
    let (mu, mv, mw) = (ddc_1d(u)?, ddc_1d(v)?, ddc_1d(w)?);
    Ok(energy_from_masses(u, &mu, v, &mv)? + energy_from_masses(v, &mv, w, &mw)? + energy_from_masses(w, &mw, u, &mu)?)
}

/// `d/dt E(u + t(u' - u), v)` at `t0`: analytic `2 ∫ (u' - u) dd^c u_t`
/// against a central difference with step `h`.
pub fn energy_derivative_check(
    u: &GridFunction1D,
    u_prime: &GridFunction1D,
    v: &GridFunction1D,
    t0: f64,
    h: f64,
) -> Result<DerivativeCheck> {
    check_pair(u, u_prime)?;
    check_pair(u, v)?;
    let dir = u_prime.combine(u, |a, b| a - b)?;
    let ut = u.lerp(u_prime, t0)?;
    let analytic = 2.0 * pair(&dir, &ddc_1d(&ut)?)?;
    let f = |t: f64| energy_1d(&u.lerp(u_prime, t)?, v);
    let fd = (f(t0 + h)? - f(t0 - h)?) / (2.0 * h);
    Ok(DerivativeCheck::new(analytic, fd))
}

/// `E(u2, v) - E(u1, v) - 2 ∫ (u2 - u1) dd^c u1`, which concavity makes
/// `≤ 0`.
pub fn concavity_defect(u1: &GridFunction1D, u2: &GridFunction1D, v: &GridFunction1D) -> Result<f64> {
    check_pair(u1, u2)?;
    let m1 = ddc_1d(u1)?;
    let dir = u2.combine(u1, |a, b| a - b)?;
    Ok(energy_1d(u2, v)? - energy_1d(u1, v)? - 2.0 * pair(&dir, &m1)?)
}

/// Named energy experiments with known values.
#[derive(Clone, Debug, PartialEq)]
pub enum EnergyCase {
    /// `E(V_{[-1,1]}, log⁺|z|) = log 2`.
    IntervalVsTorus,
    /// `E(log⁺|z|, H_{[0,1]}) = 0`.
    DiskVsTorus,
    /// `E(H_P + c, H_P) = 2c` for `P = [0,1]`.
    TorusShift(f64),
}

impl EnergyCase {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim() {
            "interval-vs-torus" => Ok(EnergyCase::IntervalVsTorus),
            "disk-vs-torus" => Ok(EnergyCase::DiskVsTorus),
            other => match parse_call(other) {
                Ok((head, args)) if head == "torus-shift" && args.len() == 1 => args[0]
                    .parse::<f64>()
                    .map(EnergyCase::TorusShift)
                    .map_err(|e| Error::Parse(format!("{e} in '{other}'"))),
                _ => Err(Error::UnknownCase(other.to_string())),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            EnergyCase::IntervalVsTorus => "interval-vs-torus".into(),
            EnergyCase::DiskVsTorus => "disk-vs-torus".into(),
            EnergyCase::TorusShift(c) => format!("torus-shift({c})"),
        }
    }

    pub fn target(&self) -> f64 {
        match self {
            EnergyCase::IntervalVsTorus => std::f64::consts::LN_2,
            EnergyCase::DiskVsTorus => 0.0,
            EnergyCase::TorusShift(c) => 2.0 * c,
        }
    }

    /// `(u, v)` sampled on the square of side `extent` centred at 0.
    pub fn functions(&self, n: usize, extent: f64) -> Result<(GridFunction1D, GridFunction1D)> {
        let hw = 0.5 * extent;
        let torus = GridFunction1D::from_case(&ExtremalCase::TorusHp(ConvexBody::from_name("interval(0,1)")?), hw, n)?;
        let u = match self {
            EnergyCase::IntervalVsTorus => GridFunction1D::from_case(&ExtremalCase::IntervalGreen, hw, n)?,
            EnergyCase::DiskVsTorus => GridFunction1D::from_case(&ExtremalCase::DiskLogPlus, hw, n)?,
            EnergyCase::TorusShift(c) => torus.shifted(*c),
        };
        Ok((u, torus))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub case: String,
    pub n: usize,
    pub extent: f64,
    pub energy: f64,
    pub target: f64,
    pub error: f64,
    pub relative_error: f64,
}

pub fn run_energy_case(case: &EnergyCase, n: usize, extent: f64) -> Result<EnergyReport> {
    let (u, v) = case.functions(n, extent)?;
    let energy = energy_1d(&u, &v)?;
    let target = case.target();
    let error = energy - target;
    Ok(EnergyReport {
        case: case.name(),
        n,
        extent,
        energy,
        target,
        error,
        relative_error: if target == 0.0 { error.abs() } else { (error / target).abs() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    const N: usize = 1024;
    const HW: f64 = 2.0;

    fn torus() -> GridFunction1D {
        GridFunction1D::from_case(&ExtremalCase::TorusHp(ConvexBody::from_name("interval(0,1)").unwrap()), HW, N).unwrap()
    }

    fn green() -> GridFunction1D {
        GridFunction1D::from_case(&ExtremalCase::IntervalGreen, HW, N).unwrap()
    }

    #[test]
    fn mass_normalization() {
        let m = ddc_1d(&torus()).unwrap();
        assert!((m.total - 1.0).abs() < 1e-3);
        // mass sits on the unit circle
        let t = torus();
        let mut off = 0.0;
        for (k, w) in m.masses.iter().enumerate() {
            let z = t.node(k % N, k / N);
            if (z.norm() - 1.0).abs() > 0.01 {
                off += w.abs();
            }
        }
        assert!(off < 1e-3);
        let b = 2.5;
        let hb = GridFunction1D::from_case(&ExtremalCase::TorusHp(ConvexBody::from_name("interval(0,5/2)").unwrap()), HW, N)
            .unwrap();
        assert_eq!(hb.slope(), Some(b));
        assert!((ddc_1d(&hb).unwrap().total - b).abs() < 1e-3 * b);
        let smooth =
            GridFunction1D::sample(Complex64::new(0.0, 0.0), HW, N, Some(1.0), |z| 0.5 * (1.0 + z.norm_sqr()).ln()).unwrap();
        let ms = ddc_1d(&smooth).unwrap();
        assert!((ms.total - 1.0).abs() < 1e-3);
        // mass of (1/π)(1+|z|²)⁻² outside [-2,2]², by 2-d quadrature
        assert!((ms.flux - 0.168_971_499_843).abs() < 1e-3);
    }

    #[test]
    fn energy_examples() {
        let t = torus();
        assert_eq!(energy_1d(&t, &t).unwrap(), 0.0);
        let c = 0.35;
        assert!((energy_1d(&t.shifted(c), &t).unwrap() - 2.0 * c).abs() < 1e-3 * c);
        let e = energy_1d(&green(), &t).unwrap();
        assert!((e - LN_2).abs() < 0.02 * LN_2, "{e}");
        assert_eq!(energy_1d(&t, &green()).unwrap(), -e);
    }

    #[test]
    fn cocycles() {
        let t = torus();
        assert_eq!(cocycle_check(&t, &t, &t).unwrap(), 0.0);
        assert!(cocycle_check(&t, &t.shifted(1.0), &t.shifted(2.0)).unwrap().abs() < 1e-10);
        let g = green();
        let disk = GridFunction1D::from_case(&ExtremalCase::DiskLogPlus, HW, N).unwrap();
        let w = t.shifted(0.3);
        let scale = [energy_1d(&g, &disk).unwrap(), energy_1d(&disk, &w).unwrap(), energy_1d(&w, &g).unwrap()]
            .iter()
            .fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(cocycle_check(&g, &disk, &w).unwrap().abs() <= 1e-2 * scale);
    }

    #[test]
    fn derivatives_and_concavity() {
        let t = torus();
        let c = 0.2;
        let chk = energy_derivative_check(&t, &t.shifted(c), &t, 0.3, 1e-3).unwrap();
        assert!(chk.rel_err < 1e-8);
        assert!((chk.analytic - 2.0 * c).abs() < 1e-3 * c);
        let zero = energy_derivative_check(&t, &t, &t, 0.5, 1e-3).unwrap();
        assert_eq!(zero.analytic, 0.0);
        assert_eq!(zero.finite_difference, 0.0);
        let g = green();
        let chk = energy_derivative_check(&t, &g, &t, 0.5, 1e-3).unwrap();
        assert!(chk.rel_err <= 1e-3, "{chk:?}");
        assert!(concavity_defect(&t, &g, &t).unwrap() <= 1e-2);
        assert!(concavity_defect(&g, &t, &t).unwrap() <= 1e-2);
        // u ≥ v with equal slope
        assert!(energy_1d(&g, &t).unwrap() >= 0.0);
    }

    #[test]
    fn rejects_mismatches() {
        let t = torus();
        let small = GridFunction1D::from_case(&ExtremalCase::IntervalGreen, HW, 64).unwrap();
        assert!(matches!(energy_1d(&t, &small), Err(Error::MaskMismatch)));
        let other = t.clone().with_slope(Some(2.0));
        assert!(matches!(energy_1d(&t, &other), Err(Error::SlopeMismatch(..))));
        assert!(matches!(EnergyCase::from_name("sphere"), Err(Error::UnknownCase(_))));
        assert_eq!(EnergyCase::from_name("torus-shift(0.5)").unwrap().target(), 1.0);
    }

    #[test]
    fn binary_roundtrip() {
        let g = GridFunction1D::sample(Complex64::new(0.5, -0.25), 1.5, 9, Some(1.0), |z| {
            if z.re > 1.5 {
                f64::NAN
            } else {
                z.norm()
            }
        })
        .unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        let back = GridFunction1D::read_binary(&buf[..]).unwrap();
        assert_eq!(back.mask(), g.mask());
        assert_eq!(back.slope(), Some(1.0));
        for (a, b) in back.values().iter().zip(g.values()) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
        assert!(GridFunction1D::read_binary(&b"{\"n\":3}\n"[..]).is_err());
    }
}
