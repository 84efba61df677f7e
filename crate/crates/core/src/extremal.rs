//! Weighted P-extremal functions: closed forms for the oracle cases, the L²
//! Bergman surrogate `(1/2n) log(P* G⁻¹ P)`, and the domination check
//! `|p_n| ≤ ‖w^n p_n‖_K · exp(n V*)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::MultiIndexBasis;
use crate::error::{Error, Result};
use crate::geometry::{parse_call, ConvexBody};
use crate::gram::GramSystem;
use crate::measure::{DiscreteMeasure, Point, WeightSpec};

/// Cases with a known extremal function.
#[derive(Clone, Debug)]
pub enum ExtremalCase {
    /// `K = T^d`, `Q = 0`: `V = H_P`.
    TorusHp(ConvexBody),
    /// `K = T^d`, `Q = c`: `V = H_P + c`.
    TorusHpPlusC(ConvexBody, f64),
    /// `K = [-1,1]`, `P = [0,1]`: the Green function with pole at infinity.
    IntervalGreen,
    /// `K` the closed unit disk, `P = [0,1]`: `log⁺|z|`.
    DiskLogPlus,
}

impl ExtremalCase {
    /// Parses `torus-hp`, `torus-hp-plus-c(c)`, `interval-green`,
    /// `disk-logplus`; the torus cases use `body`.
    pub fn from_name(name: &str, body: &ConvexBody) -> Result<Self> {
        let name = name.trim();
        match name {
            "torus-hp" => return Ok(ExtremalCase::TorusHp(body.clone())),
            "interval-green" => return Ok(ExtremalCase::IntervalGreen),
            "disk-logplus" => return Ok(ExtremalCase::DiskLogPlus),
            _ => {}
        }
        if let Ok((head, args)) = parse_call(name) {
            if head == "torus-hp-plus-c" && args.len() == 1 {
                let c = args[0].parse::<f64>().map_err(|e| Error::Parse(format!("{e} in '{name}'")))?;
                return Ok(ExtremalCase::TorusHpPlusC(body.clone(), c));
            }
        }
        Err(Error::UnknownCase(name.to_string()))
    }

    pub fn dim(&self) -> usize {
        match self {
            ExtremalCase::TorusHp(b) | ExtremalCase::TorusHpPlusC(b, _) => b.dim(),
            ExtremalCase::IntervalGreen | ExtremalCase::DiskLogPlus => 1,
        }
    }

    /// `V*(z)`.
    pub fn eval(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        Ok(match self {
            ExtremalCase::TorusHp(b) => b.h_p(z),
            ExtremalCase::TorusHpPlusC(b, c) => b.h_p(z) + c,
            ExtremalCase::IntervalGreen => interval_green(z[0]),
            ExtremalCase::DiskLogPlus => z[0].norm().ln().max(0.0),
        })
    }

    /// Total Laplacian mass of `V*` in one variable (the slope of its
    /// logarithmic growth).
    pub fn slope(&self) -> Result<f64> {
        match self {
            ExtremalCase::TorusHp(b) | ExtremalCase::TorusHpPlusC(b, _) if b.dim() == 1 => {
                Ok(b.vertices().iter().map(|v| crate::geometry::rat_to_f64(&v[0])).fold(0.0, f64::max))
            }
            ExtremalCase::IntervalGreen | ExtremalCase::DiskLogPlus => Ok(1.0),
            _ => Err(Error::UnsupportedDimension(self.dim())),
        }
    }

    /// Off-`K` test points drawn with `seed`.
    pub fn test_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| match self {
                ExtremalCase::IntervalGreen => {
                    // Joukowski image of |w| = rho > 1 lies off [-1,1]
                    let rho: f64 = rng.random_range(1.05..3.0);
                    let w = Complex64::from_polar(rho, rng.random_range(0.0..std::f64::consts::TAU));
                    vec![(w + w.inv()) * 0.5]
                }
                ExtremalCase::DiskLogPlus => {
                    let r: f64 = rng.random_range(1.05..3.0);
                    vec![Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))]
                }
                _ => (0..self.dim())
                    .map(|_| {
                        let r: f64 = if rng.random_bool(0.5) { rng.random_range(1.05..3.0) } else { rng.random_range(0.2..0.95) };
                        Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
                    })
                    .collect(),
            })
            .collect()
    }
}

/// `log|z + sqrt(z²-1)|` on the branch that is `≥ 0`; zero on `[-1,1]`.
pub fn interval_green(z: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let s = (z - one).sqrt() * (z + one).sqrt();
    (z + s).norm().max((z - s).norm()).ln().max(0.0)
}

/// `V*(z)` for a closed-form case.
pub fn closed_form_extremal(case: &ExtremalCase, z: &[Complex64]) -> Result<f64> {
    case.eval(z)
}

/// `(1/2n) log(P(z)* G⁻¹ P(z))`, the Bergman surrogate for `V_{P,K,Q}`.
pub fn extremal_bergman_approx(g: &GramSystem, z: &[Complex64]) -> Result<f64> {
    Ok(g.log_bergman_unweighted(z)? / (2.0 * g.basis().n() as f64))
}

/// The measure `(1/d_n) B_n dμ` on the support of the Gram measure.
pub fn bergman_measure(g: &GramSystem) -> Result<DiscreteMeasure> {
    let b = g.bergman_on_support()?;
    let d_n = g.basis().len() as f64;
    let masses = b.iter().zip(g.measure().masses()).map(|(b, m)| b * m / d_n).collect();
    g.measure().with_masses(masses)
}

/// Result of [`domination_check`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DominationReport {
    pub polynomials: usize,
    pub test_points: usize,
    /// `max |p(z)| / (‖w^n p‖_grid · exp(n V*(z)))` over all samples.
    pub max_ratio: f64,
    /// `max(0, max_ratio - 1)`.
    pub max_violation: f64,
    pub passed: bool,
}

/// Allowed relative excess over the bound.
pub const DOMINATION_TOL: f64 = 1e-6;

/// `log(|p(z)| / (‖w^n p‖_grid exp(n V*(z))))` maximized over `test_points`.
pub fn domination_log_ratio(
    basis: &MultiIndexBasis,
    grid: &DiscreteMeasure,
    weight: &WeightSpec,
    case: &ExtremalCase,
    coeffs: &[Complex64],
    test_points: &[Point],
) -> Result<f64> {
    if coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), got: coeffs.len() });
    }
    let n = basis.n() as f64;
    let log_abs = |z: &[Complex64]| -> Result<f64> {
        let (v, s) = basis.eval_scaled(z)?;
        let p: Complex64 = v.iter().zip(coeffs).map(|(a, c)| a * c).sum();
        Ok(p.norm().ln() + s)
    };
    let on_grid: Vec<f64> = grid
        .points()
        .par_iter()
        .map(|z| Ok(log_abs(z)? - n * weight.q(z)?))
        .collect::<Result<_>>()?;
    let log_norm = on_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ratios: Vec<f64> = test_points
        .par_iter()
        .map(|z| Ok(log_abs(z)? - log_norm - n * case.eval(z)?))
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Random complex Gaussian coefficient vectors, normalized to grid
/// sup-norm 1, tested against `exp(n V*)` at `test_points`.
pub fn domination_check(
    basis: &MultiIndexBasis,
    grid: &DiscreteMeasure,
    weight: &WeightSpec,
    case: &ExtremalCase,
    samples: usize,
    test_points: &[Point],
    seed: u64,
) -> Result<DominationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let coeffs: Vec<Complex64> = (0..basis.len())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        worst = worst.max(domination_log_ratio(basis, grid, weight, case, &coeffs, test_points)?);
    }
    let max_ratio = worst.exp();
    Ok(DominationReport {
        polynomials: samples,
        test_points: test_points.len(),
        max_ratio,
        max_violation: (max_ratio - 1.0).max(0.0),
        passed: max_ratio <= 1.0 + DOMINATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{make_grid, GridSpec, IntervalRule};
    use std::f64::consts::{E, LN_2};

    fn unit() -> ConvexBody {
        ConvexBody::from_name("interval(0,1)").unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_forms() {
        let t = ExtremalCase::from_name("torus-hp", &unit()).unwrap();
        assert!((t.eval(&[Complex64::from_polar(E * E, 0.4)]).unwrap() - 2.0).abs() < 1e-14);
        let g = ExtremalCase::IntervalGreen;
        assert!((g.eval(&[c(2.0, 0.0)]).unwrap() - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-14);
        assert!((g.eval(&[c(-2.0, 0.0)]).unwrap() - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-14);
        assert_eq!(g.eval(&[c(0.3, 0.0)]).unwrap(), 0.0);
        let far = c(1e6, 1e6);
        assert!((interval_green(far) - far.norm().ln() - LN_2).abs() < 1e-9);
        let d = ExtremalCase::from_name("disk-logplus", &unit()).unwrap();
        assert_eq!(d.eval(&[c(0.5, -0.5)]).unwrap(), 0.0);
        let tc = ExtremalCase::from_name("torus-hp-plus-c(0.25)", &unit()).unwrap();
        assert!((tc.eval(&[c(1.0, 0.0)]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(ExtremalCase::from_name("sphere", &unit()), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn green_matches_chebyshev_growth() {
        // (1/n) log|T_n(2)| → log(2+√3)
        let (mut a, mut b) = (1.0f64, 2.0f64);
        for _ in 1..60 {
            let next = 4.0 * b - a;
            a = b;
            b = next;
        }
        assert!((b.ln() / 60.0 - interval_green(c(2.0, 0.0))).abs() < 0.02);
    }

    #[test]
    fn circle_surrogate_bounds() {
        let n = 8;
        let basis = MultiIndexBasis::new(&unit(), n).unwrap();
        let grid = make_grid(&GridSpec::Circle { n: 40 }).unwrap();
        let g = GramSystem::build(&basis, &grid, &WeightSpec::Zero).unwrap();
        let r = 1.7f64;
        let v = extremal_bergman_approx(&g, &[c(r, 0.0)]).unwrap();
        assert!(v >= r.ln() && v <= r.ln() + (9f64).ln() / 16.0);
        let gc = GramSystem::build(&basis, &grid, &WeightSpec::Constant(0.3)).unwrap();
        let vc = extremal_bergman_approx(&gc, &[c(r, 0.0)]).unwrap();
        assert!((vc - v - 0.3).abs() < 1e-12);
    }

    #[test]
    fn interval_surrogate_and_moments() {
        let n = 40;
        let basis = MultiIndexBasis::new(&unit(), n).unwrap();
        let grid = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: 200 }).unwrap();
        let g = GramSystem::build(&basis, &grid, &WeightSpec::Zero).unwrap();
        let v = extremal_bergman_approx(&g, &[c(2.0, 0.0)]).unwrap();
        assert!((v - (2.0 + 3f64.sqrt()).ln()).abs() < 0.05);
        // exact value 1/2 + 1/(4(n+1)) for the arcsine measure; the monomial
        // basis at n = 40 costs about four digits
        for (n, tol) in [(10, 1e-10), (40, 1e-4)] {
            let basis = MultiIndexBasis::new(&unit(), n).unwrap();
            let g = GramSystem::build(&basis, &grid, &WeightSpec::Zero).unwrap();
            let bm = bergman_measure(&g).unwrap();
            assert!((bm.total_mass() - 1.0).abs() < 1e-12);
            let m2: f64 = bm.points().iter().zip(bm.masses()).map(|(p, m)| p[0].re * p[0].re * m).sum();
            assert!((m2 - 0.5 - 0.25 / (n + 1) as f64).abs() < tol, "n={n}: {m2}");
        }
    }

    #[test]
    fn domination_examples() {
        let n = 6;
        let basis = MultiIndexBasis::new(&unit(), n).unwrap();
        let circle = make_grid(&GridSpec::Circle { n: 64 }).unwrap();
        let case = ExtremalCase::TorusHp(unit());
        let pts = case.test_points(50, 3);
        let mut zn = vec![c(0.0, 0.0); 7];
        zn[6] = c(1.0, 0.0);
        let r = domination_log_ratio(&basis, &circle, &WeightSpec::Zero, &case, &zn, &pts).unwrap();
        assert!(r <= 1e-12);
        let mut one = vec![c(0.0, 0.0); 7];
        one[0] = c(2.5, 0.0);
        assert!(domination_log_ratio(&basis, &circle, &WeightSpec::Zero, &case, &one, &pts).unwrap() <= 1e-15);
        let rep = domination_check(&basis, &circle, &WeightSpec::Zero, &case, 20, &pts, 11).unwrap();
        assert!(rep.passed);
    }
}
