//! P-optimal (D-optimal) measures on a candidate grid via the multiplicative
//! algorithm, with the Kiefer–Wolfowitz gap as stopping certificate, and the
//! Fekete/optimal determinant sandwich.

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::MultiIndexBasis;
use crate::error::{Error, Result};
use crate::fekete::{fekete_search, serialize_points};
use crate::gram::GramSystem;
use crate::linalg::pairwise_sum;
use crate::measure::{DiscreteMeasure, Point, WeightSpec};
use crate::output::{csv, fmt_f64};

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITERS: usize = 5000;
/// Atoms lighter than this are dropped from the returned measure.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Outcome of [`optimal_measure`].
#[derive(Clone, Debug, Serialize)]
pub struct DesignResult {
    /// The pruned optimal probability measure.
    #[serde(skip)]
    pub measure: DiscreteMeasure,
    /// Final masses on every grid point (before pruning).
    pub masses_on_grid: Vec<f64>,
    /// Weighted Bergman function on the grid at the final iterate.
    pub b_values: Vec<f64>,
    /// `max_grid B - d_n`.
    pub kw_gap: f64,
    /// Grid index of the maximum of `B`.
    pub argmax: usize,
    /// `log det G` of the returned measure.
    pub logdet: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest decrease of `log det G` between consecutive iterates.
    pub max_logdet_drop: f64,
    /// Largest deviation of the total mass from 1 before renormalizing.
    pub max_mass_drift: f64,
    pub d_n: usize,
}

impl DesignResult {
    /// CSV `re_1,im_1,...,mass,B` over the whole grid.
    pub fn to_csv(&self, grid: &DiscreteMeasure) -> String {
        let mut header: Vec<String> = Vec::new();
        for c in 1..=grid.dim() {
            header.push(format!("re_{c}"));
            header.push(format!("im_{c}"));
        }
        header.push("mass".into());
        header.push("B".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        csv(
            &header,
            grid.points().iter().zip(&self.masses_on_grid).zip(&self.b_values).map(|((p, m), b)| {
                let mut row: Vec<String> = p.iter().flat_map(|z| [fmt_f64(z.re), fmt_f64(z.im)]).collect();
                row.push(fmt_f64(*m));
                row.push(fmt_f64(*b));
                row
            }),
        )
    }
}

/// Kiefer–Wolfowitz gap of a probability measure on a set of candidates.
#[derive(Clone, Debug, Serialize)]
pub struct KwGap {
    pub gap: f64,
    pub max_b: f64,
    pub argmax: usize,
    #[serde(serialize_with = "serialize_point")]
    pub argmax_point: Point,
}

fn serialize_point<S: serde::Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    serialize_points(std::slice::from_ref(p), s)
}

/// `max_{candidates} B_n^{μ,w} - d_n` for a probability measure `μ`.
pub fn kw_gap(measure: &DiscreteMeasure, weight: &WeightSpec, basis: &MultiIndexBasis, candidates: &[Point]) -> Result<KwGap> {
    if !measure.is_probability() {
        return Err(Error::InvalidParameter("kw_gap needs a probability measure".into()));
    }
    let g = GramSystem::build(basis, measure, weight)?;
    let b = g.bergman_at(candidates, true)?;
    let (argmax, max_b) = argmax(&b).ok_or_else(|| Error::InvalidParameter("no candidate points".into()))?;
    Ok(KwGap { gap: max_b - basis.len() as f64, max_b, argmax, argmax_point: candidates[argmax].clone() })
}

fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

/// Multiplicative algorithm `mass_i ← mass_i B(ζ_i)/d_n` from the uniform
/// probability on the grid, stopped once `kw_gap ≤ tol·d_n`.
pub fn optimal_measure(
    grid: &DiscreteMeasure,
    weight: &WeightSpec,
    basis: &MultiIndexBasis,
    tol: f64,
    max_iters: usize,
) -> Result<DesignResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive (got {tol})")));
    }
    let d_n = basis.len();
    let dn = d_n as f64;
    if grid.distinct_points() < d_n {
        return Err(Error::DegenerateGram);
    }
    let mut masses = vec![1.0 / grid.len() as f64; grid.len()];
    let mut prev_logdet = f64::NEG_INFINITY;
    let mut max_drop: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    let mut iterations = 0;
    loop {
        let mu = grid.with_masses(masses.clone())?;
        let g = GramSystem::build(basis, &mu, weight)?;
        g.ensure_nondegenerate()?;
        if prev_logdet.is_finite() {
            max_drop = max_drop.max(prev_logdet - g.logdet());
        }
        prev_logdet = g.logdet();
        let b = g.bergman_on_support()?;
        let (arg, max_b) = argmax(&b).expect("grid is nonempty");
        let gap = max_b - dn;
        let converged = gap <= tol * dn;
        if converged || iterations >= max_iters {
            let measure = mu.pruned(PRUNE_THRESHOLD)?;
            let logdet = GramSystem::build(basis, &measure, weight)?.logdet();
            return Ok(DesignResult {
                measure,
                masses_on_grid: masses,
                b_values: b,
                kw_gap: gap,
                argmax: arg,
                logdet,
                iterations,
                converged,
                max_logdet_drop: max_drop,
                max_mass_drift: max_drift,
                d_n,
            });
        }
        for (m, bi) in masses.iter_mut().zip(&b) {
            *m *= bi / dn;
        }
        let total = pairwise_sum(&masses);
        max_drift = max_drift.max((total - 1.0).abs());
        for m in &mut masses {
            *m /= total;
        }
        iterations += 1;
    }
}

/// Both sides of `d_n^{-d_n} W² ≤ det G_opt ≤ W²/d_n!` in log form, with
/// `W` the grid Fekete value. The lower slack uses the Kiefer–Wolfowitz
/// bracket `log det G* ≤ log det G + kw_gap`.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub d_n: usize,
    pub l_n: u64,
    pub log_wvdm: f64,
    pub delta_wn: f64,
    pub logdet_opt: f64,
    pub kw_gap: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub holds: bool,
}

pub fn tfd_sandwich(
    grid: &DiscreteMeasure,
    weight: &WeightSpec,
    basis: &MultiIndexBasis,
    tol: f64,
    max_iters: usize,
    max_passes: usize,
) -> Result<SandwichReport> {
    let fek = fekete_search(grid, weight, basis, max_passes)?;
    let opt = optimal_measure(grid, weight, basis, tol, max_iters)?;
    let dn = basis.len() as f64;
    let ln_fact: f64 = (1..=basis.len()).map(|k| (k as f64).ln()).sum();
    let log_lower = 2.0 * fek.log_wvdm - dn * dn.ln();
    let log_upper = 2.0 * fek.log_wvdm - ln_fact;
    let slack_lower = opt.logdet + opt.kw_gap.max(0.0) - log_lower;
    let slack_upper = log_upper - opt.logdet;
    Ok(SandwichReport {
        d_n: basis.len(),
        l_n: basis.degree_sum(),
        log_wvdm: fek.log_wvdm,
        delta_wn: fek.delta_wn,
        logdet_opt: opt.logdet,
        kw_gap: opt.kw_gap,
        log_lower,
        log_upper,
        slack_lower,
        slack_upper,
        holds: slack_lower >= 0.0 && slack_upper >= 0.0,
    })
}

/// `|(1/μ(K)) Σ mass z^k|` for `k = 1..=k_max` in the first coordinate.
pub fn fourier_modes(measure: &DiscreteMeasure, k_max: u32) -> Vec<f64> {
    let total = measure.total_mass();
    (1..=k_max)
        .map(|k| {
            let s: Complex64 = measure.points().iter().zip(measure.masses()).map(|(p, m)| p[0].powu(k) * *m).sum();
            (s / total).norm()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexBody;
    use crate::measure::{make_grid, GridSpec, IntervalRule};

    fn basis(n: u64) -> MultiIndexBasis {
        MultiIndexBasis::new(&ConvexBody::from_name("interval(0,1)").unwrap(), n).unwrap()
    }

    #[test]
    fn circle_uniform_is_optimal() {
        let grid = make_grid(&GridSpec::Circle { n: 13 }).unwrap();
        let r = optimal_measure(&grid, &WeightSpec::Zero, &basis(5), DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
        assert!(r.kw_gap.abs() <= 1e-12);
        assert!(r.measure.masses().iter().all(|m| (m - 1.0 / 13.0).abs() < 1e-15));
        assert!(fourier_modes(&r.measure, 4).iter().all(|&f| f < 1e-12));
    }

    #[test]
    fn linear_design_on_interval() {
        let grid = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Uniform, n: 21 }).unwrap();
        let r = optimal_measure(&grid, &WeightSpec::Zero, &basis(1), 1e-9, 100_000).unwrap();
        assert!(r.converged);
        assert!((r.masses_on_grid[0] - 0.5).abs() < 1e-6);
        assert!((r.masses_on_grid[20] - 0.5).abs() < 1e-6);
        assert!(r.logdet.abs() < 1e-6);
        assert!(r.max_logdet_drop <= 1e-12);
        let s = tfd_sandwich(&grid, &WeightSpec::Zero, &basis(1), 1e-9, 100_000, 10).unwrap();
        assert!(s.holds);
        assert!(s.log_lower.abs() < 1e-14);
        assert!((s.log_upper - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn kw_gap_nonnegative_and_trace() {
        let grid = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: 50 }).unwrap();
        let b = basis(6);
        let k = kw_gap(&grid, &WeightSpec::Quadratic(0.3), &b, grid.points()).unwrap();
        assert!(k.gap >= -1e-9);
        let tol = 1e-6;
        let r = optimal_measure(&grid, &WeightSpec::Quadratic(0.3), &b, tol, DEFAULT_MAX_ITERS).unwrap();
        assert!(r.converged);
        let trace: f64 = r.masses_on_grid.iter().zip(&r.b_values).map(|(m, b)| m * b).sum();
        assert!((trace - 7.0).abs() < 1e-9);
        for (m, bv) in r.masses_on_grid.iter().zip(&r.b_values) {
            if *m > 1e-8 {
                assert!(*bv >= 7.0 - 10.0 * tol * 7.0);
            }
        }
        assert!(r.max_logdet_drop <= 1e-12);
    }

    #[test]
    fn too_few_points() {
        let grid = make_grid(&GridSpec::Circle { n: 3 }).unwrap();
        assert!(matches!(
            optimal_measure(&grid, &WeightSpec::Zero, &basis(4), DEFAULT_TOL, 10),
            Err(Error::DegenerateGram)
        ));
    }
}
