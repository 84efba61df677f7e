//! Weighted Vandermonde determinants and discrete weighted Fekete sets.
//!
//! Everything is carried in log space: each basis column is stored as a
//! unit-max vector together with its log scale, which already includes the
//! weight factor `w(ζ)^n = e^{-n Q(ζ)}`. The search itself runs in a basis
//! orthonormalized on the grid (two rounds of QR of the weighted evaluation
//! matrix), so monomial ill-conditioning only enters through a constant
//! `log|det R|` shared by every configuration.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::MultiIndexBasis;
use crate::error::{Error, Result};
use crate::linalg::{householder_r, solve_row_upper, CMatrix, LuFactor};
use crate::measure::{point_key, DiscreteMeasure, Point, WeightSpec};

/// Exchange steps must improve `log|W|` by more than this.
pub const EXCHANGE_TOL: f64 = 1e-12;

/// Greedy candidates (rows of an orthonormal matrix) with a residual below
/// this are treated as linearly dependent.
const RESIDUAL_TOL: f64 = 64.0 * f64::EPSILON;

pub const DEFAULT_MAX_PASSES: usize = 50;

/// A discrete weighted Fekete configuration.
#[derive(Clone, Debug, Serialize)]
pub struct FeketeResult {
    #[serde(serialize_with = "serialize_points")]
    pub points: Vec<Point>,
    /// Positions of `points` in the grid.
    pub indices: Vec<usize>,
    /// `log|W(points)|`.
    pub log_wvdm: f64,
    /// `exp(log_wvdm / l_n)`.
    pub delta_wn: f64,
    /// Number of exchange passes performed.
    pub iterations: usize,
    /// `log_wvdm` after seeding (entry 0) and after every exchange pass.
    pub pass_log: Vec<f64>,
    pub d_n: usize,
    pub l_n: u64,
}

pub(crate) fn serialize_points<S: serde::Serializer>(points: &[Point], s: S) -> std::result::Result<S::Ok, S::Error> {
    let flat: Vec<Vec<[f64; 2]>> = points.iter().map(|p| p.iter().map(|c| [c.re, c.im]).collect()).collect();
    flat.serialize(s)
}

/// Column `P(ζ)` as `(unit-max vector, log scale including -n Q(ζ))`.
fn weighted_column(basis: &MultiIndexBasis, p: &[Complex64], q: f64) -> Result<(Vec<Complex64>, f64)> {
    let (v, s) = basis.eval_scaled(p)?;
    Ok((v, s - basis.n() as f64 * q))
}

/// `log|det[e_i(ζ_j)]| + n Σ_j log w(ζ_j)`; `-inf` when the configuration
/// is singular.
pub fn log_abs_wvdm(points: &[Point], basis: &MultiIndexBasis, weight: &WeightSpec) -> Result<f64> {
    let d_n = basis.len();
    if points.len() != d_n {
        return Err(Error::DimensionMismatch { expected: d_n, got: points.len() });
    }
    let q = weight.q_on(points)?;
    let mut columns = Vec::with_capacity(d_n);
    let mut scale = 0.0;
    for (p, &qj) in points.iter().zip(&q) {
        let (v, s) = weighted_column(basis, p, qj)?;
        columns.push(v);
        scale += s;
    }
    let lu = LuFactor::new(CMatrix::from_columns(d_n, &columns));
    if lu.is_singular() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(lu.log_abs_det() + scale)
}

/// Index of the largest finite score, lowest index on ties.
fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_finite() && best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Greedy (Leja-style) seeding followed by single-point exchange passes.
pub fn fekete_search(
    grid: &DiscreteMeasure,
    weight: &WeightSpec,
    basis: &MultiIndexBasis,
    max_passes: usize,
) -> Result<FeketeResult> {
    if grid.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: grid.dim() });
    }
    let d_n = basis.len();
    let available = grid.distinct_points();
    if available < d_n {
        return Err(Error::InsufficientPoints { needed: d_n, available });
    }
    let q = weight.q_on(grid.points())?;
    let cols: Vec<(Vec<Complex64>, f64)> = grid
        .points()
        .par_iter()
        .zip(q.par_iter())
        .map(|(p, &qi)| weighted_column(basis, p, qi))
        .collect::<Result<_>>()?;
    let (rows, shift) = orthonormalize(cols, d_n)?;

    let mut selected = greedy_seed(&rows, d_n)?;
    let mut lu = factor(&rows, &selected);
    let mut current = lu.log_abs_det();
    if !current.is_finite() {
        return Err(Error::AllSingular);
    }

    let keys: Vec<_> = grid.points().iter().map(|p| point_key(p)).collect();
    let mut pass_log = vec![current];
    let mut passes = 0;
    while passes < max_passes {
        passes += 1;
        let start = current;
        for j in 0..d_n {
            let mut e = vec![Complex64::new(0.0, 0.0); d_n];
            e[j] = Complex64::new(1.0, 0.0);
            let y = lu.solve_transpose(&e);
            let taken: std::collections::HashSet<&Vec<(u64, u64)>> = selected.iter().map(|&i| &keys[i]).collect();
            let gains: Vec<f64> = rows
                .par_iter()
                .enumerate()
                .map(|(i, v)| {
                    if taken.contains(&keys[i]) {
                        return f64::NEG_INFINITY;
                    }
                    let r: Complex64 = y.iter().zip(v).map(|(a, b)| a * b).sum();
                    r.norm().ln()
                })
                .collect();
            let Some(best) = argmax(&gains) else { continue };
            if gains[best] <= EXCHANGE_TOL {
                continue;
            }
            let old = selected[j];
            selected[j] = best;
            let fresh = factor(&rows, &selected);
            let value = fresh.log_abs_det();
            if value.is_finite() && value > current {
                lu = fresh;
                current = value;
            } else {
                selected[j] = old;
            }
        }
        pass_log.push(current);
        if current - start <= EXCHANGE_TOL {
            break;
        }
    }

    let current = current + shift;
    for v in &mut pass_log {
        *v += shift;
    }
    let l_n = basis.degree_sum();
    Ok(FeketeResult {
        points: selected.iter().map(|&i| grid.points()[i].clone()).collect(),
        indices: selected,
        log_wvdm: current,
        delta_wn: (current / l_n as f64).exp(),
        iterations: passes,
        pass_log,
        d_n,
        l_n,
    })
}

/// Replaces the weighted columns by the rows of `Q` in `M = Q R` (`M` has
/// the columns as rows) and returns the log-determinant offset, so that
/// `log|W(S)| = log|det Q_S| + offset` for every subset `S`.
fn orthonormalize(cols: Vec<(Vec<Complex64>, f64)>, d_n: usize) -> Result<(Vec<Vec<Complex64>>, f64)> {
    let s_ref = cols.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let mut shift = d_n as f64 * s_ref;
    let mut rows: Vec<Vec<Complex64>> =
        cols.into_iter().map(|(v, s)| v.into_iter().map(|x| x * (s - s_ref).exp()).collect()).collect();
    for _ in 0..2 {
        let mut m = CMatrix::zeros(rows.len(), d_n);
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                m[(i, j)] = *x;
            }
        }
        let col_max = (0..d_n).map(|j| norm(m.col(j))).fold(0.0, f64::max);
        let r = householder_r(m);
        if !(0..d_n).all(|k| r[(k, k)].re > RESIDUAL_TOL * col_max) {
            return Err(Error::AllSingular);
        }
        shift += (0..d_n).map(|k| r[(k, k)].re.ln()).sum::<f64>();
        rows = rows.par_iter().map(|row| solve_row_upper(&r, row)).collect();
    }
    Ok((rows, shift))
}

fn factor(rows: &[Vec<Complex64>], selected: &[usize]) -> LuFactor {
    let columns: Vec<Vec<Complex64>> = selected.iter().map(|&i| rows[i].clone()).collect();
    LuFactor::new(CMatrix::from_columns(columns.len(), &columns))
}

/// Pivoted Gram–Schmidt on the orthonormalized rows: at each step pick the
/// candidate with the largest residual.
fn greedy_seed(rows: &[Vec<Complex64>], d_n: usize) -> Result<Vec<usize>> {
    let mut residuals: Vec<Vec<Complex64>> = rows.to_vec();
    let mut selected = Vec::with_capacity(d_n);
    for _ in 0..d_n {
        let scores: Vec<f64> = residuals
            .par_iter()
            .map(|r| {
                let nr = norm(r);
                if nr <= RESIDUAL_TOL {
                    f64::NEG_INFINITY
                } else {
                    nr
                }
            })
            .collect();
        let best = argmax(&scores).ok_or(Error::AllSingular)?;
        let nb = norm(&residuals[best]);
        let dir: Vec<Complex64> = residuals[best].iter().map(|x| x / nb).collect();
        residuals.par_iter_mut().for_each(|r| {
            let c: Complex64 = dir.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in r.iter_mut().zip(&dir) {
                *x -= c * a;
            }
        });
        selected.push(best);
    }
    Ok(selected)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Exhaustive maximum of `log|W|` over all `d_n`-subsets of the grid's
/// distinct points. Only for small problems (`C(N, d_n)` determinants).
pub fn exhaustive_fekete(grid: &DiscreteMeasure, weight: &WeightSpec, basis: &MultiIndexBasis) -> Result<(f64, Vec<usize>)> {
    let d_n = basis.len();
    let mut seen = std::collections::HashSet::new();
    let distinct: Vec<usize> = (0..grid.len()).filter(|&i| seen.insert(point_key(&grid.points()[i]))).collect();
    if distinct.len() < d_n {
        return Err(Error::InsufficientPoints { needed: d_n, available: distinct.len() });
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut idx: Vec<usize> = (0..d_n).collect();
    loop {
        let pts: Vec<Point> = idx.iter().map(|&k| grid.points()[distinct[k]].clone()).collect();
        let v = log_abs_wvdm(&pts, basis, weight)?;
        if v > best.0 {
            best = (v, idx.iter().map(|&k| distinct[k]).collect());
        }
        // next combination in lexicographic order
        let m = distinct.len();
        let Some(pos) = (0..d_n).rev().find(|&p| idx[p] < m - d_n + p) else { break };
        idx[pos] += 1;
        for q in pos + 1..d_n {
            idx[q] = idx[q - 1] + 1;
        }
    }
    if !best.0.is_finite() {
        return Err(Error::AllSingular);
    }
    Ok(best)
}

/// Counting-measure moments of a point cloud, per coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub k: u32,
    pub coord: usize,
    /// `(1/N) Σ Re(z^k)`.
    pub power_moment: f64,
    /// `|(1/N) Σ z^k|`.
    pub fourier_magnitude: f64,
}

pub const MAX_MOMENT: u32 = 8;

/// Moments `k = 1..=8` of the counting measure, for every coordinate (the
/// marginals when `d > 1`).
pub fn fekete_moments(points: &[Point]) -> Result<Vec<MomentRow>> {
    let first = points.first().ok_or_else(|| Error::InvalidParameter("no points".into()))?;
    let dim = first.len();
    let n = points.len() as f64;
    let mut rows = Vec::new();
    for coord in 0..dim {
        for k in 1..=MAX_MOMENT {
            let sum: Complex64 = points.iter().map(|p| p[coord].powu(k)).sum::<Complex64>() / n;
            rows.push(MomentRow { k, coord, power_moment: sum.re, fourier_magnitude: sum.norm() });
        }
    }
    Ok(rows)
}

pub fn moments_csv(rows: &[MomentRow]) -> String {
    use crate::output::{csv, fmt_f64};
    csv(
        &["k", "coord", "power_moment", "fourier_magnitude"],
        rows.iter().map(|r| {
            vec![r.k.to_string(), r.coord.to_string(), fmt_f64(r.power_moment), fmt_f64(r.fourier_magnitude)]
        }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TfdRow {
    pub n: u64,
    pub d_n: usize,
    pub l_n: u64,
    pub log_wvdm: f64,
    pub delta_wn: f64,
}

/// `δ^{w,n}` on the grid for `n = 1..=n_max`.
pub fn tfd_table(
    body: &crate::geometry::ConvexBody,
    grid: &DiscreteMeasure,
    weight: &WeightSpec,
    n_max: u64,
    max_passes: usize,
) -> Result<Vec<TfdRow>> {
    (1..=n_max)
        .map(|n| {
            let basis = MultiIndexBasis::new(body, n)?;
            let r = fekete_search(grid, weight, &basis, max_passes)?;
            Ok(TfdRow { n, d_n: r.d_n, l_n: r.l_n, log_wvdm: r.log_wvdm, delta_wn: r.delta_wn })
        })
        .collect()
}

pub fn tfd_csv(rows: &[TfdRow]) -> String {
    use crate::output::{csv, fmt_f64};
    csv(
        &["n", "d_n", "l_n", "log_wvdm", "delta_wn"],
        rows.iter().map(|r| {
            vec![r.n.to_string(), r.d_n.to_string(), r.l_n.to_string(), fmt_f64(r.log_wvdm), fmt_f64(r.delta_wn)]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexBody;
    use crate::measure::{make_grid, GridSpec, IntervalRule};
    use std::f64::consts::PI;

    fn basis(n: u64) -> MultiIndexBasis {
        MultiIndexBasis::new(&ConvexBody::from_name("interval(0,1)").unwrap(), n).unwrap()
    }

    fn real(x: f64) -> Point {
        vec![Complex64::new(x, 0.0)]
    }

    #[test]
    fn wvdm_examples() {
        let b = basis(1);
        let v = log_abs_wvdm(&[real(0.0), real(1.0)], &b, &WeightSpec::Zero).unwrap();
        assert!(v.abs() < 1e-15);
        let roots: Vec<Point> = (0..3).map(|k| vec![Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)]).collect();
        let v = log_abs_wvdm(&roots, &basis(2), &WeightSpec::Zero).unwrap();
        assert!((v - 1.5 * 3f64.ln()).abs() < 1e-13);
        let c = 0.4;
        let vc = log_abs_wvdm(&roots, &basis(2), &WeightSpec::Constant(c)).unwrap();
        assert!((vc - v + 2.0 * 3.0 * c).abs() < 1e-13);
        assert_eq!(log_abs_wvdm(&[real(0.5), real(0.5)], &b, &WeightSpec::Zero).unwrap(), f64::NEG_INFINITY);
        assert!(log_abs_wvdm(&[real(0.5)], &b, &WeightSpec::Zero).is_err());
    }

    #[test]
    fn linear_fekete_on_uniform_interval() {
        let grid = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Uniform, n: 201 }).unwrap();
        let r = fekete_search(&grid, &WeightSpec::Zero, &basis(1), DEFAULT_MAX_PASSES).unwrap();
        let mut xs: Vec<f64> = r.points.iter().map(|p| p[0].re).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![-1.0, 1.0]);
        assert!((r.log_wvdm - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn quadratic_fekete_on_circle() {
        let grid = make_grid(&GridSpec::Circle { n: 300 }).unwrap();
        let r = fekete_search(&grid, &WeightSpec::Zero, &basis(2), DEFAULT_MAX_PASSES).unwrap();
        let target = 1.5 * 3f64.ln();
        assert!((r.log_wvdm - target).abs() <= 0.01 * target);
        let rc = fekete_search(&grid, &WeightSpec::Constant(0.7), &basis(2), DEFAULT_MAX_PASSES).unwrap();
        assert_eq!(r.indices, rc.indices);
        assert!((rc.delta_wn - r.delta_wn * (-0.7f64 * 2.0 * 3.0 / 3.0).exp()).abs() < 1e-13);
    }

    #[test]
    fn insufficient_and_singular_grids() {
        let grid = DiscreteMeasure::uniform(vec![real(0.1), real(0.1), real(0.3)], "dup").unwrap();
        assert!(matches!(
            fekete_search(&grid, &WeightSpec::Zero, &basis(2), 5),
            Err(Error::InsufficientPoints { needed: 3, available: 2 })
        ));
    }

    #[test]
    fn matches_exhaustive_search() {
        let grids = [
            GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Uniform, n: 60 },
            GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: 60 },
            GridSpec::Circle { n: 60 },
        ];
        for spec in &grids {
            let grid = make_grid(spec).unwrap();
            for n in 1..=3 {
                for w in [WeightSpec::Zero, WeightSpec::Quadratic(0.4)] {
                    let (best, _) = exhaustive_fekete(&grid, &w, &basis(n)).unwrap();
                    let r = fekete_search(&grid, &w, &basis(n), DEFAULT_MAX_PASSES).unwrap();
                    assert!((r.log_wvdm - best).abs() < 1e-10, "{spec:?} n={n}: {} vs {best}", r.log_wvdm);
                }
            }
        }
    }

    #[test]
    fn symmetric_grid_gives_symmetric_set() {
        // an even Chebyshev grid has no node at 0, so the middle point of an
        // odd-sized set is a tie between ±x_min
        for (size, tol) in [(301, 1e-12), (300, PI / 300.0)] {
            let grid = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: size }).unwrap();
            for n in [5, 8] {
                let r = fekete_search(&grid, &WeightSpec::Quadratic(0.2), &basis(n), DEFAULT_MAX_PASSES).unwrap();
                let mut xs: Vec<f64> = r.points.iter().map(|p| p[0].re).collect();
                xs.sort_by(f64::total_cmp);
                for (a, b) in xs.iter().zip(xs.iter().rev()) {
                    assert!((a + b).abs() < tol, "N={size} n={n}: {xs:?}");
                }
            }
        }
    }

    #[test]
    fn moments_examples() {
        let roots: Vec<Point> = (0..9).map(|k| vec![Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 9.0)]).collect();
        for row in fekete_moments(&roots).unwrap() {
            assert!(row.fourier_magnitude < 1e-14);
        }
        let z = Complex64::new(0.3, -1.1);
        for row in fekete_moments(&[vec![z]]).unwrap() {
            assert!((row.power_moment - z.powu(row.k).re).abs() < 1e-14);
        }
        assert!(fekete_moments(&[]).is_err());
    }

    #[test]
    fn passes_are_monotone() {
        let grid = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: 400 }).unwrap();
        let r = fekete_search(&grid, &WeightSpec::Quadratic(0.5), &basis(12), DEFAULT_MAX_PASSES).unwrap();
        assert!(r.pass_log.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.iterations >= 1);
        let direct = log_abs_wvdm(&r.points, &basis(12), &WeightSpec::Quadratic(0.5)).unwrap();
        assert!((direct - r.log_wvdm).abs() < 1e-8 * direct.abs());
    }
}
