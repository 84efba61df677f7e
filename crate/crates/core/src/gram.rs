//! Gram matrices of `Poly(nP)` in `L²(w^{2n} μ)`, their log-determinants
//! (ball volume ratios against the torus ball), Bergman functions and the
//! first/second derivative checks for `f_n(t) = -(1/2l_n) log det G_t`.
//!
//! The Cholesky factor is obtained from Householder QR of the weighted
//! evaluation matrix `A` (`G = A*A`), which avoids squaring the condition
//! number of the monomial basis. A second QR of `A R1⁻¹` gives `R = R2 R1`;
//! Bergman values are computed by row solves with `R1` then `R2`.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::MultiIndexBasis;
use crate::error::{Error, Result};
use crate::linalg::{householder_r, pairwise_sum, pairwise_sum_complex, solve_row_upper, CMatrix, LuFactor};
use crate::measure::{DiscreteMeasure, Point, WeightSpec};

/// Pivots below this multiple of machine epsilon (relative to the largest
/// column of `A`) count as numerically zero.
const RANK_TOL: f64 = 64.0 * f64::EPSILON;

/// Gram system for a basis, measure and weight at the basis degree `n`.
#[derive(Clone, Debug)]
pub struct GramSystem {
    basis: MultiIndexBasis,
    measure: DiscreteMeasure,
    weight: WeightSpec,
    q_values: Vec<f64>,
    gram: CMatrix,
    chol: CMatrix,
    r1: CMatrix,
    r2: CMatrix,
    logdet: f64,
    degenerate: bool,
    jittered: bool,
}

/// `(1/2l_n) log det G` together with the dimension data it was scaled by.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaledLogdet {
    pub value: f64,
    pub logdet: f64,
    pub d_n: u64,
    pub l_n: u64,
}

impl GramSystem {
    /// Assembles `G = Σ mass · w^{2n} · P P*` and factors it. A failed
    /// factorization is retried once with jitter `1e-14 · tr(G)/d_n`; the
    /// system is flagged degenerate if some direction is carried only by
    /// the jitter.
    pub fn build(basis: &MultiIndexBasis, measure: &DiscreteMeasure, weight: &WeightSpec) -> Result<Self> {
        if measure.dim() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: measure.dim() });
        }
        let n = basis.n() as f64;
        let d_n = basis.len();
        let q_values = weight.q_on(measure.points())?;
        // row i of A is f_i · conj(v_i) with P(ζ_i) = e^{s_i} v_i
        let rows: Vec<(Vec<Complex64>, f64)> = measure
            .points()
            .par_iter()
            .zip(measure.masses().par_iter())
            .zip(q_values.par_iter())
            .map(|((p, &m), &q)| -> Result<(Vec<Complex64>, f64)> {
                if m == 0.0 {
                    return Ok((vec![Complex64::new(0.0, 0.0); d_n], 0.0));
                }
                let (v, s) = basis.eval_scaled(p)?;
                Ok((v.iter().map(|x| x.conj()).collect(), (s + 0.5 * m.ln() - n * q).exp()))
            })
            .collect::<Result<_>>()?;
        let npts = rows.len();
        let mut a = CMatrix::zeros(npts, d_n);
        for (i, (r, f)) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                a[(i, j)] = *x * *f;
            }
        }

        // G_jk = Σ_i conj(A_ij) A_ik, pairwise over points
        let upper: Vec<Vec<Complex64>> = (0..d_n)
            .into_par_iter()
            .map(|j| {
                let cj = a.col(j);
                (j..d_n)
                    .map(|k| {
                        let ck = a.col(k);
                        let terms: Vec<Complex64> = cj.iter().zip(ck).map(|(x, y)| x.conj() * y).collect();
                        pairwise_sum_complex(&terms)
                    })
                    .collect()
            })
            .collect();
        let mut gram = CMatrix::zeros(d_n, d_n);
        for j in 0..d_n {
            for k in j..d_n {
                let v = upper[j][k - j];
                gram[(j, k)] = v;
                gram[(k, j)] = v.conj();
            }
        }

        let col_max = (0..d_n)
            .map(|j| a.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let mut m = a;
        let mut r1 = householder_r(m.clone());
        let rank_ok = |r: &CMatrix| (0..d_n).all(|k| r[(k, k)].re.is_finite() && r[(k, k)].re > RANK_TOL * col_max);
        let mut degenerate = false;
        let mut jittered = false;
        if !rank_ok(&r1) {
            jittered = true;
            let trace: f64 = (0..d_n).map(|k| gram[(k, k)].re).sum();
            let eps = 1e-14 * trace / d_n as f64;
            let mut aug = CMatrix::zeros(npts + d_n, d_n);
            for j in 0..d_n {
                aug.col_mut(j)[..npts].copy_from_slice(m.col(j));
                aug[(npts + j, j)] = Complex64::new(eps.sqrt(), 0.0);
            }
            m = aug;
            r1 = householder_r(m.clone());
            degenerate = !(0..d_n).all(|k| {
                let p = r1[(k, k)].re;
                p.is_finite() && p * p > 2.0 * eps
            });
        }
        // second pass on M R1⁻¹, whose columns are orthonormal up to the
        // conditioning error of the first pass
        let r2 = if degenerate {
            CMatrix::identity(d_n)
        } else {
            // solve the unscaled rows exactly as bergman_eval does, so the
            // trace identity holds to roundoff on the support
            let rows: Vec<Vec<Complex64>> = (0..m.rows())
                .into_par_iter()
                .map(|i| match rows.get(i) {
                    Some((v, f)) => solve_row_upper(&r1, v).into_iter().map(|x| x * *f).collect(),
                    None => solve_row_upper(&r1, &(0..d_n).map(|j| m[(i, j)]).collect::<Vec<_>>()),
                })
                .collect();
            let mut m1 = CMatrix::zeros(m.rows(), d_n);
            for (i, r) in rows.iter().enumerate() {
                for (j, x) in r.iter().enumerate() {
                    m1[(i, j)] = *x;
                }
            }
            householder_r(m1)
        };
        let logdet = 2.0 * (0..d_n).map(|k| r1[(k, k)].re.ln() + r2[(k, k)].re.ln()).sum::<f64>();
        let chol = r2.matmul(&r1).conj_transpose();
        Ok(GramSystem {
            basis: basis.clone(),
            measure: measure.clone(),
            weight: weight.clone(),
            q_values,
            gram,
            chol,
            r1,
            r2,
            logdet,
            degenerate,
            jittered,
        })
    }

    pub fn basis(&self) -> &MultiIndexBasis {
        &self.basis
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// Lower-triangular `L` with `G = L L*` and positive real diagonal.
    pub fn chol(&self) -> &CMatrix {
        &self.chol
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// The jitter retry was needed (and succeeded unless degenerate).
    pub fn was_jittered(&self) -> bool {
        self.jittered
    }

    pub fn ensure_nondegenerate(&self) -> Result<()> {
        if self.degenerate {
            Err(Error::DegenerateGram)
        } else {
            Ok(())
        }
    }

    /// `log det G = 2 Σ log L_kk`.
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    /// `(1/2l_n) log det G`.
    pub fn logdet_scaled(&self) -> Result<ScaledLogdet> {
        self.ensure_nondegenerate()?;
        let l_n = self.basis.degree_sum();
        Ok(ScaledLogdet {
            value: self.logdet / (2.0 * l_n as f64),
            logdet: self.logdet,
            d_n: self.basis.len() as u64,
            l_n,
        })
    }

    /// `log(P(z)* G^{-1} P(z))` without the weight at `z`.
    pub fn log_bergman_unweighted(&self, z: &[Complex64]) -> Result<f64> {
        self.ensure_nondegenerate()?;
        let (v, s) = self.basis.eval_scaled(z)?;
        let conj: Vec<Complex64> = v.iter().map(|x| x.conj()).collect();
        let y = solve_row_upper(&self.r2, &solve_row_upper(&self.r1, &conj));
        let norm2 = pairwise_sum(&y.iter().map(|c| c.norm_sqr()).collect::<Vec<_>>());
        Ok(norm2.ln() + 2.0 * s)
    }

    /// `B(z) = w(z)^{2n} P(z)* G^{-1} P(z)`, or the unweighted quadratic
    /// form when `include_weight` is false.
    pub fn bergman_eval(&self, z: &[Complex64], include_weight: bool) -> Result<f64> {
        let lb = self.log_bergman_unweighted(z)?;
        if include_weight {
            let q = self.weight.q(z)?;
            Ok((lb - 2.0 * self.basis.n() as f64 * q).exp())
        } else {
            Ok(lb.exp())
        }
    }

    /// [`bergman_eval`](Self::bergman_eval) over many points, in parallel.
    pub fn bergman_at(&self, points: &[Point], include_weight: bool) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.bergman_eval(p, include_weight)).collect()
    }

    /// Weighted Bergman function on the measure's own points.
    pub fn bergman_on_support(&self) -> Result<Vec<f64>> {
        self.ensure_nondegenerate()?;
        let two_n = 2.0 * self.basis.n() as f64;
        self.measure
            .points()
            .par_iter()
            .zip(self.q_values.par_iter())
            .map(|(p, &q)| Ok((self.log_bergman_unweighted(p)? - two_n * q).exp()))
            .collect()
    }

    /// `Σ mass · B` over the support; equals `d_n` for every measure.
    pub fn bergman_mass(&self) -> Result<f64> {
        let b = self.bergman_on_support()?;
        Ok(pairwise_sum(&b.iter().zip(self.measure.masses()).map(|(x, m)| x * m).collect::<Vec<_>>()))
    }
}

/// Analytic derivative next to its central finite difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    pub rel_err: f64,
}

impl DerivativeCheck {
    pub fn new(analytic: f64, finite_difference: f64) -> Self {
        let scale = analytic.abs().max(finite_difference.abs());
        let rel_err = if scale == 0.0 { 0.0 } else { (analytic - finite_difference).abs() / scale };
        DerivativeCheck { analytic, finite_difference, rel_err }
    }
}

/// The one-parameter family of weights `w_t = w · e^{-t u}` on a fixed
/// measure, with `f_n(t) = -(1/2l_n) log det G_n^{μ,w_t}`.
#[derive(Clone, Debug)]
pub struct WeightFamily<'a> {
    pub basis: &'a MultiIndexBasis,
    pub measure: &'a DiscreteMeasure,
    pub weight: &'a WeightSpec,
    /// Perturbation `u`, one value per measure point.
    pub u: &'a [f64],
}

impl WeightFamily<'_> {
    pub fn gram_at(&self, t: f64) -> Result<GramSystem> {
        let w = self.weight.perturbed(self.measure.points(), self.u, t)?;
        let g = GramSystem::build(self.basis, self.measure, &w)?;
        g.ensure_nondegenerate()?;
        Ok(g)
    }

    pub fn f(&self, t: f64) -> Result<f64> {
        Ok(-self.gram_at(t)?.logdet() / (2.0 * self.basis.degree_sum() as f64))
    }

    /// `f_n'(t) = (n/l_n) ∫ u B_n^{μ,w_t} dμ`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let g = self.gram_at(t)?;
        let b = g.bergman_on_support()?;
        let terms: Vec<f64> = b
            .iter()
            .zip(self.measure.masses())
            .zip(self.u)
            .map(|((b, m), u)| b * m * u)
            .collect();
        Ok(self.basis.n() as f64 / self.basis.degree_sum() as f64 * pairwise_sum(&terms))
    }

    /// Analytic `f_n'(t0)` against a central difference with step `h`.
    pub fn derivative_check(&self, t0: f64, h: f64) -> Result<DerivativeCheck> {
        let analytic = self.derivative(t0)?;
        let fd = (self.f(t0 + h)? - self.f(t0 - h)?) / (2.0 * h);
        Ok(DerivativeCheck::new(analytic, fd))
    }

    /// Second differences `f(t_{i-1}) - 2 f(t_i) + f(t_{i+1})` along `ts`.
    pub fn concavity_scan(&self, ts: &[f64]) -> Result<Vec<f64>> {
        let f = ts.iter().map(|&t| self.f(t)).collect::<Result<Vec<_>>>()?;
        Ok(f.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect())
    }
}

/// Monte Carlo estimate of `Z_n` next to `d_n! det G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZnCrosscheck {
    pub mc_estimate: f64,
    pub std_error: f64,
    pub dn_fact_det_g: f64,
    pub rel_err: f64,
}

/// `Z_n = ∫ |VDM|² Π w^{2n} dμ^{d_n}` by i.i.d. sampling from `μ`, versus
/// `d_n! det G`. Limited to `d_n <= 4`.
pub fn zn_crosscheck(
    basis: &MultiIndexBasis,
    measure: &DiscreteMeasure,
    weight: &WeightSpec,
    trials: usize,
    seed: u64,
) -> Result<ZnCrosscheck> {
    let d_n = basis.len();
    if d_n > 4 {
        return Err(Error::InvalidParameter(format!("zn_crosscheck is limited to d_n <= 4 (got {d_n})")));
    }
    if !measure.is_probability() {
        return Err(Error::InvalidParameter("zn_crosscheck needs a probability measure".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least 2 trials".into()));
    }
    let g = GramSystem::build(basis, measure, weight)?;
    g.ensure_nondegenerate()?;
    let n = basis.n() as f64;
    let cols: Vec<(Vec<Complex64>, f64)> = measure
        .points()
        .iter()
        .map(|p| {
            let (v, s) = basis.eval_scaled(p)?;
            Ok((v, s - n * weight.q(p)?))
        })
        .collect::<Result<_>>()?;
    let sampler = WeightedIndex::new(measure.masses()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(trials);
    for _ in 0..trials {
        let idx: Vec<usize> = (0..d_n).map(|_| sampler.sample(&mut rng)).collect();
        let columns: Vec<Vec<Complex64>> = idx.iter().map(|&i| cols[i].0.clone()).collect();
        let scale: f64 = idx.iter().map(|&i| cols[i].1).sum();
        let lu = LuFactor::new(CMatrix::from_columns(d_n, &columns));
        values.push((2.0 * (lu.log_abs_det() + scale)).exp());
    }
    let mean = pairwise_sum(&values) / trials as f64;
    let var = pairwise_sum(&values.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>()) / (trials - 1) as f64;
    let fact: f64 = (1..=d_n).map(|k| k as f64).product();
    let exact = fact * g.logdet().exp();
    Ok(ZnCrosscheck {
        mc_estimate: mean,
        std_error: (var / trials as f64).sqrt(),
        dn_fact_det_g: exact,
        rel_err: (mean - exact).abs() / exact,
    })
}
