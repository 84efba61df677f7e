//! Monomial bases of `Poly(nP)` and their dimension data.

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Rational};

/// Threshold on `deg · log|z|` below which plain complex powers are safe.
const PLAIN_LOG_LIMIT: f64 = 300.0;

/// Ordered exponent set `nP ∩ Z^d`, i.e. the monomials `z^α(j)` spanning
/// `Poly(nP)`.
#[derive(Clone, Debug)]
pub struct MultiIndexBasis {
    body: ConvexBody,
    n: u64,
    exponents: Vec<Vec<u32>>,
}

/// `d_n`, `l_n` and the normalized ratio `f_n = (l_n/d_n) / (n d/(d+1))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimInfo {
    pub n: u64,
    pub d_n: u64,
    pub l_n: u64,
    pub f_n: Rational,
    pub n_d: Rational,
}

/// One basis entry in log form: `log|z^α|` and `arg z^α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogEntry {
    pub log_abs: f64,
    pub phase: f64,
}

impl MultiIndexBasis {
    pub fn new(body: &ConvexBody, n: u64) -> Result<Self> {
        let exponents = body.lattice_points(n)?;
        Ok(MultiIndexBasis { body: body.clone(), n, exponents })
    }

    /// A copy with the basis reordered by `perm` (entry `i` of the result is
    /// entry `perm[i]` of `self`). The canonical order is lost; this exists
    /// for basis-independence checks.
    pub fn reordered(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.exponents.len()];
        if perm.len() != seen.len() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter("not a permutation of the basis".into()));
        }
        Ok(MultiIndexBasis {
            body: self.body.clone(),
            n: self.n,
            exponents: perm.iter().map(|&p| self.exponents[p].clone()).collect(),
        })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// `l_n = Σ_J |J|`.
    pub fn degree_sum(&self) -> u64 {
        self.exponents.iter().map(|e| e.iter().map(|&x| x as u64).sum::<u64>()).sum()
    }

    fn max_exponent(&self, coord: usize) -> u32 {
        self.exponents.iter().map(|e| e[coord]).max().unwrap_or(0)
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        Ok(())
    }

    /// `[z^α(1), ..., z^α(d_n)]`. Errors if an entry is not finite; use
    /// [`eval_log`](Self::eval_log) or [`eval_scaled`](Self::eval_scaled)
    /// for large `|z|`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        let powers: Vec<Vec<Complex64>> = (0..self.dim())
            .map(|c| {
                let m = self.max_exponent(c) as usize;
                let mut p = Vec::with_capacity(m + 1);
                p.push(Complex64::new(1.0, 0.0));
                for k in 0..m {
                    p.push(p[k] * z[c]);
                }
                p
            })
            .collect();
        let out: Vec<Complex64> = self
            .exponents
            .iter()
            .map(|e| e.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (c, &k)| acc * powers[c][k as usize]))
            .collect();
        if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("basis evaluation overflowed; use log mode".into()));
        }
        Ok(out)
    }

    /// Per-entry `(log|z^α|, arg z^α)`. Exact zero entries have
    /// `log_abs = -inf`; `z_i^0 = 1` even at `z_i = 0`.
    pub fn eval_log(&self, z: &[Complex64]) -> Result<Vec<LogEntry>> {
        self.check_point(z)?;
        let logs: Vec<f64> = z.iter().map(|c| c.norm().ln()).collect();
        let args: Vec<f64> = z.iter().map(|c| c.arg()).collect();
        Ok(self
            .exponents
            .iter()
            .map(|e| {
                let mut log_abs = 0.0;
                let mut phase = 0.0;
                for (c, &k) in e.iter().enumerate() {
                    if k > 0 {
                        log_abs += k as f64 * logs[c];
                        phase += k as f64 * args[c];
                    }
                }
                LogEntry { log_abs, phase }
            })
            .collect())
    }

    /// Basis vector divided by its largest modulus: returns `(v, s)` with
    /// `P(z) = e^s · v` and `max_j |v_j| = 1`.
    pub fn eval_scaled(&self, z: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        self.check_point(z)?;
        let max_deg = self.exponents.iter().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0) as f64;
        let big = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max_deg * big.ln().max(0.0) < PLAIN_LOG_LIMIT {
            let v = self.eval(z)?;
            let m = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if m > 0.0 && m.is_finite() {
                return Ok((v.iter().map(|x| x / m).collect(), m.ln()));
            }
        }
        let logs = self.eval_log(z)?;
        let s = logs.iter().map(|e| e.log_abs).fold(f64::NEG_INFINITY, f64::max);
        let v = logs
            .iter()
            .map(|e| {
                if e.log_abs == f64::NEG_INFINITY {
                    Complex64::zero()
                } else {
                    Complex64::from_polar((e.log_abs - s).exp(), e.phase)
                }
            })
            .collect();
        Ok((v, s))
    }
}

/// Exact dimension data of `Poly(nP)`.
pub fn dims(body: &ConvexBody, n: u64) -> Result<DimInfo> {
    let pts = body.lattice_points(n)?;
    let d = body.dim() as i128;
    let d_n = pts.len() as u64;
    let l_n: u64 = pts.iter().map(|e| e.iter().map(|&x| x as u64).sum::<u64>()).sum();
    let f_n = Rational::new(l_n as i128 * (d + 1), d_n as i128 * n as i128 * d);
    let n_d = body.volume_and_cp()?.n_d;
    Ok(DimInfo { n, d_n, l_n, f_n, n_d })
}

/// `lim f_n = ((d+1)/d) · C_P / Vol(P)`.
pub fn a_limit(body: &ConvexBody) -> Result<Rational> {
    let v = body.volume_and_cp()?;
    let d = body.dim() as i128;
    Ok(Rational::new(d + 1, d) * v.c_p / v.volume)
}
