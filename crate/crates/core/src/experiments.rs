//! Ball-volume-ratio experiments: `L_n = -((d+1) n_d / (2n d_n)) ·
//! (log det G_n(E, μ, nφ) - log det G_n(E', μ', nφ'))` against an energy
//! target.

use serde::{Deserialize, Serialize};

use crate::basis::MultiIndexBasis;
use crate::energy::{run_energy_case, EnergyCase, DEFAULT_EXTENT, DEFAULT_N};
use crate::error::{Error, Result};
use crate::geometry::{rat_to_f64, ConvexBody};
use crate::gram::GramSystem;
use crate::measure::{make_grid, DiscreteMeasure, GridSpec, WeightSpec};
use crate::output::{csv, fmt_f64};

/// One side of the ratio: a grid (name or JSON object) and a weight name.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BvrSide {
    pub grid: serde_json::Value,
    #[serde(default = "zero_weight")]
    pub weight: String,
}

fn zero_weight() -> String {
    "zero".into()
}

/// What `L_n` is compared with.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BvrTarget {
    /// A fixed number.
    Value { value: f64 },
    /// A named energy case computed on an `n × n` lattice.
    Energy {
        case: String,
        #[serde(default = "default_energy_n")]
        n: usize,
        #[serde(default = "default_extent")]
        extent: f64,
    },
    /// `(d+1) n_d (c - c')` for two constant weights.
    ConstantWeight,
    #[default]
    None,
}

fn default_energy_n() -> usize {
    DEFAULT_N
}

fn default_extent() -> f64 {
    DEFAULT_EXTENT
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BvrConfig {
    pub body: String,
    #[serde(default = "one")]
    pub n_min: u64,
    pub n_max: u64,
    pub first: BvrSide,
    pub second: BvrSide,
    #[serde(default)]
    pub target: BvrTarget,
}

fn one() -> u64 {
    1
}

impl BvrConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: BvrConfig = serde_json::from_str(text)?;
        if c.n_min == 0 || c.n_min > c.n_max {
            return Err(Error::InvalidParameter(format!("empty n-range {}..={}", c.n_min, c.n_max)));
        }
        Ok(c)
    }
}

fn side_measure(side: &BvrSide) -> Result<(DiscreteMeasure, WeightSpec)> {
    let spec = match &side.grid {
        serde_json::Value::String(s) => GridSpec::parse(s)?,
        other => GridSpec::parse(&other.to_string())?,
    };
    Ok((make_grid(&spec)?, WeightSpec::from_name(&side.weight)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BvrRow {
    pub n: u64,
    pub d_n: usize,
    pub logdet: f64,
    pub logdet_prime: f64,
    pub l_n: f64,
    pub target: f64,
    pub gap: f64,
}

/// `-((d+1) n_d / (2n d_n)) (logdet - logdet')`.
pub fn ball_volume_ratio(body: &ConvexBody, n: u64, d_n: usize, logdet: f64, logdet_prime: f64) -> Result<f64> {
    let d = body.dim() as f64;
    let n_d = rat_to_f64(&body.volume_and_cp()?.n_d);
    Ok(-((d + 1.0) * n_d / (2.0 * n as f64 * d_n as f64)) * (logdet - logdet_prime))
}

pub fn bvr_target(config: &BvrConfig, body: &ConvexBody) -> Result<f64> {
    Ok(match &config.target {
        BvrTarget::Value { value } => *value,
        BvrTarget::None => f64::NAN,
        BvrTarget::Energy { case, n, extent } => {
            if body.dim() != 1 {
                return Err(Error::UnsupportedDimension(body.dim()));
            }
            run_energy_case(&EnergyCase::from_name(case)?, *n, *extent)?.energy
        }
        BvrTarget::ConstantWeight => {
            let c = WeightSpec::from_name(&config.first.weight)?.constant_value();
            let c2 = WeightSpec::from_name(&config.second.weight)?.constant_value();
            let (Some(c), Some(c2)) = (c, c2) else {
                return Err(Error::InvalidParameter("constant_weight target needs two constant weights".into()));
            };
            let d = body.dim() as f64;
            (d + 1.0) * rat_to_f64(&body.volume_and_cp()?.n_d) * (c - c2)
        }
    })
}

/// Runs the configured experiment for every `n` in range.
pub fn bvr(config: &BvrConfig) -> Result<Vec<BvrRow>> {
    let body = ConvexBody::from_name(&config.body)?;
    let (mu, w) = side_measure(&config.first)?;
    let (mu2, w2) = side_measure(&config.second)?;
    let target = bvr_target(config, &body)?;
    (config.n_min..=config.n_max)
        .map(|n| {
            let basis = MultiIndexBasis::new(&body, n)?;
            let g = GramSystem::build(&basis, &mu, &w)?;
            let g2 = GramSystem::build(&basis, &mu2, &w2)?;
            g.ensure_nondegenerate()?;
            g2.ensure_nondegenerate()?;
            let l_n = ball_volume_ratio(&body, n, basis.len(), g.logdet(), g2.logdet())?;
            Ok(BvrRow {
                n,
                d_n: basis.len(),
                logdet: g.logdet(),
                logdet_prime: g2.logdet(),
                l_n,
                target,
                gap: l_n - target,
            })
        })
        .collect()
}

pub fn bvr_csv(rows: &[BvrRow]) -> String {
    csv(
        &["n", "L_n", "target", "gap"],
        rows.iter().map(|r| vec![r.n.to_string(), fmt_f64(r.l_n), fmt_f64(r.target), fmt_f64(r.gap)]),
    )
}
