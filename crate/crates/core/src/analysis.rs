//! Scaling statistics: medians, `K = G*sqrt(D)`, `K'(delta)` and the
//! one-parameter fit of `delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Median of a non-empty list: middle element of the sorted values, or the
/// mean of the two middle elements for even length (hence half-integer
/// medians like 771.5 over integer samples).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("median of empty list".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// `K = G * sqrt(D)`: the scaling statistic for program-like systems.
pub fn k_value(g: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::InvalidArgument(format!("density {d} must be in (0, 1]")));
    }
    if g < 0.0 {
        return Err(Error::InvalidArgument(format!("median generations {g} must be >= 0")));
    }
    Ok(g * d.sqrt())
}

/// `K'(delta) = G * sqrt(D2) / ((n + delta) * ln(n + delta))`: the scaling
/// statistic for parallel systems, with `D2` the density of the
/// two-dimensional instance.
pub fn k_prime(g: f64, d2: f64, n: f64, delta: f64) -> Result<f64> {
    if n + delta <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "n + delta = {} must exceed 1",
            n + delta
        )));
    }
    if !(d2 > 0.0 && d2 <= 1.0) {
        return Err(Error::InvalidArgument(format!("density {d2} must be in (0, 1]")));
    }
    let scale = (n + delta) * (n + delta).ln();
    Ok(g * d2.sqrt() / scale)
}

/// Result of fitting `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaFit {
    pub delta: f64,
    /// Coefficient of variation of `K'(delta)` across the fitted rows.
    pub residual_cv: f64,
}

fn cv_of_kprime(rows: &[(f64, f64, f64)], delta: f64) -> f64 {
    let ks: Vec<f64> = rows
        .iter()
        .map(|&(n, g, d2)| g * d2.sqrt() / ((n + delta) * (n + delta).ln()))
        .collect();
    let mean = ks.iter().sum::<f64>() / ks.len() as f64;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    let var = ks.iter().map(|k| (k - mean) * (k - mean)).sum::<f64>() / ks.len() as f64;
    var.sqrt() / mean.abs()
}

/// Fit the `delta` that makes `K'(delta)` flattest across dimensions:
/// rows are `(n, G, D2)` triples sharing every other parameter. The fit
/// minimizes the coefficient of variation of `K'` over a dense grid on
/// `(max(1 - min_n, -1) , 10]` followed by local refinement.
pub fn fit_f2_delta(rows: &[(f64, f64, f64)]) -> Result<DeltaFit> {
    let mut ns: Vec<f64> = rows.iter().map(|r| r.0).collect();
    ns.sort_by(|a, b| a.total_cmp(b));
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::InvalidArgument(
            "delta fit needs at least two distinct dimension counts".into(),
        ));
    }
    let min_n = ns[0];
    let lo = (1.0 - min_n).max(-1.0) + 1e-6;
    let hi = 10.0;
    let coarse = 2_000;
    let mut best = (lo, cv_of_kprime(rows, lo));
    for i in 1..=coarse {
        let delta = lo + (hi - lo) * (i as f64) / (coarse as f64);
        let cv = cv_of_kprime(rows, delta);
        if cv < best.1 {
            best = (delta, cv);
        }
    }
    // Golden-section refinement around the best grid point.
    let step = (hi - lo) / coarse as f64;
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let phi = 0.618_033_988_749_895_f64;
    for _ in 0..60 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if cv_of_kprime(rows, x1) < cv_of_kprime(rows, x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let delta = 0.5 * (a + b);
    Ok(DeltaFit {
        delta,
        residual_cv: cv_of_kprime(rows, delta),
    })
}

/// How a density figure was obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    MonteCarlo,
    Analytic,
}

impl std::fmt::Display for DensityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityMethod::MonteCarlo => write!(f, "monte_carlo"),
            DensityMethod::Analytic => write!(f, "analytic"),
        }
    }
}

/// Parameters identifying one measured point; fields not applicable to the
/// system at hand stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RowParams {
    pub statement_set: Option<u32>,
    pub v: Option<u32>,
    pub program_length: Option<u32>,
    pub n_bits: Option<u32>,
    pub n: Option<u32>,
    pub p: Option<u64>,
    pub b: Option<u32>,
    pub termination: Option<f64>,
    pub scale_base: Option<f64>,
}

/// One measured point of a scaling experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub system: String,
    pub params: RowParams,
    pub evolutions: u64,
    pub median_g: Option<f64>,
    pub density: Option<f64>,
    pub density_method: Option<DensityMethod>,
    pub density_stderr: Option<f64>,
    /// Density of the same system at n = 2 (used by `K'`).
    pub d2: Option<f64>,
    pub k: Option<f64>,
    pub kprime_delta: Option<f64>,
    pub kprime: Option<f64>,
}

impl ScalingRow {
    /// Assemble a row, deriving `K` and `K'` from the measured quantities
    /// so the algebraic invariants hold by construction.
    pub fn compute(
        system: impl Into<String>,
        params: RowParams,
        evolutions: u64,
        median_g: Option<f64>,
        density: Option<f64>,
        density_method: Option<DensityMethod>,
        density_stderr: Option<f64>,
        d2: Option<f64>,
        kprime_delta: Option<f64>,
    ) -> Result<Self> {
        let k = match (median_g, density) {
            (Some(g), Some(d)) => Some(k_value(g, d)?),
            _ => None,
        };
        let kprime = match (median_g, d2, params.n, kprime_delta) {
            (Some(g), Some(d2), Some(n), Some(delta)) => {
                Some(k_prime(g, d2, n as f64, delta)?)
            }
            _ => None,
        };
        Ok(ScalingRow {
            system: system.into(),
            params,
            evolutions,
            median_g,
            density,
            density_method,
            density_stderr,
            d2,
            k,
            kprime_delta: kprime.is_some().then_some(kprime_delta).flatten(),
            kprime,
        })
    }
}
