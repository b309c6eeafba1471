//! Density of working genomes: Monte Carlo estimation for program-like
//! systems, closed forms for the Gaussian, twisted-Gaussian and "highest"
//! landscapes, exhaustive enumeration for small integer genome spaces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::analysis::DensityMethod;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, split_seed};
use crate::system::System;

/// A density figure with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub density: f64,
    pub method: DensityMethod,
    /// Monte Carlo only.
    pub hits: Option<u64>,
    /// Monte Carlo only.
    pub samples: Option<u64>,
    /// Monte Carlo only: `sqrt(d * (1 - d) / samples)`.
    pub std_error: Option<f64>,
    /// Set when a closed form was evaluated outside its exact regime (the
    /// working sphere spills outside the genome cube). The value is then
    /// an overestimate; Monte Carlo is the fallback oracle.
    pub approximate: bool,
}

impl DensityEstimate {
    pub fn monte_carlo(hits: u64, samples: u64) -> Self {
        let density = hits as f64 / samples as f64;
        DensityEstimate {
            density,
            method: DensityMethod::MonteCarlo,
            hits: Some(hits),
            samples: Some(samples),
            std_error: Some((density * (1.0 - density) / samples as f64).sqrt()),
            approximate: false,
        }
    }

    pub fn analytic(density: f64, approximate: bool) -> Self {
        DensityEstimate {
            density,
            method: DensityMethod::Analytic,
            hits: None,
            samples: None,
            std_error: None,
            approximate,
        }
    }
}

/// Monte Carlo sampling controls. Sampling proceeds in fixed-size shards,
/// each with its own split seed, so shards can run on any number of
/// threads and still produce the identical estimate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    /// Keep sampling until this many working genomes have been seen.
    pub target_hits: u64,
    /// Hard cap on the number of samples.
    pub max_samples: u64,
    pub shard_size: u64,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        MonteCarloOptions {
            target_hits: 1000,
            max_samples: 1_000_000_000,
            shard_size: 8192,
        }
    }
}

fn sample_shard<S: System>(
    system: &S,
    termination_value: f64,
    seed: u64,
    shard_index: u64,
    shard_samples: u64,
) -> (u64, u64) {
    let mut rng = rng_from_seed(split_seed(seed, shard_index));
    let mut hits = 0u64;
    for _ in 0..shard_samples {
        let genome = system.random_genome(&mut rng);
        let ctx = system.generation_context(&mut rng);
        if system.fitness(&genome, &ctx) >= termination_value {
            hits += 1;
        }
    }
    (hits, shard_samples)
}

/// Estimate the density of genomes whose fitness reaches
/// `termination_value`, sampling until `target_hits` hits or
/// `max_samples` samples. Each sample draws a fresh genome and a fresh
/// evaluation context.
///
/// Sampling stops at the exact sample where the target hit count is
/// reached (the boundary shard is replayed serially to find it), so the
/// estimate does not depend on the shard size or thread count.
pub fn monte_carlo_density<S: System>(
    system: &S,
    termination_value: f64,
    opts: &MonteCarloOptions,
    seed: u64,
) -> Result<DensityEstimate> {
    if opts.target_hits == 0 || opts.max_samples == 0 || opts.shard_size == 0 {
        return Err(Error::InvalidArgument(
            "target_hits, max_samples and shard_size must all be >= 1".into(),
        ));
    }
    const BATCH: u64 = 16;
    let mut total_hits = 0u64;
    let mut total_samples = 0u64;
    let mut shard_index = 0u64;

    'outer: while total_samples < opts.max_samples && total_hits < opts.target_hits {
        let batch: Vec<(u64, u64)> = (0..BATCH)
            .into_par_iter()
            .map(|i| {
                let idx = shard_index + i;
                let remaining = opts
                    .max_samples
                    .saturating_sub(idx.saturating_mul(opts.shard_size));
                let size = remaining.min(opts.shard_size);
                if size == 0 {
                    (0, 0)
                } else {
                    sample_shard(system, termination_value, seed, idx, size)
                }
            })
            .collect();
        for (offset, (hits, samples)) in batch.into_iter().enumerate() {
            if samples == 0 {
                break 'outer;
            }
            if total_hits + hits >= opts.target_hits {
                // Replay this shard serially to find the exact sample at
                // which the target is reached.
                let idx = shard_index + offset as u64;
                let mut rng = rng_from_seed(split_seed(seed, idx));
                for s in 1..=samples {
                    let genome = system.random_genome(&mut rng);
                    let ctx = system.generation_context(&mut rng);
                    if system.fitness(&genome, &ctx) >= termination_value {
                        total_hits += 1;
                        if total_hits == opts.target_hits {
                            total_samples += s;
                            break 'outer;
                        }
                    }
                }
                unreachable!("shard replay must reproduce its hit count");
            }
            total_hits += hits;
            total_samples += samples;
        }
        shard_index += BATCH;
    }

    if total_hits == 0 {
        return Err(Error::ZeroDensity {
            samples: total_samples,
            upper_bound: 3.0 / total_samples as f64,
        });
    }
    Ok(DensityEstimate::monte_carlo(total_hits, total_samples))
}

/// Volume of the n-dimensional sphere of radius `r`:
/// `(2*pi)^(n/2) * r^n / (2*4*...*n)` for even `n`,
/// `2 * (2*pi)^((n-1)/2) * r^n / (1*3*...*n)` for odd `n`.
pub fn sphere_volume(n: u32, r: f64) -> f64 {
    assert!(n >= 1, "dimension must be >= 1");
    let two_pi = 2.0 * std::f64::consts::PI;
    if n % 2 == 0 {
        let mut denom = 1.0;
        let mut k = 2u32;
        while k <= n {
            denom *= k as f64;
            k += 2;
        }
        two_pi.powi(n as i32 / 2) * r.powi(n as i32) / denom
    } else {
        let mut denom = 1.0;
        let mut k = 1u32;
        while k <= n {
            denom *= k as f64;
            k += 2;
        }
        2.0 * two_pi.powi((n as i32 - 1) / 2) * r.powi(n as i32) / denom
    }
}

/// Closed-form density of the Gaussian landscape at termination value `t`:
/// the working set is the sphere of radius `sqrt(-ln t)` inside the cube
/// `[-1, 1)^n`, so `D = V(n, r) / 2^n`. Exact while `r <= 1`; for larger
/// radii the sphere spills outside the cube and the figure is flagged
/// approximate.
pub fn gaussian_density(n: u32, t: f64) -> Result<DensityEstimate> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "termination value {t} must be in (0, 1)"
        )));
    }
    let r = (-t.ln()).sqrt();
    let d = sphere_volume(n, r) / 2f64.powi(n as i32);
    Ok(DensityEstimate::analytic(d, r > 1.0))
}

/// Closed-form density of the twisted Gaussian landscape: the working set
/// is the rotated ellipsoid `|S*Q*x| <= r`; rotation preserves volume and
/// the scaling divides it by `scale_base^(n(n-1)/2)`.
pub fn twisted_gaussian_density(n: u32, t: f64, scale_base: f64) -> Result<DensityEstimate> {
    if scale_base <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "scale base {scale_base} must be positive"
        )));
    }
    let base = gaussian_density(n, t)?;
    let exponent = (n as i32) * (n as i32 - 1) / 2;
    let d = base.density / scale_base.powi(exponent);
    // The ellipsoid's longest semi-axis is r over the smallest scale.
    let r = (-t.ln()).sqrt();
    let min_scale = if scale_base >= 1.0 {
        1.0
    } else {
        scale_base.powi(n as i32 - 1)
    };
    Ok(DensityEstimate::analytic(d, r / min_scale > 1.0))
}

/// Exact density of the "highest" landscape: `p^-n`.
pub fn highest_density(n: u32, p: u64) -> Result<DensityEstimate> {
    if n < 1 || p < 1 {
        return Err(Error::InvalidArgument(
            "highest density needs n >= 1 and p >= 1".into(),
        ));
    }
    Ok(DensityEstimate::analytic((p as f64).powi(-(n as i32)), false))
}

/// Exact density over a finite integer genome space by full enumeration of
/// `[lo, hi]^dims`. Intended for spaces up to ~10^7 points; larger spaces
/// should fall back to Monte Carlo.
pub fn exhaustive_int_density(
    dims: usize,
    lo: i64,
    hi: i64,
    mut working: impl FnMut(&[i64]) -> bool,
) -> Result<DensityEstimate> {
    if hi < lo || dims == 0 {
        return Err(Error::InvalidArgument("empty genome space".into()));
    }
    let per_dim = (hi - lo + 1) as u128;
    let total = per_dim.checked_pow(dims as u32).ok_or_else(|| {
        Error::InvalidArgument("genome space too large to enumerate".into())
    })?;
    if total > 100_000_000 {
        return Err(Error::InvalidArgument(format!(
            "genome space of {total} points is too large to enumerate"
        )));
    }
    let mut coords = vec![lo; dims];
    let mut hits = 0u128;
    loop {
        if working(&coords) {
            hits += 1;
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == dims {
                let d = hits as f64 / total as f64;
                return Ok(DensityEstimate::analytic(d, false));
            }
            if coords[k] < hi {
                coords[k] += 1;
                break;
            }
            coords[k] = lo;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::EvoRng;
    use crate::vector::{GaussianSystem, HighestSystem, TwistedBinarySystem};
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn sphere_volume_unit_balls() {
        // Frozen unit-ball volumes: pi, 4pi/3, pi^2/2, 8pi^2/15, pi^3/6...
        let pi = std::f64::consts::PI;
        let expected = [
            (1, 2.0),
            (2, pi),
            (3, 4.0 * pi / 3.0),
            (4, pi * pi / 2.0),
            (5, 8.0 * pi * pi / 15.0),
            (6, pi.powi(3) / 6.0),
            (7, 16.0 * pi.powi(3) / 105.0),
            (8, pi.powi(4) / 24.0),
            (9, 32.0 * pi.powi(4) / 945.0),
            (10, pi.powi(5) / 120.0),
        ];
        for (n, v) in expected {
            assert_relative_eq!(sphere_volume(n, 1.0), v, max_relative = 1e-12);
        }
        // Scaling law V(n, r) = r^n * V(n, 1).
        for n in 1..=10u32 {
            for r in [0.3, 0.8326, 2.5] {
                assert_relative_eq!(
                    sphere_volume(n, r),
                    r.powi(n as i32) * sphere_volume(n, 1.0),
                    max_relative = 1e-12
                );
            }
        }
        // The radius that feeds the twisted checks: r^2 = ln 2.
        let r = (0.5f64.ln().abs()).sqrt();
        assert_relative_eq!(sphere_volume(4, r), 2.370955, max_relative = 1e-5);
    }

    #[test]
    fn sphere_volume_matches_monte_carlo() {
        // Independent geometric oracle for both parity branches: fraction
        // of uniform cube points inside the sphere.
        let mut rng: EvoRng = crate::rng::rng_from_seed(123);
        for n in [2u32, 3] {
            let r = 0.9;
            let samples = 400_000;
            let mut hits = 0u64;
            for _ in 0..samples {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if x.iter().map(|v| v * v).sum::<f64>() <= r * r {
                    hits += 1;
                }
            }
            let mc = hits as f64 / samples as f64 * 2f64.powi(n as i32);
            let se = (mc * (2f64.powi(n as i32) - mc) / samples as f64).sqrt();
            let analytic = sphere_volume(n, r);
            assert!(
                (mc - analytic).abs() < 4.0 * se.max(1e-3),
                "n={n}: mc {mc} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn gaussian_density_published_points() {
        let cases = [
            (2, 0.99, 7.89e-3),
            (4, 0.99, 3.12e-5),
            (10, 0.999_999_9, 2.49e-38),
        ];
        for (n, t, expected) in cases {
            let d = gaussian_density(n, t).unwrap();
            assert!(!d.approximate);
            assert_relative_eq!(d.density, expected, max_relative = 5e-3);
        }
    }

    #[test]
    fn twisted_gaussian_density_published_points() {
        let cases = [
            (2, 0.99, 5.26e-3),
            (4, 0.5, 0.01301),
            (6, 0.5, 6.14e-5),
        ];
        for (n, t, expected) in cases {
            let d = twisted_gaussian_density(n, t, 1.5).unwrap();
            assert_relative_eq!(d.density, expected, max_relative = 5e-3);
        }
    }

    #[test]
    fn highest_density_examples() {
        assert_relative_eq!(
            highest_density(2, 50).unwrap().density,
            4.0e-4,
            max_relative = 1e-12
        );
        assert_eq!(highest_density(1, 1).unwrap().density, 1.0);
        assert_relative_eq!(
            highest_density(10, 100).unwrap().density,
            1.0e-20,
            max_relative = 1e-12
        );
    }

    #[test]
    fn density_monotone_in_difficulty() {
        // Non-increasing in t for the Gaussian family, in p and n for the
        // highest landscape.
        let mut prev = f64::INFINITY;
        for t in [0.5, 0.9, 0.99, 0.999] {
            let d = gaussian_density(3, t).unwrap().density;
            assert!(d < prev);
            prev = d;
        }
        let mut prev = f64::INFINITY;
        for p in [2, 10, 100] {
            let d = highest_density(3, p).unwrap().density;
            assert!(d < prev);
            prev = d;
        }
        let mut prev = f64::INFINITY;
        for n in [1, 2, 4, 8] {
            let d = highest_density(n, 7).unwrap().density;
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn spill_regime_is_flagged_and_overestimates() {
        // n = 1, t = 0.2: radius 1.27 exceeds the cube, so the closed form
        // exceeds 1 while the true density (everything works) is 1.0.
        let d = gaussian_density(1, 0.2).unwrap();
        assert!(d.approximate);
        assert!(d.density > 1.0);
        let sys = GaussianSystem { dims: 1 };
        let mc = monte_carlo_density(
            &sys,
            0.2,
            &MonteCarloOptions { target_hits: 500, max_samples: 10_000, shard_size: 256 },
            9,
        )
        .unwrap();
        assert_eq!(mc.density, 1.0);
        // In-range radii are exact.
        assert!(!gaussian_density(1, 0.5).unwrap().approximate);
    }

    #[test]
    fn monte_carlo_matches_exact_highest_density() {
        // n = 1, p = 10: exact density 0.1.
        let sys = HighestSystem { dims: 1, p: 10 };
        let est = monte_carlo_density(&sys, 1.0, &MonteCarloOptions::default(), 5).unwrap();
        let se = est.std_error.unwrap();
        assert!((est.density - 0.1).abs() < 3.0 * se, "{} vs 0.1", est.density);
        assert_eq!(est.hits, Some(1000));
    }

    #[test]
    fn monte_carlo_trivial_threshold_hits_every_sample() {
        let sys = HighestSystem { dims: 2, p: 5 };
        let est = monte_carlo_density(
            &sys,
            0.0, // every genome works
            &MonteCarloOptions { target_hits: 100, max_samples: 100_000, shard_size: 64 },
            1,
        )
        .unwrap();
        assert_eq!(est.density, 1.0);
        assert_eq!(est.samples, Some(100));
    }

    #[test]
    fn monte_carlo_gaussian_agrees_with_closed_form() {
        let sys = GaussianSystem { dims: 2 };
        let analytic = gaussian_density(2, 0.99).unwrap().density;
        let est = monte_carlo_density(
            &sys,
            0.99,
            &MonteCarloOptions { target_hits: 400, max_samples: 10_000_000, shard_size: 8192 },
            42,
        )
        .unwrap();
        let se = est.std_error.unwrap();
        assert!(
            (est.density - analytic).abs() < 3.0 * se,
            "mc {} analytic {analytic} se {se}",
            est.density
        );
    }

    #[test]
    fn monte_carlo_zero_hits_is_an_error_with_upper_bound() {
        let sys = HighestSystem { dims: 8, p: 1000 };
        let err = monte_carlo_density(
            &sys,
            8.0,
            &MonteCarloOptions { target_hits: 10, max_samples: 5_000, shard_size: 512 },
            3,
        )
        .unwrap_err();
        match err {
            Error::ZeroDensity { samples, upper_bound } => {
                assert_eq!(samples, 5_000);
                assert_relative_eq!(upper_bound, 3.0 / 5_000.0);
            }
            other => panic!("expected ZeroDensity, got {other:?}"),
        }
    }

    #[test]
    fn monte_carlo_is_shard_and_thread_invariant() {
        let sys = GaussianSystem { dims: 2 };
        let opts = MonteCarloOptions { target_hits: 200, max_samples: 1_000_000, shard_size: 4096 };
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| monte_carlo_density(&sys, 0.9, &opts, 11).unwrap());
        let b = pool4.install(|| monte_carlo_density(&sys, 0.9, &opts, 11).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn odd_dimension_closed_form_agrees_with_monte_carlo() {
        let sys = GaussianSystem { dims: 3 };
        let analytic = gaussian_density(3, 0.9).unwrap();
        assert!(!analytic.approximate);
        let est = monte_carlo_density(
            &sys,
            0.9,
            &MonteCarloOptions { target_hits: 1000, max_samples: 10_000_000, shard_size: 8192 },
            7,
        )
        .unwrap();
        let se = est.std_error.unwrap();
        assert!(
            (est.density - analytic.density).abs() < 3.0 * se,
            "mc {} analytic {} se {se}",
            est.density,
            analytic.density
        );
    }

    #[test]
    fn exhaustive_enumeration_twisted_binary() {
        let sys = TwistedBinarySystem::new(2, 3).unwrap();
        let d = exhaustive_int_density(2, 0, 6, |g| sys.fitness_of(g) >= 8).unwrap();
        assert_relative_eq!(d.density, 2.0 / 49.0, max_relative = 1e-12);
        assert_eq!(d.method, DensityMethod::Analytic);
    }
}
