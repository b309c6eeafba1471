//! Orchestration: build the system for each parameter point, measure the
//! median generations and the density, assemble scaling rows.

use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use gpscale::analysis::{RowParams, ScalingRow};
use gpscale::density::{
    exhaustive_int_density, gaussian_density, highest_density, monte_carlo_density,
    twisted_gaussian_density, DensityEstimate, MonteCarloOptions,
};
use gpscale::engine::EvolutionParams;
use gpscale::linear::{BudgetModel, SortingSystem, StatementSet};
use gpscale::tree::{
    LengthDistribution, OutputInterpretation, ParitySystem, TreeStatementSet,
};
use gpscale::vector::{
    BinarySystem, GaussianSystem, HighestSystem, LinearVectorSystem, TwistConfig,
    TwistedBinarySystem, TwistedGaussianSystem, TwistedLinearSystem,
};
use gpscale::{run, split_seed, System};

use crate::config::{DensityMethodChoice, ExperimentConfig, ParamPoint, SystemKind};

/// How many integer genome points enumeration will walk before falling
/// back to Monte Carlo under `auto`.
const ENUMERATION_LIMIT: u128 = 10_000_000;

pub struct PointOutcome {
    pub row: ScalingRow,
    pub failures: usize,
    pub elapsed_secs: f64,
}

fn mc_options(config: &ExperimentConfig) -> MonteCarloOptions {
    let d = &config.density;
    MonteCarloOptions {
        target_hits: d.target_hits.unwrap_or(1000),
        max_samples: d.max_samples.unwrap_or(1_000_000_000),
        shard_size: d.shard_size.unwrap_or(8192),
    }
}

fn run_median<S: System>(
    system: &S,
    params: &EvolutionParams,
    n_evolutions: usize,
    seed: u64,
) -> Result<(Option<f64>, usize)> {
    if n_evolutions == 0 {
        return Ok((None, 0));
    }
    let summary = run(system, params, n_evolutions, seed)?;
    Ok((summary.median_generations, summary.failures))
}

/// Density seeds derive from the master seed on a separate stream from
/// the evolution seeds.
fn density_seed(master: u64, point_index: u64, is_d2: bool) -> u64 {
    split_seed(master ^ 0x00DE_7751, point_index * 2 + is_d2 as u64)
}

pub fn run_point(
    config: &ExperimentConfig,
    point: &ParamPoint,
    point_index: usize,
    n_evolutions: usize,
) -> Result<PointOutcome> {
    let start = Instant::now();
    let params = config.engine_params(point)?;
    let evo_seed = split_seed(config.master_seed, point_index as u64);
    let method = config.density.method.unwrap_or(DensityMethodChoice::Auto);
    let mc = mc_options(config);
    let delta = config.kprime_delta.unwrap_or(0.6);

    let n = point.n;
    let needs_d2 = config.system.is_dimensional() && n.is_some();

    let (median_g, failures, density, d2): (
        Option<f64>,
        usize,
        Option<DensityEstimate>,
        Option<f64>,
    );

    match config.system {
        SystemKind::SortLinear => {
            let set = StatementSet::from_index(point.statement_set.unwrap_or(1))?;
            let length = point
                .program_length
                .map(|l| l as usize)
                .unwrap_or_else(|| set.default_program_length());
            let v = point.v.unwrap_or(2) as usize;
            let mut system = SortingSystem::new(set, length, v);
            system.budget = BudgetModel::default();
            (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
            density = sampled_density(&system, &params, method, &mc, point_index, config)?;
            d2 = None;
        }
        SystemKind::ParityTree => {
            let set = TreeStatementSet::from_index(point.statement_set.unwrap_or(1))?;
            let bits = point.n_bits.ok_or_else(|| anyhow!("n_bits required"))? as usize;
            let mut system = ParitySystem::new(set, bits);
            if config.params.subroutines.unwrap_or(false) {
                system = system.with_subroutines();
                system.length_distribution = LengthDistribution::seed_default_with_subroutines();
            }
            if let Some(path) = &config.params.length_distribution {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let dist: LengthDistribution = toml::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                system = system.with_distribution(dist);
            }
            if config.params.output_interpretation.as_deref() == Some("mod2") {
                system.interpretation = OutputInterpretation::Mod2;
            }
            (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
            density = sampled_density(&system, &params, method, &mc, point_index, config)?;
            d2 = None;
        }
        SystemKind::Gaussian => {
            let dims = n.unwrap() as usize;
            let system = GaussianSystem { dims };
            (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
            let t = params.termination_value;
            density = match method {
                DensityMethodChoice::None => None,
                DensityMethodChoice::MonteCarlo => {
                    Some(monte_carlo_density(&system, t, &mc, density_seed(config.master_seed, point_index as u64, false))?)
                }
                _ => Some(gaussian_density(dims as u32, t)?),
            };
            d2 = needs_d2.then(|| gaussian_density(2, t).map(|e| e.density)).transpose()?;
        }
        SystemKind::TwistedGaussian => {
            let dims = n.unwrap() as usize;
            let scale = point.scale_base.unwrap_or(1.5);
            let system = TwistedGaussianSystem {
                twist: TwistConfig { dims, scale_base: scale },
            };
            (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
            let t = params.termination_value;
            density = match method {
                DensityMethodChoice::None => None,
                DensityMethodChoice::MonteCarlo => {
                    Some(monte_carlo_density(&system, t, &mc, density_seed(config.master_seed, point_index as u64, false))?)
                }
                _ => Some(twisted_gaussian_density(dims as u32, t, scale)?),
            };
            d2 = needs_d2
                .then(|| twisted_gaussian_density(2, t, scale).map(|e| e.density))
                .transpose()?;
        }
        SystemKind::Highest => {
            let dims = n.unwrap() as usize;
            let p = point.p.ok_or_else(|| anyhow!("p required"))? as i64;
            let system = HighestSystem { dims, p };
            (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
            density = match method {
                DensityMethodChoice::None => None,
                DensityMethodChoice::MonteCarlo => {
                    Some(monte_carlo_density(&system, params.termination_value, &mc, density_seed(config.master_seed, point_index as u64, false))?)
                }
                _ => Some(highest_density(dims as u32, p as u64)?),
            };
            d2 = needs_d2.then(|| highest_density(2, p as u64).map(|e| e.density)).transpose()?;
        }
        SystemKind::Linear => {
            let dims = n.unwrap() as usize;
            let system = LinearVectorSystem { dims };
            (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
            let t = params.termination_value;
            density = match method {
                DensityMethodChoice::None => None,
                _ => Some(monte_carlo_density(&system, t, &mc, density_seed(config.master_seed, point_index as u64, false))?),
            };
            d2 = if needs_d2 && dims != 2 {
                let sys2 = LinearVectorSystem { dims: 2 };
                Some(
                    monte_carlo_density(&sys2, t, &mc, density_seed(config.master_seed, point_index as u64, true))?
                        .density,
                )
            } else {
                density.as_ref().map(|e| e.density)
            };
        }
        SystemKind::TwistedLinear => {
            let dims = n.unwrap() as usize;
            let scale = point.scale_base.unwrap_or(1.5);
            let system = TwistedLinearSystem {
                twist: TwistConfig { dims, scale_base: scale },
            };
            (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
            let t = params.termination_value;
            density = match method {
                DensityMethodChoice::None => None,
                _ => Some(monte_carlo_density(&system, t, &mc, density_seed(config.master_seed, point_index as u64, false))?),
            };
            d2 = if needs_d2 && dims != 2 {
                let sys2 = TwistedLinearSystem {
                    twist: TwistConfig { dims: 2, scale_base: scale },
                };
                Some(
                    monte_carlo_density(&sys2, t, &mc, density_seed(config.master_seed, point_index as u64, true))?
                        .density,
                )
            } else {
                density.as_ref().map(|e| e.density)
            };
        }
        SystemKind::Binary | SystemKind::TwistedBinary => {
            let dims = n.unwrap() as usize;
            let bits = point.b.ok_or_else(|| anyhow!("b required"))?;
            let t = params.termination_value;
            let coord_values = (1u128 << bits) - 1;
            let space: Option<u128> = coord_values.checked_pow(dims as u32);
            let enumerable =
                space.is_some_and(|s| s <= ENUMERATION_LIMIT);
            match config.system {
                SystemKind::Binary => {
                    let system = BinarySystem::new(dims, bits);
                    (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
                    density = int_density(&system, t, dims, bits, method, enumerable, &mc, config, point_index)?;
                    d2 = if needs_d2 && dims != 2 {
                        let sys2 = BinarySystem::new(2, bits);
                        Some(int_density(&sys2, t, 2, bits, method, true, &mc, config, point_index)?
                            .ok_or_else(|| anyhow!("d2 needs a density method"))?
                            .density)
                    } else {
                        density.as_ref().map(|e| e.density)
                    };
                }
                _ => {
                    let system = TwistedBinarySystem::new(dims, bits)?;
                    (median_g, failures) = run_median(&system, &params, n_evolutions, evo_seed)?;
                    density = int_density(&system, t, dims, bits, method, enumerable, &mc, config, point_index)?;
                    d2 = if needs_d2 && dims != 2 {
                        let sys2 = TwistedBinarySystem::new(2, bits)?;
                        Some(int_density(&sys2, t, 2, bits, method, true, &mc, config, point_index)?
                            .ok_or_else(|| anyhow!("d2 needs a density method"))?
                            .density)
                    } else {
                        density.as_ref().map(|e| e.density)
                    };
                }
            }
        }
    }

    let row_params = RowParams {
        statement_set: point.statement_set,
        v: point.v,
        program_length: point.program_length.or_else(|| {
            (config.system == SystemKind::SortLinear).then(|| {
                StatementSet::from_index(point.statement_set.unwrap_or(1))
                    .map(|s| s.default_program_length() as u32)
                    .unwrap_or(5)
            })
        }),
        n_bits: point.n_bits,
        n: point.n,
        p: point.p,
        b: point.b,
        termination: Some(params.termination_value),
        scale_base: point.scale_base.or_else(|| {
            matches!(config.system, SystemKind::TwistedLinear | SystemKind::TwistedGaussian)
                .then_some(1.5)
        }),
    };
    let kprime_delta = needs_d2.then_some(delta);
    let row = ScalingRow::compute(
        config.system.name(),
        row_params,
        n_evolutions as u64,
        median_g,
        density.as_ref().map(|e| e.density),
        density.as_ref().map(|e| e.method),
        density.as_ref().and_then(|e| e.std_error),
        d2,
        kprime_delta,
    )
    .map_err(|e| anyhow!("{e}"))?;
    Ok(PointOutcome { row, failures, elapsed_secs: start.elapsed().as_secs_f64() })
}

#[allow(clippy::too_many_arguments)]
fn int_density<S>(
    system: &S,
    termination: f64,
    dims: usize,
    bits: u32,
    method: DensityMethodChoice,
    enumerable: bool,
    mc: &MonteCarloOptions,
    config: &ExperimentConfig,
    point_index: usize,
) -> Result<Option<DensityEstimate>>
where
    S: System<Genome = Vec<i64>, Context = ()>,
{
    let hi = (1i64 << bits) - 2;
    match method {
        DensityMethodChoice::None => Ok(None),
        DensityMethodChoice::Exhaustive => Ok(Some(exhaustive_int_density(dims, 0, hi, |g| {
            system.fitness(&g.to_vec(), &()) >= termination
        })?)),
        DensityMethodChoice::MonteCarlo => Ok(Some(monte_carlo_density(
            system,
            termination,
            mc,
            density_seed(config.master_seed, point_index as u64, false),
        )?)),
        DensityMethodChoice::Auto | DensityMethodChoice::Analytic => {
            if enumerable {
                Ok(Some(exhaustive_int_density(dims, 0, hi, |g| {
                    system.fitness(&g.to_vec(), &()) >= termination
                })?))
            } else {
                Ok(Some(monte_carlo_density(
                    system,
                    termination,
                    mc,
                    density_seed(config.master_seed, point_index as u64, false),
                )?))
            }
        }
    }
}

/// Monte Carlo density for the program-like systems (linear sorting and
/// parity trees), which have no closed form.
fn sampled_density<S: System>(
    system: &S,
    params: &EvolutionParams,
    method: DensityMethodChoice,
    mc: &MonteCarloOptions,
    point_index: usize,
    config: &ExperimentConfig,
) -> Result<Option<DensityEstimate>> {
    match method {
        DensityMethodChoice::None => Ok(None),
        DensityMethodChoice::Auto | DensityMethodChoice::MonteCarlo => {
            Ok(Some(monte_carlo_density(
                system,
                params.termination_value,
                mc,
                density_seed(config.master_seed, point_index as u64, false),
            )?))
        }
        other => bail!("density method {other:?} not available for this system"),
    }
}
