//! Self-consistent length distributions: iterate until populations drawn
//! from the distribution evolve working programs whose lengths follow the
//! same distribution.

use serde::{Deserialize, Serialize};

use super::{LengthDistribution, ParitySystem};
use crate::engine::{run, EvolutionParams};
use crate::error::{Error, Result};
use crate::rng::split_seed;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SelfConsistOptions {
    /// Evolutions per iteration; their working programs feed the measured
    /// histogram.
    pub evolutions_per_iteration: usize,
    pub max_iterations: usize,
    /// Stop once successive distributions are within this total-variation
    /// distance.
    pub tv_threshold: f64,
    /// Abort the iteration when fewer working programs than this were
    /// collected.
    pub min_working: usize,
    /// Weight of the previous distribution in the blend with the measured
    /// one.
    pub blend: f64,
}

impl Default for SelfConsistOptions {
    fn default() -> Self {
        SelfConsistOptions {
            evolutions_per_iteration: 50,
            max_iterations: 10,
            tv_threshold: 0.05,
            min_working: 10,
            blend: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfConsistentResult {
    pub distribution: LengthDistribution,
    /// Distance between the last two distributions; only approximate
    /// consistency is achievable in practice.
    pub achieved_tv: f64,
    pub iterations: usize,
    /// Successive total-variation distances, one per iteration.
    pub tv_trace: Vec<f64>,
}

/// Generic fixed-point loop: `measure` maps a candidate distribution (and
/// an iteration seed) to the node counts (and subroutine counts, when
/// tracked) of the working programs it produces.
pub fn iterate_to_fixed_point<F>(
    initial: LengthDistribution,
    opts: &SelfConsistOptions,
    seed: u64,
    mut measure: F,
) -> Result<SelfConsistentResult>
where
    F: FnMut(&LengthDistribution, u64) -> Result<(Vec<usize>, Option<Vec<usize>>)>,
{
    let mut current = initial;
    let mut tv_trace = Vec::new();
    for iteration in 0..opts.max_iterations {
        let (lengths, sub_counts) = measure(&current, split_seed(seed, iteration as u64))?;
        if lengths.len() < opts.min_working {
            return Err(Error::InsufficientData(format!(
                "iteration {iteration} collected {} working programs, need {}",
                lengths.len(),
                opts.min_working
            )));
        }
        let measured = LengthDistribution::from_observations(&lengths, sub_counts.as_deref());
        let next = current.blend(&measured, opts.blend);
        let tv = current.tv_distance(&next);
        tv_trace.push(tv);
        current = next;
        if tv < opts.tv_threshold {
            return Ok(SelfConsistentResult {
                distribution: current,
                achieved_tv: tv,
                iterations: iteration + 1,
                tv_trace,
            });
        }
    }
    let achieved_tv = tv_trace.last().copied().unwrap_or(f64::INFINITY);
    Ok(SelfConsistentResult {
        distribution: current,
        achieved_tv,
        iterations: opts.max_iterations,
        tv_trace,
    })
}

/// Compute an (approximately) self-consistent length distribution for a
/// parity system by repeatedly evolving populations drawn from the
/// current candidate and histogramming the working programs.
pub fn self_consistent_distribution(
    base: &ParitySystem,
    params: &EvolutionParams,
    opts: &SelfConsistOptions,
    seed: u64,
) -> Result<SelfConsistentResult> {
    let track_subs = base.adf.is_some();
    iterate_to_fixed_point(
        base.length_distribution.clone(),
        opts,
        seed,
        |dist, iter_seed| {
            let system = base.clone().with_distribution(dist.clone());
            let summary = run(&system, params, opts.evolutions_per_iteration, iter_seed)?;
            let mut lengths = Vec::new();
            let mut subs = Vec::new();
            for outcome in summary.per_evolution.iter().filter(|o| o.succeeded) {
                lengths.push(outcome.best_genome.total_nodes());
                subs.push(outcome.best_genome.subroutines.len());
            }
            Ok((lengths, track_subs.then_some(subs)))
        },
    )
}
