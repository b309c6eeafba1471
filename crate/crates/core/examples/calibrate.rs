//! Quick manual probes of the evolution systems, handy while tuning:
//!
//! ```text
//! cargo run --release -p gpscale --example calibrate -- lindensity 2 5 1 2000
//! cargo run --release -p gpscale --example calibrate -- linmedian 2 5 1 100 42
//! cargo run --release -p gpscale --example calibrate -- highest 50 100 42
//! cargo run --release -p gpscale --example calibrate -- tree 4 16 50 42
//! cargo run --release -p gpscale --example calibrate -- twistedbin 60 42
//! ```
//!
//! `POP` / `PAR` environment variables override the population and
//! parent counts of `linmedian`.

use gpscale::density::{monte_carlo_density, MonteCarloOptions};
use gpscale::engine::{run, EvolutionParams};
use gpscale::linear::{SortingSystem, StatementSet};
use gpscale::tree::{ParitySystem, TreeStatementSet};
use gpscale::vector::{HighestSystem, TwistedBinarySystem};
use gpscale::System;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = args.first().map(String::as_str).unwrap_or("help");
    let t0 = Instant::now();
    match mode {
        "lindensity" => {
            let v: usize = args[1].parse().unwrap();
            let len: usize = args[2].parse().unwrap();
            let set = StatementSet::from_index(args[3].parse().unwrap()).unwrap();
            let hits: u64 = args[4].parse().unwrap();
            let sys = SortingSystem::new(set, len, v);
            let est = monte_carlo_density(
                &sys,
                1.0,
                &MonteCarloOptions { target_hits: hits, max_samples: 2_000_000_000, shard_size: 4096 },
                1234,
            )
            .unwrap();
            println!(
                "density {:.4e} (hits {} / samples {}, se {:.2e})",
                est.density,
                est.hits.unwrap(),
                est.samples.unwrap(),
                est.std_error.unwrap()
            );
        }
        "linmedian" => {
            let v: usize = args[1].parse().unwrap();
            let len: usize = args[2].parse().unwrap();
            let set = StatementSet::from_index(args[3].parse().unwrap()).unwrap();
            let n: usize = args[4].parse().unwrap();
            let seed: u64 = args[5].parse().unwrap();
            let sys = SortingSystem::new(set, len, v);
            let pop: usize = std::env::var("POP").map(|s| s.parse().unwrap()).unwrap_or(20);
            let parents: usize =
                std::env::var("PAR").map(|s| s.parse().unwrap()).unwrap_or(pop / 5);
            let params = EvolutionParams::truncation(pop, parents, 0.2, 1.0);
            let summary = run(&sys, &params, n, seed).unwrap();
            println!(
                "median {:?} failures {} ({} evolutions)",
                summary.median_generations, summary.failures, n
            );
        }
        "lintrace" => {
            let v: usize = args[1].parse().unwrap();
            let seed: u64 = args[2].parse().unwrap();
            let sys = SortingSystem::new(StatementSet::Set1, 5, v);
            let params = EvolutionParams::truncation(20, 4, 0.2, 1.0);
            let out = gpscale::engine::evolve(&sys, &params, seed).unwrap();
            println!(
                "generations {} best {:.4} improvements {:?}",
                out.generations, out.best_fitness, out.improvements
            );
            println!("{}", gpscale::linear::program_to_text(&out.best_genome));
            let mut rng = gpscale::rng_from_seed(seed ^ 0xABCD);
            let robust = (0..20)
                .filter(|_| {
                    let ctx = sys.generation_context(&mut rng);
                    gpscale::linear::sort_fitness(&out.best_genome, &ctx) == 1.0
                })
                .count();
            println!("robust on {robust}/20 fresh list triples");
        }
        "highest" => {
            let p: i64 = args[1].parse().unwrap();
            let n: usize = args[2].parse().unwrap();
            let seed: u64 = args[3].parse().unwrap();
            let sys = HighestSystem { dims: 2, p };
            let params = EvolutionParams::tournament(20, 0.01, 2.0);
            let summary = run(&sys, &params, n, seed).unwrap();
            println!("median {:?} failures {}", summary.median_generations, summary.failures);
        }
        "tree" => {
            let bits: usize = args[1].parse().unwrap();
            let term: f64 = args[2].parse().unwrap();
            let n: usize = args[3].parse().unwrap();
            let seed: u64 = args[4].parse().unwrap();
            let sys = ParitySystem::new(TreeStatementSet::Set1, bits);
            let params = EvolutionParams::tournament(1000, 0.01, term);
            let summary = run(&sys, &params, n, seed).unwrap();
            println!("median {:?} failures {}", summary.median_generations, summary.failures);
        }
        "twistedbin" => {
            let n: usize = args[1].parse().unwrap();
            let seed: u64 = args[2].parse().unwrap();
            let sys = TwistedBinarySystem::new(2, 3).unwrap();
            let params =
                EvolutionParams::tournament(20, 0.01, 8.0).with_generation_cap(1_000_000);
            let summary = run(&sys, &params, n, seed).unwrap();
            println!(
                "median {:?} failures {} / {}",
                summary.median_generations, summary.failures, n
            );
        }
        _ => eprintln!("modes: lindensity | linmedian | lintrace | highest | tree | twistedbin"),
    }
    eprintln!("elapsed {:.1?}", t0.elapsed());
}
