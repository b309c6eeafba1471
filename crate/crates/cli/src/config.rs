//! Experiment configuration: a TOML file plus `--set key=value`
//! overrides. Difficulty parameters accept either a scalar or a list;
//! list-valued keys sweep, and the cross product of all sweeps defines
//! the experiment's parameter points.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use gpscale::engine::{EvolutionParams, SelectionScheme, DEFAULT_GENERATION_CAP};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    SortLinear,
    ParityTree,
    Gaussian,
    Highest,
    Linear,
    Binary,
    TwistedBinary,
    TwistedLinear,
    TwistedGaussian,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::SortLinear => "sort_linear",
            SystemKind::ParityTree => "parity_tree",
            SystemKind::Gaussian => "gaussian",
            SystemKind::Highest => "highest",
            SystemKind::Linear => "linear",
            SystemKind::Binary => "binary",
            SystemKind::TwistedBinary => "twisted_binary",
            SystemKind::TwistedLinear => "twisted_linear",
            SystemKind::TwistedGaussian => "twisted_gaussian",
        }
    }

    /// Systems whose difficulty scales with a dimension count `n`; these
    /// get the `K'` statistic.
    pub fn is_dimensional(self) -> bool {
        !matches!(self, SystemKind::SortLinear | SystemKind::ParityTree)
    }

    /// Systems with a closed-form density.
    pub fn has_analytic_density(self) -> bool {
        matches!(
            self,
            SystemKind::Gaussian | SystemKind::TwistedGaussian | SystemKind::Highest
        )
    }
}

/// A scalar or a list of values to sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep<T: Clone> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Sweep<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Sweep::One(v) => vec![v.clone()],
            Sweep::Many(vs) => vs.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub statement_set: Option<Sweep<u32>>,
    pub v: Option<Sweep<u32>>,
    pub program_length: Option<Sweep<u32>>,
    pub n_bits: Option<Sweep<u32>>,
    pub termination_value: Option<Sweep<f64>>,
    pub n: Option<Sweep<u32>>,
    pub p: Option<Sweep<u64>>,
    pub b: Option<Sweep<u32>>,
    pub scale_base: Option<f64>,
    /// Tree system: enable automatically defined subroutines.
    pub subroutines: Option<bool>,
    /// Tree system: load the initial length distribution from a file
    /// produced by `evolve selfconsist` instead of the built-in seed.
    pub length_distribution: Option<PathBuf>,
    /// Tree system: how integer outputs map to parity predictions
    /// (`nonzero` or `mod2`).
    pub output_interpretation: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub population_size: Option<usize>,
    pub parent_count: Option<usize>,
    pub tournament_size: Option<usize>,
    pub mutation_prob: Option<f64>,
    pub crossover_rate: Option<f64>,
    pub selection_scheme: Option<SelectionScheme>,
    pub generation_cap: Option<u64>,
    pub carry_parents: Option<bool>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethodChoice {
    /// Closed form when the system has one, exhaustive enumeration for
    /// small integer spaces, Monte Carlo otherwise.
    Auto,
    Analytic,
    MonteCarlo,
    Exhaustive,
    /// Skip density entirely.
    None,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    pub method: Option<DensityMethodChoice>,
    pub target_hits: Option<u64>,
    pub max_samples: Option<u64>,
    pub shard_size: Option<u64>,
}

impl Default for DensitySection {
    fn default() -> Self {
        DensitySection { method: None, target_hits: None, max_samples: None, shard_size: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    /// Master seed; every evolution and density shard derives its own
    /// stream from it. Mandatory so runs are reproducible by
    /// construction.
    pub master_seed: u64,
    #[serde(default)]
    pub n_evolutions: usize,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub density: DensitySection,
    /// Delta used for the K' column of dimensional systems.
    pub kprime_delta: Option<f64>,
    /// Output CSV path (defaults to the config path with a .csv
    /// extension).
    pub output: Option<PathBuf>,
}

/// One concrete parameter point of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPoint {
    pub statement_set: Option<u32>,
    pub v: Option<u32>,
    pub program_length: Option<u32>,
    pub n_bits: Option<u32>,
    pub termination_value: Option<f64>,
    pub n: Option<u32>,
    pub p: Option<u64>,
    pub b: Option<u32>,
    pub scale_base: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Reject parameters that do not belong to the chosen system and
    /// check that the required ones are present.
    pub fn validate(&self) -> Result<()> {
        let allowed: &[&str] = match self.system {
            SystemKind::SortLinear => &["statement_set", "v", "program_length"],
            SystemKind::ParityTree => &[
                "n_bits",
                "termination_value",
                "subroutines",
                "length_distribution",
                "output_interpretation",
            ],
            SystemKind::Gaussian => &["n", "termination_value"],
            SystemKind::Highest => &["n", "p", "termination_value"],
            SystemKind::Linear => &["n", "termination_value"],
            SystemKind::Binary => &["n", "b", "termination_value"],
            SystemKind::TwistedBinary => &["n", "b", "termination_value"],
            SystemKind::TwistedLinear => &["n", "termination_value", "scale_base"],
            SystemKind::TwistedGaussian => &["n", "termination_value", "scale_base"],
        };
        let mut present: BTreeSet<&str> = BTreeSet::new();
        let p = &self.params;
        if p.statement_set.is_some() {
            present.insert("statement_set");
        }
        if p.v.is_some() {
            present.insert("v");
        }
        if p.program_length.is_some() {
            present.insert("program_length");
        }
        if p.n_bits.is_some() {
            present.insert("n_bits");
        }
        if p.termination_value.is_some() {
            present.insert("termination_value");
        }
        if p.n.is_some() {
            present.insert("n");
        }
        if p.p.is_some() {
            present.insert("p");
        }
        if p.b.is_some() {
            present.insert("b");
        }
        if p.scale_base.is_some() {
            present.insert("scale_base");
        }
        if p.subroutines.is_some() {
            present.insert("subroutines");
        }
        if p.length_distribution.is_some() {
            present.insert("length_distribution");
        }
        if p.output_interpretation.is_some() {
            present.insert("output_interpretation");
        }
        for key in &present {
            if !allowed.contains(key) {
                bail!(
                    "parameter `{key}` does not apply to system `{}`",
                    self.system.name()
                );
            }
        }
        let require = |key: &str, ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(anyhow!("system `{}` requires parameter `{key}`", self.system.name()))
            }
        };
        match self.system {
            SystemKind::ParityTree => {
                require("n_bits", p.n_bits.is_some())?;
                require("termination_value", p.termination_value.is_some())?;
            }
            SystemKind::Gaussian | SystemKind::TwistedGaussian | SystemKind::TwistedLinear => {
                require("n", p.n.is_some())?;
                require("termination_value", p.termination_value.is_some())?;
            }
            SystemKind::Linear => {
                require("n", p.n.is_some())?;
                require("termination_value", p.termination_value.is_some())?;
            }
            SystemKind::Highest => {
                require("n", p.n.is_some())?;
                require("p", p.p.is_some())?;
            }
            SystemKind::Binary | SystemKind::TwistedBinary => {
                require("n", p.n.is_some())?;
                require("b", p.b.is_some())?;
            }
            SystemKind::SortLinear => {}
        }
        if let Some(method) = self.density.method {
            if method == DensityMethodChoice::Analytic && !self.system.has_analytic_density() {
                bail!(
                    "system `{}` has no analytic density; use monte_carlo, exhaustive or auto",
                    self.system.name()
                );
            }
            if method == DensityMethodChoice::Exhaustive
                && !matches!(
                    self.system,
                    SystemKind::Highest | SystemKind::Binary | SystemKind::TwistedBinary
                )
            {
                bail!(
                    "exhaustive density enumeration needs a finite integer genome space; system `{}` has none",
                    self.system.name()
                );
            }
        }
        if let Some(interp) = &p.output_interpretation {
            if interp != "nonzero" && interp != "mod2" {
                bail!("output_interpretation must be `nonzero` or `mod2`, got {interp:?}");
            }
        }
        Ok(())
    }

    /// The cross product of all sweep lists, in a fixed lexicographic
    /// order.
    pub fn points(&self) -> Vec<ParamPoint> {
        fn vals<T: Clone>(s: &Option<Sweep<T>>) -> Vec<Option<T>> {
            match s {
                None => vec![None],
                Some(sweep) => sweep.values().into_iter().map(Some).collect(),
            }
        }
        let mut points = Vec::new();
        for set in vals(&self.params.statement_set) {
            for v in vals(&self.params.v) {
                for len in vals(&self.params.program_length) {
                    for n_bits in vals(&self.params.n_bits) {
                        for n in vals(&self.params.n) {
                            for p in vals(&self.params.p) {
                                for b in vals(&self.params.b) {
                                    for t in vals(&self.params.termination_value) {
                                        points.push(ParamPoint {
                                            statement_set: set,
                                            v,
                                            program_length: len,
                                            n_bits,
                                            termination_value: t,
                                            n,
                                            p,
                                            b,
                                            scale_base: self.params.scale_base,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        points
    }

    /// Engine parameters for one point, filling system-specific defaults
    /// for anything the config does not pin.
    pub fn engine_params(&self, point: &ParamPoint) -> Result<EvolutionParams> {
        // The sorting system breeds from a truncation elite of 4 out of 20
        // with heavy per-statement mutation; every other system runs
        // 7-tournaments over a population of 20 with 1% mutation. The tree
        // system is the exception with its population of 1000.
        let (scheme, population, mutation) = match self.system {
            SystemKind::SortLinear => (SelectionScheme::Truncation, 20, 0.2),
            SystemKind::ParityTree => (SelectionScheme::Tournament, 1000, 0.01),
            _ => (SelectionScheme::Tournament, 20, 0.01),
        };
        let termination = match self.system {
            SystemKind::SortLinear => 1.0,
            SystemKind::Highest => point
                .termination_value
                .unwrap_or(point.n.unwrap_or(2) as f64),
            SystemKind::Binary => point.termination_value.unwrap_or_else(|| {
                // Perfection: n * 2^(b-1).
                let n = point.n.unwrap_or(2) as f64;
                let b = point.b.unwrap_or(3);
                n * 2f64.powi(b as i32 - 1)
            }),
            SystemKind::TwistedBinary => point.termination_value.unwrap_or_else(|| {
                let n = point.n.unwrap_or(2) as f64;
                let b = point.b.unwrap_or(3);
                (n as f64 / 2.0) * 2.0 * 2f64.powi(b as i32 - 1)
            }),
            _ => point
                .termination_value
                .ok_or_else(|| anyhow!("termination_value required"))?,
        };
        let e = &self.engine;
        let params = EvolutionParams {
            population_size: e.population_size.unwrap_or(population),
            parent_count: e.parent_count.unwrap_or(4),
            tournament_size: e.tournament_size.unwrap_or(7),
            mutation_prob: e.mutation_prob.unwrap_or(mutation),
            crossover_rate: e.crossover_rate.unwrap_or(0.9),
            selection_scheme: e.selection_scheme.unwrap_or(scheme),
            generation_cap: e.generation_cap.unwrap_or(DEFAULT_GENERATION_CAP),
            termination_value: termination,
            carry_parents: e.carry_parents.unwrap_or(false),
        };
        params.validate().map_err(|err| anyhow!("{err}"))?;
        Ok(params)
    }
}

/// Apply `--set key=value` overrides to the raw TOML document before
/// deserializing. Keys are dotted paths (`engine.population_size`,
/// `params.p`); values are parsed as TOML, falling back to a string.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String> {
    let mut doc: toml::Value = toml::from_str(text).context("parsing config")?;
    for entry in overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key=value, got {entry:?}"))?;
        let parsed: toml::Value = match value.parse::<toml::Value>() {
            Ok(v) => v,
            Err(_) => toml::Value::String(value.to_string()),
        };
        let parts: Vec<&str> = key.split('.').collect();
        let mut node = &mut doc;
        for part in &parts[..parts.len() - 1] {
            let table = node
                .as_table_mut()
                .ok_or_else(|| anyhow!("--set {key}: `{part}` is not a table"))?;
            node = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
        let last = parts[parts.len() - 1];
        node.as_table_mut()
            .ok_or_else(|| anyhow!("--set {key}: parent of `{last}` is not a table"))?
            .insert(last.to_string(), parsed);
    }
    Ok(toml::to_string(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
system = "highest"
master_seed = 42
n_evolutions = 100

[params]
n = 2
p = [50, 100, 200]
"#;

    #[test]
    fn parse_and_point_expansion() {
        let config = ExperimentConfig::from_toml(MINIMAL).unwrap();
        config.validate().unwrap();
        let points = config.points();
        assert_eq!(points.len(), 3);
        assert_eq!(points[0].p, Some(50));
        assert_eq!(points[2].p, Some(200));
        let params = config.engine_params(&points[0]).unwrap();
        assert_eq!(params.population_size, 20);
        assert_eq!(params.termination_value, 2.0);
        assert_eq!(params.selection_scheme, SelectionScheme::Tournament);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let config = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let once = config.to_toml().unwrap();
        let twice = ExperimentConfig::from_toml(&once).unwrap().to_toml().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn rejects_foreign_parameters() {
        let bad = r#"
system = "gaussian"
master_seed = 1

[params]
n = 2
termination_value = 0.99
p = 50
"#;
        let config = ExperimentConfig::from_toml(bad).unwrap();
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("`p`"), "{err}");
    }

    #[test]
    fn rejects_missing_required_parameters() {
        let bad = r#"
system = "gaussian"
master_seed = 1

[params]
n = 2
"#;
        let config = ExperimentConfig::from_toml(bad).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn rejects_analytic_density_for_sampled_system() {
        let bad = r#"
system = "sort_linear"
master_seed = 1

[density]
method = "analytic"
"#;
        let config = ExperimentConfig::from_toml(bad).unwrap();
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("analytic"), "{err}");
    }

    #[test]
    fn overrides_rewrite_nested_keys() {
        let text = apply_overrides(
            MINIMAL,
            &[
                "engine.population_size=40".to_string(),
                "params.p=[10, 20]".to_string(),
                "n_evolutions=7".to_string(),
            ],
        )
        .unwrap();
        let config = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(config.engine.population_size, Some(40));
        assert_eq!(config.n_evolutions, 7);
        assert_eq!(config.points().len(), 2);
    }

    #[test]
    fn sort_linear_defaults() {
        let text = r#"
system = "sort_linear"
master_seed = 9
n_evolutions = 10

[params]
statement_set = 1
v = 2
"#;
        let config = ExperimentConfig::from_toml(text).unwrap();
        config.validate().unwrap();
        let params = config.engine_params(&config.points()[0]).unwrap();
        assert_eq!(params.selection_scheme, SelectionScheme::Truncation);
        assert_eq!(params.population_size, 20);
        assert_eq!(params.mutation_prob, 0.2);
        assert_eq!(params.termination_value, 1.0);
    }
}
