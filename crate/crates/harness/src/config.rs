use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use union_laplacian::graph::LaplacianKind;
use union_laplacian::manifolds::bandwidth_rule;
use union_laplacian::{presets, Kernel, Model};

use crate::error::{HarnessError, Result, Stage, StageExt};

pub const EXPERIMENT_PRESETS: [&str; 4] = ["paper-fig1", "paper-fig2", "paper-sweep", "circle-sweep"];

/// A model preset name or an inline model table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Preset(String),
    Inline(Model),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Constant(f64),
    /// `scale · ell_n^exponent` with `ell_n` taken in the top dimension.
    Rule { scale: f64, exponent: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelSource,
    /// Exact per-component counts; overrides `n`.
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Sample sizes for sweeps.
    #[serde(default)]
    pub n_list: Vec<usize>,
    pub bandwidth: Bandwidth,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default = "default_kind")]
    pub kind: String,
    pub k: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    /// Eigenvector (0-based) whose TL² proxy a sweep reports.
    #[serde(default = "default_tl2_index")]
    pub tl2_index: usize,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_kernel() -> String {
    "indicator".into()
}
fn default_kind() -> String {
    "normalized".into()
}
fn default_seeds() -> Vec<u64> {
    vec![1]
}
fn default_tol() -> f64 {
    1e-8
}
fn default_tl2_index() -> usize {
    2
}

/// Parsed pieces of a config.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub model: Model,
    pub kernel: Kernel,
    pub kind: LaplacianKind,
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let paper = |name: &str, kind: &str, k: usize| Self {
            name: name.into(),
            model: ModelSource::Preset("paper-rect-segment".into()),
            counts: Some(presets::PAPER_COUNTS.to_vec()),
            n: None,
            n_list: Vec::new(),
            bandwidth: Bandwidth::Constant(presets::PAPER_EPSILON),
            kernel: default_kernel(),
            kind: kind.into(),
            k,
            seeds: vec![1],
            out: None,
            solver_tol: default_tol(),
            tl2_index: default_tl2_index(),
        };
        let sweep = |name: &str, model: &str, tl2_index: usize| Self {
            counts: None,
            n_list: vec![2000, 8000, 32000],
            bandwidth: Bandwidth::Rule { scale: 2.0, exponent: 0.9 },
            model: ModelSource::Preset(model.into()),
            seeds: vec![1, 2, 3],
            tl2_index,
            ..paper(name, "normalized", 6)
        };
        match name {
            "paper-fig1" => Ok(paper(name, "normalized", 6)),
            "paper-fig2" => Ok(paper(name, "unnormalized-scaled:2", 8)),
            "paper-sweep" => Ok(sweep(name, "paper-rect-segment", 2)),
            "circle-sweep" => Ok(Self { k: 3, ..sweep(name, "unit-circle", 1) }),
            other => Err(HarnessError::Config(format!("unknown experiment preset '{other}'"))),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let model = match &self.model {
            ModelSource::Preset(name) => presets::by_name(name).stage(Stage::Config)?,
            ModelSource::Inline(m) => {
                m.validate().stage(Stage::Config)?;
                m.clone()
            }
        };
        let kernel: Kernel = self.kernel.parse().stage(Stage::Config)?;
        let kind: LaplacianKind = self.kind.parse().stage(Stage::Config)?;
        kind.validate().stage(Stage::Config)?;
        Ok(Resolved { model, kernel, kind })
    }

    /// Checks everything that does not need sampling.
    pub fn validate(&self) -> Result<Resolved> {
        let r = self.resolve()?;
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("no seeds".into()));
        }
        if self.k == 0 {
            return Err(HarnessError::Config("k must be positive".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(HarnessError::Config("solver_tol must be positive".into()));
        }
        if let Some(c) = &self.counts {
            if c.len() != r.model.len() {
                return Err(HarnessError::Config(format!(
                    "{} counts for {} components",
                    c.len(),
                    r.model.len()
                )));
            }
        }
        match self.bandwidth {
            Bandwidth::Constant(e) if !(e > 0.0 && e < 1.0) => {
                return Err(HarnessError::Config(format!("ε = {e} outside (0, 1)")));
            }
            Bandwidth::Rule { scale, exponent } if !(scale > 0.0 && exponent > 0.0) => {
                return Err(HarnessError::Config("bandwidth rule needs positive scale and exponent".into()));
            }
            _ => {}
        }
        let n = self.sample_size()?;
        if self.k >= n {
            return Err(HarnessError::Config(format!("k = {} must be below n = {n}", self.k)));
        }
        Ok(r)
    }

    /// Additional checks for sweeps.
    pub fn validate_sweep(&self) -> Result<Resolved> {
        let r = self.validate()?;
        if self.n_list.len() < 3 {
            return Err(HarnessError::Config("a sweep needs at least three sample sizes".into()));
        }
        if matches!(self.bandwidth, Bandwidth::Constant(_)) {
            return Err(HarnessError::Config("a sweep needs a bandwidth rule, not a constant ε".into()));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n <= self.k || n < 3) {
            return Err(HarnessError::Config(format!("sample size {n} too small")));
        }
        Ok(r)
    }

    /// Total sample size of a single run.
    pub fn sample_size(&self) -> Result<usize> {
        match (&self.counts, self.n, self.n_list.first()) {
            (Some(c), _, _) => Ok(c.iter().sum()),
            (None, Some(n), _) => Ok(n),
            (None, None, Some(&n)) => Ok(n),
            _ => Err(HarnessError::Config("set one of counts, n or n_list".into())),
        }
    }

    pub fn epsilon_for(&self, n: usize, top_dim: usize) -> f64 {
        match self.bandwidth {
            Bandwidth::Constant(e) => e,
            Bandwidth::Rule { scale, exponent } => bandwidth_rule(n, top_dim, scale, exponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in EXPERIMENT_PRESETS {
            let c = ExperimentConfig::preset(name).unwrap();
            c.validate().unwrap();
        }
        ExperimentConfig::preset("paper-sweep").unwrap().validate_sweep().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::preset("paper-fig2").unwrap();
        let back = ExperimentConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn short_count_list_rejected() {
        let mut c = ExperimentConfig::preset("paper-sweep").unwrap();
        c.n_list = vec![2000];
        let e = c.validate_sweep().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn inline_model_parses() {
        let text = r#"
            k = 3
            n = 400
            bandwidth = { constant = 0.2 }

            [model]
            ambient_dim = 2

            [[model.components]]
            alpha = 1.0
            density = { kind = "uniform" }
            patch = { kind = "circle", center = [0.0, 0.0], radius = 1.0, frame = [[1.0, 0.0], [0.0, 1.0]] }
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        let r = c.validate().unwrap();
        assert_eq!(r.model.len(), 1);
    }
}
