//! TOML run configuration.
//!
//! ```toml
//! seed = 42                  # required
//! output = "runs/demo"       # experiment output directory
//! workers = 4                # optional, defaults to available parallelism
//!
//! [data]                     # either [data] ...
//! path = "loans.csv"
//! target = "default"
//! missing_token = "NA"
//!
//! [synthetic]                # ... or [synthetic], never both
//! n = 1000
//! d = 10
//! positive_rate = 0.074
//! separation = 2.3
//! seed = 7                   # defaults to the master seed
//!
//! [grid]
//! folds = 10
//! ratios = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
//! methods = ["RUS", "CCUS", "ROS", "SMOTE"]
//! classifiers = ["LR", "L1LR", "DT"]
//!
//! [preprocess]
//! missing_threshold = 0.7
//!
//! [resample]
//! smote_k = 5
//! kmeans_max_iter = 100
//! kmeans_tol = 1e-6
//!
//! [linear]
//! max_iter = 5000
//! tol = 1e-6
//! lambda_grid = [0.001, 0.01, 0.1]
//!
//! [tree]
//! max_depth = 8
//! min_samples_leaf = 5
//!
//! [bagging]                  # same keys for [boosting]
//! n_estimators = 50
//! max_depth = 8
//! min_samples_leaf = 5
//!
//! [evaluate]
//! threshold = 0.5
//! pca_ratio = 0.5
//!
//! [select]
//! tie_tolerance = 0.005
//! ```
//!
//! Every section and key other than `seed` is optional.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use imbrisk::classifiers::TreeParams;
use imbrisk::data::{generate_synthetic, load_csv};
use imbrisk::experiment::{ClassifierKind, EnsembleParams, ExperimentParams};
use imbrisk::resample::Method;
use imbrisk::Dataset;

use crate::CliError;

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_D: usize = 10;
pub const DEFAULT_POSITIVE_RATE: f64 = 0.074;
pub const DEFAULT_SEPARATION: f64 = 2.3;
pub const DEFAULT_TARGET: &str = "target";
pub const DEFAULT_MISSING_TOKEN: &str = "NA";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub data: Option<DataSection>,
    pub synthetic: Option<SyntheticSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub resample: ResampleSection,
    #[serde(default)]
    pub linear: LinearSection,
    #[serde(default)]
    pub tree: TreeSection,
    #[serde(default)]
    pub bagging: EnsembleSection,
    #[serde(default)]
    pub boosting: EnsembleSection,
    #[serde(default)]
    pub evaluate: EvaluateSection,
    #[serde(default)]
    pub select: SelectSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    #[serde(default = "default_target")]
    pub target: String,
    #[serde(default = "default_missing")]
    pub missing_token: String,
}

fn default_target() -> String {
    DEFAULT_TARGET.to_string()
}

fn default_missing() -> String {
    DEFAULT_MISSING_TOKEN.to_string()
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub positive_rate: Option<f64>,
    pub separation: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub folds: Option<usize>,
    pub ratios: Option<Vec<f64>>,
    pub methods: Option<Vec<String>>,
    pub classifiers: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    pub missing_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResampleSection {
    pub smote_k: Option<usize>,
    pub kmeans_max_iter: Option<usize>,
    pub kmeans_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSection {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_estimators: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub threshold: Option<f64>,
    pub pca_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectSection {
    pub tie_tolerance: Option<f64>,
}

/// Where the experiment's rows come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        target: String,
        missing_token: String,
    },
    Synthetic {
        n: usize,
        d: usize,
        positive_rate: f64,
        separation: f64,
        seed: u64,
    },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset, CliError> {
        Ok(match self {
            DataSource::Csv {
                path,
                target,
                missing_token,
            } => load_csv(path, target, missing_token)?,
            DataSource::Synthetic {
                n,
                d,
                positive_rate,
                separation,
                seed,
            } => generate_synthetic(*n, *d, *positive_rate, *separation, *seed)?,
        })
    }
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{field}`: {reason}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| invalid("seed", "a master seed is required"))
    }

    pub fn synthetic_source(&self) -> Result<DataSource, CliError> {
        let s = self.synthetic.clone().unwrap_or_default();
        let source = DataSource::Synthetic {
            n: s.n.unwrap_or(DEFAULT_N),
            d: s.d.unwrap_or(DEFAULT_D),
            positive_rate: s.positive_rate.unwrap_or(DEFAULT_POSITIVE_RATE),
            separation: s.separation.unwrap_or(DEFAULT_SEPARATION),
            seed: match s.seed {
                Some(v) => v,
                None => self.seed()?,
            },
        };
        validate_synthetic(&source)?;
        Ok(source)
    }

    /// The single configured data source.
    pub fn data_source(&self) -> Result<DataSource, CliError> {
        match (&self.data, &self.synthetic) {
            (Some(_), Some(_)) => Err(invalid("data", "give either [data] or [synthetic], not both")),
            (None, None) => Err(invalid("data", "one of [data] or [synthetic] is required")),
            (Some(d), None) => Ok(DataSource::Csv {
                path: d.path.clone(),
                target: d.target.clone(),
                missing_token: d.missing_token.clone(),
            }),
            (None, Some(_)) => self.synthetic_source(),
        }
    }

    pub fn params(&self) -> Result<ExperimentParams, CliError> {
        let mut p = ExperimentParams::new(self.seed()?);
        let g = &self.grid;
        if let Some(v) = g.folds {
            p.folds = v;
        }
        if let Some(v) = &g.ratios {
            p.ratios = v.clone();
        }
        if let Some(v) = &g.methods {
            p.methods = v
                .iter()
                .map(|m| match m.parse::<Method>() {
                    Ok(Method::None) | Err(_) => Err(invalid(
                        "grid.methods",
                        format!("unknown resampler `{m}` (expected RUS, CCUS, ROS or SMOTE)"),
                    )),
                    Ok(m) => Ok(m),
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = &g.classifiers {
            p.classifiers = v
                .iter()
                .map(|c| c.parse::<ClassifierKind>().map_err(|e| invalid("grid.classifiers", e)))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = self.preprocess.missing_threshold {
            p.missing_threshold = v;
        }
        let r = &self.resample;
        if let Some(v) = r.smote_k {
            p.smote_k = v;
        }
        if let Some(v) = r.kmeans_max_iter {
            p.kmeans_max_iter = v;
        }
        if let Some(v) = r.kmeans_tol {
            p.kmeans_tol = v;
        }
        let l = &self.linear;
        if let Some(v) = l.max_iter {
            p.linear.max_iter = v;
        }
        if let Some(v) = l.tol {
            p.linear.tol = v;
        }
        if let Some(v) = &l.lambda_grid {
            p.lambda_grid = v.clone();
        }
        apply_tree(&mut p.tree, self.tree.max_depth, self.tree.min_samples_leaf);
        apply_ensemble(&mut p.bagging, &self.bagging);
        apply_ensemble(&mut p.boosting, &self.boosting);
        if let Some(v) = self.evaluate.threshold {
            p.threshold = v;
        }
        if let Some(v) = self.evaluate.pca_ratio {
            p.pca_ratio = v;
        }
        if let Some(v) = self.select.tie_tolerance {
            p.tie_tolerance = v;
        }
        if !(0.0..=1.0).contains(&p.threshold) {
            return Err(invalid("evaluate.threshold", "must lie in [0, 1]"));
        }
        if p.linear.max_iter == 0 {
            return Err(invalid("linear.max_iter", "must be at least 1"));
        }
        if !(p.linear.tol > 0.0) {
            return Err(invalid("linear.tol", "must be positive"));
        }
        if !(p.kmeans_tol >= 0.0) {
            return Err(invalid("resample.kmeans_tol", "must be non-negative"));
        }
        p.validate()?;
        Ok(p)
    }

    /// Worker count for the grid; zero or absent means available parallelism.
    pub fn workers(&self) -> usize {
        match self.workers {
            Some(w) if w > 0 => w,
            _ => std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

fn apply_tree(t: &mut TreeParams, depth: Option<usize>, leaf: Option<usize>) {
    if let Some(v) = depth {
        t.max_depth = v;
    }
    if let Some(v) = leaf {
        t.min_samples_leaf = v;
    }
}

fn apply_ensemble(e: &mut EnsembleParams, s: &EnsembleSection) {
    if let Some(v) = s.n_estimators {
        e.n_estimators = v;
    }
    apply_tree(&mut e.tree, s.max_depth, s.min_samples_leaf);
}

pub fn validate_synthetic(source: &DataSource) -> Result<(), CliError> {
    if let DataSource::Synthetic {
        n,
        d,
        positive_rate,
        separation,
        ..
    } = source
    {
        if *n < 2 {
            return Err(invalid("synthetic.n", "must be at least 2"));
        }
        if *d == 0 {
            return Err(invalid("synthetic.d", "must be at least 1"));
        }
        if !(*positive_rate > 0.0 && *positive_rate < 1.0) {
            return Err(invalid("synthetic.positive_rate", "must lie strictly between 0 and 1"));
        }
        if !separation.is_finite() || *separation < 0.0 {
            return Err(invalid("synthetic.separation", "must be a finite non-negative number"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = RunConfig::from_toml("seed = 3\n[synthetic]\n").unwrap();
        let p = c.params().unwrap();
        assert_eq!(p, ExperimentParams::new(3));
        assert_eq!(
            c.data_source().unwrap(),
            DataSource::Synthetic {
                n: 1000,
                d: 10,
                positive_rate: 0.074,
                separation: DEFAULT_SEPARATION,
                seed: 3
            }
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("seed = 1\nsede = 2\n").is_err());
        assert!(RunConfig::from_toml("seed = 1\n[tree]\ndepth = 2\n").is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let c = RunConfig::from_toml("[synthetic]\n").unwrap();
        assert!(c.params().unwrap_err().to_string().contains("seed"));
        let c = RunConfig::from_toml("seed = 1\n[synthetic]\npositive_rate = 0.0\n").unwrap();
        assert!(c.data_source().unwrap_err().to_string().contains("synthetic.positive_rate"));
        let c = RunConfig::from_toml("seed = 1\n[grid]\nmethods = [\"FOO\"]\n").unwrap();
        assert!(c.params().unwrap_err().to_string().contains("grid.methods"));
        let c = RunConfig::from_toml("seed = 1\n[grid]\nratios = [0.0]\n").unwrap();
        assert!(c.params().unwrap_err().to_string().contains("ratios"));
        let c = RunConfig::from_toml("seed = 1\n[data]\npath = \"x.csv\"\n[synthetic]\n").unwrap();
        assert!(c.data_source().is_err());
    }

    #[test]
    fn sections_override_defaults() {
        let c = RunConfig::from_toml(
            "seed = 9\n[grid]\nfolds = 5\nclassifiers = [\"dt\"]\n[boosting]\nn_estimators = 7\nmax_depth = 2\n",
        )
        .unwrap();
        let p = c.params().unwrap();
        assert_eq!(p.folds, 5);
        assert_eq!(p.classifiers, vec![ClassifierKind::Dt]);
        assert_eq!(p.boosting.n_estimators, 7);
        assert_eq!(p.boosting.tree.max_depth, 2);
        assert_eq!(p.boosting.tree.min_samples_leaf, 5);
    }
}
