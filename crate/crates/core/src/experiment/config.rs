//! Experiment configuration: a flat TOML file that maps directly onto
//! [`ExperimentConfig`].

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::adaptation::EdotWeighting;
use crate::error::{Error, Result};
use crate::gains::Gain;
use crate::models::{self, ParametricModel};
use crate::simulator::{Method, SimSetup};

/// Configurations shipped inside the library, addressable by name.
const BUNDLED: &[(&str, &str)] = &[
    (
        "lorenz-table1",
        include_str!("../../configs/lorenz-table1.toml"),
    ),
    ("rossler", include_str!("../../configs/rossler.toml")),
];

/// Names of the bundled configurations.
pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(name, _)| *name).collect()
}

/// A gain given either as a scalar `s` (meaning `s·I`) or as a full
/// row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl GainSpec {
    /// Builds the validated gain for an `dim`-dimensional state.
    pub fn to_gain(&self, dim: usize, name: &str) -> Result<Gain<f64>> {
        let built = match self {
            GainSpec::Scalar(s) => Gain::scaled_identity(dim, *s),
            GainSpec::Matrix(rows) => {
                if rows.len() != dim || rows.iter().any(|row| row.len() != dim) {
                    return Err(Error::Config(format!(
                        "gain '{name}' must be a {dim}x{dim} matrix for this model"
                    )));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Gain::new(nalgebra::DMatrix::from_row_slice(dim, dim, &flat))
            }
        };
        built.map_err(|e| Error::Config(format!("gain '{name}': {e}")))
    }
}

fn default_decimation() -> usize {
    100
}

fn default_thresholds() -> Vec<f64> {
    vec![1.0, 0.1, 0.01, 0.001]
}

fn default_cov_window() -> f64 {
    20.0
}

/// One experiment: a model, the methods to compare, and the shared run
/// parameters. See the bundled configs for complete examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Model key, e.g. `lorenz-m4` (see [`models::MODEL_KEYS`]).
    pub model: String,
    /// Methods to run: `chen`, `proposed`, `proposed-augmented`.
    pub methods: Vec<String>,
    /// Delay-block counts, one `proposed-augmented` run per entry.
    #[serde(default)]
    pub r: Vec<usize>,
    /// Delay spacing δ in seconds (required whenever some r > 0).
    #[serde(default)]
    pub delta: f64,
    /// Integration step in seconds.
    pub h: f64,
    /// Simulated horizon in seconds.
    pub t_final: f64,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    /// True drive parameters.
    pub theta: Vec<f64>,
    /// Initial estimate.
    pub alpha0: Vec<f64>,
    pub k: GainSpec,
    pub l: GainSpec,
    /// Record every `decimation`-th step.
    #[serde(default = "default_decimation")]
    pub decimation: usize,
    /// Identification-error bands in percent, strictly decreasing.
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    /// 1-based parameter index the threshold table and CoV statistic use.
    pub report_param: usize,
    /// Trailing window in seconds for the CoV-of-RMSE statistic.
    #[serde(default = "default_cov_window")]
    pub cov_window: f64,
    /// Default output directory; the CLI `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// `l-weighted` (default) or `plain` ė term in the augmented law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edot_weighting: Option<String>,
}

/// One concrete run expanded from a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPlan {
    /// Short unique name: `chen`, `proposed`, `proposed-r3`, ...
    pub label: String,
    pub method: Method,
    pub r: usize,
}

impl ExperimentConfig {
    /// Parses a TOML document; `origin` names the source in errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            reason: e.to_string(),
        })
    }

    /// Serializes back to TOML. `parse(to_toml(cfg))` equals `cfg`.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn model_instance(&self) -> Result<ParametricModel<f64>> {
        models::by_key(&self.model).ok_or_else(|| {
            Error::Config(format!(
                "unknown model '{}' (known: {})",
                self.model,
                models::MODEL_KEYS.join(", ")
            ))
        })
    }

    fn parsed_methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(Error::Config(
                "'methods' must list at least one method".into(),
            ));
        }
        let parsed: Result<Vec<Method>> = self.methods.iter().map(|s| s.parse()).collect();
        let parsed = parsed?;
        for (i, a) in parsed.iter().enumerate() {
            if parsed[..i].contains(a) {
                return Err(Error::Config(format!("method '{a}' listed twice")));
            }
        }
        Ok(parsed)
    }

    /// The ė weighting for augmented runs.
    pub fn weighting(&self) -> Result<EdotWeighting> {
        match self.edot_weighting.as_deref() {
            None | Some("l-weighted") => Ok(EdotWeighting::LWeighted),
            Some("plain") => Ok(EdotWeighting::Plain),
            Some(other) => Err(Error::Config(format!(
                "edot_weighting must be 'l-weighted' or 'plain', got '{other}'"
            ))),
        }
    }

    /// Full field-level validation; every run this expands to will pass the
    /// simulator's own checks.
    pub fn validate(&self) -> Result<()> {
        let model = self.model_instance()?;
        let (n, m) = (model.state_dim(), model.param_dim());
        let methods = self.parsed_methods()?;

        if methods.contains(&Method::ProposedAugmented) {
            if self.r.is_empty() {
                return Err(Error::Config(
                    "'proposed-augmented' needs a nonempty 'r' list".into(),
                ));
            }
            for (i, a) in self.r.iter().enumerate() {
                if self.r[..i].contains(a) {
                    return Err(Error::Config(format!("r = {a} listed twice")));
                }
            }
            if self.r.iter().any(|&r| r > 0) && !(self.delta > 0.0 && self.delta.is_finite()) {
                return Err(Error::Config(format!(
                    "'delta' must be positive when r > 0, got {}",
                    self.delta
                )));
            }
        }

        let check_vec = |name: &str, v: &[f64], want: usize| -> Result<()> {
            if v.len() != want {
                return Err(Error::Config(format!(
                    "'{name}' has length {}, model '{}' wants {want}",
                    v.len(),
                    self.model
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::Config(format!("'{name}' has non-finite entries")));
            }
            Ok(())
        };
        check_vec("x0", &self.x0, n)?;
        check_vec("y0", &self.y0, n)?;
        check_vec("theta", &self.theta, m)?;
        check_vec("alpha0", &self.alpha0, m)?;

        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!(
                "'h' must be positive, got {}",
                self.h
            )));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "'t_final' must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.decimation == 0 {
            return Err(Error::Config("'decimation' must be at least 1".into()));
        }

        if self.thresholds.is_empty() {
            return Err(Error::Config("'thresholds' must not be empty".into()));
        }
        for (i, &pct) in self.thresholds.iter().enumerate() {
            if !(pct > 0.0 && pct.is_finite()) {
                return Err(Error::Config(format!("threshold {pct}% must be positive")));
            }
            if i > 0 && pct >= self.thresholds[i - 1] {
                return Err(Error::Config(
                    "'thresholds' must be strictly decreasing".into(),
                ));
            }
        }

        if self.report_param == 0 || self.report_param > m {
            return Err(Error::Config(format!(
                "'report_param' must be in 1..={m}, got {}",
                self.report_param
            )));
        }
        if !(self.cov_window > 0.0 && self.cov_window.is_finite()) {
            return Err(Error::Config(format!(
                "'cov_window' must be positive, got {}",
                self.cov_window
            )));
        }

        self.k.to_gain(n, "k")?;
        self.l.to_gain(n, "l")?;
        self.weighting()?;
        Ok(())
    }

    /// Expands into the concrete run list: one run per plain method, one per
    /// `r` entry for `proposed-augmented`. Validates first.
    pub fn expand(&self) -> Result<Vec<RunPlan>> {
        self.validate()?;
        let mut plans = Vec::new();
        for method in self.parsed_methods()? {
            match method {
                Method::Chen | Method::Proposed => plans.push(RunPlan {
                    label: method.as_str().to_string(),
                    method,
                    r: 0,
                }),
                Method::ProposedAugmented => {
                    for &r in &self.r {
                        plans.push(RunPlan {
                            label: format!("proposed-r{r}"),
                            method,
                            r,
                        });
                    }
                }
            }
        }
        Ok(plans)
    }

    /// Builds the simulator setup for one expanded run.
    pub fn to_setup(&self, plan: &RunPlan) -> Result<SimSetup<f64>> {
        let model = self.model_instance()?;
        let n = model.state_dim();
        Ok(SimSetup {
            model,
            method: plan.method,
            r: plan.r,
            delta: self.delta,
            h: self.h,
            t_final: self.t_final,
            x0: DVector::from_vec(self.x0.clone()),
            y0: DVector::from_vec(self.y0.clone()),
            theta: DVector::from_vec(self.theta.clone()),
            alpha0: DVector::from_vec(self.alpha0.clone()),
            k: self.k.to_gain(n, "k")?,
            l: self.l.to_gain(n, "l")?,
            decimation: self.decimation,
            hold_alpha: false,
            edot_weighting: self.weighting()?,
        })
    }
}

/// Loads a configuration by bundled name or file path.
pub fn load_config(spec: &str) -> Result<ExperimentConfig> {
    if let Some((name, text)) = BUNDLED.iter().find(|(name, _)| *name == spec) {
        return ExperimentConfig::parse(text, name);
    }
    let path = Path::new(spec);
    if path.exists() {
        let text = fs::read_to_string(path)?;
        return ExperimentConfig::parse(&text, spec);
    }
    Err(Error::Config(format!(
        "'{spec}' is neither a bundled config ({}) nor an existing file",
        bundled_names().join(", ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorenz_cfg() -> ExperimentConfig {
        load_config("lorenz-table1").unwrap()
    }

    #[test]
    fn bundled_configs_parse_validate_and_expand() {
        for name in bundled_names() {
            let cfg = load_config(name).unwrap();
            cfg.validate().unwrap();
            assert!(
                !cfg.expand().unwrap().is_empty(),
                "{name} expands to no runs"
            );
        }
    }

    #[test]
    fn lorenz_bundle_matches_its_documented_setup() {
        let cfg = lorenz_cfg();
        assert_eq!(cfg.model, "lorenz-m4");
        assert_eq!(cfg.methods, vec!["chen", "proposed-augmented"]);
        assert_eq!(cfg.r, vec![1, 2, 3, 4, 5]);
        assert_eq!(cfg.theta, vec![10.0, 28.0, 8.0 / 3.0, 0.0]);
        assert_eq!(cfg.x0, vec![8.0, 9.0, 10.0]);
        assert_eq!(cfg.y0, vec![3.0, 4.0, 5.0]);
        assert_eq!(cfg.alpha0, vec![0.0; 4]);
        assert_eq!(cfg.k, GainSpec::Scalar(0.1));
        assert_eq!(cfg.l, GainSpec::Scalar(10.0));
        assert_eq!((cfg.delta, cfg.h), (0.1, 0.000025));
        assert_eq!(cfg.thresholds, vec![1.0, 0.1, 0.01, 0.001]);
        assert_eq!(cfg.report_param, 3);

        let labels: Vec<String> = cfg.expand().unwrap().into_iter().map(|p| p.label).collect();
        assert_eq!(
            labels,
            [
                "chen",
                "proposed-r1",
                "proposed-r2",
                "proposed-r3",
                "proposed-r4",
                "proposed-r5"
            ]
        );
    }

    #[test]
    fn round_trip_is_field_identical() {
        for name in bundled_names() {
            let cfg = load_config(name).unwrap();
            let again = ExperimentConfig::parse(&cfg.to_toml().unwrap(), "round-trip").unwrap();
            assert_eq!(cfg, again);
        }
    }

    #[test]
    fn matrix_gain_spec_builds_a_full_gain() {
        let mut cfg = lorenz_cfg();
        cfg.k = GainSpec::Matrix(vec![
            vec![2.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.5],
            vec![0.0, 0.5, 4.0],
        ]);
        cfg.validate().unwrap();
        let k = cfg.k.to_gain(3, "k").unwrap();
        assert_eq!(k.matrix()[(1, 2)], 0.5);

        // Wrong size and non-SPD matrices are both turned down.
        assert!(cfg.k.to_gain(2, "k").is_err());
        cfg.k = GainSpec::Matrix(vec![vec![0.0; 3]; 3]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn field_level_diagnostics() {
        type Check = (Box<dyn Fn(&mut ExperimentConfig)>, &'static str);
        let checks: Vec<Check> = vec![
            (Box::new(|c| c.model = "chua".into()), "unknown model"),
            (Box::new(|c| c.methods = vec![]), "methods"),
            (
                Box::new(|c| c.methods = vec!["newton".into()]),
                "unknown method",
            ),
            (
                Box::new(|c| c.methods = vec!["chen".into(), "chen".into()]),
                "twice",
            ),
            (Box::new(|c| c.r = vec![]), "'r' list"),
            (Box::new(|c| c.r = vec![1, 1]), "twice"),
            (Box::new(|c| c.delta = 0.0), "'delta'"),
            (Box::new(|c| c.x0 = vec![1.0, 2.0]), "'x0'"),
            (Box::new(|c| c.theta = vec![f64::NAN; 4]), "'theta'"),
            (Box::new(|c| c.h = -0.001), "'h'"),
            (Box::new(|c| c.t_final = f64::INFINITY), "'t_final'"),
            (Box::new(|c| c.decimation = 0), "'decimation'"),
            (Box::new(|c| c.thresholds = vec![]), "'thresholds'"),
            (Box::new(|c| c.thresholds = vec![0.1, 1.0]), "decreasing"),
            (Box::new(|c| c.report_param = 0), "'report_param'"),
            (Box::new(|c| c.report_param = 5), "'report_param'"),
            (Box::new(|c| c.cov_window = 0.0), "'cov_window'"),
            (
                Box::new(|c| c.edot_weighting = Some("square".into())),
                "edot_weighting",
            ),
        ];
        for (mutate, needle) in checks {
            let mut cfg = lorenz_cfg();
            mutate(&mut cfg);
            let err = cfg.validate().unwrap_err().to_string();
            assert!(err.contains(needle), "'{err}' should mention {needle}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "model = \"lorenz\"\nstep = 0.1\n";
        let err = ExperimentConfig::parse(text, "inline")
            .unwrap_err()
            .to_string();
        assert!(err.contains("inline"), "{err}");
    }

    #[test]
    fn missing_config_names_the_alternatives() {
        let err = load_config("no-such-config").unwrap_err().to_string();
        assert!(
            err.contains("lorenz-table1") && err.contains("rossler"),
            "{err}"
        );
    }

    #[test]
    fn plain_methods_ignore_the_r_list() {
        let mut cfg = lorenz_cfg();
        cfg.methods = vec!["chen".into(), "proposed".into()];
        let plans = cfg.expand().unwrap();
        assert_eq!(plans.len(), 2);
        assert!(plans.iter().all(|p| p.r == 0));
    }
}
