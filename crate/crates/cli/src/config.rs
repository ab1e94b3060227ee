//! `key = value` experiment configs.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated; the `support` list of an i.i.d. law separates steps with `;`.
//!
//! | key            | models             | default                                  |
//! |----------------|--------------------|------------------------------------------|
//! | `model`        | all (required)     | `iid`, `rotating`, `periodic`, `rwre-elliptic`, `rwre-dirichlet`, `srw-loops` |
//! | `d`            | all                | 2                                        |
//! | `n`            | all                | 1000                                     |
//! | `replicas`     | all                | 1                                        |
//! | `seed`         | all                | 0                                        |
//! | `p`            | rotating, periodic | required                                 |
//! | `alpha`        | rwre-*             | required for dirichlet, all ones for elliptic |
//! | `kappa_ell`    | rwre-elliptic      | required                                 |
//! | `environment`  | rwre-*             | `annealed` (or `quenched`)               |
//! | `support`      | iid                | nearest-neighbour steps                  |
//! | `weights`      | iid                | uniform                                  |
//! | `regeneration` | all                | `detect` for rwre-*, else `period`       |
//! | `period`       | all                | 1 (iid), 4 (rotating, periodic), 6 (srw-loops) |
//! | `direction`    | all                | `e1`, as a unit vector                   |
//! | `margin`       | all                | `n / 100`                                |
//! | `holder_alpha` | diagnose           | 0.4                                      |
//! | `scales`       | diagnose           | 512,1024,2048,4096,8192                  |
//! | `moment_p`     | diagnose           | 4                                        |
//! | `record_paths` | simulate           | true                                     |
//! | `out`          | all                | `out`                                    |
//! | `workers`      | all                | available parallelism                    |

use std::collections::BTreeMap;
use std::path::PathBuf;

use roughwalk::walks::{DirichletParams, EnvironmentLaw, StepLaw, LOOP_PERIOD};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config key `{key}`: {msg}")]
    Key { key: String, msg: String },
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("cannot read config {path}: {msg}")]
    Io { path: String, msg: String },
}

impl ConfigError {
    fn key(key: &str, msg: impl Into<String>) -> Self {
        ConfigError::Key { key: key.to_string(), msg: msg.into() }
    }

    /// The offending key, when the error is tied to one.
    pub fn offending_key(&self) -> Option<&str> {
        match self {
            ConfigError::Key { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Environment {
    Annealed,
    Quenched,
}

#[derive(Clone, Debug)]
pub enum Model {
    Iid(StepLaw),
    Rotating { p: f64 },
    Periodic { p: f64 },
    Rwre { law: EnvironmentLaw, environment: Environment },
    SrwLoops,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Regeneration {
    Period(usize),
    Detect { direction: Vec<f64>, margin: usize },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model_name: String,
    pub model: Model,
    pub d: usize,
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
    pub regeneration: Regeneration,
    pub holder_alphas: Vec<f64>,
    pub scales: Vec<usize>,
    pub moment_p: f64,
    pub record_paths: bool,
    pub out: PathBuf,
    pub workers: Option<usize>,
    /// Resolved settings, one `key=value` per entry, for manifests.
    pub echo: BTreeMap<String, String>,
}

/// Values that take precedence over the file: command-line flags.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

const KEYS: &[&str] = &[
    "model",
    "d",
    "n",
    "replicas",
    "seed",
    "p",
    "alpha",
    "kappa_ell",
    "environment",
    "support",
    "weights",
    "regeneration",
    "period",
    "direction",
    "margin",
    "holder_alpha",
    "scales",
    "moment_p",
    "record_paths",
    "out",
    "workers",
];

pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: i + 1, msg: format!("expected key=value, got `{line}`") });
        };
        let key = k.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::key(key, "unknown key"));
        }
        if map.insert(key.to_string(), v.trim().to_string()).is_some() {
            return Err(ConfigError::key(key, "given more than once"));
        }
    }
    Ok(map)
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T, ConfigError> {
        value.parse().map_err(|_| ConfigError::key(key, format!("cannot parse `{value}`")))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.raw(key).map(|v| self.parse(key, v)).transpose()
    }

    fn require<T: std::str::FromStr>(&self, key: &str, model: &str) -> Result<T, ConfigError> {
        self.get(key)?.ok_or_else(|| ConfigError::key(key, format!("required for model {model}")))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.raw(key).map(|v| v.split(',').map(|x| self.parse(key, x.trim())).collect()).transpose()
    }
}

fn probability(key: &str, p: f64) -> Result<f64, ConfigError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ConfigError::key(key, format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(p)
}

fn alpha_list(r: &Reader, d: usize, required: bool, model: &str) -> Result<DirichletParams, ConfigError> {
    let alpha = match r.list("alpha")? {
        Some(a) => a,
        None if required => return Err(ConfigError::key("alpha", format!("required for model {model}"))),
        None => vec![1.0; 2 * d],
    };
    if alpha.len() != 2 * d {
        return Err(ConfigError::key("alpha", format!("expected {} weights for d={d}, got {}", 2 * d, alpha.len())));
    }
    if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(ConfigError::key("alpha", "alpha must be positive"));
    }
    DirichletParams::new(alpha).map_err(|e| ConfigError::key("alpha", e.to_string()))
}

fn iid_law(r: &Reader, d: usize) -> Result<StepLaw, ConfigError> {
    let support = match r.raw("support") {
        None => return Ok(StepLaw::simple_random_walk(d)),
        Some(s) => s
            .split(';')
            .map(|step| step.split(',').map(|x| r.parse::<f64>("support", x.trim())).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?,
    };
    if support.iter().any(|s| s.len() != d) {
        return Err(ConfigError::key("support", format!("every step needs {d} coordinates")));
    }
    let weights = r.list("weights")?.unwrap_or_else(|| vec![1.0 / support.len() as f64; support.len()]);
    if weights.len() != support.len() {
        return Err(ConfigError::key("weights", format!("expected {} weights, got {}", support.len(), weights.len())));
    }
    StepLaw::new(d, support, weights).map_err(|e| ConfigError::key("weights", e.to_string()))
}

fn format_list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_str_with(&text, overrides)
    }

    pub fn from_str_with(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let map = parse_pairs(text)?;
        let r = Reader { map: &map };
        let model_name: String = r.get("model")?.ok_or_else(|| ConfigError::key("model", "missing"))?;
        let d: usize = r.get("d")?.unwrap_or(2);
        if d == 0 {
            return Err(ConfigError::key("d", "dimension must be at least 1"));
        }
        let planar = |name: &str| {
            if d != 2 {
                Err(ConfigError::key("d", format!("model {name} is planar, d must be 2")))
            } else {
                Ok(())
            }
        };
        let model = match model_name.as_str() {
            "iid" => Model::Iid(iid_law(&r, d)?),
            "rotating" => {
                planar("rotating")?;
                Model::Rotating { p: probability("p", r.require("p", "rotating")?)? }
            }
            "periodic" => {
                planar("periodic")?;
                Model::Periodic { p: probability("p", r.require("p", "periodic")?)? }
            }
            "rwre-dirichlet" | "rwre-elliptic" => {
                let environment = match r.raw("environment").unwrap_or("annealed") {
                    "annealed" => Environment::Annealed,
                    "quenched" => Environment::Quenched,
                    other => return Err(ConfigError::key("environment", format!("expected annealed or quenched, got `{other}`"))),
                };
                let law = if model_name == "rwre-dirichlet" {
                    EnvironmentLaw::Dirichlet(alpha_list(&r, d, true, &model_name)?)
                } else {
                    let base = alpha_list(&r, d, false, &model_name)?;
                    let kappa: f64 = r.require("kappa_ell", &model_name)?;
                    EnvironmentLaw::elliptic(base, kappa).map_err(|e| ConfigError::key("kappa_ell", e.to_string()))?
                };
                Model::Rwre { law, environment }
            }
            "srw-loops" => {
                planar("srw-loops")?;
                Model::SrwLoops
            }
            other => return Err(ConfigError::key("model", format!("unknown model `{other}`"))),
        };

        let n = overrides.steps.map_or_else(|| r.get("n").map(|v| v.unwrap_or(1000)), Ok)?;
        if n == 0 {
            return Err(ConfigError::key("n", "need at least one step"));
        }
        let replicas = overrides.replicas.map_or_else(|| r.get("replicas").map(|v| v.unwrap_or(1)), Ok)?;
        if replicas == 0 {
            return Err(ConfigError::key("replicas", "need at least one replica"));
        }
        let seed = overrides.seed.map_or_else(|| r.get("seed").map(|v| v.unwrap_or(0)), Ok)?;

        let default_mode = if matches!(model, Model::Rwre { .. }) { "detect" } else { "period" };
        let regeneration = match r.raw("regeneration").unwrap_or(default_mode) {
            "period" => {
                let default_period = match model {
                    Model::Rotating { .. } | Model::Periodic { .. } => 4,
                    Model::SrwLoops => LOOP_PERIOD,
                    _ => 1,
                };
                let period = r.get("period")?.unwrap_or(default_period);
                if period == 0 {
                    return Err(ConfigError::key("period", "must be positive"));
                }
                Regeneration::Period(period)
            }
            "detect" => {
                let direction = r.list("direction")?.unwrap_or_else(|| {
                    let mut e = vec![0.0; d];
                    e[0] = 1.0;
                    e
                });
                if direction.len() != d {
                    return Err(ConfigError::key("direction", format!("expected {d} coordinates")));
                }
                let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm > 0.0) || !norm.is_finite() {
                    return Err(ConfigError::key("direction", "must be a non-zero vector"));
                }
                let direction = direction.iter().map(|x| x / norm).collect();
                let margin = r.get("margin")?.unwrap_or(n / 100);
                Regeneration::Detect { direction, margin }
            }
            other => return Err(ConfigError::key("regeneration", format!("expected period or detect, got `{other}`"))),
        };

        let holder_alphas = r.list("holder_alpha")?.unwrap_or_else(|| vec![0.4]);
        if let Some(a) = holder_alphas.iter().find(|&&a| !(a > 1.0 / 3.0 && a <= 0.5)) {
            return Err(ConfigError::key("holder_alpha", format!("{a} outside (1/3, 1/2]")));
        }
        let scales = match r.raw("scales") {
            None => (9..=13).map(|j| 1usize << j).collect(),
            Some(v) => v.split(',').map(|x| r.parse::<usize>("scales", x.trim())).collect::<Result<Vec<_>, _>>()?,
        };
        if scales.is_empty() || scales.contains(&0) {
            return Err(ConfigError::key("scales", "scales must be positive"));
        }
        let moment_p: f64 = r.get("moment_p")?.unwrap_or(4.0);
        if !(moment_p >= 1.0) || !moment_p.is_finite() {
            return Err(ConfigError::key("moment_p", "must be at least 1"));
        }
        let record_paths: bool = r.get("record_paths")?.unwrap_or(true);
        let out = overrides.out.clone().unwrap_or_else(|| PathBuf::from(r.raw("out").unwrap_or("out")));
        let workers = match overrides.workers {
            Some(w) => Some(w),
            None => r.get("workers")?,
        };
        if workers == Some(0) {
            return Err(ConfigError::key("workers", "must be positive"));
        }

        let mut echo = BTreeMap::new();
        echo.insert("model".into(), model_name.clone());
        echo.insert("d".into(), d.to_string());
        echo.insert("n".into(), n.to_string());
        echo.insert("replicas".into(), replicas.to_string());
        echo.insert("seed".into(), seed.to_string());
        match &model {
            Model::Iid(law) => {
                let steps: Vec<String> = law.atoms().map(|(s, _)| format_list(s)).collect();
                let weights: Vec<f64> = law.atoms().map(|(_, w)| w).collect();
                echo.insert("support".into(), steps.join(";"));
                echo.insert("weights".into(), format_list(&weights));
            }
            Model::Rotating { p } | Model::Periodic { p } => {
                echo.insert("p".into(), p.to_string());
            }
            Model::Rwre { law, environment } => {
                let (alpha, kappa) = match law {
                    EnvironmentLaw::Dirichlet(a) => (a.alpha().to_vec(), None),
                    EnvironmentLaw::Elliptic { base, kappa } => (base.alpha().to_vec(), Some(*kappa)),
                    EnvironmentLaw::Fixed(_) => (Vec::new(), None),
                };
                echo.insert("alpha".into(), format_list(&alpha));
                if let Some(k) = kappa {
                    echo.insert("kappa_ell".into(), k.to_string());
                }
                let env = if *environment == Environment::Annealed { "annealed" } else { "quenched" };
                echo.insert("environment".into(), env.into());
            }
            Model::SrwLoops => {}
        }
        match &regeneration {
            Regeneration::Period(p) => {
                echo.insert("regeneration".into(), "period".into());
                echo.insert("period".into(), p.to_string());
            }
            Regeneration::Detect { direction, margin } => {
                echo.insert("regeneration".into(), "detect".into());
                echo.insert("direction".into(), format_list(direction));
                echo.insert("margin".into(), margin.to_string());
            }
        }
        echo.insert("holder_alpha".into(), format_list(&holder_alphas));
        echo.insert("scales".into(), format_list(&scales));
        echo.insert("moment_p".into(), moment_p.to_string());
        echo.insert("record_paths".into(), record_paths.to_string());

        Ok(ExperimentConfig {
            model_name,
            model,
            d,
            n,
            replicas,
            seed,
            regeneration,
            holder_alphas,
            scales,
            moment_p,
            record_paths,
            out,
            workers,
            echo,
        })
    }
}
