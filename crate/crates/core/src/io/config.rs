//! Run configuration: presets per subcommand, then a config file, then
//! command-line flags, each overriding the last.
//!
//! Config files are either JSON objects or `key = value` lines (`#` starts a
//! comment). Lists are comma separated: `taus = 0.2, 0.1`.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiments::{CONVERGENCE_TAUS, STIRRING_SNAPSHOTS};
use crate::solve::Method;
use crate::stepper::Config;

pub const OUT_DIR_ENV: &str = "MNS_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Manufactured-solution temporal convergence table.
    Converge,
    /// Energy decay from smooth initial data.
    Stability,
    /// Passive-scalar stirring by an applied torque.
    Stir,
    /// One unforced run with energy output and a final field snapshot.
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Converge => "converge",
            Command::Stability => "stability",
            Command::Stir => "stir",
            Command::Run => "run",
        }
    }
}

/// Every recognised key; anything else is rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub nu: Option<f64>,
    pub nur: Option<f64>,
    pub j: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    #[serde(rename = "T")]
    pub final_time: Option<f64>,
    pub tau: Option<f64>,
    pub h: Option<f64>,
    /// Time steps swept by `converge` and `stability`.
    pub taus: Option<Vec<f64>>,
    /// Viscosities swept by `stability` and `stir`; each run uses ν = ν_r.
    pub nus: Option<Vec<f64>>,
    /// Snapshot times for `stir`.
    pub snapshots: Option<Vec<f64>>,
    pub rtol: Option<f64>,
    pub rtol_div: Option<f64>,
    pub max_iter: Option<usize>,
    /// `direct` or `iterative`.
    pub solver: Option<String>,
}

const KEYS: [&str; 15] = [
    "nu", "nur", "j", "c1", "c2", "T", "tau", "h", "taus", "nus", "snapshots", "rtol", "rtol_div",
    "max_iter", "solver",
];

impl Overrides {
    /// Later values win.
    pub fn merge(self, later: Overrides) -> Overrides {
        Overrides {
            nu: later.nu.or(self.nu),
            nur: later.nur.or(self.nur),
            j: later.j.or(self.j),
            c1: later.c1.or(self.c1),
            c2: later.c2.or(self.c2),
            final_time: later.final_time.or(self.final_time),
            tau: later.tau.or(self.tau),
            h: later.h.or(self.h),
            taus: later.taus.or(self.taus),
            nus: later.nus.or(self.nus),
            snapshots: later.snapshots.or(self.snapshots),
            rtol: later.rtol.or(self.rtol),
            rtol_div: later.rtol_div.or(self.rtol_div),
            max_iter: later.max_iter.or(self.max_iter),
            solver: later.solver.or(self.solver),
        }
    }
}

fn parse_scalar(raw: &str) -> Value {
    match raw.parse::<f64>() {
        Ok(v) if raw.parse::<u64>().is_ok() => Value::from(v as u64),
        Ok(v) => Value::from(v),
        Err(_) => Value::from(raw.trim_matches('"')),
    }
}

/// Parse config text. `origin` names the source in error messages.
pub fn parse_config_str(text: &str, origin: &str) -> Result<Overrides> {
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.into(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        return serde_json::from_value(value).map_err(|e| Error::Parse {
            path: origin.into(),
            line: 0,
            msg: e.to_string(),
        });
    }
    let mut map = Map::new();
    for (k, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Parse {
            path: origin.into(),
            line: k + 1,
            msg,
        };
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, raw) = (key.trim(), raw.trim());
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key `{key}`")));
        }
        let value = if matches!(key, "taus" | "nus" | "snapshots") {
            Value::Array(raw.split(',').map(|s| parse_scalar(s.trim())).collect())
        } else {
            parse_scalar(raw)
        };
        map.insert(key.to_string(), value);
        // Type errors are reported against the line that introduced them.
        serde_json::from_value::<Overrides>(Value::Object(map.clone()))
            .map_err(|e| err(format!("`{key}`: {e}")))?;
    }
    Ok(serde_json::from_value(Value::Object(map))?)
}

pub fn parse_config_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, &path.display().to_string())
}

/// A fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    /// Base parameters; sweeps override `nu`, `nu_r` and `tau`.
    pub config: Config,
    pub taus: Vec<f64>,
    pub nus: Vec<f64>,
    pub snapshots: Vec<f64>,
    /// Fixed ν_r; otherwise each run uses ν_r = ν.
    pub nur: Option<f64>,
    pub out_dir: PathBuf,
}

fn preset(command: Command) -> (Config, Vec<f64>, Vec<f64>) {
    let base = Config::default();
    match command {
        Command::Converge => (
            Config {
                final_time: 1.0,
                h: 1.0 / 64.0,
                ..base
            },
            CONVERGENCE_TAUS.to_vec(),
            vec![1.0],
        ),
        Command::Stability => (
            Config {
                final_time: 5.0,
                h: 1.0 / 64.0,
                ..base
            },
            vec![1.0, 0.1, 0.01],
            vec![0.1, 0.01],
        ),
        Command::Stir => (
            Config {
                final_time: 25.0,
                tau: 0.01,
                h: 1.0 / 48.0,
                ..base
            },
            vec![0.01],
            vec![0.1, 0.01, 0.001],
        ),
        Command::Run => (
            Config {
                nu: 0.1,
                nu_r: 0.1,
                final_time: 5.0,
                tau: 0.1,
                h: 1.0 / 32.0,
                ..base
            },
            vec![0.1],
            vec![0.1],
        ),
    }
}

/// Output directory: explicit flag, else `$MNS_OUT_DIR`, else `./out`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

impl RunSpec {
    pub fn resolve(command: Option<Command>, overrides: Overrides, out_dir: PathBuf) -> Result<RunSpec> {
        let command =
            command.ok_or_else(|| Error::InvalidConfig("a subcommand is required".into()))?;
        let (mut config, mut taus, mut nus) = preset(command);
        let o = overrides;
        if let Some(nu) = o.nu {
            nus = vec![nu];
        }
        if let Some(list) = o.nus {
            nus = list;
        }
        if let Some(tau) = o.tau {
            config.tau = tau;
            taus = vec![tau];
        }
        if let Some(list) = o.taus {
            taus = list;
        }
        if let Some(&first) = nus.first() {
            config.nu = first;
            config.nu_r = o.nur.unwrap_or(first);
        }
        config.inertia = o.j.unwrap_or(config.inertia);
        config.c1 = o.c1.unwrap_or(config.c1);
        config.c2 = o.c2.unwrap_or(config.c2);
        config.final_time = o.final_time.unwrap_or(config.final_time);
        config.h = o.h.unwrap_or(config.h);
        config.solver.rtol = o.rtol.unwrap_or(config.solver.rtol);
        config.solver.rtol_div = o.rtol_div.unwrap_or(config.solver.rtol_div);
        config.solver.max_iter = o.max_iter.unwrap_or(config.solver.max_iter);
        if let Some(s) = o.solver.as_deref() {
            config.solver.method = match s {
                "direct" => Method::Direct,
                "iterative" => Method::Iterative,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "solver must be `direct` or `iterative`, got `{other}`"
                    )))
                }
            };
        }
        if command == Command::Stir || command == Command::Run {
            config.tau = o.tau.unwrap_or(taus.first().copied().unwrap_or(config.tau));
            taus = vec![config.tau];
        }
        config.validate()?;
        if taus.is_empty() || nus.is_empty() {
            return Err(Error::InvalidConfig("taus and nus must be nonempty".into()));
        }
        for (name, list) in [("taus", &taus), ("nus", &nus)] {
            if let Some(bad) = list.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {bad}")));
            }
        }
        let snapshots = o.snapshots.unwrap_or_else(|| STIRRING_SNAPSHOTS.to_vec());
        Ok(RunSpec {
            command,
            config,
            taus,
            nus,
            snapshots,
            nur: o.nur,
            out_dir,
        })
    }

    /// Base config with viscosity `nu` and the given step.
    pub fn config_for(&self, nu: f64, tau: f64) -> Config {
        let mut cfg = self.config.clone();
        cfg.nu = nu;
        cfg.nu_r = self.nur.unwrap_or(nu);
        cfg.tau = tau;
        cfg
    }
}
