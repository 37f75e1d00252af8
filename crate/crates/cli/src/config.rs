//! Flat `key=value` experiment files.
//!
//! ```text
//! # comment
//! experiment.name=fig2a
//! sim.L=300
//! sim.rho_u_db=-10
//! sweep.sim.L=150,200,250
//! ```
//!
//! Later assignments win. Setting a `sim.*` key that is currently swept pins
//! it and drops the sweep.

use std::path::PathBuf;

use cellfree::{CsiMode, DeploymentMode, SimConfig64};

use crate::CliError;

pub const SIM_KEYS: &[&str] = &[
    "sim.L",
    "sim.K",
    "sim.alpha",
    "sim.rho_u_db",
    "sim.rho_p_db",
    "sim.n_user_topologies",
    "sim.n_antenna_topologies",
    "sim.n_small_scale",
    "sim.seed",
    "sim.csi",
    "sim.mode",
    "sim.min_distance",
];

pub const METRICS: &[&str] = &["sim_rate", "approx_ub", "approx_lb", "coloc_ub", "coloc_lb", "rae_ub_pct", "rae_lb_pct"];

pub const SEED_ENV: &str = "CELLFREE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Placement-averaged metrics at every sweep point.
    Grid,
    /// Empirical CDF of per-placement average rates.
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Full,
    Fast,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Full => "full",
            Preset::Fast => "fast",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub config: SimConfig64,
    /// `(sim key, raw values)`, outermost first.
    pub sweep: Vec<(String, Vec<String>)>,
    pub metrics: Vec<String>,
    /// Defaults to `out/<name>`.
    pub output_dir: Option<PathBuf>,
    pub preset: Preset,
    pub note: Option<String>,
}

impl ExperimentSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ExperimentKind::Grid,
            config: SimConfig64::standard(),
            sweep: Vec::new(),
            metrics: METRICS.iter().map(|m| m.to_string()).collect(),
            output_dir: None,
            preset: Preset::Full,
            note: None,
        }
    }

    pub fn dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn set_preset(&mut self, preset: Preset) {
        self.preset = preset;
        if preset == Preset::Fast {
            let fast = SimConfig64::fast();
            self.config.n_user_topologies = fast.n_user_topologies;
            self.config.n_antenna_topologies = fast.n_antenna_topologies;
            self.config.n_small_scale = fast.n_small_scale;
        }
    }

    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        if let Some(sim_key) = key.strip_prefix("sweep.") {
            if !SIM_KEYS.contains(&sim_key) {
                return Err(config_err(format!("cannot sweep unknown key {sim_key:?}")));
            }
            let values: Vec<String> = value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(config_err(format!("sweep over {sim_key} has no values")));
            }
            let mut probe = self.config;
            for v in &values {
                set_sim(&mut probe, sim_key, v)?;
            }
            self.sweep.retain(|(k, _)| k != sim_key);
            self.sweep.push((sim_key.to_string(), values));
            return Ok(());
        }
        if key.starts_with("sim.") {
            set_sim(&mut self.config, key, value)?;
            self.sweep.retain(|(k, _)| k != key);
            return Ok(());
        }
        match key {
            "experiment.name" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(config_err(format!("bad experiment name {value:?}")));
                }
                self.name = value.to_string();
            }
            "experiment.kind" => {
                self.kind = match value {
                    "grid" => ExperimentKind::Grid,
                    "cdf" => ExperimentKind::Cdf,
                    other => return Err(config_err(format!("unknown experiment kind {other:?}"))),
                }
            }
            "experiment.metrics" => {
                let metrics: Vec<String> = value.split(',').map(|m| m.trim().to_string()).collect();
                if let Some(bad) = metrics.iter().find(|m| !METRICS.contains(&m.as_str())) {
                    return Err(config_err(format!("unknown metric {bad:?}")));
                }
                self.metrics = metrics;
            }
            "experiment.output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "experiment.preset" => match value {
                "full" => self.set_preset(Preset::Full),
                "fast" => self.set_preset(Preset::Fast),
                other => return Err(config_err(format!("unknown preset {other:?}"))),
            },
            "experiment.note" => self.note = Some(value.to_string()),
            other => return Err(config_err(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key=value, found {line:?}", n + 1)))?;
            self.set(k.trim(), v).map_err(|e| match e {
                CliError::Config(msg) => config_err(format!("line {}: {msg}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Overrides the seed from `CELLFREE_SEED` when it is set.
    pub fn apply_seed_env(&mut self) -> Result<(), CliError> {
        match std::env::var(SEED_ENV) {
            Ok(v) => set_sim(&mut self.config, "sim.seed", &v).map_err(|_| config_err(format!("{SEED_ENV}={v:?} is not a seed"))),
            Err(_) => Ok(()),
        }
    }

    /// Every configuration the sweep visits, last key varying fastest.
    pub fn points(&self) -> Result<Vec<SimConfig64>, CliError> {
        let mut points = vec![self.config];
        for (key, values) in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for p in &points {
                for v in values {
                    let mut c = *p;
                    set_sim(&mut c, key, v)?;
                    next.push(c);
                }
            }
            points = next;
        }
        Ok(points)
    }

    /// Checks every sweep point before anything runs.
    pub fn validate(&self) -> Result<Vec<SimConfig64>, CliError> {
        if self.kind == ExperimentKind::Cdf && !self.sweep.is_empty() {
            return Err(config_err("CDF experiments take no sweep".into()));
        }
        if self.metrics.is_empty() {
            return Err(config_err("no metrics selected".into()));
        }
        let points = self.points()?;
        for p in &points {
            p.validate().map_err(|e| config_err(e.to_string()))?;
        }
        Ok(points)
    }

    /// The spec as config text. Reading it back reproduces the run.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("experiment.name", self.name.clone());
        line(
            "experiment.kind",
            match self.kind {
                ExperimentKind::Grid => "grid",
                ExperimentKind::Cdf => "cdf",
            }
            .into(),
        );
        line("experiment.preset", self.preset.as_str().into());
        line("experiment.metrics", self.metrics.join(","));
        if let Some(d) = &self.output_dir {
            line("experiment.output_dir", d.display().to_string());
        }
        if let Some(n) = &self.note {
            line("experiment.note", n.clone());
        }
        for key in SIM_KEYS {
            line(key, get_sim(c, key));
        }
        for (k, vs) in &self.sweep {
            line(&format!("sweep.{k}"), vs.join(","));
        }
        out
    }
}

fn config_err(msg: String) -> CliError {
    CliError::Config(msg)
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, CliError> {
    value.parse().map_err(|_| config_err(format!("{key}: cannot parse {value:?}")))
}

pub fn set_sim(c: &mut SimConfig64, key: &str, value: &str) -> Result<(), CliError> {
    let value = value.trim();
    match key {
        "sim.L" => c.antennas = parse(key, value)?,
        "sim.K" => c.users = parse(key, value)?,
        "sim.alpha" => c.alpha = parse(key, value)?,
        "sim.rho_u_db" => c.rho_u_db = parse(key, value)?,
        "sim.rho_p_db" => c.rho_p_db = parse(key, value)?,
        "sim.n_user_topologies" => c.n_user_topologies = parse(key, value)?,
        "sim.n_antenna_topologies" => c.n_antenna_topologies = parse(key, value)?,
        "sim.n_small_scale" => c.n_small_scale = parse(key, value)?,
        "sim.seed" => c.master_seed = parse(key, value)?,
        "sim.csi" => c.csi = value.parse::<CsiMode>().map_err(|e| config_err(e.to_string()))?,
        "sim.mode" => c.mode = value.parse::<DeploymentMode>().map_err(|e| config_err(e.to_string()))?,
        "sim.min_distance" => c.min_distance = parse(key, value)?,
        other => return Err(config_err(format!("unknown key {other:?}"))),
    }
    Ok(())
}

pub fn get_sim(c: &SimConfig64, key: &str) -> String {
    match key {
        "sim.L" => c.antennas.to_string(),
        "sim.K" => c.users.to_string(),
        "sim.alpha" => c.alpha.to_string(),
        "sim.rho_u_db" => c.rho_u_db.to_string(),
        "sim.rho_p_db" => c.rho_p_db.to_string(),
        "sim.n_user_topologies" => c.n_user_topologies.to_string(),
        "sim.n_antenna_topologies" => c.n_antenna_topologies.to_string(),
        "sim.n_small_scale" => c.n_small_scale.to_string(),
        "sim.seed" => c.master_seed.to_string(),
        "sim.csi" => c.csi.as_str().to_string(),
        "sim.mode" => c.mode.as_str().to_string(),
        "sim.min_distance" => c.min_distance.to_string(),
        _ => String::new(),
    }
}

/// `(key, value)` assignments taken from flags.
pub type Overrides = Vec<(String, String)>;

/// Splits `--sim.L=300`, `--sim.L 300` and the bare aliases (`--alpha 4`)
/// out of an argument list. Returns the remaining arguments and the
/// assignments in order.
pub fn extract_overrides(args: Vec<String>) -> Result<(Vec<String>, Overrides), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match body.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        let Some(key) = override_key(&name) else {
            rest.push(arg);
            continue;
        };
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| config_err(format!("--{name} needs a value")))?,
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

fn override_key(name: &str) -> Option<String> {
    if name.starts_with("sim.") || name.starts_with("sweep.") || name.starts_with("experiment.") {
        return Some(name.to_string());
    }
    let dotted = format!("sim.{name}");
    SIM_KEYS.contains(&dotted.as_str()).then_some(dotted)
}
