use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cellfree::io::{experiment_rows, EXPERIMENT_HEADER};
use cellfree::montecarlo::PlacementSample;
use cellfree::{average_over_topologies, DeploymentMode, SimConfig64};

use crate::config::{ExperimentKind, ExperimentSpec};
use crate::plot;
use crate::CliError;

pub const CDF_HEADER: &str = "series,rate,cdf";

/// Files written by a finished run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub data: PathBuf,
    pub manifest: PathBuf,
    pub script: PathBuf,
    pub points: usize,
}

/// A data file that carries a `.partial` suffix until `finish` is called.
struct Staged {
    final_path: PathBuf,
    partial_path: PathBuf,
    text: String,
}

impl Staged {
    fn new(path: PathBuf, header: &str) -> Result<Self, CliError> {
        let mut partial = path.clone().into_os_string();
        partial.push(".partial");
        let staged = Self {
            final_path: path,
            partial_path: partial.into(),
            text: format!("{header}\n"),
        };
        fs::write(&staged.partial_path, &staged.text)?;
        Ok(staged)
    }

    fn append(&mut self, chunk: &str) -> Result<(), CliError> {
        self.text.push_str(chunk);
        fs::write(&self.partial_path, &self.text)?;
        Ok(())
    }

    fn finish(self) -> Result<PathBuf, CliError> {
        fs::write(&self.partial_path, &self.text)?;
        fs::rename(&self.partial_path, &self.final_path)?;
        Ok(self.final_path)
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

fn manifest_text(spec: &ExperimentSpec, wall: f64, points: usize, error: Option<&CliError>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# cellfree {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# seed={}", spec.config.master_seed);
    let _ = writeln!(out, "# preset={}", spec.preset.as_str());
    let _ = writeln!(out, "# points={points}");
    let _ = writeln!(out, "# wall_time_s={wall:.3}");
    if let Some(e) = error {
        let _ = writeln!(out, "# error={e}");
    }
    out.push_str(&spec.to_text());
    out
}

fn write_manifest(spec: &ExperimentSpec, started: Instant, points: usize, error: Option<&CliError>) -> Result<PathBuf, CliError> {
    let text = manifest_text(spec, started.elapsed().as_secs_f64(), points, error);
    let path = spec.dir().join("manifest.txt");
    if error.is_some() {
        let partial = spec.dir().join("manifest.txt.partial");
        fs::write(&partial, text)?;
        return Ok(partial);
    }
    fs::write(&path, text)?;
    Ok(path)
}

/// Runs every sweep point and writes the experiment CSV, one CSV per metric
/// per point under `points/`, a manifest and a gnuplot script.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunSummary, CliError> {
    if spec.kind == ExperimentKind::Cdf {
        return run_cdf_experiment(spec);
    }
    let points = spec.validate()?;
    prepare_dir(&spec.dir())?;
    let started = Instant::now();
    let mut data = Staged::new(spec.dir().join(format!("{}.csv", spec.name)), EXPERIMENT_HEADER)?;

    let outcome = (|| -> Result<(), CliError> {
        for (i, config) in points.iter().enumerate() {
            let report = average_over_topologies(config)?;
            let metrics: Vec<_> = report
                .metrics()
                .into_iter()
                .filter(|(name, _)| spec.metrics.iter().any(|m| m == name))
                .collect();
            let point_dir = spec.dir().join("points").join(format!("p{i:03}"));
            fs::create_dir_all(&point_dir)?;
            for m in &metrics {
                let text = format!("{EXPERIMENT_HEADER}\n{}", experiment_rows(config, std::slice::from_ref(m)));
                fs::write(point_dir.join(format!("{}.csv", m.0)), text)?;
            }
            data.append(&experiment_rows(config, &metrics))?;
        }
        Ok(())
    })();

    if let Err(e) = outcome {
        write_manifest(spec, started, points.len(), Some(&e))?;
        return Err(e);
    }
    let data = data.finish()?;
    let script = plot::write_grid_script(spec, &points, &data)?;
    let manifest = write_manifest(spec, started, points.len(), None)?;
    Ok(RunSummary {
        data,
        manifest,
        script,
        points: points.len(),
    })
}

/// Per-placement user-averaged rates of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementAverages {
    pub sim: Vec<f64>,
    pub ub: Vec<f64>,
    pub lb: Vec<f64>,
}

fn avg(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn placement_averages(samples: &[PlacementSample<f64>]) -> PlacementAverages {
    PlacementAverages {
        sim: samples.iter().map(|s| s.mean_sim()).collect(),
        ub: samples.iter().map(|s| avg(&s.approx_ub)).collect(),
        lb: samples.iter().map(|s| avg(&s.approx_lb)).collect(),
    }
}

/// Sorted samples with their empirical CDF `i / n`.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

pub const CDF_SERIES: [&str; 6] = ["cellfree_sim", "cellfree_ub", "cellfree_lb", "colocated_sim", "colocated_ub", "colocated_lb"];

/// Runs the configuration once per deployment and writes the empirical CDF of
/// the per-placement average rate for the simulation and both closed forms.
pub fn run_cdf_experiment(spec: &ExperimentSpec) -> Result<RunSummary, CliError> {
    spec.validate()?;
    prepare_dir(&spec.dir())?;
    let started = Instant::now();
    let mut data = Staged::new(spec.dir().join(format!("{}.csv", spec.name)), CDF_HEADER)?;

    let outcome = (|| -> Result<(), CliError> {
        for (mode, names) in [(DeploymentMode::CellFree, &CDF_SERIES[..3]), (DeploymentMode::Colocated, &CDF_SERIES[3..])] {
            let config = SimConfig64 { mode, ..spec.config };
            let report = average_over_topologies(&config)?;
            let avgs = placement_averages(&report.samples);
            let mut chunk = String::new();
            for (name, values) in names.iter().zip([&avgs.sim, &avgs.ub, &avgs.lb]) {
                for (x, f) in empirical_cdf(values) {
                    let _ = writeln!(chunk, "{name},{x:.16e},{f:.16e}");
                }
            }
            data.append(&chunk)?;
        }
        Ok(())
    })();

    if let Err(e) = outcome {
        write_manifest(spec, started, 1, Some(&e))?;
        return Err(e);
    }
    let data = data.finish()?;
    let script = plot::write_cdf_script(spec, &data)?;
    let manifest = write_manifest(spec, started, 1, None)?;
    Ok(RunSummary {
        data,
        manifest,
        script,
        points: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_steps() {
        assert_eq!(empirical_cdf(&[3.0, 1.0, 2.0]), vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]);
        assert_eq!(empirical_cdf(&[5.0]), vec![(5.0, 1.0)]);
    }
}
