//! gnuplot scripts next to the data files. Run with `gnuplot <name>.gp`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cellfree::{CsiMode, SimConfig64};

use crate::config::ExperimentSpec;
use crate::experiment::CDF_SERIES;
use crate::CliError;

/// Column of a sweep key in the experiment CSV, when it has one.
fn column(key: &str) -> Option<usize> {
    Some(match key {
        "sim.L" => 1,
        "sim.K" => 2,
        "sim.alpha" => 3,
        "sim.rho_u_db" => 4,
        "sim.rho_p_db" => 5,
        "sim.csi" => 6,
        "sim.mode" => 7,
        _ => return None,
    })
}

fn cell(c: &SimConfig64, col: usize) -> String {
    match col {
        1 => c.antennas.to_string(),
        2 => c.users.to_string(),
        3 => c.alpha.to_string(),
        4 => c.rho_u_db.to_string(),
        5 if c.csi == CsiMode::Imperfect => c.rho_p_db.to_string(),
        5 => String::new(),
        6 => c.csi.as_str().to_string(),
        _ => c.mode.as_str().to_string(),
    }
}

fn header(out: &mut String, title: &str, data: &Path) {
    let stem = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set terminal pngcairo size 900,600");
    let _ = writeln!(out, "set output '{stem}.png'");
    let _ = writeln!(out, "set title '{title}'");
    let _ = writeln!(out, "set key outside right");
    let _ = writeln!(out, "set grid");
}

fn file_name(data: &Path) -> String {
    data.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn write_grid_script(spec: &ExperimentSpec, points: &[SimConfig64], data: &Path) -> Result<PathBuf, CliError> {
    let cols: Vec<usize> = spec.sweep.iter().filter_map(|(k, _)| column(k)).collect();
    let x = cols.first().copied().unwrap_or(1);
    let rest: Vec<usize> = cols.iter().copied().filter(|&c| c != x).collect();
    let groups: BTreeSet<Vec<String>> = points.iter().map(|p| rest.iter().map(|&c| cell(p, c)).collect()).collect();

    let mut out = String::new();
    header(&mut out, &spec.name, data);
    let xlabel = ["L", "K", "alpha", "rho_u (dB)", "rho_p (dB)", "csi", "mode"][x - 1];
    let _ = writeln!(out, "set xlabel '{xlabel}'");
    let _ = writeln!(out, "set ylabel 'bits/s/Hz'");
    let file = file_name(data);
    let mut plots = Vec::new();
    for group in &groups {
        for metric in &spec.metrics {
            let mut cond = format!("strcol(8) eq '{metric}'");
            let mut label = metric.clone();
            for (&c, v) in rest.iter().zip(group) {
                let _ = write!(cond, " && strcol({c}) eq '{v}'");
                let _ = write!(label, " {v}");
            }
            plots.push(format!("'{file}' skip 1 using {x}:(({cond}) ? $9 : NaN):10 with yerrorlines title '{label}'"));
        }
    }
    let _ = writeln!(out, "plot \\\n    {}", plots.join(", \\\n    "));
    let path = spec.dir().join(format!("{}.gp", spec.name));
    fs::write(&path, out)?;
    Ok(path)
}

pub fn write_cdf_script(spec: &ExperimentSpec, data: &Path) -> Result<PathBuf, CliError> {
    let mut out = String::new();
    header(&mut out, &spec.name, data);
    let _ = writeln!(out, "set xlabel 'average rate (bits/s/Hz)'");
    let _ = writeln!(out, "set ylabel 'CDF'");
    let file = file_name(data);
    let plots: Vec<String> = CDF_SERIES
        .iter()
        .map(|s| format!("'{file}' skip 1 using ((strcol(1) eq '{s}') ? $2 : NaN):3 with steps title '{s}'"))
        .collect();
    let _ = writeln!(out, "plot \\\n    {}", plots.join(", \\\n    "));
    let path = spec.dir().join(format!("{}.gp", spec.name));
    fs::write(&path, out)?;
    Ok(path)
}
