//! Experiment specs behind `cellfree reproduce`.

use crate::config::{ExperimentKind, ExperimentSpec};
use crate::CliError;

pub const TARGETS: &[&str] = &["fig2a", "fig2b", "fig3a", "fig3b", "fig4", "table1", "table2"];

const L_GRID: &str = "150,200,250,300,350,400,450,500";
const L_NOTE: &str = "L grid 150,200,...,500 (the figure gives only the 150-500 range)";
const RHO_P_GRID: &str = "-20,-10,0,10,20,30,40";

pub fn preset(target: &str) -> Result<ExperimentSpec, CliError> {
    let mut s = ExperimentSpec::new(target);
    let mut set = |k: &str, v: &str| s.set(k, v);
    match target {
        "fig2a" | "fig2b" => {
            set("sim.csi", if target == "fig2a" { "perfect" } else { "imperfect" })?;
            set("sweep.sim.L", L_GRID)?;
            set("sweep.sim.mode", "cellfree,colocated")?;
            set("experiment.metrics", "sim_rate,approx_ub,approx_lb,coloc_ub,coloc_lb")?;
            set("experiment.note", L_NOTE)?;
        }
        "fig3a" | "fig3b" => {
            set("sim.csi", if target == "fig3a" { "perfect" } else { "imperfect" })?;
            set("sim.rho_u_db", "0")?;
            set("sim.rho_p_db", "10")?;
            set("experiment.kind", "cdf")?;
        }
        "fig4" => {
            set("sweep.sim.rho_p_db", RHO_P_GRID)?;
            set("sweep.sim.csi", "imperfect,perfect")?;
            set("sweep.sim.mode", "cellfree,colocated")?;
            set("experiment.metrics", "sim_rate,approx_ub,approx_lb")?;
        }
        "table1" | "table2" => {
            set("sweep.sim.L", L_GRID)?;
            set("sweep.sim.alpha", "3,4")?;
            set("sweep.sim.csi", "perfect,imperfect")?;
            set("experiment.metrics", if target == "table1" { "rae_ub_pct" } else { "rae_lb_pct" })?;
        }
        other => return Err(CliError::Config(format!("unknown target {other:?}; expected one of {}", TARGETS.join(", ")))),
    }
    debug_assert!(s.kind == ExperimentKind::Cdf || !s.metrics.is_empty());
    Ok(s)
}
