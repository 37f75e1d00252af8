//! Plain CSV exchange formats.
//!
//! Floating-point values are written in `{:.16e}` form so files round-trip
//! exactly for `f64`.

use std::fmt::Write as _;

use crate::channel::{EstimationParams, LargeScaleMatrix};
use crate::closed_form::ApproxKind;
use crate::error::{Error, Result};
use crate::geometry::{DeploymentMode, Topology};
use crate::linalg::RMatrix;
use crate::montecarlo::{CsiMode, SimConfig};
use crate::order_stats::QRow;
use crate::scalar::Real;
use crate::stats::Estimate;

pub const TOPOLOGY_HEADER: &str = "role,index,x,y";
pub const MATRIX_HEADER: &str = "l,k,value";
pub const APPROX_HEADER: &str = "user,kind,colocated,rho_u_db,rho_p_db,value_bits";
pub const EXPERIMENT_HEADER: &str = "L,K,alpha,rho_u_db,rho_p_db,csi,mode,metric,value,stderr";
pub const Q_TABLE_HEADER: &str = "l,L,K,alpha,q_numeric,q_error,q_asymptotic";

fn e<T: Real>(v: T) -> String {
    format!("{:.16e}", v)
}

pub fn write_topology<T: Real>(t: &Topology<T>) -> String {
    let mut out = format!("{TOPOLOGY_HEADER}\n");
    for (role, points) in [("antenna", t.antennas()), ("user", t.users())] {
        for (i, p) in points.iter().enumerate() {
            let _ = writeln!(out, "{role},{i},{},{}", e(p[0]), e(p[1]));
        }
    }
    out
}

fn fields(line: &str, n: usize, lineno: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != n {
        return Err(Error::Format(format!("line {lineno}: expected {n} fields, found {}", f.len())));
    }
    Ok(f)
}

fn number<T: Real>(s: &str, lineno: usize) -> Result<T> {
    T::parse_decimal(s).ok_or_else(|| Error::Format(format!("line {lineno}: bad number {s:?}")))
}

fn index(s: &str, lineno: usize) -> Result<usize> {
    s.parse().map_err(|_| Error::Format(format!("line {lineno}: bad index {s:?}")))
}

fn body<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => Ok(lines.map(|(i, l)| (i + 1, l))),
        _ => Err(Error::Format(format!("missing header {header:?}"))),
    }
}

/// Parse a topology; it is co-located when every antenna is at the origin
/// and there is more than one antenna or the only one is at the origin.
pub fn read_topology<T: Real>(text: &str) -> Result<Topology<T>> {
    let mut antennas = Vec::new();
    let mut users = Vec::new();
    for (lineno, line) in body(text, TOPOLOGY_HEADER)? {
        let f = fields(line, 4, lineno)?;
        let i = index(f[1], lineno)?;
        let p = [number::<T>(f[2], lineno)?, number::<T>(f[3], lineno)?];
        let target = match f[0] {
            "antenna" => &mut antennas,
            "user" => &mut users,
            other => return Err(Error::Format(format!("line {lineno}: unknown role {other:?}"))),
        };
        if i != target.len() {
            return Err(Error::Format(format!("line {lineno}: index {i} out of sequence")));
        }
        target.push(p);
    }
    let colocated = !antennas.is_empty() && antennas.iter().all(|p| p[0] == T::zero() && p[1] == T::zero());
    let mode = if colocated { DeploymentMode::Colocated } else { DeploymentMode::CellFree };
    Topology::new(antennas, users, mode)
}

pub fn write_matrix<T: Real>(m: &RMatrix<T>) -> String {
    let mut out = format!("{MATRIX_HEADER}\n");
    for k in 0..m.cols() {
        for l in 0..m.rows() {
            let _ = writeln!(out, "{l},{k},{}", e(m.get(l, k)));
        }
    }
    out
}

pub fn read_matrix<T: Real>(text: &str) -> Result<RMatrix<T>> {
    let mut entries = Vec::new();
    let (mut rows, mut cols) = (0, 0);
    for (lineno, line) in body(text, MATRIX_HEADER)? {
        let f = fields(line, 3, lineno)?;
        let (l, k) = (index(f[0], lineno)?, index(f[1], lineno)?);
        rows = rows.max(l + 1);
        cols = cols.max(k + 1);
        entries.push((l, k, number::<T>(f[2], lineno)?));
    }
    if entries.len() != rows * cols {
        return Err(Error::Format(format!("expected {} entries for a {rows}x{cols} matrix, found {}", rows * cols, entries.len())));
    }
    let mut m = RMatrix::filled(rows, cols, T::nan());
    for (l, k, v) in entries {
        m.set(l, k, v);
    }
    if m.iter().any(|v| v.is_nan()) {
        return Err(Error::Format("duplicate matrix entries".into()));
    }
    Ok(m)
}

pub fn write_large_scale<T: Real>(ls: &LargeScaleMatrix<T>) -> String {
    write_matrix(ls.gamma())
}

/// Estimate and error variances as two matrix blocks.
pub fn write_estimation<T: Real>(est: &EstimationParams<T>) -> (String, String) {
    (write_matrix(est.gamma_hat()), write_matrix(est.gamma_tilde()))
}

/// One approximation value for the batch CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxRecord<T> {
    pub user: usize,
    pub kind: ApproxKind,
    pub colocated: bool,
    pub rho_u_db: T,
    pub rho_p_db: Option<T>,
    pub value_bits: T,
}

pub fn write_approximations<T: Real>(records: &[ApproxRecord<T>]) -> String {
    let mut out = format!("{APPROX_HEADER}\n");
    for r in records {
        let rho_p = r.rho_p_db.map(|v| format!("{v}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.user,
            r.kind.as_str(),
            r.colocated,
            r.rho_u_db,
            rho_p,
            e(r.value_bits)
        );
    }
    out
}

/// Rows of the experiment CSV for one configuration.
pub fn experiment_rows<T: Real>(config: &SimConfig<T>, metrics: &[(&str, Estimate<T>)]) -> String {
    let mut out = String::new();
    let rho_p = match config.csi {
        CsiMode::Perfect => String::new(),
        CsiMode::Imperfect => format!("{}", config.rho_p_db),
    };
    for (name, est) in metrics {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            config.antennas,
            config.users,
            config.alpha,
            config.rho_u_db,
            rho_p,
            config.csi.as_str(),
            config.mode.as_str(),
            name,
            e(est.mean),
            e(est.std_error)
        );
    }
    out
}

pub fn write_q_table<T: Real>(rows: &[QRow<T>]) -> String {
    let mut out = format!("{Q_TABLE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.l,
            r.antennas,
            r.users,
            r.alpha,
            e(r.numeric.value),
            e(r.numeric.abs_error_estimate),
            e(r.asymptotic)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::colocated_topology;
    use crate::rng::{stream_at, Domain};

    #[test]
    fn topology_round_trip() {
        let t: Topology<f64> = Topology::random(7, 3, &mut stream_at(1, Domain::Oracle, 0, 0)).unwrap();
        let back: Topology<f64> = read_topology(&write_topology(&t)).unwrap();
        assert_eq!(back, t);
        let c = colocated_topology(4, vec![[0.1, 0.2]]).unwrap();
        assert_eq!(read_topology::<f64>(&write_topology(&c)).unwrap(), c);
    }

    #[test]
    fn matrix_round_trip_and_errors() {
        let m = RMatrix::from_fn(3, 2, |i, j| 0.1 + i as f64 / 7.0 + j as f64);
        assert_eq!(read_matrix::<f64>(&write_matrix(&m)).unwrap(), m);
        assert!(read_matrix::<f64>("l,k,value\n0,0,1\n1,1,2\n").is_err());
        assert!(read_matrix::<f64>("a,b\n").is_err());
        assert!(read_topology::<f64>("role,index,x,y\nbogus,0,0,0\n").is_err());
    }

    #[test]
    fn experiment_rows_have_header_arity() {
        let rows = experiment_rows(&SimConfig::<f64>::fast(), &[("sim_rate", Estimate::exact(1.5))]);
        let n = EXPERIMENT_HEADER.split(',').count();
        for line in rows.lines() {
            assert_eq!(line.split(',').count(), n);
        }
    }
}
