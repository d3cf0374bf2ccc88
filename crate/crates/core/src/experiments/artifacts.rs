//! CSV and JSON writers. Numbers use the shortest round-trip decimal form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::discretization::FieldTrajectory;
use crate::error::Result;
use crate::relative_energy::WeakStrongSeries;

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        out.push_str(&fmt_f64(v));
        first = false;
    }
    out.push('\n');
}

/// Columns `t,x[,y],rho,m_x[,m_y],E`, one row per sample time and cell.
pub fn trajectory_csv(traj: &FieldTrajectory) -> String {
    let two_d = traj.grid.dim() == 2;
    let mut out = String::from(if two_d { "t,x,y,rho,m_x,m_y,E\n" } else { "t,x,rho,m_x,E\n" });
    let centers = traj.grid.centers();
    for (&t, states) in traj.times.iter().zip(&traj.states) {
        for (x, s) in centers.iter().zip(states) {
            if two_d {
                push_row(&mut out, [t, x[0], x[1], s.rho, s.m[0], s.m[1], s.energy]);
            } else {
                push_row(&mut out, [t, x[0], s.rho, s.m[0], s.energy]);
            }
        }
    }
    out
}

/// Columns `t,relative_energy,L1_rho,L1_m,L1_E`.
pub fn relative_energy_csv(series: &WeakStrongSeries) -> String {
    let mut out = String::from("t,relative_energy,L1_rho,L1_m,L1_E\n");
    for k in 0..series.times.len() {
        push_row(
            &mut out,
            [series.times[k], series.relative_energy[k], series.l1_rho[k], series.l1_m[k], series.l1_energy[k]],
        );
    }
    out
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    let _ = writeln!(text);
    write_text(dir, name, &text)
}
