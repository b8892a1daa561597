//! CSV and NDJSON writers for run outputs. CSV floats carry 17 significant
//! digits (`{:.16e}`); NDJSON numbers use serde_json's shortest round-trip
//! form, which reads back bit-identically.

use std::io::{self, Write};

use serde::Serialize;

use crate::bounds::BoundReport;
use crate::dynamics::Trajectory;
use crate::experiments::SweepPoint;
use crate::gradient::{Equilibrium, MorseReport};
use crate::recurrence::{RecurrenceReport, SeparationReport};
use crate::scalar::Scalar;

pub fn fmt_float<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

fn opt<T: Scalar>(x: Option<T>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Columns `t,l2,l4,h2,V,fingerprint`.
pub fn write_trajectory_csv<T: Scalar>(mut w: impl Write, traj: &Trajectory<T>) -> io::Result<()> {
    writeln!(w, "t,l2,l4,h2,V,fingerprint")?;
    for (t, d) in traj.times.iter().zip(&traj.diagnostics) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_float(*t),
            fmt_float(d.norms.l2),
            fmt_float(d.norms.l4),
            fmt_float(d.norms.h2),
            fmt_float(d.v),
            fmt_float(d.fingerprint)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CoeffRecord<'a, T> {
    t: T,
    coeffs: &'a [T],
}

/// One `{"t":…,"coeffs":[…]}` object per sample.
pub fn write_coeffs_ndjson<T: Scalar + Serialize>(mut w: impl Write, traj: &Trajectory<T>) -> io::Result<()> {
    for (t, u) in traj.times.iter().zip(&traj.states) {
        serde_json::to_writer(&mut w, &CoeffRecord { t: *t, coeffs: &u.coeffs })?;
        writeln!(w)?;
    }
    Ok(())
}

/// One serialized equilibrium per line, with an `id` field.
pub fn write_equilibria_ndjson<T: Scalar + Serialize>(mut w: impl Write, eqs: &[Equilibrium<T>]) -> io::Result<()> {
    #[derive(Serialize)]
    struct Rec<'a, T> {
        id: usize,
        #[serde(flatten)]
        e: &'a Equilibrium<T>,
    }
    for (id, e) in eqs.iter().enumerate() {
        serde_json::to_writer(&mut w, &Rec { id, e })?;
        writeln!(w)?;
    }
    Ok(())
}

/// Columns `inequality,max_violation,margin_min,applicable,slack`.
pub fn write_bounds_csv<T: Scalar>(mut w: impl Write, reports: &[BoundReport<T>]) -> io::Result<()> {
    writeln!(w, "inequality,max_violation,margin_min,applicable,slack")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.inequality,
            fmt_float(r.max_violation),
            fmt_float(r.margin_min),
            r.applicable,
            fmt_float(r.slack)
        )?;
    }
    Ok(())
}

/// Columns `eps,ell,max_gap,witnesses`.
pub fn write_recurrence_csv<T: Scalar>(mut w: impl Write, rep: &RecurrenceReport<T>) -> io::Result<()> {
    writeln!(w, "eps,ell,max_gap,witnesses")?;
    for r in &rep.eps_ell {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_float(r.eps),
            fmt_float(r.ell),
            fmt_float(r.max_gap),
            r.witnesses
        )?;
    }
    Ok(())
}

pub fn verdict_line<T: Scalar>(rep: &RecurrenceReport<T>) -> String {
    format!(
        "verdict={} horizon={} norm={} samples={} diameter={}",
        rep.verdict,
        fmt_float(rep.horizon),
        rep.norm_used,
        rep.samples,
        fmt_float(rep.diameter)
    )
}

/// Columns `shift,mean_distance`.
pub fn write_separation_csv<T: Scalar>(mut w: impl Write, rep: &SeparationReport<T>) -> io::Result<()> {
    writeln!(w, "shift,mean_distance")?;
    for (s, d) in rep.shift_grid.iter().zip(&rep.averages) {
        writeln!(w, "{},{}", fmt_float(*s), fmt_float(*d))?;
    }
    Ok(())
}

/// Columns `a,b,r_zero,count_K0,min_V`.
pub fn write_morse_summary_csv<T: Scalar>(mut w: impl Write, reports: &[MorseReport<T>]) -> io::Result<()> {
    writeln!(w, "a,b,r_zero,count_K0,min_V")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(r.a),
            fmt_float(r.b),
            r.r_zero,
            r.k0_members.len(),
            opt(r.min_v())
        )?;
    }
    Ok(())
}

/// Columns `axis,value,r_zero,equilibria,verdict,min_separation,v_increase_fraction,error`.
pub fn write_sweep_csv<T: Scalar>(mut w: impl Write, points: &[SweepPoint<T>]) -> io::Result<()> {
    writeln!(w, "axis,value,r_zero,equilibria,verdict,min_separation,v_increase_fraction,error")?;
    for p in points {
        let verdict = match p.verdict {
            Some(true) => "yes",
            Some(false) => "no",
            None => "",
        };
        let err = p.error.as_deref().unwrap_or("").replace(['"', ',', '\n'], " ");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.axis,
            fmt_float(p.value),
            p.r_zero,
            p.equilibria,
            verdict,
            opt(p.min_separation),
            opt(p.v_increase_fraction),
            err
        )?;
    }
    Ok(())
}
