//! CSV output for RMSE curves and trial logs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{RmseCurve, TrialLog};
use crate::{Error, Result};

/// A table with a fixed header and one row per step.
pub trait CsvTable {
    fn header(&self) -> &'static str;
    fn write_rows(&self, out: &mut dyn Write) -> std::io::Result<()>;
}

/// Formats with 9 significant digits, `.` as decimal point and no exponent
/// unless the magnitude calls for one.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_fraction(&s).to_string()
    } else {
        let s = format!("{v:.8e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        format!("{}e{e}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl CsvTable for RmseCurve {
    fn header(&self) -> &'static str {
        "step,time_s,rmse_m"
    }

    fn write_rows(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for (i, r) in self.rmse.iter().enumerate() {
            let k = i + 1;
            writeln!(
                out,
                "{k},{},{}",
                format_number(k as f64 * self.dt),
                format_number(*r)
            )?;
        }
        Ok(())
    }
}

impl CsvTable for TrialLog {
    fn header(&self) -> &'static str {
        "step,time_s,true_x,true_y,true_theta,true_gamma,est_x,est_y,est_theta,est_gamma,\
         var_x,var_y,var_theta,var_gamma,detections,degenerate"
    }

    fn write_rows(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for r in &self.records {
            let values = [
                r.step as f64 * self.dt,
                r.truth.x,
                r.truth.y,
                r.truth.heading,
                r.truth.altitude,
                r.estimate.x,
                r.estimate.y,
                r.estimate.heading,
                r.estimate.altitude,
                r.variance[0],
                r.variance[1],
                r.variance[2],
                r.variance[3],
            ];
            write!(out, "{}", r.step)?;
            for v in values {
                write!(out, ",{}", format_number(v))?;
            }
            writeln!(out, ",{},{}", r.detections, u8::from(r.degenerate))?;
        }
        Ok(())
    }
}

pub fn write_csv_to(table: &dyn CsvTable, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", table.header())?;
    table.write_rows(out)?;
    out.flush()
}

pub fn write_csv(table: &dyn CsvTable, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    write_csv_to(table, &mut out).map_err(io)
}
