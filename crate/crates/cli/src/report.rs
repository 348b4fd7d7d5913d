//! Report rows and their CSV form.

use std::io::Write;

use freelip_core::io::format_g17;

/// One checked inequality `measured ≤ bound`. Nonnegative slack passes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub suite: String,
    pub instance: usize,
    /// Which quantity of the instance is checked.
    pub quantity: String,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub wall_ms: f64,
}

impl ReportRow {
    pub fn new(suite: &str, instance: usize, quantity: impl Into<String>, measured: f64, bound: f64, wall_ms: f64) -> Self {
        Self {
            suite: suite.to_string(),
            instance,
            quantity: quantity.into(),
            measured,
            bound,
            slack: bound - measured,
            wall_ms,
        }
    }

    /// NaN slack never passes.
    pub fn passes(&self, tolerance: f64) -> bool {
        self.slack >= -tolerance
    }
}

pub const HEADER: [&str; 7] = ["suite", "instance", "quantity", "measured", "bound", "slack", "wall_ms"];

/// Writes rows with floats at 17 significant digits. Without timing the
/// `wall_ms` column is dropped, which makes the output reproducible.
pub fn write_csv<W: Write>(rows: &[ReportRow], out: W, with_timing: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let cols = if with_timing { HEADER.len() } else { HEADER.len() - 1 };
    w.write_record(&HEADER[..cols])?;
    for r in rows {
        let mut rec = vec![
            r.suite.clone(),
            r.instance.to_string(),
            r.quantity.clone(),
            format_g17(r.measured),
            format_g17(r.bound),
            format_g17(r.slack),
        ];
        if with_timing {
            rec.push(format!("{:.3}", r.wall_ms));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ReportRow], with_timing: bool) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf, with_timing).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_sign_and_csv() {
        let r = ReportRow::new("kalton", 3, "ratio", 2.5, 72.0, 1.0);
        assert_eq!(r.slack, 69.5);
        assert!(r.passes(0.0));
        assert!(!ReportRow::new("x", 0, "q", f64::NAN, 1.0, 0.0).passes(1.0));
        let text = to_csv_string(&[r], false);
        assert_eq!(text, "suite,instance,quantity,measured,bound,slack\nkalton,3,ratio,2.5,72,69.5\n");
    }
}
