//! CSV output: `#` metadata lines, a header row, fixed columns.

use std::io::Write;

use crate::model::EEReport;

/// One evaluated grid point of a sweep (or a single evaluation).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Curve label, e.g. `gamma=3` or `fixed_10x1`.
    pub series: String,
    /// Value of the swept variable.
    pub x: f64,
    pub gamma: f64,
    pub m: f64,
    pub k: f64,
    pub beta: f64,
    pub rho: f64,
    pub lambda: f64,
    pub sinr: f64,
    pub se: f64,
    pub ase: f64,
    pub aec: f64,
    /// bit/Joule.
    pub ee: f64,
    pub feasible: bool,
}

impl SweepRow {
    pub const HEADER: [&'static str; 14] = [
        "series", "x", "gamma", "m", "k", "beta", "rho", "lambda", "sinr", "se", "ase", "aec", "ee",
        "feasible",
    ];

    /// Column units, for the metadata line.
    pub const UNITS: &'static str = "x: swept value; rho: J/symbol; lambda: BS/km2 (inf = dense limit); \
        se: bit/symbol/UE; ase: bit/symbol/km2 (per cell when lambda = inf); \
        aec: J/symbol/km2 (per cell when lambda = inf); ee: bit/J";

    #[allow(clippy::too_many_arguments)]
    pub fn from_report(
        series: impl Into<String>,
        x: f64,
        gamma: f64,
        m: f64,
        k: f64,
        beta: f64,
        rho: f64,
        lambda: f64,
        r: &EEReport,
    ) -> Self {
        SweepRow {
            series: series.into(),
            x,
            gamma,
            m,
            k,
            beta,
            rho,
            lambda,
            sinr: r.sinr,
            se: r.se_per_ue,
            ase: r.ase,
            aec: r.aec,
            ee: r.ee,
            feasible: r.feasible,
        }
    }

    /// A point where no feasible configuration exists.
    pub fn infeasible(series: impl Into<String>, x: f64, gamma: f64, lambda: f64) -> Self {
        SweepRow {
            series: series.into(),
            x,
            gamma,
            m: f64::NAN,
            k: f64::NAN,
            beta: f64::NAN,
            rho: f64::NAN,
            lambda,
            sinr: f64::NAN,
            se: 0.0,
            ase: 0.0,
            aec: f64::NAN,
            ee: 0.0,
            feasible: false,
        }
    }

    pub fn record(&self, digits: usize) -> Vec<String> {
        let f = |v: f64| format_sig(v, digits);
        vec![
            self.series.clone(),
            f(self.x),
            f(self.gamma),
            f(self.m),
            f(self.k),
            f(self.beta),
            f(self.rho),
            f(self.lambda),
            f(self.sinr),
            f(self.se),
            f(self.ase),
            f(self.aec),
            f(self.ee),
            self.feasible.to_string(),
        ]
    }
}

/// `v` with `digits` significant digits in scientific notation; `inf`,
/// `-inf` and `nan` for non-finite values. Integers print without exponent.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v.fract() == 0.0 && v.abs() < 1e9 {
        return format!("{}", v as i64);
    }
    format!("{:.*e}", digits.max(1) - 1, v)
}

/// Writes metadata lines (each prefixed `# `), the header row, then rows.
pub fn write_csv<W: Write>(
    out: W,
    metadata: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let mut out = out;
    for line in metadata {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(10.3735123, 6), "1.03735e1");
        assert_eq!(format_sig(89.0, 6), "89");
        assert_eq!(format_sig(f64::INFINITY, 6), "inf");
        assert_eq!(format_sig(f64::NAN, 6), "nan");
        assert_eq!(format_sig(1.56e-10, 3), "1.56e-10");
        assert_eq!("1.03735e1".parse::<f64>().unwrap(), 10.3735);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(
            &mut buf,
            &["note".to_string()],
            &["a", "b"],
            vec![vec!["1".to_string(), "x,y".to_string()]],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# note\na,b\n1,\"x,y\"\n");
    }
}
