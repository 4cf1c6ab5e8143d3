//! Result tables and their CSV encoding.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::montecarlo::MonteCarloEstimate;

/// Column order of every CSV this crate writes.
pub const COLUMNS: [&str; 9] =
    ["experiment", "n", "snr_db", "kappa_bs", "kappa_ut", "t", "metric", "value", "std_error"];

/// One metric at one sweep point. Unused sweep coordinates stay `None` and
/// are written as empty fields.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub experiment: String,
    pub n: Option<usize>,
    pub snr_db: Option<f64>,
    pub kappa_bs: Option<f64>,
    pub kappa_ut: Option<f64>,
    pub t: Option<f64>,
    pub metric: String,
    pub value: f64,
    /// `None` for analytic values.
    pub std_error: Option<f64>,
    /// Diagnostic tag; reported on stderr, not part of the CSV.
    pub note: Option<String>,
}

impl SweepRow {
    pub fn new(experiment: &str, metric: &str, value: f64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            n: None,
            snr_db: None,
            kappa_bs: None,
            kappa_ut: None,
            t: None,
            metric: metric.to_owned(),
            value,
            std_error: None,
            note: None,
        }
    }

    pub fn estimate(experiment: &str, metric: &str, est: MonteCarloEstimate) -> Self {
        Self { std_error: Some(est.std_error), ..Self::new(experiment, metric, est.value) }
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn snr_db(mut self, v: f64) -> Self {
        self.snr_db = Some(v);
        self
    }

    pub fn kappas(mut self, bs: f64, ut: f64) -> Self {
        self.kappa_bs = Some(bs);
        self.kappa_ut = Some(ut);
        self
    }

    pub fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn note(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// 17 significant digits, which round-trips every finite `f64`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_owned()
    } else if v > 0.0 {
        "inf".to_owned()
    } else {
        "-inf".to_owned()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

impl SweepTable {
    pub fn push(&mut self, row: SweepRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: SweepTable) {
        self.rows.extend(other.rows);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows whose metric is `metric`.
    pub fn metric<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.clone(),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                opt(r.snr_db),
                opt(r.kappa_bs),
                opt(r.kappa_ut),
                opt(r.t),
                r.metric.clone(),
                format_value(r.value),
                opt(r.std_error),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

/// Writes `table` to `path` as UTF-8 CSV with LF line endings.
pub fn write_csv(table: &SweepTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    table.write_csv_to(std::io::BufWriter::new(file))
}
