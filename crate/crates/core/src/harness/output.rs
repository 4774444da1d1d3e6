//! Result rows and their CSV encoding.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Where on the experiment's x-axis a row sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coordinate {
    SnrDb(f64),
    DistanceM(f64),
    Grid { x: f64, y: f64 },
}

impl Coordinate {
    fn header(&self) -> &'static [&'static str] {
        match self {
            Coordinate::SnrDb(_) => &["snr_db"],
            Coordinate::DistanceM(_) => &["distance_m"],
            Coordinate::Grid { .. } => &["grid_x", "grid_y"],
        }
    }

    fn fields(&self) -> Vec<String> {
        match *self {
            Coordinate::SnrDb(v) | Coordinate::DistanceM(v) => vec![v.to_string()],
            Coordinate::Grid { x, y } => vec![x.to_string(), y.to_string()],
        }
    }

    fn same_kind(&self, other: &Coordinate) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

/// One aggregated point of an experiment.
///
/// For the cellular experiments `mean_sum_rate` is the rate of the user in
/// the centre cell, the one whose position is controlled.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub shape: String,
    pub constraint_mode: String,
    pub coordinate: Coordinate,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub convergence_rate: f64,
    pub trials: usize,
    pub seed: u64,
    /// Mean rate of each user; not written to CSV.
    pub per_user_means: Vec<f64>,
    /// Set by the back-off prediction experiment only.
    pub high_snr_valid: Option<bool>,
}

/// Mean and sample standard deviation, accumulated in slice order so the
/// result is reproducible bit for bit.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub const SNR_NOTE: &str =
    "# snr_db is P/sigma^2 with P = 1 per transmitter and unit-variance channel entries";

/// Writes rows as CSV. All rows must share one coordinate kind. A comment
/// line describing the SNR axis precedes SNR-indexed tables.
pub fn write_csv<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<()> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    if let Some(bad) = rows.iter().find(|r| !r.coordinate.same_kind(&first.coordinate)) {
        return Err(crate::error::Error::DimensionMismatch(format!(
            "mixed coordinate kinds in one table: {:?} and {:?}",
            first.coordinate, bad.coordinate
        )));
    }
    if matches!(first.coordinate, Coordinate::SnrDb(_)) {
        writeln!(out, "{SNR_NOTE}")?;
    }
    let flagged = rows.iter().any(|r| r.high_snr_valid.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["experiment", "shape", "constraint_mode"];
    header.extend_from_slice(first.coordinate.header());
    header.extend_from_slice(&["mean_sum_rate", "std_sum_rate", "convergence_rate", "trials", "seed"]);
    if flagged {
        header.push("high_snr_valid");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.experiment.clone(), r.shape.clone(), r.constraint_mode.clone()];
        rec.extend(r.coordinate.fields());
        rec.extend([
            r.mean_sum_rate.to_string(),
            r.std_sum_rate.to_string(),
            r.convergence_rate.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ]);
        if flagged {
            rec.push(r.high_snr_valid.map(|b| b.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(&mut buf, rows)?;
    buf.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: Coordinate) -> ResultRow {
        ResultRow {
            experiment: "sweep".into(),
            shape: "(2x2,1)^3 rru=2".into(),
            constraint_mode: "unconstrained".into(),
            coordinate: c,
            mean_sum_rate: 1.5,
            std_sum_rate: 0.25,
            convergence_rate: 1.0,
            trials: 4,
            seed: 7,
            per_user_means: vec![0.5; 3],
            high_snr_valid: None,
        }
    }

    #[test]
    fn snr_table_layout() {
        let s = csv_string(&[row(Coordinate::SnrDb(10.0))]).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], SNR_NOTE);
        assert_eq!(
            lines[1],
            "experiment,shape,constraint_mode,snr_db,mean_sum_rate,std_sum_rate,convergence_rate,trials,seed"
        );
        assert_eq!(lines[2], "sweep,\"(2x2,1)^3 rru=2\",unconstrained,10,1.5,0.25,1,4,7");
    }

    #[test]
    fn grid_and_flag_columns() {
        let mut r = row(Coordinate::Grid { x: -50.0, y: 25.5 });
        r.high_snr_valid = Some(false);
        let s = csv_string(&[r]).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert!(lines[0].contains("grid_x,grid_y,mean_sum_rate"));
        assert!(lines[0].ends_with(",seed,high_snr_valid"));
        assert!(lines[1].contains(",-50,25.5,"));
        assert!(lines[1].ends_with(",false"));
    }

    #[test]
    fn mixed_coordinates_rejected() {
        let rows = [row(Coordinate::SnrDb(0.0)), row(Coordinate::DistanceM(10.0))];
        assert!(csv_string(&rows).is_err());
        assert_eq!(csv_string(&[]).unwrap(), "");
    }

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
