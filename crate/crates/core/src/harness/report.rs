use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::EnsembleConfig;
use crate::costs::Task;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "task",
    "n",
    "m",
    "ensemble_config",
    "samples",
    "mean_delta_over_w",
    "std_delta",
    "bound_general",
    "bound_tight",
    "bound_qsl",
    "seed",
];

/// Aggregate of one `(task, n, ensemble_config)` point.
///
/// `mean_delta_over_w` and `std_delta` are the sample mean and sample
/// standard deviation of `Delta / w(H)`. All bound columns are divided by
/// `w(H)` as well, so every column shares the same units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub task: Task,
    pub n: usize,
    pub m: usize,
    pub ensemble_config: EnsembleConfig,
    pub samples: usize,
    pub mean_delta_over_w: f64,
    pub std_delta: f64,
    pub bound_general: f64,
    pub bound_tight: f64,
    pub bound_qsl: Option<f64>,
    pub seed: u64,
}

impl ExperimentRow {
    pub fn stderr(&self) -> f64 {
        self.std_delta / (self.samples as f64).sqrt()
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.task.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.ensemble_config.to_string(),
            self.samples.to_string(),
            format!("{:e}", self.mean_delta_over_w),
            format!("{:e}", self.std_delta),
            format!("{:e}", self.bound_general),
            format!("{:e}", self.bound_tight),
            self.bound_qsl.map(|b| format!("{b:e}")).unwrap_or_default(),
            self.seed.to_string(),
        ]
    }
}

/// Standard error of the difference of two independent sample means.
pub fn combined_stderr(a: &ExperimentRow, b: &ExperimentRow) -> f64 {
    a.stderr().hypot(b.stderr())
}

/// Scaling row tagged with the absolute number of repeated layers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerRow {
    pub layers: usize,
    pub row: ExperimentRow,
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_layer_csv<W: Write>(rows: &[LayerRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("layers").chain(CSV_HEADER))?;
    for r in rows {
        w.write_record(std::iter::once(r.layers.to_string()).chain(r.row.record()))?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write {}: {e}", path.display()),
        ))
    })
}

pub fn emit_csv(rows: &[ExperimentRow], path: &Path) -> Result<()> {
    write_csv(rows, create(path)?)
}

pub fn emit_layer_csv(rows: &[LayerRow], path: &Path) -> Result<()> {
    write_layer_csv(rows, create(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    /// Change of `log2(mean)` per added qubit.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, log2 y)`.
pub fn fit_log2_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|(_, y)| !(*y > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "cannot take log2 of mean {y} at n = {x}"
        )));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).min(1.0)
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

pub fn fit_slope(rows: &[ExperimentRow]) -> Result<SlopeFit> {
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mean_delta_over_w)).collect();
    fit_log2_slope(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, mean: f64) -> ExperimentRow {
        ExperimentRow {
            task: Task::Vqe,
            n,
            m: 1,
            ensemble_config: EnsembleConfig::Both,
            samples: 20,
            mean_delta_over_w: mean,
            std_delta: 0.1,
            bound_general: 1.0,
            bound_tight: 0.5,
            bound_qsl: None,
            seed: 3,
        }
    }

    #[test]
    fn synthetic_slopes() {
        let half: Vec<_> = (2..=10).map(|n| row(n, 2f64.powf(-(n as f64) / 2.0))).collect();
        let fit = fit_slope(&half).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let full: Vec<_> = (2..=10).map(|n| row(n, 2f64.powi(-(n as i32)))).collect();
        assert!((fit_slope(&full).unwrap().slope + 1.0).abs() < 1e-12);
        let flat: Vec<_> = (2..=6).map(|n| row(n, 0.3)).collect();
        let fit = fit_slope(&flat).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn slope_errors() {
        assert!(fit_slope(&[row(2, 1.0), row(3, 1.0)]).is_err());
        assert!(fit_slope(&[row(2, 1.0), row(3, 0.0), row(4, 1.0)]).is_err());
        assert!(fit_slope(&[row(2, 1.0), row(2, 0.5), row(2, 0.2)]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut r = row(4, 0.125);
        r.bound_qsl = Some(0.25);
        let mut buf = Vec::new();
        write_csv(&[row(2, 1.0 / 3.0), r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "vqe,2,1,both,20,3.333333333333333e-1,1e-1,1e0,5e-1,,3");
        assert_eq!(lines[2], "vqe,4,1,both,20,1.25e-1,1e-1,1e0,5e-1,2.5e-1,3");
        let parsed: f64 = lines[1].split(',').nth(5).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    #[test]
    fn layer_csv_prefixes_layers() {
        let mut buf = Vec::new();
        write_layer_csv(
            &[LayerRow {
                layers: 5,
                row: row(6, 0.5),
            }],
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("layers,task,n,"));
        assert!(text.lines().nth(1).unwrap().starts_with("5,vqe,6,"));
    }
}
