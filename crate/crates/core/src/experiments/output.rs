//! CSV exports and the run manifest.
//!
//! Numbers are written in plain decimal with 12 significant digits and
//! trailing zeros trimmed; `inf` and `nan` are spelled out. The format does
//! not depend on locale or platform.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use csv::{StringRecord, Writer};
use toml::{Table, Value};

use super::compare::Comparison;
use super::config_file::config_table;
use super::MonteCarloRun;
use crate::error::{Error, Result};
use crate::interaction::precision_bounds;
use crate::metrics::{crlb, McSummary};
use crate::model::GaussianBelief;
use crate::trajectory::{ClientStep, Scenario, Trajectory};

const SIGNIFICANT_DIGITS: i32 = 12;

pub const TRAJECTORY_HEADER: [&str; 12] = [
    "replication",
    "t",
    "client",
    "x_true",
    "y_obs",
    "mean_pred",
    "var_pred",
    "mean_post",
    "var_post",
    "degree",
    "mean_published",
    "var_published",
];

pub const SUMMARY_HEADER: [&str; 11] = [
    "estimator",
    "client",
    "t",
    "x_true",
    "bias",
    "variance",
    "mse",
    "crlb",
    "median",
    "q25",
    "q75",
];

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Files written by one run, plus the config that reproduces them.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub path: PathBuf,
    pub files: Vec<String>,
}

struct CsvOut {
    path: PathBuf,
    writer: Writer<BufWriter<File>>,
}

impl CsvOut {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self> {
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = Writer::from_writer(BufWriter::new(file));
        writer.write_record(header).map_err(|e| Error::csv(&path, e))?;
        Ok(Self { path, writer })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| Error::csv(&self.path, e))
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn write_trajectories(path: PathBuf, trajectories: &[Trajectory]) -> Result<()> {
    let mut out = CsvOut::create(path, &TRAJECTORY_HEADER)?;
    for (rep, traj) in trajectories.iter().enumerate() {
        let published = traj.scenario == Scenario::RecursiveScoring;
        for (t, row) in traj.steps.iter().enumerate() {
            for (i, s) in row.iter().enumerate() {
                let (mp, vp) = if published {
                    (format_number(s.prior.mean), format_number(s.prior.variance))
                } else {
                    (String::new(), String::new())
                };
                out.row([
                    rep.to_string(),
                    t.to_string(),
                    i.to_string(),
                    format_number(s.x_true),
                    opt(s.observation),
                    format_number(s.prior.mean),
                    format_number(s.prior.variance),
                    format_number(s.posterior.mean),
                    format_number(s.posterior.variance),
                    s.degree.to_string(),
                    mp,
                    vp,
                ])?;
            }
        }
    }
    out.finish()
}

/// Writes the summary table and, next to it, the outlier list
/// (`<stem>_outliers.csv`).
pub fn write_summary(path: &Path, summary: &McSummary) -> Result<Vec<PathBuf>> {
    let mut out = CsvOut::create(path.to_path_buf(), &SUMMARY_HEADER)?;
    let outliers_path = path.with_file_name(format!(
        "{}_outliers.csv",
        path.file_stem().and_then(|s| s.to_str()).unwrap_or("summary")
    ));
    let mut outliers = CsvOut::create(outliers_path.clone(), &["estimator", "client", "t", "error"])?;
    let est = summary.estimator.as_str();
    for r in &summary.rows {
        out.row([
            est.to_string(),
            r.client.to_string(),
            r.t.to_string(),
            format_number(r.x_true),
            format_number(r.bias),
            format_number(r.variance),
            format_number(r.mse),
            format_number(r.crlb),
            format_number(r.boxplot.median),
            format_number(r.boxplot.q25),
            format_number(r.boxplot.q75),
        ])?;
        for &e in &r.boxplot.outliers {
            outliers.row([est.to_string(), r.client.to_string(), r.t.to_string(), format_number(e)])?;
        }
    }
    out.finish()?;
    outliers.finish()?;
    Ok(vec![path.to_path_buf(), outliers_path])
}

fn write_bounds(path: PathBuf, run: &MonteCarloRun, trajectories: &[Trajectory]) -> Result<()> {
    let p = &run.config.params;
    let horizon = p.horizon;
    let (q_l, q_u) = p.q.range(horizon);
    let a = p.a.values(horizon + 1);
    let mut out = CsvOut::create(
        path,
        &[
            "replication",
            "t",
            "client",
            "p_hat",
            "p_l",
            "p_u",
            "crlb",
            "p_l_degenerate",
        ],
    )?;
    let mut degrees = Vec::with_capacity(horizon);
    for (rep, traj) in trajectories.iter().enumerate() {
        for i in 0..traj.n_clients() {
            degrees.clear();
            for t in 1..=horizon {
                let s = traj.at(t, i);
                degrees.push(s.degree);
                let (lo, hi, degenerate) = match precision_bounds(q_l, q_u, p.n_clients, &a, p.initial_var, &degrees) {
                    Ok(b) => (
                        format_number(b.lower),
                        format_number(b.upper),
                        b.lower_degenerate.to_string(),
                    ),
                    Err(_) => (String::new(), String::new(), String::new()),
                };
                out.row([
                    rep.to_string(),
                    t.to_string(),
                    i.to_string(),
                    format_number(s.posterior.variance),
                    lo,
                    hi,
                    format_number(crlb(s.degree)),
                    degenerate,
                ])?;
            }
        }
    }
    out.finish()
}

fn write_network(path: PathBuf, traj: &Trajectory) -> Result<()> {
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(&path, e);
    writeln!(w, "t,i,j").map_err(io)?;
    for snap in &traj.networks {
        snap.write_edges(&mut w).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn file_name(dir: &Path, p: &Path) -> String {
    p.strip_prefix(dir).unwrap_or(p).display().to_string()
}

/// Writes all outputs of a run into `dir` and returns the manifest.
///
/// Per estimator: `trajectories_<e>.csv`, `summary_<e>.csv`,
/// `summary_<e>_outliers.csv` and `network_<e>.csv` (edges of replication 0).
/// The recursive loop also gets `bounds_recursive_scoring.csv`.
pub fn write_outputs(run: &MonteCarloRun, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for (scenario, trajs) in &run.trajectories {
        let name = scenario.as_str();
        let path = dir.join(format!("trajectories_{name}.csv"));
        write_trajectories(path.clone(), trajs)?;
        files.push(path);

        if let Some(summary) = run.summaries.get(scenario) {
            files.extend(write_summary(&dir.join(format!("summary_{name}.csv")), summary)?);
        }
        if let Some(first) = trajs.first() {
            let path = dir.join(format!("network_{name}.csv"));
            write_network(path.clone(), first)?;
            files.push(path);
        }
        if *scenario == Scenario::RecursiveScoring {
            let path = dir.join("bounds_recursive_scoring.csv");
            write_bounds(path.clone(), run, trajs)?;
            files.push(path);
        }
    }

    let files: Vec<String> = files.iter().map(|p| file_name(dir, p)).collect();
    let mut table = config_table(&run.config);
    let mut meta = Table::new();
    meta.insert(
        "generator".into(),
        Value::String(format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))),
    );
    meta.insert(
        "files".into(),
        Value::Array(files.iter().cloned().map(Value::String).collect()),
    );
    table.insert("manifest".into(), Value::Table(meta));
    let text = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
    let path = dir.join("manifest.toml");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(Manifest { path, files })
}

pub fn write_comparison(path: &Path, cmp: &Comparison) -> Result<()> {
    let mut out = CsvOut::create(
        path.to_path_buf(),
        &[
            "bin_lo", "bin_hi", "middle", "count_a", "count_b", "iqr_a", "iqr_b", "ratio",
        ],
    )?;
    for b in &cmp.bins {
        out.row([
            format_number(b.lo),
            format_number(b.hi),
            b.middle.to_string(),
            b.count_a.to_string(),
            b.count_b.to_string(),
            format_number(b.iqr_a),
            format_number(b.iqr_b),
            format_number(b.ratio),
        ])?;
    }
    out.finish()
}

/// Reads a trajectory CSV back into per-replication trajectories. The
/// estimator is inferred from the columns: filter rows carry `y_obs`.
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column `{name}`", path.display())))
    };
    let idx: Vec<usize> = TRAJECTORY_HEADER[..10].iter().map(|h| col(h)).collect::<Result<_>>()?;
    let bad = |line: u64, what: &str| Error::Config(format!("{}: line {line}: bad {what}", path.display()));

    let mut reps: BTreeMap<usize, BTreeMap<usize, BTreeMap<usize, ClientStep>>> = BTreeMap::new();
    let mut has_observations = false;
    let mut record = StringRecord::new();
    while reader.read_record(&mut record).map_err(|e| Error::csv(path, e))? {
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let int = |k: usize| field(k).parse::<usize>().map_err(|_| bad(line, TRAJECTORY_HEADER[k]));
        let num = |k: usize| field(k).parse::<f64>().map_err(|_| bad(line, TRAJECTORY_HEADER[k]));
        let observation = match field(4) {
            "" => None,
            _ => {
                has_observations = true;
                Some(num(4)?)
            }
        };
        let step = ClientStep {
            x_true: num(3)?,
            observation,
            prior: GaussianBelief {
                mean: num(5)?,
                variance: num(6)?,
            },
            posterior: GaussianBelief {
                mean: num(7)?,
                variance: num(8)?,
            },
            gains: None,
            degree: int(9)?,
        };
        reps.entry(int(0)?)
            .or_default()
            .entry(int(1)?)
            .or_default()
            .insert(int(2)?, step);
    }
    if reps.is_empty() {
        return Err(Error::Config(format!("{}: no trajectory rows", path.display())));
    }
    let scenario = if has_observations {
        Scenario::RiskPrediction
    } else {
        Scenario::RecursiveScoring
    };
    Ok(reps
        .into_values()
        .map(|steps| Trajectory {
            scenario,
            steps: steps.into_values().map(|row| row.into_values().collect()).collect(),
            networks: Vec::new(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(123456.789), "123456.789");
        assert_eq!(format_number(12345678901234.0), "12345678901234");
        assert_eq!(format_number(0.000123456789012345), "0.000123456789012");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(f64::NAN), "nan");
        for x in [0.1, 7.25, 1e-7, 3.0e9, -0.04] {
            let back: f64 = format_number(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }
}
