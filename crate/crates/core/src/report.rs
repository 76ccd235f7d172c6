//! Result files: `results.csv`, `summary.csv` and `manifest.json`.
//!
//! CSV output is locale independent: `.` as decimal point, fixed column
//! order, LF line endings, and reals printed in fixed notation with at
//! least ten significant digits. An absent `mean_first_hit_evals` is an
//! empty field.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ConfigDocument;
use crate::error::{Error, Result};
use crate::experiment::{BestRSummary, ExperimentConfig, ResultRow};
use crate::harness::StoppingRule;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const RESULTS_HEADER: [&str; 11] = [
    "problem",
    "algorithm",
    "rule",
    "r",
    "trials",
    "successes",
    "success_rate",
    "ci_low",
    "ci_high",
    "mean_evals_used",
    "mean_first_hit_evals",
];

pub const SUMMARY_HEADER: [&str; 5] = ["problem", "algorithm", "rule", "best_rate", "best_r"];

const SIGNIFICANT_DIGITS: i32 = 10;

/// Fixed-notation decimal with at least ten significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", SIGNIFICANT_DIGITS as usize, x);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - magnitude).clamp(0, 30) as usize;
    format!("{x:.decimals$}")
}

/// Everything needed to replay a run with the same binary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created: String,
    pub master_seed: u64,
    pub threads: usize,
    pub cells: usize,
    pub rows_per_cell: usize,
    pub trials_per_cell: u64,
    pub config: ConfigDocument,
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig, threads: usize) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            master_seed: cfg.master_seed,
            threads,
            cells: cfg.cells().len(),
            rows_per_cell: 1,
            trials_per_cell: cfg.trials,
            config: ConfigDocument::from_config(cfg),
        }
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        self.config.resolve()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::ConfigSyntax(format!("{}: {e}", path.display())))
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RESULTS_HEADER).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record([
            row.problem.clone(),
            row.algorithm.clone(),
            row.rule.id().to_string(),
            row.r.to_string(),
            row.trials.to_string(),
            row.successes.to_string(),
            format_real(row.success_rate),
            format_real(row.ci_low),
            format_real(row.ci_high),
            format_real(row.mean_evals_used),
            row.mean_first_hit_evals.map(format_real).unwrap_or_default(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary_csv(summaries: &[BestRSummary], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_err(path, e))?;
    for s in summaries {
        w.write_record([
            s.problem.clone(),
            s.algorithm.clone(),
            s.rule.id().to_string(),
            format_real(s.best_rate),
            s.best_r.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Paths of the files written by [`write_results`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrittenFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
}

/// Write `results.csv`, `summary.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn write_results(
    rows: &[ResultRow],
    summaries: &[BestRSummary],
    manifest: &RunManifest,
    dir: &Path,
) -> Result<WrittenFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = WrittenFiles {
        results: dir.join(RESULTS_FILE),
        summary: dir.join(SUMMARY_FILE),
        manifest: dir.join(MANIFEST_FILE),
    };
    write_results_csv(rows, &files.results)?;
    write_summary_csv(summaries, &files.summary)?;
    write_manifest(manifest, &files.manifest)?;
    Ok(files)
}

fn data_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Data {
        path: path.to_path_buf(),
        message: format!("line {line}: {}", message.into()),
    }
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, rec: &csv::StringRecord, idx: usize) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        data_err(
            path,
            line,
            format!("bad value {raw:?} in column {}", RESULTS_HEADER[idx]),
        )
    })
}

/// Read back a `results.csv` written by [`write_results_csv`].
pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(data_err(
            path,
            1,
            format!("unexpected header, expected {}", RESULTS_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let rule: StoppingRule = rec[2]
            .parse()
            .map_err(|_| data_err(path, line, format!("unknown rule {:?}", &rec[2])))?;
        let first_hit = match rec.get(10).unwrap_or("") {
            "" => None,
            _ => Some(field(path, line, &rec, 10)?),
        };
        rows.push(ResultRow {
            problem: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            rule,
            r: field(path, line, &rec, 3)?,
            trials: field(path, line, &rec, 4)?,
            successes: field(path, line, &rec, 5)?,
            success_rate: field(path, line, &rec, 6)?,
            ci_low: field(path, line, &rec, 7)?,
            ci_high: field(path, line, &rec, 8)?,
            mean_evals_used: field(path, line, &rec, 9)?,
            mean_first_hit_evals: first_hit,
        });
    }
    Ok(rows)
}

/// Text table in the layout of the usual best-rate comparison:
/// one line per problem, one column pair per algorithm and rule.
pub fn format_summary_table(summaries: &[BestRSummary]) -> String {
    let mut problems: Vec<&str> = Vec::new();
    let mut columns: Vec<(&str, StoppingRule)> = Vec::new();
    for s in summaries {
        if !problems.contains(&s.problem.as_str()) {
            problems.push(&s.problem);
        }
        if !columns.contains(&(s.algorithm.as_str(), s.rule)) {
            columns.push((&s.algorithm, s.rule));
        }
    }
    let mut out = format!("{:<16}", "problem");
    for (alg, rule) in &columns {
        out.push_str(&format!(" {:>22}", format!("{alg}/{rule}")));
    }
    out.push('\n');
    for p in problems {
        out.push_str(&format!("{p:<16}"));
        for (alg, rule) in &columns {
            let cell = summaries
                .iter()
                .find(|s| s.problem == p && s.algorithm == *alg && s.rule == *rule)
                .map(|s| format!("{:.2}% ({})", s.best_rate * 100.0, s.best_r))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(" {cell:>22}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            problem: "onemax".into(),
            algorithm: "rmhc".into(),
            rule: StoppingRule::FirstHittingTime,
            r: 1,
            trials: 10000,
            successes: 9744,
            success_rate: 0.9744,
            ci_low: 0.9711,
            ci_high: 0.97738,
            mean_evals_used: 123.4567,
            mean_first_hit_evals: Some(98.5),
        }
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.9744), "0.9744000000");
        assert_eq!(format_real(0.0), "0.0000000000");
        assert_eq!(format_real(1.0), "1.000000000");
        assert_eq!(format_real(500.0), "500.0000000");
        assert_eq!(format_real(0.0001), "0.0001000000000");
        assert_eq!(format_real(1.0 / 3.0), "0.3333333333");
    }

    #[test]
    fn empty_rows_give_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_results_csv(&[], &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            RESULTS_HEADER.join(",") + "\n"
        );
    }

    #[test]
    fn one_row_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut no_hit = sample_row();
        no_hit.mean_first_hit_evals = None;
        write_results_csv(&[no_hit.clone()], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.split_terminator('\n').collect();
        assert_eq!(lines.len(), 2);
        assert!(!text.contains('\r'));
        assert_eq!(
            lines[1],
            "onemax,rmhc,fht,1,10000,9744,0.9744000000,0.9711000000,0.9773800000,123.4567000,"
        );
        assert_eq!(read_results_csv(&path).unwrap(), vec![no_hit]);
    }

    #[test]
    fn csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![sample_row()];
        write_results_csv(&rows, &path).unwrap();
        assert_eq!(read_results_csv(&path).unwrap(), rows);
    }

    #[test]
    fn bad_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_results_csv(&path), Err(Error::Data { .. })));
        assert!(matches!(
            read_results_csv(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn unwritable_destination_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let manifest = RunManifest::new(&ExperimentConfig::default(), 1);
        let err = write_results(&[], &[], &manifest, &blocker.join("sub")).unwrap_err();
        match err {
            Error::Io { path, .. } => assert!(path.starts_with(&blocker)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn manifest_replays_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            master_seed: 77,
            trials: 12,
            ..ExperimentConfig::default()
        };
        let manifest = RunManifest::new(&cfg, 4);
        let path = dir.path().join(MANIFEST_FILE);
        write_manifest(&manifest, &path).unwrap();
        let back = RunManifest::read(&path).unwrap();
        assert_eq!(back, manifest);
        assert_eq!(back.experiment_config().unwrap(), cfg);
        assert_eq!(back.cells, 400);
    }

    #[test]
    fn summary_table_layout() {
        let s = |p: &str, a: &str, rule, rate, r| BestRSummary {
            problem: p.into(),
            algorithm: a.into(),
            rule,
            best_rate: rate,
            best_r: r,
        };
        let table = format_summary_table(&[
            s("onemax", "rmhc", StoppingRule::FirstHittingTime, 0.9744, 1),
            s("onemax", "rmhc", StoppingRule::FixedBudget, 0.6544, 7),
        ]);
        assert!(table.contains("rmhc/fht"));
        assert!(table.contains("97.44% (1)"));
        assert!(table.contains("65.44% (7)"));
    }
}
