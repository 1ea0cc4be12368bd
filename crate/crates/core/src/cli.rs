//! Command-line front end.
//!
//! Every failure prints exactly one line to stderr, `error[<kind>]: <msg>`,
//! and maps to exit code 2 (usage or data problem) or 1 (internal failure).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::anomaly::{self, AlarmSeries, Interval};
use crate::error::Error;
use crate::ingest::{self, SurveillanceTable};
use crate::numfmt;
use crate::report::{self, PlotSpec};
use crate::scorematrix::{self, ScoreConfig, ScoreMatrix, SummaryStats};
use crate::timeseries::{fill_counts, WeekRange};
use crate::xcorr;

#[derive(Debug, Parser)]
#[command(
    name = "surveilcorr",
    version,
    about = "Cross-correlation scores and EARS-C alarms for weekly district surveillance counts"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Parameters shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Wide-format surveillance CSV.
    #[arg(long = "input", global = true, value_name = "FILE")]
    pub input_path: Option<PathBuf>,
    /// Inclusive week window, e.g. 1:104.
    #[arg(long = "weeks", global = true, value_name = "A:B")]
    pub week_range: Option<WeekRange>,
    /// Maximum lag in weeks for the cross-correlation window.
    #[arg(long = "lag", global = true, default_value_t = 5)]
    pub lag_max: usize,
    /// Significance level for alarm thresholds and the ccf band.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    /// EARS-C look-back window in weeks.
    #[arg(long, global = true, default_value_t = 7)]
    pub baseline: usize,
    /// Number of partners to rank.
    #[arg(long, global = true, default_value_t = 5)]
    pub k: usize,
    /// Quiet weeks allowed inside one alarm cluster.
    #[arg(long = "gap", global = true, default_value_t = 2)]
    pub max_gap: usize,
    /// Week tolerance when matching alarms across regions.
    #[arg(long, global = true, default_value_t = 1)]
    pub tolerance: usize,
    /// First-difference every series before scoring.
    #[arg(long, global = true)]
    pub prewhiten: bool,
    /// Cap on worker threads for pairwise scoring.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long = "out", global = true, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every region pair; writes scores.csv, heatmap.svg, histogram.svg, stats.json.
    Scores,
    /// Rank the k most correlated partners of one region and plot each pair.
    Topk {
        #[arg(long)]
        region: usize,
    },
    /// EARS-C alarms for the listed regions, plus overlap for consecutive pairs.
    Alarms {
        #[arg(long, value_delimiter = ',', required = true)]
        regions: Vec<usize>,
    },
    /// Compare score matrices from two week windows.
    Stability {
        #[arg(long = "window-a", value_name = "A:B")]
        window_a: WeekRange,
        #[arg(long = "window-b", value_name = "A:B")]
        window_b: WeekRange,
    },
    /// Report missing cells per region.
    Validate,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    Io { path: PathBuf, message: String },
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            _ => 2,
        }
    }

    /// Single-line `error[<kind>]: <message>`.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Data(e) => ("data", e.to_string()),
            CliError::Io { path, message } => ("io", format!("{}: {message}", path.display())),
            CliError::Internal(m) => ("internal", m.clone()),
        };
        format!("error[{kind}]: {}", msg.replace(['\n', '\r'], " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl RunConfig {
    fn check(&self) -> CliResult<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Usage(format!(
                "--alpha {} not in (0, 1)",
                self.alpha
            )));
        }
        if self.baseline < 2 {
            return Err(CliError::Usage(format!(
                "--baseline {} must be at least 2",
                self.baseline
            )));
        }
        if self.k == 0 {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        Ok(())
    }

    fn score_config(&self) -> ScoreConfig {
        ScoreConfig {
            lag_max: self.lag_max,
            week_range: self.week_range,
            prewhiten: self.prewhiten,
            threads: self.threads,
        }
    }

    fn load_table(&self) -> CliResult<SurveillanceTable> {
        let path = self
            .input_path
            .as_ref()
            .ok_or_else(|| CliError::Usage("--input is required".into()))?;
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(ingest::parse_wide_csv(&text)?)
    }

    fn suffix(&self) -> &'static str {
        if self.prewhiten {
            " (differenced)"
        } else {
            ""
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn spec(title: String, w: u32, h: u32) -> PlotSpec {
    PlotSpec::new(title, w, h).expect("built-in plot sizes are valid")
}

#[derive(Serialize)]
struct StatsRecord<'a> {
    weeks: String,
    lag_max: usize,
    prewhitened: bool,
    regions: usize,
    skipped_pairs: usize,
    #[serde(flatten)]
    stats: &'a SummaryStats,
}

/// Runs a parsed command, returning the text destined for stdout.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let cfg = &cli.config;
    cfg.check()?;
    let table = cfg.load_table()?;
    match &cli.command {
        Command::Scores => cmd_scores(cfg, &table),
        Command::Topk { region } => cmd_topk(cfg, &table, *region),
        Command::Alarms { regions } => cmd_alarms(cfg, &table, regions),
        Command::Stability { window_a, window_b } => {
            cmd_stability(cfg, &table, *window_a, *window_b)
        }
        Command::Validate => cmd_validate(&table),
    }
}

fn cmd_scores(cfg: &RunConfig, table: &SurveillanceTable) -> CliResult<String> {
    let m = scorematrix::compute_all(table, &cfg.score_config())?;
    let stats = m.summary_stats()?;
    let out = &cfg.output_dir;
    write_file(out, "scores.csv", &m.to_csv())?;
    let title = format!("Correlation scores, weeks {}{}", m.week_range, cfg.suffix());
    write_file(
        out,
        "heatmap.svg",
        &report::render_heatmap(&m, &spec(title.clone(), 1000, 1000))?,
    )?;
    write_file(
        out,
        "histogram.svg",
        &report::render_histogram(
            &m.score_values(),
            report::DEFAULT_BINS,
            &spec(
                format!("Distribution of {}", title.to_lowercase()),
                700,
                450,
            ),
        )?,
    )?;
    let record = StatsRecord {
        weeks: m.week_range.to_string(),
        lag_max: m.lag_max,
        prewhitened: m.prewhitened,
        regions: m.n_regions(),
        skipped_pairs: m.skipped_pairs().len(),
        stats: &stats,
    };
    let json =
        serde_json::to_string_pretty(&record).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(out, "stats.json", &(json + "\n"))?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "pairs={} skipped={} weeks={}{}",
        stats.count,
        m.skipped_pairs().len(),
        m.week_range,
        cfg.suffix()
    );
    let _ = writeln!(text, "{}", stats.caption());
    Ok(text)
}

/// Table of ranked partners, `Region Pairs,Correlation Scores`.
pub fn topk_table(m: &ScoreMatrix, region: usize, k: usize) -> crate::Result<String> {
    let ranked = m.top_k(region, k)?;
    let me = m.regions()[region - 1].label();
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    wtr.write_record(["Region Pairs", "Correlation Scores"])?;
    for r in &ranked {
        wtr.write_record([format!("{me}; {}", r.label), numfmt::fixed(r.score, 2)])?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn cmd_topk(cfg: &RunConfig, table: &SurveillanceTable, region: usize) -> CliResult<String> {
    table.region(region)?;
    let sc = cfg.score_config();
    let m = scorematrix::compute_all(table, &sc)?;
    let k = cfg.k.min(table.n_regions().saturating_sub(1)).max(1);
    let ranked = m.top_k(region, k)?;
    let csv_text = topk_table(&m, region, k)?;
    let out = &cfg.output_dir;
    write_file(out, &format!("topk_{region}.csv"), &csv_text)?;

    let (_, series) = scorematrix::prepare_series(table, &sc)?;
    let x = series[region - 1]
        .as_ref()
        .map_err(|r| CliError::Data(Error::InsufficientData(r.clone())))?;
    let threshold = xcorr::significance_threshold(x.len() as f64, cfg.alpha)?;
    for r in &ranked {
        let y = series[r.index - 1]
            .as_ref()
            .map_err(|r| CliError::Data(Error::InsufficientData(r.clone())))?;
        let cv = xcorr::ccf(x, y, cfg.lag_max)?;
        let title = format!(
            "Regions {} and {}: score {}{}",
            region,
            r.index,
            numfmt::fixed(r.score, 2),
            cfg.suffix()
        );
        let doc = report::render_pair_plot(x, y, &cv, threshold, &spec(title, 800, 600))?;
        write_file(out, &format!("pair_{region}_{}.svg", r.index), &doc)?;
    }
    Ok(csv_text)
}

fn alarm_series(
    cfg: &RunConfig,
    table: &SurveillanceTable,
    region: usize,
) -> CliResult<AlarmSeries> {
    let ts = fill_counts(region, table.row(region)?)?;
    let ts = match cfg.week_range {
        Some(w) => ts.slice_weeks(w.first, w.last, 0)?,
        None => ts,
    };
    Ok(anomaly::ears_c_with(
        &ts,
        cfg.baseline,
        cfg.alpha,
        Interval::Prediction,
    )?)
}

#[derive(Serialize)]
struct OverlapRecord {
    region_a: usize,
    region_b: usize,
    tolerance: usize,
    #[serde(flatten)]
    overlap: anomaly::AlarmOverlap,
}

fn cmd_alarms(cfg: &RunConfig, table: &SurveillanceTable, regions: &[usize]) -> CliResult<String> {
    for &r in regions {
        table.region(r)?;
    }
    let out = &cfg.output_dir;
    let mut text = String::new();
    let mut series = Vec::with_capacity(regions.len());
    for &r in regions {
        let a = alarm_series(cfg, table, r)?;
        write_file(out, &format!("alarms_{r}.csv"), &a.to_csv())?;
        let clusters = anomaly::cluster_alarms(&a, cfg.max_gap);
        let _ = writeln!(
            text,
            "region={r} alarms={} clusters={}",
            a.alarm_count(),
            clusters.len()
        );
        series.push((a, clusters));
    }
    let mut jsonl = String::new();
    for pair in series.windows(2) {
        let ((a, ca), (b, cb)) = (&pair[0], &pair[1]);
        let overlap = anomaly::alarm_overlap(a, b, cfg.tolerance)?;
        let rec = OverlapRecord {
            region_a: a.region_index,
            region_b: b.region_index,
            tolerance: cfg.tolerance,
            overlap,
        };
        let line = serde_json::to_string(&rec).map_err(|e| CliError::Internal(e.to_string()))?;
        let _ = writeln!(jsonl, "{line}");
        let _ = writeln!(text, "{line}");
        let title = format!(
            "EARS-C alarms, regions {} and {} (baseline {}, alpha {})",
            a.region_index, b.region_index, cfg.baseline, cfg.alpha
        );
        let doc = report::render_alarm_timeline(a, b, ca, cb, &spec(title, 900, 500))?;
        write_file(
            out,
            &format!("timeline_{}_{}.svg", a.region_index, b.region_index),
            &doc,
        )?;
    }
    if !jsonl.is_empty() {
        write_file(out, "overlap.jsonl", &jsonl)?;
    }
    Ok(text)
}

fn cmd_stability(
    cfg: &RunConfig,
    table: &SurveillanceTable,
    window_a: WeekRange,
    window_b: WeekRange,
) -> CliResult<String> {
    let cmp = scorematrix::compare_windows(table, window_a, window_b, &cfg.score_config())?;
    let out = &cfg.output_dir;
    for (name, m) in [
        ("heatmap_a.svg", &cmp.matrix_a),
        ("heatmap_b.svg", &cmp.matrix_b),
    ] {
        let title = format!("Correlation scores, weeks {}{}", m.week_range, cfg.suffix());
        write_file(
            out,
            name,
            &report::render_heatmap(m, &spec(title, 1000, 1000))?,
        )?;
    }
    Ok(format!("{}\n", numfmt::fixed(cmp.stability, 4)))
}

fn cmd_validate(table: &SurveillanceTable) -> CliResult<String> {
    let report = ingest::validate(table);
    let mut text = format!(
        "regions={} weeks={} findings={} fatal={}\n",
        table.n_regions(),
        table.n_weeks(),
        report.findings.len(),
        report.findings.iter().filter(|f| f.fatal).count()
    );
    for f in &report.findings {
        let _ = writeln!(
            text,
            "region={} missing={} fatal={} weeks={}",
            f.region_index,
            f.missing_count(),
            f.fatal,
            f.week_labels().join(";")
        );
    }
    Ok(text)
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut impl std::io::Write, stderr: &mut impl std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            let msg = first.trim_start_matches("error: ");
            let _ = writeln!(stderr, "{}", CliError::Usage(msg.to_string()).line());
            return 2;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = write!(stdout, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            e.exit_code()
        }
    }
}
