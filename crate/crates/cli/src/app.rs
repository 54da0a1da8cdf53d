//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use misig_core::audit::{significance_thresholds, test_influence, BlockCount};
use misig_core::influence::{first_order_influence, influence_set, influence_single, refit_influence_oracle};
use misig_core::model::{fit_ols_with, partial_out};
use misig_core::report::{format_float, to_json_string, to_json_value, write_block_maxima_csv, write_threshold_csv};
use misig_core::search::{exhaustive_with_cap, greedy_most_influential, DEFAULT_SUBSET_CAP};
use misig_core::sim::{
    gumbel_estimation_study, illustration_scenario, shape_grid, shape_study, write_shape_table, GumbelStudyConfig,
    Summary, ILLUSTRATION_SEED,
};
use misig_core::{AuditConfig, BlockMode, Dataset, Direction, FitOptions, SearchSpec};
use serde::Serialize;
use serde_json::json;

use crate::data::{file_digest, load_csv, CsvSpec};
use crate::error::CliError;
use crate::manifest::{write_sidecar, RunManifest, TOOL_VERSION};

#[derive(Debug, Parser, Serialize)]
#[command(name = "misig", version = TOOL_VERSION, about = "Most influential sets in linear regression and their extreme-value significance")]
pub struct Cli {
    /// Worker threads; 0 uses the available parallelism.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output here (plus a `.manifest.json` sidecar) instead of stdout. [default: stdout]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report errors on stderr as JSON.
    #[arg(long, global = true, default_value_t = false)]
    pub json_errors: bool,

    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Fit OLS and report the coefficient of interest.
    Fit(FitArgs),
    /// Exact influence of single rows or of one set.
    Influence(InfluenceArgs),
    /// Find the most influential set.
    Search(SearchCmd),
    /// Test whether the most influential (or a pinned) set is excessive.
    Audit(AuditCmd),
    /// Significance boundaries for a single added point.
    Thresholds(ThresholdArgs),
    /// Monte Carlo studies.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Input CSV file (RFC 4180).
    #[arg(long)]
    pub csv: PathBuf,
    /// Feature of interest: column name, or zero-based index.
    #[arg(long)]
    pub feature: String,
    /// Outcome column: name or zero-based index.
    #[arg(long)]
    pub target: String,
    /// Control columns, comma separated. [default: none]
    #[arg(long, value_delimiter = ',')]
    pub controls: Vec<String>,
    /// Row label column. [default: row index]
    #[arg(long)]
    pub label: Option<String>,
    /// The file has no header row.
    #[arg(long, default_value_t = false)]
    pub no_header: bool,
    /// Fit without an intercept.
    #[arg(long, default_value_t = false)]
    pub no_intercept: bool,
    /// Ridge penalty (influence formulas ignore it).
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
}

impl DataArgs {
    fn spec(&self) -> CsvSpec {
        CsvSpec {
            path: self.csv.clone(),
            target: self.target.clone(),
            feature: self.feature.clone(),
            controls: self.controls.clone(),
            label: self.label.clone(),
            has_header: !self.no_header,
            intercept: !self.no_intercept,
        }
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions { ridge: self.lambda }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    /// Constant set size. [default: 1 when --p is absent]
    #[arg(long, conflicts_with = "p")]
    pub k: Option<usize>,
    /// Relative set size, a fraction in (0, 1). [default: none]
    #[arg(long)]
    pub p: Option<f64>,
    /// Search direction: max, min or abs.
    #[arg(long, default_value = "max")]
    pub direction: String,
}

impl SearchArgs {
    fn spec(&self) -> Result<SearchSpec, CliError> {
        let direction: Direction = self.direction.parse().map_err(|e: misig_core::Error| CliError::Usage(e.to_string()))?;
        let spec = match (self.k, self.p) {
            (Some(_), Some(_)) => return Err(CliError::Usage("--k and --p are mutually exclusive".into())),
            (_, Some(p)) => SearchSpec::relative(p),
            (k, None) => SearchSpec::constant(k.unwrap_or(1)),
        };
        Ok(spec.with_direction(direction))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct InfluenceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Rows of one set (indices or labels), comma separated. [default: every single row]
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<String>,
    /// Also refit without the set for comparison.
    #[arg(long, default_value_t = false)]
    pub refit: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Enumerate all subsets of size at most k instead of the greedy search.
    #[arg(long, default_value_t = false)]
    pub exhaustive: bool,
    /// Largest number of subsets the exhaustive search may visit.
    #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
    pub cap: u128,
}

#[derive(Debug, Args, Serialize)]
pub struct NullArgs {
    /// Number of blocks: auto or a positive integer.
    #[arg(long, default_value = "auto")]
    pub blocks: String,
    /// Block maxima mode: auto, shared or refit.
    #[arg(long, default_value = "auto")]
    pub block_mode: String,
    /// Significance levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.10,0.05,0.01")]
    pub alpha: Vec<f64>,
    /// Seed for the block shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the observed set in the null sample.
    #[arg(long, default_value_t = false)]
    pub include_observed: bool,
    /// Hill tail fraction. [default: min(0.1, 1/sqrt(N))]
    #[arg(long)]
    pub k_frac: Option<f64>,
}

impl NullArgs {
    fn apply(&self, config: &mut AuditConfig) -> Result<(), CliError> {
        let usage = |e: misig_core::Error| CliError::Usage(e.to_string());
        config.blocks = self.blocks.parse::<BlockCount>().map_err(usage)?;
        config.block_mode = self.block_mode.parse::<BlockMode>().map_err(usage)?;
        let mut alphas = self.alpha.clone();
        alphas.sort_by(|a, b| b.total_cmp(a));
        alphas.dedup();
        config.alpha_levels = alphas;
        config.seed = self.seed;
        config.exclude_observed = !self.include_observed;
        config.k_frac = self.k_frac;
        config.validate().map_err(usage)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AuditCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub null: NullArgs,
    /// Test this set (indices or labels, comma separated) instead of searching. [default: none]
    #[arg(long, value_delimiter = ',')]
    pub pin: Vec<String>,
    /// Test both directions with a Bonferroni combination.
    #[arg(long, default_value_t = false)]
    pub two_sided: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub null: NullArgs,
    /// Evenly spaced feature values between the observed extremes.
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    /// GEV shape of maximal influence for four distribution pairs.
    Shape,
    /// Bias of block-maxima Gumbel estimation.
    Gumbel,
    /// A regression with one moderately influential point.
    Illustration,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Table::Shape)]
    pub table: Table,
    /// Replications per cell. [default: 200 for shape, 500 for gumbel; 1000 with --full-scale]
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Sample sizes for the shape table, comma separated. [default: 100; 100,500,1000,2000 with --full-scale]
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Datasets per shape replication.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// Larger grid and replication count.
    #[arg(long, default_value_t = false)]
    pub full_scale: bool,
    /// Parent draws per block in the gumbel study.
    #[arg(long, default_value_t = 50)]
    pub block_size: usize,
    /// Blocks per replication in the gumbel study.
    #[arg(long, default_value_t = 100)]
    pub m_blocks: usize,
}

/// Result of a command: bytes to emit plus manifest details.
struct Output {
    body: Vec<u8>,
    seed: Option<u64>,
    input: Option<PathBuf>,
    notes: Vec<String>,
}

fn json_body<T: Serialize>(item: &T) -> Result<Vec<u8>, CliError> {
    Ok((to_json_string(item)? + "\n").into_bytes())
}

fn resolve_rows(dataset: &Dataset, items: &[String]) -> Result<Vec<usize>, CliError> {
    items
        .iter()
        .map(|item| {
            if let Some(labels) = dataset.labels() {
                if let Some(i) = labels.iter().position(|l| l == item) {
                    return Ok(i);
                }
            }
            item.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("unknown row {item:?}")))
        })
        .collect()
}

fn labels_of(dataset: &Dataset, rows: &[usize]) -> Vec<String> {
    rows.iter().map(|&i| dataset.label(i)).collect()
}

fn run_fit(args: &FitArgs, format: Format) -> Result<Output, CliError> {
    let dataset = load_csv(&args.data.spec())?;
    let fit = fit_ols_with(&dataset, &args.data.fit_options())?;
    let body = match format {
        Format::Json => json_body(&json!({
            "n": fit.n(),
            "theta_hat": fit.theta_hat(),
            "d_total": fit.d_total(),
            "n_params": fit.n_params(),
            "intercept": dataset.intercept(),
            "controls": args.data.controls,
            "ridge": fit.ridge(),
        }))?,
        Format::Csv => {
            let reduced = partial_out(&dataset)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["row", "label", "x_reduced", "y_reduced", "residual", "leverage", "total_leverage"])?;
            let total = fit.total_leverage();
            for i in 0..fit.n() {
                w.write_record([
                    i.to_string(),
                    dataset.label(i),
                    format_float(fit.x()[i]),
                    format_float(reduced.y()[i]),
                    format_float(fit.residuals()[i]),
                    format_float(fit.leverage()[i]),
                    format_float(total[i]),
                ])?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))?
        }
    };
    Ok(Output {
        body,
        seed: None,
        input: Some(args.data.csv.clone()),
        notes: vec![],
    })
}

fn run_influence(args: &InfluenceArgs, format: Format) -> Result<Output, CliError> {
    let dataset = load_csv(&args.data.spec())?;
    let fit = fit_ols_with(&dataset, &args.data.fit_options())?;
    let body = if args.rows.is_empty() {
        let rows = (0..fit.n())
            .map(|i| Ok((i, influence_single(&fit, i)?, first_order_influence(&fit, &[i])?)))
            .collect::<Result<Vec<_>, misig_core::Error>>()?;
        match format {
            Format::Json => json_body(
                &rows
                    .iter()
                    .map(|(i, d, f)| json!({"row": i, "label": dataset.label(*i), "influence": d, "first_order": f}))
                    .collect::<Vec<_>>(),
            )?,
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["row", "label", "influence", "first_order"])?;
                for (i, d, f) in &rows {
                    w.write_record([i.to_string(), dataset.label(*i), format_float(*d), format_float(*f)])?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))?
            }
        }
    } else {
        let rows = resolve_rows(&dataset, &args.rows)?;
        let set = influence_set(&fit, &rows)?;
        let first_order = first_order_influence(&fit, &rows)?;
        let refit = if args.refit { Some(refit_influence_oracle(&dataset, &rows)?) } else { None };
        match format {
            Format::Json => json_body(&json!({
                "theta_hat": fit.theta_hat(),
                "set": to_json_value(&set)?,
                "labels": labels_of(&dataset, &rows),
                "first_order": first_order,
                "refit": refit,
            }))?,
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["row", "label", "contribution"])?;
                for (i, c) in set.indices.iter().zip(&set.contributions) {
                    w.write_record([i.to_string(), dataset.label(*i), format_float(*c)])?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))?
            }
        }
    };
    Ok(Output {
        body,
        seed: None,
        input: Some(args.data.csv.clone()),
        notes: vec![],
    })
}

fn run_search(args: &SearchCmd, format: Format) -> Result<Output, CliError> {
    let dataset = load_csv(&args.data.spec())?;
    let fit = fit_ols_with(&dataset, &args.data.fit_options())?;
    let spec = args.search.spec()?;
    let k = spec.resolve(fit.n())?;
    let set = if args.exhaustive {
        exhaustive_with_cap(&fit, k, spec.direction, args.cap)?
    } else {
        greedy_most_influential(&fit, &spec)?
    };
    let body = match format {
        Format::Json => json_body(&json!({
            "method": if args.exhaustive { "exhaustive" } else { "greedy" },
            "k": k,
            "direction": spec.direction,
            "theta_hat": fit.theta_hat(),
            "theta_without": fit.theta_hat() - set.delta,
            "set": to_json_value(&set)?,
            "labels": labels_of(&dataset, &set.indices),
        }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["row", "label", "contribution"])?;
            for (i, c) in set.indices.iter().zip(&set.contributions) {
                w.write_record([i.to_string(), dataset.label(*i), format_float(*c)])?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))?
        }
    };
    Ok(Output {
        body,
        seed: None,
        input: Some(args.data.csv.clone()),
        notes: vec![],
    })
}

fn run_audit(args: &AuditCmd, format: Format) -> Result<Output, CliError> {
    let dataset = load_csv(&args.data.spec())?;
    let mut config = AuditConfig::new(args.search.spec()?);
    config.fit = args.data.fit_options();
    config.two_sided = args.two_sided;
    if !args.pin.is_empty() {
        config.pinned = Some(resolve_rows(&dataset, &args.pin)?);
    }
    args.null.apply(&mut config)?;
    let report = test_influence(&dataset, &config)?;
    let body = match format {
        Format::Json => json_body(&report)?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_block_maxima_csv(&mut buf, &report.block_maxima)?;
            buf
        }
    };
    Ok(Output {
        body,
        seed: Some(config.seed),
        input: Some(args.data.csv.clone()),
        notes: report.notes.clone(),
    })
}

fn run_thresholds(args: &ThresholdArgs, format: Format) -> Result<Output, CliError> {
    if args.grid_points < 2 {
        return Err(CliError::Usage("--grid-points must be at least 2".into()));
    }
    let dataset = load_csv(&args.data.spec())?;
    let mut config = AuditConfig::new(SearchSpec::constant(1));
    config.fit = args.data.fit_options();
    args.null.apply(&mut config)?;
    let report = test_influence(&dataset, &config)?;
    let fit = fit_ols_with(&dataset, &config.fit)?;
    let lo = fit.x().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fit.x().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let steps = (args.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..args.grid_points).map(|i| lo + (hi - lo) * i as f64 / steps).collect();
    let curves = significance_thresholds(&fit, &report.null_model, &config.alpha_levels, &grid)?;
    let body = match format {
        Format::Json => json_body(&json!({
            "theta_hat": fit.theta_hat(),
            "null_model": to_json_value(&report.null_model)?,
            "curves": to_json_value(&curves)?,
        }))?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_threshold_csv(&mut buf, &curves)?;
            buf
        }
    };
    Ok(Output {
        body,
        seed: Some(config.seed),
        input: Some(args.data.csv.clone()),
        notes: vec!["boundaries use the partialled-out feature".into()],
    })
}

fn summary_rows(rows: &[(&str, Option<Summary>)]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "Mean", "Std.Dev.", "Q25", "Median", "Q75"])?;
    for (name, s) in rows {
        let mut rec = vec![name.to_string()];
        match s {
            Some(s) => rec.extend([s.mean, s.sd, s.q25, s.median, s.q75].map(format_float)),
            None => rec.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn run_simulate(args: &SimulateArgs, format: Format) -> Result<Output, CliError> {
    let through_origin = "synthetic regressions are fitted through the origin".to_string();
    let (body, notes) = match args.table {
        Table::Shape => {
            let reps = args.reps.unwrap_or(if args.full_scale { 1000 } else { 200 });
            let ns = if !args.n.is_empty() {
                args.n.clone()
            } else if args.full_scale {
                vec![100, 500, 1000, 2000]
            } else {
                vec![100]
            };
            let grid: Vec<_> = ns
                .iter()
                .flat_map(|&n| shape_grid(n, reps, args.draws, args.seed))
                .collect();
            let cells = shape_study(&grid)?;
            let failures: Vec<String> = cells
                .iter()
                .filter(|c| c.failures > 0)
                .map(|c| {
                    format!(
                        "{}-{} n={}: {} failed replications",
                        c.config.dist_x.name(),
                        c.config.dist_r.name(),
                        c.config.n,
                        c.failures
                    )
                })
                .collect();
            let body = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_shape_table(&mut buf, &cells)?;
                    buf
                }
                Format::Json => json_body(
                    &cells
                        .iter()
                        .map(|c| json!({"config": c.config, "failures": c.failures, "summary": c.summary}))
                        .collect::<Vec<_>>(),
                )?,
            };
            (body, [vec![through_origin], failures].concat())
        }
        Table::Gumbel => {
            let config = GumbelStudyConfig {
                block_size: args.block_size,
                m_blocks: args.m_blocks,
                reps: args.reps.unwrap_or(if args.full_scale { 1000 } else { 500 }),
                seed: args.seed,
                ..Default::default()
            };
            let study = gumbel_estimation_study(&config)?;
            let [u, c, s] = study.summaries();
            let body = match format {
                Format::Csv => summary_rows(&[
                    ("uncorrected_location_bias", u),
                    ("corrected_location_bias", c),
                    ("scale_bias", s),
                ])?,
                Format::Json => json_body(&json!({
                    "config": config,
                    "failures": study.failures,
                    "uncorrected_location_bias": u,
                    "corrected_location_bias": c,
                    "scale_bias": s,
                }))?,
            };
            (body, vec![])
        }
        Table::Illustration => {
            let seed = if args.seed == 1 { ILLUSTRATION_SEED } else { args.seed };
            let ill = illustration_scenario(seed)?;
            let body = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_threshold_csv(&mut buf, &ill.curves)?;
                    buf
                }
                Format::Json => json_body(&json!({
                    "injected_index": ill.injected_index,
                    "injected_x": ill.dataset.x()[ill.injected_index],
                    "injected_y": ill.dataset.y()[ill.injected_index],
                    "injected_refit_influence": ill.injected_refit_influence,
                    "report": to_json_value(&ill.report)?,
                    "curves": to_json_value(&ill.curves)?,
                    "histogram": to_json_value(&ill.histogram)?,
                }))?,
            };
            (body, [vec![through_origin], ill.report.notes].concat())
        }
    };
    Ok(Output {
        body,
        seed: Some(args.seed),
        input: None,
        notes,
    })
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Fit(_) => "fit",
        Command::Influence(_) => "influence",
        Command::Search(_) => "search",
        Command::Audit(_) => "audit",
        Command::Thresholds(_) => "thresholds",
        Command::Simulate(_) => "simulate",
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    if cli.threads > 0 {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let started = Instant::now();
    let output = match &cli.command {
        Command::Fit(a) => run_fit(a, cli.format),
        Command::Influence(a) => run_influence(a, cli.format),
        Command::Search(a) => run_search(a, cli.format),
        Command::Audit(a) => run_audit(a, cli.format),
        Command::Thresholds(a) => run_thresholds(a, cli.format),
        Command::Simulate(a) => run_simulate(a, cli.format),
    }?;
    match &cli.out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&output.body)?;
            stdout.flush()?;
        }
        Some(path) => {
            std::fs::write(path, &output.body)?;
            let manifest = RunManifest {
                command: command_name(&cli.command).into(),
                argv: argv.to_vec(),
                config: serde_json::to_value(&cli.command).map_err(|e| CliError::Io(e.to_string()))?,
                seed: output.seed,
                input_digest: output.input.as_deref().map(file_digest).transpose()?,
                tool_version: TOOL_VERSION.into(),
                wall_time_seconds: started.elapsed().as_secs_f64(),
                notes: output.notes,
            };
            write_sidecar(path, &manifest)?;
        }
    }
    Ok(())
}

fn report_error(e: &CliError, json_errors: bool) {
    if json_errors {
        let value = json!({"error": e.to_string(), "kind": e.kind(), "exit_code": e.exit_code()});
        eprintln!("{value}");
    } else {
        eprintln!("error: {e}");
    }
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match execute(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e, cli.json_errors);
            e.exit_code()
        }
    }
}
