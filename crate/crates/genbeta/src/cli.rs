//! Command-line surface: evaluate closed forms, integrate SDEs against their
//! steady states, fit samples, and produce a full realized-volatility report.
//!
//! Subcommands: `eval`, `simulate`, `fit`, `rv-report`. Every command is
//! deterministic given an explicit `--seed`. Exit codes: 0 success, 2
//! usage/input error, 3 numeric failure.

use crate::dist::{DistSpec, Family};
use crate::error::{Error, Result};
use crate::fit::{self, CiBand, FitMethod, FitResult};
use crate::rv::{self, PriceSeries, RvDataset, RvSettings};
use crate::sde::{BoundaryPolicy, IntegrationConfig, SdeSpec};
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "genbeta",
    version,
    about = "Generalized Beta family: closed forms, SDE steady states, fitting, realized volatility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Pdf,
    Cdf,
    Ccdf,
    Quantile,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Mle,
    Cdf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Reflect,
    Clamp,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate pdf/cdf/ccdf/quantile of a family member over a point list
    Eval {
        /// Distribution JSON, e.g. '{"family":"GB","alpha":1.5,...}'
        #[arg(long, conflicts_with = "spec_file")]
        spec: Option<String>,
        /// File containing the distribution JSON
        #[arg(long)]
        spec_file: Option<PathBuf>,
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// Comma list "1,2,5", or "lin:a:b:n" / "log:a:b:n" grids
        #[arg(long)]
        points: String,
        /// Write the TSV here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate an SDE and summarize the ensemble against its steady state
    Simulate {
        /// SDE JSON, e.g. '{"model":"mB","gamma":2.0,...}'
        #[arg(long, conflicts_with = "sde_file")]
        sde: Option<String>,
        /// File containing the SDE JSON
        #[arg(long)]
        sde_file: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "burn-in")]
        burn_in: Option<f64>,
        /// Time between retained samples (thinning stride)
        #[arg(long)]
        stride: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        /// Total retained samples across paths
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "reflect")]
        boundary: BoundaryArg,
        #[arg(long = "alpha-level", default_value_t = 0.05)]
        alpha_level: f64,
        /// Output directory for the ensemble files
        #[arg(long, default_value = "genbeta-sim")]
        out: PathBuf,
    },
    /// Fit a family to a single-column sample file
    Fit {
        #[arg(long)]
        samples: PathBuf,
        /// Family tag: GB, mGB, tildeMGB, mB, B, B2, mB2, GB1, GB2, mGB2, GGa, GIGa
        #[arg(long)]
        family: String,
        #[arg(long, value_enum, default_value = "mle")]
        method: MethodArg,
        /// Optional starting point as distribution JSON
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit realized-volatility distributions per window size and emit tables
    RvReport {
        /// CSV of ISO-8601 date, close price (header optional)
        #[arg(long)]
        prices: PathBuf,
        /// Comma-separated window sizes in trading days
        #[arg(long = "n-list", default_value = "1,2,3,5,7,9,13,17,21")]
        n_list: String,
        /// Comma-separated family tags to fit per window
        #[arg(long, default_value = "GB,mGB")]
        families: String,
        /// Bootstrap replicas for the ccdf confidence bands (0 disables)
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
        #[arg(long = "alpha-level", default_value_t = 0.05)]
        alpha_level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Window stride in trading days
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Entry point used by the binary.
pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

/// Parses and executes a command line; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Eval {
            spec,
            spec_file,
            quantity,
            points,
            out,
        } => cmd_eval(spec, spec_file, quantity, &points, out.as_deref()),
        Command::Simulate {
            sde,
            sde_file,
            dt,
            burn_in,
            stride,
            paths,
            samples,
            seed,
            boundary,
            alpha_level,
            out,
        } => cmd_simulate(
            sde, sde_file, dt, burn_in, stride, paths, samples, seed, boundary, alpha_level, &out,
        ),
        Command::Fit {
            samples,
            family,
            method,
            init,
            out,
        } => cmd_fit(&samples, &family, method, init, out.as_deref()),
        Command::RvReport {
            prices,
            n_list,
            families,
            bootstrap,
            alpha_level,
            seed,
            stride,
            out,
        } => {
            let windows = parse_usize_list(&n_list)?;
            let families = parse_family_list(&families)?;
            let options = RvReportOptions {
                windows,
                families,
                bootstrap,
                alpha_level,
                seed,
                stride,
            };
            let series = PriceSeries::from_csv_path(&prices)?;
            let bundle = build_rv_report(&series, &options)?;
            write_rv_report(&bundle, &options, &out)?;
            for entry in &bundle.entries {
                for (family, fit) in &entry.fits {
                    println!(
                        "n={}\tfamily={}\tks={:.6}\tks_table={:.6}\tconverged={}",
                        entry.n, family, fit.ks, fit.ks_threshold, fit.converged
                    );
                }
            }
            Ok(())
        }
    }
}

fn read_inline_or_file(
    inline: Option<String>,
    file: Option<PathBuf>,
    what: &str,
) -> Result<String> {
    match (inline, file) {
        (Some(s), None) => Ok(s),
        (None, Some(p)) => Ok(std::fs::read_to_string(p)?),
        _ => Err(Error::parse(format!(
            "provide exactly one of --{what} or --{what}-file"
        ))),
    }
}

/// Point lists: "1,2,5", "lin:a:b:n", "log:a:b:n".
fn parse_points(text: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::parse(format!("invalid points {text:?}: {m}"));
    if let Some(rest) = text.strip_prefix("lin:").or_else(|| text.strip_prefix("log:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let a: f64 = parts[0].parse().map_err(|_| bad("bad start"))?;
        let b: f64 = parts[1].parse().map_err(|_| bad("bad stop"))?;
        let n: usize = parts[2].parse().map_err(|_| bad("bad count"))?;
        if n < 2 {
            return Err(bad("count must be >= 2"));
        }
        let log = text.starts_with("log:");
        if log && !(a > 0.0 && b > 0.0) {
            return Err(bad("log grids need positive endpoints"));
        }
        let (la, lb) = if log { (a.ln(), b.ln()) } else { (a, b) };
        return Ok((0..n)
            .map(|i| {
                let t = la + (lb - la) * i as f64 / (n - 1) as f64;
                if log {
                    t.exp()
                } else {
                    t
                }
            })
            .collect());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("bad value {s:?}")))
        })
        .collect()
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let items: Vec<usize> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(format!("invalid window size {s:?}")))
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::parse("the window list is empty"));
    }
    Ok(items)
}

fn parse_family_list(text: &str) -> Result<Vec<Family>> {
    let items: Vec<Family> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Family::parse(s.trim()))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::parse("the family list is empty"));
    }
    Ok(items)
}

fn cmd_eval(
    spec: Option<String>,
    spec_file: Option<PathBuf>,
    quantity: Quantity,
    points: &str,
    out: Option<&Path>,
) -> Result<()> {
    let text = read_inline_or_file(spec, spec_file, "spec")?;
    let spec: DistSpec = serde_json::from_str(&text)?;
    let xs = parse_points(points)?;
    let mut table = String::new();
    for &x in &xs {
        let v = match quantity {
            Quantity::Pdf => spec.pdf(x)?,
            Quantity::Cdf => spec.cdf(x)?,
            Quantity::Ccdf => spec.ccdf(x)?,
            Quantity::Quantile => spec.quantile(x)?,
        };
        table.push_str(&format!("{x}\t{v}\n"));
    }
    match out {
        Some(path) => std::fs::write(path, table)?,
        None => print!("{table}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    sde: Option<String>,
    sde_file: Option<PathBuf>,
    dt: Option<f64>,
    burn_in: Option<f64>,
    stride: Option<f64>,
    paths: Option<usize>,
    samples: usize,
    seed: u64,
    boundary: BoundaryArg,
    alpha_level: f64,
    out: &Path,
) -> Result<()> {
    let text = read_inline_or_file(sde, sde_file, "sde")?;
    let spec: SdeSpec = serde_json::from_str(&text)?;
    for field in spec.irrelevant_set_fields() {
        eprintln!("warning: field {field} is not used by model {}", spec.model);
    }
    let mut config = IntegrationConfig::desk(spec.relaxation_rate(), samples, seed);
    if let Some(v) = dt {
        config.dt = v;
    }
    if let Some(v) = burn_in {
        config.burn_in = v;
    }
    if let Some(v) = stride {
        config.thin = v;
    }
    if let Some(v) = paths {
        config.paths = v;
        config.samples_per_path = samples.div_ceil(v);
    }
    config.boundary_policy = match boundary {
        BoundaryArg::Reflect => BoundaryPolicy::Reflect,
        BoundaryArg::Clamp => BoundaryPolicy::Clamp,
    };
    let ensemble = spec.integrate(&config)?;
    ensemble.write_files(out, "ensemble")?;
    match spec.param_map() {
        Ok(target) => {
            let ks = fit::ks_statistic(&ensemble.samples, &target)?;
            let threshold = fit::ks_threshold(ensemble.effective_count, alpha_level)?;
            let verdict = if ks < threshold { "pass" } else { "fail" };
            println!(
                "model={} steady_state={} n={} ks={:.6} threshold={:.6} {}",
                spec.model,
                target.family(),
                ensemble.effective_count,
                ks,
                threshold,
                verdict
            );
        }
        Err(_) => {
            println!(
                "model={} n={} deterministic run (no steady-state distribution)",
                spec.model, ensemble.effective_count
            );
        }
    }
    Ok(())
}

fn read_sample_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(
            t.parse::<f64>()
                .map_err(|_| Error::parse(format!("line {}: unparseable value {t:?}", idx + 1)))?,
        );
    }
    Ok(out)
}

fn cmd_fit(
    samples_path: &Path,
    family: &str,
    method: MethodArg,
    init: Option<String>,
    out: Option<&Path>,
) -> Result<()> {
    let samples = read_sample_file(samples_path)?;
    let family = Family::parse(family)?;
    let init_spec = match init {
        Some(text) => Some(serde_json::from_str::<DistSpec>(&text)?),
        None => None,
    };
    let result = match method {
        MethodArg::Mle => fit::fit_mle(&samples, family, init_spec)?,
        MethodArg::Cdf => fit::fit_cdf_lsq(&samples, family, init_spec)?,
    };
    let json = serde_json::to_string_pretty(&result.to_json())?;
    match out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

/// Options for the realized-volatility report.
#[derive(Debug, Clone)]
pub struct RvReportOptions {
    pub windows: Vec<usize>,
    pub families: Vec<Family>,
    pub bootstrap: usize,
    pub alpha_level: f64,
    pub seed: u64,
    pub stride: usize,
}

/// Fitted ccdf curve on a grid covering the sample range.
#[derive(Debug, Clone)]
pub struct ReportCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Everything produced for one window size.
#[derive(Debug)]
pub struct ReportEntry {
    pub n: usize,
    pub dataset: RvDataset,
    pub empirical: Vec<(f64, f64)>,
    pub fits: Vec<(Family, FitResult)>,
    pub curves: Vec<(Family, ReportCurve)>,
    pub bands: Vec<(Family, CiBand)>,
}

/// Full report: per-window fits, curves and bands plus run metadata.
#[derive(Debug)]
pub struct ReportBundle {
    pub entries: Vec<ReportEntry>,
    pub seed: u64,
    pub source_digest: String,
    pub version: String,
}

/// Log-spaced grid covering the full sample range.
fn curve_grid(values: &[f64], points: usize) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0_f64, f64::max);
    let (la, lb) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (la + (lb - la) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Builds the per-window fits, fitted ccdf curves and optional bootstrap
/// bands for a price series.
pub fn build_rv_report(series: &PriceSeries, options: &RvReportOptions) -> Result<ReportBundle> {
    if options.windows.is_empty() {
        return Err(Error::parse("the window list is empty"));
    }
    let settings = RvSettings {
        stride: options.stride,
        ..RvSettings::default()
    };
    let datasets = rv::build_all_with(series, &options.windows, &settings)?;
    let mut entries = Vec::with_capacity(datasets.len());
    for dataset in datasets {
        let empirical = rv::empirical_ccdf(&dataset);
        let grid = curve_grid(&dataset.values, 200);
        let mut fits = Vec::new();
        let mut curves = Vec::new();
        let mut bands = Vec::new();
        for &family in &options.families {
            // Fit failures are recorded and the run continues.
            let fit = match fit::fit_mle(&dataset.values, family, None) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("warning: n={} family {family}: fit failed: {e}", dataset.n);
                    continue;
                }
            };
            let mut curve = ReportCurve {
                grid: grid.clone(),
                values: Vec::with_capacity(grid.len()),
            };
            for &x in &grid {
                curve.values.push(fit.spec.ccdf(x)?);
            }
            if options.bootstrap > 0 {
                let band = fit::bootstrap_ci(
                    &fit.spec,
                    dataset.count,
                    options.bootstrap,
                    0.95,
                    &grid,
                    FitMethod::Mle,
                    options.seed,
                )?;
                bands.push((family, band));
            }
            curves.push((family, curve));
            fits.push((family, fit));
        }
        entries.push(ReportEntry {
            n: dataset.n,
            empirical,
            fits,
            curves,
            bands,
            dataset,
        });
    }
    Ok(ReportBundle {
        entries,
        seed: options.seed,
        source_digest: series.source_digest.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

fn param_or_empty(fit: &FitResult, name: &str) -> String {
    fit.spec
        .params()
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, v)| format!("{v}"))
        .unwrap_or_default()
}

/// Writes the report directory: per-window artifacts (atomically, via a
/// temporary directory renamed into place) and one summary table per family
/// with the column order n, alpha, beta1, beta2, p, q, ks, ks_table.
pub fn write_rv_report(
    bundle: &ReportBundle,
    options: &RvReportOptions,
    out: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out)?;
    for entry in &bundle.entries {
        let stem = format!("n{:02}", entry.n);
        let tmp = out.join(format!(".tmp-{stem}"));
        if tmp.exists() {
            std::fs::remove_dir_all(&tmp)?;
        }
        std::fs::create_dir_all(&tmp)?;
        entry
            .dataset
            .write_files(&tmp, "rv", &bundle.source_digest)?;
        entry.dataset.write_ccdf_tsv(&tmp.join("ccdf_empirical.tsv"))?;
        for (family, fit) in &entry.fits {
            std::fs::write(
                tmp.join(format!("fit_{family}.json")),
                serde_json::to_string_pretty(&fit.to_json())? + "\n",
            )?;
        }
        for (family, curve) in &entry.curves {
            let mut text = String::new();
            for (x, v) in curve.grid.iter().zip(&curve.values) {
                text.push_str(&format!("{x}\t{v}\n"));
            }
            std::fs::write(tmp.join(format!("ccdf_fit_{family}.tsv")), text)?;
        }
        for (family, band) in &entry.bands {
            band.write_tsv(&tmp.join(format!("ci_{family}.tsv")))?;
        }
        let dest = out.join(&stem);
        if dest.exists() {
            std::fs::remove_dir_all(&dest)?;
        }
        std::fs::rename(&tmp, &dest)?;
    }
    for &family in &options.families {
        let mut table = String::from("n\talpha\tbeta1\tbeta2\tp\tq\tks\tks_table\n");
        for entry in &bundle.entries {
            if let Some((_, fit)) = entry.fits.iter().find(|(f, _)| *f == family) {
                table.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    entry.n,
                    param_or_empty(fit, "alpha"),
                    param_or_empty(fit, "beta1"),
                    param_or_empty(fit, "beta2"),
                    param_or_empty(fit, "p"),
                    param_or_empty(fit, "q"),
                    fit.ks,
                    fit.ks_threshold,
                ));
            }
        }
        std::fs::write(out.join(format!("summary_{family}.tsv")), table)?;
    }
    let metadata = serde_json::json!({
        "seed": bundle.seed,
        "version": bundle.version,
        "source_digest": bundle.source_digest,
        "windows": options.windows,
        "families": options.families.iter().map(|f| f.name()).collect::<Vec<_>>(),
        "bootstrap": options.bootstrap,
        "alpha_level": options.alpha_level,
        "stride": options.stride,
        "counts": bundle.entries.iter().map(|e| (e.n, e.dataset.count)).collect::<Vec<_>>(),
        "zeros_excluded": bundle.entries.iter().map(|e| (e.n, e.dataset.zeros_excluded)).collect::<Vec<_>>(),
    });
    let mut f = std::fs::File::create(out.join("metadata.json"))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&metadata)?)?;
    Ok(())
}
