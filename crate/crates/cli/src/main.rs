use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slnfit::dists::{LogSkewNormal, SkewNormalParams, TailCdf};
use slnfit::lsknfit::{fit_fenton_wilkinson, fit_log_domain_mom, fit_lskn};
use slnfit::mcengine::{sample_sln, write_dump, Exec, RngSpec};
use slnfit::outage::{horizontal_offsets, sir_db_samples, threshold_grid, NetworkConfig, OutageCurve, OutageModel};
use slnfit::presets::{self, TABLE1};
use slnfit::probscale::{ks_statistic, max_cdf_error, CurveTable, EmpiricalCdf, DEFAULT_REGION, PROBIT_GUARD};
use slnfit::slnmodel::SlnSpec;
use slnfit::specfun::norm_quantile;
use slnfit::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Probability levels reported for outage curves.
const OUTAGE_LEVELS: [f64; 4] = [0.01, 0.1, 0.5, 0.9];
const CURVE_POINTS: usize = 201;

#[derive(Parser)]
#[command(name = "slnfit", version, about = "Log-skew-normal fits of lognormal sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an LSKN to a lognormal sum and print the parameters as JSON
    Fit {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Output,
    },
    /// Probability-scale curves of the Monte Carlo sum and both fits
    Curve {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: Output,
        /// Also write the raw samples (8-byte count, then f64 values, little endian)
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// CDF errors of every method against the Monte Carlo sum
    Compare {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Outage probability of a hexagonal network, analytic and simulated
    Outage {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Fitted and published parameters of the four reference sums
    Table1 {
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in configuration (fig1..fig4 for sums, sigma{3,6}-{rc,half-rc} for outage)
    #[arg(long)]
    preset: Option<String>,
    /// JSON file with the sum or network description
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    /// Output directory; results go to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(2..))]
    samples: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slnfit: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoBracket { .. } | Error::NoConvergence { .. } | Error::Overflow(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn run(cmd: Command) -> slnfit::Result<()> {
    match cmd {
        Command::Fit { source, out } => {
            let (name, spec) = load_spec(&source)?;
            let fit = fit_lskn(&spec)?;
            emit(out.out.as_deref(), &format!("{name}_fit.json"), |w| {
                writeln!(w, "{}", fit.to_json())?;
                Ok(())
            })
        }
        Command::Curve { source, mc, out, dump } => {
            let (name, spec) = load_spec(&source)?;
            let samples = sample_sln(&spec, RngSpec::new(mc.seed, 0), mc.samples as usize, Exec::default())?;
            if let Some(path) = dump {
                write_dump(path, &samples)?;
            }
            let table = curve_table(&spec, EmpiricalCdf::new(samples)?)?;
            emit(out.out.as_deref(), &format!("{name}_curve.csv"), |w| table.write_csv(w))
        }
        Command::Compare { source, mc, out } => {
            let (name, spec) = load_spec(&source)?;
            let csv = compare(&spec, &mc)?;
            emit(out.out.as_deref(), &format!("{name}_compare.csv"), |w| {
                w.write_all(csv.as_bytes())?;
                Ok(())
            })
        }
        Command::Outage { source, mc, out } => {
            let (name, cfg) = load_network(&source)?;
            let model = OutageModel::new(&cfg)?;
            let sir = sir_db_samples(&cfg, RngSpec::new(mc.seed, 0), mc.samples as usize, Exec::default())?;
            if cfg.sigma_db > 0.0 {
                for (p, gap) in OUTAGE_LEVELS.iter().zip(horizontal_offsets(&model, &sir, &OUTAGE_LEVELS)?) {
                    eprintln!("{name}: horizontal gap at p={p}: {gap:.3} dB");
                }
            }
            let curve = OutageCurve::build(&model, &sir, &threshold_grid(-30.0, 30.0, 0.5));
            emit(out.out.as_deref(), &format!("{name}_outage.csv"), |w| curve.write_csv(w))
        }
        Command::Table1 { mc, out } => {
            let csv = table1(&mc)?;
            emit(out.out.as_deref(), "table1.csv", |w| {
                w.write_all(csv.as_bytes())?;
                Ok(())
            })
        }
    }
}

fn source_name(src: &Source) -> String {
    match (&src.preset, &src.input) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into()),
        (None, None) => unreachable!("clap requires a source"),
    }
}

fn load_spec(src: &Source) -> slnfit::Result<(String, SlnSpec)> {
    let spec = match (&src.preset, &src.input) {
        (Some(p), _) => presets::sln_preset(p)?,
        (None, Some(path)) => SlnSpec::from_json_file(path)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    Ok((source_name(src), spec))
}

fn load_network(src: &Source) -> slnfit::Result<(String, NetworkConfig)> {
    let cfg = match (&src.preset, &src.input) {
        (Some(p), _) => presets::outage_preset(p)?,
        (None, Some(path)) => NetworkConfig::from_json_file(path)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    Ok((source_name(src), cfg))
}

/// Writes to `dir/file` when a directory is given, else to stdout.
fn emit(dir: Option<&Path>, file: &str, body: impl FnOnce(&mut dyn Write) -> slnfit::Result<()>) -> slnfit::Result<()> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(file);
            let mut f = io::BufWriter::new(File::create(&path)?);
            body(&mut f)?;
            f.flush()?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)
        }
    }
}

fn probit_or_nan(p: f64) -> f64 {
    if p > PROBIT_GUARD && p < 1.0 - PROBIT_GUARD {
        norm_quantile(p).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    }
}

fn curve_table(spec: &SlnSpec, ecdf: EmpiricalCdf) -> slnfit::Result<CurveTable> {
    let lskn = LogSkewNormal(fit_lskn(spec)?.params);
    let fw = fit_fenton_wilkinson(spec)?;
    let (lo, hi) = (ecdf.quantile(1e-4).ln(), ecdf.quantile(1.0 - 1e-4).ln());
    let xs: Vec<f64> = (0..CURVE_POINTS).map(|i| lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64).collect();
    let mut table = CurveTable::new(xs.clone());
    table.push("probit_mc", xs.iter().map(|x| probit_or_nan(ecdf.eval(x.exp()))).collect())?;
    table.push("probit_lskn", xs.iter().map(|x| lskn.probit(x.exp())).collect())?;
    table.push("probit_fw", xs.iter().map(|x| fw.probit(x.exp())).collect())?;
    Ok(table)
}

fn compare(spec: &SlnSpec, mc: &McArgs) -> slnfit::Result<String> {
    let n = mc.samples as usize;
    let exec = Exec::default();
    let reference = EmpiricalCdf::new(sample_sln(spec, RngSpec::new(mc.seed, 0), n, exec)?)?;
    let lskn = fit_lskn(spec)?.params;
    let fw = fit_fenton_wilkinson(spec)?;
    let fw_sn = SkewNormalParams::new(0.0, fw.mu(), fw.sigma())?;

    let mut rows = vec![("lskn_slope_match", lskn), ("fenton_wilkinson", fw_sn)];
    // the moment fit needs its own draw so it is not scored on its training data
    match sample_sln(spec, RngSpec::new(mc.seed, 1), n, exec).and_then(|s| fit_log_domain_mom(&s)) {
        Ok(p) => rows.push(("log_domain_mom", p)),
        Err(Error::InsufficientData(msg)) => eprintln!("skipping log_domain_mom: {msg}"),
        Err(e) => return Err(e),
    }

    let mut out = String::from("method,lambda,epsilon,omega,beta,max_cdf_error,ks_statistic\n");
    for (method, p) in rows {
        let d = LogSkewNormal(p);
        let err = max_cdf_error(&reference, |x| d.cdf(x), DEFAULT_REGION, exec)?;
        let ks = ks_statistic(&reference, |x| d.cdf(x), exec);
        out += &format!("{method},{},{},{},{},{err},{ks}\n", p.lambda, p.epsilon, p.omega, p.beta());
    }
    Ok(out)
}

fn table1(mc: &McArgs) -> slnfit::Result<String> {
    let n = mc.samples as usize;
    let mut out = String::from("case,method,source,beta,epsilon,omega\n");
    for (k, row) in TABLE1.iter().enumerate() {
        let spec = presets::sln_preset(row.preset)?;
        let fit = fit_lskn(&spec)?.params;
        let mom = fit_log_domain_mom(&sample_sln(&spec, RngSpec::new(mc.seed, k as u64), n, Exec::default())?)?;
        let lines = [
            ("lskn_slope_match", "computed", fit.beta(), fit.epsilon, fit.omega),
            ("lskn_slope_match", "published", row.slope_match.beta, row.slope_match.epsilon, row.slope_match.omega),
            ("log_domain_mom", "computed", mom.beta(), mom.epsilon, mom.omega),
            ("log_domain_mom", "published", row.log_domain_mom.beta, row.log_domain_mom.epsilon, row.log_domain_mom.omega),
        ];
        for (method, source, b, e, w) in lines {
            out += &format!("{},{method},{source},{b:.4},{e:.4},{w:.4}\n", row.preset);
        }
    }
    Ok(out)
}
