use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdcov::gram::induced_gram;
use hdcov::model::center_by_group_mean;
use hdcov::oracle::{brute_force_report, mixture_spec_from_cov, sample_mixture, seeded_instance, MAX_EXPLICIT_P};
use hdcov::rng::stream;
use hdcov::sim::{
    compound_symmetry_cov, empirical_size_power, random_partition, random_split_size, split_sizes, Design, Innovation, SimConfig,
    SizePowerResult,
};
use hdcov::{covariance_test, report_from_gram, Execution, Method, TestOptions, TestReport};
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};
use crate::io::{format_value, read_matrix, read_sample};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "HDCOV_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hdcov", version, about = "Two-sample test for equality of high-dimensional covariance matrices")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism. HDCOV_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether two samples share a covariance matrix; prints a JSON report.
    Test(TestArgs),
    /// Empirical size under a null configuration; prints one CSV row.
    SimulateSize(SimArgs),
    /// Empirical power under an alternative configuration; prints one CSV row.
    SimulatePower(SimArgs),
    /// Draws from the exact mixture law of the statistic; prints one CSV column.
    Oracle(OracleArgs),
    /// Cross-checks the Gram pipeline against the explicit reference routes.
    Validate(ValidateArgs),
    /// Empirical size from random half splits of a single sample.
    SplitSize(SplitArgs),
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV of the first sample (rows are observations).
    pub x: PathBuf,
    /// CSV of the second sample.
    pub y: PathBuf,
    /// Skip group-mean centering (only when both population means are known to be zero).
    #[arg(long)]
    pub no_center: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignArg {
    #[value(alias = "compound-symmetry")]
    Cs,
    #[value(alias = "moving-average")]
    Ma,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Innovation model: 1 normal, 2 standardized t5, 3 standardized chi-square(1).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub model: u8,
    #[arg(long, value_enum)]
    pub design: DesignArg,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(4..))]
    pub n1: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(4..))]
    pub n2: u64,
    /// Common correlation (compound-symmetry size runs).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Correlation of the first group (compound-symmetry power runs).
    #[arg(long)]
    pub rho1: Option<f64>,
    /// Correlation of the second group (compound-symmetry power runs).
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_center: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// CSV with Σ1; defaults to compound symmetry with unit variances and --rho1.
    #[arg(long, requires = "sigma2")]
    pub sigma1: Option<PathBuf>,
    /// CSV with Σ2; defaults to compound symmetry with unit variances and --rho2.
    #[arg(long, requires = "sigma1")]
    pub sigma2: Option<PathBuf>,
    /// Dimension when the covariances are generated (at most 12).
    #[arg(long, default_value_t = 3, conflicts_with = "sigma1")]
    pub p: usize,
    #[arg(long, default_value_t = 0.0, conflicts_with = "sigma1")]
    pub rho1: f64,
    #[arg(long, default_value_t = 0.0, conflicts_with = "sigma1")]
    pub rho2: f64,
    /// Innovation model used to build Cov(y ⊗ y).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub model: u8,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(3..))]
    pub n1: u64,
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u64).range(3..))]
    pub n2: u64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Fix the dimension of every instance (default: random in 2..=4; at most 12).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub instances: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mixture draws for the moment check.
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub draws: u64,
    /// Perturbs one Gram entry before finishing the test (negative control).
    #[arg(long, hide = true)]
    pub perturb_gram: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// CSV of the sample to split.
    pub input: PathBuf,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_center: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Text produced by a command.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: Vec<String>,
    /// Destination of `stdout` when not the terminal.
    pub out: Option<PathBuf>,
    /// Set when the command ran but a check failed.
    pub failure: Option<String>,
}

/// Thread count from `HDCOV_THREADS` or the flag; `None` means the default pool.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> CliResult<Option<usize>> {
    let threads = match env {
        Some(value) => Some(
            value
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={value:?} is not a thread count")))?,
        ),
        None => flag,
    };
    match threads {
        Some(0) => Err(CliError::Usage("thread count must be at least 1".into())),
        other => Ok(other),
    }
}

/// Runs a parsed command line, inside a dedicated pool when a thread count is set.
pub fn execute(cli: &Cli, threads: Option<usize>) -> CliResult<Output> {
    match threads {
        None => dispatch(&cli.command),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(|| dispatch(&cli.command)),
    }
}

fn dispatch(command: &Command) -> CliResult<Output> {
    match command {
        Command::Test(args) => run_test(args),
        Command::SimulateSize(args) => run_simulation(args, false),
        Command::SimulatePower(args) => run_simulation(args, true),
        Command::Oracle(args) => run_oracle(args),
        Command::Validate(args) => run_validate(args),
        Command::SplitSize(args) => run_split(args),
    }
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha {alpha} must lie in (0, 1)")))
    }
}

fn innovation(model: u8) -> Innovation {
    Innovation::from_model_number(model).expect("clap restricts the model number")
}

pub fn run_test(args: &TestArgs) -> CliResult<Output> {
    let x = read_sample(&args.x)?;
    let y = read_sample(&args.y)?;
    let report = covariance_test(&x, &y, &TestOptions { center: !args.no_center, ..TestOptions::default() })?;
    let mut output = Output { out: args.out.clone(), ..Output::default() };
    if report.method == Method::NormalFallback {
        output.stderr.push(
            "warning: estimated third cumulant is not positive; the p-value uses the standard normal reference".into(),
        );
    }
    output.stdout = report_json(&report)?;
    Ok(output)
}

pub fn report_json(report: &TestReport) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Builds the configuration for `simulate-size` (`power = false`) or `simulate-power`.
pub fn sim_config(args: &SimArgs, power: bool) -> CliResult<SimConfig> {
    check_alpha(args.alpha)?;
    let model = innovation(args.model);
    let (p, n1, n2) = (args.p as usize, args.n1 as usize, args.n2 as usize);
    let cfg = match (args.design, power) {
        (DesignArg::Ma, _) => {
            if args.rho.is_some() || args.rho1.is_some() || args.rho2.is_some() {
                return Err(CliError::Usage("the moving-average design takes no --rho, --rho1 or --rho2".into()));
            }
            if power {
                SimConfig::moving_average_alternative(model, p, n1, n2)
            } else {
                SimConfig::moving_average_null(model, p, n1, n2)
            }
        }
        (DesignArg::Cs, false) => {
            if args.rho1.is_some() || args.rho2.is_some() {
                return Err(CliError::Usage("simulate-size uses --rho; --rho1 and --rho2 belong to simulate-power".into()));
            }
            let rho = args.rho.ok_or_else(|| CliError::Usage("compound symmetry needs --rho".into()))?;
            SimConfig::compound_symmetry_null(model, p, n1, n2, rho)
        }
        (DesignArg::Cs, true) => {
            if args.rho.is_some() {
                return Err(CliError::Usage("simulate-power uses --rho1 and --rho2 instead of --rho".into()));
            }
            match (args.rho1, args.rho2) {
                (Some(rho1), Some(rho2)) => SimConfig::compound_symmetry_alternative(model, p, n1, n2, rho1, rho2),
                _ => return Err(CliError::Usage("compound symmetry power runs need --rho1 and --rho2".into())),
            }
        }
    };
    let cfg = cfg.with_reps(args.reps as usize).with_alpha(args.alpha).with_seed(args.seed).with_center(!args.no_center);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub const SIM_HEADER: [&str; 14] = [
    "model",
    "design",
    "p",
    "n1",
    "n2",
    "rho1",
    "rho2",
    "reps",
    "alpha",
    "rejection_rate",
    "se",
    "mean_d",
    "failures",
    "seed",
];

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    writer.write_record(header).map_err(internal)?;
    for row in rows {
        writer.write_record(row).map_err(internal)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn simulation_row(cfg: &SimConfig, result: &SizePowerResult) -> Vec<String> {
    let (rho1, rho2) = match cfg.design {
        Design::CompoundSymmetry => (cfg.rho1.to_string(), cfg.rho2.to_string()),
        Design::MovingAverage => (String::new(), String::new()),
    };
    vec![
        cfg.model.tag().into(),
        cfg.design.tag().into(),
        cfg.p.to_string(),
        cfg.n1.to_string(),
        cfg.n2.to_string(),
        rho1,
        rho2,
        result.reps.to_string(),
        cfg.alpha.to_string(),
        result.rejection_rate.to_string(),
        result.se.to_string(),
        result.mean_d.to_string(),
        result.failures.to_string(),
        cfg.seed.to_string(),
    ]
}

fn failure_notes(result: &SizePowerResult, output: &mut Output) {
    if result.failures > 0 {
        output.stderr.push(format!("note: {} replications failed and were excluded", result.failures));
    }
    if result.fallbacks > 0 {
        output.stderr.push(format!("note: {} replications used the normal reference", result.fallbacks));
    }
}

pub fn run_simulation(args: &SimArgs, power: bool) -> CliResult<Output> {
    let cfg = sim_config(args, power)?;
    let result = empirical_size_power(&cfg)?;
    let mut output = Output { out: args.out.clone(), ..Output::default() };
    failure_notes(&result, &mut output);
    output.stdout = csv_text(&SIM_HEADER, &[simulation_row(&cfg, &result)])?;
    Ok(output)
}

pub fn run_oracle(args: &OracleArgs) -> CliResult<Output> {
    let (sigma1, sigma2) = match (&args.sigma1, &args.sigma2) {
        (Some(a), Some(b)) => (read_matrix(a)?, read_matrix(b)?),
        _ => {
            if args.p > MAX_EXPLICIT_P {
                return Err(hdcov::Error::DimensionTooLarge { p: args.p, max: MAX_EXPLICIT_P }.into());
            }
            for rho in [args.rho1, args.rho2] {
                if !(0.0..1.0).contains(&rho) {
                    return Err(CliError::Usage(format!("correlation {rho} must lie in [0, 1)")));
                }
            }
            let ones = vec![1.0; args.p];
            (compound_symmetry_cov(&ones, args.rho1), compound_symmetry_cov(&ones, args.rho2))
        }
    };
    let spec = mixture_spec_from_cov(&sigma1, &sigma2, args.n1 as usize, args.n2 as usize, innovation(args.model))?;
    let draws = sample_mixture(&spec, args.reps as usize, args.seed)?;
    let mut text = String::from("t\n");
    for v in &draws {
        text.push_str(&format_value(*v));
        text.push('\n');
    }
    Ok(Output {
        stdout: text,
        stderr: vec![format!(
            "exact variance {}, exact third cumulant {}",
            format_value(spec.exact_variance()),
            format_value(spec.exact_k3())
        )],
        out: args.out.clone(),
        failure: None,
    })
}

const VALIDATE_RTOL: f64 = 1e-9;

fn rel_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= VALIDATE_RTOL * a.abs().max(b.abs())
}

fn reports_agree(a: &TestReport, b: &TestReport) -> bool {
    let opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => rel_close(x, y),
        (None, None) => true,
        _ => false,
    };
    rel_close(a.statistic, b.statistic)
        && rel_close(a.normalized_statistic, b.normalized_statistic)
        && rel_close(a.k2_hat, b.k2_hat)
        && rel_close(a.k3_hat, b.k3_hat)
        && rel_close(a.p_value, b.p_value)
        && opt(a.beta0, b.beta0)
        && opt(a.beta1, b.beta1)
        && opt(a.d, b.d)
        && a.method == b.method
        && (a.n1, a.n2, a.p, a.centered) == (b.n1, b.n2, b.p, b.centered)
}

/// Gram pipeline with an optional perturbation of the first cross entry.
fn gram_route(x: &hdcov::SampleBlock, y: &hdcov::SampleBlock, perturb: bool) -> hdcov::Result<TestReport> {
    hdcov::model::validate_pair(x, y)?;
    let (xc, yc) = (center_by_group_mean(x), center_by_group_mean(y));
    let mut gram = induced_gram(&xc, &yc)?;
    if perturb {
        gram.g12[(0, 0)] *= 1.0 + 1e-6;
    }
    report_from_gram(&gram, x.p(), true)
}

pub fn run_validate(args: &ValidateArgs) -> CliResult<Output> {
    if let Some(p) = args.p {
        if p > MAX_EXPLICIT_P {
            return Err(hdcov::Error::DimensionTooLarge { p, max: MAX_EXPLICIT_P }.into());
        }
        if p == 0 {
            return Err(CliError::Usage("--p must be positive".into()));
        }
    }
    let mut lines = Vec::new();

    let mut mismatches = 0;
    for i in 0..args.instances {
        let (x, y) = seeded_instance(args.seed, i, args.p);
        let agree = match (gram_route(&x, &y, args.perturb_gram), brute_force_report(&x, &y, true)) {
            (Ok(a), Ok(b)) => reports_agree(&a, &b),
            (Err(a), Err(b)) => a == b,
            _ => false,
        };
        mismatches += usize::from(!agree);
    }
    lines.push(("oracle-equivalence", mismatches == 0, format!("{mismatches} of {} instances differ", args.instances)));

    let mut broken = 0;
    for i in 0..args.instances {
        let (x, y) = seeded_instance(args.seed.wrapping_add(1), i, args.p);
        let opts = TestOptions { center: true, exec: Execution::Sequential };
        let base = covariance_test(&x, &y, &opts)?.p_value;
        let (order, _) = random_partition(x.n(), x.n(), &mut stream(args.seed, i));
        let variants = [
            covariance_test(&x.scaled(0.1), &y.scaled(0.1), &opts)?.p_value,
            covariance_test(&x.scaled(3.0), &y.scaled(3.0), &opts)?.p_value,
            covariance_test(&y, &x, &opts)?.p_value,
            covariance_test(&x.permuted_rows(&order), &y, &opts)?.p_value,
        ];
        broken += variants.iter().filter(|p| !rel_close(base, **p)).count();
    }
    lines.push(("invariance", broken == 0, format!("{broken} scale, swap or permutation checks differ")));

    let p = args.p.unwrap_or(3);
    let ones = vec![1.0; p];
    let spec = mixture_spec_from_cov(
        &compound_symmetry_cov(&ones, 0.5),
        &DMatrix::identity(p, p),
        10,
        15,
        Innovation::Normal,
    )?;
    let draws = sample_mixture(&spec, args.draws as usize, args.seed)?;
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = draws.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let (mean_se, var_se) = ((var / n).sqrt(), ((m4 - var * var) / n).sqrt());
    let exact = spec.exact_variance();
    let ok = mean.abs() < 4.0 * mean_se && (var - exact).abs() < 4.0 * var_se;
    lines.push(("mixture-moments", ok, format!("mean {mean:.3e} (se {mean_se:.1e}), variance {var:.5} vs exact {exact:.5}")));

    let mut output = Output::default();
    for (name, pass, detail) in &lines {
        let _ = writeln!(output.stdout, "{} {name}: {detail}", if *pass { "PASS" } else { "FAIL" });
    }
    output.failure = lines.iter().find(|(_, pass, _)| !pass).map(|(name, _, _)| (*name).to_owned());
    Ok(output)
}

pub fn run_split(args: &SplitArgs) -> CliResult<Output> {
    check_alpha(args.alpha)?;
    let x = read_sample(&args.input)?;
    let result = random_split_size(&x, args.reps as usize, args.alpha, args.seed, !args.no_center, Execution::default())?;
    let (n1, n2) = split_sizes(x.n());
    let mut output = Output { out: args.out.clone(), ..Output::default() };
    failure_notes(&result, &mut output);
    let row = vec![
        x.n().to_string(),
        n1.to_string(),
        n2.to_string(),
        x.p().to_string(),
        result.reps.to_string(),
        args.alpha.to_string(),
        result.rejection_rate.to_string(),
        result.se.to_string(),
        result.mean_d.to_string(),
        result.failures.to_string(),
        args.seed.to_string(),
    ];
    output.stdout =
        csv_text(&["n", "n1", "n2", "p", "reps", "alpha", "rejection_rate", "se", "mean_d", "failures", "seed"], &[row])?;
    Ok(output)
}
