//! `levy-spde`: refinement studies, noise condition checks and kernel tables.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 numerical
//! acceptance failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use levy_spde::engine::{representation_sweep, run_sweep, Psi2Sign, SweepCase, REPRESENTATION_TOLERANCE};
use levy_spde::noise::{hs_condition, sample_jump_path, weqii_for_law, CovarianceSpec, LevyLaw, RngStreams, TimeGrid};
use levy_spde::propagators::{cq_weights, mittag_leffler_neg, EquationKind, RationalScheme};
use levy_spde::spectral::DirichletSpectrum;
use levy_spde::study::{emit_csv, format_float, level_setups, presets, run_study, StudyConfig, SLOPE_TOLERANCE};
use levy_spde::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable naming the default directory for study CSV files.
const OUT_DIR_VAR: &str = "LEVY_SPDE_OUT_DIR";

#[derive(Parser)]
#[command(name = "levy-spde", version, about = "Error studies for Lévy-driven heat, Volterra and wave equations")]
struct Cli {
    /// Cap on worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement study and write its CSV.
    Study {
        #[command(flatten)]
        source: ConfigSource,
        /// Output directory; defaults to $LEVY_SPDE_OUT_DIR, then the working directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the noise regularity sum, its tail bound and the second-moment functional.
    CheckCondition(ConditionArgs),
    /// Compare the error representation with the direct weak error.
    VerifyRepresentation {
        #[command(flatten)]
        source: OptionalSource,
        /// Flip the sign of the Ψ2 term to confirm the check can fail.
        #[arg(long, hide = true)]
        tamper_psi2: bool,
    },
    /// Evaluate E_ρ(−x).
    MlEval {
        rho: f64,
        #[arg(required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
    },
    /// Print convolution quadrature weights ω_0..ω_{N−1}.
    CqWeights { rho: f64, dt: f64, n: usize },
    /// Sample one noise path.
    SamplePath(SampleArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConfigSource {
    /// Study config file (JSON).
    config: Option<PathBuf>,
    /// Name of a shipped preset.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalSource {
    /// Study config file; its ladder levels replace the default sweep.
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquationArg {
    Heat,
    Volterra,
    Wave,
}

#[derive(Args)]
struct ConditionArgs {
    #[arg(long, value_enum)]
    equation: EquationArg,
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    /// Kernel order, used by the Volterra equation only.
    #[arg(long, default_value_t = 1.5)]
    rho: f64,
    /// Covariance decay s in q_k = amplitude · λ_k^{−s}.
    #[arg(long)]
    decay: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Truncation K.
    #[arg(long)]
    modes: usize,
}

#[derive(Args)]
struct SampleArgs {
    /// variance_gamma, compound_poisson, gamma_subordinated_wiener, or a JSON law object.
    #[arg(long)]
    law: String,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long)]
    modes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Increment cells for laws without jump times.
    #[arg(long, default_value_t = 1)]
    steps: usize,
}

/// Failure of a subcommand, already mapped to its exit code.
enum Failure {
    Config(String),
    Numerical,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Study { source, out_dir } => study(&source, out_dir),
        Command::CheckCondition(args) => check_condition(&args),
        Command::VerifyRepresentation { source, tamper_psi2 } => verify_representation(&source, tamper_psi2),
        Command::MlEval { rho, x } => ml_eval(rho, &x),
        Command::CqWeights { rho, dt, n } => print_cq_weights(rho, dt, n),
        Command::SamplePath(args) => sample_path(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical) => ExitCode::from(2),
    }
}

fn load_config(path: Option<&PathBuf>, preset: Option<&str>) -> Result<StudyConfig, Failure> {
    match (path, preset) {
        (_, Some(name)) => Ok(presets::load(name)?),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(StudyConfig::from_json(&text)?)
        }
        (None, None) => Err(Failure::Config("a config file or --preset is required".into())),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn study(source: &ConfigSource, out_dir: Option<PathBuf>) -> Outcome {
    let config = load_config(source.config.as_ref(), source.preset.as_deref())?;
    let dir =
        out_dir.or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let result = run_study(&config)?;
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let file = config.output.clone().unwrap_or_else(|| format!("{}.csv", config.name));
    let path = dir.join(file);
    emit_csv(&result.table, &path)?;

    let slope =
        |f: Option<levy_spde::study::RateFit>| f.map(|f| format_float(f.slope)).unwrap_or_else(|| "none".into());
    println!("study: {}", config.name);
    println!("csv: {}", path.display());
    println!("levels: {}", result.table.rows.len());
    println!(
        "weak slope: {} expected {} (at least expected - {}) {}",
        slope(result.weak_fit),
        format_float(result.expected_weak),
        SLOPE_TOLERANCE,
        verdict(result.weak_passes())
    );
    println!(
        "strong slope: {} expected {} (within {}) {}",
        slope(result.strong_fit),
        format_float(result.expected_strong),
        SLOPE_TOLERANCE,
        verdict(result.strong_passes())
    );
    println!("decay: {}", format_float(result.decay));
    println!("tail ratio: {} within policy: {}", format_float(result.tail_ratio), result.tail_within_policy());
    if !result.expected.beta_in_range {
        println!("note: beta {} lies outside the range the expected rates are stated for", format_float(config.beta));
    }
    println!("result: {}", verdict(result.passes()));
    if result.passes() {
        Ok(())
    } else {
        Err(Failure::Numerical)
    }
}

fn check_condition(args: &ConditionArgs) -> Outcome {
    let kind = match args.equation {
        EquationArg::Heat => EquationKind::Heat,
        EquationArg::Volterra => EquationKind::Volterra { rho: args.rho },
        EquationArg::Wave => EquationKind::Wave { scheme: RationalScheme::CrankNicolson },
    };
    kind.validate()?;
    let spec = DirichletSpectrum::unit(args.modes)?;
    let cov = CovarianceSpec::power_law(args.amplitude, args.decay)?;
    let hs = hs_condition(&spec, &cov, args.beta, kind.rho())?;
    let unit = hs_condition(&spec, &cov, args.beta, 1.0)?;
    let law = LevyLaw::VarianceGamma { variance_rate: 0.5 };
    let weqii = weqii_for_law(&spec, &cov, &law, args.beta, args.modes)?;
    let gap = (weqii - unit.partial_sum).abs();
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_else(|| "none".into());
    println!("equation: {}", kind.name());
    println!("rho: {}", format_float(kind.rho()));
    println!("modes: {}", args.modes);
    println!("exponent: {}", opt(hs.exponent));
    println!("convergence: {}", if hs.converges() { "converges" } else { "diverges" });
    println!("hs_partial_sum: {}", format_float(hs.partial_sum));
    println!("hs_norm: {}", format_float(hs.norm()));
    println!("tail_bound: {}", opt(hs.tail_bound));
    println!("hs_partial_sum_rho1: {}", format_float(unit.partial_sum));
    println!("weqii: {}", format_float(weqii));
    println!("weqii_minus_hs_rho1: {}", format_float(gap));
    println!("weqii_equals_hs_rho1: {}", gap <= 4.0 * f64::EPSILON * unit.partial_sum.abs());
    Ok(())
}

fn verify_representation(source: &OptionalSource, tamper: bool) -> Outcome {
    let cases: Vec<SweepCase> = if source.config.is_some() || source.preset.is_some() {
        let config = load_config(source.config.as_ref(), source.preset.as_deref())?;
        level_setups(&config)?
            .into_iter()
            .enumerate()
            .map(|(level, setup)| SweepCase { label: format!("{}/level{level}", config.name), setup })
            .collect()
    } else {
        representation_sweep()
    };
    let sign = if tamper { Psi2Sign::Flipped } else { Psi2Sign::Standard };
    let outcomes = run_sweep(&cases, sign)?;
    println!("case,weak_quad,representation,discrepancy");
    for (case, o) in cases.iter().zip(&outcomes) {
        println!(
            "{},{},{},{}",
            case.label,
            format_float(o.weak_error_quadratic),
            format_float(o.representation_value),
            format_float(o.discrepancy)
        );
    }
    let max = outcomes.iter().map(|o| o.discrepancy).fold(0.0, f64::max);
    let pass = max <= REPRESENTATION_TOLERANCE;
    println!(
        "max discrepancy: {} tolerance {} {}",
        format_float(max),
        format_float(REPRESENTATION_TOLERANCE),
        verdict(pass)
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::Numerical)
    }
}

fn ml_eval(rho: f64, xs: &[f64]) -> Outcome {
    let values = xs.iter().map(|&x| mittag_leffler_neg(rho, x)).collect::<Result<Vec<_>, _>>()?;
    println!("x,value");
    for (x, v) in xs.iter().zip(values) {
        println!("{},{}", format_float(*x), format_float(v));
    }
    Ok(())
}

fn print_cq_weights(rho: f64, dt: f64, n: usize) -> Outcome {
    let w = cq_weights(rho, dt, n)?;
    println!("k,weight");
    for (k, v) in w.weights().iter().enumerate() {
        println!("{k},{}", format_float(*v));
    }
    Ok(())
}

fn parse_law(text: &str) -> Result<LevyLaw, Failure> {
    let law = match text {
        "variance_gamma" => LevyLaw::VarianceGamma { variance_rate: 0.5 },
        "compound_poisson" => LevyLaw::compound_poisson(4.0),
        "gamma_subordinated_wiener" => LevyLaw::GammaSubordinatedWiener { shape_rate: 1.0, scale: 1.0 },
        json => serde_json::from_str(json).map_err(|e| Failure::Config(format!("law {json}: {e}")))?,
    };
    law.validate()?;
    Ok(law)
}

fn sample_path(args: &SampleArgs) -> Outcome {
    let law = parse_law(&args.law)?;
    let streams = RngStreams::new(args.seed);
    println!("# law: {}", serde_json::to_string(&law).expect("laws serialize"));
    println!("# seed: {}", args.seed);
    if matches!(law, LevyLaw::CompoundPoisson { .. }) {
        let path = sample_jump_path(&law, args.horizon, args.modes, &streams, 0)?;
        println!("mode,time,size");
        for k in 0..args.modes {
            for j in path.jumps(k) {
                println!("{},{},{}", k + 1, format_float(j.time), format_float(j.size));
            }
        }
    } else {
        let grid = TimeGrid::uniform(args.horizon, args.steps)?;
        let points = grid.points();
        println!("mode,start,end,increment");
        for k in 0..args.modes {
            let mut rng = streams.stream(0, k as u64);
            for w in points.windows(2) {
                let dl = law.sample_increment(w[1] - w[0], &mut rng);
                println!("{},{},{},{}", k + 1, format_float(w[0]), format_float(w[1]), format_float(dl));
            }
        }
    }
    Ok(())
}
