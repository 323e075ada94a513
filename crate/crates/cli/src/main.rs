//! `epr`: run squeezed-light EPR simulations from the command line.
//!
//! Exit codes: 0 success, 1 invalid input or config, 2 unphysical state,
//! 3 criterion verification failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epr_core::experiments::EprRun;
use epr_core::io::{self, ShotSidecar, StateFile};
use epr_core::{
    CriterionReport, EprExperimentConfig, Error, GaussianState, ModePair, run_dice_experiment,
    sweep_squeeze, validate_physicality_compensated,
};

use crate::config::{ConventionArg, OutputFormat, RunConfig, parse_r_values};
use crate::output::Outputs;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn unphysical(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn criterion(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidState(_) => Self::unphysical(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "epr",
    version,
    about = "Gaussian simulation of squeezed-light EPR entanglement"
)]
struct Cli {
    /// Print extra diagnostics to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shots per ensemble.
    #[arg(long)]
    shots: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Squeezed inputs → balanced splitter → homodyne sampling → criteria.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Squeeze factor for both inputs.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        r_a: Option<f64>,
        #[arg(long)]
        r_b: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        half_width: Option<f64>,
        /// Also write the raw shot records as CSV with JSON sidecars.
        #[arg(long)]
        write_shots: bool,
    },
    /// Criteria over a grid of squeeze factors (`start:stop:step` or `a,b,c`).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "r")]
        r_values: Option<String>,
    },
    /// Dice with perfectly anticorrelated faces.
    Dice {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of throws.
        #[arg(long, short)]
        n: Option<usize>,
    },
    /// Check a state file against the uncertainty bound.
    Validate {
        /// JSON state description.
        state: PathBuf,
        #[arg(long, value_enum)]
        convention: Option<ConventionArg>,
        /// Exit 3 unless the state violates the inseparability bound.
        #[arg(long)]
        expect_entangled: bool,
    },
}

struct Resolved {
    file: RunConfig,
    seed: u64,
    out: PathBuf,
    format: OutputFormat,
    convention: epr_core::SignConvention,
    shots: Option<usize>,
}

fn resolve(common: &CommonArgs) -> Result<Resolved, CliError> {
    let file = RunConfig::load(common.config.as_deref())?;
    Ok(Resolved {
        seed: common.seed.or(file.seed).unwrap_or(0),
        out: common
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| "out".into()),
        format: common.format.or(file.format).unwrap_or_default(),
        convention: common
            .convention
            .or(file.convention)
            .map(Into::into)
            .unwrap_or_default(),
        shots: common.shots.or(file.shots),
        file,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "nan".into())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    common: &CommonArgs,
    r: Option<f64>,
    r_a: Option<f64>,
    r_b: Option<f64>,
    bins: Option<usize>,
    half_width: Option<f64>,
    write_shots: bool,
    verbose: u8,
) -> Result<(), CliError> {
    let res = resolve(common)?;
    let f = &res.file;
    let both = r.or(f.r);
    let cfg = EprExperimentConfig {
        r_a: r_a.or(both).or(f.r_a).unwrap_or(1.0),
        r_b: r_b.or(both).or(f.r_b).unwrap_or(1.0),
        shots: res.shots.unwrap_or(100_000),
        seed: res.seed,
        bins: bins.or(f.bins).unwrap_or(100),
        half_width: half_width.or(f.half_width),
        convention: res.convention,
    };
    cfg.validate()?;
    let run = EprRun::execute(&cfg)?;
    let rep = &run.report;

    let mut outs = Outputs::new(&res.out);
    outs.add(
        "state.json",
        io::to_json_string(&StateFile::from_state(&run.state))?,
    );
    if res.format.json() {
        outs.add("report.json", io::to_json_string(rep)?);
    }
    if res.format.csv() {
        let names = ["x_a", "y_a", "x_b", "y_b"];
        for (m, name) in rep.marginals.iter().zip(names) {
            let mut buf = Vec::new();
            io::write_histogram_csv(&m.histogram, &mut buf)?;
            outs.add(format!("hist_{name}.csv"), buf);
        }
        for (res_sum, name) in rep.residuals.iter().zip(["x_b", "y_b"]) {
            let mut buf = Vec::new();
            io::write_histogram_csv(&res_sum.histogram, &mut buf)?;
            outs.add(format!("residual_{name}.csv"), buf);
        }
    }
    if write_shots {
        for (batch, name) in [(&run.x_batch, "shots_x"), (&run.y_batch, "shots_y")] {
            let mut buf = Vec::new();
            io::write_shots_csv(batch, &mut buf)?;
            outs.add(format!("{name}.csv"), buf);
            outs.add(
                format!("{name}.json"),
                io::to_json_string(&ShotSidecar::for_batch(batch))?,
            );
        }
    }
    outs.commit(verbose)?;

    println!("duan_analytic={}", rep.analytic.duan.value);
    println!("duan_sampled={}", rep.sampled.duan.value);
    println!("duan_se={}", fmt_opt(rep.sampled.duan.std_err));
    println!("duan_violated={}", rep.analytic.duan_violated);
    println!("reid_analytic={}", rep.analytic.reid_a_to_b.value);
    println!(
        "residual_variance_x_b={}",
        rep.residuals[0].sampled_variance.value
    );
    println!("consistent={}", rep.consistent);
    Ok(())
}

fn cmd_sweep(common: &CommonArgs, r_values: Option<&str>, verbose: u8) -> Result<(), CliError> {
    let res = resolve(common)?;
    let spec = r_values
        .or(res.file.r_values.as_deref())
        .ok_or_else(|| CliError::input("sweep needs --r start:stop:step or a list"))?;
    let values = parse_r_values(spec)?;
    let template = EprExperimentConfig {
        shots: res.shots.unwrap_or(100_000),
        seed: res.seed,
        convention: res.convention,
        ..EprExperimentConfig::default()
    };
    let rows = sweep_squeeze(&values, &template)?;

    let mut outs = Outputs::new(&res.out);
    if res.format.csv() {
        let mut buf = Vec::new();
        io::write_sweep_csv(&rows, &mut buf)?;
        outs.add("sweep.csv", buf);
    }
    if res.format.json() {
        #[derive(serde::Serialize)]
        struct SweepDoc<'a> {
            schema_version: &'a str,
            shots: usize,
            seed: u64,
            rows: &'a [epr_core::SweepRow],
        }
        let doc = SweepDoc {
            schema_version: epr_core::experiments::SCHEMA_VERSION,
            shots: template.shots,
            seed: template.seed,
            rows: &rows,
        };
        outs.add("sweep.json", io::to_json_string(&doc)?);
    }
    outs.commit(verbose)?;

    println!("rows={}", rows.len());
    for row in &rows {
        println!(
            "r={} duan_analytic={} duan_sampled={} duan_se={} reid={} heisenberg={}",
            row.r,
            row.duan_analytic,
            row.duan_sampled,
            fmt_opt(row.duan_se),
            row.reid,
            row.heisenberg
        );
    }
    Ok(())
}

fn cmd_dice(common: &CommonArgs, n: Option<usize>, verbose: u8) -> Result<(), CliError> {
    let res = resolve(common)?;
    let n = n.or(res.file.throws).or(res.shots).unwrap_or(600_000);
    if n == 0 {
        return Err(CliError::input("number of throws must be at least 1"));
    }
    let rep = run_dice_experiment(n, res.seed)?;
    let mut outs = Outputs::new(&res.out);
    outs.add("dice.json", io::to_json_string(&rep)?);
    outs.commit(verbose)?;

    println!("throws={}", rep.n_throws);
    println!("prediction_accuracy={}", rep.prediction_accuracy);
    println!("constraint_violations={}", rep.constraint_violations);
    println!("top_entropy_bits={}", rep.top_entropy_bits);
    println!("conditional_entropy_bits={}", rep.conditional_entropy_bits);
    println!("uniformity_p_value={}", rep.chi_square_p_value);
    println!("uniform={}", rep.uniform);
    Ok(())
}

fn cmd_validate(
    path: &std::path::Path,
    convention: Option<ConventionArg>,
    expect_entangled: bool,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read state file {}: {e}", path.display())))?;
    let file = StateFile::from_json(&text)
        .map_err(|e| CliError::input(format!("malformed state file {}: {e}", path.display())))?;
    let (mean, cov) = file
        .moments()
        .map_err(|e| CliError::input(format!("malformed state file {}: {e}", path.display())))?;
    let cov_lo = file
        .correction()
        .map_err(|e| CliError::input(format!("malformed state file {}: {e}", path.display())))?;
    let report = validate_physicality_compensated(&mean, &cov, &cov_lo)
        .map_err(|e| CliError::input(format!("malformed state file {}: {e}", path.display())))?;

    let eigen: Vec<String> = report
        .symplectic_eigenvalues
        .iter()
        .map(f64::to_string)
        .collect();
    println!("n_modes={}", file.n_modes);
    println!("symplectic_eigenvalues={}", eigen.join(","));
    println!("min_symplectic_eigenvalue={}", report.min_eigenvalue);
    println!("physical={}", report.physical);
    if !report.physical {
        return Err(CliError::unphysical(format!(
            "state violates the uncertainty bound (min symplectic eigenvalue {})",
            report.min_eigenvalue
        )));
    }
    let state = GaussianState::new_compensated(mean, cov, cov_lo)?;
    for m in 0..state.n_modes() {
        println!(
            "heisenberg_{m}={}",
            epr_core::heisenberg_product(&state, m)?
        );
    }
    let convention = convention.map(Into::into).unwrap_or_default();
    if state.n_modes() >= 2 {
        let crit = CriterionReport::analytic(&state, ModePair::default(), convention)?;
        println!("duan={}", crit.duan.value);
        println!("duan_violated={}", crit.duan_violated);
        println!("reid_a_to_b={}", crit.reid_a_to_b.value);
        println!("reid_b_to_a={}", crit.reid_b_to_a.value);
        if expect_entangled && !crit.duan_violated {
            return Err(CliError::criterion(format!(
                "inseparability product {} is not below 1",
                crit.duan.value
            )));
        }
    } else if expect_entangled {
        return Err(CliError::criterion("entanglement needs at least two modes"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are invalid input; --help and --version succeed
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    let verbose = cli.verbose;
    let result = match &cli.command {
        Command::Run {
            common,
            r,
            r_a,
            r_b,
            bins,
            half_width,
            write_shots,
        } => cmd_run(
            common,
            *r,
            *r_a,
            *r_b,
            *bins,
            *half_width,
            *write_shots,
            verbose,
        ),
        Command::Sweep { common, r_values } => cmd_sweep(common, r_values.as_deref(), verbose),
        Command::Dice { common, n } => cmd_dice(common, *n, verbose),
        Command::Validate {
            state,
            convention,
            expect_entangled,
        } => cmd_validate(state, *convention, *expect_entangled),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
