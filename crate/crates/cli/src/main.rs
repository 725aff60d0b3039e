use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ris_opt_core::baselines::{ao_solve, dinkelbach_solve};
use ris_opt_core::constrained::{aggregate_subarrays, solve_per_element_caps};
use ris_opt_core::experiment::{
    emit_ray_profile, rows_to_csv, run_benchmark, sweep_snr, AvgDomain, BenchmarkConfig, RayParameters,
    AO_MAX_ITERATIONS, AO_TOLERANCE, DINKELBACH_TOLERANCE,
};
use ris_opt_core::scenario_file::{parse_scenario, LoadedScenario};
use ris_opt_core::solver::solve;
use ris_opt_core::{normalize, reduce, CapVector, Error, RisConfiguration};

const EXIT_INVALID: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ris-opt",
    version,
    about = "Active RIS configuration for a single-antenna link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one scenario file and print a JSON report.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Optimal)]
        algo: Algo,
        /// Replace the total power budget by the file's per-element caps.
        #[arg(long)]
        caps: bool,
        /// Share one amplitude per group listed in the file's `subarrays`.
        #[arg(long)]
        subarrays: bool,
    },
    /// Monte Carlo table over every operating point of the config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        avg_domain: Option<Domain>,
    },
    /// Monte Carlo curve over a `snr1_db` range.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        avg_domain: Option<Domain>,
    },
    /// Single-element objective along the amplitude ray.
    Fig1 {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        h_d: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha1: f64,
        #[arg(long, default_value_t = 1.0)]
        beta1: f64,
        #[arg(long, default_value_t = 10.0)]
        p_max: f64,
        #[arg(long, default_value_t = 1001)]
        steps: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Optimal,
    Ao,
    Dinkelbach,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Linear,
    Db,
}

impl From<Domain> for AvgDomain {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Linear => AvgDomain::Linear,
            Domain::Db => AvgDomain::Db,
        }
    }
}

#[derive(Serialize)]
struct SolveOutput {
    algorithm: &'static str,
    regime: Option<String>,
    /// Amplitudes in unit-noise form.
    amplitudes: Vec<f64>,
    physical_amplitudes: Vec<f64>,
    phases: Vec<f64>,
    objective: f64,
    receive_snr: f64,
    eta: Option<f64>,
    iterations: usize,
    residual: Option<f64>,
    converged: bool,
    ris_power: f64,
}

/// Amplitudes and diagnostics before phases and physical units are attached.
struct Solved {
    regime: Option<String>,
    amplitudes: Vec<f64>,
    objective: f64,
    eta: Option<f64>,
    iterations: usize,
    residual: Option<f64>,
    converged: bool,
}

impl Solved {
    fn silent(n: usize, objective: f64, regime: &str) -> Self {
        Self {
            regime: Some(regime.to_string()),
            amplitudes: vec![0.0; n],
            objective,
            eta: None,
            iterations: 0,
            residual: None,
            converged: true,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<Error>() {
                Some(Error::Convergence { .. }) => EXIT_CONVERGENCE,
                _ => EXIT_INVALID,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve {
            scenario,
            algo,
            caps,
            subarrays,
        } => {
            let text = read(&scenario)?;
            let loaded = parse_scenario(&text)?;
            let report = solve_scenario(&loaded, algo, caps, subarrays)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Bench {
            config,
            out,
            avg_domain,
        } => {
            let (config, out) = load_config(&config, out, avg_domain)?;
            write(&out, &rows_to_csv(&run_benchmark(&config)?))?;
        }
        Command::Sweep {
            config,
            out,
            avg_domain,
        } => {
            let (config, out) = load_config(&config, out, avg_domain)?;
            write(&out, &rows_to_csv(&sweep_snr(&config)?))?;
        }
        Command::Fig1 {
            out,
            h_d,
            alpha1,
            beta1,
            p_max,
            steps,
        } => {
            let params = RayParameters {
                h_d,
                alpha1,
                beta1,
                p_max,
                steps,
            };
            write(&out, &emit_ray_profile(&params)?)?;
        }
    }
    Ok(())
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_config(
    path: &Path,
    out: Option<PathBuf>,
    avg_domain: Option<Domain>,
) -> anyhow::Result<(BenchmarkConfig, PathBuf)> {
    let mut config = BenchmarkConfig::from_json(&read(path)?)?;
    if let Some(d) = avg_domain {
        config.avg_domain = d.into();
    }
    let out = match (out, &config.output) {
        (Some(p), _) => p,
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => bail!(Error::InvalidInput("no --out given and config has no output".into())),
    };
    Ok((config, out))
}

fn solve_scenario(
    loaded: &LoadedScenario,
    algo: Algo,
    use_caps: bool,
    use_subarrays: bool,
) -> anyhow::Result<SolveOutput> {
    let scenario = &loaded.scenario;
    let norm = normalize(scenario);
    let n = norm.n();
    if use_caps && use_subarrays {
        bail!(Error::InvalidInput("--caps and --subarrays cannot be combined".into()));
    }
    if use_caps && algo != Algo::Optimal {
        bail!(Error::InvalidInput(
            "--caps is only available with --algo optimal".into()
        ));
    }

    let solved = match reduce(&norm) {
        // the RIS has no power: it stays silent
        Err(Error::DegenerateBudget) if !use_caps => Solved::silent(n, norm.h_d().norm_sqr(), "DegenerateBudget"),
        Err(Error::DegenerateBudget) => bail!(Error::InvalidInput("caps need snr2 > 0".into())),
        Err(e) => return Err(e.into()),
        Ok(problem) if use_caps => {
            let Some(caps) = &loaded.caps else {
                bail!(Error::InvalidInput("--caps given but the scenario has no caps".into()));
            };
            // caps are physical amplitudes; the problem works in unit-noise form
            let scale = (scenario.sigma1_sq() / scenario.sigma2_sq()).sqrt();
            let caps = CapVector::new(caps.caps().iter().map(|c| c * scale).collect())?;
            match solve_per_element_caps(&problem, &caps) {
                Ok(sol) => Solved {
                    regime: Some("PerElementCaps".into()),
                    amplitudes: sol.amplitudes,
                    objective: sol.objective,
                    eta: None,
                    iterations: 0,
                    residual: None,
                    converged: true,
                },
                Err(Error::NoSignal) => Solved::silent(n, 0.0, "NoSignal"),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(problem) => {
            let partition = if use_subarrays {
                let Some(p) = &loaded.subarrays else {
                    bail!(Error::InvalidInput(
                        "--subarrays given but the scenario has none".into()
                    ));
                };
                Some(p)
            } else {
                None
            };
            let working = match partition {
                Some(p) => aggregate_subarrays(&problem, p)?,
                None => problem.clone(),
            };
            let mut solved = match solve_reduced(&working, algo) {
                Err(Error::NoSignal) => Solved::silent(working.n(), working.h_d() * working.h_d(), "NoSignal"),
                other => other?,
            };
            if let Some(p) = partition {
                solved.amplitudes = p.expand(&solved.amplitudes);
            }
            solved
        }
    };

    let normalized = RisConfiguration::aligned(&norm, solved.amplitudes.clone())?;
    let physical = scenario.to_physical(&normalized);
    Ok(SolveOutput {
        algorithm: match algo {
            Algo::Optimal => "optimal",
            Algo::Ao => "ao",
            Algo::Dinkelbach => "dinkelbach",
        },
        regime: solved.regime,
        receive_snr: scenario.receive_snr(&physical)?,
        ris_power: scenario.ris_power(&physical)?,
        amplitudes: solved.amplitudes,
        physical_amplitudes: physical.amplitudes().to_vec(),
        phases: physical.phases().to_vec(),
        objective: solved.objective,
        eta: solved.eta,
        iterations: solved.iterations,
        residual: solved.residual,
        converged: solved.converged,
    })
}

fn solve_reduced(problem: &ris_opt_core::AmplitudeProblem, algo: Algo) -> Result<Solved, Error> {
    Ok(match algo {
        Algo::Optimal => {
            let r = solve(problem)?;
            Solved {
                regime: Some(format!("{:?}", r.regime)),
                amplitudes: r.amplitudes,
                objective: r.objective,
                eta: r.eta,
                iterations: r.newton_iterations,
                residual: Some(r.residual),
                converged: true,
            }
        }
        Algo::Ao => {
            let out = ao_solve(problem, AO_MAX_ITERATIONS, AO_TOLERANCE)?;
            Solved {
                regime: None,
                amplitudes: out.best_p,
                objective: out.objective,
                eta: None,
                iterations: out.iterations,
                residual: None,
                converged: out.converged,
            }
        }
        Algo::Dinkelbach => {
            let out = dinkelbach_solve(problem, DINKELBACH_TOLERANCE)?;
            Solved {
                regime: None,
                amplitudes: out.state.p,
                objective: out.objective,
                eta: None,
                iterations: out.outer_iterations,
                residual: Some(out.state.gap),
                converged: true,
            }
        }
    })
}
