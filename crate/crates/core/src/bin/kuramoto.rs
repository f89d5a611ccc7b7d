use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kuramoto_core::analysis::{
    classify_stability, coupling_bounds, invariance_certificate, solve_equilibrium,
    CertificateOptions, DEFAULT_TOL_ZERO,
};
use kuramoto_core::dynamics::{simulate, vector_field_grid, GridSpec, PlanarReduction};
use kuramoto_core::experiment::{run_experiment, ExperimentId, ExperimentSettings};
use kuramoto_core::io::{self, AnalysisReport};
use kuramoto_core::two_oscillator::{
    direction_cone_estimate, nontangency_planar, region_g_boundary, PlanarParams, Side,
    DEFAULT_CONE_EPS,
};
use kuramoto_core::{Error, OscillatorNetwork, Result};

/// Kuramoto network simulation and synchronization analysis.
///
/// Exit status: 0 on success, 2 when a certificate or verification fails,
/// 1 on any error.
#[derive(Parser, Debug)]
#[command(name = "kuramoto", version)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Network definition file (JSON).
    #[arg(long, global = true)]
    network: Option<PathBuf>,

    /// Simulated time horizon in seconds.
    #[arg(long = "t-end", global = true, default_value_t = 50.0)]
    t_end: f64,

    /// Fixed RK4 step in seconds.
    #[arg(long, global = true, default_value_t = 0.01)]
    dt: f64,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory.
    #[arg(long = "out", global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the network and write trajectory.csv.
    Simulate {
        /// Comma-separated initial phases; drawn uniformly from the seed otherwise.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta0: Option<Vec<f64>>,
    },
    /// Equilibrium, linear stability, gain bounds and invariance certificate.
    Analyze {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Half-width margin δ of the attracting-set condition.
        #[arg(long, default_value_t = FRAC_PI_2)]
        delta: f64,
    },
    /// Coupling-gain bounds only.
    Bounds {
        #[arg(long, default_value_t = FRAC_PI_2)]
        delta: f64,
    },
    /// Monte-Carlo invariance certificate for the phase-cohesive set.
    Invariance {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
    },
    /// Planar vector field (N = 2 or 3); for N = 2 also the invariant-region
    /// boundary and a direction-cone sweep.
    Portrait {
        /// Grid points per axis.
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
    /// Reproduce a reference experiment.
    Experiment {
        #[arg(value_parser = parse_experiment)]
        id: ExperimentId,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
}

fn parse_experiment(s: &str) -> std::result::Result<ExperimentId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Outcome {
    Ok,
    CertificateFailed,
}

fn load_network(common: &Common) -> Result<OscillatorNetwork> {
    let path = common
        .network
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--network <path> is required".into()))?;
    io::parse_network(path)
}

fn validate_timing(common: &Common) -> Result<()> {
    if !(common.dt > 0.0 && common.t_end >= common.dt) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t-end >= dt (got dt = {}, t-end = {})",
            common.dt, common.t_end
        )));
    }
    Ok(())
}

fn announce(path: &Path) {
    eprintln!("wrote {}", path.display());
}

fn cmd_simulate(common: &Common, theta0: Option<Vec<f64>>) -> Result<Outcome> {
    let net = load_network(common)?;
    let theta0 = match theta0 {
        Some(t) => t,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            (0..net.n()).map(|_| rng.gen_range(-PI..PI)).collect()
        }
    };
    let traj = simulate(&net, &theta0, common.t_end, common.dt)?;
    announce(&io::write_output(&common.out, "trajectory.csv", &io::trajectory_csv(&traj))?);
    Ok(Outcome::Ok)
}

fn cmd_analyze(common: &Common, samples: usize, delta: f64) -> Result<Outcome> {
    let net = load_network(common)?;
    let bounds = coupling_bounds(&net, delta)?;
    let mut notes = Vec::new();
    let stability = match solve_equilibrium(&net, &vec![0.0; net.n()]) {
        Ok(eq) => Some(classify_stability(&net, &eq.x, DEFAULT_TOL_ZERO)?),
        Err(e) => {
            notes.push(format!("equilibrium search failed: {e}"));
            None
        }
    };
    let cert = invariance_certificate(
        &net,
        &CertificateOptions {
            n_samples: samples,
            horizon: common.t_end,
            dt: common.dt,
            seed: common.seed,
            ..Default::default()
        },
    )?;
    let mut report = AnalysisReport::new(&net, stability.as_ref(), &bounds, Some(&cert));
    if !cert.bounds_met {
        notes.push("bounds unmet: some gain is below its sufficient per-edge bound".into());
    }
    report.notes = notes;
    announce(&io::write_output(&common.out, "report.json", &io::to_json(&report))?);
    Ok(if cert.passed {
        Outcome::Ok
    } else {
        Outcome::CertificateFailed
    })
}

fn cmd_bounds(common: &Common, delta: f64) -> Result<Outcome> {
    let net = load_network(common)?;
    let bounds = coupling_bounds(&net, delta)?;
    let json = io::to_json(&io::BoundsSection::from(&bounds));
    print!("{json}");
    announce(&io::write_output(&common.out, "bounds.json", &json)?);
    Ok(Outcome::Ok)
}

fn cmd_invariance(common: &Common, samples: usize, margin: f64) -> Result<Outcome> {
    let net = load_network(common)?;
    let cert = invariance_certificate(
        &net,
        &CertificateOptions {
            n_samples: samples,
            horizon: common.t_end,
            dt: common.dt,
            margin,
            seed: common.seed,
        },
    )?;
    announce(&io::write_output(
        &common.out,
        "invariance.json",
        &io::to_json(&io::InvarianceSection::from(&cert)),
    )?);
    eprintln!(
        "{} of {} trajectories stayed in the cohesive set{}",
        cert.n_passed,
        cert.n_samples,
        if cert.bounds_met { "" } else { " (bounds unmet)" }
    );
    Ok(if cert.passed {
        Outcome::Ok
    } else {
        Outcome::CertificateFailed
    })
}

fn cmd_portrait(common: &Common, grid: usize) -> Result<Outcome> {
    let net = load_network(common)?;
    match net.n() {
        2 => {
            let k = net.coupling_gains()[0];
            let dw = net.natural_frequencies()[0] - net.natural_frequencies()[1];
            let p = PlanarParams::new(k, dw)?;
            let spec = GridSpec {
                x1: (-PI, PI),
                x2: (-2.0 * k, 2.0 * k),
                resolution: grid,
            };
            let field = vector_field_grid(&net, PlanarReduction::PhaseVelocity, &spec)?;
            announce(&io::write_output(&common.out, "field.csv", &io::field_csv(&field))?);

            let inner: Vec<f64> = (1..grid.max(2))
                .map(|i| -FRAC_PI_2 + PI * i as f64 / grid.max(2) as f64)
                .collect();
            let rows = inner
                .iter()
                .map(|&x| {
                    Ok((
                        x,
                        region_g_boundary(x, &p, Side::Upper)?,
                        region_g_boundary(x, &p, Side::Lower)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            announce(&io::write_output(&common.out, "boundary.csv", &io::boundary_csv(&rows))?);

            let eps = DEFAULT_CONE_EPS;
            let cones = inner
                .iter()
                .filter(|a| a.abs() + eps < FRAC_PI_2)
                .map(|&a| {
                    Ok((
                        a,
                        direction_cone_estimate(a, eps, &p)?,
                        nontangency_planar(a, eps, &p)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            announce(&io::write_output(&common.out, "cones.csv", &io::cone_csv(&cones))?);
        }
        _ => {
            let spec = GridSpec {
                x1: (-PI, PI),
                x2: (-PI, PI),
                resolution: grid,
            };
            let field = vector_field_grid(&net, PlanarReduction::EdgePair(0, 1), &spec)?;
            announce(&io::write_output(&common.out, "field.csv", &io::field_csv(&field))?);
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_experiment(common: &Common, id: ExperimentId, grid: usize) -> Result<Outcome> {
    let settings = ExperimentSettings {
        t_end: common.t_end.max(100.0),
        dt: common.dt,
        grid,
    };
    let out = run_experiment(id, &settings)?;
    for (name, contents) in &out.files {
        announce(&io::write_output(&common.out, name, contents)?);
    }
    announce(&io::write_output(&common.out, "report.json", &io::to_json(&out.report))?);
    if out.passed() {
        eprintln!("{id}: all checks passed");
        Ok(Outcome::Ok)
    } else {
        eprint!("{id}: verification failed\n{}", out.diff_report());
        Ok(Outcome::CertificateFailed)
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    validate_timing(&cli.common)?;
    let common = &cli.common;
    match cli.command {
        Command::Simulate { theta0 } => cmd_simulate(common, theta0),
        Command::Analyze { samples, delta } => cmd_analyze(common, samples, delta),
        Command::Bounds { delta } => cmd_bounds(common, delta),
        Command::Invariance { samples, margin } => cmd_invariance(common, samples, margin),
        Command::Portrait { grid } => cmd_portrait(common, grid),
        Command::Experiment { id, grid } => cmd_experiment(common, id, grid),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CertificateFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
