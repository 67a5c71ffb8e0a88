use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use matterwave_chaos::config::RunConfig;
use matterwave_chaos::control;
use matterwave_chaos::dynamics::{self, PhaseState};
use matterwave_chaos::error::{Error, Result};
use matterwave_chaos::melnikov::{self, ProfileSummary};
use matterwave_chaos::montecarlo;
use matterwave_chaos::output::{num, opt, write_json, CsvOut};
use matterwave_chaos::params::WaveRatio;
use matterwave_chaos::soliton::{self, FirstOrder, FirstOrderOptions, SolitonConfig};

/// Melnikov analysis and chaos statistics for a condensate in a moving
/// optical superlattice.
#[derive(Parser)]
#[command(name = "mwchaos", version)]
struct Cli {
    /// TOML parameter file; the built-in reference lattice is used when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override a config entry, e.g. `--set lattice.V2=0.08`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, env = "MWCHAOS_THREADS", global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, short, default_value = ".", global = true)]
    out: PathBuf,

    /// Log progress to stderr (-v info, -vv debug).
    #[arg(long, short, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample M(c0) over one period and count its zeros.
    Melnikov {
        /// Samples per period.
        #[arg(long, default_value_t = melnikov::DEFAULT_RESOLUTION)]
        c0_grid: usize,
    },
    /// Zero counts and A/B labels over a (k, V2) grid.
    RegionMap {
        /// k interval, `lo:hi`.
        #[arg(long, default_value = "0.5:3.0", value_parser = parse_range, allow_hyphen_values = true)]
        k_range: (f64, f64),
        /// V2 interval, `lo:hi`.
        #[arg(long, default_value = "0.0:0.5", value_parser = parse_range, allow_hyphen_values = true)]
        v2_range: (f64, f64),
        /// Points per axis, `N` or `NKxNV`.
        #[arg(long, default_value = "41", value_parser = parse_grid)]
        grid: (usize, usize),
        /// c0 samples per period in each cell.
        #[arg(long, default_value_t = 1024)]
        resolution: usize,
    },
    /// Stroboscopic section and Lyapunov classification of one trajectory.
    Poincare {
        /// Initial R.
        #[arg(long = "R0", alias = "r0", allow_negative_numbers = true)]
        r0: f64,
        /// Initial R'.
        #[arg(long = "Rp0", alias = "rp0", allow_negative_numbers = true)]
        rp0: f64,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Monte Carlo chaos probability over random initial conditions.
    Probability {
        /// Trials; overrides `montecarlo.trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed; overrides `montecarlo.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        iter: IterArgs,
        /// Also write one CSV row per trial.
        #[arg(long)]
        per_trial: bool,
    },
    /// First-order chaotic-soliton profile.
    Soliton {
        /// xi interval, `lo:hi`.
        #[arg(long, default_value = "-20:20", value_parser = parse_range, allow_hyphen_values = true)]
        xi_range: (f64, f64),
        /// Number of xi samples.
        #[arg(long, default_value_t = 801)]
        points: usize,
        /// Soliton centre; overrides `soliton.c0`.
        #[arg(long, allow_negative_numbers = true)]
        c0: Option<f64>,
    },
    /// Chaos suppression by switching the secondary lattice.
    Control {
        /// 1: gamma -> irrational, 2: phi -> nonzero.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        method: u8,
        /// Named irrational for method 1 (sqrt2, golden, sqrt3, sqrt5, pi).
        #[arg(long, default_value = "sqrt2")]
        gamma_new: String,
        /// New phase for method 2, radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4, allow_negative_numbers = true)]
        phi_new: f64,
        /// Check a single c0 instead of every located zero.
        #[arg(long, allow_negative_numbers = true)]
        c0: Option<f64>,
        /// Also run a switching experiment on a chaotic seed.
        #[arg(long)]
        switch: bool,
        /// Master seed for the chaotic-seed search.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        iter: IterArgs,
    },
}

#[derive(Args)]
struct IterArgs {
    /// Stroboscopic iterates.
    #[arg(long)]
    iters: Option<usize>,
    /// Leading iterates discarded as transient.
    #[arg(long)]
    drop: Option<usize>,
}

impl IterArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(n) = self.iters {
            cfg.policy.n_iters = n;
        }
        if let Some(d) = self.drop {
            cfg.policy.drop = d;
        }
        cfg.policy.validate()
    }
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("{s}: need finite LO <= HI"));
    }
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{e}"));
    let (a, b) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if a == 0 || b == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((a, b))
}

fn axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mwchaos: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path, &cli.overrides)?,
        None if cli.overrides.is_empty() => RunConfig::reference(),
        None => {
            return Err(Error::Config(
                "--set needs a --config file to override".into(),
            ));
        }
    };
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Melnikov { c0_grid } => cmd_melnikov(&cfg, c0_grid, out),
        Command::RegionMap {
            k_range,
            v2_range,
            grid,
            resolution,
        } => cmd_region_map(&cfg, k_range, v2_range, grid, resolution, out),
        Command::Poincare { r0, rp0, iter } => {
            iter.apply(&mut cfg)?;
            cmd_poincare(&cfg, PhaseState::new(r0, rp0), out)
        }
        Command::Probability {
            trials,
            seed,
            iter,
            per_trial,
        } => {
            iter.apply(&mut cfg)?;
            if let Some(t) = trials {
                cfg.montecarlo.trials = t;
            }
            if let Some(s) = seed {
                cfg.montecarlo.seed = s;
            }
            cmd_probability(&cfg, per_trial, out)
        }
        Command::Soliton {
            xi_range,
            points,
            c0,
        } => {
            if let Some(c0) = c0 {
                cfg.soliton.c0 = c0;
            }
            cmd_soliton(&cfg, xi_range, points, out)
        }
        Command::Control {
            method,
            gamma_new,
            phi_new,
            c0,
            switch,
            seed,
            iter,
        } => {
            iter.apply(&mut cfg)?;
            if let Some(s) = seed {
                cfg.montecarlo.seed = s;
            }
            cmd_control(&cfg, method, &gamma_new, phi_new, c0, switch, out)
        }
    }
}

#[derive(Serialize)]
struct MelnikovReport<'a> {
    #[serde(flatten)]
    summary: ProfileSummary,
    params: &'a RunConfig,
}

fn cmd_melnikov(cfg: &RunConfig, grid: usize, out: &Path) -> Result<()> {
    let profile = melnikov::count_zeros_per_period(&cfg.params, &cfg.lattice, grid, None)?;
    let mut csv = CsvOut::create(&out.join("melnikov.csv"), &cfg.snapshot(), &["c0", "M"])?;
    for &(c0, m) in &profile.samples {
        csv.row([num(c0), num(m)])?;
    }
    csv.finish()?;
    write_json(
        &out.join("melnikov.json"),
        &MelnikovReport {
            summary: profile.summary(),
            params: cfg,
        },
    )?;
    log::info!("n = {} zeros per period", profile.n);
    Ok(())
}

fn cmd_region_map(
    cfg: &RunConfig,
    k_range: (f64, f64),
    v2_range: (f64, f64),
    (nk, nv): (usize, usize),
    resolution: usize,
    out: &Path,
) -> Result<()> {
    let ks = axis(k_range, nk);
    let vs = axis(v2_range, nv);
    let map = melnikov::region_map(
        &ks,
        &vs,
        &cfg.params,
        cfg.lattice.v1,
        &cfg.lattice.gamma,
        resolution,
    )?;
    let mut csv = CsvOut::create(
        &out.join("region_map.csv"),
        &cfg.snapshot(),
        &["k", "V2", "label", "n", "V2b"],
    )?;
    for cell in &map.cells {
        let label = match (&cell.error, cell.label) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(r)) => r.as_str().to_string(),
            (None, None) => String::new(),
        };
        csv.row([
            num(cell.k),
            num(cell.v2),
            label,
            opt(cell.n),
            cell.v2b.map(num).unwrap_or_default(),
        ])?;
    }
    csv.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct ClassificationReport {
    label: &'static str,
    lambda: Option<f64>,
    n_iters: usize,
    drop: usize,
    threshold: f64,
}

fn cmd_poincare(cfg: &RunConfig, s0: PhaseState, out: &Path) -> Result<()> {
    let p = &cfg.policy;
    let class = dynamics::classify_trajectory(s0, &cfg.params, &cfg.lattice, p)?;
    let mut csv = CsvOut::create(
        &out.join("poincare.csv"),
        &cfg.snapshot(),
        &["j", "R", "Rprime"],
    )?;
    match dynamics::poincare_section(s0, p.n_iters, p.drop, &cfg.params, &cfg.lattice, &p.step) {
        Ok(section) => {
            for (j, s) in &section.points {
                csv.row([j.to_string(), num(s.r), num(s.rp)])?;
            }
        }
        Err(Error::Unbounded { iteration, .. }) => {
            log::warn!("trajectory escaped at iterate {iteration}")
        }
        Err(e) => return Err(e),
    }
    csv.finish()?;
    write_json(
        &out.join("classification.json"),
        &ClassificationReport {
            label: class.label.as_str(),
            lambda: class.lambda,
            n_iters: p.n_iters,
            drop: p.drop,
            threshold: p.lambda_threshold,
        },
    )
}

#[derive(Serialize)]
struct ProbabilityReport<'a> {
    params: &'a RunConfig,
    n_trials: usize,
    n_chaotic: usize,
    n_regular: usize,
    n_unbounded: usize,
    p_hat: f64,
    ci: [f64; 2],
    seed: u64,
    policy: &'a dynamics::ClassificationPolicy,
}

fn cmd_probability(cfg: &RunConfig, per_trial: bool, out: &Path) -> Result<()> {
    let mc = &cfg.montecarlo;
    let (est, records) = montecarlo::estimate_probability_with_trials(
        &cfg.params,
        &cfg.lattice,
        mc.trials,
        mc.seed,
        &cfg.policy,
        &mc.options,
    )?;
    write_json(
        &out.join("probability.json"),
        &ProbabilityReport {
            params: cfg,
            n_trials: est.n_trials,
            n_chaotic: est.n_chaotic,
            n_regular: est.n_regular,
            n_unbounded: est.n_unbounded,
            p_hat: est.p_hat,
            ci: [est.ci_low, est.ci_high],
            seed: est.master_seed,
            policy: &cfg.policy,
        },
    )?;
    if per_trial {
        let mut csv = CsvOut::create(
            &out.join("trials.csv"),
            &cfg.snapshot(),
            &["index", "R0", "Rp0", "label", "lambda"],
        )?;
        for r in &records {
            csv.row([
                r.index.to_string(),
                num(r.initial.r),
                num(r.initial.rp),
                r.label.as_str().to_string(),
                r.lambda.map(num).unwrap_or_default(),
            ])?;
        }
        csv.finish()?;
    }
    log::info!("p_hat = {} ({}/{})", est.p_hat, est.n_chaotic, est.n_trials);
    Ok(())
}

fn cmd_soliton(cfg: &RunConfig, xi_range: (f64, f64), points: usize, out: &Path) -> Result<()> {
    if points == 0 {
        return Err(Error::Config("--points must be positive".into()));
    }
    let sol = SolitonConfig::new(
        cfg.params,
        cfg.lattice.clone(),
        cfg.soliton.c0,
        cfg.soliton.xi0,
    )?;
    let first = FirstOrder::new(&sol, &FirstOrderOptions::default())?;
    let samples = soliton::wave_profile(&axis(xi_range, points), &first, cfg.soliton.theta_offset)?;
    let mut csv = CsvOut::create(
        &out.join("soliton.csv"),
        &cfg.snapshot(),
        &[
            "xi",
            "R0",
            "R1",
            "R",
            "theta",
            "psi_re",
            "psi_im",
            "perturb_ratio",
        ],
    )?;
    for s in &samples {
        csv.row(
            [
                s.xi,
                s.r0,
                s.r1,
                s.r,
                s.theta,
                s.psi_re,
                s.psi_im,
                s.perturb_ratio,
            ]
            .map(num),
        )?;
    }
    csv.finish()?;
    if !first.bounded {
        log::warn!(
            "c0 = {} is not a Melnikov zero; R1 grows away from the peak",
            cfg.soliton.c0
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ControlReport {
    method: u8,
    lattice_after: matterwave_chaos::LatticeConfig,
    reports: Vec<control::SuppressionReport>,
}

#[derive(Serialize)]
struct SwitchReport {
    #[serde(flatten)]
    result: control::SwitchingResult,
    seed: u64,
    trial_index: u64,
    initial: PhaseState,
}

fn cmd_control(
    cfg: &RunConfig,
    method: u8,
    gamma_new: &str,
    phi_new: f64,
    c0: Option<f64>,
    switch: bool,
    out: &Path,
) -> Result<()> {
    let before = &cfg.lattice;
    let after = if method == 1 {
        let g = WaveRatio::named_irrational(gamma_new)
            .ok_or_else(|| Error::Config(format!("unknown irrational `{gamma_new}`")))?;
        control::apply_method1(before, &g)?
    } else {
        control::apply_method2(before, phi_new)?
    };
    let tol = melnikov::DEFAULT_ZERO_TOLERANCE;
    let reports = match c0 {
        Some(c0) => vec![control::suppression_check(
            c0,
            before,
            &after,
            &cfg.params,
            tol,
        )?],
        None => melnikov::count_zeros_per_period(
            &cfg.params,
            before,
            melnikov::DEFAULT_RESOLUTION,
            None,
        )?
        .zeros
        .iter()
        .map(|z| control::suppression_check(z.c0, before, &after, &cfg.params, tol))
        .collect::<Result<Vec<_>>>()?,
    };
    write_json(
        &out.join("control.json"),
        &ControlReport {
            method,
            lattice_after: after.clone(),
            reports,
        },
    )?;
    if switch {
        let seed = cfg.montecarlo.seed;
        let found = control::find_chaotic_seed(
            &cfg.params,
            before,
            &cfg.policy,
            seed,
            &cfg.montecarlo.options.initial_box,
            1000,
        )?;
        let (trial_index, initial) =
            found.ok_or_else(|| Error::Domain("no chaotic initial state in 1000 draws".into()))?;
        let xi_switch = cfg.policy.n_iters as f64 * before.drive_period();
        let result = control::switching_experiment(
            initial,
            xi_switch,
            before,
            &after,
            &cfg.params,
            &cfg.policy,
        )?;
        write_json(
            &out.join("switching.json"),
            &SwitchReport {
                result,
                seed,
                trial_index,
                initial,
            },
        )?;
    }
    Ok(())
}
