use serde::Serialize;
use std::io::Write;
use std::ops::ControlFlow;

use vsi_achieve::montecarlo::{paired_improvement, CheckerKind};
use vsi_achieve::oracle::{simulate_profile, steady_state_achievable};
use vsi_achieve::{
    check_setpoint, is_stabilizing, map_region, optimize_gain, Checker, Gain, PowerState, Setpoint,
    Stability,
};

use crate::cli::{Args, Command};
use crate::output::{Manifest, OutputDir};
use crate::{CliError, Exit, RunConfig};

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.sampling.seed = seed;
    }
    if let Some(kind) = args.checker {
        cfg.sampling.checker = kind;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(g) = &args.gain {
        if g.len() != 4 {
            return Err(CliError::Config(format!(
                "--gain needs 4 comma-separated entries, got {}",
                g.len()
            )));
        }
        cfg.gain = Some(Gain::new([[g[0], g[1]], [g[2], g[3]]]));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one parsed invocation. Results go to stdout and the output
/// directory; diagnostics go to `log`.
pub fn run(
    args: &Args,
    stdout: &mut (dyn Write + Send),
    log: &mut (dyn Write + Send),
) -> Result<Exit, CliError> {
    let cfg = resolve_config(args)?;
    if let Command::DumpConfig = args.command {
        writeln!(stdout, "{}", cfg.to_json()).map_err(CliError::io)?;
        return Ok(Exit::SUCCESS);
    }
    let threads = match args.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(CliError::config)?;
    pool.install(|| {
        let ctx = Ctx {
            cfg: &cfg,
            threads,
            stdout,
            log,
        };
        match args.command {
            Command::Check { p, q } => ctx.check(Setpoint::new(p, q), args.out.is_some()),
            Command::Map => ctx.map(),
            Command::Optimize => ctx.optimize(),
            Command::Simulate { p, q } => ctx.simulate(Setpoint::new(p, q)),
            Command::DumpConfig => unreachable!(),
        }
    })
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    threads: usize,
    stdout: &'a mut (dyn Write + Send),
    log: &'a mut (dyn Write + Send),
}

#[derive(Debug, Serialize)]
struct CheckReport {
    p_ref: f64,
    q_ref: f64,
    checker: CheckerKind,
    gain: Gain,
    achievable: bool,
    inconclusive: bool,
    margin: f64,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    margin1: Option<f64>,
    margin2: Option<f64>,
    /// Voltage² at which the steady-state margin is smallest.
    worst_d: Option<f64>,
    flags: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ProfileSummary {
    label: String,
    violations: usize,
    first_violation_t: Option<f64>,
    worst_margin: f64,
    final_p: f64,
    final_q: f64,
    file: String,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    p_ref: f64,
    q_ref: f64,
    gain: Gain,
    stability: Stability,
    dt: f64,
    horizon: f64,
    achievable: bool,
    profiles: Vec<ProfileSummary>,
}

#[derive(Debug, Serialize)]
struct PairedTest {
    wins: usize,
    losses: usize,
    p_value: f64,
}

#[derive(Debug, Serialize)]
struct BestGain {
    gain: Gain,
    /// Sample index of the winner; null when the open-loop gain wins.
    best_index: Option<u64>,
    checker: CheckerKind,
    rate: f64,
    n_achievable: usize,
    n_total: usize,
    worst_margin: Option<f64>,
    open_loop_rate: Option<f64>,
    /// Relative gain over the open-loop rate, in percent.
    improvement_pct: Option<f64>,
    paired_vs_open_loop: Option<PairedTest>,
    best_sampled_index: Option<u64>,
    best_sampled_rate: Option<f64>,
    n_gains: usize,
    n_unstable: usize,
    n_slow: usize,
    seed: u64,
}

fn bit(b: bool) -> u8 {
    u8::from(b)
}

impl Ctx<'_> {
    fn say(&mut self, msg: std::fmt::Arguments) {
        // Diagnostics are best effort.
        let _ = writeln!(self.log, "{msg}");
    }

    fn emit_json<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
        writeln!(self.stdout, "{text}").map_err(CliError::io)
    }

    fn manifest(&self, out: &OutputDir, command: &str, files: Vec<String>) -> Result<(), CliError> {
        let m = Manifest {
            tool: "vsi-achieve",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.cfg.sampling.seed,
            threads: self.threads,
            checker: self.cfg.sampling.checker.to_string(),
            files,
            config: self.cfg,
        };
        out.write_json("manifest.json", &m).map(|_| ())
    }

    fn checker(&self) -> Result<Checker, CliError> {
        self.cfg.checker()
    }

    fn check(mut self, x_ref: Setpoint, write_files: bool) -> Result<Exit, CliError> {
        let cfg = self.cfg;
        let gain = cfg.gain();
        let params = &cfg.plant;
        let kind = cfg.sampling.checker;
        let mut report = CheckReport {
            p_ref: x_ref.p_ref,
            q_ref: x_ref.q_ref,
            checker: kind,
            gain,
            achievable: false,
            inconclusive: false,
            margin: f64::NAN,
            lambda1: None,
            lambda2: None,
            margin1: None,
            margin2: None,
            worst_d: None,
            flags: Vec::new(),
        };
        match kind {
            CheckerKind::Certificate => {
                let v =
                    check_setpoint(x_ref, &gain, params, &cfg.search).map_err(CliError::config)?;
                report.achievable = v.achievable;
                report.inconclusive = v.is_inconclusive();
                report.margin = v.margin();
                report.lambda1 = v.lambda1;
                report.lambda2 = v.lambda2;
                report.margin1 = Some(v.margin1);
                report.margin2 = Some(v.margin2);
                report.flags = v.flags;
            }
            CheckerKind::SteadyState => {
                let v = steady_state_achievable(x_ref, params, cfg.steady_state.n_grid);
                report.achievable = v.achievable;
                report.margin = v.worst_margin;
                report.worst_d = Some(v.worst_d);
            }
            CheckerKind::Trajectory => {
                let v = self
                    .checker()?
                    .evaluate(x_ref, &gain, params)
                    .map_err(CliError::config)?;
                report.achievable = v.achievable;
                report.margin = v.margin;
            }
        }
        self.emit_json(&report)?;
        if write_files {
            let out = OutputDir::create(&cfg.output_dir)?;
            out.write_json("verdict.json", &report)?;
            self.manifest(&out, "check", vec!["verdict.json".into()])?;
        }
        Ok(if report.inconclusive {
            Exit::Inconclusive
        } else if report.achievable {
            Exit::Achievable
        } else {
            Exit::Unachievable
        })
    }

    fn map(mut self) -> Result<Exit, CliError> {
        let cfg = self.cfg;
        let gain = cfg.gain();
        let checker = self.checker()?;
        if let Err(status) = checker.admits(&gain, &cfg.plant) {
            return Err(CliError::Config(format!(
                "gain {gain} cannot be used with the {} checker ({status})",
                checker.label()
            )));
        }
        let start = std::time::Instant::now();
        let region =
            map_region(&gain, &cfg.grid, &checker, &cfg.plant).map_err(CliError::config)?;
        let label = checker.label();
        let out = OutputDir::create(&cfg.output_dir)?;
        out.write_with("region.csv", |w| {
            writeln!(w, "p_ref_w,q_ref_var,achievable,margin,checker")?;
            for c in &region.cells {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    c.p_ref,
                    c.q_ref,
                    bit(c.achievable),
                    c.margin,
                    label
                )?;
            }
            Ok(())
        })?;
        self.manifest(&out, "map", vec!["region.csv".into()])?;
        self.say(format_args!(
            "mapped {} cells with the {label} checker in {:.2?}: {} achievable, area {:.4e} W*var",
            region.cells.len(),
            start.elapsed(),
            region.n_achievable(),
            region.area()
        ));
        Ok(Exit::SUCCESS)
    }

    fn optimize(mut self) -> Result<Exit, CliError> {
        let cfg = self.cfg;
        let checker = self.checker()?;
        let start = std::time::Instant::now();
        let outcome =
            optimize_gain(&cfg.sampling, &cfg.plant, &checker).map_err(CliError::config)?;

        let best_sampled = outcome
            .log
            .iter()
            .filter(|e| e.status == "ok")
            .max_by(|a, b| {
                a.n_achievable
                    .cmp(&b.n_achievable)
                    .then(b.index.cmp(&a.index))
            });
        let (improvement_pct, paired) = match &outcome.open_loop {
            Some(ol) => {
                let imp = (ol.n_achievable > 0).then(|| {
                    100.0 * (outcome.best.n_achievable as f64 - ol.n_achievable as f64)
                        / ol.n_achievable as f64
                });
                let (wins, losses, p_value) =
                    paired_improvement(&outcome.best.achievable_mask(), &ol.achievable_mask());
                (
                    imp,
                    Some(PairedTest {
                        wins,
                        losses,
                        p_value,
                    }),
                )
            }
            None => (None, None),
        };
        let best = BestGain {
            gain: outcome.best.gain,
            best_index: outcome.best_index,
            checker: checker.kind(),
            rate: outcome.best.rate,
            n_achievable: outcome.best.n_achievable,
            n_total: outcome.best.n_total,
            worst_margin: outcome.best.worst_margin,
            open_loop_rate: outcome.open_loop.as_ref().map(|r| r.rate),
            improvement_pct,
            paired_vs_open_loop: paired,
            best_sampled_index: best_sampled.map(|e| e.index),
            best_sampled_rate: best_sampled.map(|e| e.rate),
            n_gains: cfg.sampling.n_gains,
            n_unstable: outcome.n_unstable,
            n_slow: outcome.n_slow,
            seed: cfg.sampling.seed,
        };

        let out = OutputDir::create(&cfg.output_dir)?;
        out.write_with("sweep.jsonl", |w| {
            for entry in &outcome.log {
                serde_json::to_writer(&mut *w, entry)?;
                writeln!(w)?;
            }
            Ok(())
        })?;
        out.write_json("best_gain.json", &best)?;
        self.manifest(
            &out,
            "optimize",
            vec!["sweep.jsonl".into(), "best_gain.json".into()],
        )?;
        self.say(format_args!(
            "scored {} gains on {} setpoints in {:.2?}; best {} with S = {:.4} ({} unstable, {} slow)",
            cfg.sampling.n_gains,
            outcome.setpoints.len(),
            start.elapsed(),
            best.gain,
            best.rate,
            best.n_unstable,
            best.n_slow
        ));
        self.emit_json(&best)?;
        Ok(Exit::SUCCESS)
    }

    fn simulate(mut self, x_ref: Setpoint) -> Result<Exit, CliError> {
        let cfg = self.cfg;
        let gain = cfg.gain();
        let params = &cfg.plant;
        let stability = is_stabilizing(&gain, params);
        if !stability.stabilizing {
            self.say(format_args!(
                "warning: gain {gain} is not stabilizing ({})",
                stability.describe()
            ));
        }
        let dt = cfg.integrator.dt;
        let steps = (cfg.integrator.horizon / dt).round() as usize;
        let out = OutputDir::create(&cfg.output_dir)?;
        let mut profiles = Vec::new();
        let mut files = Vec::new();
        for member in cfg.ensemble()? {
            let mut samples = Vec::with_capacity(steps + 1);
            simulate_profile(
                PowerState::ZERO,
                x_ref,
                &gain,
                params,
                &member.profile,
                dt,
                steps,
                |s| {
                    samples.push(*s);
                    ControlFlow::Continue(())
                },
            );
            let file = format!("trajectory_{}.csv", member.label);
            out.write_with(&file, |w| {
                writeln!(
                    w,
                    "t_s,p_w,q_var,u_p,u_q,vg_v,norm_u,lb,ub,lb_v2,ub_v2,violation"
                )?;
                for s in &samples {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        s.t,
                        s.x.p,
                        s.x.q,
                        s.u_p,
                        s.u_q,
                        s.vg,
                        s.norm_u,
                        s.lower,
                        s.upper,
                        s.norm_u - s.lower,
                        s.upper - s.norm_u,
                        bit(s.violation)
                    )?;
                }
                Ok(())
            })?;
            let last = samples.last().map_or(PowerState::ZERO, |s| s.x);
            profiles.push(ProfileSummary {
                label: member.label.clone(),
                violations: samples.iter().filter(|s| s.violation).count(),
                first_violation_t: samples.iter().find(|s| s.violation).map(|s| s.t),
                worst_margin: samples
                    .iter()
                    .map(|s| s.margin())
                    .fold(f64::INFINITY, f64::min),
                final_p: last.p,
                final_q: last.q,
                file: file.clone(),
            });
            files.push(file);
        }
        let report = SimulateReport {
            p_ref: x_ref.p_ref,
            q_ref: x_ref.q_ref,
            gain,
            stability,
            dt,
            horizon: steps as f64 * dt,
            achievable: profiles.iter().all(|p| p.violations == 0),
            profiles,
        };
        self.manifest(&out, "simulate", files)?;
        self.emit_json(&report)?;
        Ok(if report.achievable {
            Exit::Achievable
        } else {
            Exit::Unachievable
        })
    }
}

/// Parses `argv`, runs, and maps every failure onto an exit code.
pub fn main_with(
    argv: &[String],
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> Exit {
    use clap::Parser;
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                Exit::ConfigError
            } else {
                // --help and --version.
                let _ = write!(stdout, "{}", e.render());
                Exit::SUCCESS
            };
        }
    };
    match run(&args, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit()
        }
    }
}
