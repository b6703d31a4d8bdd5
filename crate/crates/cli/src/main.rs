use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use log::info;
use serde_json::json;

use henon_core::dynamics::{
    fixed_points, lyapunov_spectrum, sample_attractor, sm_integrate, sm_lyapunov, DEFAULT_DT, DEFAULT_SAMPLE,
    DEFAULT_TRANSIENT, DEFAULT_T_SAMPLE, DEFAULT_T_TRANSIENT,
};
use henon_core::io::{self, parse_list};
use henon_core::normal_form::normal_form_at;
use henon_core::orbit::{find_periodic_orbit, hunt_degenerate, multipliers_of, solve_degenerate, PeriodicOrbit};
use henon_core::sweep::{ball_probe, run_sweep, Axis, AxisRange, BallProbeSpec, SeedRule, SweepSpec};
use henon_core::verify::{run_verification, VerifyOptions};
use henon_core::{Error, HenonMap, MapKind, SMParams, State3};

const THREADS_ENV: &str = "HENON_THREADS";

#[derive(Parser)]
#[command(name = "henon", version, about = "Periodic orbits, normal forms and attractors of 3D Henon maps")]
struct Cli {
    /// Worker threads for parallel commands (default: all cores)
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Write results here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat key=value file; keys are long flag names, flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct MapArgs {
    /// forward, inverse, orbit-flip or generic
    #[arg(long, default_value = "forward")]
    map: MapKind,
    #[arg(long, allow_hyphen_values = true)]
    m1: f64,
    #[arg(long, allow_hyphen_values = true)]
    m2: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
}

impl MapArgs {
    fn build(&self) -> Result<HenonMap, Error> {
        let m = HenonMap::from_triple(self.map, [self.m1, self.m2, self.b]);
        m.validate()?;
        Ok(m)
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Initial state x,y,z (default: near the fixed point closest to the degenerate one)
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TRANSIENT)]
    transient: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLE)]
    samples: usize,
}

impl RunArgs {
    fn initial(&self, map: &HenonMap) -> Result<State3, Error> {
        match &self.x0 {
            Some(s) => state(s),
            None => SeedRule::default_for(map.kind())
                .initial_state(map)
                .ok_or_else(|| Error::InvalidParameter("no real fixed point to seed from; pass --x0".into())),
        }
    }
}

#[derive(Subcommand)]
#[command(args_override_self = true)]
enum Cmd {
    /// Real fixed points and their multipliers
    FixedPoints(MapArgs),
    /// Periodic orbit by Newton from delay coordinates
    Periodic {
        #[command(flatten)]
        map: MapArgs,
        /// z1,...,zn
        #[arg(long, allow_hyphen_values = true)]
        guess: Option<String>,
        #[arg(long)]
        guess_file: Option<PathBuf>,
    },
    /// Period-n orbit with multipliers (-1,-1,+1), solving for (M1, M2)
    Degenerate {
        #[arg(long, default_value = "inverse")]
        map: MapKind,
        #[arg(long)]
        period: usize,
        /// Fixed Jacobian, +1 or -1
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        /// z1,...,zn,M1,M2
        #[arg(long, allow_hyphen_values = true)]
        guess: Option<String>,
        #[arg(long)]
        guess_file: Option<PathBuf>,
    },
    /// Multistart search for degenerate orbits over a seed box
    Hunt {
        #[arg(long, default_value = "inverse")]
        map: MapKind,
        #[arg(long)]
        period: usize,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 10_000)]
        seeds: usize,
        /// lo,hi applied to every unknown
        #[arg(long, allow_hyphen_values = true, default_value = "-2,2")]
        r#box: String,
    },
    /// Quadratic normal form at a point of a degenerate orbit
    NormalForm {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        period: usize,
        /// Orbit point x,y,z
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Delay coordinates z1,...,zn of the orbit (alternative to --x0)
        #[arg(long, allow_hyphen_values = true)]
        orbit: Option<String>,
    },
    /// Lyapunov spectrum of one orbit
    Lyapunov {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Attractor sample: component summary, or a point cloud with --render
    Attract {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        period: usize,
        #[arg(long, action = ArgAction::SetTrue)]
        render: bool,
    },
    /// Classify a two-parameter grid
    Sweep {
        #[arg(long, default_value = "forward")]
        map: MapKind,
        /// name=value of the parameter held fixed, e.g. b=-0.95
        #[arg(long, allow_hyphen_values = true)]
        fixed: String,
        /// name:lo:hi:n
        #[arg(long, allow_hyphen_values = true)]
        axis1: String,
        #[arg(long, allow_hyphen_values = true)]
        axis2: String,
        #[arg(long, default_value_t = DEFAULT_TRANSIENT)]
        transient: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Fixed initial state x,y,z for every cell
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// csv or json
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Quasi-random probes of a parameter ball for period-p chaotic attractors
    BallProbe {
        #[arg(long, default_value = "inverse")]
        map: MapKind,
        /// m1,m2,b
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 200)]
        probes: usize,
        #[arg(long, default_value_t = 6)]
        period: usize,
        #[arg(long, default_value_t = DEFAULT_TRANSIENT)]
        transient: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Delay coordinates of a periodic orbit at the center to seed from
        #[arg(long, allow_hyphen_values = true)]
        seed_orbit: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        seed_offset: f64,
    },
    /// Shimizu-Morioka flow: Lyapunov spectrum, or a trajectory with --render
    Sm {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true, default_value = "0.1,0,0")]
        x0: String,
        #[arg(long, default_value_t = DEFAULT_T_TRANSIENT)]
        t_transient: f64,
        #[arg(long, default_value_t = DEFAULT_T_SAMPLE)]
        t_sample: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, action = ArgAction::SetTrue)]
        render: bool,
    },
    /// Run the pinned verification suite
    VerifyPaper {
        #[arg(long, action = ArgAction::SetTrue, hide = true)]
        inject_sign_flip: bool,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::UnknownMap(_) | Error::UnsupportedMap(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn state(s: &str) -> Result<State3, Error> {
    let v = parse_list(s)?;
    if v.len() != 3 {
        return Err(Error::InvalidParameter(format!("expected 3 values, got {}", v.len())));
    }
    Ok(State3::new(v[0], v[1], v[2]))
}

fn list_arg(inline: &Option<String>, file: &Option<PathBuf>) -> Result<Vec<f64>, Failure> {
    match (inline, file) {
        (Some(s), None) => Ok(parse_list(s)?),
        (None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Ok(parse_list(&text)?)
        }
        _ => Err(Failure::Usage("give exactly one of --guess, --guess-file".into())),
    }
}

fn parse_axis(s: &str) -> Result<AxisRange, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidParameter(format!("axis `{s}` is not name:lo:hi:n"));
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok(AxisRange {
        axis: parts[0].parse()?,
        lo: parts[1].parse().map_err(|_| bad())?,
        hi: parts[2].parse().map_err(|_| bad())?,
        n: parts[3].parse().map_err(|_| bad())?,
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Usage(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn csv<F>(f: F) -> String
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn run(cmd: Cmd, out: &Option<PathBuf>) -> Result<(), Failure> {
    match cmd {
        Cmd::FixedPoints(m) => {
            let map = m.build()?;
            let pts: Vec<_> = fixed_points(&map).into_iter().map(|p| (p, multipliers_of(&map.jacobian(&p)))).collect();
            if pts.is_empty() {
                info!("no real fixed points");
            }
            emit(out, &io::to_json_string(&io::fixed_points_json(&map, &pts)))
        }
        Cmd::Periodic { map, guess, guess_file } => {
            let map = map.build()?;
            let g = list_arg(&guess, &guess_file)?;
            let orbit = find_periodic_orbit(&map, &g)?;
            info!("period {} orbit, residual {:e}", orbit.period(), orbit.residual());
            emit(out, &io::to_json_string(&io::orbit_json(&orbit)))
        }
        Cmd::Degenerate { map, period, b, guess, guess_file } => {
            let g = list_arg(&guess, &guess_file)?;
            if g.len() != period + 2 {
                return Err(Failure::Usage(format!("guess needs {} values, got {}", period + 2, g.len())));
            }
            let sol = solve_degenerate(map, b, &g)?;
            info!("residual {:e}, jordan defect {:?}", sol.max_residual(), sol.jordan_defect);
            let nf = normal_form_at(&sol.orbit.map, &sol.orbit.points[0], period).ok();
            let v = io::degenerate_json(&sol, nf.as_ref().map(|r| (&r.coeffs, r.classification)));
            emit(out, &io::to_json_string(&v))
        }
        Cmd::Hunt { map, period, b, seeds, r#box } => {
            let lohi = parse_list(&r#box)?;
            if lohi.len() != 2 || lohi[0] >= lohi[1] {
                return Err(Failure::Usage("--box needs lo,hi with lo < hi".into()));
            }
            let bounds = vec![(lohi[0], lohi[1]); period + 2];
            let h = hunt_degenerate(map, b, &bounds, seeds)?;
            info!("{} solutions from {} converged seeds", h.solutions.len(), h.converged_seeds);
            let nf: Vec<_> = h
                .solutions
                .iter()
                .map(|s| {
                    normal_form_at(&s.orbit.map, &s.orbit.points[0], period).ok().map(|r| (r.coeffs, r.classification))
                })
                .collect();
            emit(out, &io::to_json_string(&io::hunt_json(&h, &nf)))
        }
        Cmd::NormalForm { map, period, x0, orbit } => {
            let map = map.build()?;
            let p = match (x0, orbit) {
                (Some(s), None) => state(&s)?,
                (None, Some(o)) => PeriodicOrbit::from_delay(map, &parse_list(&o)?).points[0],
                _ => return Err(Failure::Usage("give exactly one of --x0, --orbit".into())),
            };
            let r = normal_form_at(&map, &p, period)?;
            let basis: Vec<Vec<f64>> = (0..3).map(|j| r.chart.basis.column(j).iter().copied().collect()).collect();
            let v = json!({
                "map": map.kind().name(),
                "params": io::params_json(&map),
                "period": period,
                "point": [p.x, p.y, p.z],
                "basis": basis,
                "jordan_defect": r.chart.jordan_defect,
                "coeffs": io::coeffs_json(&r.coeffs),
                "classification": r.classification.name(),
            });
            emit(out, &io::to_json_string(&v))
        }
        Cmd::Lyapunov { map, run } => {
            let m = map.build()?;
            let x0 = run.initial(&m)?;
            let r = lyapunov_spectrum(&m, &x0, run.transient, run.samples)?;
            if let Some(k) = r.escaped_at {
                info!("orbit escaped at sample step {k}");
            }
            emit(out, &io::to_json_string(&io::lyapunov_json(Some(&m), &r)))
        }
        Cmd::Attract { map, run, period, render } => {
            let m = map.build()?;
            let x0 = run.initial(&m)?;
            let s = sample_attractor(&m, &x0, run.transient, run.samples, period)?;
            if s.escaped {
                info!("orbit escaped after {} samples", s.points.len());
            }
            if render {
                emit(out, &csv(|w| io::write_points_csv(w, &s.points)))
            } else {
                emit(out, &io::to_json_string(&io::attractor_json(&s)))
            }
        }
        Cmd::Sweep { map, fixed, axis1, axis2, transient, samples, x0, format } => {
            let (name, value) =
                fixed.split_once('=').ok_or_else(|| Failure::Usage("--fixed needs name=value".into()))?;
            let axis: Axis = name.trim().parse()?;
            let value: f64 = value.trim().parse().map_err(|_| Failure::Usage(format!("bad fixed value `{value}`")))?;
            let seed = match x0 {
                Some(s) => SeedRule::Point(state(&s)?),
                None => SeedRule::default_for(map),
            };
            let spec = SweepSpec {
                map,
                fixed: (axis, value),
                axes: [parse_axis(&axis1)?, parse_axis(&axis2)?],
                n_transient: transient,
                n_sample: samples,
                seed,
            };
            let cells = run_sweep(&spec)?;
            match format.as_str() {
                "csv" => emit(out, &csv(|w| io::write_sweep_csv(w, &cells))),
                "json" => {
                    let rows: Vec<_> = cells
                        .iter()
                        .map(|c| {
                            json!({
                                "axis1": c.axis1, "axis2": c.axis2, "class": c.class.name(),
                                "exponents": c.exponents,
                            })
                        })
                        .collect();
                    let v = json!({
                        "axis1": spec.axes[0].axis.name(),
                        "axis2": spec.axes[1].axis.name(),
                        "cells": rows,
                    });
                    emit(out, &io::to_json_string(&v))
                }
                other => Err(Failure::Usage(format!("unknown format `{other}`"))),
            }
        }
        Cmd::BallProbe { map, center, radius, probes, period, transient, samples, seed_orbit, seed_offset } => {
            let c = parse_list(&center)?;
            if c.len() != 3 {
                return Err(Failure::Usage("--center needs m1,m2,b".into()));
            }
            let center = [c[0], c[1], c[2]];
            let seed = match seed_orbit {
                Some(o) => SeedRule::near_orbit(&HenonMap::from_triple(map, center), &parse_list(&o)?, seed_offset)?,
                None => SeedRule::default_for(map),
            };
            let spec = BallProbeSpec {
                map,
                center,
                radius,
                n_probes: probes,
                expected_period: period,
                n_transient: transient,
                n_sample: samples,
                seed,
            };
            let hits = ball_probe(&spec)?;
            info!("{} hits from {} probes", hits.len(), probes);
            emit(out, &io::to_json_string(&io::ball_probe_json(&center, radius, probes, &hits)))
        }
        Cmd::Sm { lambda, alpha, x0, t_transient, t_sample, dt, render } => {
            let q = SMParams::new(lambda, alpha);
            let x0 = state(&x0)?;
            if render {
                let traj = sm_integrate(&q, &x0, t_sample, dt)?;
                emit(out, &csv(|w| io::write_points_csv(w, &traj)))
            } else {
                let r = sm_lyapunov(&q, &x0, t_transient, t_sample, dt)?;
                let mut v = io::lyapunov_json(None, &r);
                v["params"] = json!({ "lambda": lambda, "alpha": alpha });
                emit(out, &io::to_json_string(&v))
            }
        }
        Cmd::VerifyPaper { inject_sign_flip } => {
            let report = run_verification(&VerifyOptions { inject_sign_flip });
            eprint!("{}", report.table());
            emit(out, &io::to_json_string(&report.to_json()))?;
            match report.failures().map(|c| c.name.as_str()).collect::<Vec<_>>() {
                f if f.is_empty() => Ok(()),
                f => Err(Failure::Check(format!("hard checks failed: {}", f.join(", ")))),
            }
        }
    }
}

/// Splices `--key=value` pairs from the config file right after the
/// subcommand name, so that flags given on the command line win.
fn expand_config(raw: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    for (i, a) in raw.iter().enumerate() {
        if a == "--config" {
            path = raw.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(raw);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| format!("{path}: {e}"))?;
    let pairs = io::parse_config(&text).map_err(|e| e.to_string())?;
    let cmd = Cli::command();
    let Some((pos, sub)) =
        raw.iter().enumerate().skip(1).find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s.clone())))
    else {
        return Ok(raw);
    };
    let mut injected = Vec::new();
    for (k, v) in pairs {
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(k.as_str()) && !a.is_hide_set());
        let Some(arg) = arg else {
            return Err(format!("unknown config key `{k}` for `{}`", sub.get_name()));
        };
        if k == "config" {
            return Err("config files cannot include another config".into());
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match v.as_str() {
                "true" => injected.push(format!("--{k}")),
                "false" => {}
                _ => return Err(format!("config key `{k}` takes true or false")),
            }
        } else {
            injected.push(format!("--{k}={v}"));
        }
    }
    let mut out = raw;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let out = cli.out.clone();
    match pool.install(|| run(cli.cmd, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
