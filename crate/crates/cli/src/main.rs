use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hitchplan::engel::{steer_engel, ShootingConfig};
use hitchplan::integrate::{integrate, resimulate, ControlLaw, SampledLaw, SharedLaw, System, Trajectory};
use hitchplan::kinematics::{EngelPoint, TrailerGeometry, TrailerState};
use hitchplan::nilpotent::engel_target_via_frame;
use hitchplan::planner::{
    config_distance_raw, dubins_shortest, plan_park_with, plan_repark_with, AlphaOptions, ParkOptions, PlanReport,
    PlanStatus, ReparkOptions, RestartRule,
};

mod export;
mod scenario;

use scenario::{AlphaSpec, Scenario};

#[derive(Parser)]
#[command(name = "hitchplan", version, about = "Motion planning for a mobile robot towing a trailer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Change the hitch angle from q0[3] to q1[3], returning the car to its pose.
    Repark(Common),
    /// Iterative parking from q0 to q1.
    Park(Common),
    /// Steer the Engel group from the origin to a target.
    SteerEngel {
        #[command(flatten)]
        common: Common,
        /// Target "x,y,z,v"; defaults to the Engel image of the scenario.
        #[arg(long, value_parser = parse_target)]
        target: Option<EngelPoint>,
    },
    /// Shortest forward-only car path between the poses of q0 and q1.
    Dubins {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Integrate the controls of a trajectory CSV on the scenario geometry.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        controls: PathBuf,
    },
    /// Run the reference reparking and parking scenarios.
    Selftest,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Fixed scale or "search".
    #[arg(long)]
    alpha: Option<AlphaSpec>,
    /// "endpoint" or "fraction:<beta>".
    #[arg(long, value_parser = parse_restart)]
    restart_rule: Option<RestartRule>,
}

fn parse_target(s: &str) -> Result<EngelPoint, String> {
    let v: Vec<f64> = s.split(',').map(|c| c.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    match v.as_slice() {
        [a, b, c, d] => Ok(EngelPoint::new(*a, *b, *c, *d)),
        _ => Err(format!("expected four comma-separated numbers, got {s:?}")),
    }
}

fn parse_restart(s: &str) -> Result<RestartRule, String> {
    if s == "endpoint" {
        return Ok(RestartRule::Endpoint);
    }
    let beta = s
        .strip_prefix("fraction:")
        .and_then(|b| b.parse::<f64>().ok())
        .ok_or_else(|| format!("expected \"endpoint\" or \"fraction:<beta>\", got {s:?}"))?;
    if beta > 0.0 && beta <= 1.0 {
        Ok(RestartRule::Fraction(beta))
    } else {
        Err(format!("restart fraction must lie in (0, 1], got {beta}"))
    }
}

/// Failure that maps to exit code 1.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type Outcome = Result<bool, Fatal>;

fn scenario(c: &Common) -> Result<Scenario, Fatal> {
    let path = c.scenario.as_deref().ok_or_else(|| Fatal("--scenario <file> is required".into()))?;
    let mut s = Scenario::load(path).map_err(Fatal)?;
    if let Some(v) = c.seed {
        s.seed = v;
    }
    if let Some(v) = c.tol {
        s.tol = v;
    }
    if let Some(v) = c.max_iter {
        s.max_iter = v;
    }
    if let Some(v) = c.alpha {
        s.alpha = v;
    }
    Ok(s)
}

fn geometry(s: &Scenario) -> Result<TrailerGeometry, Fatal> {
    Ok(TrailerGeometry::with_phi_max(s.l_r, s.l_t, s.phi_max)?)
}

fn print_json(v: &serde_json::Value) {
    use std::io::Write;
    // a closed pipe (e.g. `| head`) is not an error worth failing over
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn write_csv(path: &Option<PathBuf>, t: &Trajectory) -> Result<(), Fatal> {
    if let Some(p) = path {
        std::fs::write(p, export::trajectory_csv(t)).map_err(|e| Fatal(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn write_outputs(c: &Common, report: &PlanReport, g: &TrailerGeometry) -> Result<(), Fatal> {
    write_csv(&c.out_csv, &report.trajectory)?;
    if let Some(p) = &c.out_svg {
        export::emit_figure(report, g, p).map_err(Fatal)?;
    }
    Ok(())
}

fn report_json(r: &PlanReport) -> serde_json::Value {
    json!({
        "status": r.status,
        "converged": r.converged(),
        "eps": r.eps,
        "eps_history": r.eps_history,
        "iterations": r.iterations,
        "restarts": r.restarts,
        "alpha": r.alpha,
        "sr_length": r.sr_length,
        "weighted_length": r.weighted_length,
        "constraint_violated": r.constraint_violated,
        "duration": r.trajectory.duration(),
        "samples": r.trajectory.len(),
        "end": r.trajectory.end(),
        "goal": r.goal,
    })
}

fn repark(c: &Common) -> Outcome {
    let s = scenario(c)?;
    let g = geometry(&s)?;
    let opts = ReparkOptions { alpha: AlphaOptions::from(s.alpha), steps_per_unit: s.steps, ..ReparkOptions::default() };
    let r = plan_repark_with(&g, s.q0[3], s.q1[3], s.tol, &opts)?;
    write_outputs(c, &r, &g)?;
    print_json(&report_json(&r));
    Ok(r.converged())
}

fn park(c: &Common) -> Outcome {
    let s = scenario(c)?;
    let g = geometry(&s)?;
    let opts = ParkOptions {
        tol: s.tol,
        max_iter: s.max_iter,
        restart_rule: c.restart_rule.unwrap_or_default(),
        shooting: ShootingConfig { seed: s.seed, ..ShootingConfig::default() },
        steps_per_unit: s.steps,
    };
    let r = plan_park_with(&g, &TrailerState::from_raw(s.q0), &TrailerState::from_raw(s.q1), &opts)?;
    write_csv(&c.out_csv, &r.trajectory)?;
    if let Some(p) = &c.out_svg {
        if !r.trajectory.is_stationary() {
            export::emit_figure(&r, &g, p).map_err(Fatal)?;
        } else {
            log::warn!("nothing to draw: the plan does not move");
        }
    }
    print_json(&report_json(&r));
    Ok(r.converged())
}

fn steer(c: &Common, target: Option<EngelPoint>) -> Outcome {
    let (target, seed, tol, steps) = match (target, &c.scenario) {
        (Some(t), None) => (t, c.seed.unwrap_or(0), c.tol, 400.0),
        _ => {
            let s = scenario(c)?;
            let t = match target {
                Some(t) => t,
                None => engel_target_via_frame(&s.q0, &s.q1, &geometry(&s)?)?,
            };
            (t, s.seed, c.tol, s.steps)
        }
    };
    let defaults = ShootingConfig::default();
    let cfg = ShootingConfig { seed, tol: tol.unwrap_or(defaults.tol), ..defaults };
    match steer_engel(target, &cfg) {
        Ok(r) => {
            let law: SharedLaw = r.law.clone();
            let n = (law.horizon() * steps).ceil().max(1.0) as usize;
            let traj = integrate(&System::Engel, [0.0; 4], &law, n)?;
            print_json(&json!({
                "converged": true,
                "target": target.to_array(),
                "horizon": r.horizon(),
                "residual": r.residual,
                "starts_tried": r.starts_tried,
                "covector": r.law.covector(),
                "end": traj.end(),
            }));
            write_csv(&c.out_csv, &traj)?;
            Ok(true)
        }
        Err(hitchplan::Error::SteeringFailed { best_residual, starts }) => {
            print_json(&json!({ "converged": false, "target": target.to_array(), "best_residual": best_residual, "starts_tried": starts }));
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

fn dubins(c: &Common, radius: f64) -> Outcome {
    let s = scenario(c)?;
    let g = geometry(&s)?;
    let start = (s.q0[0], s.q0[1], s.q0[2]);
    let path = dubins_shortest(start, (s.q1[0], s.q1[1], s.q1[2]), radius)?;
    let traj = match path.control_law() {
        Some(law) => integrate(&System::Trailer(g), s.q0, &law, (path.length() * s.steps).ceil().max(1.0) as usize)?,
        None => Trajectory::stationary(s.q0),
    };
    let e = traj.end();
    let pose_error = ((e[0] - s.q1[0]).powi(2) + (e[1] - s.q1[1]).powi(2)).sqrt();
    print_json(&json!({
        "word": path.word.to_string(),
        "segments": path.segments,
        "radius": path.radius,
        "length": path.length(),
        "end": e,
        "position_error": pose_error,
    }));
    write_csv(&c.out_csv, &traj)?;
    if let Some(p) = &c.out_svg {
        let goal = [s.q1[0], s.q1[1], s.q1[2], e[3]];
        let report = PlanReport {
            eps: config_distance_raw(&e, &goal),
            eps_history: vec![],
            iterations: 1,
            restarts: vec![],
            alpha: 1.0,
            sr_length: traj.sr_length(),
            weighted_length: traj.weighted_length(),
            constraint_violated: traj.states().iter().any(|q| g.violates(q[3])),
            status: PlanStatus::Converged,
            goal,
            trajectory: traj,
        };
        export::emit_figure(&report, &g, p).map_err(Fatal)?;
    }
    Ok(true)
}

fn simulate(c: &Common, controls: &Path) -> Outcome {
    let s = scenario(c)?;
    let g = geometry(&s)?;
    let rows = export::read_csv(controls).map_err(Fatal)?;
    let q0 = [rows[0][1], rows[0][2], rows[0][3], rows[0][4]];
    let traj = if rows.len() == 1 {
        Trajectory::stationary(q0)
    } else {
        let samples: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[5], r[6])).collect();
        let law = SampledLaw::from_samples(&samples)?;
        resimulate(&System::Trailer(g), q0, &law, 1.0)?
    };
    let end = traj.end();
    let stored = rows.last().map(|r| [r[1], r[2], r[3], r[4]]).expect("rows are non-empty");
    let mismatch = end.iter().zip(stored).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    print_json(&json!({
        "end": end,
        "eps": config_distance_raw(&end, &s.q1),
        "stored_end": stored,
        "max_end_mismatch": mismatch,
        "sr_length": traj.sr_length(),
    }));
    write_csv(&c.out_csv, &traj)?;
    Ok(true)
}

fn selftest() -> Outcome {
    let mut all = true;
    let mut line = |name: &str, ok: bool, detail: String| {
        all &= ok;
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    };
    let t = Instant::now();
    let g = TrailerGeometry::new(0.0, 2.0)?;
    let r = plan_repark_with(&g, FRAC_PI_4, FRAC_PI_2, 1e-3, &ReparkOptions { alpha: AlphaOptions::Fixed(1.0), ..Default::default() })?;
    line("repark (0,2) pi/4 -> pi/2", r.eps < 1e-3, format!("eps = {:.3e} (< 1e-3), {:.1}s", r.eps, t.elapsed().as_secs_f64()));

    let g = TrailerGeometry::new(1.0, 5.0)?;
    let fixed = plan_repark_with(&g, FRAC_PI_2, -FRAC_PI_3, 1e-3, &ReparkOptions { alpha: AlphaOptions::Fixed(1.0), ..Default::default() })?;
    line("repark (1,5) pi/2 -> -pi/3, alpha = 1", fixed.eps >= 0.5, format!("eps = {:.4} (>= 0.5)", fixed.eps));
    let searched = plan_repark_with(&g, FRAC_PI_2, -FRAC_PI_3, 1e-3, &ReparkOptions::default())?;
    line(
        "repark (1,5) pi/2 -> -pi/3, alpha search",
        searched.eps < 0.05 && searched.eps < fixed.eps,
        format!("eps = {:.3e} (< 0.05), alpha = {:.5} (reference 1.76113)", searched.eps, searched.alpha),
    );

    let park = |lr: f64, lt: f64, q0: [f64; 4], q1: [f64; 4]| -> Result<PlanReport, Fatal> {
        let g = TrailerGeometry::new(lr, lt)?;
        let opts = ParkOptions { tol: 1e-3, max_iter: 20, ..ParkOptions::default() };
        Ok(plan_park_with(&g, &TrailerState::from_raw(q0), &TrailerState::from_raw(q1), &opts)?)
    };
    let r = park(1.0, 4.0, [0.0, 0.0, 0.0, FRAC_PI_3], [-1.0, 1.0, FRAC_PI_2, 0.0])?;
    let first = r.eps_history[0];
    line(
        "park (1,4)",
        first >= 0.5 && r.eps <= 0.05 && r.iterations <= 20,
        format!("first pass {first:.4} (>= 0.5), improved {:.3e} (<= 0.05), {} iterations", r.eps, r.iterations),
    );
    for (name, lr, lt, q0, q1) in [
        ("park (2,3)", 2.0, 3.0, [0.0, 0.0, 0.0, 0.0], [1.0, 0.5, PI, 0.0]),
        ("park (3,2)", 3.0, 2.0, [0.0, 0.0, 0.0, FRAC_PI_2], [1.0, 3.0, PI, 0.0]),
        ("park (0,4)", 0.0, 4.0, [0.0, 0.0, 0.0, FRAC_PI_2], [-3.0, 0.1, FRAC_PI_3, FRAC_PI_2]),
    ] {
        let r = park(lr, lt, q0, q1)?;
        let first = r.eps_history[0];
        line(
            name,
            first / r.eps >= 3.0 && r.eps <= 1.5,
            format!("first pass {first:.3} -> {:.3e} (factor >= 3, improved <= 1.5)", r.eps),
        );
    }
    Ok(all)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HITCHPLAN_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Repark(c) => repark(c),
        Command::Park(c) => park(c),
        Command::SteerEngel { common, target } => steer(common, *target),
        Command::Dubins { common, radius } => dubins(common, *radius),
        Command::Simulate { common, controls } => simulate(common, controls),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

