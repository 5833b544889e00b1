//! Reparking, iterative parking and the Dubins baseline.
//!
//! Both trailer planners work the same way: map the boundary conditions to
//! an Engel target, steer the Engel group exactly, then replay the controls
//! on the real trailer and measure how far from the goal it ends.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::solve_k0;
use crate::engel::{repark_controls, reverse_law, sigma_from_v, steer_engel, FigureEightParams, RescaledLaw, ShootingConfig};
use crate::error::{Error, Result};
use crate::integrate::{integrate, integrate_weighted, ControlLaw, PiecewiseConstantLaw, SharedLaw, System, Trajectory};
use crate::kinematics::{scale_geometry, wrap_angle, TrailerGeometry, TrailerState};
use crate::nilpotent::{engel_target_via_frame, nearest_representative, repark_target};

/// Euclidean distance with both angle differences wrapped.
pub fn config_distance(a: &TrailerState, b: &TrailerState) -> f64 {
    config_distance_raw(&a.to_raw(), &b.to_raw())
}

/// [`config_distance`] on raw `[x, y, theta, phi]` arrays.
pub fn config_distance_raw(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], wrap_angle(a[2] - b[2]), wrap_angle(a[3] - b[3])];
    d.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Converged,
    /// Tolerance not met after the iteration budget.
    MaxIterations,
    /// Neither restart rule improved the error.
    NoImprovement,
    /// The Engel steering problem could not be solved.
    SteeringFailed { best_residual: f64 },
    /// Best reparking maneuver found misses the tolerance.
    ToleranceNotMet,
}

#[derive(Debug, Clone)]
pub struct PlanReport {
    /// Motion of the exact trailer system, raw (unwrapped) angles.
    pub trajectory: Trajectory,
    pub goal: [f64; 4],
    pub eps: f64,
    pub eps_history: Vec<f64>,
    pub iterations: usize,
    /// States where the approximation was recomputed.
    pub restarts: Vec<[f64; 4]>,
    pub alpha: f64,
    pub sr_length: f64,
    pub weighted_length: f64,
    pub constraint_violated: bool,
    pub status: PlanStatus,
}

impl PlanReport {
    pub fn converged(&self) -> bool {
        self.status == PlanStatus::Converged
    }

    fn assemble(
        g: &TrailerGeometry,
        trajectory: Trajectory,
        goal: [f64; 4],
        eps_history: Vec<f64>,
        restarts: Vec<[f64; 4]>,
        status: PlanStatus,
    ) -> Self {
        let eps = config_distance_raw(&trajectory.end(), &goal);
        Self {
            constraint_violated: trajectory.states().iter().any(|q| g.violates(q[3])),
            sr_length: trajectory.sr_length(),
            weighted_length: trajectory.weighted_length(),
            alpha: trajectory.alpha(),
            iterations: eps_history.len().max(1),
            trajectory,
            goal,
            eps,
            eps_history,
            restarts,
            status,
        }
    }
}

// ---------------------------------------------------------------------------
// reparking

/// How the scale `alpha` is chosen for reparking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaOptions {
    Fixed(f64),
    /// Grid `lo, lo + step, ..., hi`, then golden-section refinement around
    /// the best grid point. `alpha = 1` is always evaluated too.
    Search { lo: f64, hi: f64, step: f64 },
}

impl Default for AlphaOptions {
    fn default() -> Self {
        AlphaOptions::Search { lo: 0.25, hi: 3.0, step: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReparkOptions {
    pub alpha: AlphaOptions,
    /// Phases sampled over one cut period before refinement.
    pub scan_points: usize,
    /// RK4 steps per unit time while searching.
    pub scan_steps_per_unit: f64,
    /// RK4 steps per unit time of the reported trajectory.
    pub steps_per_unit: f64,
    pub golden_iterations: usize,
}

impl Default for ReparkOptions {
    fn default() -> Self {
        Self { alpha: AlphaOptions::default(), scan_points: 96, scan_steps_per_unit: 100.0, steps_per_unit: 400.0, golden_iterations: 20 }
    }
}

fn repark_law(sigma: f64, phase: f64, alpha: f64) -> Result<RescaledLaw> {
    let law: SharedLaw = Arc::new(repark_controls(FigureEightParams::new(sigma, phase)?));
    Ok(RescaledLaw::new(law, 1.0, alpha))
}

/// Final hitch angle and car-pose residual of one reparking maneuver.
///
/// The figure-eight controls for `(sigma, phase)` are computed for the
/// geometry scaled by `1 / alpha` and carried back to `g` by the similarity
/// symmetry, i.e. `u1` is multiplied by `alpha`.
pub fn evaluate_phi_map(sigma: f64, phase: f64, g: &TrailerGeometry, phi0: f64, alpha: f64) -> Result<(f64, f64)> {
    evaluate_phi_map_steps(sigma, phase, g, phi0, alpha, ReparkOptions::default().scan_steps_per_unit)
}

fn steps_for(horizon: f64, per_unit: f64) -> usize {
    (horizon * per_unit).ceil().max(200.0) as usize
}

fn evaluate_phi_map_steps(
    sigma: f64,
    phase: f64,
    g: &TrailerGeometry,
    phi0: f64,
    alpha: f64,
    steps_per_unit: f64,
) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let law = repark_law(sigma, phase, alpha)?;
    let steps = steps_for(law.horizon(), steps_per_unit);
    let tr = integrate(&System::Trailer(*g), [0.0, 0.0, 0.0, phi0], &law, steps)?;
    let q = tr.end();
    Ok((q[3], (q[0] * q[0] + q[1] * q[1] + wrap_angle(q[2]).powi(2)).sqrt()))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must be positive, got {alpha}")))
    }
}

/// Best phase for one `alpha`.
#[derive(Debug, Clone, Copy)]
struct ReparkCandidate {
    alpha: f64,
    sigma: f64,
    phase: f64,
    eps: f64,
}

fn sigma_for(g: &TrailerGeometry, phi0: f64, phi1: f64, alpha: f64) -> Result<f64> {
    let target = repark_target(phi0, phi1, &scale_geometry(g, 1.0 / alpha))?;
    sigma_from_v(target.v, solve_k0())
}

fn best_phase(g: &TrailerGeometry, phi0: f64, phi1: f64, alpha: f64, opts: &ReparkOptions) -> Result<ReparkCandidate> {
    let sigma = sigma_for(g, phi0, phi1, alpha)?;
    let t_cut = FigureEightParams::cut_time(sigma)?;
    let n = opts.scan_points.max(4);
    let grid: Vec<f64> = (0..n).map(|i| t_cut * i as f64 / n as f64).collect();
    let miss = |phase: f64| -> Result<f64> {
        let (phi, _) = evaluate_phi_map_steps(sigma, phase, g, phi0, alpha, opts.scan_steps_per_unit)?;
        Ok(wrap_angle(phi - phi1))
    };
    let values: Vec<f64> = grid.par_iter().map(|&p| miss(p)).collect::<Result<_>>()?;

    let mut best = (grid[0], values[0].abs());
    for (p, v) in grid.iter().zip(&values) {
        if v.abs() < best.1 {
            best = (*p, v.abs());
        }
    }
    // roots: sign changes away from the wrap-around jump
    for i in 0..n {
        let j = (i + 1) % n;
        let (fa, fb) = (values[i], values[j]);
        if fa.signum() == fb.signum() || fa.abs() + fb.abs() > 1.0 {
            continue;
        }
        let (mut a, mut b) = (grid[i], if j == 0 { t_cut } else { grid[j] });
        let mut fa = fa;
        for _ in 0..48 {
            let m = 0.5 * (a + b);
            let fm = miss(m.rem_euclid(t_cut))?;
            if fm.abs() < best.1 {
                best = (m.rem_euclid(t_cut), fm.abs());
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
            if b - a < 1e-12 * t_cut {
                break;
            }
        }
    }
    if best.1 > 1e-9 {
        // no root nearby: polish the closest approach
        let h = t_cut / n as f64;
        let (p, e) = golden(|p| miss(p.rem_euclid(t_cut)).map(f64::abs), best.0 - h, best.0 + h, 40)?;
        if e < best.1 {
            best = (p.rem_euclid(t_cut), e);
        }
    }
    Ok(ReparkCandidate { alpha, sigma, phase: best.0, eps: best.1 })
}

/// Golden-section minimization; returns the best point seen.
fn golden(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, iters: usize) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx < best.1 {
                best = (x, fx);
            }
        }
    }
    Ok(best)
}

/// Reparking: the car ends where it started and the hitch angle goes from
/// `phi0` to `phi1`.
pub fn plan_repark(g: &TrailerGeometry, phi0: f64, phi1: f64, tol: f64, alpha: AlphaOptions) -> Result<PlanReport> {
    plan_repark_with(g, phi0, phi1, tol, &ReparkOptions { alpha, ..ReparkOptions::default() })
}

pub fn plan_repark_with(g: &TrailerGeometry, phi0: f64, phi1: f64, tol: f64, opts: &ReparkOptions) -> Result<PlanReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let phi1 = nearest_representative(phi0, phi1);
    if phi1 == phi0 {
        return Err(Error::InvalidInput("reparking needs phi0 != phi1".into()));
    }
    let best = match opts.alpha {
        AlphaOptions::Fixed(a) => {
            check_alpha(a)?;
            best_phase(g, phi0, phi1, a, opts)?
        }
        AlphaOptions::Search { lo, hi, step } => search_alpha(g, phi0, phi1, tol, lo, hi, step, opts)?,
    };
    info!("repark: alpha {:.6} sigma {:.6} phase {:.6} eps {:.3e}", best.alpha, best.sigma, best.phase, best.eps);

    let law = repark_law(best.sigma, best.phase, best.alpha)?;
    let start = [0.0, 0.0, 0.0, phi0];
    let steps = steps_for(law.horizon(), opts.steps_per_unit);
    let traj = integrate_weighted(&System::Trailer(*g), start, &law, steps, best.alpha)?;
    let goal = [0.0, 0.0, 0.0, phi1];
    let eps = config_distance_raw(&traj.end(), &goal);
    let status = if eps <= tol { PlanStatus::Converged } else { PlanStatus::ToleranceNotMet };
    Ok(PlanReport::assemble(g, traj, goal, vec![eps], Vec::new(), status))
}

#[allow(clippy::too_many_arguments)]
fn search_alpha(
    g: &TrailerGeometry,
    phi0: f64,
    phi1: f64,
    tol: f64,
    lo: f64,
    hi: f64,
    step: f64,
    opts: &ReparkOptions,
) -> Result<ReparkCandidate> {
    check_alpha(lo)?;
    if !(hi >= lo && step > 0.0) {
        return Err(Error::InvalidInput(format!("bad alpha range [{lo}, {hi}] step {step}")));
    }
    let unit = best_phase(g, phi0, phi1, 1.0, opts)?;
    debug!("alpha 1: eps {:.3e}", unit.eps);
    if unit.eps <= tol {
        return Ok(unit);
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + step * i as f64).collect();
    let cands: Vec<ReparkCandidate> = grid.par_iter().map(|&a| best_phase(g, phi0, phi1, a, opts)).collect::<Result<_>>()?;
    let mut best = unit;
    for c in &cands {
        debug!("alpha {:.4}: eps {:.3e}", c.alpha, c.eps);
        if c.eps < best.eps {
            best = *c;
        }
    }
    let centre = cands.iter().min_by(|a, b| a.eps.total_cmp(&b.eps)).map(|c| c.alpha).unwrap_or(1.0);
    let mut seen = Vec::new();
    golden(
        |a| {
            let c = best_phase(g, phi0, phi1, a, opts)?;
            seen.push(c);
            Ok(c.eps)
        },
        (centre - step).max(lo),
        (centre + step).min(hi),
        opts.golden_iterations,
    )?;
    for c in seen {
        if c.eps < best.eps {
            best = c;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// parking

/// Where the next approximation starts on the curve just produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartRule {
    #[default]
    Endpoint,
    /// Fraction `beta` in `(0, 1]` of the horizon.
    Fraction(f64),
}

impl RestartRule {
    fn alternative(self) -> Self {
        match self {
            RestartRule::Endpoint => RestartRule::Fraction(0.5),
            RestartRule::Fraction(_) => RestartRule::Endpoint,
        }
    }

    /// Index into `times` (one piece, starting at its own clock) where the
    /// next pass begins; never the first node.
    fn index_on(self, times: &[f64]) -> usize {
        let last = times.len() - 1;
        match self {
            RestartRule::Endpoint => last,
            RestartRule::Fraction(b) => {
                let target = times[0] + b * (times[last] - times[0]);
                times.partition_point(|&t| t < target).clamp(1.min(last), last)
            }
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            RestartRule::Fraction(b) if !(b > 0.0 && b <= 1.0) => {
                Err(Error::InvalidInput(format!("restart fraction must lie in (0, 1], got {b}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for RestartRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestartRule::Endpoint => write!(f, "endpoint"),
            RestartRule::Fraction(b) => write!(f, "fraction:{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParkOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart_rule: RestartRule,
    pub shooting: ShootingConfig,
    /// RK4 steps per unit time on the trailer.
    pub steps_per_unit: f64,
}

impl Default for ParkOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 20,
            restart_rule: RestartRule::Endpoint,
            shooting: ShootingConfig::default(),
            steps_per_unit: 400.0,
        }
    }
}

pub fn plan_park(
    g: &TrailerGeometry,
    q0: &TrailerState,
    q1: &TrailerState,
    tol: f64,
    max_iter: usize,
    restart_rule: RestartRule,
) -> Result<PlanReport> {
    plan_park_with(g, q0, q1, &ParkOptions { tol, max_iter, restart_rule, ..ParkOptions::default() })
}

/// One approximation pass from `start`: the Engel target is steered to the
/// origin and the reversed extremal is replayed on the trailer.
fn approximate_from(g: &TrailerGeometry, start: [f64; 4], q1: &[f64; 4], opts: &ParkOptions) -> Result<Trajectory> {
    let goal = [q1[0], q1[1], nearest_representative(start[2], q1[2]), nearest_representative(start[3], q1[3])];
    let target = engel_target_via_frame(&start, &goal, g)?;
    let steer = steer_engel(target, &opts.shooting)?;
    let law = reverse_law(steer.law.clone() as SharedLaw);
    integrate(&System::Trailer(*g), start, &law, steps_for(law.horizon(), opts.steps_per_unit))
}

/// Iterative parking from `q0` to `q1`.
///
/// A restart is committed only when it lowers the error; otherwise the
/// alternative rule is tried once and the loop stops if that fails too.
pub fn plan_park_with(g: &TrailerGeometry, q0: &TrailerState, q1: &TrailerState, opts: &ParkOptions) -> Result<PlanReport> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tol must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be at least 1".into()));
    }
    opts.restart_rule.validate()?;
    let (start, goal) = (q0.to_raw(), q1.to_raw());
    let mut committed = Trajectory::stationary(start);
    let mut eps = config_distance_raw(&start, &goal);
    if eps == 0.0 {
        return Ok(PlanReport::assemble(g, committed, goal, vec![0.0], Vec::new(), PlanStatus::Converged));
    }

    let mut history = Vec::new();
    let mut restarts = Vec::new();
    // index in `committed` where the latest piece begins
    let mut piece_offset: Option<usize> = None;
    let status = loop {
        if history.len() >= opts.max_iter {
            break PlanStatus::MaxIterations;
        }
        let rules: Vec<Option<RestartRule>> = match piece_offset {
            None => vec![None],
            Some(_) => vec![Some(opts.restart_rule), Some(opts.restart_rule.alternative())],
        };
        let mut accepted = None;
        let mut failure = None;
        for rule in rules {
            let mut base = committed.clone();
            if let (Some(rule), Some(off)) = (rule, piece_offset) {
                base.truncate_at(off + rule.index_on(&committed.times()[off..]));
            }
            let from = base.end();
            match approximate_from(g, from, &goal, opts) {
                Ok(piece) => {
                    let e = config_distance_raw(&piece.end(), &goal);
                    debug!("park: rule {rule:?} from {from:?} -> eps {e:.4e}");
                    if piece_offset.is_none() || e < eps {
                        accepted = Some((base, piece, e, rule.is_some()));
                        break;
                    }
                }
                Err(Error::SteeringFailed { best_residual, .. }) => {
                    debug!("park: steering failed from {from:?}, residual {best_residual:.3e}");
                    failure = Some(best_residual);
                }
                Err(e) => return Err(e),
            }
        }
        let Some((base, piece, e, is_restart)) = accepted else {
            break match failure {
                Some(best_residual) => PlanStatus::SteeringFailed { best_residual },
                None => PlanStatus::NoImprovement,
            };
        };
        if is_restart {
            restarts.push(base.end());
        }
        piece_offset = Some(if base.is_stationary() { 0 } else { base.len() });
        committed = base;
        committed.append(&piece);
        eps = e;
        history.push(e);
        info!("park: iteration {} eps {:.4e}", history.len(), e);
        if e <= opts.tol {
            break PlanStatus::Converged;
        }
    };
    if history.is_empty() {
        history.push(eps);
    }
    Ok(PlanReport::assemble(g, committed, goal, history, restarts, status))
}

// ---------------------------------------------------------------------------
// Dubins

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DubinsWord {
    LSL,
    LSR,
    RSL,
    RSR,
    RLR,
    LRL,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] =
        [DubinsWord::LSL, DubinsWord::LSR, DubinsWord::RSL, DubinsWord::RSR, DubinsWord::RLR, DubinsWord::LRL];

    /// Turn direction per segment: +1 left, -1 right, 0 straight.
    pub fn turns(self) -> [f64; 3] {
        match self {
            DubinsWord::LSL => [1.0, 0.0, 1.0],
            DubinsWord::LSR => [1.0, 0.0, -1.0],
            DubinsWord::RSL => [-1.0, 0.0, 1.0],
            DubinsWord::RSR => [-1.0, 0.0, -1.0],
            DubinsWord::RLR => [-1.0, 1.0, -1.0],
            DubinsWord::LRL => [1.0, -1.0, 1.0],
        }
    }
}

impl fmt::Display for DubinsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath {
    pub word: DubinsWord,
    /// Arc lengths of the three segments.
    pub segments: [f64; 3],
    pub radius: f64,
}

impl DubinsPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().sum()
    }

    /// Unit-speed controls `(1, turn / R)`; `None` for a zero-length path.
    pub fn control_law(&self) -> Option<PiecewiseConstantLaw> {
        let turns = self.word.turns();
        PiecewiseConstantLaw::new(self.segments.iter().zip(turns).map(|(&s, k)| (s, (1.0, k / self.radius)))).ok()
    }

    /// Pose after arc length `s` from `start`.
    pub fn sample(&self, start: (f64, f64, f64), s: f64) -> (f64, f64, f64) {
        let (mut x, mut y, mut th) = start;
        let mut left = s.clamp(0.0, self.length());
        for (len, k) in self.segments.iter().zip(self.word.turns()) {
            let d = left.min(*len);
            left -= d;
            if k == 0.0 {
                x += d * th.cos();
                y += d * th.sin();
            } else {
                let r = self.radius * k;
                let th2 = th + d / r;
                x += r * (th2.sin() - th.sin());
                y -= r * (th2.cos() - th.cos());
                th = th2;
            }
        }
        (x, y, wrap_angle(th))
    }
}

fn mod2pi(a: f64) -> f64 {
    let m = a.rem_euclid(TAU);
    if TAU - m < 1e-12 {
        0.0
    } else {
        m
    }
}

/// Normalized segment parameters of one word, or `None` when infeasible.
fn dubins_word(word: DubinsWord, a: f64, b: f64, d: f64) -> Option<[f64; 3]> {
    let (sa, ca, sb, cb) = (a.sin(), a.cos(), b.sin(), b.cos());
    let cab = (a - b).cos();
    match word {
        DubinsWord::LSL => {
            let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
            if p2 < 0.0 {
                return None;
            }
            let th = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(th - a), p2.sqrt(), mod2pi(b - th)])
        }
        DubinsWord::RSR => {
            let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
            if p2 < 0.0 {
                return None;
            }
            let th = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(a - th), p2.sqrt(), mod2pi(th - b)])
        }
        DubinsWord::LSR => {
            let p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
            if p2 < 0.0 {
                return None;
            }
            let p = p2.sqrt();
            let th = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(th - a), p, mod2pi(th - b)])
        }
        DubinsWord::RSL => {
            let p2 = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb);
            if p2 < 0.0 {
                return None;
            }
            let p = p2.sqrt();
            let th = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(a - th), p, mod2pi(b - th)])
        }
        DubinsWord::RLR => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
            if c.abs() > 1.0 {
                return None;
            }
            let th = (ca - cb).atan2(d - sa + sb);
            let p = mod2pi(TAU - c.acos());
            let t = mod2pi(a - th + p / 2.0);
            Some([t, p, mod2pi(a - b - t + p)])
        }
        DubinsWord::LRL => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
            if c.abs() > 1.0 {
                return None;
            }
            let th = (ca - cb).atan2(d + sa - sb);
            let p = mod2pi(TAU - c.acos());
            let t = mod2pi(-a - th + p / 2.0);
            Some([t, p, mod2pi(b - a - t + p)])
        }
    }
}

/// Shortest forward-only path with turning radius `radius` between two
/// poses `(x, y, theta)`.
pub fn dubins_shortest(start: (f64, f64, f64), goal: (f64, f64, f64), radius: f64) -> Result<DubinsPath> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!("turning radius must be positive, got {radius}")));
    }
    let (dx, dy) = (goal.0 - start.0, goal.1 - start.1);
    let d = dx.hypot(dy) / radius;
    let phi = if d > 0.0 { dy.atan2(dx) } else { 0.0 };
    let a = mod2pi(start.2 - phi);
    let b = mod2pi(goal.2 - phi);
    DubinsWord::ALL
        .iter()
        .filter_map(|&w| dubins_word(w, a, b, d).map(|s| (w, s)))
        .map(|(word, s)| DubinsPath { word, segments: s.map(|x| x * radius), radius })
        .min_by(|p, q| p.length().total_cmp(&q.length()))
        .ok_or_else(|| Error::Domain("no Dubins word is feasible".into()))
}
