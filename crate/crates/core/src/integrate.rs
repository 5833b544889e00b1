//! Fixed-step RK4 integration of driftless control-affine systems
//! `q' = u1 X1(q) + u2 X2(q)` under a time-varying control law.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kinematics::{x1_raw, x2_raw, TrailerGeometry};

/// A control `(u1, u2)` defined on `[0, horizon]`.
///
/// `eval` must be total on the closed horizon: the integrator queries stage
/// times between grid nodes and at both ends.
pub trait ControlLaw: Send + Sync + fmt::Debug {
    fn horizon(&self) -> f64;

    fn eval(&self, t: f64) -> (f64, f64);

    /// Interior times where the law may jump. Integration puts grid nodes on
    /// them and integrates each piece separately.
    fn switch_times(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Value on the piece `[lo, hi]`, taking one-sided limits at its ends.
    fn eval_within(&self, t: f64, lo: f64, hi: f64) -> (f64, f64) {
        self.eval(t.clamp(lo, hi))
    }
}

pub type SharedLaw = Arc<dyn ControlLaw>;

impl<L: ControlLaw + ?Sized> ControlLaw for Arc<L> {
    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
    fn eval(&self, t: f64) -> (f64, f64) {
        (**self).eval(t)
    }
    fn switch_times(&self) -> Vec<f64> {
        (**self).switch_times()
    }
    fn eval_within(&self, t: f64, lo: f64, hi: f64) -> (f64, f64) {
        (**self).eval_within(t, lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLaw {
    pub horizon: f64,
    pub u: (f64, f64),
}

impl ControlLaw for ConstantLaw {
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn eval(&self, _t: f64) -> (f64, f64) {
        self.u
    }
}

/// Sequence of constant controls held for the given durations.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantLaw {
    pieces: Vec<(f64, (f64, f64))>,
}

impl PiecewiseConstantLaw {
    /// Zero-length pieces are dropped.
    pub fn new(pieces: impl IntoIterator<Item = (f64, (f64, f64))>) -> Result<Self> {
        let pieces: Vec<_> = pieces.into_iter().filter(|(d, _)| *d != 0.0).collect();
        if pieces.iter().any(|(d, _)| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidInput("piece durations must be positive".into()));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidInput("piecewise law needs at least one piece".into()));
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[(f64, (f64, f64))] {
        &self.pieces
    }

    fn piece_at(&self, t: f64) -> (f64, f64) {
        let mut end = 0.0;
        for (d, u) in &self.pieces {
            end += d;
            if t < end {
                return *u;
            }
        }
        self.pieces.last().map(|p| p.1).unwrap_or((0.0, 0.0))
    }
}

impl ControlLaw for PiecewiseConstantLaw {
    fn horizon(&self) -> f64 {
        self.pieces.iter().map(|p| p.0).sum()
    }
    fn eval(&self, t: f64) -> (f64, f64) {
        self.piece_at(t)
    }
    fn switch_times(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let n = self.pieces.len();
        self.pieces[..n - 1]
            .iter()
            .map(|(d, _)| {
                acc += d;
                acc
            })
            .collect()
    }
    fn eval_within(&self, _t: f64, lo: f64, hi: f64) -> (f64, f64) {
        self.piece_at(0.5 * (lo + hi))
    }
}

/// Closure-backed law, handy for tests and ad-hoc steering.
pub struct FnLaw<F> {
    horizon: f64,
    f: F,
}

impl<F: Fn(f64) -> (f64, f64) + Send + Sync> FnLaw<F> {
    pub fn new(horizon: f64, f: F) -> Self {
        Self { horizon, f }
    }
}

impl<F> fmt::Debug for FnLaw<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnLaw").field("horizon", &self.horizon).finish_non_exhaustive()
    }
}

impl<F: Fn(f64) -> (f64, f64) + Send + Sync> ControlLaw for FnLaw<F> {
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn eval(&self, t: f64) -> (f64, f64) {
        (self.f)(t)
    }
}

/// A law reconstructed from node samples, e.g. a stored trajectory.
///
/// Samples are grouped into segments; inside a segment the controls are
/// interpolated by cubic Lagrange polynomials through the four nearest nodes.
/// Segment boundaries are switch times.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLaw {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    t: Vec<f64>,
    u: Vec<(f64, f64)>,
}

impl SampledLaw {
    /// Builds from rows `(t, u1, u2)`. Rows must be non-decreasing in time; a
    /// repeated time starts a new segment.
    pub fn from_samples(rows: &[(f64, f64, f64)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidInput("sampled law needs at least two rows".into()));
        }
        if rows[0].0 != 0.0 {
            return Err(Error::InvalidInput("sampled law must start at t = 0".into()));
        }
        let mut segments = vec![Segment { t: vec![], u: vec![] }];
        for (i, &(t, u1, u2)) in rows.iter().enumerate() {
            if ![t, u1, u2].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite sample in row {i}")));
            }
            let seg = segments.last_mut().expect("non-empty");
            match seg.t.last() {
                Some(&prev) if t < prev => {
                    return Err(Error::InvalidInput(format!("time decreases at row {i}")));
                }
                Some(&prev) if t == prev => {
                    segments.push(Segment { t: vec![t], u: vec![(u1, u2)] });
                }
                _ => {
                    seg.t.push(t);
                    seg.u.push((u1, u2));
                }
            }
        }
        if segments.iter().any(|s| s.t.len() < 2) {
            return Err(Error::InvalidInput("every segment needs at least two nodes".into()));
        }
        Ok(Self { segments })
    }

    /// The node grid of every segment, as used for re-integration.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        self.segments.iter().map(|s| s.t.clone()).collect()
    }

    fn segment_for(&self, lo: f64, hi: f64) -> &Segment {
        let mid = 0.5 * (lo + hi);
        self.segments
            .iter()
            .find(|s| mid <= *s.t.last().expect("non-empty"))
            .unwrap_or_else(|| self.segments.last().expect("non-empty"))
    }
}

fn lagrange_cubic(ts: &[f64], us: &[(f64, f64)], t: f64) -> (f64, f64) {
    let n = ts.len();
    let pos = ts.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
    let width = n.min(4);
    let start = pos.saturating_sub(1).min(n - width);
    let idx = start..start + width;
    let (mut a, mut b) = (0.0, 0.0);
    for i in idx.clone() {
        let mut w = 1.0;
        for j in idx.clone() {
            if i != j {
                w *= (t - ts[j]) / (ts[i] - ts[j]);
            }
        }
        a += w * us[i].0;
        b += w * us[i].1;
    }
    (a, b)
}

impl ControlLaw for SampledLaw {
    fn horizon(&self) -> f64 {
        *self.segments.last().and_then(|s| s.t.last()).expect("non-empty")
    }
    fn eval(&self, t: f64) -> (f64, f64) {
        self.eval_within(t, t, t)
    }
    fn switch_times(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.t[0]).collect()
    }
    fn eval_within(&self, t: f64, lo: f64, hi: f64) -> (f64, f64) {
        let seg = self.segment_for(lo, hi);
        lagrange_cubic(&seg.t, &seg.u, t)
    }
}

/// Which driftless system to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    Trailer(TrailerGeometry),
    Engel,
}

impl System {
    pub fn velocity(&self, q: &[f64; 4], u: (f64, f64)) -> [f64; 4] {
        match self {
            System::Trailer(g) => {
                let a = x1_raw(q, g);
                let b = x2_raw(q, g);
                std::array::from_fn(|i| u.0 * a[i] + u.1 * b[i])
            }
            System::Engel => {
                let (x, y) = (q[0], q[1]);
                [u.0, u.1, 0.5 * (x * u.1 - y * u.0), 0.5 * (x * x + y * y) * u.1]
            }
        }
    }
}

/// Sampled solution of a controlled system.
///
/// Time is strictly increasing inside each segment. Consecutive segments
/// share their boundary time and state but carry the right-limit control of
/// the new segment, so a boundary appears as two nodes with equal `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<[f64; 4]>,
    controls: Vec<(f64, f64)>,
    sr_length: Vec<f64>,
    weighted_length: Vec<f64>,
    segment_starts: Vec<usize>,
    alpha: f64,
}

impl Trajectory {
    /// Zero-duration trajectory resting at `q`.
    pub fn stationary(q: [f64; 4]) -> Self {
        Self {
            times: vec![0.0],
            states: vec![q],
            controls: vec![(0.0, 0.0)],
            sr_length: vec![0.0],
            weighted_length: vec![0.0],
            segment_starts: vec![0],
            alpha: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; 4]] {
        &self.states
    }

    pub fn controls(&self) -> &[(f64, f64)] {
        &self.controls
    }

    /// Cumulative sub-Riemannian length per node.
    pub fn cumulative_sr_length(&self) -> &[f64] {
        &self.sr_length
    }

    pub fn cumulative_weighted_length(&self) -> &[f64] {
        &self.weighted_length
    }

    pub fn segment_starts(&self) -> &[usize] {
        &self.segment_starts
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn start(&self) -> [f64; 4] {
        self.states[0]
    }

    pub fn end(&self) -> [f64; 4] {
        *self.states.last().expect("trajectory has at least one node")
    }

    /// Integral of `sqrt(u1² + u2²)`.
    pub fn sr_length(&self) -> f64 {
        self.sr_length.last().copied().unwrap_or(0.0)
    }

    /// Integral of `sqrt(u1² + alpha² u2²)`.
    pub fn weighted_length(&self) -> f64 {
        self.weighted_length.last().copied().unwrap_or(0.0)
    }

    /// True when the trajectory never moved.
    pub fn is_stationary(&self) -> bool {
        self.len() == 1
    }

    /// Appends `next`, shifting its clock to start at this trajectory's end.
    /// The first node of `next` is kept as a segment boundary.
    pub fn append(&mut self, next: &Trajectory) {
        if next.is_stationary() {
            return;
        }
        if self.is_stationary() {
            let q = self.start();
            *self = next.clone();
            self.states[0] = q;
            return;
        }
        let t0 = self.duration();
        let l0 = self.sr_length();
        let w0 = self.weighted_length();
        let base = self.len();
        self.segment_starts.extend(next.segment_starts.iter().map(|s| s + base));
        self.times.extend(next.times.iter().map(|t| t + t0));
        self.states.extend_from_slice(&next.states);
        self.controls.extend_from_slice(&next.controls);
        self.sr_length.extend(next.sr_length.iter().map(|l| l + l0));
        self.weighted_length.extend(next.weighted_length.iter().map(|l| l + w0));
    }

    /// Keeps nodes `0..=index`.
    pub fn truncate_at(&mut self, index: usize) {
        let n = index + 1;
        self.times.truncate(n);
        self.states.truncate(n);
        self.controls.truncate(n);
        self.sr_length.truncate(n);
        self.weighted_length.truncate(n);
        self.segment_starts.retain(|&s| s < n);
        // a boundary node kept as the last node carries no following segment
        if self.segment_starts.last() == Some(&index) && index > 0 {
            self.segment_starts.pop();
            self.controls[index] = self.controls[index - 1];
        }
    }

    /// Grid node closest to `fraction` of the duration, never the first node.
    pub fn index_at_fraction(&self, fraction: f64) -> usize {
        let target = fraction.clamp(0.0, 1.0) * self.duration();
        let i = self.times.partition_point(|&t| t < target);
        i.clamp(1.min(self.len() - 1), self.len() - 1)
    }

    /// Stored controls as a law that re-integrates on the same grid.
    pub fn control_law(&self) -> Result<SampledLaw> {
        let rows: Vec<_> =
            self.times.iter().zip(&self.controls).map(|(t, u)| (*t, u.0, u.1)).collect();
        SampledLaw::from_samples(&rows)
    }
}

/// Integrates `system` from `q0` under `law` with `steps` RK4 steps in total.
pub fn integrate(system: &System, q0: [f64; 4], law: &dyn ControlLaw, steps: usize) -> Result<Trajectory> {
    integrate_weighted(system, q0, law, steps, 1.0)
}

/// As [`integrate`], with weight `alpha` on `u2` in the accumulated
/// weighted length.
pub fn integrate_weighted(
    system: &System,
    q0: [f64; 4],
    law: &dyn ControlLaw,
    steps: usize,
    alpha: f64,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    let t1 = law.horizon();
    if !(t1.is_finite() && t1 > 0.0) {
        return Err(Error::InvalidInput(format!("control horizon must be positive and finite, got {t1}")));
    }
    let mut cuts = vec![0.0];
    cuts.extend(law.switch_times().into_iter().filter(|&s| s > 0.0 && s < t1));
    cuts.push(t1);
    let grids: Vec<Vec<f64>> = cuts
        .windows(2)
        .map(|w| {
            let n = ((steps as f64) * (w[1] - w[0]) / t1).round().max(1.0) as usize;
            (0..=n).map(|i| if i == n { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / n as f64 }).collect()
        })
        .collect();
    integrate_on_grid(system, q0, law, &grids, alpha)
}

/// Re-integrates a [`SampledLaw`] on its own node grid.
pub fn resimulate(system: &System, q0: [f64; 4], law: &SampledLaw, alpha: f64) -> Result<Trajectory> {
    integrate_on_grid(system, q0, law, &law.grid(), alpha)
}

fn integrate_on_grid(
    system: &System,
    q0: [f64; 4],
    law: &dyn ControlLaw,
    grids: &[Vec<f64>],
    alpha: f64,
) -> Result<Trajectory> {
    let total: usize = grids.iter().map(Vec::len).sum();
    let mut traj = Trajectory {
        times: Vec::with_capacity(total),
        states: Vec::with_capacity(total),
        controls: Vec::with_capacity(total),
        sr_length: Vec::with_capacity(total),
        weighted_length: Vec::with_capacity(total),
        segment_starts: Vec::with_capacity(grids.len()),
        alpha,
    };
    let norm = |u: (f64, f64)| (u.0.hypot(u.1), u.0.hypot(alpha * u.1));
    let mut q = q0;
    let (mut len, mut wlen) = (0.0, 0.0);
    for grid in grids {
        let (lo, hi) = (grid[0], *grid.last().expect("grid has nodes"));
        let u_at = |t: f64| law.eval_within(t, lo, hi);
        traj.segment_starts.push(traj.times.len());
        let mut u_prev = u_at(lo);
        traj.times.push(lo);
        traj.states.push(q);
        traj.controls.push(u_prev);
        traj.sr_length.push(len);
        traj.weighted_length.push(wlen);
        for w in grid.windows(2) {
            let (t, h) = (w[0], w[1] - w[0]);
            let u_mid = u_at(t + 0.5 * h);
            let u_end = u_at(w[1]);
            let k1 = system.velocity(&q, u_prev);
            let k2 = system.velocity(&std::array::from_fn(|i| q[i] + 0.5 * h * k1[i]), u_mid);
            let k3 = system.velocity(&std::array::from_fn(|i| q[i] + 0.5 * h * k2[i]), u_mid);
            let k4 = system.velocity(&std::array::from_fn(|i| q[i] + h * k3[i]), u_end);
            let next: [f64; 4] =
                std::array::from_fn(|i| q[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
            if next.iter().any(|c| !c.is_finite()) {
                return Err(Error::IntegrationDiverged { last_valid: traj.times.len() - 1 });
            }
            let (n0, w0) = norm(u_prev);
            let (n1, w1) = norm(u_end);
            len += 0.5 * h * (n0 + n1);
            wlen += 0.5 * h * (w0 + w1);
            q = next;
            u_prev = u_end;
            traj.times.push(w[1]);
            traj.states.push(q);
            traj.controls.push(u_end);
            traj.sr_length.push(len);
            traj.weighted_length.push(wlen);
        }
    }
    Ok(traj)
}

/// Empirical order of accuracy from endpoints at `n`, `2n` and `4n` steps.
///
/// Returns `log2(|y_n - y_2n| / |y_2n - y_4n|)`; meaningless once both
/// differences reach round-off.
pub fn convergence_order(system: &System, q0: [f64; 4], law: &dyn ControlLaw, n: usize) -> Result<f64> {
    let end = |steps| integrate(system, q0, law, steps).map(|t| t.end());
    let (a, b, c) = (end(n)?, end(2 * n)?, end(4 * n)?);
    let dist = |p: [f64; 4], q: [f64; 4]| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    Ok((dist(a, b) / dist(b, c)).log2())
}
