//! Steering on the Engel group.
//!
//! Two routes lead from the origin to a target `(x~, y~, z, v)`:
//!
//! * targets on the `v` axis are reached by the closed figure-eight controls
//!   built from Jacobi functions with modulus `k0` ([`repark_controls`]);
//! * every other target is reached by shooting normal extremals of the
//!   sub-Riemannian problem ([`steer_engel`]).
//!
//! The normal Hamiltonian flow is written in the angle form
//! `h1 + i h2 = r e^{i gamma}`, `gamma' = h3`, `h3' = r h4 cos gamma`, `h4' = 0`,
//! so `h1² + h2²` and `h4` are preserved exactly by construction.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{jacobi_sn_cn_dn, solve_k0, Modulus};
use crate::error::{domain, Error, Result};
use crate::integrate::{integrate, ControlLaw, SharedLaw, System};
use crate::kinematics::{wrap_angle, EngelPoint};

/// Parameters of one figure-eight reparking extremal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureEightParams {
    sigma: f64,
    phase: f64,
    k0: Modulus,
}

impl FigureEightParams {
    /// `phase` must lie in `[0, t_cut)`.
    pub fn new(sigma: f64, phase: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma != 0.0) {
            return domain(format!("sigma must be finite and non-zero, got {sigma}"));
        }
        let k0 = solve_k0();
        let t_cut = 4.0 * k0.complete_k() / sigma.abs();
        if !(phase >= 0.0 && phase < t_cut) {
            return domain(format!("phase {phase} outside [0, {t_cut})"));
        }
        Ok(Self { sigma, phase, k0 })
    }

    /// Phase given as a fraction of the cut time, wrapped into `[0, 1)`.
    pub fn with_phase_fraction(sigma: f64, fraction: f64) -> Result<Self> {
        let t_cut = Self::cut_time(sigma)?;
        let f = fraction.rem_euclid(1.0);
        Self::new(sigma, (f * t_cut).min(t_cut * (1.0 - f64::EPSILON)))
    }

    /// `4 K(k0) / |sigma|`.
    pub fn cut_time(sigma: f64) -> Result<f64> {
        if !(sigma.is_finite() && sigma != 0.0) {
            return domain(format!("sigma must be finite and non-zero, got {sigma}"));
        }
        Ok(4.0 * solve_k0().complete_k() / sigma.abs())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn phase(&self) -> f64 {
        self.phase
    }
    pub fn k0(&self) -> Modulus {
        self.k0
    }
    pub fn t_cut(&self) -> f64 {
        4.0 * self.k0.complete_k() / self.sigma.abs()
    }
}

/// Elliptic reparking controls. Applied from `(0, 0, 0, 8E(k0)/(3 sigma³))`
/// they return to the Engel origin at `t_cut`; equivalently they carry the
/// origin to `(0, 0, 0, -8E(k0)/(3 sigma³))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureEightLaw {
    params: FigureEightParams,
    t_cut: f64,
}

impl ControlLaw for FigureEightLaw {
    fn horizon(&self) -> f64 {
        self.t_cut
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let p = &self.params;
        let s = p.sigma.signum();
        let k = p.k0.value();
        let arg = p.sigma.abs() * (p.phase + self.t_cut - t);
        let j = jacobi_sn_cn_dn(arg, p.k0);
        (s * 2.0 * k * j.sn * j.dn, -s * (2.0 * j.dn * j.dn - 1.0))
    }
}

impl FigureEightLaw {
    pub fn params(&self) -> &FigureEightParams {
        &self.params
    }
}

pub fn repark_controls(p: FigureEightParams) -> FigureEightLaw {
    FigureEightLaw { params: p, t_cut: p.t_cut() }
}

/// `v` coordinate reached by the figure-eight extremal with scale `sigma`.
pub fn figure_eight_v(sigma: f64) -> f64 {
    8.0 * solve_k0().complete_e() / (3.0 * sigma.powi(3))
}

/// Signed real cube root of `8E(k0) / (3 v1)`.
pub fn sigma_from_v(v1: f64, k0: Modulus) -> Result<f64> {
    if !(v1.is_finite() && v1 != 0.0) {
        return domain(format!("v1 must be finite and non-zero, got {v1}"));
    }
    Ok((8.0 * k0.complete_e() / (3.0 * v1)).cbrt())
}

/// Time reversal: `u'(t) = -u(T - t)`. Steers the endpoint back to the start.
#[derive(Debug, Clone)]
pub struct ReversedLaw {
    inner: SharedLaw,
}

impl ControlLaw for ReversedLaw {
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }
    fn eval(&self, t: f64) -> (f64, f64) {
        let (a, b) = self.inner.eval(self.inner.horizon() - t);
        (-a, -b)
    }
    fn switch_times(&self) -> Vec<f64> {
        let h = self.inner.horizon();
        let mut s: Vec<f64> = self.inner.switch_times().into_iter().map(|t| h - t).collect();
        s.reverse();
        s
    }
    fn eval_within(&self, t: f64, lo: f64, hi: f64) -> (f64, f64) {
        let h = self.inner.horizon();
        let (a, b) = self.inner.eval_within(h - t, h - hi, h - lo);
        (-a, -b)
    }
}

impl ReversedLaw {
    pub fn inner(&self) -> &SharedLaw {
        &self.inner
    }
}

pub fn reverse_law(law: SharedLaw) -> ReversedLaw {
    ReversedLaw { inner: law }
}

/// Reparametrized law `(c u1(t / s), u2(t / s))` on `[0, s T]`.
///
/// With `s` = 1 it transports controls through the similarity symmetry of the
/// trailer (`c` = 1/mu); with `c` = 1 it is the Engel dilation by `s`.
#[derive(Debug, Clone)]
pub struct RescaledLaw {
    inner: SharedLaw,
    time_scale: f64,
    u1_scale: f64,
}

impl RescaledLaw {
    pub fn new(inner: SharedLaw, time_scale: f64, u1_scale: f64) -> Self {
        Self { inner, time_scale, u1_scale }
    }
}

impl ControlLaw for RescaledLaw {
    fn horizon(&self) -> f64 {
        self.time_scale * self.inner.horizon()
    }
    fn eval(&self, t: f64) -> (f64, f64) {
        let (a, b) = self.inner.eval(t / self.time_scale);
        (self.u1_scale * a, b)
    }
    fn switch_times(&self) -> Vec<f64> {
        self.inner.switch_times().into_iter().map(|t| t * self.time_scale).collect()
    }
    fn eval_within(&self, t: f64, lo: f64, hi: f64) -> (f64, f64) {
        let s = self.time_scale;
        let (a, b) = self.inner.eval_within(t / s, lo / s, hi / s);
        (self.u1_scale * a, b)
    }
}

/// Costate components dual to the frame `X1, X2, [X1,X2], [X1,[X1,X2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covector4 {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
}

impl Covector4 {
    /// Unit covector with `(h1, h2) = (cos gamma, sin gamma)`.
    pub fn from_angle(gamma: f64, h3: f64, h4: f64) -> Self {
        let (s, c) = gamma.sin_cos();
        Self { h1: c, h2: s, h3, h4 }
    }
}

/// Joint state of the normal Hamiltonian system in angle form.
#[derive(Debug, Clone, Copy)]
struct Flow {
    q: [f64; 4],
    gamma: f64,
    h3: f64,
}

#[inline]
fn flow_rhs(s: &Flow, r: f64, h4: f64) -> Flow {
    let (sg, cg) = s.gamma.sin_cos();
    let (u1, u2) = (r * cg, r * sg);
    let (x, y) = (s.q[0], s.q[1]);
    Flow {
        q: [u1, u2, 0.5 * (x * u2 - y * u1), 0.5 * (x * x + y * y) * u2],
        gamma: s.h3,
        h3: u1 * h4,
    }
}

#[inline]
fn flow_axpy(s: &Flow, h: f64, d: &Flow) -> Flow {
    Flow {
        q: std::array::from_fn(|i| s.q[i] + h * d.q[i]),
        gamma: s.gamma + h * d.gamma,
        h3: s.h3 + h * d.h3,
    }
}

fn flow_rk4(mut s: Flow, r: f64, h4: f64, t1: f64, steps: usize) -> Flow {
    let h = t1 / steps as f64;
    for _ in 0..steps {
        let k1 = flow_rhs(&s, r, h4);
        let k2 = flow_rhs(&flow_axpy(&s, 0.5 * h, &k1), r, h4);
        let k3 = flow_rhs(&flow_axpy(&s, 0.5 * h, &k2), r, h4);
        let k4 = flow_rhs(&flow_axpy(&s, h, &k3), r, h4);
        s = Flow {
            q: std::array::from_fn(|i| s.q[i] + h / 6.0 * (k1.q[i] + 2.0 * k2.q[i] + 2.0 * k3.q[i] + k4.q[i])),
            gamma: s.gamma + h / 6.0 * (k1.gamma + 2.0 * k2.gamma + 2.0 * k3.gamma + k4.gamma),
            h3: s.h3 + h / 6.0 * (k1.h3 + 2.0 * k2.h3 + 2.0 * k3.h3 + k4.h3),
        };
    }
    s
}

/// Integrates the normal extremal from the origin with initial covector `h0`
/// for time `t1`, returning the joint endpoint.
pub fn hamiltonian_flow(h0: Covector4, t1: f64, steps: usize) -> Result<(EngelPoint, Covector4)> {
    if steps == 0 || !(t1.is_finite() && t1 >= 0.0) {
        return Err(Error::InvalidInput("hamiltonian_flow needs steps >= 1 and finite t1 >= 0".into()));
    }
    let r = h0.h1.hypot(h0.h2);
    let start = Flow { q: [0.0; 4], gamma: h0.h2.atan2(h0.h1), h3: h0.h3 };
    let end = flow_rk4(start, r, h0.h4, t1, steps);
    if end.q.iter().chain([&end.gamma, &end.h3]).any(|c| !c.is_finite()) {
        return Err(Error::IntegrationDiverged { last_valid: 0 });
    }
    let (s, c) = end.gamma.sin_cos();
    Ok((EngelPoint::from_array(end.q), Covector4 { h1: r * c, h2: r * s, h3: end.h3, h4: h0.h4 }))
}

/// Arclength-parametrized normal extremal, `u = (cos gamma(t), sin gamma(t))`.
///
/// `gamma` is tabulated once and evaluated by quintic Hermite interpolation
/// using `gamma' = h3` and `gamma'' = h4 cos gamma`, so the control norm is
/// exactly one.
#[derive(Clone)]
pub struct ExtremalLaw {
    covector: Covector4,
    horizon: f64,
    /// Engel dilation applied on top of the tabulated unit-scale extremal.
    scale: f64,
    dt: f64,
    gamma: Vec<f64>,
    h3: Vec<f64>,
}

impl fmt::Debug for ExtremalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtremalLaw")
            .field("covector", &self.covector)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

const TABLE_NODES_PER_UNIT: f64 = 400.0;

impl ExtremalLaw {
    /// Extremal with initial covector `(cos gamma0, sin gamma0, h3, h4)` run
    /// for `t1`, then dilated by `scale`.
    fn tabulate(gamma0: f64, h3: f64, h4: f64, t1: f64, scale: f64) -> Self {
        let n = ((t1 * TABLE_NODES_PER_UNIT).ceil() as usize).max(64);
        let dt = t1 / n as f64;
        let mut gamma = Vec::with_capacity(n + 1);
        let mut h3s = Vec::with_capacity(n + 1);
        let mut s = Flow { q: [0.0; 4], gamma: gamma0, h3 };
        gamma.push(s.gamma);
        h3s.push(s.h3);
        for _ in 0..n {
            s = flow_rk4(s, 1.0, h4, dt, 1);
            gamma.push(s.gamma);
            h3s.push(s.h3);
        }
        Self {
            covector: Covector4::from_angle(gamma0, h3 / scale, h4 / (scale * scale)),
            horizon: t1 * scale,
            scale,
            dt,
            gamma,
            h3: h3s,
        }
    }

    /// Initial covector in the target's own scale.
    pub fn covector(&self) -> Covector4 {
        self.covector
    }

    fn gamma_at(&self, t: f64) -> f64 {
        let h4 = self.covector.h4 * self.scale * self.scale;
        let tau = (t / self.scale).clamp(0.0, self.dt * (self.gamma.len() - 1) as f64);
        let i = ((tau / self.dt).floor() as usize).min(self.gamma.len() - 2);
        let s = tau / self.dt - i as f64;
        let h = self.dt;
        let (p0, p1) = (self.gamma[i], self.gamma[i + 1]);
        let (d0, d1) = (self.h3[i] * h, self.h3[i + 1] * h);
        let (a0, a1) = (h4 * p0.cos() * h * h, h4 * p1.cos() * h * h);
        // quintic Hermite basis on [0, 1]
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h20 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h21 = 0.5 * (s3 - 2.0 * s4 + s5);
        h00 * p0 + h01 * p1 + h10 * d0 + h11 * d1 + h20 * a0 + h21 * a1
    }
}

impl ControlLaw for ExtremalLaw {
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn eval(&self, t: f64) -> (f64, f64) {
        let (s, c) = self.gamma_at(t).sin_cos();
        (c, s)
    }
}

/// Knobs of the multi-start shooting solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingConfig {
    /// Accepted endpoint mismatch (Euclidean in R⁴, target units).
    pub tol: f64,
    /// Half-width `L` of the `(h3, h4)` start grid, in unit-scale coordinates.
    pub grid_half_width: f64,
    /// Points per axis of the `(h3, h4)` grid.
    pub grid_points: usize,
    /// Initial angles `gamma0` per grid point.
    pub angles: usize,
    pub random_starts: usize,
    pub seed: u64,
    /// Upper bound on starts that get a Levenberg-Marquardt run.
    pub refined_starts: usize,
    /// Starts refined per round; the search stops after the first round that
    /// produces a converged extremal.
    pub batch: usize,
    pub max_iterations: usize,
    /// Longest unit-scale horizon considered when seeding `t1`.
    pub max_horizon: f64,
    /// Integration steps per unit of horizon for the final verification.
    pub steps_per_unit: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            grid_half_width: 10.0,
            grid_points: 9,
            angles: 12,
            random_starts: 128,
            seed: 0,
            refined_starts: 64,
            batch: 64,
            max_iterations: 60,
            max_horizon: 12.0,
            steps_per_unit: 2000.0,
        }
    }
}

/// Outcome of [`steer_engel`].
#[derive(Debug, Clone)]
pub struct SteeringResult {
    pub law: Arc<ExtremalLaw>,
    /// Endpoint mismatch measured by re-integrating `law` from the origin.
    pub residual: f64,
    pub starts_tried: usize,
    pub iterations: usize,
    /// The target that was actually shot at, after any degeneracy perturbation.
    pub solved_target: EngelPoint,
}

impl SteeringResult {
    pub fn horizon(&self) -> f64 {
        self.law.horizon()
    }
}

/// Homogeneous size of a point under the Engel dilation
/// `(x, y, z, v) -> (s x, s y, s² z, s³ v)`.
fn homogeneous_norm(p: &EngelPoint) -> f64 {
    p.xt.abs().max(p.yt.abs()).max(p.z.abs().sqrt()).max(p.v.abs().cbrt())
}

fn dilate_point(p: &EngelPoint, s: f64) -> EngelPoint {
    EngelPoint::new(s * p.xt, s * p.yt, s * s * p.z, s * s * s * p.v)
}

/// Shooting unknowns: `(gamma0, h3, h4, t1)` on the unit-scale problem.
type Params = [f64; 4];

/// RK4 steps per unit time while searching, and while polishing.
const COARSE_STEPS_PER_UNIT: f64 = 100.0;
const FINE_STEPS_PER_UNIT: f64 = 800.0;

fn shoot(p: &Params, steps_per_unit: f64) -> [f64; 4] {
    let steps = ((p[3].abs() * steps_per_unit).ceil() as usize).clamp(16, 50_000);
    let s = Flow { q: [0.0; 4], gamma: p[0], h3: p[1] };
    flow_rk4(s, 1.0, p[2], p[3], steps).q
}

fn norm4(a: &[f64; 4]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the 4x4 system `m x = b` by Gaussian elimination with pivoting.
fn solve4(mut m: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for c in 0..4 {
        let piv = (c..4).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..4 {
            let f = m[r][c] / m[c][c];
            for k in c..4 {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy)]
struct LocalSolve {
    params: Params,
    residual: f64,
    iterations: usize,
}

/// Levenberg-Marquardt on the endpoint residual, forward-difference Jacobian.
fn refine(start: Params, target: &[f64; 4], tol: f64, max_iter: usize, spu: f64) -> LocalSolve {
    let residual = |p: &Params| {
        let e = shoot(p, spu);
        let r: [f64; 4] = std::array::from_fn(|i| e[i] - target[i]);
        r
    };
    let mut p = start;
    let mut f = residual(&p);
    let mut fnorm = norm4(&f);
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < max_iter && fnorm > tol {
        it += 1;
        let mut jac = [[0.0; 4]; 4];
        for j in 0..4 {
            let h = 1e-7 * (1.0 + p[j].abs());
            let mut a = p;
            a[j] += h;
            let fa = residual(&a);
            for i in 0..4 {
                jac[i][j] = (fa[i] - f[i]) / h;
            }
        }
        let mut jtj = [[0.0; 4]; 4];
        let mut jtf = [0.0; 4];
        for r in 0..4 {
            for c in 0..4 {
                jtj[r][c] = (0..4).map(|i| jac[i][r] * jac[i][c]).sum();
            }
            jtf[r] = -(0..4).map(|i| jac[i][r] * f[i]).sum::<f64>();
        }
        let mut improved = false;
        for _ in 0..10 {
            let mut m = jtj;
            for d in 0..4 {
                m[d][d] += lambda * (1e-9 + jtj[d][d]);
            }
            let Some(step) = solve4(m, jtf) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand: Params = std::array::from_fn(|i| p[i] + step[i]);
            if cand[3] <= 0.0 {
                cand[3] = 0.5 * p[3];
            }
            let fc = residual(&cand);
            let nc = norm4(&fc);
            if nc.is_finite() && nc < fnorm {
                p = cand;
                f = fc;
                fnorm = nc;
                lambda = (lambda * 0.2).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    LocalSolve { params: p, residual: fnorm, iterations: it }
}

/// Seeds `t1` for a start covector: the time along its extremal that passes
/// closest to the target.
fn seed_horizon(gamma0: f64, h3: f64, h4: f64, target: &[f64; 4], max_t: f64) -> (f64, f64) {
    let n = (max_t * 40.0).ceil() as usize;
    let dt = max_t / n as f64;
    let mut s = Flow { q: [0.0; 4], gamma: gamma0, h3 };
    let mut best = (f64::INFINITY, dt);
    for i in 1..=n {
        s = flow_rk4(s, 1.0, h4, dt, 2);
        let d = norm4(&std::array::from_fn(|k| s.q[k] - target[k]));
        if !d.is_finite() {
            break;
        }
        if d < best.0 {
            best = (d, i as f64 * dt);
        }
    }
    best
}

/// Initial covectors of the reversed figure-eight extremals reaching
/// `(0, 0, 0, v)`, one per phase. They seed targets close to the `v` axis,
/// where the extremals fan out into a one-parameter family.
fn figure_eight_starts(v: f64, phases: usize) -> Vec<Params> {
    let Ok(sigma) = sigma_from_v(v, solve_k0()) else {
        return Vec::new();
    };
    let t_cut = 4.0 * solve_k0().complete_k() / sigma.abs();
    let h = 1e-4;
    (0..phases)
        .filter_map(|j| {
            let params = FigureEightParams::new(sigma, t_cut * j as f64 / phases as f64).ok()?;
            let law = reverse_law(Arc::new(repark_controls(params)));
            let angle = |t: f64| {
                let (a, b) = law.eval(t);
                b.atan2(a)
            };
            let near = |a: f64, r: f64| r + wrap_angle(a - r);
            let g0 = angle(0.0);
            let g1 = near(angle(h), g0);
            let g2 = near(angle(2.0 * h), g1);
            let h3 = (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * h);
            // h4 from gamma'' = h4 cos(gamma), read where |cos(gamma)| is largest
            let (tm, cm) = (0..64)
                .map(|i| {
                    let t = t_cut * (i as f64 + 0.5) / 64.0;
                    (t, angle(t).cos())
                })
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
            let gm = angle(tm);
            let curvature = near(angle(tm + h), gm) - 2.0 * gm + near(angle(tm - h), gm);
            Some([g0, h3, curvature / (h * h) / cm, t_cut])
        })
        .collect()
}

fn start_covectors(cfg: &ShootingConfig) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    let l = cfg.grid_half_width;
    let g = cfg.grid_points.max(1);
    let axis = |i: usize| if g == 1 { 0.0 } else { -l + 2.0 * l * i as f64 / (g - 1) as f64 };
    for a in 0..cfg.angles.max(1) {
        let gamma = TAU * a as f64 / cfg.angles.max(1) as f64;
        for i in 0..g {
            for j in 0..g {
                out.push([gamma, axis(i), axis(j)]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_starts {
        out.push([rng.gen_range(0.0..TAU), rng.gen_range(-l..=l), rng.gen_range(-l..=l)]);
    }
    out
}

/// Finds a normal extremal from the origin to `target`.
///
/// Targets with `x~ z = 0` lie where optimal synthesis is not unique; they
/// are first solved at the nearby point `(x~ + e, y~, z + e, v)` with
/// `e = 1e-6 max(1, |target|)`, and that solution then seeds a final solve on
/// the exact target.
///
/// Among converged starts the shortest extremal wins, ties going to the
/// lowest start index.
pub fn steer_engel(target: EngelPoint, cfg: &ShootingConfig) -> Result<SteeringResult> {
    let size = homogeneous_norm(&target);
    if size == 0.0 {
        return Err(Error::InvalidInput("target coincides with the origin".into()));
    }
    if !size.is_finite() {
        return Err(Error::InvalidInput("target is not finite".into()));
    }
    let degenerate = target.xt * target.z == 0.0;
    let eps = 1e-6 * target.norm().max(1.0);
    let shot = if degenerate {
        EngelPoint::new(target.xt + eps, target.yt, target.z + eps, target.v)
    } else {
        target
    };

    let unit_target = dilate_point(&shot, 1.0 / size).to_array();
    let exact_unit = dilate_point(&target, 1.0 / size).to_array();
    // the dilation back to target units stretches v by size³
    let unit_tol = 0.1 * cfg.tol / size.max(1.0).powi(3);
    let coarse_tol = unit_tol.max(1e-7);

    let mut starts: Vec<Params> = figure_eight_starts(unit_target[3], 16);
    starts.extend(start_covectors(cfg).into_iter().map(|s| [s[0], s[1], s[2], 0.0]));
    let mut ranked: Vec<(usize, f64, Params)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (d, t1) = seed_horizon(s[0], s[1], s[2], &unit_target, cfg.max_horizon.max(s[3] * 1.05));
            (i, d, [s[0], s[1], s[2], t1])
        })
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked.truncate(cfg.refined_starts.max(1));

    let mut total_iterations = 0;
    let mut best_failure: Option<(usize, LocalSolve)> = None;
    let mut converged: Vec<(usize, LocalSolve)> = Vec::new();
    for round in ranked.chunks(cfg.batch.max(1)) {
        let solves: Vec<(usize, LocalSolve, Option<LocalSolve>)> = round
            .par_iter()
            .map(|(i, _, p)| {
                let coarse = refine(*p, &unit_target, coarse_tol, cfg.max_iterations, COARSE_STEPS_PER_UNIT);
                if coarse.residual > coarse_tol {
                    return (*i, coarse, None);
                }
                let mut fine = refine(coarse.params, &unit_target, unit_tol, 20, FINE_STEPS_PER_UNIT);
                if degenerate && fine.residual <= unit_tol {
                    let exact = refine(fine.params, &exact_unit, unit_tol, 20, FINE_STEPS_PER_UNIT);
                    if exact.residual <= unit_tol {
                        fine = LocalSolve { iterations: fine.iterations + exact.iterations, ..exact };
                    }
                }
                let ok = fine.residual <= unit_tol && fine.params[3] > 0.0;
                (*i, coarse, ok.then_some(fine))
            })
            .collect();
        for (i, coarse, fine) in solves {
            total_iterations += coarse.iterations + fine.map_or(0, |f| f.iterations);
            match fine {
                Some(f) => converged.push((i, f)),
                None => {
                    if best_failure.as_ref().is_none_or(|b| coarse.residual < b.1.residual) {
                        best_failure = Some((i, coarse));
                    }
                }
            }
        }
        if !converged.is_empty() {
            break;
        }
    }

    let best = converged
        .iter()
        .min_by(|a, b| a.1.params[3].total_cmp(&b.1.params[3]).then(a.0.cmp(&b.0)))
        .copied()
        .or(best_failure)
        .expect("at least one start was refined");

    let p = best.1.params;
    let law = Arc::new(ExtremalLaw::tabulate(p[0], p[1], p[2], p[3], size));
    let steps = ((p[3] * cfg.steps_per_unit).ceil() as usize).max(100);
    let end = integrate(&System::Engel, [0.0; 4], law.as_ref(), steps)?.end();
    let target_arr = target.to_array();
    let exact_residual = norm4(&std::array::from_fn(|i| end[i] - target_arr[i]));
    let shot_arr = shot.to_array();
    let shot_residual = norm4(&std::array::from_fn(|i| end[i] - shot_arr[i]));
    debug!(
        "steer_engel {:?}: start {} of {}, t1 {:.6}, residual {:.3e} (perturbed {:.3e}), {} LM iterations",
        target_arr,
        best.0,
        starts.len(),
        law.horizon(),
        exact_residual,
        shot_residual,
        total_iterations
    );
    if exact_residual > cfg.tol && shot_residual > cfg.tol {
        return Err(Error::SteeringFailed { best_residual: exact_residual, starts: starts.len() });
    }
    let (residual, solved_target) =
        if exact_residual <= cfg.tol { (exact_residual, target) } else { (shot_residual, shot) };
    Ok(SteeringResult {
        law,
        residual,
        starts_tried: starts.len(),
        iterations: total_iterations,
        solved_target,
    })
}
