//! Boundary conditions of the trailer problem expressed as Engel targets.
//!
//! The start `q0` is written in the frame `X1, X2, X3, X4` evaluated at `q0`
//! relative to the goal `q1`: `q0 - q1 = sum c_i X_i(q0)`, and
//! `(x~, y~, z, v) = (c1, c2, c3, c4)`. Steering that Engel point back to the
//! origin is the nilpotent approximation of parking at `q1`.
//!
//! Angle differences are taken raw, `theta0 - theta1` and `phi0 - phi1`;
//! callers pick the representatives of `theta1`, `phi1` (see
//! [`nearest_representative`]).

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::kinematics::{x1_raw, x2_raw, x3_raw, x4_raw, wrap_angle, EngelPoint, TrailerGeometry};

/// Relative magnitude below which `l_t + l_r cos phi0` counts as zero.
const SINGULAR_TOL: f64 = 1e-12;

fn check_frame(phi0: f64, g: &TrailerGeometry) -> Result<f64> {
    let d = g.frame_denominator(phi0);
    if d.abs() <= SINGULAR_TOL * (g.l_t() + g.l_r()) {
        Err(Error::FrameSingular { denominator: d })
    } else {
        Ok(d)
    }
}

/// `a1` shifted by a multiple of 2 pi to lie within pi of `a0`.
pub fn nearest_representative(a0: f64, a1: f64) -> f64 {
    a0 + wrap_angle(a1 - a0)
}

/// Closed-form Engel target for arbitrary raw states `q0 = [x, y, theta, phi]`
/// and `q1`.
///
/// Where `l_t + l_r cos phi0` vanishes the `v` component is infinite; use
/// [`engel_target_via_frame`] for a checked variant.
pub fn engel_target_general(q0: &[f64; 4], q1: &[f64; 4], g: &TrailerGeometry) -> EngelPoint {
    let (dx, dy, dth, dph) = (q0[0] - q1[0], q0[1] - q1[1], q0[2] - q1[2], q0[3] - q1[3]);
    let (st, ct) = q0[2].sin_cos();
    let (sp, cp) = (q0[3] + q0[2]).sin_cos();
    let (lr, lt) = (g.l_r(), g.l_t());
    let lateral = dx * st - dy * ct;
    let inner = lt * lt * (dth + dph)
        + lr * lt * dth * q0[3].cos()
        + lr * lateral
        + lt * (dx * sp - dy * cp);
    EngelPoint {
        xt: dx * ct + dy * st,
        yt: dth,
        z: lateral,
        v: -lt / g.frame_denominator(q0[3]) * inner,
    }
}

/// Engel target by solving `Gamma(q0) c = q0 - q1` numerically.
pub fn engel_target_via_frame(q0: &[f64; 4], q1: &[f64; 4], g: &TrailerGeometry) -> Result<EngelPoint> {
    check_frame(q0[3], g)?;
    let cols = [x1_raw(q0, g), x2_raw(q0, g), x3_raw(q0, g), x4_raw(q0, g)];
    let gamma = Matrix4::from_fn(|r, c| cols[c][r]);
    let rhs = Vector4::from_fn(|r, _| q0[r] - q1[r]);
    let c = gamma.lu().solve(&rhs).ok_or(Error::FrameSingular { denominator: g.frame_denominator(q0[3]) })?;
    Ok(EngelPoint::new(c[0], c[1], c[2], c[3]))
}

/// Engel target for reparking: the car pose is the same at both ends and
/// only the hitch angle changes from `phi0` to `phi1`.
pub fn repark_target(phi0: f64, phi1: f64, g: &TrailerGeometry) -> Result<EngelPoint> {
    let d = check_frame(phi0, g)?;
    Ok(EngelPoint::new(0.0, 0.0, 0.0, g.l_t().powi(3) * (phi1 - phi0) / d))
}
