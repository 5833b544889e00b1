//! Kinematic model of a car pulling one trailer, its Lie brackets, the
//! similarity symmetry, and the canonical Engel frame.
//!
//! Raw state vectors are `[x, y, theta, phi]` with unwrapped angles. They are
//! what the integrator moves around; [`TrailerState`] is the user-facing pose
//! with angles wrapped to `(-pi, pi]`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tangent vector in state order.
pub type Tangent4 = [f64; 4];

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrailerState {
    x: f64,
    y: f64,
    theta: f64,
    phi: f64,
}

impl TrailerState {
    pub fn new(x: f64, y: f64, theta: f64, phi: f64) -> Self {
        Self { x, y, theta: wrap_angle(theta), phi: wrap_angle(phi) }
    }

    pub fn from_raw(q: [f64; 4]) -> Self {
        Self::new(q[0], q[1], q[2], q[3])
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn to_raw(self) -> [f64; 4] {
        [self.x, self.y, self.theta, self.phi]
    }
}

/// Hitch geometry: `l_r` from the robot reference point to the hitch, `l_t`
/// from the hitch to the trailer axle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrailerGeometry {
    l_r: f64,
    l_t: f64,
    phi_max: Option<f64>,
}

impl TrailerGeometry {
    pub fn new(l_r: f64, l_t: f64) -> Result<Self> {
        Self::with_phi_max(l_r, l_t, None)
    }

    pub fn with_phi_max(l_r: f64, l_t: f64, phi_max: Option<f64>) -> Result<Self> {
        if !(l_t.is_finite() && l_t > 0.0) {
            return Err(Error::InvalidInput(format!("l_t must be positive, got {l_t}")));
        }
        if !(l_r.is_finite() && l_r >= 0.0) {
            return Err(Error::InvalidInput(format!("l_r must be non-negative, got {l_r}")));
        }
        if let Some(m) = phi_max {
            if !(m > 0.0 && m <= PI) {
                return Err(Error::InvalidInput(format!("phi_max must lie in (0, pi], got {m}")));
            }
        }
        Ok(Self { l_r, l_t, phi_max })
    }

    pub fn l_r(&self) -> f64 {
        self.l_r
    }
    pub fn l_t(&self) -> f64 {
        self.l_t
    }
    pub fn phi_max(&self) -> Option<f64> {
        self.phi_max
    }

    /// `l_t + l_r cos(phi)`; the frame of brackets degenerates where it vanishes.
    pub fn frame_denominator(&self, phi: f64) -> f64 {
        self.l_t + self.l_r * phi.cos()
    }

    /// True when `phi` breaks the mechanical hitch limit, if one is set.
    pub fn violates(&self, phi: f64) -> bool {
        self.phi_max.is_some_and(|m| wrap_angle(phi).abs() > m)
    }
}

/// Point of the Engel group in canonical coordinates `(x~, y~, z, v)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EngelPoint {
    pub xt: f64,
    pub yt: f64,
    pub z: f64,
    pub v: f64,
}

impl EngelPoint {
    pub const ORIGIN: Self = Self { xt: 0.0, yt: 0.0, z: 0.0, v: 0.0 };

    pub fn new(xt: f64, yt: f64, z: f64, v: f64) -> Self {
        Self { xt, yt, z, v }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.xt, self.yt, self.z, self.v]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

pub(crate) fn x1_raw(q: &[f64; 4], g: &TrailerGeometry) -> Tangent4 {
    let (s, c) = q[2].sin_cos();
    [c, s, 0.0, -q[3].sin() / g.l_t]
}

pub(crate) fn x2_raw(q: &[f64; 4], g: &TrailerGeometry) -> Tangent4 {
    [0.0, 0.0, 1.0, -g.l_r * q[3].cos() / g.l_t - 1.0]
}

pub(crate) fn x3_raw(q: &[f64; 4], g: &TrailerGeometry) -> Tangent4 {
    let (s, c) = q[2].sin_cos();
    [s, -c, 0.0, -(g.l_r + g.l_t * q[3].cos()) / (g.l_t * g.l_t)]
}

pub(crate) fn x4_raw(q: &[f64; 4], g: &TrailerGeometry) -> Tangent4 {
    [0.0, 0.0, 0.0, -g.frame_denominator(q[3]) / g.l_t.powi(3)]
}

/// Forward motion field of the car.
pub fn vf_x1(q: &TrailerState, g: &TrailerGeometry) -> Tangent4 {
    x1_raw(&q.to_raw(), g)
}

/// Turning field of the car.
pub fn vf_x2(q: &TrailerState, g: &TrailerGeometry) -> Tangent4 {
    x2_raw(&q.to_raw(), g)
}

/// `[X1, X2]`.
pub fn vf_x3(q: &TrailerState, g: &TrailerGeometry) -> Tangent4 {
    x3_raw(&q.to_raw(), g)
}

/// `[X1, [X1, X2]]`.
pub fn vf_x4(q: &TrailerState, g: &TrailerGeometry) -> Tangent4 {
    x4_raw(&q.to_raw(), g)
}

pub fn engel_x1(p: &EngelPoint) -> Tangent4 {
    [1.0, 0.0, -0.5 * p.yt, 0.0]
}

pub fn engel_x2(p: &EngelPoint) -> Tangent4 {
    [0.0, 1.0, 0.5 * p.xt, 0.5 * (p.xt * p.xt + p.yt * p.yt)]
}

/// Similarity symmetry: scales the plane, both hitch lengths and the linear
/// velocity by `mu`, leaving angles and the angular velocity untouched.
pub fn dilate(
    q: &TrailerState,
    g: &TrailerGeometry,
    u: (f64, f64),
    mu: f64,
) -> Result<(TrailerState, TrailerGeometry, (f64, f64))> {
    if !(mu.is_finite() && mu > 0.0) {
        return domain(format!("dilation factor must be positive, got {mu}"));
    }
    let q2 = TrailerState { x: mu * q.x, y: mu * q.y, ..*q };
    let g2 = TrailerGeometry { l_r: mu * g.l_r, l_t: mu * g.l_t, phi_max: g.phi_max };
    Ok((q2, g2, (mu * u.0, u.1)))
}

/// Scales only the geometry; the part of [`dilate`] that planners need.
pub(crate) fn scale_geometry(g: &TrailerGeometry, mu: f64) -> TrailerGeometry {
    TrailerGeometry { l_r: mu * g.l_r, l_t: mu * g.l_t, phi_max: g.phi_max }
}
