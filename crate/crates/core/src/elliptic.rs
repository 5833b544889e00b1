//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Every function here uses the **modulus** `k`, not the parameter `m = k²`.
//! Libraries disagree on this (Cephes and SciPy take `m`, many textbooks take
//! `k`), so values passed in from elsewhere must be converted first.
//!
//! Evaluation goes through the arithmetic-geometric mean: the complete
//! integrals via the Gauss/Legendre AGM series, and `sn`, `cn`, `dn` via the
//! descending Landen transformation.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 64;

/// Elliptic modulus `k` with `0 <= k < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && (0.0..1.0).contains(&k) {
            Ok(Self(k))
        } else {
            domain(format!("elliptic modulus must lie in [0, 1), got {k}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary modulus `k' = sqrt(1 - k²)`.
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }

    pub fn complete_k(self) -> f64 {
        agm_complete(self.0).0
    }

    pub fn complete_e(self) -> f64 {
        agm_complete(self.0).1
    }
}

/// Values of the three Jacobi functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Returns `(K(k), E(k))` from a single AGM sweep.
fn agm_complete(k: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    // E/K = 1 - sum 2^(n-1) c_n^2, c_0 = k
    let mut weight = 0.5;
    let mut sum = weight * k * k;
    for _ in 0..AGM_MAX_ITER {
        let c = 0.5 * (a - b);
        weight *= 2.0;
        sum += weight * c * c;
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a_next;
        if c.abs() <= AGM_TOL * a {
            break;
        }
    }
    let kk = FRAC_PI_2 / a;
    (kk, kk * (1.0 - sum))
}

/// Complete elliptic integral of the first kind, `K(k)`.
pub fn complete_k(k: f64) -> Result<f64> {
    Modulus::new(k).map(Modulus::complete_k)
}

/// Complete elliptic integral of the second kind, `E(k)`. Defined on the
/// closed interval `[0, 1]`, with `E(1) = 1`.
pub fn complete_e(k: f64) -> Result<f64> {
    if k == 1.0 {
        return Ok(1.0);
    }
    Modulus::new(k)
        .map(Modulus::complete_e)
        .or_else(|_| domain(format!("E(k) requires k in [0, 1], got {k}")))
}

/// `sn(u, k)`, `cn(u, k)` and `dn(u, k)` by descending Landen transformation.
pub fn jacobi_sn_cn_dn(u: f64, k: Modulus) -> JacobiTriple {
    let kv = k.value();
    if kv == 0.0 {
        let (s, c) = u.sin_cos();
        return JacobiTriple { sn: s, cn: c, dn: 1.0 };
    }

    // Reduce to one real period first; the Landen recursion multiplies the
    // argument by 2^N and would otherwise amplify rounding in large u.
    let period = 4.0 * k.complete_k();
    let u = u - period * (u / period).round();

    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = kv;
    let mut b = k.complementary();
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > AGM_TOL {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }

    let mut phi = f64::from(1u32 << n.min(31)) * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - kv * kv * sn * sn).sqrt();
    JacobiTriple { sn, cn, dn }
}

/// Modulus of the closed figure-eight elastica: the root of `2E(k) = K(k)`
/// on `(0, 1)`. Computed once and cached.
pub fn solve_k0() -> Modulus {
    static K0: OnceLock<Modulus> = OnceLock::new();
    *K0.get_or_init(|| {
        let f = |k: f64| {
            let (kk, ee) = agm_complete(k);
            2.0 * ee - kk
        };
        // f(0.5) > 0, f(0.99) < 0; f is strictly decreasing in between
        let (mut lo, mut hi) = (0.5_f64, 0.99_f64);
        while hi - lo > f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
        Modulus(k)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Trapezoid rule on [0, pi/2]; the integrands are even and pi-periodic,
    /// so the rule converges geometrically.
    fn quad_periodic(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = FRAC_PI_2 / n as f64;
        let mut s = 0.5 * (f(0.0) + f(FRAC_PI_2));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h
    }

    fn k_by_quadrature(k: f64) -> f64 {
        quad_periodic(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 4000)
    }

    fn e_by_quadrature(k: f64) -> f64 {
        quad_periodic(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 4000)
    }

    /// Reference sn, cn, dn from the defining ODE system
    /// s' = c d, c' = -s d, d' = -k² s c, integrated with tiny RK4 steps.
    fn jacobi_by_ode(u: f64, k: f64) -> (f64, f64, f64) {
        let f = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -k * k * y[0] * y[1]];
        let n = 200_000;
        let h = u / n as f64;
        let mut y = [0.0, 1.0, 1.0];
        for _ in 0..n {
            let k1 = f(y);
            let k2 = f([0, 1, 2].map(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = f([0, 1, 2].map(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = f([0, 1, 2].map(|i| y[i] + h * k3[i]));
            y = [0, 1, 2].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        (y[0], y[1], y[2])
    }

    #[test]
    fn modulus_domain() {
        assert!(Modulus::new(0.0).is_ok());
        assert!(Modulus::new(0.999).is_ok());
        assert!(Modulus::new(1.0).is_err());
        assert!(Modulus::new(-0.1).is_err());
        assert!(Modulus::new(f64::NAN).is_err());
    }

    #[test]
    fn complete_k_values() {
        assert!((complete_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        // frozen from the quadrature oracle
        let oracle = k_by_quadrature(0.5);
        assert!((oracle - 1.685_750_354_812_596).abs() < 1e-13);
        assert!((complete_k(0.5).unwrap() - oracle).abs() < 1e-13);
        assert!(complete_k(1.0).is_err());
    }

    #[test]
    fn complete_e_values() {
        assert!((complete_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(complete_e(1.0).unwrap(), 1.0);
        let oracle = e_by_quadrature(0.5);
        assert!((oracle - 1.467_462_209_339_427).abs() < 1e-13);
        assert!((complete_e(0.5).unwrap() - oracle).abs() < 1e-13);
        assert!(complete_e(1.01).is_err());
        assert!(complete_e(-0.2).is_err());
    }

    #[test]
    fn complete_integrals_match_quadrature_on_grid() {
        for i in 0..10 {
            let k = i as f64 / 10.0;
            assert!((complete_k(k).unwrap() - k_by_quadrature(k)).abs() < 1e-10, "K at {k}");
            assert!((complete_e(k).unwrap() - e_by_quadrature(k)).abs() < 1e-10, "E at {k}");
        }
    }

    #[test]
    fn monotonicity() {
        let ks: Vec<f64> = (0..99).map(|i| i as f64 / 100.0).collect();
        for w in ks.windows(2) {
            assert!(complete_k(w[1]).unwrap() > complete_k(w[0]).unwrap());
            assert!(complete_e(w[1]).unwrap() < complete_e(w[0]).unwrap());
        }
    }

    #[test]
    fn jacobi_at_zero_and_degenerate_modulus() {
        for k in [0.0, 0.3, 0.9] {
            let j = jacobi_sn_cn_dn(0.0, Modulus::new(k).unwrap());
            assert_eq!((j.sn, j.cn, j.dn), (0.0, 1.0, 1.0));
        }
        let zero = Modulus::new(0.0).unwrap();
        for u in [-3.0, 0.4, 1.0, 7.5] {
            let j = jacobi_sn_cn_dn(u, zero);
            assert!((j.sn - f64::sin(u)).abs() < 1e-15);
            assert!((j.cn - f64::cos(u)).abs() < 1e-15);
            assert_eq!(j.dn, 1.0);
        }
    }

    #[test]
    fn jacobi_matches_ode_oracle() {
        for (u, k) in [(1.0, 0.5), (2.7, 0.9089), (-1.3, 0.2), (5.0, 0.75)] {
            let j = jacobi_sn_cn_dn(u, Modulus::new(k).unwrap());
            let (s, c, d) = jacobi_by_ode(u, k);
            assert!((j.sn - s).abs() < 1e-12, "sn({u},{k}): {} vs {s}", j.sn);
            assert!((j.cn - c).abs() < 1e-12, "cn({u},{k}): {} vs {c}", j.cn);
            assert!((j.dn - d).abs() < 1e-12, "dn({u},{k}): {} vs {d}", j.dn);
        }
    }

    #[test]
    fn jacobi_periodicity() {
        for k in [0.1, 0.5, 0.9] {
            let m = Modulus::new(k).unwrap();
            let kk = m.complete_k();
            for u in [-2.0, 0.3, 1.7, 4.4] {
                let a = jacobi_sn_cn_dn(u, m);
                let b = jacobi_sn_cn_dn(u + 4.0 * kk, m);
                let c = jacobi_sn_cn_dn(u + 2.0 * kk, m);
                assert!((a.sn - b.sn).abs() < 1e-10);
                assert!((a.cn - b.cn).abs() < 1e-10);
                assert!((a.dn - c.dn).abs() < 1e-10);
                assert!((a.sn + c.sn).abs() < 1e-10);
            }
        }
        assert!((4.0 * complete_k(0.0).unwrap() - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn k0_root() {
        let k0 = solve_k0();
        let r = 2.0 * k0.complete_e() - k0.complete_k();
        assert!(r.abs() <= 1e-13, "residual {r}");
        // bisection oracle run independently on the quadrature integrals
        let g = |k: f64| 2.0 * e_by_quadrature(k) - k_by_quadrature(k);
        let (mut lo, mut hi) = (0.5, 0.99);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((k0.value() - lo).abs() < 1e-12);
        assert!((k0.value() - 0.908_908_557_5).abs() < 1e-10);
        assert_eq!(solve_k0(), k0);
    }

    proptest::proptest! {
        #[test]
        fn pythagorean_identities(u in -50.0f64..50.0, k in 0.0f64..0.999) {
            let j = jacobi_sn_cn_dn(u, Modulus::new(k).unwrap());
            proptest::prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-12);
            proptest::prop_assert!((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs() < 1e-12);
        }
    }
}
