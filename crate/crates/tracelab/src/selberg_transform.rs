//! Admissible test functions and the Selberg transform quadruple
//! h ↔ ĥ ↔ Q ↔ φ:
//!
//! ĥ(u) = (1/2π) ∫ h(r) e^{−iru} dr,
//! ĥ(u) = Q(e^u + e^{−u} − 2),
//! Q(t) = ∫_t^∞ φ(u)/√(u − t) du,
//! φ(u) = −(1/π) ∫_u^∞ Q′(t)/√(t − u) dt.
//!
//! Only closed-form families are admitted; arbitrary pointwise data could
//! not be certified against the analytic admissibility conditions (h even,
//! holomorphic in |Im r| ≤ 1/2 + ε, decaying like (1 + |Re r|)^{−2−δ}).
//! The Gaussian family h(r) = exp(−a r²) satisfies all three for every
//! a > 0, with ĥ(u) = exp(−u²/4a) / (2√(πa)).

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numeric::{self, Quadrature};
use crate::{Error, Result};

/// Width of the admissibility strip |Im r| ≤ 1/2 + ε used for domain
/// checks of `h_eval`.
pub const STRIP_HALF_WIDTH: f64 = 1.0;

/// An admissible even test function with analytically known transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// h(r) = exp(−a·r²), a > 0.
    Gaussian { width: f64 },
}

impl TestFunction {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::domain(format!(
                "gaussian width must be positive and finite, got {width}"
            )));
        }
        Ok(TestFunction::Gaussian { width })
    }

    /// Parse the CLI serialization `gaussian:a=<float>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let rest = spec.strip_prefix("gaussian:a=").ok_or_else(|| {
            Error::Usage(format!(
                "unknown test function `{spec}`, expected gaussian:a=<float>"
            ))
        })?;
        let width: f64 = rest
            .parse()
            .map_err(|_| Error::Usage(format!("bad width in `{spec}`")))?;
        TestFunction::gaussian(width)
    }

    pub fn spec_string(&self) -> String {
        match self {
            TestFunction::Gaussian { width } => format!("gaussian:a={width}"),
        }
    }

    pub fn width(&self) -> f64 {
        match self {
            TestFunction::Gaussian { width } => *width,
        }
    }

    /// h on the real line.
    pub fn h(&self, r: f64) -> f64 {
        match self {
            TestFunction::Gaussian { width } => (-width * r * r).exp(),
        }
    }

    /// h on the admissibility strip.
    pub fn h_eval(&self, r: Complex64) -> Result<Complex64> {
        if r.im.abs() > STRIP_HALF_WIDTH {
            return Err(Error::domain(format!(
                "Im r = {} outside the strip |Im r| ≤ {STRIP_HALF_WIDTH}",
                r.im
            )));
        }
        match self {
            TestFunction::Gaussian { width } => Ok((-width * r * r).exp()),
        }
    }

    /// Closed-form ĥ(u) = (1/2π) ∫ h(r) e^{−iru} dr.
    pub fn h_hat(&self, u: f64) -> f64 {
        match self {
            TestFunction::Gaussian { width } => {
                (-u * u / (4.0 * width)).exp() / (2.0 * (std::f64::consts::PI * width).sqrt())
            }
        }
    }

    /// dĥ/du.
    pub fn h_hat_prime(&self, u: f64) -> f64 {
        match self {
            TestFunction::Gaussian { width } => -u / (2.0 * width) * self.h_hat(u),
        }
    }

    /// Quadrature fallback for ĥ; must agree with the closed form.
    pub fn h_hat_quadrature(&self, u: f64, tol: f64) -> Result<Quadrature> {
        let window = self.window(1e-18);
        let q = numeric::integrate(|r| self.h(r) * (r * u).cos(), -window, window, tol)?;
        Ok(Quadrature {
            value: q.value / (2.0 * std::f64::consts::PI),
            error: q.error / (2.0 * std::f64::consts::PI)
                + numeric::gauss_tail_upper(self.width(), window) / std::f64::consts::PI,
        })
    }

    /// Half-width R with |h| ≤ `cut` outside [−R, R].
    pub fn window(&self, cut: f64) -> f64 {
        ((-cut.ln()) / self.width()).sqrt() + 1.0
    }

    /// Q(t) = ĥ(u) with t = e^u + e^{−u} − 2, i.e. u = 2·asinh(√t / 2).
    pub fn q_from_hhat(&self, t: f64) -> Result<f64> {
        Ok(self.h_hat(u_of_t(t)?))
    }

    /// dQ/dt = ĥ′(u) / √(t² + 4t), smooth down to t = 0.
    pub fn q_prime(&self, t: f64) -> Result<f64> {
        let u = u_of_t(t)?;
        if t == 0.0 {
            // limit: ĥ′(u) ~ ĥ″(0)·u and √(t²+4t) ~ 2u
            return Ok(match self {
                TestFunction::Gaussian { width } => -self.h_hat(0.0) / (4.0 * width),
            });
        }
        Ok(self.h_hat_prime(u) / (t * t + 4.0 * t).sqrt())
    }

    /// φ(x) = −(1/π) ∫_x^∞ Q′(t)/√(t − x) dt, with the square-root
    /// singularity removed by t = x + s². Returns (value, error estimate).
    pub fn phi_from_q(&self, x: f64, tol: f64) -> Result<Quadrature> {
        if x < 0.0 {
            return Err(Error::domain(format!("phi needs x ≥ 0, got {x}")));
        }
        let s_max = self.phi_window(x, 1e-16);
        let q = numeric::integrate(
            |s| self.q_prime(x + s * s).expect("t ≥ 0 inside phi integrand"),
            0.0,
            s_max,
            tol * std::f64::consts::FRAC_PI_2,
        )?;
        let tail = self.phi_tail_bound(x, s_max);
        Ok(Quadrature {
            value: -2.0 / std::f64::consts::PI * q.value,
            error: 2.0 / std::f64::consts::PI * q.error + tail,
        })
    }

    /// s beyond which |Q′(x + s²)| integrates below `cut`.
    fn phi_window(&self, x: f64, cut: f64) -> f64 {
        let mut s = 4.0;
        while s < 1e6 {
            if self.phi_tail_bound(x, s) < cut {
                return s;
            }
            s *= 1.5;
        }
        s
    }

    /// Crude rigorous bound on (2/π)∫_S^∞ |Q′(x + s²)| ds: |Q′(t)| is
    /// decreasing in t for t ≥ t* of the Gaussian family and bounded by
    /// |ĥ′(u(t))|/√(t²+4t) ≤ ĥ(u)·u/(2a)/t, so the tail is at most
    /// (2/π)·sup_{t≥x+S²}(|ĥ′(u)|)·∫_S^∞ ds/√((x+s²)² + 4(x+s²)) and the
    /// integral is ≤ ∫_S^∞ s⁻² ds = 1/S.
    fn phi_tail_bound(&self, x: f64, s: f64) -> f64 {
        let t0 = x + s * s;
        let u0 = u_of_t(t0).expect("t0 ≥ 0");
        let sup = self.h_hat(u0) * u0 / (2.0 * self.width());
        2.0 / std::f64::consts::PI * sup / s
    }

    /// Forward transform Q(x) = ∫_x^∞ φ(u)/√(u−x) du = 2 ∫_0^∞ φ(x+s²) ds,
    /// evaluated from the Abel-inverted φ. This is the round-trip check of
    /// the transform pair and deliberately does not shortcut through ĥ.
    pub fn q_roundtrip(&self, x: f64, tol: f64) -> Result<Quadrature> {
        let inner_tol = tol * 0.05;
        let s_max = self.phi_window(x, 1e-14).sqrt() * 3.0 + 30.0;
        let q = numeric::integrate(
            |s| {
                self.phi_from_q(x + s * s, inner_tol)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            },
            0.0,
            s_max,
            tol * 0.5,
        )?;
        Ok(Quadrature {
            value: 2.0 * q.value,
            error: 2.0 * q.error,
        })
    }
}

/// u ≥ 0 with e^u + e^{−u} − 2 = t.
pub fn u_of_t(t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::domain(format!("q_from_hhat needs t ≥ 0, got {t}")));
    }
    Ok(2.0 * (t.sqrt() / 2.0).asinh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parse_and_format() {
        let f = TestFunction::parse("gaussian:a=1.5").unwrap();
        assert_eq!(f.width(), 1.5);
        assert_eq!(f.spec_string(), "gaussian:a=1.5");
        assert!(TestFunction::parse("cauchy:a=1").is_err());
        assert!(TestFunction::parse("gaussian:a=-1").is_err());
    }

    #[test]
    fn h_on_strip() {
        let f = TestFunction::gaussian(1.0).unwrap();
        assert_eq!(f.h_eval(Complex64::new(0.0, 0.0)).unwrap().re, 1.0);
        // h(i/2) = exp(1/4): analytic continuation of the closed form
        let v = f.h_eval(Complex64::new(0.0, 0.5)).unwrap();
        assert!((v.re - 0.25f64.exp()).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
        assert!(f.h_eval(Complex64::new(0.0, 1.5)).is_err());
        // evenness at sampled points
        for i in 0..20 {
            let r = 0.3 * i as f64;
            assert_eq!(f.h(r), f.h(-r));
        }
    }

    #[test]
    fn h_hat_closed_form_and_symmetry() {
        let f = TestFunction::gaussian(1.0).unwrap();
        assert!((f.h_hat(0.0) - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        assert!((f.h_hat(0.0) - 0.2820947917738781).abs() < 1e-12);
        for i in 0..40 {
            let u = 0.5 * i as f64;
            assert_eq!(f.h_hat(u), f.h_hat(-u));
        }
    }

    #[test]
    fn h_hat_quadrature_matches_closed_form() {
        for width in [0.5, 1.0, 2.0] {
            let f = TestFunction::gaussian(width).unwrap();
            for i in -8..=8 {
                let u = 2.5 * i as f64;
                let q = f.h_hat_quadrature(u, 1e-12).unwrap();
                assert!(
                    (q.value - f.h_hat(u)).abs() < 1e-10,
                    "width {width}, u {u}: {} vs {}",
                    q.value,
                    f.h_hat(u)
                );
            }
        }
    }

    #[test]
    fn h_hat_integrates_to_h_zero() {
        // ∫ ĥ(u) du = h(0) = 1 (Fourier inversion at 0)
        let f = TestFunction::gaussian(1.0).unwrap();
        let q = numeric::integrate(|u| f.h_hat(u), -40.0, 40.0, 1e-12).unwrap();
        assert!((q.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn q_of_special_points() {
        let f = TestFunction::gaussian(1.0).unwrap();
        assert!((f.q_from_hhat(0.0).unwrap() - f.h_hat(0.0)).abs() < 1e-15);
        let t = 1f64.exp() + (-1f64).exp() - 2.0;
        assert!((f.q_from_hhat(t).unwrap() - f.h_hat(1.0)).abs() < 1e-13);
        // frozen closed-form value at t = 2 (u = arcosh(2))
        assert!((f.q_from_hhat(2.0).unwrap() - 1.828_467_974_713_570_7e-1).abs() < 1e-14);
        assert!(f.q_from_hhat(-0.5).is_err());
    }

    #[test]
    fn q_prime_matches_finite_differences() {
        let f = TestFunction::gaussian(1.0).unwrap();
        for &t in &[0.5f64, 1.0, 2.0, 5.0, 20.0] {
            let h = 1e-5 * t.max(1.0);
            let fd = (f.q_from_hhat(t + h).unwrap() - f.q_from_hhat(t - h).unwrap()) / (2.0 * h);
            let exact = f.q_prime(t).unwrap();
            assert!(
                (fd - exact).abs() < 1e-7 * (1.0 + exact.abs()),
                "t = {t}: fd {fd} vs {exact}"
            );
        }
    }

    #[test]
    fn phi_zero_frozen_value() {
        // frozen from an independent Romberg-oracle run
        let f = TestFunction::gaussian(1.0).unwrap();
        let phi0 = f.phi_from_q(0.0, 1e-12).unwrap();
        assert!((phi0.value - 7.387_737_205_247_355e-2).abs() < 5e-12);
    }

    #[test]
    fn phi_decays() {
        let f = TestFunction::gaussian(1.0).unwrap();
        let near = f.phi_from_q(0.0, 1e-10).unwrap();
        let mid = f.phi_from_q(50.0, 1e-10).unwrap();
        let far = f.phi_from_q(200.0, 1e-10).unwrap();
        assert!(near.value.abs() > 1e-3);
        assert!(mid.value.abs() < near.value.abs() / 30.0);
        assert!(far.value.abs() < mid.value.abs());
        assert!(far.value.abs() < 1e-4);
    }

    #[test]
    fn abel_round_trip() {
        // ∫_x^∞ φ(u)/√(u−x) du must reproduce Q(x) to 1e−8
        let f = TestFunction::gaussian(1.0).unwrap();
        for &x in &[0.0, 1.0, 5.0] {
            let forward = f.q_roundtrip(x, 1e-9).unwrap();
            let direct = f.q_from_hhat(x).unwrap();
            assert!(
                (forward.value - direct).abs() < 1e-8,
                "x = {x}: {} vs {}",
                forward.value,
                direct
            );
        }
    }

    #[test]
    fn decay_certificate() {
        // |h(r)|·(1+r)^{2+δ} bounded on [0, 100] for δ = 1
        for width in [0.5, 1.0] {
            let f = TestFunction::gaussian(width).unwrap();
            let mut max = 0.0f64;
            for i in 0..=1000 {
                let r = 0.1 * i as f64;
                max = max.max(f.h(r) * (1.0 + r).powi(3));
            }
            assert!(max < 40.0, "width {width}: bound {max}");
        }
    }
}
