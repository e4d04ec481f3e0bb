//! Radial weight profiles `η` with support exactly `[0, 1]` and their
//! dimension-indexed moments
//!
//! ```text
//! sigma_d = ∫_{R^d} η(|x|) |x_1|² dx,     beta_d = ∫_{R^d} η(|x|) dx.
//! ```
//!
//! Both reduce to radial integrals through the polar factorization
//! `sigma_d = |S^{d-1}| / d · ∫_0^1 η(r) r^{d+1} dr` and
//! `beta_d = |S^{d-1}| · ∫_0^1 η(r) r^{d-1} dr`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::scalar::Scalar;

const MOMENT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelProfile<T> {
    /// `η = χ_[0,1]`, the random geometric graph.
    Indicator,
    /// `η(t) = 1 - t` on `[0, 1]`.
    Triangular,
    /// Gaussian `exp(-s²/2)` truncated at `s = radius` and rescaled so the
    /// support is `[0, 1]`: `η(t) = exp(-(radius·t)²/2)`.
    TruncatedGaussian { radius: T },
}

impl<T: Scalar> KernelProfile<T> {
    pub fn truncated_gaussian(radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Domain(format!("truncation radius must be positive, got {radius}")));
        }
        Ok(Self::TruncatedGaussian { radius })
    }

    /// `η(t)`; negative `t` is a domain error.
    pub fn eval(&self, t: T) -> Result<T> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::Domain(format!("kernel argument must be nonnegative, got {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, t: T) -> T {
        if t > T::one() {
            return T::zero();
        }
        match *self {
            Self::Indicator => T::one(),
            Self::Triangular => T::one() - t,
            Self::TruncatedGaussian { radius } => {
                let s = radius * t;
                (-(s * s) / T::lit(2.0)).exp()
            }
        }
    }

    /// Weight for a pair at squared distance `dist_sq` with bandwidth `eps`.
    /// Pairs exactly at distance `eps` are inside the closed support.
    #[inline]
    pub fn weight_sq(&self, dist_sq: T, eps: T) -> T {
        if dist_sq > eps * eps {
            return T::zero();
        }
        let t = (dist_sq.sqrt() / eps).min(T::one());
        self.eval_unchecked(t)
    }

    /// `η(0)`, the self-loop weight.
    pub fn at_zero(&self) -> T {
        self.eval_unchecked(T::zero())
    }

    pub fn moments(&self, d: usize) -> Result<Moments<T>> {
        kernel_moments(self, d)
    }
}

impl<T: Scalar> FromStr for KernelProfile<T> {
    type Err = Error;

    fn from_str(key: &str) -> Result<Self> {
        match key.trim() {
            "indicator" => Ok(Self::Indicator),
            "triangular" => Ok(Self::Triangular),
            other => {
                let Some(r) = other.strip_prefix("gauss:") else {
                    return Err(Error::Domain(format!("unknown kernel key '{other}'")));
                };
                let r: f64 = r
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad truncation radius in '{other}'")))?;
                Self::truncated_gaussian(T::lit(r))
            }
        }
    }
}

impl<T: Scalar> fmt::Display for KernelProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Indicator => f.write_str("indicator"),
            Self::Triangular => f.write_str("triangular"),
            Self::TruncatedGaussian { radius } => write!(f, "gauss:{radius}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    pub dimension: usize,
    pub sigma: T,
    pub beta: T,
}

impl<T: Scalar> Moments<T> {
    /// `sigma / beta`, the factor in front of the normalized limit energy.
    pub fn ratio(&self) -> T {
        self.sigma / self.beta
    }
}

/// Volume of the unit ball in `R^d`, `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume<T: Scalar>(d: usize) -> T {
    pi_pow_half::<T>(d) / gamma_half_integer::<T>(d + 2)
}

/// Surface area of the unit sphere `S^{d-1} ⊂ R^d`, `2π^{d/2} / Γ(d/2)`.
pub fn sphere_area<T: Scalar>(d: usize) -> T {
    T::lit(2.0) * pi_pow_half(d) / gamma_half_integer::<T>(d)
}

/// `π^{d/2}`
fn pi_pow_half<T: Scalar>(d: usize) -> T {
    let p = T::PI().powi((d / 2) as i32);
    if d % 2 == 1 {
        p * T::PI().sqrt()
    } else {
        p
    }
}

/// `Γ(m/2)` for a positive integer `m`.
fn gamma_half_integer<T: Scalar>(m: usize) -> T {
    assert!(m >= 1);
    let half = T::lit(0.5);
    let (mut x, mut g) = if m % 2 == 0 {
        (T::one(), T::one())
    } else {
        (half, T::PI().sqrt())
    };
    let target = T::from_usize_lossy(m) * half;
    while x < target - half / T::lit(2.0) {
        g *= x;
        x += T::one();
    }
    g
}

pub fn kernel_moments<T: Scalar>(profile: &KernelProfile<T>, d: usize) -> Result<Moments<T>> {
    if d == 0 {
        return Err(Error::Domain("moment dimension must be at least 1".into()));
    }
    let df = T::from_usize_lossy(d);
    let (sigma, beta) = match *profile {
        KernelProfile::Indicator => {
            let beta = unit_ball_volume::<T>(d);
            (beta / (df + T::lit(2.0)), beta)
        }
        KernelProfile::Triangular => {
            let area = sphere_area::<T>(d);
            let beta = area / (df * (df + T::one()));
            let sigma = area / (df * (df + T::lit(2.0)) * (df + T::lit(3.0)));
            (sigma, beta)
        }
        KernelProfile::TruncatedGaussian { .. } => {
            let area = sphere_area::<T>(d);
            let tol = T::lit(MOMENT_TOL);
            let p = profile;
            let mass = adaptive_simpson(|r: T| p.eval_unchecked(r) * r.powi(d as i32 - 1), T::zero(), T::one(), tol);
            let second = adaptive_simpson(|r: T| p.eval_unchecked(r) * r.powi(d as i32 + 1), T::zero(), T::one(), tol);
            (area / df * second, area * mass)
        }
    };
    Ok(Moments { dimension: d, sigma, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn indicator_values() {
        let k = KernelProfile::<f64>::Indicator;
        assert_eq!(k.eval(0.5).unwrap(), 1.0);
        assert_eq!(k.eval(1.0).unwrap(), 1.0);
        assert_eq!(k.eval(1.5).unwrap(), 0.0);
        assert!(matches!(k.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_normalized_at_zero() {
        let k = KernelProfile::<f64>::truncated_gaussian(3.0).unwrap();
        assert_eq!(k.eval(0.0).unwrap(), 1.0);
        assert_eq!(k.eval(1.0 + 1e-12).unwrap(), 0.0);
        assert!((k.eval(1.0).unwrap() - (-4.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn indicator_moments_low_dimensions() {
        let k = KernelProfile::<f64>::Indicator;
        let m1 = k.moments(1).unwrap();
        assert!((m1.sigma - 2.0 / 3.0).abs() < 1e-12 && (m1.beta - 2.0).abs() < 1e-12);
        let m2 = k.moments(2).unwrap();
        assert!((m2.sigma - PI / 4.0).abs() < 1e-12 && (m2.beta - PI).abs() < 1e-12);
        let m3 = k.moments(3).unwrap();
        assert!((m3.sigma - 4.0 * PI / 15.0).abs() < 1e-12);
        assert!((m3.beta - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn triangular_matches_quadrature() {
        let k = KernelProfile::<f64>::Triangular;
        for d in 1..=5 {
            let m = k.moments(d).unwrap();
            let area = sphere_area::<f64>(d);
            let beta = area * adaptive_simpson(|r: f64| (1.0 - r) * r.powi(d as i32 - 1), 0.0, 1.0, 1e-13);
            let sigma = area / d as f64 * adaptive_simpson(|r: f64| (1.0 - r) * r.powi(d as i32 + 1), 0.0, 1.0, 1e-13);
            assert!((m.beta - beta).abs() < 1e-10, "d={d}");
            assert!((m.sigma - sigma).abs() < 1e-10, "d={d}");
        }
    }

    #[test]
    fn sphere_and_ball_consistent() {
        for d in 1..=8 {
            let lhs = sphere_area::<f64>(d) / d as f64;
            assert!((lhs - unit_ball_volume::<f64>(d)).abs() < 1e-13);
        }
        assert!((sphere_area::<f64>(2) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn kernel_keys_round_trip() {
        for key in ["indicator", "triangular", "gauss:3"] {
            let k: KernelProfile<f64> = key.parse().unwrap();
            assert_eq!(k.to_string(), key);
        }
        assert!("box".parse::<KernelProfile<f64>>().is_err());
        assert!("gauss:-1".parse::<KernelProfile<f64>>().is_err());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(KernelProfile::<f64>::Indicator.moments(0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let m = KernelProfile::<f32>::Indicator.moments(2).unwrap();
        assert!((m.ratio() - 0.25).abs() < 1e-6);
    }
}
