//! Radon and dual Radon transforms in the plane, for smooth bump test
//! functions, with the duality and representer identities.
//!
//! Integrals over the space of lines run over the full `S^1 x R`; the
//! integrands are even, so no half-circle factor appears anywhere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, sphere_rule, IntervalRule, SphereRule};
use crate::radon_measure::{HyperplaneDensity, Rules, TestFunction};
use crate::spectrum::{evaluate_f, SpectralMeasure};

/// `amplitude * exp(-1 / (1 - |x - center|^2 / r^2))` inside the disk, 0 outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub center: Vec<f64>,
    pub r: f64,
    pub amplitude: f64,
}

impl BumpFunction {
    /// The support must lie strictly inside `B_R`.
    pub fn new(center: Vec<f64>, r: f64, amplitude: f64, domain_radius: f64) -> Result<Self> {
        if center.is_empty() || !(r > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidInput("bump needs a center, r > 0 and a finite amplitude".into()));
        }
        let c = center.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(c + r < domain_radius) {
            return Err(Error::Domain(format!(
                "bump support (|center| = {c}, r = {r}) is not inside the ball of radius {domain_radius}"
            )));
        }
        Ok(Self { center, r, amplitude })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn rho(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (self.r * self.r)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let rho = self.rho(x);
        if rho >= 1.0 {
            return 0.0;
        }
        self.amplitude * (-1.0 / (1.0 - rho)).exp()
    }

    /// Closed-form Laplacian.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let rho = self.rho(x);
        if rho >= 1.0 {
            return 0.0;
        }
        let e = 1.0 - rho;
        let phi = self.amplitude * (-1.0 / e).exp();
        let u1 = -1.0 / (e * e);
        let u2 = -2.0 / (e * e * e);
        let r2 = self.r * self.r;
        let grad2 = 4.0 * rho / r2;
        let lap_rho = 2.0 * self.dim() as f64 / r2;
        phi * ((u1 * u1 + u2) * grad2 + u1 * lap_rho)
    }

    /// `int phi(x) dx` in the plane: `A pi r^2 int_0^1 exp(-1/v) dv`.
    pub fn integral_2d(&self, rule: &IntervalRule) -> f64 {
        self.amplitude * PI * self.r * self.r * rule.integrate_on(0.0, 1.0, |v| (-1.0 / v).exp())
    }
}

/// Quadrature resolutions for the planar identities.
#[derive(Clone, Debug)]
pub struct Resolution2d {
    /// Reference rule on `[-1, 1]` along chords.
    pub chord: IntervalRule,
    /// Reference rule on `[-1, 1]` for `b` and the radial variable.
    pub line: IntervalRule,
    pub circle: SphereRule,
}

impl Resolution2d {
    pub fn new(m: usize) -> Result<Self> {
        Ok(Self {
            chord: gauss_legendre(m, -1.0, 1.0)?,
            line: gauss_legendre(m, -1.0, 1.0)?,
            circle: sphere_rule(2, m)?,
        })
    }

    /// 64 x 64.
    pub fn default_2d() -> Self {
        Self::new(64).expect("64-point rules exist")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `int phi(b omega + t omega_perp) dt`.
pub fn radon_transform_2d(phi: &BumpFunction, omega: &[f64], b: f64, chord: &IntervalRule) -> Result<f64> {
    if phi.dim() != 2 || omega.len() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: phi.dim().max(omega.len()),
            hint: "the planar Radon transform needs d = 2",
        });
    }
    Ok(radon_unchecked(phi, omega, b, chord))
}

fn radon_unchecked(phi: &BumpFunction, omega: &[f64], b: f64, chord: &IntervalRule) -> f64 {
    let delta = b - dot(omega, &phi.center);
    let r = phi.r;
    if delta.abs() >= r {
        return 0.0;
    }
    // Along the chord 1 - |x - c|^2 / r^2 = q (1 - s^2), depending on |delta| only.
    let q = 1.0 - (delta * delta) / (r * r);
    let half = (r * r - delta * delta).sqrt();
    let s = chord.integrate_on(-1.0, 1.0, |s| {
        let e = q * (1.0 - s * s);
        if e <= 0.0 {
            0.0
        } else {
            (-1.0 / e).exp()
        }
    });
    phi.amplitude * half * s
}

/// `R phi` as a test function on `S^1 x R`.
pub struct BumpRadon<'a> {
    pub phi: &'a BumpFunction,
    pub chord: &'a IntervalRule,
}

impl TestFunction for BumpRadon<'_> {
    fn eval(&self, omega: &[f64], b: f64) -> f64 {
        radon_unchecked(self.phi, omega, b, self.chord)
    }

    fn b_window(&self, omega: &[f64]) -> Option<(f64, f64)> {
        let c = dot(omega, &self.phi.center);
        Some((c - self.phi.r, c + self.phi.r))
    }
}

const EVEN_TOL: f64 = 1e-12;

fn check_even(psi: &dyn TestFunction, omega: &[f64], b: f64) -> Result<f64> {
    let v = psi.eval(omega, b);
    let neg = [-omega[0], -omega[1]];
    let m = psi.eval(&neg, -b);
    if (v - m).abs() > EVEN_TOL * v.abs().max(m.abs()).max(1.0) {
        return Err(Error::NotEven(format!(
            "psi({omega:?}, {b}) = {v} but psi(-omega, -b) = {m}"
        )));
    }
    Ok(v)
}

/// `int_{S^1} psi(omega, <omega, x>) d omega`; rejects non-even `psi`.
pub fn dual_radon_2d(psi: &dyn TestFunction, x: &[f64], circle: &SphereRule) -> Result<f64> {
    if x.len() != 2 || circle.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: x.len(),
            hint: "the planar dual transform needs d = 2",
        });
    }
    let mut acc = 0.0;
    for (w, omega) in circle.weights().iter().zip(circle.nodes()) {
        acc += w * check_even(psi, omega, dot(omega, x))?;
    }
    Ok(acc)
}

/// Polar quadrature over the support disk of `phi`.
fn over_disk<F>(phi: &BumpFunction, res: &Resolution2d, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut acc = 0.0;
    for (wr, &t) in res.line.weights().iter().zip(res.line.nodes()) {
        let rho = 0.5 * phi.r * (t + 1.0);
        let jac = 0.5 * phi.r * rho;
        for (wa, u) in res.circle.weights().iter().zip(res.circle.nodes()) {
            let x = [phi.center[0] + rho * u[0], phi.center[1] + rho * u[1]];
            acc += wr * wa * jac * f(&x)?;
        }
    }
    Ok(acc)
}

/// `(int (R phi) psi, int phi (R* psi))`.
pub fn duality_check(phi: &BumpFunction, psi: &dyn TestFunction, res: &Resolution2d) -> Result<(f64, f64)> {
    if phi.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: phi.dim(),
            hint: "the duality check is planar",
        });
    }
    let mut lhs = 0.0;
    for (w, omega) in res.circle.weights().iter().zip(res.circle.nodes()) {
        let c = dot(omega, &phi.center);
        let inner = res.line.integrate_on(c - phi.r, c + phi.r, |b| {
            radon_unchecked(phi, omega, b, &res.chord) * psi.eval(omega, b)
        });
        lhs += w * inner;
    }
    let rhs = over_disk(phi, res, |x| Ok(phi.value(x) * dual_radon_2d(psi, x, &res.circle)?))?;
    Ok((lhs, rhs))
}

/// `(<alpha, R phi>, int f Delta phi)`.
pub fn representer_identity_check(
    mu: &SpectralMeasure,
    alpha: &dyn HyperplaneDensity,
    phi: &BumpFunction,
    res: &Resolution2d,
    rules: &Rules,
) -> Result<(f64, f64)> {
    if mu.dim() != 2 || alpha.dim() != 2 || phi.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: mu.dim(),
            hint: "the representer identity check is planar",
        });
    }
    let c = phi.center.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(c + phi.r < alpha.radius()) {
        return Err(Error::Precondition("bump support must lie inside the ball".into()));
    }
    let lhs = alpha.pair(&BumpRadon { phi, chord: &res.chord }, rules)?;
    let rhs = over_disk(phi, res, |x| Ok(evaluate_f(mu, x)? * phi.laplacian(x)))?;
    Ok((lhs, rhs))
}
