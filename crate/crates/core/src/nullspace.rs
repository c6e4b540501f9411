//! Harmonic densities `coeff * Y_{k,j}(omega) * b^k'` that represent the zero
//! function on a ball when `k' < k - 2` and `k = k' (mod 2)`, the non-null
//! witness at `k' = k - 2`, and finite networks built from such densities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::harmonics::{weighted_legendre_integral, SphericalHarmonic};
use crate::quadrature::{gauss_legendre, sphere_area, sphere_rule, BallGrid, SphereRule};
use crate::radon_measure::{check_inside, HyperplaneDensity, Rules, TestFunction};
use crate::sparsifier::{Convention, Neuron, TwoLayerNet};

/// Circle resolution used by [`verify_null`] when the caller has no rule.
pub const DEFAULT_NULL_SPHERE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicNullTerm {
    pub k: usize,
    pub j: usize,
    pub kprime: usize,
    pub coeff: f64,
    pub d: usize,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl HarmonicNullTerm {
    pub fn new(k: usize, j: usize, kprime: usize, coeff: f64, d: usize, radius: f64) -> Result<Self> {
        let t = Self { k, j, kprime, coeff, d, radius };
        t.validate()?;
        Ok(t)
    }

    /// `cos(4 theta)` in `d = 2` with `k' = 0`: `cos 4 theta = sqrt(pi) Y_{4,1}`.
    pub fn example_two(radius: f64) -> Self {
        Self {
            k: 4,
            j: 1,
            kprime: 0,
            coeff: std::f64::consts::PI.sqrt(),
            d: 2,
            radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        SphericalHarmonic::new(self.k, self.j, self.d)?;
        if self.kprime % 2 != self.k % 2 {
            return Err(Error::InvalidInput(format!(
                "k = {} and k' = {} must have the same parity",
                self.k, self.kprime
            )));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() || !self.coeff.is_finite() {
            return Err(Error::InvalidInput("radius must be positive and coefficient finite".into()));
        }
        Ok(())
    }

    pub fn harmonic(&self) -> SphericalHarmonic {
        SphericalHarmonic {
            k: self.k,
            j: self.j,
            dim: self.d,
        }
    }

    /// `k' < k - 2`.
    pub fn in_set_a(&self) -> bool {
        self.kprime + 2 < self.k
    }

    /// `k' < k`.
    pub fn in_set_b(&self) -> bool {
        self.kprime < self.k
    }

    pub fn density(&self, omega: &[f64], b: f64) -> f64 {
        self.coeff * self.harmonic().eval(omega) * b.powi(self.kprime as i32)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeff: s * self.coeff, ..*self }
    }

    fn ramp_with(&self, x: &[f64], sphere: &SphereRule) -> Result<f64> {
        check_inside(x, self.d, self.radius)?;
        let y = self.harmonic();
        let mut acc = 0.0;
        for (w, omega) in sphere.weights().iter().zip(sphere.nodes()) {
            let c: f64 = omega.iter().zip(x).map(|(a, b)| a * b).sum();
            acc += w * y.eval(omega) * q_poly(c, self.kprime, self.radius);
        }
        Ok(self.coeff * acc)
    }
}

impl HyperplaneDensity for HarmonicNullTerm {
    fn dim(&self) -> usize {
        self.d
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn ramp_integral(&self, x: &[f64], rules: &Rules) -> Result<f64> {
        self.ramp_with(x, rules.sphere()?)
    }

    fn pair(&self, psi: &dyn TestFunction, rules: &Rules) -> Result<f64> {
        let sphere = rules.sphere()?;
        let y = self.harmonic();
        let r = self.radius;
        let mut acc = 0.0;
        for (w, omega) in sphere.weights().iter().zip(sphere.nodes()) {
            let (lo, hi, panels) = match psi.b_window(omega) {
                Some((a, b)) => (a.max(-r), b.min(r), rules.window_panels),
                None => (-r, r, 1),
            };
            if hi <= lo {
                continue;
            }
            let inner = rules.line.integrate_composite(lo, hi, panels, |b| {
                b.powi(self.kprime as i32) * psi.eval(omega, b)
            });
            acc += w * y.eval(omega) * inner;
        }
        Ok(self.coeff * acc)
    }
}

fn q_poly(c: f64, kp: usize, r: f64) -> f64 {
    let k1 = (kp + 1) as f64;
    let k2 = (kp + 2) as f64;
    (c.powi(kp as i32 + 2) - (-r).powi(kp as i32 + 2)) / (k1 * k2) - (-r).powi(kp as i32 + 1) * (c + r) / k1
}

/// `int_{-R}^{R} (c - b)_+ b^k' db` in closed form.
pub fn ramp_moment_closed_form(c: f64, kprime: usize, radius: f64) -> Result<f64> {
    if !(c.abs() < radius) {
        return Err(Error::Domain(format!("|c| = {} must be below R = {radius}", c.abs())));
    }
    Ok(q_poly(c, kprime, radius))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullVerificationReport {
    pub term: HarmonicNullTerm,
    pub points: usize,
    pub max_abs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Max over `xs` of `|int (<omega, x> - b)_+ h(omega, b)|` for a set-A term.
pub fn verify_null(
    term: &HarmonicNullTerm,
    xs: &BallGrid,
    sphere: &SphereRule,
    tolerance: f64,
) -> Result<NullVerificationReport> {
    term.validate()?;
    if !term.in_set_a() {
        return Err(Error::Precondition(format!(
            "(k, k') = ({}, {}) is not in set A (needs k' < k - 2); use the witness instead",
            term.k, term.kprime
        )));
    }
    if xs.dim != term.d || sphere.dim() != term.d {
        return Err(Error::InvalidInput("term, grid and sphere rule dimensions differ".into()));
    }
    let vals = xs
        .points
        .par_iter()
        .map(|x| term.ramp_with(x, sphere).map(f64::abs))
        .collect::<Result<Vec<f64>>>()?;
    let max_abs = vals.into_iter().fold(0.0, f64::max);
    Ok(NullVerificationReport {
        term: *term,
        points: xs.len(),
        max_abs,
        tolerance,
        pass: max_abs <= tolerance,
    })
}

/// Default sphere rule for [`verify_null`].
pub fn default_null_sphere(d: usize) -> Result<SphereRule> {
    match d {
        3 => sphere_rule(3, 24),
        _ => sphere_rule(d, DEFAULT_NULL_SPHERE),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: f64,
    /// `x = 0`, where the direction `x / ||x||` is undefined.
    pub degenerate: bool,
}

/// Ramp integral of `Y_{k,j} (x) X^(k-2)` at `x`:
/// `||x||^k |S^(d-2)| / (k (k-1)) * Y(x / ||x||) * int t^k P_{k,d} w`.
pub fn witness_nonzero(k: usize, j: usize, d: usize, radius: f64, x: &[f64]) -> Result<Witness> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("the witness needs k >= 2, got {k}")));
    }
    let y = SphericalHarmonic::new(k, j, d)?;
    check_inside(x, d, radius)?;
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Ok(Witness { value: 0.0, degenerate: true });
    }
    let xhat: Vec<f64> = x.iter().map(|v| v / r).collect();
    let moment = weighted_legendre_integral(|t| t.powi(k as i32), k, d)?;
    let value = r.powi(k as i32) * sphere_area(d - 1) / (k * (k - 1)) as f64 * y.eval(&xhat) * moment;
    Ok(Witness { value, degenerate: false })
}

/// `(sphere resolution, interval nodes)` for a width budget `n`.
pub fn null_factorization(term: &HarmonicNullTerm, n: usize) -> (usize, usize) {
    let min_sphere = term.k + term.kprime + 3;
    match term.d {
        3 => {
            // sphere_rule(3, m) has 2 m^2 nodes.
            let m = (((n as f64).powf(2.0 / 3.0) / 2.0).sqrt().round() as usize).max(min_sphere / 2 + 1);
            (m, (n / (2 * m * m)).max(1))
        }
        _ => {
            let m = ((n as f64).sqrt().round() as usize).max(min_sphere);
            (m, (n / m).max(1))
        }
    }
}

/// Product-quadrature network for `h`: atoms `(omega_i, b_i)` with outer
/// weights `h(omega_i, b_i) * w_i`.
pub fn discretize_null(term: &HarmonicNullTerm, n: usize) -> Result<TwoLayerNet> {
    term.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("network width must be at least 1".into()));
    }
    let (ms, mi) = null_factorization(term, n);
    let sphere = sphere_rule(term.d, ms)?;
    let line = gauss_legendre(mi, -term.radius, term.radius)?;
    let mut neurons = Vec::with_capacity(sphere.len() * line.len());
    for (ws, omega) in sphere.weights().iter().zip(sphere.nodes()) {
        for (wb, &b) in line.weights().iter().zip(line.nodes()) {
            neurons.push(Neuron {
                a: term.density(omega, b) * ws * wb,
                omega: omega.clone(),
                b,
            });
        }
    }
    Ok(TwoLayerNet {
        d: term.d,
        convention: Convention::Quadrature,
        kappa: neurons.len() as f64,
        neurons,
        v: vec![0.0; term.d],
        c: 0.0,
    })
}

/// `sum |kappa / n * a_i|`.
pub fn coefficient_mass(net: &TwoLayerNet) -> f64 {
    net.effective_weights().iter().map(|a| a.abs()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeConnectReport {
    pub n: usize,
    pub s: f64,
    pub base_width: usize,
    pub added_neurons: usize,
    pub functional_change: f64,
    pub displacement: f64,
    pub tol_change: f64,
    pub tol_mass: f64,
    pub pass: bool,
}

/// Add `s` times a discretised null network to `base` and measure how much
/// the function and the parameters move.
pub fn mode_connect_perturb(
    base: &TwoLayerNet,
    term: &HarmonicNullTerm,
    n: usize,
    s: f64,
    grid: &BallGrid,
    cal: &Calibration,
) -> Result<(TwoLayerNet, ModeConnectReport)> {
    if base.d != term.d || grid.dim != term.d {
        return Err(Error::InvalidInput("base network, term and grid dimensions differ".into()));
    }
    if (grid.radius - term.radius).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "grid radius {} does not match term radius {}",
            grid.radius, term.radius
        )));
    }
    let null = discretize_null(term, n)?;
    let perturbed = base.concat(&null, s)?;
    // Compare in the folded form so that s = 0 reproduces the base exactly.
    let reference = base.to_quadrature();
    let functional_change = grid
        .points
        .iter()
        .map(|x| (perturbed.eval(x) - reference.eval(x)).abs())
        .fold(0.0, f64::max);
    let displacement = s.abs() * coefficient_mass(&null);
    let pass = functional_change <= cal.modeconnect_change * s.abs().max(1.0)
        && (s == 0.0 || displacement >= cal.modeconnect_mass * s.abs());
    let report = ModeConnectReport {
        n,
        s,
        base_width: base.width(),
        added_neurons: null.width(),
        functional_change,
        displacement,
        tol_change: cal.modeconnect_change,
        tol_mass: cal.modeconnect_mass,
        pass,
    };
    Ok((perturbed, report))
}
