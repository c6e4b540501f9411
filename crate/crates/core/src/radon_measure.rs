//! The Radon-domain density `alpha` of a function given by an atomic spectral
//! measure, its total variation (the `R,U`-norm on a ball), its moments
//! against harmonic tensor monomials, and the ReLU reconstruction
//! `f(x) = int (<omega, x> - b)_+ d alpha + <v, x> + c` on the ball.
//!
//! Because the spectrum is atomic, `alpha` is supported on finitely many
//! directions. Along a direction `omega` it has the density
//! `g_omega(b) = sum_j Re(w_j exp(-i t_j b))` with `w_j = -t_j^2 c_j`.
//! All integrals run over the full `S^(d-1) x (-R, R)` (both `omega` and
//! `-omega` are stored), and in `d = 1` the sphere is the two-point set
//! `{-1, +1}` with counting measure.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::SphericalHarmonic;
use crate::quadrature::{gauss_legendre, sphere_rule, BallGrid, IntervalRule, SphereRule};
use crate::spectrum::{evaluate_f, SpectralMeasure, SYMMETRY_TOL};

/// Minimum number of scan points when bracketing sign changes of `g_omega`.
pub const ROOT_SCAN_POINTS: usize = 512;
/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-12;

/// Quadrature configuration shared by the integrals in this crate.
#[derive(Clone, Debug)]
pub struct Rules {
    /// Reference Gauss-Legendre rule on `[-1, 1]`, mapped onto panels.
    pub line: IntervalRule,
    /// Rule on `S^(d-1)`; `None` for `d > 3`.
    pub sphere: Option<SphereRule>,
    /// Upper bound on `panel width * max frequency` for oscillatory profiles.
    pub max_panel_phase: f64,
    /// Panels used on a finite support window of a test function.
    pub window_panels: usize,
}

impl Rules {
    pub fn new(d: usize, line_nodes: usize, sphere_resolution: usize) -> Result<Self> {
        let sphere = if d <= 3 {
            Some(sphere_rule(d, sphere_resolution)?)
        } else {
            None
        };
        Ok(Self {
            line: gauss_legendre(line_nodes, -1.0, 1.0)?,
            sphere,
            max_panel_phase: 2.0,
            window_panels: 4,
        })
    }

    /// 32-point line rule; 64 circle points or a 16 x 32 sphere grid.
    pub fn default_for(d: usize) -> Result<Self> {
        let m = if d == 3 { 16 } else { 64 };
        Self::new(d, 32, m)
    }

    pub fn sphere(&self) -> Result<&SphereRule> {
        self.sphere.as_ref().ok_or(Error::UnsupportedDimension {
            dim: 0,
            hint: "no deterministic sphere rule configured for this dimension",
        })
    }

    fn panels(&self, width: f64, max_freq: f64) -> usize {
        ((width * max_freq / self.max_panel_phase).ceil() as usize).max(1)
    }
}

/// A function on `S^(d-1) x R` to pair against a measure.
pub trait TestFunction {
    fn eval(&self, omega: &[f64], b: f64) -> f64;

    /// Interval in `b` outside of which the function vanishes, if known.
    fn b_window(&self, _omega: &[f64]) -> Option<(f64, f64)> {
        None
    }
}

impl<F> TestFunction for F
where
    F: Fn(&[f64], f64) -> f64,
{
    fn eval(&self, omega: &[f64], b: f64) -> f64 {
        self(omega, b)
    }
}

/// `Y_{k,j}(omega) * b^k'`.
#[derive(Clone, Copy, Debug)]
pub struct HarmonicMonomial {
    pub harmonic: SphericalHarmonic,
    pub kprime: usize,
}

impl TestFunction for HarmonicMonomial {
    fn eval(&self, omega: &[f64], b: f64) -> f64 {
        self.harmonic.eval(omega) * b.powi(self.kprime as i32)
    }
}

/// A signed measure on `S^(d-1) x (-R, R)` that can be integrated against
/// ReLU ramps and test functions.
pub trait HyperplaneDensity: Sync {
    fn dim(&self) -> usize;
    fn radius(&self) -> f64;

    /// `int (<omega, x> - b)_+ d alpha(omega, b)` for `||x|| < R`.
    fn ramp_integral(&self, x: &[f64], rules: &Rules) -> Result<f64>;

    /// `int psi d alpha`.
    fn pair(&self, psi: &dyn TestFunction, rules: &Rules) -> Result<f64>;
}

/// Sum of several densities on the same ball.
pub struct Superposition<'a> {
    parts: Vec<&'a dyn HyperplaneDensity>,
}

impl<'a> Superposition<'a> {
    pub fn new(parts: Vec<&'a dyn HyperplaneDensity>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("empty superposition".into()))?;
        let (d, r) = (first.dim(), first.radius());
        if parts.iter().any(|p| p.dim() != d || (p.radius() - r).abs() > 1e-15) {
            return Err(Error::InvalidInput(
                "superposed densities must share dimension and radius".into(),
            ));
        }
        Ok(Self { parts })
    }
}

impl HyperplaneDensity for Superposition<'_> {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn radius(&self) -> f64 {
        self.parts[0].radius()
    }

    fn ramp_integral(&self, x: &[f64], rules: &Rules) -> Result<f64> {
        self.parts.iter().map(|p| p.ramp_integral(x, rules)).sum()
    }

    fn pair(&self, psi: &dyn TestFunction, rules: &Rules) -> Result<f64> {
        self.parts.iter().map(|p| p.pair(psi, rules)).sum()
    }
}

/// Density of `alpha` along one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionProfile {
    pub direction: Vec<f64>,
    /// `(t, w)` pairs; `g(b) = sum Re(w exp(-i t b))`.
    pub terms: Vec<(f64, Complex64)>,
}

impl DirectionProfile {
    pub fn value_complex(&self, b: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(t, w)| {
                let ph = -t * b;
                w * Complex64::new(ph.cos(), ph.sin())
            })
            .sum()
    }

    pub fn value(&self, b: f64) -> f64 {
        self.value_complex(b).re
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|(t, _)| t.abs()).fold(0.0, f64::max)
    }

    fn scale(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w.norm()).sum::<f64>().max(1.0)
    }

    /// `[lo, roots..., hi]`: sign-change points of `g` bracketed on a scan
    /// grid and refined by bisection.
    pub fn sign_breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = ROOT_SCAN_POINTS.max(((hi - lo) * self.max_frequency() * 8.0).ceil() as usize);
        let h = (hi - lo) / n as f64;
        let mut breaks = vec![lo];
        let mut prev_b = lo;
        let mut prev_v = self.value(lo);
        for i in 1..=n {
            let b = if i == n { hi } else { lo + h * i as f64 };
            let v = self.value(b);
            if prev_v != 0.0 && v != 0.0 && (prev_v < 0.0) != (v < 0.0) {
                let (mut a, mut c) = (prev_b, b);
                let va = prev_v;
                while c - a > ROOT_TOL {
                    let m = 0.5 * (a + c);
                    let vm = self.value(m);
                    if vm == 0.0 {
                        a = m;
                        c = m;
                        break;
                    }
                    if (vm < 0.0) == (va < 0.0) {
                        a = m;
                    } else {
                        c = m;
                    }
                }
                breaks.push(0.5 * (a + c));
            } else if v == 0.0 && i < n {
                breaks.push(b);
            }
            prev_b = b;
            prev_v = v;
        }
        breaks.push(hi);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        breaks
    }

    /// `int_lo^hi |g(b)| db` with panels split at sign changes.
    pub fn abs_integral(&self, lo: f64, hi: f64, rules: &Rules) -> f64 {
        if self.terms.is_empty() || hi <= lo {
            return 0.0;
        }
        let tmax = self.max_frequency();
        self.sign_breaks(lo, hi)
            .windows(2)
            .map(|w| {
                let p = rules.panels(w[1] - w[0], tmax);
                rules
                    .line
                    .integrate_composite(w[0], w[1], p, |b| self.value(b).abs())
            })
            .sum()
    }

    /// `int_lo^hi phi(b) g(b) db` for a smooth weight `phi`.
    pub fn weighted_integral<F>(&self, lo: f64, hi: f64, panels: usize, rules: &Rules, phi: F) -> f64
    where
        F: Fn(f64) -> f64,
    {
        if self.terms.is_empty() || hi <= lo {
            return 0.0;
        }
        let p = rules.panels(hi - lo, self.max_frequency()).max(panels);
        rules
            .line
            .integrate_composite(lo, hi, p, |b| phi(b) * self.value(b))
    }
}

/// `alpha` for an atomic spectrum on `B_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadonDensity {
    dim: usize,
    radius: f64,
    profiles: Vec<DirectionProfile>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SYMMETRY_TOL)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RadonDensity {
    /// Build from explicit profiles; checks evenness and realness.
    pub fn from_profiles(dim: usize, radius: f64, mut profiles: Vec<DirectionProfile>) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        if profiles.iter().any(|p| p.direction.len() != dim) {
            return Err(Error::InvalidInput("profile direction has wrong dimension".into()));
        }
        profiles.sort_by(|a, b| lex_cmp(&a.direction, &b.direction));
        let alpha = Self {
            dim,
            radius,
            profiles,
        };
        alpha.check_invariants()?;
        Ok(alpha)
    }

    pub fn empty(dim: usize, radius: f64) -> Self {
        Self {
            dim,
            radius,
            profiles: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn profiles(&self) -> &[DirectionProfile] {
        &self.profiles
    }

    pub fn profile(&self, omega: &[f64]) -> Option<&DirectionProfile> {
        self.profiles
            .iter()
            .find(|p| same_direction(&p.direction, omega))
    }

    /// Realness and evenness `g_omega(b) = g_{-omega}(-b)` on a sample grid.
    pub fn check_invariants(&self) -> Result<()> {
        const SAMPLES: usize = 33;
        let r = self.radius;
        for p in &self.profiles {
            let neg: Vec<f64> = p.direction.iter().map(|v| -v).collect();
            let partner = self.profile(&neg);
            let tol = SYMMETRY_TOL * p.scale();
            for i in 0..SAMPLES {
                let b = -r + 2.0 * r * i as f64 / (SAMPLES - 1) as f64;
                let v = p.value_complex(b);
                if v.im.abs() > tol {
                    return Err(Error::InconsistentMeasure(format!(
                        "density along {:?} has imaginary residue {} at b={b}",
                        p.direction, v.im
                    )));
                }
                let mirrored = partner.map_or(0.0, |q| q.value(-b));
                if (v.re - mirrored).abs() > tol {
                    return Err(Error::InconsistentMeasure(format!(
                        "density is not even: g({:?}, {b}) = {} but g(-omega, -b) = {mirrored}",
                        p.direction, v.re
                    )));
                }
            }
        }
        Ok(())
    }

    /// `int_{-R}^{R} |g_omega|` for every stored direction, in storage order.
    pub fn direction_masses(&self, rules: &Rules) -> Vec<f64> {
        self.profiles
            .iter()
            .map(|p| p.abs_integral(-self.radius, self.radius, rules))
            .collect()
    }
}

impl HyperplaneDensity for RadonDensity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn ramp_integral(&self, x: &[f64], rules: &Rules) -> Result<f64> {
        check_inside(x, self.dim, self.radius)?;
        Ok(self
            .profiles
            .iter()
            .map(|p| {
                let c = dot(&p.direction, x);
                p.weighted_integral(-self.radius, c, 1, rules, |b| c - b)
            })
            .sum())
    }

    fn pair(&self, psi: &dyn TestFunction, rules: &Rules) -> Result<f64> {
        let r = self.radius;
        Ok(self
            .profiles
            .iter()
            .map(|p| {
                let (lo, hi, panels) = match psi.b_window(&p.direction) {
                    Some((a, b)) => (a.max(-r), b.min(r), rules.window_panels),
                    None => (-r, r, 1),
                };
                p.weighted_integral(lo, hi, panels, rules, |b| psi.eval(&p.direction, b))
            })
            .sum())
    }
}

pub(crate) fn check_inside(x: &[f64], dim: usize, radius: f64) -> Result<()> {
    if x.len() != dim {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, expected {dim}",
            x.len()
        )));
    }
    let n = dot(x, x).sqrt();
    if !(n < radius) {
        return Err(Error::Domain(format!(
            "point {x:?} (norm {n}) is outside the open ball of radius {radius}"
        )));
    }
    Ok(())
}

/// `alpha(omega, b) = -sum_t t^2 c exp(-i t b)` grouped by direction.
pub fn alpha_from_spectrum(mu: &SpectralMeasure, radius: f64) -> Result<RadonDensity> {
    let mut profiles: Vec<DirectionProfile> = Vec::new();
    for atom in mu.atoms() {
        let w = -atom.frequency * atom.frequency * atom.coefficient;
        match profiles
            .iter_mut()
            .find(|p| same_direction(&p.direction, &atom.direction))
        {
            Some(p) => p.terms.push((atom.frequency, w)),
            None => profiles.push(DirectionProfile {
                direction: atom.direction.clone(),
                terms: vec![(atom.frequency, w)],
            }),
        }
    }
    RadonDensity::from_profiles(mu.dim(), radius, profiles)
}

/// `||alpha||_TV = sum_omega int_{-R}^{R} |g_omega(b)| db`.
pub fn ru_norm(alpha: &RadonDensity, rules: &Rules) -> f64 {
    alpha.direction_masses(rules).iter().sum()
}

/// `int_{-R}^{R} |f''(b)| db` by adaptive bisection with `rule`, independent
/// of the sign-change splitting used by [`ru_norm`]. One-dimensional only.
pub fn d1_norm_oracle<F>(f_second: F, radius: f64, rule: &IntervalRule, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        rule: &IntervalRule,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        const MIN_DEPTH: u32 = 40;
        let m = 0.5 * (a + b);
        let left = rule.integrate_on(a, m, |t| f(t).abs());
        let right = rule.integrate_on(m, b, |t| f(t).abs());
        if depth == 0 || (depth <= MIN_DEPTH && (left + right - whole).abs() <= tol) {
            return left + right;
        }
        recurse(f, rule, a, m, left, 0.5 * tol, depth - 1)
            + recurse(f, rule, m, b, right, 0.5 * tol, depth - 1)
    }
    let whole = rule.integrate_on(-radius, radius, |t| f_second(t).abs());
    recurse(&f_second, rule, -radius, radius, whole, tol, 48)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub norm: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Compare `||f||_{R,B_R}` against `2 R C_f`.
pub fn bound_check_2rcf(mu: &SpectralMeasure, radius: f64, rules: &Rules) -> Result<BoundCheck> {
    let alpha = alpha_from_spectrum(mu, radius)?;
    let norm = ru_norm(&alpha, rules);
    let bound = 2.0 * radius * mu.second_moment();
    Ok(BoundCheck {
        norm,
        bound,
        ok: norm <= bound + 1e-10,
    })
}

/// Affine part `<v, x> + c` of the ReLU representation, with the worst
/// residual of the least-squares fit that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePart {
    pub v: Vec<f64>,
    pub c: f64,
    pub max_affine_residual: f64,
}

impl AffinePart {
    pub fn zero(dim: usize) -> Self {
        Self {
            v: vec![0.0; dim],
            c: 0.0,
            max_affine_residual: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.v, x) + self.c
    }
}

/// `int (<omega, x> - b)_+ d alpha + <v, x> + c` for `x` in the open ball.
pub fn reconstruct(
    alpha: &dyn HyperplaneDensity,
    affine: &AffinePart,
    x: &[f64],
    rules: &Rules,
) -> Result<f64> {
    Ok(alpha.ramp_integral(x, rules)? + affine.eval(x))
}

/// Least-squares affine fit of `f(x) - int (<omega, x> - b)_+ d alpha` on the grid.
pub fn fit_affine(
    mu: &SpectralMeasure,
    alpha: &dyn HyperplaneDensity,
    grid: &BallGrid,
    rules: &Rules,
) -> Result<AffinePart> {
    let d = mu.dim();
    if alpha.dim() != d || grid.dim != d {
        return Err(Error::InvalidInput("dimension mismatch in affine fit".into()));
    }
    let m = grid.points.len();
    if m < d + 2 {
        return Err(Error::SingularFit(format!(
            "{m} grid points cannot determine {} affine coefficients with a residual",
            d + 1
        )));
    }
    let mut design = DMatrix::<f64>::zeros(m, d + 1);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, x) in grid.points.iter().enumerate() {
        for (k, xk) in x.iter().enumerate() {
            design[(i, k)] = *xk;
        }
        design[(i, d)] = 1.0;
        rhs[i] = evaluate_f(mu, x)? - alpha.ramp_integral(x, rules)?;
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::SingularFit(format!(
            "grid is rank deficient (singular values {smin:e} / {smax:e})"
        )));
    }
    let sol = svd
        .solve(&rhs, 1e-14 * smax)
        .map_err(|e| Error::SingularFit(e.to_string()))?;
    let fitted = &design * &sol;
    let resid = (&rhs - fitted).amax();
    Ok(AffinePart {
        v: sol.rows(0, d).iter().copied().collect(),
        c: sol[d],
        max_affine_residual: resid,
    })
}

/// `<alpha, Y_{k,j} (x) X^k'>`; requires `k' < k` and `k = k' (mod 2)`.
pub fn alpha_moment(
    alpha: &dyn HyperplaneDensity,
    k: usize,
    j: usize,
    kprime: usize,
    rules: &Rules,
) -> Result<f64> {
    let d = alpha.dim();
    if !(d == 2 || d == 3) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            hint: "harmonic moments are implemented for d in {2, 3}",
        });
    }
    if kprime >= k || !(k - kprime).is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "moment (k={k}, k'={kprime}) needs k' < k and k = k' mod 2"
        )));
    }
    let psi = HarmonicMonomial {
        harmonic: SphericalHarmonic::new(k, j, d)?,
        kprime,
    };
    alpha.pair(&psi, rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{ball_grid, ball_grid_with_mode, GridMode};
    use crate::spectrum::{example_one_terms, from_cosine_sum, CosineTerm};
    use std::f64::consts::PI;

    fn cos_mu() -> SpectralMeasure {
        from_cosine_sum(
            1,
            &[CosineTerm {
                amplitude: 1.0,
                xi: vec![1.0],
            }],
        )
        .unwrap()
    }

    #[test]
    fn cosine_profile_is_half_negative_cosine() {
        let alpha = alpha_from_spectrum(&cos_mu(), 1.0).unwrap();
        assert_eq!(alpha.profiles().len(), 2);
        for p in alpha.profiles() {
            for &b in &[-0.9, -0.2, 0.0, 0.5] {
                assert!((p.value(b) + 0.5 * f64::cos(b)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn example_one_profile() {
        let e = 0.01;
        let mu = from_cosine_sum(1, &example_one_terms(e)).unwrap();
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let s = (1.0 + e) * (1.0 + e);
        for p in alpha.profiles() {
            for &b in &[-0.7, 0.0, 0.3, 0.99] {
                let want = -0.5 * f64::cos(b) + 0.5 * s * ((1.0 + e) * b).cos();
                assert!((p.value(b) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn empty_spectrum_zero_norm() {
        let alpha = alpha_from_spectrum(&SpectralMeasure::zero(2), 1.0).unwrap();
        let rules = Rules::default_for(2).unwrap();
        assert_eq!(ru_norm(&alpha, &rules), 0.0);
        let b = bound_check_2rcf(&SpectralMeasure::zero(2), 1.0, &rules).unwrap();
        assert!(b.ok && b.norm == 0.0 && b.bound == 0.0);
    }

    #[test]
    fn cosine_norm_is_two() {
        let rules = Rules::default_for(1).unwrap();
        let alpha = alpha_from_spectrum(&cos_mu(), PI / 2.0).unwrap();
        assert!((ru_norm(&alpha, &rules) - 2.0).abs() < 1e-12);
        let oracle = d1_norm_oracle(|b| -b.cos(), PI / 2.0, &rules.line, 1e-14);
        assert!((oracle - 2.0).abs() < 1e-12);
        assert_eq!(d1_norm_oracle(|_| 0.0, 1.0, &rules.line, 1e-14), 0.0);
        let b = bound_check_2rcf(&cos_mu(), PI / 2.0, &rules).unwrap();
        assert!(b.ok);
        assert!((b.bound - PI).abs() < 1e-14);
    }

    #[test]
    fn example_one_norm_matches_oracle() {
        let e = 0.01;
        let rules = Rules::default_for(1).unwrap();
        let mu = from_cosine_sum(1, &example_one_terms(e)).unwrap();
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let norm = ru_norm(&alpha, &rules);
        let s = (1.0 + e) * (1.0 + e);
        let oracle = d1_norm_oracle(|b| -b.cos() + s * ((1.0 + e) * b).cos(), 1.0, &rules.line, 1e-14);
        assert!((norm - oracle).abs() < 1e-8, "{norm} vs {oracle}");
        assert!(norm > 1e-2 && norm < 5e-2);
        assert!(norm <= 1.0 * (e + 4.0 * e + 2.0 * e * e));
    }

    #[test]
    fn norm_grows_with_radius() {
        let rules = Rules::default_for(2).unwrap();
        let mu = from_cosine_sum(
            2,
            &[
                CosineTerm { amplitude: 1.3, xi: vec![2.0, -1.0] },
                CosineTerm { amplitude: -0.4, xi: vec![0.5, 3.0] },
            ],
        )
        .unwrap();
        let mut last = 0.0;
        for r in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let n = ru_norm(&alpha_from_spectrum(&mu, r).unwrap(), &rules);
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn reconstruct_cosine() {
        let rules = Rules::default_for(1).unwrap();
        let mu = cos_mu();
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let grid = ball_grid(1, 1.0, 50, 0).unwrap();
        let aff = fit_affine(&mu, &alpha, &grid, &rules).unwrap();
        assert!(aff.max_affine_residual < 1e-8);
        let v = reconstruct(&alpha, &aff, &[0.3], &rules).unwrap();
        assert!((v - 0.3f64.cos()).abs() < 1e-8);
        assert!(matches!(
            reconstruct(&alpha, &aff, &[1.0], &rules),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn reconstruct_zero_density_is_affine() {
        let rules = Rules::default_for(2).unwrap();
        let alpha = RadonDensity::empty(2, 1.0);
        let aff = AffinePart { v: vec![0.5, -2.0], c: 0.25, max_affine_residual: 0.0 };
        let v = reconstruct(&alpha, &aff, &[0.2, 0.1], &rules).unwrap();
        assert!((v - (0.1 - 0.2 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn cosine_fit_half_pi() {
        let rules = Rules::default_for(1).unwrap();
        let mu = cos_mu();
        let alpha = alpha_from_spectrum(&mu, PI / 2.0).unwrap();
        let grid = ball_grid(1, PI / 2.0, 40, 3).unwrap();
        let aff = fit_affine(&mu, &alpha, &grid, &rules).unwrap();
        assert!(aff.max_affine_residual <= 1e-8);
    }

    #[test]
    fn wrong_density_breaks_affine_fit() {
        let rules = Rules::default_for(1).unwrap();
        let mu = cos_mu();
        let other = from_cosine_sum(1, &[CosineTerm { amplitude: 1.0, xi: vec![1.3] }]).unwrap();
        let alpha = alpha_from_spectrum(&other, 1.0).unwrap();
        let grid = ball_grid(1, 1.0, 50, 0).unwrap();
        let aff = fit_affine(&mu, &alpha, &grid, &rules).unwrap();
        assert!(aff.max_affine_residual > 1e-3);
    }

    #[test]
    fn zero_spectrum_fit() {
        let rules = Rules::default_for(2).unwrap();
        let mu = SpectralMeasure::zero(2);
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let grid = ball_grid(2, 1.0, 30, 0).unwrap();
        let aff = fit_affine(&mu, &alpha, &grid, &rules).unwrap();
        assert!(aff.v.iter().all(|v| v.abs() < 1e-15));
        assert!(aff.c.abs() < 1e-15);
        assert!(aff.max_affine_residual < 1e-15);
    }

    #[test]
    fn collinear_grid_is_singular() {
        let rules = Rules::default_for(2).unwrap();
        let mu = SpectralMeasure::zero(2);
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        let mut grid = ball_grid_with_mode(2, 1.0, 10, 0, GridMode::Lattice).unwrap();
        for p in &mut grid.points {
            p[0] *= 0.5;
            p[1] = 0.5 * p[0];
        }
        let r = fit_affine(&mu, &alpha, &grid, &rules);
        assert!(matches!(r, Err(Error::SingularFit(_))), "{r:?}");
    }

    #[test]
    fn moments() {
        let rules = Rules::default_for(2).unwrap();
        let mu = from_cosine_sum(2, &[CosineTerm { amplitude: 1.0, xi: vec![1.0, 2.0] }]).unwrap();
        let alpha = alpha_from_spectrum(&mu, 1.0).unwrap();
        // g is even in b for a pure cosine, so odd k' moments vanish.
        let m = alpha_moment(&alpha, 3, 1, 1, &rules).unwrap();
        assert!(m.abs() < 1e-14);
        assert!(alpha_moment(&alpha, 3, 1, 2, &rules).is_err());
        assert!(alpha_moment(&alpha, 2, 1, 2, &rules).is_err());
        let zero = RadonDensity::empty(2, 1.0);
        assert_eq!(alpha_moment(&zero, 4, 1, 0, &rules).unwrap(), 0.0);
    }
}
