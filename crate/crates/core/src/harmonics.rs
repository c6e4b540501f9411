//! Real spherical harmonics on `S^1` and `S^2`, Legendre polynomials in
//! dimension `d`, harmonic dimension counts and the Funk-Hecke identity.
//!
//! Legendre polynomials use the normalisation `P_{k,d}(1) = 1`; they are
//! orthogonal for the weight `(1 - t^2)^((d-3)/2)` on `[-1, 1]`, which is the
//! weight appearing in the Funk-Hecke formula.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, sphere_area, SphereRule};

/// Highest degree supported for `d = 3` harmonics.
pub const MAX_DEGREE_3D: usize = 12;

/// Nodes used for the one-dimensional side of Funk-Hecke.
const FUNK_HECKE_NODES: usize = 96;

/// Dimension `N_{k,d}` of degree-`k` harmonic homogeneous polynomials in `d`
/// variables: `(2k + d - 2)(k + d - 3)! / (k! (d - 2)!)`, with `N_{0,d} = 1`.
pub fn harmonic_dim(k: usize, d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            hint: "harmonic dimension needs d >= 2; d = 1 is handled by parity",
        });
    }
    if k == 0 {
        return Ok(1);
    }
    // (k + d - 3)! / ((k - 1)! (d - 2)!) = C(k + d - 3, d - 2)
    let binom = binomial((k + d - 3) as u128, (d - 2) as u128);
    let num = (2 * k + d - 2) as u128 * binom;
    debug_assert_eq!(num % k as u128, 0);
    Ok((num / k as u128) as usize)
}

fn binomial(n: u128, r: u128) -> u128 {
    let r = r.min(n - r.min(n));
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Weight `(1 - t^2)^((d - 3)/2)` of the Funk-Hecke integral.
pub fn legendre_weight(d: usize, t: f64) -> f64 {
    (1.0 - t * t).powf((d as f64 - 3.0) / 2.0)
}

/// Legendre polynomial `P_{k,d}` stored as ascending-power coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendrePoly {
    pub degree: usize,
    pub dim: usize,
    pub coefficients: Vec<f64>,
}

impl LegendrePoly {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension {
                dim: d,
                hint: "Legendre polynomials in dimension d need d >= 2",
            });
        }
        let mut prev = vec![1.0];
        let mut cur = vec![0.0, 1.0];
        if k == 0 {
            cur = prev.clone();
        }
        for n in 1..k {
            let nf = n as f64;
            let df = d as f64;
            let a = (2.0 * nf + df - 2.0) / (nf + df - 2.0);
            let b = nf / (nf + df - 2.0);
            let mut next = vec![0.0; n + 2];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += a * c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= b * c;
            }
            prev = cur;
            cur = next;
        }
        Ok(Self {
            degree: k,
            dim: d,
            coefficients: cur,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

fn legendre_recurrence(k: usize, d: usize, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let df = d as f64;
    let (mut prev, mut cur) = (1.0, t);
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + df - 2.0) * t * cur - nf * prev) / (nf + df - 2.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_{k,d}(t)`, normalised so that `P_{k,d}(1) = 1`. For `d = 2` this is the
/// Chebyshev polynomial `cos(k arccos t)`; for `d = 3` the classical Legendre
/// polynomial.
pub fn legendre_eval(k: usize, d: usize, t: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            hint: "Legendre polynomials in dimension d need d >= 2",
        });
    }
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!("Legendre argument {t} outside [-1, 1]")));
    }
    Ok(legendre_recurrence(k, d, t))
}

/// One member `Y_{k,j}` of the real orthonormal harmonic basis of `L^2(S^(d-1))`.
///
/// Index layout for `d = 2`: `j = 1` is `cos(k theta)/sqrt(pi)`, `j = 2` is
/// `sin(k theta)/sqrt(pi)`. For `d = 3`, `j = 2m - 1` and `j = 2m` carry the
/// cosine and sine of order `m = 1..=k`, and `j = 2k + 1` is the zonal term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphericalHarmonic {
    pub k: usize,
    pub j: usize,
    pub dim: usize,
}

impl SphericalHarmonic {
    pub fn new(k: usize, j: usize, dim: usize) -> Result<Self> {
        match dim {
            2 => {}
            3 if k <= MAX_DEGREE_3D => {}
            3 => {
                return Err(Error::InvalidInput(format!(
                    "degree {k} exceeds the d = 3 cap of {MAX_DEGREE_3D}"
                )))
            }
            _ => {
                return Err(Error::UnsupportedDimension {
                    dim,
                    hint: "spherical harmonics are implemented for d in {2, 3}",
                })
            }
        }
        let n = harmonic_dim(k, dim)?;
        if j == 0 || j > n {
            return Err(Error::InvalidIndex { k, j, dim });
        }
        Ok(Self { k, j, dim })
    }

    /// Value at `omega`; `omega` is expected to be a unit vector.
    pub fn eval(&self, omega: &[f64]) -> f64 {
        match self.dim {
            2 => eval_circle(self.k, self.j, omega),
            _ => eval_sphere(self.k, self.j, omega),
        }
    }
}

/// `(x + iy)^m` by repeated multiplication.
fn complex_power(x: f64, y: f64, m: usize) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..m {
        let r = re * x - im * y;
        im = re * y + im * x;
        re = r;
    }
    (re, im)
}

fn eval_circle(k: usize, j: usize, omega: &[f64]) -> f64 {
    if k == 0 {
        return 1.0 / (2.0 * PI).sqrt();
    }
    let (re, im) = complex_power(omega[0], omega[1], k);
    let v = if j == 1 { re } else { im };
    v / PI.sqrt()
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Associated Legendre function divided by `(1 - z^2)^(m/2)`, no Condon-Shortley phase.
fn assoc_legendre_reduced(l: usize, m: usize, z: f64) -> f64 {
    let mut pmm = 1.0;
    for i in 1..=m {
        pmm *= (2 * i - 1) as f64;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = (2 * m + 1) as f64 * z * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm0 = pmm;
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * z * pm1 - (ll + m - 1) as f64 * pm0) / (ll - m) as f64;
        pm0 = pm1;
        pm1 = p;
    }
    pm1
}

fn eval_sphere(k: usize, j: usize, omega: &[f64]) -> f64 {
    let (x, y, z) = (omega[0], omega[1], omega[2]);
    let (m, trig) = if j == 2 * k + 1 {
        (0, None)
    } else {
        (j.div_ceil(2), Some(j % 2 == 1))
    };
    let norm = ((2 * k + 1) as f64 / (4.0 * PI) * factorial(k - m) / factorial(k + m)).sqrt();
    let radial = assoc_legendre_reduced(k, m, z);
    match trig {
        None => norm * radial,
        Some(is_cos) => {
            let (re, im) = complex_power(x, y, m);
            let azim = if is_cos { re } else { im };
            std::f64::consts::SQRT_2 * norm * radial * azim
        }
    }
}

/// Value of the orthonormal harmonic `Y_{k,j}` on `S^(d-1)` at `omega`.
pub fn harmonic_eval(k: usize, j: usize, d: usize, omega: &[f64]) -> Result<f64> {
    let y = SphericalHarmonic::new(k, j, d)?;
    if omega.len() != d {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, expected {d}",
            omega.len()
        )));
    }
    Ok(y.eval(omega))
}

/// `int_{-1}^{1} eta(t) P_{k,d}(t) (1 - t^2)^((d-3)/2) dt`, computed as
/// `int_0^pi eta(cos s) P_{k,d}(cos s) sin^(d-2)(s) ds` so the weight never
/// becomes singular.
pub fn weighted_legendre_integral<F>(eta: F, k: usize, d: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let p = LegendrePoly::new(k, d)?;
    let rule = gauss_legendre(FUNK_HECKE_NODES, 0.0, PI)?;
    Ok(rule.integrate(|&s| {
        let t = s.cos();
        eta(t) * p.eval(t) * s.sin().powi(d as i32 - 2)
    }))
}

/// Both sides of the Funk-Hecke identity
/// `int_S eta(<omega, x>) Y(x) dx = |S^(d-2)| Y(omega) int eta P_{k,d} w`.
///
/// The left side uses `rule`; the right side a fixed high-order 1-D rule.
pub fn funk_hecke_check<F>(
    eta: F,
    y: &SphericalHarmonic,
    omega: &[f64],
    rule: &SphereRule,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if rule.dim() != y.dim || omega.len() != y.dim {
        return Err(Error::InvalidInput("dimension mismatch in Funk-Hecke check".into()));
    }
    let lhs = rule.integrate(|x| {
        let t: f64 = omega.iter().zip(x).map(|(a, b)| a * b).sum();
        eta(t) * y.eval(x)
    });
    let rhs = sphere_area(y.dim - 1) * y.eval(omega) * weighted_legendre_integral(eta, y.k, y.dim)?;
    Ok((lhs, rhs))
}
