//! Atomic spectral measures on `S^(d-1) x R`.
//!
//! A function is represented as `f(x) = sum_atoms c * exp(i t <omega, x>)`.
//! Real-valuedness is enforced by the closure conditions: an atom
//! `(omega, t, c)` must be matched by `(-omega, -t, c)`, `(-omega, t, conj c)`
//! and `(omega, -t, conj c)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `||omega||_2 - 1`.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on the imaginary residue of `f(x)` and on atom matching.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralAtom {
    pub direction: Vec<f64>,
    pub frequency: f64,
    pub coefficient: Complex64,
}

/// One term `amplitude * cos(<xi, x>)` of a cosine sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineTerm {
    pub amplitude: f64,
    pub xi: Vec<f64>,
}

/// Raw atom as it appears in `spectrum.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub omega: Vec<f64>,
    pub t: f64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Contents of `spectrum.json`: `{"d": int, "terms": [{"amplitude", "xi"}]}`.
///
/// An optional `atoms` list adds raw spectral atoms; those are checked for
/// symmetry closure when the measure is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub d: usize,
    #[serde(default)]
    pub terms: Vec<CosineTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomSpec>,
}

impl SpectrumFile {
    pub fn to_measure(&self) -> Result<SpectralMeasure> {
        let mut mu = from_cosine_sum(self.d, &self.terms)?;
        if !self.atoms.is_empty() {
            let extra = self
                .atoms
                .iter()
                .map(|a| SpectralAtom {
                    direction: a.omega.clone(),
                    frequency: a.t,
                    coefficient: Complex64::new(a.re, a.im),
                })
                .collect::<Vec<_>>();
            mu.atoms.extend(extra);
            mu = SpectralMeasure::new(self.d, mu.atoms)?;
        }
        Ok(mu)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    dim: usize,
    atoms: Vec<SpectralAtom>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl SpectralMeasure {
    /// Validate unit directions and symmetry closure.
    pub fn new(dim: usize, atoms: Vec<SpectralAtom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        for a in &atoms {
            if a.direction.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "atom direction has {} coordinates, expected {dim}",
                    a.direction.len()
                )));
            }
            if !a.frequency.is_finite() || !a.coefficient.re.is_finite() || !a.coefficient.im.is_finite() {
                return Err(Error::InvalidInput("non-finite atom".into()));
            }
            if (norm2(&a.direction) - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidInput(format!(
                    "direction {:?} is not a unit vector",
                    a.direction
                )));
            }
        }
        let mu = Self { dim, atoms };
        mu.check_closure()?;
        Ok(mu)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            atoms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total coefficient at `(omega, t)` summed over coinciding atoms.
    fn mass_at(&self, omega: &[f64], t: f64) -> Complex64 {
        self.atoms
            .iter()
            .filter(|a| {
                (a.frequency - t).abs() <= SYMMETRY_TOL
                    && a.direction
                        .iter()
                        .zip(omega)
                        .all(|(p, q)| (p - q).abs() <= SYMMETRY_TOL)
            })
            .map(|a| a.coefficient)
            .sum()
    }

    fn check_closure(&self) -> Result<()> {
        for a in &self.atoms {
            let neg: Vec<f64> = a.direction.iter().map(|v| -v).collect();
            let here = self.mass_at(&a.direction, a.frequency);
            let scale = here.norm().max(1.0);
            let partners = [
                (neg.as_slice(), -a.frequency, here),
                (neg.as_slice(), a.frequency, here.conj()),
                (a.direction.as_slice(), -a.frequency, here.conj()),
            ];
            for (w, t, want) in partners {
                let got = self.mass_at(w, t);
                if (got - want).norm() > SYMMETRY_TOL * scale {
                    return Err(Error::InconsistentMeasure(format!(
                        "atom at omega={:?}, t={} has mass {} but its partner at omega={:?}, t={} has {} (expected {})",
                        a.direction, a.frequency, here, w, t, got, want
                    )));
                }
            }
        }
        Ok(())
    }

    /// `sum_atoms |c| t^2`, the constant `C_f` of the function this measure
    /// represents.
    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.coefficient.norm() * a.frequency * a.frequency)
            .sum()
    }

    /// `sum_atoms |c| (t ||omega||_1)^2`, the l1 analogue `C~_f`.
    pub fn l1_second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let l1: f64 = a.direction.iter().map(|v| v.abs()).sum::<f64>() * a.frequency;
                a.coefficient.norm() * l1 * l1
            })
            .sum()
    }

    /// Complex value `sum_atoms c exp(i t <omega, x>)`.
    pub fn evaluate_complex(&self, x: &[f64]) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| {
                let phase = a.frequency * dot(&a.direction, x);
                a.coefficient * Complex64::new(phase.cos(), phase.sin())
            })
            .sum()
    }

    /// Total variation `sum |c|`, used to scale the realness tolerance.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.coefficient.norm()).sum()
    }
}

/// `f(x)`; fails when the imaginary residue exceeds the symmetry tolerance.
pub fn evaluate_f(mu: &SpectralMeasure, x: &[f64]) -> Result<f64> {
    if x.len() != mu.dim {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            mu.dim
        )));
    }
    let v = mu.evaluate_complex(x);
    if v.im.abs() > SYMMETRY_TOL * mu.total_variation().max(1.0) {
        return Err(Error::InconsistentMeasure(format!(
            "imaginary residue {} at x={x:?}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Spectral measure of `sum_i a_i cos(<xi_i, x>)`: four atoms per term at
/// `(+-xi/|xi|, +-|xi|)`, each with coefficient `a_i / 4`.
pub fn from_cosine_sum(dim: usize, terms: &[CosineTerm]) -> Result<SpectralMeasure> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    let mut atoms = Vec::with_capacity(4 * terms.len());
    for term in terms {
        if term.xi.len() != dim {
            return Err(Error::InvalidInput(format!(
                "frequency {:?} has {} coordinates, expected {dim}",
                term.xi,
                term.xi.len()
            )));
        }
        if !term.amplitude.is_finite() || term.xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite cosine term".into()));
        }
        let t = norm2(&term.xi);
        if t == 0.0 {
            return Err(Error::InvalidInput("zero frequency vector".into()));
        }
        let omega: Vec<f64> = term.xi.iter().map(|v| v / t).collect();
        let neg: Vec<f64> = omega.iter().map(|v| -v).collect();
        let c = Complex64::new(term.amplitude / 4.0, 0.0);
        for (w, f) in [(&omega, t), (&neg, -t), (&neg, t), (&omega, -t)] {
            atoms.push(SpectralAtom {
                direction: w.clone(),
                frequency: f,
                coefficient: c,
            });
        }
    }
    SpectralMeasure::new(dim, atoms)
}

/// Breiman's constant `C_f = sum |a_i| ||xi_i||_2^2` for a cosine sum.
pub fn breiman_constant(terms: &[CosineTerm]) -> f64 {
    terms
        .iter()
        .map(|t| t.amplitude.abs() * t.xi.iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// Klusowski-Barron constant `C~_f = sum |a_i| ||xi_i||_1^2`.
pub fn klusowski_constant(terms: &[CosineTerm]) -> f64 {
    terms
        .iter()
        .map(|t| {
            let l1: f64 = t.xi.iter().map(|v| v.abs()).sum();
            t.amplitude.abs() * l1 * l1
        })
        .sum()
}

/// `cos(x) - cos((1 + eps) x)` in one dimension.
pub fn example_one_terms(eps: f64) -> Vec<CosineTerm> {
    vec![
        CosineTerm {
            amplitude: 1.0,
            xi: vec![1.0],
        },
        CosineTerm {
            amplitude: -1.0,
            xi: vec![1.0 + eps],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cosine_atoms() {
        let mu = from_cosine_sum(
            1,
            &[CosineTerm {
                amplitude: 1.0,
                xi: vec![1.0],
            }],
        )
        .unwrap();
        assert_eq!(mu.atoms().len(), 4);
        assert!(mu.atoms().iter().all(|a| a.coefficient == Complex64::new(0.25, 0.0)));
        assert!((evaluate_f(&mu, &[0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example_one_measure() {
        let mu = from_cosine_sum(1, &example_one_terms(0.01)).unwrap();
        assert_eq!(mu.atoms().len(), 8);
        assert!(evaluate_f(&mu, &[0.0]).unwrap().abs() < 1e-15);
        let want = 1f64.cos() - 1.01f64.cos();
        assert!((evaluate_f(&mu, &[1.0]).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn planar_atoms() {
        let mu = from_cosine_sum(
            2,
            &[CosineTerm {
                amplitude: 2.0,
                xi: vec![3.0, 4.0],
            }],
        )
        .unwrap();
        for a in mu.atoms() {
            assert!((a.direction[0].abs() - 0.6).abs() < 1e-15);
            assert!((a.direction[1].abs() - 0.8).abs() < 1e-15);
            assert_eq!(a.frequency.abs(), 5.0);
            assert_eq!(a.coefficient.re, 0.5);
        }
    }

    #[test]
    fn zero_frequency_rejected() {
        let r = from_cosine_sum(
            2,
            &[CosineTerm {
                amplitude: 1.0,
                xi: vec![0.0, 0.0],
            }],
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn asymmetric_atoms_rejected() {
        let atoms = vec![SpectralAtom {
            direction: vec![1.0],
            frequency: 1.0,
            coefficient: Complex64::new(1.0, 0.0),
        }];
        assert!(matches!(
            SpectralMeasure::new(1, atoms),
            Err(Error::InconsistentMeasure(_))
        ));
    }

    #[test]
    fn constants() {
        let e = 0.01;
        let terms = example_one_terms(e);
        let cf = breiman_constant(&terms);
        assert!((cf - (2.0 + 2.0 * e + e * e)).abs() < 1e-14);
        assert!((cf - 2.0201).abs() < 1e-12);
        assert_eq!(klusowski_constant(&terms), cf);
        let one = [CosineTerm {
            amplitude: 1.0,
            xi: vec![1.0],
        }];
        assert_eq!(breiman_constant(&one), 1.0);
        let t = [CosineTerm {
            amplitude: 3.0,
            xi: vec![0.0, 2.0],
        }];
        assert_eq!(breiman_constant(&t), 12.0);
        let t = [CosineTerm {
            amplitude: 1.0,
            xi: vec![1.0, 1.0],
        }];
        assert_eq!(klusowski_constant(&t), 4.0);
        let mu = from_cosine_sum(1, &terms).unwrap();
        assert!((mu.second_moment() - cf).abs() < 1e-14);
    }

    #[test]
    fn spectrum_file_round_trip() {
        let json = r#"{"d": 2, "terms": [{"amplitude": 1.5, "xi": [1.0, -2.0]}]}"#;
        let f: SpectrumFile = serde_json::from_str(json).unwrap();
        let mu = f.to_measure().unwrap();
        let x = [0.3, 0.1];
        let want = 1.5 * (0.3f64 - 0.2).cos();
        assert!((evaluate_f(&mu, &x).unwrap() - want).abs() < 1e-14);
        let bad = r#"{"d": 1, "terms": [], "atoms": [{"omega": [1.0], "t": 2.0, "re": 1.0}]}"#;
        let f: SpectrumFile = serde_json::from_str(bad).unwrap();
        assert!(matches!(f.to_measure(), Err(Error::InconsistentMeasure(_))));
    }
}
