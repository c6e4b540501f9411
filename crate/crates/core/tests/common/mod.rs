#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radonlab::spectrum::CosineTerm;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// 1 to 4 cosine terms, frequencies in [0.5, 5], amplitudes in [-2, 2].
pub fn random_terms(rng: &mut ChaCha8Rng, d: usize) -> Vec<CosineTerm> {
    let m = rng.gen_range(1..=4);
    (0..m)
        .map(|_| {
            let u = unit_vector(rng, d);
            let t = rng.gen_range(0.5..5.0);
            CosineTerm {
                amplitude: rng.gen_range(-2.0..2.0),
                xi: u.iter().map(|x| x * t).collect(),
            }
        })
        .collect()
}

/// Second derivative of a one-dimensional cosine sum.
pub fn f_second(terms: &[CosineTerm]) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        terms
            .iter()
            .map(|t| -t.amplitude * t.xi[0] * t.xi[0] * (t.xi[0] * x).cos())
            .sum()
    }
}

/// Uniform point in the ball of radius `r`.
pub fn point_in_ball(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..d).map(|_| r * (2.0 * rng.gen::<f64>() - 1.0)).collect();
        if p.iter().map(|x| x * x).sum::<f64>().sqrt() < r {
            return p;
        }
    }
}
