//! Finite-width networks sampled from a Radon density, and sup-norm error
//! experiments.
//!
//! Sampling draws `(omega_i, b_i)` i.i.d. from `|alpha| / ||alpha||`, sets
//! `a_i = sign(alpha)` at the sample, and evaluates
//! `kappa / n * sum a_i (<omega_i, x> - b_i)_+ + <v, x> + c`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{ball_grid, BallGrid};
use crate::radon_measure::{
    alpha_from_spectrum, fit_affine, AffinePart, DirectionProfile, RadonDensity, Rules,
};
use crate::spectrum::{evaluate_f, SpectralMeasure};

/// Knots per direction in the inverse-CDF tables.
pub const TABLE_KNOTS: usize = 4096;
/// Size of the fixed evaluation grid used by [`error_decay_experiment`].
pub const DECAY_GRID_POINTS: usize = 500;
/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RADONLAB_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `|a| = 1`, `||omega||_2 = 1`, `b` in `(-R, R)`.
    Thm2,
    /// `|a| <= 1`, `||omega||_1 = 1`, `b` in `[0, 1]`.
    Prop2,
    /// Free outer weights; `kappa = n`.
    Quadrature,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm2" => Ok(Self::Thm2),
            "prop2" => Ok(Self::Prop2),
            "quadrature" => Ok(Self::Quadrature),
            _ => Err(Error::Parse(format!("unknown convention `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neuron {
    pub a: f64,
    pub omega: Vec<f64>,
    pub b: f64,
}

/// `kappa / n * sum a_i (<omega_i, x> - b_i)_+ + <v, x> + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerNet {
    pub d: usize,
    pub convention: Convention,
    pub kappa: f64,
    pub neurons: Vec<Neuron>,
    pub v: Vec<f64>,
    pub c: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

impl TwoLayerNet {
    pub fn affine(d: usize, affine: &AffinePart) -> Self {
        Self {
            d,
            convention: Convention::Quadrature,
            kappa: 0.0,
            neurons: Vec::new(),
            v: affine.v.clone(),
            c: affine.c,
        }
    }

    pub fn width(&self) -> usize {
        self.neurons.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for nrn in &self.neurons {
            let z = dot(&nrn.omega, x) - nrn.b;
            if z > 0.0 {
                s += nrn.a * z;
            }
        }
        let hidden = if self.neurons.is_empty() {
            0.0
        } else {
            self.kappa / self.neurons.len() as f64 * s
        };
        hidden + dot(&self.v, x) + self.c
    }

    /// Outer weights as they enter the sum, `kappa / n * a_i`.
    pub fn effective_weights(&self) -> Vec<f64> {
        let n = self.neurons.len().max(1) as f64;
        self.neurons.iter().map(|p| self.kappa / n * p.a).collect()
    }

    /// Same function, with `kappa / n` folded into the outer weights.
    pub fn to_quadrature(&self) -> Self {
        let w = self.effective_weights();
        let n = self.neurons.len();
        Self {
            d: self.d,
            convention: Convention::Quadrature,
            kappa: n as f64,
            neurons: self
                .neurons
                .iter()
                .zip(w)
                .map(|(p, a)| Neuron {
                    a,
                    omega: p.omega.clone(),
                    b: p.b,
                })
                .collect(),
            v: self.v.clone(),
            c: self.c,
        }
    }

    /// `self + s * other` as one wider quadrature-convention network.
    pub fn concat(&self, other: &Self, s: f64) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::InvalidInput(format!(
                "cannot combine networks in d={} and d={}",
                self.d, other.d
            )));
        }
        let mut neurons: Vec<Neuron> = Vec::with_capacity(self.width() + other.width());
        for (p, a) in self.neurons.iter().zip(self.effective_weights()) {
            neurons.push(Neuron { a, omega: p.omega.clone(), b: p.b });
        }
        for (p, a) in other.neurons.iter().zip(other.effective_weights()) {
            neurons.push(Neuron { a: s * a, omega: p.omega.clone(), b: p.b });
        }
        let n = neurons.len();
        // With kappa = n the factor kappa / n is exactly one.
        Ok(Self {
            d: self.d,
            convention: Convention::Quadrature,
            kappa: n as f64,
            neurons,
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + s * b).collect(),
            c: self.c + s * other.c,
        })
    }

    /// Check the weight constraints of the network's convention exactly.
    /// `radius` is needed for the `thm2` bias range.
    pub fn check_constraints(&self, radius: f64) -> Result<()> {
        let bad = |i: usize, msg: String| Err(Error::InvalidInput(format!("neuron {i}: {msg}")));
        if self.v.len() != self.d {
            return Err(Error::InvalidInput("skip weights have wrong length".into()));
        }
        for (i, p) in self.neurons.iter().enumerate() {
            if p.omega.len() != self.d {
                return bad(i, "direction has wrong dimension".into());
            }
            match self.convention {
                Convention::Thm2 => {
                    if p.a != 1.0 && p.a != -1.0 {
                        return bad(i, format!("a = {} is not +-1", p.a));
                    }
                    let n2 = dot(&p.omega, &p.omega).sqrt();
                    if (n2 - 1.0).abs() > 1e-12 {
                        return bad(i, format!("||omega||_2 = {n2}"));
                    }
                    if !(p.b > -radius && p.b < radius) {
                        return bad(i, format!("b = {} outside (-R, R)", p.b));
                    }
                }
                Convention::Prop2 => {
                    if !(p.a.abs() <= 1.0) {
                        return bad(i, format!("|a| = {} > 1", p.a.abs()));
                    }
                    if l1(&p.omega) != 1.0 {
                        return bad(i, format!("||omega||_1 = {}", l1(&p.omega)));
                    }
                    if !(0.0..=1.0).contains(&p.b) {
                        return bad(i, format!("b = {} outside [0, 1]", p.b));
                    }
                }
                Convention::Quadrature => {}
            }
        }
        Ok(())
    }
}

/// Piecewise-linear `|g|` on a uniform knot grid with its cumulative mass.
#[derive(Clone, Debug)]
struct InverseCdf {
    lo: f64,
    h: f64,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl InverseCdf {
    fn new(profile: &DirectionProfile, lo: f64, hi: f64, knots: usize) -> Self {
        let h = (hi - lo) / (knots - 1) as f64;
        let values: Vec<f64> = (0..knots)
            .map(|i| profile.value(lo + h * i as f64).abs())
            .collect();
        let mut cumulative = Vec::with_capacity(knots);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Self { lo, h, values, cumulative }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Sample for `u` in `[0, 1)`.
    fn sample(&self, u: f64) -> f64 {
        let target = u * self.total();
        let i = self
            .cumulative
            .partition_point(|&c| c <= target)
            .clamp(1, self.cumulative.len() - 1)
            - 1;
        let rem = target - self.cumulative[i];
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let slope = (y1 - y0) / self.h;
        // Solve y0 s + slope s^2 / 2 = rem in the cancellation-free form.
        let disc = (y0 * y0 + 2.0 * slope * rem).max(0.0);
        let denom = y0 + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * rem / denom } else { 0.0 };
        self.lo + self.h * i as f64 + s.clamp(0.0, self.h)
    }
}

/// Direction masses and per-direction inverse-CDF tables for one density.
#[derive(Clone, Debug)]
pub struct ImportanceSampler {
    alpha: RadonDensity,
    masses: Vec<f64>,
    norm: f64,
    tables: Vec<InverseCdf>,
}

impl ImportanceSampler {
    pub fn new(alpha: &RadonDensity, rules: &Rules) -> Result<Self> {
        let masses = alpha.direction_masses(rules);
        let norm: f64 = masses.iter().sum();
        Self::with_norm(alpha, masses, norm)
    }

    fn with_norm(alpha: &RadonDensity, masses: Vec<f64>, norm: f64) -> Result<Self> {
        if !(norm > 0.0) {
            return Err(Error::DegenerateMeasure(
                "the density has zero total variation; nothing to sample".into(),
            ));
        }
        let r = alpha.radius();
        let tables = alpha
            .profiles()
            .iter()
            .map(|p| InverseCdf::new(p, -r, r, TABLE_KNOTS))
            .collect();
        Ok(Self {
            alpha: alpha.clone(),
            masses,
            norm,
            tables,
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `sum_omega ||omega||_1 int |g_omega|`.
    pub fn l1_kappa(&self) -> f64 {
        self.alpha
            .profiles()
            .iter()
            .zip(&self.masses)
            .map(|(p, m)| l1(&p.direction) * m)
            .sum()
    }

    fn pick(weights: &[f64], total: f64, u: f64) -> usize {
        let target = u * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    fn draw(&self, weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> (usize, f64, f64) {
        let k = Self::pick(weights, total, rng.gen::<f64>());
        let r = self.alpha.radius();
        let mut b = self.tables[k].sample(rng.gen::<f64>());
        if b <= -r {
            b = (-r).next_up();
        } else if b >= r {
            b = r.next_down();
        }
        let g = self.alpha.profiles()[k].value(b);
        let a = if g < 0.0 { -1.0 } else { 1.0 };
        (k, b, a)
    }

    /// Thm 2 network with `kappa = norm`.
    pub fn sample_thm2(&self, n: usize, affine: &AffinePart, rng: &mut ChaCha8Rng) -> TwoLayerNet {
        let neurons = (0..n)
            .map(|_| {
                let (k, b, a) = self.draw(&self.masses, self.norm, rng);
                Neuron {
                    a,
                    omega: self.alpha.profiles()[k].direction.clone(),
                    b,
                }
            })
            .collect();
        TwoLayerNet {
            d: self.alpha.dim(),
            convention: Convention::Thm2,
            kappa: self.norm,
            neurons,
            v: affine.v.clone(),
            c: affine.c,
        }
    }

    /// l1-normalised network on the unit ball.
    pub fn sample_prop2(
        &self,
        n: usize,
        affine: &AffinePart,
        rules: &Rules,
        rng: &mut ChaCha8Rng,
    ) -> Result<TwoLayerNet> {
        let r = self.alpha.radius();
        if r > 1.0 {
            return Err(Error::Domain(format!(
                "the l1 construction needs the domain inside the unit ball, got R = {r}"
            )));
        }
        let d = self.alpha.dim();
        let weights: Vec<f64> = self
            .alpha
            .profiles()
            .iter()
            .zip(&self.masses)
            .map(|(p, m)| l1(&p.direction) * m)
            .collect();
        let kappa: f64 = weights.iter().sum();

        // (<w, x> - b)_+ = (<-w, x> + b)_+ + <w, x> - b, so mass at b < 0
        // moves to (-w, -b) and leaves an affine remainder.
        let mut v = affine.v.clone();
        let mut c = affine.c;
        for p in self.alpha.profiles() {
            let m0 = p.weighted_integral(-r, 0.0, 1, rules, |_| 1.0);
            let m1 = p.weighted_integral(-r, 0.0, 1, rules, |b| b);
            for (vi, wi) in v.iter_mut().zip(&p.direction) {
                *vi += wi * m0;
            }
            c -= m1;
        }

        let mut neurons = Vec::with_capacity(n);
        for _ in 0..n {
            let (k, b, a) = self.draw(&weights, kappa, rng);
            let dir = &self.alpha.profiles()[k].direction;
            let (omega, b): (Vec<f64>, f64) = if b < 0.0 {
                (dir.iter().map(|w| -w).collect(), -b)
            } else {
                (dir.clone(), b)
            };
            let s = l1(&omega);
            let mut om: Vec<f64> = omega.iter().map(|w| w / s).collect();
            force_unit_l1(&mut om);
            neurons.push(Neuron {
                a,
                omega: om,
                b: (b / s).abs().min(1.0),
            });
        }
        Ok(TwoLayerNet {
            d,
            convention: Convention::Prop2,
            kappa,
            neurons,
            v,
            c,
        })
    }
}

/// Adjust the last nonzero component so that the left-to-right sum of
/// absolute values is exactly one.
fn force_unit_l1(w: &mut [f64]) {
    let Some(last) = w.iter().rposition(|v| *v != 0.0) else {
        return;
    };
    let head: f64 = w[..last].iter().map(|v| v.abs()).sum();
    let sign = w[last].signum();
    let mut m = (1.0 - head).max(0.0);
    for _ in 0..4 {
        w[last] = sign * m;
        let total = l1(w);
        if total == 1.0 {
            return;
        }
        m = if total > 1.0 { m.next_down() } else { m.next_up() };
    }
    w[last] = sign * m;
}

/// Importance-sampled network with `+-1` outer weights and `kappa = norm`.
pub fn sample_network(
    alpha: &RadonDensity,
    norm: f64,
    affine: &AffinePart,
    n: usize,
    seed: u64,
    rules: &Rules,
) -> Result<TwoLayerNet> {
    if n == 0 {
        return Err(Error::InvalidInput("network width must be at least 1".into()));
    }
    let masses = alpha.direction_masses(rules);
    let sampler = ImportanceSampler::with_norm(alpha, masses, norm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample_thm2(n, affine, &mut rng))
}

/// l1-normalised network: `||omega_i||_1 = 1`, `b_i` in `[0, 1]`, `|a_i| <= 1`.
pub fn klusowski_network(
    alpha: &RadonDensity,
    affine: &AffinePart,
    n: usize,
    seed: u64,
    rules: &Rules,
) -> Result<TwoLayerNet> {
    if alpha.radius() > 1.0 {
        return Err(Error::Domain(format!(
            "the l1 construction needs R <= 1, got R = {}",
            alpha.radius()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("network width must be at least 1".into()));
    }
    let sampler = ImportanceSampler::new(alpha, rules)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampler.sample_prop2(n, affine, rules, &mut rng)
}

/// `max_x |net(x) - f(x)|` over the grid.
pub fn sup_error(net: &TwoLayerNet, mu: &SpectralMeasure, grid: &BallGrid) -> Result<f64> {
    if net.d != mu.dim() || grid.dim != mu.dim() {
        return Err(Error::InvalidInput("network, spectrum and grid dimensions differ".into()));
    }
    let mut worst = 0.0f64;
    for x in &grid.points {
        worst = worst.max((net.eval(x) - evaluate_f(mu, x)?).abs());
    }
    Ok(worst)
}

fn sup_error_cached(net: &TwoLayerNet, grid: &BallGrid, f: &[f64]) -> f64 {
    grid.points
        .iter()
        .zip(f)
        .map(|(x, fx)| (net.eval(x) - fx).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub bound: f64,
    pub kappa: f64,
    pub errors: Vec<f64>,
    pub mean_err: f64,
    pub min_err: f64,
    pub max_err: f64,
    pub grid_size: usize,
}

/// Worker count from `RADONLAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// RNG for trial `trial` at the `n_index`-th width.
pub fn trial_rng(seed: u64, n_index: usize, trials: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((n_index * trials + trial) as u64);
    rng
}

/// Everything an experiment needs that does not depend on `n`.
pub struct Experiment {
    pub mu: SpectralMeasure,
    pub alpha: RadonDensity,
    pub affine: AffinePart,
    pub sampler: ImportanceSampler,
    pub grid: BallGrid,
    pub rules: Rules,
    f_on_grid: Vec<f64>,
}

impl Experiment {
    pub fn new(mu: &SpectralMeasure, radius: f64, rules: &Rules) -> Result<Self> {
        Self::with_grid(mu, radius, DECAY_GRID_POINTS, rules)
    }

    pub fn with_grid(
        mu: &SpectralMeasure,
        radius: f64,
        grid_points: usize,
        rules: &Rules,
    ) -> Result<Self> {
        let alpha = alpha_from_spectrum(mu, radius)?;
        let grid = ball_grid(mu.dim(), radius, grid_points, 0)?;
        let affine = fit_affine(mu, &alpha, &grid, rules)?;
        let sampler = ImportanceSampler::new(&alpha, rules)?;
        let f_on_grid = grid
            .points
            .iter()
            .map(|x| evaluate_f(mu, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mu: mu.clone(),
            alpha,
            affine,
            sampler,
            grid,
            rules: rules.clone(),
            f_on_grid,
        })
    }

    pub fn network(
        &self,
        convention: Convention,
        n: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<TwoLayerNet> {
        match convention {
            Convention::Thm2 => Ok(self.sampler.sample_thm2(n, &self.affine, rng)),
            Convention::Prop2 => self.sampler.sample_prop2(n, &self.affine, &self.rules, rng),
            Convention::Quadrature => Err(Error::InvalidInput(
                "sampling produces thm2 or prop2 networks only".into(),
            )),
        }
    }

    pub fn sup_error(&self, net: &TwoLayerNet) -> f64 {
        sup_error_cached(net, &self.grid, &self.f_on_grid)
    }

    /// `R * kappa / sqrt(n)`, with `kappa` the outer scale of the convention.
    pub fn bound(&self, convention: Convention, n: usize) -> f64 {
        let kappa = match convention {
            Convention::Prop2 => self.sampler.l1_kappa(),
            _ => self.sampler.norm(),
        };
        self.alpha.radius() * kappa / (n as f64).sqrt()
    }

    pub fn run(
        &self,
        convention: Convention,
        n_list: &[usize],
        trials: usize,
        seed: u64,
    ) -> Result<Vec<ApproxReport>> {
        if trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if n_list.is_empty() || n_list.contains(&0) {
            return Err(Error::InvalidInput("widths must be positive".into()));
        }
        if n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("widths must be strictly increasing".into()));
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = thread_cap() {
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        let mut out = Vec::with_capacity(n_list.len());
        for (ni, &n) in n_list.iter().enumerate() {
            let errors: Vec<f64> = pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(seed, ni, trials, t);
                        self.network(convention, n, &mut rng).map(|net| self.sup_error(&net))
                    })
                    .collect::<Result<Vec<f64>>>()
            })?;
            let mean_err = errors.iter().sum::<f64>() / trials as f64;
            let min_err = errors.iter().copied().fold(f64::INFINITY, f64::min);
            let max_err = errors.iter().copied().fold(0.0, f64::max);
            out.push(ApproxReport {
                n,
                trials,
                seed,
                bound: self.bound(convention, n),
                kappa: match convention {
                    Convention::Prop2 => self.sampler.l1_kappa(),
                    _ => self.sampler.norm(),
                },
                errors,
                mean_err,
                min_err,
                max_err,
                grid_size: self.grid.len(),
            });
        }
        Ok(out)
    }
}

/// Sup errors of `trials` sampled networks for each width in `n_list`.
pub fn error_decay_experiment(
    mu: &SpectralMeasure,
    radius: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ApproxReport>> {
    let rules = Rules::default_for(mu.dim())?;
    Experiment::new(mu, radius, &rules)?.run(Convention::Thm2, n_list, trials, seed)
}

/// Least-squares slope of `log(err)` against `log(n)`.
pub fn loglog_slope(reports: &[ApproxReport]) -> f64 {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean_err.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
