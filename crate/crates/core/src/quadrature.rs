//! Deterministic integration rules on intervals, low-dimensional spheres and
//! the product domain `S^(d-1) x (a, b)`, plus point sets inside a ball.
//!
//! Every rule carries the domain it integrates over and the polynomial degree
//! it integrates exactly. Rules are immutable once built.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Newton tolerance for Gauss-Legendre nodes.
const NEWTON_TOL: f64 = 1e-14;

/// Reference measure a rule integrates against.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    /// Lebesgue measure on `[a, b]`.
    Interval { a: f64, b: f64 },
    /// Surface measure on `S^(dim-1)`; `S^0` is the two-point counting measure.
    Sphere { dim: usize },
    /// Product of the sphere measure with Lebesgue measure on `[a, b]`.
    Product { dim: usize, a: f64, b: f64 },
}

impl Support {
    /// Total mass of the reference measure.
    pub fn total_measure(&self) -> f64 {
        match *self {
            Support::Interval { a, b } => b - a,
            Support::Sphere { dim } => sphere_area(dim),
            Support::Product { dim, a, b } => sphere_area(dim) * (b - a),
        }
    }
}

/// Nodes and strictly positive weights with a declared exactness degree.
#[derive(Clone, Debug)]
pub struct QuadratureRule<N> {
    nodes: Vec<N>,
    weights: Vec<f64>,
    exactness_degree: usize,
    support: Support,
}

pub type IntervalRule = QuadratureRule<f64>;
pub type SphereRule = QuadratureRule<Vec<f64>>;
pub type ProductRule = QuadratureRule<(Vec<f64>, f64)>;

impl<N> QuadratureRule<N> {
    pub fn new(
        nodes: Vec<N>,
        weights: Vec<f64>,
        exactness_degree: usize,
        support: Support,
    ) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidInput("empty quadrature rule".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput(format!("non-positive weight {w}")));
        }
        Ok(Self {
            nodes,
            weights,
            exactness_degree,
            support,
        })
    }

    pub fn nodes(&self) -> &[N] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly (`usize::MAX` when the
    /// rule is the reference measure itself).
    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weighted sum over nodes in storage order.
    pub fn integrate<F>(&self, mut f: F) -> f64
    where
        F: FnMut(&N) -> f64,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

impl IntervalRule {
    pub fn bounds(&self) -> (f64, f64) {
        match self.support {
            Support::Interval { a, b } => (a, b),
            _ => unreachable!("interval rule with non-interval support"),
        }
    }

    /// Integrate `f` over `[a, b]` by affinely mapping this rule.
    pub fn integrate_on<F>(&self, a: f64, b: f64, mut f: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        let (lo, hi) = self.bounds();
        let scale = (b - a) / (hi - lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + (x - lo) * scale);
        }
        acc * scale
    }

    /// Composite rule: `panels` equal sub-intervals of `[a, b]`, each mapped.
    pub fn integrate_composite<F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                let hi = if p + 1 == panels { b } else { lo + h };
                self.integrate_on(lo, hi, &mut f)
            })
            .sum()
    }

    /// A copy of this rule mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Result<IntervalRule> {
        check_bounds(a, b)?;
        let (lo, hi) = self.bounds();
        let scale = (b - a) / (hi - lo);
        let nodes = self.nodes.iter().map(|x| a + (x - lo) * scale).collect();
        let weights = self.weights.iter().map(|w| w * scale).collect();
        QuadratureRule::new(
            nodes,
            weights,
            self.exactness_degree,
            Support::Interval { a, b },
        )
    }
}

impl SphereRule {
    pub fn dim(&self) -> usize {
        match self.support {
            Support::Sphere { dim } => dim,
            _ => unreachable!("sphere rule with non-sphere support"),
        }
    }
}

fn check_bounds(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite bounds [{a}, {b}]")));
    }
    if a >= b {
        return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
    }
    Ok(())
}

/// Surface area `|S^(dim-1)|` of the unit sphere in `R^dim`.
///
/// `dim = 1` gives 2 (counting measure on `{-1, +1}`).
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (dim as f64 - 2.0) * sphere_area(dim - 2),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, x);
            dp = nf * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                let (p, p_prev) = legendre_pair(n, x);
                dp = nf * (x * p - p_prev) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest node.
        let hi = n - 1 - i;
        if hi == i {
            nodes[i] = 0.0;
        } else {
            nodes[hi] = x;
            nodes[i] = -x;
        }
        weights[hi] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// n-point Gauss-Legendre rule on `[a, b]`; exact through degree `2n - 1`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<IntervalRule> {
    if n == 0 {
        return Err(Error::InvalidInput("Gauss-Legendre needs n >= 1".into()));
    }
    check_bounds(a, b)?;
    let (x, w) = legendre_nodes(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = x.iter().map(|t| mid + half * t).collect();
    let weights = w.iter().map(|v| v * half).collect();
    QuadratureRule::new(nodes, weights, 2 * n - 1, Support::Interval { a, b })
}

/// Deterministic rule on `S^(d-1)` for `d <= 3`.
///
/// * `d = 1`: the two points `{-1, +1}` with unit weights.
/// * `d = 2`: `m` equispaced angles with weight `2 pi / m`; exact for
///   trigonometric polynomials of degree `< m`.
/// * `d = 3`: `m` Gauss-Legendre nodes in `cos(theta)` times `2m` equispaced
///   azimuths; exact through degree `2m - 1`.
pub fn sphere_rule(d: usize, m: usize) -> Result<SphereRule> {
    match d {
        1 => QuadratureRule::new(
            vec![vec![-1.0], vec![1.0]],
            vec![1.0, 1.0],
            usize::MAX,
            Support::Sphere { dim: 1 },
        ),
        2 => {
            if m == 0 {
                return Err(Error::InvalidInput("circle rule needs m >= 1".into()));
            }
            let w = 2.0 * PI / m as f64;
            let nodes = (0..m)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / m as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect();
            QuadratureRule::new(nodes, vec![w; m], m - 1, Support::Sphere { dim: 2 })
        }
        3 => {
            if m == 0 {
                return Err(Error::InvalidInput("sphere rule needs m >= 1".into()));
            }
            let (zs, zw) = legendre_nodes(m);
            let na = 2 * m;
            let wa = 2.0 * PI / na as f64;
            let mut nodes = Vec::with_capacity(m * na);
            let mut weights = Vec::with_capacity(m * na);
            for (z, w) in zs.iter().zip(&zw) {
                let s = (1.0 - z * z).max(0.0).sqrt();
                for k in 0..na {
                    let ph = 2.0 * PI * k as f64 / na as f64;
                    nodes.push(vec![s * ph.cos(), s * ph.sin(), *z]);
                    weights.push(w * wa);
                }
            }
            QuadratureRule::new(nodes, weights, 2 * m - 1, Support::Sphere { dim: 3 })
        }
        _ => Err(Error::UnsupportedDimension {
            dim: d,
            hint: "deterministic sphere rules exist for d <= 3; use the Monte Carlo sampler in `sparsifier`",
        }),
    }
}

/// Tensor product of a sphere rule with an interval rule.
pub fn product_rule(sphere: &SphereRule, line: &IntervalRule) -> Result<ProductRule> {
    let (a, b) = line.bounds();
    let mut nodes = Vec::with_capacity(sphere.len() * line.len());
    let mut weights = Vec::with_capacity(sphere.len() * line.len());
    for (w, ws) in sphere.nodes().iter().zip(sphere.weights()) {
        for (t, wt) in line.nodes().iter().zip(line.weights()) {
            nodes.push((w.clone(), *t));
            weights.push(ws * wt);
        }
    }
    QuadratureRule::new(
        nodes,
        weights,
        sphere.exactness_degree().min(line.exactness_degree()),
        Support::Product {
            dim: sphere.dim(),
            a,
            b,
        },
    )
}

/// How [`BallGrid`] points are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Cell-centred lattice with `m` cells per axis, clipped to the ball.
    Lattice,
    /// Halton sequence (starting at index `seed + 1`) mapped into the ball.
    LowDiscrepancy,
    /// Uniform samples from a seeded ChaCha stream.
    SeededUniform,
}

/// Evaluation points strictly inside the open ball `B_R(R^d)`.
#[derive(Clone, Debug)]
pub struct BallGrid {
    pub dim: usize,
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
    pub mode: GridMode,
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Low-discrepancy grid of `m` points in `B_R(R^d)`.
pub fn ball_grid(d: usize, radius: f64, m: usize, seed: u64) -> Result<BallGrid> {
    ball_grid_with_mode(d, radius, m, seed, GridMode::LowDiscrepancy)
}

pub fn ball_grid_with_mode(
    d: usize,
    radius: f64,
    m: usize,
    seed: u64,
    mode: GridMode,
) -> Result<BallGrid> {
    if d == 0 || d > PRIMES.len() {
        return Err(Error::UnsupportedDimension {
            dim: d,
            hint: "ball grids support 1 <= d <= 12",
        });
    }
    if m == 0 {
        return Err(Error::InvalidInput("ball grid needs m >= 1".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let inside = |p: &[f64]| norm2(p) < radius;
    let points = match mode {
        GridMode::Lattice => {
            let axis: Vec<f64> = (0..m)
                .map(|i| radius * (-1.0 + (2 * i + 1) as f64 / m as f64))
                .collect();
            let mut pts = Vec::new();
            let mut idx = vec![0usize; d];
            loop {
                let p: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
                if inside(&p) {
                    pts.push(p);
                }
                // odometer increment
                let mut k = 0;
                while k < d {
                    idx[k] += 1;
                    if idx[k] < m {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
            pts
        }
        GridMode::LowDiscrepancy => {
            let mut pts = Vec::with_capacity(m);
            let mut i = seed.wrapping_add(1);
            while pts.len() < m {
                let p: Vec<f64> = PRIMES[..d]
                    .iter()
                    .map(|&b| radius * (2.0 * radical_inverse(i, b) - 1.0))
                    .collect();
                if inside(&p) {
                    pts.push(p);
                }
                i = i.wrapping_add(1);
            }
            pts
        }
        GridMode::SeededUniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pts = Vec::with_capacity(m);
            while pts.len() < m {
                let p: Vec<f64> = (0..d)
                    .map(|_| radius * (2.0 * rng.gen::<f64>() - 1.0))
                    .collect();
                if inside(&p) {
                    pts.push(p);
                }
            }
            pts
        }
    };
    Ok(BallGrid {
        dim: d,
        radius,
        points,
        mode,
    })
}

impl BallGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance from any point to its nearest neighbour.
    pub fn max_nn_spacing(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut best = f64::INFINITY;
            for j in 0..n {
                if i != j {
                    let d2: f64 = self.points[i]
                        .iter()
                        .zip(&self.points[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    best = best.min(d2);
                }
            }
            worst = worst.max(best);
        }
        worst.sqrt()
    }
}
