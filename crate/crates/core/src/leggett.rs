//! Leggett-type models of singlet correlations: unit Bloch vectors `(μ, ν)`
//! per hidden state with arbitrary admissible correlation coefficients, the
//! inequality that bounds them, and its quantum violation.

use std::f64::consts::PI;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hv::{ContextRef, ContextSets, HiddenSpace, HiddenVariableModel};
use crate::linalg::{FactorDims, Projector};
use crate::lp;
use crate::sampling::rng;
use crate::states::{DensityOperator, PureState};

const UNIT_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-12;
const DIRECTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!("Bloch vector norm {norm}")));
        }
        Ok(Self([x, y, z]))
    }

    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = dot3(v, v).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidParameter("cannot normalize a zero vector".into()));
        }
        Ok(Self(v.map(|x| x / norm)))
    }

    pub fn x() -> Self {
        Self([1.0, 0.0, 0.0])
    }

    pub fn y() -> Self {
        Self([0.0, 1.0, 0.0])
    }

    pub fn z() -> Self {
        Self([0.0, 0.0, 1.0])
    }

    /// Direction of a rank-1 qubit projector `(1 + r·σ)/2`.
    pub fn from_projector(p: &Projector) -> Result<Self> {
        if p.dim() != 2 || p.rank() != 1 {
            return Err(Error::NotProjector(format!(
                "Bloch vectors need rank-1 qubit projectors, got rank {} in dimension {}",
                p.rank(),
                p.dim()
            )));
        }
        let m = p.matrix();
        Self::normalized([2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, 2.0 * m[(0, 0)].re - 1.0])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot3(self.0, other.0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.map(|x| -x))
    }

    pub fn rotate(&self, r: &Rotation) -> Self {
        Self(r.apply(self.0))
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn lin3(s: f64, a: [f64; 3], t: f64, b: [f64; 3]) -> [f64; 3] {
    [s * a[0] + t * b[0], s * a[1] + t * b[1], s * a[2] + t * b[2]]
}

/// A proper rotation of three-space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation([[f64; 3]; 3]);

impl Rotation {
    pub fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Haar-random rotation from a uniformly distributed unit quaternion.
    pub fn random(seed: u64) -> Self {
        let mut r = rng(seed);
        let q: [f64; 4] = loop {
            let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut r));
            let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-9 {
                break q.map(|x| x / n);
            }
        };
        let [w, x, y, z] = q;
        Self([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
            [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
            [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        self.0.map(|row| dot3(row, v))
    }
}

/// Hidden state `(μ, ν)` with the marginal visibility `η`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeggettLambda {
    pub mu: BlochVector,
    pub nu: BlochVector,
    eta: f64,
}

impl LeggettLambda {
    pub fn new(mu: BlochVector, nu: BlochVector, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside (0, 1]")));
        }
        Ok(Self { mu, nu, eta })
    }

    pub fn pure(mu: BlochVector, nu: BlochVector) -> Self {
        Self { mu, nu, eta: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `(u, v) = (η a·μ, η b·ν)`.
    pub fn marginal_terms(&self, a: &BlochVector, b: &BlochVector) -> (f64, f64) {
        (self.eta * a.dot(&self.mu), self.eta * b.dot(&self.nu))
    }
}

/// `(lo, hi)` such that every `C ∈ [lo, hi]` keeps all four outcome
/// probabilities non-negative.
pub fn c_bounds(lam: &LeggettLambda, a: &BlochVector, b: &BlochVector) -> (f64, f64) {
    let (u, v) = lam.marginal_terms(a, b);
    ((u + v).abs() - 1.0, 1.0 - (u - v).abs())
}

pub trait CorrelationFn {
    fn correlation(&self, lam: &LeggettLambda, a: &BlochVector, b: &BlochVector) -> f64;
}

impl<F> CorrelationFn for F
where
    F: Fn(&LeggettLambda, &BlochVector, &BlochVector) -> f64,
{
    fn correlation(&self, lam: &LeggettLambda, a: &BlochVector, b: &BlochVector) -> f64 {
        self(lam, a, b)
    }
}

/// Built-in correlation choices. Both are odd in each argument, so a
/// model's probabilities for the outcome along `−a` follow from those along `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrelationKind {
    /// `C = (η a·μ)(η b·ν)`: the model factorizes for every `λ`.
    Product,
    /// The singlet value `−a·b`, clamped into the admissible interval.
    ClampedSinglet,
}

impl CorrelationFn for CorrelationKind {
    fn correlation(&self, lam: &LeggettLambda, a: &BlochVector, b: &BlochVector) -> f64 {
        match self {
            CorrelationKind::Product => {
                let (u, v) = lam.marginal_terms(a, b);
                u * v
            }
            CorrelationKind::ClampedSinglet => {
                let (lo, hi) = c_bounds(lam, a, b);
                (-a.dot(b)).clamp(lo, hi)
            }
        }
    }
}

fn sign(s: i8) -> Result<f64> {
    match s {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::InvalidParameter(format!("outcome sign {s} is not ±1"))),
    }
}

/// `p(α, β) = (1 + α u + β v + αβ C)/4`, rejecting correlations outside the
/// positivity interval.
pub fn leggett_joint(
    lam: &LeggettLambda,
    c: &dyn CorrelationFn,
    a: &BlochVector,
    b: &BlochVector,
    alpha: i8,
    beta: i8,
) -> Result<f64> {
    let (sa, sb) = (sign(alpha)?, sign(beta)?);
    let (u, v) = lam.marginal_terms(a, b);
    let cv = c.correlation(lam, a, b);
    if !cv.is_finite() {
        return Err(Error::InvalidParameter(format!("correlation {cv}")));
    }
    let prob = |x: f64, y: f64| 0.25 * (1.0 + x * u + y * v + x * y * cv);
    for (x, y) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
        if prob(x as f64, y as f64) < -POSITIVITY_TOL {
            let (lo, hi) = c_bounds(lam, a, b);
            return Err(Error::PositivityViolated {
                alpha: x,
                beta: y,
                c: cv,
                lo,
                hi,
            });
        }
    }
    Ok(prob(sa, sb).max(0.0))
}

/// The three measurement planes of the inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionTriple {
    phi: f64,
    a: [BlochVector; 3],
    b: [BlochVector; 3],
    b_prime: [BlochVector; 3],
}

impl DirectionTriple {
    /// Plane `i` is spanned by `e_i` and `e_{i+1}`; `b_i` and `b'_i` sit at
    /// `±φ/2` from `a_i = e_{i+1}` towards `e_i`.
    pub fn new(phi: f64) -> Result<Self> {
        Self::rotated(phi, &Rotation::identity())
    }

    pub fn rotated(phi: f64, rotation: &Rotation) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("angle {phi}")));
        }
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        let mut a = [BlochVector::x(); 3];
        let mut b = a;
        let mut bp = a;
        for i in 0..3 {
            let (d, t) = (e[i], e[(i + 1) % 3]);
            a[i] = BlochVector(rotation.apply(t));
            b[i] = BlochVector(rotation.apply(lin3(c, t, s, d)));
            bp[i] = BlochVector(rotation.apply(lin3(c, t, -s, d)));
        }
        Self::from_vectors(phi, a, b, bp)
    }

    /// Validates that every `b_i, b'_i` pair is separated by `φ` and that
    /// `a_i` is parallel to `b_i + b'_i`.
    pub fn from_vectors(phi: f64, a: [BlochVector; 3], b: [BlochVector; 3], b_prime: [BlochVector; 3]) -> Result<Self> {
        let target = phi.cos();
        for i in 0..3 {
            let cos = b[i].dot(&b_prime[i]);
            if (cos - target).abs() > DIRECTION_TOL {
                return Err(Error::InvalidParameter(format!(
                    "plane {i}: cos(b, b') = {cos}, expected {target}"
                )));
            }
            let sum = add3(b[i].0, b_prime[i].0);
            let off = cross3(a[i].0, sum);
            if dot3(off, off).sqrt() > DIRECTION_TOL {
                return Err(Error::InvalidParameter(format!("plane {i}: a is not parallel to b + b'")));
            }
        }
        Ok(Self { phi, a, b, b_prime })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn a(&self, i: usize) -> &BlochVector {
        &self.a[i]
    }

    pub fn b(&self, i: usize) -> &BlochVector {
        &self.b[i]
    }

    pub fn b_prime(&self, i: usize) -> &BlochVector {
        &self.b_prime[i]
    }
}

/// Singlet value of the inequality's left-hand side, with `C(a, b) = −a·b`.
pub fn quantum_lhs(d: &DirectionTriple) -> f64 {
    (0..3)
        .map(|i| (-d.a[i].dot(&d.b[i]) - d.a[i].dot(&d.b_prime[i])).abs())
        .sum::<f64>()
        / 3.0
}

/// Upper bound `2 − (2/3)|sin(φ/2)|` obeyed by every Leggett model.
pub fn leggett_bound(phi: f64) -> f64 {
    2.0 - (2.0 / 3.0) * (phi / 2.0).sin().abs()
}

/// `(0, φ*)`: the quantum value exceeds the bound exactly for `0 < φ < φ*`.
/// `φ*` is found by bisection to `1e-12` on `[1e-6, π]`.
pub fn violation_region() -> (f64, f64) {
    let f = |phi: f64| 2.0 * (phi / 2.0).cos() - leggett_bound(phi);
    let (mut lo, mut hi) = (1e-6, PI);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.0, 0.5 * (lo + hi))
}

/// Points on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    points: Vec<BlochVector>,
}

impl SphereGrid {
    /// Fibonacci lattice: `z_k = 1 − (2k+1)/N`, azimuth advancing by the
    /// golden angle.
    pub fn fibonacci(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!("sphere grid needs >= 2 points, got {points}")));
        }
        Ok(Self {
            points: fibonacci_points(points),
        })
    }

    /// `N/2` Fibonacci points together with their antipodes, so the uniform
    /// average of the grid is exactly zero.
    pub fn antipodal(points: usize) -> Result<Self> {
        if points < 2 || !points.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "antipodal grid needs an even number >= 2 of points, got {points}"
            )));
        }
        let half = fibonacci_points(points / 2);
        let mut all = half.clone();
        all.extend(half.iter().map(BlochVector::neg));
        Ok(Self { points: all })
    }

    pub fn rotated(&self, rotation: &Rotation) -> Self {
        Self {
            points: self.points.iter().map(|p| p.rotate(rotation)).collect(),
        }
    }

    pub fn points(&self) -> &[BlochVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn fibonacci_points(n: usize) -> Vec<BlochVector> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * k as f64;
            BlochVector([r * t.cos(), r * t.sin(), z])
        })
        .collect()
}

/// How `ν` is attached to each grid point `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    Antipodal,
    Same,
}

impl Pairing {
    pub fn nu(&self, mu: &BlochVector) -> BlochVector {
        match self {
            Pairing::Antipodal => mu.neg(),
            Pairing::Same => *mu,
        }
    }
}

/// The optimal discrete model found by [`max_lhs_lp`].
#[derive(Clone, Debug, PartialEq)]
pub struct LeggettLpSolution {
    /// Left-hand side of the inequality evaluated on the returned model.
    pub value: f64,
    /// Branch `s_i` of each absolute value.
    pub signs: [i8; 3],
    pub weights: Vec<f64>,
    /// Per grid point, `[C(a_i, b_i), C(a_i, b'_i)]` for each plane.
    pub correlations: Vec<[[f64; 2]; 3]>,
    /// `‖Σ_λ ρ(λ) η μ_λ‖` of the returned weights.
    pub marginal_residual: f64,
}

/// Maximizes `(1/3) Σ_i |⟨C(a_i, b_i)⟩ + ⟨C(a_i, b'_i)⟩|` over weights on
/// the grid and admissible per-point correlations, subject to flat average
/// marginals. Each of the eight sign branches of the absolute values is a
/// linear program with correlations at their upper or lower bound; the best
/// branch is returned.
pub fn max_lhs_lp(d: &DirectionTriple, grid: &SphereGrid, eta: f64, pairing: Pairing) -> Result<LeggettLpSolution> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sphere grid".into()));
    }
    let lambdas = grid
        .points()
        .iter()
        .map(|mu| LeggettLambda::new(*mu, pairing.nu(mu), eta))
        .collect::<Result<Vec<_>>>()?;
    let bounds: Vec<[[(f64, f64); 2]; 3]> = lambdas
        .iter()
        .map(|l| std::array::from_fn(|i| [c_bounds(l, &d.a[i], &d.b[i]), c_bounds(l, &d.a[i], &d.b_prime[i])]))
        .collect();
    let mut best: Option<LeggettLpSolution> = None;
    let mut last_err = None;
    for pattern in 0..8u8 {
        let signs: [i8; 3] = std::array::from_fn(|i| if pattern >> i & 1 == 0 { 1 } else { -1 });
        let correlations: Vec<[[f64; 2]; 3]> = bounds
            .iter()
            .map(|bk| std::array::from_fn(|i| bk[i].map(|(lo, hi)| if signs[i] > 0 { hi } else { lo })))
            .collect();
        let mut problem = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = correlations
            .iter()
            .map(|c| {
                let score = (0..3).map(|i| signs[i] as f64 * (c[i][0] + c[i][1])).sum::<f64>() / 3.0;
                problem.add_var(score, (0.0, f64::INFINITY))
            })
            .collect();
        problem.add_constraint(vars.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
        for k in 0..3 {
            let row = vars.iter().zip(&lambdas).map(|(&v, l)| (v, l.mu.0[k]));
            problem.add_constraint(row, ComparisonOp::Eq, 0.0);
        }
        let solution = match lp::solve(&problem, "flat-marginal Leggett LP") {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let weights: Vec<f64> = vars.iter().map(|&v| solution.var_value(v).max(0.0)).collect();
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        let value = lhs_of(&weights, &correlations);
        let mean = lambdas
            .iter()
            .zip(&weights)
            .fold([0.0; 3], |acc, (l, w)| lin3(1.0, acc, w * eta, l.mu.0));
        let candidate = LeggettLpSolution {
            value,
            signs,
            weights,
            correlations,
            marginal_residual: dot3(mean, mean).sqrt(),
        };
        if best.as_ref().is_none_or(|b| candidate.value > b.value) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Infeasible("no sign branch solved".into())))
}

fn lhs_of(weights: &[f64], correlations: &[[[f64; 2]; 3]]) -> f64 {
    (0..3)
        .map(|i| {
            weights
                .iter()
                .zip(correlations)
                .map(|(w, c)| w * (c[i][0] + c[i][1]))
                .sum::<f64>()
                .abs()
        })
        .sum::<f64>()
        / 3.0
}

/// A Leggett model of the singlet on qubit contexts: uniform weights over an
/// antipodal grid, so average marginals are flat.
#[derive(Clone, Debug)]
pub struct LeggettModel {
    name: String,
    lambdas: Vec<LeggettLambda>,
    hidden: HiddenSpace,
    correlation: CorrelationKind,
    state: DensityOperator,
}

impl LeggettModel {
    pub fn new(points: usize, eta: f64, pairing: Pairing, correlation: CorrelationKind) -> Result<Self> {
        let grid = SphereGrid::antipodal(points)?;
        let lambdas = grid
            .points()
            .iter()
            .map(|mu| LeggettLambda::new(*mu, pairing.nu(mu), eta))
            .collect::<Result<Vec<_>>>()?;
        let name = if eta < 1.0 { "eta-leggett" } else { "leggett" };
        Ok(Self {
            name: name.into(),
            hidden: HiddenSpace::uniform(lambdas.len())?,
            lambdas,
            correlation,
            state: PureState::singlet().density(),
        })
    }

    pub fn lambdas(&self) -> &[LeggettLambda] {
        &self.lambdas
    }

    /// Leggett models need rank-1 qubit outcomes on both sides.
    pub fn validate_contexts(contexts: &ContextSets) -> Result<()> {
        for ctx in contexts.alice.iter().chain(&contexts.bob) {
            for p in ctx.outcomes() {
                BlochVector::from_projector(p)?;
            }
        }
        Ok(())
    }
}

impl HiddenVariableModel for LeggettModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dims(&self) -> FactorDims {
        FactorDims::square(2)
    }

    fn state(&self) -> &DensityOperator {
        &self.state
    }

    fn hidden(&self) -> &HiddenSpace {
        &self.hidden
    }

    fn joint(&self, lambda: usize, ctx_a: ContextRef<'_>, ctx_b: ContextRef<'_>, a: usize, b: usize) -> f64 {
        let dirs = BlochVector::from_projector(ctx_a.projector(a))
            .and_then(|x| Ok((x, BlochVector::from_projector(ctx_b.projector(b))?)));
        match dirs {
            Ok((x, y)) => leggett_joint(&self.lambdas[lambda], &self.correlation, &x, &y, 1, 1).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    }
}
