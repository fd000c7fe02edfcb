//! Transmission-weight laws on `[0, 1]`.
//!
//! Every offspring generating function used by the analytic engine is a
//! polynomial in the transmission weight `T`, so a law only has to provide
//! exact expectations of polynomials. Atom laws do this trivially; the
//! continuous laws provide a Gauss rule that integrates polynomials up to a
//! requested degree exactly.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};

/// Laplace transform `L(z) = E(exp(-z τ))` of the infectious period `τ`,
/// with the contact rate fixed to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplaceSpec {
    /// `τ ~ Exp(rate)`: `L(z) = rate / (rate + z)`.
    Exponential { rate: f64 },
    /// `τ = duration` almost surely: `L(z) = exp(-z · duration)`.
    Constant { duration: f64 },
}

impl LaplaceSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidLaw(format!("exponential rate {rate} must be positive")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn constant(duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::InvalidLaw(format!(
                "infectious period {duration} must be nonnegative"
            )));
        }
        Ok(Self::Constant { duration })
    }

    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => rate / (rate + z),
            Self::Constant { duration } => (-z * duration).exp(),
        }
    }

    fn sample_period<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            Self::Constant { duration } => duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransmissionLaw {
    PointMass(f64),
    /// `P(T = 1) = p = 1 − P(T = 0)`.
    BernoulliEndpoints(f64),
    /// `(t_i, w_i)` pairs; weights form a pmf.
    DiscreteAtoms(Vec<(f64, f64)>),
    /// `Beta(α, α)` on `(0, 1)`.
    BetaSymmetric(f64),
    /// `T = 1 − exp(−τ)` for an infectious period `τ`.
    InfectiousPeriod(LaplaceSpec),
}

/// `E T`, `E T²`, `E T(1−T)` and `E (1−T)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TMoments {
    pub e_t: f64,
    pub e_t2: f64,
    pub e_t_1mt: f64,
    pub e_1mt2: f64,
}

/// Nodes in `[0, 1]` with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut q: F) -> f64 {
        self.iter().map(|(t, w)| w * q(t)).sum()
    }
}

fn check_unit(t: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("{what} {t} is outside [0, 1]")))
    }
}

impl TransmissionLaw {
    pub fn point(t: f64) -> Result<Self> {
        check_unit(t, "transmission weight")?;
        Ok(Self::PointMass(t))
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        check_unit(p, "endpoint probability")?;
        Ok(Self::BernoulliEndpoints(p))
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let law = Self::DiscreteAtoms(atoms);
        law.validate()?;
        Ok(law)
    }

    pub fn beta(alpha: f64) -> Result<Self> {
        let law = Self::BetaSymmetric(alpha);
        law.validate()?;
        Ok(law)
    }

    pub fn exp_period(rate: f64) -> Result<Self> {
        Ok(Self::InfectiousPeriod(LaplaceSpec::exponential(rate)?))
    }

    pub fn const_period(duration: f64) -> Result<Self> {
        Ok(Self::InfectiousPeriod(LaplaceSpec::constant(duration)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PointMass(t) => check_unit(*t, "transmission weight"),
            Self::BernoulliEndpoints(p) => check_unit(*p, "endpoint probability"),
            Self::DiscreteAtoms(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidLaw("atom list is empty".into()));
                }
                let mut total = 0.0;
                for &(t, w) in atoms {
                    check_unit(t, "atom location")?;
                    if !(w.is_finite() && w >= 0.0) {
                        return Err(Error::InvalidLaw(format!("atom weight {w} is negative")));
                    }
                    total += w;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidLaw(format!("atom weights sum to {total}")));
                }
                Ok(())
            }
            Self::BetaSymmetric(alpha) => {
                if alpha.is_finite() && *alpha > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLaw(format!("beta parameter {alpha} must be positive")))
                }
            }
            Self::InfectiousPeriod(spec) => match *spec {
                LaplaceSpec::Exponential { rate } => LaplaceSpec::exponential(rate).map(|_| ()),
                LaplaceSpec::Constant { duration } => LaplaceSpec::constant(duration).map(|_| ()),
            },
        }
    }

    /// Exact `E(T^m)`.
    pub fn raw_moment(&self, m: u32) -> f64 {
        if m == 0 {
            return 1.0;
        }
        match self {
            Self::PointMass(t) => t.powi(m as i32),
            Self::BernoulliEndpoints(p) => *p,
            Self::DiscreteAtoms(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                atoms.iter().map(|&(t, w)| w * t.powi(m as i32)).sum::<f64>() / total
            }
            Self::BetaSymmetric(alpha) => (0..m)
                .map(|j| (alpha + f64::from(j)) / (2.0 * alpha + f64::from(j)))
                .product(),
            Self::InfectiousPeriod(spec) => {
                // E((1 − e^{−τ})^m) = Σ_k C(m,k) (−1)^k L(k)
                let mut binom = 1.0;
                let mut sum = 0.0;
                for k in 0..=m {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sum += sign * binom * spec.eval(f64::from(k));
                    binom = binom * f64::from(m - k) / f64::from(k + 1);
                }
                sum
            }
        }
    }

    pub fn derived_moments(&self) -> TMoments {
        let (e_t, e_t_1mt, e_1mt2) = match self {
            Self::InfectiousPeriod(spec) => {
                let (l1, l2) = (spec.eval(1.0), spec.eval(2.0));
                (1.0 - l1, l1 - l2, l2)
            }
            _ => {
                let e_t = self.raw_moment(1);
                let e_t2 = self.raw_moment(2);
                (e_t, e_t - e_t2, 1.0 - 2.0 * e_t + e_t2)
            }
        };
        TMoments {
            e_t,
            e_t2: e_t - e_t_1mt,
            e_t_1mt,
            e_1mt2,
        }
    }

    /// A node/weight rule with `Σ w_i q(t_i) = E q(T)` for every polynomial
    /// `q` of degree at most `max_degree`.
    pub fn expectation_rule(&self, max_degree: u32) -> QuadratureRule {
        let n = (max_degree as usize + 2) / 2;
        match self {
            Self::PointMass(t) => QuadratureRule {
                nodes: vec![*t],
                weights: vec![1.0],
            },
            Self::BernoulliEndpoints(p) => QuadratureRule {
                nodes: vec![0.0, 1.0],
                weights: vec![1.0 - p, *p],
            },
            Self::DiscreteAtoms(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                QuadratureRule {
                    nodes: atoms.iter().map(|a| a.0).collect(),
                    weights: atoms.iter().map(|a| a.1 / total).collect(),
                }
            }
            Self::BetaSymmetric(alpha) => gauss_symmetric_beta(*alpha, n),
            Self::InfectiousPeriod(LaplaceSpec::Constant { duration }) => QuadratureRule {
                nodes: vec![1.0 - (-duration).exp()],
                weights: vec![1.0],
            },
            Self::InfectiousPeriod(spec) => {
                // Moments of U = 1 − T = e^{−τ} are exactly L(k).
                let moments: Vec<f64> = (0..2 * n).map(|k| spec.eval(k as f64)).collect();
                let (a, b) = chebyshev_recurrence(&moments);
                let rule = golub_welsch(&a, &b);
                let mut pairs: Vec<(f64, f64)> = rule
                    .iter()
                    .map(|(u, w)| ((1.0 - u).clamp(0.0, 1.0), w))
                    .collect();
                pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
                QuadratureRule {
                    nodes: pairs.iter().map(|p| p.0).collect(),
                    weights: pairs.iter().map(|p| p.1).collect(),
                }
            }
        }
    }

    pub fn sampler(&self) -> TSampler {
        match self {
            Self::PointMass(t) => TSampler::Constant(*t),
            Self::BernoulliEndpoints(p) => TSampler::Bernoulli(*p),
            Self::DiscreteAtoms(atoms) => {
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                let mut acc = 0.0;
                let cumulative = atoms
                    .iter()
                    .map(|&(t, w)| {
                        acc += w / total;
                        (acc, t)
                    })
                    .collect();
                TSampler::Atoms(cumulative)
            }
            Self::BetaSymmetric(alpha) => {
                TSampler::Beta(Beta::new(*alpha, *alpha).expect("validated beta parameter"))
            }
            Self::InfectiousPeriod(spec) => TSampler::Period(*spec),
        }
    }
}

/// Draws transmission weights; built once per law.
#[derive(Debug, Clone)]
pub enum TSampler {
    Constant(f64),
    Bernoulli(f64),
    Atoms(Vec<(f64, f64)>),
    Beta(Beta<f64>),
    Period(LaplaceSpec),
}

impl TSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Constant(t) => *t,
            Self::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Atoms(cumulative) => {
                let u: f64 = rng.random();
                cumulative
                    .iter()
                    .find(|(c, _)| u < *c)
                    .or(cumulative.last())
                    .map(|&(_, t)| t)
                    .expect("nonempty atom list")
            }
            Self::Beta(beta) => beta.sample(rng),
            Self::Period(spec) => 1.0 - (-spec.sample_period(rng)).exp(),
        }
    }
}

/// Gauss rule for `Beta(α, α)` from the closed-form recurrence of the
/// Gegenbauer polynomials with `λ = α − 1/2`, mapped from `[−1, 1]` to `[0, 1]`.
fn gauss_symmetric_beta(alpha: f64, n: usize) -> QuadratureRule {
    let lambda = alpha - 0.5;
    let a = vec![0.5; n];
    let mut b = vec![1.0; n];
    for (k, bk) in b.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let beta_sym = if k == 1 {
            1.0 / (2.0 * (1.0 + lambda))
        } else {
            kf * (kf + 2.0 * lambda - 1.0) / (4.0 * (kf + lambda) * (kf + lambda - 1.0))
        };
        *bk = beta_sym / 4.0;
    }
    golub_welsch(&a, &b)
}

/// Monic three-term recurrence `(a_k, b_k)` from ordinary moments
/// `μ_0 .. μ_{2n−1}` (Chebyshev's algorithm). `b_0 = μ_0`. Stops early when
/// the measure has fewer than `n` support points.
fn chebyshev_recurrence(moments: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = moments.len() / 2;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut prev = vec![0.0; 2 * n];
    let mut cur = moments.to_vec();
    a.push(moments[1] / moments[0]);
    b.push(moments[0]);
    for k in 1..n {
        let mut next = vec![0.0; 2 * n];
        for l in k..(2 * n - k) {
            next[l] = cur[l + 1] - a[k - 1] * cur[l] - b[k - 1] * prev[l];
        }
        if next[k].partial_cmp(&(1e-14 * cur[k - 1].abs())) != Some(std::cmp::Ordering::Greater) {
            break;
        }
        a.push(next[k + 1] / next[k] - cur[k] / cur[k - 1]);
        b.push(next[k] / cur[k - 1]);
        prev = cur;
        cur = next;
    }
    (a, b)
}

/// Nodes are the eigenvalues of the Jacobi matrix; weights are `b_0` times
/// the squared first components of the normalized eigenvectors.
fn golub_welsch(a: &[f64], b: &[f64]) -> QuadratureRule {
    let n = a.len();
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            a[i]
        } else if i + 1 == j {
            b[j].sqrt()
        } else if j + 1 == i {
            b[i].sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i].clamp(0.0, 1.0), b[0] * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    }
}
