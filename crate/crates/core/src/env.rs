//! Environment processes: the random number of leaves added at each growth
//! epoch, and their classification against the growth conditions that drive
//! the walker's long-run behaviour.
//!
//! JSON form is an object tagged by `"family"`:
//!
//! | family                     | fields             | law of `xi_n`                                             |
//! |----------------------------|--------------------|-----------------------------------------------------------|
//! | `constant`                 | `c`                | `c`                                                       |
//! | `bernoulli`                | `p`                | `P(1) = p`, `P(0) = 1 - p`                                |
//! | `geometric`                | `mean`             | `P(k) = q (1 - q)^k`, `k >= 0`, `q = 1 / (1 + mean)`      |
//! | `poisson`                  | `lambda`           | Poisson(`lambda`)                                         |
//! | `power_law_tail`           | `alpha`, `delta`   | `P(xi >= x) = min(1, delta / x^alpha)` for integer `x >= 1` |
//! | `deterministic_polynomial` | `a`, `period`      | `floor(ceil(n / period)^a)`                               |
//! | `table`                    | `pmf`              | `P(k) = pmf[k]`                                           |
//! | `bernoulli_decay`          | `exponent`         | Bernoulli(`min(1, max(n, 1)^-exponent)`)                  |
//!
//! All families are independent across `n`. Draws saturate at [`XI_CAP`].

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Largest value a draw can take; larger draws saturate here.
pub const XI_CAP: u64 = (1 << 62) - 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    Constant { c: u64 },
    Bernoulli { p: f64 },
    Geometric { mean: f64 },
    Poisson { lambda: f64 },
    PowerLawTail { alpha: f64, delta: f64 },
    DeterministicPolynomial { a: f64, period: u64 },
    Table { pmf: Vec<f64> },
    BernoulliDecay { exponent: f64 },
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                config(format!("{name} must be finite, got {v}"))
            }
        }
        match *self {
            Self::Constant { c } if c > XI_CAP => config(format!("constant {c} exceeds cap {XI_CAP}")),
            Self::Constant { .. } => Ok(()),
            Self::Bernoulli { p } => {
                finite("p", p)?;
                if !(0.0..=1.0).contains(&p) {
                    return config(format!("bernoulli p must lie in [0, 1], got {p}"));
                }
                Ok(())
            }
            Self::Geometric { mean } => {
                finite("mean", mean)?;
                if mean <= 0.0 {
                    return config(format!("geometric mean must be positive, got {mean}"));
                }
                Ok(())
            }
            Self::Poisson { lambda } => {
                finite("lambda", lambda)?;
                if lambda <= 0.0 || lambda > 1e15 {
                    return config(format!("poisson lambda must lie in (0, 1e15], got {lambda}"));
                }
                Ok(())
            }
            Self::PowerLawTail { alpha, delta } => {
                finite("alpha", alpha)?;
                finite("delta", delta)?;
                if !(alpha > 0.0 && alpha < 1.0) {
                    return config(format!("power-law alpha must lie in (0, 1), got {alpha}"));
                }
                if delta <= 0.0 {
                    return config(format!("power-law delta must be positive, got {delta}"));
                }
                Ok(())
            }
            Self::DeterministicPolynomial { a, period } => {
                finite("a", a)?;
                if a <= 0.0 {
                    return config(format!("polynomial exponent must be positive, got {a}"));
                }
                if period == 0 {
                    return config("polynomial period must be at least 1");
                }
                Ok(())
            }
            Self::Table { ref pmf } => {
                if pmf.is_empty() {
                    return config("table pmf is empty");
                }
                if let Some(bad) = pmf.iter().find(|w| !w.is_finite() || **w < 0.0) {
                    return config(format!("table pmf entries must be finite and nonnegative, got {bad}"));
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return config(format!("table pmf must sum to 1, got {total}"));
                }
                Ok(())
            }
            Self::BernoulliDecay { exponent } => {
                finite("exponent", exponent)?;
                if exponent <= 0.0 {
                    return config(format!("decay exponent must be positive, got {exponent}"));
                }
                Ok(())
            }
        }
    }

    /// Mean of the marginal law, when the family is identically distributed
    /// with a finite mean.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            Self::Constant { c } => Some(c as f64),
            Self::Bernoulli { p } => Some(p),
            Self::Geometric { mean } => Some(mean),
            Self::Poisson { lambda } => Some(lambda),
            Self::Table { ref pmf } => Some(pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()),
            Self::PowerLawTail { .. } | Self::DeterministicPolynomial { .. } | Self::BernoulliDecay { .. } => None,
        }
    }

    /// Compile into a sampler. Fails on invalid parameters.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let kind = match *self {
            Self::Constant { c } => SamplerKind::Constant(c),
            Self::Bernoulli { p } => SamplerKind::Bernoulli(p),
            Self::Geometric { mean } => SamplerKind::Geometric(
                rand_distr::Geometric::new(1.0 / (1.0 + mean)).map_err(|e| crate::Error::Config(e.to_string()))?,
            ),
            Self::Poisson { lambda } => SamplerKind::Poisson(
                rand_distr::Poisson::new(lambda).map_err(|e| crate::Error::Config(e.to_string()))?,
            ),
            Self::PowerLawTail { alpha, delta } => SamplerKind::PowerLaw { inv_alpha: 1.0 / alpha, delta },
            Self::DeterministicPolynomial { a, period } => SamplerKind::Polynomial { a, period },
            Self::Table { ref pmf } => SamplerKind::Table(
                WeightedIndex::new(pmf).map_err(|e| crate::Error::Config(e.to_string()))?,
            ),
            Self::BernoulliDecay { exponent } => SamplerKind::BernoulliDecay(exponent),
        };
        Ok(Sampler { kind })
    }
}

/// A validated environment, ready to draw from.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Constant(u64),
    Bernoulli(f64),
    Geometric(rand_distr::Geometric),
    Poisson(rand_distr::Poisson<f64>),
    PowerLaw { inv_alpha: f64, delta: f64 },
    Polynomial { a: f64, period: u64 },
    Table(WeightedIndex<f64>),
    BernoulliDecay(f64),
}

fn saturate(x: f64) -> u64 {
    if x >= XI_CAP as f64 {
        XI_CAP
    } else {
        x as u64
    }
}

impl Sampler {
    /// One draw of `xi_n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> u64 {
        match self.kind {
            SamplerKind::Constant(c) => c,
            SamplerKind::Bernoulli(p) => u64::from(rng.random_bool(p)),
            SamplerKind::Geometric(ref g) => g.sample(rng).min(XI_CAP),
            SamplerKind::Poisson(ref d) => saturate(d.sample(rng)),
            SamplerKind::PowerLaw { inv_alpha, delta } => {
                // Inverse transform: xi >= x  <=>  x <= (delta / u)^(1/alpha).
                let u = 1.0 - rng.random::<f64>();
                saturate((delta / u).powf(inv_alpha).floor())
            }
            SamplerKind::Polynomial { a, period } => {
                let j = n.div_ceil(period);
                saturate((j as f64).powf(a).floor())
            }
            SamplerKind::Table(ref w) => w.sample(rng) as u64,
            SamplerKind::BernoulliDecay(exponent) => {
                let p = (n.max(1) as f64).powf(-exponent).min(1.0);
                u64::from(rng.random_bool(p))
            }
        }
    }
}

/// One draw of `xi_n` from `spec`.
pub fn sample_xi<R: Rng + ?Sized>(spec: &EnvironmentSpec, n: u64, rng: &mut R) -> Result<u64> {
    Ok(spec.sampler()?.sample(n, rng))
}

/// Partial sums `S_1, ..., S_count` of draws at indices `1..=count`.
pub fn partial_sums<R: Rng + ?Sized>(spec: &EnvironmentSpec, count: usize, rng: &mut R) -> Result<Vec<u64>> {
    if count == 0 {
        return config("partial_sums needs count >= 1");
    }
    let sampler = spec.sampler()?;
    let mut acc = 0u64;
    Ok((1..=count as u64)
        .map(|n| {
            acc = acc.saturating_add(sampler.sample(n, rng));
            acc
        })
        .collect())
}

/// Outcome of checking one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "witness", rename_all = "snake_case")]
pub enum Verdict<W> {
    Holds(W),
    Fails,
    Unknown,
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self, Self::Fails)
    }

    fn symbol(&self) -> &'static str {
        match self {
            Self::Holds(_) => "✓",
            Self::Fails => "✗",
            Self::Unknown => "?",
        }
    }
}

/// Witness for uniform ellipticity: `inf_n P(xi_n >= 1) = kappa > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipticity {
    pub kappa: f64,
}

/// Witness for the moment condition of order `r`: `sup_n E(xi_n^r) <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBound {
    pub bound: f64,
}

/// Witness for a growth condition: the function `n^exponent` and constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthWitness {
    pub exponent: f64,
    pub c: f64,
}

/// Range of moment orders that are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "orders", content = "limit", rename_all = "snake_case")]
pub enum MomentOrders {
    All,
    /// Finite exactly for orders strictly below the limit.
    Below(f64),
    /// `sup_n E(xi_n^r)` is infinite for every positive order.
    None,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub r: f64,
    pub verdict: Verdict<MomentBound>,
    pub finite_orders: MomentOrders,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub ue: Verdict<Ellipticity>,
    pub moment: MomentReport,
    /// Slow growth: `limsup S_n / g(n) <= c` with `sum 1/g = inf`.
    pub cond_s: Verdict<GrowthWitness>,
    /// Fast growth: `liminf S_n / f(n) >= c` with `sum 1/f < inf`.
    pub cond_i: Verdict<GrowthWitness>,
}

impl std::fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.ue {
            Verdict::Holds(Ellipticity { kappa }) => writeln!(f, "UE {} (κ={kappa})", self.ue.symbol())?,
            _ => writeln!(f, "UE {}", self.ue.symbol())?,
        }
        match self.moment.verdict {
            Verdict::Holds(MomentBound { bound }) => {
                writeln!(f, "M_{} {} (M={bound})", self.moment.r, self.moment.verdict.symbol())?
            }
            _ => writeln!(f, "M_{} {}", self.moment.r, self.moment.verdict.symbol())?,
        }
        for (name, v) in [("S", &self.cond_s), ("I", &self.cond_i)] {
            match v {
                Verdict::Holds(GrowthWitness { exponent, c }) => {
                    writeln!(f, "{name} {} (n^{exponent}, c={c})", v.symbol())?
                }
                _ => writeln!(f, "{name} {}", v.symbol())?,
            }
        }
        Ok(())
    }
}

/// Classify `spec` with the moment condition checked at order 1.
pub fn classify_conditions(spec: &EnvironmentSpec) -> Result<ConditionReport> {
    classify_conditions_at(spec, 1.0)
}

/// Classify `spec` with the moment condition checked at order `r > 0`.
pub fn classify_conditions_at(spec: &EnvironmentSpec, r: f64) -> Result<ConditionReport> {
    spec.validate()?;
    if !(r.is_finite() && r > 0.0) {
        return config(format!("moment order must be positive, got {r}"));
    }
    let linear = |c: f64| Verdict::Holds(GrowthWitness { exponent: 1.0, c });
    let all_moments = |bound: f64| MomentReport {
        r,
        verdict: Verdict::Holds(MomentBound { bound }),
        finite_orders: MomentOrders::All,
    };
    let report = match *spec {
        EnvironmentSpec::Constant { c } => {
            let c = c as f64;
            ConditionReport {
                ue: if c >= 1.0 { Verdict::Holds(Ellipticity { kappa: 1.0 }) } else { Verdict::Fails },
                moment: all_moments(c.powf(r)),
                cond_s: linear(c.max(1.0)),
                cond_i: Verdict::Fails,
            }
        }
        EnvironmentSpec::Bernoulli { p } => ConditionReport {
            ue: if p > 0.0 { Verdict::Holds(Ellipticity { kappa: p }) } else { Verdict::Fails },
            moment: all_moments(p),
            cond_s: linear(if p > 0.0 { p } else { 1.0 }),
            cond_i: Verdict::Fails,
        },
        EnvironmentSpec::Geometric { mean } => {
            let q = 1.0 / (1.0 + mean);
            ConditionReport {
                ue: Verdict::Holds(Ellipticity { kappa: 1.0 - q }),
                moment: all_moments(series_moment(r, mean, |k| q * (1.0 - q).powf(k as f64))),
                cond_s: linear(mean),
                cond_i: Verdict::Fails,
            }
        }
        EnvironmentSpec::Poisson { lambda } => {
            let log_lambda = lambda.ln();
            ConditionReport {
                ue: Verdict::Holds(Ellipticity { kappa: -(-lambda).exp_m1() }),
                moment: all_moments(series_moment(r, lambda, |k| {
                    (k as f64 * log_lambda - lambda - ln_factorial(k)).exp()
                })),
                cond_s: linear(lambda),
                cond_i: Verdict::Fails,
            }
        }
        EnvironmentSpec::PowerLawTail { alpha, delta } => {
            let beta = 0.5 * (alpha + 1.0);
            ConditionReport {
                ue: Verdict::Holds(Ellipticity { kappa: delta.min(1.0) }),
                moment: MomentReport {
                    r,
                    verdict: if r < alpha {
                        Verdict::Holds(MomentBound { bound: power_law_moment(r, alpha, delta) })
                    } else {
                        Verdict::Fails
                    },
                    finite_orders: MomentOrders::Below(alpha),
                },
                cond_s: Verdict::Fails,
                cond_i: Verdict::Holds(GrowthWitness { exponent: 1.0 / beta, c: 1.0 }),
            }
        }
        EnvironmentSpec::DeterministicPolynomial { a, period } => ConditionReport {
            ue: Verdict::Holds(Ellipticity { kappa: 1.0 }),
            moment: MomentReport { r, verdict: Verdict::Fails, finite_orders: MomentOrders::None },
            cond_s: Verdict::Fails,
            cond_i: Verdict::Holds(GrowthWitness {
                exponent: 1.0 + a,
                c: 1.0 / ((1.0 + a) * (period as f64).powf(a)),
            }),
        },
        EnvironmentSpec::Table { .. } => ConditionReport {
            ue: Verdict::Unknown,
            moment: MomentReport { r, verdict: Verdict::Unknown, finite_orders: MomentOrders::Unknown },
            cond_s: Verdict::Unknown,
            cond_i: Verdict::Unknown,
        },
        EnvironmentSpec::BernoulliDecay { .. } => ConditionReport {
            ue: Verdict::Fails,
            moment: all_moments(1.0),
            cond_s: linear(1.0),
            cond_i: Verdict::Fails,
        },
    };
    Ok(report)
}

/// `E(xi^r)` for a law on the nonnegative integers given by its pmf.
fn series_moment(r: f64, mean: f64, pmf: impl Fn(u64) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in 1u64..50_000_000 {
        let term = pmf(k) * (k as f64).powf(r);
        acc += term;
        if k as f64 > 2.0 * mean + 10.0 && term <= acc * 1e-16 {
            break;
        }
    }
    acc
}

/// `E(xi^r)` for the power-law family, `r < alpha`, summing
/// `(x^r - (x-1)^r) P(xi >= x)` with an integral tail correction.
fn power_law_moment(r: f64, alpha: f64, delta: f64) -> f64 {
    const TERMS: u64 = 1_000_000;
    let mut acc = 0.0;
    for x in 1..=TERMS {
        let x = x as f64;
        acc += (x.powf(r) - (x - 1.0).powf(r)) * (delta * x.powf(-alpha)).min(1.0);
    }
    let edge = TERMS as f64 + 0.5;
    acc + r * delta * edge.powf(r - alpha) / (alpha - r)
}

fn ln_factorial(k: u64) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}
