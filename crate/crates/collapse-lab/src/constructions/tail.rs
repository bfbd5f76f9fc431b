//! Unbounded-support chain family and its spiked-uniform competitor.
//!
//! A chain parameter is a finite list of escape masses `alphas`; level `j`
//! carries a uniform block on `[j, j+1−2αⱼ]` with mass `(1−αⱼ)·∏_{k<j} α_k`,
//! so the log density on that block is `log(1 + αⱼ/(1−2αⱼ)) + Σ_{k<j} log α_k`.
//! Levels past the end of the list have escape mass 0.
//!
//! The spiked competitor `(beta, span)` is `½ U[0, span]` plus a width-`f`
//! spike of mass `½` at `span − beta`, where `f` shrinks with `span` under a
//! configurable [`WidthSchedule`]. Spike widths routinely underflow `f64`,
//! so all spike heights are kept in log space and an underflowed spike
//! behaves as a point mass.

use crate::core::{
    CoordTransform, Dataset, Family, FamilyError, FamilyId, MleError, ParamPoint, RandomStream,
    Sample,
};
use crate::metrics;
use std::collections::BTreeMap;

/// Largest admissible chain escape mass.
const ALPHA_MAX: f64 = 0.25;

/// Cap on `−log f`: schedules that overflow `f64` saturate here, which
/// preserves every likelihood argmax while keeping arithmetic finite.
pub const NEG_LOG_F_CAP: f64 = 1e12;

/// Default growth constant for [`WidthSchedule::PhiComposed`].
pub const DEFAULT_GROWTH_C: f64 = 8.0;

/// Slowly growing reference function used to compose the spike width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiKind {
    /// `phi(x) = log log(x + 1)`, inverse `exp(exp(y)) − 1`. The inverse
    /// explodes fast enough that the width saturates at the cap for every
    /// practical span.
    LogLog,
    /// `phi(x) = x`. Keeps widths representable for small spans.
    Identity,
}

impl PhiKind {
    fn inverse(&self, y: f64) -> f64 {
        match self {
            PhiKind::LogLog => y.exp().exp() - 1.0,
            PhiKind::Identity => y,
        }
    }
}

/// Rule mapping a span `J` to the spike width `f(J)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WidthSchedule {
    /// `log f(J) = −log 2 − E·log(2eJ)` for a fixed budget exponent `E`.
    /// Small `E` keeps widths representable; the collapse demonstrations
    /// run `E = 10^4`.
    Demo { budget_exponent: f64 },
    /// `log f(J) = −log 2 − phi⁻¹(psi(J))·psi(J)·log(2eJ)` with
    /// `psi(a) = (C·log(4/delta)/delta)^(a−1)`.
    PhiComposed {
        phi: PhiKind,
        growth_c: f64,
        delta: f64,
    },
}

/// Chain family with a spiked escape route, parameterized by a width
/// schedule and the smallest span the fit may propose.
#[derive(Debug, Clone)]
pub struct TailChainFamily {
    schedule: WidthSchedule,
    min_span: u32,
}

/// Validated tail-chain parameter: either a chain of escape masses or a
/// spiked uniform.
#[derive(Debug, Clone, PartialEq)]
pub enum TailChainParams {
    Chain { alphas: Vec<f64> },
    Spiked { beta: f64, span: u32 },
}

impl TailChainParams {
    pub fn is_spiked(&self) -> bool {
        matches!(self, TailChainParams::Spiked { .. })
    }
}

/// Per-interval maximum fractional offsets of a dataset: interval `j`
/// maps to `max(samples ∩ [j, j+1]) − j`.
///
/// A sample exactly at an integer `j+1` belongs to interval `j` with
/// offset 1; the single exception is a sample at 0, which belongs to
/// interval 0 with offset 0.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMaxTable {
    entries: BTreeMap<usize, f64>,
}

impl IntervalMaxTable {
    pub fn get(&self, interval: usize) -> Option<f64> {
        self.entries.get(&interval).copied()
    }

    /// Highest occupied interval index.
    pub fn last_occupied(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&j, &m)| (j, m))
    }
}

/// Builds the per-interval maximum table; negative samples are rejected.
pub fn interval_max(data: &Dataset) -> Result<IntervalMaxTable, MleError> {
    let mut entries: BTreeMap<usize, f64> = BTreeMap::new();
    for x in data.iter_values() {
        if x < 0.0 {
            return Err(MleError::OutOfSupport { value: x });
        }
        let (interval, offset) = if x > 0.0 && x == x.floor() {
            (x as usize - 1, 1.0)
        } else {
            (x.floor() as usize, x - x.floor())
        };
        let slot = entries.entry(interval).or_insert(offset);
        if offset > *slot {
            *slot = offset;
        }
    }
    Ok(IntervalMaxTable { entries })
}

fn chain_segment_log(alphas: &[f64], level: usize, x: f64) -> f64 {
    let a = alphas.get(level).copied().unwrap_or(0.0);
    if x > level as f64 + 1.0 - 2.0 * a {
        return f64::NEG_INFINITY;
    }
    let mut total = (a / (1.0 - 2.0 * a)).ln_1p();
    for k in 0..level {
        let ak = alphas.get(k).copied().unwrap_or(0.0);
        if ak == 0.0 {
            return f64::NEG_INFINITY;
        }
        total += ak.ln();
    }
    total
}

fn chain_log_density(alphas: &[f64], x: f64) -> f64 {
    if !x.is_finite() || x < 0.0 {
        return f64::NEG_INFINITY;
    }
    let floor = x.floor();
    let level = floor as usize;
    let mut best = chain_segment_log(alphas, level, x);
    if x == floor && level > 0 {
        best = best.max(chain_segment_log(alphas, level - 1, x));
    }
    best
}

impl TailChainFamily {
    /// Builds the family under the given width schedule with the default
    /// minimum span of 2.
    pub fn new(schedule: WidthSchedule) -> Result<Self, FamilyError> {
        let reject = |detail: String| FamilyError::OutOfDomain {
            family: FamilyId::TailChain,
            detail,
        };
        match schedule {
            WidthSchedule::Demo { budget_exponent } => {
                if !budget_exponent.is_finite() || budget_exponent <= 0.0 {
                    return Err(reject(format!(
                        "budget exponent must be positive, got {budget_exponent}"
                    )));
                }
            }
            WidthSchedule::PhiComposed {
                growth_c, delta, ..
            } => {
                if !delta.is_finite() || !(0.0..1.0).contains(&delta) || delta == 0.0 {
                    return Err(reject(format!("delta must lie in (0, 1), got {delta}")));
                }
                if !growth_c.is_finite() || growth_c <= 0.0 {
                    return Err(reject(format!(
                        "growth constant must be positive, got {growth_c}"
                    )));
                }
                let base = growth_c * (4.0 / delta).ln() / delta;
                if base <= 1.0 {
                    return Err(reject(format!(
                        "growth base C·log(4/delta)/delta must exceed 1 for the width \
                         to shrink with the span, got {base}"
                    )));
                }
            }
        }
        Ok(TailChainFamily {
            schedule,
            min_span: 2,
        })
    }

    /// Sets the smallest span [`fit`](Self::fit) may propose (`>= 2`).
    pub fn with_min_span(mut self, min_span: u32) -> Result<Self, FamilyError> {
        if min_span < 2 {
            return Err(FamilyError::OutOfDomain {
                family: FamilyId::TailChain,
                detail: format!("minimum span must be at least 2, got {min_span}"),
            });
        }
        self.min_span = min_span;
        Ok(self)
    }

    pub fn schedule(&self) -> &WidthSchedule {
        &self.schedule
    }

    pub fn min_span(&self) -> u32 {
        self.min_span
    }

    fn neg_log_f(&self, span: u32) -> f64 {
        let j = f64::from(span);
        let raw = match self.schedule {
            WidthSchedule::Demo { budget_exponent } => {
                2f64.ln() + budget_exponent * (2.0 * std::f64::consts::E * j).ln()
            }
            WidthSchedule::PhiComposed {
                phi,
                growth_c,
                delta,
            } => {
                let base = growth_c * (4.0 / delta).ln() / delta;
                let psi = ((j - 1.0) * base.ln()).exp();
                2f64.ln() + phi.inverse(psi) * psi * (2.0 * std::f64::consts::E * j).ln()
            }
        };
        raw.min(NEG_LOG_F_CAP)
    }

    /// Natural log of the spike width at the given span.
    pub fn log_f(&self, span: u32) -> f64 {
        -self.neg_log_f(span)
    }

    /// Spike width in linear space; 0 when it underflows.
    pub fn f_linear(&self, span: u32) -> f64 {
        self.log_f(span).exp()
    }

    /// Builds a validated chain parameter.
    pub fn make_chain(&self, alphas: Vec<f64>) -> Result<TailChainParams, FamilyError> {
        for (j, &a) in alphas.iter().enumerate() {
            if !a.is_finite() || !(0.0..=ALPHA_MAX).contains(&a) {
                return Err(FamilyError::OutOfDomain {
                    family: FamilyId::TailChain,
                    detail: format!("escape mass at level {j} must lie in [0, 1/4], got {a}"),
                });
            }
        }
        Ok(TailChainParams::Chain { alphas })
    }

    /// Builds a validated spiked parameter.
    pub fn make_spiked(&self, beta: f64, span: u32) -> Result<TailChainParams, FamilyError> {
        let reject = |detail: String| FamilyError::OutOfDomain {
            family: FamilyId::TailChain,
            detail,
        };
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(reject(format!("beta must lie in [0, 1], got {beta}")));
        }
        if span < 2 {
            return Err(reject(format!("span must be at least 2, got {span}")));
        }
        Ok(TailChainParams::Spiked { beta, span })
    }

    /// Encodes parameters as a flat coordinate vector: selector 0 followed
    /// by the escape masses for a chain, selector 1 followed by
    /// `(beta, span)` for a spiked uniform.
    pub fn encode(&self, params: &TailChainParams) -> ParamPoint {
        let coords = match params {
            TailChainParams::Chain { alphas } => {
                let mut c = Vec::with_capacity(alphas.len() + 1);
                c.push(0.0);
                c.extend_from_slice(alphas);
                c
            }
            TailChainParams::Spiked { beta, span } => vec![1.0, *beta, f64::from(*span)],
        };
        ParamPoint::new(FamilyId::TailChain, coords).expect("validated parameters are finite")
    }

    /// Decodes and revalidates a coordinate vector.
    pub fn decode(&self, theta: &ParamPoint) -> Result<TailChainParams, FamilyError> {
        if theta.family() != FamilyId::TailChain {
            return Err(FamilyError::FamilyMismatch {
                expected: FamilyId::TailChain,
                got: theta.family(),
            });
        }
        if theta.dim() == 0 {
            return Err(FamilyError::CoordCount {
                family: FamilyId::TailChain,
                expected: 1,
                got: 0,
            });
        }
        let selector = theta.coord(0);
        if selector == 0.0 {
            self.make_chain(theta.coords()[1..].to_vec())
        } else if selector == 1.0 {
            if theta.dim() != 3 {
                return Err(FamilyError::CoordCount {
                    family: FamilyId::TailChain,
                    expected: 3,
                    got: theta.dim(),
                });
            }
            let raw_span = theta.coord(2);
            if raw_span.fract() != 0.0 || !(2.0..=f64::from(u32::MAX)).contains(&raw_span) {
                return Err(FamilyError::OutOfDomain {
                    family: FamilyId::TailChain,
                    detail: format!("span must be an integer of at least 2, got {raw_span}"),
                });
            }
            self.make_spiked(theta.coord(1), raw_span as u32)
        } else {
            Err(FamilyError::OutOfDomain {
                family: FamilyId::TailChain,
                detail: format!("selector coordinate must be 0 (chain) or 1 (spiked), got {selector}"),
            })
        }
    }

    /// Log density at `x`.
    ///
    /// A sample exactly on an integer boundary scores as the denser of the
    /// two adjacent chain blocks; both spike edges score as the spike.
    pub fn log_density(&self, params: &TailChainParams, x: f64) -> f64 {
        match params {
            TailChainParams::Chain { alphas } => chain_log_density(alphas, x),
            TailChainParams::Spiked { beta, span } => self.spiked_log_density(*beta, *span, x),
        }
    }

    fn spiked_log_density(&self, beta: f64, span: u32, x: f64) -> f64 {
        let j = f64::from(span);
        if !x.is_finite() || x < 0.0 || x > j {
            return f64::NEG_INFINITY;
        }
        let neg_log_f = self.neg_log_f(span);
        let f_lin = (-neg_log_f).exp();
        // the spike is clamped to end at the span's right edge
        let left = (j - beta).min(j - f_lin);
        let in_spike = if f_lin > 0.0 {
            x >= left && x <= left + f_lin
        } else {
            x == left
        };
        if in_spike {
            -(2f64.ln()) + neg_log_f + (f_lin / j).ln_1p()
        } else {
            -(2.0 * j).ln()
        }
    }

    fn sample_one(&self, params: &TailChainParams, stream: &mut RandomStream) -> f64 {
        match params {
            TailChainParams::Chain { alphas } => {
                let mut level = 0usize;
                loop {
                    let a = alphas.get(level).copied().unwrap_or(0.0);
                    if stream.next_f64() < a {
                        level += 1;
                    } else {
                        return level as f64 + stream.next_f64() * (1.0 - 2.0 * a);
                    }
                }
            }
            TailChainParams::Spiked { beta, span } => {
                let j = f64::from(*span);
                let f_lin = self.f_linear(*span);
                let left = (j - beta).min(j - f_lin);
                if stream.next_f64() < 0.5 {
                    stream.next_f64() * j
                } else {
                    left + stream.next_f64() * f_lin
                }
            }
        }
    }

    /// Best chain fit: `αⱼ = min(1/4, (1−Mⱼ)/2)` on occupied intervals,
    /// 1/4 on unoccupied intervals below the last occupied one.
    pub fn best_h_fit(&self, data: &Dataset) -> Result<(TailChainParams, f64), MleError> {
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        let table = interval_max(data)?;
        let last = table.last_occupied().expect("nonempty dataset fills the table");
        let alphas: Vec<f64> = (0..=last)
            .map(|j| match table.get(j) {
                Some(m) => ALPHA_MAX.min((1.0 - m) / 2.0),
                None => ALPHA_MAX,
            })
            .collect();
        let params = TailChainParams::Chain { alphas };
        let loglik = data.iter_values().map(|x| self.log_density(&params, x)).sum();
        Ok((params, loglik))
    }

    /// Best spiked fit at a fixed span: slides a width-`f(span)` window
    /// over the sorted samples in the top interval and anchors the spike
    /// at the leftmost placement capturing the most samples.
    ///
    /// No sample in the top interval puts the spike at `beta = 1`; a
    /// sample outside `[0, span]` drives the log-likelihood to `−∞`.
    pub fn best_g_fit(&self, data: &Dataset, span: u32) -> Result<(TailChainParams, f64), MleError> {
        if span < 2 {
            return Err(MleError::Degenerate(format!(
                "spiked span must be at least 2, got {span}"
            )));
        }
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        let j = f64::from(span);
        let f_lin = self.f_linear(span);
        let mut cluster: Vec<f64> = data
            .iter_values()
            .filter(|&x| x >= j - 1.0 && x <= j)
            .collect();
        cluster.sort_by(f64::total_cmp);
        let beta = if cluster.is_empty() {
            1.0
        } else {
            let mut best_count = 0usize;
            let mut best_left = j - 1.0;
            for (i, &s) in cluster.iter().enumerate() {
                let left = s.min(j - f_lin);
                let count = if f_lin > 0.0 {
                    cluster.partition_point(|&x| x <= left + f_lin)
                        - cluster.partition_point(|&x| x < left)
                } else {
                    cluster.partition_point(|&x| x <= s) - i
                };
                if count > best_count {
                    best_count = count;
                    best_left = left;
                }
            }
            j - best_left
        };
        let params = TailChainParams::Spiked { beta, span };
        let loglik = data.iter_values().map(|x| self.log_density(&params, x)).sum();
        Ok((params, loglik))
    }

    /// Exact fit over both routes: the chain fit plus spiked fits at the
    /// three smallest admissible spans, `span >= max(min_span, ceil(max
    /// sample))`. Ties prefer the chain, then the smaller span.
    pub fn fit(&self, data: &Dataset) -> Result<(TailChainParams, f64), MleError> {
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        let (h_params, h_loglik) = self.best_h_fit(data)?;
        let x_max = data.iter_values().fold(0.0f64, f64::max);
        let base_span = self.min_span.max(x_max.ceil() as u32);
        let mut best = (h_loglik, h_params);
        for span in base_span..base_span + 3 {
            let (params, loglik) = self.best_g_fit(data, span)?;
            if loglik > best.0 {
                best = (loglik, params);
            }
        }
        Ok((best.1, best.0))
    }
}

impl Family for TailChainFamily {
    fn id(&self) -> FamilyId {
        FamilyId::TailChain
    }

    fn validate(&self, theta: &ParamPoint) -> Result<(), FamilyError> {
        self.decode(theta).map(|_| ())
    }

    fn log_pdf(&self, theta: &ParamPoint, x: f64) -> f64 {
        match self.decode(theta) {
            Ok(params) => self.log_density(&params, x),
            Err(_) => f64::NAN,
        }
    }

    fn sample_into(
        &self,
        theta: &ParamPoint,
        stream: &mut RandomStream,
        n: usize,
        out: &mut Vec<Sample>,
    ) {
        let params = self.decode(theta).expect("sampling requires valid parameters");
        out.reserve(n);
        for _ in 0..n {
            let x = self.sample_one(&params, stream);
            out.push(Sample::new(x).expect("chain and spiked draws are finite"));
        }
    }

    fn exact_mle(&self, data: &Dataset) -> Result<ParamPoint, MleError> {
        self.fit(data).map(|(params, _)| self.encode(&params))
    }

    /// The chain/spiked selector makes the coordinate space disconnected,
    /// so there is no smooth search space.
    fn coord_transforms(&self) -> Option<&'static [CoordTransform]> {
        None
    }

    /// Chain and spiked coordinates are not commensurable, so no
    /// parameter-space error is reported; distances use `tv` instead.
    fn param_error(&self, _a: &ParamPoint, _b: &ParamPoint) -> Option<f64> {
        None
    }

    fn tv(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        match (self.decode(a), self.decode(b)) {
            (Ok(pa), Ok(pb)) => metrics::tv_exact(
                &metrics::tail_piecewise(self, &pa),
                &metrics::tail_piecewise(self, &pb),
            ),
            _ => f64::NAN,
        }
    }

    fn kl(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        match (self.decode(a), self.decode(b)) {
            (Ok(pa), Ok(pb)) => metrics::kl_piecewise(
                &metrics::tail_piecewise(self, &pa),
                &metrics::tail_piecewise(self, &pb),
            ),
            _ => f64::NAN,
        }
    }
}
