//! Four-component uniform mixture on `[0,1] ∪ [2,3]` with a near-degenerate
//! spike, and its exact fit by breakpoint enumeration.
//!
//! The density with parameters `(alpha, mu)` is
//!
//! ```text
//! ½ U[0,1] + ((1−α)/2) U[0, 1−2α] + (α/4) U[2,3] + (α/4) U[μ, μ+f(α)]
//! ```
//!
//! where the spike width `f(α)` drops from `1/39` to `1/(32·128^(2N) − 1)`
//! once `α` exceeds `1/10`. For the construction scales of interest the
//! narrow width underflows linear `f64` arithmetic, so the family stores
//! `log f` and evaluates spike heights entirely in log space; an
//! underflowed spike behaves as a point mass at `mu`.

use crate::core::{
    CoordTransform, Dataset, Family, FamilyError, FamilyId, MleError, ParamPoint, RandomStream,
    Sample,
};
use crate::metrics;

/// Spike width on the wide branch (`alpha <= 1/10`).
const WIDE_F: f64 = 1.0 / 39.0;

/// Largest admissible escape mass `alpha`.
const ALPHA_MAX: f64 = 0.25;

/// Mixture family on `[0,1] ∪ [2,3]` indexed by a construction scale `N`.
///
/// `N` controls only the narrow spike width `1/(32·128^(2N) − 1)`; the
/// parameter domain is the same for every scale.
#[derive(Debug, Clone, Copy)]
pub struct SpikeMixtureFamily {
    scale: u32,
    log_f_narrow: f64,
}

/// Validated spike-mixture parameter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeMixtureParams {
    pub alpha: f64,
    pub mu: f64,
}

impl SpikeMixtureFamily {
    /// Builds the family at construction scale `scale` (`N >= 1`).
    pub fn new(scale: u32) -> Result<Self, FamilyError> {
        if scale == 0 {
            return Err(FamilyError::OutOfDomain {
                family: FamilyId::SpikeMixture,
                detail: "construction scale must be at least 1".to_string(),
            });
        }
        // log f = −log(32·128^(2N) − 1), expanded as −log(32·128^(2N))
        // − log1p(−1/(32·128^(2N))) so the value stays exact even when the
        // power itself overflows; the correction underflows to 0 then.
        let exponent = 32f64.ln() + 2.0 * f64::from(scale) * 128f64.ln();
        let inv = (-exponent).exp();
        let log_f_narrow = -exponent - (-inv).ln_1p();
        Ok(SpikeMixtureFamily {
            scale,
            log_f_narrow,
        })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Natural log of the spike width at escape mass `alpha`.
    pub fn log_f(&self, alpha: f64) -> f64 {
        if alpha <= 0.1 {
            WIDE_F.ln()
        } else {
            self.log_f_narrow
        }
    }

    /// Spike width in linear space; 0 when it underflows.
    pub fn f_linear(&self, alpha: f64) -> f64 {
        self.log_f(alpha).exp()
    }

    /// Builds validated parameters.
    pub fn make_params(&self, alpha: f64, mu: f64) -> Result<SpikeMixtureParams, FamilyError> {
        let reject = |detail: String| FamilyError::OutOfDomain {
            family: FamilyId::SpikeMixture,
            detail,
        };
        if !alpha.is_finite() || !(0.0..=ALPHA_MAX).contains(&alpha) {
            return Err(reject(format!("alpha must lie in [0, 1/4], got {alpha}")));
        }
        let mu_max = 3.0 - self.f_linear(alpha);
        if !mu.is_finite() || !(2.0..=mu_max).contains(&mu) {
            return Err(reject(format!(
                "mu must lie in [2, {mu_max}] at alpha {alpha}, got {mu}"
            )));
        }
        Ok(SpikeMixtureParams { alpha, mu })
    }

    /// Encodes parameters as the flat coordinate vector `(alpha, mu)`.
    pub fn encode(&self, params: &SpikeMixtureParams) -> ParamPoint {
        ParamPoint::new(FamilyId::SpikeMixture, vec![params.alpha, params.mu])
            .expect("validated parameters are finite")
    }

    /// Decodes and revalidates a coordinate vector.
    pub fn decode(&self, theta: &ParamPoint) -> Result<SpikeMixtureParams, FamilyError> {
        if theta.family() != FamilyId::SpikeMixture {
            return Err(FamilyError::FamilyMismatch {
                expected: FamilyId::SpikeMixture,
                got: theta.family(),
            });
        }
        if theta.dim() != 2 {
            return Err(FamilyError::CoordCount {
                family: FamilyId::SpikeMixture,
                expected: 2,
                got: theta.dim(),
            });
        }
        self.make_params(theta.coord(0), theta.coord(1))
    }

    /// Log density at `x`.
    ///
    /// Region boundaries go to the denser side: `x = 1−2α` scores as the
    /// boosted lower region, and both spike edges score as the spike. When
    /// the spike width underflows, spike membership is the exact test
    /// `x == mu`.
    pub fn log_density(&self, params: &SpikeMixtureParams, x: f64) -> f64 {
        let alpha = params.alpha;
        if (0.0..=1.0).contains(&x) {
            let cut = 1.0 - 2.0 * alpha;
            return if x <= cut {
                (0.5 + (1.0 - alpha) / (2.0 * cut)).ln()
            } else {
                0.5f64.ln()
            };
        }
        if (2.0..=3.0).contains(&x) {
            let base = (alpha / 4.0).ln();
            let log_f = self.log_f(alpha);
            let f_lin = log_f.exp();
            let in_spike = if f_lin > 0.0 {
                x >= params.mu && x <= params.mu + f_lin
            } else {
                x == params.mu
            };
            return if in_spike {
                base - log_f + f_lin.ln_1p()
            } else {
                base
            };
        }
        f64::NEG_INFINITY
    }

    /// Log-likelihood summed in a position-independent order (ascending
    /// terms), so likelihood ties between spike placements that capture
    /// different samples compare as exact float ties.
    fn stable_loglik(&self, params: &SpikeMixtureParams, data: &Dataset) -> f64 {
        let mut terms: Vec<f64> = data
            .iter_values()
            .map(|x| self.log_density(params, x))
            .collect();
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }

    fn sample_one(&self, params: &SpikeMixtureParams, stream: &mut RandomStream) -> f64 {
        let component = stream.next_f64();
        let position = stream.next_f64();
        let alpha = params.alpha;
        if component < 0.5 {
            return position;
        }
        if component < 0.5 + (1.0 - alpha) / 2.0 {
            return position * (1.0 - 2.0 * alpha);
        }
        if component < 0.5 + (1.0 - alpha) / 2.0 + alpha / 4.0 {
            return 2.0 + position;
        }
        params.mu + position * self.f_linear(alpha)
    }

    /// Exact fit by breakpoint enumeration.
    ///
    /// Within each piece of constant region membership the log-likelihood
    /// is strictly increasing in `alpha`, so the maximizer lies on the
    /// finite candidate set `{(1−xᵢ)/2} ∪ {0, 1/10, 1/4}`. For each
    /// candidate the best `mu` maximizes the spike's sample count (every
    /// captured sample earns the same positive log-height bonus), found by
    /// sliding a width-`f(α)` window over the sorted upper samples;
    /// leftmost placement anchored at a sample is the canonical choice.
    pub fn fit(&self, data: &Dataset) -> Result<SpikeMixtureParams, MleError> {
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        let mut unit = Vec::new();
        let mut upper = Vec::new();
        for x in data.iter_values() {
            if (0.0..=1.0).contains(&x) {
                unit.push(x);
            } else if (2.0..=3.0).contains(&x) {
                upper.push(x);
            } else {
                return Err(MleError::OutOfSupport { value: x });
            }
        }
        upper.sort_by(f64::total_cmp);

        let mut candidates: Vec<f64> = unit
            .iter()
            .map(|x| (1.0 - x) / 2.0)
            .filter(|a| *a <= ALPHA_MAX)
            .collect();
        candidates.extend([0.0, 0.1, ALPHA_MAX]);
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let mut best: Option<(f64, SpikeMixtureParams)> = None;
        for &alpha in &candidates {
            if alpha == 0.0 && !upper.is_empty() {
                continue;
            }
            let mu = self.best_spike_position(alpha, &upper);
            let params = SpikeMixtureParams { alpha, mu };
            let loglik = self.stable_loglik(&params, data);
            if best.as_ref().is_none_or(|(top, _)| loglik > *top) {
                best = Some((loglik, params));
            }
        }
        let (_, params) = best.ok_or_else(|| {
            MleError::Degenerate("no admissible escape-mass candidate".to_string())
        })?;
        Ok(params)
    }

    /// Exhaustive reference fit: evaluates the full log-likelihood at every
    /// `(alpha, mu)` on the candidate grid, with `mu` anchored at each
    /// upper sample (clamped to keep the spike inside `[2,3]`) plus the
    /// left edge 2. Independent cross-check for [`fit`](Self::fit): same
    /// argmax, no sliding-window shortcut.
    pub fn brute_force_fit(&self, data: &Dataset) -> Result<SpikeMixtureParams, MleError> {
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        let mut unit = Vec::new();
        let mut upper = Vec::new();
        for x in data.iter_values() {
            if (0.0..=1.0).contains(&x) {
                unit.push(x);
            } else if (2.0..=3.0).contains(&x) {
                upper.push(x);
            } else {
                return Err(MleError::OutOfSupport { value: x });
            }
        }
        upper.sort_by(f64::total_cmp);
        let mut candidates: Vec<f64> = unit
            .iter()
            .map(|x| (1.0 - x) / 2.0)
            .filter(|a| *a <= ALPHA_MAX)
            .collect();
        candidates.extend([0.0, 0.1, ALPHA_MAX]);
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let mut best: Option<(f64, SpikeMixtureParams)> = None;
        for &alpha in &candidates {
            if alpha == 0.0 && !upper.is_empty() {
                continue;
            }
            let f_lin = self.f_linear(alpha);
            let mut anchors: Vec<f64> = upper.iter().map(|&s| s.min(3.0 - f_lin)).collect();
            anchors.push(2.0);
            anchors.sort_by(f64::total_cmp);
            anchors.dedup();
            for &mu in &anchors {
                let params = SpikeMixtureParams { alpha, mu };
                let loglik = self.stable_loglik(&params, data);
                if best.as_ref().is_none_or(|(top, _)| loglik > *top) {
                    best = Some((loglik, params));
                }
            }
        }
        Ok(best.expect("candidate set is never empty").1)
    }

    /// Leftmost spike placement capturing the most upper samples, anchored
    /// at a sample (or 2 when no upper samples exist). `upper` must be
    /// sorted ascending.
    fn best_spike_position(&self, alpha: f64, upper: &[f64]) -> f64 {
        if upper.is_empty() {
            return 2.0;
        }
        let f_lin = self.f_linear(alpha);
        let mut best_count = 0usize;
        let mut best_mu = 2.0;
        for (i, &s) in upper.iter().enumerate() {
            let mu = s.min(3.0 - f_lin);
            let count = if f_lin > 0.0 {
                upper.partition_point(|&x| x <= mu + f_lin) - upper.partition_point(|&x| x < mu)
            } else {
                upper.partition_point(|&x| x <= s) - i
            };
            if count > best_count {
                best_count = count;
                best_mu = mu;
            }
        }
        best_mu
    }
}

impl Family for SpikeMixtureFamily {
    fn id(&self) -> FamilyId {
        FamilyId::SpikeMixture
    }

    fn validate(&self, theta: &ParamPoint) -> Result<(), FamilyError> {
        self.decode(theta).map(|_| ())
    }

    fn log_pdf(&self, theta: &ParamPoint, x: f64) -> f64 {
        let params = SpikeMixtureParams {
            alpha: theta.coord(0),
            mu: theta.coord(1),
        };
        self.log_density(&params, x)
    }

    fn sample_into(
        &self,
        theta: &ParamPoint,
        stream: &mut RandomStream,
        n: usize,
        out: &mut Vec<Sample>,
    ) {
        let params = SpikeMixtureParams {
            alpha: theta.coord(0),
            mu: theta.coord(1),
        };
        out.reserve(n);
        for _ in 0..n {
            let x = self.sample_one(&params, stream);
            out.push(Sample::new(x).expect("mixture draws lie in [0,1] or [2,3]"));
        }
    }

    fn exact_mle(&self, data: &Dataset) -> Result<ParamPoint, MleError> {
        self.fit(data).map(|p| self.encode(&p))
    }

    /// The likelihood is piecewise in `alpha` with jumps at the candidate
    /// breakpoints, so there is no smooth search space.
    fn coord_transforms(&self) -> Option<&'static [CoordTransform]> {
        None
    }

    fn tv(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        match (self.decode(a), self.decode(b)) {
            (Ok(pa), Ok(pb)) => metrics::tv_exact(
                &metrics::spike_piecewise(self, &pa),
                &metrics::spike_piecewise(self, &pb),
            ),
            _ => f64::NAN,
        }
    }

    fn kl(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        match (self.decode(a), self.decode(b)) {
            (Ok(pa), Ok(pb)) => metrics::kl_piecewise(
                &metrics::spike_piecewise(self, &pa),
                &metrics::spike_piecewise(self, &pb),
            ),
            _ => f64::NAN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(values: &[f64]) -> Dataset {
        let samples: Vec<Sample> = values.iter().map(|&v| Sample::new(v).unwrap()).collect();
        Dataset::new(values.len())
            .unwrap()
            .accumulate(&samples, 0)
            .unwrap()
    }

    #[test]
    fn narrow_log_width_matches_direct_log_at_small_scale() {
        let fam = SpikeMixtureFamily::new(1).unwrap();
        let direct = -(32.0 * 128f64.powi(2) - 1.0).ln();
        assert!(
            (fam.log_f(0.2) - direct).abs() < 1e-12,
            "{} vs {direct}",
            fam.log_f(0.2)
        );
    }

    #[test]
    fn narrow_log_width_matches_exponent_sum_at_large_scales() {
        for scale in [2u32, 5, 100] {
            let fam = SpikeMixtureFamily::new(scale).unwrap();
            let approx = -(32f64.ln() + 2.0 * f64::from(scale) * 128f64.ln());
            let rel = ((fam.log_f(0.2) - approx) / approx).abs();
            assert!(rel < 1e-9, "scale {scale}: relative gap {rel}");
        }
    }

    #[test]
    fn width_branch_switches_above_one_tenth() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        assert_eq!(fam.log_f(0.05), (1.0f64 / 39.0).ln());
        assert_eq!(fam.log_f(0.1), (1.0f64 / 39.0).ln());
        assert!(fam.log_f(0.10001) < -50.0);
    }

    #[test]
    fn log_density_is_zero_for_pure_uniform() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let p = fam.make_params(0.0, 2.0).unwrap();
        assert_eq!(fam.log_density(&p, 0.5), 0.0);
        assert_eq!(fam.log_density(&p, 1.0), 0.0);
    }

    #[test]
    fn log_density_upper_unit_region_is_log_half() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let p = fam.make_params(0.1, 2.0).unwrap();
        assert_eq!(fam.log_density(&p, 0.95), 0.5f64.ln());
        let boosted = (0.5 + 0.9f64 / 1.6).ln();
        assert!((fam.log_density(&p, 0.8) - boosted).abs() < 1e-15);
    }

    #[test]
    fn log_density_spike_value_is_finite_at_underflowed_width() {
        let fam = SpikeMixtureFamily::new(100).unwrap();
        let p = fam.make_params(0.2, 2.5).unwrap();
        let got = fam.log_density(&p, 2.5);
        let expected = (0.05f64).ln() + 32f64.ln() + 200.0 * 128f64.ln();
        assert!((got - expected).abs() < 1e-9, "got {got}");
        assert_eq!(fam.log_density(&p, 2.5 + 1e-12), (0.05f64).ln());
    }

    #[test]
    fn log_density_off_support_is_neg_infinity() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let p = fam.make_params(0.1, 2.0).unwrap();
        assert_eq!(fam.log_density(&p, 1.5), f64::NEG_INFINITY);
        assert_eq!(fam.log_density(&p, -0.1), f64::NEG_INFINITY);
        assert_eq!(fam.log_density(&p, 3.1), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_out_of_domain_params() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        assert!(fam.make_params(0.3, 2.0).is_err());
        assert!(fam.make_params(-0.01, 2.0).is_err());
        assert!(fam.make_params(0.1, 1.9).is_err());
        assert!(fam.make_params(0.05, 2.99).is_err());
    }

    #[test]
    fn zero_alpha_samples_stay_in_unit_interval() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let theta = fam.encode(&fam.make_params(0.0, 2.0).unwrap());
        let mut stream = RandomStream::derive(5, 0, 0);
        for s in fam.sample(&theta, &mut stream, 10_000) {
            assert!((0.0..=1.0).contains(&s.value()));
        }
    }

    #[test]
    fn upper_mass_fraction_matches_alpha_over_two() {
        let fam = SpikeMixtureFamily::new(100).unwrap();
        let theta = fam.encode(&fam.make_params(0.2, 2.5).unwrap());
        let mut stream = RandomStream::derive(6, 0, 0);
        let n = 100_000;
        let draws = fam.sample(&theta, &mut stream, n);
        let upper = draws.iter().filter(|s| s.value() >= 2.0).count() as f64 / n as f64;
        assert!((upper - 0.1).abs() < 0.004, "upper fraction {upper}");
        let at_mu = draws.iter().filter(|s| s.value() == 2.5).count();
        assert!(
            (4700..=5300).contains(&at_mu),
            "spike draws collapse to mu exactly when the width underflows, got {at_mu}"
        );
    }

    #[test]
    fn fit_single_low_sample_caps_alpha() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let p = fam.fit(&dataset(&[0.5])).unwrap();
        assert_eq!(p.alpha, 0.25);
        assert_eq!(p.mu, 2.0);
    }

    #[test]
    fn fit_grid_dataset_uses_closed_form_alpha() {
        let values: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let p = fam.fit(&dataset(&values)).unwrap();
        assert_eq!(p.alpha, (1.0 - 0.9) / 2.0);
        assert_eq!(p.mu, 2.0);
    }

    #[test]
    fn fit_prefers_narrow_spike_for_upper_sample() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let p = fam.fit(&dataset(&[0.5, 2.5])).unwrap();
        assert!(p.alpha > 0.1, "alpha {}", p.alpha);
        assert_eq!(p.mu, 2.5);
    }

    #[test]
    fn fit_rejects_unsupported_sample() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        assert!(matches!(
            fam.fit(&dataset(&[0.5, 1.5])),
            Err(MleError::OutOfSupport { value }) if value == 1.5
        ));
    }

    #[test]
    fn fit_matches_brute_force_on_mixed_draws() {
        let fam = SpikeMixtureFamily::new(5).unwrap();
        let theta = fam.encode(&fam.make_params(0.2, 2.3).unwrap());
        for seed in 0..20 {
            let mut stream = RandomStream::derive(400 + seed, 0, 0);
            let draws = fam.sample(&theta, &mut stream, 25);
            let data = Dataset::new(25).unwrap().accumulate(&draws, 0).unwrap();
            let fast = fam.fit(&data).unwrap();
            let slow = fam.brute_force_fit(&data).unwrap();
            assert_eq!(fast, slow, "seed {seed}");
        }
    }

    #[test]
    fn unit_only_draws_recover_half_gap_alpha() {
        let fam = SpikeMixtureFamily::new(100).unwrap();
        let theta = fam.encode(&fam.make_params(0.0, 2.0).unwrap());
        for seed in 0..10 {
            let mut stream = RandomStream::derive(500 + seed, 0, 0);
            let draws = fam.sample(&theta, &mut stream, 100);
            let max = draws.iter().map(|s| s.value()).fold(0.0, f64::max);
            let data = Dataset::new(100).unwrap().accumulate(&draws, 0).unwrap();
            let p = fam.fit(&data).unwrap();
            assert_eq!(p.alpha, (1.0 - max) / 2.0, "seed {seed}");
            assert_eq!(p.mu, 2.0);
        }
    }
}
