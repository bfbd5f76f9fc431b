//! Gaussian family with location and scale parameters, scalar observations.

use super::smooth::{tv_numeric, IntegrationPlan, SmoothFamily, DEFAULT_TV_TOL};
use crate::core::{
    CoordTransform, Dataset, Family, FamilyError, FamilyId, MleError, ParamPoint, RandomStream,
    Sample,
};

const TRANSFORMS: [CoordTransform; 2] = [CoordTransform::Identity, CoordTransform::LogPositive];

/// Gaussian family with parameter vector `(mu, sigma)`, `sigma > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gaussian;

impl Gaussian {
    /// Builds a validated `(mu, sigma)` parameter point.
    pub fn params(mu: f64, sigma: f64) -> Result<ParamPoint, FamilyError> {
        let theta = ParamPoint::new(FamilyId::Gaussian, vec![mu, sigma]).map_err(|e| {
            FamilyError::OutOfDomain {
                family: FamilyId::Gaussian,
                detail: e.to_string(),
            }
        })?;
        Gaussian.validate(&theta)?;
        Ok(theta)
    }

    fn unpack(theta: &ParamPoint) -> (f64, f64) {
        (theta.coord(0), theta.coord(1))
    }
}

impl Family for Gaussian {
    fn id(&self) -> FamilyId {
        FamilyId::Gaussian
    }

    fn validate(&self, theta: &ParamPoint) -> Result<(), FamilyError> {
        if theta.family() != FamilyId::Gaussian {
            return Err(FamilyError::FamilyMismatch {
                expected: FamilyId::Gaussian,
                got: theta.family(),
            });
        }
        if theta.dim() != 2 {
            return Err(FamilyError::CoordCount {
                family: FamilyId::Gaussian,
                expected: 2,
                got: theta.dim(),
            });
        }
        let (_, sigma) = Self::unpack(theta);
        if sigma <= 0.0 {
            return Err(FamilyError::OutOfDomain {
                family: FamilyId::Gaussian,
                detail: format!("sigma must be positive, got {sigma}"),
            });
        }
        Ok(())
    }

    fn log_pdf(&self, theta: &ParamPoint, x: f64) -> f64 {
        let (mu, sigma) = Self::unpack(theta);
        let z = (x - mu) / sigma;
        -0.5 * z * z - sigma.ln() - 0.5 * std::f64::consts::TAU.ln()
    }

    fn sample_into(
        &self,
        theta: &ParamPoint,
        stream: &mut RandomStream,
        n: usize,
        out: &mut Vec<Sample>,
    ) {
        let (mu, sigma) = Self::unpack(theta);
        out.reserve(n);
        for _ in 0..n {
            let x = mu + sigma * stream.next_standard_normal();
            out.push(Sample::new(x).expect("affine map of a bounded normal draw is finite"));
        }
    }

    /// Sample mean and the square root of the mean squared deviation.
    ///
    /// The scale estimate divides by the sample count, not `count - 1`:
    /// that is the likelihood maximizer, even though it is the biased
    /// variance estimator.
    fn exact_mle(&self, data: &Dataset) -> Result<ParamPoint, MleError> {
        if data.is_empty() {
            return Err(MleError::EmptyDataset);
        }
        let m = data.len() as f64;
        let mean = data.iter_values().sum::<f64>() / m;
        let var = data
            .iter_values()
            .map(|x| {
                let d = x - mean;
                d * d
            })
            .sum::<f64>()
            / m;
        if var <= 0.0 {
            return Err(MleError::Degenerate(format!(
                "all samples equal {mean}; the likelihood grows without bound as sigma shrinks"
            )));
        }
        Ok(ParamPoint::new(FamilyId::Gaussian, vec![mean, var.sqrt()])
            .expect("mean and deviation of finite samples are finite"))
    }

    fn nll_objective<'a>(&'a self, values: &'a [f64]) -> Box<dyn Fn(&ParamPoint) -> f64 + 'a> {
        let m = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / m;
        let mean_sq = values.iter().map(|x| x * x).sum::<f64>() / m;
        Box::new(move |theta| {
            let (mu, sigma) = Self::unpack(theta);
            let msd = (mean_sq - 2.0 * mu * mean + mu * mu).max(0.0);
            sigma.ln() + 0.5 * std::f64::consts::TAU.ln() + msd / (2.0 * sigma * sigma)
        })
    }

    fn coord_transforms(&self) -> Option<&'static [CoordTransform]> {
        Some(&TRANSFORMS)
    }

    fn tv(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        tv_numeric(self, a, b, DEFAULT_TV_TOL)
    }

    fn kl(&self, a: &ParamPoint, b: &ParamPoint) -> f64 {
        let (mu0, s0) = Self::unpack(a);
        let (mu1, s1) = Self::unpack(b);
        let d = mu0 - mu1;
        (s1 / s0).ln() + (s0 * s0 + d * d) / (2.0 * s1 * s1) - 0.5
    }
}

impl SmoothFamily for Gaussian {
    fn param_count(&self) -> usize {
        2
    }

    fn score(&self, theta: &ParamPoint, x: f64, out: &mut [f64]) {
        let (mu, sigma) = Self::unpack(theta);
        let d = x - mu;
        let s2 = sigma * sigma;
        out[0] = d / s2;
        out[1] = -1.0 / sigma + d * d / (s2 * sigma);
    }

    fn log_pdf_hessian(&self, theta: &ParamPoint, x: f64, out: &mut [f64]) {
        let (mu, sigma) = Self::unpack(theta);
        let d = x - mu;
        let s2 = sigma * sigma;
        out[0] = -1.0 / s2;
        out[1] = -2.0 * d / (s2 * sigma);
        out[2] = out[1];
        out[3] = 1.0 / s2 - 3.0 * d * d / (s2 * s2);
    }

    fn fisher_info(&self, theta: &ParamPoint) -> Vec<f64> {
        let (_, sigma) = Self::unpack(theta);
        let s2 = sigma * sigma;
        vec![1.0 / s2, 0.0, 0.0, 2.0 / s2]
    }

    /// Ten scale units on each side leave tail mass below `1e-23` per
    /// density, far inside every tolerance used by the callers.
    fn integration_plan(&self, thetas: &[&ParamPoint], _tail_budget: f64) -> IntegrationPlan {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for theta in thetas {
            let (mu, sigma) = Self::unpack(theta);
            lo = lo.min(mu - 10.0 * sigma);
            hi = hi.max(mu + 10.0 * sigma);
        }
        IntegrationPlan {
            lo,
            hi,
            log_substitution: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::smooth::{density_mass, kl_numeric, test_support};

    #[test]
    fn rejects_non_positive_sigma() {
        assert!(matches!(
            Gaussian::params(0.0, 0.0),
            Err(FamilyError::OutOfDomain { .. })
        ));
        assert!(matches!(
            Gaussian::params(0.0, -1.0),
            Err(FamilyError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn log_pdf_at_standard_mode() {
        let theta = Gaussian::params(0.0, 1.0).unwrap();
        let got = Gaussian.log_pdf(&theta, 0.0);
        assert!((got - (-0.918_938_533_204_672_7)).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn exact_mle_on_symmetric_pair() {
        let data = dataset(&[-1.0, 1.0]);
        let fit = Gaussian.exact_mle(&data).unwrap();
        assert!(fit.coord(0).abs() < 1e-15);
        assert!((fit.coord(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_mle_rejects_constant_dataset() {
        let data = dataset(&[2.5, 2.5, 2.5]);
        assert!(matches!(
            Gaussian.exact_mle(&data),
            Err(MleError::Degenerate(_))
        ));
    }

    #[test]
    fn exact_mle_rejects_empty_dataset() {
        let data = Dataset::new(3).unwrap();
        assert!(matches!(
            Gaussian.exact_mle(&data),
            Err(MleError::EmptyDataset)
        ));
    }

    #[test]
    fn sample_mean_close_to_location() {
        let theta = Gaussian::params(0.0, 1.0).unwrap();
        let mut stream = RandomStream::derive(1, 0, 0);
        let n = 100_000;
        let draws = Gaussian.sample(&theta, &mut stream, n);
        let mean: f64 = draws.iter().map(|s| s.value()).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn kl_zero_on_identical_params() {
        let theta = Gaussian::params(0.3, 2.0).unwrap();
        assert_eq!(Gaussian.kl(&theta, &theta), 0.0);
    }

    #[test]
    fn kl_matches_quadrature_oracle() {
        let a = Gaussian::params(0.0, 1.0).unwrap();
        let b = Gaussian::params(1.0, 2.0).unwrap();
        let closed = Gaussian.kl(&a, &b);
        assert!((closed - 0.443_147_180_559_945_3).abs() < 1e-12, "{closed}");
        let numeric = kl_numeric(&Gaussian, &a, &b, 1e-10);
        assert!((closed - numeric).abs() < 1e-8, "{closed} vs {numeric}");
    }

    #[test]
    fn tv_matches_unit_shift_value() {
        let a = Gaussian::params(0.0, 1.0).unwrap();
        let b = Gaussian::params(1.0, 1.0).unwrap();
        let got = Gaussian.tv(&a, &b);
        assert!((got - 0.382_924_922_548_026_2).abs() < 1e-8, "got {got}");
    }

    #[test]
    fn tv_far_apart_is_near_one() {
        let a = Gaussian::params(0.0, 1.0).unwrap();
        let b = Gaussian::params(10.0, 1.0).unwrap();
        assert!(Gaussian.tv(&a, &b) >= 0.999);
    }

    #[test]
    fn density_integrates_to_one() {
        let theta = Gaussian::params(-2.0, 0.4).unwrap();
        let mass = density_mass(&Gaussian, &theta, 1e-10);
        assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
    }

    #[test]
    fn score_matches_finite_differences() {
        let theta = Gaussian::params(0.5, 1.5).unwrap();
        let xs = [-3.0, -1.0, -0.2, 0.0, 0.4, 0.5, 1.0, 2.0, 3.5, 5.0];
        test_support::assert_score_matches_fd(&Gaussian, &theta, &xs, 1e-4);
    }

    #[test]
    fn fisher_matches_score_covariance_quadrature() {
        let theta = Gaussian::params(0.0, 1.0).unwrap();
        let info = Gaussian.fisher_info(&theta);
        assert_eq!(info, vec![1.0, 0.0, 0.0, 2.0]);
        for (i, j, want) in [(0, 0, 1.0), (0, 1, 0.0), (1, 1, 2.0)] {
            let integrand = |x: f64| {
                let mut s = [0.0; 2];
                Gaussian.score(&theta, x, &mut s);
                Gaussian.log_pdf(&theta, x).exp() * s[i] * s[j]
            };
            let got =
                crate::families::quadrature::adaptive_simpson(&integrand, -10.0, 10.0, 1e-10);
            assert!((got - want).abs() < 1e-8, "entry ({i},{j}): {got}");
        }
    }

    fn dataset(values: &[f64]) -> Dataset {
        let samples: Vec<Sample> = values.iter().map(|&v| Sample::new(v).unwrap()).collect();
        Dataset::new(values.len())
            .unwrap()
            .accumulate(&samples, 0)
            .unwrap()
    }
}
