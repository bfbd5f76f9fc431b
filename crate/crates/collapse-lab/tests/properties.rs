//! Randomized invariants over the whole family zoo: densities carry unit
//! mass, exact block decompositions stay normalized, and every tracked
//! divergence pair satisfies the total-variation bound
//! `tv <= sqrt(kl / 2)`.

use collapse_lab::constructions::{SpikeMixtureFamily, TailChainFamily, WidthSchedule};
use collapse_lab::families::{
    density_mass, Exponential, Gaussian, PowerBeta, SmoothFamily,
};
use collapse_lab::metrics::{
    kl_piecewise, pinsker_inequality, spike_piecewise, tail_piecewise, tv_exact,
    PiecewiseDensity, MASS_TOL,
};
use collapse_lab::Family;
use proptest::prelude::*;

const PINSKER_SLACK: f64 = 1e-9;
const QUADRATURE_TOL: f64 = 1e-7;

fn spike_family() -> SpikeMixtureFamily {
    SpikeMixtureFamily::new(100).expect("scale 100 admits the construction")
}

fn tail_family() -> TailChainFamily {
    TailChainFamily::new(WidthSchedule::Demo {
        budget_exponent: 1.0,
    })
    .expect("demo schedule is valid")
}

/// A parameter point for any of the three smooth families, drawn over the
/// ranges the simulation engine actually visits.
fn smooth_point() -> impl Strategy<Value = (&'static str, Vec<f64>)> {
    prop_oneof![
        (-3.0..3.0f64, 0.3..3.0f64).prop_map(|(mu, sigma)| ("gaussian", vec![mu, sigma])),
        (0.1..5.0f64).prop_map(|rate| ("exponential", vec![rate])),
        (0.1..5.0f64).prop_map(|shape| ("power_beta", vec![shape])),
    ]
}

fn smooth_pair() -> impl Strategy<Value = (&'static str, Vec<f64>, Vec<f64>)> {
    prop_oneof![
        ((-3.0..3.0f64, 0.3..3.0f64), (-3.0..3.0f64, 0.3..3.0f64))
            .prop_map(|(a, b)| ("gaussian", vec![a.0, a.1], vec![b.0, b.1])),
        (0.1..5.0f64, 0.1..5.0f64).prop_map(|(a, b)| ("exponential", vec![a], vec![b])),
        (0.1..5.0f64, 0.1..5.0f64).prop_map(|(a, b)| ("power_beta", vec![a], vec![b])),
    ]
}

fn spike_density(alpha: f64, mu_unit: f64) -> PiecewiseDensity {
    let family = spike_family();
    let mu = 2.0 + mu_unit * (1.0 - family.f_linear(alpha));
    let params = family.make_params(alpha, mu).expect("admissible spike");
    spike_piecewise(&family, &params)
}

/// Either route of the tail construction, from unit-interval raw values.
fn tail_density(route_spiked: bool, raw: &[f64], span_raw: u32) -> PiecewiseDensity {
    let family = tail_family();
    let params = if route_spiked {
        let span = 2 + span_raw % 4;
        family
            .make_spiked(raw[0].min(0.95), span)
            .expect("admissible spiked point")
    } else {
        let alphas: Vec<f64> = raw.iter().map(|u| u * 0.249).collect();
        family.make_chain(alphas).expect("admissible chain point")
    };
    tail_piecewise(&family, &params)
}

fn assert_unit_mass(density: &PiecewiseDensity) {
    let total: f64 = density.segments().iter().map(|s| s.mass).sum();
    assert!(
        (total - 1.0).abs() <= MASS_TOL,
        "segment masses sum to {total}, not 1"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smooth_densities_carry_unit_mass((name, coords) in smooth_point()) {
        let (family, theta): (&dyn SmoothFamily, _) = match name {
            "gaussian" => (&Gaussian, Gaussian::params(coords[0], coords[1]).unwrap()),
            "exponential" => (&Exponential, Exponential::params(coords[0]).unwrap()),
            _ => (&PowerBeta, PowerBeta::params(coords[0]).unwrap()),
        };
        let mass = density_mass(family, &theta, QUADRATURE_TOL);
        prop_assert!((mass - 1.0).abs() < 1e-6, "mass {mass} for {name} at {coords:?}");
    }

    #[test]
    fn smooth_divergences_satisfy_the_tv_bound((name, a, b) in smooth_pair()) {
        let (tv, kl) = match name {
            "gaussian" => {
                let pa = Gaussian::params(a[0], a[1]).unwrap();
                let pb = Gaussian::params(b[0], b[1]).unwrap();
                (Gaussian.tv(&pa, &pb), Gaussian.kl(&pa, &pb))
            }
            "exponential" => {
                let pa = Exponential::params(a[0]).unwrap();
                let pb = Exponential::params(b[0]).unwrap();
                (Exponential.tv(&pa, &pb), Exponential.kl(&pa, &pb))
            }
            _ => {
                let pa = PowerBeta::params(a[0]).unwrap();
                let pb = PowerBeta::params(b[0]).unwrap();
                (PowerBeta.tv(&pa, &pb), PowerBeta.kl(&pa, &pb))
            }
        };
        prop_assert!((0.0..=1.0).contains(&tv), "tv {tv} out of range");
        prop_assert!(kl >= -PINSKER_SLACK, "negative divergence {kl}");
        prop_assert!(
            pinsker_inequality(tv, kl, PINSKER_SLACK),
            "tv {tv} exceeds sqrt(kl/2) for kl {kl} ({name}, {a:?} vs {b:?})"
        );
    }

    #[test]
    fn spike_blocks_stay_normalized(alpha in 0.0..0.25f64, mu_unit in 0.0..1.0f64) {
        assert_unit_mass(&spike_density(alpha, mu_unit));
    }

    #[test]
    fn tail_blocks_stay_normalized(
        route_spiked in any::<bool>(),
        raw in prop::collection::vec(0.0..1.0f64, 1..4),
        span_raw in any::<u32>(),
    ) {
        assert_unit_mass(&tail_density(route_spiked, &raw, span_raw));
    }

    #[test]
    fn exact_divergences_satisfy_the_tv_bound(
        alpha_a in 0.0..0.25f64,
        mu_a in 0.0..1.0f64,
        alpha_b in 0.0..0.25f64,
        mu_b in 0.0..1.0f64,
    ) {
        let p = spike_density(alpha_a, mu_a);
        let q = spike_density(alpha_b, mu_b);
        let tv = tv_exact(&p, &q);
        prop_assert!((0.0..=1.0).contains(&tv), "tv {tv} out of range");
        prop_assert!((tv - tv_exact(&q, &p)).abs() < 1e-12, "tv is not symmetric");
        prop_assert!(
            pinsker_inequality(tv, kl_piecewise(&p, &q), PINSKER_SLACK),
            "spike pair violates the bound"
        );
    }

    #[test]
    fn mixed_route_divergences_satisfy_the_tv_bound(
        raw in prop::collection::vec(0.0..1.0f64, 1..4),
        beta in 0.0..0.95f64,
        span_raw in any::<u32>(),
    ) {
        let chain = tail_density(false, &raw, 0);
        let spiked = tail_density(true, &[beta], span_raw);
        let tv = tv_exact(&chain, &spiked);
        prop_assert!((0.0..=1.0).contains(&tv), "tv {tv} out of range");
        prop_assert!(
            pinsker_inequality(tv, kl_piecewise(&chain, &spiked), PINSKER_SLACK),
            "cross-route pair violates the bound"
        );
    }
}
