//! Property tests of the library invariants.

use hardylab_core::besselpair::{integrate_bessel_ode, BesselSystem, RadialOdeState};
use hardylab_core::geometry::{GaugeModel, homogeneity_check};
use hardylab_core::identities::{
    realified_identity_oracle, realify, remainder_closed, scalar_identity_breakdown, vector_identity_breakdown,
};
use hardylab_core::ode::StepControl;
use hardylab_core::reduce::reduce_radial_functional;
use hardylab_core::sampling::{random_profile, random_profiles, stream_rng};
use hardylab_core::scenario::{
    fundamental_power_constant, power_constant, scenario_catalog, Scenario, ScenarioKind, ScenarioParams,
};
use hardylab_core::sharpness::{cutoff_integrals, sweep_quotient, BridgeShape};
use num_complex::Complex;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex<f64>> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| Complex::new(a, b))
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(2.0), Just(2.5), Just(3.0), Just(4.0), 2.0..6.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn remainder_is_nonnegative_and_split_exactly(p in exponent(), f in complex(), g in complex()) {
        let b = scalar_identity_breakdown(p, f, g).unwrap();
        prop_assert!(b.rhs_closed >= 0.0);
        prop_assert!(b.w_term + b.wtilde_term >= -1e-12 * (1.0 + b.rhs_closed));
        prop_assert!(b.residual <= 1e-9 * (1.0 + b.rhs_closed.abs()));
    }

    #[test]
    fn remainder_vanishes_only_on_the_diagonal(p in exponent(), f in complex(), g in complex()) {
        let b = scalar_identity_breakdown(p, f, g).unwrap();
        let close = (f - g).norm() <= 1e-7 * (f.norm() + g.norm());
        let tiny = b.w_term + b.wtilde_term <= 1e-12;
        prop_assert!(!tiny || close || f.norm() + g.norm() < 1e-3);
        let d = scalar_identity_breakdown(p, f, f).unwrap();
        prop_assert!(d.w_term + d.wtilde_term <= 1e-12);
    }

    #[test]
    fn vector_path_reduces_to_scalar(p in exponent(), f in complex(), g in complex()) {
        let s = scalar_identity_breakdown(p, f, g).unwrap();
        let v = vector_identity_breakdown(p, &[f], &[g]).unwrap();
        let scale = 1.0 + s.rhs_closed;
        // the two paths split the remainder differently; totals must agree
        prop_assert!((s.rhs_closed - v.rhs_closed).abs() <= 1e-12 * scale);
        prop_assert!((s.w_term + s.wtilde_term - v.w_term - v.wtilde_term).abs() <= 1e-9 * scale);
    }

    #[test]
    fn vector_path_matches_taylor_oracle(p in exponent(), z in prop::collection::vec((complex(), complex()), 1..4)) {
        let (zeta, xi): (Vec<_>, Vec<_>) = z.into_iter().unzip();
        let v = vector_identity_breakdown(p, &zeta, &xi).unwrap();
        let o = realified_identity_oracle(p, &realify(&zeta), &realify(&xi)).unwrap();
        let scale = 1.0 + v.rhs_closed.abs();
        prop_assert!((v.w_term + v.wtilde_term - o.rhs).abs() <= 1e-9 * scale);
        prop_assert!((o.lhs - o.rhs).abs() <= 1e-9 * scale);
    }

    #[test]
    fn cp_lower_bound(p in 2.0..3.0f64, f in complex(), g in complex()) {
        let slack = remainder_closed(p, f, g) - 2f64.powf(-p) * (f - g).norm().powf(p);
        prop_assert!(slack >= -1e-12 * (1.0 + f.norm().max(g.norm()).powf(p)));
    }

    #[test]
    fn power_constants_agree(q in 1.0..10.0f64, p in 2.0..6.0f64, theta in -2.0..3.0f64) {
        let beta = (p - q) / (p - 1.0);
        let a = power_constant(p, theta, beta);
        let b = fundamental_power_constant(q, p, theta);
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn quotient_is_scale_invariant(seed in 0u64..1000, c in prop_oneof![-20.0..-0.05f64, 0.05..20.0f64]) {
        let s: Scenario<f64> = scenario_catalog(ScenarioKind::Power, &ScenarioParams::default()).unwrap();
        let phi = random_profile(&s.pair.interval, &mut stream_rng(seed, 0)).unwrap();
        let psi = hardylab_core::profile::Profile::new(
            { let phi = phi.clone(); move |r: f64| c * phi.value(r) },
            { let phi = phi.clone(); move |r: f64| c * phi.derivative(r) },
            phi.support(),
        ).compactly_supported().with_knots(phi.breakpoints());
        let a = reduce_radial_functional(&s, &phi).unwrap().quotient;
        let b = reduce_radial_functional(&s, &psi).unwrap().quotient;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn bessel_solutions_are_homogeneous(p in 2.0..4.0f64, c in prop_oneof![Just(2.0), Just(-1.0), Just(10.0)]) {
        let s: Scenario<f64> = scenario_catalog(
            ScenarioKind::Power,
            &ScenarioParams { q: Some(4.0), p: Some(p), theta: Some(0.5), ..Default::default() },
        ).unwrap();
        let sys = BesselSystem::from_scenario(&s);
        let base = RadialOdeState { r: 1.0, phi: 0.3, momentum: 0.7 };
        let t0 = integrate_bessel_ode(&sys, base, 3.0, &StepControl::default()).unwrap().last();
        let scaled = RadialOdeState { r: 1.0, phi: c * base.phi, momentum: c.signum() * c.abs().powf(p - 1.0) * base.momentum };
        let t = integrate_bessel_ode(&sys, scaled, 3.0, &StepControl::default()).unwrap().last();
        prop_assert!((t.phi - c * t0.phi).abs() <= 1e-8 * (c * t0.phi).abs().max(1.0));
    }

    #[test]
    fn plateau_mass_minus_log_is_bounded(eps in 1e-6..0.2f64, p in 2.0..4.0f64) {
        let i = cutoff_integrals(eps, p, BridgeShape::Quintic).unwrap();
        let offset = i.log_mass - (1.0 / (4.0 * eps * eps)).ln();
        prop_assert!(offset.abs() < 2.0, "{offset}");
        prop_assert!((i.cross - 2.0 / p).abs() < 1e-8);
        // both bridges are rescaled copies of one shape, so the energy is free of eps
        let j = cutoff_integrals(eps * 0.5, p, BridgeShape::Quintic).unwrap();
        prop_assert!((i.energy - j.energy).abs() <= 1e-8 * i.energy);
    }

    #[test]
    fn gauges_are_homogeneous(gamma in 0.0..3.0f64, n in 1usize..3, k in 1usize..3, seed in 0u64..100) {
        let m = GaugeModel::Grushin { n, k, gamma };
        prop_assert!(homogeneity_check(&m, 50, seed).unwrap() < 1e-12);
        let g = GaugeModel::Greiner { n, gamma: 1.0 + gamma };
        prop_assert!(homogeneity_check(&g, 50, seed).unwrap() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_profiles_respect_sharp_constants(idx in 0usize..ScenarioKind::ALL.len(), seed in 0u64..10_000) {
        let kind = ScenarioKind::ALL[idx];
        let s: Scenario<f64> = scenario_catalog(kind, &ScenarioParams::default()).unwrap();
        for phi in random_profiles(&s.pair.interval, 5, seed).unwrap() {
            let q = reduce_radial_functional(&s, &phi).unwrap().quotient;
            prop_assert!(q >= s.sharp_constant * (1.0 - 1e-8), "{kind}: {q} < {}", s.sharp_constant);
        }
    }

    #[test]
    fn sweep_rows_stay_above_constant(q in 3.0..8.0f64, e0 in 1e-3..0.2f64) {
        let s: Scenario<f64> = scenario_catalog(
            ScenarioKind::Power,
            &ScenarioParams { q: Some(q), p: Some(2.0), theta: Some(1.0), ..Default::default() },
        ).unwrap();
        let grid = [e0, e0 / 10.0, e0 / 100.0];
        let rep = sweep_quotient(&s, &grid, BridgeShape::Quintic).unwrap();
        for w in rep.rows.windows(2) {
            prop_assert!(w[1].deficit <= w[0].deficit);
        }
        for r in &rep.rows {
            prop_assert!(r.quotient >= rep.sharp_constant - 1e-9);
        }
    }
}
