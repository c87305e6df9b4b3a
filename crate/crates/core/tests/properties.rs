use num_complex::Complex64;
use pdc_core::matrix::Matrix4;
use pdc_core::oracles::{mc_estimate, McConfig, McObservable, McScenario};
use pdc_core::{
    b_correlator, evolve_lossless, separability_ratio, validate, wick_moment, CorrelatorSpec,
    GaussianMoments, ModeIndex, OperatorFactor, StatKind, SteadyParams,
};
use proptest::prelude::*;

fn stat_strategy() -> impl Strategy<Value = StatKind> {
    prop_oneof![Just(StatKind::Quantum), Just(StatKind::Classical)]
}

fn factor_strategy() -> impl Strategy<Value = OperatorFactor> {
    (0usize..4, any::<bool>()).prop_map(|(m, dagger)| OperatorFactor {
        mode: ModeIndex::from_index(m).unwrap(),
        dagger,
    })
}

/// Lossless state followed by independent phase shifts on each mode, so
/// that the moments are genuinely complex.
fn phased_state(r: f64, n0: f64, stat: StatKind, phases: [f64; 4]) -> GaussianMoments {
    let base = evolve_lossless(&SteadyParams::new(r, n0, stat).unwrap()).unwrap();
    let u: Vec<Complex64> = phases
        .iter()
        .map(|&p| Complex64::from_polar(1.0, p))
        .collect();
    let normal = Matrix4::from_fn(|i, j| u[i].conj() * u[j] * base.normal()[(i, j)]);
    let anomalous = Matrix4::from_fn(|i, j| u[i] * u[j] * base.anomalous()[(i, j)]);
    GaussianMoments::new(normal, anomalous, stat)
}

fn state_strategy() -> impl Strategy<Value = GaussianMoments> {
    (
        0.0..2.0f64,
        0.0..2.0f64,
        stat_strategy(),
        prop::array::uniform4(0.0..6.3f64),
    )
        .prop_map(|(r, n0, stat, phases)| phased_state(r, n0, stat, phases))
}

fn adjoint(factors: &[OperatorFactor]) -> Vec<OperatorFactor> {
    factors
        .iter()
        .rev()
        .map(|f| OperatorFactor {
            dagger: !f.dagger,
            ..*f
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evolved_states_are_physical(state in state_strategy()) {
        let violations = validate(&state);
        prop_assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn adjoint_strings_give_conjugate_moments(
        state in state_strategy(),
        factors in prop::collection::vec(factor_strategy(), 0..8),
    ) {
        let z = wick_moment(&state, &factors).unwrap();
        let w = wick_moment(&state, &adjoint(&factors)).unwrap();
        let scale = 1.0 + z.norm();
        prop_assert!((z - w.conj()).norm() < 1e-10 * scale, "{z} vs {w}");
    }

    #[test]
    fn classical_moments_scale_homogeneously(
        r in 0.0..1.5f64,
        n0 in 0.05..1.5f64,
        s in 0.2..3.0f64,
        factors in prop::collection::vec(factor_strategy(), 1..4).prop_map(|v| {
            let mut s = adjoint(&v);
            s.extend(v);
            s
        }),
    ) {
        let state = evolve_lossless(&SteadyParams::new(r, n0, StatKind::Classical).unwrap()).unwrap();
        let base = wick_moment(&state, &factors).unwrap();
        let scaled = wick_moment(&state.scaled(s), &factors).unwrap();
        let expected = base * s.powi(factors.len() as i32 / 2);
        prop_assert!((scaled - expected).norm() <= 1e-10 * (1.0 + expected.norm()));
    }

    #[test]
    fn correlators_are_non_negative(
        state in state_strategy(),
        n in 1u32..4,
        seed in any::<prop::sample::Index>(),
    ) {
        let specs = CorrelatorSpec::all_of_order(n);
        let spec = specs[seed.index(specs.len())];
        let value = b_correlator(&state, &spec).unwrap();
        prop_assert!(value >= -1e-9 * (1.0 + value.abs()), "{spec:?}: {value}");
    }

    #[test]
    fn report_fields_agree(r in 0.0..2.0f64, n0 in 0.01..3.0f64, stat in stat_strategy()) {
        let state = evolve_lossless(&SteadyParams::new(r, n0, stat).unwrap()).unwrap();
        let rep = separability_ratio(&state).unwrap();
        prop_assert!(rep.j_squared >= -1e-9);
        prop_assert!((rep.ratio * rep.total_n - rep.j_squared).abs() <= 1e-9 * rep.j_squared.abs().max(1e-12));
        prop_assert_eq!(rep.entangled, stat == StatKind::Quantum && rep.ratio < 0.5);
    }
}

#[test]
fn sampling_is_independent_of_thread_count() {
    let config = McConfig {
        samples: 30_000,
        seed: 99,
        scenario: McScenario::Lossless(SteadyParams::new(0.6, 0.8, StatKind::Classical).unwrap()),
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_estimate(&config, McObservable::Ratio).unwrap())
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(one.mean.to_bits(), many.mean.to_bits());
    assert_eq!(one.standard_error.to_bits(), many.standard_error.to_bits());
}
