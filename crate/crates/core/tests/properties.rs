//! Cross-module property tests: structural invariants under randomized
//! inputs, plus the numeric properties that
//! tie the monotones to the normal forms.

use mpnf_core::json;
use mpnf_core::linalg::{self, eigh, C64};
use mpnf_core::lu::{self, lu_normal_form, LuConfig};
use mpnf_core::monotones::{self, catalog, catalog_spec, evaluate};
use mpnf_core::random::{
    random_pure, random_sl_set, random_su_set, random_unitary_set, TestRng,
};
use mpnf_core::slocc::{normal_form, NormalFormStatus, SloccConfig};
use mpnf_core::states::{self, CanonicalState};
use mpnf_core::tensor::{LocalOperatorSet, MultiTensor, OpFlavor, State};
use proptest::prelude::*;
use rand::SeedableRng;

fn small_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..4, 1..4)
}

fn tensor_for(dims: Vec<usize>, seed: u64) -> MultiTensor {
    let mut rng = TestRng::seed_from_u64(seed);
    random_pure(&dims, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip_is_exact(dims in small_dims(), seed in 0u64..1_000_000) {
        let psi = tensor_for(dims, seed);
        let text = json::state_to_string(&State::Pure(psi.clone()));
        let back = json::state_from_str(&text).unwrap();
        match back {
            State::Pure(t) => {
                prop_assert_eq!(t.dims(), psi.dims());
                for (a, b) in t.data().iter().zip(psi.data().iter()) {
                    prop_assert_eq!(a, b);
                }
            }
            _ => prop_assert!(false, "kind changed"),
        }
    }

    #[test]
    fn unfold_gram_equals_partial_trace(dims in small_dims(), seed in 0u64..1_000_000) {
        let psi = tensor_for(dims.clone(), seed);
        let rho = mpnf_core::pure_to_density(&psi);
        for k in 0..dims.len() {
            let lhs = psi.reduced_density(k).unwrap();
            let rhs = rho.partial_trace(k).unwrap();
            let diff = linalg::frobenius(&(&lhs - &rhs));
            prop_assert!(diff <= 1e-12, "party {} deviation {:.3e}", k, diff);
        }
    }

    #[test]
    fn composition_matches_sequential_application(dims in small_dims(), seed in 0u64..1_000_000) {
        let psi = tensor_for(dims.clone(), seed);
        let mut rng = TestRng::seed_from_u64(seed ^ 0xabcd);
        let a = LocalOperatorSet::new(random_sl_set(&dims, 0.25, &mut rng), OpFlavor::SpecialLinear).unwrap();
        let b = LocalOperatorSet::new(random_sl_set(&dims, 0.25, &mut rng), OpFlavor::SpecialLinear).unwrap();
        let seq = psi.apply_all(&a).unwrap().apply_all(&b).unwrap();
        let combined = psi.apply_all(&a.compose(&b).unwrap()).unwrap();
        let diff2: f64 = seq.data().iter().zip(combined.data().iter())
            .map(|(x, y)| (x - y).norm_sqr()).sum();
        prop_assert!(diff2.sqrt() <= 1e-12 * seq.norm().max(1e-300));
    }

    #[test]
    fn unitary_application_preserves_norm(dims in small_dims(), seed in 0u64..1_000_000) {
        let psi = tensor_for(dims.clone(), seed);
        let mut rng = TestRng::seed_from_u64(seed ^ 0x1111);
        let us = LocalOperatorSet::new(random_unitary_set(&dims, &mut rng), OpFlavor::Unitary).unwrap();
        let out = psi.apply_all(&us).unwrap();
        prop_assert!((out.norm() - psi.norm()).abs() <= 1e-12);
    }

    #[test]
    fn monotone_homogeneity(seed in 0u64..1_000_000, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        prop_assume!(re * re + im * im > 1e-3);
        let spec = catalog_spec("tangle222").unwrap();
        let psi = tensor_for(vec![2, 2, 2], seed);
        let base = evaluate(&spec, &psi).unwrap().value;
        let c = C64::new(re, im);
        let scaled = evaluate(&spec, &psi.scaled(c)).unwrap().value;
        prop_assert!((scaled - c.norm_sqr() * base).abs() <= 1e-10 * (c.norm_sqr() * base).max(1e-12));
    }
}

#[test]
fn lu_invariance_at_1e10_for_every_catalog_spec() {
    let mut rng = TestRng::seed_from_u64(2024);
    for spec in catalog() {
        let psi = random_pure(&spec.dims, &mut rng);
        let report = monotones::check_invariance_unitary(&spec, &psi, 50, 31).unwrap();
        assert!(
            report.max_relative_deviation <= 1e-10,
            "{}: unitary invariance deviation {:.3e}",
            spec.id,
            report.max_relative_deviation
        );
    }
}

#[test]
fn tangle223_bounded_by_one_on_random_states() {
    let spec = catalog_spec("tangle223").unwrap();
    let mut rng = TestRng::seed_from_u64(7171);
    let mut max_seen: f64 = 0.0;
    for _ in 0..1000 {
        let psi = random_pure(&[2, 2, 3], &mut rng);
        let v = evaluate(&spec, &psi).unwrap().value;
        max_seen = max_seen.max(v);
        assert!(v <= 1.0 + 1e-9, "value {v} exceeds the bound");
    }
    // The bound is tight: the 2x2x3 GHZ analogue attains 1.
    let g = states::make(CanonicalState::Ghz223, true).unwrap();
    assert!((evaluate(&spec, &g).unwrap().value - 1.0).abs() < 1e-12);
    assert!(max_seen > 0.5, "sampled values suspiciously small ({max_seen})");
}

#[test]
fn zero_normal_form_class_has_zero_monotones() {
    // W flows to zero and its class monotone vanishes.
    let w = states::make(CanonicalState::W, true).unwrap();
    let spec = catalog_spec("tangle222").unwrap();
    assert!(evaluate(&spec, &w).unwrap().value < 1e-12);
    let r = normal_form(&State::Pure(w), &SloccConfig::default()).unwrap();
    assert_eq!(r.status, NormalFormStatus::DivergedToZero);

    let zz = MultiTensor::basis_ket(vec![2, 2], &[0, 0]).unwrap();
    assert_eq!(evaluate(&catalog_spec("concurrence").unwrap(), &zz).unwrap().value, 0.0);
}

#[test]
fn eq1_exactness_along_a_full_sweep() {
    let mut rng = TestRng::seed_from_u64(555);
    for dims in [vec![2usize, 2, 3], vec![3, 2, 4]] {
        let mut psi = random_pure(&dims, &mut rng);
        let mut last = psi.norm2();
        for k in 0..dims.len() {
            let reduced = psi.reduced_density(k).unwrap();
            let expect = dims[k] as f64 * linalg::det(&reduced).re.powf(1.0 / dims[k] as f64);
            let (_, next) = mpnf_core::slocc::scale_party_pure(&psi, k).unwrap();
            let got = next.norm2();
            assert!((got - expect).abs() <= 1e-10 * expect, "party {k}: {got} vs {expect}");
            assert!(got <= last + 1e-12 * last);
            last = got;
            psi = next;
        }
    }
}

#[test]
fn normal_form_idempotent_on_its_output() {
    let mut rng = TestRng::seed_from_u64(777);
    let psi = random_pure(&[2, 2, 3], &mut rng);
    let r = normal_form(&State::Pure(psi), &SloccConfig::default()).unwrap();
    assert_eq!(r.status, NormalFormStatus::Converged);
    let r2 = normal_form(&r.sigma, &SloccConfig::default()).unwrap();
    for op in r2.filters.ops() {
        let dev = linalg::frobenius(&(op - &linalg::identity(op.nrows())));
        assert!(dev <= 1e-8, "second pass not the identity: {dev:.3e}");
    }
}

#[test]
fn normal_form_uniqueness_as_invariant_agreement() {
    let mut rng = TestRng::seed_from_u64(999);
    let spec = catalog_spec("tangle222").unwrap();
    for _ in 0..10 {
        let psi = random_pure(&[2, 2, 2], &mut rng);
        let dressing = LocalOperatorSet::new(
            random_sl_set(&[2, 2, 2], 0.25, &mut rng),
            OpFlavor::SpecialLinear,
        )
        .unwrap();
        let dressed = psi.apply_all(&dressing).unwrap();
        let r1 = normal_form(&State::Pure(psi), &SloccConfig::default()).unwrap();
        let r2 = normal_form(&State::Pure(dressed), &SloccConfig::default()).unwrap();
        if r1.status != NormalFormStatus::Converged || r2.status != NormalFormStatus::Converged {
            continue;
        }
        for k in 0..3 {
            let e1 = eigh(&r1.sigma.reduced(k).unwrap()).values;
            let e2 = eigh(&r2.sigma.reduced(k).unwrap()).values;
            for (a, b) in e1.iter().zip(e2.iter()) {
                assert!((a - b).abs() <= 1e-6);
            }
        }
        let (s1, s2) = match (&r1.sigma, &r2.sigma) {
            (State::Pure(a), State::Pure(b)) => (a.clone(), b.clone()),
            _ => unreachable!("pure inputs"),
        };
        let v1 = evaluate(&spec, &s1).unwrap().value;
        let v2 = evaluate(&spec, &s2).unwrap().value;
        assert!((v1 - v2).abs() <= 1e-6, "monotone values differ: {v1} vs {v2}");
    }
}

#[test]
fn lu_norm_preservation_and_fingerprint_stability() {
    let mut rng = TestRng::seed_from_u64(1313);
    for dims in [vec![2usize, 2, 2], vec![2, 2, 3], vec![3, 3]] {
        let psi = random_pure(&dims, &mut rng);
        let r = lu_normal_form(&psi, &LuConfig::default()).unwrap();
        assert!((r.psi_nf.norm() - psi.norm()).abs() <= 1e-12 * psi.norm());
        let d = lu::fingerprint_distance(
            &lu::fingerprint(&psi).unwrap(),
            &lu::fingerprint(&r.psi_nf).unwrap(),
        );
        assert!(d <= 1e-10, "{dims:?}: fingerprint drift {d:.3e}");
    }
}

#[test]
fn lu_pattern_count_matches_formula_for_equal_dims() {
    for (n, m) in [(2usize, 2usize), (2, 3), (3, 3), (2, 4)] {
        let dims = vec![n; m];
        assert_eq!(lu::expected_zero_pattern(&dims).len(), lu::zero_count(n, m));
    }
}

#[test]
fn monotonicity_reports_pass_for_concurrence_and_tangle() {
    let mut rng = TestRng::seed_from_u64(1717);
    for id in ["concurrence", "tangle222", "tangle2222a"] {
        let spec = catalog_spec(id).unwrap();
        let psi = random_pure(&spec.dims, &mut rng);
        let report = monotones::check_monotonicity(&spec, &psi, 50, 23).unwrap();
        assert!(report.pass, "{id}: violation {:.3e}", report.max_violation);
    }
}

#[test]
fn reduced_subdimension_states_keep_su_invariant_monotones() {
    // Rotating an embedded 2x2x4 state back down must not change the tangle.
    let mut rng = TestRng::seed_from_u64(1919);
    let spec = catalog_spec("tangle224").unwrap();
    let small = random_pure(&[2, 2, 4], &mut rng);
    let base = evaluate(&spec, &small).unwrap().value;
    let u = mpnf_core::random::random_unitary(8, &mut rng);
    let embed = ndarray::Array2::from_shape_fn((8, 4), |(i, j)| u[[i, j]]);
    let big = small.apply_one(2, &embed).unwrap();
    let (reduced, _) = mpnf_core::slocc::reduce_subdimensions(&big).unwrap();
    assert_eq!(reduced.dims(), &[2, 2, 4]);
    let back = evaluate(&spec, &reduced).unwrap().value;
    assert!((back - base).abs() <= 1e-9 * base.max(1e-9), "{back} vs {base}");
}

#[test]
fn pure_and_density_routes_agree_under_hermitian_gauge() {
    // The hermitian-gauged filters of an orbit are unique, so running the
    // pure-state path on ψ and the mixed path on |ψ⟩⟨ψ| must produce the
    // same normal form: σ_mixed = |σ_pure⟩⟨σ_pure|.
    let mut rng = TestRng::seed_from_u64(2323);
    let cfg = SloccConfig {
        gauge: mpnf_core::slocc::Gauge::Hermitian,
        ..SloccConfig::default()
    };
    for dims in [vec![2usize, 2], vec![2, 2, 2]] {
        let psi = random_pure(&dims, &mut rng);
        let pure_run = normal_form(&State::Pure(psi.clone()), &cfg).unwrap();
        let density_run =
            normal_form(&State::Density(mpnf_core::pure_to_density(&psi)), &cfg).unwrap();
        assert_eq!(pure_run.status, NormalFormStatus::Converged);
        assert_eq!(density_run.status, NormalFormStatus::Converged);
        for (a, b) in pure_run.filters.ops().iter().zip(density_run.filters.ops().iter()) {
            let dev = linalg::frobenius(&(a - b));
            assert!(dev <= 1e-7, "{dims:?}: gauged filters differ by {dev:.3e}");
        }
        let sigma_pure = pure_run.sigma.to_density();
        let sigma_mixed = density_run.sigma.to_density();
        let dev = linalg::frobenius(&(sigma_pure.matrix() - sigma_mixed.matrix()))
            / sigma_mixed.frobenius();
        assert!(dev <= 1e-7, "{dims:?}: normal forms differ by {dev:.3e}");
    }
}

#[test]
fn lu_restart_helper_composes_dressings_correctly() {
    let mut rng = TestRng::seed_from_u64(2525);
    let psi = random_pure(&[3, 3], &mut rng);
    // Strangle the per-level sweep budget so the direct run cannot converge;
    // the helper then retries from random rotations and must still report
    // unitaries that map the *original* input to its psi_nf.
    let cfg = LuConfig { max_sweeps_per_level: 1, ..LuConfig::default() };
    let r = lu::lu_normal_form_with_restarts(&psi, &cfg, 3, 99).unwrap();
    assert!(r.restarts_used <= 3);
    let replay = psi.apply_all(&r.unitaries).unwrap();
    let diff2: f64 = replay
        .data()
        .iter()
        .zip(r.psi_nf.data().iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    assert!(diff2.sqrt() <= 1e-8 * psi.norm(), "replay broken after restart composition");

    // A healthy run needs no restarts.
    let good = lu::lu_normal_form_with_restarts(&psi, &LuConfig::default(), 3, 99).unwrap();
    assert_eq!(good.restarts_used, 0);
    assert_eq!(good.status, lu::LuStatus::Converged);
}

#[test]
fn su_dressed_states_keep_all_catalog_values() {
    let mut rng = TestRng::seed_from_u64(2121);
    for spec in catalog() {
        let psi = random_pure(&spec.dims, &mut rng);
        let ops = LocalOperatorSet::new(random_su_set(&spec.dims, &mut rng), OpFlavor::SpecialLinear)
            .unwrap();
        let dressed = psi.apply_all(&ops).unwrap();
        let a = evaluate(&spec, &psi).unwrap().value;
        let b = evaluate(&spec, &dressed).unwrap().value;
        assert!((a - b).abs() <= 1e-10 * a.max(1e-12), "{}: {a} vs {b}", spec.id);
    }
}
