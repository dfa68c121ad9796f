//! Oversized robustness sweeps of the invariants the test suites assert at
//! smaller sample counts. Not part of `cargo test`; run manually with
//! `cargo run --release -p mpnf-core --example stress`.

use mpnf_core::linalg;
use mpnf_core::lu::{lu_equivalence_probe, lu_normal_form, EquivalenceVerdict, LuConfig, LuStatus};
use mpnf_core::monotones::{catalog, check_invariance, check_monotonicity};
use mpnf_core::random::{random_pure, random_unitary_set, TestRng};
use mpnf_core::slocc::{normal_form, NormalFormStatus, SloccConfig};
use mpnf_core::tensor::{LocalOperatorSet, OpFlavor, State};
use rand::SeedableRng;

fn main() {
    let mut rng = TestRng::seed_from_u64(986);

    // Invariance and monotonicity at 10x the acceptance trial count.
    for spec in catalog() {
        let psi = random_pure(&spec.dims, &mut rng);
        let inv = check_invariance(&spec, &psi, 1000, 42).unwrap();
        let mono = check_monotonicity(&spec, &psi, 1000, 43).unwrap();
        println!(
            "{:>12}: invariance max dev {:.3e} (pass {}), monotonicity worst {:.3e} (pass {})",
            spec.id, inv.max_relative_deviation, inv.pass, mono.max_violation, mono.pass
        );
        assert!(inv.pass && mono.pass);
    }

    // LU pattern residuals on 1000 random 6x2x2 states.
    let cfg = LuConfig::default();
    let mut worst = 0.0f64;
    let mut capped = 0usize;
    for _ in 0..1000 {
        let psi = random_pure(&[6, 2, 2], &mut rng);
        let r = lu_normal_form(&psi, &cfg).unwrap();
        if r.status != LuStatus::Converged {
            capped += 1;
            continue;
        }
        worst = worst.max(r.max_pattern_residual() / psi.norm());
    }
    println!("6x2x2 x1000: worst pattern residual {worst:.3e}, {capped} capped");
    assert!(worst <= 1e-8 && capped == 0);

    // Bipartite singular values on 1000 states (including degenerate-ish 4x4).
    let mut worst_sv = 0.0f64;
    for case in 0..1000 {
        let dims = match case % 3 {
            0 => vec![2usize, 2],
            1 => vec![3, 3],
            _ => vec![4, 4],
        };
        let psi = random_pure(&dims, &mut rng);
        let r = lu_normal_form(&psi, &cfg).unwrap();
        if r.status != LuStatus::Converged {
            capped += 1;
            continue;
        }
        let svals = linalg::svd(&psi.unfold(0).unwrap()).s;
        let mut diag: Vec<f64> =
            (0..dims[0]).map(|i| r.psi_nf.get(&[i, i]).unwrap().norm()).collect();
        diag.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (d, s) in diag.iter().zip(svals.iter()) {
            worst_sv = worst_sv.max((d - s).abs());
        }
    }
    println!("bipartite x1000: worst singular-value deviation {worst_sv:.3e}, {capped} capped total");
    assert!(worst_sv <= 1e-10);

    // Equivalence probe on 300 dressed pairs.
    let mut fails = 0usize;
    for case in 0..300u64 {
        let psi = random_pure(&[2, 2, 2], &mut rng);
        let us = LocalOperatorSet::new(random_unitary_set(&[2, 2, 2], &mut rng), OpFlavor::Unitary)
            .unwrap();
        let psi2 = psi.apply_all(&us).unwrap();
        let v = lu_equivalence_probe(&psi, &psi2, 4, 90_000 + case).unwrap().verdict;
        if v != EquivalenceVerdict::EquivalentLikely {
            fails += 1;
        }
    }
    println!("probe x300 dressed pairs: {fails} not recognized");
    assert_eq!(fails, 0);

    // Mixed normal form convergence sweep counts.
    let mut max_sweeps = 0usize;
    for _ in 0..200 {
        let rho = mpnf_core::random::random_density_full_rank(&[2, 2, 2], 0.1, &mut rng);
        let r = normal_form(&State::Density(rho), &SloccConfig::default()).unwrap();
        assert_eq!(r.status, NormalFormStatus::Converged);
        max_sweeps = max_sweeps.max(r.iterations);
    }
    println!("mixed 3-qubit x200: max sweeps to converge {max_sweeps}");

    println!("stress sweeps all passed");
}
