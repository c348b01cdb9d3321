use proptest::prelude::*;

use super::random_models::{factorized_case, mixed_case, MixedFamily};
use super::*;
use crate::error::Error;
use crate::linalg::{FactorDims, Projector};
use crate::sampling::{random_density_matrix, rng};
use crate::states::{born_marginal_a, max_entangled, partner_projection, DensityOperator, PureState};

fn singlet_table() -> ProbabilityTable {
    let model = TrivialQuantumModel::new(PureState::singlet().density());
    let ctx = ContextSets::new(default_contexts(2, 1, 3).unwrap(), default_contexts(2, 1, 4).unwrap()).unwrap();
    ProbabilityTable::new(&model, &ctx).unwrap()
}

fn dim3_contexts(seed: u64) -> ContextSets {
    ContextSets::new(default_contexts(3, 0, seed).unwrap(), default_contexts(3, 0, seed + 1).unwrap()).unwrap()
}

#[test]
fn hidden_space_validation() {
    assert!(HiddenSpace::new(vec![0.5, 0.6]).is_err());
    assert!(HiddenSpace::new(vec![-0.1, 1.1]).is_err());
    assert!(HiddenSpace::new(vec![]).is_err());
    assert!(HiddenSpace::uniform(0).is_err());
    assert_eq!(HiddenSpace::uniform(4).unwrap().weights(), &[0.25; 4]);
}

#[test]
fn table_rejects_unnormalized_and_out_of_range_models() {
    let state = DensityOperator::maximally_mixed(FactorDims::square(2));
    let ctx = ContextSets::new(default_contexts(2, 0, 0).unwrap(), default_contexts(2, 0, 0).unwrap()).unwrap();
    let half = FnModel::new("half", state.clone(), HiddenSpace::single(), |_, _, _, _, _| 0.125);
    assert!(matches!(ProbabilityTable::new(&half, &ctx), Err(Error::InvalidParameter(_))));
    let negative = FnModel::new("neg", state, HiddenSpace::single(), |_, _, _, a, b| {
        if a == 0 && b == 0 { -0.25 } else { 5.0 / 12.0 }
    });
    assert!(matches!(ProbabilityTable::new(&negative, &ctx), Err(Error::InvalidProbability(_))));
    let wrong_dim = dim3_contexts(0);
    let triv = TrivialQuantumModel::new(PureState::singlet().density());
    assert!(matches!(ProbabilityTable::new(&triv, &wrong_dim), Err(Error::Dimension(_))));
}

#[test]
fn trivial_quantum_model_passes_everything_but_oi() {
    let t = singlet_table();
    for (c, r) in check_all(&t, 1e-10, 1e-8) {
        let r = r.unwrap();
        if c == Condition::OutcomeIndependence {
            assert!((r.violation - 0.25).abs() < 1e-12, "{}", r.violation);
            assert!(!r.passed);
        } else {
            assert!(r.passed, "{c}: {}", r.violation);
        }
    }
    let rho = DensityOperator::new(random_density_matrix(9, &mut rng(5)), FactorDims::square(3)).unwrap();
    let t = ProbabilityTable::new(&TrivialQuantumModel::new(rho), &dim3_contexts(7)).unwrap();
    for (c, r) in check_all(&t, 1e-10, 1e-8) {
        if c.is_gating() {
            assert!(r.unwrap().passed, "{c}");
        }
    }
}

#[test]
fn planted_signalling_violates_pi_by_epsilon() {
    let eps = 0.1;
    let t = ProbabilityTable::new(&PlantedSignallingModel::new(3, eps).unwrap(), &dim3_contexts(1)).unwrap();
    let pi = check_pi(&t, 1e-10).unwrap();
    assert!((pi.violation - eps).abs() < 1e-12);
    assert!(!pi.passed);
    let w = pi.witness.unwrap();
    assert_eq!(w.bob_contexts.len(), 2);
    assert_eq!(w.lambda, Some(0));
    let mnc = check_marginal_noncontextuality(&t, 1e-10).unwrap();
    // |1⟩ is outcome 1 of Z but outcome 0 of keep1, so it moves by ±ε.
    assert!((mnc.violation - 2.0 * eps).abs() < 1e-12);
    assert!(check_oi(&t, 1e-12).unwrap().passed);
    assert!(PlantedSignallingModel::new(3, 0.5).is_err());
}

#[test]
fn planted_contextual_joint_passes_pi_fails_cpi() {
    let eps = 0.3;
    for (n, ctx) in [
        (2, ContextSets::new(default_contexts(2, 0, 0).unwrap(), default_contexts(2, 0, 0).unwrap()).unwrap()),
        (3, dim3_contexts(2)),
    ] {
        let t = ProbabilityTable::new(&PlantedContextualJointModel::new(n, eps).unwrap(), &ctx).unwrap();
        assert!(check_pi(&t, 1e-12).unwrap().passed);
        assert!(check_marginal_noncontextuality(&t, 1e-12).unwrap().passed);
        let cpi = check_cpi(&t, 1e-10, 1e-8).unwrap();
        assert!(cpi.violation > 0.1, "n={n}: {}", cpi.violation);
        let joint = check_joint_noncontextuality(&t, 1e-10).unwrap();
        let nf = n as f64;
        let (lo, hi) = (eps * (1.0 - 1.0 / nf) / nf, eps / nf);
        assert!(joint.violation >= lo - 1e-12 && joint.violation <= hi + 1e-12, "n={n}: {}", joint.violation);
    }
}

#[test]
fn inconclusive_checks_are_errors() {
    let model = TrivialQuantumModel::new(PureState::singlet().density());
    let one = ContextSets::new(
        vec![MeasurementContext::computational(2, "Z")],
        default_contexts(2, 0, 0).unwrap(),
    )
    .unwrap();
    let t = ProbabilityTable::new(&model, &one).unwrap();
    assert!(matches!(check_pi(&t, 1e-10), Err(Error::Inconclusive(_))));
    assert!(matches!(check_cpi(&t, 1e-10, 1e-8), Err(Error::Inconclusive(_))));
    let t = singlet_table();
    assert!(matches!(check_cpi(&t, 1e-10, 1.0), Err(Error::Inconclusive(_))));
    let zero = crate::states::basis_ket(2, 0);
    let product = TrivialQuantumModel::new(PureState::product(&zero, &zero).unwrap().density());
    let ctx = ContextSets::new(default_contexts(2, 0, 0).unwrap(), default_contexts(2, 0, 0).unwrap()).unwrap();
    let skipped = check_cpi(&ProbabilityTable::new(&product, &ctx).unwrap(), 1e-10, 1e-8).unwrap();
    assert!(skipped.skipped > 0 && skipped.passed);
    assert!(check_oi(&t, -1.0).is_err());
}

#[test]
fn perfect_correlation_and_pi_give_noncontextual_marginals() {
    let psi = max_entangled(3).unwrap();
    let alice = default_contexts(3, 2, 11).unwrap();
    let bob: Vec<_> = alice
        .iter()
        .map(|c| {
            let partners = c.outcomes().iter().map(|p| partner_projection(&psi, p).unwrap()).collect();
            MeasurementContext::new(format!("{}*", c.label()), partners).unwrap()
        })
        .collect();
    let ctx = ContextSets::new(alice, bob).unwrap();
    let mut r = rng(12);
    let sigmas: Vec<_> = (0..4)
        .map(|_| DensityOperator::new(random_density_matrix(3, &mut r), FactorDims::new(3, 1)).unwrap())
        .collect();
    let marg = move |l: usize, p: &Projector| born_marginal_a(&sigmas[l], p).unwrap();
    let model = FnModel::new("partner", psi.density(), HiddenSpace::uniform(4).unwrap(), move |l, ca, cb, a, b| {
        if ca.index == cb.index {
            if a == b { marg(l, ca.projector(a)) } else { 0.0 }
        } else {
            // Bob's marginal on a partner outcome equals Alice's on its source.
            let partner_source = &ctx_source(cb.projector(b));
            marg(l, ca.projector(a)) * marg(l, partner_source)
        }
    });
    let t = ProbabilityTable::new(&model, &ctx).unwrap();
    assert!(check_pi(&t, 1e-10).unwrap().passed);
    assert!(check_marginal_noncontextuality(&t, 1e-10).unwrap().passed);
    assert!(!check_triviality(&t, 1e-3).unwrap().passed);
}

fn ctx_source(q: &Projector) -> Projector {
    // For the standard maximally entangled state the partner map is complex
    // conjugation, which is its own inverse.
    partner_projection(&max_entangled(q.dim()).unwrap(), q).unwrap()
}

#[test]
fn pi_and_cpi_agree_on_factorized_models() {
    let (mut pass, mut fail) = (0, 0);
    for seed in 0..40 {
        let t = factorized_case(seed).unwrap();
        assert!(check_oi(&t, 1e-12).unwrap().passed);
        let pi = check_pi(&t, 1e-10).unwrap().passed;
        let cpi = check_cpi(&t, 1e-10, 1e-8).unwrap().passed;
        assert_eq!(pi, cpi, "seed {seed}");
        if pi { pass += 1 } else { fail += 1 }
    }
    assert!(pass > 0 && fail > 0);
}

#[test]
fn marginal_nc_and_cpi_imply_joint_nc() {
    let (tol, floor) = (1e-10, 1e-8);
    let mut premise = 0;
    for seed in 0..24 {
        let family = MixedFamily::ALL[seed as usize % 4];
        let t = mixed_case(family, seed).unwrap();
        let m = check_marginal_noncontextuality(&t, tol).unwrap();
        let c = check_cpi(&t, tol, floor).unwrap();
        if m.passed && c.passed {
            premise += 1;
            assert!(check_joint_noncontextuality(&t, 4.0 * tol + 2.0 * floor).unwrap().passed, "{family:?}");
        } else {
            assert!(matches!(family, MixedFamily::ContextualJoint | MixedFamily::Signalling));
        }
    }
    assert_eq!(premise, 12);
}

#[test]
fn reports_are_deterministic_and_monotone_in_tolerance() {
    let a = mixed_case(MixedFamily::ContextualJoint, 3).unwrap();
    let b = mixed_case(MixedFamily::ContextualJoint, 3).unwrap();
    let ra = check_all(&a, 1e-10, 1e-8);
    let rb = check_all(&b, 1e-10, 1e-8);
    assert_eq!(ra, rb);
    for (c, r) in ra {
        let r = r.unwrap();
        let tighter = check_all(&a, r.violation * 0.5, 1e-8)
            .into_iter()
            .find(|(k, _)| *k == c)
            .unwrap()
            .1
            .unwrap();
        if tighter.passed {
            assert!(r.passed);
        }
        assert_eq!(tighter.violation, r.violation);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn passing_is_monotone(seed in 0u64..1000, lo in 0.0f64..0.5, extra in 0.0f64..0.5) {
        let t = factorized_case(seed).unwrap();
        let hi = lo + extra;
        for (check_lo, check_hi) in check_all(&t, lo, 1e-8).into_iter().zip(check_all(&t, hi, 1e-8)) {
            let (l, h) = (check_lo.1.unwrap(), check_hi.1.unwrap());
            prop_assert!(!l.passed || h.passed);
        }
    }

    #[test]
    fn trivial_models_of_random_states_pass(seed in 0u64..1000) {
        let rho = DensityOperator::new(random_density_matrix(4, &mut rng(seed)), FactorDims::square(2)).unwrap();
        let ctx = ContextSets::new(default_contexts(2, 1, seed).unwrap(), default_contexts(2, 1, seed + 1).unwrap()).unwrap();
        let t = ProbabilityTable::new(&TrivialQuantumModel::new(rho), &ctx).unwrap();
        for (c, r) in check_all(&t, 1e-10, 1e-8) {
            if c.is_gating() {
                prop_assert!(r.unwrap().passed);
            }
        }
    }
}
