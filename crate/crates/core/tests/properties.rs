//! Randomized invariants across modules.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use cohcert::channels::{classify, random_channel, ChannelClass, KrausChannel};
use cohcert::linalg::json::{density_from_json_str, MatrixJson};
use cohcert::linalg::{
    dephase_state, fidelity, random_density_matrix, tensor_power, trace_norm, DensityMatrix,
};
use cohcert::measures::{c_l1, c_max, c_min, c_r, coherence_report, roc};
use cohcert::report::{body_text, canonical_json};
use cohcert::tol;

fn state() -> impl Strategy<Value = DensityMatrix> {
    (2usize..=4, any::<u64>()).prop_flat_map(|(d, seed)| (Just(d), 1..=d, Just(seed))).prop_map(|(d, r, seed)| {
        random_density_matrix(d, r, seed).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_and_robustness(rho in state()) {
        let cmax = c_max(&rho).unwrap();
        prop_assert!(c_min(&rho, tol::RANK) <= c_r(&rho) + 3e-7);
        prop_assert!(c_r(&rho) <= cmax + 3e-7);
        prop_assert!(cmax <= (1.0 + c_l1(&rho)).log2() + 3e-7);
        prop_assert!((roc(&rho).unwrap() + 1.0 - cmax.exp2()).abs() < 1e-9);
    }

    #[test]
    fn dephased_states_are_free(rho in state()) {
        let delta = dephase_state(&rho);
        prop_assert_eq!(c_max(&delta).unwrap(), 0.0);
        prop_assert!(c_r(&delta) < 1e-12);
        // trace distance between states is at most 2
        prop_assert!(trace_norm(&(rho.matrix() - delta.matrix())) <= 2.0 + 1e-12);
    }

    #[test]
    fn json_round_trip(rho in state()) {
        let text = serde_json::to_string(&MatrixJson::from(rho.matrix())).unwrap();
        let back = density_from_json_str(&text).unwrap();
        prop_assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn incoherent_operations_do_not_raise_c_max(rho in state(), seed in any::<u64>()) {
        let ch = random_channel(rho.dim(), 2, ChannelClass::Io, seed).unwrap();
        prop_assert!(classify(&ch, 1e-9).is_io);
        let out = ch.apply(&rho).unwrap();
        prop_assert!(c_max(&out).unwrap() <= c_max(&rho).unwrap() + 1e-7);
    }
}

#[test]
fn tensor_powers_add_relative_entropy() {
    let rho = random_density_matrix(2, 2, 5).unwrap();
    for n in 1..=4 {
        let r = tensor_power(&rho, n).unwrap();
        assert_abs_diff_eq!(c_r(&r), n as f64 * c_r(&rho), epsilon = 1e-9);
        assert_abs_diff_eq!(r.trace(), 1.0, epsilon = 1e-12);
    }
    assert!(tensor_power(&rho, 7).is_err());
}

#[test]
fn unitary_invariance_of_fidelity() {
    let a = random_density_matrix(3, 2, 1).unwrap();
    let b = random_density_matrix(3, 3, 2).unwrap();
    let u = KrausChannel::unitary(cohcert::channels::diagonal_unitary(&[0.3, -1.2, 2.0])).unwrap();
    let f = fidelity(&a, &b).unwrap();
    let g = fidelity(&u.apply(&a).unwrap(), &u.apply(&b).unwrap()).unwrap();
    assert_abs_diff_eq!(f, g, epsilon = 1e-9);
}

#[test]
fn reports_render_deterministically() {
    let rho = random_density_matrix(3, 2, 9).unwrap();
    let a = body_text(&coherence_report(&rho, tol::RANK, false, true).unwrap()).unwrap();
    let b = body_text(&coherence_report(&rho, tol::RANK, false, true).unwrap()).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(canonical_json(&v), a);
}
