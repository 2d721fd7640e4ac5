use std::f64::consts::{LN_2, PI};

use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;
use skinwalk::entanglement::{self, Estimator};
use skinwalk::floquet::Integration;
use skinwalk::lattice::LatticeSpec;
use skinwalk::pair::{self, CorrelationMatrix, PairEvolution, PairOptions};
use skinwalk::C64;

fn psi_from(entries: &[((usize, usize), C64)], n: usize) -> Array2<C64> {
    let mut psi = Array2::zeros((n, n));
    for &((i, j), v) in entries {
        psi[[i, j]] = v;
        psi[[j, i]] = v;
    }
    psi
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

#[test]
fn exact_entropy_of_simple_states() {
    let both_in_one = psi_from(&[((0, 0), real(1.0))], 3);
    assert_abs_diff_eq!(entanglement::renyi2_exact(&both_in_one).unwrap().s2, 0.0, epsilon = 1e-14);

    let noon = psi_from(&[((0, 0), real(0.5f64.sqrt())), ((1, 1), real(0.5f64.sqrt()))], 3);
    assert_abs_diff_eq!(entanglement::renyi2_exact(&noon).unwrap().s2, LN_2, epsilon = 1e-14);

    let split = psi_from(&[((0, 1), real(0.5f64.sqrt()))], 3);
    assert_abs_diff_eq!(entanglement::renyi2_exact(&split).unwrap().s2, LN_2, epsilon = 1e-14);

    let unnormalized = psi_from(&[((0, 0), real(0.9))], 2);
    assert!(entanglement::renyi2_exact(&unnormalized).is_err());
}

#[test]
fn diagonal_entropy_of_simple_correlations() {
    let mut g = Array2::zeros((3, 3));
    g[[1, 1]] = 1.0;
    let r = entanglement::renyi2_diagonal(&CorrelationMatrix::new(g).unwrap()).unwrap();
    assert_abs_diff_eq!(r.s2, 0.0, epsilon = 1e-14);
    assert_eq!(r.estimator, Estimator::Diagonal);

    let mut g = Array2::zeros((3, 3));
    g[[0, 0]] = 0.5;
    g[[1, 1]] = 0.5;
    let r = entanglement::renyi2_diagonal(&CorrelationMatrix::new(g).unwrap()).unwrap();
    assert_abs_diff_eq!(r.s2, LN_2, epsilon = 1e-14);

    let mut bad = Array2::zeros((2, 2));
    bad[[0, 1]] = -0.1;
    assert!(CorrelationMatrix::new(bad).is_err());
}

#[test]
fn similarity_examples() {
    assert_abs_diff_eq!(entanglement::similarity_single(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(entanglement::similarity_single(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
    assert!(entanglement::similarity_single(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    assert_eq!(entanglement::normalized_entropy(0.7, 0.7), 0.0);
}

#[test]
fn block_entropy_matches_amplitude_entropy_after_walk() {
    let spec = LatticeSpec::default().with_sites(5);
    let options = PairOptions {
        integration: Integration::with_steps(1000),
        ..PairOptions::default()
    };
    let u = skinwalk::floquet::transmission_matrix(&spec, &options.integration).unwrap();
    let rho = pair::evolve_pair(&spec, 1, 3, 3, options).unwrap();
    let block = rho.two_photon_block(&spec.straight_sites());
    let mixed = entanglement::renyi2_block(&block, 5).unwrap();
    let psi = pair::pair_amplitudes(&u, 1, 3, 3).unwrap();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pure = entanglement::renyi2_exact(&psi.mapv(|z| z / norm)).unwrap();
    assert_abs_diff_eq!(mixed.s2, pure.s2, epsilon = 1e-6);
    assert_abs_diff_eq!(mixed.survival_p2, norm * norm, epsilon = 1e-6);
}

/// Entropy curve on the straight sector, diagonal estimator.
fn curve(phi: f64, k: usize) -> Vec<f64> {
    let spec = LatticeSpec::default().with_phase(phi);
    let engine = PairEvolution::new(&spec, PairOptions::default()).unwrap();
    let initial = pair::initial_pair_state(&spec, 4, 5).unwrap();
    let mut out = Vec::new();
    engine
        .run(initial, k, |_, rho| {
            let g = pair::correlation_matrix(rho, &spec)?;
            out.push(entanglement::renyi2_diagonal(&g)?.s2);
            Ok(())
        })
        .unwrap();
    out
}

#[test]
fn skin_phase_suppresses_entropy() {
    let k = 12;
    let (asym, mid, sym) = (curve(0.0, k), curve(PI / 4.0, k), curve(PI / 2.0, k));
    let s_norm = |a: &[f64], p: usize| entanglement::normalized_entropy(a[p], sym[p]);
    assert!(s_norm(&asym, 6) < 0.0);
    for p in 10..=k {
        assert!(asym[p] < mid[p] && mid[p] < sym[p], "k = {p}");
        assert!(s_norm(&asym, p).abs() >= s_norm(&mid, p).abs());
    }
}

fn arb_psi(n: usize) -> impl Strategy<Value = Array2<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_filter_map("zero state", move |v| {
        let mut psi = Array2::from_shape_fn((n, n), |(i, j)| C64::new(v[i * n + j].0, v[i * n + j].1));
        psi = &psi + &psi.t();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| psi.mapv(|z| z / norm))
    })
}

proptest! {
    #[test]
    fn exact_entropy_is_in_range(psi in arb_psi(4)) {
        let s = entanglement::renyi2_exact(&psi).unwrap().s2;
        prop_assert!(s >= -1e-10 && s <= 4f64.ln() + 1e-10);
    }

    #[test]
    fn diagonal_entropy_is_in_range(g in proptest::collection::vec(0.0f64..1.0, 25)) {
        prop_assume!(g.iter().sum::<f64>() > 1e-6);
        let g = CorrelationMatrix::new(Array2::from_shape_vec((5, 5), g).unwrap()).unwrap();
        let s = entanglement::renyi2_diagonal(&g).unwrap().s2;
        prop_assert!(s >= -1e-10 && s <= 5f64.ln() + 1e-10);
    }

    #[test]
    fn estimators_agree_without_coherences(
        weights in proptest::collection::vec(0.0f64..1.0, 4),
        phases in proptest::collection::vec(0.0f64..(2.0 * PI), 4),
    ) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-6);
        let entries: Vec<((usize, usize), C64)> = (0..4)
            .map(|i| ((i, i), C64::from_polar((weights[i] / total).sqrt(), phases[i])))
            .collect();
        let psi = psi_from(&entries, 4);
        let exact = entanglement::renyi2_exact(&psi).unwrap().s2;
        let gamma = Array2::from_shape_fn((4, 4), |(i, j)| psi[[i, j]].norm_sqr());
        let diagonal = entanglement::renyi2_diagonal(&CorrelationMatrix::new(gamma).unwrap()).unwrap().s2;
        prop_assert!((exact - diagonal).abs() < 1e-10);
    }

    #[test]
    fn similarity_is_symmetric_and_permutation_invariant(
        p in proptest::collection::vec(0.0f64..1.0, 6),
        q in proptest::collection::vec(0.0f64..1.0, 6),
        shift in 0usize..6,
    ) {
        prop_assume!(p.iter().sum::<f64>() > 1e-6 && q.iter().sum::<f64>() > 1e-6);
        let a = entanglement::similarity_single(&p, &q).unwrap();
        prop_assert!((a - entanglement::similarity_single(&q, &p).unwrap()).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&a));
        let (mut pp, mut qq) = (p.clone(), q.clone());
        pp.rotate_left(shift);
        qq.rotate_left(shift);
        prop_assert!((a - entanglement::similarity_single(&pp, &qq).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pair_similarity_is_scale_free(g in proptest::collection::vec(0.0f64..1.0, 9), c in 0.01f64..100.0) {
        prop_assume!(g.iter().sum::<f64>() > 1e-6);
        let g1 = CorrelationMatrix::new(Array2::from_shape_vec((3, 3), g).unwrap()).unwrap();
        let g2 = CorrelationMatrix::new(g1.gamma.mapv(|v| v * c)).unwrap();
        prop_assert!((entanglement::similarity_pair(&g1, &g2).unwrap() - 1.0).abs() < 1e-12);
    }
}
