use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;
use skinwalk::floquet::{self, Integration};
use skinwalk::lattice::{Boundary, LatticeSpec};
use skinwalk::nonbloch::{self, BulkHoppings};
use skinwalk::{linalg, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn hatano_nelson(forward: f64, backward: f64) -> BulkHoppings {
    // order +1 is H[n+1][n], order −1 is H[n−1][n]
    BulkHoppings::from_orders(-1, vec![c(backward), c(0.0), c(forward)]).unwrap()
}

fn obc_energies(h: &BulkHoppings, n: usize) -> Vec<C64> {
    linalg::eigenvalues(&h.open_chain(n)).unwrap().to_vec()
}

#[test]
fn hatano_nelson_gbz_radius_and_skin_depth() {
    let h = hatano_nelson(0.5, 1.0);
    let curve = nonbloch::gbz(&h, &obc_energies(&h, 40)).unwrap();
    for s in &curve.samples {
        assert_abs_diff_eq!(s.beta.norm(), 0.5f64.sqrt(), epsilon = 1e-6);
    }
    let g = nonbloch::skin_depth(&curve).unwrap();
    assert_abs_diff_eq!(g, -0.34657, epsilon = 1e-5);
}

#[test]
fn matched_similarity_symmetrizes_hatano_nelson() {
    let h = hatano_nelson(0.5, 1.0);
    let chain = h.open_chain(12);
    let g = 0.5f64.sqrt().ln();
    let hbar = nonbloch::similarity_transform(&chain, g).unwrap();
    for n in 0..11 {
        assert_abs_diff_eq!(hbar[[n, n + 1]].norm(), hbar[[n + 1, n]].norm(), epsilon = 1e-12);
    }
    let centroid = nonbloch::mean_eigenvector_centroid(&hbar).unwrap();
    assert!((centroid - 5.5).abs() < 0.1 * 12.0);
}

#[test]
fn hermitian_hoppings_give_unit_gbz() {
    let h = BulkHoppings::from_orders(-2, vec![c(0.1), c(0.7), c(0.3), c(0.7), c(0.1)]).unwrap();
    assert!(h.is_hermitian(1e-14));
    let curve = nonbloch::gbz(&h, &obc_energies(&h, 30)).unwrap();
    for s in &curve.samples {
        assert!((s.beta.norm() - 1.0).abs() < 1e-6, "{}", s.beta.norm());
    }
}

#[test]
fn pbc_loop_encloses_obc_spectrum_for_the_skin_lattice() {
    let opts = Integration::default();
    let spec = LatticeSpec::default();
    let hop = nonbloch::bulk_hoppings(&spec.clone().with_boundary(Boundary::Ring), 30, nonbloch::DEFAULT_ORDERS, &opts)
        .unwrap();
    let pbc = nonbloch::pbc_spectrum(&hop, 400).unwrap();
    let obc = nonbloch::obc_spectrum(&spec, 30, &opts).unwrap();
    assert!(nonbloch::signed_area(&pbc.eigenvalues).abs() > 0.0);
    let inside = obc
        .eigenvalues
        .iter()
        .filter(|&&e| nonbloch::winding_number(&pbc.eigenvalues, e) != 0)
        .count();
    assert!(inside * 2 > obc.eigenvalues.len(), "{inside} of {}", obc.eigenvalues.len());
}

#[test]
fn skin_lattice_eigenvectors_delocalize_after_transform() {
    let opts = Integration::default();
    let spec = LatticeSpec::default();
    let hop = nonbloch::bulk_hoppings(&spec.clone().with_boundary(Boundary::Ring), 30, nonbloch::DEFAULT_ORDERS, &opts)
        .unwrap();
    let u = floquet::transmission_matrix(&spec.clone().with_sites(30), &opts).unwrap();
    let h = floquet::effective_hamiltonian(&u).unwrap();
    // N = 30 energies sit off the infinite-size GBZ by up to ~1%, so the
    // default 1e-3 pair match rejects most of them at φ = 0
    let curve = nonbloch::gbz_with_tolerance(&hop, &h.eigenvalues().unwrap(), 1e-2).unwrap();
    let g = nonbloch::skin_depth(&curve).unwrap();
    let before = nonbloch::mean_eigenvector_centroid(&h.entries).unwrap();
    let hbar = nonbloch::similarity_transform(&h.entries, g).unwrap();
    let after = nonbloch::mean_eigenvector_centroid(&hbar).unwrap();
    let mid = 14.5;
    assert!((before - mid).abs() > 0.2 * 30.0, "before {before}");
    assert!((after - mid).abs() < 0.1 * 30.0, "after {after}");
}

#[test]
fn symmetric_phase_has_bloch_like_gbz() {
    let opts = Integration::default();
    let spec = LatticeSpec::default().with_phase(PI / 2.0);
    let hop = nonbloch::bulk_hoppings(&spec.clone().with_boundary(Boundary::Ring), 30, nonbloch::DEFAULT_ORDERS, &opts)
        .unwrap();
    let obc = nonbloch::obc_spectrum(&spec, 30, &opts).unwrap();
    let curve = nonbloch::gbz(&hop, &obc.eigenvalues).unwrap();
    assert!((curve.fitted_radius - 1.0).abs() < 0.05, "{}", curve.fitted_radius);
}

fn arb_matrix(n: usize) -> impl Strategy<Value = Array2<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| Array2::from_shape_fn((n, n), |(r, c)| C64::new(v[r * n + c].0, v[r * n + c].1)))
}

fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn similarity_preserves_spectrum(h in arb_matrix(6), g in -1.0f64..1.0) {
        let hbar = nonbloch::similarity_transform(&h, g).unwrap();
        let a = sorted(linalg::eigenvalues(&h).unwrap().to_vec());
        let b = sorted(linalg::eigenvalues(&hbar).unwrap().to_vec());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-8 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn nearest_neighbour_gbz_matches_closed_form(f in 0.1f64..2.0, b in 0.1f64..2.0) {
        let h = hatano_nelson(f, b);
        let curve = nonbloch::gbz(&h, &obc_energies(&h, 24)).unwrap();
        for s in &curve.samples {
            prop_assert!((s.beta.norm() - (f / b).sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn hermitian_hoppings_stay_on_unit_circle(k1 in -1.0f64..1.0, k2 in -0.3f64..0.3, phase in 0.0f64..PI) {
        let forward = C64::from_polar(k1, phase);
        let h = BulkHoppings::from_orders(
            -2,
            vec![C64::new(k2, 0.0), forward.conj(), c(0.2), forward, C64::new(k2, 0.0)],
        )
        .unwrap();
        prop_assume!(k1.abs() > 0.05);
        let energies = linalg::eigenvalues(&h.open_chain(24)).unwrap().to_vec();
        if let Ok(curve) = nonbloch::gbz(&h, &energies) {
            for s in &curve.samples {
                prop_assert!((s.beta.norm() - 1.0).abs() < 1e-6);
            }
        }
    }
}
