use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;
use skinwalk::floquet::{self, Integration, LyapunovWindow, SinglePhotonState, Support, TransmissionMatrix};
use skinwalk::lattice::{Boundary, LatticeSpec, SiteKind};
use skinwalk::{linalg, C64};

fn quick() -> Integration {
    Integration::with_steps(500)
}

#[test]
fn static_coupler_follows_rabi_formula() {
    // R = 0 freezes the geometry: the auxiliary guide couples to the
    // symmetric straight mode with strength √2 κ, a two-level problem
    let spec = LatticeSpec {
        radius_r: 0.0,
        period_t: 25.0,
        ..LatticeSpec::default().with_sites(2)
    };
    let kappa = spec.coupling_strength(spec.spacing_a).unwrap();
    let aux = spec.flat_index(SiteKind::Auxiliary, 0).unwrap();
    let start = SinglePhotonState::localized(spec.site_count(), aux, Support::Full).unwrap();
    let out = floquet::propagate_period(&spec, &start, 0.0, &Integration::default()).unwrap();
    let p = out.intensities();
    let theta = 2f64.sqrt() * kappa * spec.period_t;
    let straight: f64 = spec.straight_sites().iter().map(|&s| p[s]).sum();
    assert_abs_diff_eq!(straight, theta.sin().powi(2), epsilon = 1e-9);
    assert_abs_diff_eq!(p[aux], theta.cos().powi(2), epsilon = 1e-9);
}

#[test]
fn zero_coupling_is_identity() {
    let spec = LatticeSpec {
        coupling_a: 0.0,
        ..LatticeSpec::default()
    };
    let u = floquet::transmission_matrix(&spec, &quick()).unwrap();
    assert!(linalg::max_abs(&(&u.entries - &linalg::identity(9))) < 1e-14);
    let d = floquet::intensity_distribution(&u.power(3), 4).unwrap();
    assert_abs_diff_eq!(d.normalized[4], 1.0, epsilon = 1e-14);
}

#[test]
fn doubling_steps_changes_u_by_less_than_1e6() {
    for phi in [0.0, PI / 2.0] {
        let spec = LatticeSpec::default().with_phase(phi);
        let a = floquet::transmission_matrix(&spec, &Integration::default()).unwrap();
        let b = floquet::transmission_matrix(&spec, &Integration::with_steps(4000)).unwrap();
        assert!(linalg::max_abs(&(&a.entries - &b.entries)) < 1e-6);
    }
}

#[test]
fn effective_hamiltonian_round_trip_and_loss() {
    let spec = LatticeSpec::default();
    let u = floquet::transmission_matrix(&spec, &Integration::default()).unwrap();
    let h = floquet::effective_hamiltonian(&u).unwrap();
    let back = h.propagator();
    let rel = linalg::frobenius(&(&back.entries - &u.entries)) / linalg::frobenius(&u.entries);
    assert!(rel < 1e-8, "round trip {rel}");
    for e in h.eigenvalues().unwrap() {
        assert!(e.im <= 1e-10, "gain mode {e}");
    }
}

#[test]
fn symmetric_phase_gives_symmetric_distribution() {
    let spec = LatticeSpec::default().with_phase(PI / 2.0);
    let u = floquet::transmission_matrix(&spec, &Integration::default()).unwrap();
    let d = floquet::intensity_distribution(&u.power(6), 4).unwrap();
    let p = &d.normalized;
    let peak = p.iter().cloned().fold(0.0, f64::max);
    for off in 1..=4 {
        let (l, r) = (p[4 - off], p[4 + off]);
        assert!((l - r).abs() <= 0.01 * peak, "offset {off}: {l} vs {r}");
    }
}

#[test]
fn mirrored_lattice_mirrors_intensity() {
    // reversing site order swaps left and right gaps, i.e. R sin(Ωz+φ) → R sin(Ωz+φ+π)
    let phi = 0.4;
    let spec = LatticeSpec::default().with_phase(phi);
    let mirror = LatticeSpec::default().with_phase(phi + PI);
    let u = floquet::transmission_matrix(&spec, &Integration::default()).unwrap();
    let v = floquet::transmission_matrix(&mirror, &Integration::default()).unwrap();
    let n = 9;
    for c in 0..n {
        for r in 0..n {
            assert_abs_diff_eq!(u.entries[[r, c]].norm(), v.entries[[n - 1 - r, n - 1 - c]].norm(), epsilon = 1e-9);
        }
    }
}

#[test]
fn hermitian_walk_has_vanishing_lyapunov_exponent() {
    // a unitary nearest-neighbour walk built by hand: no truncation loss
    let n = 121;
    let theta = 0.3;
    let mut h = Array2::<C64>::zeros((n, n));
    for i in 0..n - 1 {
        h[[i, i + 1]] = C64::new(-theta, 0.0);
        h[[i + 1, i]] = C64::new(-theta, 0.0);
    }
    let u = TransmissionMatrix::new(linalg::expm(&h.mapv(|z| z * C64::new(0.0, -1.0))), 1.0).unwrap();
    let short = floquet::lyapunov_from_transmission(&u, n / 2, LyapunovWindow { k1: 10, k2: 20 }, 1e-6).unwrap();
    let long = floquet::lyapunov_from_transmission(&u, n / 2, LyapunovWindow { k1: 20, k2: 60 }, 1e-6).unwrap();
    assert!(long.per_period.abs() < short.per_period.abs().max(1e-3));
    assert!(long.per_period.abs() < 0.05);
}

#[test]
fn lyapunov_window_guard_reports_small_lattice() {
    let spec = LatticeSpec::default().with_sites(9).with_phase(PI / 2.0);
    let err = floquet::lyapunov_exponent(&spec, 4, LyapunovWindow::default(), &quick()).unwrap_err();
    assert!(matches!(err, skinwalk::Error::Window { .. }), "{err}");
}

#[test]
fn truncation_removes_exactly_the_aux_weight() {
    let spec = LatticeSpec::default().with_sites(4);
    let m = spec.site_count();
    let amps = ndarray::Array1::from_shape_fn(m, |i| C64::new(0.1 * (i + 1) as f64, -0.05 * i as f64));
    let full = SinglePhotonState::new(amps.clone(), Support::Full).unwrap();
    let cut = floquet::truncate_aux(&spec, &full).unwrap();
    let aux: f64 = spec.aux_sites().iter().map(|&a| amps[a].norm_sqr()).sum();
    assert_abs_diff_eq!(full.norm().powi(2) - cut.norm().powi(2), aux, epsilon = 1e-14);
}

fn arb_spec() -> impl Strategy<Value = LatticeSpec> {
    (
        2usize..6,
        any::<bool>(),
        0.8f64..1.1,
        0.0f64..0.3,
        20.0f64..60.0,
        0.0f64..(2.0 * PI),
        5.0f64..16.0,
        7.0f64..9.0,
    )
        .prop_map(|(n, ring, a, r, t, phi, amp, b)| LatticeSpec {
            n_straight: n,
            boundary: if ring { Boundary::Ring } else { Boundary::Open },
            spacing_a: a,
            radius_r: r,
            period_t: t,
            phase_phi: phi,
            coupling_a: amp,
            coupling_b: b,
            ..LatticeSpec::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_period_is_unitary_and_u_is_passive(spec in arb_spec()) {
        let opts = Integration::with_steps(800);
        let w = floquet::period_propagator(&spec, &opts).unwrap();
        let gram = linalg::dagger(&w).dot(&w) - linalg::identity(spec.site_count());
        prop_assert!(linalg::max_abs(&gram) < 1e-8);
        let u = TransmissionMatrix::new(floquet::restrict_to_straight(&spec, &w), spec.period_t).unwrap();
        for s in u.singular_values().unwrap() {
            prop_assert!(s <= 1.0 + 1e-6);
        }
        prop_assert!(u.spectral_radius().unwrap() <= 1.0 + 1e-6);
    }

    #[test]
    fn norm_never_grows_over_periods(spec in arb_spec(), k in 1usize..8) {
        let u = floquet::transmission_matrix(&spec, &Integration::with_steps(800)).unwrap();
        let psi = SinglePhotonState::localized(spec.n_straight, 0, Support::Straight).unwrap();
        let mut prev = psi.norm();
        let mut state = psi;
        for _ in 0..k {
            state = floquet::evolve_n_periods(&u, &state, 1).unwrap();
            prop_assert!(state.norm() <= prev + 1e-12);
            prev = state.norm();
        }
    }
}
