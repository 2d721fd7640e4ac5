//! Single-photon Floquet dynamics: one period of coupled-mode propagation
//! followed by the auxiliary cut-off.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::lattice::{Bond, LatticeSpec};
use crate::linalg;
use crate::{Error, Result, C64};

/// Fixed-step integration settings shared by every propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Integration {
    pub steps_per_period: usize,
    /// Allowed relative norm drift over one closed-system period.
    pub norm_tolerance: f64,
}

impl Default for Integration {
    fn default() -> Self {
        Self {
            steps_per_period: 2000,
            norm_tolerance: 1e-8,
        }
    }
}

impl Integration {
    pub fn with_steps(steps_per_period: usize) -> Self {
        Self {
            steps_per_period,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Support {
    /// Amplitudes on the `N` straight waveguides only.
    Straight,
    /// Amplitudes on all `M` sites in flat order.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinglePhotonState {
    pub amplitudes: Array1<C64>,
    pub support: Support,
}

impl SinglePhotonState {
    pub fn new(amplitudes: Array1<C64>, support: Support) -> Result<Self> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("state has non-finite amplitudes".into()));
        }
        Ok(Self {
            amplitudes,
            support,
        })
    }

    /// Unit excitation at one site.
    pub fn localized(len: usize, site: usize, support: Support) -> Result<Self> {
        if site >= len {
            return Err(Error::Domain(format!("site {site} outside 0..{len}")));
        }
        let mut amplitudes = Array1::zeros(len);
        amplitudes[site] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            support,
        })
    }

    pub fn norm(&self) -> f64 {
        linalg::vector_norm(&self.amplitudes)
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Single-period propagator on the straight-waveguide subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMatrix {
    pub entries: Array2<C64>,
    pub period_t: f64,
}

impl TransmissionMatrix {
    pub fn new(entries: Array2<C64>, period_t: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Domain("transmission matrix must be square".into()));
        }
        Ok(Self { entries, period_t })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        Ok(linalg::singular_values(&self.entries)?.to_vec())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(linalg::eigenvalues(&self.entries)?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// `Uᵏ`, the stroboscopic propagator over `k` periods.
    pub fn power(&self, k: usize) -> TransmissionMatrix {
        let n = self.size();
        let mut result = linalg::identity(n);
        let mut base = self.entries.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.dot(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.dot(&base);
            }
        }
        TransmissionMatrix {
            entries: result,
            period_t: self.period_t * k as f64,
        }
    }
}

/// `H_eff` with `U(T) = exp(−i T H_eff)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub entries: Array2<C64>,
    pub period_t: f64,
    /// Which logarithm branch produced the matrix.
    pub branch_note: String,
}

impl EffectiveHamiltonian {
    /// Wrap an arbitrary matrix, e.g. a hand-built test Hamiltonian.
    pub fn from_matrix(entries: Array2<C64>, period_t: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Domain("Hamiltonian must be square".into()));
        }
        Ok(Self {
            entries,
            period_t,
            branch_note: "supplied directly".into(),
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// `exp(−i T H)`.
    pub fn propagator(&self) -> TransmissionMatrix {
        let generator = self.entries.mapv(|z| z * C64::new(0.0, -self.period_t));
        TransmissionMatrix {
            entries: linalg::expm(&generator),
            period_t: self.period_t,
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        Ok(linalg::eigenvalues(&self.entries)?.to_vec())
    }
}

fn apply_bonds(bonds: &[Bond], beta0: f64, y: &Array2<C64>) -> Array2<C64> {
    // −i H Y
    let mut hy = if beta0 != 0.0 {
        y.mapv(|v| v * beta0)
    } else {
        Array2::zeros(y.raw_dim())
    };
    for bond in bonds {
        let e = C64::new(bond.element, 0.0);
        let (s, a) = (bond.straight, bond.aux);
        let row_a = y.row(a).to_owned();
        let row_s = y.row(s).to_owned();
        hy.row_mut(s).scaled_add(e, &row_a);
        hy.row_mut(a).scaled_add(e, &row_s);
    }
    hy.mapv_inplace(|v| C64::new(v.im, -v.re));
    hy
}

/// Integrate `i dY/dz = H(z) Y` from `z0` to `z0 + T` with classical RK4.
fn integrate(
    spec: &LatticeSpec,
    mut y: Array2<C64>,
    z0: f64,
    steps: usize,
) -> Result<Array2<C64>> {
    let h = spec.period_t / steps as f64;
    let beta0 = spec.onsite_beta0;
    for step in 0..steps {
        let z = z0 + step as f64 * h;
        let b0 = spec.bonds(z)?;
        let bh = spec.bonds(z + 0.5 * h)?;
        let b1 = spec.bonds(z + h)?;
        let k1 = apply_bonds(&b0, beta0, &y);
        let k2 = apply_bonds(&bh, beta0, &(&y + &k1.mapv(|v| v * (0.5 * h))));
        let k3 = apply_bonds(&bh, beta0, &(&y + &k2.mapv(|v| v * (0.5 * h))));
        let k4 = apply_bonds(&b1, beta0, &(&y + &k3.mapv(|v| v * h)));
        let incr = k1 + &k2.mapv(|v| v * 2.0) + &k3.mapv(|v| v * 2.0) + &k4;
        y.scaled_add(C64::new(h / 6.0, 0.0), &incr);
    }
    Ok(y)
}

fn check_steps(opts: &Integration) -> Result<()> {
    if opts.steps_per_period == 0 {
        return Err(Error::Configuration("steps_per_period must be positive".into()));
    }
    Ok(())
}

/// Propagate a full-lattice state over one closed-system period.
pub fn propagate_period(
    spec: &LatticeSpec,
    state: &SinglePhotonState,
    z0: f64,
    opts: &Integration,
) -> Result<SinglePhotonState> {
    spec.validate()?;
    check_steps(opts)?;
    let m = spec.site_count();
    if state.support != Support::Full || state.amplitudes.len() != m {
        return Err(Error::Domain(format!(
            "propagate_period needs a full-lattice state of length {m}"
        )));
    }
    let column = state.amplitudes.clone().insert_axis(ndarray::Axis(1));
    let out = integrate(spec, column, z0, opts.steps_per_period)?;
    let out = out.column(0).to_owned();
    let before = state.norm();
    let after = linalg::vector_norm(&out);
    if before > 0.0 {
        let drift = ((after - before) / before).abs();
        if drift > opts.norm_tolerance {
            return Err(Error::Integration {
                drift,
                tolerance: opts.norm_tolerance,
                steps: opts.steps_per_period,
            });
        }
    }
    SinglePhotonState::new(out, Support::Full)
}

/// Full `M × M` closed-system propagator over one period starting at `z = 0`.
pub fn period_propagator(spec: &LatticeSpec, opts: &Integration) -> Result<Array2<C64>> {
    spec.validate()?;
    check_steps(opts)?;
    let m = spec.site_count();
    let w = integrate(spec, linalg::identity(m), 0.0, opts.steps_per_period)?;
    let gram = linalg::dagger(&w).dot(&w) - linalg::identity(m);
    let drift = linalg::max_abs(&gram);
    if drift > opts.norm_tolerance {
        return Err(Error::Integration {
            drift,
            tolerance: opts.norm_tolerance,
            steps: opts.steps_per_period,
        });
    }
    Ok(w)
}

/// Discard the auxiliary amplitudes.
pub fn truncate_aux(spec: &LatticeSpec, state: &SinglePhotonState) -> Result<SinglePhotonState> {
    if state.support != Support::Full || state.amplitudes.len() != spec.site_count() {
        return Err(Error::Domain("truncate_aux needs a full-lattice state".into()));
    }
    let amplitudes = spec
        .straight_sites()
        .into_iter()
        .map(|flat| state.amplitudes[flat])
        .collect();
    SinglePhotonState::new(amplitudes, Support::Straight)
}

/// Restrict a full propagator to the straight-waveguide rows and columns.
pub fn restrict_to_straight(spec: &LatticeSpec, full: &Array2<C64>) -> Array2<C64> {
    let idx = spec.straight_sites();
    Array2::from_shape_fn((idx.len(), idx.len()), |(r, c)| full[[idx[r], idx[c]]])
}

pub fn transmission_matrix(spec: &LatticeSpec, opts: &Integration) -> Result<TransmissionMatrix> {
    let w = period_propagator(spec, opts)?;
    TransmissionMatrix::new(restrict_to_straight(spec, &w), spec.period_t)
}

/// Largest eigenvalue phase accepted by the principal-branch logarithm.
pub const BRANCH_GUARD: f64 = 0.9 * std::f64::consts::PI;

/// `H_eff = (i/T) log U` on the principal branch.
pub fn effective_hamiltonian(u: &TransmissionMatrix) -> Result<EffectiveHamiltonian> {
    let eigenvalues = linalg::eigenvalues(&u.entries)?;
    let min_modulus = eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min_modulus < 1e-12 {
        return Err(Error::SingularPropagator {
            modulus: min_modulus,
        });
    }
    let max_phase = eigenvalues.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
    if max_phase > BRANCH_GUARD {
        return Err(Error::Branch { phase: max_phase });
    }
    let log_u = linalg::logm(&u.entries)?;
    let entries = log_u.mapv(|z| z * C64::new(0.0, 1.0 / u.period_t));
    let h = EffectiveHamiltonian {
        entries,
        period_t: u.period_t,
        branch_note: format!("principal branch, max |arg λ| = {max_phase:.6} rad"),
    };
    let back = h.propagator();
    let residual =
        linalg::frobenius(&(&back.entries - &u.entries)) / linalg::frobenius(&u.entries).max(1e-300);
    if residual > 1e-8 {
        return Err(Error::Conditioning {
            what: "exp(−iT H_eff) does not reproduce U".into(),
            condition: linalg::condition_number(&u.entries).unwrap_or(f64::INFINITY),
            residual,
        });
    }
    Ok(h)
}

/// `Uᵏ ψ₀`.
pub fn evolve_n_periods(
    u: &TransmissionMatrix,
    psi0: &SinglePhotonState,
    k: usize,
) -> Result<SinglePhotonState> {
    if psi0.amplitudes.len() != u.size() {
        return Err(Error::Domain("state length does not match U".into()));
    }
    let mut psi = psi0.amplitudes.clone();
    for _ in 0..k {
        psi = u.entries.dot(&psi);
    }
    SinglePhotonState::new(psi, psi0.support)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityDistribution {
    /// `|U_{n,n₀}|²`.
    pub raw: Vec<f64>,
    /// `raw / Σ raw` (post-selected on detection).
    pub normalized: Vec<f64>,
    pub survival: f64,
}

pub fn intensity_distribution(u: &TransmissionMatrix, n0: usize) -> Result<IntensityDistribution> {
    if n0 >= u.size() {
        return Err(Error::Domain(format!("injection site {n0} outside 0..{}", u.size())));
    }
    let raw: Vec<f64> = u.entries.column(n0).iter().map(|z| z.norm_sqr()).collect();
    let survival: f64 = raw.iter().sum();
    let normalized = if survival > 0.0 {
        raw.iter().map(|p| p / survival).collect()
    } else {
        vec![0.0; raw.len()]
    };
    Ok(IntensityDistribution {
        raw,
        normalized,
        survival,
    })
}

/// `Σ n p_n / Σ p_n` with `n` the zero-based vector index.
pub fn packet_center(p: &[f64]) -> Result<f64> {
    let total: f64 = p.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("distribution has no weight".into()));
    }
    Ok(p.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>() / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LyapunovWindow {
    pub k1: usize,
    pub k2: usize,
}

impl Default for LyapunovWindow {
    fn default() -> Self {
        Self { k1: 20, k2: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub per_um: f64,
    pub per_period: f64,
    /// Edge amplitude relative to the peak at `k2`.
    pub boundary_ratio: f64,
}

/// Lattice size used for Lyapunov estimates unless the caller picks one.
pub const LYAPUNOV_SITES: usize = 81;

/// Largest edge-to-peak amplitude ratio tolerated at the end of the window.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Growth rate of `|ψ_m|` between periods `k1` and `k2` under `U`.
pub fn lyapunov_from_transmission(
    u: &TransmissionMatrix,
    m: usize,
    window: LyapunovWindow,
    boundary_tolerance: f64,
) -> Result<LyapunovEstimate> {
    if window.k2 <= window.k1 {
        return Err(Error::Domain("Lyapunov window needs k2 > k1".into()));
    }
    let psi0 = SinglePhotonState::localized(u.size(), m, Support::Straight)?;
    let at_k1 = evolve_n_periods(u, &psi0, window.k1)?;
    let at_k2 = evolve_n_periods(u, &at_k1, window.k2 - window.k1)?;
    let a1 = at_k1.amplitudes[m].norm();
    let a2 = at_k2.amplitudes[m].norm();
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::Domain("amplitude at the excitation site vanished".into()));
    }
    let peak = at_k2.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = u.size();
    let edge = at_k2.amplitudes[0].norm().max(at_k2.amplitudes[n - 1].norm());
    let boundary_ratio = edge / peak;
    if boundary_ratio >= boundary_tolerance {
        return Err(Error::Window {
            ratio: boundary_ratio,
            period: window.k2,
            tolerance: boundary_tolerance,
        });
    }
    let per_period = (a2.ln() - a1.ln()) / (window.k2 - window.k1) as f64;
    Ok(LyapunovEstimate {
        per_um: per_period / u.period_t,
        per_period,
        boundary_ratio,
    })
}

pub fn lyapunov_exponent(
    spec: &LatticeSpec,
    m: usize,
    window: LyapunovWindow,
    opts: &Integration,
) -> Result<LyapunovEstimate> {
    let u = transmission_matrix(spec, opts)?;
    lyapunov_from_transmission(&u, m, window, BOUNDARY_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn truncation_identities() {
        let spec = LatticeSpec::default().with_sites(3);
        let aux_only = SinglePhotonState::new(
            ndarray::array![0.0, 0.6, 0.0, 0.8, 0.0].mapv(|x| C64::new(x, 0.0)),
            Support::Full,
        )
        .unwrap();
        assert_eq!(truncate_aux(&spec, &aux_only).unwrap().norm(), 0.0);

        let straight_only = SinglePhotonState::new(
            ndarray::array![0.6, 0.0, 0.0, 0.0, 0.8].mapv(|x| C64::new(0.0, x)),
            Support::Full,
        )
        .unwrap();
        let t = truncate_aux(&spec, &straight_only).unwrap();
        assert_eq!(t.support, Support::Straight);
        assert_eq!(t.amplitudes.len(), 3);
        assert!((t.norm() - 1.0).abs() < 1e-15);

        let mixed = SinglePhotonState::new(
            ndarray::array![0.5, 0.5, 0.1, 0.3, 0.2].mapv(|x| C64::new(x, x * 0.5)),
            Support::Full,
        )
        .unwrap();
        let aux_weight: f64 = [1, 3].iter().map(|&i| mixed.amplitudes[i].norm_sqr()).sum();
        let t = truncate_aux(&spec, &mixed).unwrap();
        assert!((mixed.norm().powi(2) - t.norm().powi(2) - aux_weight).abs() < 1e-15);
    }

    #[test]
    fn truncate_requires_full_state() {
        let spec = LatticeSpec::default().with_sites(3);
        let s = SinglePhotonState::localized(3, 0, Support::Straight).unwrap();
        assert!(truncate_aux(&spec, &s).is_err());
    }

    #[test]
    fn packet_center_values() {
        let mut delta = vec![0.0; 9];
        delta[3] = 1.0;
        assert_eq!(packet_center(&delta).unwrap(), 3.0);
        assert!((packet_center(&[1.0; 9]).unwrap() - 4.0).abs() < 1e-15);
        let sym = [0.0, 0.0, 0.1, 0.2, 0.4, 1.0, 0.4, 0.2, 0.1, 0.0, 0.0];
        assert!((packet_center(&sym).unwrap() - 5.0).abs() < 1e-14);
        assert!(packet_center(&[0.0; 4]).is_err());
    }

    #[test]
    fn identity_log_is_zero() {
        let u = TransmissionMatrix::new(linalg::identity(4), 40.0).unwrap();
        let h = effective_hamiltonian(&u).unwrap();
        assert!(linalg::max_abs(&h.entries) < 1e-15);
    }

    #[test]
    fn scalar_phase_log() {
        let theta = 0.05;
        let t = 40.0;
        let u = TransmissionMatrix::new(
            linalg::identity(3).mapv(|z| z * C64::from_polar(1.0, -theta)),
            t,
        )
        .unwrap();
        let h = effective_hamiltonian(&u).unwrap();
        for ((r, c), v) in h.entries.indexed_iter() {
            let want = if r == c { theta / t } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_and_branch_errors() {
        let mut m = linalg::identity(2);
        m[[1, 1]] = C64::new(1e-14, 0.0);
        let u = TransmissionMatrix::new(m, 1.0).unwrap();
        assert!(matches!(effective_hamiltonian(&u), Err(Error::SingularPropagator { .. })));

        let mut m = linalg::identity(2);
        m[[0, 0]] = C64::from_polar(1.0, 0.95 * std::f64::consts::PI);
        let u = TransmissionMatrix::new(m, 1.0).unwrap();
        assert!(matches!(effective_hamiltonian(&u), Err(Error::Branch { .. })));
    }

    #[test]
    fn power_matches_repeated_product() {
        let spec = LatticeSpec::default().with_sites(4);
        let u = transmission_matrix(&spec, &Integration::with_steps(400)).unwrap();
        let mut manual = linalg::identity(4);
        for _ in 0..5 {
            manual = u.entries.dot(&manual);
        }
        assert!(linalg::max_abs(&(u.power(5).entries - manual)) < 1e-15);
        assert_eq!(u.power(0).entries, linalg::identity(4));
    }

    #[test]
    fn zero_steps_rejected() {
        let spec = LatticeSpec::default();
        assert!(matches!(
            transmission_matrix(&spec, &Integration::with_steps(0)),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn too_few_steps_reports_drift() {
        let mut spec = LatticeSpec::default().with_sites(3).with_boundary(Boundary::Ring);
        spec.coupling_a = 400.0;
        let err = period_propagator(&spec, &Integration::with_steps(10)).unwrap_err();
        assert!(matches!(err, Error::Integration { steps: 10, .. }), "{err}");
    }
}
