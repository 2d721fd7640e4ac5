//! Bulk hoppings, PBC/OBC spectra, the generalized Brillouin zone and the
//! similarity transformation that removes the skin effect.
//!
//! Hopping of order `o` means amplitude transfer from guide `n` to `n + o`:
//! `κ_o = H[n + o, n]`. A Bloch wave `e^{ikn}` then has energy
//! `E(k) = Σ κ_o e^{−iko}` and the non-Bloch characteristic equation reads
//! `Σ κ_o β^{−o} = E`.

use std::ops::RangeInclusive;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::floquet::{self, EffectiveHamiltonian, Integration};
use crate::lattice::{Boundary, LatticeSpec};
use crate::linalg;
use crate::{Error, Result, C64};

/// Orders kept by default.
pub const DEFAULT_ORDERS: (i32, i32) = (-4, 5);

/// Relative tolerance for accepting a root pair as one GBZ point.
pub const ROOT_PAIR_TOLERANCE: f64 = 1e-3;

/// GBZ is treated as a circle when `residual < 0.05 · radius`.
pub const CIRCULARITY: f64 = 0.05;

/// Overflow guard on `N · |g|` for the similarity transformation.
pub const SCALE_GUARD: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkHoppings {
    pub lowest_order: i32,
    /// `κ_o` for `o = lowest_order, lowest_order + 1, …`.
    pub kappa: Vec<C64>,
    pub source_ring_size: usize,
    /// Largest deviation of any ring entry from its diagonal mean, relative
    /// to the largest `|κ|`.
    pub circulant_residual: f64,
}

impl BulkHoppings {
    /// Hoppings given directly, e.g. a hand-built model.
    pub fn from_orders(lowest_order: i32, kappa: Vec<C64>) -> Result<Self> {
        if kappa.is_empty() {
            return Err(Error::Domain("no hopping orders given".into()));
        }
        Ok(Self {
            lowest_order,
            kappa,
            source_ring_size: 0,
            circulant_residual: 0.0,
        })
    }

    pub fn orders(&self) -> RangeInclusive<i32> {
        self.lowest_order..=self.highest_order()
    }

    pub fn highest_order(&self) -> i32 {
        self.lowest_order + self.kappa.len() as i32 - 1
    }

    pub fn get(&self, order: i32) -> C64 {
        let i = order - self.lowest_order;
        if i < 0 || i as usize >= self.kappa.len() {
            C64::new(0.0, 0.0)
        } else {
            self.kappa[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.orders().zip(self.kappa.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.kappa.iter().map(|k| k.norm()).fold(0.0, f64::max)
    }

    /// `κ_o = conj(κ_{−o})` for every order.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.orders().all(|o| (self.get(o) - self.get(-o).conj()).norm() <= tol)
    }

    /// Open chain of `n` sites built from these hoppings.
    pub fn open_chain(&self, n: usize) -> Array2<C64> {
        let mut h = Array2::zeros((n, n));
        for (o, k) in self.iter() {
            for col in 0..n {
                let row = col as i64 + o as i64;
                if row >= 0 && (row as usize) < n {
                    h[[row as usize, col]] = k;
                }
            }
        }
        h
    }
}

/// Read `κ_o` off a translation-invariant ring Hamiltonian.
pub fn hoppings_from_ring(h: &Array2<C64>, lowest: i32, highest: i32) -> Result<BulkHoppings> {
    let n = h.nrows();
    if lowest > highest {
        return Err(Error::Domain("empty order range".into()));
    }
    if (highest - lowest + 1) as usize > n {
        return Err(Error::Domain(format!(
            "orders {lowest}..={highest} alias on a ring of {n} sites"
        )));
    }
    let at = |row: i64, col: usize| h[[row.rem_euclid(n as i64) as usize, col]];
    let diagonal_mean = |o: i64| (0..n).map(|c| at(c as i64 + o, c)).sum::<C64>() / n as f64;
    let kappa: Vec<C64> = (lowest..=highest).map(|o| diagonal_mean(o as i64)).collect();
    let mut worst: f64 = 0.0;
    for o in 0..n as i64 {
        let mean = diagonal_mean(o);
        for c in 0..n {
            worst = worst.max((at(c as i64 + o, c) - mean).norm());
        }
    }
    let scale = kappa.iter().map(|k| k.norm()).fold(0.0, f64::max);
    let circulant_residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(BulkHoppings {
        lowest_order: lowest,
        kappa,
        source_ring_size: n,
        circulant_residual,
    })
}

/// Hoppings of the ring effective Hamiltonian with `n_ring` straight guides.
pub fn bulk_hoppings(
    spec: &LatticeSpec,
    n_ring: usize,
    orders: (i32, i32),
    opts: &Integration,
) -> Result<BulkHoppings> {
    if spec.boundary != Boundary::Ring {
        return Err(Error::Configuration("bulk hoppings need a ring lattice".into()));
    }
    let ring = spec.clone().with_sites(n_ring);
    let u = floquet::transmission_matrix(&ring, opts)?;
    let h = floquet::effective_hamiltonian(&u)?;
    let hop = hoppings_from_ring(&h.entries, orders.0, orders.1)?;
    if hop.circulant_residual > 0.01 {
        log::warn!(
            "ring Hamiltonian is not circulant: residual {:.3e} of max |κ|",
            hop.circulant_residual
        );
    }
    Ok(hop)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SpectrumKind {
    Pbc,
    Obc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub kind: SpectrumKind,
    pub eigenvalues: Vec<C64>,
    pub lattice_size: usize,
}

/// `E(k_j) = Σ κ_o e^{−i k_j o}` at `k_j = 2πj/n`.
pub fn pbc_spectrum(h: &BulkHoppings, n_samples: usize) -> Result<SpectrumResult> {
    if n_samples < 3 {
        return Err(Error::Domain("PBC spectrum needs at least 3 samples".into()));
    }
    let eigenvalues = (0..n_samples)
        .map(|j| {
            let k = 2.0 * std::f64::consts::PI * j as f64 / n_samples as f64;
            h.iter().map(|(o, kap)| kap * C64::from_polar(1.0, -k * o as f64)).sum()
        })
        .collect();
    Ok(SpectrumResult {
        kind: SpectrumKind::Pbc,
        eigenvalues,
        lattice_size: n_samples,
    })
}

/// Lattice size for OBC spectra unless the caller picks one.
pub const OBC_SITES: usize = 30;

pub fn obc_spectrum(spec: &LatticeSpec, n_sites: usize, opts: &Integration) -> Result<SpectrumResult> {
    if n_sites < 2 {
        return Err(Error::Domain("OBC spectrum needs at least 2 sites".into()));
    }
    let open = spec.clone().with_sites(n_sites).with_boundary(Boundary::Open);
    let u = floquet::transmission_matrix(&open, opts)?;
    let h = floquet::effective_hamiltonian(&u)?;
    spectrum_of(&h)
}

/// Eigenvalues of a given effective Hamiltonian, reported as OBC.
pub fn spectrum_of(h: &EffectiveHamiltonian) -> Result<SpectrumResult> {
    let eigenvalues = linalg::eigenvalues(&h.entries).map_err(|e| Error::Conditioning {
        what: format!("eigensolver failed: {e}"),
        condition: f64::NAN,
        residual: f64::NAN,
    })?;
    Ok(SpectrumResult {
        kind: SpectrumKind::Obc,
        eigenvalues: eigenvalues.to_vec(),
        lattice_size: h.size(),
    })
}

/// Shoelace area of a closed polygon; positive for counter-clockwise.
pub fn signed_area(points: &[C64]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        / 2.0
}

/// Winding number of a closed polygon around `p`.
pub fn winding_number(points: &[C64], p: C64) -> i32 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i] - p;
        let b = points[(i + 1) % n] - p;
        total += (b / a).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbzSample {
    pub energy: C64,
    pub beta: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbzCurve {
    pub samples: Vec<GbzSample>,
    pub fitted_radius: f64,
    pub circle_residual: f64,
    pub skipped: usize,
    pub total: usize,
}

/// Roots of `Σ c_k x^k` from the companion matrix; leading zero
/// coefficients are dropped (roots at infinity).
pub fn polynomial_roots(coefficients: &[C64]) -> Result<Vec<C64>> {
    let mut degree = coefficients.len().saturating_sub(1);
    while degree > 0 && coefficients[degree].norm() == 0.0 {
        degree -= 1;
    }
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coefficients[degree];
    let mut companion = Array2::zeros((degree, degree));
    for i in 1..degree {
        companion[[i, i - 1]] = C64::new(1.0, 0.0);
    }
    for i in 0..degree {
        companion[[i, degree - 1]] = -coefficients[i] / lead;
    }
    Ok(linalg::eigenvalues(&companion)?.to_vec())
}

/// Characteristic polynomial `Σ κ_o β^{p−o} − E β^p` in ascending powers,
/// `p` the highest order.
pub fn characteristic_polynomial(h: &BulkHoppings, energy: C64) -> Vec<C64> {
    let p = h.highest_order();
    let degree = (p - h.lowest_order) as usize;
    let mut c = vec![C64::new(0.0, 0.0); degree + 1];
    for (o, k) in h.iter() {
        c[(p - o) as usize] += k;
    }
    c[p as usize] -= energy;
    c
}

/// Non-Bloch GBZ points for each energy.
pub fn gbz(h: &BulkHoppings, energies: &[C64]) -> Result<GbzCurve> {
    gbz_with_tolerance(h, energies, ROOT_PAIR_TOLERANCE)
}

pub fn gbz_with_tolerance(h: &BulkHoppings, energies: &[C64], tolerance: f64) -> Result<GbzCurve> {
    if energies.is_empty() {
        return Err(Error::Domain("GBZ needs at least one energy".into()));
    }
    let p = h.highest_order();
    if h.lowest_order > -1 || p < 1 {
        return Err(Error::Domain("GBZ needs hoppings of both signs of order".into()));
    }
    let p = p as usize;
    let mut samples = Vec::new();
    let mut skipped = 0;
    for &energy in energies {
        let mut roots = polynomial_roots(&characteristic_polynomial(h, energy))?;
        roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        if roots.len() <= p {
            skipped += 1;
            continue;
        }
        let (lo, hi) = (roots[p - 1], roots[p]);
        if (hi.norm() - lo.norm()).abs() <= tolerance * hi.norm() {
            samples.push(GbzSample { energy, beta: lo });
            samples.push(GbzSample { energy, beta: hi });
        } else {
            skipped += 1;
        }
    }
    let total = energies.len();
    if 2 * skipped > total {
        return Err(Error::GbzFailure { skipped, total });
    }
    let fitted_radius = samples.iter().map(|s| s.beta.norm()).sum::<f64>() / samples.len() as f64;
    let circle_residual = samples
        .iter()
        .map(|s| (s.beta.norm() - fitted_radius).abs())
        .fold(0.0, f64::max);
    Ok(GbzCurve {
        samples,
        fitted_radius,
        circle_residual,
        skipped,
        total,
    })
}

/// `g = log r` for a circular GBZ.
pub fn skin_depth(curve: &GbzCurve) -> Result<f64> {
    skin_depth_with_tolerance(curve, CIRCULARITY)
}

pub fn skin_depth_with_tolerance(curve: &GbzCurve, circularity: f64) -> Result<f64> {
    if !(curve.fitted_radius > 0.0) {
        return Err(Error::Domain("GBZ radius must be positive".into()));
    }
    if curve.circle_residual >= circularity * curve.fitted_radius {
        return Err(Error::NonCircularGbz {
            residual: curve.circle_residual,
            radius: curve.fitted_radius,
        });
    }
    Ok(curve.fitted_radius.ln())
}

/// `S H S⁻¹` with `S = diag(e^{−g}, e^{−2g}, …, e^{−Ng})`.
pub fn similarity_transform(h: &Array2<C64>, g: f64) -> Result<Array2<C64>> {
    let n = h.nrows();
    if !g.is_finite() {
        return Err(Error::Domain("skin depth must be finite".into()));
    }
    let scale = n as f64 * g.abs();
    if scale >= SCALE_GUARD {
        return Err(Error::Scale(scale));
    }
    Ok(Array2::from_shape_fn(h.dim(), |(r, c)| {
        h[[r, c]] * (-(r as f64 - c as f64) * g).exp()
    }))
}

/// `H̃ = i H̄` and its relative hermiticity residual.
pub fn hermitianize(hbar: &Array2<C64>) -> (Array2<C64>, f64) {
    let ht = hbar.mapv(|z| z * C64::i());
    let residual = linalg::hermiticity_residual(&ht);
    (ht, residual)
}

/// Mean over right eigenvectors of the intensity centroid `Σ n|v_n|² / Σ|v_n|²`.
pub fn mean_eigenvector_centroid(h: &Array2<C64>) -> Result<f64> {
    let (_, vecs) = linalg::eigen(h)?;
    let n = h.nrows();
    let mut total = 0.0;
    for col in vecs.columns() {
        let w: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        let c: f64 = col.iter().enumerate().map(|(i, z)| i as f64 * z.norm_sqr()).sum();
        total += c / w;
    }
    Ok(total / n as f64)
}
