//! Lattice geometry and the instantaneous coupled-mode Hamiltonian.
//!
//! Sites are stored in interleaved order `straight₀, aux₀, straight₁, aux₁, …`.
//! Auxiliary waveguide `j` sits between straight waveguides `j` and `j + 1`
//! (wrapping to straight `0` on a ring). Its transverse offset is
//! `R sin(2πz/T + φ)`; the gap to the left straight neighbour is
//! `a + offset` and the gap to the right one is `a − offset`.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// `N − 1` auxiliary waveguides, no wraparound.
    Open,
    /// `N` auxiliary waveguides; the last one links straight `N − 1` to straight `0`.
    Ring,
}

/// How the auxiliary offset splits between the two gaps of an auxiliary
/// waveguide. Recorded in every serialized spec so that outputs are
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapConvention {
    /// The auxiliary centre line rests midway between its straight neighbours
    /// at distance `a` from each: left gap `a + R sin(Ωz+φ)`, right gap
    /// `a − R sin(Ωz+φ)`.
    #[default]
    StraightToAux,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    /// Number of straight waveguides `N`.
    pub n_straight: usize,
    pub boundary: Boundary,
    /// Rest distance between a straight waveguide and an adjacent auxiliary one (μm).
    pub spacing_a: f64,
    /// Transverse oscillation amplitude of the auxiliary waveguides (μm).
    pub radius_r: f64,
    /// Floquet period along the propagation axis (μm).
    pub period_t: f64,
    /// Geometric phase of the auxiliary oscillation (rad).
    #[serde(deserialize_with = "crate::angle::deserialize")]
    pub phase_phi: f64,
    /// Prefactor `A` of the coupling law `κ = A e^{−b x}` (μm⁻¹).
    pub coupling_a: f64,
    /// Decay constant `b` of the coupling law (μm⁻¹).
    pub coupling_b: f64,
    /// Uniform propagation constant; a pure gauge.
    pub onsite_beta0: f64,
    pub gap_convention: GapConvention,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            n_straight: 9,
            boundary: Boundary::Open,
            spacing_a: 0.9,
            radius_r: 0.21,
            period_t: 40.0,
            phase_phi: 0.0,
            coupling_a: 13.99,
            coupling_b: 8.26,
            onsite_beta0: 0.0,
            gap_convention: GapConvention::StraightToAux,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Straight,
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteIndex {
    pub kind: SiteKind,
    /// Position within its kind.
    pub ordinal: usize,
    /// Position in the interleaved order.
    pub flat: usize,
}

/// One straight–auxiliary coupling at a given `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub straight: usize,
    pub aux: usize,
    pub distance: f64,
    /// Hamiltonian matrix element, `−κ(distance)`.
    pub element: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecDocument {
    lattice: LatticeSpec,
}

impl LatticeSpec {
    pub fn with_phase(mut self, phi: f64) -> Self {
        self.phase_phi = phi;
        self
    }

    pub fn with_sites(mut self, n: usize) -> Self {
        self.n_straight = n;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.spacing_a,
            self.radius_r,
            self.period_t,
            self.phase_phi,
            self.coupling_a,
            self.coupling_b,
            self.onsite_beta0,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration("non-finite lattice parameter".into()));
        }
        if self.n_straight < 2 {
            return Err(Error::Configuration(format!(
                "n_straight must be at least 2, got {}",
                self.n_straight
            )));
        }
        if self.period_t <= 0.0 {
            return Err(Error::Configuration("period_t must be positive".into()));
        }
        // A = 0 is the decoupled limit and stays allowed.
        if self.coupling_a < 0.0 {
            return Err(Error::Configuration("coupling_a must be non-negative".into()));
        }
        if self.coupling_b <= 0.0 {
            return Err(Error::Configuration("coupling_b must be positive".into()));
        }
        if self.radius_r < 0.0 {
            return Err(Error::Configuration("radius_r must be non-negative".into()));
        }
        if self.radius_r >= self.spacing_a {
            return Err(Error::Configuration(format!(
                "radius_r = {} must be smaller than spacing_a = {} (auxiliary waveguide would cross a straight one)",
                self.radius_r, self.spacing_a
            )));
        }
        Ok(())
    }

    pub fn n_aux(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.n_straight - 1,
            Boundary::Ring => self.n_straight,
        }
    }

    /// Total site count `M`.
    pub fn site_count(&self) -> usize {
        self.n_straight + self.n_aux()
    }

    pub fn site(&self, flat: usize) -> Option<SiteIndex> {
        if flat >= self.site_count() {
            return None;
        }
        let kind = if flat % 2 == 0 {
            SiteKind::Straight
        } else {
            SiteKind::Auxiliary
        };
        Some(SiteIndex {
            kind,
            ordinal: flat / 2,
            flat,
        })
    }

    pub fn flat_index(&self, kind: SiteKind, ordinal: usize) -> Option<usize> {
        let (limit, flat) = match kind {
            SiteKind::Straight => (self.n_straight, 2 * ordinal),
            SiteKind::Auxiliary => (self.n_aux(), 2 * ordinal + 1),
        };
        (ordinal < limit).then_some(flat)
    }

    /// Flat indices of the straight waveguides, in order.
    pub fn straight_sites(&self) -> Vec<usize> {
        (0..self.n_straight).map(|s| 2 * s).collect()
    }

    pub fn aux_sites(&self) -> Vec<usize> {
        (0..self.n_aux()).map(|j| 2 * j + 1).collect()
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period_t
    }

    /// `κ(x) = A e^{−b x}`.
    pub fn coupling_strength(&self, distance: f64) -> Result<f64> {
        if !(distance > 0.0) {
            return Err(Error::Domain(format!(
                "coupling distance must be positive, got {distance}"
            )));
        }
        Ok(self.coupling_a * (-self.coupling_b * distance).exp())
    }

    /// Transverse displacement `R sin(Ωz + φ)` of every auxiliary waveguide.
    pub fn aux_offset(&self, z: f64) -> f64 {
        self.radius_r * (self.omega() * z + self.phase_phi).sin()
    }

    /// All straight–auxiliary couplings at `z`.
    pub fn bonds(&self, z: f64) -> Result<Vec<Bond>> {
        let m = self.site_count();
        let offset = self.aux_offset(z);
        let mut bonds = Vec::with_capacity(2 * self.n_aux());
        for j in 0..self.n_aux() {
            let aux = 2 * j + 1;
            let left = 2 * j;
            let right = (2 * j + 2) % m;
            for (straight, distance) in [(left, self.spacing_a + offset), (right, self.spacing_a - offset)] {
                let kappa = self.coupling_strength(distance).map_err(|_| {
                    Error::Configuration(format!(
                        "non-positive gap {distance} between sites {straight} and {aux} at z = {z}"
                    ))
                })?;
                bonds.push(Bond {
                    straight,
                    aux,
                    distance,
                    element: -kappa,
                });
            }
        }
        Ok(bonds)
    }

    /// Dense `M × M` Hamiltonian `H(z)` in flat order.
    pub fn instantaneous_hamiltonian(&self, z: f64) -> Result<Array2<C64>> {
        let m = self.site_count();
        let mut h = Array2::from_diag_elem(m, C64::new(self.onsite_beta0, 0.0));
        for bond in self.bonds(z)? {
            h[[bond.straight, bond.aux]] += bond.element;
            h[[bond.aux, bond.straight]] += bond.element;
        }
        Ok(h)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: SpecDocument =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.lattice.validate()?;
        Ok(doc.lattice)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&SpecDocument {
            lattice: self.clone(),
        })
        .expect("lattice spec is always representable in TOML")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn spec_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("lattice spec serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> LatticeSpec {
        LatticeSpec::default()
    }

    #[test]
    fn coupling_law_values() {
        let s = spec();
        // 13.99 · e^{−8.26 · 0.9}
        let k = s.coupling_strength(0.9).unwrap();
        assert!((k - 8.265_564_819_5e-3).abs() < 1e-12, "{k}");
        assert!(s.coupling_strength(10.0).unwrap() < 1e-30);
        let k2 = s.coupling_strength(1.8).unwrap();
        assert!((k2 - 4.883_456_882_5e-6).abs() < 1e-15, "{k2}");
        assert!(k2 < k * 1e-3);
    }

    #[test]
    fn coupling_rejects_non_positive_distance() {
        assert!(matches!(spec().coupling_strength(0.0), Err(Error::Domain(_))));
        assert!(matches!(spec().coupling_strength(-1.0), Err(Error::Domain(_))));
        assert!(spec().coupling_strength(f64::NAN).is_err());
    }

    #[test]
    fn coupling_strictly_decreasing() {
        let s = spec();
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let k = s.coupling_strength(i as f64 * 0.02).unwrap();
            assert!(k < prev);
            prev = k;
        }
    }

    #[test]
    fn offset_values() {
        let s = spec();
        assert_eq!(s.aux_offset(0.0), 0.0);
        assert!((s.aux_offset(s.period_t / 4.0) - 0.21).abs() < 1e-15);
        let s2 = spec().with_phase(PI / 2.0);
        assert!((s2.aux_offset(0.0) - 0.21).abs() < 1e-15);
    }

    #[test]
    fn two_site_open_structure() {
        let s = spec().with_sites(2);
        let h = s.instantaneous_hamiltonian(3.0).unwrap();
        assert_eq!(h.dim(), (3, 3));
        let off_diagonal = h
            .indexed_iter()
            .filter(|((i, j), v)| i != j && v.norm() > 0.0)
            .count();
        assert_eq!(off_diagonal, 4);
        assert_eq!(h[[0, 2]], C64::new(0.0, 0.0));
    }

    #[test]
    fn symmetric_gaps_at_zero_offset() {
        let s = spec();
        let h = s.instantaneous_hamiltonian(0.0).unwrap();
        for j in 0..s.n_aux() {
            let aux = 2 * j + 1;
            assert_eq!(h[[aux, aux - 1]], h[[aux, aux + 1]]);
        }
    }

    #[test]
    fn hamiltonian_is_real_symmetric_and_periodic() {
        let s = spec().with_phase(0.7).with_boundary(Boundary::Ring);
        for i in 0..13 {
            let z = i as f64 * 3.7;
            let h = s.instantaneous_hamiltonian(z).unwrap();
            let h2 = s.instantaneous_hamiltonian(z + s.period_t).unwrap();
            for ((r, c), v) in h.indexed_iter() {
                assert_eq!(v.im, 0.0);
                assert_eq!(*v, h[[c, r]]);
                assert!((v - h2[[r, c]]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn no_straight_straight_entries() {
        let s = spec().with_boundary(Boundary::Ring);
        let h = s.instantaneous_hamiltonian(5.0).unwrap();
        for a in s.straight_sites() {
            for b in s.straight_sites() {
                if a != b {
                    assert_eq!(h[[a, b]], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn ring_wraps_around() {
        let s = spec().with_sites(4).with_boundary(Boundary::Ring);
        assert_eq!(s.site_count(), 8);
        let h = s.instantaneous_hamiltonian(1.0).unwrap();
        assert!(h[[7, 0]].norm() > 0.0);
        assert!(h[[7, 6]].norm() > 0.0);
    }

    #[test]
    fn site_index_bijection() {
        for boundary in [Boundary::Open, Boundary::Ring] {
            let s = spec().with_sites(5).with_boundary(boundary);
            for flat in 0..s.site_count() {
                let site = s.site(flat).unwrap();
                assert_eq!(s.flat_index(site.kind, site.ordinal), Some(flat));
            }
            assert!(s.site(s.site_count()).is_none());
            assert!(s.flat_index(SiteKind::Straight, 5).is_none());
        }
    }

    #[test]
    fn mirror_maps_couplings() {
        // Mirroring the site order together with φ → π − φ maps the coupling
        // sequence at z onto the original one at z' = −z − T/2.
        let phi = 0.37;
        let s = spec().with_sites(6).with_phase(phi);
        let mirrored = spec().with_sites(6).with_phase(PI - phi);
        let m = s.site_count();
        for i in 0..17 {
            let z = i as f64 * 2.9;
            let h = s.instantaneous_hamiltonian(z).unwrap();
            let hm = mirrored
                .instantaneous_hamiltonian(-z - s.period_t / 2.0)
                .unwrap();
            for r in 0..m {
                for c in 0..m {
                    assert!((h[[r, c]] - hm[[m - 1 - r, m - 1 - c]]).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn validation() {
        assert!(spec().validate().is_ok());
        let mut s = spec();
        s.radius_r = 0.9;
        assert!(matches!(s.validate(), Err(Error::Configuration(_))));
        let mut s = spec();
        s.n_straight = 1;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.period_t = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.coupling_b = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.coupling_a = 0.0;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let s = spec().with_phase(PI / 4.0).with_boundary(Boundary::Ring);
        let text = s.to_toml_string();
        assert!(text.contains("gap_convention = \"straight-to-aux\""));
        assert_eq!(LatticeSpec::from_toml_str(&text).unwrap(), s);

        let partial = "[lattice]\nphase_phi = \"pi/2\"\nn_straight = 30\n";
        let p = LatticeSpec::from_toml_str(partial).unwrap();
        assert_eq!(p.n_straight, 30);
        assert!((p.phase_phi - PI / 2.0).abs() < 1e-15);
        assert_eq!(p.spacing_a, 0.9);

        assert!(LatticeSpec::from_toml_str("[lattice]\nbogus = 1\n").is_err());
        assert!(LatticeSpec::from_toml_str("[lattice]\nradius_r = 2.0\n").is_err());
    }

    #[test]
    fn spec_hash_tracks_content() {
        let a = spec();
        assert_eq!(a.spec_hash(), spec().spec_hash());
        assert_ne!(a.spec_hash(), spec().with_phase(0.1).spec_hash());
        assert_eq!(a.spec_hash().len(), 64);
    }
}
