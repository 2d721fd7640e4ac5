//! Occupation-number Fock space with at most two photons.
//!
//! Used to generate and check the ladder-operator lifts of the extended
//! basis: matrix elements come from the `√n` rule on explicit occupation
//! vectors, with no reference to the extended layout.

use std::collections::HashMap;

use ndarray::Array2;

use crate::pair::ExtendedBasis;
use crate::{Error, Result, C64};

/// Number of photons kept in the truncated space.
pub const MAX_PHOTONS: u8 = 2;

#[derive(Debug, Clone)]
pub struct FockSpace {
    modes: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockSpace {
    /// All occupation vectors on `modes` modes with total photon number ≤ 2,
    /// ordered by photon number and then lexicographically.
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Domain("Fock space needs at least one mode".into()));
        }
        let mut states = vec![vec![0u8; modes]];
        for l in 0..modes {
            let mut occ = vec![0u8; modes];
            occ[l] = 1;
            states.push(occ);
        }
        for n in 0..modes {
            for m in n..modes {
                let mut occ = vec![0u8; modes];
                occ[n] += 1;
                occ[m] += 1;
                states.push(occ);
            }
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self {
            modes,
            states,
            index,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// `a_j` in the occupation basis.
    pub fn annihilation(&self, j: usize) -> Result<Array2<C64>> {
        if j >= self.modes {
            return Err(Error::Domain(format!("mode {j} outside 0..{}", self.modes)));
        }
        let d = self.dimension();
        let mut a = Array2::zeros((d, d));
        for (col, occ) in self.states.iter().enumerate() {
            if occ[j] == 0 {
                continue;
            }
            let mut lowered = occ.clone();
            lowered[j] -= 1;
            let row = self.index[&lowered];
            a[[row, col]] = C64::new((occ[j] as f64).sqrt(), 0.0);
        }
        Ok(a)
    }

    /// `Σ h_{nm} a_n† a_m`, the number-conserving single-particle operator.
    pub fn quadratic(&self, h: &Array2<C64>) -> Result<Array2<C64>> {
        if h.dim() != (self.modes, self.modes) {
            return Err(Error::Domain("single-particle matrix has wrong size".into()));
        }
        let d = self.dimension();
        let ops: Vec<Array2<C64>> = (0..self.modes)
            .map(|j| self.annihilation(j))
            .collect::<Result<_>>()?;
        let mut out = Array2::zeros((d, d));
        for ((n, m), &v) in h.indexed_iter() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let term = crate::linalg::dagger(&ops[n]).dot(&ops[m]);
            out.scaled_add(v, &term);
        }
        Ok(out)
    }

    /// Isometry `J` from the Fock space into the symmetric part of the
    /// extended basis: `|2_n⟩ → |n,n⟩`, `|1_n 1_m⟩ → (|n,m⟩ + |m,n⟩)/√2`.
    pub fn embedding(&self, basis: &ExtendedBasis) -> Result<Array2<C64>> {
        if basis.sites() != self.modes {
            return Err(Error::Domain("basis and Fock space disagree on mode count".into()));
        }
        let mut j = Array2::zeros((basis.dimension(), self.dimension()));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (col, occ) in self.states.iter().enumerate() {
            let occupied: Vec<usize> = occ
                .iter()
                .enumerate()
                .flat_map(|(site, &n)| std::iter::repeat(site).take(n as usize))
                .collect();
            match occupied.as_slice() {
                [] => j[[basis.vacuum(), col]] = C64::new(1.0, 0.0),
                [l] => j[[basis.single(*l), col]] = C64::new(1.0, 0.0),
                [n, m] if n == m => j[[basis.pair(*n, *n), col]] = C64::new(1.0, 0.0),
                [n, m] => {
                    j[[basis.pair(*n, *m), col]] = C64::new(r, 0.0);
                    j[[basis.pair(*m, *n), col]] = C64::new(r, 0.0);
                }
                _ => unreachable!("at most two photons"),
            }
        }
        Ok(j)
    }

    /// `J a_j J†` on the extended basis.
    pub fn extended_annihilation(&self, basis: &ExtendedBasis, j: usize) -> Result<Array2<C64>> {
        let emb = self.embedding(basis)?;
        Ok(emb.dot(&self.annihilation(j)?).dot(&crate::linalg::dagger(&emb)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_counts() {
        for m in 1..6 {
            let f = FockSpace::new(m).unwrap();
            assert_eq!(f.dimension(), 1 + m + m * (m + 1) / 2);
        }
    }

    #[test]
    fn single_mode_ladder() {
        let f = FockSpace::new(1).unwrap();
        let a = f.annihilation(0).unwrap();
        let two = f.index_of(&[2]).unwrap();
        let one = f.index_of(&[1]).unwrap();
        assert!((a[[one, two]].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a[[0, one]], C64::new(1.0, 0.0));
    }

    #[test]
    fn embedding_is_isometric() {
        let f = FockSpace::new(3).unwrap();
        let basis = ExtendedBasis::new(3).unwrap();
        let j = f.embedding(&basis).unwrap();
        let gram = crate::linalg::dagger(&j).dot(&j);
        let eye = crate::linalg::identity(f.dimension());
        assert!(crate::linalg::max_abs(&(gram - eye)) < 1e-15);
    }
}
