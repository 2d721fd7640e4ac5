//! Brute-force bosonic reference: every mode truncated at two photons and
//! the full tensor product `3^M` kept. Used only for verification.

use ndarray::{Array1, Array2};
use skinwalk::lattice::LatticeSpec;
use skinwalk::pair::ExtendedBasis;
use skinwalk::{linalg, C64};

const LOCAL: usize = 3;

#[derive(Debug, Clone)]
pub struct TensorFock {
    modes: usize,
}

impl TensorFock {
    pub fn new(modes: usize) -> Self {
        assert!((1..=6).contains(&modes), "tensor oracle limited to 1..=6 modes");
        Self { modes }
    }

    pub fn dimension(&self) -> usize {
        LOCAL.pow(self.modes as u32)
    }

    /// Occupation of every mode, mode 0 most significant.
    pub fn occupation(&self, index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes];
        let mut rest = index;
        for slot in occ.iter_mut().rev() {
            *slot = rest % LOCAL;
            rest /= LOCAL;
        }
        occ
    }

    pub fn index(&self, occupation: &[usize]) -> usize {
        occupation.iter().fold(0, |acc, &n| acc * LOCAL + n)
    }

    /// `I ⊗ … ⊗ a ⊗ … ⊗ I` with the truncated local `a`.
    pub fn annihilation(&self, j: usize) -> Array2<C64> {
        let mut local = Array2::zeros((LOCAL, LOCAL));
        local[[0, 1]] = C64::new(1.0, 0.0);
        local[[1, 2]] = C64::new(2f64.sqrt(), 0.0);
        let mut out = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for mode in 0..self.modes {
            let factor = if mode == j { local.clone() } else { linalg::identity(LOCAL) };
            out = linalg::kron(&out, &factor);
        }
        out
    }

    /// `a_i† a_j` for every pair, row-major in `(i, j)`.
    fn hopping_operators(&self) -> Vec<Array2<C64>> {
        let ops: Vec<Array2<C64>> = (0..self.modes).map(|j| self.annihilation(j)).collect();
        let mut out = Vec::with_capacity(self.modes * self.modes);
        for i in 0..self.modes {
            for j in 0..self.modes {
                out.push(linalg::dagger(&ops[i]).dot(&ops[j]));
            }
        }
        out
    }

    fn assemble(&self, hopping: &[Array2<C64>], h: &Array2<C64>) -> Array2<C64> {
        let d = self.dimension();
        let mut out = Array2::zeros((d, d));
        for ((i, j), &v) in h.indexed_iter() {
            if v.norm() > 0.0 {
                out.scaled_add(v, &hopping[i * self.modes + j]);
            }
        }
        out
    }

    /// `Σ h_ij a_i† a_j`.
    pub fn quadratic(&self, h: &Array2<C64>) -> Array2<C64> {
        self.assemble(&self.hopping_operators(), h)
    }

    /// Map from the tensor space into the extended basis; states with more
    /// than two photons map to zero.
    pub fn embedding(&self, basis: &ExtendedBasis) -> Array2<C64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut j = Array2::zeros((basis.dimension(), self.dimension()));
        for col in 0..self.dimension() {
            let occ = self.occupation(col);
            let mut sites = Vec::new();
            for (s, &n) in occ.iter().enumerate() {
                sites.extend(std::iter::repeat(s).take(n));
            }
            match sites.as_slice() {
                [] => j[[basis.vacuum(), col]] = C64::new(1.0, 0.0),
                [l] => j[[basis.single(*l), col]] = C64::new(1.0, 0.0),
                [n, m] if n == m => j[[basis.pair(*n, *n), col]] = C64::new(1.0, 0.0),
                [n, m] => {
                    j[[basis.pair(*n, *m), col]] = C64::new(r, 0.0);
                    j[[basis.pair(*m, *n), col]] = C64::new(r, 0.0);
                }
                _ => {}
            }
        }
        j
    }

    /// One-period many-body propagator by RK4 on `dU/dz = −i H_F(z) U`.
    pub fn period_propagator(&self, spec: &LatticeSpec, steps: usize) -> skinwalk::Result<Array2<C64>> {
        let d = self.dimension();
        let h = spec.period_t / steps as f64;
        let minus_i = C64::new(0.0, -1.0);
        let hopping = self.hopping_operators();
        let rhs = |z: f64, u: &Array2<C64>| -> skinwalk::Result<Array2<C64>> {
            let hf = self.assemble(&hopping, &spec.instantaneous_hamiltonian(z)?);
            Ok(hf.dot(u).mapv(|v| v * minus_i))
        };
        let mut u = linalg::identity(d);
        for s in 0..steps {
            let z = s as f64 * h;
            let k1 = rhs(z, &u)?;
            let k2 = rhs(z + h / 2.0, &(&u + &k1.mapv(|v| v * (h / 2.0))))?;
            let k3 = rhs(z + h / 2.0, &(&u + &k2.mapv(|v| v * (h / 2.0))))?;
            let k4 = rhs(z + h, &(&u + &k3.mapv(|v| v * h)))?;
            let incr = k1 + &k2.mapv(|v| v * 2.0) + &k3.mapv(|v| v * 2.0) + &k4;
            u.scaled_add(C64::new(h / 6.0, 0.0), &incr);
        }
        Ok(u)
    }

    /// Trace out the lossy modes and put them back in vacuum.
    pub fn empty_modes(&self, rho: &Array2<C64>, lossy: &[usize]) -> Array2<C64> {
        let d = self.dimension();
        let mut out = Array2::zeros((d, d));
        for r in 0..d {
            let mut occ_r = self.occupation(r);
            if lossy.iter().any(|&a| occ_r[a] != 0) {
                continue;
            }
            for c in 0..d {
                let mut occ_c = self.occupation(c);
                if lossy.iter().any(|&a| occ_c[a] != 0) {
                    continue;
                }
                let mut acc = C64::new(0.0, 0.0);
                for env in 0..LOCAL.pow(lossy.len() as u32) {
                    let mut e = env;
                    for &a in lossy {
                        occ_r[a] = e % LOCAL;
                        occ_c[a] = e % LOCAL;
                        e /= LOCAL;
                    }
                    acc += rho[[self.index(&occ_r), self.index(&occ_c)]];
                }
                for &a in lossy {
                    occ_r[a] = 0;
                    occ_c[a] = 0;
                }
                out[[r, c]] = acc;
            }
        }
        out
    }

    /// `|1_n 1_m⟩` (or `|2_n⟩`) as a tensor-space vector.
    pub fn two_photon(&self, n: usize, m: usize) -> Array1<C64> {
        let mut occ = vec![0; self.modes];
        occ[n] += 1;
        occ[m] += 1;
        let mut v = Array1::zeros(self.dimension());
        v[self.index(&occ)] = C64::new(1.0, 0.0);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_on_low_occupations() {
        let f = TensorFock::new(2);
        let a = f.annihilation(0);
        let comm = a.dot(&linalg::dagger(&a)) - linalg::dagger(&a).dot(&a);
        // [a, a†] = 1 except on the truncated top level
        for i in 0..f.dimension() {
            let expect = if f.occupation(i)[0] == 2 { -2.0 } else { 1.0 };
            assert!((comm[[i, i]].re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_is_isometric_on_two_photons() {
        let f = TensorFock::new(3);
        let basis = ExtendedBasis::new(3).unwrap();
        let j = f.embedding(&basis);
        let gram = linalg::dagger(&j).dot(&j);
        for i in 0..f.dimension() {
            let photons: usize = f.occupation(i).iter().sum();
            let expect = if photons <= 2 { 1.0 } else { 0.0 };
            assert!((gram[[i, i]].re - expect).abs() < 1e-12);
        }
    }
}
