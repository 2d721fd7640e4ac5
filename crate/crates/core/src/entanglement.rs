//! Rényi entropies of the one-photon reduced state and overlap measures.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::pair::CorrelationMatrix;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// From the coincidence diagonal only, neglecting coherences.
    Diagonal,
    /// From the full reduced density matrix.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub s2: f64,
    pub estimator: Estimator,
    pub survival_p2: f64,
}

/// `ρ_A = ψ ψ†` for first-quantized symmetric amplitudes `ψ_{ij}`.
pub fn reduced_from_amplitudes(psi: &Array2<C64>) -> Result<Array2<C64>> {
    if !psi.is_square() {
        return Err(Error::Domain("amplitude array must be square".into()));
    }
    Ok(psi.dot(&linalg::dagger(psi)))
}

/// `ρ_A[i,i'] = Σ_j ρ[(i,j),(i',j)]` for a two-photon block on `n` modes.
pub fn reduced_from_block(block: &Array2<C64>, n: usize) -> Result<Array2<C64>> {
    if block.dim() != (n * n, n * n) {
        return Err(Error::Domain(format!("two-photon block must be {0}×{0}", n * n)));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, k)| {
        (0..n).map(|j| block[[i * n + j, k * n + j]]).sum()
    }))
}

fn purity(rho: &Array2<C64>) -> f64 {
    // tr ρ² = Σ |ρ_ij|² for Hermitian ρ
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// `−log tr ρ_A²` for a normalized pure two-photon state.
pub fn renyi2_exact(psi: &Array2<C64>) -> Result<EntropyResult> {
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization(format!("two-photon state has norm² {norm2}")));
    }
    let rho_a = reduced_from_amplitudes(psi)?;
    Ok(EntropyResult {
        s2: -purity(&rho_a).ln(),
        estimator: Estimator::Exact,
        survival_p2: norm2,
    })
}

/// Exact `S₂` of a (possibly mixed) two-photon block, after post-selection.
pub fn renyi2_block(block: &Array2<C64>, n: usize) -> Result<EntropyResult> {
    let tr: f64 = block.diag().iter().map(|z| z.re).sum();
    if !(tr > 0.0) {
        return Err(Error::Normalization("two-photon block has no weight".into()));
    }
    let rho_a = reduced_from_block(block, n)?.mapv(|z| z / tr);
    Ok(EntropyResult {
        s2: -purity(&rho_a).ln(),
        estimator: Estimator::Exact,
        survival_p2: tr,
    })
}

/// `S₂` estimated from coincidences alone:
/// `−log(Σ|β_ii|⁴ + 2Σ f_i|β_ii|² + Σ f_i²)` with `|β_ii|² = w_ii`,
/// `f_i = Σ_{j<i} w_ji` and `w` the normalized unordered-pair weights.
pub fn renyi2_diagonal(gamma: &CorrelationMatrix) -> Result<EntropyResult> {
    for ((r, c), &v) in gamma.gamma.indexed_iter() {
        if !v.is_finite() || v < -1e-12 {
            return Err(Error::Positivity { row: r, col: c, value: v });
        }
    }
    let w = gamma.unordered();
    let total = w.sum();
    if !(total > 0.0) {
        return Err(Error::Normalization("correlation matrix has no weight".into()));
    }
    let n = w.nrows();
    let mut tr = 0.0;
    for i in 0..n {
        let b = w[[i, i]] / total;
        let f: f64 = (0..i).map(|j| w[[j, i]]).sum::<f64>() / total;
        tr += b * b + 2.0 * f * b + f * f;
    }
    Ok(EntropyResult {
        s2: -tr.ln(),
        estimator: Estimator::Diagonal,
        survival_p2: gamma.survival_p2,
    })
}

/// `S_n = log(tr ρⁿ) / (1 − n)` of a density matrix; `n = 1` gives von Neumann.
pub fn renyi(rho: &Array2<C64>, order: f64) -> Result<f64> {
    if !(order > 0.0) || !order.is_finite() {
        return Err(Error::Domain(format!("Rényi order must be positive, got {order}")));
    }
    let tr: f64 = rho.diag().iter().map(|z| z.re).sum();
    if !(tr > 0.0) {
        return Err(Error::Normalization("density matrix has no weight".into()));
    }
    let p: Vec<f64> = linalg::hermitian_eigenvalues(rho)?
        .iter()
        .map(|&v| (v / tr).max(0.0))
        .filter(|&v| v > 0.0)
        .collect();
    if (order - 1.0).abs() < 1e-12 {
        return Ok(-p.iter().map(|v| v * v.ln()).sum::<f64>());
    }
    Ok(p.iter().map(|v| v.powf(order)).sum::<f64>().ln() / (1.0 - order))
}

/// `S₂(asymmetric) − S₂(symmetric)` at the same settings.
pub fn normalized_entropy(s2_asym: f64, s2_sym: f64) -> f64 {
    s2_asym - s2_sym
}

/// `(Σ √(p q))² / (Σp Σq)`.
pub fn similarity_single(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Domain("distributions differ in length".into()));
    }
    if p.iter().chain(q).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain("distributions must be non-negative".into()));
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if !(sp > 0.0 && sq > 0.0) {
        return Err(Error::Domain("distribution has no weight".into()));
    }
    let overlap: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((overlap * overlap / (sp * sq)).min(1.0))
}

pub fn similarity_pair(g1: &CorrelationMatrix, g2: &CorrelationMatrix) -> Result<f64> {
    if g1.size() != g2.size() {
        return Err(Error::Domain("correlation matrices differ in size".into()));
    }
    let a: Vec<f64> = g1.gamma.iter().map(|v| v.max(0.0)).collect();
    let b: Vec<f64> = g2.gamma.iter().map(|v| v.max(0.0)).collect();
    similarity_single(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amplitudes(entries: &[((usize, usize), f64)], n: usize) -> Array2<C64> {
        let mut psi = Array2::zeros((n, n));
        for &((i, j), v) in entries {
            psi[[i, j]] = C64::new(v, 0.0);
        }
        psi
    }

    #[test]
    fn exact_examples() {
        let ln2 = 2f64.ln();
        let s = renyi2_exact(&amplitudes(&[((0, 0), 1.0)], 3)).unwrap();
        assert!(s.s2.abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = renyi2_exact(&amplitudes(&[((0, 0), r), ((1, 1), r)], 3)).unwrap();
        assert!((s.s2 - ln2).abs() < 1e-14);
        let s = renyi2_exact(&amplitudes(&[((0, 1), r), ((1, 0), r)], 3)).unwrap();
        assert!((s.s2 - ln2).abs() < 1e-14);
        assert!(renyi2_exact(&amplitudes(&[((0, 0), 0.5)], 2)).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let mut g = Array2::zeros((3, 3));
        g[[1, 1]] = 1.0;
        let s = renyi2_diagonal(&CorrelationMatrix::new(g).unwrap()).unwrap();
        assert!(s.s2.abs() < 1e-15);
        let mut g = Array2::zeros((3, 3));
        g[[0, 0]] = 0.5;
        g[[1, 1]] = 0.5;
        let s = renyi2_diagonal(&CorrelationMatrix::new(g).unwrap()).unwrap();
        assert!((s.s2 - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn similarity_examples() {
        assert!((similarity_single(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(similarity_single(&[1.0, 0.0], &[0.0, 2.0]).unwrap(), 0.0);
        assert!((similarity_single(&[0.2, 0.8], &[0.2, 0.8]).unwrap() - 1.0).abs() < 1e-15);
        assert!(similarity_single(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn renyi_orders() {
        let rho = Array2::from_diag(&ndarray::array![0.5, 0.25, 0.25]).mapv(|v| C64::new(v, 0.0));
        let s2 = renyi(&rho, 2.0).unwrap();
        assert!((s2 + (0.25f64 + 2.0 * 0.0625).ln()).abs() < 1e-14);
        let s1 = renyi(&rho, 1.0).unwrap();
        assert!((s1 - 1.5 * 2f64.ln()).abs() < 1e-14);
        assert!(renyi(&rho, 0.0).is_err());
    }

    #[test]
    fn block_matches_amplitudes_for_pure_state() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = amplitudes(&[((0, 2), r * 0.6), ((2, 0), r * 0.6), ((1, 1), 0.8)], 3);
        let v = psi.iter().cloned().collect::<ndarray::Array1<C64>>();
        let col = v.view().insert_axis(ndarray::Axis(1));
        let block = col.dot(&col.t().mapv(|z| z.conj()));
        let a = renyi2_exact(&psi).unwrap().s2;
        let b = renyi2_block(&block, 3).unwrap().s2;
        assert!((a - b).abs() < 1e-14);
    }
}
