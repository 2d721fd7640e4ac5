//! Dense complex linear-algebra helpers on top of `ndarray-linalg`.
//!
//! LAPACK covers factorizations and eigenproblems. The matrix exponential and
//! logarithm are implemented here because LAPACK has neither.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, EigVals, Eigh, Inverse, SVD, UPLO};

use crate::{Error, Result, C64};

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), &x) in a.indexed_iter() {
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
            .assign(&b.mapv(|y| x * y));
    }
    out
}

pub fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(a: &Array2<C64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vector_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A − A†‖_F / ‖A‖_F`, zero for the zero matrix.
pub fn hermiticity_residual(a: &Array2<C64>) -> f64 {
    let scale = frobenius(a);
    if scale == 0.0 {
        return 0.0;
    }
    frobenius(&(a - &dagger(a))) / scale
}

pub fn inverse(a: &Array2<C64>) -> Result<Array2<C64>> {
    a.inv().map_err(Error::from)
}

pub fn eigenvalues(a: &Array2<C64>) -> Result<Array1<C64>> {
    a.eigvals().map_err(Error::from)
}

/// Right eigenvectors as columns.
pub fn eigen(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    a.eig().map_err(Error::from)
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Result<Array1<f64>> {
    let sym = (a + &dagger(a)).mapv(|z| z * 0.5);
    let (vals, _) = sym.eigh(UPLO::Upper)?;
    Ok(vals)
}

pub fn singular_values(a: &Array2<C64>) -> Result<Array1<f64>> {
    let (_, s, _) = a.svd(false, false)?;
    Ok(s)
}

/// 2-norm condition number.
pub fn condition_number(a: &Array2<C64>) -> Result<f64> {
    let s = singular_values(a)?;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings));
    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..=40 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        sum = sum + &term;
        if norm1(&term) <= 1e-18 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

/// Principal square root by the Denman–Beavers iteration.
pub fn sqrtm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = identity(n);
    for _ in 0..100 {
        let y_inv = inverse(&y)?;
        let z_inv = inverse(&z)?;
        let y_next = (&y + &z_inv).mapv(|v| v * 0.5);
        let z_next = (&z + &y_inv).mapv(|v| v * 0.5);
        let delta = norm1(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * norm1(&y) {
            return Ok(y);
        }
    }
    Err(Error::Conditioning {
        what: "square-root iteration did not converge".into(),
        condition: condition_number(a).unwrap_or(f64::INFINITY),
        residual: f64::NAN,
    })
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots are taken until `‖A − I‖₁ ≤ 1/4`, then the series
/// `log A = 2 Σ_{k odd} Z^k / k` with `Z = (A − I)(A + I)⁻¹` is summed.
/// Requires no eigenvalue on the closed negative real axis.
pub fn logm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let eye = identity(n);
    let mut y = a.clone();
    let mut roots = 0;
    while norm1(&(&y - &eye)) > 0.25 {
        if roots == 64 {
            return Err(Error::Conditioning {
                what: "matrix logarithm: too many square roots".into(),
                condition: condition_number(a).unwrap_or(f64::INFINITY),
                residual: f64::NAN,
            });
        }
        y = sqrtm(&y)?;
        roots += 1;
    }
    let z = (&y - &eye).dot(&inverse(&(&y + &eye))?);
    let z2 = z.dot(&z);
    let mut power = z.clone();
    let mut sum = z;
    for k in (3..200).step_by(2) {
        power = power.dot(&z2);
        let term = power.mapv(|v| v / k as f64);
        sum = sum + &term;
        if norm1(&term) <= 1e-18 * norm1(&sum).max(1e-300) {
            break;
        }
    }
    let scale = 2f64.powi(roots + 1);
    Ok(sum.mapv(|v| v * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expm_of_diagonal() {
        let a = array![[c(0.3, 0.1), c(0.0, 0.0)], [c(0.0, 0.0), c(-2.0, 5.0)]];
        let e = expm(&a);
        assert!((e[[0, 0]] - c(0.3, 0.1).exp()).norm() < 1e-14);
        assert!((e[[1, 1]] - c(-2.0, 5.0).exp()).norm() < 1e-13);
        assert!(e[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn expm_of_nilpotent() {
        let a = array![[c(0.0, 0.0), c(3.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let e = expm(&a);
        assert!((e[[0, 1]] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((e[[0, 0]] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rotation_generator() {
        // exp(θ [[0, -1], [1, 0]]) is a rotation by θ.
        let theta = 2.5;
        let a = array![[c(0.0, 0.0), c(-theta, 0.0)], [c(theta, 0.0), c(0.0, 0.0)]];
        let e = expm(&a);
        assert!((e[[0, 0]].re - theta.cos()).abs() < 1e-13);
        assert!((e[[1, 0]].re - theta.sin()).abs() < 1e-13);
    }

    #[test]
    fn logm_inverts_expm() {
        let a = array![
            [c(0.1, -0.4), c(0.2, 0.05), c(0.0, 0.0)],
            [c(-0.3, 0.0), c(-0.2, 0.3), c(0.1, 0.1)],
            [c(0.05, 0.0), c(0.0, -0.2), c(-0.5, 0.0)]
        ];
        let back = logm(&expm(&a)).unwrap();
        assert!(max_abs(&(&back - &a)) < 1e-12, "{back}");
    }

    #[test]
    fn logm_of_identity_is_zero() {
        assert!(max_abs(&logm(&identity(4)).unwrap()) < 1e-15);
    }

    #[test]
    fn sqrtm_squares_back() {
        let a = array![[c(4.0, 1.0), c(1.0, 0.0)], [c(0.5, 0.0), c(2.0, -1.0)]];
        let r = sqrtm(&a).unwrap();
        assert!(max_abs(&(r.dot(&r) - &a)) < 1e-12);
    }

    #[test]
    fn kron_blocks() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]];
        let b = identity(2);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[[0, 2]], c(2.0, 0.0));
        assert_eq!(k[[3, 3]], c(0.0, 1.0));
        assert_eq!(k[[1, 0]], c(0.0, 0.0));
    }

    #[test]
    fn hermiticity_residual_detects_antihermitian() {
        let h = array![[c(1.0, 0.0), c(0.0, 2.0)], [c(0.0, -2.0), c(3.0, 0.0)]];
        assert!(hermiticity_residual(&h) < 1e-16);
        let ah = h.mapv(|z| z * C64::i());
        assert!(hermiticity_residual(&ah) > 1.9);
    }
}
