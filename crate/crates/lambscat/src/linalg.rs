//! Small dense linear algebra: cyclic Jacobi eigensolver, pivoted solves,
//! Hermitian Cholesky and a scaling-and-squaring matrix exponential.
//!
//! Everything here targets the small matrices of this crate (n up to a few
//! dozen); flat row-major `Vec` storage throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the orthonormal eigenvectors as
/// columns of `v` (`a = v * diag(w) * v^T`, column j stored at `v[i * n + j]`).
pub fn sym_eigen(a_in: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a_in.len(), n * n);
    let mut a = a_in.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let anorm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-15 * anorm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let w: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vs = vec![0.0; n * n];
    for (jnew, &jold) in order.iter().enumerate() {
        for i in 0..n {
            vs[i * n + jnew] = v[i * n + jold];
        }
    }
    (w, vs)
}

/// Eigenvalues of a complex Hermitian matrix via the real symmetric embedding
/// `[[Re H, -Im H], [Im H, Re H]]` (each eigenvalue of H appears twice).
pub fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(h.len(), n * n);
    let m = 2 * n;
    let mut emb = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            emb[i * m + j] = z.re;
            emb[i * m + (n + j)] = -z.im;
            emb[(n + i) * m + j] = z.im;
            emb[(n + i) * m + (n + j)] = z.re;
        }
    }
    let (w, _) = sym_eigen(&emb, m);
    // doubled spectrum: keep every other value of the sorted list
    w.into_iter().step_by(2).collect()
}

/// Solve `a x = b` by Gaussian elimination with row-equilibrated partial
/// pivoting. Returns the solution and the pivot ratio max|p|/min|p| of the
/// equilibrated elimination (a conditioning indicator).
pub fn solve(a_in: &[f64], b_in: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    assert_eq!(a_in.len(), n * n);
    assert_eq!(b_in.len(), n);
    let mut a = a_in.to_vec();
    let mut b = b_in.to_vec();
    for i in 0..n {
        let rmax = (0..n).map(|j| a[i * n + j].abs()).fold(0.0_f64, f64::max);
        if rmax == 0.0 {
            return Err(Error::SingularSystem);
        }
        for j in 0..n {
            a[i * n + j] /= rmax;
        }
        b[i] /= rmax;
    }
    let mut pmax = 0.0_f64;
    let mut pmin = f64::INFINITY;
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a[i * n + k].abs() > a[piv * n + k].abs() {
                piv = i;
            }
        }
        if a[piv * n + k].abs() == 0.0 {
            return Err(Error::SingularSystem);
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let p = a[k * n + k].abs();
        pmax = pmax.max(p);
        pmin = pmin.min(p);
        for i in (k + 1)..n {
            let f = a[i * n + k] / a[k * n + k];
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s -= a[k * n + j] * x[j];
        }
        x[k] = s / a[k * n + k];
    }
    Ok((x, pmax / pmin))
}

/// Complex LU solve with partial pivoting for a multi-column right-hand side
/// (`b` is n x m row-major, overwritten conceptually; the solution is returned).
pub fn csolve_multi(a_in: &[Complex64], b_in: &[Complex64], n: usize, m: usize) -> Result<Vec<Complex64>> {
    assert_eq!(a_in.len(), n * n);
    assert_eq!(b_in.len(), n * m);
    let mut a = a_in.to_vec();
    let mut b = b_in.to_vec();
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a[i * n + k].norm_sqr() > a[piv * n + k].norm_sqr() {
                piv = i;
            }
        }
        if a[piv * n + k].norm_sqr() == 0.0 {
            return Err(Error::SingularSystem);
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            for j in 0..m {
                b.swap(k * m + j, piv * m + j);
            }
        }
        for i in (k + 1)..n {
            let f = a[i * n + k] / a[k * n + k];
            for j in k..n {
                let akj = a[k * n + j];
                a[i * n + j] -= f * akj;
            }
            for j in 0..m {
                let bkj = b[k * m + j];
                b[i * m + j] -= f * bkj;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n * m];
    for j in 0..m {
        for k in (0..n).rev() {
            let mut s = b[k * m + j];
            for l in (k + 1)..n {
                s -= a[k * n + l] * x[l * m + j];
            }
            x[k * m + j] = s / a[k * n + k];
        }
    }
    Ok(x)
}

/// Cholesky factorization `g = l l^H` of a Hermitian positive-definite matrix.
/// Returns the lower-triangular factor.
pub fn cholesky(g: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    assert_eq!(g.len(), n * n);
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if s.re <= 0.0 || s.im.abs() > 1e-10 * s.re.abs().max(1e-300) {
                    return Err(Error::GramNotPositiveDefinite);
                }
                l[i * n + i] = Complex64::new(s.re.sqrt(), 0.0);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn cmat_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn cmat_one_norm(a: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential `e^a` by scaling-and-squaring with a degree-6 diagonal
/// Pade approximant. Adequate to machine precision for the small dissipative
/// generators handled here.
pub fn expm(a_in: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    assert_eq!(a_in.len(), n * n);
    // coefficients of the [6/6] Pade numerator
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let norm = cmat_one_norm(a_in, n);
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scale = (0.5f64).powi(s as i32);
    let a: Vec<Complex64> = a_in.iter().map(|z| z * scale).collect();

    let a2 = cmat_mul(&a, &a, n);
    let a4 = cmat_mul(&a2, &a2, n);
    let a6 = cmat_mul(&a4, &a2, n);
    let mut even = vec![Complex64::new(0.0, 0.0); n * n];
    let mut odd_poly = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        even[i * n + i] += C[0];
        odd_poly[i * n + i] += C[1];
    }
    for idx in 0..n * n {
        even[idx] += C[2] * a2[idx] + C[4] * a4[idx] + C[6] * a6[idx];
        odd_poly[idx] += C[3] * a2[idx] + C[5] * a4[idx];
    }
    let odd = cmat_mul(&a, &odd_poly, n);
    let p: Vec<Complex64> = even.iter().zip(&odd).map(|(e, o)| e + o).collect();
    let q: Vec<Complex64> = even.iter().zip(&odd).map(|(e, o)| e - o).collect();
    let mut r = csolve_multi(&q, &p, n, n)?;
    for _ in 0..s {
        r = cmat_mul(&r, &r, n);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_symmetric_matrix() {
        // 3x3 with known spectrum: diag(1,2,3) rotated
        let a = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let (w, v) = sym_eigen(&a, 3);
        let sq2 = std::f64::consts::SQRT_2;
        let expect = [2.0 - sq2, 2.0, 2.0 + sq2];
        for (wi, ei) in w.iter().zip(expect.iter()) {
            assert!((wi - ei).abs() < 1e-13, "{wi} vs {ei}");
        }
        // residual ||A v - w v||
        for j in 0..3 {
            for i in 0..3 {
                let mut av = 0.0;
                for k in 0..3 {
                    av += a[i * 3 + k] * v[k * 3 + j];
                }
                assert!((av - w[j] * v[i * 3 + j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = [2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let x_true = [3.0, -2.0, 1.0];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a[i * 3 + j] * x_true[j];
            }
        }
        let (x, ratio) = solve(&a, &b, 3).unwrap();
        for (xi, ti) in x.iter().zip(x_true.iter()) {
            assert!((xi - ti).abs() < 1e-13);
        }
        assert!(ratio >= 1.0);
    }

    #[test]
    fn expm_matches_scalar_and_nilpotent_cases() {
        // scalar
        let r = expm(&[Complex64::new(-0.7, 0.3)], 1).unwrap();
        let e = Complex64::new(-0.7, 0.3).exp();
        assert!((r[0] - e).norm() < 1e-15);
        // 2x2 Jordan block J = [[z,1],[0,z]]: e^J = e^z [[1,1],[0,1]]
        let z = Complex64::new(0.4, -1.1);
        let j = [z, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), z];
        let r = expm(&j, 2).unwrap();
        let ez = z.exp();
        assert!((r[0] - ez).norm() < 1e-13);
        assert!((r[1] - ez).norm() < 1e-13);
        assert!(r[2].norm() < 1e-13);
        assert!((r[3] - ez).norm() < 1e-13);
    }

    #[test]
    fn cholesky_and_hermitian_eigenvalues_agree() {
        let i = Complex64::i();
        // H = [[2, i],[-i, 2]] has eigenvalues 1, 3
        let h = [
            Complex64::new(2.0, 0.0),
            i,
            -i,
            Complex64::new(2.0, 0.0),
        ];
        let w = hermitian_eigenvalues(&h, 2);
        assert!((w[0] - 1.0).abs() < 1e-13);
        assert!((w[1] - 3.0).abs() < 1e-13);
        let l = cholesky(&h, 2).unwrap();
        // l l^H == h
        for i0 in 0..2 {
            for j0 in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    s += l[i0 * 2 + k] * l[j0 * 2 + k].conj();
                }
                assert!((s - h[i0 * 2 + j0]).norm() < 1e-14);
            }
        }
    }
}
