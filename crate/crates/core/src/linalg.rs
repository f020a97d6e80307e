//! Small dense kernels shared by the operator and process code.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

/// Eigenvalues of a Hermitian `n × n` matrix stored row-major, ascending.
///
/// Only the Hermitian part `(H + H†)/2` is used. The matrix is embedded as the
/// real symmetric `[[X, -Y], [Y, X]]` (with `H = X + iY`), whose spectrum is
/// the spectrum of `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues(n: usize, entries: &[Complex64]) -> Vec<f64> {
    assert_eq!(entries.len(), n * n, "entries must be n x n");
    if n == 0 {
        return Vec::new();
    }
    let size = 2 * n;
    let mut sym = vec![0.0; size * size];
    for r in 0..n {
        for c in 0..n {
            let h = (entries[r * n + c] + entries[c * n + r].conj()) * 0.5;
            sym[r * size + c] = h.re;
            sym[(r + n) * size + (c + n)] = h.re;
            sym[r * size + (c + n)] = -h.im;
            sym[(r + n) * size + c] = h.im;
        }
    }
    let mut eig = symmetric_eigenvalues(size, &mut sym);
    eig.sort_by(|a, b| a.total_cmp(b));
    eig.into_iter().step_by(2).collect()
}

/// Eigenvalues of a real symmetric matrix (unsorted). `a` is destroyed.
pub fn symmetric_eigenvalues(n: usize, a: &mut [f64]) -> Vec<f64> {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, a, &mut d, &mut e);
    tridiagonal_ql(&mut d, &mut e);
    d
}

// Householder reduction to tridiagonal form, eigenvalue-only variant.
fn tridiagonalize(n: usize, a: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[at(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[at(i, l)];
            } else {
                for k in 0..=l {
                    a[at(i, k)] /= scale;
                    h += a[at(i, k)] * a[at(i, k)];
                }
                let f = a[at(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[at(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[at(j, k)] * a[at(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[at(k, j)] * a[at(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[at(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[at(j, k)] -= f * e[k] + g * a[at(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[at(i, l)];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[at(i, i)];
    }
}

// Implicit QL with Wilkinson-style shifts on a symmetric tridiagonal matrix.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    if n < 2 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                // Converged as far as double precision allows.
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Solves `a x = b` for square `a` (row-major) by Gaussian elimination with
/// partial pivoting. Returns `None` when `a` is numerically singular.
pub fn solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-14 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = ((row + 1)..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Some(x)
}

/// Kronecker product of two row-major square matrices.
pub fn kron(a_dim: usize, a: &[Complex64], b_dim: usize, b: &[Complex64]) -> Vec<Complex64> {
    let dim = a_dim * b_dim;
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for ar in 0..a_dim {
        for ac in 0..a_dim {
            let x = a[ar * a_dim + ac];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for br in 0..b_dim {
                let row = (ar * b_dim + br) * dim + ac * b_dim;
                let src = &b[br * b_dim..(br + 1) * b_dim];
                for (o, &y) in out[row..row + b_dim].iter_mut().zip(src) {
                    *o = x * y;
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_real_symmetric() {
        let m = [c(0.75, 0.0), c(0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0)];
        let eig = hermitian_eigenvalues(2, &m);
        // 0.5 ± sqrt(0.0625 + 0.0625)
        let r = (0.125f64).sqrt();
        assert!((eig[0] - (0.5 - r)).abs() < 1e-14);
        assert!((eig[1] - (0.5 + r)).abs() < 1e-14);
    }

    #[test]
    fn pauli_y_has_unit_spectrum() {
        let y = [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)];
        let eig = hermitian_eigenvalues(2, &y);
        assert!((eig[0] + 1.0).abs() < 1e-14);
        assert!((eig[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_spectrum_is_sorted_diagonal() {
        let n = 5;
        let mut m = vec![c(0.0, 0.0); n * n];
        let vals = [3.0, -1.0, 0.5, 2.0, 0.0];
        for (i, v) in vals.iter().enumerate() {
            m[i * n + i] = c(*v, 0.0);
        }
        let eig = hermitian_eigenvalues(n, &m);
        assert_eq!(eig, vec![-1.0, 0.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn eigenvalue_sum_matches_trace() {
        let n = 6;
        let mut m = vec![c(0.0, 0.0); n * n];
        for r in 0..n {
            for col in r..n {
                let v = c(
                    (r * 7 + col * 3) as f64 % 5.0 - 2.0,
                    if r == col {
                        0.0
                    } else {
                        (r + col) as f64 * 0.1
                    },
                );
                m[r * n + col] = v;
                m[col * n + r] = v.conj();
            }
        }
        let eig = hermitian_eigenvalues(n, &m);
        let tr: f64 = (0..n).map(|i| m[i * n + i].re).sum();
        let tr2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        assert!((eig.iter().sum::<f64>() - tr).abs() < 1e-12);
        assert!((eig.iter().map(|x| x * x).sum::<f64>() - tr2).abs() < 1e-10);
    }

    #[test]
    fn solve_small_system() {
        let x = solve(2, vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
        assert!(solve(2, vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn kron_of_identities() {
        let i2 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let k = kron(2, &i2, 2, &i2);
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(k[r * 4 + col], c(if r == col { 1.0 } else { 0.0 }, 0.0));
            }
        }
    }
}
