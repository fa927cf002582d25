//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by implicit QL iteration (the classical tred2/tql2 pair).
//!
//! Eigenvectors are kept column-major so that the plane rotations of the QL
//! sweep and the accumulation of Householder reflectors walk contiguous
//! memory.

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues in ascending order with (optionally) orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column-major `n × n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Option<Vec<f64>>,
}

/// Largest `|A_ij − A_ji|` of a row-major square matrix.
pub fn symmetry_defect(a: &[f64], n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[i * n + j] - a[j * n + i]).abs());
        }
    }
    worst
}

/// Full eigendecomposition of a symmetric row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    decompose(a, n, true)
}

/// Eigenvalues only; skips the `O(n³)` vector accumulation.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    decompose(a, n, false).map(|e| e.values)
}

fn decompose(a: &[f64], n: usize, want_vectors: bool) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            actual: a.len(),
        });
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    // Row-major symmetric input read as column-major is the same matrix; the
    // lower triangle is what the reduction uses.
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, n, &mut d, &mut e, want_vectors);
    ql_implicit(&mut d, &mut e, want_vectors.then_some(&mut v[..]), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: ties keep the order in which QL delivered them.
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut out = vec![0.0; n * n];
        for (dst, &src) in order.iter().enumerate() {
            out[dst * n..(dst + 1) * n].copy_from_slice(&v[src * n..(src + 1) * n]);
        }
        out
    });
    Ok(SymmetricEigen { values, vectors })
}

/// Householder tridiagonalization. On exit `d` holds the diagonal, `e[1..]`
/// the subdiagonal, and (if requested) `v` the accumulated orthogonal factor
/// in column-major layout.
fn tridiagonalize(v: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    // Element (row, col) of the column-major working matrix.
    macro_rules! at {
        ($r:expr, $c:expr) => {
            v[($c) * n + ($r)]
        };
    }

    for j in 0..n {
        d[j] = at!(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = at!(i - 1, j);
                at!(i, j) = 0.0;
                at!(j, i) = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                at!(j, i) = f;
                let mut g = e[j] + at!(j, j) * f;
                for k in (j + 1)..i {
                    let vkj = at!(k, j);
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut v[j * n..j * n + i];
                for (k, slot) in col.iter_mut().enumerate().skip(j) {
                    *slot -= f * e[k] + g * d[k];
                }
                d[j] = at!(i - 1, j);
                at!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = v[j * n + j];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        at!(n - 1, i) = at!(i, i);
        at!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = at!(k, i + 1) / h;
            }
            for j in 0..=i {
                let (left, right) = v.split_at_mut((i + 1) * n);
                let householder = &right[..=i];
                let col = &mut left[j * n..j * n + i + 1];
                let g: f64 = householder.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                for (slot, dk) in col.iter_mut().zip(d.iter()) {
                    *slot -= g * dk;
                }
            }
        }
        for k in 0..=i {
            at!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = at!(n - 1, j);
        at!(n - 1, j) = 0.0;
    }
    at!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

/// Implicit QL with Wilkinson-type shifts on the tridiagonal `(d, e)`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut v: Option<&mut [f64]>, n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(Error::NoConvergence {
                        index: l,
                        iterations,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(v) = v.as_deref_mut() {
                        let (left, right) = v.split_at_mut((i + 1) * n);
                        let col_i = &mut left[i * n..];
                        let col_next = &mut right[..n];
                        for (a, b) in col_i.iter_mut().zip(col_next.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct_error(a: &[f64], n: usize, eig: &SymmetricEigen) -> f64 {
        let q = eig.vectors.as_ref().unwrap();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| q[k * n + i] * eig.values[k] * q[k * n + j]).sum();
                worst = worst.max((s - a[i * n + j]).abs());
            }
        }
        worst
    }

    #[test]
    fn three_by_three_fixture() {
        let r2 = std::f64::consts::SQRT_2;
        let a = [6.0, -r2, 0.0, -r2, 3.0, -r2, 0.0, -r2, 6.0];
        let eig = symmetric_eigen(&a, 3).unwrap();
        for (got, want) in eig.values.iter().zip([2.0, 6.0, 7.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(reconstruct_error(&a, 3, &eig) < 1e-13);
        let only = symmetric_eigenvalues(&a, 3).unwrap();
        for (x, y) in only.iter().zip(&eig.values) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_and_trivial_sizes() {
        let eig = symmetric_eigen(&[5.0], 1).unwrap();
        assert_eq!(eig.values, vec![5.0]);
        assert_eq!(eig.vectors.unwrap(), vec![1.0]);
        let a = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let eig = symmetric_eigen(&a, 3).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        assert!(symmetric_eigen(&[], 0).unwrap().values.is_empty());
    }

    #[test]
    fn matches_nalgebra_on_pseudorandom_matrices() {
        for (n, seed) in [(5usize, 1u64), (17, 2), (40, 3)] {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let x = next();
                    a[i * n + j] = x;
                    a[j * n + i] = x;
                }
            }
            let ours = symmetric_eigen(&a, n).unwrap();
            let m = nalgebra::DMatrix::from_row_slice(n, n, &a);
            let mut theirs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.values.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-12, "n={n}: {x} vs {y}");
            }
            assert!(reconstruct_error(&a, n, &ours) < 1e-12);
            let q = ours.vectors.as_ref().unwrap();
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|k| q[i * n + k] * q[j * n + k]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - target).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let a = [1.0, 2.0, 2.5, 1.0];
        assert_eq!(symmetry_defect(&a, 2), 0.5);
    }
}
