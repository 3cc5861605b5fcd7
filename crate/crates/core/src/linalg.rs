//! Small dense kernels shared by the model types. Matrices are stored over
//! the complex numbers; real models keep zero imaginary parts and are routed
//! through the real decompositions so their factors stay real.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

pub type C64 = Complex<f64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub(crate) fn is_real_matrix(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub(crate) fn is_real_vector(v: &DVector<C64>) -> bool {
    v.iter().all(|z| z.im == 0.0)
}

pub(crate) fn real_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub(crate) fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching unitary eigenvector matrix (columns).
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let (values, vectors) = if is_real_matrix(m) {
        let eig = real_part(m).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), complexify(&eig.eigenvectors))
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| vectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}

/// One-sided Jacobi SVD `a = u diag(s) v*` with `u` of the shape of `a`,
/// `v` square and `s` sorted descending. Singular values are accurate
/// relative to themselves, not only to `‖a‖`. Columns of `u` belonging to
/// zero singular values are zero.
pub(crate) fn jacobi_svd<T>(a: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let cols = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<T>::identity(cols, cols);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.modulus();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // rotate a_p and ē·a_q, which have the real inner product |γ|
                let phase = gamma.conjugate().unscale(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let xp = m[(r, p)];
                        let xq = m[(r, q)] * phase;
                        m[(r, p)] = xp.scale(c) - xq.scale(s);
                        m[(r, q)] = xp.scale(s) + xq.scale(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let u = DMatrix::from_fn(w.nrows(), cols, |r, c| {
        let j = order[c];
        if norms[j] > 0.0 {
            w[(r, j)].unscale(norms[j])
        } else {
            T::zero()
        }
    });
    let v = DMatrix::from_fn(cols, cols, |r, c| v[(r, order[c])]);
    (u, order.iter().map(|&j| norms[j]).collect(), v)
}

const JACOBI_SWEEPS: usize = 80;

/// Singular value decomposition `m = u diag(s) v*` of a square matrix with
/// `s` sorted descending.
pub(crate) fn svd_sorted(m: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>, DMatrix<C64>) {
    if is_real_matrix(m) {
        let (u, s, v) = jacobi_svd(&real_part(m));
        (complexify(&u), s, complexify(&v))
    } else {
        jacobi_svd(m)
    }
}

pub(crate) fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormalizes `vectors` by modified Gram-Schmidt (two passes),
/// dropping those whose residual falls below `tol` times their norm.
pub(crate) fn orthonormalize(vectors: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = r.dot(b);
                r.axpy(-c, b, 1.0);
            }
        }
        let norm = r.norm();
        if norm > tol * scale {
            basis.push(r / norm);
        }
    }
    basis
}

/// Numerically stable `log(sum(exp(x)))` over the finite entries of `x`.
pub(crate) fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + x.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
