//! Seeded random generators for points, group elements and measures.
//!
//! Everything draws from a caller-supplied [`rand::Rng`]; the solvers that
//! need randomness seed a [`ChaCha8Rng`] so runs are reproducible across
//! platforms.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::C64;
use crate::measures::DiscreteMeasure;
use crate::model_space::{exp_p, AElement, FieldKind, GroupElement, ModelSpace, PElement, ProjectivePoint};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn gaussian_entry<R: Rng + ?Sized>(kind: FieldKind, rng: &mut R) -> C64 {
    match kind {
        FieldKind::Real => C64::new(gaussian(rng), 0.0),
        FieldKind::Complex => C64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2,
    }
}

/// A point drawn from the `K`-invariant (Fubini-Study) distribution.
pub fn random_point<R: Rng + ?Sized>(model: &ModelSpace, rng: &mut R) -> ProjectivePoint {
    loop {
        let rep = DVector::from_fn(model.ambient_dim(), |_, _| gaussian_entry(model.kind(), rng));
        if let Ok(p) = ProjectivePoint::new(rep) {
            return p;
        }
    }
}

/// A point with every coordinate of modulus at least `floor` (rejection
/// sampling; `floor` must be below `1/√(n+1)`).
pub fn random_full_support_point<R: Rng + ?Sized>(model: &ModelSpace, floor: f64, rng: &mut R) -> ProjectivePoint {
    assert!(floor * floor * (model.ambient_dim() as f64) < 1.0, "unsatisfiable floor");
    loop {
        let p = random_point(model, rng);
        if p.rep().iter().all(|z| z.norm() >= floor) {
            return p;
        }
    }
}

/// A Haar-distributed element of `K` (QR of a Gaussian matrix with the
/// phases of `R` pushed into `Q`, then the determinant normalized).
pub fn random_k<R: Rng + ?Sized>(model: &ModelSpace, rng: &mut R) -> GroupElement {
    let m = model.ambient_dim();
    let z = DMatrix::from_fn(m, m, |_, _| gaussian_entry(model.kind(), rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..m {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..m {
            q[(row, c)] *= phase;
        }
    }
    let det = q.determinant();
    match model.kind() {
        FieldKind::Real => {
            if det.re < 0.0 {
                for row in 0..m {
                    q[(row, 0)] = -q[(row, 0)];
                }
            }
        }
        FieldKind::Complex => {
            let correction = C64::from_polar(1.0, -det.arg() / m as f64);
            q *= correction;
        }
    }
    GroupElement::from_matrix_unchecked(q)
}

/// A permutation matrix in `K` (an odd permutation gets one sign flipped).
pub fn random_permutation<R: Rng + ?Sized>(model: &ModelSpace, rng: &mut R) -> GroupElement {
    let m = model.ambient_dim();
    let mut perm: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    permutation_element(&perm)
}

/// The permutation matrix sending `e_j` to `e_perm[j]`, with the first
/// column negated when needed to land in `SO`.
pub fn permutation_element(perm: &[usize]) -> GroupElement {
    let m = perm.len();
    let mut mat = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    for (j, &i) in perm.iter().enumerate() {
        mat[(i, j)] = C64::new(1.0, 0.0);
    }
    if mat.determinant().re < 0.0 {
        for row in 0..m {
            mat[(row, 0)] = -mat[(row, 0)];
        }
    }
    GroupElement::from_matrix_unchecked(mat)
}

/// A Gaussian element of `p` with entries of standard deviation `scale`
/// in an orthonormal basis.
pub fn random_p<R: Rng + ?Sized>(model: &ModelSpace, scale: f64, rng: &mut R) -> PElement {
    let coords = DVector::from_fn(model.p_dim(), |_, _| scale * gaussian(rng));
    model.p_from_coords(&coords)
}

pub fn random_a<R: Rng + ?Sized>(model: &ModelSpace, scale: f64, rng: &mut R) -> AElement {
    let v = DVector::from_fn(model.ambient_dim(), |_, _| scale * gaussian(rng));
    AElement::project(&v)
}

/// `k exp(α) l` with Haar `k, l` and `α` uniform in the box `[-h, h]`,
/// rescaled so the condition number stays at most `max_condition`.
pub fn random_group<R: Rng + ?Sized>(model: &ModelSpace, max_condition: f64, rng: &mut R) -> GroupElement {
    let m = model.ambient_dim();
    let half = 0.5 * max_condition.ln();
    let raw = DVector::from_fn(m, |_, _| rng.random_range(-half..=half));
    let mut alpha = AElement::project(&raw);
    let spread = alpha.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - alpha.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    let budget = max_condition.ln();
    if spread > budget {
        alpha = &alpha * (budget / spread);
    }
    let k = random_k(model, rng);
    let l = random_k(model, rng);
    k.compose(&exp_p(&alpha.to_p())).compose(&l)
}

/// Weights on the simplex with the largest at most `max_weight`
/// (rejection from a flat Dirichlet). Needs `max_weight > 1/count`.
pub fn random_weights<R: Rng + ?Sized>(count: usize, max_weight: f64, rng: &mut R) -> Vec<f64> {
    assert!(count > 0 && max_weight * count as f64 > 1.0, "unsatisfiable weight cap");
    loop {
        let raw: Vec<f64> = (0..count).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        if w.iter().all(|&x| x < max_weight) {
            return w;
        }
    }
}

/// A measure with `count` atoms whose coordinates all have modulus at least
/// `floor`, and weights capped at `max_weight`.
pub fn random_full_support_measure<R: Rng + ?Sized>(
    model: &ModelSpace,
    count: usize,
    floor: f64,
    max_weight: f64,
    rng: &mut R,
) -> DiscreteMeasure {
    let atoms = (0..count).map(|_| random_full_support_point(model, floor, rng)).collect();
    let weights = random_weights(count, max_weight, rng);
    DiscreteMeasure::normalized(*model, atoms, weights).expect("random measure is valid")
}

/// A measure with `count` Fubini-Study distributed atoms and flat random
/// weights.
pub fn random_measure<R: Rng + ?Sized>(model: &ModelSpace, count: usize, rng: &mut R) -> DiscreteMeasure {
    let atoms = (0..count).map(|_| random_point(model, rng)).collect();
    let weights = random_weights(count, 1.0 + 1e-9, rng);
    DiscreteMeasure::normalized(*model, atoms, weights).expect("random measure is valid")
}

/// A uniformly distributed point of the ball of `radius` in the span of
/// the orthonormal `basis`.
pub fn random_in_ball<R: Rng + ?Sized>(basis: &[AElement], dim: usize, radius: f64, rng: &mut R) -> AElement {
    if basis.is_empty() {
        return AElement::zero(dim);
    }
    let coords: Vec<f64> = basis.iter().map(|_| gaussian(rng)).collect();
    let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / basis.len() as f64);
    let mut out = DVector::zeros(dim);
    if norm > 0.0 {
        for (c, b) in coords.iter().zip(basis) {
            out.axpy(r * c / norm, b.as_vector(), 1.0);
        }
    }
    AElement::project(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_k_lands_in_k() {
        let mut rng = seeded_rng(7);
        for model in [ModelSpace::real(3).unwrap(), ModelSpace::complex(2).unwrap()] {
            for _ in 0..20 {
                let k = random_k(&model, &mut rng);
                assert!(k.is_in_k(1e-12));
                assert_eq!(k.is_real(), model.is_real());
            }
        }
    }

    #[test]
    fn random_group_respects_condition_bound() {
        let mut rng = seeded_rng(3);
        let model = ModelSpace::real(2).unwrap();
        for _ in 0..50 {
            let g = random_group(&model, 1e6, &mut rng);
            let sv = g.matrix().map(|z| z.re).singular_values();
            let cond = sv.max() / sv.min();
            assert!(cond <= 1e6 * (1.0 + 1e-9));
            assert!(sv.iter().map(|s| s.ln()).sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn permutations_are_in_k() {
        let model = ModelSpace::real(3).unwrap();
        let mut rng = seeded_rng(11);
        for _ in 0..10 {
            assert!(random_permutation(&model, &mut rng).is_in_k(1e-15));
        }
    }

    #[test]
    fn weight_cap_is_respected() {
        let mut rng = seeded_rng(5);
        for _ in 0..20 {
            let w = random_weights(5, 0.3, &mut rng);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&x| x < 0.3));
        }
    }
}
