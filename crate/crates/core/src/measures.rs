//! Finitely supported probability measures on a projective model, the
//! pushforward action of `G`, and the gradient maps `𝔉` and `𝔉_a`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model_space::{
    act, momentum_a, momentum_p, AElement, GroupElement, ModelSpace, PElement, ProjectivePoint, COMPONENT_TOL,
    POINT_MERGE_TOL,
};

/// Tolerance on `|Σ w − 1|` accepted by [`DiscreteMeasure::new`].
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// `Σ w_i δ_{x_i}` with distinct atoms and nonnegative weights summing to 1.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    model: ModelSpace,
    atoms: Vec<ProjectivePoint>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates the measure. Atoms closer than
    /// [`POINT_MERGE_TOL`] are merged into the first occurrence (their
    /// weights added); weights are otherwise kept bit-for-bit.
    pub fn new(model: ModelSpace, atoms: Vec<ProjectivePoint>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("a measure needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!("{} atoms but {} weights", atoms.len(), weights.len())));
        }
        for x in &atoms {
            model.check_point(x)?;
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidInput(format!("invalid weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() >= WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self::merged(model, atoms, weights))
    }

    /// Divides `weights` by their sum before validating.
    pub fn normalized(model: ModelSpace, atoms: Vec<ProjectivePoint>, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidInput(format!("weights sum to {sum}")));
        }
        Self::new(model, atoms, weights.iter().map(|w| w / sum).collect())
    }

    pub fn dirac(model: ModelSpace, x: ProjectivePoint) -> Result<Self> {
        Self::new(model, vec![x], vec![1.0])
    }

    /// Uniform weights on the `n + 1` coordinate vertices.
    pub fn vertex_uniform(model: ModelSpace) -> Self {
        let m = model.ambient_dim();
        let atoms = (0..m).map(|i| model.vertex(i)).collect();
        Self { model, atoms, weights: vec![1.0 / m as f64; m] }
    }

    fn merged(model: ModelSpace, atoms: Vec<ProjectivePoint>, weights: Vec<f64>) -> Self {
        let groups = duplicate_groups(&atoms);
        if groups.iter().all(|g| g.len() == 1) {
            return Self { model, atoms, weights };
        }
        let mut out_atoms = Vec::with_capacity(groups.len());
        let mut out_weights = Vec::with_capacity(groups.len());
        for group in groups {
            out_atoms.push(atoms[group[0]].clone());
            out_weights.push(group.iter().map(|&i| weights[i]).sum());
        }
        Self { model, atoms: out_atoms, weights: out_weights }
    }

    pub fn model(&self) -> &ModelSpace {
        &self.model
    }

    pub fn atoms(&self) -> &[ProjectivePoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProjectivePoint, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    /// Atoms carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = &ProjectivePoint> {
        self.iter().filter(|(_, w)| *w > 0.0).map(|(x, _)| x)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// `∫ h dν`.
    pub fn integrate<F: Fn(&ProjectivePoint) -> f64>(&self, h: F) -> f64 {
        self.iter().map(|(x, w)| w * h(x)).sum()
    }
}

/// Groups of atom indices that are the same projective point, each group
/// listed in order of first occurrence. Atoms are sorted by a continuous
/// phase-invariant key so only key-neighbours are compared.
fn duplicate_groups(atoms: &[ProjectivePoint]) -> Vec<Vec<usize>> {
    let m = atoms.first().map_or(0, ProjectivePoint::len);
    // |key(x) − key(y)| ≤ 2‖c‖·dist(x, y)
    let coeffs: Vec<f64> = (0..m).map(|i| 1.0 + ((i + 2) as f64).sqrt().fract()).collect();
    let window = 2.0 * coeffs.iter().map(|c| c * c).sum::<f64>().sqrt() * POINT_MERGE_TOL;
    let keys: Vec<f64> = atoms.iter().map(|x| x.weights().zip(&coeffs).map(|(w, c)| w * c).sum()).collect();
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));

    let mut parent: Vec<usize> = (0..atoms.len()).collect();
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if keys[j] - keys[i] > window {
                break;
            }
            if atoms[i].same_point(&atoms[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; atoms.len()];
    for i in 0..atoms.len() {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// `g · ν`: atoms moved by `g`, weights unchanged.
pub fn pushforward(g: &GroupElement, nu: &DiscreteMeasure) -> DiscreteMeasure {
    let atoms = nu.atoms.iter().map(|x| act(g, x)).collect();
    DiscreteMeasure::merged(nu.model, atoms, nu.weights.clone())
}

/// `𝔉(ν) = Σ w_i μ_p(x_i)`.
pub fn gradient_f(nu: &DiscreteMeasure) -> PElement {
    let m = nu.model.ambient_dim();
    let mut acc = PElement::zero(m);
    for (x, w) in nu.iter() {
        acc = &acc + &(&momentum_p(x) * w);
    }
    acc
}

/// `𝔉_a(ν) = Σ w_i μ_a(x_i)`.
pub fn gradient_f_torus(nu: &DiscreteMeasure) -> AElement {
    let m = nu.model.ambient_dim();
    let mut acc = DVector::zeros(m);
    for (x, w) in nu.iter() {
        acc.axpy(w, momentum_a(x).as_vector(), 1.0);
    }
    AElement::from_vector_unchecked(acc)
}

/// Orthonormal basis of `a_ν = {β ∈ a : β_M = 0 on supp ν}`.
///
/// `β_M(x) = 0` exactly when `β` is constant on the coordinate support of
/// `x`, so coordinates sharing an atom are merged with union-find and `a_ν`
/// is the traceless part of the functions constant on the merged classes.
pub fn isotropy_algebra_torus(nu: &DiscreteMeasure) -> Vec<AElement> {
    let m = nu.model.ambient_dim();
    let mut parent: Vec<usize> = (0..m).collect();
    for x in nu.support() {
        let support: Vec<usize> = (0..m).filter(|&i| x.rep()[i].norm() > COMPONENT_TOL).collect();
        for pair in support.windows(2) {
            let (a, b) = (find(&mut parent, pair[0]), find(&mut parent, pair[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; m];
    for i in 0..m {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = classes.len();
            classes.push(Vec::new());
        }
        classes[slot[root]].push(i);
    }
    let mean_free: Vec<DVector<f64>> = classes
        .iter()
        .map(|class| {
            let indicator = DVector::from_fn(m, |i, _| if class.contains(&i) { 1.0 } else { 0.0 });
            AElement::project(&indicator).as_vector().clone()
        })
        .collect();
    linalg::orthonormalize(&mean_free, 1e-9).into_iter().map(AElement::from_vector_unchecked).collect()
}

/// Orthonormal basis of `a_ν^⊥` inside `a`.
pub fn isotropy_complement(nu: &DiscreteMeasure) -> Vec<AElement> {
    complement_in_a(nu.model(), &isotropy_algebra_torus(nu))
}

pub(crate) fn complement_in_a(model: &ModelSpace, basis: &[AElement]) -> Vec<AElement> {
    let mut vectors: Vec<DVector<f64>> = basis.iter().map(|b| b.as_vector().clone()).collect();
    let k = vectors.len();
    vectors.extend(model.a_basis().iter().map(|b| b.as_vector().clone()));
    linalg::orthonormalize(&vectors, 1e-9).into_iter().skip(k).map(AElement::from_vector_unchecked).collect()
}

/// Whether `ν ∈ 𝒲(M, A)` for the diagonal torus: every atom lies in the
/// open top stratum for every `β ∈ a`, i.e. has no zero coordinate.
pub fn in_w_class(nu: &DiscreteMeasure) -> bool {
    nu.support().all(|x| x.rep().iter().all(|z| z.norm() > COMPONENT_TOL))
}

/// Total variation `sup_{|h| ≤ 1} ∫ h d(ν₁ − ν₂)`, i.e. the ℓ¹ norm of the
/// signed weight difference with atoms matched as projective points.
pub fn tv_norm_diff(nu1: &DiscreteMeasure, nu2: &DiscreteMeasure) -> f64 {
    let mut atoms: Vec<ProjectivePoint> = nu1.atoms.clone();
    atoms.extend(nu2.atoms.iter().cloned());
    let signed: Vec<f64> = nu1.weights.iter().copied().chain(nu2.weights.iter().map(|w| -w)).collect();
    duplicate_groups(&atoms).iter().map(|g| g.iter().map(|&i| signed[i]).sum::<f64>().abs()).sum()
}

/// Exact check helper: the pushforward of `ν` by the one-parameter
/// subgroup of `β ∈ a_ν` fixes every atom.
pub fn fixes_atoms(g: &GroupElement, nu: &DiscreteMeasure, tol: f64) -> bool {
    nu.support().all(|x| act(g, x).distance(x) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::exp_p;
    use crate::sampling;

    fn rp(n: usize) -> ModelSpace {
        ModelSpace::real(n).unwrap()
    }

    fn point(c: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_real(c).unwrap()
    }

    #[test]
    fn construction_validates_and_merges() {
        let model = rp(1);
        assert!(DiscreteMeasure::new(model, vec![point(&[1.0, 0.0])], vec![0.9]).is_err());
        assert!(DiscreteMeasure::new(model, vec![point(&[1.0, 0.0])], vec![-1.0]).is_err());
        assert!(DiscreteMeasure::new(model, vec![point(&[1.0, 0.0, 0.0])], vec![1.0]).is_err());
        let nu = DiscreteMeasure::new(
            model,
            vec![point(&[1.0, 0.0]), point(&[0.0, 1.0]), point(&[-1.0, 0.0])],
            vec![0.25, 0.5, 0.25],
        )
        .unwrap();
        assert_eq!(nu.len(), 2);
        assert_eq!(nu.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn pushforward_identity_and_dirac() {
        let model = rp(2);
        let mut rng = sampling::seeded_rng(1);
        let nu = sampling::random_measure(&model, 5, &mut rng);
        let same = pushforward(&model.identity(), &nu);
        assert_eq!(tv_norm_diff(&nu, &same), 0.0);

        let x = sampling::random_point(&model, &mut rng);
        let g = sampling::random_group(&model, 100.0, &mut rng);
        let moved = pushforward(&g, &DiscreteMeasure::dirac(model, x.clone()).unwrap());
        assert!(moved.atoms()[0].same_point(&act(&g, &x)));
    }

    #[test]
    fn gradient_of_vertex_measures() {
        for n in 1..=4 {
            let nu = DiscreteMeasure::vertex_uniform(rp(n));
            assert!(gradient_f(&nu).norm() < 1e-15);
            assert!(gradient_f_torus(&nu).norm() < 1e-15);
        }
        let nu = DiscreteMeasure::new(rp(1), vec![point(&[1.0, 0.0]), point(&[0.0, 1.0])], vec![0.75, 0.25]).unwrap();
        let f = gradient_f(&nu);
        let expected = AElement::from_slice(&[0.25, -0.25]).unwrap();
        assert!((&f - &expected.to_p()).norm() < 1e-15);
        assert!((&gradient_f_torus(&nu) - &expected).norm() < 1e-15);
    }

    #[test]
    fn torus_gradient_is_diagonal_of_gradient() {
        let model = ModelSpace::complex(2).unwrap();
        let mut rng = sampling::seeded_rng(9);
        let nu = sampling::random_measure(&model, 7, &mut rng);
        assert!((&gradient_f(&nu).diagonal() - &gradient_f_torus(&nu)).norm() < 1e-15);
    }

    #[test]
    fn isotropy_examples() {
        let two_vertices =
            DiscreteMeasure::new(rp(1), vec![point(&[1.0, 0.0]), point(&[0.0, 1.0])], vec![0.5, 0.5]).unwrap();
        let basis = isotropy_algebra_torus(&two_vertices);
        assert_eq!(basis.len(), 1);
        let expected = std::f64::consts::FRAC_1_SQRT_2;
        assert!((basis[0].as_slice()[0].abs() - expected).abs() < 1e-15);

        let generic = DiscreteMeasure::dirac(rp(2), point(&[1.0, 2.0, 3.0])).unwrap();
        assert!(isotropy_algebra_torus(&generic).is_empty());

        let mixed = DiscreteMeasure::new(rp(2), vec![point(&[1.0, 1.0, 0.0]), point(&[0.0, 0.0, 1.0])], vec![0.5, 0.5])
            .unwrap();
        let basis = isotropy_algebra_torus(&mixed);
        assert_eq!(basis.len(), 1);
        let b = basis[0].as_slice();
        let s = b[0] / 1.0;
        assert!((b[1] - s).abs() < 1e-15 && (b[2] + 2.0 * s).abs() < 1e-15);
    }

    #[test]
    fn isotropy_directions_fix_the_measure() {
        let mixed = DiscreteMeasure::new(rp(2), vec![point(&[1.0, 1.0, 0.0]), point(&[0.0, 0.0, 1.0])], vec![0.3, 0.7])
            .unwrap();
        for b in isotropy_algebra_torus(&mixed) {
            for t in [-3.0, 0.5, 7.0] {
                let g = exp_p(&(&b * t).to_p());
                assert!(fixes_atoms(&g, &mixed, 1e-12));
                assert!(tv_norm_diff(&pushforward(&g, &mixed), &mixed) < 1e-15);
            }
        }
    }

    #[test]
    fn w_class_examples() {
        let with_vertex =
            DiscreteMeasure::new(rp(1), vec![point(&[1.0, 0.0]), point(&[1.0, 1.0])], vec![0.5, 0.5]).unwrap();
        assert!(!in_w_class(&with_vertex));
        let generic =
            DiscreteMeasure::new(rp(1), vec![point(&[0.3, 1.0]), point(&[1.0, -0.2])], vec![0.5, 0.5]).unwrap();
        assert!(in_w_class(&generic));
    }

    #[test]
    fn total_variation_examples() {
        let x = point(&[1.0, 0.0]);
        let y = point(&[0.6, 0.8]);
        let dx = DiscreteMeasure::dirac(rp(1), x.clone()).unwrap();
        let dy = DiscreteMeasure::dirac(rp(1), y.clone()).unwrap();
        assert_eq!(tv_norm_diff(&dx, &dx), 0.0);
        assert_eq!(tv_norm_diff(&dx, &dy), 2.0);
        let half = DiscreteMeasure::new(rp(1), vec![x, y], vec![0.5, 0.5]).unwrap();
        assert!((tv_norm_diff(&half, &dx) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicate_detection_handles_many_atoms() {
        let model = rp(2);
        let mut rng = sampling::seeded_rng(2);
        let atoms: Vec<_> = (0..2000).map(|_| sampling::random_point(&model, &mut rng)).collect();
        let mut doubled = atoms.clone();
        doubled.extend(atoms.iter().map(|x| ProjectivePoint::new(-x.rep().clone()).unwrap()));
        let weights = vec![1.0 / 4000.0; 4000];
        let nu = DiscreteMeasure::normalized(model, doubled, weights).unwrap();
        assert_eq!(nu.len(), 2000);
    }
}
