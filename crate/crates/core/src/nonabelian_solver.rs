//! The full group: `F_ν(g) = 𝔉(g·ν)`, balancing by damped Newton steps on
//! `G/K`, finite-difference submersion probes and the affine-hull
//! reduction with recentering.

use nalgebra::{DMatrix, DVector};

use crate::abelian_solver::LEVENBERG_DAMPING;
use crate::convex_oracle::{affine_hull, hull_build, hull_membership, min_norm_point, HullMembership, MAX_HULL_DIM};
use crate::error::{invalid_param, Error, Result};
use crate::linalg::{self, C64};
use crate::measures::{in_w_class, pushforward, DiscreteMeasure};
use crate::model_space::{
    act, cartan_p_part, exp_p, momentum_p, FieldKind, GroupElement, ModelSpace, PElement, ProjectivePoint,
};
use crate::report::{check_tolerances, SolveReport, SolveStatus, TraceEntry};
use crate::sampling;

/// `F_ν(g) = 𝔉(g·ν)`.
pub fn f_nu(nu: &DiscreteMeasure, g: &GroupElement) -> PElement {
    let m = nu.model().ambient_dim();
    let mut acc = DMatrix::from_element(m, m, linalg::ZERO);
    for (x, w) in nu.iter() {
        let y = g.matrix() * x.rep();
        let scale = C64::new(w / y.norm_squared(), 0.0);
        acc += (&y * y.adjoint()) * scale;
    }
    for i in 0..m {
        acc[(i, i)] -= C64::new(1.0 / m as f64, 0.0);
    }
    PElement::project(&acc)
}

/// A balancing iterate `g` and its Cartan component `β` (`g ∈ K exp(β)`),
/// which labels the class `gK`-independent part of the solution.
#[derive(Debug, Clone)]
pub struct BalanceSolution {
    pub group: GroupElement,
    pub cartan_p: PElement,
}

impl BalanceSolution {
    fn new(group: GroupElement) -> Self {
        let cartan_p = cartan_p_part(&group);
        Self { group, cartan_p }
    }
}

#[derive(Debug, Clone)]
pub struct BalanceOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Bound on `‖cartan_p‖` beyond which the iteration is abandoned.
    pub divergence_radius: f64,
    pub start: Option<GroupElement>,
}

impl Default for BalanceOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 500, divergence_radius: 50.0, start: None }
    }
}

pub fn balance(
    nu: &DiscreteMeasure,
    target: &PElement,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport<BalanceSolution>> {
    balance_with(nu, target, &BalanceOptions { tol, max_iter, ..Default::default() })
}

/// Drives `F_ν(g)` to `target` with `g ← exp(s δ)·g`, where `H δ = r`,
/// `r = target − F_ν(g)` and `H` is the Hessian of the Kempf-Ness
/// functional at `g`, which is also the differential of `F_ν` there. `s` is
/// chosen by Armijo backtracking on `½‖r‖²` from `s = 1`.
pub fn balance_with(
    nu: &DiscreteMeasure,
    target: &PElement,
    options: &BalanceOptions,
) -> Result<SolveReport<BalanceSolution>> {
    let BalanceOptions { tol, max_iter, divergence_radius, .. } = *options;
    check_tolerances(tol, max_iter)?;
    let m = nu.model().ambient_dim();
    if target.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: target.dim() });
    }
    if !(divergence_radius > 0.0) {
        return Err(invalid_param("divergence_radius", "must be positive"));
    }
    if !in_closed_hull(target) {
        log::warn!("target lies outside the convex hull of the momentum image");
    }
    let regularity = regularity_proxy(nu, 0);
    if !regularity.regular {
        log::info!(
            "measure fails the regularity proxy (max weight {:.3}, bound {:.3}, nonzero coordinates: {})",
            regularity.max_weight,
            regularity.weight_bound,
            regularity.coordinates_nonzero
        );
    }

    let mut g = match &options.start {
        Some(s) if s.dim() != m => return Err(Error::DimensionMismatch { expected: m, got: s.dim() }),
        Some(s) => s.clone(),
        None => GroupElement::identity(m),
    };
    let mut trace = Vec::new();
    let mut iter = 0;
    let mut f = f_nu(nu, &g);
    let status = loop {
        let r = target - &f;
        let residual = r.norm();
        let solution = BalanceSolution::new(g.clone());
        let escaped = solution.cartan_p.norm() > divergence_radius;
        trace.push(TraceEntry { iterate: solution, residual });
        if residual < tol {
            break SolveStatus::Converged;
        }
        if escaped || iter == max_iter {
            break SolveStatus::NonConvergence;
        }
        iter += 1;

        let delta = newton_direction(nu, &g, &r);
        let slope = -r.inner(&hessian_action(nu, &g, &delta));
        let energy = 0.5 * residual * residual;
        let mut s = 1.0;
        let accepted = loop {
            let trial = exp_p(&(&delta * s)).compose(&g);
            let f_trial = f_nu(nu, &trial);
            let e_trial = 0.5 * (target - &f_trial).norm().powi(2);
            if e_trial <= energy + 1e-4 * s * slope {
                break Some((trial, f_trial));
            }
            s *= 0.5;
            if s < 1e-12 {
                break None;
            }
        };
        match accepted {
            Some((next_g, next_f)) => {
                g = next_g;
                f = next_f;
            }
            None => break SolveStatus::NonConvergence,
        }
    };
    let residual_norm = trace.last().expect("nonempty").residual;
    Ok(SolveReport { status, solution: BalanceSolution::new(g), residual_norm, iterations: iter, trace })
}

/// `H(β, γ) = 2 Σ w (Re⟨βz, γz⟩ − (z*βz)(z*γz))` over the unit
/// representatives `z` of `g·x`, in the coordinates of `p_basis`.
fn kn_hessian(nu: &DiscreteMeasure, g: &GroupElement) -> DMatrix<f64> {
    let basis = nu.model().p_basis();
    let d = basis.len();
    let mut h = DMatrix::zeros(d, d);
    for (x, w) in nu.iter() {
        let z = act(g, x);
        let images: Vec<_> = basis.iter().map(|b| b.matrix() * z.rep()).collect();
        let quads: Vec<f64> = images.iter().map(|bz| z.rep().dotc(bz).re).collect();
        for i in 0..d {
            for j in i..d {
                let v = 2.0 * w * (images[i].dotc(&images[j]).re - quads[i] * quads[j]);
                h[(i, j)] += v;
                if i != j {
                    h[(j, i)] += v;
                }
            }
        }
    }
    h
}

/// The differential of `F_ν` at `g` applied to `δ`.
fn hessian_action(nu: &DiscreteMeasure, g: &GroupElement, delta: &PElement) -> PElement {
    let model = nu.model();
    model.p_from_coords(&(kn_hessian(nu, g) * model.p_coords(delta)))
}

/// Solves `(H + λ‖H‖ I) δ = r`, falling back to `δ = r` when the damped
/// system is not positive definite.
fn newton_direction(nu: &DiscreteMeasure, g: &GroupElement, r: &PElement) -> PElement {
    let model = nu.model();
    let mut h = kn_hessian(nu, g);
    let d = h.nrows();
    let damping = LEVENBERG_DAMPING * h.norm().max(f64::MIN_POSITIVE);
    h += DMatrix::identity(d, d) * damping;
    match h.cholesky() {
        Some(ch) => model.p_from_coords(&ch.solve(&model.p_coords(r))),
        None => r.clone(),
    }
}

/// Whether `β` lies in the convex hull of `μ_p(M)`, i.e. `β + I/(n+1)` is
/// positive semidefinite.
pub fn in_closed_hull(beta: &PElement) -> bool {
    let m = beta.dim() as f64;
    beta.eigenvalues().first().is_none_or(|&l| l >= -1.0 / m - 1e-12)
}

/// Outcome of [`regularity_proxy`].
#[derive(Debug, Clone)]
pub struct RegularityReport {
    /// Every atom has every coordinate nonzero in the standard frame and in
    /// each random `K`-conjugate frame.
    pub coordinates_nonzero: bool,
    pub frames_checked: usize,
    pub max_weight: f64,
    /// `1/(n+1)`: an atom heavier than this cannot be balanced to 0.
    pub weight_bound: f64,
    pub regular: bool,
}

/// Number of random `K`-frames inspected by [`regularity_proxy`].
pub const REGULARITY_FRAMES: usize = 8;

/// A sufficient screen for balanceability: coordinates nonzero in the
/// standard and `8` random `K`-conjugate frames, and no atom heavier than
/// `1/(n+1)`.
pub fn regularity_proxy(nu: &DiscreteMeasure, seed: u64) -> RegularityReport {
    let model = nu.model();
    let mut rng = sampling::seeded_rng(seed);
    let mut coordinates_nonzero = in_w_class(nu);
    for _ in 0..REGULARITY_FRAMES {
        let k = sampling::random_k(model, &mut rng);
        coordinates_nonzero &= in_w_class(&pushforward(&k, nu));
    }
    let max_weight = nu.max_weight();
    let weight_bound = 1.0 / model.ambient_dim() as f64;
    RegularityReport {
        coordinates_nonzero,
        frames_checked: REGULARITY_FRAMES + 1,
        max_weight,
        weight_bound,
        regular: coordinates_nonzero && max_weight <= weight_bound + 1e-12,
    }
}

/// Relative singular-value threshold of [`submersion_rank`].
pub const RANK_TOL: f64 = 1e-7;

/// Numerical rank of `dF_ν` at `g`, from central differences of
/// `F_ν(exp(hβ_j)·g)` over an orthonormal basis of `p`.
pub fn submersion_rank(nu: &DiscreteMeasure, g: &GroupElement, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid_param("h", format!("{h} must be positive and finite")));
    }
    let model = nu.model();
    let basis = model.p_basis();
    let d = basis.len();
    let mut jac = DMatrix::zeros(d, d);
    for (j, beta) in basis.iter().enumerate() {
        let plus = f_nu(nu, &exp_p(&(beta * h)).compose(g));
        let minus = f_nu(nu, &exp_p(&(beta * -h)).compose(g));
        let derivative = &(&plus - &minus) * (0.5 / h);
        for (k, b) in basis.iter().enumerate() {
            jac[(k, j)] = derivative.inner(b);
        }
    }
    let sv = jac.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|s| **s > RANK_TOL * top).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    /// The sampled image spans a proper affine subspace; the centre is its
    /// minimum-norm point `β₀`.
    MinNormShift,
    /// The sampled image is full-dimensional; the centre is the `K`-average
    /// `θ` of its barycenter.
    Barycenter,
}

#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub kind: ReductionKind,
    /// `β₀` or `θ`.
    pub center: PElement,
    /// `−center`, added to every momentum value.
    pub shift: PElement,
    /// Orthonormal basis of `p'`.
    pub subspace_basis: Vec<PElement>,
    pub reduced_dimension: usize,
    /// Position of `0` in the shifted sampled hull inside `p'`; absent when
    /// `p'` is too large for exact hulls.
    pub zero_membership: Option<HullMembership>,
    /// Largest component of a shifted sample orthogonal to `p'`.
    pub orthogonal_residual: f64,
}

/// Samples `μ_p` on the projective span of the support of `ν` (plus the
/// atoms themselves), finds the affine hull `β₀ + p'` of the image and
/// recentres it.
pub fn reduce_and_recenter(nu: &DiscreteMeasure, sample_count: usize, seed: u64) -> Result<ReductionResult> {
    let model = *nu.model();
    let d = model.p_dim();
    if sample_count < d + 1 {
        return Err(invalid_param("sample_count", format!("{sample_count} is below dim p + 1 = {}", d + 1)));
    }
    let mut rng = sampling::seeded_rng(seed);
    let span = support_span(nu);
    let mut points: Vec<ProjectivePoint> = nu.support().cloned().collect();
    for _ in 0..sample_count {
        points.push(random_point_in_span(&model, &span, &mut rng));
    }
    let coords: Vec<DVector<f64>> = points.iter().map(|x| model.p_coords(&momentum_p(x))).collect();
    let (centroid, basis) = affine_hull(&coords);
    let rank = basis.len();
    if rank == 0 {
        return Err(Error::DegenerateSampling);
    }

    let (kind, center) = if rank < d {
        let mnp = min_norm_point(&coords)?;
        (ReductionKind::MinNormShift, model.p_from_coords(&mnp.point))
    } else {
        (ReductionKind::Barycenter, k_average(&model, &model.p_from_coords(&centroid)))
    };
    let center_coords = model.p_coords(&center);
    let shifted: Vec<DVector<f64>> = coords.iter().map(|c| c - &center_coords).collect();

    let orthogonal_residual = shifted
        .iter()
        .map(|c| {
            let mut r = c.clone();
            for b in &basis {
                let t = r.dot(b);
                r.axpy(-t, b, 1.0);
            }
            r.norm()
        })
        .fold(0.0, f64::max);

    let zero_membership = if rank <= MAX_HULL_DIM {
        let local: Vec<DVector<f64>> =
            shifted.iter().map(|c| DVector::from_iterator(rank, basis.iter().map(|b| b.dot(c)))).collect();
        let body = hull_build(&local, rank)?;
        Some(hull_membership(&DVector::zeros(rank), &body, 1e-10)?)
    } else {
        None
    };

    Ok(ReductionResult {
        kind,
        shift: -&center,
        center,
        subspace_basis: basis.iter().map(|b| model.p_from_coords(b)).collect(),
        reduced_dimension: rank,
        zero_membership,
        orthogonal_residual,
    })
}

/// Orthonormal basis (columns) of the linear span of the atom
/// representatives.
fn support_span(nu: &DiscreteMeasure) -> DMatrix<C64> {
    let m = nu.model().ambient_dim();
    let atoms: Vec<&ProjectivePoint> = nu.support().collect();
    let reps = DMatrix::from_fn(m, atoms.len(), |r, c| atoms[c].rep()[r]);
    let gram = &reps * reps.adjoint();
    let (values, vectors) = linalg::hermitian_eigen(&gram);
    let top = values.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..m).filter(|&i| values[i] > 1e-12 * top).collect();
    DMatrix::from_fn(m, keep.len(), |r, c| vectors[(r, keep[c])])
}

fn random_point_in_span<R: rand::Rng + ?Sized>(
    model: &ModelSpace,
    span: &DMatrix<C64>,
    rng: &mut R,
) -> ProjectivePoint {
    let k = span.ncols();
    let sub = ModelSpace::new(model.kind(), k.max(2) - 1).expect("k ≥ 1");
    loop {
        let c = sampling::random_point(&sub, rng);
        let coeffs = DVector::from_fn(k, |i, _| c.rep()[i]);
        let rep = span * coeffs;
        let rep = match model.kind() {
            FieldKind::Real => rep.map(|z| C64::new(z.re, 0.0)),
            FieldKind::Complex => rep,
        };
        if let Ok(p) = ProjectivePoint::new(rep) {
            return p;
        }
    }
}

/// Haar average `∫_K Ad(k) β dk`: the orthogonal projection of `β` onto the
/// `K`-fixed vectors of `p`, i.e. those commuting with every element of `k`.
pub fn k_average(model: &ModelSpace, beta: &PElement) -> PElement {
    let basis = model.p_basis();
    let m = model.ambient_dim();
    let generators = k_basis(model);
    let rows = generators.len() * m * m * 2;
    let mut map = DMatrix::zeros(rows.max(1), basis.len());
    for (j, b) in basis.iter().enumerate() {
        let mut row = 0;
        for xi in &generators {
            let bracket = b.matrix() * xi - xi * b.matrix();
            for z in bracket.iter() {
                map[(row, j)] = z.re;
                map[(row + 1, j)] = z.im;
                row += 2;
            }
        }
    }
    let (_, values, v) = linalg::jacobi_svd(&map);
    let top = values.first().copied().unwrap_or(0.0);
    let coords = model.p_coords(beta);
    let mut projected = DVector::zeros(basis.len());
    for (i, s) in values.iter().enumerate() {
        if *s <= 1e-10 * top.max(1.0) {
            let kernel = v.column(i);
            projected.axpy(kernel.dot(&coords), &kernel, 1.0);
        }
    }
    model.p_from_coords(&projected)
}

/// Basis of the Lie algebra of `K`: `so(n+1)` or `su(n+1)`.
fn k_basis(model: &ModelSpace) -> Vec<DMatrix<C64>> {
    let m = model.ambient_dim();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let mut a = DMatrix::from_element(m, m, linalg::ZERO);
            a[(i, j)] = C64::new(1.0, 0.0);
            a[(j, i)] = C64::new(-1.0, 0.0);
            out.push(a);
        }
    }
    if model.kind() == FieldKind::Complex {
        let i_unit = C64::new(0.0, 1.0);
        out.extend(model.p_basis().iter().map(|b| b.matrix() * i_unit));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::gradient_f;
    use crate::model_space::AElement;

    fn point(c: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_real(c).unwrap()
    }

    fn generic_rp2() -> DiscreteMeasure {
        DiscreteMeasure::normalized(
            ModelSpace::real(2).unwrap(),
            vec![point(&[1.0, 0.5, 0.3]), point(&[-0.2, 1.0, 0.4]), point(&[0.3, -0.6, 1.0])],
            vec![1.0; 3],
        )
        .unwrap()
    }

    #[test]
    fn f_nu_examples() {
        let nu = generic_rp2();
        let id = GroupElement::identity(3);
        assert!((&f_nu(&nu, &id) - &gradient_f(&nu)).norm() < 1e-15);

        let mut rng = sampling::seeded_rng(3);
        let g = sampling::random_group(nu.model(), 50.0, &mut rng);
        let direct = gradient_f(&pushforward(&g, &nu));
        assert!((&f_nu(&nu, &g) - &direct).norm() < 1e-13);

        let uniform = DiscreteMeasure::vertex_uniform(*nu.model());
        let k = sampling::random_permutation(nu.model(), &mut rng);
        assert!(f_nu(&uniform, &k).norm() < 1e-15);
    }

    #[test]
    fn balanced_measure_needs_no_iterations() {
        let nu = DiscreteMeasure::vertex_uniform(ModelSpace::real(3).unwrap());
        let report = balance(&nu, &PElement::zero(4), 1e-8, 500).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert_eq!(report.iterations, 0);
        assert!(report.solution.cartan_p.norm() < 1e-12);
    }

    #[test]
    fn generic_three_atoms_balance() {
        let nu = generic_rp2();
        let report = balance(&nu, &PElement::zero(3), 1e-9, 500).unwrap();
        assert_eq!(report.status, SolveStatus::Converged, "residual {}", report.residual_norm);
        assert!(f_nu(&nu, &report.solution.group).norm() < 1e-9);
        let residuals: Vec<f64> = report.trace.iter().map(|t| t.residual).collect();
        assert!(residuals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn heavy_atom_does_not_balance() {
        let model = ModelSpace::complex(1).unwrap();
        let nu = DiscreteMeasure::new(
            model,
            vec![
                ProjectivePoint::from_complex(&[C64::new(1.0, 0.0), C64::new(0.3, 0.2)]).unwrap(),
                ProjectivePoint::from_complex(&[C64::new(0.2, -0.5), C64::new(1.0, 0.0)]).unwrap(),
            ],
            vec![0.6, 0.4],
        )
        .unwrap();
        assert!(!regularity_proxy(&nu, 0).regular);
        let report = balance(&nu, &PElement::zero(2), 1e-8, 500).unwrap();
        assert_eq!(report.status, SolveStatus::NonConvergence);
        assert!(report.residual_norm > 0.1);
    }

    #[test]
    fn closed_hull_test() {
        assert!(in_closed_hull(&PElement::zero(3)));
        let vertex = momentum_p(&point(&[1.0, 0.0, 0.0]));
        assert!(in_closed_hull(&vertex));
        assert!(!in_closed_hull(&(&vertex * 1.1)));
    }

    #[test]
    fn submersion_rank_examples() {
        let model = ModelSpace::real(1).unwrap();
        let nu = DiscreteMeasure::normalized(
            model,
            vec![point(&[1.0, 1.0]), point(&[2.0, 1.0]), point(&[1.0, 3.0])],
            vec![1.0; 3],
        )
        .unwrap();
        assert_eq!(submersion_rank(&nu, &model.identity(), 1e-5).unwrap(), 2);
        let dirac = DiscreteMeasure::dirac(model, point(&[1.0, 0.0])).unwrap();
        assert!(submersion_rank(&dirac, &model.identity(), 1e-5).unwrap() < 2);
        assert!(submersion_rank(&nu, &model.identity(), 0.0).is_err());
    }

    #[test]
    fn k_average_of_full_p_vanishes() {
        let mut rng = sampling::seeded_rng(8);
        for model in [ModelSpace::real(2).unwrap(), ModelSpace::complex(2).unwrap()] {
            let beta = sampling::random_p(&model, 1.0, &mut rng);
            assert!(k_average(&model, &beta).norm() < 1e-12);
        }
    }

    #[test]
    fn reduction_of_a_line_in_the_plane() {
        let model = ModelSpace::real(2).unwrap();
        let nu =
            DiscreteMeasure::normalized(model, vec![point(&[1.0, 0.2, 0.0]), point(&[-0.3, 1.0, 0.0])], vec![0.5, 0.5])
                .unwrap();
        let red = reduce_and_recenter(&nu, 300, 1).unwrap();
        assert_eq!(red.kind, ReductionKind::MinNormShift);
        assert_eq!(red.reduced_dimension, 2);
        let expected = AElement::from_slice(&[1.0 / 6.0, 1.0 / 6.0, -1.0 / 3.0]).unwrap().to_p();
        assert!((&red.center - &expected).norm() < 1e-12);
        assert!(red.orthogonal_residual < 1e-12);
        assert_eq!(red.zero_membership.unwrap().verdict, crate::convex_oracle::Verdict::Interior);
    }

    #[test]
    fn reduction_of_vertex_uniform_is_centered() {
        let nu = DiscreteMeasure::vertex_uniform(ModelSpace::real(2).unwrap());
        let red = reduce_and_recenter(&nu, 200, 0).unwrap();
        assert_eq!(red.kind, ReductionKind::Barycenter);
        assert_eq!(red.reduced_dimension, 5);
        assert!(red.shift.norm() < 1e-12);
        assert!(reduce_and_recenter(&nu, 3, 0).is_err());
    }

    #[test]
    fn single_atom_is_degenerate() {
        let nu = DiscreteMeasure::dirac(ModelSpace::real(2).unwrap(), point(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(reduce_and_recenter(&nu, 10, 0).unwrap_err(), Error::DegenerateSampling);
    }
}
