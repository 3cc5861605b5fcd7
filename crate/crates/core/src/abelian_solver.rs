//! The torus picture: the integrated Kempf-Ness functional `f`, Newton
//! inversion of `α ↦ 𝔉_a(exp(α)·ν)`, the momentum polytope `P` and the
//! affine subspace containing an orbit image.

use nalgebra::{DMatrix, DVector};

use crate::convex_oracle::{ConvexBody, Facet};
use crate::error::{invalid_param, Result};
use crate::linalg;
use crate::measures::{complement_in_a, gradient_f_torus, isotropy_algebra_torus, DiscreteMeasure};
use crate::model_space::{AElement, ModelSpace};
use crate::report::{check_tolerances, SolveReport, SolveStatus, TraceEntry};
use crate::sampling;

/// How much of `f` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum KnOrder {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone)]
pub struct KnEvaluation {
    pub value: f64,
    /// `𝔉_a(exp(α)·ν)` projected onto `a_ν^⊥`.
    pub gradient: Option<AElement>,
    /// `2 Σ w (diag p − p pᵀ)` compressed to the trace-zero subspace.
    pub hessian: Option<DMatrix<f64>>,
}

struct RawKn {
    value: f64,
    image: DVector<f64>,
    hessian: Option<DMatrix<f64>>,
}

fn raw_kn(nu: &DiscreteMeasure, alpha: &DVector<f64>, order: KnOrder) -> RawKn {
    let m = alpha.len();
    let mut value = 0.0;
    let mut image = DVector::from_element(m, -1.0 / m as f64);
    let mut hessian = (order == KnOrder::Hessian).then(|| DMatrix::zeros(m, m));
    let mut logits = vec![0.0; m];
    for (x, w) in nu.iter() {
        for (i, l) in logits.iter_mut().enumerate() {
            *l = x.rep()[i].norm_sqr().ln() + 2.0 * alpha[i];
        }
        let lse = linalg::log_sum_exp(&logits);
        value += w * 0.5 * lse;
        if order == KnOrder::Value {
            continue;
        }
        let p = DVector::from_iterator(m, logits.iter().map(|l| (l - lse).exp()));
        image.axpy(w, &p, 1.0);
        if let Some(h) = hessian.as_mut() {
            for i in 0..m {
                h[(i, i)] += 2.0 * w * p[i];
            }
            h.ger(-2.0 * w, &p, &p, 1.0);
        }
    }
    if let Some(h) = hessian.as_mut() {
        let centering = DMatrix::identity(m, m) - DMatrix::from_element(m, m, 1.0 / m as f64);
        *h = &centering * &*h * &centering;
    }
    RawKn { value, image, hessian }
}

fn remove_components(v: &DVector<f64>, basis: &[AElement]) -> DVector<f64> {
    let mut out = v.clone();
    for b in basis {
        let c = out.dot(b.as_vector());
        out.axpy(-c, b.as_vector(), 1.0);
    }
    out
}

/// `f(α) = Σ w_i Ψ(x_i, exp α)` and, on request, its gradient and Hessian.
pub fn integrated_kn(nu: &DiscreteMeasure, alpha: &AElement, order: KnOrder) -> KnEvaluation {
    let raw = raw_kn(nu, alpha.as_vector(), order);
    let gradient = (order >= KnOrder::Gradient).then(|| {
        let isotropy = isotropy_algebra_torus(nu);
        AElement::project(&remove_components(&raw.image, &isotropy))
    });
    KnEvaluation { value: raw.value, gradient, hessian: raw.hessian }
}

/// `𝔉_a(exp(α)·ν)`, evaluated without forming the pushed-forward measure.
pub fn torus_image(nu: &DiscreteMeasure, alpha: &AElement) -> AElement {
    AElement::project(&raw_kn(nu, alpha.as_vector(), KnOrder::Gradient).image)
}

/// Parameters of [`solve_torus_target_with`].
#[derive(Debug, Clone)]
pub struct TorusSolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// `‖α‖` beyond which the target is declared unreachable.
    pub divergence_radius: f64,
    /// Starting point; the origin when absent.
    pub start: Option<AElement>,
}

impl Default for TorusSolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 500, divergence_radius: 50.0, start: None }
    }
}

/// Levenberg damping, relative to the norm of the reduced Hessian.
pub const LEVENBERG_DAMPING: f64 = 1e-10;
pub const ARMIJO_C: f64 = 1e-4;
pub const ARMIJO_SHRINK: f64 = 0.5;
/// Relative Newton step size below which the iterates count as settled.
pub const STEP_TOL: f64 = 1e-9;

/// Finds `α` with `𝔉_a(exp(α)·ν) = target` by damped Newton on
/// `f(α) − <target, α>` restricted to `a_ν^⊥`.
pub fn solve_torus_target(
    nu: &DiscreteMeasure,
    target: &AElement,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport<AElement>> {
    solve_torus_target_with(nu, target, &TorusSolveOptions { tol, max_iter, ..Default::default() })
}

pub fn solve_torus_target_with(
    nu: &DiscreteMeasure,
    target: &AElement,
    options: &TorusSolveOptions,
) -> Result<SolveReport<AElement>> {
    let TorusSolveOptions { tol, max_iter, divergence_radius, .. } = *options;
    check_tolerances(tol, max_iter)?;
    let m = nu.model().ambient_dim();
    if target.len() != m {
        return Err(crate::Error::DimensionMismatch { expected: m, got: target.len() });
    }
    if !(divergence_radius > 0.0) {
        return Err(invalid_param("divergence_radius", "must be positive"));
    }
    let start = match &options.start {
        Some(s) if s.len() != m => return Err(crate::Error::DimensionMismatch { expected: m, got: s.len() }),
        Some(s) => s.clone(),
        None => AElement::zero(m),
    };

    let component = affine_component(nu);
    let q = &component.direction_basis;
    let target_v = target.as_vector();
    let along_isotropy = remove_components(target_v, q) - component.offset.as_vector();
    let target_perp = AElement::project(&(target_v - remove_components(target_v, q)));

    let mut alpha = start.as_vector().clone();
    let mut trace = Vec::new();
    let off = along_isotropy.norm();
    if off > tol {
        let residual = (torus_image(nu, &start).as_vector() - target_v).norm();
        trace.push(TraceEntry { iterate: start.clone(), residual });
        return Ok(SolveReport {
            status: SolveStatus::TargetUnreachable,
            solution: start,
            residual_norm: residual,
            iterations: 0,
            trace,
        });
    }

    let phi = |a: &DVector<f64>, value: f64| value - target_perp.as_vector().dot(a);
    let mut iter = 0;
    let status = loop {
        let raw = raw_kn(nu, &alpha, KnOrder::Hessian);
        let diff = &raw.image - target_v;
        let residual = diff.norm();
        trace.push(TraceEntry { iterate: AElement::from_vector_unchecked(alpha.clone()), residual });
        if alpha.norm() > divergence_radius {
            break SolveStatus::TargetUnreachable;
        }
        if q.is_empty() {
            break if residual < tol { SolveStatus::Converged } else { SolveStatus::MaxIterations };
        }

        let k = q.len();
        let qm = DMatrix::from_fn(m, k, |r, c| q[c].as_vector()[r]);
        let grad = qm.transpose() * &diff;
        let mut hess = qm.transpose() * raw.hessian.as_ref().expect("requested") * &qm;
        let damping = LEVENBERG_DAMPING * hess.norm().max(f64::MIN_POSITIVE);
        hess += DMatrix::identity(k, k) * damping;
        let step = match hess.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        // converged: small residual and a settled Newton step
        if residual < tol && step.norm() <= STEP_TOL * (1.0 + alpha.norm()) {
            break SolveStatus::Converged;
        }
        if iter == max_iter {
            break SolveStatus::MaxIterations;
        }
        iter += 1;
        let direction = &qm * &step;
        let slope = grad.dot(&step);
        let phi0 = phi(&alpha, raw.value);
        let grad_norm = grad.norm();

        let mut s = 1.0;
        let accepted = loop {
            let trial = &alpha + &direction * s;
            let trial_raw = raw_kn(nu, &trial, KnOrder::Gradient);
            let phi_trial = phi(&trial, trial_raw.value);
            if phi_trial <= phi0 + ARMIJO_C * s * slope {
                break Some(trial);
            }
            // φ is flat to roundoff: fall back to gradient decrease
            if (phi_trial - phi0).abs() <= 1e-13 * (1.0 + phi0.abs()) {
                let trial_grad = (qm.transpose() * (&trial_raw.image - target_v)).norm();
                if trial_grad < grad_norm {
                    break Some(trial);
                }
            }
            s *= ARMIJO_SHRINK;
            if s < 1e-12 {
                break None;
            }
        };
        match accepted {
            Some(next) => alpha = next,
            None if residual < tol => break SolveStatus::Converged,
            None => break SolveStatus::MaxIterations,
        }
    };
    let residual_norm = trace.last().expect("nonempty").residual;
    Ok(SolveReport { status, solution: AElement::from_vector_unchecked(alpha), residual_norm, iterations: iter, trace })
}

/// The momentum polytope `P = μ_a(M)`: the simplex spanned by the images
/// `e_i − 𝟙/(n+1)` of the torus fixed points.
#[allow(non_snake_case)]
pub fn polytope_P(model: &ModelSpace) -> ConvexBody {
    let m = model.ambient_dim();
    let inv = 1.0 / m as f64;
    let vertices: Vec<DVector<f64>> =
        (0..m).map(|i| DVector::from_fn(m, |j, _| if i == j { 1.0 - inv } else { -inv })).collect();
    let length = (1.0 - inv).sqrt();
    let facets = vertices.iter().map(|v| Facet { normal: -v / length, offset: inv / length }).collect();
    ConvexBody {
        vertices,
        facets,
        origin: DVector::zeros(m),
        affine_basis: model.a_basis().into_iter().map(|b| b.as_vector().clone()).collect(),
        reduced: true,
    }
}

/// `offset + span(direction_basis)` is the affine subspace of `a`
/// containing `𝔉_a(A·ν)`.
#[derive(Debug, Clone)]
pub struct AffineComponent {
    /// Component of `𝔉_a(ν)` along `a_ν`.
    pub offset: AElement,
    /// Orthonormal basis of `a_ν^⊥`.
    pub direction_basis: Vec<AElement>,
}

impl AffineComponent {
    /// Distance from `p` to the affine subspace.
    pub fn distance(&self, p: &AElement) -> f64 {
        (remove_components(&(p - &self.offset).as_vector().clone(), &self.direction_basis)).norm()
    }
}

pub fn affine_component(nu: &DiscreteMeasure) -> AffineComponent {
    let isotropy = isotropy_algebra_torus(nu);
    let direction_basis = complement_in_a(nu.model(), &isotropy);
    let image = gradient_f_torus(nu);
    let offset = AElement::project(&(image.as_vector() - remove_components(image.as_vector(), &isotropy)));
    AffineComponent { offset, direction_basis }
}

/// `𝔉_a(exp(α_j)·ν)` for `count` points `α_j` uniform in the ball of
/// `radius` in `a_ν^⊥`.
pub fn orbit_image_sample(nu: &DiscreteMeasure, count: usize, radius: f64, seed: u64) -> Result<Vec<AElement>> {
    if count == 0 {
        return Err(invalid_param("count", "must be at least 1"));
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(invalid_param("radius", format!("{radius} must be finite and nonnegative")));
    }
    let basis = affine_component(nu).direction_basis;
    let m = nu.model().ambient_dim();
    let mut rng = sampling::seeded_rng(seed);
    Ok((0..count).map(|_| torus_image(nu, &sampling::random_in_ball(&basis, m, radius, &mut rng))).collect())
}
