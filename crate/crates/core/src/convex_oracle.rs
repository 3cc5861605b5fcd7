//! Brute-force verifiers: low-dimensional convex hulls, hull membership,
//! constructive Dirac attainment, finite differences and 1-D bisection.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid_param, Error, Result};
use crate::linalg;
use crate::measures::{gradient_f_torus, pushforward, DiscreteMeasure};
use crate::model_space::{exp_p, momentum_p, AElement, ModelSpace, PElement, ProjectivePoint};

/// Largest affine dimension handled by [`hull_build`].
pub const MAX_HULL_DIM: usize = 6;
/// Relative singular-value threshold deciding the affine rank of a cloud.
pub const AFFINE_RANK_TOL: f64 = 1e-9;

/// `<normal, x> ≤ offset` with a unit normal lying in the affine direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
}

/// Vertex and facet description of a polytope inside its affine hull.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    pub vertices: Vec<DVector<f64>>,
    pub facets: Vec<Facet>,
    /// A point of the affine hull.
    pub origin: DVector<f64>,
    /// Orthonormal basis of the affine hull direction.
    pub affine_basis: Vec<DVector<f64>>,
    /// Set when the points span less than the requested dimension.
    pub reduced: bool,
}

impl ConvexBody {
    pub fn ambient_dim(&self) -> usize {
        self.origin.len()
    }

    /// Affine dimension of the body.
    pub fn dim(&self) -> usize {
        self.affine_basis.len()
    }

    /// Distance from `p` to the affine hull.
    pub fn affine_distance(&self, p: &DVector<f64>) -> f64 {
        let mut r = p - &self.origin;
        for b in &self.affine_basis {
            let c = r.dot(b);
            r.axpy(-c, b, 1.0);
        }
        r.norm()
    }

    /// Smallest facet slack `offset − <n, p>`; `+∞` for a single point.
    pub fn facet_margin(&self, p: &DVector<f64>) -> f64 {
        self.facets.iter().map(|f| f.offset - f.normal.dot(p)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullMembership {
    pub verdict: Verdict,
    /// Signed distance to the nearest facet, or minus the distance to the
    /// affine hull for points off it.
    pub margin: f64,
}

/// Centroid and orthonormal direction basis of the affine hull of `points`.
pub fn affine_hull(points: &[DVector<f64>]) -> (DVector<f64>, Vec<DVector<f64>>) {
    let dim = points[0].len();
    let centroid = points.iter().fold(DVector::zeros(dim), |acc, p| acc + p) / points.len() as f64;
    let centered = DMatrix::from_fn(dim, points.len(), |r, c| points[c][r] - centroid[r]);
    if points.len() < 2 {
        return (centroid, Vec::new());
    }
    // right singular vectors of the transpose span the column space
    let (_, values, v) = linalg::jacobi_svd(&centered.transpose());
    let top = values.first().copied().unwrap_or(0.0);
    let basis: Vec<(f64, DVector<f64>)> = values
        .iter()
        .enumerate()
        .filter(|(_, s)| top > 0.0 && **s > AFFINE_RANK_TOL * top.max(1.0))
        .map(|(i, s)| (*s, v.column(i).into_owned()))
        .collect();
    (centroid, basis.into_iter().map(|(_, v)| v).collect())
}

/// Convex hull of `points` in `R^dim`, computed exactly (up to a relative
/// visibility tolerance) by incremental insertion in the coordinates of the
/// affine hull.
pub fn hull_build(points: &[DVector<f64>], dim: usize) -> Result<ConvexBody> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points to build a hull from".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidInput("non-finite hull point".into()));
    }
    let (origin, basis) = affine_hull(points);
    let rank = basis.len();
    if rank > MAX_HULL_DIM {
        return Err(Error::DimensionTooLarge { dim: rank, max: MAX_HULL_DIM });
    }
    let local: Vec<DVector<f64>> = points
        .iter()
        .map(|p| {
            let d = p - &origin;
            DVector::from_iterator(rank, basis.iter().map(|b| b.dot(&d)))
        })
        .collect();
    let to_ambient = |y: &DVector<f64>| {
        let mut x = DVector::zeros(dim);
        for (c, b) in y.iter().zip(&basis) {
            x.axpy(*c, b, 1.0);
        }
        x
    };

    let (vertex_ids, local_facets) = match rank {
        0 => (vec![0], Vec::new()),
        1 => {
            let (lo, hi) = (0..local.len()).fold((0, 0), |(lo, hi), i| {
                (if local[i][0] < local[lo][0] { i } else { lo }, if local[i][0] > local[hi][0] { i } else { hi })
            });
            let facets =
                vec![(DVector::from_element(1, -1.0), -local[lo][0]), (DVector::from_element(1, 1.0), local[hi][0])];
            (vec![lo, hi], facets)
        }
        _ => incremental_hull(&local, rank),
    };

    let vertices = vertex_ids.iter().map(|&i| points[i].clone()).collect();
    let facets = local_facets
        .into_iter()
        .map(|(n, c)| {
            let normal = to_ambient(&n);
            let offset = c + normal.dot(&origin);
            Facet { normal, offset }
        })
        .collect();
    Ok(ConvexBody { vertices, facets, origin, affine_basis: basis, reduced: rank < dim })
}

struct LocalFacet {
    verts: Vec<usize>,
    normal: DVector<f64>,
    offset: f64,
}

/// Unit normal of the hyperplane through `verts`, oriented away from
/// `inside`.
fn facet_through(points: &[DVector<f64>], verts: Vec<usize>, inside: &DVector<f64>) -> LocalFacet {
    let d = points[0].len();
    let base = &points[verts[0]];
    let edges: Vec<DVector<f64>> = verts[1..].iter().map(|&v| &points[v] - base).collect();
    let span = crate::linalg::orthonormalize(&edges, 0.0);
    let mut best = DVector::zeros(d);
    for k in 0..d {
        let mut r = DVector::zeros(d);
        r[k] = 1.0;
        for _ in 0..2 {
            for b in &span {
                let c = r.dot(b);
                r.axpy(-c, b, 1.0);
            }
        }
        if r.norm() > best.norm() {
            best = r;
        }
    }
    let mut normal = best.normalize();
    let mut offset = normal.dot(base);
    if normal.dot(inside) > offset {
        normal = -normal;
        offset = -offset;
    }
    LocalFacet { verts, normal, offset }
}

fn incremental_hull(points: &[DVector<f64>], d: usize) -> (Vec<usize>, Vec<(DVector<f64>, f64)>) {
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1.0);
    let eps = 1e-11 * scale;

    // initial simplex: greedily maximize the distance to the current span
    let first = (0..points.len()).max_by(|&a, &b| points[a].norm().total_cmp(&points[b].norm())).expect("nonempty");
    let mut simplex = vec![first];
    let mut span: Vec<DVector<f64>> = Vec::new();
    while simplex.len() < d + 1 {
        let base = &points[simplex[0]];
        let residual = |p: &DVector<f64>| {
            let mut r = p - base;
            for b in &span {
                let c = r.dot(b);
                r.axpy(-c, b, 1.0);
            }
            r
        };
        let next = (0..points.len())
            .max_by(|&a, &b| residual(&points[a]).norm().total_cmp(&residual(&points[b]).norm()))
            .expect("nonempty");
        let r = residual(&points[next]);
        span.push(r.normalize());
        simplex.push(next);
    }
    let inside = simplex.iter().fold(DVector::zeros(d), |acc, &i| acc + &points[i]) / (d + 1) as f64;

    let mut facets: Vec<LocalFacet> = (0..=d)
        .map(|skip| {
            let mut verts: Vec<usize> =
                simplex.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &v)| v).collect();
            verts.sort_unstable();
            facet_through(points, verts, &inside)
        })
        .collect();

    let mut order: Vec<usize> = (0..points.len()).filter(|i| !simplex.contains(i)).collect();
    let dist: Vec<f64> = points.iter().map(|p| (p - &inside).norm()).collect();
    order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]));

    for p in order {
        let point = &points[p];
        let (visible, kept): (Vec<LocalFacet>, Vec<LocalFacet>) =
            facets.into_iter().partition(|f| f.normal.dot(point) - f.offset > eps);
        facets = kept;
        if visible.is_empty() {
            continue;
        }
        let mut ridges: Vec<Vec<usize>> = Vec::new();
        for f in &visible {
            for skip in 0..f.verts.len() {
                let ridge: Vec<usize> =
                    f.verts.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &v)| v).collect();
                ridges.push(ridge);
            }
        }
        ridges.sort();
        let mut i = 0;
        while i < ridges.len() {
            let mut j = i + 1;
            while j < ridges.len() && ridges[j] == ridges[i] {
                j += 1;
            }
            if j - i == 1 {
                let mut verts = ridges[i].clone();
                verts.push(p);
                verts.sort_unstable();
                facets.push(facet_through(points, verts, &inside));
            }
            i = j;
        }
    }

    let mut vertex_ids: Vec<usize> = facets.iter().flat_map(|f| f.verts.iter().copied()).collect();
    vertex_ids.sort_unstable();
    vertex_ids.dedup();
    // points inserted while extreme can end up inside a face later on
    let candidates = vertex_ids.clone();
    vertex_ids.retain(|&v| {
        let others: Vec<DVector<f64>> =
            candidates.iter().filter(|&&u| u != v).map(|&u| &points[u] - &points[v]).collect();
        min_norm_point(&others).map_or(true, |mnp| mnp.point.norm() > eps)
    });
    let out = facets.into_iter().map(|f| (f.normal, f.offset)).collect();
    (vertex_ids, out)
}

/// Classifies `p` against `body`: interior when every facet slack exceeds
/// `tol`, boundary when the smallest slack is within `tol` of zero.
pub fn hull_membership(p: &DVector<f64>, body: &ConvexBody, tol: f64) -> Result<HullMembership> {
    if p.len() != body.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: body.ambient_dim(), got: p.len() });
    }
    let off = body.affine_distance(p);
    if off > tol {
        return Ok(HullMembership { verdict: Verdict::Exterior, margin: -off });
    }
    let margin = body.facet_margin(p);
    let verdict = if margin > tol {
        Verdict::Interior
    } else if margin >= -tol {
        Verdict::Boundary
    } else {
        Verdict::Exterior
    };
    Ok(HullMembership { verdict, margin })
}

/// Result of [`min_norm_point`]: the minimizer `Σ λ_j p_j` together with
/// its affinely independent support (the final corral).
#[derive(Debug, Clone)]
pub struct MinNormPoint {
    pub point: DVector<f64>,
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
pub fn min_norm_point(points: &[DVector<f64>]) -> Result<MinNormPoint> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points".into()));
    }
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-14 * scale;
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut support = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();
    let max_major = 50 * (points.len() + points[0].len() + 10);

    for _ in 0..max_major {
        let xx = x.norm_squared();
        if xx <= 1e-30 * scale {
            break;
        }
        let (j, best) =
            (0..points.len()).map(|k| (k, x.dot(&points[k]))).min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
        if best >= xx - tol || support.contains(&j) {
            break;
        }
        support.push(j);
        lambda.push(0.0);
        loop {
            let Some(alpha) = affine_min_norm(points, &support) else {
                // numerically dependent corral; keep the current point
                support.pop();
                lambda.pop();
                break;
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                lambda = alpha;
                break;
            }
            let theta = support
                .iter()
                .enumerate()
                .filter(|(i, _)| alpha[*i] <= 1e-15)
                .map(|(i, _)| lambda[i] / (lambda[i] - alpha[i]))
                .fold(1.0, f64::min);
            for i in 0..lambda.len() {
                lambda[i] = (1.0 - theta) * lambda[i] + theta * alpha[i];
            }
            let mut k = 0;
            while k < support.len() {
                if lambda[k] <= 1e-15 {
                    support.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
        let next = combine(points, &support, &lambda);
        if next.norm_squared() >= xx && (next.norm_squared() - xx).abs() <= tol {
            x = next;
            break;
        }
        x = next;
    }
    Ok(MinNormPoint { point: x, support, coefficients: lambda })
}

fn combine(points: &[DVector<f64>], support: &[usize], lambda: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(points[0].len());
    for (&i, &l) in support.iter().zip(lambda) {
        x.axpy(l, &points[i], 1.0);
    }
    x
}

/// Minimizer of `‖Σ α_i p_i‖` subject to `Σ α_i = 1` over `support`.
fn affine_min_norm(points: &[DVector<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut system = DMatrix::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            system[(a, b)] = points[support[a]].dot(&points[support[b]]);
        }
        system[(a, k)] = 1.0;
        system[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let solution = system.full_piv_lu().solve(&rhs)?;
    let alpha: Vec<f64> = solution.iter().take(k).copied().collect();
    alpha.iter().all(|a| a.is_finite()).then_some(alpha)
}

/// Distance below which [`dirac_attain`] accepts a target.
pub const ATTAIN_TOL: f64 = 1e-9;

/// A measure on at most `dim p + 1` of the `sample_points` whose gradient
/// map equals `target`, built from the corral of the minimum-norm point of
/// `{μ_p(x) − target}`.
pub fn dirac_attain(
    model: &ModelSpace,
    target: &PElement,
    sample_points: &[ProjectivePoint],
) -> Result<DiscreteMeasure> {
    if target.dim() != model.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: model.ambient_dim(), got: target.dim() });
    }
    if sample_points.is_empty() {
        return Err(Error::InvalidInput("no sample points".into()));
    }
    let shifted: Vec<DVector<f64>> = sample_points.iter().map(|x| model.p_coords(&(&momentum_p(x) - target))).collect();
    let mnp = min_norm_point(&shifted)?;
    let distance = mnp.point.norm();
    if distance > ATTAIN_TOL {
        return Err(Error::Infeasible { distance });
    }
    let atoms = mnp.support.iter().map(|&i| sample_points[i].clone()).collect();
    DiscreteMeasure::normalized(*model, atoms, mnp.coefficients)
}

/// Largest discrepancy between central differences of `f` at `p` along the
/// standard basis and the components of `g_claimed`.
pub fn fd_check<F>(f: F, p: &DVector<f64>, g_claimed: &DVector<f64>, h: f64) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let basis: Vec<DVector<f64>> = (0..p.len())
        .map(|i| {
            let mut e = DVector::zeros(p.len());
            e[i] = 1.0;
            e
        })
        .collect();
    fd_check_along(f, p, g_claimed, &basis, h)
}

/// [`fd_check`] along the given `directions`.
pub fn fd_check_along<F>(
    f: F,
    p: &DVector<f64>,
    g_claimed: &DVector<f64>,
    directions: &[DVector<f64>],
    h: f64,
) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    if !(1e-8..=1e-2).contains(&h) {
        return Err(invalid_param("h", format!("{h} is outside [1e-8, 1e-2]")));
    }
    if g_claimed.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: g_claimed.len() });
    }
    Ok(directions
        .iter()
        .map(|e| {
            let fd = (f(&(p + e * h)) - f(&(p - e * h))) / (2.0 * h);
            (fd - g_claimed.dot(e)).abs()
        })
        .fold(0.0, f64::max))
}

/// Solves `<𝔉_a(exp(tβ)·ν), β> = target_component` for `t` in `t_range`
/// by bisection; the left side is nondecreasing in `t`.
pub fn bisect_balance_1d(
    nu: &DiscreteMeasure,
    beta: &AElement,
    target_component: f64,
    t_range: (f64, f64),
) -> Result<f64> {
    let (mut lo, mut hi) = t_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid_param("t_range", format!("[{lo}, {hi}] is not a finite interval")));
    }
    let h = |t: f64| gradient_f_torus(&pushforward(&exp_p(&(beta * t).to_p()), nu)).dot(beta);
    let (f_lo, f_hi) = (h(lo), h(hi));
    if target_component < f_lo || target_component > f_hi {
        return Err(Error::BracketFailure { target: target_component, low: f_lo, high: f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = h(mid);
        if (value - target_component).abs() < 1e-10 && hi - lo < 1e-12 * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if value < target_component {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn simplex_vertices(m: usize) -> Vec<DVector<f64>> {
        (0..m).map(|i| DVector::from_fn(m, |j, _| if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64)).collect()
    }

    #[test]
    fn simplex_hull_is_itself() {
        let pts = simplex_vertices(3);
        let body = hull_build(&pts, 3).unwrap();
        assert_eq!(body.vertices.len(), 3);
        assert_eq!(body.facets.len(), 3);
        assert!(body.reduced);
        assert_eq!(body.dim(), 2);
        for f in &body.facets {
            assert!((f.normal.norm() - 1.0).abs() < 1e-14);
            for p in &body.vertices {
                assert!(f.normal.dot(p) <= f.offset + 1e-10);
            }
        }
        let zero = hull_membership(&DVector::zeros(3), &body, 1e-10).unwrap();
        assert_eq!(zero.verdict, Verdict::Interior);
        assert_eq!(hull_membership(&pts[0], &body, 1e-10).unwrap().verdict, Verdict::Boundary);
        assert_eq!(hull_membership(&(&pts[0] * 1.1), &body, 1e-10).unwrap().verdict, Verdict::Exterior);
        let off = v(&[0.0, 0.0, 1.0]);
        let m = hull_membership(&off, &body, 1e-10).unwrap();
        assert_eq!(m.verdict, Verdict::Exterior);
        assert!(m.margin < 0.0);
    }

    #[test]
    fn interior_points_are_not_vertices() {
        let mut pts = vec![v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        pts.push(v(&[0.1, 0.1, 0.1]));
        pts.push(v(&[0.2, 0.3, 0.1]));
        let body = hull_build(&pts, 3).unwrap();
        assert_eq!(body.vertices.len(), 4);
        assert!(!body.reduced);
        assert_eq!(body.facets.len(), 4);
    }

    #[test]
    fn cube_with_coplanar_points() {
        let mut pts = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    pts.push(v(&[i as f64, j as f64, k as f64]));
                }
            }
        }
        let body = hull_build(&pts, 3).unwrap();
        assert_eq!(body.vertices.len(), 8);
        for p in &pts {
            assert!(hull_membership(p, &body, 1e-10).unwrap().margin >= -1e-10);
        }
        let centre = hull_membership(&v(&[1.0, 1.0, 1.0]), &body, 1e-10).unwrap();
        assert!((centre.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_clouds_contain_their_points() {
        let mut rng = sampling::seeded_rng(4);
        for d in 1..=MAX_HULL_DIM {
            let pts: Vec<DVector<f64>> =
                (0..60).map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0))).collect();
            let body = hull_build(&pts, d).unwrap();
            assert_eq!(body.dim(), d);
            for p in &pts {
                assert!(hull_membership(p, &body, 1e-10).unwrap().margin >= -1e-10);
            }
            for vert in &body.vertices {
                assert_eq!(hull_membership(vert, &body, 1e-10).unwrap().verdict, Verdict::Boundary);
            }
        }
    }

    #[test]
    fn one_and_zero_dimensional_hulls() {
        let pts = vec![v(&[1.0, 1.0]), v(&[3.0, 3.0]), v(&[2.0, 2.0])];
        let body = hull_build(&pts, 2).unwrap();
        assert_eq!(body.dim(), 1);
        assert_eq!(body.vertices.len(), 2);
        assert_eq!(hull_membership(&v(&[2.0, 2.0]), &body, 1e-10).unwrap().verdict, Verdict::Interior);
        assert_eq!(hull_membership(&v(&[4.0, 4.0]), &body, 1e-10).unwrap().verdict, Verdict::Exterior);

        let single = hull_build(&[v(&[1.0, 2.0])], 2).unwrap();
        assert_eq!(single.dim(), 0);
        assert_eq!(hull_membership(&v(&[1.0, 2.0]), &single, 1e-10).unwrap().verdict, Verdict::Interior);
        assert_eq!(hull_membership(&v(&[1.0, 2.1]), &single, 1e-10).unwrap().verdict, Verdict::Exterior);
    }

    #[test]
    fn hull_rejects_bad_input() {
        assert!(hull_build(&[], 2).is_err());
        assert!(matches!(hull_build(&[v(&[1.0]), v(&[1.0, 2.0])], 1), Err(Error::DimensionMismatch { .. })));
        let pts: Vec<DVector<f64>> = (0..8).map(|i| DVector::from_fn(7, |j, _| (i == j) as u8 as f64)).collect();
        assert!(matches!(hull_build(&pts, 7), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn min_norm_point_examples() {
        let seg = min_norm_point(&[v(&[1.0, 1.0]), v(&[1.0, -1.0])]).unwrap();
        assert!((&seg.point - v(&[1.0, 0.0])).norm() < 1e-15);
        assert_eq!(seg.support.len(), 2);

        let tri = min_norm_point(&[v(&[1.0, 0.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])]).unwrap();
        assert!(tri.point.norm() < 1e-15);
        assert_eq!(tri.support.len(), 3);

        let far = min_norm_point(&[v(&[2.0, 0.0]), v(&[3.0, 1.0]), v(&[5.0, -2.0])]).unwrap();
        assert!((&far.point - v(&[2.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn dirac_attain_examples() {
        let model = ModelSpace::real(1).unwrap();
        let vertices = vec![model.vertex(0), model.vertex(1)];
        let nu = dirac_attain(&model, &PElement::zero(2), &vertices).unwrap();
        assert_eq!(nu.len(), 2);
        for w in nu.weights() {
            assert!((w - 0.5).abs() < 1e-15);
        }

        let x = ProjectivePoint::from_real(&[0.6, 0.8]).unwrap();
        let nu = dirac_attain(&model, &momentum_p(&x), &[vertices[0].clone(), x.clone(), vertices[1].clone()]).unwrap();
        assert_eq!(nu.len(), 1);
        assert!(nu.atoms()[0].same_point(&x));

        let outside = AElement::from_slice(&[0.6, -0.6]).unwrap().to_p();
        assert!(matches!(dirac_attain(&model, &outside, &vertices), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn fd_check_examples() {
        let p = v(&[0.3, -0.2]);
        let g = v(&[1.0, 2.0]);
        assert!((fd_check(|_| 4.0, &p, &g, 1e-4).unwrap() - 2.0).abs() < 1e-12);
        let linear = |x: &DVector<f64>| x[0] + 2.0 * x[1];
        assert!(fd_check(linear, &p, &g, 1e-4).unwrap() < 1e-12);
        assert!(fd_check(linear, &p, &g, 1.0).is_err());
    }

    #[test]
    fn bisection_examples() {
        let model = ModelSpace::real(1).unwrap();
        let nu = DiscreteMeasure::normalized(
            model,
            vec![
                ProjectivePoint::from_real(&[1.0, 1.0]).unwrap(),
                ProjectivePoint::from_real(&[2.0, 1.0]).unwrap(),
                ProjectivePoint::from_real(&[1.0, 3.0]).unwrap(),
            ],
            vec![1.0; 3],
        )
        .unwrap();
        let beta = AElement::from_slice(&[1.0, -1.0]).unwrap();
        let at_zero = gradient_f_torus(&nu).dot(&beta);
        let t = bisect_balance_1d(&nu, &beta, at_zero, (-1.0, 1.0)).unwrap();
        assert!(t.abs() < 1e-9);
        assert!(matches!(bisect_balance_1d(&nu, &beta, 1.5, (-5.0, 5.0)), Err(Error::BracketFailure { .. })));
    }
}
