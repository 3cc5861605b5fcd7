//! Projective models `RP^n ⊂ CP^n` with the Fubini-Study momentum map.
//!
//! The real model is acted on by `G = SL(n+1, R)` with maximal compact
//! `K = SO(n+1)`, the complex model by `SL(n+1, C)` with `K = SU(n+1)`. In
//! both cases `p` is the space of traceless symmetric (resp. Hermitian)
//! matrices, paired by the trace form `<X, Y> = Re tr(X Y*)`, and `a` is the
//! traceless diagonal torus algebra.
//!
//! All matrices are stored over `C`; points and group elements of the real
//! model simply carry zero imaginary parts (the real model sits inside the
//! complex one as a totally real submanifold).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid_param, Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};

/// Tolerance on `|‖rep‖ − 1|` for projective representatives.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on `|det − 1|` for group elements built from user input.
pub const DET_TOL: f64 = 1e-9;
/// Entrywise tolerance for symmetry/Hermitian checks and trace checks.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Points closer than this (projective distance) are the same point.
pub const POINT_MERGE_TOL: f64 = 1e-10;
/// Relative tolerance used to group equal eigenvalues.
pub const EIGEN_GROUP_TOL: f64 = 1e-9;
/// Components below this norm are treated as zero.
pub const COMPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `RP^n` under `SL(n+1, R)`.
    Real,
    /// `CP^n` under `SL(n+1, C)`.
    Complex,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Real => write!(f, "rp"),
            FieldKind::Complex => write!(f, "cp"),
        }
    }
}

/// A projective model `RP^n` or `CP^n` together with its group data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelSpace {
    kind: FieldKind,
    n: usize,
}

impl ModelSpace {
    pub fn new(kind: FieldKind, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(invalid_param("n", "projective dimension must be at least 1"));
        }
        Ok(Self { kind, n })
    }

    /// `RP^n`.
    pub fn real(n: usize) -> Result<Self> {
        Self::new(FieldKind::Real, n)
    }

    /// `CP^n`.
    pub fn complex(n: usize) -> Result<Self> {
        Self::new(FieldKind::Complex, n)
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Projective dimension `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Size `n + 1` of representatives and matrices.
    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    /// Real dimension of `p`.
    pub fn p_dim(&self) -> usize {
        let m = self.ambient_dim();
        match self.kind {
            FieldKind::Real => m * (m + 1) / 2 - 1,
            FieldKind::Complex => m * m - 1,
        }
    }

    /// Real dimension of the diagonal torus algebra `a`.
    pub fn a_dim(&self) -> usize {
        self.n
    }

    pub fn is_real(&self) -> bool {
        self.kind == FieldKind::Real
    }

    /// Orthonormal basis of `a`: normalized Helmert contrasts.
    pub fn a_basis(&self) -> Vec<AElement> {
        let m = self.ambient_dim();
        (1..m)
            .map(|k| {
                let scale = ((k * (k + 1)) as f64).sqrt();
                let diag = DVector::from_fn(m, |i, _| {
                    if i < k {
                        1.0 / scale
                    } else if i == k {
                        -(k as f64) / scale
                    } else {
                        0.0
                    }
                });
                AElement { diag }
            })
            .collect()
    }

    /// Orthonormal basis of `p` under the trace form: the torus basis,
    /// then `(E_ij + E_ji)/√2` and, for the complex model,
    /// `i(E_ij − E_ji)/√2` for `i < j`.
    pub fn p_basis(&self) -> Vec<PElement> {
        let m = self.ambient_dim();
        let mut basis: Vec<PElement> = self.a_basis().iter().map(AElement::to_p).collect();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..m {
            for j in (i + 1)..m {
                let mut sym = DMatrix::from_element(m, m, ZERO);
                sym[(i, j)] = C64::new(h, 0.0);
                sym[(j, i)] = C64::new(h, 0.0);
                basis.push(PElement { mat: sym });
                if self.kind == FieldKind::Complex {
                    let mut skew = DMatrix::from_element(m, m, ZERO);
                    skew[(i, j)] = C64::new(0.0, h);
                    skew[(j, i)] = C64::new(0.0, -h);
                    basis.push(PElement { mat: skew });
                }
            }
        }
        basis
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.ambient_dim())
    }

    /// Checks that `x` is a point of this model.
    pub fn check_point(&self, x: &ProjectivePoint) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: x.len() });
        }
        if self.is_real() && !x.is_real() {
            return Err(Error::InvalidInput("complex coordinates given for a real projective model".into()));
        }
        Ok(())
    }

    /// Coordinate vertex `e_i`, a fixed point of the torus.
    pub fn vertex(&self, i: usize) -> ProjectivePoint {
        let mut rep = DVector::from_element(self.ambient_dim(), ZERO);
        rep[i] = ONE;
        ProjectivePoint { rep }
    }

    /// Coordinates of `x ∈ p` in [`ModelSpace::p_basis`].
    pub fn p_coords(&self, x: &PElement) -> DVector<f64> {
        DVector::from_iterator(self.p_dim(), self.p_basis().iter().map(|b| b.inner(x)))
    }

    pub fn p_from_coords(&self, coords: &DVector<f64>) -> PElement {
        let m = self.ambient_dim();
        let mut acc = DMatrix::from_element(m, m, ZERO);
        for (c, b) in coords.iter().zip(self.p_basis()) {
            acc += b.mat * C64::new(*c, 0.0);
        }
        PElement { mat: acc }
    }
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind, self.n)
    }
}

/// A point of `RP^n` or `CP^n`, held as a unit representative.
#[derive(Debug, Clone)]
pub struct ProjectivePoint {
    rep: DVector<C64>,
}

impl ProjectivePoint {
    /// Normalizes `rep`; rejects the zero vector and non-finite entries.
    /// Representatives already within rounding of unit length are kept
    /// bit-for-bit.
    pub fn new(rep: DVector<C64>) -> Result<Self> {
        if rep.is_empty() {
            return Err(Error::InvalidInput("empty coordinate vector".into()));
        }
        if rep.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        let norm_sq: f64 = rep.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq > 0.0) {
            return Err(Error::InvalidInput("zero-norm coordinate vector".into()));
        }
        if (norm_sq - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { rep });
        }
        let inv = 1.0 / norm_sq.sqrt();
        Ok(Self { rep: rep.map(|z| z * inv) })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(coords.len(), coords.iter().map(|&x| C64::new(x, 0.0))))
    }

    pub fn from_complex(coords: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// Unit representative.
    pub fn rep(&self) -> &DVector<C64> {
        &self.rep
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }

    pub fn is_real(&self) -> bool {
        linalg::is_real_vector(&self.rep)
    }

    /// `|rep_i|²`.
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.rep.iter().map(|z| z.norm_sqr())
    }

    /// Distance `min_φ ‖u − e^{iφ} v‖` between unit representatives (the
    /// minimizing phase is `±1` for real points).
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        let overlap = other.rep.dotc(&self.rep);
        let modulus = overlap.norm();
        let phase = if modulus > 0.0 { overlap / modulus } else { ONE };
        (&self.rep - &other.rep * phase).norm()
    }

    pub fn same_point(&self, other: &ProjectivePoint) -> bool {
        self.distance(other) <= POINT_MERGE_TOL
    }

    /// A representative multiplied by a unit phase so that the first
    /// coordinate of largest modulus is real and positive.
    pub fn canonical_rep(&self) -> DVector<C64> {
        let (idx, _) =
            self.rep.iter().enumerate().fold(
                (0, -1.0),
                |best, (i, z)| {
                    if z.norm() > best.1 + 1e-12 {
                        (i, z.norm())
                    } else {
                        best
                    }
                },
            );
        let lead = self.rep[idx];
        let phase = lead.conj() / lead.norm();
        self.rep.map(|z| z * phase)
    }

    pub(crate) fn from_unit(rep: DVector<C64>) -> Self {
        Self { rep }
    }
}

/// An element of `G = SL(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    mat: DMatrix<C64>,
}

impl GroupElement {
    /// Validates squareness and `|det − 1| < 1e-9`.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidInput("group element must be a non-empty square matrix".into()));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let det = mat.determinant();
        if (det - ONE).norm() >= DET_TOL {
            return Err(Error::InvalidInput(format!("determinant {det} is not 1 within {DET_TOL:e}")));
        }
        Ok(Self { mat })
    }

    pub fn from_real(mat: DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::complexify(&mat))
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim) }
    }

    /// Products, exponentials and factors of valid elements stay in `G`
    /// mathematically, while a floating-point determinant of an
    /// ill-conditioned product can drift far from 1; those paths skip the
    /// check.
    pub(crate) fn from_matrix_unchecked(mat: DMatrix<C64>) -> Self {
        Self { mat }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_real(&self) -> bool {
        linalg::is_real_matrix(&self.mat)
    }

    /// `self · other`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { mat: &self.mat * &other.mat }
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self.mat.clone().try_inverse().expect("elements of SL(n) are invertible");
        GroupElement { mat: inv }
    }

    /// Conjugate transpose; the inverse when `self ∈ K`.
    pub fn adjoint(&self) -> GroupElement {
        GroupElement { mat: self.mat.adjoint() }
    }

    /// Whether `self` is orthogonal/unitary with determinant 1 within `tol`.
    pub fn is_in_k(&self, tol: f64) -> bool {
        let m = self.dim();
        let gram = self.mat.adjoint() * &self.mat;
        let dev = linalg::frobenius(&(gram - DMatrix::<C64>::identity(m, m)));
        dev < tol && (self.mat.determinant() - ONE).norm() < tol
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        linalg::frobenius(&(&self.mat - &other.mat))
    }
}

/// An element of `p`: traceless symmetric (real model) or Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PElement {
    mat: DMatrix<C64>,
}

impl PElement {
    /// Validates the Hermitian and trace-zero conditions within `1e-12`.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidInput("p element must be a non-empty square matrix".into()));
        }
        let m = mat.nrows();
        for i in 0..m {
            for j in 0..m {
                if (mat[(i, j)] - mat[(j, i)].conj()).norm() > STRUCTURE_TOL {
                    return Err(Error::InvalidInput(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let tr = mat.trace();
        if tr.norm() > STRUCTURE_TOL {
            return Err(Error::InvalidInput(format!("trace {tr} is not zero")));
        }
        Ok(Self { mat })
    }

    pub fn from_real(mat: DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::complexify(&mat))
    }

    /// Orthogonal projection of an arbitrary square matrix onto `p`:
    /// Hermitian part minus its trace.
    pub fn project(mat: &DMatrix<C64>) -> Self {
        let m = mat.nrows();
        let herm = (mat + mat.adjoint()) * C64::new(0.5, 0.0);
        let shift = herm.trace().re / m as f64;
        let mut out = herm;
        for i in 0..m {
            out[(i, i)] = C64::new(out[(i, i)].re - shift, 0.0);
        }
        Self { mat: out }
    }

    pub fn zero(dim: usize) -> Self {
        Self { mat: DMatrix::from_element(dim, dim, ZERO) }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_real(&self) -> bool {
        linalg::is_real_matrix(&self.mat)
    }

    /// Trace form `Re tr(X Y*)`.
    pub fn inner(&self, other: &PElement) -> f64 {
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a * b.conj()).re).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `Ad(k) X = k X k*` for `k ∈ K`.
    pub fn adjoint_action(&self, k: &GroupElement) -> PElement {
        PElement::project(&(&k.mat * &self.mat * k.mat.adjoint()))
    }

    /// Diagonal part, the orthogonal projection onto `a`.
    pub fn diagonal(&self) -> AElement {
        AElement { diag: DVector::from_fn(self.dim(), |i, _| self.mat[(i, i)].re) }
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.mat).0
    }
}

impl Add for &PElement {
    type Output = PElement;
    fn add(self, rhs: &PElement) -> PElement {
        PElement { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &PElement {
    type Output = PElement;
    fn sub(self, rhs: &PElement) -> PElement {
        PElement { mat: &self.mat - &rhs.mat }
    }
}

impl Mul<f64> for &PElement {
    type Output = PElement;
    fn mul(self, rhs: f64) -> PElement {
        PElement { mat: &self.mat * C64::new(rhs, 0.0) }
    }
}

impl Neg for &PElement {
    type Output = PElement;
    fn neg(self) -> PElement {
        PElement { mat: -&self.mat }
    }
}

/// An element of the torus algebra `a`: a real diagonal summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AElement {
    diag: DVector<f64>,
}

impl AElement {
    /// Validates `|Σ diag_i| < 1e-12`.
    pub fn new(diag: DVector<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidInput("empty diagonal".into()));
        }
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite diagonal entry".into()));
        }
        let sum: f64 = diag.iter().sum();
        if sum.abs() >= STRUCTURE_TOL {
            return Err(Error::InvalidInput(format!("diagonal sums to {sum:e}, not 0")));
        }
        Ok(Self { diag })
    }

    pub fn from_slice(diag: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(diag))
    }

    /// Removes the mean of `v`.
    pub fn project(v: &DVector<f64>) -> Self {
        let mean = v.mean();
        Self { diag: v.map(|x| x - mean) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { diag: DVector::zeros(dim) }
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.diag
    }

    pub fn as_slice(&self) -> &[f64] {
        self.diag.as_slice()
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn dot(&self, other: &AElement) -> f64 {
        self.diag.dot(&other.diag)
    }

    pub fn norm(&self) -> f64 {
        self.diag.norm()
    }

    pub fn to_p(&self) -> PElement {
        let m = self.diag.len();
        PElement { mat: DMatrix::from_fn(m, m, |i, j| if i == j { C64::new(self.diag[i], 0.0) } else { ZERO }) }
    }

    pub(crate) fn from_vector_unchecked(diag: DVector<f64>) -> Self {
        Self { diag }
    }
}

impl Add for &AElement {
    type Output = AElement;
    fn add(self, rhs: &AElement) -> AElement {
        AElement { diag: &self.diag + &rhs.diag }
    }
}

impl Sub for &AElement {
    type Output = AElement;
    fn sub(self, rhs: &AElement) -> AElement {
        AElement { diag: &self.diag - &rhs.diag }
    }
}

impl Mul<f64> for &AElement {
    type Output = AElement;
    fn mul(self, rhs: f64) -> AElement {
        AElement { diag: &self.diag * rhs }
    }
}

impl Neg for &AElement {
    type Output = AElement;
    fn neg(self) -> AElement {
        AElement { diag: -&self.diag }
    }
}

fn assert_same_dim(expected: usize, got: usize) {
    assert_eq!(expected, got, "model dimension mismatch");
}

/// `g · x`.
pub fn act(g: &GroupElement, x: &ProjectivePoint) -> ProjectivePoint {
    assert_same_dim(g.dim(), x.len());
    let image = &g.mat * &x.rep;
    let norm = image.norm();
    ProjectivePoint::from_unit(image / C64::new(norm, 0.0))
}

/// `μ_p(x) = x x* − I/(n+1)`.
pub fn momentum_p(x: &ProjectivePoint) -> PElement {
    let m = x.len();
    let shift = 1.0 / m as f64;
    let z = &x.rep;
    let mat =
        DMatrix::from_fn(m, m, |i, j| if i == j { C64::new(z[i].norm_sqr() - shift, 0.0) } else { z[i] * z[j].conj() });
    PElement { mat }
}

/// `μ_a(x) = (|x_i|² − 1/(n+1))_i`, the diagonal of [`momentum_p`].
pub fn momentum_a(x: &ProjectivePoint) -> AElement {
    let m = x.len();
    let shift = 1.0 / m as f64;
    AElement { diag: DVector::from_fn(m, |i, _| x.rep[i].norm_sqr() - shift) }
}

/// `μ_p^β(x) = <μ_p(x), β>`.
pub fn mu_beta(x: &ProjectivePoint, beta: &PElement) -> f64 {
    assert_same_dim(beta.dim(), x.len());
    momentum_p(x).inner(beta)
}

/// Kempf-Ness potential `Ψ(x, g) = ½ log ‖g x‖²` on unit representatives.
pub fn kempf_ness(x: &ProjectivePoint, g: &GroupElement) -> f64 {
    assert_same_dim(g.dim(), x.len());
    0.5 * (&g.mat * &x.rep).norm_squared().ln()
}

/// Matrix exponential of `β ∈ p` via its spectral decomposition.
pub fn exp_p(beta: &PElement) -> GroupElement {
    let (values, vectors) = linalg::hermitian_eigen(&beta.mat);
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| vectors[(r, c)] * values[c].exp());
    GroupElement::from_matrix_unchecked(scaled * vectors.adjoint())
}

/// Cartan factors `g = k exp(β)` with `k ∈ K`, `β ∈ p`; returns `β`.
pub fn cartan_p_part(g: &GroupElement) -> PElement {
    let (_, s, v) = linalg::svd_sorted(&g.mat);
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * s[c].ln());
    PElement::project(&(scaled * v.adjoint()))
}

/// `g = k · exp(diag(α)) · l⁻¹` with `k, l ∈ K`.
#[derive(Debug, Clone)]
pub struct KakDecomposition {
    pub k: GroupElement,
    pub alpha: AElement,
    pub l: GroupElement,
}

impl KakDecomposition {
    pub fn reconstruct(&self) -> GroupElement {
        let m = self.alpha.len();
        let torus = DMatrix::from_fn(m, m, |i, j| if i == j { C64::new(self.alpha.diag[i].exp(), 0.0) } else { ZERO });
        GroupElement::from_matrix_unchecked(&self.k.mat * torus * self.l.mat.adjoint())
    }
}

/// KAK decomposition from the singular value decomposition. Singular values
/// are sorted descending (ties keep the order of the SVD kernel); the
/// determinant phase of the orthogonal/unitary factors is removed from the
/// last column of both `k` and `l`, which leaves the product unchanged.
pub fn kak_decompose(g: &GroupElement) -> KakDecomposition {
    let (mut u, s, mut v) = linalg::svd_sorted(&g.mat);
    let m = s.len();
    for factor in [&mut u, &mut v] {
        let det = factor.determinant();
        let phase = det.conj() / det.norm();
        for r in 0..m {
            factor[(r, m - 1)] *= phase;
        }
    }
    // ln σ sums to ln|det g| = 0. The rounding error of σ_i is about
    // ε·σ_max, so the defect sits almost entirely in the smallest value.
    let mut logs = DVector::from_iterator(m, s.iter().map(|x| x.ln()));
    let defect = logs.sum();
    logs[m - 1] -= defect;
    KakDecomposition {
        k: GroupElement::from_matrix_unchecked(u),
        alpha: AElement { diag: logs },
        l: GroupElement::from_matrix_unchecked(v),
    }
}

/// Position of a point in the Morse-Bott decomposition `M = ⊔ W_j` of
/// `μ_p^β`.
#[derive(Debug, Clone)]
pub struct MorseStratum {
    /// Index `j` of the critical component, counted from the smallest
    /// eigenvalue (0-based).
    pub index: usize,
    /// Number `r` of distinct eigenvalues of `β`.
    pub stratum_count: usize,
    /// Critical value `c_j`, the eigenvalue of the selected eigenspace.
    pub critical_value: f64,
    /// `lim_{t→∞} exp(tβ) · x`.
    pub limit: ProjectivePoint,
}

impl MorseStratum {
    /// Whether the point lies in the open dense stratum `W_r`.
    pub fn is_top(&self) -> bool {
        self.index + 1 == self.stratum_count
    }
}

/// Locates `x` in the decomposition by the flow of `grad μ_p^β`: the limit
/// is the normalized projection of `x` onto the top eigenspace of `β` on
/// which it has a nonzero component.
pub fn morse_stratum(x: &ProjectivePoint, beta: &PElement) -> Result<MorseStratum> {
    assert_same_dim(beta.dim(), x.len());
    let (values, vectors) = linalg::hermitian_eigen(&beta.mat);
    let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(group) if (v - values[group[group.len() - 1]]).abs() <= EIGEN_GROUP_TOL * scale => group.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let coeffs = vectors.adjoint() * &x.rep;
    for (j, group) in groups.iter().enumerate().rev() {
        let mut projection = DVector::from_element(x.len(), ZERO);
        for &c in group {
            projection += vectors.column(c) * coeffs[c];
        }
        let norm = projection.norm();
        if norm > COMPONENT_TOL * x.rep.norm() {
            let mean = group.iter().map(|&c| values[c]).sum::<f64>() / group.len() as f64;
            return Ok(MorseStratum {
                index: j,
                stratum_count: groups.len(),
                critical_value: mean,
                limit: ProjectivePoint::from_unit(projection / C64::new(norm, 0.0)),
            });
        }
    }
    unreachable!("a unit vector has a nonzero component in some eigenspace")
}
