//! Closed convex feasible sets and Euclidean projections onto them.
//!
//! Every variant supports an exact or iterative projection `P_K`. Polyhedra
//! `{x : Bx = b, x >= 0}` are projected with Dykstra's alternating scheme
//! between the affine set and the orthant, followed by an active-set polish
//! that returns the KKT-certified projection whenever the Dykstra iterate
//! identifies the optimal face.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{CviError, Result};
use crate::point::check_dim;

pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_ITER: usize = 10_000;

/// Default half-width of the window used when sampling unbounded sets.
pub const DEFAULT_SAMPLE_SCALE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Box(BoxSet),
    NonnegativeOrthant { n: usize },
    Simplex(SimplexSet),
    Polyhedron(Polyhedron),
    Product(ProductSet),
    FixedOverlay(FixedOverlay),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

/// `{x >= 0 : sum(x) = radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSet {
    radius: f64,
    n: usize,
}

/// `{x : Bx = b}`, optionally intersected with the nonnegative orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
    nonnegative: bool,
    pinv: DMatrix<f64>,
    tol: f64,
    max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSet {
    parts: Vec<(Range<usize>, FeasibleSet)>,
    n: usize,
}

/// A base set with some coordinates pinned to constants.
///
/// The free coordinates are projected onto the slice of the base set through
/// the pinned values, which is precomputed as `reduced`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedOverlay {
    base: Box<FeasibleSet>,
    fixed: Vec<(usize, f64)>,
    free: Vec<usize>,
    reduced: Box<FeasibleSet>,
}

impl FeasibleSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(CviError::InvalidSet(format!(
                    "box bounds at index {i}: lower {l} > upper {u}"
                )));
            }
        }
        Ok(FeasibleSet::Box(BoxSet {
            lower: DVector::from_vec(lower),
            upper: DVector::from_vec(upper),
        }))
    }

    pub fn orthant(n: usize) -> Self {
        FeasibleSet::NonnegativeOrthant { n }
    }

    pub fn simplex(radius: f64, n: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || n == 0 {
            return Err(CviError::InvalidSet(format!(
                "simplex needs a positive radius and n >= 1 (radius {radius}, n {n})"
            )));
        }
        Ok(FeasibleSet::Simplex(SimplexSet { radius, n }))
    }

    pub fn polyhedron(matrix: DMatrix<f64>, rhs: Vec<f64>, nonnegative: bool) -> Result<Self> {
        Polyhedron::new(matrix, DVector::from_vec(rhs), nonnegative).map(FeasibleSet::Polyhedron)
    }

    /// Cartesian product; `parts` are laid out contiguously in the given order.
    pub fn product(parts: Vec<FeasibleSet>) -> Result<Self> {
        let mut start = 0;
        let parts = parts
            .into_iter()
            .map(|set| {
                let range = start..start + set.dim();
                start = range.end;
                (range, set)
            })
            .collect();
        Self::product_with_ranges(parts)
    }

    /// Cartesian product with explicit index ranges, which must partition `0..n`.
    pub fn product_with_ranges(mut parts: Vec<(Range<usize>, FeasibleSet)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(CviError::InvalidSet("product of zero sets".into()));
        }
        parts.sort_by_key(|(r, _)| r.start);
        let mut next = 0;
        for (range, set) in &parts {
            if range.start != next || range.len() != set.dim() {
                return Err(CviError::InvalidSet(format!(
                    "product ranges do not partition the coordinates (at {range:?})"
                )));
            }
            next = range.end;
        }
        Ok(FeasibleSet::Product(ProductSet { parts, n: next }))
    }

    /// Pins `fixed` coordinates of `base` to the given values.
    ///
    /// Overlays of overlays are flattened; pinning an already pinned
    /// coordinate is an error.
    pub fn with_fixed(base: FeasibleSet, fixed: Vec<(usize, f64)>) -> Result<Self> {
        let (base, mut all) = match base {
            FeasibleSet::FixedOverlay(o) => (*o.base, o.fixed),
            other => (other, Vec::new()),
        };
        for (index, value) in fixed {
            if index >= base.dim() {
                return Err(CviError::DimensionMismatch {
                    expected: base.dim(),
                    found: index + 1,
                });
            }
            if !value.is_finite() {
                return Err(CviError::NonFinite { index });
            }
            if all.iter().any(|(i, _)| *i == index) {
                return Err(CviError::ConflictingClamp(index));
            }
            all.push((index, value));
        }
        all.sort_by_key(|(i, _)| *i);
        let free: Vec<usize> = (0..base.dim())
            .filter(|i| all.binary_search_by_key(i, |(j, _)| *j).is_err())
            .collect();
        let reduced = base.slice(&all, &free)?;
        Ok(FeasibleSet::FixedOverlay(FixedOverlay {
            base: Box::new(base),
            fixed: all,
            free,
            reduced: Box::new(reduced),
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box(b) => b.lower.len(),
            FeasibleSet::NonnegativeOrthant { n } => *n,
            FeasibleSet::Simplex(s) => s.n,
            FeasibleSet::Polyhedron(p) => p.matrix.ncols(),
            FeasibleSet::Product(p) => p.n,
            FeasibleSet::FixedOverlay(o) => o.base.dim(),
        }
    }

    /// Euclidean projection `argmin_{y in K} |y - x|`.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        match self {
            FeasibleSet::Box(b) => Ok(DVector::from_iterator(
                x.len(),
                x.iter()
                    .zip(b.lower.iter().zip(b.upper.iter()))
                    .map(|(v, (l, u))| v.clamp(*l, *u)),
            )),
            FeasibleSet::NonnegativeOrthant { .. } => Ok(x.map(|v| v.max(0.0))),
            FeasibleSet::Simplex(s) => Ok(project_simplex(x, s.radius)),
            FeasibleSet::Polyhedron(p) => p.project(x),
            FeasibleSet::Product(p) => {
                let mut out = DVector::zeros(x.len());
                for (range, set) in &p.parts {
                    let part = set.project(&x.rows(range.start, range.len()).into_owned())?;
                    out.rows_mut(range.start, range.len()).copy_from(&part);
                }
                Ok(out)
            }
            FeasibleSet::FixedOverlay(o) => {
                let sub = DVector::from_iterator(o.free.len(), o.free.iter().map(|&i| x[i]));
                let sub = o.reduced.project(&sub)?;
                let mut out = DVector::zeros(x.len());
                for (&i, v) in o.free.iter().zip(sub.iter()) {
                    out[i] = *v;
                }
                for &(i, v) in &o.fixed {
                    out[i] = v;
                }
                Ok(out)
            }
        }
    }

    pub fn distance(&self, x: &DVector<f64>) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    /// Constraint components `K_i` with `K = prod K_i`. Sets that are not a
    /// product form a single component.
    pub fn components(&self) -> Vec<(Range<usize>, &FeasibleSet)> {
        match self {
            FeasibleSet::Product(p) => p.parts.iter().map(|(r, s)| (r.clone(), s)).collect(),
            other => vec![(0..other.dim(), other)],
        }
    }

    /// Projects only the coordinates of component `index` onto `K_index`,
    /// leaving every other coordinate untouched.
    pub fn project_component(&self, index: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        let components = self.components();
        let (range, set) = components.get(index).ok_or(CviError::ComponentOutOfRange {
            index,
            count: components.len(),
        })?;
        let mut out = x.clone();
        let part = set.project(&x.rows(range.start, range.len()).into_owned())?;
        out.rows_mut(range.start, range.len()).copy_from(&part);
        Ok(out)
    }

    /// Bounds a coordinate can take in the set, used to validate clamps.
    pub fn coordinate_bounds(&self, index: usize) -> Result<(f64, f64)> {
        if index >= self.dim() {
            return Err(CviError::DimensionMismatch {
                expected: self.dim(),
                found: index + 1,
            });
        }
        Ok(match self {
            FeasibleSet::Box(b) => (b.lower[index], b.upper[index]),
            FeasibleSet::NonnegativeOrthant { .. } => (0.0, f64::INFINITY),
            FeasibleSet::Simplex(s) => (0.0, s.radius),
            FeasibleSet::Polyhedron(p) if p.nonnegative => (0.0, f64::INFINITY),
            FeasibleSet::Polyhedron(_) => (f64::NEG_INFINITY, f64::INFINITY),
            FeasibleSet::Product(p) => {
                let (range, set) = p
                    .parts
                    .iter()
                    .find(|(r, _)| r.contains(&index))
                    .expect("product ranges partition the coordinates");
                set.coordinate_bounds(index - range.start)?
            }
            FeasibleSet::FixedOverlay(o) => match o.fixed.iter().find(|(i, _)| *i == index) {
                Some(&(_, v)) => (v, v),
                None => o.base.coordinate_bounds(index)?,
            },
        })
    }

    /// Pinned coordinates, if this is an overlay.
    pub fn fixed(&self) -> &[(usize, f64)] {
        match self {
            FeasibleSet::FixedOverlay(o) => &o.fixed,
            _ => &[],
        }
    }

    /// Draws a feasible point: uniform where that is cheap, otherwise the
    /// projection of a uniform point from `[0, scale]^n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Result<DVector<f64>> {
        let n = self.dim();
        match self {
            FeasibleSet::Box(b) => Ok(DVector::from_iterator(
                n,
                b.lower.iter().zip(b.upper.iter()).map(|(&l, &u)| {
                    let lo = if l.is_finite() { l } else { u.min(0.0) - scale };
                    let hi = if u.is_finite() { u } else { lo.max(0.0) + scale };
                    if hi > lo {
                        rng.random_range(lo..=hi)
                    } else {
                        lo
                    }
                }),
            )),
            FeasibleSet::NonnegativeOrthant { .. } => {
                Ok(DVector::from_fn(n, |_, _| rng.random_range(0.0..=scale)))
            }
            FeasibleSet::Simplex(s) => {
                // normalized exponentials are uniform on the simplex
                let e = DVector::from_fn(n, |_, _| -(1.0 - rng.random::<f64>()).ln());
                let total = e.sum();
                Ok(e * (s.radius / total))
            }
            FeasibleSet::Polyhedron(p) => {
                let lo = if p.nonnegative { 0.0 } else { -scale };
                let raw = DVector::from_fn(n, |_, _| rng.random_range(lo..=scale));
                p.project(&raw)
            }
            FeasibleSet::Product(p) => {
                let mut out = DVector::zeros(n);
                for (range, set) in &p.parts {
                    let part = set.sample(rng, scale)?;
                    out.rows_mut(range.start, range.len()).copy_from(&part);
                }
                Ok(out)
            }
            FeasibleSet::FixedOverlay(o) => {
                let sub = o.reduced.sample(rng, scale)?;
                let mut out = DVector::zeros(n);
                for (&i, v) in o.free.iter().zip(sub.iter()) {
                    out[i] = *v;
                }
                for &(i, v) in &o.fixed {
                    out[i] = v;
                }
                Ok(out)
            }
        }
    }

    /// The slice of `self` through the pinned coordinates, expressed over the
    /// free coordinates only (in increasing index order).
    fn slice(&self, fixed: &[(usize, f64)], free: &[usize]) -> Result<FeasibleSet> {
        for &(i, v) in fixed {
            let (lo, hi) = self.coordinate_bounds(i)?;
            if v < lo || v > hi {
                return Err(CviError::InvalidSet(format!(
                    "pinned value {v} at coordinate {i} is outside [{lo}, {hi}]"
                )));
            }
        }
        match self {
            FeasibleSet::Box(b) => FeasibleSet::boxed(
                free.iter().map(|&i| b.lower[i]).collect(),
                free.iter().map(|&i| b.upper[i]).collect(),
            ),
            FeasibleSet::NonnegativeOrthant { .. } => Ok(FeasibleSet::orthant(free.len())),
            FeasibleSet::Simplex(s) => {
                let rest = s.radius - fixed.iter().map(|(_, v)| v).sum::<f64>();
                if rest < -1e-12 || (free.is_empty() && rest.abs() > 1e-12) {
                    return Err(CviError::EmptySet(
                        "pinned values are incompatible with the simplex radius".into(),
                    ));
                }
                if rest <= 1e-12 {
                    let zeros = vec![0.0; free.len()];
                    FeasibleSet::boxed(zeros.clone(), zeros)
                } else {
                    FeasibleSet::simplex(rest, free.len())
                }
            }
            FeasibleSet::Polyhedron(p) => {
                let mut rhs = p.rhs.clone();
                for &(i, v) in fixed {
                    rhs -= p.matrix.column(i) * v;
                }
                let cols: Vec<_> = free.iter().map(|&i| p.matrix.column(i)).collect();
                let matrix = if cols.is_empty() {
                    DMatrix::zeros(p.matrix.nrows(), 0)
                } else {
                    DMatrix::from_columns(&cols)
                };
                if free.is_empty() {
                    if rhs.amax() > 1e-9 {
                        return Err(CviError::EmptySet(
                            "pinned values violate the equality constraints".into(),
                        ));
                    }
                    return FeasibleSet::boxed(vec![], vec![]);
                }
                Polyhedron::with_options(matrix, rhs, p.nonnegative, p.tol, p.max_iter)
                    .map(FeasibleSet::Polyhedron)
            }
            FeasibleSet::Product(p) => {
                let mut parts = Vec::new();
                for (range, set) in &p.parts {
                    let local_fixed: Vec<(usize, f64)> = fixed
                        .iter()
                        .filter(|(i, _)| range.contains(i))
                        .map(|&(i, v)| (i - range.start, v))
                        .collect();
                    let local_free: Vec<usize> = free
                        .iter()
                        .filter(|i| range.contains(i))
                        .map(|i| i - range.start)
                        .collect();
                    if local_free.is_empty() {
                        // a fully pinned part still has to be feasible
                        set.slice(&local_fixed, &local_free)?;
                        continue;
                    }
                    let part = if local_fixed.is_empty() {
                        set.clone()
                    } else {
                        set.slice(&local_fixed, &local_free)?
                    };
                    parts.push(part);
                }
                if parts.is_empty() {
                    FeasibleSet::boxed(vec![], vec![])
                } else {
                    FeasibleSet::product(parts)
                }
            }
            FeasibleSet::FixedOverlay(_) => unreachable!("overlays are flattened before slicing"),
        }
    }
}

impl BoxSet {
    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }
}

impl SimplexSet {
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl ProductSet {
    pub fn parts(&self) -> &[(Range<usize>, FeasibleSet)] {
        &self.parts
    }
}

impl FixedOverlay {
    pub fn base(&self) -> &FeasibleSet {
        &self.base
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }
}

/// Sort-and-threshold projection onto `{y >= 0 : sum(y) = radius}`.
pub fn project_simplex(x: &DVector<f64>, radius: f64) -> DVector<f64> {
    let mut sorted: Vec<f64> = x.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - radius) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.map(|v| (v - theta).max(0.0))
}

fn pseudo_inverse(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return DMatrix::zeros(matrix.ncols(), matrix.nrows());
    }
    let svd = matrix.clone().svd(true, true);
    let largest = svd.singular_values.max();
    let eps = 1e-12 * largest.max(1.0) * matrix.nrows().max(matrix.ncols()) as f64;
    svd.pseudo_inverse(eps)
        .expect("both singular vector sets were computed")
}

impl Polyhedron {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>, nonnegative: bool) -> Result<Self> {
        Self::with_options(matrix, rhs, nonnegative, DYKSTRA_TOL, DYKSTRA_MAX_ITER)
    }

    pub fn with_options(
        matrix: DMatrix<f64>,
        rhs: DVector<f64>,
        nonnegative: bool,
        tol: f64,
        max_iter: usize,
    ) -> Result<Self> {
        if matrix.nrows() != rhs.len() {
            return Err(CviError::InvalidSet(format!(
                "B has {} rows but b has {} entries",
                matrix.nrows(),
                rhs.len()
            )));
        }
        if matrix.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
            return Err(CviError::InvalidSet("non-finite polyhedron data".into()));
        }
        if !(tol > 0.0) || max_iter == 0 {
            return Err(CviError::InvalidSet(format!(
                "projection needs tol > 0 and max_iter > 0 (tol {tol}, max_iter {max_iter})"
            )));
        }
        let pinv = pseudo_inverse(&matrix);
        let poly = Polyhedron {
            matrix,
            rhs,
            nonnegative,
            pinv,
            tol,
            max_iter,
        };
        let scale = 1.0 + poly.rhs.amax();
        let least_squares = &poly.pinv * &poly.rhs;
        if (&poly.matrix * &least_squares - &poly.rhs).amax() > 1e-9 * scale {
            return Err(CviError::EmptySet("inconsistent equality system Bx = b".into()));
        }
        let origin = DVector::zeros(poly.matrix.ncols());
        let projected = poly.project(&origin).map_err(|e| match e {
            CviError::ProjectionNotConverged { distance, .. } => CviError::EmptySet(format!(
                "projection of the origin did not reach the set (distance {distance:.3e})"
            )),
            other => other,
        })?;
        if poly.affine_violation(&projected) > 1e-6 * scale
            || (poly.nonnegative && projected.min() < -1e-6 * scale)
        {
            return Err(CviError::EmptySet("no point satisfies Bx = b, x >= 0".into()));
        }
        Ok(poly)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn nonnegative(&self) -> bool {
        self.nonnegative
    }

    fn affine_violation(&self, x: &DVector<f64>) -> f64 {
        if self.rhs.is_empty() {
            return 0.0;
        }
        (&self.matrix * x - &self.rhs).amax()
    }

    fn project_affine(&self, x: &DVector<f64>) -> DVector<f64> {
        x - &self.pinv * (&self.matrix * x - &self.rhs)
    }

    fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if !self.nonnegative {
            return Ok(self.project_affine(x));
        }
        let certify = |approx: &DVector<f64>| self.polish(x, approx);
        let approx = dykstra(
            &self.matrix,
            &self.rhs,
            &self.pinv,
            x,
            self.tol,
            self.max_iter,
            Some(&certify),
        )?;
        Ok(self.polish(x, &approx).unwrap_or(approx))
    }

    /// Exact projection by active-set refinement, starting from the zero
    /// pattern of `approx`. Coordinates that come out negative join the zero
    /// set; zeros whose multiplier has the wrong sign are released. The
    /// result is accepted only if it is feasible and satisfies the KKT
    /// conditions of the projection problem.
    fn polish(&self, x: &DVector<f64>, approx: &DVector<f64>) -> Option<DVector<f64>> {
        let n = x.len();
        let threshold = 10.0 * self.tol * (1.0 + approx.amax());
        let mut free: Vec<bool> = approx.iter().map(|v| *v > threshold).collect();
        let scale = 1.0 + self.rhs.amax() + x.amax();
        let slack = 1e-9 * scale;
        for _ in 0..2 * n + 2 {
            let (mut y, lambda) = self.face_projection(x, &free);
            let worst = (0..n).filter(|&i| free[i]).min_by(|&a, &b| y[a].total_cmp(&y[b]));
            if let Some(i) = worst {
                if y[i] < -1e-12 * scale {
                    for j in 0..n {
                        if free[j] && y[j] < -1e-12 * scale {
                            free[j] = false;
                        }
                    }
                    continue;
                }
            }
            y.apply(|v| *v = v.max(0.0));
            // x - y = B^T lambda - nu with nu >= 0 supported on the zero coordinates
            let nu = self.matrix.transpose() * lambda - (x - &y);
            let release = (0..n)
                .filter(|&i| !free[i] && nu[i] < -slack)
                .min_by(|&a, &b| nu[a].total_cmp(&nu[b]));
            if let Some(i) = release {
                free[i] = true;
                continue;
            }
            if self.affine_violation(&y) > 1e-11 * scale {
                return None;
            }
            let stationary = (0..n).all(|i| !free[i] || y[i] == 0.0 || nu[i].abs() <= slack);
            return stationary.then_some(y);
        }
        None
    }

    /// Closest point to `x` on `{Bx = b, x_i = 0 for i not free}` together
    /// with the equality multipliers.
    fn face_projection(&self, x: &DVector<f64>, free: &[bool]) -> (DVector<f64>, DVector<f64>) {
        let n = x.len();
        let mut y = DVector::zeros(n);
        let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
        if idx.is_empty() {
            return (y, DVector::zeros(self.rhs.len()));
        }
        let cols: Vec<_> = idx.iter().map(|&i| self.matrix.column(i)).collect();
        let sub = DMatrix::from_columns(&cols);
        let sub_pinv = pseudo_inverse(&sub);
        let x_free = DVector::from_iterator(idx.len(), idx.iter().map(|&i| x[i]));
        let correction = &sub_pinv * (&sub * &x_free - &self.rhs);
        // the free block of x - y is B_F^T lambda
        let lambda = sub_pinv.transpose() * &correction;
        for (k, &i) in idx.iter().enumerate() {
            y[i] = x_free[k] - correction[k];
        }
        (y, lambda)
    }
}

/// Dykstra's alternating projections between `{x : Bx = b}` and, when
/// `nonnegative`, the orthant.
///
/// Stops once successive iterates move less than `tol` and the equality
/// residual is at most `10 * tol`. The affine step is the minimum-norm
/// correction `x - B^+(Bx - b)`, so rank-deficient `B` (incidence matrices)
/// is fine.
pub fn project_polyhedron_dykstra(
    matrix: &DMatrix<f64>,
    rhs: &DVector<f64>,
    nonnegative: bool,
    x: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>> {
    check_dim(matrix.ncols(), x.len())?;
    check_dim(matrix.nrows(), rhs.len())?;
    if !(tol > 0.0) {
        return Err(CviError::InvalidSet(format!("tolerance must be positive, got {tol}")));
    }
    let pinv = pseudo_inverse(matrix);
    if !nonnegative {
        return Ok(x - &pinv * (matrix * x - rhs));
    }
    dykstra(matrix, rhs, &pinv, x, tol, max_iter, None)
}

/// Iterations between attempts to certify the active set.
const CERTIFY_EVERY: usize = 4;

fn dykstra(
    matrix: &DMatrix<f64>,
    rhs: &DVector<f64>,
    pinv: &DMatrix<f64>,
    x0: &DVector<f64>,
    tol: f64,
    max_iter: usize,
    certify: Option<&dyn Fn(&DVector<f64>) -> Option<DVector<f64>>>,
) -> Result<DVector<f64>> {
    let n = x0.len();
    let violation = |x: &DVector<f64>| {
        if rhs.is_empty() {
            0.0
        } else {
            (matrix * x - rhs).amax()
        }
    };
    let mut x = x0.clone();
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    let mut moved = f64::INFINITY;
    for k in 0..max_iter {
        let shifted = &x + &p;
        let y = &shifted - pinv * (matrix * &shifted - rhs);
        p = shifted - &y;
        let shifted = &y + &q;
        let next = shifted.map(|v| v.max(0.0));
        q = shifted - &next;
        moved = (&next - &x).norm();
        x = next;
        if moved < tol && violation(&x) <= 10.0 * tol {
            return Ok(x);
        }
        // the orthant step zeroes coordinates exactly, so an early iterate
        // often already carries the final active set
        if let Some(certify) = certify {
            if k % CERTIFY_EVERY == 0 {
                if let Some(exact) = certify(&x) {
                    return Ok(exact);
                }
            }
        }
    }
    Err(CviError::ProjectionNotConverged {
        iterations: max_iter,
        distance: moved.max(violation(&x)),
        last: x,
    })
}
