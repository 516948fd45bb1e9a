//! Constraint-set families: norm balls and spheres, the PSD cone, rank
//! sets, correlation-type spectrahedra, stochastic matrices and
//! box-constrained quadratic relaxations.
//!
//! Families of the form Ω = Ξ ∩ S_+^n carry `psd_intersected = true`;
//! [`ConstraintSet::project_xi`] and [`ConstraintSet::residual_xi`] then act
//! on Ξ alone.

mod affine;
mod cone;
mod gamma;
pub mod io;
mod project;

use std::fmt;

pub use affine::AffineMap;
pub use cone::{normal_cone_model, xi_normal_cone_model, NormalConeModel, BETA_TOL};
pub use gamma::{dist_to_gamma, enumerate_gamma, nearest_in_gamma, GammaMethod, GammaOptions, GammaOracle};
pub(crate) use cone::{rank_piece, select_columns};
pub use gamma::supports_enumeration;
pub(crate) use gamma::enumerate_mat;
pub use project::{project_psd_rank, project_rank, DykstraOutcome, RankMetric, DYKSTRA_CAP, DYKSTRA_TOL};

pub(crate) use project::{dykstra, project_ball, psd_rank_truncate, rank_truncate, Projector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{max_asymmetry, symmetrize, Mat, Matrix};
use crate::spectral;

/// Membership tolerance used by [`ConstraintSet::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Spectral,
    Frobenius,
    Nuclear,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Spectral => "spectral",
            NormKind::Frobenius => "frobenius",
            NormKind::Nuclear => "nuclear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(NormKind::Spectral),
            "frobenius" => Ok(NormKind::Frobenius),
            "nuclear" => Ok(NormKind::Nuclear),
            other => Err(Error::arg(format!("unknown norm `{other}`"))),
        }
    }

    pub(crate) fn eval(self, a: &Mat) -> Result<f64> {
        match self {
            NormKind::Frobenius => Ok(a.norm()),
            NormKind::Spectral => linalg::spectral_norm(a),
            NormKind::Nuclear => linalg::nuclear_norm(a),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    /// The whole space (R^{n×m} or S^n).
    Ambient,
    NormBall { norm: NormKind, radius: f64 },
    FrobeniusSphere { radius: f64 },
    PsdCone,
    RankSet { r: usize },
    PsdRankSet { r: usize },
    /// {X ⪰ 0, diag(X) = e}
    Correlation,
    /// {X ⪰ 0, <B,X> = b1, <C,X> = b2}
    TwoTrace { b: Mat, c: Mat, b1: f64, b2: f64 },
    /// {X ⪰ 0, X_11 = 1, X_ii = (X_1i + X_i1)/2 for i ≥ 2}
    QuadDiag,
    /// {X ⪰ 0, tr X_ii = 1, tr X_ij = 0 (i ≠ j)} over k×k blocks of size p
    BlockTrace { k: usize, p: usize },
    /// {X ≥ 0, Xe = e}
    RowStochastic,
    /// {X ≥ 0, Xe = e, X^T e = e}
    DoublyStochastic,
    /// {X ⪰ 0, diag(X) = e, <A_i,X> ≤ b_i}
    BinaryQp { a: Vec<Mat>, b: Vec<f64> },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Ambient => "ambient",
            Family::NormBall { .. } => "norm-ball",
            Family::FrobeniusSphere { .. } => "frobenius-sphere",
            Family::PsdCone => "psd-cone",
            Family::RankSet { .. } => "rank-set",
            Family::PsdRankSet { .. } => "psd-rank-set",
            Family::Correlation => "correlation",
            Family::TwoTrace { .. } => "two-trace",
            Family::QuadDiag => "quad-diag",
            Family::BlockTrace { .. } => "block-trace",
            Family::RowStochastic => "row-stochastic",
            Family::DoublyStochastic => "doubly-stochastic",
            Family::BinaryQp { .. } => "binary-qp",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintSet {
    family: Family,
    rows: usize,
    cols: usize,
    symmetric: bool,
    psd_intersected: bool,
    affine: Option<AffineMap>,
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}x{}", self.family.tag(), self.rows, self.cols)?;
        if self.psd_intersected {
            write!(f, ", psd")?;
        }
        write!(f, ")")
    }
}

fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Mat {
    let mut e = Mat::zeros(rows, cols);
    e[(i, j)] = 1.0;
    e
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be positive, got {v}")))
    }
}

fn check_rect(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || rows > cols {
        return Err(Error::arg(format!(
            "need 1 <= rows <= cols, got {rows}x{cols}"
        )));
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::arg("dimension must be positive"));
    }
    Ok(())
}

impl ConstraintSet {
    fn build(
        family: Family,
        rows: usize,
        cols: usize,
        symmetric: bool,
        psd_intersected: bool,
        affine: Option<AffineMap>,
    ) -> Self {
        ConstraintSet {
            family,
            rows,
            cols,
            symmetric,
            psd_intersected,
            affine,
        }
    }

    pub fn ambient(rows: usize, cols: usize) -> Result<Self> {
        check_rect(rows, cols)?;
        Ok(Self::build(Family::Ambient, rows, cols, false, false, None))
    }

    pub fn ambient_sym(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self::build(Family::Ambient, n, n, true, false, None))
    }

    pub fn norm_ball(norm: NormKind, radius: f64, rows: usize, cols: usize) -> Result<Self> {
        check_positive("radius", radius)?;
        check_rect(rows, cols)?;
        Ok(Self::build(
            Family::NormBall { norm, radius },
            rows,
            cols,
            false,
            false,
            None,
        ))
    }

    /// Ball in S^n, optionally intersected with the PSD cone.
    pub fn norm_ball_sym(norm: NormKind, radius: f64, n: usize, psd: bool) -> Result<Self> {
        check_positive("radius", radius)?;
        check_dim(n)?;
        Ok(Self::build(
            Family::NormBall { norm, radius },
            n,
            n,
            true,
            psd,
            None,
        ))
    }

    pub fn frobenius_sphere(radius: f64, rows: usize, cols: usize) -> Result<Self> {
        check_positive("radius", radius)?;
        check_rect(rows, cols)?;
        Ok(Self::build(
            Family::FrobeniusSphere { radius },
            rows,
            cols,
            false,
            false,
            None,
        ))
    }

    pub fn frobenius_sphere_sym(radius: f64, n: usize) -> Result<Self> {
        check_positive("radius", radius)?;
        check_dim(n)?;
        Ok(Self::build(
            Family::FrobeniusSphere { radius },
            n,
            n,
            true,
            false,
            None,
        ))
    }

    /// Ω = S_+^n, viewed as Ξ = S^n intersected with the PSD cone.
    pub fn psd_cone(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self::build(Family::PsdCone, n, n, true, true, None))
    }

    pub fn rank_set(r: usize, rows: usize, cols: usize) -> Result<Self> {
        check_rect(rows, cols)?;
        if r == 0 || r > rows {
            return Err(Error::arg(format!("rank bound r={r} outside 1..={rows}")));
        }
        Ok(Self::build(Family::RankSet { r }, rows, cols, false, false, None))
    }

    pub fn psd_rank_set(r: usize, n: usize) -> Result<Self> {
        check_dim(n)?;
        if r == 0 || r > n {
            return Err(Error::arg(format!("rank bound r={r} outside 1..={n}")));
        }
        Ok(Self::build(Family::PsdRankSet { r }, n, n, true, false, None))
    }

    pub fn correlation(n: usize) -> Result<Self> {
        check_dim(n)?;
        let ops = (0..n).map(|i| unit(n, n, i, i)).collect();
        let affine = AffineMap::new(ops, vec![1.0; n])?;
        Ok(Self::build(Family::Correlation, n, n, true, true, Some(affine)))
    }

    /// Requires b2 ≠ 0 and B − (b1/b2)C nonsingular.
    pub fn two_trace(b: &Matrix, c: &Matrix, b1: f64, b2: f64) -> Result<Self> {
        let set = Self::two_trace_unchecked(b, c, b1, b2)?;
        if b2 == 0.0 {
            return Err(Error::arg("two-trace requires b2 != 0"));
        }
        let m = b.as_dmatrix() - c.as_dmatrix() * (b1 / b2);
        let s = linalg::singular_values(&m)?;
        let top = s.first().copied().unwrap_or(0.0);
        let bottom = s.last().copied().unwrap_or(0.0);
        if top == 0.0 || bottom <= 1e-12 * top {
            return Err(Error::arg("two-trace requires B - (b1/b2) C to be nonsingular"));
        }
        Ok(set)
    }

    /// As [`two_trace`](Self::two_trace) without the nonsingularity check.
    pub fn two_trace_unchecked(b: &Matrix, c: &Matrix, b1: f64, b2: f64) -> Result<Self> {
        let n = b.rows();
        check_dim(n)?;
        for (name, m) in [("B", b), ("C", c)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::dim(name, format!("{n}x{n}"), format!("{}x{}", m.rows(), m.cols())));
            }
            if max_asymmetry(m.as_dmatrix()) > 1e-12 {
                return Err(Error::arg(format!("{name} must be symmetric")));
            }
        }
        let bm = symmetrize(b.as_dmatrix());
        let cm = symmetrize(c.as_dmatrix());
        let affine = AffineMap::new(vec![bm.clone(), cm.clone()], vec![b1, b2])?;
        Ok(Self::build(
            Family::TwoTrace {
                b: bm,
                c: cm,
                b1,
                b2,
            },
            n,
            n,
            true,
            true,
            Some(affine),
        ))
    }

    pub fn quad_diag(n: usize) -> Result<Self> {
        check_dim(n)?;
        let mut ops = vec![unit(n, n, 0, 0)];
        let mut rhs = vec![1.0];
        for i in 1..n {
            let mut a = unit(n, n, i, i);
            a[(0, i)] = -0.5;
            a[(i, 0)] = -0.5;
            ops.push(a);
            rhs.push(0.0);
        }
        let affine = AffineMap::new(ops, rhs)?;
        Ok(Self::build(Family::QuadDiag, n, n, true, true, Some(affine)))
    }

    pub fn block_trace(k: usize, p: usize) -> Result<Self> {
        check_dim(k)?;
        check_dim(p)?;
        let n = k * p;
        let mut ops = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..k {
            for j in i..k {
                let mut a = Mat::zeros(n, n);
                for t in 0..p {
                    if i == j {
                        a[(i * p + t, i * p + t)] = 1.0;
                    } else {
                        a[(i * p + t, j * p + t)] = 0.5;
                        a[(j * p + t, i * p + t)] = 0.5;
                    }
                }
                ops.push(a);
                rhs.push(if i == j { 1.0 } else { 0.0 });
            }
        }
        let affine = AffineMap::new(ops, rhs)?;
        Ok(Self::build(
            Family::BlockTrace { k, p },
            n,
            n,
            true,
            true,
            Some(affine),
        ))
    }

    pub fn row_stochastic(n: usize) -> Result<Self> {
        check_dim(n)?;
        let ops = (0..n)
            .map(|i| {
                let mut a = Mat::zeros(n, n);
                a.row_mut(i).fill(1.0);
                a
            })
            .collect();
        let affine = AffineMap::new(ops, vec![1.0; n])?;
        Ok(Self::build(Family::RowStochastic, n, n, false, false, Some(affine)))
    }

    pub fn doubly_stochastic(n: usize) -> Result<Self> {
        check_dim(n)?;
        let mut ops = Vec::new();
        for i in 0..n {
            let mut a = Mat::zeros(n, n);
            a.row_mut(i).fill(1.0);
            ops.push(a.transpose());
            ops.push(a);
        }
        let affine = AffineMap::new(ops, vec![1.0; 2 * n])?;
        Ok(Self::build(Family::DoublyStochastic, n, n, false, false, Some(affine)))
    }

    pub fn binary_qp(a: &[Matrix], b: &[f64]) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::arg("binary-qp needs at least one inequality"));
        }
        if a.len() != b.len() {
            return Err(Error::dim("b", a.len(), b.len()));
        }
        let n = a[0].rows();
        check_dim(n)?;
        let mut mats = Vec::with_capacity(a.len());
        for (i, m) in a.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::dim(
                    &format!("A_{}", i + 1),
                    format!("{n}x{n}"),
                    format!("{}x{}", m.rows(), m.cols()),
                ));
            }
            if max_asymmetry(m.as_dmatrix()) > 1e-12 {
                return Err(Error::arg(format!("A_{} must be symmetric", i + 1)));
            }
            mats.push(symmetrize(m.as_dmatrix()));
        }
        let ops = (0..n).map(|i| unit(n, n, i, i)).collect();
        let affine = AffineMap::new(ops, vec![1.0; n])?;
        Ok(Self::build(
            Family::BinaryQp {
                a: mats,
                b: b.to_vec(),
            },
            n,
            n,
            true,
            true,
            Some(affine),
        ))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn psd_intersected(&self) -> bool {
        self.psd_intersected
    }

    pub fn affine(&self) -> Option<&AffineMap> {
        self.affine.as_ref()
    }

    /// Whether the family is bounded.
    pub fn is_compact(&self) -> bool {
        !matches!(
            self.family,
            Family::Ambient
                | Family::PsdCone
                | Family::RankSet { .. }
                | Family::PsdRankSet { .. }
                | Family::TwoTrace { .. }
        )
    }

    /// Upper bound on ‖X‖_F over the set, when one is known in closed form.
    pub fn frobenius_radius(&self) -> Option<f64> {
        let n = self.rows as f64;
        match &self.family {
            Family::NormBall { norm, radius } => Some(match norm {
                NormKind::Frobenius | NormKind::Nuclear => *radius,
                NormKind::Spectral => radius * n.sqrt(),
            }),
            Family::FrobeniusSphere { radius } => Some(*radius),
            Family::Correlation | Family::QuadDiag | Family::BinaryQp { .. } => Some(n),
            Family::RowStochastic | Family::DoublyStochastic => Some(n.sqrt()),
            Family::BlockTrace { k, .. } => Some(*k as f64),
            _ => None,
        }
    }

    pub(crate) fn check_mat(&self, x: &Mat, field: &str) -> Result<()> {
        if x.nrows() != self.rows || x.ncols() != self.cols {
            return Err(Error::dim(
                field,
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", x.nrows(), x.ncols()),
            ));
        }
        if self.symmetric {
            let asym = max_asymmetry(x);
            if asym > 1e-9 * (1.0 + x.norm()) {
                return Err(Error::arg(format!(
                    "{field} must be symmetric for {} (asymmetry {asym:.3e})",
                    self.family.tag()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn check(&self, x: &Matrix, field: &str) -> Result<()> {
        self.check_mat(x.as_dmatrix(), field)
    }

    pub(crate) fn wrap(&self, a: Mat) -> Matrix {
        Matrix::wrap(a, self.symmetric)
    }

    /// Violation measure; zero exactly on the set.
    pub fn residual(&self, x: &Matrix) -> Result<f64> {
        self.check(x, "X")?;
        self.residual_mat(x.as_dmatrix())
    }

    pub fn contains(&self, x: &Matrix) -> Result<bool> {
        Ok(self.residual(x)? <= MEMBERSHIP_TOL)
    }

    /// Violation measure for Ξ (equal to [`residual`](Self::residual) when
    /// the set is not PSD-intersected).
    pub fn residual_xi(&self, x: &Matrix) -> Result<f64> {
        self.check(x, "X")?;
        self.residual_xi_mat(x.as_dmatrix())
    }

    pub(crate) fn residual_mat(&self, x: &Mat) -> Result<f64> {
        let base = self.residual_xi_mat(x)?;
        if self.psd_intersected {
            Ok(base + psd_deficit(x)?)
        } else {
            Ok(base)
        }
    }

    pub(crate) fn residual_xi_mat(&self, x: &Mat) -> Result<f64> {
        let asym = if self.symmetric { max_asymmetry(x) } else { 0.0 };
        let v = match &self.family {
            Family::Ambient | Family::PsdCone => 0.0,
            Family::NormBall { norm, radius } => (norm.eval(x)? - radius).max(0.0),
            Family::FrobeniusSphere { radius } => (x.norm() - radius).abs(),
            Family::RankSet { r } => spectral::theta_of(&linalg::singular_values(x)?, *r),
            Family::PsdRankSet { r } => {
                spectral::theta_of(&linalg::singular_values(x)?, *r) + psd_deficit(x)?
            }
            Family::Correlation
            | Family::TwoTrace { .. }
            | Family::QuadDiag
            | Family::BlockTrace { .. } => self.affine.as_ref().expect("affine").residual(x),
            Family::RowStochastic | Family::DoublyStochastic => {
                let neg = x.iter().map(|v| v.min(0.0).powi(2)).sum::<f64>().sqrt();
                self.affine.as_ref().expect("affine").residual(x) + neg
            }
            Family::BinaryQp { a, b } => {
                let ineq = a
                    .iter()
                    .zip(b)
                    .map(|(ai, bi)| (ai.dot(x) - bi).max(0.0).powi(2))
                    .sum::<f64>()
                    .sqrt();
                self.affine.as_ref().expect("affine").residual(x) + ineq
            }
        };
        Ok(v + asym)
    }

    /// Nearest point of the set. Dykstra's `tol` applies where no closed
    /// form exists. Rank families return a nearest point of a nonconvex set.
    pub fn project(&self, x: &Matrix, tol: f64) -> Result<Matrix> {
        self.check(x, "X")?;
        Ok(self.wrap(self.project_mat(x.as_dmatrix(), tol)?))
    }

    /// Nearest point of Ξ.
    pub fn project_xi(&self, x: &Matrix, tol: f64) -> Result<Matrix> {
        self.check(x, "X")?;
        Ok(self.wrap(self.project_xi_mat(x.as_dmatrix(), tol)?))
    }

    pub(crate) fn project_mat(&self, x: &Mat, tol: f64) -> Result<Mat> {
        let x = if self.symmetric { symmetrize(x) } else { x.clone() };
        match &self.family {
            Family::Ambient => Ok(x),
            Family::NormBall { norm, radius } => {
                if self.psd_intersected {
                    project::project_psd_ball(&x, *norm, *radius)
                } else {
                    project::project_ball(&x, *norm, *radius, self.symmetric)
                }
            }
            Family::FrobeniusSphere { radius } => Ok(project_sphere(&x, *radius)),
            Family::PsdCone => linalg::psd_part(&x),
            Family::RankSet { r } => rank_truncate(&x, *r),
            Family::PsdRankSet { r } => psd_rank_truncate(&x, *r),
            Family::RowStochastic => {
                let mut out = x.clone();
                for i in 0..self.rows {
                    let row: Vec<f64> = x.row(i).iter().copied().collect();
                    let p = project::project_simplex(&row, 1.0);
                    for (j, v) in p.into_iter().enumerate() {
                        out[(i, j)] = v;
                    }
                }
                Ok(out)
            }
            Family::DoublyStochastic => {
                let affine = self.affine.as_ref().expect("affine");
                let projs: Vec<Projector<'_>> = vec![
                    Box::new(move |a: &Mat| Ok(affine.project(a))),
                    Box::new(|a: &Mat| Ok(a.map(|v| v.max(0.0)))),
                ];
                Ok(dykstra(&x, &projs, tol, DYKSTRA_CAP)?.x)
            }
            Family::Correlation
            | Family::TwoTrace { .. }
            | Family::QuadDiag
            | Family::BlockTrace { .. } => {
                let affine = self.affine.as_ref().expect("affine");
                if let Some(p) = project::project_psd_affine(&x, affine, tol)? {
                    return Ok(p);
                }
                let projs: Vec<Projector<'_>> = vec![
                    Box::new(move |a: &Mat| Ok(affine.project(a))),
                    project::psd_projector(),
                ];
                Ok(dykstra(&x, &projs, tol, DYKSTRA_CAP)?.x)
            }
            Family::BinaryQp { .. } => {
                let mut projs = self.xi_projectors();
                projs.push(project::psd_projector());
                Ok(dykstra(&x, &projs, tol, DYKSTRA_CAP)?.x)
            }
        }
    }

    pub(crate) fn project_xi_mat(&self, x: &Mat, tol: f64) -> Result<Mat> {
        if !self.psd_intersected {
            return self.project_mat(x, tol);
        }
        let x = symmetrize(x);
        match &self.family {
            Family::PsdCone => Ok(x),
            Family::NormBall { norm, radius } => project::project_ball(&x, *norm, *radius, true),
            Family::BinaryQp { .. } => {
                let projs = self.xi_projectors();
                Ok(dykstra(&x, &projs, tol, DYKSTRA_CAP)?.x)
            }
            _ => Ok(self.affine.as_ref().expect("affine").project(&x)),
        }
    }

    fn xi_projectors(&self) -> Vec<Projector<'_>> {
        let affine = self.affine.as_ref().expect("affine");
        let mut projs: Vec<Projector<'_>> = vec![Box::new(move |a: &Mat| Ok(affine.project(a)))];
        if let Family::BinaryQp { a, b } = &self.family {
            for (ai, bi) in a.iter().zip(b) {
                projs.push(Box::new(move |x: &Mat| {
                    Ok(project::project_halfspace(x, ai, *bi))
                }));
            }
        }
        projs
    }

    /// Nearest point of Λ_r (or Λ_r^+ for PSD-intersected sets).
    pub(crate) fn project_rank_side(&self, x: &Mat, r: usize) -> Result<Mat> {
        if self.psd_intersected {
            psd_rank_truncate(x, r)
        } else {
            let out = rank_truncate(x, r)?;
            Ok(if self.symmetric { symmetrize(&out) } else { out })
        }
    }

    /// Frobenius distance to the set; exact where the projection is.
    pub fn distance(&self, x: &Matrix, tol: f64) -> Result<f64> {
        self.check(x, "X")?;
        Ok((self.project_mat(x.as_dmatrix(), tol)? - x.as_dmatrix()).norm())
    }
}

pub(crate) fn psd_deficit(x: &Mat) -> Result<f64> {
    Ok((-linalg::min_eig(&symmetrize(x))?).max(0.0))
}

fn project_sphere(x: &Mat, radius: f64) -> Mat {
    let f = x.norm();
    if f > 0.0 {
        x * (radius / f)
    } else {
        // Every point of the sphere is nearest to 0; pick a fixed one.
        let mut e = Mat::zeros(x.nrows(), x.ncols());
        e[(0, 0)] = radius;
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::new(rows, cols, v).unwrap()
    }

    #[test]
    fn residual_examples() {
        let c = ConstraintSet::correlation(2).unwrap();
        assert_eq!(c.residual(&Matrix::identity(2)).unwrap(), 0.0);
        let rs = ConstraintSet::row_stochastic(2).unwrap();
        assert!(rs.residual(&m(2, 2, &[0.5, 0.5, 0.2, 0.8])).unwrap() < 1e-15);
        let psd = ConstraintSet::psd_cone(2).unwrap();
        assert!((psd.residual(&Matrix::diag(&[1.0, -2.0]).unwrap()).unwrap() - 2.0).abs() < 1e-14);
        assert!(psd.residual(&m(2, 3, &[0.0; 6])).is_err());
    }

    #[test]
    fn projection_examples() {
        let c = ConstraintSet::correlation(2).unwrap();
        let x = Matrix::symmetric(2, &[1.0, 0.3, 0.3, 1.0]).unwrap();
        assert!(c.project(&x, 1e-12).unwrap().sub(&x).unwrap().fro_norm() < 1e-12);
        let p = c.project_xi(&Matrix::diag(&[3.0, -1.0]).unwrap(), 1e-12).unwrap();
        assert!(p.sub(&Matrix::identity(2)).unwrap().fro_norm() < 1e-14);
        let d = ConstraintSet::doubly_stochastic(2).unwrap();
        let p = d.project(&m(2, 2, &[2.0, 0.0, 0.0, 0.0]), 1e-12).unwrap();
        assert!(p.sub(&m(2, 2, &[1.0, 0.0, 0.0, 1.0])).unwrap().fro_norm() < 1e-9);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ConstraintSet::norm_ball(NormKind::Spectral, 0.0, 2, 2).is_err());
        assert!(ConstraintSet::rank_set(3, 2, 3).is_err());
        let b = Matrix::identity(2);
        let c = Matrix::identity(2);
        // B − (b1/b2) C = 0 is singular.
        assert!(ConstraintSet::two_trace(&b, &c, 1.0, 1.0).is_err());
        assert!(ConstraintSet::two_trace(&b, &c, 1.0, 0.0).is_err());
        assert!(ConstraintSet::two_trace_unchecked(&b, &c, 1.0, 1.0).is_ok());
    }

    #[test]
    fn quad_diag_contains_binary_points() {
        let q = ConstraintSet::quad_diag(3).unwrap();
        let x = nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0]);
        let xx = Matrix::from_dmatrix_sym(&x * x.transpose()).unwrap();
        assert!(q.contains(&xx).unwrap());
    }

    #[test]
    fn block_trace_identity_like_point() {
        let s = ConstraintSet::block_trace(2, 2).unwrap();
        let x = Matrix::diag(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(s.contains(&x).unwrap());
    }
}
