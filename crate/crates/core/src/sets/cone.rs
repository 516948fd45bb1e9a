//! Constructive models of normal cones at a given point.

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{Mat, Matrix};
use crate::spectral::{self, DEFAULT_RANK_EPS};

use super::{ConstraintSet, Family, NormKind};

/// Eigen/singular values with |v| ≤ BETA_TOL·(1+σ_1) count as zero.
pub const BETA_TOL: f64 = 1e-8;

/// Tolerance for "X̄ belongs to the set" when building a model.
const POINT_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum NormalConeModel {
    /// {0}
    Zero,
    /// Linear subspace with a Frobenius-orthonormal basis.
    Subspace { basis: Vec<Mat> },
    /// {t·g : t ≥ 0}
    Ray { generator: Mat },
    /// Outer model {G : <G, anchor> ≥ margin·Σ|G_ij|} of a pointed cone.
    Pointed { anchor: Mat, margin: f64 },
    /// N_{S_+}(X̄) = {P_β K P_β^T : K ⪯ 0}; `p` holds all eigenvectors.
    Psd { p: Mat, beta: Vec<usize> },
    /// Generated by −E_ij over the masked entries.
    Orthant {
        mask: Vec<(usize, usize)>,
        shape: (usize, usize),
    },
    /// N_{Λ_r}(X̄) = {U_β K V_β^T} at a point of rank exactly r.
    RankSet {
        u_beta: Mat,
        v_beta: Mat,
        symmetric: bool,
    },
    Sum(Vec<NormalConeModel>),
}

impl NormalConeModel {
    pub fn kind(&self) -> &'static str {
        match self {
            NormalConeModel::Zero => "zero",
            NormalConeModel::Subspace { .. } => "linear-subspace",
            NormalConeModel::Ray { .. } => "ray",
            NormalConeModel::Pointed { .. } => "pointed",
            NormalConeModel::Psd { .. } => "psd-cone-at-point",
            NormalConeModel::Orthant { .. } => "nonneg-orthant-at-point",
            NormalConeModel::RankSet { .. } => "rank-set-at-point",
            NormalConeModel::Sum(_) => "sum-of-models",
        }
    }

    /// Pieces of a sum, or the model itself.
    pub fn pieces(&self) -> Vec<&NormalConeModel> {
        match self {
            NormalConeModel::Sum(parts) => parts.iter().flat_map(|p| p.pieces()).collect(),
            other => vec![other],
        }
    }

    pub fn has_psd_piece(&self) -> bool {
        self.pieces()
            .iter()
            .any(|p| matches!(p, NormalConeModel::Psd { .. }))
    }

    /// True when the model is a linear subspace.
    pub fn is_linear(&self) -> bool {
        self.pieces().iter().all(|p| {
            matches!(
                p,
                NormalConeModel::Zero
                    | NormalConeModel::Subspace { .. }
                    | NormalConeModel::RankSet { .. }
            )
        })
    }

    /// Generators of the linear hull (not orthonormalized). `None` for
    /// pointed pieces, whose hull is not tracked.
    pub fn span_generators(&self) -> Option<Vec<Mat>> {
        let mut out = Vec::new();
        for p in self.pieces() {
            match p {
                NormalConeModel::Zero => {}
                NormalConeModel::Subspace { basis } => out.extend(basis.iter().cloned()),
                NormalConeModel::Ray { generator } => out.push(generator.clone()),
                NormalConeModel::Pointed { .. } => return None,
                NormalConeModel::Psd { p, beta } => {
                    let pb = select_columns(p, beta);
                    out.extend(sym_block_basis(&pb));
                }
                NormalConeModel::Orthant { mask, shape } => {
                    for &(i, j) in mask {
                        let mut e = Mat::zeros(shape.0, shape.1);
                        e[(i, j)] = 1.0;
                        out.push(e);
                    }
                }
                NormalConeModel::RankSet {
                    u_beta,
                    v_beta,
                    symmetric,
                } => {
                    if *symmetric {
                        out.extend(sym_block_basis(u_beta));
                    } else {
                        for a in 0..u_beta.ncols() {
                            for b in 0..v_beta.ncols() {
                                out.push(u_beta.column(a) * v_beta.column(b).transpose());
                            }
                        }
                    }
                }
                NormalConeModel::Sum(_) => unreachable!("pieces are flattened"),
            }
        }
        Some(out)
    }

    /// Orthonormal basis (columns of vec'd matrices) of the linear hull.
    pub(crate) fn span_basis(&self, shape: (usize, usize)) -> Result<Option<Mat>> {
        let Some(gens) = self.span_generators() else {
            return Ok(None);
        };
        let d = shape.0 * shape.1;
        let mut stack = Mat::zeros(d, gens.len());
        for (k, g) in gens.iter().enumerate() {
            stack.set_column(k, &linalg::vec_of(g));
        }
        Ok(Some(linalg::orthonormalize(&stack, 1e-10)?))
    }

    /// Dimension of the linear hull, when tracked.
    pub fn dimension(&self, shape: (usize, usize)) -> Result<Option<usize>> {
        Ok(self.span_basis(shape)?.map(|b| b.ncols()))
    }

    /// Membership test for a single piece within `tol` (relative to ‖H‖_F).
    /// Sums return `None`: membership needs a decomposition.
    pub fn contains(&self, h: &Mat, tol: f64) -> Result<Option<bool>> {
        let scale = tol * h.norm().max(1.0);
        let ok = match self {
            NormalConeModel::Zero => h.norm() <= scale,
            NormalConeModel::Subspace { .. } | NormalConeModel::RankSet { .. } => {
                let basis = self
                    .span_basis((h.nrows(), h.ncols()))?
                    .expect("linear piece");
                let v = linalg::vec_of(h);
                let proj = &basis * (basis.transpose() * &v);
                (v - proj).norm() <= scale
            }
            NormalConeModel::Ray { generator } => {
                let t = generator.dot(h) / generator.norm_squared();
                t >= -scale && (h - generator * t).norm() <= scale
            }
            NormalConeModel::Pointed { anchor, margin } => {
                anchor.dot(h) >= margin * h.iter().map(|v| v.abs()).sum::<f64>() - scale
            }
            NormalConeModel::Psd { p, beta } => {
                let range: Vec<usize> = (0..p.ncols()).filter(|i| !beta.contains(i)).collect();
                let p1 = select_columns(p, &range);
                let off = (p1.transpose() * h).norm();
                let top = linalg::eig(&crate::matrix::symmetrize(h))?
                    .0
                    .first()
                    .copied()
                    .unwrap_or(0.0);
                off <= scale && top <= scale
            }
            NormalConeModel::Orthant { mask, .. } => {
                let mut ok = true;
                for i in 0..h.nrows() {
                    for j in 0..h.ncols() {
                        let v = h[(i, j)];
                        if mask.contains(&(i, j)) {
                            ok &= v <= scale;
                        } else {
                            ok &= v.abs() <= scale;
                        }
                    }
                }
                ok
            }
            NormalConeModel::Sum(_) => return Ok(None),
        };
        Ok(Some(ok))
    }
}

pub(crate) fn select_columns(a: &Mat, idx: &[usize]) -> Mat {
    let mut out = Mat::zeros(a.nrows(), idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        out.set_column(dst, &a.column(src));
    }
    out
}

/// Orthonormal basis of {Q S Q^T : S symmetric} for orthonormal columns Q.
fn sym_block_basis(q: &Mat) -> Vec<Mat> {
    let k = q.ncols();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..k {
        out.push(q.column(a) * q.column(a).transpose());
        for b in (a + 1)..k {
            let m = q.column(a) * q.column(b).transpose();
            out.push((&m + m.transpose()) * s);
        }
    }
    out
}

fn orthonormal_subspace(gens: Vec<Mat>, shape: (usize, usize)) -> Result<NormalConeModel> {
    let d = shape.0 * shape.1;
    let mut stack = Mat::zeros(d, gens.len());
    for (k, g) in gens.iter().enumerate() {
        stack.set_column(k, &linalg::vec_of(g));
    }
    let q = linalg::orthonormalize(&stack, 1e-10)?;
    if q.ncols() == 0 {
        return Ok(NormalConeModel::Zero);
    }
    let basis = (0..q.ncols())
        .map(|k| linalg::unvec(q.column(k).as_slice(), shape.0, shape.1))
        .collect();
    Ok(NormalConeModel::Subspace { basis })
}

/// Indices of eigenvalues treated as zero.
fn zero_eigs(vals: &[f64]) -> Vec<usize> {
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..vals.len())
        .filter(|&i| vals[i].abs() <= BETA_TOL * (1.0 + top))
        .collect()
}

pub(crate) fn psd_piece(x: &Mat) -> Result<NormalConeModel> {
    let (vals, p) = linalg::eig(&crate::matrix::symmetrize(x))?;
    Ok(NormalConeModel::Psd {
        beta: zero_eigs(&vals),
        p,
    })
}

/// N_{Λ_r}(X̄) at a point of numeric rank exactly r.
pub(crate) fn rank_piece(x: &Mat, r: usize, symmetric: bool) -> Result<NormalConeModel> {
    let sigma = linalg::singular_values(x)?;
    let rank = spectral::rank_of(&sigma, DEFAULT_RANK_EPS);
    if rank != r {
        return Err(Error::Refused(format!(
            "normal cone of the rank set is modelled only at rank exactly r={r}; point has numeric rank {rank}, where the cone is not a subspace"
        )));
    }
    if symmetric {
        let (vals, p) = linalg::eig(&crate::matrix::symmetrize(x))?;
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[b].abs().total_cmp(&vals[a].abs()));
        let beta: Vec<usize> = order[r..].to_vec();
        let pb = select_columns(&p, &beta);
        return Ok(NormalConeModel::RankSet {
            u_beta: pb.clone(),
            v_beta: pb,
            symmetric: true,
        });
    }
    let (u, _, v) = linalg::svd(x)?;
    let rows = x.nrows();
    let u_beta = u.columns(r, rows - r).into_owned();
    let v1 = v.columns(0, r).into_owned();
    let v_beta = linalg::null_space(&v1.transpose(), 1e-10)?;
    Ok(NormalConeModel::RankSet {
        u_beta,
        v_beta,
        symmetric: false,
    })
}

fn ball_piece(x: &Mat, norm: NormKind, radius: f64) -> Result<NormalConeModel> {
    let value = norm.eval(x)?;
    if value < radius - POINT_TOL * (1.0 + radius) {
        return Ok(NormalConeModel::Zero);
    }
    let f = x.norm();
    let anchor = x / f;
    let (rows, cols) = x.shape();
    let dims = ((rows * cols) as f64).sqrt();
    Ok(match norm {
        NormKind::Frobenius => NormalConeModel::Ray { generator: anchor },
        NormKind::Spectral => NormalConeModel::Pointed {
            anchor,
            margin: radius / (f * dims) * (1.0 - 1e-9),
        },
        NormKind::Nuclear => NormalConeModel::Pointed {
            anchor,
            margin: radius / (f * dims * (rows.min(cols) as f64).sqrt()) * (1.0 - 1e-9),
        },
    })
}

fn check_point(set: &ConstraintSet, x: &Matrix, xi_only: bool) -> Result<()> {
    set.check(x, "Xbar")?;
    let res = if xi_only {
        set.residual_xi(x)?
    } else {
        set.residual(x)?
    };
    if res > POINT_TOL {
        return Err(Error::Precondition(format!(
            "Xbar is not in {set} (residual {res:.3e})"
        )));
    }
    Ok(())
}

/// Model of N_Ξ(X̄) (equal to N_Ω(X̄) when the set is not PSD-intersected).
pub fn xi_normal_cone_model(set: &ConstraintSet, xbar: &Matrix) -> Result<NormalConeModel> {
    check_point(set, xbar, true)?;
    xi_model_mat(set, xbar.as_dmatrix())
}

pub(crate) fn xi_model_mat(set: &ConstraintSet, x: &Mat) -> Result<NormalConeModel> {
    let shape = set.shape();
    match set.family() {
        Family::Ambient | Family::PsdCone => Ok(NormalConeModel::Zero),
        Family::NormBall { norm, radius } => ball_piece(x, *norm, *radius),
        Family::FrobeniusSphere { .. } => orthonormal_subspace(vec![x.clone()], shape),
        Family::RankSet { r } => rank_piece(x, *r, set.is_symmetric()),
        Family::PsdRankSet { r } => Ok(NormalConeModel::Sum(vec![
            psd_piece(x)?,
            rank_piece(x, *r, true)?,
        ])),
        Family::Correlation
        | Family::TwoTrace { .. }
        | Family::QuadDiag
        | Family::BlockTrace { .. } => {
            orthonormal_subspace(set.affine().expect("affine").ops().to_vec(), shape)
        }
        Family::RowStochastic | Family::DoublyStochastic => {
            let sub = orthonormal_subspace(set.affine().expect("affine").ops().to_vec(), shape)?;
            let mask: Vec<(usize, usize)> = (0..shape.0)
                .flat_map(|i| (0..shape.1).map(move |j| (i, j)))
                .filter(|&(i, j)| x[(i, j)] <= POINT_TOL)
                .collect();
            if mask.is_empty() {
                Ok(sub)
            } else {
                Ok(NormalConeModel::Sum(vec![
                    sub,
                    NormalConeModel::Orthant { mask, shape },
                ]))
            }
        }
        Family::BinaryQp { a, b } => {
            let mut parts = vec![orthonormal_subspace(
                set.affine().expect("affine").ops().to_vec(),
                shape,
            )?];
            for (ai, bi) in a.iter().zip(b) {
                if (ai.dot(x) - bi).abs() <= POINT_TOL * (1.0 + bi.abs()) && ai.norm() > 0.0 {
                    parts.push(NormalConeModel::Ray {
                        generator: ai / ai.norm(),
                    });
                }
            }
            Ok(if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                NormalConeModel::Sum(parts)
            })
        }
    }
}

/// Model of N_Ω(X̄) for the full set.
pub fn normal_cone_model(set: &ConstraintSet, xbar: &Matrix) -> Result<NormalConeModel> {
    check_point(set, xbar, false)?;
    let x = xbar.as_dmatrix();
    let xi = xi_model_mat(set, x)?;
    if !set.psd_intersected() {
        return Ok(xi);
    }
    let psd = psd_piece(x)?;
    Ok(match xi {
        NormalConeModel::Zero => psd,
        other => NormalConeModel::Sum(vec![other, psd]),
    })
}
