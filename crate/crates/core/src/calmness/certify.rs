//! Certification of the two normal-cone criteria at a point of rank r.
//!
//! Criterion 1 asks whether (−N_Ω(X̄)) ∩ N_{Λ_r}(X̄) = {0}; criterion 2 asks
//! the same for N_Ξ and N_{Λ_r^+}. At a PSD point of rank exactly r the
//! PSD piece P_β K P_β^T lies inside the rank-set subspace, so the
//! sum N_{S_+} + N_{Λ_r} is that subspace and both criteria meet a linear
//! rank side.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome};
use crate::matrix::{symmetrize, Mat, Matrix};
use crate::sets::{
    self, normal_cone_model, rank_piece, xi_normal_cone_model, ConstraintSet,
    NormalConeModel,
};
use crate::spectral::{self, DEFAULT_RANK_EPS};

/// Cone-membership tolerance for returned witnesses.
pub const WITNESS_TOL: f64 = 1e-8;
pub const WITNESS_MIN_NORM: f64 = 1e-6;

const POINT_TOL: f64 = 1e-8;
const LP_POSITIVE: f64 = 1e-8;
const NULL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    TrivialIntersection,
    WitnessFound,
    Inconclusive,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::TrivialIntersection => "trivial-intersection",
            Outcome::WitnessFound => "witness-found",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertMethod {
    Nullspace,
    Lp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    /// Null space for linear models, LP otherwise.
    Auto,
    Nullspace,
    Lp,
}

impl MethodChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "nullspace" => Ok(MethodChoice::Nullspace),
            "lp" => Ok(MethodChoice::Lp),
            other => Err(Error::arg(format!("unknown certificate method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CertificateDetails {
    pub normal_model: String,
    pub normal_dimension: Option<usize>,
    pub rank_dimension: Option<usize>,
    pub intersection_dimension: Option<usize>,
    pub lp_optimum: Option<f64>,
    pub lp_solves: usize,
    pub numeric_rank: usize,
    pub witness_residual: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub criterion: u8,
    pub outcome: Outcome,
    pub method: CertMethod,
    pub witness: Option<Matrix>,
    pub details: CertificateDetails,
}

pub fn check_criterion1(omega: &ConstraintSet, r: usize, xbar: &Matrix) -> Result<Certificate> {
    check_criterion1_with(omega, r, xbar, MethodChoice::Auto)
}

pub fn check_criterion1_with(
    omega: &ConstraintSet,
    r: usize,
    xbar: &Matrix,
    method: MethodChoice,
) -> Result<Certificate> {
    certify(omega, r, xbar, 1, method)
}

/// Criterion 2 on Ξ; `xi` is a PSD-intersected set Ω = Ξ ∩ S_+^n (or any
/// symmetric set, read as Ξ itself).
pub fn check_criterion2(xi: &ConstraintSet, r: usize, xbar: &Matrix) -> Result<Certificate> {
    check_criterion2_with(xi, r, xbar, MethodChoice::Auto)
}

pub fn check_criterion2_with(
    xi: &ConstraintSet,
    r: usize,
    xbar: &Matrix,
    method: MethodChoice,
) -> Result<Certificate> {
    certify(xi, r, xbar, 2, method)
}

fn certify(
    set: &ConstraintSet,
    r: usize,
    xbar: &Matrix,
    criterion: u8,
    choice: MethodChoice,
) -> Result<Certificate> {
    set.check(xbar, "Xbar")?;
    if r == 0 || r > set.rows() {
        return Err(Error::arg(format!("rank index r={r} outside 1..={}", set.rows())));
    }
    if criterion == 2 && !set.is_symmetric() {
        return Err(Error::arg(format!(
            "criterion 2 needs a symmetric set, got {set}"
        )));
    }
    let x = xbar.as_dmatrix();
    let res = if criterion == 1 {
        set.residual_mat(x)?
    } else {
        set.residual_xi_mat(x)? + sets::psd_deficit(x)?
    };
    if res > POINT_TOL {
        let target = if criterion == 1 { "Ω" } else { "Ξ ∩ S_+" };
        return Err(Error::Precondition(format!(
            "Xbar is not in {target} for {set} (residual {res:.3e})"
        )));
    }
    let sigma = linalg::singular_values(x)?;
    let rank = spectral::rank_of(&sigma, DEFAULT_RANK_EPS);
    let mut cert = Certificate {
        criterion,
        outcome: Outcome::Inconclusive,
        method: CertMethod::Nullspace,
        witness: None,
        details: CertificateDetails {
            numeric_rank: rank,
            ..Default::default()
        },
    };
    if rank > r {
        return Err(Error::Precondition(format!(
            "Xbar has numeric rank {rank} > r={r}, so it is not in Γ_r"
        )));
    }
    if rank < r {
        cert.details.note = Some(format!(
            "numeric rank {rank} < r={r}: the rank-set normal cone is not a subspace there and is not modelled"
        ));
        return Ok(cert);
    }

    let side = if criterion == 1 {
        normal_cone_model(set, xbar)?
    } else {
        xi_normal_cone_model(set, xbar)?
    };
    let rank_model = rank_piece(x, r, set.is_symmetric())?;
    let shape = set.shape();
    let b = rank_model
        .span_basis(shape)?
        .expect("rank model is linear");
    cert.details.normal_model = side.kind().to_string();
    cert.details.normal_dimension = side.dimension(shape)?;
    cert.details.rank_dimension = Some(b.ncols());

    if criterion == 1 {
        if let Some(h) = psd_witness(&side, &rank_model)? {
            let resid = psd_witness_residual(x, &h, &b)?;
            cert.details.note = Some("PSD witness P_β P_β^T".into());
            return Ok(accept(cert, h, resid, set));
        }
    }

    let lp_ok = side.pieces().iter().all(|p| !has_active_psd(p));
    let method = match choice {
        MethodChoice::Auto if side.is_linear() || !lp_ok || lone_pointed_orthogonal(&side, &b) => {
            CertMethod::Nullspace
        }
        MethodChoice::Auto => CertMethod::Lp,
        MethodChoice::Nullspace => CertMethod::Nullspace,
        MethodChoice::Lp if lp_ok => CertMethod::Lp,
        MethodChoice::Lp => {
            return Err(Error::arg(
                "the LP path cannot represent a PSD normal cone with a nontrivial kernel",
            ))
        }
    };
    cert.method = method;
    match method {
        CertMethod::Nullspace => nullspace_path(cert, &side, &b, set),
        CertMethod::Lp => lp_path(cert, &side, &b, set),
    }
}

fn has_active_psd(piece: &NormalConeModel) -> bool {
    matches!(piece, NormalConeModel::Psd { beta, .. } if !beta.is_empty())
}

/// For Ω ⊆ S_+ at a rank-deficient point, H = P_β P_β^T satisfies
/// −H ∈ N_{S_+}(X̄) ⊆ N_Ω(X̄) and H ∈ N_{Λ_r}(X̄).
fn psd_witness(side: &NormalConeModel, rank_model: &NormalConeModel) -> Result<Option<Mat>> {
    for piece in side.pieces() {
        if let NormalConeModel::Psd { p, beta } = piece {
            if beta.is_empty() {
                continue;
            }
            let pb = sets::select_columns(p, beta);
            let h = symmetrize(&(&pb * pb.transpose()));
            if rank_model.contains(&h, WITNESS_TOL)? == Some(true) {
                return Ok(Some(h));
            }
        }
    }
    Ok(None)
}

/// Direct residuals: H X̄ = 0 (so −H is in the PSD normal cone once H ⪰ 0),
/// H ⪰ 0, and H in the rank-set subspace.
fn psd_witness_residual(x: &Mat, h: &Mat, b: &Mat) -> Result<f64> {
    let hn = h.norm();
    let kernel = (h * x).norm() / (hn * x.norm().max(1.0));
    let neg = (-linalg::min_eig(h)?).max(0.0) / hn;
    Ok(kernel.max(neg).max(span_residual(h, b)))
}

/// Relative distance of vec(H) from the span of the orthonormal columns `b`.
fn span_residual(h: &Mat, b: &Mat) -> f64 {
    let v = linalg::vec_of(h);
    let proj = b * (b.transpose() * &v);
    (v - proj).norm() / h.norm().max(f64::MIN_POSITIVE)
}

fn accept(mut cert: Certificate, h: Mat, resid: f64, set: &ConstraintSet) -> Certificate {
    cert.details.witness_residual = Some(resid);
    if resid <= WITNESS_TOL && h.norm() >= WITNESS_MIN_NORM {
        cert.outcome = Outcome::WitnessFound;
        cert.witness = Some(set.wrap(h));
    } else {
        cert.outcome = Outcome::Inconclusive;
        let msg = format!(
            "candidate witness failed verification (residual {resid:.3e}, norm {:.3e})",
            h.norm()
        );
        cert.details.note = Some(match cert.details.note.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }
    cert
}

/// Intersects the linear hull of the Ω-side model with the rank subspace
/// via the kernel of α ↦ (I − BB^T) Σ α_j vec(G_j).
fn nullspace_path(
    mut cert: Certificate,
    side: &NormalConeModel,
    b: &Mat,
    set: &ConstraintSet,
) -> Result<Certificate> {
    let shape = set.shape();
    let pieces = side.pieces();
    if pieces.iter().any(|p| matches!(p, NormalConeModel::Pointed { .. })) {
        if lone_pointed_orthogonal(side, b) {
            cert.details.intersection_dimension = Some(0);
            cert.outcome = Outcome::TrivialIntersection;
            return Ok(cert);
        }
        cert.details.note =
            Some("pointed normal cone: the null-space path cannot resolve it, use the LP path".into());
        return Ok(cert);
    }
    let gens = side.span_generators().expect("no pointed pieces");
    let d = shape.0 * shape.1;
    if gens.is_empty() || b.ncols() == 0 {
        cert.details.intersection_dimension = Some(0);
        cert.outcome = Outcome::TrivialIntersection;
        return Ok(cert);
    }
    let mut g = Mat::zeros(d, gens.len());
    for (k, gk) in gens.iter().enumerate() {
        let v = linalg::vec_of(gk);
        g.set_column(k, &(&v / v.norm().max(f64::MIN_POSITIVE)));
    }
    let m = &g - b * (b.transpose() * &g);
    let kernel = linalg::null_space(&m, NULL_TOL)?;
    let meet = linalg::orthonormalize(&(&g * &kernel), NULL_TOL)?;
    cert.details.intersection_dimension = Some(meet.ncols());
    if meet.ncols() == 0 {
        cert.outcome = Outcome::TrivialIntersection;
        return Ok(cert);
    }
    if !side.is_linear() {
        cert.details.note = Some(
            "linear hulls intersect; the null-space path does not resolve cone signs, use the LP path"
                .into(),
        );
        return Ok(cert);
    }
    let mut h = linalg::unvec(meet.column(0).as_slice(), shape.0, shape.1);
    if set.is_symmetric() {
        h = symmetrize(&h);
    }
    let hn = h.norm();
    let h = h / hn;
    let omega_basis = side.span_basis(shape)?.expect("linear model");
    let resid = span_residual(&h, &omega_basis).max(span_residual(&h, b));
    Ok(accept(cert, h, resid, set))
}

/// A lone pointed piece has <G, anchor> > 0 for every nonzero G, so an
/// anchor orthogonal to the rank subspace forces the intersection to {0}.
fn lone_pointed_orthogonal(side: &NormalConeModel, b: &Mat) -> bool {
    let pieces: Vec<_> = side
        .pieces()
        .into_iter()
        .filter(|p| !matches!(p, NormalConeModel::Zero))
        .collect();
    match pieces.as_slice() {
        [NormalConeModel::Pointed { anchor, .. }] => {
            (b.transpose() * linalg::vec_of(anchor)).norm() <= NULL_TOL
        }
        _ => false,
    }
}

/// One column block of the LP: a piece of the Ω-side model.
enum Block {
    /// Free coefficients on a basis (split into ± pairs).
    Free { start: usize, basis: Vec<Mat> },
    Ray { col: usize, generator: Mat },
    /// Nonnegative weights on −E_ij.
    Orthant { start: usize, mask: Vec<(usize, usize)> },
    Pointed { start: usize },
}

/// Maximizes ±H_e over {H : −H ∈ N_side, H ∈ span(B), |H_ij| ≤ 1} one
/// coordinate at a time and stops at the first positive optimum.
fn lp_path(
    mut cert: Certificate,
    side: &NormalConeModel,
    b: &Mat,
    set: &ConstraintSet,
) -> Result<Certificate> {
    let (rows, cols) = set.shape();
    let d = rows * cols;
    let k = b.ncols();
    // Layout: H+ (d), H- (d), rank coefficients ± (2k), then Ω-side blocks.
    let mut next = 2 * d + 2 * k;
    let mut blocks = Vec::new();
    let mut pointed = Vec::new();
    for piece in side.pieces() {
        match piece {
            NormalConeModel::Zero => {}
            NormalConeModel::Psd { beta, .. } if beta.is_empty() => {}
            NormalConeModel::Psd { .. } => unreachable!("filtered by the caller"),
            NormalConeModel::Subspace { .. } | NormalConeModel::RankSet { .. } => {
                let basis = piece.span_generators().expect("linear piece");
                blocks.push(Block::Free { start: next, basis: basis.clone() });
                next += 2 * basis.len();
            }
            NormalConeModel::Ray { generator } => {
                blocks.push(Block::Ray { col: next, generator: generator.clone() });
                next += 1;
            }
            NormalConeModel::Orthant { mask, .. } => {
                blocks.push(Block::Orthant { start: next, mask: mask.clone() });
                next += mask.len();
            }
            NormalConeModel::Pointed { anchor, margin } => {
                blocks.push(Block::Pointed { start: next });
                pointed.push((next, anchor.clone(), *margin));
                next += 2 * d;
            }
            NormalConeModel::Sum(_) => unreachable!("pieces are flattened"),
        }
    }
    let n = next;
    let mut lp = LinearProgram::new(n);
    // H − Σ c_k B_k = 0.
    for e in 0..d {
        let mut row = vec![0.0; n];
        row[e] = 1.0;
        row[d + e] = -1.0;
        for j in 0..k {
            row[2 * d + 2 * j] = -b[(e, j)];
            row[2 * d + 2 * j + 1] = b[(e, j)];
        }
        lp.add_eq(row, 0.0);
    }
    // H + (Ω-side element) = 0.
    for e in 0..d {
        let (i, j) = (e % rows, e / rows);
        let mut row = vec![0.0; n];
        row[e] = 1.0;
        row[d + e] = -1.0;
        for blk in &blocks {
            match blk {
                Block::Free { start, basis } => {
                    for (t, g) in basis.iter().enumerate() {
                        row[start + 2 * t] = g[(i, j)];
                        row[start + 2 * t + 1] = -g[(i, j)];
                    }
                }
                Block::Ray { col, generator } => row[*col] = generator[(i, j)],
                Block::Orthant { start, mask } => {
                    if let Some(t) = mask.iter().position(|&m| m == (i, j)) {
                        row[start + t] = -1.0;
                    }
                }
                Block::Pointed { start } => {
                    row[start + e] = 1.0;
                    row[start + d + e] = -1.0;
                }
            }
        }
        lp.add_eq(row, 0.0);
    }
    for (start, anchor, margin) in &pointed {
        // margin·Σ(G+ + G−) − <G+ − G−, anchor> ≤ 0.
        let mut row = vec![0.0; n];
        for e in 0..d {
            let a = anchor[(e % rows, e / rows)];
            row[start + e] = margin - a;
            row[start + d + e] = margin + a;
        }
        lp.add_le(row, 0.0);
    }
    for e in 0..2 * d {
        let mut row = vec![0.0; n];
        row[e] = 1.0;
        lp.add_le(row, 1.0);
    }

    let coords: Vec<usize> = (0..d)
        .filter(|&e| !set.is_symmetric() || e % rows <= e / rows)
        .collect();
    let mut best = 0.0f64;
    for &e in &coords {
        for sign in [1.0, -1.0] {
            let mut obj = vec![0.0; n];
            obj[e] = sign;
            obj[d + e] = -sign;
            lp.objective = obj;
            cert.details.lp_solves += 1;
            let (x, value) = match lp.solve()? {
                LpOutcome::Optimal { x, value } => (x, value),
                other => {
                    return Err(Error::Precondition(format!(
                        "certificate LP is {other:?}; the zero matrix should be feasible"
                    )))
                }
            };
            best = best.max(value);
            if value > LP_POSITIVE {
                cert.details.lp_optimum = Some(value);
                let h = Mat::from_fn(rows, cols, |i, j| {
                    let e = i + j * rows;
                    x[e] - x[d + e]
                });
                let scale = h.norm();
                let resid = lp_witness_residual(&x, &h, &blocks, side, b, (rows, cols))?;
                return Ok(accept(cert, h / scale, resid, set));
            }
        }
    }
    cert.details.lp_optimum = Some(best);
    cert.details.intersection_dimension = Some(0);
    cert.outcome = Outcome::TrivialIntersection;
    Ok(cert)
}

/// Rebuilds each piece's contribution from the LP solution and checks the
/// cone memberships and the decomposition H + Σ contributions = 0.
fn lp_witness_residual(
    x: &[f64],
    h: &Mat,
    blocks: &[Block],
    side: &NormalConeModel,
    b: &Mat,
    shape: (usize, usize),
) -> Result<f64> {
    let (rows, cols) = shape;
    let d = rows * cols;
    let hn = h.norm().max(f64::MIN_POSITIVE);
    let mut total = h.clone();
    let mut worst = span_residual(h, b);
    let active: Vec<&NormalConeModel> = side
        .pieces()
        .into_iter()
        .filter(|p| !matches!(p, NormalConeModel::Zero | NormalConeModel::Psd { .. }))
        .collect();
    for (blk, piece) in blocks.iter().zip(active) {
        let part = match blk {
            Block::Free { start, basis } => {
                let mut m = Mat::zeros(rows, cols);
                for (t, g) in basis.iter().enumerate() {
                    m += g * (x[start + 2 * t] - x[start + 2 * t + 1]);
                }
                m
            }
            Block::Ray { col, generator } => generator * x[*col],
            Block::Orthant { start, mask } => {
                let mut m = Mat::zeros(rows, cols);
                for (t, &(i, j)) in mask.iter().enumerate() {
                    m[(i, j)] = -x[start + t];
                }
                m
            }
            Block::Pointed { start } => {
                Mat::from_fn(rows, cols, |i, j| x[start + i + j * rows] - x[start + d + i + j * rows])
            }
        };
        if piece.contains(&(&part / hn), WITNESS_TOL)? != Some(true) {
            worst = f64::INFINITY;
        }
        total += part;
    }
    Ok(worst.max(total.norm() / hn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::NormKind;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::new(rows, cols, v).unwrap()
    }

    #[test]
    fn row_stochastic_uniform_point_is_trivial_on_both_paths() {
        let s = ConstraintSet::row_stochastic(2).unwrap();
        let x = mat(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        for m in [MethodChoice::Auto, MethodChoice::Nullspace, MethodChoice::Lp] {
            let c = check_criterion1_with(&s, 1, &x, m).unwrap();
            assert_eq!(c.outcome, Outcome::TrivialIntersection, "{m:?}");
        }
        let c = check_criterion1_with(&s, 1, &x, MethodChoice::Lp).unwrap();
        assert_eq!(c.details.lp_optimum, Some(0.0));
    }

    #[test]
    fn row_stochastic_with_zero_entries() {
        let s = ConstraintSet::row_stochastic(2).unwrap();
        let x = mat(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let c = check_criterion1(&s, 1, &x).unwrap();
        assert_eq!(c.method, CertMethod::Lp);
        assert_ne!(c.outcome, Outcome::Inconclusive);
        if let Some(h) = &c.witness {
            assert!(h.fro_norm() >= WITNESS_MIN_NORM);
        }
    }

    #[test]
    fn spectral_ball_boundary_is_trivial() {
        let s = ConstraintSet::norm_ball(NormKind::Spectral, 1.0, 2, 3).unwrap();
        let x = mat(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let c = check_criterion1(&s, 1, &x).unwrap();
        assert_eq!(c.outcome, Outcome::TrivialIntersection);
        let c = check_criterion1_with(&s, 1, &x, MethodChoice::Nullspace).unwrap();
        assert_eq!(c.outcome, Outcome::TrivialIntersection);
    }

    #[test]
    fn ball_boundary_points_are_trivial_on_the_lp_path() {
        use rand::SeedableRng;
        let mut g = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for norm in [NormKind::Spectral, NormKind::Nuclear] {
            let s = ConstraintSet::norm_ball(norm, 2.0, 3, 4).unwrap();
            for k in 0..60 {
                let r = 1 + k % 2;
                let a = crate::rng::gaussian(3, r, &mut g) * crate::rng::gaussian(r, 4, &mut g);
                let a = &a * (2.0 / norm.eval(&a).unwrap());
                let x = Matrix::from_dmatrix(a).unwrap();
                let lp = check_criterion1_with(&s, r, &x, MethodChoice::Lp).unwrap();
                assert_eq!(lp.outcome, Outcome::TrivialIntersection, "{norm:?} k={k}");
                let auto = check_criterion1(&s, r, &x).unwrap();
                assert_eq!(auto.method, CertMethod::Nullspace);
                assert_eq!(auto.outcome, Outcome::TrivialIntersection);
            }
        }
    }

    #[test]
    fn psd_cone_gives_kernel_projector() {
        let s = ConstraintSet::psd_cone(2).unwrap();
        let x = Matrix::diag(&[1.0, 0.0]).unwrap();
        let c = check_criterion1(&s, 1, &x).unwrap();
        assert_eq!(c.outcome, Outcome::WitnessFound);
        let h = c.witness.unwrap();
        assert!(h.sub(&Matrix::diag(&[0.0, 1.0]).unwrap()).unwrap().fro_norm() < 1e-12);
    }

    #[test]
    fn correlation_criterion2_is_trivial() {
        let s = ConstraintSet::correlation(2).unwrap();
        let x = Matrix::symmetric(2, &[1.0; 4]).unwrap();
        let c = check_criterion2(&s, 1, &x).unwrap();
        assert_eq!(c.outcome, Outcome::TrivialIntersection);
        assert_eq!(c.details.intersection_dimension, Some(0));
    }

    #[test]
    fn quad_diag_criterion2_is_trivial() {
        let s = ConstraintSet::quad_diag(3).unwrap();
        let x = Matrix::diag(&[1.0, 0.0, 0.0]).unwrap();
        let c = check_criterion2(&s, 1, &x).unwrap();
        assert_eq!(c.outcome, Outcome::TrivialIntersection);
    }

    #[test]
    fn singular_two_trace_has_witness() {
        // B − C = diag(0, −1) is singular and annihilates Xbar = e1 e1^T.
        let b = Matrix::diag(&[1.0, 0.0]).unwrap();
        let cm = Matrix::identity(2);
        let s = ConstraintSet::two_trace_unchecked(&b, &cm, 1.0, 1.0).unwrap();
        let x = Matrix::diag(&[1.0, 0.0]).unwrap();
        let c = check_criterion2(&s, 1, &x).unwrap();
        assert_eq!(c.outcome, Outcome::WitnessFound);
        let h = c.witness.unwrap();
        assert!((h.as_dmatrix() * x.as_dmatrix()).norm() < 1e-10);
        assert!(h.fro_norm() >= WITNESS_MIN_NORM);
        let lp = check_criterion2_with(&s, 1, &x, MethodChoice::Lp).unwrap();
        assert_eq!(lp.outcome, Outcome::WitnessFound);
    }

    #[test]
    fn rank_below_r_is_inconclusive() {
        let s = ConstraintSet::ambient(2, 2).unwrap();
        let x = mat(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let c = check_criterion1(&s, 2, &x).unwrap();
        assert_eq!(c.outcome, Outcome::Inconclusive);
        assert!(c.details.note.unwrap().contains("rank"));
    }

    #[test]
    fn point_outside_is_rejected() {
        let s = ConstraintSet::correlation(2).unwrap();
        let x = Matrix::identity(2);
        let bad = Matrix::diag(&[2.0, 1.0]).unwrap();
        assert!(check_criterion2(&s, 1, &bad).is_err());
        // I_2 is in Ω but has rank 2 > 1.
        assert!(matches!(
            check_criterion2(&s, 1, &x),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn frobenius_ball_boundary() {
        let s = ConstraintSet::norm_ball(NormKind::Frobenius, 1.0, 2, 2).unwrap();
        let x = mat(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let c = check_criterion1(&s, 1, &x).unwrap();
        assert_eq!(c.outcome, Outcome::TrivialIntersection);
    }
}
