use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{symmetrize, Mat, Matrix};
use crate::sets::ConstraintSet;

/// Smooth part f of the penalized problem.
#[derive(Clone, Debug)]
pub enum Objective {
    /// ½‖𝒜(X) − b‖² with 𝒜(X)_j = <A_j, X>.
    LeastSquares { ops: Vec<Mat>, b: Vec<f64> },
    /// <C, X>
    Linear { c: Mat },
    /// base + (μ/2)‖X‖_F²
    QuadraticRegularized { base: Box<Objective>, mu: f64 },
}

impl Objective {
    pub fn least_squares(ops: &[Matrix], b: &[f64]) -> Result<Self> {
        if ops.len() != b.len() {
            return Err(Error::dim("b", ops.len(), b.len()));
        }
        if ops.is_empty() {
            return Err(Error::arg("least squares needs at least one operator"));
        }
        let shape = (ops[0].rows(), ops[0].cols());
        for (i, a) in ops.iter().enumerate() {
            if (a.rows(), a.cols()) != shape {
                return Err(Error::dim(
                    &format!("A_{i}"),
                    format!("{}x{}", shape.0, shape.1),
                    format!("{}x{}", a.rows(), a.cols()),
                ));
            }
        }
        Ok(Objective::LeastSquares {
            ops: ops.iter().map(|a| a.as_dmatrix().clone()).collect(),
            b: b.to_vec(),
        })
    }

    pub fn linear(c: &Matrix) -> Self {
        Objective::Linear {
            c: c.as_dmatrix().clone(),
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Objective::Linear {
            c: Mat::zeros(rows, cols),
        }
    }

    pub fn quadratic_regularized(base: Objective, mu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::arg(format!("mu must be nonnegative, got {mu}")));
        }
        Ok(Objective::QuadraticRegularized {
            base: Box::new(base),
            mu,
        })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Objective::LeastSquares { .. } => "least-squares",
            Objective::Linear { .. } => "linear",
            Objective::QuadraticRegularized { .. } => "quadratic-regularized",
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Objective::LeastSquares { ops, .. } => ops[0].shape(),
            Objective::Linear { c } => c.shape(),
            Objective::QuadraticRegularized { base, .. } => base.shape(),
        }
    }

    pub fn value(&self, x: &Matrix) -> Result<f64> {
        let (rows, cols) = self.shape();
        if (x.rows(), x.cols()) != (rows, cols) {
            return Err(Error::dim(
                "X",
                format!("{rows}x{cols}"),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        Ok(self.value_mat(x.as_dmatrix()))
    }

    pub(crate) fn value_mat(&self, x: &Mat) -> f64 {
        match self {
            Objective::LeastSquares { ops, b } => {
                0.5 * ops
                    .iter()
                    .zip(b)
                    .map(|(a, bi)| (a.dot(x) - bi).powi(2))
                    .sum::<f64>()
            }
            Objective::Linear { c } => c.dot(x),
            Objective::QuadraticRegularized { base, mu } => {
                base.value_mat(x) + 0.5 * mu * x.norm_squared()
            }
        }
    }

    pub(crate) fn gradient_mat(&self, x: &Mat) -> Mat {
        match self {
            Objective::LeastSquares { ops, b } => {
                let mut g = Mat::zeros(x.nrows(), x.ncols());
                for (a, bi) in ops.iter().zip(b) {
                    g += a * (a.dot(x) - bi);
                }
                g
            }
            Objective::Linear { c } => c.clone(),
            Objective::QuadraticRegularized { base, mu } => base.gradient_mat(x) + x * *mu,
        }
    }

    /// Lipschitz constant of ∇f. For least squares this is the top
    /// eigenvalue of the Gram matrix <A_i, A_j>, which shares its nonzero
    /// spectrum with 𝒜*𝒜.
    pub fn lipschitz(&self) -> Result<f64> {
        match self {
            Objective::LeastSquares { ops, .. } => {
                let k = ops.len();
                let gram = Mat::from_fn(k, k, |i, j| ops[i].dot(&ops[j]));
                Ok(linalg::eig(&symmetrize(&gram))?.0[0].max(0.0))
            }
            Objective::Linear { .. } => Ok(0.0),
            Objective::QuadraticRegularized { base, mu } => Ok(base.lipschitz()? + mu),
        }
    }

    /// Lower bound of f over the set, when one is available.
    pub fn lower_bound(&self, set: &ConstraintSet) -> Option<f64> {
        match self {
            Objective::LeastSquares { .. } => Some(0.0),
            Objective::Linear { c } => set.frobenius_radius().map(|r| -c.norm() * r),
            Objective::QuadraticRegularized { base, .. } => base.lower_bound(set),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub objective: Objective,
    pub set: ConstraintSet,
    pub r: usize,
    /// Weight ν of rank(X) in the regularized model.
    pub nu: f64,
}

impl ProblemSpec {
    pub fn new(objective: Objective, set: ConstraintSet, r: usize) -> Result<Self> {
        let shape = objective.shape();
        if shape != set.shape() {
            return Err(Error::dim(
                "objective",
                format!("{}x{}", set.rows(), set.cols()),
                format!("{}x{}", shape.0, shape.1),
            ));
        }
        if r == 0 || r > set.rows() {
            return Err(Error::arg(format!("rank index r={r} outside 1..={}", set.rows())));
        }
        Ok(ProblemSpec {
            objective,
            set,
            r,
            nu: 0.0,
        })
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::arg(format!("nu must be nonnegative, got {nu}")));
        }
        self.nu = nu;
        Ok(self)
    }

    /// Gradient of f, symmetrized for symmetric sets.
    pub(crate) fn gradient(&self, x: &Mat) -> Mat {
        let g = self.objective.gradient_mat(x);
        if self.set.is_symmetric() {
            symmetrize(&g)
        } else {
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_gradient_matches_differences() {
        let a1 = Matrix::new(2, 2, &[1.0, 2.0, 0.0, -1.0]).unwrap();
        let a2 = Matrix::new(2, 2, &[0.5, 0.0, 3.0, 1.0]).unwrap();
        let f = Objective::least_squares(&[a1, a2], &[1.0, -2.0]).unwrap();
        let x = Mat::from_row_slice(2, 2, &[0.3, -0.2, 0.7, 1.1]);
        let g = f.gradient_mat(&x);
        let h = 1e-6;
        for i in 0..2 {
            for j in 0..2 {
                let mut xp = x.clone();
                xp[(i, j)] += h;
                let mut xm = x.clone();
                xm[(i, j)] -= h;
                let fd = (f.value_mat(&xp) - f.value_mat(&xm)) / (2.0 * h);
                assert!((fd - g[(i, j)]).abs() < 1e-7);
            }
        }
        let l = f.lipschitz().unwrap();
        // Gram = [[6, -0.5], [-0.5, 10.25]].
        let expect = (16.25 + ((6.0f64 - 10.25).powi(2) + 1.0).sqrt()) / 2.0;
        assert!((l - expect).abs() < 1e-12);
    }
}
