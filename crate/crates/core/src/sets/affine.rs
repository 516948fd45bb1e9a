use crate::error::Result;
use crate::linalg;
use crate::matrix::Mat;

/// `{X : <A_i, X> = b_i}` with a precomputed Gram pseudo-inverse.
#[derive(Clone, Debug)]
pub struct AffineMap {
    ops: Vec<Mat>,
    rhs: Vec<f64>,
    gram_pinv: Mat,
}

impl AffineMap {
    pub fn new(ops: Vec<Mat>, rhs: Vec<f64>) -> Result<Self> {
        let k = ops.len();
        let gram = Mat::from_fn(k, k, |i, j| ops[i].dot(&ops[j]));
        let gram_pinv = pinv_sym(&gram)?;
        Ok(AffineMap {
            ops,
            rhs,
            gram_pinv,
        })
    }

    pub fn ops(&self) -> &[Mat] {
        &self.ops
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn apply(&self, x: &Mat) -> Vec<f64> {
        self.ops.iter().map(|a| a.dot(x)).collect()
    }

    /// 𝒜*(y) = Σ y_i A_i.
    pub fn adjoint(&self, y: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.ops[0].nrows(), self.ops[0].ncols());
        for (a, yi) in self.ops.iter().zip(y) {
            out += a * *yi;
        }
        out
    }

    pub fn residual(&self, x: &Mat) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(v, b)| (v - b) * (v - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn project(&self, x: &Mat) -> Mat {
        let d: Vec<f64> = self
            .apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(v, b)| v - b)
            .collect();
        let dv = nalgebra::DVector::from_vec(d);
        let c = &self.gram_pinv * dv;
        x - self.adjoint(c.as_slice())
    }
}

fn pinv_sym(g: &Mat) -> Result<Mat> {
    let (vals, p) = linalg::eig(g)?;
    let top = vals.first().copied().unwrap_or(0.0).abs().max(1.0);
    let inv: Vec<f64> = vals
        .iter()
        .map(|&v| if v.abs() > 1e-12 * top { 1.0 / v } else { 0.0 })
        .collect();
    Ok(linalg::recompose(&p, &inv, &p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_projection_sets_diagonal() {
        let ops: Vec<Mat> = (0..2)
            .map(|i| {
                let mut e = Mat::zeros(2, 2);
                e[(i, i)] = 1.0;
                e
            })
            .collect();
        let a = AffineMap::new(ops, vec![1.0, 1.0]).unwrap();
        let x = Mat::from_row_slice(2, 2, &[3.0, 0.4, 0.4, -1.0]);
        let p = a.project(&x);
        assert!((p - Mat::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn redundant_rows_are_handled() {
        // Xe = e and X^T e = e share one redundant row.
        let n = 2;
        let mut ops = Vec::new();
        for i in 0..n {
            let mut a = Mat::zeros(n, n);
            a.row_mut(i).fill(1.0);
            ops.push(a.clone());
            ops.push(a.transpose());
        }
        let a = AffineMap::new(ops, vec![1.0; 4]).unwrap();
        let p = a.project(&Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
        assert!(a.residual(&p) < 1e-14);
        assert!((p - Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0])).norm() < 1e-14);
    }
}
