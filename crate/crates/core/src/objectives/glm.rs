use nalgebra::{DMatrix, DVector};

use super::Objective;
use crate::error::{check_dim, Error, Result};

/// Sample least-square loss `L_n(θ) = (1/n) Σ (Y_i − (X_iᵀθ)^p)²` of the
/// polynomial-link GLM.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalGlmLoss {
    /// Design matrix, one sample per row.
    xs: DMatrix<f64>,
    ys: DVector<f64>,
    p: u32,
}

impl EmpiricalGlmLoss {
    pub fn new(xs: Vec<DVector<f64>>, ys: Vec<f64>, p: u32) -> Result<Self> {
        let d = xs.first().map(|x| x.len()).ok_or_else(|| {
            Error::InvalidParameter("dataset must contain at least one sample".into())
        })?;
        for x in &xs {
            check_dim(d, x.len())?;
        }
        let rows: Vec<_> = xs.iter().map(|x| x.transpose()).collect();
        Self::from_design(DMatrix::from_rows(&rows), DVector::from_vec(ys), p)
    }

    /// Builds the loss from an `n × d` design matrix.
    pub fn from_design(xs: DMatrix<f64>, ys: DVector<f64>, p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("link power p = {p} must be at least 2")));
        }
        if xs.nrows() == 0 || xs.ncols() == 0 {
            return Err(Error::InvalidParameter("dataset must contain at least one sample".into()));
        }
        check_dim(xs.nrows(), ys.len())?;
        Ok(Self { xs, ys, p })
    }

    pub fn n(&self) -> usize {
        self.xs.nrows()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.xs
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.ys
    }

    pub fn sample(&self, i: usize) -> (DVector<f64>, f64) {
        (self.xs.row(i).transpose(), self.ys[i])
    }

    /// Contiguous split: the first `round(frac · n)` samples and the rest.
    pub fn split(&self, frac: f64) -> Result<(Self, Self)> {
        let n = self.n();
        let head = (frac * n as f64).round() as usize;
        if !(0.0..=1.0).contains(&frac) || head == 0 || head == n {
            return Err(Error::InvalidParameter(format!(
                "split fraction {frac} leaves an empty part of {n} samples"
            )));
        }
        let d = self.dim();
        let first = Self {
            xs: self.xs.view((0, 0), (head, d)).into_owned(),
            ys: self.ys.rows(0, head).into_owned(),
            p: self.p,
        };
        let second = Self {
            xs: self.xs.view((head, 0), (n - head, d)).into_owned(),
            ys: self.ys.rows(head, n - head).into_owned(),
            p: self.p,
        };
        Ok((first, second))
    }

    fn projections(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), theta.len())?;
        Ok(&self.xs * theta)
    }
}

impl Objective for EmpiricalGlmLoss {
    fn dim(&self) -> usize {
        self.xs.ncols()
    }

    fn value(&self, theta: &DVector<f64>) -> Result<f64> {
        let z = self.projections(theta)?;
        let p = self.p as i32;
        let sum: f64 = z.iter().zip(self.ys.iter()).map(|(z, y)| (y - z.powi(p)).powi(2)).sum();
        Ok(sum / self.n() as f64)
    }

    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let z = self.projections(theta)?;
        let p = self.p as i32;
        let pf = f64::from(self.p);
        let weights = DVector::from_iterator(
            z.len(),
            z.iter().zip(self.ys.iter()).map(|(z, y)| -2.0 * pf * (y - z.powi(p)) * z.powi(p - 1)),
        );
        Ok(self.xs.tr_mul(&weights) / self.n() as f64)
    }

    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let z = self.projections(theta)?;
        let p = self.p as i32;
        let pf = f64::from(self.p);
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for (i, (z, y)) in z.iter().zip(self.ys.iter()).enumerate() {
            let w = 2.0 * pf * pf * z.powi(2 * p - 2) - 2.0 * pf * (pf - 1.0) * (y - z.powi(p)) * z.powi(p - 2);
            let x = self.xs.row(i);
            for a in 0..d {
                for b in 0..=a {
                    h[(a, b)] += w * x[a] * x[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        Ok(h / self.n() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn single_sample_arithmetic() {
        let loss = EmpiricalGlmLoss::new(vec![dvector![2.0]], vec![5.0], 2).unwrap();
        assert_eq!(loss.value(&dvector![1.0]).unwrap(), 1.0);
        // −2p(Y − z^p) z^{p−1} X = −4 · 1 · 2 · 2
        assert_eq!(loss.gradient(&dvector![1.0]).unwrap()[0], -16.0);
    }

    #[test]
    fn zero_model() {
        let xs = vec![dvector![1.0, -2.0], dvector![0.5, 0.3], dvector![3.0, 1.0]];
        let loss = EmpiricalGlmLoss::new(xs, vec![0.0; 3], 3).unwrap();
        let origin = dvector![0.0, 0.0];
        assert_eq!(loss.value(&origin).unwrap(), 0.0);
        assert_eq!(loss.gradient(&origin).unwrap(), dvector![0.0, 0.0]);
    }

    #[test]
    fn rejects_malformed_datasets() {
        assert!(EmpiricalGlmLoss::new(vec![], vec![], 2).is_err());
        assert!(matches!(
            EmpiricalGlmLoss::new(vec![dvector![1.0], dvector![1.0, 2.0]], vec![0.0, 0.0], 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(EmpiricalGlmLoss::new(vec![dvector![1.0]], vec![0.0, 1.0], 2).is_err());
        assert!(EmpiricalGlmLoss::new(vec![dvector![1.0]], vec![0.0], 1).is_err());
        let loss = EmpiricalGlmLoss::new(vec![dvector![1.0]], vec![0.0], 2).unwrap();
        assert!(loss.value(&dvector![1.0, 1.0]).is_err());
    }

    #[test]
    fn contiguous_split() {
        let xs: Vec<_> = (0..10).map(|i| dvector![i as f64]).collect();
        let ys: Vec<_> = (0..10).map(|i| i as f64).collect();
        let loss = EmpiricalGlmLoss::new(xs, ys, 2).unwrap();
        let (train, val) = loss.split(0.9).unwrap();
        assert_eq!(train.n(), 9);
        assert_eq!(val.n(), 1);
        assert_eq!(val.sample(0), (dvector![9.0], 9.0));
        assert!(loss.split(1.0).is_err());
    }
}
