use crate::error::{Error, Result};

/// Piecewise interpolant over strictly increasing abscissae.
#[derive(Debug, Clone)]
pub struct Interpolant {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots; all zero for linear interpolation.
    y2: Vec<f64>,
    cubic: bool,
}

impl Interpolant {
    /// Natural cubic spline (zero curvature at both ends).
    pub fn cubic(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check(&x, &y, 3)?;
        let n = x.len();
        // tridiagonal solve for the knot curvatures
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        y2[n - 1] = 0.0;
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        Ok(Self { x, y, y2, cubic: true })
    }

    pub fn linear(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check(&x, &y, 2)?;
        let n = x.len();
        Ok(Self {
            x,
            y,
            y2: vec![0.0; n],
            cubic: false,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.x.partition_point(|&v| v <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    /// Value at `t`; the end segments extend past the table.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let mut v = a * self.y[i] + b * self.y[i + 1];
        if self.cubic {
            v += ((a * a * a - a) * self.y2[i] + (b * b * b - b) * self.y2[i + 1]) * h * h / 6.0;
        }
        v
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let mut d = (self.y[i + 1] - self.y[i]) / h;
        if self.cubic {
            d += (-(3.0 * a * a - 1.0) * self.y2[i] + (3.0 * b * b - 1.0) * self.y2[i + 1]) * h / 6.0;
        }
        d
    }
}

fn check(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() || x.len() < min {
        return Err(Error::invalid(format!("interpolation table needs at least {min} matching rows")));
    }
    if let Some(w) = x.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!(
            "table abscissae must increase strictly (found {} then {})",
            w[0], w[1]
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("table contains non-finite values"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots_and_lines() {
        let x: Vec<f64> = (0..8).map(|k| k as f64 * 0.7).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let s = Interpolant::cubic(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((s.eval(*a) - b).abs() < 1e-12);
        }
        assert!((s.eval(1.234) - 1.468).abs() < 1e-12);
        assert!((s.derivative(3.3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn converges_on_smooth_data() {
        let x: Vec<f64> = (0..=200).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = Interpolant::cubic(x, y).unwrap();
        for t in [0.3, 0.777, 1.5] {
            assert!((s.eval(t) - f64::sin(t)).abs() < 1e-8);
            assert!((s.derivative(t) - f64::cos(t)).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Interpolant::cubic(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(Interpolant::cubic(vec![0.0, 1.0], vec![0.0; 2]).is_err());
        assert!(Interpolant::linear(vec![0.0, 1.0], vec![0.0]).is_err());
        let l = Interpolant::linear(vec![0.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(l.eval(0.5), 1.5);
    }
}
