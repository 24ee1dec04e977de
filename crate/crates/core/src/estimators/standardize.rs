use crate::error::{Error, Result};
use crate::estimators::Dataset;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Column centering and scaling so that `diag(X'X / n) = I`, with `y`
/// centered but not rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizeTransform<T> {
    pub x_bar: Vec<T>,
    pub y_bar: T,
    /// Per-column root mean square about the mean.
    pub scales: Vec<T>,
}

pub fn standardize<T: Scalar>(d: &Dataset<T>) -> Result<(Dataset<T>, StandardizeTransform<T>)> {
    let (n, p) = d.x.shape();
    let nf = T::from_usize_lossy(n);
    let y_bar = d.y.iter().copied().sum::<T>() / nf;
    let y: Vec<T> = d.y.iter().map(|&v| v - y_bar).collect();

    let mut x = d.x.clone();
    let mut x_bar = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let col = d.x.column(j);
        let mean = col.iter().copied().sum::<T>() / nf;
        let centered: Vec<T> = col.iter().map(|&v| v - mean).collect();
        let scale = (centered.iter().map(|&v| v * v).sum::<T>() / nf).sqrt();
        let magnitude = col.iter().fold(T::one(), |m, v| m.max(v.abs()));
        if !(scale > T::lit(100.0) * T::epsilon() * magnitude) {
            return Err(Error::DegenerateColumn {
                index: j,
                name: d.column_name(j).map(str::to_owned),
            });
        }
        let scaled: Vec<T> = centered.iter().map(|&v| v / scale).collect();
        x.set_column(j, &scaled);
        x_bar.push(mean);
        scales.push(scale);
    }
    let out = Dataset { y, x, names: d.names.clone() };
    Ok((out, StandardizeTransform { x_bar, y_bar, scales }))
}

/// `ybar - xbar' theta` for coefficients already on the original scale.
pub fn recover_intercept<T: Scalar>(theta: &[T], t: &StandardizeTransform<T>) -> Result<T> {
    if theta.len() != t.x_bar.len() {
        return Err(Error::dims(format!(
            "{} coefficients for a transform over {} columns",
            theta.len(),
            t.x_bar.len()
        )));
    }
    Ok(t.y_bar - crate::scalar::dot(&t.x_bar, theta))
}

impl<T: Scalar> StandardizeTransform<T> {
    pub fn p(&self) -> usize {
        self.x_bar.len()
    }

    /// Maps standardized-scale coefficients to the original column units.
    pub fn coefficients_to_original(&self, theta: &[T]) -> Result<Vec<T>> {
        if theta.len() != self.p() {
            return Err(Error::dims("coefficient length differs from transform width"));
        }
        Ok(theta.iter().zip(&self.scales).map(|(&t, &s)| t / s).collect())
    }

    /// Applies the transform to new data with the same columns.
    pub fn apply(&self, d: &Dataset<T>) -> Result<Dataset<T>> {
        self.map(d, |v, m, s| (v - m) / s, |v| v - self.y_bar)
    }

    /// Undoes [`StandardizeTransform::apply`].
    pub fn invert(&self, d: &Dataset<T>) -> Result<Dataset<T>> {
        self.map(d, |v, m, s| v * s + m, |v| v + self.y_bar)
    }

    fn map(
        &self,
        d: &Dataset<T>,
        fx: impl Fn(T, T, T) -> T,
        fy: impl Fn(T) -> T,
    ) -> Result<Dataset<T>> {
        if d.p() != self.p() {
            return Err(Error::dims("dataset width differs from transform width"));
        }
        let (n, p) = d.x.shape();
        let mut x = Matrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                x[(i, j)] = fx(d.x[(i, j)], self.x_bar[j], self.scales[j]);
            }
        }
        let y = d.y.iter().map(|&v| fy(v)).collect();
        Ok(Dataset { y, x, names: d.names.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[Vec<f64>], y: Vec<f64>) -> Dataset<f64> {
        Dataset::new(Matrix::<f64>::from_rows(rows).unwrap(), y).unwrap()
    }

    #[test]
    fn two_point_example() {
        let d = ds(&[vec![2.0], vec![4.0]], vec![1.0, 3.0]);
        let (s, t) = standardize(&d).unwrap();
        assert_eq!(s.y, vec![-1.0, 1.0]);
        assert_eq!(s.x.column(0), vec![-1.0, 1.0]);
        assert_eq!(t, StandardizeTransform { x_bar: vec![3.0], y_bar: 2.0, scales: vec![1.0] });
    }

    #[test]
    fn standardized_data_is_a_fixed_point() {
        let d = ds(&[vec![-1.0, 1.0], vec![1.0, -1.0], vec![-1.0, -1.0], vec![1.0, 1.0]], vec![1.0, -2.0, 0.5, 0.5]);
        let (s, t) = standardize(&d).unwrap();
        assert!(s.x.max_abs_diff(&d.x) < 1e-15);
        assert!(s.y.iter().zip(&d.y).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(t.x_bar.iter().all(|v| v.abs() < 1e-15));
        assert!(t.y_bar.abs() < 1e-15);
        assert!(t.scales.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn constant_column_is_degenerate() {
        let d = Dataset::with_names(
            Matrix::<f64>::from_rows(&[vec![1.0, 0.1], vec![2.0, 0.1], vec![3.0, 0.1]]).unwrap(),
            vec![1.0, 2.0, 3.0],
            Some(vec!["a".into(), "flat".into()]),
        )
        .unwrap();
        match standardize(&d) {
            Err(Error::DegenerateColumn { index: 1, name }) => assert_eq!(name.as_deref(), Some("flat")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn intercept_examples() {
        let t = StandardizeTransform { x_bar: vec![3.0], y_bar: 2.0, scales: vec![1.0] };
        assert_eq!(recover_intercept(&[0.0], &t).unwrap(), 2.0);
        assert_eq!(recover_intercept(&[1.0], &t).unwrap(), -1.0);
        let t2 = StandardizeTransform { x_bar: vec![1.0, 1.0], y_bar: 0.0, scales: vec![1.0, 1.0] };
        assert_eq!(recover_intercept(&[1.0, -1.0], &t2).unwrap(), 0.0);
        assert!(recover_intercept(&[1.0, 2.0], &t).is_err());
    }
}
