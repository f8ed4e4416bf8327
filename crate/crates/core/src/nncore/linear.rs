use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGrads {
    pub d_x: Vec<f64>,
    pub d_w: Matrix,
    pub d_b: Vec<f64>,
}

/// `w·x + b`
pub fn linear_forward(x: &[f64], w: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != w.rows() {
        return Err(Error::dim("linear_forward bias", w.rows(), b.len()));
    }
    let mut y = w.matvec(x)?;
    for (yi, bi) in y.iter_mut().zip(b) {
        *yi += bi;
    }
    Ok(y)
}

pub fn linear_backward(d_y: &[f64], x: &[f64], w: &Matrix) -> Result<LinearGrads> {
    if d_y.len() != w.rows() || x.len() != w.cols() {
        return Err(Error::dim(
            "linear_backward",
            format!("d_y {}, x {}", w.rows(), w.cols()),
            format!("d_y {}, x {}", d_y.len(), x.len()),
        ));
    }
    let mut d_w = Matrix::zeros(w.rows(), w.cols());
    d_w.add_outer(d_y, x);
    Ok(LinearGrads {
        d_x: w.matvec_transposed(d_y)?,
        d_w,
        d_b: d_y.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::gradient_check;

    #[test]
    fn identity_passes_input_through() {
        let x = [0.5, -2.0, 3.0];
        assert_eq!(linear_forward(&x, &Matrix::identity(3), &[0.0; 3]).unwrap(), x.to_vec());
    }

    #[test]
    fn hand_computed_affine() {
        let w = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(linear_forward(&[1.0, 1.0], &w, &[1.0, 1.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn shape_errors() {
        let w = Matrix::zeros(2, 3);
        assert!(linear_forward(&[0.0; 2], &w, &[0.0; 2]).is_err());
        assert!(linear_forward(&[0.0; 3], &w, &[0.0; 3]).is_err());
        assert!(linear_backward(&[0.0; 3], &[0.0; 3], &w).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let w = Matrix::from_rows(&[vec![0.3, -1.2, 0.7], vec![2.1, 0.4, -0.5]]).unwrap();
        let b = [0.1, -0.3];
        let x = [0.9, -0.4, 1.5];
        let target = [0.25, -1.0];
        // loss = ½‖y − target‖²
        let loss = |w: &Matrix, b: &[f64], x: &[f64]| -> f64 {
            let y = linear_forward(x, w, b).unwrap();
            y.iter().zip(&target).map(|(a, t)| 0.5 * (a - t).powi(2)).sum()
        };
        let y = linear_forward(&x, &w, &b).unwrap();
        let d_y: Vec<f64> = y.iter().zip(&target).map(|(a, t)| a - t).collect();
        let g = linear_backward(&d_y, &x, &w).unwrap();

        let mut params = w.data().to_vec();
        params.extend_from_slice(&b);
        params.extend_from_slice(&x);
        let mut analytic = g.d_w.data().to_vec();
        analytic.extend_from_slice(&g.d_b);
        analytic.extend_from_slice(&g.d_x);
        let err = gradient_check(
            |v| {
                let w = Matrix::from_vec(2, 3, v[..6].to_vec()).unwrap();
                Ok(loss(&w, &v[6..8], &v[8..]))
            },
            &params,
            &analytic,
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-7, "rel err {err}");
    }
}
