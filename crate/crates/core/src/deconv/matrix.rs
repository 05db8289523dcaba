use super::layer::DeconvLayer;
use crate::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::InvalidInput(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Matrix of a layer acting on `input_len` samples.
///
/// Column `i` holds the (interpolation-folded) kernel starting at row
/// `stride * i`, wrapped modulo `stride * input_len`. The bias is not part
/// of the matrix.
pub fn deconv_matrix(layer: &DeconvLayer, input_len: usize) -> Result<Matrix> {
    if input_len == 0 {
        return Err(Error::InvalidParameter("input length must be >= 1".into()));
    }
    let k = layer.stride();
    let m = k * input_len;
    let (taps, offset) = layer.placement();
    let first = (m - offset % m) % m;
    let mut mat = Matrix::zeros(m, input_len);
    for i in 0..input_len {
        let start = (first + k * i) % m;
        for (t, &h) in taps.iter().enumerate() {
            mat.add((start + t) % m, i, h);
        }
    }
    Ok(mat)
}

/// Forward strided convolution `y[i] = sum_t h[t] x[(stride * i + t) mod N]`,
/// producing `N / stride` outputs. `N` must be a multiple of `stride`.
pub fn strided_convolution(x: &[f64], taps: &[f64], stride: usize) -> Result<Vec<f64>> {
    if stride == 0 || x.is_empty() || !x.len().is_multiple_of(stride) {
        return Err(Error::InvalidParameter(format!(
            "input length {} is not a positive multiple of stride {stride}",
            x.len()
        )));
    }
    let n = x.len();
    Ok((0..n / stride)
        .map(|i| {
            taps.iter()
                .enumerate()
                .map(|(t, &h)| h * x[(stride * i + t) % n])
                .sum()
        })
        .collect())
}
