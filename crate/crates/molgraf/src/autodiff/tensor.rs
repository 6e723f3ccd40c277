//! Dense row-major matrices of `f64`. Everything the engine moves around,
//! from atom features to weight matrices, is one of these.

/// A rows x cols matrix. Vectors are 1 x n or n x 1 tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Tensor {
        assert!(rows > 0 && cols > 0, "tensor dimensions must be positive");
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Tensor {
        let mut t = Tensor::zeros(rows, cols);
        t.data.fill(value);
        t
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Tensor {
        assert_eq!(data.len(), rows * cols, "data length must match dimensions");
        assert!(rows > 0 && cols > 0, "tensor dimensions must be positive");
        Tensor { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Tensor {
        assert!(!rows.is_empty(), "tensor needs at least one row");
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Tensor {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Tensor {
        let mut t = Tensor::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                t.data[i * cols + j] = f(i, j);
            }
        }
        t
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// The single entry of a 1x1 tensor.
    pub fn scalar(&self) -> f64 {
        assert_eq!((self.rows, self.cols), (1, 1), "scalar() needs a 1x1 tensor");
        self.data[0]
    }

    pub fn transposed(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Matrix product; panics on mismatched shapes. The tape checks shapes
    /// before calling in here.
    pub fn matmul(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Tensor::zeros(self.rows, other.cols);
        matmul_acc(self, other, &mut out.data);
        out
    }

    /// Squared Euclidean distance between row `i` of `self` and row `j`
    /// of `other`.
    pub fn row_distance_sq(&self, i: usize, other: &Tensor, j: usize) -> f64 {
        debug_assert_eq!(self.cols, other.cols);
        self.row(i)
            .iter()
            .zip(other.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// out += a @ b, with the inner loop running along contiguous rows of `b`
/// so it vectorizes.
pub(crate) fn matmul_acc(a: &Tensor, b: &Tensor, out: &mut [f64]) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    debug_assert_eq!(a.cols, b.rows);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        let a_row = &a.data[i * k..(i + 1) * k];
        for (l, &a_il) in a_row.iter().enumerate() {
            if a_il == 0.0 {
                continue;
            }
            let b_row = &b.data[l * n..(l + 1) * n];
            for (o, &b_lj) in out_row.iter_mut().zip(b_row) {
                *o += a_il * b_lj;
            }
        }
    }
}

/// out += a @ b^T. Rows of both operands are contiguous, so this is a
/// row-by-row dot product.
pub(crate) fn matmul_nt_acc(a: &Tensor, b: &Tensor, out: &mut [f64]) {
    let (m, k, n) = (a.rows, a.cols, b.rows);
    debug_assert_eq!(a.cols, b.cols);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        for j in 0..n {
            let b_row = &b.data[j * k..(j + 1) * k];
            let dot: f64 = a_row.iter().zip(b_row).map(|(x, y)| x * y).sum();
            out[i * n + j] += dot;
        }
    }
}

/// a @ b^T into a fresh tensor, written in a single pass.
pub(crate) fn matmul_nt(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k, n) = (a.rows, a.cols, b.rows);
    debug_assert_eq!(a.cols, b.cols);
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        for j in 0..n {
            let b_row = &b.data[j * k..(j + 1) * k];
            let dot: f64 = a_row.iter().zip(b_row).map(|(x, y)| x * y).sum();
            data.push(dot);
        }
    }
    Tensor::from_vec(m, n, data)
}

/// a^T @ b into a fresh tensor. The first row of `a` writes the result
/// outright so no zeroing sweep is needed; this is the gradient of every
/// dense weight, where `a` has a single row.
pub(crate) fn matmul_tn(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    debug_assert_eq!(a.rows, b.rows);
    let mut data = Vec::with_capacity(k * n);
    let b_row = &b.data[..n];
    for &a_il in &a.data[..k] {
        if a_il == 0.0 {
            data.resize(data.len() + n, 0.0);
        } else {
            data.extend(b_row.iter().map(|&y| a_il * y));
        }
    }
    let mut out = Tensor::from_vec(k, n, data);
    for i in 1..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        let b_row = &b.data[i * n..(i + 1) * n];
        for (l, &a_il) in a_row.iter().enumerate() {
            if a_il == 0.0 {
                continue;
            }
            let out_row = &mut out.data[l * n..(l + 1) * n];
            for (o, &b_ij) in out_row.iter_mut().zip(b_row) {
                *o += a_il * b_ij;
            }
        }
    }
    out
}

/// out += a^T @ b.
pub(crate) fn matmul_tn_acc(a: &Tensor, b: &Tensor, out: &mut [f64]) {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    debug_assert_eq!(a.rows, b.rows);
    debug_assert_eq!(out.len(), k * n);
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        let b_row = &b.data[i * n..(i + 1) * n];
        for (l, &a_il) in a_row.iter().enumerate() {
            if a_il == 0.0 {
                continue;
            }
            let out_row = &mut out[l * n..(l + 1) * n];
            for (o, &b_ij) in out_row.iter_mut().zip(b_row) {
                *o += a_il * b_ij;
            }
        }
    }
}
