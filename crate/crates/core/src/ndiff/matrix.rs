use serde::{Deserialize, Serialize};

use super::scalar::Real;
use super::NumericError;

/// Dense row-major matrix. Vectors are stored as `1 × n` matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Real> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, NumericError> {
        if data.len() != rows * cols {
            return Err(NumericError::BufferLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn row_vector(data: Vec<S>) -> Self {
        Self {
            rows: 1,
            cols: data.len(),
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
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
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, v: S) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Element type conversion, routed through `f64`.
    pub fn cast<T: Real>(&self) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| T::of(x.as_f64())).collect(),
        }
    }

    pub fn view(&self) -> View<'_, S> {
        View {
            data: &self.data,
            rows: self.rows,
            cols: self.cols,
            rs: self.cols,
            cs: 1,
        }
    }

    pub fn view_mut(&mut self) -> ViewMut<'_, S> {
        ViewMut {
            rows: self.rows,
            cols: self.cols,
            rs: self.cols,
            cs: 1,
            data: &mut self.data,
        }
    }

    /// Every `stride`-th row starting at `first`, `count` rows in total.
    pub fn strided_rows(&self, first: usize, stride: usize, count: usize) -> View<'_, S> {
        View {
            data: &self.data[first * self.cols..],
            rows: count,
            cols: self.cols,
            rs: stride * self.cols,
            cs: 1,
        }
    }

    pub fn strided_rows_mut(
        &mut self,
        first: usize,
        stride: usize,
        count: usize,
    ) -> ViewMut<'_, S> {
        ViewMut {
            rows: count,
            cols: self.cols,
            rs: stride * self.cols,
            cs: 1,
            data: &mut self.data[first * self.cols..],
        }
    }

    /// Column range `[start, start + width)` of every row.
    pub fn column_block(&self, start: usize, width: usize) -> View<'_, S> {
        View {
            data: &self.data[start..],
            rows: self.rows,
            cols: width,
            rs: self.cols,
            cs: 1,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.as_f64() - b.as_f64()).abs())
            .fold(0.0, f64::max)
    }
}

/// Borrowed strided matrix view.
#[derive(Clone, Copy, Debug)]
pub struct View<'a, S> {
    data: &'a [S],
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a, S: Real> View<'a, S> {
    pub fn new(data: &'a [S], rows: usize, cols: usize, rs: usize, cs: usize) -> Self {
        let view = Self {
            data,
            rows,
            cols,
            rs,
            cs,
        };
        assert!(view.in_bounds(), "view exceeds buffer");
        view
    }

    pub fn t(self) -> Self {
        Self {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.rs + c * self.cs]
    }

    fn in_bounds(&self) -> bool {
        self.rows == 0
            || self.cols == 0
            || (self.rows - 1) * self.rs + (self.cols - 1) * self.cs < self.data.len()
    }
}

/// Mutable strided matrix view.
#[derive(Debug)]
pub struct ViewMut<'a, S> {
    data: &'a mut [S],
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a, S: Real> ViewMut<'a, S> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn in_bounds(&self) -> bool {
        self.rows == 0
            || self.cols == 0
            || (self.rows - 1) * self.rs + (self.cols - 1) * self.cs < self.data.len()
    }
}

/// `c = alpha * a b + beta * c`.
///
/// Panics on inconsistent shapes; shape errors are caught at the public
/// operation boundary before reaching this point.
pub fn gemm<S: Real>(alpha: S, a: View<'_, S>, b: View<'_, S>, beta: S, c: ViewMut<'_, S>) {
    assert_eq!(a.cols, b.rows, "gemm inner dimension");
    assert_eq!(a.rows, c.rows, "gemm output rows");
    assert_eq!(b.cols, c.cols, "gemm output cols");
    assert!(
        a.in_bounds() && b.in_bounds() && c.in_bounds(),
        "gemm view out of bounds"
    );
    if c.rows == 0 || c.cols == 0 {
        return;
    }
    // SAFETY: all three views were bounds-checked above, and `c` holds the
    // only mutable borrow of its buffer.
    unsafe {
        S::gemm_raw(
            a.rows,
            a.cols,
            b.cols,
            alpha,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.data.as_mut_ptr(),
            c.rs as isize,
            c.cs as isize,
        );
    }
}

/// Adds `bias` (a `1 × cols` row) to every row of `m`.
pub fn add_row_bias<S: Real>(m: &mut Matrix<S>, bias: &Matrix<S>) {
    let cols = m.cols();
    for r in 0..m.rows() {
        for (x, &b) in m.row_mut(r).iter_mut().zip(bias.as_slice()) {
            *x += b;
        }
    }
    debug_assert_eq!(cols, bias.cols());
}

/// Accumulates the column sums of `m` into `acc` (a `1 × cols` row).
pub fn accumulate_column_sums<S: Real>(acc: &mut Matrix<S>, m: &Matrix<S>) {
    for r in 0..m.rows() {
        for (a, &x) in acc.as_mut_slice().iter_mut().zip(m.row(r)) {
            *a += x;
        }
    }
}
