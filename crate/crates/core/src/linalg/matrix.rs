use super::real::Real;
use super::vector::Vector;

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Real>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Matrix { dim, data: vec![Real::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Real::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Real) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows_f64(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Matrix::from_fn(dim, |i, j| Real::from_f64(rows[i][j]))
    }

    /// `u vᵀ`
    pub fn outer(u: &Vector, v: &Vector) -> Self {
        let dim = u.dim();
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            if u.get(i).is_zero() {
                continue;
            }
            for j in 0..dim {
                if v.get(j).is_zero() {
                    continue;
                }
                m.data[i * dim + j] = u.get(i) * v.get(j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Real {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Real) {
        self.data[i * self.dim + j] = x;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.dim;
        assert_eq!(n, other.dim, "dimension mismatch in product");
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if b.is_zero() {
                        continue;
                    }
                    out.data[i * n + j] += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scaled(&self, a: &Real) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|x| x * a).collect() }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        let n = self.dim;
        assert_eq!(n, x.dim(), "dimension mismatch in matrix-vector product");
        let mut out = vec![Real::zero(); n];
        for (i, slot) in out.iter_mut().enumerate() {
            for j in 0..n {
                let a = &self.data[i * n + j];
                let b = x.get(j);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                *slot += a * b;
            }
        }
        Vector::new(out)
    }

    pub fn max_abs(&self) -> Real {
        self.data.iter().fold(Real::zero(), |m, x| m.max(&x.abs()))
    }

    /// `max |A_ij - A_ji|`
    pub fn symmetry_defect(&self) -> Real {
        let n = self.dim;
        let mut worst = Real::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max(&(self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `(A + Aᵀ) / 2`
    pub fn symmetrized(&self) -> Matrix {
        let half = Real::ratio(1, 2);
        Matrix::from_fn(self.dim, |i, j| {
            if i == j {
                self.get(i, i).clone()
            } else {
                (self.get(i, j) + self.get(j, i)) * &half
            }
        })
    }

    pub fn trace(&self) -> Real {
        (0..self.dim).map(|i| self.get(i, i).clone()).sum()
    }

    /// Copy with every row and column outside `keep` zeroed.
    pub fn restricted(&self, keep: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.dim);
        for &i in keep {
            for &j in keep {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j).to_f64()).collect()).collect()
    }
}
