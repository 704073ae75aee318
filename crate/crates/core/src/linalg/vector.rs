use super::real::Real;

/// Dense real vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    coords: Vec<Real>,
}

impl Vector {
    pub fn new(coords: Vec<Real>) -> Self {
        assert!(!coords.is_empty(), "vector dimension must be positive");
        Vector { coords }
    }

    pub fn from_f64(xs: &[f64]) -> Self {
        Vector::new(xs.iter().map(|x| Real::from_f64(*x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Vector::new(vec![Real::zero(); dim])
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v.coords[i] = Real::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Real] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> &Real {
        &self.coords[i]
    }

    pub fn set(&mut self, i: usize, x: Real) {
        self.coords[i] = x;
    }

    pub fn dot(&self, other: &Vector) -> Real {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = Real::zero();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            if a.is_zero() || b.is_zero() {
                continue;
            }
            acc += a * b;
        }
        acc
    }

    pub fn norm(&self) -> Real {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, a: &Real) -> Vector {
        Vector::new(self.coords.iter().map(|x| x * a).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect())
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: &Real, x: &Vector) {
        for (s, xi) in self.coords.iter_mut().zip(&x.coords) {
            if xi.is_zero() {
                continue;
            }
            *s += a * xi;
        }
    }

    pub fn normalized(&self) -> Vector {
        let n = self.norm();
        Vector::new(self.coords.iter().map(|x| x / &n).collect())
    }

    /// `|‖v‖ - 1|`
    pub fn unit_defect(&self) -> f64 {
        (self.norm() - Real::one()).abs().to_f64()
    }

    pub fn max_abs(&self) -> Real {
        self.coords.iter().fold(Real::zero(), |m, x| m.max(&x.abs()))
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coords.iter().map(Real::to_f64).collect()
    }

    /// Copy of `self` with coordinates outside `keep` zeroed.
    pub fn restricted(&self, keep: &[usize]) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for &i in keep {
            out.coords[i] = self.coords[i].clone();
        }
        out
    }
}
