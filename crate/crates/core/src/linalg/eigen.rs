//! Symmetric eigendecomposition by cyclic Jacobi sweeps, run separately on
//! each connected component of the sparsity graph.

use super::matrix::Matrix;
use super::operator::{OrthogonalMap, SymOperator};
use super::real::{precision_bits, Real};
use super::vector::Vector;
use super::{CONTRACTION_TOL, PSD_TOL, UNDERFLOW};
use crate::error::{Error, Result};
use crate::wordexpr::BigExponent;

const MAX_SWEEPS: usize = 80;

/// Eigenvalues sorted descending with matching unit eigenvectors.
#[derive(Clone, Debug)]
pub struct SymEig {
    dim: usize,
    values: Vec<Real>,
    vectors: Vec<Vector>,
}

/// Result of powering a PSD contraction spectrally.
#[derive(Clone, Debug)]
pub struct SpectralPower {
    pub op: SymOperator,
    /// Largest distance any eigenvalue was moved to land in [0, 1].
    pub clamp: f64,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    /// Eigenvectors as rows of an orthogonal map `V`, so `A = Vᵀ Λ V`.
    pub fn vectors_as_map(&self) -> Result<OrthogonalMap> {
        let m = Matrix::from_fn(self.dim, |i, j| self.vectors[i].get(j).clone());
        OrthogonalMap::new(m)
    }

    /// Rebuilds `Σ g(λ_k) v_k v_kᵀ`.
    pub fn reconstruct_with(&self, weights: &[Real]) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for (w, v) in weights.iter().zip(&self.vectors) {
            if w.is_zero() {
                continue;
            }
            let support: Vec<usize> = (0..n).filter(|&i| !v.get(i).is_zero()).collect();
            for &i in &support {
                let wi = w * v.get(i);
                for &j in &support {
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + &wi * v.get(j));
                }
            }
        }
        out
    }

    /// Spectral weights `λ^n`, with eigenvalues clamped to [0, 1].
    pub fn power_weights(&self, n: &BigExponent) -> Result<(Vec<Real>, f64)> {
        let exponent = n.to_real();
        let one = Real::one();
        let upper = Real::from_f64(1.0 + CONTRACTION_TOL);
        let lower = Real::from_f64(-PSD_TOL);
        let underflow = Real::from_f64(UNDERFLOW);
        let mut clamp = 0.0f64;
        let mut weights = Vec::with_capacity(self.values.len());
        for lambda in &self.values {
            if lambda > &upper {
                return Err(Error::NotContraction { eigenvalue: lambda.to_f64() });
            }
            if lambda < &lower {
                return Err(Error::NotPsd { eigenvalue: lambda.to_f64() });
            }
            let clamped = if lambda > &one {
                one.clone()
            } else if lambda.is_negative() {
                Real::zero()
            } else {
                lambda.clone()
            };
            clamp = clamp.max((lambda - &clamped).abs().to_f64());
            let w = if clamped.is_zero() {
                Real::zero()
            } else if clamped == one {
                one.clone()
            } else {
                let log = (&clamped - &one).ln1p();
                let w = (&exponent * &log).exp();
                if w < underflow {
                    Real::zero()
                } else {
                    w
                }
            };
            weights.push(w);
        }
        Ok((weights, clamp))
    }

    /// `A^n` for a PSD contraction `A`.
    pub fn power(&self, n: &BigExponent) -> Result<SpectralPower> {
        let (weights, clamp) = self.power_weights(n)?;
        let op = SymOperator::from_symmetric_unchecked(self.reconstruct_with(&weights).symmetrized());
        Ok(SpectralPower { op, clamp })
    }

    /// `A^n x` without forming `A^n`.
    pub fn apply_power(&self, n: &BigExponent, x: &Vector) -> Result<Vector> {
        let (weights, _) = self.power_weights(n)?;
        let mut out = Vector::zeros(self.dim);
        for (w, v) in weights.iter().zip(&self.vectors) {
            if w.is_zero() {
                continue;
            }
            let coeff = w * &v.dot(x);
            out.axpy(&coeff, v);
        }
        Ok(out)
    }
}

/// Full eigendecomposition of a symmetric operator.
pub fn sym_eig(a: &SymOperator) -> SymEig {
    decompose(a.matrix(), true)
}

/// Eigenvalues only, sorted descending.
pub fn eigenvalues(a: &SymOperator) -> Vec<Real> {
    decompose(a.matrix(), false).values
}

/// Operator norm `max |λ|`.
pub fn op_norm(a: &SymOperator) -> Real {
    eigenvalues(a).into_iter().fold(Real::zero(), |m, x| m.max(&x.abs()))
}

/// `A^n` for a symmetric PSD contraction, computed as `exp(n ln λ)` per eigenvalue.
pub fn spectral_power(a: &SymOperator, n: &BigExponent) -> Result<SymOperator> {
    Ok(sym_eig(a).power(n)?.op)
}

fn components(m: &Matrix) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !m.get(i, j).is_zero() || !m.get(j, i).is_zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn decompose(m: &Matrix, want_vectors: bool) -> SymEig {
    let n = m.dim();
    let mut pairs: Vec<(Real, Option<Vector>, usize)> = Vec::with_capacity(n);
    for group in components(m) {
        let k = group.len();
        let mut a: Vec<Real> = Vec::with_capacity(k * k);
        for &i in &group {
            for &j in &group {
                a.push(m.get(i, j).clone());
            }
        }
        let (diag, vecs) = jacobi(&mut a, k, want_vectors);
        for (c, lambda) in diag.into_iter().enumerate() {
            let v = vecs.as_ref().map(|v| {
                let mut full = Vector::zeros(n);
                for (r, &gi) in group.iter().enumerate() {
                    full.set(gi, v[r * k + c].clone());
                }
                full
            });
            pairs.push((lambda, v, group[c]));
        }
    }
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.2.cmp(&y.2)));
    let values = pairs.iter().map(|p| p.0.clone()).collect();
    let vectors = if want_vectors { pairs.into_iter().map(|p| p.1.unwrap()).collect() } else { Vec::new() };
    SymEig { dim: n, values, vectors }
}

/// In-place cyclic Jacobi on a `k × k` row-major symmetric block.
/// Returns the diagonal and, optionally, `V` with eigenvectors as columns.
fn jacobi(a: &mut [Real], k: usize, want_vectors: bool) -> (Vec<Real>, Option<Vec<Real>>) {
    let mut v = want_vectors.then(|| {
        let mut v = vec![Real::zero(); k * k];
        for i in 0..k {
            v[i * k + i] = Real::one();
        }
        v
    });
    if k == 1 {
        return (vec![a[0].clone()], v);
    }
    let eps = Real::one().ldexp(-(precision_bits() as i32 - 8));
    for _ in 0..MAX_SWEEPS {
        let mut off = Real::zero();
        let mut total = Real::zero();
        for i in 0..k {
            total += a[i * k + i].square();
            for j in (i + 1)..k {
                if !a[i * k + j].is_zero() {
                    off += a[i * k + j].square();
                }
            }
        }
        if off.is_zero() {
            break;
        }
        let scale = (&total + &off + &off).sqrt();
        let skip = &eps * &scale;
        if off.sqrt() <= skip {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q].clone();
                if apq.is_zero() {
                    continue;
                }
                if apq.abs() <= skip {
                    a[p * k + q] = Real::zero();
                    a[q * k + p] = Real::zero();
                    continue;
                }
                rotate(a, v.as_deref_mut(), k, p, q, &apq);
            }
        }
    }
    let diag = (0..k).map(|i| a[i * k + i].clone()).collect();
    (diag, v)
}

fn rotate(a: &mut [Real], v: Option<&mut [Real]>, k: usize, p: usize, q: usize, apq: &Real) {
    let one = Real::one();
    let h = &a[q * k + q] - &a[p * k + p];
    let theta = &h / &(apq + apq);
    let mut t = &one / &(theta.abs() + (theta.square() + &one).sqrt());
    if theta.is_negative() {
        t = -t;
    }
    let c = &one / &(t.square() + &one).sqrt();
    let s = &t * &c;
    let tau = &s / &(&one + &c);
    let shift = &t * apq;
    a[p * k + p] -= &shift;
    a[q * k + q] += &shift;
    a[p * k + q] = Real::zero();
    a[q * k + p] = Real::zero();
    for j in 0..k {
        if j == p || j == q {
            continue;
        }
        let g = a[j * k + p].clone();
        let hh = a[j * k + q].clone();
        if g.is_zero() && hh.is_zero() {
            continue;
        }
        let np = &g - &s * &(&hh + &g * &tau);
        let nq = &hh + &s * &(&g - &hh * &tau);
        a[j * k + p] = np.clone();
        a[p * k + j] = np;
        a[j * k + q] = nq.clone();
        a[q * k + j] = nq;
    }
    if let Some(v) = v {
        for j in 0..k {
            let g = v[j * k + p].clone();
            let hh = v[j * k + q].clone();
            if g.is_zero() && hh.is_zero() {
                continue;
            }
            v[j * k + p] = &g - &s * &(&hh + &g * &tau);
            v[j * k + q] = &hh + &s * &(&g - &hh * &tau);
        }
    }
}
