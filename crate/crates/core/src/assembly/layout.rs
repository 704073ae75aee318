use crate::error::{Error, Result};
use crate::linalg::{Matrix, Projection, Real, SymOperator, Vector};
use crate::monomial::choose_r;
use crate::report::Report;
use crate::scalar::minimal_power;
use crate::wordexpr::BigExponent;

const STRUCTURE_TOL: f64 = 1e-12;

/// `K` blocks laid out on one coordinate line; block `i` (1-based) covers
/// `starts[i]..starts[i] + dims[i]` and shares its last coordinate with the
/// first coordinate of block `i + 1`. That shared coordinate is the marker
/// `e_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayout {
    pub epsilons: Vec<f64>,
    pub rs: Vec<usize>,
    pub dims: Vec<usize>,
    pub starts: Vec<usize>,
    pub global_dim: usize,
    /// Coordinates of `e_1, …, e_{K+1}`.
    pub markers: Vec<usize>,
}

impl BlockLayout {
    pub fn k(&self) -> usize {
        self.rs.len()
    }

    /// Global coordinate of local index `local` in block `i` (1-based).
    /// Local 0 is the block's first marker, local 1 its second, and
    /// locals `2..` fill the interior in order.
    pub fn global_index(&self, i: usize, local: usize) -> usize {
        let start = self.starts[i - 1];
        let d = self.dims[i - 1];
        match local {
            0 => start,
            1 => start + d - 1,
            j => start + j - 1,
        }
    }

    pub fn block_indices(&self, i: usize) -> Vec<usize> {
        (0..self.dims[i - 1]).map(|l| self.global_index(i, l)).collect()
    }

    pub fn embed_vector(&self, i: usize, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.global_dim);
        for (l, x) in v.coords().iter().enumerate() {
            out.set(self.global_index(i, l), x.clone());
        }
        out
    }

    pub fn embed_matrix(&self, i: usize, m: &Matrix) -> Matrix {
        let idx = self.block_indices(i);
        let mut out = Matrix::zeros(self.global_dim);
        for (a, &ga) in idx.iter().enumerate() {
            for (b, &gb) in idx.iter().enumerate() {
                let x = m.get(a, b);
                if !x.is_zero() {
                    out.set(ga, gb, x.clone());
                }
            }
        }
        out
    }

    pub fn embed_projection(&self, i: usize, p: &Projection) -> Result<Projection> {
        Projection::new(SymOperator::new(self.embed_matrix(i, p.matrix()))?, p.rank())
    }

    /// `e_j`, `j = 1..=K+1`.
    pub fn marker(&self, j: usize) -> Vector {
        Vector::basis(self.global_dim, self.markers[j - 1])
    }

    /// `F_i`, the projector onto block `i`'s coordinates.
    pub fn block_projector(&self, i: usize) -> Projection {
        coordinate_projector(self.global_dim, &self.block_indices(i))
    }

    /// Checks `F_i F_{i+1} = ê_{i+1}`, `F_i F_j = 0` for `|i - j| ≥ 2`, `ê_1 ≤ F_1`.
    pub fn check_structure(&self) -> Report {
        let mut rep = Report::new("layout");
        let k = self.k();
        let fs: Vec<Projection> = (1..=k).map(|i| self.block_projector(i)).collect();
        for i in 1..=k {
            for j in i + 1..=k {
                let prod = fs[i - 1].matrix().mul(fs[j - 1].matrix());
                if j == i + 1 {
                    let m = self.marker(i + 1);
                    let defect = prod.sub(&Matrix::outer(&m, &m)).max_abs().to_f64();
                    rep.at_most(format!("adjacent[{i},{j}]"), defect, STRUCTURE_TOL);
                } else {
                    rep.at_most(format!("separated[{i},{j}]"), prod.max_abs().to_f64(), STRUCTURE_TOL);
                }
            }
        }
        if k > 0 {
            let e1 = coordinate_projector(self.global_dim, &[self.markers[0]]);
            rep.at_most("first_marker_in_first_block", e1.below_defect(&fs[0]), STRUCTURE_TOL);
        }
        rep
    }
}

pub fn coordinate_projector(dim: usize, idx: &[usize]) -> Projection {
    let mut m = Matrix::zeros(dim);
    for &i in idx {
        m.set(i, i, Real::one());
    }
    Projection::new(SymOperator::new(m).expect("diagonal"), idx.len()).expect("coordinate projector")
}

/// Lower bound on the top chain exponent for a block at tolerance `eps`.
///
/// The chain is built at `ε / (4(r+1))`, its last angle is at most
/// `π/4 · 2^{-r}`, and the last stage budget is `(1 - 2^{-(r+1)})` of that.
pub fn projected_exponent(eps: f64, r: usize) -> Result<BigExponent> {
    let angle = Real::pi().ldexp(-2 - r as i32);
    let budget = Real::from_f64((1.0 - 0.5f64.powi(r as i32 + 1)) * eps / (4.0 * (r as f64 + 1.0)));
    minimal_power(&angle, &budget)
}

pub fn build_layout(k: usize, epsilons: &[f64], exponent_cap: &BigExponent) -> Result<BlockLayout> {
    if k == 0 {
        return Err(Error::Config("need at least one block".into()));
    }
    if epsilons.len() != k {
        return Err(Error::Config(format!("{k} blocks but {} tolerances", epsilons.len())));
    }
    if let Some(&bad) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::EpsOutOfRange(bad));
    }
    let rs: Vec<usize> = epsilons.iter().map(|&e| choose_r(e)).collect();
    for (&eps, &r) in epsilons.iter().zip(&rs) {
        let n = projected_exponent(eps, r)?;
        if &n > exponent_cap {
            return Err(Error::ToleranceTooTight(format!(
                "eps {eps} needs r = {r} and exponents of at least {n}, above {exponent_cap}"
            )));
        }
    }
    let dims: Vec<usize> = rs.iter().map(|r| 2 * r + 3).collect();
    let mut starts = Vec::with_capacity(k);
    let mut next = 0;
    for d in &dims {
        starts.push(next);
        next += d - 1;
    }
    let global_dim = next + 1;
    let mut markers: Vec<usize> = starts.clone();
    markers.push(global_dim - 1);
    Ok(BlockLayout { epsilons: epsilons.to_vec(), rs, dims, starts, global_dim, markers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemma1::default_exponent_cap;

    #[test]
    fn two_blocks() {
        let l = build_layout(2, &[0.5, 0.5], &default_exponent_cap()).unwrap();
        assert_eq!(l.rs, vec![5, 5]);
        assert_eq!(l.dims, vec![13, 13]);
        assert_eq!(l.global_dim, 25);
        assert_eq!(l.markers, vec![0, 12, 24]);
        assert!(l.check_structure().all_pass());
    }

    #[test]
    fn four_blocks() {
        let l = build_layout(4, &[0.5; 4], &default_exponent_cap()).unwrap();
        assert_eq!(l.global_dim, 49);
        assert!(l.check_structure().all_pass());
    }

    #[test]
    fn double_overlap_detected() {
        let mut l = build_layout(2, &[0.5, 0.5], &default_exponent_cap()).unwrap();
        l.starts[1] -= 1;
        l.global_dim -= 1;
        l.markers = vec![0, 11, 23];
        let rep = l.check_structure();
        assert!(!rep.clause("adjacent[1,2]").unwrap().pass);
    }

    #[test]
    fn marker_embedding() {
        let l = build_layout(3, &[0.5, 0.9, 0.5], &default_exponent_cap()).unwrap();
        for i in 1..=3 {
            assert_eq!(l.global_index(i, 0), l.markers[i - 1]);
            assert_eq!(l.global_index(i, 1), l.markers[i]);
        }
    }

    #[test]
    fn rejects_bad_schedules() {
        let cap = default_exponent_cap();
        assert!(matches!(build_layout(2, &[0.5, 1.5], &cap), Err(Error::EpsOutOfRange(_))));
        assert!(matches!(build_layout(2, &[0.5], &cap), Err(Error::Config(_))));
        let small = BigExponent::from_u64(10);
        assert!(matches!(build_layout(1, &[0.5], &small), Err(Error::ToleranceTooTight(_))));
    }
}
