use std::collections::BTreeMap;

use crate::scalar::Scalar;

/// Matrix in compressed sparse row layout with strictly increasing column
/// indices inside each row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from triplets; duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable: duplicates keep their insertion order
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (i, j, v) = triplets[k];
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows}x{ncols}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        let trip: Vec<_> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_triplets(n, n, &trip)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).fold(T::zero(), |acc, (&j, &v)| acc + v * x[j])
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let trip: Vec<_> = (0..self.nrows)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(move |(&j, &v)| (j, i, v)).collect::<Vec<_>>()
            })
            .collect();
        Self::from_triplets(self.ncols, self.nrows, &trip)
    }

    /// True when the sparsity pattern is structurally symmetric.
    pub fn is_pattern_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| {
                let (cols, _) = self.row(i);
                cols.iter().all(|&j| self.row(j).0.binary_search(&i).is_ok())
            })
    }

    /// Dense copy of the sub-block `rows x cols`.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<Vec<T>> {
        rows.map(|i| cols.clone().map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Assembled linear system.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> SparseSystem<T> {
    /// `b - A x`.
    pub fn residual(&self, x: &[T]) -> Vec<T> {
        self.matrix.mul_vec(x).iter().zip(&self.rhs).map(|(ax, b)| *b - *ax).collect()
    }
}

/// Sparse linear combination of degrees of freedom, `sum c_k x_{i_k}`.
pub type LinComb<T> = Vec<(usize, T)>;

/// Triplet accumulator with row constraints.
///
/// Constraints replace the whole row of a dof by `x_i = value` when the system
/// is finalized.
#[derive(Clone, Debug)]
pub struct SystemBuilder<T> {
    n: usize,
    triplets: Vec<(usize, usize, T)>,
    rhs: Vec<T>,
    constraints: BTreeMap<usize, T>,
}

impl<T: Scalar> SystemBuilder<T> {
    pub fn new(n: usize) -> Self {
        SystemBuilder { n, triplets: Vec::new(), rhs: vec![T::zero(); n], constraints: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.triplets.push((i, j, v));
    }

    #[inline]
    pub fn add_rhs(&mut self, i: usize, v: T) {
        self.rhs[i] += v;
    }

    /// Adds `weight * test(i) * trial(j)` for every pair of terms: the
    /// discrete form of `(trial, test)` at one quadrature point.
    pub fn add_product(&mut self, test: &[(usize, T)], trial: &[(usize, T)], weight: T) {
        for &(i, ci) in test {
            for &(j, cj) in trial {
                self.triplets.push((i, j, weight * ci * cj));
            }
        }
    }

    /// Adds `weight * value * test(i)` to the right-hand side.
    pub fn add_load(&mut self, test: &[(usize, T)], value: T) {
        for &(i, ci) in test {
            self.rhs[i] += ci * value;
        }
    }

    /// Replaces row `i` by `x_i = value`.
    pub fn constrain(&mut self, i: usize, value: T) {
        self.constraints.insert(i, value);
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.constraints.contains_key(&i)
    }

    pub fn finish(self) -> SparseSystem<T> {
        let SystemBuilder { n, mut triplets, mut rhs, constraints } = self;
        if !constraints.is_empty() {
            triplets.retain(|(i, _, _)| !constraints.contains_key(i));
            for (&i, &v) in &constraints {
                triplets.push((i, i, T::one()));
                rhs[i] = v;
            }
        }
        SparseSystem { matrix: CsrMatrix::from_triplets(n, n, &triplets), rhs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 2, 4.0)]);
        assert_eq!(m.row(1), (&[0usize, 2][..], &[3.0, 5.0][..]));
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![2.0, 8.0]);
        assert_eq!(m.transpose().get(2, 1), 5.0);
    }

    #[test]
    fn constraints_replace_rows() {
        let mut b = SystemBuilder::new(2);
        b.add(0, 0, 2.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 7.0);
        b.add_rhs(1, 3.0);
        b.constrain(1, -1.0);
        let s = b.finish();
        assert_eq!(s.matrix.row(1), (&[1usize][..], &[1.0][..]));
        assert_eq!(s.rhs, vec![0.0, -1.0]);
        assert!(!s.matrix.is_pattern_symmetric());
    }
}
