use nalgebra::DMatrix;

use super::{C64, ZERO};

/// Complex matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets; repeated positions are
    /// summed and entries that cancel to exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != ZERO);

        let mut row_ptr = vec![0; nrows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (col_idx, values) = merged.into_iter().map(|(_, c, v)| (c, v)).unzip();
        Self { nrows, ncols, row_ptr, col_idx, values }
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

    /// `y = self * x`
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *out = self.col_idx[span.clone()]
                .iter()
                .zip(&self.values[span])
                .fold(ZERO, |acc, (&c, &v)| acc + v * x[c]);
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (&c, v) in self.col_idx.iter().zip(&self.values) {
            sums[c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.iter().filter(|&(r, c, _)| r == c).map(|(_, _, v)| v).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => ZERO,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn assembles_and_multiplies() {
        let m = CsrMatrix::from_triplets(
            2,
            3,
            vec![(1, 2, c(1.0)), (0, 0, c(2.0)), (1, 2, c(3.0)), (0, 1, c(1.0)), (0, 1, c(-1.0))],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), c(4.0));
        assert_eq!(m.get(0, 1), ZERO);
        assert_eq!(m.mul_vec(&[c(1.0), c(5.0), c(2.0)]), vec![c(2.0), c(8.0)]);
        assert_eq!(m.norm1(), 4.0);
        assert_eq!(m.to_dense()[(0, 0)], c(2.0));
    }
}
