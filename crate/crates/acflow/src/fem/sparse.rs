//! Square sparse matrices in compressed-row storage.

/// Compressed-row sparse matrix. Column indices are strictly increasing within each
/// row; explicitly stored zeros are permitted.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from (row, col, value) triplets, summing duplicates.
    ///
    /// Duplicate entries are accumulated in their original insertion order (the sort
    /// is stable), so assembly is bitwise deterministic for a fixed triplet order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&i| (triplets[i].0, triplets[i].1));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &i in &order {
            let (r, c, v) = triplets[i];
            assert!(r < n && c < n, "triplet ({r}, {c}) out of range for n = {n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            if let Ok(pos) = cols.binary_search(&i) {
                d[i] = vals[pos];
            }
        }
        d
    }

    /// `Σ_k coeff_k · mat_k` over the union sparsity pattern.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> Self {
        assert!(!terms.is_empty());
        let n = terms[0].1.n;
        assert!(terms.iter().all(|(_, m)| m.n == n));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        // Merge the sorted rows of every term with a cursor per matrix.
        let mut cursors = vec![0usize; terms.len()];
        for i in 0..n {
            for (t, (_, m)) in terms.iter().enumerate() {
                cursors[t] = m.row_ptr[i];
            }
            loop {
                let mut next_col = usize::MAX;
                for (t, (_, m)) in terms.iter().enumerate() {
                    if cursors[t] < m.row_ptr[i + 1] {
                        next_col = next_col.min(m.col_idx[cursors[t]]);
                    }
                }
                if next_col == usize::MAX {
                    break;
                }
                let mut acc = 0.0;
                for (t, (coeff, m)) in terms.iter().enumerate() {
                    if cursors[t] < m.row_ptr[i + 1] && m.col_idx[cursors[t]] == next_col {
                        acc += coeff * m.values[cursors[t]];
                        cursors[t] += 1;
                    }
                }
                col_idx.push(next_col);
                values.push(acc);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij − A_ji|` over stored entries (missing transposed entries count as 0).
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (jcols, jvals) = self.row(j);
                let vt = match jcols.binary_search(&i) {
                    Ok(pos) => jvals[pos],
                    Err(_) => 0.0,
                };
                worst = worst.max((v - vt).abs());
            }
        }
        worst
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_assembly_sums_duplicates() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (0, 0, 3.0), (1, 1, 5.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.row(0), (&[0usize, 1][..], &[4.0, 2.0][..]));
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![6.0, 5.0]);
    }

    #[test]
    fn linear_combination_merges_patterns() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0)]);
        let b = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 1, 2.0)]);
        let c = CsrMatrix::linear_combination(&[(2.0, &a), (3.0, &b)]);
        assert_eq!(c.matvec(&[1.0, 1.0]), vec![5.0, 8.0]);
        assert_eq!(c.nnz(), 3);
    }
}
