/// Row-major sparse matrix over a fixed column count.
///
/// Rows keep every structurally present entry, including exact numeric
/// zeros: downstream consumers rely on each constraint row listing all
/// degrees of freedom of its participating bodies.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> SparseMatrix {
        SparseMatrix {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn push_row(&mut self, entries: Vec<(usize, f64)>) {
        debug_assert!(entries.iter().all(|&(c, _)| c < self.ncols));
        self.rows.push(entries);
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    /// Structural non-zero count of one row (numeric zeros included).
    pub fn row_nnz(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    /// Matrix-vector product `J x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_multiplies_rows() {
        let mut m = SparseMatrix::new(3);
        m.push_row(vec![(0, 2.0), (2, -1.0)]);
        m.push_row(vec![(1, 0.0), (2, 4.0)]);
        let y = m.apply(&[1.0, 5.0, 3.0]);
        assert_eq!(y, vec![-1.0, 12.0]);
        assert_eq!(m.row_nnz(1), 2);
    }
}
