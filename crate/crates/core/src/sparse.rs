//! Compressed sparse row storage and the handful of kernels the models need.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Rows per rayon task in [`SparseMatrix::spmm`].
const SPMM_ROW_CHUNK: usize = 64;

/// Canonical CSR matrix: column indices strictly increasing within each row,
/// no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Degree normalization applied to an adjacency matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormMode {
    None,
    /// `D⁻¹A`
    Row,
    /// `D^{-1/2} A D^{-1/2}`
    Sym,
}

impl NormMode {
    pub const ALL: [NormMode; 3] = [NormMode::None, NormMode::Row, NormMode::Sym];

    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::None => "none",
            NormMode::Row => "row",
            NormMode::Sym => "sym",
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NormMode::None),
            "row" => Ok(NormMode::Row),
            "sym" => Ok(NormMode::Sym),
            other => Err(Error::InvalidParameter(format!("unknown norm mode '{other}'"))),
        }
    }
}

impl SparseMatrix {
    /// Builds a canonical matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed and resulting zeros dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside {n_rows}x{n_cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("entry ({r}, {c})")));
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                rows.push(r);
                col_indices.push(c);
                values.push(v);
            }
        }
        for &r in &rows {
            row_offsets[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Wraps raw CSR arrays after checking every canonical-form invariant.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if row_offsets.len() != n_rows + 1 || row_offsets[0] != 0 {
            return bad("row_offsets must have n_rows+1 entries starting at 0".into());
        }
        if col_indices.len() != values.len() || row_offsets[n_rows] != values.len() {
            return bad("row_offsets, col_indices and values disagree on nnz".into());
        }
        for i in 0..n_rows {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if start > end {
                return bad(format!("row_offsets decreasing at row {i}"));
            }
            let cols = &col_indices[start..end];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {i} column indices not strictly increasing"));
            }
            if cols.last().is_some_and(|&c| c >= n_cols) {
                return bad(format!("row {i} has a column index out of range"));
            }
        }
        if values.contains(&0.0) {
            return bad("explicit zero stored".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CSR values".into()));
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Canonical CSR of a dense matrix (zeros dropped).
    pub fn from_dense(d: &DenseMatrix) -> Self {
        let triplets = (0..d.n_rows())
            .flat_map(|i| (0..d.n_cols()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, d.get(i, j)));
        Self::from_triplets(d.n_rows(), d.n_cols(), triplets)
            .expect("dense matrices are finite and in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// `(col, value)` pairs stored in row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            d.set(i, j, v);
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Sparse-dense product `self * b`. Each output row is reduced in stored
    /// column order, so results do not depend on thread scheduling.
    pub fn spmm(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != b.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "sparse {}x{} times dense {}x{}",
                self.n_rows,
                self.n_cols,
                b.n_rows(),
                b.n_cols()
            )));
        }
        let width = b.n_cols();
        let mut out = DenseMatrix::zeros(self.n_rows, width);
        if width == 0 {
            return Ok(out);
        }
        out.values_mut()
            .par_chunks_mut(width * SPMM_ROW_CHUNK)
            .enumerate()
            .for_each(|(chunk, block)| {
                for (offset, out_row) in block.chunks_mut(width).enumerate() {
                    let i = chunk * SPMM_ROW_CHUNK + offset;
                    for (j, v) in self.row(i) {
                        for (o, x) in out_row.iter_mut().zip(b.row(j)) {
                            *o += v * x;
                        }
                    }
                }
            });
        Ok(out)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // Rows are visited in increasing order, so each transposed row is
        // filled with strictly increasing column indices.
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                let slot = next[j];
                col_indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Binary union `A ∨ Aᵀ`.
    pub fn symmetrize(&self) -> Result<SparseMatrix> {
        self.require_square()?;
        let t = self.transpose();
        let triplets = self
            .triplets()
            .chain(t.triplets())
            .map(|(i, j, _)| (i, j, 1.0));
        let mut out = SparseMatrix::from_triplets(self.n_rows, self.n_cols, triplets)?;
        out.values.fill(1.0);
        Ok(out)
    }

    /// Every stored entry replaced by 1.
    pub fn binarize(&self) -> SparseMatrix {
        let mut out = self.clone();
        out.values.fill(1.0);
        out
    }

    /// Row sums.
    pub fn degree_vector(&self) -> Result<Vec<f64>> {
        self.require_square()?;
        Ok((0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect())
    }

    /// Degree normalization. Zero-degree nodes get an inverse degree of 0, so
    /// their rows and columns stay empty.
    pub fn normalize(&self, mode: NormMode) -> Result<SparseMatrix> {
        self.require_square()?;
        if let Some((i, j, v)) = self.triplets().find(|&(_, _, v)| v < 0.0) {
            return Err(Error::NegativeEntry {
                row: i,
                col: j,
                value: v,
            });
        }
        let degrees = self.degree_vector()?;
        let inv = |d: f64, f: fn(f64) -> f64| if d > 0.0 { f(d) } else { 0.0 };
        let triplets: Vec<(usize, usize, f64)> = match mode {
            NormMode::None => return Ok(self.clone()),
            NormMode::Row => self
                .triplets()
                .map(|(i, j, v)| (i, j, v * inv(degrees[i], |d| 1.0 / d)))
                .collect(),
            NormMode::Sym => {
                let scale: Vec<f64> = degrees.iter().map(|&d| inv(d, |d| 1.0 / d.sqrt())).collect();
                self.triplets()
                    .map(|(i, j, v)| (i, j, scale[i] * v * scale[j]))
                    .collect()
            }
        };
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, triplets)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.n_rows,
                cols: self.n_cols,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edges(n: usize, list: &[(usize, usize)]) -> SparseMatrix {
        SparseMatrix::from_triplets(n, n, list.iter().map(|&(i, j)| (i, j, 1.0))).unwrap()
    }

    #[test]
    fn canonicalizes_triplets() {
        let m = SparseMatrix::from_triplets(
            2,
            3,
            vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 3.0), (0, 0, 1.0), (0, 0, -1.0)],
        )
        .unwrap();
        assert_eq!(m.row_offsets(), &[0, 1, 2]);
        assert_eq!(m.col_indices(), &[1, 2]);
        assert_eq!(m.values(), &[2.0, 4.0]);
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn from_csr_checks_invariants() {
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1, 2], vec![0, 2], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1, 2], vec![0, 1], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn spmm_identity_and_zero() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(SparseMatrix::identity(3).spmm(&b).unwrap(), b);
        assert_eq!(SparseMatrix::zeros(3, 3).spmm(&b).unwrap(), DenseMatrix::zeros(3, 2));
        assert!(SparseMatrix::identity(2).spmm(&b).is_err());
    }

    #[test]
    fn transpose_single_entry() {
        let m = SparseMatrix::from_triplets(3, 3, vec![(0, 2, 1.0)]).unwrap();
        let t = m.transpose();
        assert_eq!(t.get(2, 0), 1.0);
        assert_eq!(t.nnz(), 1);
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn symmetrize_cases() {
        let s = edges(2, &[(0, 1)]).symmetrize().unwrap();
        assert_eq!(s, edges(2, &[(0, 1), (1, 0)]));

        let sym = edges(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(sym.symmetrize().unwrap(), sym);

        let weighted = SparseMatrix::from_triplets(3, 3, vec![(1, 2, 3.0)]).unwrap();
        let s = weighted.symmetrize().unwrap();
        assert_eq!((s.get(1, 2), s.get(2, 1), s.nnz()), (1.0, 1.0, 2));

        assert!(SparseMatrix::zeros(2, 3).symmetrize().is_err());
    }

    #[test]
    fn degree_vector_cases() {
        let triangle = edges(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        assert_eq!(triangle.degree_vector().unwrap(), vec![2.0, 2.0, 2.0]);
        assert_eq!(edges(3, &[(0, 1), (1, 0)]).degree_vector().unwrap()[2], 0.0);
        assert_eq!(edges(2, &[(0, 1)]).degree_vector().unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn normalize_pair_and_star() {
        let pair = edges(2, &[(0, 1), (1, 0)]);
        assert_eq!(pair.normalize(NormMode::Sym).unwrap(), pair);

        let star = edges(4, &[(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (3, 0)]);
        let row = star.normalize(NormMode::Row).unwrap();
        for j in 1..4 {
            assert!((row.get(0, j) - 1.0 / 3.0).abs() < 1e-15);
        }
        for i in 0..4 {
            let s: f64 = row.row(i).map(|(_, v)| v).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_isolated_node_stays_zero() {
        let g = edges(3, &[(0, 1), (1, 0)]);
        for mode in NormMode::ALL {
            let n = g.normalize(mode).unwrap();
            assert!(n.is_finite());
            assert_eq!(n.row(2).count(), 0);
            assert!((0..3).all(|i| n.get(i, 2) == 0.0));
        }
    }

    #[test]
    fn normalize_rejects_negative() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 1, -1.0)]).unwrap();
        assert!(matches!(
            m.normalize(NormMode::Row),
            Err(Error::NegativeEntry { row: 0, col: 1, .. })
        ));
    }

    fn arb_graph() -> impl Strategy<Value = SparseMatrix> {
        (2usize..30).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..4 * n)
                .prop_map(move |t| SparseMatrix::from_triplets(n, n, t).unwrap())
        })
    }

    proptest! {
        #[test]
        fn transpose_is_involution(a in arb_graph()) {
            prop_assert_eq!(a.transpose().transpose(), a);
        }

        #[test]
        fn symmetrize_is_symmetric(a in arb_graph()) {
            let s = a.symmetrize().unwrap();
            prop_assert_eq!(s.transpose(), s);
        }

        #[test]
        fn row_normalized_rows_sum_to_one(a in arb_graph()) {
            let r = a.normalize(NormMode::Row).unwrap();
            for i in 0..r.n_rows() {
                let s: f64 = r.row(i).map(|(_, v)| v).sum();
                prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn sym_normalization_preserves_symmetry(a in arb_graph()) {
            let s = a.symmetrize().unwrap().normalize(NormMode::Sym).unwrap();
            let t = s.transpose();
            for (i, j, v) in s.triplets() {
                prop_assert!((v - t.get(i, j)).abs() <= 1e-12);
            }
        }
    }
}
