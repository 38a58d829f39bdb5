use super::csr::{SparseMatrix, TripletBuilder};
use crate::error::{Error, Result};

/// Row and column partition sizes of a block system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl BlockLayout {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        Self { rows, cols }
    }

    pub fn square(sizes: Vec<usize>) -> Self {
        Self { rows: sizes.clone(), cols: sizes }
    }

    pub fn row_offsets(&self) -> Vec<usize> {
        offsets(&self.rows)
    }

    pub fn col_offsets(&self) -> Vec<usize> {
        offsets(&self.cols)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.iter().sum()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.iter().sum()
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    out.push(0);
    for s in sizes {
        out.push(out.last().unwrap() + s);
    }
    out
}

/// One scaled block `scale * matrix` at position `(row, col)`.
#[derive(Debug, Clone)]
pub struct Block<'a> {
    pub row: usize,
    pub col: usize,
    pub scale: f64,
    pub matrix: &'a SparseMatrix,
}

impl<'a> Block<'a> {
    pub fn new(row: usize, col: usize, scale: f64, matrix: &'a SparseMatrix) -> Self {
        Self { row, col, scale, matrix }
    }
}

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub layout: BlockLayout,
    /// `(row, col, scale)` of every block, in insertion order.
    pub entries: Vec<(usize, usize, f64)>,
    pub matrix: SparseMatrix,
}

impl BlockSystem {
    /// Splits a monolithic vector into per-block pieces following the column
    /// partition.
    pub fn split(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let off = self.layout.col_offsets();
        off.windows(2).map(|w| x[w[0]..w[1]].to_vec()).collect()
    }

    pub fn concat(parts: &[&[f64]]) -> Vec<f64> {
        parts.iter().flat_map(|p| p.iter().copied()).collect()
    }
}

/// Assembles a monolithic matrix. Blocks are inserted in the given order;
/// blocks sharing a slot are summed.
pub fn assemble_block(layout: BlockLayout, blocks: &[Block<'_>]) -> Result<BlockSystem> {
    let ro = layout.row_offsets();
    let co = layout.col_offsets();
    let mut nnz = 0;
    for b in blocks {
        let (want_rows, want_cols) = match (layout.rows.get(b.row), layout.cols.get(b.col)) {
            (Some(&r), Some(&c)) => (r, c),
            _ => {
                return Err(Error::BlockShape {
                    row: b.row,
                    col: b.col,
                    got_rows: b.matrix.n_rows(),
                    got_cols: b.matrix.n_cols(),
                    want_rows: 0,
                    want_cols: 0,
                })
            }
        };
        if (b.matrix.n_rows(), b.matrix.n_cols()) != (want_rows, want_cols) {
            return Err(Error::BlockShape {
                row: b.row,
                col: b.col,
                got_rows: b.matrix.n_rows(),
                got_cols: b.matrix.n_cols(),
                want_rows,
                want_cols,
            });
        }
        nnz += b.matrix.nnz();
    }

    let mut t = TripletBuilder::with_capacity(layout.n_rows(), layout.n_cols(), nnz);
    for b in blocks {
        for i in 0..b.matrix.n_rows() {
            for (j, v) in b.matrix.row(i) {
                t.push(ro[b.row] + i, co[b.col] + j, b.scale * v);
            }
        }
    }
    Ok(BlockSystem {
        entries: blocks.iter().map(|b| (b.row, b.col, b.scale)).collect(),
        matrix: t.build(),
        layout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_blocks_on_diagonal() {
        let i2 = SparseMatrix::identity(2);
        let i3 = SparseMatrix::identity(3);
        let sys = assemble_block(BlockLayout::square(vec![2, 3]), &[Block::new(0, 0, 1.0, &i2), Block::new(1, 1, 1.0, &i3)])
            .unwrap();
        assert_eq!(sys.matrix, SparseMatrix::identity(5));
    }

    #[test]
    fn off_diagonal_and_negated_blocks() {
        let b = SparseMatrix::from_dense(&[vec![1.0, 2.0]]);
        let sys = assemble_block(BlockLayout::square(vec![1, 2]), &[Block::new(0, 1, -1.0, &b)]).unwrap();
        assert_eq!(
            sys.matrix.to_dense(),
            vec![vec![0.0, -1.0, -2.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]
        );
    }

    #[test]
    fn duplicate_blocks_sum_and_bad_shapes_fail() {
        let i1 = SparseMatrix::identity(1);
        let sys = assemble_block(BlockLayout::square(vec![1]), &[Block::new(0, 0, 2.0, &i1), Block::new(0, 0, 3.0, &i1)])
            .unwrap();
        assert_eq!(sys.matrix.get(0, 0), 5.0);
        let i2 = SparseMatrix::identity(2);
        assert!(matches!(
            assemble_block(BlockLayout::square(vec![1, 1]), &[Block::new(0, 0, 1.0, &i2)]),
            Err(Error::BlockShape { .. })
        ));
        assert!(assemble_block(BlockLayout::square(vec![1]), &[Block::new(0, 3, 1.0, &i1)]).is_err());
    }

    #[test]
    fn split_round_trips() {
        let i = SparseMatrix::identity(3);
        let sys = assemble_block(BlockLayout::square(vec![1, 2]), &[]).unwrap();
        let parts = sys.split(&[1.0, 2.0, 3.0]);
        assert_eq!(parts, vec![vec![1.0], vec![2.0, 3.0]]);
        assert_eq!(BlockSystem::concat(&[&parts[0], &parts[1]]), vec![1.0, 2.0, 3.0]);
        assert_eq!(i.nnz(), 3);
    }
}
