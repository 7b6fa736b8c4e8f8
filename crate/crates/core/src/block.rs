use crate::error::CoreError;
use crate::operator::LinearOperator;
use crate::vector::Vector;

/// A p-by-m grid of optional dense blocks; an absent block is the zero
/// operator. Block (k, i) maps the i-th variable space (dimension
/// `col_dims[i]`) into the k-th coupling space (dimension `row_dims[k]`).
#[derive(Debug, Clone)]
pub struct BlockOperator {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    blocks: Vec<Option<LinearOperator>>,
}

impl BlockOperator {
    pub fn new(
        row_dims: Vec<usize>,
        col_dims: Vec<usize>,
        blocks: Vec<Option<LinearOperator>>,
    ) -> Result<Self, CoreError> {
        if row_dims.is_empty() || col_dims.is_empty() {
            return Err(CoreError::InvalidShape(
                "block operator needs at least one row and one column".into(),
            ));
        }
        if row_dims.contains(&0) || col_dims.contains(&0) {
            return Err(CoreError::InvalidShape(
                "block dimensions must be positive".into(),
            ));
        }
        if blocks.len() != row_dims.len() * col_dims.len() {
            return Err(CoreError::InvalidShape(format!(
                "expected {} blocks, got {}",
                row_dims.len() * col_dims.len(),
                blocks.len()
            )));
        }
        let m = col_dims.len();
        for (idx, b) in blocks.iter().enumerate() {
            if let Some(op) = b {
                let (k, i) = (idx / m, idx % m);
                if op.rows() != row_dims[k] {
                    return Err(CoreError::dim(
                        format!("block ({k},{i}) rows"),
                        row_dims[k],
                        op.rows(),
                    ));
                }
                if op.cols() != col_dims[i] {
                    return Err(CoreError::dim(
                        format!("block ({k},{i}) cols"),
                        col_dims[i],
                        op.cols(),
                    ));
                }
            }
        }
        Ok(Self {
            row_dims,
            col_dims,
            blocks,
        })
    }

    /// Builds from a row-major grid of rows of blocks.
    pub fn from_grid(grid: Vec<Vec<Option<LinearOperator>>>) -> Result<Self, CoreError> {
        if grid.is_empty() || grid[0].is_empty() {
            return Err(CoreError::InvalidShape("empty block grid".into()));
        }
        let m = grid[0].len();
        if grid.iter().any(|r| r.len() != m) {
            return Err(CoreError::InvalidShape("ragged block grid".into()));
        }
        let mut row_dims = Vec::with_capacity(grid.len());
        let mut col_dims = vec![0usize; m];
        for (k, row) in grid.iter().enumerate() {
            let rd = row
                .iter()
                .flatten()
                .map(|b| b.rows())
                .next()
                .ok_or_else(|| {
                    CoreError::InvalidShape(format!("block row {k} is entirely absent"))
                })?;
            row_dims.push(rd);
            for (i, b) in row.iter().enumerate() {
                if let Some(op) = b {
                    if col_dims[i] == 0 {
                        col_dims[i] = op.cols();
                    }
                }
            }
        }
        if let Some(i) = col_dims.iter().position(|d| *d == 0) {
            return Err(CoreError::InvalidShape(format!(
                "block column {i} is entirely absent"
            )));
        }
        let blocks: Vec<Option<LinearOperator>> = grid.into_iter().flatten().collect();
        Self::new(row_dims, col_dims, blocks)
    }

    pub fn coupling_count(&self) -> usize {
        self.row_dims.len()
    }

    pub fn variable_count(&self) -> usize {
        self.col_dims.len()
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn block(&self, k: usize, i: usize) -> Option<&LinearOperator> {
        self.blocks[k * self.col_dims.len() + i].as_ref()
    }

    /// Sum of squared block norms along coupling row k.
    pub fn row_norm_sq(&self, k: usize) -> Result<f64, CoreError> {
        let mut total = 0.0;
        for i in 0..self.variable_count() {
            if let Some(op) = self.block(k, i) {
                if !op.is_zero() {
                    let n = op.norm()?;
                    total += n * n;
                }
            }
        }
        Ok(total)
    }

    /// Checks that every coupling row sees at least one nonzero block.
    pub fn validate_coupling(&self) -> Result<(), CoreError> {
        for k in 0..self.coupling_count() {
            if self.row_norm_sq(k)? <= 0.0 {
                return Err(CoreError::InvalidShape(format!(
                    "coupling row {k} has no nonzero block"
                )));
            }
        }
        Ok(())
    }

    /// `sum_i L_{k,i} x_i` for coupling row k.
    pub fn apply_row(&self, k: usize, xs: &[Vector]) -> Result<Vector, CoreError> {
        if xs.len() != self.variable_count() {
            return Err(CoreError::dim("apply_row blocks", self.variable_count(), xs.len()));
        }
        let mut acc = Vector::zeros(self.row_dims[k]);
        for (i, x) in xs.iter().enumerate() {
            if let Some(op) = self.block(k, i) {
                acc = acc.add(&op.apply(x)?);
            }
        }
        Ok(acc)
    }

    /// Assembles the dense stacked matrix; used to cross-check the block
    /// iteration against a single-variable run.
    pub fn to_dense(&self) -> Result<LinearOperator, CoreError> {
        let mut rows = Vec::with_capacity(self.coupling_count());
        for k in 0..self.coupling_count() {
            let mut parts = Vec::with_capacity(self.variable_count());
            for i in 0..self.variable_count() {
                match self.block(k, i) {
                    Some(op) => parts.push(op.clone()),
                    None => parts.push(
                        LinearOperator::new(
                            self.row_dims[k],
                            self.col_dims[i],
                            vec![0.0; self.row_dims[k] * self.col_dims[i]],
                        )?,
                    ),
                }
            }
            rows.push(LinearOperator::hstack(&parts)?);
        }
        LinearOperator::vstack(&rows)
    }
}

/// Concatenates block vectors into one stacked vector.
pub fn stack_blocks(xs: &[Vector]) -> Vector {
    let data: Vec<f64> = xs.iter().flat_map(|x| x.as_slice().to_vec()).collect();
    Vector::from_raw(data)
}

/// Splits a stacked vector back into blocks of the given dimensions.
pub fn split_blocks(x: &Vector, dims: &[usize]) -> Result<Vec<Vector>, CoreError> {
    let total: usize = dims.iter().sum();
    if x.dim() != total {
        return Err(CoreError::dim("split_blocks", total, x.dim()));
    }
    let mut out = Vec::with_capacity(dims.len());
    let mut offset = 0;
    for d in dims {
        out.push(Vector::from_raw(x.as_slice()[offset..offset + d].to_vec()));
        offset += d;
    }
    Ok(out)
}
