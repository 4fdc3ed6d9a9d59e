use nalgebra::DMatrix;
use num_complex::Complex64;

use super::mode::ModeId;
use crate::error::{Error, Result};

/// Largest allowed deviation of `U·U†` from the identity.
pub const ISOMETRY_TOL: f64 = 1e-12;

/// Linear map on creation operators: `a†_i -> Σ_j U[i, j] b†_j`.
///
/// Rows are indexed by `inputs`, columns by `outputs`. The output list may
/// contain modes that are not inputs (fresh loss modes, new paths); inputs
/// that do not reappear among the outputs are left empty after the map.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    inputs: Vec<ModeId>,
    outputs: Vec<ModeId>,
    matrix: DMatrix<Complex64>,
}

impl ModeTransform {
    pub fn new(inputs: Vec<ModeId>, outputs: Vec<ModeId>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != inputs.len() || matrix.ncols() != outputs.len() {
            return Err(Error::param(format!(
                "matrix is {}x{} but transform has {} inputs and {} outputs",
                matrix.nrows(),
                matrix.ncols(),
                inputs.len(),
                outputs.len()
            )));
        }
        check_unique(&inputs)?;
        check_unique(&outputs)?;
        let dev = isometry_deviation(&matrix);
        if !(dev <= ISOMETRY_TOL) {
            return Err(Error::NotIsometric(dev));
        }
        Ok(ModeTransform { inputs, outputs, matrix })
    }

    /// Square transform acting in place on `modes`.
    pub fn square(modes: Vec<ModeId>, matrix: DMatrix<Complex64>) -> Result<Self> {
        ModeTransform::new(modes.clone(), modes, matrix)
    }

    pub fn identity(modes: Vec<ModeId>) -> Self {
        let n = modes.len();
        ModeTransform { inputs: modes.clone(), outputs: modes, matrix: DMatrix::identity(n, n) }
    }

    pub fn inputs(&self) -> &[ModeId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[ModeId] {
        &self.outputs
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Coefficient of output `to` in the image of input `from`.
    pub fn coefficient(&self, from: &ModeId, to: &ModeId) -> Complex64 {
        match (
            self.inputs.iter().position(|m| m == from),
            self.outputs.iter().position(|m| m == to),
        ) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn isometry_deviation(&self) -> f64 {
        isometry_deviation(&self.matrix)
    }

    /// The same transform acting on wavepacket `internal` instead of the one
    /// it was declared on.
    pub fn with_internal(&self, internal: u8) -> Self {
        let relabel = |v: &[ModeId]| v.iter().map(|m| m.with_internal(internal)).collect();
        ModeTransform { inputs: relabel(&self.inputs), outputs: relabel(&self.outputs), matrix: self.matrix.clone() }
    }

    /// Drops input rows, e.g. for PBS ports that are known to carry vacuum.
    pub fn restrict_inputs(&self, keep: &[ModeId]) -> Result<Self> {
        let rows: Vec<usize> = keep
            .iter()
            .map(|m| self.inputs.iter().position(|x| x == m).ok_or(Error::UnknownMode(*m)))
            .collect::<Result<_>>()?;
        let matrix = DMatrix::from_fn(rows.len(), self.outputs.len(), |i, j| self.matrix[(rows[i], j)]);
        ModeTransform::new(keep.to_vec(), self.outputs.clone(), matrix)
    }

    /// Sequential composition: `self` first, then `next`.
    ///
    /// Every output of `self` must be an input of `next`; the result maps the
    /// inputs of `self` onto the outputs of `next`.
    pub fn then(&self, next: &ModeTransform) -> Result<Self> {
        let mut matrix = DMatrix::zeros(self.inputs.len(), next.outputs.len());
        for (j, out) in self.outputs.iter().enumerate() {
            let k = next.inputs.iter().position(|m| m == out).ok_or(Error::UnknownMode(*out))?;
            for i in 0..self.inputs.len() {
                let a = self.matrix[(i, j)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for l in 0..next.outputs.len() {
                    matrix[(i, l)] += a * next.matrix[(k, l)];
                }
            }
        }
        ModeTransform::new(self.inputs.clone(), next.outputs.clone(), matrix)
    }

    /// Block-diagonal union of transforms on disjoint modes.
    pub fn direct_sum(parts: &[ModeTransform]) -> Result<Self> {
        let inputs: Vec<ModeId> = parts.iter().flat_map(|t| t.inputs.iter().copied()).collect();
        let outputs: Vec<ModeId> = parts.iter().flat_map(|t| t.outputs.iter().copied()).collect();
        let mut matrix = DMatrix::zeros(inputs.len(), outputs.len());
        let (mut r, mut c) = (0, 0);
        for t in parts {
            matrix.view_mut((r, c), (t.matrix.nrows(), t.matrix.ncols())).copy_from(&t.matrix);
            r += t.matrix.nrows();
            c += t.matrix.ncols();
        }
        ModeTransform::new(inputs, outputs, matrix)
    }

    /// Per input row, the non-zero `(output column, coefficient)` pairs.
    pub(crate) fn sparse_rows(&self) -> Vec<Vec<(usize, Complex64)>> {
        (0..self.matrix.nrows())
            .map(|i| {
                (0..self.matrix.ncols())
                    .filter_map(|j| {
                        let u = self.matrix[(i, j)];
                        (u != Complex64::new(0.0, 0.0)).then_some((j, u))
                    })
                    .collect()
            })
            .collect()
    }
}

fn check_unique(modes: &[ModeId]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::DuplicateMode(*m));
        }
    }
    Ok(())
}

fn isometry_deviation(u: &DMatrix<Complex64>) -> f64 {
    let gram = u * u.adjoint();
    let n = gram.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - target).norm());
        }
    }
    dev
}
