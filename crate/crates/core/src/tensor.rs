//! Dense multiway complex tensors, density operators and per-party operator
//! sets.
//!
//! Storage is row-major with party 1 slowest: for dims (N₁,…,N_p) the flat
//! index of (i₁,…,i_p) is Σ_k i_k·stride_k with stride_p = 1 and
//! stride_k = N_{k+1}·stride_{k+1}. Unfoldings, density-operator indexing and
//! the epsilon contractions all rely on this one convention.

use ndarray::Array2;

use crate::error::{MpnfError, Result};
use crate::linalg::{self, eigh, C64};
use crate::tol;

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(MpnfError::InvalidDims("no parties".into()));
    }
    if dims.contains(&0) {
        return Err(MpnfError::InvalidDims("zero-dimensional party".into()));
    }
    Ok(())
}

fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

/// A pure multipartite state (or general complex tensor) with one index per
/// party.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl MultiTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        check_dims(&dims)?;
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(MpnfError::EntryCountMismatch { expected, got: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MpnfError::NonFinite);
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let total = dims.iter().product();
        Ok(Self { dims, data: vec![C64::new(0.0, 0.0); total] })
    }

    /// Basis ket |i₁…i_p⟩.
    pub fn basis_ket(dims: Vec<usize>, index: &[usize]) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let flat = t.flat_index(index)?;
        t.data[flat] = C64::new(1.0, 0.0);
        Ok(t)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn party_count(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.dims)
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(MpnfError::InvalidDims(format!(
                "index has {} components, state has {} parties",
                index.len(),
                self.dims.len()
            )));
        }
        let strides = self.strides();
        let mut flat = 0usize;
        for (k, (&i, &d)) in index.iter().zip(self.dims.iter()).enumerate() {
            if i >= d {
                return Err(MpnfError::InvalidDims(format!(
                    "index {i} out of range for party {k} (dim {d})"
                )));
            }
            flat += i * strides[k];
        }
        Ok(flat)
    }

    pub fn get(&self, index: &[usize]) -> Result<C64> {
        Ok(self.data[self.flat_index(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: C64) -> Result<()> {
        let flat = self.flat_index(index)?;
        self.data[flat] = value;
        Ok(())
    }

    /// Σ |ψ|².
    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 {
            return Err(MpnfError::ZeroState);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// ⟨self|other⟩ with the conjugate on `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dims != other.dims {
            return Err(MpnfError::InvalidDims("inner product of unequal shapes".into()));
        }
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_party(&self, party: usize) -> Result<()> {
        if party >= self.dims.len() {
            return Err(MpnfError::InvalidParty { party, count: self.dims.len() });
        }
        Ok(())
    }

    /// Apply a single operator (possibly rectangular, rows×dims[party]) to one
    /// party: ψ'_{…i…} = Σ_j op[i,j]·ψ_{…j…}.
    pub fn apply_one(&self, party: usize, op: &Array2<C64>) -> Result<Self> {
        self.check_party(party)?;
        let n = self.dims[party];
        let (rows, cols) = op.dim();
        if cols != n {
            return Err(MpnfError::DimensionMismatch {
                party,
                expected: n,
                got_rows: rows,
                got_cols: cols,
            });
        }
        let strides = self.strides();
        let suffix = strides[party];
        let blocks = self.data.len() / (n * suffix);
        let mut out_dims = self.dims.clone();
        out_dims[party] = rows;
        let mut out = vec![C64::new(0.0, 0.0); blocks * rows * suffix];
        for a in 0..blocks {
            for i in 0..rows {
                let out_base = (a * rows + i) * suffix;
                for j in 0..n {
                    let w = op[[i, j]];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let in_base = (a * n + j) * suffix;
                    for b in 0..suffix {
                        out[out_base + b] += w * self.data[in_base + b];
                    }
                }
            }
        }
        Ok(Self { dims: out_dims, data: out })
    }

    /// Apply one operator per party (A₁⊗⋯⊗A_p)|ψ⟩.
    pub fn apply_all(&self, ops: &LocalOperatorSet) -> Result<Self> {
        ops.check_against_dims(&self.dims)?;
        let mut cur = self.clone();
        for (k, op) in ops.ops().iter().enumerate() {
            cur = cur.apply_one(k, op)?;
        }
        Ok(cur)
    }

    /// Matrix ψ_{i_k,(rest)} with rows indexed by the chosen party and the
    /// column index running row-major over the remaining parties in their
    /// original order (first remaining party slowest).
    pub fn unfold(&self, party: usize) -> Result<Array2<C64>> {
        self.check_party(party)?;
        let n = self.dims[party];
        let cols = self.data.len() / n;
        let strides = self.strides();
        let suffix = strides[party];
        let mut m = Array2::from_elem((n, cols), C64::new(0.0, 0.0));
        for (flat, &z) in self.data.iter().enumerate() {
            let b = flat % suffix;
            let i = (flat / suffix) % n;
            let a = flat / (suffix * n);
            m[[i, a * suffix + b]] = z;
        }
        Ok(m)
    }

    /// Single-party reduced density operator, computed as M M† from the
    /// unfolding.
    pub fn reduced_density(&self, party: usize) -> Result<Array2<C64>> {
        let m = self.unfold(party)?;
        Ok(m.dot(&linalg::adjoint(&m)))
    }
}

/// A (generally mixed) state: PSD hermitian matrix on the tensor-product
/// space, tagged with the party dimension list.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    mat: Array2<C64>,
}

impl DensityOperator {
    /// Validates shape, finiteness, hermiticity (τ = `tol::HERMITIAN`
    /// relative to trace) and positivity (eigenvalues ≥ −`tol::PSD`·trace).
    pub fn new(dims: Vec<usize>, mat: Array2<C64>) -> Result<Self> {
        Self::new_with_tolerances(dims, mat, tol::HERMITIAN, tol::PSD)
    }

    /// [`DensityOperator::new`] with explicit hermiticity/positivity
    /// tolerances, both relative to the trace scale.
    pub fn new_with_tolerances(
        dims: Vec<usize>,
        mat: Array2<C64>,
        herm_tol: f64,
        psd_tol: f64,
    ) -> Result<Self> {
        check_dims(&dims)?;
        let total: usize = dims.iter().product();
        if mat.nrows() != total || mat.ncols() != total {
            return Err(MpnfError::EntryCountMismatch {
                expected: total * total,
                got: mat.nrows() * mat.ncols(),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MpnfError::NonFinite);
        }
        let op = Self { dims, mat };
        let scale = op.trace().abs().max(linalg::frobenius(&op.mat)).max(1e-300);
        let dev = linalg::hermitian_deviation(&op.mat);
        if dev > herm_tol * scale {
            return Err(MpnfError::NotHermitian { deviation: dev, tol: herm_tol * scale });
        }
        let min = op.min_eigenvalue();
        if min < -psd_tol * scale {
            return Err(MpnfError::NotPsd { min_eigenvalue: min });
        }
        Ok(op)
    }

    /// Skips the hermitian/PSD validation; for internal steps that preserve
    /// positivity by construction (congruences, outer products).
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, mat: Array2<C64>) -> Self {
        Self { dims, mat }
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let total = dims.iter().product();
        Ok(Self { dims, mat: Array2::from_elem((total, total), C64::new(0.0, 0.0)) })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn party_count(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.mat).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.mat).values[0]
    }

    pub fn frobenius(&self) -> f64 {
        linalg::frobenius(&self.mat)
    }

    fn check_party(&self, party: usize) -> Result<()> {
        if party >= self.dims.len() {
            return Err(MpnfError::InvalidParty { party, count: self.dims.len() });
        }
        Ok(())
    }

    /// Reduced operator ρ_k = Tr_{all but k}(ρ).
    pub fn partial_trace(&self, party: usize) -> Result<Array2<C64>> {
        self.check_party(party)?;
        let n = self.dims[party];
        let strides = strides_of(&self.dims);
        let suffix = strides[party];
        let total = self.mat.nrows();
        let blocks = total / (n * suffix);
        let mut out = Array2::from_elem((n, n), C64::new(0.0, 0.0));
        for a in 0..blocks {
            for b in 0..suffix {
                for i in 0..n {
                    let row = (a * n + i) * suffix + b;
                    for j in 0..n {
                        let col = (a * n + j) * suffix + b;
                        out[[i, j]] += self.mat[[row, col]];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Apply one operator (rows×dims[party]) to one party as a congruence
    /// ρ' = (I⊗…A…⊗I) ρ (I⊗…A…⊗I)†.
    pub fn apply_one(&self, party: usize, op: &Array2<C64>) -> Result<Self> {
        self.check_party(party)?;
        let n = self.dims[party];
        let (rows, cols) = op.dim();
        if cols != n {
            return Err(MpnfError::DimensionMismatch {
                party,
                expected: n,
                got_rows: rows,
                got_cols: cols,
            });
        }
        let strides = strides_of(&self.dims);
        let suffix = strides[party];
        let total = self.mat.nrows();
        let blocks = total / (n * suffix);
        let new_total = blocks * rows * suffix;

        // Left multiplication on the row multi-index.
        let mut half = Array2::from_elem((new_total, total), C64::new(0.0, 0.0));
        for a in 0..blocks {
            for i in 0..rows {
                let out_row = (a * rows + i) * suffix;
                for j in 0..n {
                    let w = op[[i, j]];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let in_row = (a * n + j) * suffix;
                    for b in 0..suffix {
                        for c in 0..total {
                            half[[out_row + b, c]] += w * self.mat[[in_row + b, c]];
                        }
                    }
                }
            }
        }
        // Conjugated multiplication on the column multi-index.
        let mut out = Array2::from_elem((new_total, new_total), C64::new(0.0, 0.0));
        for a in 0..blocks {
            for i in 0..rows {
                let out_col = (a * rows + i) * suffix;
                for j in 0..n {
                    let w = op[[i, j]].conj();
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let in_col = (a * n + j) * suffix;
                    for b in 0..suffix {
                        for r in 0..new_total {
                            out[[r, out_col + b]] += w * half[[r, in_col + b]];
                        }
                    }
                }
            }
        }
        let mut out_dims = self.dims.clone();
        out_dims[party] = rows;
        Ok(Self { dims: out_dims, mat: out })
    }

    /// (A₁⊗⋯⊗A_p) ρ (A₁⊗⋯⊗A_p)†.
    pub fn apply_all(&self, ops: &LocalOperatorSet) -> Result<Self> {
        ops.check_against_dims(&self.dims)?;
        let mut cur = self.clone();
        for (k, op) in ops.ops().iter().enumerate() {
            cur = cur.apply_one(k, op)?;
        }
        Ok(cur)
    }
}

/// |ψ⟩⟨ψ| as a density operator; trace equals ‖ψ‖².
pub fn pure_to_density(psi: &MultiTensor) -> DensityOperator {
    let total = psi.total_dim();
    let data = psi.data();
    let mat = Array2::from_shape_fn((total, total), |(i, j)| data[i] * data[j].conj());
    DensityOperator::from_parts_unchecked(psi.dims().to_vec(), mat)
}

/// How a `LocalOperatorSet` is meant to be interpreted, with the matching
/// validation applied at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpFlavor {
    /// No structural constraint.
    General,
    /// Every operator square with |det − 1| ≤ τ_det.
    SpecialLinear,
    /// Every operator square with ‖A†A − I‖ ≤ τ_unit.
    Unitary,
    /// Rows ≤ columns with A A† = I (truncating isometries; the only flavor
    /// allowed to be rectangular).
    Isometry,
}

impl OpFlavor {
    fn name(self) -> &'static str {
        match self {
            OpFlavor::General => "general",
            OpFlavor::SpecialLinear => "special-linear",
            OpFlavor::Unitary => "unitary",
            OpFlavor::Isometry => "isometry",
        }
    }
}

/// One operator per party, tagged with its determinant (determinants of
/// rectangular isometries are recorded as 0).
#[derive(Debug, Clone)]
pub struct LocalOperatorSet {
    ops: Vec<Array2<C64>>,
    dets: Vec<C64>,
    flavor: OpFlavor,
}

impl LocalOperatorSet {
    pub fn new(ops: Vec<Array2<C64>>, flavor: OpFlavor) -> Result<Self> {
        if ops.is_empty() {
            return Err(MpnfError::InvalidDims("empty operator set".into()));
        }
        let mut dets = Vec::with_capacity(ops.len());
        for (party, op) in ops.iter().enumerate() {
            let (rows, cols) = op.dim();
            if flavor != OpFlavor::Isometry && rows != cols {
                return Err(MpnfError::DimensionMismatch {
                    party,
                    expected: cols,
                    got_rows: rows,
                    got_cols: cols,
                });
            }
            if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(MpnfError::NonFinite);
            }
            let d = if rows == cols { linalg::det(op) } else { C64::new(0.0, 0.0) };
            match flavor {
                OpFlavor::SpecialLinear => {
                    let dev = (d - C64::new(1.0, 0.0)).norm();
                    if dev > tol::DETERMINANT {
                        return Err(MpnfError::FlavorViolation {
                            party,
                            flavor: flavor.name(),
                            deviation: dev,
                        });
                    }
                }
                OpFlavor::Unitary => {
                    let dev = linalg::unitary_deviation(op);
                    if dev > tol::UNITARY {
                        return Err(MpnfError::FlavorViolation {
                            party,
                            flavor: flavor.name(),
                            deviation: dev,
                        });
                    }
                }
                OpFlavor::Isometry => {
                    if rows > cols {
                        return Err(MpnfError::DimensionMismatch {
                            party,
                            expected: cols,
                            got_rows: rows,
                            got_cols: cols,
                        });
                    }
                    // A A† = I on the retained rows.
                    let g = op.dot(&linalg::adjoint(op));
                    let mut dev = 0.0f64;
                    for i in 0..rows {
                        for j in 0..rows {
                            let target =
                                if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                            dev += (g[[i, j]] - target).norm_sqr();
                        }
                    }
                    if dev.sqrt() > tol::UNITARY {
                        return Err(MpnfError::FlavorViolation {
                            party,
                            flavor: flavor.name(),
                            deviation: dev.sqrt(),
                        });
                    }
                }
                OpFlavor::General => {}
            }
            dets.push(d);
        }
        Ok(Self { ops, dets, flavor })
    }

    pub fn identity(dims: &[usize]) -> Self {
        let ops: Vec<Array2<C64>> = dims.iter().map(|&n| linalg::identity(n)).collect();
        let dets = vec![C64::new(1.0, 0.0); dims.len()];
        Self { ops, dets, flavor: OpFlavor::SpecialLinear }
    }

    pub fn ops(&self) -> &[Array2<C64>] {
        &self.ops
    }

    pub fn op(&self, party: usize) -> &Array2<C64> {
        &self.ops[party]
    }

    pub fn det_tags(&self) -> &[C64] {
        &self.dets
    }

    pub fn flavor(&self) -> OpFlavor {
        self.flavor
    }

    pub fn party_count(&self) -> usize {
        self.ops.len()
    }

    pub fn check_against_dims(&self, dims: &[usize]) -> Result<()> {
        if self.ops.len() != dims.len() {
            return Err(MpnfError::InvalidDims(format!(
                "operator set has {} parties, state has {}",
                self.ops.len(),
                dims.len()
            )));
        }
        for (party, (op, &d)) in self.ops.iter().zip(dims.iter()).enumerate() {
            if op.ncols() != d {
                return Err(MpnfError::DimensionMismatch {
                    party,
                    expected: d,
                    got_rows: op.nrows(),
                    got_cols: op.ncols(),
                });
            }
        }
        Ok(())
    }

    /// Composition `then ∘ self`: party k gets then_k · self_k.
    pub fn compose(&self, then: &Self) -> Result<Self> {
        if self.ops.len() != then.ops.len() {
            return Err(MpnfError::InvalidDims("composing sets of unequal party count".into()));
        }
        let mut ops = Vec::with_capacity(self.ops.len());
        for (party, (a, b)) in self.ops.iter().zip(then.ops.iter()).enumerate() {
            if b.ncols() != a.nrows() {
                return Err(MpnfError::DimensionMismatch {
                    party,
                    expected: a.nrows(),
                    got_rows: b.nrows(),
                    got_cols: b.ncols(),
                });
            }
            ops.push(b.dot(a));
        }
        let flavor = if self.flavor == then.flavor { self.flavor } else { OpFlavor::General };
        let dets = ops
            .iter()
            .map(|op| if op.nrows() == op.ncols() { linalg::det(op) } else { C64::new(0.0, 0.0) })
            .collect();
        Ok(Self { ops, dets, flavor })
    }
}

/// Pure or mixed state, the common currency of the normal-form routines.
#[derive(Debug, Clone)]
pub enum State {
    Pure(MultiTensor),
    Density(DensityOperator),
}

impl State {
    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(t) => t.dims(),
            State::Density(d) => d.dims(),
        }
    }

    /// Trace of the (implicit) density operator: ‖ψ‖² for pure states.
    pub fn trace(&self) -> f64 {
        match self {
            State::Pure(t) => t.norm2(),
            State::Density(d) => d.trace(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, State::Pure(_))
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            State::Pure(t) => pure_to_density(t),
            State::Density(d) => d.clone(),
        }
    }

    pub fn reduced(&self, party: usize) -> Result<Array2<C64>> {
        match self {
            State::Pure(t) => t.reduced_density(party),
            State::Density(d) => d.partial_trace(party),
        }
    }

    pub fn apply_all(&self, ops: &LocalOperatorSet) -> Result<State> {
        Ok(match self {
            State::Pure(t) => State::Pure(t.apply_all(ops)?),
            State::Density(d) => State::Density(d.apply_all(ops)?),
        })
    }
}

/// Apply one operator per party to a pure or mixed state, returning the same
/// kind of state. Density operators transform by congruence.
pub fn apply_local(state: &State, ops: &LocalOperatorSet) -> Result<State> {
    state.apply_all(ops)
}
