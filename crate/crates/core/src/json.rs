//! The tensor JSON interchange format shared with the CLI and the Python
//! bindings.
//!
//! Pure states:    `{"dims":[N1,...,Np], "entries":[[re,im],...]}`
//! Density states: `{"kind":"density", "dims":[...], "entries":[[re,im],...]}`
//!
//! Entries are row-major with party 1 slowest; density operators store the
//! full matrix row-major over (row, column). Entry-count mismatches are
//! rejected.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{MpnfError, Result};
use crate::linalg::C64;
use crate::tensor::{DensityOperator, MultiTensor, State};

#[derive(Debug, Serialize, Deserialize)]
struct TensorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    dims: Vec<usize>,
    entries: Vec<[f64; 2]>,
}

fn entries_of(data: &[C64]) -> Vec<[f64; 2]> {
    data.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pure_to_value(psi: &MultiTensor) -> serde_json::Value {
    serde_json::to_value(TensorJson {
        kind: None,
        dims: psi.dims().to_vec(),
        entries: entries_of(psi.data()),
    })
    .expect("tensor JSON serialization cannot fail")
}

pub fn density_to_value(rho: &DensityOperator) -> serde_json::Value {
    let m = rho.matrix();
    let mut entries = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entries.push([m[[i, j]].re, m[[i, j]].im]);
        }
    }
    serde_json::to_value(TensorJson {
        kind: Some("density".to_string()),
        dims: rho.dims().to_vec(),
        entries,
    })
    .expect("tensor JSON serialization cannot fail")
}

pub fn state_to_value(state: &State) -> serde_json::Value {
    match state {
        State::Pure(t) => pure_to_value(t),
        State::Density(d) => density_to_value(d),
    }
}

pub fn state_to_string(state: &State) -> String {
    state_to_value(state).to_string()
}

pub fn state_from_value(value: &serde_json::Value) -> Result<State> {
    let parsed: TensorJson =
        serde_json::from_value(value.clone()).map_err(|e| MpnfError::Json(e.to_string()))?;
    build_state(parsed)
}

pub fn state_from_str(text: &str) -> Result<State> {
    let parsed: TensorJson =
        serde_json::from_str(text).map_err(|e| MpnfError::Json(e.to_string()))?;
    build_state(parsed)
}

fn build_state(parsed: TensorJson) -> Result<State> {
    let total: usize = parsed.dims.iter().product();
    match parsed.kind.as_deref() {
        None | Some("pure") => {
            if parsed.entries.len() != total {
                return Err(MpnfError::EntryCountMismatch {
                    expected: total,
                    got: parsed.entries.len(),
                });
            }
            let data: Vec<C64> =
                parsed.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            Ok(State::Pure(MultiTensor::new(parsed.dims, data)?))
        }
        Some("density") => {
            if parsed.entries.len() != total * total {
                return Err(MpnfError::EntryCountMismatch {
                    expected: total * total,
                    got: parsed.entries.len(),
                });
            }
            let mat = Array2::from_shape_fn((total, total), |(i, j)| {
                let [re, im] = parsed.entries[i * total + j];
                C64::new(re, im)
            });
            Ok(State::Density(DensityOperator::new(parsed.dims, mat)?))
        }
        Some(other) => Err(MpnfError::Json(format!("unknown kind `{other}`"))),
    }
}

/// Matrices (filters, unitaries) serialize as `{"rows":r,"cols":c,"entries":[[re,im],...]}`.
pub fn matrix_to_value(m: &Array2<C64>) -> serde_json::Value {
    let mut entries = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entries.push([m[[i, j]].re, m[[i, j]].im]);
        }
    }
    serde_json::json!({ "rows": m.nrows(), "cols": m.ncols(), "entries": entries })
}

pub fn matrix_from_value(value: &serde_json::Value) -> Result<Array2<C64>> {
    #[derive(Deserialize)]
    struct MatrixJson {
        rows: usize,
        cols: usize,
        entries: Vec<[f64; 2]>,
    }
    let parsed: MatrixJson =
        serde_json::from_value(value.clone()).map_err(|e| MpnfError::Json(e.to_string()))?;
    if parsed.entries.len() != parsed.rows * parsed.cols {
        return Err(MpnfError::EntryCountMismatch {
            expected: parsed.rows * parsed.cols,
            got: parsed.entries.len(),
        });
    }
    Ok(Array2::from_shape_fn((parsed.rows, parsed.cols), |(i, j)| {
        let [re, im] = parsed.entries[i * parsed.cols + j];
        C64::new(re, im)
    }))
}
