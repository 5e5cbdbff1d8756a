//! Strategy JSON.
//!
//! ```json
//! {
//!   "state": [[[re, im], ...], ...],
//!   "unitaries": { "000": [[[re, im], ...], ...], ..., "111": ... },
//!   "observables": [B1, B2, B3]
//! }
//! ```
//!
//! Matrices are row-major nested arrays and complex numbers are `[re, im]`
//! pairs. Validation errors carry the offending field path, for example
//! `unitaries/011` or `observables/1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::game::{BobObservables, EncodingUnitaries, Input, SharedState, Strategy, Tolerances};
use crate::linalg::CMatrix;
use crate::{Error, Result};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub state: JsonMatrix,
    pub unitaries: BTreeMap<String, JsonMatrix>,
    pub observables: Vec<JsonMatrix>,
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    m.rows()
        .iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(field: &str, rows: &JsonMatrix, dim: usize) -> Result<CMatrix> {
    if rows.len() != dim {
        return Err(Error::invalid(
            field,
            format!("expected {dim} rows, got {}", rows.len()),
        ));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::invalid(
                field,
                format!("row {i} has {} entries, expected {dim}", row.len()),
            ));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::invalid(
                    field,
                    format!("entry ({i},{j}) is not finite"),
                ));
            }
            data.push(Complex64::new(re, im));
        }
    }
    Ok(CMatrix::from_vec(dim, data)?)
}

impl StrategyFile {
    pub fn from_strategy(s: &Strategy) -> Self {
        StrategyFile {
            state: matrix_to_json(s.state.rho()),
            unitaries: s
                .alice
                .iter()
                .map(|(x, u)| (x.label(), matrix_to_json(u)))
                .collect(),
            observables: s.bob.as_array().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn into_strategy(self, tol: &Tolerances) -> Result<Strategy> {
        let rho = matrix_from_json("state", &self.state, 4)?;
        let state = SharedState::with_tolerances(rho, tol)?;

        if let Some(key) = self
            .unitaries
            .keys()
            .find(|k| Input::from_label(k).is_none())
        {
            return Err(Error::invalid(
                format!("unitaries/{key}"),
                "not a 3-bit input label",
            ));
        }
        let mut u = Vec::with_capacity(8);
        for x in Input::ALL {
            let field = format!("unitaries/{x}");
            let m = self
                .unitaries
                .get(&x.label())
                .ok_or_else(|| Error::invalid(&field, "missing"))?;
            u.push(matrix_from_json(&field, m, 2)?);
        }
        let alice = EncodingUnitaries::with_tolerances(u, tol)?;

        if self.observables.len() != 3 {
            return Err(Error::invalid(
                "observables",
                format!("expected 3 matrices, got {}", self.observables.len()),
            ));
        }
        let mut b = Vec::with_capacity(3);
        for (k, m) in self.observables.iter().enumerate() {
            b.push(matrix_from_json(&format!("observables/{k}"), m, 4)?);
        }
        let b: [CMatrix; 3] = b.try_into().expect("three observables");
        let bob = BobObservables::with_tolerances(b, tol)?;
        Ok(Strategy { state, alice, bob })
    }
}

impl Strategy {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StrategyFile::from_strategy(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Strategy> {
        Self::from_json_with_tolerances(text, &Tolerances::default())
    }

    pub fn from_json_with_tolerances(text: &str, tol: &Tolerances) -> Result<Strategy> {
        let file: StrategyFile = serde_json::from_str(text)?;
        file.into_strategy(tol)
    }
}
