//! Band-model JSON documents.
//!
//! ```json
//! {
//!   "omega": 1.0,
//!   "amplitude": [0.05, 0.0],
//!   "gamma0": 0.02,
//!   "beta": 20.0,
//!   "k_points": [
//!     { "k": 0.0, "eps1": -0.6, "eps2": 0.6,
//!       "v0": [[[0.3, 0], [0, 0.4]], [[0, -0.4], [-0.3, 0]]],
//!       "dv_dk": [[[0.1, 0], [0.2, 0]], [[0.2, 0], [-0.1, 0]]] }
//!   ]
//! }
//! ```
//!
//! `beta` may be omitted (or null) for a zero-temperature bath. Per-point
//! `weight`s are optional; when absent every point gets 1/n.

use serde::{Deserialize, Serialize};

use super::{KPoint, TwoBandModel};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::file::{matrix_to_pairs, pairs_to_matrix, ComplexPair};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KPointEntry {
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub v0: Vec<Vec<ComplexPair>>,
    pub dv_dk: Vec<Vec<ComplexPair>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandFile {
    pub omega: f64,
    pub amplitude: ComplexPair,
    pub gamma0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub k_points: Vec<KPointEntry>,
}

impl BandFile {
    pub fn into_model(self) -> Result<TwoBandModel> {
        let given = self.k_points.iter().filter(|p| p.weight.is_some()).count();
        if given != 0 && given != self.k_points.len() {
            return Err(Error::ModelData(
                "either every k-point carries a weight or none does".into(),
            ));
        }
        let k_points = self
            .k_points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let v0 = pairs_to_matrix(&p.v0, &format!("k_points[{i}].v0"))?;
                let dv_dk = pairs_to_matrix(&p.dv_dk, &format!("k_points[{i}].dv_dk"))?;
                Ok(KPoint {
                    k: p.k,
                    weight: p.weight,
                    eps1: p.eps1,
                    eps2: p.eps2,
                    v0,
                    dv_dk,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = TwoBandModel {
            omega: self.omega,
            amplitude: C64::new(self.amplitude[0], self.amplitude[1]),
            gamma0: self.gamma0,
            beta: self.beta.unwrap_or(f64::INFINITY),
            k_points,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn from_model(m: &TwoBandModel) -> Self {
        BandFile {
            omega: m.omega,
            amplitude: [m.amplitude.re, m.amplitude.im],
            gamma0: m.gamma0,
            beta: m.beta.is_finite().then_some(m.beta),
            k_points: m
                .k_points
                .iter()
                .map(|p| KPointEntry {
                    k: p.k,
                    weight: p.weight,
                    eps1: p.eps1,
                    eps2: p.eps2,
                    v0: matrix_to_pairs(&p.v0),
                    dv_dk: matrix_to_pairs(&p.dv_dk),
                })
                .collect(),
        }
    }
}
