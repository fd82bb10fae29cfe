//! Scenario files: JSON with explicit real/imaginary arrays.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decoherence::DecoherenceFunctional;
use crate::error::{Error, Result};
use crate::histories::{ClassOperatorModel, ConsistencyCriterion};
use crate::linalg::{ComplexMatrix, Projection, Vector, MAX_HILBERT_DIM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl MatrixSpec {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (re, im) = m.to_re_im();
        let im = im.iter().any(|row| row.iter().any(|&v| v != 0.0)).then_some(im);
        Self { re, im }
    }

    fn build(&self, dim: usize, path: &str) -> Result<ComplexMatrix> {
        check_rows(&self.re, dim, &format!("{path}.re"))?;
        let zeros;
        let im = match &self.im {
            Some(im) => {
                check_rows(im, dim, &format!("{path}.im"))?;
                im
            }
            None => {
                zeros = vec![vec![0.0; dim]; dim];
                &zeros
            }
        };
        ComplexMatrix::from_re_im(&self.re, im).map_err(|e| at(path, e))
    }
}

impl VectorSpec {
    pub fn from_vector(v: &Vector) -> Self {
        let re = v.amplitudes().iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.amplitudes().iter().map(|z| z.im).collect();
        let im = im.iter().any(|&x| x != 0.0).then_some(im);
        Self { re, im }
    }

    fn build(&self, dim: usize, path: &str) -> Result<Vector> {
        if self.re.len() != dim {
            return Err(shape(&format!("{path}.re"), dim, self.re.len()));
        }
        let zeros = vec![0.0; dim];
        let im = self.im.as_deref().unwrap_or(&zeros);
        if im.len() != dim {
            return Err(shape(&format!("{path}.im"), dim, im.len()));
        }
        Vector::from_re_im(&self.re, im).map_err(|e| at(path, e))
    }
}

fn check_rows(rows: &[Vec<f64>], dim: usize, path: &str) -> Result<()> {
    if rows.len() != dim {
        return Err(shape(path, dim, rows.len()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(shape(&format!("{path}[{i}]"), dim, row.len()));
        }
    }
    Ok(())
}

fn shape(path: &str, expected: usize, found: usize) -> Error {
    Error::Scenario {
        path: path.into(),
        message: format!("expected length {expected}, found {found}"),
    }
}

fn at(path: &str, e: Error) -> Error {
    Error::Scenario {
        path: path.into(),
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    /// `X` on `H⊗H`, row index `a·d + b`.
    Operator { x: MatrixSpec },
    PureState { psi: VectorSpec },
    /// Gram matrix `G_ab = Q(E_b, E_a)` over matrix units `E_{i·d+j} = E_ij`.
    Form { gram: MatrixSpec },
    ClassOperator {
        rho: MatrixSpec,
        hamiltonian: MatrixSpec,
        times: Vec<f64>,
        schedules: Vec<Vec<MatrixSpec>>,
    },
}

fn default_axioms() -> f64 {
    1e-9
}
fn default_conditions() -> f64 {
    1e-8
}
fn default_fidelity() -> f64 {
    1e-9
}
fn default_consistency() -> f64 {
    1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_axioms")]
    pub axioms: f64,
    #[serde(default = "default_conditions")]
    pub conditions: f64,
    #[serde(default = "default_fidelity")]
    pub fidelity: f64,
    #[serde(default = "default_consistency")]
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            axioms: default_axioms(),
            conditions: default_conditions(),
            fidelity: default_fidelity(),
            consistency: default_consistency(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub functional: FunctionalSpec,
    /// Pairwise orthogonal projections for the consistency check of
    /// backends without a history model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histories: Option<Vec<MatrixSpec>>,
    #[serde(default)]
    pub criterion: ConsistencyCriterion,
}

/// A scenario with its functional constructed.
#[derive(Clone, Debug)]
pub struct Built {
    pub functional: DecoherenceFunctional,
    pub model: Option<Arc<ClassOperatorModel>>,
    pub histories: Option<Vec<Projection>>,
}

fn projection_at(spec: &MatrixSpec, dim: usize, path: &str) -> Result<Projection> {
    Projection::new(spec.build(dim, path)?).map_err(|e| at(path, e))
}

impl Scenario {
    pub fn build(&self) -> Result<Built> {
        let n = self.dimension;
        if n == 0 || n > MAX_HILBERT_DIM {
            return Err(Error::Scenario {
                path: "dimension".into(),
                message: format!("must be between 1 and {MAX_HILBERT_DIM}, got {n}"),
            });
        }
        for (name, v) in [
            ("axioms", self.tolerances.axioms),
            ("conditions", self.tolerances.conditions),
            ("fidelity", self.tolerances.fidelity),
            ("consistency", self.tolerances.consistency),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Scenario {
                    path: format!("tolerances.{name}"),
                    message: format!("must be finite and non-negative, got {v}"),
                });
            }
        }

        let mut model = None;
        let functional = match &self.functional {
            FunctionalSpec::Operator { x } => {
                DecoherenceFunctional::operator_backed(x.build(n * n, "functional.x")?)
                    .map_err(|e| at("functional.x", e))?
            }
            FunctionalSpec::PureState { psi } => DecoherenceFunctional::pure_state(psi.build(n, "functional.psi")?)
                .map_err(|e| at("functional.psi", e))?,
            FunctionalSpec::Form { gram } => {
                DecoherenceFunctional::form_backed(gram.build(n * n, "functional.gram")?)
                    .map_err(|e| at("functional.gram", e))?
            }
            FunctionalSpec::ClassOperator {
                rho,
                hamiltonian,
                times,
                schedules,
            } => {
                let rho = rho.build(n, "functional.rho")?;
                let hamiltonian = hamiltonian.build(n, "functional.hamiltonian")?;
                let schedules = schedules
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.iter()
                            .enumerate()
                            .map(|(j, p)| projection_at(p, n, &format!("functional.schedules[{i}][{j}]")))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let m = ClassOperatorModel::new(rho, hamiltonian, times.clone(), schedules).map_err(|e| match e {
                    Error::InvalidModel(msg) => match msg.split_once(": ") {
                        Some((field, rest)) => Error::Scenario {
                            path: format!("functional.{field}"),
                            message: rest.into(),
                        },
                        None => at("functional", Error::InvalidModel(msg)),
                    },
                    other => at("functional", other),
                })?;
                let m = Arc::new(m);
                model = Some(m.clone());
                DecoherenceFunctional::class_operator(m)
            }
        };

        let histories = self
            .histories
            .as_ref()
            .map(|hs| {
                hs.iter()
                    .enumerate()
                    .map(|(i, h)| projection_at(h, n, &format!("histories[{i}]")))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;

        Ok(Built {
            functional,
            model,
            histories,
        })
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let text = super::output::to_canonical_json(self);
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Parses and validates a scenario. Errors name the offending field path.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Scenario {
            path: if path == "." { "scenario".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    scenario.build()?;
    Ok(scenario)
}

pub fn scenario_hash(scenario: &Scenario) -> String {
    scenario.hash()
}
