//! JSON measure schema:
//! `{"model":{"kind":"rp"|"cp","n":int},"atoms":[{"coords":[...],"weight":num}]}`.
//! Complex coordinates are `[re, im]` pairs. `model` may be omitted, in
//! which case the kind follows from the coordinate shape and `n` from their
//! count.

use std::fs;
use std::path::Path;

use gradmap::{DiscreteMeasure, FieldKind, ModelSpace, ProjectivePoint, C64};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, CliResult};
use crate::output::F17;

/// Weight sums within this distance of 1 are renormalized with a warning;
/// anything further off is rejected.
pub const WEIGHT_RENORMALIZE_TOL: f64 = 1e-9;
/// Room for the rounding of a decimal literal such as `0.999999999`.
const WEIGHT_SLACK: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Rp,
    Cp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: KindSpec,
    pub n: usize,
}

impl ModelSpec {
    pub fn to_model(self) -> CliResult<ModelSpace> {
        let kind = match self.kind {
            KindSpec::Rp => FieldKind::Real,
            KindSpec::Cp => FieldKind::Complex,
        };
        ModelSpace::new(kind, self.n).map_err(|e| invalid(format!("model: {e}")))
    }

    pub fn from_model(model: &ModelSpace) -> Self {
        let kind = match model.kind() {
            FieldKind::Real => KindSpec::Rp,
            FieldKind::Complex => KindSpec::Cp,
        };
        Self { kind, n: model.n() }
    }
}

/// Parses `rp2`, `cp3`, … .
pub fn parse_model(text: &str) -> CliResult<ModelSpace> {
    let lower = text.trim().to_ascii_lowercase();
    let kind = match lower.get(..2) {
        Some("rp") => KindSpec::Rp,
        Some("cp") => KindSpec::Cp,
        _ => return Err(invalid(format!("model `{text}`: expected rp<n> or cp<n>"))),
    };
    let n = lower[2..].parse().map_err(|_| invalid(format!("model `{text}`: bad dimension")))?;
    ModelSpec { kind, n }.to_model()
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum CoordIn {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomIn {
    coords: Vec<CoordIn>,
    weight: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureIn {
    #[serde(default)]
    model: Option<ModelSpec>,
    atoms: Vec<AtomIn>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum CoordsOut {
    Real(Vec<F17>),
    Complex(Vec<[F17; 2]>),
}

#[derive(Debug, Clone, Serialize)]
struct AtomOut {
    coords: CoordsOut,
    weight: F17,
}

/// Serialized form of a measure, also echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureOut {
    model: ModelSpec,
    atoms: Vec<AtomOut>,
}

impl MeasureIn {
    /// Validates against the schema rules and builds the measure.
    pub fn build(self) -> CliResult<DiscreteMeasure> {
        if self.atoms.is_empty() {
            return Err(invalid("atoms: at least one atom is required"));
        }
        let len = self.atoms[0].coords.len();
        let any_complex = self.atoms.iter().flat_map(|a| &a.coords).any(|c| matches!(c, CoordIn::Complex(_)));
        let model = match self.model {
            Some(spec) => spec.to_model()?,
            None if len < 2 => return Err(invalid("atoms[0].coords: need at least 2 coordinates")),
            None => ModelSpace::new(if any_complex { FieldKind::Complex } else { FieldKind::Real }, len - 1)?,
        };
        let m = model.ambient_dim();
        let mut atoms = Vec::with_capacity(self.atoms.len());
        let mut weights = Vec::with_capacity(self.atoms.len());
        for (i, atom) in self.atoms.into_iter().enumerate() {
            if atom.coords.len() != m {
                return Err(invalid(format!(
                    "atoms[{i}].coords: expected {m} entries for {model}, got {}",
                    atom.coords.len()
                )));
            }
            let coords: Vec<C64> = atom
                .coords
                .iter()
                .map(|c| match *c {
                    CoordIn::Real(x) => C64::new(x, 0.0),
                    CoordIn::Complex([re, im]) => C64::new(re, im),
                })
                .collect();
            if model.is_real() && coords.iter().any(|z| z.im != 0.0) {
                return Err(invalid(format!("atoms[{i}].coords: complex entries in a real model")));
            }
            let x = ProjectivePoint::from_complex(&coords).map_err(|e| invalid(format!("atoms[{i}].coords: {e}")))?;
            if !atom.weight.is_finite() || atom.weight < 0.0 {
                return Err(invalid(format!("atoms[{i}].weight: {} is not a nonnegative number", atom.weight)));
            }
            atoms.push(x);
            weights.push(atom.weight);
        }
        let sum: f64 = weights.iter().sum();
        let gap = (sum - 1.0).abs();
        if gap < gradmap::measures::WEIGHT_SUM_TOL {
            Ok(DiscreteMeasure::new(model, atoms, weights)?)
        } else if gap <= WEIGHT_RENORMALIZE_TOL + WEIGHT_SLACK {
            log::warn!("weights sum to {sum}; renormalizing");
            Ok(DiscreteMeasure::normalized(model, atoms, weights)?)
        } else {
            Err(invalid(format!("atoms: weights sum to {sum}, more than {WEIGHT_RENORMALIZE_TOL:e} from 1")))
        }
    }
}

pub fn parse_measure(text: &str) -> CliResult<DiscreteMeasure> {
    let raw: MeasureIn = serde_json::from_str(text).map_err(|e| invalid(format!("measure: {e}")))?;
    raw.build()
}

pub fn load_measure(path: &Path) -> CliResult<DiscreteMeasure> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: MeasureIn = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    raw.build().map_err(|e| match e {
        CliError::Invalid(msg) => invalid(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn measure_out(nu: &DiscreteMeasure) -> MeasureOut {
    let model = nu.model();
    let atoms = nu
        .iter()
        .map(|(x, w)| {
            let coords = if model.is_real() {
                CoordsOut::Real(x.rep().iter().map(|z| F17(z.re)).collect())
            } else {
                CoordsOut::Complex(x.rep().iter().map(|z| [F17(z.re), F17(z.im)]).collect())
            };
            AtomOut { coords, weight: F17(w) }
        })
        .collect();
    MeasureOut { model: ModelSpec::from_model(model), atoms }
}

pub fn measure_json(nu: &DiscreteMeasure) -> CliResult<String> {
    serde_json::to_string_pretty(&measure_out(nu)).map_err(|source| CliError::Json { path: "<measure>".into(), source })
}

pub fn write_measure(path: &Path, nu: &DiscreteMeasure) -> CliResult<()> {
    let mut text = measure_json(nu)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
