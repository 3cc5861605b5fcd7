//! Scenarios: a command, its inputs and parameters, run into a report and
//! a CSV table.

use std::fs;
use std::path::Path;
use std::time::Instant;

use gradmap::invariants::run_checks;
use gradmap::nonabelian_solver::BalanceOptions;
use gradmap::{
    affine_component, balance_with, gradient_f, gradient_f_torus, orbit_image_sample, polytope_P, reduce_and_recenter,
    solve_torus_target_with, AElement, DiscreteMeasure, ModelSpace, SolveStatus, TorusSolveOptions, C64,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, CliResult};
use crate::output::{a_json, f17s, fmt17, indexed_columns, CsvTable, MatrixJson, F17};
use crate::schema::{measure_out, MeasureIn, MeasureOut, ModelSpec};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Compute,
    Balance,
    OrbitImage,
    Polytope,
    Reduce,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Compute => "compute",
            Command::Balance => "balance",
            Command::OrbitImage => "orbit-image",
            Command::Polytope => "polytope",
            Command::Reduce => "reduce",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Sample count for `orbit-image` and `reduce`.
    pub samples: Option<usize>,
    /// Diagonal target `t` (entries summing to 0); balancing aims at
    /// `diag(t)`.
    pub target: Option<Vec<f64>>,
    /// Balance with the torus only.
    pub torus: bool,
    /// Radius of the ball of torus directions sampled by `orbit-image`.
    pub radius: f64,
    pub wall_time: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            seed: 0,
            samples: None,
            target: None,
            torus: false,
            radius: 3.0,
            wall_time: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub command: Command,
    pub model: Option<ModelSpace>,
    pub measure: Option<DiscreteMeasure>,
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MeasureRef {
    Path(String),
    Inline(MeasureIn),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioIn {
    command: Command,
    #[serde(default)]
    model: Option<ModelSpec>,
    #[serde(default)]
    measure: Option<MeasureRef>,
    #[serde(default)]
    params: Params,
}

/// Reads a scenario file. A `measure` given as a string is a path relative
/// to the scenario file.
pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: ScenarioIn = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let measure = match raw.measure {
        None => None,
        Some(MeasureRef::Inline(m)) => Some(m.build()?),
        Some(MeasureRef::Path(p)) => {
            let base = path.parent().unwrap_or(Path::new("."));
            Some(crate::schema::load_measure(&base.join(p))?)
        }
    };
    let model = raw.model.map(ModelSpec::to_model).transpose()?;
    Ok(Scenario { command: raw.command, model, measure, params: raw.params })
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub params: ParamsEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<MeasureOut>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<F17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub outputs: Outputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<F17>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    pub tol: F17,
    pub max_iter: usize,
    pub samples: Option<usize>,
    pub target: Option<Vec<F17>>,
    pub torus: bool,
    pub radius: F17,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Outputs {
    Compute {
        gradient: MatrixJson,
        gradient_norm: F17,
        torus_gradient: Vec<F17>,
        polytope_margin: F17,
    },
    Balance {
        target: MatrixJson,
        group: MatrixJson,
        cartan_p: MatrixJson,
        cartan_p_norm: F17,
    },
    TorusBalance {
        target: Vec<F17>,
        alpha: Vec<F17>,
        image: Vec<F17>,
    },
    OrbitImage {
        offset: Vec<F17>,
        direction_dimension: usize,
        samples: Vec<Vec<F17>>,
    },
    Polytope {
        vertices: Vec<Vec<F17>>,
        facets: Vec<FacetJson>,
        #[serde(skip_serializing_if = "Option::is_none")]
        torus_gradient: Option<Vec<F17>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        torus_gradient_margin: Option<F17>,
    },
    Reduce {
        kind: &'static str,
        center: MatrixJson,
        shift: MatrixJson,
        reduced_dimension: usize,
        subspace_basis: Vec<MatrixJson>,
        zero_verdict: Option<&'static str>,
        zero_margin: Option<F17>,
        orthogonal_residual: F17,
    },
    Check {
        checks: Vec<CheckJson>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct FacetJson {
    pub normal: Vec<F17>,
    pub offset: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckJson {
    pub model: String,
    pub name: &'static str,
    pub passed: bool,
    pub defect: F17,
    pub tolerance: F17,
}

/// Everything a run produces. `success` is false for unreachable targets,
/// failed balancing and failed checks.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub table: CsvTable,
    pub success: bool,
}

/// Models exercised by `check` when none is given.
pub fn default_check_models() -> Vec<ModelSpace> {
    (1..=3).flat_map(|n| [ModelSpace::real(n).unwrap(), ModelSpace::complex(n).unwrap()]).collect()
}

fn require_measure(s: &Scenario) -> CliResult<&DiscreteMeasure> {
    s.measure.as_ref().ok_or_else(|| invalid(format!("{} needs a measure", s.command.name())))
}

fn scenario_model(s: &Scenario) -> CliResult<Option<ModelSpace>> {
    match (&s.model, &s.measure) {
        (Some(m), Some(nu)) if m != nu.model() => {
            Err(invalid(format!("model {m} does not match the measure's model {}", nu.model())))
        }
        (Some(m), _) => Ok(Some(*m)),
        (None, Some(nu)) => Ok(Some(*nu.model())),
        (None, None) => Ok(None),
    }
}

fn diagonal_target(model: &ModelSpace, target: Option<&[f64]>) -> CliResult<AElement> {
    let m = model.ambient_dim();
    match target {
        None => Ok(AElement::zero(m)),
        Some(t) if t.len() != m => Err(invalid(format!("target: expected {m} entries, got {}", t.len()))),
        Some(t) => AElement::from_slice(t).map_err(|e| invalid(format!("target: {e}"))),
    }
}

fn status_success(status: SolveStatus) -> bool {
    status.is_converged()
}

pub fn run_scenario(s: &Scenario) -> CliResult<RunOutput> {
    let p = &s.params;
    if !(p.tol > 0.0) || !p.tol.is_finite() {
        return Err(invalid(format!("tol: {} must be positive", p.tol)));
    }
    if p.max_iter == 0 {
        return Err(invalid("max_iter: must be at least 1"));
    }
    if !(p.radius > 0.0) || !p.radius.is_finite() {
        return Err(invalid(format!("radius: {} must be positive", p.radius)));
    }
    let model = scenario_model(s)?;
    let start = Instant::now();
    let mut report = Report {
        schema: SCHEMA_VERSION,
        command: s.command.name(),
        seed: p.seed,
        params: ParamsEcho {
            tol: F17(p.tol),
            max_iter: p.max_iter,
            samples: p.samples,
            target: p.target.as_deref().map(f17s),
            torus: p.torus,
            radius: F17(p.radius),
        },
        model: model.as_ref().map(ModelSpec::from_model),
        input: s.measure.as_ref().map(measure_out),
        status: "Ok".into(),
        residual: None,
        iterations: None,
        outputs: Outputs::Check { checks: Vec::new() },
        wall_time_seconds: None,
    };
    let (table, success) = match s.command {
        Command::Compute => compute(require_measure(s)?, &mut report),
        Command::Balance if p.torus => torus_balance(require_measure(s)?, p, &mut report)?,
        Command::Balance => balance(require_measure(s)?, p, &mut report)?,
        Command::OrbitImage => orbit_image(require_measure(s)?, p, &mut report)?,
        Command::Polytope => {
            let model = model.ok_or_else(|| invalid("polytope needs a model or a measure"))?;
            polytope(&model, s.measure.as_ref(), &mut report)
        }
        Command::Reduce => reduce(require_measure(s)?, p, &mut report)?,
        Command::Check => {
            let models = model.map_or_else(default_check_models, |m| vec![m]);
            check(&models, p.seed, &mut report)
        }
    };
    if p.wall_time {
        report.wall_time_seconds = Some(F17(start.elapsed().as_secs_f64()));
    }
    Ok(RunOutput { report, table, success })
}

fn matrix_rows(table: &mut CsvTable, quantity: &str, m: &DMatrix<C64>) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            table.push(vec![quantity.into(), r.to_string(), c.to_string(), fmt17(z.re), fmt17(z.im)]);
        }
    }
}

fn entry_table(comment: &str) -> CsvTable {
    CsvTable::new(
        &[comment, "quantity: name of the matrix; row, col: 0-based entry; re, im: entry value"],
        ["quantity", "row", "col", "re", "im"].map(String::from).to_vec(),
    )
}

fn compute(nu: &DiscreteMeasure, report: &mut Report) -> (CsvTable, bool) {
    let model = nu.model();
    let f = gradient_f(nu);
    let torus = gradient_f_torus(nu);
    let margin = polytope_P(model).facet_margin(torus.as_vector());
    let mut table = entry_table("gradient map of the measure");
    matrix_rows(&mut table, "gradient", f.matrix());
    report.outputs = Outputs::Compute {
        gradient: MatrixJson::from_p(model.kind(), &f),
        gradient_norm: F17(f.norm()),
        torus_gradient: a_json(&torus),
        polytope_margin: F17(margin),
    };
    (table, true)
}

fn balance(nu: &DiscreteMeasure, p: &Params, report: &mut Report) -> CliResult<(CsvTable, bool)> {
    let model = nu.model();
    let target = diagonal_target(model, p.target.as_deref())?.to_p();
    let options = BalanceOptions { tol: p.tol, max_iter: p.max_iter, ..Default::default() };
    let solved = balance_with(nu, &target, &options)?;
    let mut table = CsvTable::new(
        &[
            "balancing trace",
            "iteration: 0-based; residual: norm of target - F(g nu); cartan_p_norm: norm of the p-part of g",
        ],
        ["iteration", "residual", "cartan_p_norm"].map(String::from).to_vec(),
    );
    for (i, entry) in solved.trace.iter().enumerate() {
        table.push(vec![i.to_string(), fmt17(entry.residual), fmt17(entry.iterate.cartan_p.norm())]);
    }
    let g = solved.solution.group.matrix();
    report.status = solved.status.to_string();
    report.residual = Some(F17(solved.residual_norm));
    report.iterations = Some(solved.iterations);
    report.outputs = Outputs::Balance {
        target: MatrixJson::from_p(model.kind(), &target),
        group: MatrixJson::from_entries(model.kind(), g.nrows(), g.ncols(), |r, c| g[(r, c)]),
        cartan_p: MatrixJson::from_p(model.kind(), &solved.solution.cartan_p),
        cartan_p_norm: F17(solved.solution.cartan_p.norm()),
    };
    Ok((table, status_success(solved.status)))
}

fn torus_balance(nu: &DiscreteMeasure, p: &Params, report: &mut Report) -> CliResult<(CsvTable, bool)> {
    let m = nu.model().ambient_dim();
    let target = diagonal_target(nu.model(), p.target.as_deref())?;
    let options = TorusSolveOptions { tol: p.tol, max_iter: p.max_iter, ..Default::default() };
    let solved = solve_torus_target_with(nu, &target, &options)?;
    let mut header = vec!["iteration".to_string(), "residual".to_string()];
    header.extend(indexed_columns("alpha", m));
    let mut table = CsvTable::new(
        &[
            "torus balancing trace",
            "iteration: 0-based; residual: norm of target - F_a(exp(alpha) nu); alpha_i: iterate",
        ],
        header,
    );
    for (i, entry) in solved.trace.iter().enumerate() {
        let mut row = vec![i.to_string(), fmt17(entry.residual)];
        row.extend(entry.iterate.as_slice().iter().map(|x| fmt17(*x)));
        table.push(row);
    }
    report.status = solved.status.to_string();
    report.residual = Some(F17(solved.residual_norm));
    report.iterations = Some(solved.iterations);
    report.outputs = Outputs::TorusBalance {
        target: a_json(&target),
        image: a_json(&gradmap::torus_image(nu, &solved.solution)),
        alpha: a_json(&solved.solution),
    };
    Ok((table, status_success(solved.status)))
}

fn orbit_image(nu: &DiscreteMeasure, p: &Params, report: &mut Report) -> CliResult<(CsvTable, bool)> {
    let count = p.samples.unwrap_or(100);
    if count == 0 {
        return Err(invalid("samples: must be at least 1"));
    }
    let m = nu.model().ambient_dim();
    let samples = orbit_image_sample(nu, count, p.radius, p.seed)?;
    let component = affine_component(nu);
    let mut header = vec!["sample".to_string()];
    header.extend(indexed_columns("a", m));
    let mut table = CsvTable::new(
        &["torus orbit image samples F_a(exp(alpha) nu)", "sample: 0-based; a_i: diagonal entry i"],
        header,
    );
    for (i, s) in samples.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.as_slice().iter().map(|x| fmt17(*x)));
        table.push(row);
    }
    report.outputs = Outputs::OrbitImage {
        offset: a_json(&component.offset),
        direction_dimension: component.direction_basis.len(),
        samples: samples.iter().map(a_json).collect(),
    };
    Ok((table, true))
}

fn polytope(model: &ModelSpace, nu: Option<&DiscreteMeasure>, report: &mut Report) -> (CsvTable, bool) {
    let body = polytope_P(model);
    let m = model.ambient_dim();
    let mut header = vec!["vertex".to_string()];
    header.extend(indexed_columns("a", m));
    let mut table =
        CsvTable::new(&["vertices of the momentum polytope", "vertex: 0-based; a_i: diagonal entry i"], header);
    for (i, v) in body.vertices.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(v.iter().map(|x| fmt17(*x)));
        table.push(row);
    }
    let torus = nu.map(gradient_f_torus);
    report.outputs = Outputs::Polytope {
        vertices: body.vertices.iter().map(|v| f17s(v.as_slice())).collect(),
        facets: body
            .facets
            .iter()
            .map(|f| FacetJson { normal: f17s(f.normal.as_slice()), offset: F17(f.offset) })
            .collect(),
        torus_gradient_margin: torus.as_ref().map(|t| F17(body.facet_margin(t.as_vector()))),
        torus_gradient: torus.as_ref().map(a_json),
    };
    (table, true)
}

fn reduce(nu: &DiscreteMeasure, p: &Params, report: &mut Report) -> CliResult<(CsvTable, bool)> {
    let model = nu.model();
    let count = p.samples.unwrap_or(10 * (model.p_dim() + 1));
    let red = reduce_and_recenter(nu, count, p.seed)?;
    let mut table = entry_table("affine-hull reduction: center and shift");
    matrix_rows(&mut table, "center", red.center.matrix());
    matrix_rows(&mut table, "shift", red.shift.matrix());
    report.outputs = Outputs::Reduce {
        kind: match red.kind {
            gradmap::ReductionKind::MinNormShift => "MinNormShift",
            gradmap::ReductionKind::Barycenter => "Barycenter",
        },
        center: MatrixJson::from_p(model.kind(), &red.center),
        shift: MatrixJson::from_p(model.kind(), &red.shift),
        reduced_dimension: red.reduced_dimension,
        subspace_basis: red.subspace_basis.iter().map(|b| MatrixJson::from_p(model.kind(), b)).collect(),
        zero_verdict: red.zero_membership.map(|z| match z.verdict {
            gradmap::Verdict::Interior => "Interior",
            gradmap::Verdict::Boundary => "Boundary",
            gradmap::Verdict::Exterior => "Exterior",
        }),
        zero_margin: red.zero_membership.map(|z| F17(z.margin)),
        orthogonal_residual: F17(red.orthogonal_residual),
    };
    Ok((table, true))
}

fn check(models: &[ModelSpace], seed: u64, report: &mut Report) -> (CsvTable, bool) {
    let mut table = CsvTable::new(
        &["invariant self-checks", "defect: worst observed violation; passed: defect < tolerance"],
        ["model", "name", "passed", "defect", "tolerance"].map(String::from).to_vec(),
    );
    let mut checks = Vec::new();
    for model in models {
        for outcome in run_checks(model, seed) {
            table.push(vec![
                model.to_string(),
                outcome.name.into(),
                outcome.passed.to_string(),
                fmt17(outcome.defect),
                fmt17(outcome.tolerance),
            ]);
            checks.push(CheckJson {
                model: model.to_string(),
                name: outcome.name,
                passed: outcome.passed,
                defect: F17(outcome.defect),
                tolerance: F17(outcome.tolerance),
            });
        }
    }
    let success = checks.iter().all(|c| c.passed);
    report.status = if success { "Passed" } else { "Failed" }.into();
    report.outputs = Outputs::Check { checks };
    (table, success)
}

/// Parses a vector literal such as `[0.1, -0.1, 0]` or `0.1,-0.1,0`.
pub fn parse_vector(text: &str) -> CliResult<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    if inner.trim().is_empty() {
        return Err(invalid("target: empty vector literal"));
    }
    inner
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("target: `{}` is not a number", s.trim()))))
        .collect()
}
