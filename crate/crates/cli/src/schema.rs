//! The JSON problem-file format: one ingestion format, matrices inline
//! row-major with explicit dimensions, no external data. Files are
//! small, diffable, and round-trip exactly through serde.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const KNOWN_KINDS: &[&str] = &[
    "lasso",
    "elastic_net",
    "constrained_ls",
    "envelope",
    "minkowski_projection",
    "image_projection",
    "alternating",
    "barycentric",
    "bivariate",
    "best_approximation",
    "support_regularized",
    "multichannel",
    "custom_fg",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub problem: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetData {
    WholeSpace { dim: usize },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Singleton { point: Vec<f64> },
    Affine { a: MatrixData, c: Vec<f64> },
    NonnegOrthant { dim: usize },
    Product { factors: Vec<SetData> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxData {
    Zero {
        dim: usize,
    },
    L1 {
        dim: usize,
    },
    L1PlusQuadratic {
        dim: usize,
        beta: f64,
    },
    Indicator {
        set: SetData,
    },
    Separable {
        components: Vec<ProxData>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<MatrixData>,
    },
    Scaled {
        base: Box<ProxData>,
        omega: f64,
    },
    ReflectedTranslated {
        base: Box<ProxData>,
        z: Vec<f64>,
    },
    Support {
        set: SetData,
    },
    Conjugate {
        base: Box<ProxData>,
    },
    QuadraticData {
        #[serde(rename = "L")]
        l: MatrixData,
        y: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticTermData {
    pub omega: f64,
    #[serde(rename = "L")]
    pub l: MatrixData,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeTermData {
    pub omega: f64,
    pub rho: f64,
    #[serde(rename = "L")]
    pub l: MatrixData,
    pub h: ProxData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothData {
    Zero {
        dim: usize,
    },
    LeastSquares {
        #[serde(rename = "L")]
        l: MatrixData,
        y: Vec<f64>,
    },
    MultiQuadratic {
        terms: Vec<QuadraticTermData>,
    },
    EnvelopeSum {
        terms: Vec<EnvelopeTermData>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntryData {
    pub k: usize,
    pub i: usize,
    #[serde(rename = "L")]
    pub l: MatrixData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockData {
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
    pub blocks: Vec<BlockEntryData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemKind {
    Lasso {
        #[serde(rename = "L")]
        l: MatrixData,
        y: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
    },
    ElasticNet {
        #[serde(rename = "L")]
        l: MatrixData,
        y: Vec<f64>,
        beta_reg: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
    },
    ConstrainedLs {
        set: SetData,
        #[serde(rename = "L")]
        l: MatrixData,
        y: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
    },
    Envelope {
        f: ProxData,
        terms: Vec<EnvelopeTermData>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
    },
    MinkowskiProjection {
        sets: Vec<SetData>,
        y: Vec<f64>,
    },
    ImageProjection {
        #[serde(rename = "L")]
        l: MatrixData,
        set: SetData,
        y: Vec<f64>,
    },
    Alternating {
        f: ProxData,
        h: ProxData,
        rho: f64,
        x0: Vec<f64>,
    },
    Barycentric {
        h_list: Vec<ProxData>,
        rho: f64,
        x0: Vec<f64>,
    },
    Bivariate {
        f: ProxData,
        ell: ProxData,
        z: Vec<f64>,
        rho: f64,
        x0: Vec<f64>,
    },
    BestApproximation {
        c: SetData,
        d: SetData,
        #[serde(rename = "L")]
        l: MatrixData,
        z: Vec<f64>,
    },
    SupportRegularized {
        phi: ProxData,
        d: SetData,
        #[serde(rename = "L")]
        l: MatrixData,
        r: Vec<f64>,
        z: Vec<f64>,
    },
    Multichannel {
        sets: Vec<SetData>,
        blocks: BlockData,
        y_list: Vec<Vec<f64>>,
    },
    CustomFg {
        f: ProxData,
        g: SmoothData,
        x0: Vec<f64>,
    },
}

impl ProblemKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProblemKind::Lasso { .. } => "lasso",
            ProblemKind::ElasticNet { .. } => "elastic_net",
            ProblemKind::ConstrainedLs { .. } => "constrained_ls",
            ProblemKind::Envelope { .. } => "envelope",
            ProblemKind::MinkowskiProjection { .. } => "minkowski_projection",
            ProblemKind::ImageProjection { .. } => "image_projection",
            ProblemKind::Alternating { .. } => "alternating",
            ProblemKind::Barycentric { .. } => "barycentric",
            ProblemKind::Bivariate { .. } => "bivariate",
            ProblemKind::BestApproximation { .. } => "best_approximation",
            ProblemKind::SupportRegularized { .. } => "support_regularized",
            ProblemKind::Multichannel { .. } => "multichannel",
            ProblemKind::CustomFg { .. } => "custom_fg",
        }
    }

    /// The iteration scheme this kind runs under when the file does not
    /// name one.
    pub fn default_algorithm(&self) -> Algorithm {
        match self {
            ProblemKind::Lasso { .. }
            | ProblemKind::ElasticNet { .. }
            | ProblemKind::Envelope { .. }
            | ProblemKind::Alternating { .. }
            | ProblemKind::Barycentric { .. }
            | ProblemKind::Bivariate { .. }
            | ProblemKind::CustomFg { .. } => Algorithm::Fb,
            ProblemKind::ConstrainedLs { .. }
            | ProblemKind::MinkowskiProjection { .. }
            | ProblemKind::ImageProjection { .. } => Algorithm::Projected,
            ProblemKind::BestApproximation { .. } | ProblemKind::SupportRegularized { .. } => {
                Algorithm::Dual
            }
            ProblemKind::Multichannel { .. } => Algorithm::Block,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Fb,
    Projected,
    Fista,
    Dual,
    Block,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Fb => "fb",
            Algorithm::Projected => "projected",
            Algorithm::Fista => "fista",
            Algorithm::Dual => "dual",
            Algorithm::Block => "block",
        }
    }
}

/// `"auto"` or a constant step value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepData {
    Auto(String),
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_every: Option<usize>,
}

/// Fully resolved solver settings after defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub algorithm: Algorithm,
    pub max_iter: usize,
    pub tol: f64,
    pub step: Option<f64>,
    pub trace_every: usize,
}

pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-8;

impl ProblemFile {
    /// Resolves solver settings, filling defaults and validating the
    /// algorithm against the problem kind.
    pub fn settings(&self) -> Result<SolverSettings, CliError> {
        let s = self.solver.clone().unwrap_or(SolverData {
            algorithm: None,
            max_iter: None,
            tol: None,
            step: None,
            trace_every: None,
        });
        let algorithm = s.algorithm.unwrap_or(self.problem.default_algorithm());
        let allowed: &[Algorithm] = match self.problem {
            ProblemKind::Lasso { .. }
            | ProblemKind::ElasticNet { .. }
            | ProblemKind::Envelope { .. }
            | ProblemKind::CustomFg { .. } => &[Algorithm::Fb, Algorithm::Fista],
            ProblemKind::ConstrainedLs { .. } => {
                &[Algorithm::Projected, Algorithm::Fb, Algorithm::Fista]
            }
            ProblemKind::MinkowskiProjection { .. } | ProblemKind::ImageProjection { .. } => {
                &[Algorithm::Projected]
            }
            ProblemKind::Alternating { .. }
            | ProblemKind::Barycentric { .. }
            | ProblemKind::Bivariate { .. } => &[Algorithm::Fb],
            ProblemKind::BestApproximation { .. } | ProblemKind::SupportRegularized { .. } => {
                &[Algorithm::Dual]
            }
            ProblemKind::Multichannel { .. } => &[Algorithm::Block],
        };
        if !allowed.contains(&algorithm) {
            return Err(CliError::Config(format!(
                "solver.algorithm {} is not valid for kind {}; allowed: {}",
                algorithm.name(),
                self.problem.kind_name(),
                allowed
                    .iter()
                    .map(|a| a.name())
                    .collect::<Vec<_>>()
                    .join("|")
            )));
        }
        let step = match s.step {
            None => None,
            Some(StepData::Auto(word)) => {
                if word != "auto" {
                    return Err(CliError::Parse(format!(
                        "solver.step must be \"auto\" or a number, got \"{word}\""
                    )));
                }
                None
            }
            Some(StepData::Constant(gamma)) => Some(gamma),
        };
        let max_iter = s.max_iter.unwrap_or(DEFAULT_MAX_ITER);
        let tol = s.tol.unwrap_or(DEFAULT_TOL);
        let trace_every = s.trace_every.unwrap_or(1);
        if max_iter == 0 {
            return Err(CliError::Config("solver.max_iter must be >= 1".into()));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Config("solver.tol must be positive".into()));
        }
        if trace_every == 0 {
            return Err(CliError::Config("solver.trace_every must be >= 1".into()));
        }
        Ok(SolverSettings {
            algorithm,
            max_iter,
            tol,
            step,
            trace_every,
        })
    }
}

fn validate_matrix(m: &MatrixData, path: &str) -> Result<(), CliError> {
    if m.rows == 0 || m.cols == 0 {
        return Err(CliError::Parse(format!(
            "{path}: rows and cols must be positive"
        )));
    }
    if m.entries.len() != m.rows * m.cols {
        return Err(CliError::Parse(format!(
            "{path}.cols: {} x {} needs {} entries, got {}",
            m.rows,
            m.cols,
            m.rows * m.cols,
            m.entries.len()
        )));
    }
    if m.entries.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Parse(format!("{path}.entries: non-finite value")));
    }
    Ok(())
}

fn validate_vec(v: &[f64], path: &str) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Parse(format!("{path}: must be nonempty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Parse(format!("{path}: non-finite value")));
    }
    Ok(())
}

fn validate_set(s: &SetData, path: &str) -> Result<(), CliError> {
    match s {
        SetData::WholeSpace { dim } | SetData::NonnegOrthant { dim } => {
            if *dim == 0 {
                return Err(CliError::Parse(format!("{path}.dim: must be positive")));
            }
        }
        SetData::Box { lo, hi } => {
            validate_vec(lo, &format!("{path}.lo"))?;
            validate_vec(hi, &format!("{path}.hi"))?;
            if lo.len() != hi.len() {
                return Err(CliError::Parse(format!("{path}.hi: length differs from lo")));
            }
        }
        SetData::Ball { center, radius } => {
            validate_vec(center, &format!("{path}.center"))?;
            if !(radius.is_finite() && *radius >= 0.0) {
                return Err(CliError::Parse(format!("{path}.radius: must be >= 0")));
            }
        }
        SetData::Halfspace { normal, .. } | SetData::Hyperplane { normal, .. } => {
            validate_vec(normal, &format!("{path}.normal"))?;
        }
        SetData::Singleton { point } => validate_vec(point, &format!("{path}.point"))?,
        SetData::Affine { a, c } => {
            validate_matrix(a, &format!("{path}.a"))?;
            validate_vec(c, &format!("{path}.c"))?;
            if c.len() != a.rows {
                return Err(CliError::Parse(format!(
                    "{path}.c: length {} differs from a.rows {}",
                    c.len(),
                    a.rows
                )));
            }
        }
        SetData::Product { factors } => {
            if factors.is_empty() {
                return Err(CliError::Parse(format!("{path}.factors: must be nonempty")));
            }
            for (i, f) in factors.iter().enumerate() {
                validate_set(f, &format!("{path}.factors[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn validate_prox(p: &ProxData, path: &str) -> Result<(), CliError> {
    match p {
        ProxData::Zero { dim } | ProxData::L1 { dim } => {
            if *dim == 0 {
                return Err(CliError::Parse(format!("{path}.dim: must be positive")));
            }
        }
        ProxData::L1PlusQuadratic { dim, beta } => {
            if *dim == 0 {
                return Err(CliError::Parse(format!("{path}.dim: must be positive")));
            }
            if !(beta.is_finite() && *beta > 0.0) {
                return Err(CliError::Parse(format!("{path}.beta: must be positive")));
            }
        }
        ProxData::Indicator { set } | ProxData::Support { set } => {
            validate_set(set, &format!("{path}.set"))?
        }
        ProxData::Separable { components, basis } => {
            if components.is_empty() {
                return Err(CliError::Parse(format!(
                    "{path}.components: must be nonempty"
                )));
            }
            for (i, c) in components.iter().enumerate() {
                validate_prox(c, &format!("{path}.components[{i}]"))?;
            }
            if let Some(b) = basis {
                validate_matrix(b, &format!("{path}.basis"))?;
            }
        }
        ProxData::Scaled { base, omega } => {
            validate_prox(base, &format!("{path}.base"))?;
            if !(omega.is_finite() && *omega > 0.0) {
                return Err(CliError::Parse(format!("{path}.omega: must be positive")));
            }
        }
        ProxData::ReflectedTranslated { base, z } => {
            validate_prox(base, &format!("{path}.base"))?;
            validate_vec(z, &format!("{path}.z"))?;
        }
        ProxData::Conjugate { base } => validate_prox(base, &format!("{path}.base"))?,
        ProxData::QuadraticData { l, y } => {
            validate_matrix(l, &format!("{path}.L"))?;
            validate_vec(y, &format!("{path}.y"))?;
            if y.len() != l.rows {
                return Err(CliError::Parse(format!(
                    "{path}.y: length {} differs from L.rows {}",
                    y.len(),
                    l.rows
                )));
            }
        }
    }
    Ok(())
}

fn validate_smooth(g: &SmoothData, path: &str) -> Result<(), CliError> {
    match g {
        SmoothData::Zero { dim } => {
            if *dim == 0 {
                return Err(CliError::Parse(format!("{path}.dim: must be positive")));
            }
        }
        SmoothData::LeastSquares { l, y } => {
            validate_matrix(l, &format!("{path}.L"))?;
            validate_vec(y, &format!("{path}.y"))?;
            if y.len() != l.rows {
                return Err(CliError::Parse(format!(
                    "{path}.y: length {} differs from L.rows {}",
                    y.len(),
                    l.rows
                )));
            }
        }
        SmoothData::MultiQuadratic { terms } => {
            if terms.is_empty() {
                return Err(CliError::Parse(format!("{path}.terms: must be nonempty")));
            }
            for (i, t) in terms.iter().enumerate() {
                let tpath = format!("{path}.terms[{i}]");
                validate_matrix(&t.l, &format!("{tpath}.L"))?;
                validate_vec(&t.y, &format!("{tpath}.y"))?;
                if t.y.len() != t.l.rows {
                    return Err(CliError::Parse(format!(
                        "{tpath}.y: length differs from L.rows"
                    )));
                }
            }
        }
        SmoothData::EnvelopeSum { terms } => {
            validate_envelope_terms(terms, &format!("{path}.terms"))?;
        }
    }
    Ok(())
}

fn validate_envelope_terms(terms: &[EnvelopeTermData], path: &str) -> Result<(), CliError> {
    if terms.is_empty() {
        return Err(CliError::Parse(format!("{path}: must be nonempty")));
    }
    for (i, t) in terms.iter().enumerate() {
        let tpath = format!("{path}[{i}]");
        validate_matrix(&t.l, &format!("{tpath}.L"))?;
        validate_prox(&t.h, &format!("{tpath}.h"))?;
        if !(t.rho.is_finite() && t.rho > 0.0) {
            return Err(CliError::Parse(format!("{tpath}.rho: must be positive")));
        }
        if !(t.omega.is_finite() && t.omega > 0.0) {
            return Err(CliError::Parse(format!("{tpath}.omega: must be positive")));
        }
    }
    Ok(())
}

/// Structural validation after deserialization; error messages carry the
/// offending field path.
pub fn validate(file: &ProblemFile) -> Result<(), CliError> {
    match &file.problem {
        ProblemKind::Lasso { l, y, x0 } | ProblemKind::ElasticNet { l, y, x0, .. } => {
            validate_matrix(l, "payload.L")?;
            validate_vec(y, "payload.y")?;
            if y.len() != l.rows {
                return Err(CliError::Parse(format!(
                    "payload.y: length {} differs from L.rows {}",
                    y.len(),
                    l.rows
                )));
            }
            if let Some(x0) = x0 {
                validate_vec(x0, "payload.x0")?;
                if x0.len() != l.cols {
                    return Err(CliError::Parse(format!(
                        "payload.x0: length {} differs from L.cols {}",
                        x0.len(),
                        l.cols
                    )));
                }
            }
            if let ProblemKind::ElasticNet { beta_reg, .. } = &file.problem {
                if !(beta_reg.is_finite() && *beta_reg > 0.0) {
                    return Err(CliError::Parse(
                        "payload.beta_reg: must be positive".into(),
                    ));
                }
            }
        }
        ProblemKind::ConstrainedLs { set, l, y, x0 } => {
            validate_set(set, "payload.set")?;
            validate_matrix(l, "payload.L")?;
            validate_vec(y, "payload.y")?;
            if let Some(x0) = x0 {
                validate_vec(x0, "payload.x0")?;
            }
        }
        ProblemKind::Envelope { f, terms, x0 } => {
            validate_prox(f, "payload.f")?;
            validate_envelope_terms(terms, "payload.terms")?;
            if let Some(x0) = x0 {
                validate_vec(x0, "payload.x0")?;
            }
        }
        ProblemKind::MinkowskiProjection { sets, y } => {
            if sets.is_empty() {
                return Err(CliError::Parse("payload.sets: must be nonempty".into()));
            }
            for (i, s) in sets.iter().enumerate() {
                validate_set(s, &format!("payload.sets[{i}]"))?;
            }
            validate_vec(y, "payload.y")?;
        }
        ProblemKind::ImageProjection { l, set, y } => {
            validate_matrix(l, "payload.L")?;
            validate_set(set, "payload.set")?;
            validate_vec(y, "payload.y")?;
        }
        ProblemKind::Alternating { f, h, rho, x0 } => {
            validate_prox(f, "payload.f")?;
            validate_prox(h, "payload.h")?;
            if !(rho.is_finite() && *rho > 0.0) {
                return Err(CliError::Parse("payload.rho: must be positive".into()));
            }
            validate_vec(x0, "payload.x0")?;
        }
        ProblemKind::Barycentric { h_list, rho, x0 } => {
            if h_list.is_empty() {
                return Err(CliError::Parse("payload.h_list: must be nonempty".into()));
            }
            for (i, h) in h_list.iter().enumerate() {
                validate_prox(h, &format!("payload.h_list[{i}]"))?;
            }
            if !(rho.is_finite() && *rho > 0.0) {
                return Err(CliError::Parse("payload.rho: must be positive".into()));
            }
            validate_vec(x0, "payload.x0")?;
        }
        ProblemKind::Bivariate {
            f,
            ell,
            z,
            rho,
            x0,
        } => {
            validate_prox(f, "payload.f")?;
            validate_prox(ell, "payload.ell")?;
            validate_vec(z, "payload.z")?;
            if !(rho.is_finite() && *rho > 0.0) {
                return Err(CliError::Parse("payload.rho: must be positive".into()));
            }
            validate_vec(x0, "payload.x0")?;
        }
        ProblemKind::BestApproximation { c, d, l, z } => {
            validate_set(c, "payload.c")?;
            validate_set(d, "payload.d")?;
            validate_matrix(l, "payload.L")?;
            validate_vec(z, "payload.z")?;
        }
        ProblemKind::SupportRegularized { phi, d, l, r, z } => {
            validate_prox(phi, "payload.phi")?;
            validate_set(d, "payload.d")?;
            validate_matrix(l, "payload.L")?;
            validate_vec(r, "payload.r")?;
            validate_vec(z, "payload.z")?;
        }
        ProblemKind::Multichannel {
            sets,
            blocks,
            y_list,
        } => {
            if sets.is_empty() {
                return Err(CliError::Parse("payload.sets: must be nonempty".into()));
            }
            for (i, s) in sets.iter().enumerate() {
                validate_set(s, &format!("payload.sets[{i}]"))?;
            }
            if blocks.row_dims.is_empty() || blocks.col_dims.is_empty() {
                return Err(CliError::Parse(
                    "payload.blocks: row_dims and col_dims must be nonempty".into(),
                ));
            }
            for (j, b) in blocks.blocks.iter().enumerate() {
                let bpath = format!("payload.blocks.blocks[{j}]");
                if b.k >= blocks.row_dims.len() {
                    return Err(CliError::Parse(format!("{bpath}.k: out of range")));
                }
                if b.i >= blocks.col_dims.len() {
                    return Err(CliError::Parse(format!("{bpath}.i: out of range")));
                }
                validate_matrix(&b.l, &format!("{bpath}.L"))?;
                if b.l.rows != blocks.row_dims[b.k] {
                    return Err(CliError::Parse(format!(
                        "{bpath}.L.rows: {} differs from row_dims[{}] = {}",
                        b.l.rows, b.k, blocks.row_dims[b.k]
                    )));
                }
                if b.l.cols != blocks.col_dims[b.i] {
                    return Err(CliError::Parse(format!(
                        "{bpath}.L.cols: {} differs from col_dims[{}] = {}",
                        b.l.cols, b.i, blocks.col_dims[b.i]
                    )));
                }
            }
            if y_list.len() != blocks.row_dims.len() {
                return Err(CliError::Parse(format!(
                    "payload.y_list: {} observations for {} coupling rows",
                    y_list.len(),
                    blocks.row_dims.len()
                )));
            }
            for (k, y) in y_list.iter().enumerate() {
                validate_vec(y, &format!("payload.y_list[{k}]"))?;
            }
        }
        ProblemKind::CustomFg { f, g, x0 } => {
            validate_prox(f, "payload.f")?;
            validate_smooth(g, "payload.g")?;
            validate_vec(x0, "payload.x0")?;
        }
    }
    Ok(())
}

/// Reads, version-checks, deserializes, and validates a problem file.
pub fn parse_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_problem_str(&text)
}

/// Same as [`parse_problem`] from an in-memory string.
pub fn parse_problem_str(text: &str) -> Result<ProblemFile, CliError> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("invalid JSON: {e}")))?;
    let version = raw
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| CliError::Parse("schema_version: missing or not an integer".into()))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(CliError::Parse(format!(
            "schema_version: {version} is not supported; this build reads version {SCHEMA_VERSION}"
        )));
    }
    match raw.get("kind").and_then(|v| v.as_str()) {
        None => return Err(CliError::Parse("kind: missing or not a string".into())),
        Some(kind) if !KNOWN_KINDS.contains(&kind) => {
            return Err(CliError::Parse(format!(
                "kind: \"{kind}\" is not one of {}",
                KNOWN_KINDS.join("|")
            )));
        }
        Some(_) => {}
    }
    let file: ProblemFile =
        serde_json::from_value(raw).map_err(|e| CliError::Parse(format!("{e}")))?;
    validate(&file)?;
    Ok(file)
}

/// Serializes back to canonical pretty JSON.
pub fn serialize_problem(file: &ProblemFile) -> String {
    serde_json::to_string_pretty(file).expect("schema types serialize")
}
