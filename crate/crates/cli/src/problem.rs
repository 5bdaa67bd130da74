//! Problem files: TOML documents validated into core types.

use std::path::Path;

use compvar::expr::LAGRANGIAN_VARS;
use compvar::fp::DensityMode;
use compvar::noether::SymmetryGenerator;
use compvar::pwmap::{CompositionMode, Piece, PiecewiseCurve, PiecewiseMap, MAP_VARS};
use compvar::quad::QuadratureSpec;
use compvar::varcalc::{BoundaryData, Problem, ProblemOptions};
use compvar::{Expr, Lagrangian};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub lagrangian: Option<LagrangianSection>,
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub composition_mode: ModeName,
    pub map: Vec<Branch>,
    pub boundary: Option<BoundarySection>,
    pub symmetry: Option<SymmetrySection>,
    pub density: Option<DensitySection>,
    pub quadrature: Option<QuadratureSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub options: Option<OptionsSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSection {
    pub expr: String,
    pub variables: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub interval: [f64; 2],
    pub expr: String,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Actual,
    PerBranch,
}

impl From<ModeName> for CompositionMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Actual => CompositionMode::Actual,
            ModeName::PerBranch => CompositionMode::PerBranch,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub q_a: Option<f64>,
    pub q_b: Option<f64>,
    pub z_a: Option<f64>,
    pub z_b: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    pub tau: String,
    #[serde(default = "zero")]
    pub xi: String,
}

fn zero() -> String {
    "0".into()
}

#[derive(Clone, Copy, Debug, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DensityModeName {
    #[default]
    Cesaro,
    Plain,
}

impl From<DensityModeName> for DensityMode {
    fn from(m: DensityModeName) -> Self {
        match m {
            DensityModeName::Cesaro => DensityMode::Cesaro,
            DensityModeName::Plain => DensityMode::Plain,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    pub grid: Option<usize>,
    pub iterations: Option<usize>,
    pub mode: Option<DensityModeName>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub tol: Option<f64>,
    pub max_panels: Option<usize>,
}

/// Pass/fail thresholds of the commands.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub el: f64,
    pub dbr: f64,
    pub invariance: f64,
    /// `None`: `1e-6 (1 + max|C|)`.
    pub conservation: Option<f64>,
    pub density: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            el: 1e-8,
            dbr: 1e-7,
            invariance: 1e-8,
            conservation: None,
            density: 1e-10,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    pub breakpoint_margin: Option<f64>,
    pub fd_step: Option<f64>,
    pub delta_min: Option<f64>,
}

pub fn load(path: &Path) -> Result<ProblemFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Schema(anyhow::anyhow!("cannot read {}: {e}", path.display())))?;
    let file: ProblemFile = toml::from_str(&text).map_err(|e| {
        schema(format!(
            "{}: {}: {}",
            path.display(),
            describe_toml(&e, &text),
            e.message()
        ))
    })?;
    file.validate()?;
    Ok(file)
}

fn describe_toml(e: &toml::de::Error, text: &str) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start].matches('\n').count() + 1;
            let col = span.start - text[..span.start].rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("schema error at line {line}, column {col}")
        }
        None => "schema error".into(),
    }
}

fn schema(msg: impl std::fmt::Display) -> Failure {
    Failure::Schema(anyhow::anyhow!("{msg}"))
}

impl ProblemFile {
    fn validate(&self) -> Result<(), Failure> {
        if self.map.is_empty() {
            return Err(schema("at least one [[map]] branch is required"));
        }
        if let (Some([a, b]), Some(first), Some(last)) = (self.interval, self.map.first(), self.map.last()) {
            if first.interval[0] != a || last.interval[1] != b {
                return Err(schema(format!(
                    "interval [{a}, {b}] does not match the branches, which cover [{}, {}]",
                    first.interval[0], last.interval[1]
                )));
            }
        }
        if let Some(vars) = self.lagrangian.as_ref().and_then(|l| l.variables.as_ref()) {
            if vars.iter().map(String::as_str).ne(LAGRANGIAN_VARS) {
                return Err(schema(format!(
                    "lagrangian.variables must be {LAGRANGIAN_VARS:?}, got {vars:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> CompositionMode {
        self.composition_mode.into()
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        let mut spec = QuadratureSpec::default();
        if let Some(q) = &self.quadrature {
            spec.tol = q.tol.unwrap_or(spec.tol);
            spec.max_panels = q.max_panels.unwrap_or(spec.max_panels);
        }
        spec
    }

    pub fn problem_options(&self) -> ProblemOptions {
        let mut o = ProblemOptions {
            quadrature: self.quadrature(),
            ..ProblemOptions::default()
        };
        if let Some(s) = &self.options {
            o.breakpoint_margin = s.breakpoint_margin.unwrap_or(o.breakpoint_margin);
            o.fd_step = s.fd_step.unwrap_or(o.fd_step);
            o.delta_min = s.delta_min.unwrap_or(o.delta_min);
        }
        o
    }

    pub fn curve(&self) -> Result<PiecewiseCurve, Failure> {
        let pieces = self
            .map
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let body = Expr::parse(&b.expr, &MAP_VARS).map_err(|e| schema(format!("map[{i}].expr: {e}")))?;
                Piece::new(b.interval[0], b.interval[1], body).map_err(|e| schema(format!("map[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PiecewiseCurve::new(pieces).map_err(|e| schema(format!("map: {e}")))
    }

    pub fn interval_map(&self) -> Result<PiecewiseMap, Failure> {
        PiecewiseMap::new(self.curve()?).map_err(crate::map_failure)
    }

    pub fn lagrangian(&self) -> Result<Lagrangian, Failure> {
        let l = self
            .lagrangian
            .as_ref()
            .ok_or_else(|| schema("this command needs a [lagrangian] section"))?;
        Lagrangian::parse(&l.expr).map_err(|e| schema(format!("lagrangian.expr: {e}")))
    }

    pub fn problem(&self) -> Result<Problem, Failure> {
        let p = Problem::with_options(self.lagrangian()?, self.curve()?, self.mode(), self.problem_options())
            .map_err(crate::problem_failure)?;
        let b = self.boundary.as_ref();
        Ok(p.with_boundary(BoundaryData {
            q_a: b.and_then(|b| b.q_a),
            q_b: b.and_then(|b| b.q_b),
            z_a: b.and_then(|b| b.z_a),
            z_b: b.and_then(|b| b.z_b),
        }))
    }

    pub fn symmetry(&self) -> Result<Option<SymmetryGenerator>, Failure> {
        self.symmetry
            .as_ref()
            .map(|s| parse_generator(&s.tau, &s.xi, "symmetry"))
            .transpose()
    }
}

pub fn parse_generator(tau: &str, xi: &str, origin: &str) -> Result<SymmetryGenerator, Failure> {
    use compvar::noether::GeneratorFn;
    let tau = GeneratorFn::parse(tau).map_err(|e| schema(format!("{origin}.tau: {e}")))?;
    let xi = GeneratorFn::parse(xi).map_err(|e| schema(format!("{origin}.xi: {e}")))?;
    Ok(SymmetryGenerator::new(tau, xi))
}
