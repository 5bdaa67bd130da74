use std::path::Path;

use compvar::fp::{invariant_density, DensityMode};
use compvar::noether::{
    conservation_check, find_symmetries, scan_invariance, solve_tau_ode, ConservationOptions, ConservationReport,
    GeneratorFn, InvarianceForm, NoetherError, SymmetryGenerator, NULL_SPACE_EPS, ODE_CELLS,
};
use compvar::pwmap::{CompositionMode, PiecewiseMap};
use compvar::varcalc::{
    chaos_functional, eval_functional, scan_residuals, ExclusionReason, Problem, ResidualKind, ResidualReport,
};
use compvar::{Expr, Lagrangian};

use crate::problem::{self, ProblemFile};
use crate::report::{Report, Value};
use crate::{eval, Failure};

/// A finished command: its report and whether every check passed.
pub struct Outcome {
    pub report: Report,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    El,
    Dbr,
    Invariance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Form {
    Direct,
    Fp,
}

impl From<Form> for InvarianceForm {
    fn from(f: Form) -> Self {
        match f {
            Form::Direct => Self::Direct,
            Form::Fp => Self::FrobeniusPerron,
        }
    }
}

fn reason_code(r: &ExclusionReason) -> &'static str {
    match r {
        ExclusionReason::NearBreakpoint { .. } => "near_breakpoint",
        ExclusionReason::ProbeLeavesPiece { .. } => "probe_leaves_piece",
        ExclusionReason::PreimageNearBreakpoint { .. } => "preimage_near_breakpoint",
        ExclusionReason::GeneratorUndefined { .. } => "generator_undefined",
    }
}

fn put_problem(r: &mut Report, p: &Problem) {
    let (a, b) = p.domain();
    r.put("lagrangian", p.lagrangian().body().to_string());
    r.put("mode", p.mode().name());
    r.put("interval.a", a);
    r.put("interval.b", b);
    r.put("pieces", p.pieces().len());
    let mismatches = p.boundary_mismatches();
    r.put("boundary.mismatches", mismatches.len());
    for m in mismatches {
        r.put(format!("boundary.{}.expected", m.name), m.expected);
        r.put(format!("boundary.{}.actual", m.name), m.actual);
    }
}

fn put_scan(r: &mut Report, scan: &ResidualReport, tolerance: f64) -> bool {
    let pass = scan.sup <= tolerance;
    r.put("admitted", scan.samples.len());
    r.put("excluded", scan.excluded.len());
    r.put("sup", scan.sup);
    r.put("rms", scan.rms);
    r.put("tolerance", tolerance);
    r.put("pass", Value::Verdict(pass));
    let t = r.table("pieces", &["lo", "hi", "samples", "sup"], false);
    for s in &scan.pieces {
        t.row(vec![s.lo.into(), s.hi.into(), s.samples.into(), s.sup.into()]);
    }
    let t = r.table("excluded", &["x", "reason", "detail"], false);
    for e in &scan.excluded {
        t.row(vec![
            e.x.into(),
            reason_code(&e.reason).into(),
            e.reason.to_string().into(),
        ]);
    }
    let t = r.table("residuals", &["x", "value", "piece"], true);
    for s in &scan.samples {
        t.row(vec![s.x.into(), s.value.into(), s.piece.into()]);
    }
    pass
}

pub fn check(file: &ProblemFile, which: Which, samples: usize, form: Form) -> Result<Outcome, Failure> {
    let p = file.problem()?;
    let tol = file.tolerances;
    let (scan, tolerance, label) = match which {
        Which::El => (
            scan_residuals(&p, ResidualKind::EulerLagrange, samples).map_err(eval)?,
            tol.el,
            "el",
        ),
        Which::Dbr => (
            scan_residuals(&p, ResidualKind::DuBoisReymond, samples).map_err(eval)?,
            tol.dbr,
            "dbr",
        ),
        Which::Invariance => {
            let g = file
                .symmetry()?
                .ok_or_else(|| Failure::Schema(anyhow::anyhow!("--which invariance needs a [symmetry] section")))?;
            (
                scan_invariance(&p, &g, form.into(), samples).map_err(eval)?,
                tol.invariance,
                "invariance",
            )
        }
    };
    let mut r = Report::new(format!("{label} residual check"));
    r.put("command", "check");
    r.put("which", label);
    if which == Which::Invariance {
        r.put("form", InvarianceForm::from(form).name());
    }
    put_problem(&mut r, &p);
    r.put("samples", samples);
    let pass = put_scan(&mut r, &scan, tolerance);
    Ok(Outcome { report: r, pass })
}

pub enum GeneratorSource<'a> {
    Explicit { tau: &'a str, xi: &'a str },
    SolveOde,
    File,
}

fn tau_table(r: &mut Report, g: &SymmetryGenerator) {
    if let GeneratorFn::Solved(t) = &g.tau {
        let rows = r.table("tau", &["x", "tau"], true);
        for (x, v) in t.nodes().iter().zip(t.values()) {
            rows.row(vec![(*x).into(), v.into()]);
        }
    }
}

fn put_conservation(r: &mut Report, rep: &ConservationReport) {
    r.put("admitted", rep.values.samples.len());
    r.put("excluded", rep.values.excluded.len());
    r.put("max_abs_c", rep.max_abs);
    r.put("dc_dx.sup", rep.derivative.sup);
    r.put("tolerance", rep.tolerance);
    r.put("verdict", if rep.conserved { "conserved" } else { "not_conserved" });
    r.put("pass", Value::Verdict(rep.conserved));
    let t = r.table(
        "pieces",
        &["lo", "hi", "samples", "min", "max", "variation", "flagged"],
        false,
    );
    for v in &rep.pieces {
        let (min, max) = if v.samples == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (v.min, v.max)
        };
        t.row(vec![
            v.lo.into(),
            v.hi.into(),
            v.samples.into(),
            min.into(),
            max.into(),
            v.variation().into(),
            v.flagged.into(),
        ]);
    }
    let t = r.table("gauge", &["x", "f"], true);
    for (x, f) in rep.gauge.nodes().iter().zip(rep.gauge.values()) {
        t.row(vec![(*x).into(), (*f).into()]);
    }
    let t = r.table("conserved", &["x", "c", "dc_dx", "piece"], true);
    for (c, d) in rep.values.samples.iter().zip(&rep.derivative.samples) {
        t.row(vec![c.x.into(), c.value.into(), d.value.into(), c.piece.into()]);
    }
}

fn noether_failure(e: NoetherError) -> Failure {
    match e {
        NoetherError::InvalidArgument(_) => Failure::Schema(anyhow::anyhow!("{e}")),
        NoetherError::OdeSingular { .. } => Failure::Eval(anyhow::anyhow!("ODE singular: {e}")),
        e => Failure::Eval(anyhow::anyhow!("{e}")),
    }
}

pub fn noether(file: &ProblemFile, source: GeneratorSource<'_>) -> Result<Outcome, Failure> {
    let p = file.problem()?;
    let g = match source {
        GeneratorSource::Explicit { tau, xi } => problem::parse_generator(tau, xi, "--tau/--xi")?,
        GeneratorSource::SolveOde => solve_tau_ode(&p, p.domain().1, ODE_CELLS).map_err(noether_failure)?,
        GeneratorSource::File => file.symmetry()?.ok_or_else(|| {
            Failure::Schema(anyhow::anyhow!(
                "give --tau or --solve-ode, or add a [symmetry] section"
            ))
        })?,
    };
    let opts = ConservationOptions {
        tolerance: file.tolerances.conservation,
        ..ConservationOptions::default()
    };
    let rep = conservation_check(&p, &g, opts).map_err(eval)?;
    let mut r = Report::new("Noether conservation check");
    r.put("command", "noether");
    put_problem(&mut r, &p);
    r.put("tau", g.tau.to_string());
    r.put("xi", g.xi.to_string());
    r.put("samples", opts.samples);
    r.put("gauge_cells", opts.gauge_cells);
    put_conservation(&mut r, &rep);
    tau_table(&mut r, &g);
    Ok(Outcome {
        report: r,
        pass: rep.conserved,
    })
}

pub struct DensityArgs<'a> {
    pub iterations: Option<usize>,
    pub grid: Option<usize>,
    pub mode: Option<DensityMode>,
    pub out: Option<&'a Path>,
}

/// Defaults without a `[density]` section.
const DENSITY_GRID: usize = 1000;
const DENSITY_ITERATIONS: usize = 50;

pub fn density(file: &ProblemFile, args: DensityArgs<'_>) -> Result<Outcome, Failure> {
    let m = file.interval_map()?;
    let section = file.density.as_ref();
    let grid = args.grid.or(section.and_then(|d| d.grid)).unwrap_or(DENSITY_GRID);
    let n = args
        .iterations
        .or(section.and_then(|d| d.iterations))
        .unwrap_or(DENSITY_ITERATIONS);
    let mode = args
        .mode
        .or(section.and_then(|d| d.mode.map(Into::into)))
        .unwrap_or_default();
    let d = invariant_density(&m, grid, n, mode).map_err(eval)?;
    let checked = mode == DensityMode::Cesaro;
    let tolerance = file.tolerances.density;
    let pass = !checked || d.residual <= tolerance;
    let mut r = Report::new("invariant density");
    r.put("command", "density");
    r.put("mode", mode.name());
    r.put("iterations", n);
    r.put("grid", grid);
    r.put("mass", d.density.integral());
    r.put("min", d.density.values().iter().copied().fold(f64::INFINITY, f64::min));
    r.put(
        "max",
        d.density.values().iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    r.put("residual", d.residual);
    r.put("residual_checked", checked);
    r.put("tolerance", tolerance);
    if checked {
        let j = chaos_functional(&m, &d.density, file.quadrature()).map_err(eval)?;
        r.put("chaos_functional", j);
    }
    r.put("pass", Value::Verdict(pass));
    let mut table = String::new();
    for (i, v) in d.density.values().iter().enumerate() {
        table.push_str(&format!("{:.14e} {:.14e}\n", d.density.node(i), v));
    }
    match args.out {
        Some(path) => {
            std::fs::write(path, table)
                .map_err(|e| Failure::Eval(anyhow::anyhow!("cannot write {}: {e}", path.display())))?;
            r.put("out", path.display().to_string());
        }
        None => {
            let t = r.table("density", &["x", "value"], true);
            for (i, v) in d.density.values().iter().enumerate() {
                t.row(vec![d.density.node(i).into(), (*v).into()]);
            }
        }
    }
    Ok(Outcome { report: r, pass })
}

/// One row of the verification matrix: the measured value against its
/// limit, or why it could not be measured.
struct Check {
    name: &'static str,
    limit: f64,
    measured: Result<f64, String>,
}

impl Check {
    fn pass(&self) -> bool {
        self.measured.as_ref().is_ok_and(|v| *v <= self.limit)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn worked_example(mode: CompositionMode) -> Problem {
    let l = Lagrangian::parse("(x + q + z)/3").expect("built-in Lagrangian parses");
    Problem::from_map(l, &PiecewiseMap::reflected_doubling(), mode).expect("built-in map is self-composable")
}

fn generator(tau: &str) -> SymmetryGenerator {
    SymmetryGenerator::parse(tau, "0").expect("built-in generator parses")
}

/// Largest piece variation of `C`, plus the pieces that moved.
fn variation(p: &Problem, g: &SymmetryGenerator) -> Result<(f64, Vec<(f64, f64)>), String> {
    let rep = conservation_check(p, g, ConservationOptions::default()).map_err(err)?;
    let moving = rep
        .pieces
        .iter()
        .filter(|v| v.variation() > rep.tolerance)
        .map(|v| (v.lo, v.hi))
        .collect();
    let worst = rep
        .pieces
        .iter()
        .filter(|v| !v.flagged)
        .map(|v| v.variation())
        .fold(0.0, f64::max);
    Ok((worst, moving))
}

/// Intervals `[lo, hi)` of the smooth pieces.
type Pieces = Vec<(f64, f64)>;

fn worked_example_checks(mode: CompositionMode) -> (Vec<Check>, Result<Pieces, String>) {
    let p = worked_example(mode);
    let power = generator("x^(-1/3)");
    let mut checks = Vec::new();
    let sup = |kind| scan_residuals(&p, kind, 1000).map(|r| r.sup).map_err(err);
    checks.push(Check {
        name: "el_sup",
        limit: 1e-8,
        measured: sup(ResidualKind::EulerLagrange),
    });
    checks.push(Check {
        name: "dbr_sup",
        limit: 1e-7,
        measured: sup(ResidualKind::DuBoisReymond),
    });
    checks.push(Check {
        name: "functional_minus_half",
        limit: 1e-8,
        measured: eval_functional(&p, Default::default())
            .map(|v| (v - 0.5).abs())
            .map_err(err),
    });
    checks.push(Check {
        name: "invariance_sup",
        limit: 1e-8,
        measured: scan_invariance(&p, &power, InvarianceForm::Direct, 1000)
            .map(|r| r.sup)
            .map_err(err),
    });
    let tau_ratio = || -> Result<f64, String> {
        let g = solve_tau_ode(&p, 1.0, ODE_CELLS).map_err(err)?;
        let ratio = |x: f64| g.tau.eval(x, 0.0).map(|t| t * x.cbrt()).map_err(err);
        let reference = ratio(1.0)?;
        (0..=950).try_fold(0.0f64, |worst, k| {
            Ok(worst.max((ratio(0.05 + k as f64 * 1e-3)? / reference - 1.0).abs()))
        })
    };
    checks.push(Check {
        name: "tau_ratio_spread",
        limit: 1e-6,
        measured: tau_ratio(),
    });
    let search = || -> Result<f64, String> {
        let basis: Vec<Expr> = ["x^(-1/3)", "1", "x"]
            .iter()
            .map(|s| Expr::parse(s, &compvar::noether::GENERATOR_VARS).map_err(err))
            .collect::<Result<_, _>>()?;
        let found = find_symmetries(&p, &basis, &[], 60, NULL_SPACE_EPS).map_err(err)?;
        match found.as_slice() {
            [one] => {
                let c = &one.coefficients;
                Ok(1.0 - c[0] / c.iter().map(|v| v * v).sum::<f64>().sqrt())
            }
            _ => Err(format!("null space has dimension {}", found.len())),
        }
    };
    checks.push(Check {
        name: "symmetry_cosine_gap",
        limit: 1e-8,
        measured: search(),
    });
    let gauge = || -> Result<f64, String> {
        let f = compvar::noether::gauge_f(&p, &power, compvar::noether::GAUGE_CELLS).map_err(err)?;
        Ok(f.nodes()
            .iter()
            .zip(f.values())
            .map(|(x, v)| (v + x.powf(2.0 / 3.0)).abs())
            .fold(0.0, f64::max))
    };
    checks.push(Check {
        name: "gauge_vs_power_law",
        limit: 1e-6,
        measured: gauge(),
    });
    let conserved = variation(&p, &power);
    checks.push(Check {
        name: "c_variation",
        limit: 1e-6,
        measured: conserved.as_ref().map(|v| v.0).map_err(Clone::clone),
    });
    let translation = || -> Result<f64, String> {
        let rep = conservation_check(&p, &generator("1"), ConservationOptions::default()).map_err(err)?;
        if rep.conserved {
            return Err("translation reported as conserved".into());
        }
        Ok(rep
            .derivative
            .samples
            .iter()
            .map(|s| (s.value - 1.0 / 3.0).abs())
            .fold(0.0, f64::max))
    };
    checks.push(Check {
        name: "translation_dc_dx_minus_third",
        limit: 1e-3,
        measured: translation(),
    });
    let density = || -> Result<f64, String> {
        let d = invariant_density(&PiecewiseMap::reflected_doubling(), 1000, 50, DensityMode::Cesaro).map_err(err)?;
        let flat = d.density.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        Ok(flat.max(d.residual))
    };
    checks.push(Check {
        name: "density_flatness",
        limit: 1e-10,
        measured: density(),
    });
    (checks, conserved.map(|v| v.1))
}

pub fn verify_paper_example() -> Outcome {
    let (branchwise, _) = worked_example_checks(CompositionMode::PerBranch);
    let (literal, moving) = worked_example_checks(CompositionMode::Actual);
    let mut r = Report::new("worked example: L = (x + q + z)/3, q = 1 - 2x on [0, 1/2), 2 - 2x on [1/2, 1]");
    r.put("command", "verify-paper-example");
    let pass = branchwise.iter().all(Check::pass);
    for (mode, checks) in [("per_branch", &branchwise), ("actual", &literal)] {
        for c in checks.iter() {
            if let Err(e) = &c.measured {
                r.put(format!("{mode}.{}.error", c.name), e.clone());
            }
        }
    }
    let t = r.table(
        "matrix",
        &["check", "limit", "per_branch", "pass", "actual", "pass"],
        false,
    );
    for (a, b) in branchwise.iter().zip(&literal) {
        let value = |c: &Check| Value::Real(*c.measured.as_ref().unwrap_or(&f64::NAN));
        t.row(vec![
            a.name.into(),
            a.limit.into(),
            value(a),
            Value::Verdict(a.pass()),
            value(b),
            Value::Verdict(b.pass()),
        ]);
    }
    let t = r.table("actual_mode_nonconserved_pieces", &["lo", "hi"], false);
    for (lo, hi) in moving.unwrap_or_default() {
        t.row(vec![lo.into(), hi.into()]);
    }
    r.put("per_branch.pass", Value::Verdict(pass));
    r.put("actual.pass", Value::Verdict(literal.iter().all(Check::pass)));
    Outcome { report: r, pass }
}
