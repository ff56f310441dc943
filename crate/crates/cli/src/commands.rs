use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cxbox::multivariate::ComplexBoxSpline;
use cxbox::refinement::{compute_mask, MaskEntry};
use cxbox::spectral::{estimate_decay, sample_box_spline, symbol_field, SamplingOptions, DEFAULT_TAIL_BUDGET};
use cxbox::Complex64;
use serde::{Deserialize, Serialize};

use crate::spec::{Function, ProblemSpec, SpecError};
use crate::{Common, FieldFormat};

pub const DEFAULT_MASK_EPS: f64 = 1e-10;
const EVAL_QUAD_EPS: f64 = 1e-10;

pub fn load(common: &Common) -> Result<ProblemSpec> {
    let mut spec = ProblemSpec::load(&common.spec)?;
    if let Some(eps) = common.eps {
        if !(eps > 0.0 && eps < 1.0) {
            bail!(SpecError(format!("--eps must lie in (0, 1), got {eps}")));
        }
        spec.eps = Some(eps);
    }
    Ok(spec)
}

pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout().lock().write_all(bytes).context("writing stdout"),
    }
}

fn csv_header(kind: &str, d: usize, prefix: char) -> String {
    let mut s = format!("# cxbox-{kind} v1\n");
    for a in 0..d {
        let _ = write!(s, "{prefix}{a},");
    }
    s.push_str("re,im\n");
    s
}

fn csv_row(s: &mut String, coords: &[f64], v: Complex64) {
    for x in coords {
        let _ = write!(s, "{x},");
    }
    let _ = writeln!(s, "{},{}", v.re, v.im);
}

fn read_points(path: &Path, d: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading points {}", path.display()))?;
    let mut points = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: std::result::Result<Vec<f64>, _> =
            line.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|s| !s.is_empty()).map(str::parse).collect();
        match values {
            Ok(v) if v.len() == d && v.iter().all(|x| x.is_finite()) => points.push(v),
            _ => bail!(SpecError(format!("{}:{}: expected {d} finite numbers", path.display(), line_no + 1))),
        }
    }
    Ok(points)
}

fn spline(spec: &ProblemSpec) -> Result<ComplexBoxSpline> {
    let s = match spec.eps {
        Some(eps) => ComplexBoxSpline::with_eps(spec.degrees.clone(), spec.directions.clone(), eps)?,
        None => ComplexBoxSpline::new(spec.degrees.clone(), spec.directions.clone())?,
    };
    Ok(s)
}

pub fn eval(common: &Common, points: &Path) -> Result<ExitCode> {
    let spec = load(common)?;
    let d = spec.directions.d();
    let points = read_points(points, d)?;
    let spline = spline(&spec)?;
    let mut out = csv_header("eval", d, 'x');
    for x in &points {
        let v = match spec.function {
            Function::BoxSpline => spline.eval_any(x, EVAL_QUAD_EPS)?,
            Function::TruncatedPower => spline.truncated_power_eval(x)?,
        };
        csv_row(&mut out, x, v);
    }
    emit(common.out.as_deref(), out.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

pub fn sample(common: &Common, format: Option<FieldFormat>) -> Result<ExitCode> {
    let spec = load(common)?;
    let (grid, g) = spec.grid()?;
    let opts = SamplingOptions {
        origin: spec.origin.clone(),
        tail_budget: g.tail_budget.unwrap_or(DEFAULT_TAIL_BUDGET),
        alias_copies: g.alias_copies,
        ..Default::default()
    };
    let field = sample_box_spline(&spec.degrees, &spec.directions, &grid, &opts)?;
    let csv = match format {
        Some(f) => matches!(f, FieldFormat::Csv),
        None => common.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv")),
    };
    let mut bytes = Vec::new();
    if csv {
        field.write_csv(&mut bytes)?;
    } else {
        field.write_binary(&mut bytes)?;
    }
    emit(common.out.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}

pub fn spectrum(common: &Common) -> Result<ExitCode> {
    let spec = load(common)?;
    if spec.function != Function::BoxSpline {
        bail!(SpecError("spectrum is defined for the box spline only".into()));
    }
    let (grid, _) = spec.grid()?;
    let spline = spline(&spec)?;
    // every symbol evaluation succeeds once the spline is constructed
    let field = symbol_field(|w| spline.symbol(w).unwrap_or(Complex64::new(f64::NAN, f64::NAN)), &grid, Complex64::new(1.0, 0.0));
    let mut out = csv_header("spectrum", grid.d(), 'w');
    for (i, v) in field.values.iter().enumerate() {
        csv_row(&mut out, &field.coordinates(i), *v);
    }
    emit(common.out.as_deref(), out.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

/// On-disk mask document.
#[derive(Debug, Serialize, Deserialize)]
pub struct MaskDocument {
    pub format: String,
    pub version: u32,
    pub eps: f64,
    pub degrees: cxbox::multivariate::DegreeVector,
    pub directions: cxbox::directions::DirectionSet,
    pub normalization: (f64, f64),
    pub closed_form_normalization: (f64, f64),
    pub entries: Vec<MaskEntry>,
}

pub const MASK_FORMAT: &str = "cxbox-mask";

pub fn mask(common: &Common) -> Result<ExitCode> {
    let spec = load(common)?;
    let eps = spec.eps.unwrap_or(DEFAULT_MASK_EPS);
    let mask = compute_mask(&spec.degrees, &spec.directions, eps)?;
    let (n, c) = (mask.normalization(), mask.closed_form_normalization());
    let doc = MaskDocument {
        format: MASK_FORMAT.into(),
        version: 1,
        eps,
        degrees: spec.degrees,
        directions: spec.directions,
        normalization: (n.re, n.im),
        closed_form_normalization: (c.re, c.im),
        entries: mask.to_entries(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(common.out.as_deref(), text.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DecayDocument<'a> {
    format: &'static str,
    version: u32,
    omega_range: (f64, f64),
    #[serde(flatten)]
    report: &'a cxbox::spectral::DecayReport,
}

pub fn decay(common: &Common) -> Result<ExitCode> {
    let spec = load(common)?;
    let report = estimate_decay(&spec.degrees, &spec.directions, spec.decay.rays, spec.decay.omega_range)?;
    let doc = DecayDocument { format: "cxbox-decay", version: 1, omega_range: spec.decay.omega_range, report: &report };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(common.out.as_deref(), text.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}
