use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Map, Value};

use normalform::engine::{SolveReport, REPORT_CSV_HEADER};
use normalform::geometry::{geometry_normalize, GeometryKind, GeometryObject, SolverNorms};
use normalform::gevrey::{default_window, gevrey_fit as fit_norms};
use normalform::graded::{
    format_f64, matrix_from_json, series_from_json, Complex64, GaussRational, GradedSeries, Mode, Rational, Scalar,
    DEFAULT_TOL, DEFAULT_TRUNCATION,
};
use normalform::majorant::{majorant_build, vf_majorant, MajorantParams};
use normalform::sample;
use normalform::selfcheck;
use normalform::singularity::{sing_normalize as normalize_singularity, SingularityProblem};
use normalform::vf::{
    classify_growth, enumerate_resonances, pair_json, pd_normalize, poincare_domain, profile_json, VectorFieldProblem,
};

use crate::io::{read_json, read_norms_csv, Run, Table};
use crate::RunArgs;

/// Number of majorant coefficients when the problem file does not say.
const DEFAULT_MAJORANT_TERMS: usize = 30;
const DEFAULT_RHO: f64 = 0.5;
const SELF_CHECK_CASES: usize = 200;

macro_rules! dispatch {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            Mode::Rational => $f::<Rational>($($arg),*),
            Mode::Gaussian => $f::<GaussRational>($($arg),*),
            Mode::Float => $f::<f64>($($arg),*),
            Mode::Complex => $f::<Complex64>($($arg),*),
        }
    };
}

struct Settings {
    mode: Mode,
    tol: f64,
}

fn settings(args: &RunArgs) -> Result<Settings> {
    let mode: Mode = args.mode.parse().map_err(|e: String| anyhow!(e))?;
    let tol = args.tol.unwrap_or(DEFAULT_TOL);
    if !mode.is_exact() && !(tol.is_finite() && tol > 0.0) {
        bail!("--tol must be positive in floating modes");
    }
    Ok(Settings { mode, tol })
}

fn input_json(args: &RunArgs) -> Result<Option<Map<String, Value>>> {
    let Some(path) = &args.input else { return Ok(None) };
    match read_json(path)? {
        Value::Object(obj) => Ok(Some(obj)),
        _ => bail!("{}: the problem must be a JSON object", path.display()),
    }
}

fn degree(args: &RunArgs, obj: Option<&Map<String, Value>>) -> Result<usize> {
    let d = match (args.degree, obj.and_then(|o| o.get("d"))) {
        (Some(d), _) => d,
        (None, Some(v)) => v.as_u64().ok_or_else(|| anyhow!("`d` must be a nonnegative integer"))? as usize,
        (None, None) => DEFAULT_TRUNCATION,
    };
    if d < 2 {
        bail!("truncation degree must be at least 2, got {d}");
    }
    Ok(d)
}

fn report_table(report: &SolveReport) -> Table {
    let rows = report.csv_rows().into_iter().map(Vec::from).collect();
    Table::new("degrees", &REPORT_CSV_HEADER, rows)
}

fn parse_lambda<S: Scalar>(args: &RunArgs, obj: Option<&Map<String, Value>>) -> Result<Vec<S>> {
    let values: Vec<Value> = match (&args.lambda, obj.and_then(|o| o.get("lambda"))) {
        (Some(list), _) => list.split(',').map(|t| Value::String(t.trim().to_string())).collect(),
        (None, Some(Value::Array(items))) => items.clone(),
        (None, Some(_)) => bail!("`lambda` must be an array"),
        (None, None) => bail!("eigenvalues are required: pass --lambda or a `lambda` field"),
    };
    if values.is_empty() {
        bail!("`lambda` is empty");
    }
    values.iter().enumerate().map(|(i, v)| S::decode_value(v).map_err(|e| anyhow!("lambda[{}]: {e}", i + 1))).collect()
}

/// `R` from the problem file, or a seeded random perturbation of degrees 2 and 3.
fn perturbation<S: Scalar>(
    args: &RunArgs,
    obj: Option<&Map<String, Value>>,
    n: usize,
    d: usize,
) -> Result<Vec<GradedSeries<S>>> {
    let items = match obj.and_then(|o| o.get("R")) {
        Some(Value::Array(items)) => items.clone(),
        Some(Value::Object(o)) => o
            .get("components")
            .and_then(Value::as_array)
            .cloned()
            .ok_or_else(|| anyhow!("`R` needs a `components` array"))?,
        Some(_) => bail!("`R` must be an array of series"),
        None => {
            let mut rng = sample::rng(args.seed);
            return Ok((0..n).map(|_| sample::convert(&sample::series(&mut rng, n, d, 2..=3, 0.7))).collect());
        }
    };
    if items.len() != n {
        bail!("`R` has {} components but lambda has {n}", items.len());
    }
    items
        .iter()
        .enumerate()
        .map(|(j, item)| {
            series_from_json::<S>(item, Some(n), Some(d))
                .map(|f| f.with_truncation(d))
                .with_context(|| format!("R[{}]", j + 1))
        })
        .collect()
}

fn vf_problem<S: Scalar>(
    args: &RunArgs,
    obj: Option<&Map<String, Value>>,
    tol: f64,
) -> Result<(Vec<S>, VectorFieldProblem<S>)> {
    let lambda = parse_lambda::<S>(args, obj)?;
    let d = degree(args, obj)?;
    let r = perturbation::<S>(args, obj, lambda.len(), d)?;
    let problem = VectorFieldProblem::diagonal(lambda.clone(), r, d)?.with_tolerance(tol);
    Ok((lambda, problem))
}

fn analytic_requested(obj: Option<&Map<String, Value>>) -> Result<bool> {
    match obj.and_then(|o| o.get("certify")) {
        None | Some(Value::Null) => Ok(false),
        Some(Value::String(s)) if s == "analytic" => Ok(true),
        Some(Value::String(s)) if s == "formal" => Ok(false),
        Some(other) => bail!("`certify` must be \"formal\" or \"analytic\", got {other}"),
    }
}

pub fn vf_normalize(args: &RunArgs) -> Result<Run> {
    let s = settings(args)?;
    let obj = input_json(args)?;
    dispatch!(s.mode, run_vf_normalize(args, obj.as_ref(), s.tol))
}

fn run_vf_normalize<S: Scalar>(args: &RunArgs, obj: Option<&Map<String, Value>>, tol: f64) -> Result<Run> {
    let analytic = analytic_requested(obj)?;
    let (lambda, problem) = vf_problem::<S>(args, obj, tol)?;
    let result = pd_normalize(&problem)?;
    let mut report = result.to_json(&lambda);
    let formal_ok = result.certificate.passed();
    let mut passed = formal_ok;
    if analytic {
        let growth = &result.profile.growth;
        let ok = growth.label() == "big";
        report["analytic_certificate"] = json!({
            "requested": true,
            "passed": ok,
            "reason": if ok {
                "denominators grow at most polynomially"
            } else {
                "denominator growth is not of big-denominator type"
            },
        });
        passed &= ok;
    }
    Ok(Run { report, tables: vec![report_table(&result.report)], passed })
}

pub fn vf_diagnose(args: &RunArgs) -> Result<Run> {
    let s = settings(args)?;
    let obj = input_json(args)?;
    dispatch!(s.mode, run_vf_diagnose(args, obj.as_ref(), s.tol))
}

fn run_vf_diagnose<S: Scalar>(args: &RunArgs, obj: Option<&Map<String, Value>>, tol: f64) -> Result<Run> {
    let lambda = parse_lambda::<S>(args, obj)?;
    let d = degree(args, obj)?;
    let resonances = enumerate_resonances(&lambda, d, tol);
    let profile = classify_growth(&lambda, d, tol);
    let rows = profile.minima().iter().map(|(i, v)| vec![i.to_string(), format_f64(*v)]).collect();
    let report = json!({
        "lambda": lambda.iter().map(|l| l.encode_value()).collect::<Vec<_>>(),
        "mode": S::MODE.as_str(),
        "d": d,
        "poincare_domain": poincare_domain(&lambda),
        "resonances": resonances.iter().map(|(j, q)| pair_json(*j, q)).collect::<Vec<_>>(),
        "classification": profile_json(&profile),
    });
    Ok(Run { report, tables: vec![Table::new("denominators", &["degree", "min_denominator"], rows)], passed: true })
}

pub fn sing_normalize(args: &RunArgs) -> Result<Run> {
    let s = settings(args)?;
    let obj = input_json(args)?.ok_or_else(|| anyhow!("sing-normalize needs --input"))?;
    dispatch!(s.mode, run_sing_normalize(args, &obj, s.tol))
}

fn run_sing_normalize<S: Scalar>(args: &RunArgs, obj: &Map<String, Value>, tol: f64) -> Result<Run> {
    let d = degree(args, Some(obj))?;
    let f0 = obj.get("f0").ok_or_else(|| anyhow!("missing `f0`"))?;
    let f0 = series_from_json::<S>(f0, None, Some(d)).context("f0")?;
    let n = f0.nvars();
    let r = match obj.get("R") {
        Some(v) => series_from_json::<S>(v, Some(n), Some(d)).context("R")?,
        None => GradedSeries::zero(n, d),
    };
    let problem = SingularityProblem::new(f0, r, d)?.with_tolerance(tol);
    let result = normalize_singularity(&problem)?;
    Ok(Run {
        report: result.to_json(),
        tables: vec![report_table(&result.report)],
        passed: result.certificate.passed(),
    })
}

pub fn geom_normalize(args: &RunArgs) -> Result<Run> {
    let s = settings(args)?;
    let obj = input_json(args)?.ok_or_else(|| anyhow!("geom-normalize needs --input"))?;
    dispatch!(s.mode, run_geom_normalize(args, &obj, s.tol))
}

fn run_geom_normalize<S: Scalar>(args: &RunArgs, obj: &Map<String, Value>, tol: f64) -> Result<Run> {
    let kind_text = match (&args.kind, obj.get("kind")) {
        (Some(k), _) => k.clone(),
        (None, Some(Value::String(k))) => k.clone(),
        (None, Some(_)) => bail!("`kind` must be a string"),
        (None, None) => bail!("the geometric kind is required: pass --kind or a `kind` field"),
    };
    let kind: GeometryKind = kind_text.parse()?;
    let d = degree(args, Some(obj))?;
    let n = obj.get("n").map(|v| v.as_u64().map(|n| n as usize).ok_or_else(|| anyhow!("`n` must be an integer")));
    let n = n.transpose()?;
    let matrix = obj.get("M").ok_or_else(|| anyhow!("missing `M`"))?;
    let matrix = matrix_from_json::<S>(matrix, n, Some(d)).context("M")?;
    if let Some(n) = n {
        if matrix.size() != n {
            bail!("`M` is {}×{} but n = {n}", matrix.size(), matrix.size());
        }
    }
    let object = GeometryObject::new(kind, matrix.with_truncation(d), d)?.with_tolerance(tol);
    let result = geometry_normalize(&object)?;
    let norm_rows = result
        .solver_norms
        .iter()
        .map(|s| {
            let (p, q, h) = s.ratios();
            [s.input, p, q, h].iter().fold(vec![s.degree.to_string()], |mut row, v| {
                row.push(format_f64(*v));
                row
            })
        })
        .collect();
    Ok(Run {
        report: result.to_json(),
        tables: vec![report_table(&result.report), Table::new("solver_norms", &SolverNorms::CSV_HEADER, norm_rows)],
        passed: result.passed(),
    })
}

pub fn majorant(args: &RunArgs) -> Result<Run> {
    let s = settings(args)?;
    let obj = input_json(args)?;
    let from_field = args.lambda.is_some() || obj.as_ref().is_some_and(|o| o.contains_key("lambda"));
    if from_field {
        return dispatch!(s.mode, run_vf_majorant(args, obj.as_ref(), s.tol));
    }
    let obj = obj.ok_or_else(|| anyhow!("majorant needs --input with model parameters, or --lambda"))?;
    let params: MajorantParams =
        serde_json::from_value(Value::Object(obj.clone())).context("model parameters {r, n, m, q, k, M, c, C}")?;
    let terms = optional_usize(&obj, "terms")?.unwrap_or(DEFAULT_MAJORANT_TERMS);
    let model = majorant_build(&params, terms)?;
    let rows = (0..model.f.len())
        .flat_map(|j| model.f[j].iter().enumerate().map(move |(i, v)| (j, i, *v)))
        .map(|(j, i, v)| vec![(j + 1).to_string(), i.to_string(), format_f64(v)])
        .collect();
    Ok(Run {
        report: model.to_json(),
        tables: vec![Table::new("majorant", &["component", "index", "coefficient"], rows)],
        passed: true,
    })
}

fn optional_usize(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>> {
    obj.get(key)
        .map(|v| v.as_u64().map(|u| u as usize).ok_or_else(|| anyhow!("`{key}` must be a nonnegative integer")))
        .transpose()
}

fn run_vf_majorant<S: Scalar>(args: &RunArgs, obj: Option<&Map<String, Value>>, tol: f64) -> Result<Run> {
    let (lambda, problem) = vf_problem::<S>(args, obj, tol)?;
    let (k, terms, rho) = match obj {
        Some(o) => (
            optional_usize(o, "k")?,
            optional_usize(o, "terms")?.unwrap_or(DEFAULT_MAJORANT_TERMS),
            o.get("rho")
                .map(|v| v.as_f64().ok_or_else(|| anyhow!("`rho` must be a number")))
                .transpose()?
                .unwrap_or(DEFAULT_RHO),
        ),
        None => (None, DEFAULT_MAJORANT_TERMS, DEFAULT_RHO),
    };
    let result = pd_normalize(&problem)?;
    let vm = vf_majorant(&problem, &result, k, terms, rho)?;
    let passed = result.certificate.passed() && vm.domination.passed() && vm.radius.is_some_and(|(lo, _)| lo > 0.0);
    let mut report = vm.to_json();
    report["lambda"] = Value::Array(lambda.iter().map(|l| l.encode_value()).collect());
    report["mode"] = json!(S::MODE.as_str());
    report["d"] = json!(problem.d);
    report["formal_certificate"] = json!(result.certificate.passed());
    let rows = vm
        .model
        .f
        .iter()
        .enumerate()
        .flat_map(|(j, fj)| {
            fj.iter().enumerate().map(move |(i, v)| vec![(j + 1).to_string(), i.to_string(), format_f64(*v)])
        })
        .collect();
    Ok(Run {
        report,
        tables: vec![
            report_table(&result.report),
            Table::new("majorant", &["component", "index", "coefficient"], rows),
        ],
        passed,
    })
}

fn parse_window(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [lo, hi] => Ok((
            lo.parse().with_context(|| format!("bad window start `{lo}`"))?,
            hi.parse().with_context(|| format!("bad window end `{hi}`"))?,
        )),
        _ => bail!("--window must be `lo,hi`"),
    }
}

pub fn gevrey_fit(args: &RunArgs) -> Result<Run> {
    let path = args.input.as_ref().ok_or_else(|| anyhow!("gevrey-fit needs --input with a degree,norm CSV"))?;
    let norms = read_norms_csv(path)?;
    let top = norms.iter().map(|p| p.0).max().ok_or_else(|| anyhow!("{}: no data rows", path.display()))?;
    let window = match &args.window {
        Some(w) => parse_window(w)?,
        None => default_window(args.degree.unwrap_or(top)),
    };
    let estimate = fit_norms(&norms, window)?;
    Ok(Run { report: estimate.to_json(), tables: Vec::new(), passed: true })
}

pub fn verify(args: &RunArgs) -> Result<Run> {
    let seed = args.seed;
    let checks = [
        selfcheck::adjoint_identity(seed, SELF_CHECK_CASES),
        selfcheck::gevrey_lemma(seed.wrapping_add(1), SELF_CHECK_CASES),
        selfcheck::derivative_lemma(seed.wrapping_add(2), SELF_CHECK_CASES),
    ];
    let passed = checks.iter().all(|c| c.passed());
    let rows = checks
        .iter()
        .map(|c| vec![c.name.to_string(), c.cases.to_string(), c.comparisons.to_string(), c.failures.len().to_string()])
        .collect();
    Ok(Run {
        report: json!({"seed": seed, "passed": passed, "checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>()}),
        tables: vec![Table::new("checks", &["name", "cases", "comparisons", "failures"], rows)],
        passed,
    })
}
