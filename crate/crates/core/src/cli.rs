//! Job configuration, dispatch and CSV/JSON emission for the `ptchain`
//! binary.
//!
//! Symmetrized couplings are listed central first everywhere on this
//! interface (`a, b, c, ...`), matching the letters `A, B, C, ...` of the
//! squared form and the boundary axis names.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::chain::{char_poly_of_spec, secular_in_s, ChainSpec, Family, TridiagonalMatrix};
use crate::domain::{classify_point, trace_boundary, BoundaryCurve, EntrySlot, PlaneModel, TraceOptions};
use crate::eep::{circumscribed_bound_check, eliminate_eep_system, verify_eep, BranchValue, InsertionMethod};
use crate::error::{Error, Result};
use crate::exactpoly::rational::{parse_decimal, parse_inexact};
use crate::exactpoly::{parse_rational, rat, Rational};
use crate::metric::{biorthogonal_decomposition, build_metric, eigen_numeric, unit_weights};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Classify,
    Boundary,
    EepVerify,
    EepEliminate,
    Metric,
    BoundCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "ptchain", version, about = "Reality domains, exceptional points and metrics of PT-symmetric chain Hamiltonians")]
pub struct Cli {
    pub command: Command,
    /// JSON job file; flags given on the command line override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    /// Coupling values, central first for the symmetrized family.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub couplings: Option<Vec<String>>,
    /// Squared couplings, central first for the symmetrized family.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub squared: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub diag: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sup: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sub: Option<Vec<String>>,
    /// Accept decimal model input, rounded to the nearest dyadic rational.
    #[arg(long)]
    pub inexact: bool,
    /// Boundary axes: coupling letters (`a,b`) or entries (`d0,super0,sub1`).
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<String>>,
    /// Boundary window per axis as `lo,hi`; repeat once per axis.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<Vec<String>>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; overrides `PTCHAIN_THREADS`.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Job description as read from a `--config` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct JobConfig {
    pub command: Option<Command>,
    pub family: Option<String>,
    #[serde(alias = "N")]
    pub n: Option<usize>,
    pub couplings: Option<Vec<Value>>,
    pub squared: Option<Vec<Value>>,
    pub diag: Option<Vec<Value>>,
    pub sup: Option<Vec<Value>>,
    pub sub: Option<Vec<Value>>,
    #[serde(default)]
    pub inexact: bool,
    pub axes: Option<Vec<String>>,
    pub window: Option<Vec<[Value; 2]>>,
    pub resolution: Option<usize>,
    pub tolerance: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

impl JobConfig {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Usage(format!("config: {e}")))
    }

    /// Overlays command-line flags on a configuration.
    pub fn merge_cli(mut self, cli: &Cli) -> Self {
        let strs = |v: &Option<Vec<String>>| v.as_ref().map(|v| v.iter().map(|s| Value::String(s.clone())).collect());
        self.command = Some(cli.command);
        if cli.family.is_some() {
            self.family = cli.family.clone();
        }
        self.n = cli.n.or(self.n);
        if let Some(v) = strs(&cli.couplings) {
            self.couplings = Some(v);
        }
        if let Some(v) = strs(&cli.squared) {
            self.squared = Some(v);
        }
        if let Some(v) = strs(&cli.diag) {
            self.diag = Some(v);
        }
        if let Some(v) = strs(&cli.sup) {
            self.sup = Some(v);
        }
        if let Some(v) = strs(&cli.sub) {
            self.sub = Some(v);
        }
        self.inexact |= cli.inexact;
        if cli.axes.is_some() {
            self.axes = cli.axes.clone();
        }
        if let Some(w) = &cli.window {
            self.window = Some(
                w.iter()
                    .map(|s| {
                        let (lo, hi) = s.split_once(',').unwrap_or((s.as_str(), ""));
                        [Value::String(lo.trim().into()), Value::String(hi.trim().into())]
                    })
                    .collect(),
            );
        }
        self.resolution = cli.resolution.or(self.resolution);
        self.tolerance = cli.tolerance.or(self.tolerance);
        if cli.weights.is_some() {
            self.weights = cli.weights.clone();
        }
        if cli.out.is_some() {
            self.out = cli.out.clone();
        }
        self.format = cli.format.or(self.format);
        self.threads = cli.threads.or(self.threads);
        self
    }
}

/// Collects one diagnostic line per offending field.
#[derive(Default)]
struct Diagnostics(Vec<String>);

impl Diagnostics {
    fn push(&mut self, field: &str, msg: impl std::fmt::Display) {
        let msg = msg.to_string();
        self.0.push(format!("{field}: {}", msg.strip_prefix("usage error: ").unwrap_or(&msg)));
    }

    fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Usage(self.0.join("\n")))
        }
    }
}

fn value_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Exact input value; with `inexact`, decimals are rounded to a dyadic
/// rational and the rounding error is recorded.
fn model_value(v: &Value, inexact: bool, errors: &mut Vec<String>) -> Result<Rational> {
    let Some(s) = value_text(v) else {
        return Err(Error::Usage(format!("{v} is not a number")));
    };
    match parse_rational(&s) {
        Ok(r) => Ok(r),
        Err(_) if inexact => {
            let (r, err) = parse_inexact(&s)?;
            errors.push(format!("{s} -> {r} (error {err})"));
            Ok(r)
        }
        Err(Error::Usage(m)) => Err(Error::Usage(format!("{m}; decimals require the inexact flag"))),
        Err(e) => Err(e),
    }
}

fn value_list(field: &str, vs: &[Value], inexact: bool, rounding: &mut Vec<String>, diag: &mut Diagnostics) -> Option<Vec<Rational>> {
    let mut out = Vec::with_capacity(vs.len());
    for v in vs {
        match model_value(v, inexact, rounding) {
            Ok(r) => out.push(r),
            Err(e) => {
                diag.push(field, e);
                return None;
            }
        }
    }
    Some(out)
}

/// Validated model plus the rounding log of inexact inputs.
struct Model {
    spec: ChainSpec,
    rounding: Vec<String>,
}

fn family_of(cfg: &JobConfig, diag: &mut Diagnostics) -> Option<Family> {
    match cfg.family.as_deref().unwrap_or("symmetrized").parse::<Family>() {
        Ok(f) => Some(f),
        Err(e) => {
            diag.push("family", e);
            None
        }
    }
}

fn build_model(cfg: &JobConfig, diag: &mut Diagnostics) -> Option<Model> {
    let family = family_of(cfg, diag)?;
    let mut rounding = Vec::new();
    let spec = match family {
        Family::Symmetrized => {
            let Some(n) = cfg.n else {
                diag.push("n", "required");
                return None;
            };
            match (&cfg.couplings, &cfg.squared) {
                (Some(c), None) => {
                    let mut v = value_list("couplings", c, cfg.inexact, &mut rounding, diag)?;
                    v.reverse();
                    ChainSpec::symmetrized(n, v)
                }
                (None, Some(s)) => {
                    let v = value_list("squared", s, cfg.inexact, &mut rounding, diag)?;
                    ChainSpec::symmetrized_squared(n, v)
                }
                (None, None) => ChainSpec::symmetrized(n, vec![rat(0); n / 2]),
                (Some(_), Some(_)) => {
                    diag.push("couplings", "give either couplings or squared, not both");
                    return None;
                }
            }
        }
        Family::GeneralPT => {
            let spec = match (&cfg.couplings, &cfg.squared) {
                (Some(c), None) => value_list("couplings", c, cfg.inexact, &mut rounding, diag).map(ChainSpec::general_pt),
                (None, Some(s)) => value_list("squared", s, cfg.inexact, &mut rounding, diag).map(ChainSpec::general_pt_squared),
                _ => {
                    diag.push("couplings", "give exactly one of couplings or squared");
                    None
                }
            }?;
            if let (Ok(s), Some(n)) = (&spec, cfg.n) {
                if s.n() != n {
                    diag.push("n", format!("{n} does not match {} couplings", s.n() - 1));
                    return None;
                }
            }
            spec
        }
        Family::GeneralTridiagonal => {
            let d = cfg.diag.as_ref().and_then(|v| value_list("diag", v, cfg.inexact, &mut rounding, diag));
            let p = cfg.sup.as_ref().and_then(|v| value_list("sup", v, cfg.inexact, &mut rounding, diag));
            let b = cfg.sub.as_ref().and_then(|v| value_list("sub", v, cfg.inexact, &mut rounding, diag));
            for (name, v) in [("diag", &cfg.diag), ("sup", &cfg.sup), ("sub", &cfg.sub)] {
                if v.is_none() {
                    diag.push(name, "required for the general tridiagonal family");
                }
            }
            let (d, p, b) = (d?, p?, b?);
            TridiagonalMatrix::new(d, p, b).and_then(ChainSpec::general_tridiagonal)
        }
    };
    match spec {
        Ok(spec) => Some(Model { spec, rounding }),
        Err(e) => {
            diag.push("model", e);
            None
        }
    }
}

/// Output of one job, before it is written.
pub struct JobOutput {
    pub exit_code: i32,
    /// Main payload (CSV or pretty JSON, newline-terminated).
    pub body: String,
    /// Sidecar metadata written next to `--out` for CSV boundary output.
    pub sidecar: Option<String>,
}

fn exact(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn exact_list(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(exact).collect())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Decimal with `sig` significant digits, no exponent.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let mag = x.abs().log10().floor() as i64;
    if !(-4..15).contains(&mag) {
        return format!("{x:.prec$e}", prec = sig.saturating_sub(1));
    }
    let decimals = (sig as i64 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s == "-0" || s.starts_with("-0.") && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn model_json(model: &Model) -> Value {
    let spec = &model.spec;
    let mut m = json!({
        "family": format!("{:?}", spec.family()),
        "N": spec.n(),
    });
    if let Some(sq) = spec.squared_central_first() {
        m["squaredCentralFirst"] = exact_list(&sq);
    }
    if !model.rounding.is_empty() {
        m["inexactRounding"] = json!(model.rounding);
    }
    m
}

fn thread_pool(cfg: &JobConfig) -> Result<rayon::ThreadPool> {
    let env = std::env::var("PTCHAIN_THREADS").ok();
    let from_env = match env.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => Some(s.parse::<usize>().map_err(|_| Error::Usage(format!("PTCHAIN_THREADS: {s:?} is not a count")))?),
        None => None,
    };
    let threads = cfg.threads.or(from_env).unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("threads: {e}")))
}

/// Validates a configuration and runs it.
pub fn run_job(cfg: &JobConfig) -> Result<JobOutput> {
    let Some(command) = cfg.command else {
        return Err(Error::Usage("command: required".into()));
    };
    let pool = thread_pool(cfg)?;
    pool.install(|| match command {
        Command::Spectrum => spectrum(cfg),
        Command::Classify => classify(cfg),
        Command::Boundary => boundary(cfg),
        Command::EepVerify => eep_verify(cfg),
        Command::EepEliminate => eep_eliminate(cfg),
        Command::Metric => metric(cfg),
        Command::BoundCheck => bound_check(cfg),
    })
}

fn json_only(cfg: &JobConfig, v: Value, exit_code: i32) -> Result<JobOutput> {
    if cfg.format == Some(Format::Csv) {
        return Err(Error::Usage("format: this command emits JSON only".into()));
    }
    Ok(JobOutput { exit_code, body: pretty(&v), sidecar: None })
}

fn model_or_usage(cfg: &JobConfig) -> Result<Model> {
    let mut diag = Diagnostics::default();
    let model = build_model(cfg, &mut diag);
    diag.finish()?;
    Ok(model.expect("diagnostics empty"))
}

fn spectrum(cfg: &JobConfig) -> Result<JobOutput> {
    let model = model_or_usage(cfg)?;
    let ev = eigen_numeric(&model.spec.numeric_matrix())?;
    if cfg.format == Some(Format::Csv) {
        let mut s = String::from("re,im\n");
        for z in &ev {
            s.push_str(&format!("{},{}\n", fmt_sig(z.re, 12), fmt_sig(z.im, 12)));
        }
        return Ok(JobOutput { exit_code: EXIT_OK, body: s, sidecar: None });
    }
    let mut v = json!({
        "command": "spectrum",
        "version": VERSION,
        "model": model_json(&model),
        "charPoly": char_poly_of_spec(&model.spec).to_string(),
        "eigenvalues": ev.iter().map(|z| json!({"re": z.re, "im": z.im})).collect::<Vec<_>>(),
    });
    if model.spec.family() == Family::Symmetrized {
        v["secularPoly"] = Value::String(secular_in_s(&model.spec)?.s_poly.to_string());
    }
    Ok(JobOutput { exit_code: EXIT_OK, body: pretty(&v), sidecar: None })
}

fn classify(cfg: &JobConfig) -> Result<JobOutput> {
    let model = model_or_usage(cfg)?;
    let verdict = classify_point(&model.spec);
    let v = json!({
        "command": "classify",
        "version": VERSION,
        "model": model_json(&model),
        "class": format!("{:?}", verdict.class),
        "realRootCount": verdict.real_root_count,
        "certificate": verdict.certificate.to_string(),
    });
    json_only(cfg, v, EXIT_OK)
}

fn parse_axes(cfg: &JobConfig, family: Family, n: usize, diag: &mut Diagnostics) -> Option<Vec<usize>> {
    let axes = cfg.axes.clone().unwrap_or_else(|| {
        if family == Family::Symmetrized && n / 2 >= 2 {
            vec!["a".into(), "b".into()]
        } else {
            vec!["a".into()]
        }
    });
    let mut out = Vec::new();
    for a in &axes {
        let a = a.trim().to_ascii_lowercase();
        match a.as_bytes() {
            [c] if c.is_ascii_lowercase() => out.push((c - b'a') as usize),
            _ => {
                diag.push("axes", format!("{a:?} is not a coupling letter"));
                return None;
            }
        }
    }
    Some(out)
}

fn parse_entry_axes(cfg: &JobConfig, diag: &mut Diagnostics) -> Option<Vec<EntrySlot>> {
    let Some(axes) = &cfg.axes else {
        diag.push("axes", "required for the general tridiagonal family (e.g. super0,sub0)");
        return None;
    };
    let mut out = Vec::new();
    for a in axes {
        let a = a.trim().to_ascii_lowercase();
        let parsed = if let Some(i) = a.strip_prefix("super") {
            i.parse().ok().map(EntrySlot::Super)
        } else if let Some(i) = a.strip_prefix("sub") {
            i.parse().ok().map(EntrySlot::Sub)
        } else if let Some(i) = a.strip_prefix('d') {
            i.parse().ok().map(EntrySlot::Diag)
        } else {
            None
        };
        match parsed {
            Some(s) => out.push(s),
            None => {
                diag.push("axes", format!("{a:?} is not an entry name (dK, superK, subK)"));
                return None;
            }
        }
    }
    Some(out)
}

fn parse_window(cfg: &JobConfig, dims: usize, diag: &mut Diagnostics) -> Option<Vec<(Rational, Rational)>> {
    let Some(w) = &cfg.window else {
        diag.push("window", "required");
        return None;
    };
    if w.len() != dims {
        diag.push("window", format!("{} ranges given for {dims} axes", w.len()));
        return None;
    }
    let mut out = Vec::new();
    for [lo, hi] in w {
        let p = |v: &Value| value_text(v).ok_or_else(|| Error::Usage(format!("{v} is not a number"))).and_then(|s| parse_decimal(&s));
        match (p(lo), p(hi)) {
            (Ok(l), Ok(h)) if l < h => out.push((l, h)),
            (Ok(_), Ok(_)) => {
                diag.push("window", "each range needs lo < hi");
                return None;
            }
            (Err(e), _) | (_, Err(e)) => {
                diag.push("window", e);
                return None;
            }
        }
    }
    Some(out)
}

fn boundary(cfg: &JobConfig) -> Result<JobOutput> {
    let mut diag = Diagnostics::default();
    let model = build_model(cfg, &mut diag);
    let plane = model.as_ref().and_then(|m| match m.spec.family() {
        Family::Symmetrized => {
            let axes = parse_axes(cfg, Family::Symmetrized, m.spec.n(), &mut diag)?;
            Some(PlaneModel::Symmetrized {
                n: m.spec.n(),
                axes,
                fixed_squared: m.spec.squared_central_first().expect("symmetrized"),
            })
        }
        Family::GeneralPT => {
            diag.push("family", "boundary tracing supports Symmetrized and GeneralTridiagonal");
            None
        }
        Family::GeneralTridiagonal => {
            let axes = parse_entry_axes(cfg, &mut diag)?;
            match m.spec.couplings() {
                crate::chain::Couplings::Entries(t) => Some(PlaneModel::General { base: t.clone(), axes }),
                _ => None,
            }
        }
    });
    let dims = match &plane {
        Some(PlaneModel::Symmetrized { axes, .. }) => axes.len(),
        Some(PlaneModel::General { axes, .. }) => axes.len(),
        None => cfg.axes.as_ref().map_or(2, Vec::len),
    };
    let window = parse_window(cfg, dims, &mut diag);
    let resolution = cfg.resolution.unwrap_or(200);
    if resolution < 2 {
        diag.push("resolution", "must be at least 2");
    }
    let tolerance = cfg.tolerance.unwrap_or(1e-9);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        diag.push("tolerance", "must be positive");
    }
    diag.finish()?;
    let (model, plane, window) = (model.unwrap(), plane.unwrap(), window.unwrap());
    let mut opts = TraceOptions::new(window, resolution);
    opts.tolerance = tolerance;
    let curve = trace_boundary(&plane, &opts)?;
    let meta = boundary_metadata(&model, &curve);
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(JobOutput { exit_code: EXIT_OK, body: boundary_csv(&curve), sidecar: Some(pretty(&meta)) }),
        Format::Json => {
            let mut v = meta;
            v["points"] = Value::Array(
                curve
                    .points
                    .iter()
                    .map(|p| json!({"coords": p.coords, "inside": p.inside, "outside": p.outside}))
                    .collect(),
            );
            Ok(JobOutput { exit_code: EXIT_OK, body: pretty(&v), sidecar: None })
        }
    }
}

pub fn boundary_csv(curve: &BoundaryCurve) -> String {
    let mut s = curve.axis_labels.join(",");
    s.push('\n');
    for p in &curve.points {
        let row: Vec<String> = p.coords.iter().map(|x| fmt_sig(*x, 12)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn boundary_metadata(model: &Model, curve: &BoundaryCurve) -> Value {
    json!({
        "command": "boundary",
        "version": VERSION,
        "model": model_json(model),
        "N": curve.n,
        "axes": curve.axis_labels,
        "window": curve.window.iter().map(|(l, h)| vec![exact(l), exact(h)]).collect::<Vec<_>>(),
        "resolution": curve.resolution,
        "tolerance": curve.tolerance,
        "pointCount": curve.points.len(),
        "diagnostic": curve.diagnostic,
    })
}

fn require_n(cfg: &JobConfig) -> Result<usize> {
    cfg.n.ok_or_else(|| Error::Usage("n: required".into()))
}

fn eep_verify(cfg: &JobConfig) -> Result<JobOutput> {
    let n = require_n(cfg)?;
    let r = verify_eep(n)?;
    let v = json!({
        "command": "eep-verify",
        "version": VERSION,
        "N": n,
        "halfDim": r.solution.half_dim,
        "squaredCouplings": r.solution.squared_couplings.iter().map(|c| Value::String(c.to_string())).collect::<Vec<_>>(),
        "signChoices": r.solution.sign_choices,
        "insertionMethod": match r.method {
            InsertionMethod::Symbolic => "symbolic",
            InsertionMethod::Recurrence => "recurrence",
        },
        "insertionZeros": exact_list(&r.insertion_residuals),
        "degeneracyConfirmed": r.degeneracy_confirmed,
        "norm": exact(&r.norm),
        "boundValue": exact(&r.bound),
        "boundIdentityHolds": r.bound_identity_holds,
        "numericEigenvalueMaxModulus": r.numeric_eigenvalue_max_modulus,
        "failedCoefficient": r.failed_coefficient.map(|j| format!("P_{j}")),
        "passed": r.passed(),
    });
    json_only(cfg, v, if r.passed() { EXIT_OK } else { EXIT_VERIFICATION })
}

fn branch_value(v: &Option<BranchValue>) -> Value {
    match v {
        None => Value::Null,
        Some(BranchValue::Exact(r)) => exact(r),
        Some(BranchValue::Approx(x)) => json!(x),
    }
}

fn eep_eliminate(cfg: &JobConfig) -> Result<JobOutput> {
    let n = require_n(cfg)?;
    let e = eliminate_eep_system(n)?;
    let v = json!({
        "command": "eep-eliminate",
        "version": VERSION,
        "N": n,
        "variable": e.variable,
        "polynomial": e.polynomial.to_string(),
        "realRoots": e.real_roots.iter().map(|r| match &r.exact {
            Some(x) => json!({"exact": exact(x)}),
            None => json!({"lo": exact(&r.lo), "hi": exact(&r.hi), "approx": r.approx()}),
        }).collect::<Vec<_>>(),
        "branches": e.branches.iter().map(|b| json!({
            "values": b.values.iter().map(branch_value).collect::<Vec<_>>(),
            "spurious": b.spurious,
            "reason": b.reason,
        })).collect::<Vec<_>>(),
        "surviving": e.surviving.iter().map(|t| exact_list(t)).collect::<Vec<_>>(),
        "failure": e.failure,
    });
    json_only(cfg, v, if e.failure.is_none() { EXIT_OK } else { EXIT_VERIFICATION })
}

fn metric(cfg: &JobConfig) -> Result<JobOutput> {
    let model = model_or_usage(cfg)?;
    let basis = biorthogonal_decomposition(&model.spec)?;
    let weights = cfg.weights.clone().unwrap_or_else(|| unit_weights(basis.dim()));
    let m = build_metric(&basis, &weights)?;
    let rows = |mat: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..mat.nrows()).map(|i| mat.row(i).iter().copied().collect()).collect()
    };
    let v = json!({
        "command": "metric",
        "version": VERSION,
        "model": model_json(&model),
        "energies": basis.energies,
        "conditionIndicators": basis.condition_indicators,
        "weights": m.weights,
        "weightsConvention": if cfg.weights.is_some() { "user" } else { "unit (toolkit default; the scale of the weights is free)" },
        "theta": rows(&m.theta),
        "residual": m.residual,
        "relativeResidual": m.relative_residual(),
        "minEigenvalueEstimate": m.min_eigenvalue_estimate,
    });
    json_only(cfg, v, EXIT_OK)
}

fn bound_check(cfg: &JobConfig) -> Result<JobOutput> {
    let model = model_or_usage(cfg)?;
    let c = circumscribed_bound_check(&model.spec)?;
    let v = json!({
        "command": "bound-check",
        "version": VERSION,
        "model": model_json(&model),
        "norm": exact(&c.norm),
        "bound": exact(&c.bound),
        "inside": c.inside,
    });
    json_only(cfg, v, EXIT_OK)
}

/// Sidecar path for CSV output: `curve.csv` -> `curve.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

/// Writes a job's output to `--out` (plus sidecar) or to `stdout`.
pub fn emit(cfg: &JobConfig, output: &JobOutput, stdout: &mut impl Write) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &output.body)?;
            if let Some(meta) = &output.sidecar {
                std::fs::write(sidecar_path(path), meta)?;
            }
        }
        None => stdout.write_all(output.body.as_bytes())?,
    }
    Ok(())
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                let _ = writeln!(stderr, "ptchain: {}", first.trim_start_matches("error: "));
            }
            return code;
        }
    };
    let result = (|| {
        let base = match &cli.config {
            Some(p) => JobConfig::from_json(&std::fs::read_to_string(p).map_err(|e| Error::Usage(format!("config: {}: {e}", p.display())))?)?,
            None => JobConfig::default(),
        };
        if let Some(c) = base.command {
            if c != cli.command {
                return Err(Error::Usage(format!("command: config says {c:?} but {:?} was requested", cli.command)));
            }
        }
        let cfg = base.merge_cli(&cli);
        let out = run_job(&cfg)?;
        emit(&cfg, &out, stdout)?;
        Ok(out.exit_code)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let msg = match &e {
                Error::Usage(m) => m.clone(),
                other => other.to_string(),
            };
            for line in msg.lines() {
                let _ = writeln!(stderr, "ptchain: {line}");
            }
            match e {
                Error::Verification(_) => EXIT_VERIFICATION,
                _ => EXIT_USAGE,
            }
        }
    }
}
