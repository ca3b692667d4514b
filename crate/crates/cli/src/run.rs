use std::fmt;
use std::io::Write;
use std::path::Path;

use multipole_green::disk_bounds::{
    disk_axes, disk_degenerate, disk_generic, disk_neil, upper_bound_from_disk, AnalyticDisk,
    FixedPointTrace, DEFAULT_FIXED_POINT_TOL, DEFAULT_SAMPLES,
};
use multipole_green::green_analytic::{
    classify_region, green_bound, limit_L, model_F, model_H, sandwich_samples, torus_samples,
    two_point_limit, two_point_model, Case, GreenBound,
};
use multipole_green::ideal_algebra::{
    hilbert_samuel_multiplicity, is_complete_intersection, local_length, IdealSpec, LengthResult,
};
use multipole_green::ideal_limits::{
    family_limit, limit_ideal, predict_green_convergence, LimitReport, PointFamily,
};
use multipole_green::numcore::MultiPoly;
use multipole_green::residues::{
    default_test_degree, local_residue, map_zeros, membership_test, simple_residue_sum, MapZero,
    PolyMap2, ResidueResult, DEFAULT_T_SCHEDULE, DEFAULT_ZERO_TOL, MEMBERSHIP_THRESHOLD,
};
use multipole_green::{Error, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::json;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NOT_CERTIFIED: u8 = 2;
pub const EXIT_VIOLATION: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Core(e) => match e {
                Error::DimensionMismatch { .. }
                | Error::Domain(_)
                | Error::InvalidInput(_)
                | Error::Region(_) => EXIT_INPUT,
                Error::Degenerate(_)
                | Error::NotZeroDimensional(_)
                | Error::Unstable { .. }
                | Error::Convergence(_)
                | Error::NotCertified(_)
                | Error::Elimination(_) => EXIT_NOT_CERTIFIED,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_INPUT => "input error",
            _ => "not certified",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Res<T> = Result<T, CliError>;

/// What a command prints on stdout, plus its exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            code: EXIT_OK,
        }
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Res<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_floats(s: &str) -> Res<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Input(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

pub fn parse_complex(s: &str) -> Res<C64> {
    match parse_floats(s)?.as_slice() {
        [re] => Ok(C64::new(*re, 0.0)),
        [re, im] => Ok(C64::new(*re, *im)),
        _ => Err(CliError::Input(format!(
            "expected `re` or `re,im`, got {s:?}"
        ))),
    }
}

pub fn parse_point(s: &str) -> Res<[C64; 2]> {
    match parse_floats(s)?.as_slice() {
        [a, b, c, d] => Ok([C64::new(*a, *b), C64::new(*c, *d)]),
        _ => Err(CliError::Input(format!(
            "expected `re1,im1,re2,im2`, got {s:?}"
        ))),
    }
}

fn pool(jobs: usize) -> Res<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(CliError::Input("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn run(cmd: Command) -> Res<Outcome> {
    match cmd {
        Command::Ideal { op } => ideal(op),
        Command::Family { op } => family(op),
        Command::Green { op } => green(op),
        Command::Residue { op } => residue(op),
        Command::Disk(a) => disk(a),
    }
}

// ---- ideal

#[derive(Serialize)]
struct LengthOut {
    l: usize,
    stabilized_at: u32,
    certified: bool,
}

#[derive(Serialize)]
struct MultOut {
    e: i64,
    k_used: u32,
    lengths: Vec<i64>,
    difference_table: Vec<i64>,
}

fn ideal(op: IdealOp) -> Res<Outcome> {
    let (a, which) = match op {
        IdealOp::Length(a) => (a, 0),
        IdealOp::Mult(a) => (a, 1),
        IdealOp::Ci(a) => (a, 2),
    };
    let spec = IdealSpec::from_json_str(&read(&a.file)?)?;
    Ok(match which {
        0 => {
            let LengthResult {
                value,
                stabilized_at,
                certified,
            } = local_length(&spec, a.d_max)?;
            let out = json::to_string(&LengthOut {
                l: value,
                stabilized_at,
                certified,
            });
            Outcome {
                stdout: out,
                code: if certified {
                    EXIT_OK
                } else {
                    EXIT_NOT_CERTIFIED
                },
            }
        }
        1 => {
            let m = hilbert_samuel_multiplicity(&spec, a.k_max)?;
            Outcome::ok(json::to_string(&MultOut {
                e: m.value,
                k_used: m.k_used,
                lengths: m.lengths,
                difference_table: m.difference_table,
            }))
        }
        _ => Outcome::ok(json::to_string(&is_complete_intersection(&spec)?)),
    })
}

// ---- family

pub fn builtin_family(name: &str, alpha: C64, direction: [C64; 2]) -> Res<PointFamily> {
    Ok(match name {
        "gen3-generic" => PointFamily::gen3_generic(),
        "gen3-collinear" => PointFamily::gen3_collinear(alpha),
        "two-point" => PointFamily::two_point(direction),
        "degenerate-3pt" => PointFamily::degenerate_3pt(),
        other => {
            let dims = other
                .strip_prefix("product-")
                .and_then(|d| d.split_once('x'));
            match dims.map(|(a, b)| (a.parse::<usize>(), b.parse::<usize>())) {
                Some((Ok(a), Ok(b))) if a > 0 && b > 0 => PointFamily::product_family(a, b),
                _ => return Err(CliError::Input(format!("unknown family {other:?}"))),
            }
        }
    })
}

fn load_family(a: &FamilyArgs) -> Res<PointFamily> {
    let mut f = match (&a.builtin, &a.file) {
        (Some(name), None) => {
            builtin_family(name, parse_complex(&a.alpha)?, parse_point(&a.direction)?)?
        }
        (None, Some(path)) => PointFamily::from_json_str(&read(path)?)?,
        _ => {
            return Err(CliError::Input(
                "give exactly one of --builtin or --file".into(),
            ))
        }
    };
    if let Some(s) = &a.schedule {
        f.schedule = parse_floats(s)?;
    }
    f.validate()?;
    Ok(f)
}

#[derive(Serialize)]
struct PredictOut {
    converges: bool,
    l: usize,
    e: i64,
    limit_ideal: serde_json::Value,
    report: LimitReport,
}

fn family(op: FamilyOp) -> Res<Outcome> {
    let (a, predict) = match op {
        FamilyOp::Limit(a) => (a, false),
        FamilyOp::Predict(a) => (a, true),
    };
    let f = load_family(&a)?;
    let d = a.degree.unwrap_or_else(|| f.suggested_degree());
    let report = family_limit(&f, d)?;
    if !predict {
        return Ok(Outcome::ok(json::to_string(&report)));
    }
    let limit = limit_ideal(&f, d)?;
    let p = predict_green_convergence(&limit)?;
    Ok(Outcome::ok(json::to_string(&PredictOut {
        converges: p.converges,
        l: p.l,
        e: p.e,
        limit_ideal: limit.to_json(),
        report,
    })))
}

// ---- green

fn check_sampling(s: &SampleArgs) -> Res<()> {
    if s.samples < 16 {
        return Err(CliError::Input(format!(
            "need at least 16 samples, got {}",
            s.samples
        )));
    }
    if !(s.torus > 0.0 && s.torus < 1.0) {
        return Err(CliError::Input(format!(
            "torus radius must lie in (0, 1), got {}",
            s.torus
        )));
    }
    Ok(())
}

fn check_eps(eps: f64, rho: f64) -> Res<()> {
    if !(eps > 0.0 && eps < 1.0 && rho > 0.0 && rho <= eps) {
        return Err(CliError::Input(format!(
            "need 0 < ρ ≤ ε < 1, got ε = {eps}, ρ = {rho}"
        )));
    }
    Ok(())
}

fn write_csv(rows: &[GreenBound], out: &Option<std::path::PathBuf>) -> Res<Option<String>> {
    let mut text = String::with_capacity(rows.len() * 160);
    text.push_str(GreenBound::CSV_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            f.write_all(text.as_bytes())
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

/// CSV on stdout and summary on stderr when there is no output file.
fn csv_outcome(csv: Option<String>, summary: String, code: u8) -> Outcome {
    match csv {
        Some(text) => {
            eprintln!("{summary}");
            Outcome {
                stdout: text.trim_end().to_string(),
                code,
            }
        }
        None => Outcome {
            stdout: summary,
            code,
        },
    }
}

fn case_of(c: CaseArg) -> Case {
    match c {
        CaseArg::Generic => Case::Generic,
        CaseArg::Degenerate => Case::Degenerate,
    }
}

#[derive(Serialize)]
struct SandwichSummary {
    case: Case,
    eps: f64,
    rho: f64,
    torus: f64,
    samples: usize,
    seed: u64,
    violations: usize,
    max_width: f64,
    /// sup |L_ε − limit_L|
    max_lower_to_limit: f64,
    /// sup of |limit_L − model| off the exceptional region
    max_model_gap: f64,
    violation_points: Vec<[C64; 2]>,
}

/// Exit status of a sandwich run with `violations` points where lower > upper.
pub fn violation_code(violations: usize) -> u8 {
    if violations > 0 {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn sandwich(a: SandwichArgs) -> Res<Outcome> {
    let s = &a.sampling;
    check_sampling(s)?;
    let case = case_of(a.case);
    let rho = match case {
        Case::Generic => a.eps,
        Case::Degenerate => a.rho.unwrap_or(a.eps * a.eps),
    };
    check_eps(a.eps, rho)?;
    let pts = sandwich_samples(case, s.torus, s.samples, a.collar, s.seed);
    if pts.len() < s.samples {
        return Err(CliError::Input(format!(
            "collar {} leaves too few sample points",
            a.collar
        )));
    }
    let results: Vec<(GreenBound, f64)> = pool(s.jobs)?.install(|| {
        pts.par_iter()
            .map(|z| Ok((green_bound(case, a.eps, rho, *z)?, limit_L(*z, case)?)))
            .collect::<Result<_, Error>>()
    })?;
    let mut summary = SandwichSummary {
        case,
        eps: a.eps,
        rho,
        torus: s.torus,
        samples: pts.len(),
        seed: s.seed,
        violations: 0,
        max_width: 0.0,
        max_lower_to_limit: 0.0,
        max_model_gap: 0.0,
        violation_points: vec![],
    };
    for (b, lim) in &results {
        if b.is_violation() {
            summary.violations += 1;
            summary.violation_points.push(b.z);
        }
        summary.max_width = summary.max_width.max(b.width());
        summary.max_lower_to_limit = summary.max_lower_to_limit.max((b.lower - lim).abs());
        if !b.region.is_exceptional() {
            summary.max_model_gap = summary.max_model_gap.max((lim - b.model).abs());
        }
    }
    let rows: Vec<GreenBound> = results.into_iter().map(|(b, _)| b).collect();
    let csv = write_csv(&rows, &s.out)?;
    let code = violation_code(summary.violations);
    Ok(csv_outcome(csv, json::to_string(&summary), code))
}

/// `n` points on the torus on a regular angular grid, offset so that no
/// point has `z₁ = −z₂`.
pub fn grid_points(r: f64, n: usize) -> Vec<[C64; 2]> {
    let n1 = ((n as f64).sqrt().floor() as usize).max(1);
    let n2 = n.div_ceil(n1);
    let tau = std::f64::consts::TAU;
    (0..n)
        .map(|m| {
            let (i, j) = (m % n1, m / n1);
            [
                C64::from_polar(r, tau * (i as f64 + 0.5) / n1 as f64),
                C64::from_polar(r, tau * (j as f64 + 0.25) / n2 as f64),
            ]
        })
        .collect()
}

#[derive(Serialize)]
struct GridSummary {
    model: &'static str,
    rows: usize,
    eps: f64,
    rho: f64,
    torus: f64,
}

fn grid(a: GridArgs) -> Res<Outcome> {
    let s = &a.sampling;
    check_sampling(s)?;
    let rho = match a.model {
        ModelArg::H => a.eps,
        _ => a.rho.unwrap_or(a.eps * a.eps),
    };
    check_eps(a.eps, rho)?;
    let pts = grid_points(s.torus, s.samples);
    let model = a.model;
    let rows: Vec<GreenBound> = pool(s.jobs)?.install(|| {
        pts.par_iter()
            .map(|&z| -> Result<GreenBound, Error> {
                Ok(match model {
                    ModelArg::H => GreenBound {
                        model: model_H(z)?,
                        ..green_bound(Case::Generic, a.eps, rho, z)?
                    },
                    ModelArg::FCheck => green_bound(Case::Degenerate, a.eps, rho, z)?,
                    // the fast pair sits on the second axis for F: swap, bound, swap back
                    ModelArg::F => GreenBound {
                        z,
                        model: model_F(z)?,
                        region: classify_region(z, Case::Degenerate)?,
                        ..green_bound(Case::Degenerate, a.eps, rho, [z[1], z[0]])?
                    },
                })
            })
            .collect::<Result<_, Error>>()
    })?;
    let name = match model {
        ModelArg::H => "H",
        ModelArg::F => "F",
        ModelArg::FCheck => "F-check",
    };
    let csv = write_csv(&rows, &s.out)?;
    let summary = GridSummary {
        model: name,
        rows: rows.len(),
        eps: a.eps,
        rho,
        torus: s.torus,
    };
    Ok(csv_outcome(csv, json::to_string(&summary), EXIT_OK))
}

#[derive(Serialize)]
struct DecayRow {
    t: f64,
    /// limit along the merging axis minus 2 log t
    first: f64,
    /// limit along the other axis minus log t
    second: f64,
    model_first: f64,
    model_second: f64,
}

#[derive(Serialize)]
struct TwoPointOut {
    rho: f64,
    torus: f64,
    samples: usize,
    seed: u64,
    /// sup |model − limit| on the torus
    max_model_gap: f64,
    decay: Vec<DecayRow>,
    first_spread: f64,
    second_spread: f64,
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.fold(f64::INFINITY, f64::min);
    hi - lo
}

fn two_point(a: TwoPointArgs) -> Res<Outcome> {
    if a.samples < 16 || !(a.torus > 0.0 && a.torus < 1.0) || !(a.eps > 0.0 && a.eps < a.torus) {
        return Err(CliError::Input(
            "need samples ≥ 16 and 0 < ρ < torus < 1".into(),
        ));
    }
    let pts = torus_samples(a.torus, a.torus, a.samples, a.seed);
    let mut gap: f64 = 0.0;
    for xi in &pts {
        gap = gap.max((two_point_model(1.0, a.eps, *xi)? - two_point_limit(*xi)).abs());
    }
    let zero = C64::default();
    let mut decay = Vec::new();
    for t in [0.1, 0.2, 0.4] {
        let (p, q) = ([C64::new(t, 0.0), zero], [zero, C64::new(t, 0.0)]);
        let lt = t.ln();
        decay.push(DecayRow {
            t,
            first: two_point_limit(p) - 2.0 * lt,
            second: two_point_limit(q) - lt,
            model_first: two_point_model(1.0, a.eps, p)? - 2.0 * lt,
            model_second: two_point_model(1.0, a.eps, q)? - lt,
        });
    }
    let out = TwoPointOut {
        rho: a.eps,
        torus: a.torus,
        samples: a.samples,
        seed: a.seed,
        max_model_gap: gap,
        first_spread: spread(decay.iter().map(|r| r.first)),
        second_spread: spread(decay.iter().map(|r| r.second)),
        decay,
    };
    Ok(Outcome::ok(json::to_string(&out)))
}

fn green(op: GreenOp) -> Res<Outcome> {
    match op {
        GreenOp::Sandwich(a) => sandwich(a),
        GreenOp::Grid(a) => grid(a),
        GreenOp::TwoPoint(a) => two_point(a),
    }
}

// ---- residue

#[derive(Deserialize)]
#[serde(untagged)]
enum MapFile {
    Full {
        components: [MultiPoly; 2],
        #[serde(default)]
        domain_radius: Option<f64>,
    },
    Bare([MultiPoly; 2]),
}

pub fn load_map(path: &Path) -> Res<PolyMap2> {
    let (comps, r) = match parse_json::<MapFile>(path)? {
        MapFile::Full {
            components,
            domain_radius,
        } => (components, domain_radius.unwrap_or(1.0)),
        MapFile::Bare(c) => (c, 1.0),
    };
    let [f, g] = comps;
    Ok(PolyMap2::new(f, g, r)?)
}

#[derive(Serialize)]
struct EvalOut {
    zeros: Vec<MapZero>,
    #[serde(flatten)]
    result: ResidueResult,
}

#[derive(Serialize)]
struct MemberOut {
    member: bool,
    test_degree: u32,
    threshold: f64,
}

fn residue(op: ResidueOp) -> Res<Outcome> {
    let (a, member) = match op {
        ResidueOp::Eval(a) => (a, false),
        ResidueOp::Member(a) => (a, true),
    };
    let psi = load_map(&a.map)?;
    let h: MultiPoly = parse_json(&a.h)?;
    if member {
        let d = a.degree.unwrap_or_else(|| default_test_degree(&h, &psi));
        let m = membership_test(&h, &psi, Some(d), a.seed)?;
        return Ok(Outcome::ok(json::to_string(&MemberOut {
            member: m,
            test_degree: d,
            threshold: MEMBERSHIP_THRESHOLD,
        })));
    }
    let zeros = map_zeros(&psi, DEFAULT_ZERO_TOL)?;
    let simple = match a.method {
        ResidueMethodArg::Simple => true,
        ResidueMethodArg::Local => false,
        ResidueMethodArg::Auto => zeros.iter().all(|z| z.multiplicity == 1),
    };
    let result = if simple {
        simple_residue_sum(&psi, &h)?
    } else {
        local_residue(&psi, &h, &DEFAULT_T_SCHEDULE, a.seed)?
    };
    Ok(Outcome::ok(json::to_string(&EvalOut { zeros, result })))
}

// ---- disk

#[derive(Serialize)]
struct DiskOut {
    kind: &'static str,
    z: [C64; 2],
    disk: AnalyticDisk,
    trace: Option<FixedPointTrace>,
    marked_residual: f64,
    boundary_sup: f64,
    upper: f64,
}

fn disk(a: DiskArgs) -> Res<Outcome> {
    let z = parse_point(&a.z)?;
    let rho = a.rho.unwrap_or(a.eps * a.eps);
    check_eps(a.eps, rho)?;
    let alpha = C64::new(a.eps.sqrt(), 0.0);
    let (kind, d, trace) = match a.kind {
        DiskKind::Axes => ("axes", disk_axes(z, a.eps)?, None),
        DiskKind::Generic => {
            let (d, t) = disk_generic(z, alpha, DEFAULT_FIXED_POINT_TOL)?;
            ("generic", d, Some(t))
        }
        DiskKind::Degenerate => {
            let s = C64::new((rho / a.eps).sqrt(), 0.0);
            let (d, t) = disk_degenerate(z, alpha, s, DEFAULT_FIXED_POINT_TOL)?;
            ("degenerate", d, Some(t))
        }
        DiskKind::Neil => ("neil", disk_neil(z, a.eps, rho / a.eps)?, None),
    };
    let zeta = d
        .point_param()
        .ok_or_else(|| Error::Degenerate("disk has no evaluation point".into()))?;
    let upper = upper_bound_from_disk(&d, zeta)?;
    let out = DiskOut {
        kind,
        z,
        marked_residual: d.marked_residual(),
        boundary_sup: d.boundary_sup(DEFAULT_SAMPLES),
        disk: d,
        trace,
        upper,
    };
    Ok(Outcome::ok(json::to_string(&out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(violation_code(0), EXIT_OK);
        assert_eq!(violation_code(2), EXIT_VIOLATION);
        assert_eq!(CliError::Input("x".into()).exit_code(), EXIT_INPUT);
        assert_eq!(
            CliError::from(Error::Region("x".into())).exit_code(),
            EXIT_INPUT
        );
        assert_eq!(
            CliError::from(Error::NotCertified("x".into())).exit_code(),
            EXIT_NOT_CERTIFIED
        );
    }

    #[test]
    fn point_parsing() {
        assert_eq!(
            parse_point("0.5,0,-0.25,1e-3").unwrap(),
            [C64::new(0.5, 0.0), C64::new(-0.25, 1e-3)]
        );
        assert!(parse_point("0.5,0,0.1").is_err());
        assert_eq!(parse_complex("2,1").unwrap(), C64::new(2.0, 1.0));
        assert_eq!(parse_complex("-3").unwrap(), C64::new(-3.0, 0.0));
    }

    #[test]
    fn grid_avoids_the_antidiagonal() {
        let g = grid_points(0.5, 64);
        assert_eq!(g.len(), 64);
        assert!(g.iter().all(|z| (z[0] + z[1]).norm() > 1e-6));
    }
}
