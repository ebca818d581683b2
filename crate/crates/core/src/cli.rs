//! Command-line front end shared by the `radial-lab` binary and the tests.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::closed_form::{self, Branch, ExplicitP0, PsiTransform};
use crate::error::Error;
use crate::params::{self, FixedPointLabel, Params};
use crate::phase::{self, ClassifyOptions, PhaseOptions, PhasePoint, Seed};
use crate::radial::{self, IntegrateOptions, RadialState};
use crate::verify::{self, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CRITERION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Json,
    Csv,
}

/// Parsed command line.
#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "radial-lab", version, about = "Radial solutions of -Δ_m u = u^p |∇u|^q")]
pub struct RunConfig {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub abs_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
pub struct ParamArgs {
    #[arg(long = "N")]
    pub n: f64,
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
}

impl ParamArgs {
    pub fn params(&self) -> Result<Params, Error> {
        Params::new(self.n, self.m, self.p, self.q)
    }
}

/// Phase-plane seeds: a single point, a rectangular grid and/or the point
/// on the stable manifold of `A0`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SeedArgs {
    /// Single seed `X,Z` (repeatable).
    #[arg(long = "point", value_parser = parse_pair, allow_hyphen_values = true)]
    pub points: Vec<(f64, f64)>,
    /// Grid `x_min,x_max,nx,z_min,z_max,nz`, evenly spaced on both axes.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Add the seed on the stable manifold of `A0`.
    #[arg(long)]
    pub manifold: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: (f64, f64),
    pub nx: usize,
    pub z: (f64, f64),
    pub nz: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let axis = |(a, b): (f64, f64), n: usize| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        };
        let zs = axis(self.z, self.nz);
        axis(self.x, self.nx)
            .into_iter()
            .flat_map(|x| zs.iter().map(move |&z| (x, z)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Family {
    /// Explicit solutions for `p = 0`.
    P0,
    /// Solutions through the transform `Ψ` for `q = m`.
    Qm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum BranchArg {
    Decreasing,
    Increasing,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Fixed points of the phase-plane system and their linearization.
    FixedPoints {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Classify phase-plane seeds by the behaviour of the radial solution.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Integrate the radial equation from `(r0, u0, du0)`.
    Integrate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        u0: f64,
        #[arg(long, allow_hyphen_values = true)]
        du0: f64,
        /// End radius; `inf` integrates outward until an event.
        #[arg(long)]
        r_end: f64,
    },
    /// Orbits, nullclines and fixed points for plotting.
    Portrait {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seeds: SeedArgs,
    },
    /// Evaluate an explicit family at a list of radii.
    ClosedForm {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum)]
        family: Family,
        /// Radii, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        /// Branch of the `p = 0` family.
        #[arg(long, value_enum, default_value_t = BranchArg::Decreasing)]
        branch: BranchArg,
        /// Constant `C` of the `p = 0` family.
        #[arg(long = "C", allow_hyphen_values = true, default_value_t = 1.0)]
        c: f64,
        /// Reference point `r,u` fixing the additive constant of the `p = 0` family.
        #[arg(long, value_parser = parse_pair, default_value = "1,1")]
        reference: (f64, f64),
        /// `k` of the `q = m` family.
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// `λ` of the `q = m` family.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Run the acceptance suite.
    Verify,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let v = parse_floats(s, 6)?;
    let count = |x: f64| {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(format!("grid counts must be nonnegative integers, got {x}"))
        }
    };
    Ok(Grid {
        x: (v[0], v[1]),
        nx: count(v[2])?,
        z: (v[3], v[4]),
        nz: count(v[5])?,
    })
}

/// A failed command with the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonfiniteState(_)
            | Error::ManifoldEscape(_)
            | Error::Unclassifiable(_)
            | Error::PositivityLost(_)
            | Error::InsufficientSamples { .. }
            | Error::Divergent
            | Error::NonpositiveValues
            | Error::WrongClassification(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

/// Rendered output and the exit code of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub code: i32,
}

fn ok(body: String) -> Result<Outcome, Failure> {
    Ok(Outcome { body, code: EXIT_OK })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Failure::from(std::io::Error::other(e)))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Failure::from(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::from(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl RunConfig {
    fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions::with_tolerances(self.output.rel_tol, self.output.abs_tol)
    }

    fn phase_options(&self) -> PhaseOptions {
        PhaseOptions {
            rel_tol: self.output.rel_tol,
            abs_tol: self.output.abs_tol,
            ..Default::default()
        }
    }
}

fn seed_points(cfg: &RunConfig, p: &Params, seeds: &SeedArgs) -> Result<Vec<PhasePoint>, Failure> {
    let mut out: Vec<PhasePoint> = seeds.points.iter().map(|&(x, z)| PhasePoint { t: 0.0, x, z }).collect();
    if let Some(g) = &seeds.grid {
        out.extend(g.points().into_iter().map(|(x, z)| PhasePoint { t: 0.0, x, z }));
    }
    if seeds.manifold {
        out.push(phase::stable_manifold_a0(p, 1e-4, &cfg.phase_options())?.seed);
    }
    Ok(out)
}

struct Row {
    seed: PhasePoint,
    result: Result<phase::ClassifiedOrbit, Error>,
}

fn classify_all(cfg: &RunConfig, p: &Params, seeds: &[PhasePoint]) -> Vec<Row> {
    let opts = cfg.classify_options();
    seeds
        .par_iter()
        .map(|&seed| Row {
            seed,
            result: phase::classify_with(p, &Seed::Phase(seed), &opts),
        })
        .collect()
}

fn row_json(row: &Row) -> Value {
    match &row.result {
        Ok(co) => json!({ "seed": row.seed, "classification": co.classification, "error": null }),
        Err(e) => json!({ "seed": row.seed, "classification": null, "error": e.to_string() }),
    }
}

fn summary(rows: &[Row]) -> Value {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut failed = 0;
    for r in rows {
        match &r.result {
            Ok(co) => *counts.entry(format!("{:?}", co.classification.kind)).or_default() += 1,
            Err(_) => failed += 1,
        }
    }
    json!({ "seeds": rows.len(), "counts": counts, "unclassifiable": failed })
}

fn fixed_points(cfg: &RunConfig, pa: &ParamArgs) -> Result<Outcome, Failure> {
    let p = pa.params()?;
    let fps = FixedPointLabel::ALL
        .iter()
        .map(|&l| params::linearize(&p, l))
        .collect::<Result<Vec<_>, _>>()?;
    match cfg.output.format {
        Format::Json => ok(pretty(&json!({
            "schema": "1",
            "params": p,
            "fixed_points": fps,
            "n0_eigen_slope": params::n0_eigen_slope(&p),
            "a0_eigen_slope": params::a0_eigen_slope(&p),
        }))),
        Format::Csv => ok(csv_table(
            &["label", "X", "Z", "eigenvalue_1", "eigenvalue_2", "stability"],
            fps.iter().map(|f| {
                let (e1, e2) = f.eigenvalues.expect("linearize sets eigenvalues");
                vec![
                    format!("{:?}", f.label),
                    num(f.location.0),
                    num(f.location.1),
                    num(e1),
                    num(e2),
                    f.stability.map(|s| format!("{s:?}")).unwrap_or_default(),
                ]
            }),
        )?),
    }
}

fn classify(cfg: &RunConfig, pa: &ParamArgs, seeds: &SeedArgs) -> Result<Outcome, Failure> {
    let p = pa.params()?;
    let points = seed_points(cfg, &p, seeds)?;
    let rows = classify_all(cfg, &p, &points);
    match cfg.output.format {
        Format::Json => ok(pretty(&json!({
            "schema": "1",
            "params": p,
            "summary": summary(&rows),
            "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
        }))),
        Format::Csv => ok(csv_table(
            &["X", "Z", "kind", "u0", "l", "rho", "c", "k", "error"],
            rows.iter().map(|r| {
                let mut v = vec![num(r.seed.x), num(r.seed.z)];
                match &r.result {
                    Ok(co) => {
                        let w = co.classification.witnesses;
                        v.push(format!("{:?}", co.classification.kind));
                        v.extend([w.u0, w.l, w.rho, w.c, w.k].map(opt_num));
                        v.push(String::new());
                    }
                    Err(e) => {
                        v.extend(std::iter::repeat_n(String::new(), 6));
                        v.push(e.to_string());
                    }
                }
                v
            }),
        )?),
    }
}

fn integrate(cfg: &RunConfig, pa: &ParamArgs, r0: f64, u0: f64, du0: f64, r_end: f64) -> Result<Outcome, Failure> {
    let p = pa.params()?;
    let init = RadialState::new(&p, r0, u0, du0);
    let opts = IntegrateOptions::with_tolerances(cfg.output.rel_tol, cfg.output.abs_tol);
    let tr = radial::integrate(&p, &init, (r0, r_end), &opts)?;
    match cfg.output.format {
        Format::Json => ok(pretty(&tr.to_json())),
        Format::Csv => {
            let mut buf = Vec::new();
            tr.write_csv(&mut buf)?;
            ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
    }
}

fn portrait(cfg: &RunConfig, pa: &ParamArgs, seeds: &SeedArgs) -> Result<Outcome, Failure> {
    let p = pa.params()?;
    let fps = FixedPointLabel::ALL
        .iter()
        .map(|&l| params::linearize(&p, l))
        .collect::<Result<Vec<_>, _>>()?;
    let lines = phase::nullclines(&p)?;
    let points = seed_points(cfg, &p, seeds)?;
    let rows = classify_all(cfg, &p, &points);
    let orbits: Vec<phase::PhaseTrajectory> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok().and_then(|co| co.orbit.clone()))
        .collect();
    match cfg.output.format {
        Format::Json => ok(pretty(&json!({
            "schema": "1",
            "params": p,
            "fixed_points": fps,
            "nullclines": lines,
            "orbits": orbits,
            "classifications": rows.iter().map(row_json).collect::<Vec<_>>(),
        }))),
        Format::Csv => {
            let mut buf = Vec::new();
            phase::write_orbits_csv(&orbits, &mut buf)?;
            ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn closed_form(
    cfg: &RunConfig,
    pa: &ParamArgs,
    family: Family,
    radii: &[f64],
    branch: BranchArg,
    c: f64,
    reference: (f64, f64),
    k: f64,
    lambda: f64,
) -> Result<Outcome, Failure> {
    let p = pa.params()?;
    let mut values = Vec::with_capacity(radii.len());
    let detail = match family {
        Family::P0 => {
            let branch = match branch {
                BranchArg::Decreasing => Branch::Decreasing,
                BranchArg::Increasing => Branch::Increasing,
            };
            let ep = ExplicitP0::new(&p, branch, c)?;
            for &r in radii {
                let u = closed_form::p0_value(&ep, reference.0, reference.1, r)?;
                values.push((r, u, closed_form::p0_derivative(&ep, r)?));
            }
            json!({ "family": "P0", "branch": branch, "C": c, "domain": ep.domain, "reference": reference })
        }
        Family::Qm => {
            let ps = PsiTransform::new(&p)?;
            for &r in radii {
                let (u, du) = closed_form::qm_solution(&ps, k, lambda, r)?;
                values.push((r, u, du));
            }
            json!({ "family": "Qm", "k": k, "lambda": lambda })
        }
    };
    match cfg.output.format {
        Format::Json => ok(pretty(&json!({
            "schema": "1",
            "params": p,
            "family": detail,
            "values": values.iter().map(|&(r, u, du)| json!({ "r": r, "u": u, "du": du })).collect::<Vec<_>>(),
        }))),
        Format::Csv => ok(csv_table(
            &["r", "u", "du"],
            values.iter().map(|&(r, u, du)| vec![num(r), num(u), num(du)]),
        )?),
    }
}

fn verify_suite(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let report = verify::run_all(&VerifyConfig {
        seed: cfg.output.seed,
        rel_tol: cfg.output.rel_tol,
        abs_tol: cfg.output.abs_tol,
    });
    for c in &report.criteria {
        eprintln!("{} {:>2} {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name);
    }
    let body = match cfg.output.format {
        Format::Json => {
            let mut s = report.to_json_string();
            s.push('\n');
            s
        }
        Format::Csv => csv_table(
            &["id", "name", "pass"],
            report
                .criteria
                .iter()
                .map(|c| vec![c.id.to_string(), c.name.to_string(), c.pass.to_string()]),
        )?,
    };
    Ok(Outcome {
        body,
        code: if report.all_pass { EXIT_OK } else { EXIT_CRITERION_FAILED },
    })
}

/// Runs a parsed command and renders its output without writing it.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    if !(cfg.output.rel_tol > 0.0 && cfg.output.abs_tol >= 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()).into());
    }
    let work = || match &cfg.command {
        Command::FixedPoints { params } => fixed_points(cfg, params),
        Command::Classify { params, seeds } => classify(cfg, params, seeds),
        Command::Integrate {
            params,
            r0,
            u0,
            du0,
            r_end,
        } => integrate(cfg, params, *r0, *u0, *du0, *r_end),
        Command::Portrait { params, seeds } => portrait(cfg, params, seeds),
        Command::ClosedForm {
            params,
            family,
            r,
            branch,
            c,
            reference,
            k,
            lambda,
        } => closed_form(cfg, params, *family, r, *branch, *c, *reference, *k, *lambda),
        Command::Verify => verify_suite(cfg),
    };
    match cfg.output.jobs {
        Some(0) => Err(Error::InvalidArgument("--jobs must be at least 1".into()).into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure {
                code: EXIT_USAGE,
                message: e.to_string(),
            })?
            .install(work),
        None => work(),
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let written = execute(&cfg).and_then(|o| {
        match &cfg.output.out {
            Some(path) => std::fs::write(path, &o.body)?,
            None => std::io::stdout().lock().write_all(o.body.as_bytes())?,
        }
        Ok(o.code)
    });
    match written {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("radial-lab").chain(args.iter().copied())).unwrap()
    }

    const P3213: [&str; 8] = ["--N", "3", "--m", "2", "--p", "1", "--q", "3"];

    #[test]
    fn fixed_points_json() {
        let mut args = vec!["fixed-points"];
        args.extend(P3213);
        let out = execute(&parse(&args)).unwrap();
        let v: Value = serde_json::from_str(&out.body).unwrap();
        assert_eq!(v["schema"], "1");
        let n0 = &v["fixed_points"][0];
        assert_eq!(n0["label"], "N0");
        assert_eq!(n0["location"][1].as_f64().unwrap(), 1.5);
        assert!((n0["eigenvalues"][0].as_f64().unwrap() - 0.5).abs() < 1e-14);
        assert!((n0["eigenvalues"][1].as_f64().unwrap() - 3.0).abs() < 1e-14);
        assert!((v["fixed_points"][2]["eigenvalues"][0].as_f64().unwrap() + 4.0).abs() < 1e-14);
        assert!((v["a0_eigen_slope"].as_f64().unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn fixed_points_csv_has_a_row_per_point() {
        let mut args = vec!["fixed-points", "--format", "csv"];
        args.extend(P3213);
        let out = execute(&parse(&args)).unwrap();
        assert_eq!(out.body.lines().count(), 4);
    }

    #[test]
    fn missing_flag_is_a_usage_error() {
        assert_eq!(run(["radial-lab", "fixed-points", "--N", "3", "--m", "2", "--p", "1"]), EXIT_USAGE);
    }

    #[test]
    fn bad_params_are_a_usage_error() {
        let out = execute(&parse(&["fixed-points", "--N", "3", "--m", "4", "--p", "1", "--q", "3"]));
        assert_eq!(out.unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let mut args = vec!["classify", "--grid", "0.1,1,0,0.1,1,0"];
        args.extend(P3213);
        let out = execute(&parse(&args)).unwrap();
        assert_eq!(out.code, EXIT_OK);
        let v: Value = serde_json::from_str(&out.body).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 0);
        assert_eq!(v["summary"]["seeds"], 0);
    }

    #[test]
    fn inadmissible_seed_is_recorded_per_row() {
        let mut args = vec!["classify", "--point", "0.5,-1", "--point", "0.3,0.2"];
        args.extend(P3213);
        let out = execute(&parse(&args)).unwrap();
        let v: Value = serde_json::from_str(&out.body).unwrap();
        assert!(v["rows"][0]["error"].is_string());
        assert_eq!(v["rows"][1]["classification"]["kind"], "SingularToDecayAtInfinity");
        assert_eq!(v["summary"]["unclassifiable"], 1);
    }

    #[test]
    fn grid_points_are_row_major() {
        let g = parse_grid("0,1,2,-1,1,3").unwrap();
        assert_eq!(g.points(), vec![(0.0, -1.0), (0.0, 0.0), (0.0, 1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0)]);
        assert!(parse_grid("0,1,2.5,0,1,1").is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut args = vec!["closed-form", "--family", "p0", "--r", "0.5,1,2", "--C", "-0.1", "--jobs", "2"];
        args.extend(["--N", "3", "--m", "2", "--p", "0", "--q", "3"]);
        let cfg = parse(&args);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn closed_form_p0_reports_the_reference_value() {
        let mut args = vec!["closed-form", "--family", "p0", "--r", "1,2"];
        args.extend(["--N", "3", "--m", "2", "--p", "0", "--q", "3"]);
        let v: Value = serde_json::from_str(&execute(&parse(&args)).unwrap().body).unwrap();
        assert_eq!(v["values"][0]["u"].as_f64().unwrap(), 1.0);
        assert!(v["values"][1]["du"].as_f64().unwrap() < 0.0);
    }

    #[test]
    fn integrate_outputs_a_trajectory() {
        let mut args = vec!["integrate", "--r0", "1", "--u0", "1", "--du0", "-0.1", "--r-end", "2"];
        args.extend(P3213);
        let v: Value = serde_json::from_str(&execute(&parse(&args)).unwrap().body).unwrap();
        assert_eq!(v["terminal"]["kind"], "ReachedSpanEnd");
    }

    #[test]
    fn portrait_bundle_has_all_sections() {
        let mut args = vec!["portrait", "--point", "0.3,0.2", "--manifold"];
        args.extend(P3213);
        let v: Value = serde_json::from_str(&execute(&parse(&args)).unwrap().body).unwrap();
        for key in ["params", "fixed_points", "nullclines", "orbits", "classifications"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["orbits"].as_array().unwrap().len(), 2);
        assert_eq!(v["classifications"][1]["classification"]["kind"], "ConnectsN0toA0");
    }
}
