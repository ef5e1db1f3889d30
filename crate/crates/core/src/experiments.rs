//! Config-driven experiment runs: each writes its reports into one output directory
//! together with a manifest of content hashes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::density::{growth_from_ellipticity, random_samples, Density, DensityError};
use crate::diagnostics::{
    certify, check_higher_diff_estimate, check_lipschitz_estimate, check_second_derivative_estimate, compute_k,
    lavrentiev_probe, moser_norm_ladder_check, DiagnosticsError, EstimateReport, KVariant, CERTIFY_TOL,
};
use crate::discretization::{io, DiscreteField, DiscretizationError, Grid, Region};
use crate::exponents::{counterexample_window, moser_ladder, ClassificationRecord, ExponentError};
use crate::oracle::{blow_up_rate, euler_invariant_spread, exact_minimizer, refinement_study, Oracle1DProblem, OracleError};
use crate::solver::{minimize_observed, BoundaryData, Method, SolveOptions, SolverError, Termination, TraceRecord};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A hypothesis of the requested check does not hold for this instance.
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("{0}")]
    Failure(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(ConfigError::Schema { .. } | ConfigError::Version(_) | ConfigError::Field { .. }) => 3,
            Self::Config(_) | Self::Assumption(_) => 2,
            Self::Failure(_) | Self::Io(_) => 1,
        }
    }
}

impl From<ExponentError> for RunError {
    fn from(e: ExponentError) -> Self {
        match e {
            ExponentError::Precondition(_) | ExponentError::LadderDivergence { .. } => Self::Assumption(e.to_string()),
            ExponentError::Parse(_) => Self::Failure(e.to_string()),
        }
    }
}

impl From<DensityError> for RunError {
    fn from(e: DensityError) -> Self {
        Self::Assumption(e.to_string())
    }
}

impl From<DiscretizationError> for RunError {
    fn from(e: DiscretizationError) -> Self {
        Self::Failure(e.to_string())
    }
}

impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Infeasible { .. } | SolverError::InfeasibleSeed(_) => Self::Assumption(e.to_string()),
            SolverError::Density(d) => d.into(),
            _ => Self::Failure(e.to_string()),
        }
    }
}

impl From<DiagnosticsError> for RunError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Exponent(x) => x.into(),
            DiagnosticsError::Solver(x) => x.into(),
            DiagnosticsError::Density(x) => x.into(),
            DiagnosticsError::Discretization(x) => x.into(),
            other => Self::Assumption(other.to_string()),
        }
    }
}

impl From<OracleError> for RunError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Solver(x) => x.into(),
            OracleError::Density(x) => x.into(),
            other => Self::Assumption(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        Self::Failure(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub experiment: &'static str,
    pub seed: u64,
    pub config_sha256: String,
    pub exit_code: i32,
    pub timings_ms: BTreeMap<String, f64>,
    pub files: Vec<FileEntry>,
}

/// Single writer for one output directory; every file it writes is hashed for the manifest.
struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), RunError> {
        fs::write(self.dir.join(name), data)?;
        self.files.push(FileEntry { path: name.to_string(), sha256: hex::encode(Sha256::digest(data)), bytes: data.len() });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut data = serde_json::to_vec_pretty(value)?;
        data.push(b'\n');
        self.bytes(name, &data)
    }

    fn field(&mut self, stem: &str, field: &DiscreteField, binary_threshold: usize) -> Result<(), RunError> {
        let mut data = Vec::new();
        if field.grid().n_nodes() > binary_threshold {
            io::write_binary(field, &mut data)?;
            self.bytes(&format!("{stem}.bin"), &data)
        } else {
            io::write_csv(field, &mut data)?;
            self.bytes(&format!("{stem}.csv"), &data)
        }
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    out: Outputs,
    trace: bool,
    timings: BTreeMap<String, f64>,
}

impl Context<'_> {
    fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let v = f();
        self.timings.insert(label.to_string(), start.elapsed().as_secs_f64() * 1e3);
        v
    }

    fn opts(&self) -> SolveOptions {
        self.cfg.solver.options()
    }

    fn solve(&mut self, d: &Density, grid: &Grid, boundary: &BoundaryData) -> Result<SolveSummary, RunError> {
        let opts = self.opts();
        let trace = self.trace;
        let mut observer = |r: TraceRecord| {
            if trace {
                if let Ok(line) = serde_json::to_string(&r) {
                    let _ = writeln!(std::io::stderr(), "{line}");
                }
            }
        };
        let sol = self.timed("solve", || minimize_observed(d, grid, boundary, &opts, &mut observer))?;
        Ok(SolveSummary {
            dim: grid.dim(),
            n_nodes: grid.n_axis(),
            energy: sol.energy,
            grad_norm: sol.grad_norm,
            iterations: sol.iterations,
            method_used: sol.method_used,
            fallback: sol.fallback,
            termination: sol.termination,
            field: sol.field,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
struct SolveSummary {
    dim: usize,
    n_nodes: usize,
    energy: f64,
    grad_norm: f64,
    iterations: usize,
    method_used: Method,
    fallback: bool,
    termination: Termination,
    #[serde(skip)]
    field: DiscreteField,
}

/// Outcome of a run that reached the point of writing a manifest.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: Manifest,
    pub error: Option<RunError>,
}

/// Runs `cfg` into `out`. Assumption violations still produce a manifest and a
/// `violation.json`; other failures are returned as errors.
pub fn run(cfg: &ExperimentConfig, config_bytes: &[u8], out: &Path, trace: bool) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let mut ctx = Context { cfg, out: Outputs::new(out)?, trace, timings: BTreeMap::new() };
    let result = match cfg.experiment {
        ExperimentKind::Exponents => run_exponents(&mut ctx),
        ExperimentKind::Solve => run_solve(&mut ctx),
        ExperimentKind::OracleCompare => run_oracle_compare(&mut ctx),
        ExperimentKind::EstimateCheck => run_estimate_check(&mut ctx),
        ExperimentKind::Moser => run_moser(&mut ctx),
        ExperimentKind::Lavrentiev => run_lavrentiev(&mut ctx),
        ExperimentKind::Counterexample => run_counterexample(&mut ctx),
    };
    let (exit_code, error) = match result {
        Ok(()) => (0, None),
        Err(e @ RunError::Assumption(_)) => {
            ctx.out.json("violation.json", &serde_json::json!({ "assumption_violated": e.to_string() }))?;
            (2, Some(e))
        }
        Err(e) => return Err(e),
    };
    ctx.timings.insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        schema_version: cfg.version,
        experiment: cfg.experiment.name(),
        seed: cfg.seed,
        config_sha256: hex::encode(Sha256::digest(config_bytes)),
        exit_code,
        timings_ms: ctx.timings,
        files: ctx.out.files,
    };
    let mut data = serde_json::to_vec_pretty(&manifest)?;
    data.push(b'\n');
    fs::write(out.join(MANIFEST), data)?;
    Ok(RunOutcome { exit_code, manifest, error })
}

fn grid_of(ctx: &Context) -> Result<Grid, RunError> {
    Ok(ctx.cfg.grid.expect("validated").build()?)
}

fn density_of(ctx: &Context, dim: usize) -> Result<Density, RunError> {
    Ok(ctx.cfg.density.as_ref().expect("validated").build(dim)?)
}

fn boundary_of<'a>(ctx: &Context<'a>) -> &'a BoundaryData {
    ctx.cfg.boundary.as_ref().expect("validated")
}

fn run_exponents(ctx: &mut Context) -> Result<(), RunError> {
    let profile = ctx.cfg.profile.as_ref().expect("validated").build()?;
    ctx.out.json("report.json", &ClassificationRecord::from_profile(&profile))?;
    if let Ok(ladder) = moser_ladder(&profile, 8) {
        ctx.out.json("ladder.json", &ladder)?;
    }
    Ok(())
}

fn run_solve(ctx: &mut Context) -> Result<(), RunError> {
    let grid = grid_of(ctx)?;
    let d = density_of(ctx, grid.dim())?;
    let sol = ctx.solve(&d, &grid, boundary_of(ctx))?;
    ctx.out.json("solution.json", &sol)?;
    ctx.out.field("field", &sol.field, ctx.cfg.binary_threshold)?;
    if ctx.cfg.growth_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
        let samples = random_samples(&mut rng, grid.dim(), sol.field.components(), ctx.cfg.growth_samples, 1e3);
        let report = growth_from_ellipticity(&d, &samples)?;
        ctx.out.json("growth.json", &report)?;
        if let Some(v) = &report.violation {
            return Err(RunError::Assumption(format!(
                "growth bound fails at x = {:?}: {} > {}",
                v.sample.x, v.value, v.limit
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    problem: Oracle1DProblem,
    n_nodes: usize,
    /// The discrete density coincides with the oracle's integrand only for `p = 2`.
    density_matches_oracle: bool,
    sup_error: f64,
    energy: f64,
    exact_energy: f64,
    energy_rel_error: f64,
    euler_spread: f64,
    grad_norm: f64,
    iterations: usize,
}

fn run_oracle_compare(ctx: &mut Context) -> Result<(), RunError> {
    let spec = ctx.cfg.oracle.clone().expect("validated");
    let grid = grid_of(ctx)?;
    if grid.dim() != 1 {
        return Err(RunError::Assumption("the oracle problem is one-dimensional".into()));
    }
    let prob = Oracle1DProblem::new(spec.alpha, spec.p, spec.a, spec.b)?;
    let d = prob.density()?;
    let sol = ctx.solve(&d, &grid, &prob.boundary())?;
    let exact = exact_minimizer(&prob);
    let sampled = exact.sample(&grid)?;
    let euler_spread = euler_invariant_spread(&sol.field, &d, ctx.cfg.solver.weight_rule)?;
    let exact_energy = exact.energy();
    ctx.out.json(
        "report.json",
        &OracleReport {
            problem: prob,
            n_nodes: grid.n_axis(),
            density_matches_oracle: prob.p == 2.0,
            sup_error: sol.field.sup_distance(&sampled),
            energy: sol.energy,
            exact_energy,
            energy_rel_error: (sol.energy - exact_energy).abs() / exact_energy.abs(),
            euler_spread,
            grad_norm: sol.grad_norm,
            iterations: sol.iterations,
        },
    )?;
    let mut csv = String::from("x,u,u_exact\n");
    for i in 0..grid.n_nodes() {
        let x = grid.coord(i);
        csv.push_str(&format!("{x:.17e},{:.17e},{:.17e}\n", sol.field.node(i)[0], sampled.node(i)[0]));
    }
    ctx.out.bytes("field.csv", csv.as_bytes())
}

#[derive(Serialize)]
struct EstimateBundle {
    solve: SolveSummary,
    certified_grad_norm: f64,
    k_main: f64,
    k_apriori: f64,
    reports: Vec<EstimateReport>,
    skipped: BTreeMap<String, String>,
}

fn run_estimate_check(ctx: &mut Context) -> Result<(), RunError> {
    let grid = grid_of(ctx)?;
    let d = density_of(ctx, grid.dim())?;
    let profile = ctx.cfg.profile.as_ref().expect("validated").build()?;
    let est = ctx.cfg.estimate.clone();
    let sol = ctx.solve(&d, &grid, boundary_of(ctx))?;
    let cf = certify(&sol.field, &d, ctx.cfg.solver.weight_rule, CERTIFY_TOL)?;
    let outer = Region::new(est.r0);
    let k_main = compute_k(&d, &profile, &grid, &outer, KVariant::Main)?.value;
    let k_apriori = compute_k(&d, &profile, &grid, &outer, KVariant::Apriori)?.value;
    let mut reports = vec![
        check_lipschitz_estimate(&cf, &d, &profile, est.r0, est.theta)?,
        check_second_derivative_estimate(&cf, &d, &profile, est.r0, est.theta)?,
    ];
    let mut skipped = BTreeMap::new();
    match check_higher_diff_estimate(&cf, &d, est.rho, est.big_r) {
        Ok(r) => reports.push(r),
        Err(DiagnosticsError::Precondition(why)) => {
            skipped.insert("hd6".to_string(), why);
        }
        Err(e) => return Err(e.into()),
    }
    ctx.out.field("field", &cf.field, ctx.cfg.binary_threshold)?;
    ctx.out.json(
        "estimates.json",
        &EstimateBundle { certified_grad_norm: cf.grad_norm, solve: sol, k_main, k_apriori, reports, skipped },
    )
}

fn run_moser(ctx: &mut Context) -> Result<(), RunError> {
    let grid = grid_of(ctx)?;
    let d = density_of(ctx, grid.dim())?;
    let profile = ctx.cfg.profile.as_ref().expect("validated").build()?;
    // Fail before solving when the ladder is undefined for this profile.
    moser_ladder(&profile, 0)?;
    let sol = ctx.solve(&d, &grid, boundary_of(ctx))?;
    let cf = certify(&sol.field, &d, ctx.cfg.solver.weight_rule, CERTIFY_TOL)?;
    let report = moser_norm_ladder_check(&cf, &profile, &Region::new(ctx.cfg.moser_region), ctx.cfg.moser_i_max)?;
    ctx.out.json("moser.json", &report)?;
    let mut csv = String::from("i,exponent,norm\n");
    for (i, (p, v)) in report.exponents.iter().zip(&report.norms).enumerate() {
        csv.push_str(&format!("{i},{p:.17e},{v:.17e}\n"));
    }
    ctx.out.bytes("moser.csv", csv.as_bytes())
}

fn run_lavrentiev(ctx: &mut Context) -> Result<(), RunError> {
    let grids = ctx.cfg.grids.iter().map(|g| g.build()).collect::<Result<Vec<_>, _>>()?;
    let dim = grids[0].dim();
    if grids.iter().any(|g| g.dim() != dim) {
        return Err(RunError::Failure("all grids must share one dimension".into()));
    }
    let d = density_of(ctx, dim)?;
    let opts = ctx.opts();
    let boundary = boundary_of(ctx);
    let caps = ctx.cfg.caps.clone();
    let report = ctx.timed("probe", || lavrentiev_probe(&d, &grids, boundary, &caps, &opts))?;
    ctx.out.json("lavrentiev.json", &report)?;
    let mut csv = String::from("n_nodes,cap,energy,unrestricted,max_gradient,rel_gap\n");
    for row in &report.rows {
        for c in &row.capped {
            csv.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                row.n_nodes, c.cap, c.energy, row.unrestricted, c.max_gradient, c.rel_gap
            ));
        }
    }
    ctx.out.bytes("lavrentiev.csv", csv.as_bytes())
}

fn run_counterexample(ctx: &mut Context) -> Result<(), RunError> {
    let spec = ctx.cfg.oracle.clone().expect("validated");
    let prob = Oracle1DProblem::new(spec.alpha, spec.p, spec.a, spec.b)?;
    let opts = ctx.opts();
    let rows = ctx.timed("refinement", || refinement_study(&prob, &ctx.cfg.refinements, &opts))?;
    let window = match &ctx.cfg.profile {
        Some(p) => Some(counterexample_window(spec.alpha, spec.p, &p.r, &p.s)?),
        None => None,
    };
    ctx.out.json(
        "counterexample.json",
        &serde_json::json!({
            "problem": prob,
            "predicted_rate": blow_up_rate(spec.alpha, spec.p)?,
            "rows": rows,
            "window": window,
        }),
    )?;
    let mut csv = String::from("n_nodes,max_gradient,observed_factor,predicted_factor\n");
    for r in &rows {
        let obs = r.observed_factor.map_or(String::new(), |v| format!("{v:.17e}"));
        csv.push_str(&format!("{},{:.17e},{obs},{:.17e}\n", r.n_nodes, r.max_gradient, r.predicted_factor));
    }
    ctx.out.bytes("refinement.csv", csv.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_text(text: &str) -> (tempfile::TempDir, Result<RunOutcome, RunError>) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let res = run(&cfg, text.as_bytes(), dir.path(), false);
        (dir, res)
    }

    #[test]
    fn exponents_report() {
        let (dir, res) = run_text(r#"{"experiment": "exponents", "profile": {"p": 2, "q": 2, "n": 2, "r": "inf", "s": "inf"}}"#);
        assert_eq!(res.unwrap().exit_code, 0);
        let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(v["class"], "regular");
        assert_eq!(v["threshold"], 1.5);
    }

    #[test]
    fn manifest_lists_hashes() {
        let (dir, res) = run_text(
            r#"{"experiment": "solve", "density": {"family": "power_weight", "p": 2, "a": {"kind": "constant", "value": 1}},
                "grid": {"dim": 1, "n_nodes": 17}, "boundary": [{"offset": 0.5, "slope": [0.5]}], "growth_samples": 50, "seed": 3}"#,
        );
        let m = res.unwrap().manifest;
        let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(names, ["solution.json", "field.csv", "growth.json"]);
        for f in &m.files {
            let data = fs::read(dir.path().join(&f.path)).unwrap();
            assert_eq!(hex::encode(Sha256::digest(&data)), f.sha256);
        }
    }

    #[test]
    fn irregular_moser_is_an_assumption_violation() {
        let (dir, res) = run_text(
            r#"{"experiment": "moser", "density": {"family": "power_weight", "p": 2, "a": {"kind": "constant", "value": 1}},
                "profile": {"p": 2, "q": 4, "n": 1, "r": "inf", "s": "inf"},
                "grid": {"dim": 1, "n_nodes": 17}, "boundary": [{"offset": 0.5, "slope": [0.5]}]}"#,
        );
        assert_eq!(res.unwrap().exit_code, 2);
        assert!(dir.path().join("violation.json").exists());
    }
}
