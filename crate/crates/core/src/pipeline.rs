//! Run configuration, stage orchestration, the JSON run report and exports.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::candidate::{
    coefficients, css_over_gap, ct_over_cs, l_phi, l_phi0, region_classify, t_ratio, t_ratio_r_values, CandidateParams,
    Region,
};
use crate::error::{CandidateError, ConfigError, IoError, PipelineError};
use crate::io::{cache_dir, cache_path, fields_to_csv, read_solution, solution_hash, write_solution};
use crate::rigor::{builtin_expressions, run_claim, standard_claims, ProofStatus, ProofTrace, ProverConfig};
use crate::saddle_solver::{build_grid, newton_solve, Field, SaddleSolution, SolverConfig};
use crate::scalar_forms::DimensionParams;
use crate::spectral::{
    assemble, eigenvector_csv, min_eigenvalue, stability_certificate, EigConfig, EigEstimate, QuadraticFormAssembly,
    SealedReport, StabilityCertificate,
};
use crate::verifier_grid::{
    run_check_by_id, run_inequality_suite, sign_map, suite_specs, verify_supersolution, CheckReport, SignMap,
    SupersolutionReport,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Solve,
    Suite,
    Supersolution,
    Spectrum,
    Rigor,
    Certificate,
    Plots,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Solve,
        Stage::Suite,
        Stage::Supersolution,
        Stage::Spectrum,
        Stage::Rigor,
        Stage::Certificate,
        Stage::Plots,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Solve => "solve",
            Stage::Suite => "suite",
            Stage::Supersolution => "supersolution",
            Stage::Spectrum => "spectrum",
            Stage::Rigor => "rigor",
            Stage::Certificate => "certificate",
            Stage::Plots => "plots",
        }
    }

    fn needs_solution(self) -> bool {
        !matches!(self, Stage::Rigor)
    }

    fn needs_candidate(self) -> bool {
        matches!(self, Stage::Supersolution | Stage::Rigor | Stage::Certificate | Stage::Plots)
    }
}

impl FromStr for Stage {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Stage, ConfigError> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| ConfigError::Invalid(format!("unknown stage {s:?}")))
    }
}

/// Parses a comma-separated stage list.
pub fn parse_stages(list: &str) -> Result<Vec<Stage>, ConfigError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CachePolicy {
    /// Read a matching cached solution, else solve and write it.
    Use,
    /// Always solve, then overwrite the cache entry.
    Refresh,
    Off,
}

impl FromStr for CachePolicy {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<CachePolicy, ConfigError> {
        match s {
            "use" => Ok(CachePolicy::Use),
            "refresh" => Ok(CachePolicy::Refresh),
            "off" => Ok(CachePolicy::Off),
            _ => Err(ConfigError::Invalid(format!("cache policy must be use, refresh or off, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub m: usize,
    /// Candidate dimension `2m`, when `m ∈ {4, 5, 6}`.
    pub n: Option<usize>,
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
    pub newton_tol: f64,
    pub stages: Vec<Stage>,
    /// Suite check ids to run; empty runs all.
    pub checks: Vec<String>,
    pub rigor: ProverConfig,
    pub eig_tol: f64,
    pub out: Option<PathBuf>,
    pub cache: CachePolicy,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Config file contents; every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    problem: ProblemSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    stages: StagesSection,
    #[serde(default)]
    rigor: RigorSection,
    #[serde(default)]
    spectrum: SpectrumSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    m: Option<usize>,
    n: Option<usize>,
    #[serde(rename = "R")]
    r: Option<f64>,
    h: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StagesSection {
    run: Option<Vec<String>>,
    checks: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RigorSection {
    max_depth: Option<u32>,
    min_width: Option<f64>,
    max_boxes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumSection {
    tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    cache: Option<String>,
    cache_dir: Option<PathBuf>,
    threads: Option<usize>,
}

/// Settings from flags; each one set here wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub h: Option<f64>,
    pub newton_tol: Option<f64>,
    pub stages: Option<Vec<Stage>>,
    pub checks: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub cache: Option<CachePolicy>,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Merges defaults, an optional TOML file and flag overrides, then validates.
    pub fn resolve(file: Option<&str>, o: &Overrides) -> Result<RunConfig, ConfigError> {
        let f: FileConfig = match file {
            Some(text) => toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?,
            None => FileConfig::default(),
        };
        let file_stages = match &f.stages.run {
            Some(list) => Some(list.iter().map(|s| s.parse()).collect::<Result<Vec<Stage>, _>>()?),
            None => None,
        };
        let cache = match (o.cache, &f.output.cache) {
            (Some(c), _) => c,
            (None, Some(s)) => s.parse()?,
            (None, None) => CachePolicy::Use,
        };
        // a dimension flag replaces both file keys
        let (m, n) = if o.m.is_some() || o.n.is_some() { (o.m, o.n) } else { (f.problem.m, f.problem.n) };
        let (m, n) = match (m, n) {
            (Some(m), Some(n)) if n != 2 * m => {
                return Err(ConfigError::Invalid(format!("n = {n} and m = {m} disagree; n must be 2m")))
            }
            (Some(m), _) => (m, None),
            (None, Some(n)) => {
                if n % 2 != 0 {
                    return Err(ConfigError::Invalid(format!("n = {n} is odd")));
                }
                (n / 2, Some(n))
            }
            (None, None) => return Err(ConfigError::Invalid("set m or n".into())),
        };
        let defaults = ProverConfig::default();
        let cfg = RunConfig {
            m,
            n: n.or(if (4..=6).contains(&m) { Some(2 * m) } else { None }),
            r: o.r.or(f.problem.r).unwrap_or(12.0),
            h: o.h.or(f.problem.h).unwrap_or(0.05),
            newton_tol: o.newton_tol.or(f.solver.tol).unwrap_or(SolverConfig::default().newton_tol),
            stages: o.stages.clone().or(file_stages).unwrap_or_else(|| vec![Stage::Solve]),
            checks: o.checks.clone().or(f.stages.checks).unwrap_or_default(),
            rigor: ProverConfig {
                max_depth: f.rigor.max_depth.unwrap_or(defaults.max_depth),
                min_width: f.rigor.min_width.unwrap_or(defaults.min_width),
                max_boxes: f.rigor.max_boxes.unwrap_or(defaults.max_boxes),
                mean_value: defaults.mean_value,
            },
            eig_tol: f.spectrum.tol.unwrap_or(EigConfig::default().tol),
            out: o.out.clone().or(f.output.dir),
            cache,
            cache_dir: o.cache_dir.clone().or(f.output.cache_dir),
            threads: o.threads.or(f.output.threads),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(1..=6).contains(&self.m) {
            return bad(format!("m = {} outside 1..=6", self.m));
        }
        if self.stages.is_empty() {
            return bad("no stages requested".into());
        }
        if self.stages.iter().any(|s| s.needs_candidate()) && !matches!(self.n, Some(8 | 10 | 12)) {
            return bad(format!("candidate stages need n in {{8, 10, 12}}, have m = {}", self.m));
        }
        if self.stages.iter().any(|s| s.needs_solution()) {
            build_grid(self.r, self.h).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if self.r < 8.0 {
                return bad(format!("R = {} below 8", self.r));
            }
        }
        if !(self.newton_tol > 0.0) || !(self.eig_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        let known: Vec<&str> = suite_specs().iter().map(|s| s.id).collect();
        if let Some(c) = self.checks.iter().find(|c| !known.contains(&c.as_str())) {
            return bad(format!("unknown check id {c:?}"));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Requested stages plus their prerequisites, in execution order.
    pub fn plan(&self) -> Vec<Stage> {
        let mut s = self.stages.clone();
        if s.iter().any(|x| x.needs_solution()) {
            s.push(Stage::Solve);
        }
        if s.contains(&Stage::Certificate) {
            s.push(Stage::Supersolution);
        }
        s.sort();
        s.dedup();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub unknowns: usize,
    pub solution_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageVerdict {
    pub stage: Stage,
    pub pass: bool,
    pub detail: String,
}

/// Fields that change between identical runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub stage_seconds: BTreeMap<String, f64>,
    pub solution_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub stages: Vec<Stage>,
    pub solver: Option<SolverMeta>,
    pub checks: Vec<CheckReport>,
    pub supersolution: Option<SupersolutionReport>,
    pub spectrum: Option<EigEstimate>,
    pub rigor: Vec<ProofTrace>,
    pub certificate: Option<StabilityCertificate>,
    pub verdicts: Vec<StageVerdict>,
    pub passed: bool,
    pub run: RunInfo,
}

impl RunReport {
    /// One `key=value` line for scripts.
    pub fn summary_line(&self) -> String {
        let mut parts = vec![format!("status={}", if self.passed { "PASS" } else { "FAIL" })];
        parts.push(format!("m={}", self.config.m));
        if let Some(n) = self.config.n {
            parts.push(format!("n={n}"));
        }
        for v in &self.verdicts {
            parts.push(format!("{}={}", v.stage.name(), if v.pass { "pass" } else { "fail" }));
        }
        if !self.checks.is_empty() {
            let ok = self.checks.iter().filter(|c| c.pass).count();
            parts.push(format!("checks={ok}/{}", self.checks.len()));
        }
        if let Some(e) = &self.spectrum {
            parts.push(format!("lambda_min={:e}", e.lambda_min));
        }
        format!("SUMMARY {}", parts.join(" "))
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<RunReport, IoError> {
        let r: RunReport = serde_json::from_str(text)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(IoError::Malformed(format!(
                "report schema {} is not {REPORT_SCHEMA_VERSION}",
                r.schema_version
            )));
        }
        Ok(r)
    }
}

/// A report plus the in-memory data the exports need.
pub struct RunArtifacts {
    pub report: RunReport,
    pub solution: Option<SaddleSolution>,
    pub assembly: Option<QuadraticFormAssembly>,
    pub sign_maps: Vec<(String, SignMap)>,
}

/// Loads or computes the solution according to the cache policy.
pub fn obtain_solution(cfg: &RunConfig) -> Result<(SaddleSolution, String), PipelineError> {
    let grid = build_grid(cfg.r, cfg.h)?;
    let params = DimensionParams::new(cfg.m).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let dir = match cfg.cache {
        CachePolicy::Off => None,
        _ => cache_dir(cfg.cache_dir.as_deref()),
    };
    let path = dir.map(|d| cache_path(&d, cfg.m, cfg.r, cfg.h));
    let mut note = "solved".to_string();
    if let (Some(p), CachePolicy::Use) = (&path, cfg.cache) {
        match read_solution(p, cfg.m, cfg.r, cfg.h, cfg.newton_tol) {
            Ok(sol) => return Ok((sol, format!("cache {}", p.display()))),
            Err(IoError::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => note = format!("solved; cache entry rejected: {e}"),
        }
    }
    let solver = SolverConfig { newton_tol: cfg.newton_tol, ..SolverConfig::default() };
    let sol = newton_solve(params, solver, &grid)?;
    if let Some(p) = &path {
        write_solution(p, &sol, cfg.newton_tol)?;
    }
    Ok((sol, note))
}

/// Executes the planned stages under the configured thread cap.
pub fn run(cfg: &RunConfig) -> Result<RunArtifacts, PipelineError> {
    cfg.validate()?;
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?
            .install(|| run_stages(cfg)),
        None => run_stages(cfg),
    }
}

fn run_stages(cfg: &RunConfig) -> Result<RunArtifacts, PipelineError> {
    let plan = cfg.plan();
    let cand = match cfg.n {
        Some(n @ (8 | 10 | 12)) => Some(CandidateParams::new(n)?),
        _ => None,
    };
    let mut report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        stages: plan.clone(),
        solver: None,
        checks: Vec::new(),
        supersolution: None,
        spectrum: None,
        rigor: Vec::new(),
        certificate: None,
        verdicts: Vec::new(),
        passed: true,
        run: RunInfo::default(),
    };
    let mut art = RunArtifacts { report: report.clone(), solution: None, assembly: None, sign_maps: Vec::new() };
    let mut sealed: Option<SealedReport> = None;
    for stage in plan {
        let t0 = Instant::now();
        let verdict = match stage {
            Stage::Solve => {
                let (sol, source) = obtain_solution(cfg)?;
                report.solver = Some(SolverMeta {
                    residual_norm: sol.residual_norm,
                    newton_iterations: sol.newton_iterations,
                    unknowns: sol.grid.n * (sol.grid.n - 1) / 2,
                    solution_sha256: solution_hash(&sol),
                });
                report.run.solution_source = Some(source);
                let pass = sol.residual_norm <= cfg.newton_tol;
                let detail = format!("residual {:e} after {} Newton steps", sol.residual_norm, sol.newton_iterations);
                art.solution = Some(sol);
                StageVerdict { stage, pass, detail }
            }
            Stage::Suite => {
                let sol = art.solution.as_ref().expect("solve runs first");
                report.checks = if cfg.checks.is_empty() {
                    run_inequality_suite(sol)
                } else {
                    cfg.checks.iter().filter_map(|id| run_check_by_id(sol, id)).collect()
                };
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
                let detail = if failed.is_empty() {
                    format!("{} checks pass", report.checks.len())
                } else {
                    format!("failed: {}", failed.join(", "))
                };
                StageVerdict { stage, pass: failed.is_empty(), detail }
            }
            Stage::Supersolution => {
                let sol = art.solution.as_ref().expect("solve runs first");
                let r = verify_supersolution(sol, cand.as_ref().expect("validated"))?;
                let detail =
                    format!("max LΦ {:e} at {:?}, min Φ {:e}", -r.report.worst_margin, r.report.worst_point, r.phi_min);
                let v = StageVerdict { stage, pass: r.pass(), detail };
                sealed = Some(SealedReport::seal(r.clone()));
                report.supersolution = Some(r);
                v
            }
            Stage::Spectrum => {
                let sol = art.solution.as_ref().expect("solve runs first");
                let asm = assemble(sol);
                let e = min_eigenvalue(&asm, &EigConfig { tol: cfg.eig_tol, ..EigConfig::default() })?;
                let detail = format!(
                    "lambda_min {:e} ({}) after {} iterations",
                    e.lambda_min,
                    if e.lambda_min < 0.0 { "negative direction" } else { "no negative direction" },
                    e.iterations
                );
                report.spectrum = Some(e);
                art.assembly = Some(asm);
                // the estimate is a measurement; convergence is the only pass criterion
                StageVerdict { stage, pass: true, detail }
            }
            Stage::Rigor => {
                let n = cfg.n.expect("validated");
                let mut catalog = builtin_expressions(&CandidateParams::new(n)?)?;
                for spec in standard_claims(n) {
                    report.rigor.push(run_claim(&mut catalog, &spec, &cfg.rigor)?);
                }
                let open: Vec<&str> = report
                    .rigor
                    .iter()
                    .filter(|t| t.result.status != ProofStatus::Proven || t.tail.violations > 0)
                    .map(|t| t.claim.id.as_str())
                    .collect();
                let detail = if open.is_empty() {
                    format!("{} claims proven", report.rigor.len())
                } else {
                    format!("not proven: {}", open.join(", "))
                };
                StageVerdict { stage, pass: open.is_empty(), detail }
            }
            Stage::Certificate => {
                let sol = art.solution.as_ref().expect("solve runs first");
                let s = sealed.as_ref().expect("supersolution runs first");
                match stability_certificate(sol, cand.as_ref().expect("validated"), s) {
                    Ok(c) => {
                        report.certificate = Some(c);
                        StageVerdict { stage, pass: true, detail: "issued".into() }
                    }
                    Err(e) => StageVerdict { stage, pass: false, detail: format!("refused: {e}") },
                }
            }
            Stage::Plots => {
                let sol = art.solution.as_ref().expect("solve runs first");
                art.sign_maps = candidate_sign_maps(sol, cand.as_ref().expect("validated"))?;
                StageVerdict { stage, pass: true, detail: format!("{} sign maps", art.sign_maps.len()) }
            }
        };
        report.run.stage_seconds.insert(stage.name().to_string(), t0.elapsed().as_secs_f64());
        report.passed &= verdict.pass;
        report.verdicts.push(verdict);
    }
    art.report = report;
    Ok(art)
}

fn triangle_field(sol: &SaddleSolution, f: impl Fn(usize, usize, f64, f64) -> f64) -> Field {
    let g = sol.grid;
    Field::from_fn(&g, |i, j| if j == 0 || j >= i || i >= g.n { f64::NAN } else { f(i, j, g.coord(i), g.coord(j)) })
}

/// The six maps behind the candidate's region-by-region argument, keyed by slug.
/// Ratio maps show `ratio − bound`, so `−` marks where the bound holds.
pub fn candidate_sign_maps(
    sol: &SaddleSolution,
    p: &CandidateParams,
) -> Result<Vec<(String, SignMap)>, CandidateError> {
    let g = sol.grid;
    let ok = |r: Result<f64, CandidateError>| r.unwrap_or(f64::NAN);
    let ct = triangle_field(sol, |_, _, s, t| ok(ct_over_cs(s, t, p)) - 0.9);
    let gap = triangle_field(sol, |_, _, s, t| if t > s / 10.0 { ok(css_over_gap(s, t, p)) - 1.0 } else { f64::NAN });
    let tr = triangle_field(sol, |_, _, s, t| {
        if region_classify(s, t) != Region::E1 {
            return f64::NAN;
        }
        let r = t_ratio_r_values(s, t, p)[0];
        // an undefined ratio counts against the claim
        t_ratio(s, t, r, p).map_or(f64::INFINITY, |v| v - 1.0)
    });
    let l = l_phi(sol, p)?;
    let le1 =
        triangle_field(sol, |i, j, s, t| if region_classify(s, t) == Region::E1 { l.get(i, j) } else { f64::NAN });
    let mut e3 = triangle_field(sol, |_, _, _, _| f64::NAN);
    for i in 2..g.n {
        let s = g.coord(i);
        let mut utt_star = f64::INFINITY;
        for j in 1..i {
            let t = g.coord(j);
            if t > 0.5 {
                break;
            }
            utt_star = utt_star.min(sol.u_tt.get(i, j));
            let c = coefficients(s, t, p)?;
            let lhs = (2.0 * (c.c_s - c.c_t) * t * utt_star).abs();
            e3.set(i, j, lhs - l_phi0(s, t, sol.u.get(i, j), p).abs());
        }
    }
    let ctt = triangle_field(
        sol,
        |_, _, s, t| if t > 0.5 { coefficients(s, t, p).map_or(f64::NAN, |c| c.c_tt) } else { f64::NAN },
    );
    let n = p.n;
    Ok(vec![
        ("ct_over_cs".into(), sign_map(&ct, &g, 0.0, &format!("C_t/C_s − 0.9, n = {n}"))),
        ("css_over_gap".into(), sign_map(&gap, &g, 0.0, &format!("C_ss/(C_st − C_tt) − 1 on t > s/10, n = {n}"))),
        ("t_ratio".into(), sign_map(&tr, &g, 0.0, &format!("T(1 − λ) − 1 on E1, n = {n}"))),
        (
            "l_phi_e1".into(),
            sign_map(&le1, &g, crate::verifier_grid::SUPERSOLUTION_TOL, &format!("LΦ₀ + LΦ₁ on E1, n = {n}")),
        ),
        ("e3_bound".into(), sign_map(&e3, &g, 0.0, &format!("|2(C_s − C_t)t·u_tt*| − |LΦ₀| on E3, n = {n}"))),
        ("c_tt".into(), sign_map(&ctt, &g, 0.0, &format!("C_tt on t > 1/2, n = {n}"))),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Export {
    Report,
    Fields,
    SignMaps,
    Eigenvector,
}

/// Writes one export kind into `dir` and returns the paths written.
pub fn export(art: &RunArtifacts, what: Export, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let mut put = |name: String, text: String| -> Result<(), IoError> {
        let p = dir.join(name);
        fs::write(&p, text)?;
        out.push(p);
        Ok(())
    };
    match what {
        Export::Report => put("report.json".into(), art.report.to_json()?)?,
        Export::Fields => {
            let sol = art.solution.as_ref().ok_or_else(|| IoError::EmptyStage("fields need the solve stage".into()))?;
            let named: Vec<(&str, &Field)> = vec![
                ("u", &sol.u),
                ("u_s", &sol.u_s),
                ("u_t", &sol.u_t),
                ("u_ss", &sol.u_ss),
                ("u_st", &sol.u_st),
                ("u_tt", &sol.u_tt),
            ];
            put("fields.csv".into(), fields_to_csv(&sol.grid, &named)?)?;
        }
        Export::SignMaps => {
            if art.sign_maps.is_empty() {
                return Err(IoError::EmptyStage("sign maps need the plots stage".into()));
            }
            for (slug, m) in &art.sign_maps {
                put(format!("{slug}.svg"), m.to_svg())?;
                put(format!("{slug}.csv"), m.to_csv())?;
            }
        }
        Export::Eigenvector => {
            let (Some(a), Some(e)) = (&art.assembly, &art.report.spectrum) else {
                return Err(IoError::EmptyStage("eigenvector needs the spectrum stage".into()));
            };
            put("eigenvector.csv".into(), eigenvector_csv(a, e))?;
        }
    }
    Ok(out)
}
