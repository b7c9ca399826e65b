//! `fsjn` — build, transform, verify, and replay finitely supported
//! signed-measure sequences with exact rational arithmetic.
//!
//! Every run ends with one machine-parseable JSON verdict line on stdout.
//! Exit codes: 0 — all checks passed; 1 — an exact check failed (the failing
//! certificate is printed); 2 — the invocation or input was unusable.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use fsjn_core::cylinder::{coordinate_sign_sequence, CylinderMeasure};
use fsjn_core::functional::TestFunctional;
use fsjn_core::generators;
use fsjn_core::rational::{format_rational, parse_rational, rat};
use fsjn_core::transforms::{self, TransformError, TruncationKeep};
use fsjn_core::SequenceHandle;

mod config;
mod dto;
mod names;
mod reports;
mod seeded;
mod suites;

use config::RunConfig;
use dto::{CylinderElementDto, CylinderFileDto, FileKind, LoadedHandle, CYLINDER_FORMAT};
use names::{GeneratorParams, StageSpec};
use suites::SuiteResult;

/// Errors split by exit code: `Usage` exits 2, `Assertion` exits 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// The invocation, a parameter, or an input file is unusable.
    Usage(String),
    /// An exact check failed; the message carries the failing certificate.
    Assertion(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Assertion(m) => write!(f, "{m}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "fsjn",
    version,
    about = "Exact construction, transformation, and verification of finitely \
             supported signed-measure sequences"
)]
struct Cli {
    /// Sampling window for analyses and materialization.
    #[arg(long, global = true)]
    horizon: Option<u64>,

    /// Cap on the measures eagerly embedded in generated files.
    #[arg(long, global = true)]
    cap: Option<u64>,

    /// Tolerance for windowed tail checks, as an exact fraction.
    #[arg(long, global = true, value_name = "P/Q")]
    tolerance: Option<String>,

    /// Seed for every randomized sweep (recorded in reports).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory where handle files and reports are written.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a catalog sequence and write it as a handle file.
    Generate {
        /// Generator name (run with an unknown name to list the catalog).
        name: String,
        /// Weight parameter for square3, strictly between 0 and 1.
        #[arg(long, value_name = "P/Q")]
        alpha: Option<String>,
        /// Column abscissa for conv-pair.
        #[arg(long, value_name = "P/Q")]
        x: Option<String>,
    },
    /// Apply a pipeline of transform stages to a handle file.
    Transform {
        /// Input handle file.
        input: PathBuf,
        /// Comma-separated stages, each `name` or `name=arg`; commas inside
        /// parentheses do not split. May be repeated.
        #[arg(long, required = true)]
        pipeline: Vec<String>,
    },
    /// Run one verification suite and write its JSON and CSV reports.
    Verify {
        /// Input handle file (not needed by the bollobas suite).
        input: Option<PathBuf>,
        /// One of: balance, limit-sets, l-mass, decay, product-audit, bollobas.
        #[arg(long)]
        suite: String,
        /// Functional family for the decay suite: canonical, cylinders, or an
        /// exact functional name.
        #[arg(long)]
        family: Option<String>,
        /// Deviation parameter for product-audit and bollobas.
        #[arg(long, value_name = "P/Q")]
        eps: Option<String>,
        /// Largest index for the bollobas sweep.
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Run the full analysis battery on a handle file.
    Report {
        /// Input handle file.
        input: PathBuf,
    },
    /// Re-run a file's recorded provenance and compare byte-for-byte.
    Replay {
        /// Input handle file.
        input: PathBuf,
    },
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Generate { .. } => "generate",
        Cmd::Transform { .. } => "transform",
        Cmd::Verify { .. } => "verify",
        Cmd::Report { .. } => "report",
        Cmd::Replay { .. } => "replay",
    }
}

fn main() {
    let cli = Cli::parse();
    let command = command_name(&cli.command);
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let (class, code) = match &e {
                CliError::Usage(_) => ("usage", 2),
                CliError::Assertion(_) => ("assertion", 1),
            };
            eprintln!("error: {e}");
            let verdict = serde_json::json!({
                "command": command,
                "pass": false,
                "error": e.to_string(),
                "errorClass": class,
                "exit": code,
            });
            println!("{verdict}");
            code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(
        cli.horizon,
        cli.cap,
        cli.tolerance.as_deref(),
        cli.seed,
        cli.out,
    )?;
    match &cli.command {
        Cmd::Generate { name, alpha, x } => {
            cmd_generate(&cfg, name, alpha.as_deref(), x.as_deref())
        }
        Cmd::Transform { input, pipeline } => cmd_transform(&cfg, input, pipeline),
        Cmd::Verify { input, suite, family, eps, n_max } => cmd_verify(
            &cfg,
            input.as_deref(),
            suite,
            family.as_deref(),
            eps.as_deref(),
            *n_max,
        ),
        Cmd::Report { input } => cmd_report(&cfg, input),
        Cmd::Replay { input } => cmd_replay(input),
    }
}

// ---------------------------------------------------------------------------
// Verdict line
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Verdict<'a> {
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    subject: Option<&'a str>,
    pass: bool,
    exit: i32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a str>,
}

fn emit_verdict(v: &Verdict) -> Result<i32, CliError> {
    let line = serde_json::to_string(v)
        .map_err(|e| CliError::Usage(format!("verdict serialization: {e}")))?;
    println!("{line}");
    Ok(v.exit)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn stem_of(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("input"))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn seq_usage(e: fsjn_core::seq::SeqError) -> CliError {
    CliError::Usage(e.to_string())
}

fn cmd_generate(
    cfg: &RunConfig,
    name: &str,
    alpha: Option<&str>,
    x: Option<&str>,
) -> Result<i32, CliError> {
    if name == "rademacher" {
        if alpha.is_some() || x.is_some() {
            return Err(usage("--alpha and --x do not apply to 'rademacher'"));
        }
        return generate_cylinder_family(cfg);
    }
    let spec = names::generator_spec(name, &GeneratorParams { alpha, x })?;
    let h = generators::handle(spec).map_err(seq_usage)?;
    let dto = dto::handle_to_dto(&h, cfg.horizon, cfg.materialization_cap, None)?;
    let text = dto::to_canonical_json(&dto)?;
    let path = dto::write_text(&cfg.output_dir, &format!("{name}.json"), &text)?;
    for n in h.indices(cfg.horizon.min(cfg.materialization_cap)) {
        let m = h.at(n).map_err(seq_usage)?;
        println!(
            "n={n} support={} norm={}",
            m.support_size(),
            format_rational(&m.norm())
        );
    }
    emit_verdict(&Verdict {
        command: "generate",
        subject: Some(name),
        pass: true,
        exit: 0,
        outputs: vec![path_str(&path)],
        detail: None,
    })
}

/// Every word of length at most `depth` gets measure exactly zero.
fn vanishes_up_to(m: &CylinderMeasure, depth: usize) -> bool {
    let zero = rat(0, 1);
    for len in 0..=depth {
        for bits in 0..(1u64 << len) {
            let word: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
            if m.eval(&word) != zero {
                return false;
            }
        }
    }
    true
}

/// Checks one coordinate-sign element and renders its row.
fn cylinder_element(n: u64, depth: u64) -> (CylinderElementDto, Option<String>) {
    let m = coordinate_sign_sequence(n);
    let additivity = m.additivity_check(depth as usize);
    let declared = m.declared_norm_check(depth as usize);
    let vanishing_depth = n.min(depth);
    let vanishing_ok = vanishes_up_to(&m, vanishing_depth as usize);
    let mut failure = None;
    if let Err(v) = &additivity {
        failure = Some(format!(
            "element {n}: cylinder value at a word of length {} is {} but its halves sum to {}",
            v.word.len(),
            format_rational(&v.parent),
            format_rational(&v.children_sum)
        ));
    } else if let Err(msg) = &declared {
        failure = Some(format!("element {n}: {msg}"));
    } else if !vanishing_ok {
        failure = Some(format!(
            "element {n} is nonzero on a cylinder of depth at most {vanishing_depth}"
        ));
    }
    let row = CylinderElementDto {
        index: n,
        declared_norm: format_rational(&m.declared_norm),
        additivity_ok: additivity.is_ok(),
        declared_norm_ok: declared.is_ok(),
        vanishing_depth,
        vanishing_ok,
    };
    (row, failure)
}

/// The coordinate-sign family is not atomic, so it is written as a
/// cylinder-family file with its exact checks recorded per element.
fn generate_cylinder_family(cfg: &RunConfig) -> Result<i32, CliError> {
    let depth: u64 = 12;
    let count = cfg.horizon.min(depth);
    let mut elements = Vec::with_capacity(count as usize);
    let mut first_failure: Option<String> = None;
    for n in 0..count {
        let (row, failure) = cylinder_element(n, depth);
        println!(
            "n={n} declaredNorm={} additivity={} normCheck={} vanishingDepth={} vanishing={}",
            row.declared_norm,
            row.additivity_ok,
            row.declared_norm_ok,
            row.vanishing_depth,
            row.vanishing_ok
        );
        if first_failure.is_none() {
            first_failure = failure;
        }
        elements.push(row);
    }
    let all_checks_pass = first_failure.is_none();
    let file = CylinderFileDto {
        format: CYLINDER_FORMAT.to_string(),
        family: String::from("rademacher"),
        count,
        check_depth: depth,
        elements,
        all_checks_pass,
    };
    let text = dto::to_canonical_json(&file)?;
    let path = dto::write_text(&cfg.output_dir, "rademacher.json", &text)?;
    if let Some(f) = &first_failure {
        println!("FAILED: {f}");
    }
    emit_verdict(&Verdict {
        command: "generate",
        subject: Some("rademacher"),
        pass: all_checks_pass,
        exit: i32::from(!all_checks_pass),
        outputs: vec![path_str(&path)],
        detail: first_failure.as_deref(),
    })
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

/// Parameter and oracle problems are usage errors; everything else is a
/// failed exact certificate.
fn transform_class(e: TransformError) -> CliError {
    match e {
        TransformError::InvalidParameter(_)
        | TransformError::OracleRequired
        | TransformError::OracleOscillates
        | TransformError::InvalidWeight(_)
        | TransformError::Seq(_) => CliError::Usage(e.to_string()),
        other => CliError::Assertion(other.to_string()),
    }
}

/// Splits on commas that are not nested inside parentheses, so point
/// arguments like `concentrate=(1/3,0)` survive.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn split_pipeline(args: &[String]) -> Result<Vec<StageSpec>, CliError> {
    let mut stages = Vec::new();
    for arg in args {
        for element in split_top_level(arg) {
            let element = element.trim();
            if element.is_empty() {
                return Err(usage("empty pipeline stage"));
            }
            stages.push(names::parse_stage(element)?);
        }
    }
    Ok(stages)
}

fn apply_stage(
    cfg: &RunConfig,
    h: &SequenceHandle,
    st: &StageSpec,
) -> Result<SequenceHandle, CliError> {
    let horizon = cfg.horizon;
    let parse = |what: &str, s: &str| {
        parse_rational(s).map_err(|e| CliError::Usage(format!("bad {what} argument: {e}")))
    };
    let result = match st.name.as_str() {
        "normalize" => {
            let eps = match &st.arg {
                Some(s) => parse("normalize", s)?,
                None => rat(0, 1),
            };
            transforms::normalize(h, &eps, horizon)
        }
        "truncate" => {
            let keep = match st.arg.as_deref() {
                None | Some("greedy") => TruncationKeep::GreedyLeast,
                Some(s) => {
                    let count: u64 = s.parse().map_err(|_| {
                        usage(format!(
                            "bad truncate argument '{s}': expected 'greedy' or a count"
                        ))
                    })?;
                    TruncationKeep::LargestPerIndex { count }
                }
            };
            transforms::truncate_cs_to_fs(h, &keep, horizon)
        }
        "extract-pointwise" => transforms::extract_pointwise_convergent(h, horizon),
        "restrict-off-limit" => transforms::restrict_renormalize_off_limit(h, horizon),
        "restrict-to-L" => transforms::restrict_to_limit(h, horizon),
        "difference-normalize" => {
            let beta = st.arg.as_deref().ok_or_else(|| {
                usage("difference-normalize needs an inline lower bound, e.g. difference-normalize=1/9")
            })?;
            let beta = parse("difference-normalize", beta)?;
            transforms::difference_normalize(h, &beta, horizon)
        }
        "disjointify" => transforms::disjointify(h, horizon),
        "stabilize" => {
            let grid = match &st.arg {
                Some(s) => parse("stabilize", s)?,
                None => cfg.tolerance.clone(),
            };
            transforms::stabilize_coefficients(h, &grid, horizon)
        }
        "drop-small-atom" => {
            let scale = match &st.arg {
                Some(s) => parse("drop-small-atom", s)?,
                None => rat(1, 1),
            };
            transforms::drop_small_atom(h, &scale, horizon)
        }
        "pair-reduce" => {
            let floor = match &st.arg {
                Some(s) => parse("pair-reduce", s)?,
                None => rat(1, 4),
            };
            transforms::pair_reduce(h, &floor, horizon)
        }
        "concentrate" => {
            let at = st.arg.as_deref().ok_or_else(|| {
                usage("concentrate needs an inline point, e.g. concentrate=(1/3,0)")
            })?;
            let x = dto::parse_point(&h.space, at)?;
            transforms::concentrate_at_isolated(
                h,
                &x,
                &TestFunctional::Const(rat(1, 1)),
                horizon,
            )
        }
        other => return Err(usage(format!("unknown pipeline stage '{other}'"))),
    };
    result.map_err(transform_class)
}

/// The replay base for a loaded file: the recorded base, or the file's own
/// handle when it has no transform history yet.
fn replay_base_of(loaded: &LoadedHandle) -> Option<SequenceHandle> {
    match (&loaded.replay_base, loaded.handle.provenance.is_empty()) {
        (Some(b), _) => Some(b.clone()),
        (None, true) => Some(loaded.handle.clone()),
        (None, false) => None,
    }
}

fn cmd_transform(cfg: &RunConfig, input: &Path, pipeline: &[String]) -> Result<i32, CliError> {
    let stages = split_pipeline(pipeline)?;
    if stages.is_empty() {
        return Err(usage("--pipeline lists no stages"));
    }
    let loaded = dto::read_handle(input)?;
    let base = replay_base_of(&loaded);
    let mut h = loaded.handle.clone();
    let mut applied = Vec::with_capacity(stages.len());
    for st in &stages {
        h = apply_stage(cfg, &h, st)?;
        let step = h.provenance.last().expect("every stage records a step");
        println!("stage {} ok: op={}", st.name, step.op);
        applied.push(st.name.clone());
    }
    let out_dto = dto::handle_to_dto(&h, cfg.horizon, loaded.cap, base.as_ref())?;
    let text = dto::to_canonical_json(&out_dto)?;
    let name = format!("{}-{}.json", stem_of(input), applied.join("-"));
    let path = dto::write_text(&cfg.output_dir, &name, &text)?;
    let input_s = path_str(input);
    emit_verdict(&Verdict {
        command: "transform",
        subject: Some(&input_s),
        pass: true,
        exit: 0,
        outputs: vec![path_str(&path)],
        detail: None,
    })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

const REPORT_FORMAT: &str = "fsjn-report/1";

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportDoc<'a> {
    format: &'static str,
    command: &'a str,
    suite: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: &'a Option<String>,
    #[serde(flatten)]
    body: &'a Value,
}

const SUITES: [&str; 6] =
    ["balance", "limit-sets", "l-mass", "decay", "product-audit", "bollobas"];

/// Re-runs every recorded check of a cylinder-family file from its rule.
fn cylinder_recheck(file: &CylinderFileDto) -> Result<SuiteResult, CliError> {
    if file.family != "rademacher" {
        return Err(usage(format!("unknown cylinder family '{}'", file.family)));
    }
    let mut elements = Vec::with_capacity(file.elements.len());
    let mut detail: Option<String> = None;
    let mut csv = reports::csv_writer();
    reports::write_record(
        &mut csv,
        &[
            "index",
            "declaredNorm",
            "additivityOk",
            "declaredNormOk",
            "vanishingDepth",
            "vanishingOk",
        ],
    )?;
    for recorded in &file.elements {
        let (row, failure) = cylinder_element(recorded.index, file.check_depth);
        if detail.is_none() {
            detail = failure;
        }
        if detail.is_none() && row != *recorded {
            detail = Some(format!(
                "recorded checks for element {} disagree with recomputation",
                recorded.index
            ));
        }
        reports::write_record(
            &mut csv,
            &[
                &row.index.to_string(),
                &row.declared_norm,
                &row.additivity_ok.to_string(),
                &row.declared_norm_ok.to_string(),
                &row.vanishing_depth.to_string(),
                &row.vanishing_ok.to_string(),
            ],
        )?;
        elements.push(row);
    }
    let pass = detail.is_none();
    let body = CylinderFileDto {
        format: file.format.clone(),
        family: file.family.clone(),
        count: file.count,
        check_depth: file.check_depth,
        elements,
        all_checks_pass: pass,
    };
    let body = serde_json::to_value(&body)
        .map_err(|e| CliError::Usage(format!("report serialization: {e}")))?;
    Ok(SuiteResult { name: "decay", body, csv: reports::finish(csv)?, pass, detail })
}

fn cmd_verify(
    cfg: &RunConfig,
    input: Option<&Path>,
    suite: &str,
    family: Option<&str>,
    eps: Option<&str>,
    n_max: Option<u64>,
) -> Result<i32, CliError> {
    if !SUITES.contains(&suite) {
        return Err(usage(format!(
            "unknown suite '{suite}'; expected one of {}",
            SUITES.join(", ")
        )));
    }
    let result = if suite == "bollobas" {
        suites::run_bollobas(cfg, eps, n_max)?
    } else {
        let input =
            input.ok_or_else(|| usage(format!("suite '{suite}' needs an input file")))?;
        match dto::read_file(input)? {
            FileKind::Handle(hdto) => {
                let loaded = dto::handle_from_dto(&hdto)?;
                let h = &loaded.handle;
                match suite {
                    "balance" => suites::run_balance(h, cfg)?,
                    "limit-sets" => suites::run_limit_sets(h, cfg)?,
                    "l-mass" => suites::run_l_mass(h, cfg)?,
                    "decay" => suites::run_decay(h, cfg, family)?,
                    "product-audit" => suites::run_product_audit(h, cfg, eps)?,
                    _ => unreachable!("suite name validated above"),
                }
            }
            FileKind::Cylinders(file) => {
                if suite != "decay" {
                    return Err(usage(
                        "cylinder-family files support only the decay suite",
                    ));
                }
                cylinder_recheck(&file)?
            }
        }
    };
    let base_name = match input {
        Some(p) => format!("{}-{suite}", stem_of(p)),
        None => suite.to_string(),
    };
    let doc = ReportDoc {
        format: REPORT_FORMAT,
        command: "verify",
        suite: result.name,
        input: input.map(path_str),
        pass: result.pass,
        detail: &result.detail,
        body: &result.body,
    };
    let json = dto::to_canonical_json(&doc)?;
    let json_path = dto::write_text(&cfg.output_dir, &format!("{base_name}.report.json"), &json)?;
    let csv_path =
        dto::write_text(&cfg.output_dir, &format!("{base_name}.report.csv"), &result.csv)?;
    if let Some(d) = &result.detail {
        println!("FAILED: {d}");
    }
    let input_s = input.map(path_str);
    emit_verdict(&Verdict {
        command: "verify",
        subject: input_s.as_deref().or(Some(suite)),
        pass: result.pass,
        exit: i32::from(!result.pass),
        outputs: vec![path_str(&json_path), path_str(&csv_path)],
        detail: result.detail.as_deref(),
    })
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn cmd_report(cfg: &RunConfig, input: &Path) -> Result<i32, CliError> {
    let loaded = dto::read_handle(input)?;
    let h = &loaded.handle;
    let mut sections = vec![
        suites::run_balance(h, cfg)?,
        suites::run_limit_sets(h, cfg)?,
        suites::run_decay(h, cfg, None)?,
    ];
    if h.oracle.is_some() {
        sections.push(suites::run_l_mass(h, cfg)?);
    }
    let pass = sections.iter().all(|s| s.pass);
    let stem = stem_of(input);

    let mut body = serde_json::Map::new();
    body.insert(String::from("format"), Value::from(REPORT_FORMAT));
    body.insert(String::from("command"), Value::from("report"));
    body.insert(String::from("input"), Value::from(path_str(input)));
    body.insert(String::from("pass"), Value::from(pass));
    let mut outputs = Vec::new();
    for s in &sections {
        body.insert(s.name.to_string(), s.body.clone());
        let csv_path =
            dto::write_text(&cfg.output_dir, &format!("{stem}-{}.report.csv", s.name), &s.csv)?;
        outputs.push(path_str(&csv_path));
        println!(
            "{}: {}{}",
            s.name,
            if s.pass { "ok" } else { "FAILED" },
            s.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    let json = dto::to_canonical_json(&Value::Object(body))?;
    let json_path = dto::write_text(&cfg.output_dir, &format!("{stem}.report.json"), &json)?;
    outputs.insert(0, path_str(&json_path));

    let detail: Option<String> = sections.iter().find_map(|s| s.detail.clone());
    let input_s = path_str(input);
    emit_verdict(&Verdict {
        command: "report",
        subject: Some(&input_s),
        pass,
        exit: i32::from(!pass),
        outputs,
        detail: detail.as_deref(),
    })
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

fn cmd_replay(input: &Path) -> Result<i32, CliError> {
    let original = std::fs::read_to_string(input)
        .map_err(|e| usage(format!("cannot read {}: {e}", input.display())))?;
    let loaded = dto::read_handle(input)?;
    let base = replay_base_of(&loaded).ok_or_else(|| {
        usage("the file records transform steps but no replay base")
    })?;
    let replayed =
        transforms::replay(&base, &loaded.handle.provenance).map_err(transform_class)?;
    let dto2 = dto::handle_to_dto(
        &replayed,
        loaded.horizon,
        loaded.cap,
        loaded.replay_base.as_ref(),
    )?;
    let text = dto::to_canonical_json(&dto2)?;
    let pass = text == original;
    let detail = if pass {
        println!(
            "replayed {} step(s); serialization is byte-identical",
            loaded.handle.provenance.len()
        );
        None
    } else {
        let line = original
            .lines()
            .zip(text.lines())
            .position(|(a, b)| a != b)
            .map(|i| i + 1)
            .unwrap_or_else(|| original.lines().count().min(text.lines().count()) + 1);
        let d = format!("replayed serialization diverges at line {line}");
        println!("FAILED: {d}");
        Some(d)
    };
    let input_s = path_str(input);
    emit_verdict(&Verdict {
        command: "replay",
        subject: Some(&input_s),
        pass,
        exit: i32::from(!pass),
        outputs: Vec::new(),
        detail: detail.as_deref(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_splitting_respects_parentheses() {
        let parts = split_top_level("disjointify,concentrate=(1/3,0),normalize=1/8");
        assert_eq!(parts, vec!["disjointify", "concentrate=(1/3,0)", "normalize=1/8"]);
        let stages =
            split_pipeline(&[String::from("drop-small-atom,pair-reduce=1/4")]).unwrap();
        assert_eq!(stages.len(), 2);
        assert_eq!(stages[0].name, "drop-small-atom");
        assert_eq!(stages[1].arg.as_deref(), Some("1/4"));
        assert!(split_pipeline(&[String::from("normalize,,truncate")]).is_err());
    }

    #[test]
    fn stage_errors_classify_by_exit_code() {
        let h = generators::handle(fsjn_core::seq::GeneratorSpec::Square1).unwrap();
        let cfg = RunConfig::resolve(Some(8), None, None, None, None).unwrap();
        // invalid parameter → usage
        let st = StageSpec { name: String::from("normalize"), arg: Some(String::from("-1")) };
        match apply_stage(&cfg, &h, &st) {
            Err(CliError::Usage(_)) => {}
            other => panic!("expected usage error, got {other:?}"),
        }
        // a failing certificate → assertion: pair-reduce needs both signs at
        // every index, which square1 does not provide at its origin
        let st = StageSpec { name: String::from("pair-reduce"), arg: None };
        match apply_stage(&cfg, &h, &st) {
            Err(CliError::Assertion(_)) => {}
            other => panic!("expected assertion error, got {other:?}"),
        }
    }
}
