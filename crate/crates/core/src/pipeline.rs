//! Batch pipeline behind the `simcensus` binary: parse a spec, build the
//! generators, close the span, run the witness induction and the census, and
//! emit a machine-readable report.
//!
//! Exit codes separate three kinds of failure:
//!
//! * `1` - a verification check failed; the report is still written, with the
//!   failure details;
//! * `2` - bad input or configuration;
//! * `3` - internal consistency failure: the pipeline produced something the
//!   construction guarantees cannot happen, i.e. an implementation bug.

use crate::census::{self, CensusReport};
use crate::closure::{self, Membership, SubalgebraBasis};
use crate::model::{build_generators, SpecEntryInput, SupportSpec};
use crate::scalar::{FieldConfig, Scalar};
use crate::witness::{self, LeadingFactor, WitnessError, WitnessLedger};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Clone, Debug)]
pub enum SpecSource {
    Inline(String),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaSource {
    Default,
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerificationLevel {
    /// Closure and census only.
    Fast,
    /// Adds the witness induction and the matrix-unit cross-oracle.
    Full,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec: SpecSource,
    pub field: FieldConfig,
    pub lambda: LambdaSource,
    pub leading_factor: LeadingFactor,
    pub level: VerificationLevel,
    /// Relation-probe bound; defaults to `2 * max(S)`, capped by the
    /// invariant `probe_max <= 10 * max(S)`.
    pub probe_max: Option<usize>,
    /// Report destination; `None` leaves writing to the caller.
    pub out: Option<PathBuf>,
    pub threads: usize,
}

impl RunConfig {
    pub fn new(spec: SpecSource) -> Self {
        RunConfig {
            spec,
            field: FieldConfig::Q,
            lambda: LambdaSource::Default,
            leading_factor: LeadingFactor::Standard,
            level: VerificationLevel::Full,
            probe_max: None,
            out: None,
            threads: 1,
        }
    }

    pub fn inline(spec: &str) -> Self {
        Self::new(SpecSource::Inline(spec.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub corner: String,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeEntry {
    pub i: usize,
    pub support: Vec<usize>,
}

/// `int` when computed, the string `"skipped"` in positive characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum RadicalDim {
    Computed(usize),
    Skipped(&'static str),
}

fn serialize_pairs<S: Serializer, V: Serialize>(
    pairs: &[(String, V)],
    ser: S,
) -> Result<S::Ok, S::Error> {
    let mut map = ser.serialize_map(Some(pairs.len()))?;
    for (k, v) in pairs {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

/// The report file. Field order is the serialization order; all numbers are
/// exact (corner values are decimal or `p/q` strings, never floats).
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub spec: serde_json::Value,
    pub field: FieldConfig,
    pub dim_expected: usize,
    pub dim_closure: usize,
    #[serde(serialize_with = "serialize_pairs")]
    pub witnesses: Vec<(String, WitnessSummary)>,
    pub census: BTreeMap<usize, usize>,
    pub radical_dim: RadicalDim,
    pub center_dim: usize,
    pub relation_probes: Vec<ProbeEntry>,
    pub checks_passed: bool,
    pub failures: Vec<String>,
    /// Scope statement for the census claims.
    pub note: &'static str,
    /// Unix seconds; excluded, together with `timings_ms`, from the
    /// byte-for-byte determinism guarantee.
    pub timestamp: u64,
    pub timings_ms: BTreeMap<&'static str, u64>,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-oriented summary lines for stdout.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        lines.push(format!(
            "field {}, dimension {} expected / {} closed",
            match &self.field {
                FieldConfig::Q => "Q".to_string(),
                FieldConfig::Fp(p) => format!("F_{p}"),
            },
            self.dim_expected,
            self.dim_closure,
        ));
        let census: Vec<String> = self
            .census
            .iter()
            .map(|(n, a)| format!("{n} -> {a}"))
            .collect();
        lines.push(format!(
            "census (dimension -> simple modules): {}",
            if census.is_empty() { "unverified".to_string() } else { census.join(", ") }
        ));
        lines.push(format!(
            "radical {}, center {}",
            match self.radical_dim {
                RadicalDim::Computed(r) => r.to_string(),
                RadicalDim::Skipped(_) => "skipped".to_string(),
            },
            self.center_dim
        ));
        if !self.witnesses.is_empty() {
            lines.push(format!("witness components verified: {}", self.witnesses.len()));
        }
        for f in &self.failures {
            lines.push(format!("FAIL: {f}"));
        }
        lines.push(format!(
            "checks passed: {} ({} ms)",
            self.checks_passed,
            self.timings_ms.get("total").copied().unwrap_or(0)
        ));
        lines
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Option<Report>,
    /// Set for exit codes 2 and 3 (and echoed in `report.failures` when a
    /// report exists).
    pub error: Option<String>,
}

/// Atomic write: temp file in the destination directory, then rename.
pub fn write_report_atomic(report: &Report, path: &Path) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(report.to_json_string().as_bytes())?;
    tmp.write_all(b"\n")?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Parses the `--field` argument grammar: `q` or `fp:<prime>`.
pub fn parse_field_arg(text: &str) -> Result<FieldConfig, String> {
    let lower = text.trim().to_ascii_lowercase();
    if lower == "q" {
        return Ok(FieldConfig::Q);
    }
    if let Some(p) = lower.strip_prefix("fp:") {
        let p: u64 = p
            .parse()
            .map_err(|_| format!("invalid prime in field {text:?}"))?;
        return Ok(FieldConfig::Fp(p));
    }
    Err(format!("field must be `q` or `fp:<prime>`, got {text:?}"))
}

/// Loads and validates the spec named by the config, applying the lambda
/// override file if any.
pub fn resolve_spec(config: &RunConfig) -> Result<SupportSpec, String> {
    let spec = match &config.spec {
        SpecSource::Inline(text) => {
            SupportSpec::parse_inline(config.field, text).map_err(|e| e.to_string())?
        }
        SpecSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            SupportSpec::from_json(&text).map_err(|e| e.to_string())?
        }
    };
    match &config.lambda {
        LambdaSource::Default => Ok(spec),
        LambdaSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let overrides: BTreeMap<usize, Vec<String>> =
                serde_json::from_str(&text).map_err(|e| format!("lambda file: {e}"))?;
            apply_lambda_overrides(&spec, &overrides)
        }
    }
}

fn apply_lambda_overrides(
    spec: &SupportSpec,
    overrides: &BTreeMap<usize, Vec<String>>,
) -> Result<SupportSpec, String> {
    let field = spec.field();
    for n in overrides.keys() {
        if spec.entry(*n).is_none() {
            return Err(format!("lambda file names dimension {n}, which the spec lacks"));
        }
    }
    let mut inputs = Vec::new();
    for entry in spec.entries() {
        let lambdas = match overrides.get(&entry.n) {
            Some(strings) => {
                let parsed: Result<Vec<Scalar>, _> =
                    strings.iter().map(|s| Scalar::parse(field, s)).collect();
                Some(parsed.map_err(|e| e.to_string())?)
            }
            None => Some(entry.lambdas.clone()),
        };
        inputs.push(SpecEntryInput { n: entry.n, multiplicity: entry.multiplicity, lambdas });
    }
    SupportSpec::new(field, inputs).map_err(|e| e.to_string())
}

/// Solves each matrix unit directly in the closure basis and compares against
/// the ledger's construction. Any discrepancy is an implementation bug.
fn cross_oracle_units(
    spec: &Arc<SupportSpec>,
    basis: &SubalgebraBasis,
    ledger: &WitnessLedger,
) -> Result<(), String> {
    for c in spec.components() {
        let w = ledger
            .get(c)
            .ok_or_else(|| format!("ledger is missing component {c}"))?;
        for j in 1..=c.n {
            for k in 1..=c.n {
                let direct = crate::model::BlockElement::matrix_unit(spec, c.n, c.i, j, k)
                    .map_err(|e| e.to_string())?;
                match basis.contains(&direct).map_err(|e| e.to_string())? {
                    Membership::In { coefficients } => {
                        let solved = basis.element_from_certificate(&coefficients);
                        if solved != direct || w.unit(j, k) != &direct {
                            return Err(format!(
                                "matrix unit E_{j}{k} at {c}: basis solve and induction disagree"
                            ));
                        }
                    }
                    Membership::Out { residue_coord } => {
                        return Err(format!(
                            "matrix unit E_{j}{k} at {c} is not in the closure span \
                             (residue at {residue_coord})"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn config_error(message: String) -> RunOutcome {
    RunOutcome { exit_code: 2, report: None, error: Some(message) }
}

/// Options for running the verification on an already-parsed spec, e.g. from
/// embedding APIs that hold a `SupportSpec` directly.
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub leading_factor: LeadingFactor,
    pub level: VerificationLevel,
    pub probe_max: Option<usize>,
    pub threads: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            leading_factor: LeadingFactor::Standard,
            level: VerificationLevel::Full,
            probe_max: None,
            threads: 1,
        }
    }
}

/// Runs closure, witness induction and census on a parsed spec.
pub fn verify_spec(spec: &Arc<SupportSpec>, opts: &VerifyOptions) -> RunOutcome {
    if opts.threads == 0 {
        return config_error("--threads must be at least 1".into());
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => return config_error(format!("thread pool: {e}")),
    };
    let mut timings = BTreeMap::new();
    timings.insert("parse", 0);
    pool.install(|| run_in_pool(spec, opts, timings, Instant::now()))
}

/// Runs the whole pipeline. Never panics on bad input; the outcome carries
/// the exit code, the report (when one could be produced) and an error
/// message for configuration or internal failures. When `config.out` names a
/// path the report is also written there atomically.
pub fn run(config: &RunConfig) -> RunOutcome {
    if config.threads == 0 {
        return config_error("--threads must be at least 1".into());
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => return config_error(format!("thread pool: {e}")),
    };
    let total_start = Instant::now();
    let mut timings: BTreeMap<&'static str, u64> = BTreeMap::new();

    let parse_start = Instant::now();
    let spec = match resolve_spec(config) {
        Ok(s) => Arc::new(s),
        Err(message) => return config_error(message),
    };
    timings.insert("parse", parse_start.elapsed().as_millis() as u64);

    let opts = VerifyOptions {
        leading_factor: config.leading_factor,
        level: config.level,
        probe_max: config.probe_max,
        threads: config.threads,
    };
    let outcome = pool.install(|| run_in_pool(&spec, &opts, timings, total_start));

    if let (Some(path), Some(report)) = (&config.out, &outcome.report) {
        if let Err(e) = write_report_atomic(report, path) {
            return RunOutcome {
                exit_code: 2,
                report: outcome.report,
                error: Some(format!("cannot write report to {}: {e}", path.display())),
            };
        }
    }
    outcome
}

fn run_in_pool(
    spec: &Arc<SupportSpec>,
    config: &VerifyOptions,
    mut timings: BTreeMap<&'static str, u64>,
    total_start: Instant,
) -> RunOutcome {

    let max_n = spec.max_n();
    let probe_max = config.probe_max.unwrap_or(2 * max_n);
    if probe_max < 1 || probe_max > 10 * max_n {
        return config_error(format!(
            "--probe-max {probe_max} is outside [1, {}]",
            10 * max_n
        ));
    }

    let gen_start = Instant::now();
    let (_, e, sigma) = build_generators(spec);
    timings.insert("generators", gen_start.elapsed().as_millis() as u64);

    let closure_start = Instant::now();
    let basis = match closure::generate(spec, &[e.clone(), sigma.clone()], true) {
        Ok(b) => b,
        Err(err) => {
            return RunOutcome {
                exit_code: 3,
                report: None,
                error: Some(format!("closure generation failed: {err}")),
            }
        }
    };
    timings.insert("closure", closure_start.elapsed().as_millis() as u64);

    let mut failures = Vec::new();
    let mut internal_error: Option<String> = None;

    let witness_start = Instant::now();
    let ledger = match config.level {
        VerificationLevel::Fast => None,
        VerificationLevel::Full => {
            match witness::run_induction(spec, &e, &sigma, &basis, config.leading_factor) {
                Ok(l) => {
                    if let Err(msg) = cross_oracle_units(spec, &basis, &l) {
                        internal_error = Some(msg);
                    }
                    Some(l)
                }
                Err(err) => {
                    match classify_witness_error(&err, config.leading_factor) {
                        WitnessFailureClass::Verification => failures.push(err.to_string()),
                        WitnessFailureClass::Internal => internal_error = Some(err.to_string()),
                    }
                    None
                }
            }
        }
    };
    timings.insert("witness", witness_start.elapsed().as_millis() as u64);

    let census_start = Instant::now();
    let census_report = match census::full_census(spec, &basis, ledger.as_ref(), probe_max) {
        Ok(r) => r,
        Err(err) => {
            return RunOutcome {
                exit_code: 3,
                report: Some(partial_report(spec, &basis, &failures, &err.to_string(), timings)),
                error: Some(err.to_string()),
            }
        }
    };
    timings.insert("census", census_start.elapsed().as_millis() as u64);
    timings.insert("total", total_start.elapsed().as_millis() as u64);

    failures.extend(census_report.failures.iter().cloned());
    if let Some(msg) = &internal_error {
        failures.push(msg.clone());
    }

    let report = assemble_report(spec, &census_report, ledger.as_ref(), failures, timings);

    let exit_code = if internal_error.is_some() {
        3
    } else if report.checks_passed {
        0
    } else {
        1
    };

    RunOutcome { exit_code, report: Some(report), error: internal_error }
}

enum WitnessFailureClass {
    /// Reported in the report with exit 1: the math of the *requested
    /// variant* failed, which for the paper-literal leading factor is an
    /// expected, documentable outcome.
    Verification,
    /// Exit 3: the standard construction can only fail through a bug.
    Internal,
}

fn classify_witness_error(err: &WitnessError, leading: LeadingFactor) -> WitnessFailureClass {
    match err {
        WitnessError::SeparatorSupport { .. } | WitnessError::Precondition { .. }
            if leading == LeadingFactor::Paper =>
        {
            WitnessFailureClass::Verification
        }
        _ => WitnessFailureClass::Internal,
    }
}

fn assemble_report(
    spec: &Arc<SupportSpec>,
    census: &CensusReport,
    ledger: Option<&WitnessLedger>,
    failures: Vec<String>,
    timings: BTreeMap<&'static str, u64>,
) -> Report {
    let witnesses: Vec<(String, WitnessSummary)> = match ledger {
        None => Vec::new(),
        Some(l) => l
            .components()
            .map(|w| {
                (
                    w.component().to_string(),
                    WitnessSummary { corner: w.corner().to_string(), verified: true },
                )
            })
            .collect(),
    };
    let checks_passed = failures.is_empty();
    Report {
        spec: spec.to_json_value(),
        field: spec.field(),
        dim_expected: census.dim_expected,
        dim_closure: census.dim_closure,
        witnesses,
        census: census.verified.clone(),
        radical_dim: match census.radical_dim {
            Some(r) => RadicalDim::Computed(r),
            None => RadicalDim::Skipped("skipped"),
        },
        center_dim: census.center_dim,
        relation_probes: census
            .relation_probes
            .iter()
            .map(|(i, support)| ProbeEntry { i: *i, support: support.clone() })
            .collect(),
        checks_passed,
        failures,
        note: census::COMPLETENESS_NOTE,
        timestamp: now_unix(),
        timings_ms: timings,
    }
}

/// Best-effort report when the census itself errored out.
fn partial_report(
    spec: &Arc<SupportSpec>,
    basis: &SubalgebraBasis,
    failures: &[String],
    error: &str,
    timings: BTreeMap<&'static str, u64>,
) -> Report {
    let mut failures = failures.to_vec();
    failures.push(error.to_string());
    Report {
        spec: spec.to_json_value(),
        field: spec.field(),
        dim_expected: spec.dimension(),
        dim_closure: basis.dimension(),
        witnesses: Vec::new(),
        census: BTreeMap::new(),
        radical_dim: RadicalDim::Skipped("skipped"),
        center_dim: 0,
        relation_probes: Vec::new(),
        checks_passed: false,
        failures,
        note: census::COMPLETENESS_NOTE,
        timestamp: now_unix(),
        timings_ms: timings,
    }
}
