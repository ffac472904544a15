//! Subcommands of the `commlab` binary. Each run renders one report that
//! embeds its full configuration, so `commlab rerun <report>` reproduces it
//! byte for byte.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use commlab::algebra::{verify_free_commutator_identity, CommutatorIdentityCheck};
use commlab::cstar::{
    bundled_catalog, commutator_ineq_check, gamma_filter, group_closure, heisenberg_irrep, parse_catalog, ClosureOutcome,
    FilterReport, NonClosureReason, DEFAULT_CLOSURE_CAP, DEFAULT_MERGE_EPS,
};
use commlab::dynamics::{
    decay_curve_exact, decay_curve_matrix_seeded, find_small_element, DecayReport, SmallElement, DEFAULT_MATRIX_SLACK,
    DEFAULT_N_MAX,
};
use commlab::matrix_model::{freeness_report, sample_haar};
use commlab::pu_n::{bundled_rep_catalog, dihedral_chain_demo, least_dimension_criterion, parse_rep_catalog, CriterionVerdict, DihedralChain};
use commlab::rng::derive_seed;
use commlab::word::{enumerate_mixed_words, is_mixed_identity, FiniteGroup, MixedIdentityVerdict, MixedWord};
use commlab::Complex;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status of a run whose mathematical check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit status of a usage or input error.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "commlab", version, about = "Reproducible checks of commutator contraction in tracial algebras and unitary groups")]
pub struct Cli {
    /// Master seed; every random draw of the run derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report format. CSV is only available for `dynamics`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Reports do not depend on it and do not record it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: TopLevel,
}

#[derive(Subcommand, Debug)]
pub enum TopLevel {
    #[command(flatten)]
    Run(Command),
    /// Re-execute the configuration embedded in a report.
    Rerun(RerunArgs),
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    /// A JSON or CSV report written by commlab.
    pub report: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Exact,
    Matrix,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Check τ(uvu*v*) = 1 − (1−α²)(1−β²) and τ(uv) = τ(u)τ(v) by exact expansion over a grid.
    VerifyIdentity(VerifyIdentityArgs),
    /// Decay of ℓ(w_n) along the iterated commutators w_{n+1} = [w_n, yⁿxy⁻ⁿ].
    Dynamics(DynamicsArgs),
    /// First iterated commutator with ℓ(w_n) < ε in the exact model.
    SmallElement(SmallElementArgs),
    /// Product and commutator trace rules for independent Haar unitaries.
    Freeness(FreenessArgs),
    /// ‖1 − [U,V]‖ ≤ 2‖1 − U‖‖1 − V‖ for seeded Haar pairs.
    Compact(CompactArgs),
    /// Clock and shift matrices: lengths and the scalar commutator.
    Heisenberg(HeisenbergArgs),
    /// Closure of each catalog group and its small-element subgroup Γ_t.
    Zassenhaus(ZassenhausArgs),
    /// Irreducibility and the least-dimension criterion for finite subgroups of PU(n).
    Pun(PunArgs),
    /// Mixed identities of a finite group.
    Mif(MifArgs),
}

fn default_grid() -> Vec<f64> {
    vec![0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75, 0.9]
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyIdentityArgs {
    /// Traces of u, comma separated, each in (−1, 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = default_grid())]
    pub alphas: Vec<f64>,
    /// Traces of v, comma separated, each in (−1, 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = default_grid())]
    pub betas: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsArgs {
    /// Trace of u.
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = Model::Exact)]
    pub model: Model,
    /// Matrix dimension for the matrix model.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Bound slack for the matrix model [default: 0.05].
    #[arg(long)]
    pub slack: Option<f64>,
    /// Refuse α ≤ 3/4, where the chain need not contract.
    #[arg(long)]
    pub require_contraction: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallElementArgs {
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreenessArgs {
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Largest acceptable deviation from either rule.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergArgs {
    /// Dimensions 2..=n-max.
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZassenhausArgs {
    /// Generator catalog (JSON); the bundled catalog when omitted.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Length threshold of the filter.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
    pub cap: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunArgs {
    /// Representation catalog (JSON); the bundled catalog when omitted.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Rotation order of the first dihedral group.
    #[arg(long, default_value_t = 6)]
    pub n0: usize,
    /// Number of doublings.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MifArgs {
    /// cyclic-N, symmetric-N, alternating-N, dihedral-N, quaternion, klein-four, or a table file.
    #[arg(long, default_value = "symmetric-3")]
    pub group: String,
    /// Largest total t-degree Σ|eᵢ| of the enumerated words.
    #[arg(long, default_value_t = 2)]
    pub depth: u64,
    /// Also test this word, written like `t . (12) . t^-1 . (12)`.
    #[arg(long)]
    pub word: Option<String>,
    /// Stop enumerating after this many words.
    #[arg(long, default_value_t = 100_000)]
    pub limit: usize,
}

/// Everything that determines a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub format: Format,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn new(command: Command, seed: u64, format: Format, out: Option<&Path>) -> Self {
        Self { command, seed, format, out: out.map(|p| p.display().to_string()) }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<commlab::Error> for CliError {
    fn from(e: commlab::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A rendered report and whether its checks passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub passed: bool,
}

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    passed: bool,
    result: R,
}

fn render_json<R: Serialize>(config: &RunConfig, passed: bool, result: R) -> Rendered {
    let report = Report { version: VERSION, config, passed, result };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable");
    text.push('\n');
    Rendered { text, passed }
}

pub fn execute(config: &RunConfig) -> Result<Rendered, CliError> {
    if config.format == Format::Csv && !matches!(config.command, Command::Dynamics(_)) {
        return Err(usage("CSV output is only available for dynamics"));
    }
    match &config.command {
        Command::VerifyIdentity(a) => verify_identity(config, a),
        Command::Dynamics(a) => dynamics(config, a),
        Command::SmallElement(a) => small_element(config, a),
        Command::Freeness(a) => freeness(config, a),
        Command::Compact(a) => compact(config, a),
        Command::Heisenberg(a) => heisenberg(config, a),
        Command::Zassenhaus(a) => zassenhaus(config, a),
        Command::Pun(a) => pun(config, a),
        Command::Mif(a) => mif(config, a),
    }
}

#[derive(Serialize)]
struct IdentityResult {
    max_deviation: f64,
    max_product_rule_deviation: f64,
    checks: Vec<CommutatorIdentityCheck>,
}

fn verify_identity(config: &RunConfig, a: &VerifyIdentityArgs) -> Result<Rendered, CliError> {
    if a.alphas.is_empty() || a.betas.is_empty() {
        return Err(usage("empty grid"));
    }
    if let Some(x) = a.alphas.iter().chain(&a.betas).find(|x| !(x.abs() < 1.0)) {
        return Err(usage(format!("grid value {x} is outside (-1, 1)")));
    }
    let pairs: Vec<(f64, f64)> = a.alphas.iter().flat_map(|&x| a.betas.iter().map(move |&y| (x, y))).collect();
    let checks = pairs
        .par_iter()
        .map(|&(x, y)| verify_free_commutator_identity(x, y))
        .collect::<commlab::Result<Vec<_>>>()?;
    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let max_product_rule_deviation = checks.iter().map(|c| c.product_rule_deviation).fold(0.0, f64::max);
    let passed = max_deviation <= a.tol && max_product_rule_deviation <= a.tol;
    Ok(render_json(config, passed, IdentityResult { max_deviation, max_product_rule_deviation, checks }))
}

fn dynamics(config: &RunConfig, a: &DynamicsArgs) -> Result<Rendered, CliError> {
    if a.require_contraction && !(a.alpha > 0.75) {
        return Err(usage(format!("--require-contraction needs alpha > 3/4, got {}", a.alpha)));
    }
    if a.n_max == 0 {
        return Err(usage("--n-max must be at least 1"));
    }
    let (report, passed): (DecayReport, bool) = match a.model {
        Model::Exact => {
            let r = decay_curve_exact(a.alpha, a.n_max)?;
            let ok = r.all_in_bounds();
            (r, ok)
        }
        Model::Matrix => {
            let slack = a.slack.unwrap_or(DEFAULT_MATRIX_SLACK);
            (decay_curve_matrix_seeded(a.alpha, a.n, config.seed, a.n_max, slack)?, true)
        }
    };
    Ok(match config.format {
        Format::Json => render_json(config, passed, report),
        Format::Csv => {
            let header = serde_json::to_string(config).expect("serializable");
            let text = format!("# commlab {VERSION}\n# config: {header}\n# passed: {passed}\n{}", report.to_csv());
            Rendered { text, passed }
        }
    })
}

fn small_element(config: &RunConfig, a: &SmallElementArgs) -> Result<Rendered, CliError> {
    let found: SmallElement = find_small_element(a.alpha, a.epsilon)?;
    let passed = found.ell < a.epsilon;
    Ok(render_json(config, passed, found))
}

#[derive(Serialize)]
struct FreenessTrial {
    trial: usize,
    seed: u64,
    d1: f64,
    d2: f64,
    pass: bool,
}

fn freeness(config: &RunConfig, a: &FreenessArgs) -> Result<Rendered, CliError> {
    if a.n == 0 || a.trials == 0 {
        return Err(usage("--n and --trials must be positive"));
    }
    let mut rows = Vec::with_capacity(a.trials);
    for trial in 0..a.trials {
        let seed = derive_seed(config.seed, trial as u64);
        let u = sample_haar::<f64>(a.n, derive_seed(seed, 0))?;
        let v = sample_haar::<f64>(a.n, derive_seed(seed, 1))?;
        let r = freeness_report(&u, &v)?;
        rows.push(FreenessTrial { trial, seed, d1: r.d1, d2: r.d2, pass: r.d1 <= a.tol && r.d2 <= a.tol });
    }
    let passed = rows.iter().all(|r| r.pass);
    Ok(render_json(config, passed, rows))
}

#[derive(Serialize)]
struct CompactResult {
    trials: usize,
    violations: Vec<usize>,
    /// Smallest `2ℓ(U)ℓ(V) − ℓ([U,V])` over the trials.
    min_margin: f64,
    /// Largest `ℓ([U,V]) / (2ℓ(U)ℓ(V))`.
    max_ratio: f64,
}

fn compact(config: &RunConfig, a: &CompactArgs) -> Result<Rendered, CliError> {
    if a.n == 0 || a.trials == 0 {
        return Err(usage("--n and --trials must be positive"));
    }
    let checks = (0..a.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(config.seed, trial as u64);
            let u = sample_haar::<f64>(a.n, derive_seed(seed, 0))?;
            let v = sample_haar::<f64>(a.n, derive_seed(seed, 1))?;
            commutator_ineq_check(&u, &v)
        })
        .collect::<commlab::Result<Vec<_>>>()?;
    let violations: Vec<usize> = checks.iter().enumerate().filter(|(_, c)| c.lhs > c.rhs + a.tol).map(|(k, _)| k).collect();
    let result = CompactResult {
        trials: a.trials,
        min_margin: checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min),
        max_ratio: checks.iter().filter(|c| c.rhs > 0.0).map(|c| c.lhs / c.rhs).fold(0.0, f64::max),
        violations,
    };
    Ok(render_json(config, result.violations.is_empty(), result))
}

#[derive(Serialize)]
struct HeisenbergRow {
    n: usize,
    ell_clock: f64,
    ell_shift: f64,
    min_noncommuting_ell: f64,
    commutator_scalar: Complex<f64>,
    scalar_deviation: f64,
    pass: bool,
}

fn heisenberg(config: &RunConfig, a: &HeisenbergArgs) -> Result<Rendered, CliError> {
    if a.n_max < 2 {
        return Err(usage("--n-max must be at least 2"));
    }
    let rows = (2..=a.n_max)
        .map(|n| {
            let r = heisenberg_irrep::<f64>(n)?;
            let nontrivial = (r.commutator_scalar - Complex::new(1.0, 0.0)).norm() > a.tol;
            let pass = r.min_noncommuting_ell >= 3f64.sqrt() - a.tol && r.scalar_deviation <= a.tol && nontrivial;
            Ok(HeisenbergRow {
                n,
                ell_clock: r.ell_clock,
                ell_shift: r.ell_shift,
                min_noncommuting_ell: r.min_noncommuting_ell,
                commutator_scalar: r.commutator_scalar,
                scalar_deviation: r.scalar_deviation,
                pass,
            })
        })
        .collect::<commlab::Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.pass);
    Ok(render_json(config, passed, rows))
}

fn read_input(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))
}

#[derive(Serialize)]
struct NonClosureSummary {
    reason: NonClosureReason,
    ell_op: f64,
    word: Vec<usize>,
    elements_found: usize,
}

#[derive(Serialize)]
struct ZassenhausEntry {
    name: String,
    closed: bool,
    order: Option<usize>,
    filter: Option<FilterReport>,
    non_closure: Option<NonClosureSummary>,
    /// Closed, and at `t ≤ 1/2` the filter is abelian and normal.
    pass: bool,
}

fn zassenhaus(config: &RunConfig, a: &ZassenhausArgs) -> Result<Rendered, CliError> {
    if !(a.t >= 0.0) {
        return Err(usage("--t must be nonnegative"));
    }
    let catalog = match &a.catalog {
        Some(path) => parse_catalog::<f64>(&read_input(path)?)?,
        None => bundled_catalog::<f64>(),
    };
    let entries = catalog
        .par_iter()
        .map(|entry| {
            Ok(match group_closure(&entry.generators, a.cap, DEFAULT_MERGE_EPS)? {
                ClosureOutcome::Group(g) => {
                    let filter = gamma_filter(&g, a.t);
                    let pass = a.t > 0.5 || (filter.abelian && filter.normal);
                    ZassenhausEntry {
                        name: entry.name.clone(),
                        closed: true,
                        order: Some(g.order()),
                        filter: Some(filter),
                        non_closure: None,
                        pass,
                    }
                }
                ClosureOutcome::NonClosure(w) => ZassenhausEntry {
                    name: entry.name.clone(),
                    closed: false,
                    order: None,
                    filter: None,
                    non_closure: Some(NonClosureSummary {
                        reason: w.reason,
                        ell_op: w.ell_op,
                        word: w.word,
                        elements_found: w.elements_found,
                    }),
                    pass: false,
                },
            })
        })
        .collect::<commlab::Result<Vec<_>>>()?;
    let passed = entries.iter().all(|e| e.pass);
    Ok(render_json(config, passed, entries))
}

#[derive(Serialize)]
struct PunEntry {
    name: String,
    group_order: usize,
    verdict: CriterionVerdict,
}

#[derive(Serialize)]
struct PunResult {
    entries: Vec<PunEntry>,
    dihedral_chain: DihedralChain,
}

fn pun(config: &RunConfig, a: &PunArgs) -> Result<Rendered, CliError> {
    let catalog = match &a.catalog {
        Some(path) => parse_rep_catalog::<f64>(&read_input(path)?)?,
        None => bundled_rep_catalog::<f64>()?,
    };
    let entries = catalog
        .par_iter()
        .map(|e| {
            Ok(PunEntry {
                name: e.name.clone(),
                group_order: e.rep.group().order(),
                verdict: least_dimension_criterion(&e.rep, &e.nontrivial_irrep_dims)?,
            })
        })
        .collect::<commlab::Result<Vec<_>>>()?;
    let chain = dihedral_chain_demo(a.n0, a.k)?;
    let passed = chain.strictly_decreasing && chain.steps.iter().all(|s| s.closed && s.contains_previous);
    Ok(render_json(config, passed, PunResult { entries, dihedral_chain: chain }))
}

/// A builtin group by name, or a multiplication table read from a file.
pub fn resolve_group(spec: &str) -> Result<FiniteGroup, CliError> {
    let sized = |prefix: &str| -> Option<Result<usize, CliError>> {
        spec.strip_prefix(prefix).map(|n| n.parse().map_err(|e| usage(format!("bad size in {spec:?}: {e}"))))
    };
    let group = if let Some(n) = sized("cyclic-") {
        FiniteGroup::cyclic(n?)
    } else if let Some(n) = sized("symmetric-") {
        FiniteGroup::symmetric(n?)
    } else if let Some(n) = sized("alternating-") {
        FiniteGroup::alternating(n?)
    } else if let Some(n) = sized("dihedral-") {
        FiniteGroup::dihedral(n?)
    } else if spec == "quaternion" {
        FiniteGroup::quaternion()
    } else if spec == "klein-four" {
        FiniteGroup::klein_four()
    } else {
        FiniteGroup::from_text(&read_input(spec)?)
    };
    Ok(group?)
}

#[derive(Serialize)]
struct WordVerdict {
    word: String,
    is_identity: bool,
    witness: Option<String>,
    witness_value: Option<String>,
}

#[derive(Serialize)]
struct MifResult {
    order: usize,
    exponent: usize,
    /// `t^exp(G)`, an identity of every group of that exponent.
    exponent_word: WordVerdict,
    words_checked: usize,
    truncated: bool,
    identities_found: usize,
    /// The first identities in enumeration order.
    identities: Vec<String>,
    word: Option<WordVerdict>,
}

const LISTED_IDENTITIES: usize = 100;

fn word_verdict(w: &MixedWord, g: &FiniteGroup) -> WordVerdict {
    let MixedIdentityVerdict { is_identity, witness, witness_value } = is_mixed_identity(w, g);
    WordVerdict {
        word: w.display(g),
        is_identity,
        witness: witness.map(|x| g.label(x).to_string()),
        witness_value: witness_value.map(|x| g.label(x).to_string()),
    }
}

fn mif(config: &RunConfig, a: &MifArgs) -> Result<Rendered, CliError> {
    if a.depth < 1 {
        return Err(usage("--depth must be at least 1"));
    }
    let g = resolve_group(&a.group)?;
    let exponent_word = word_verdict(&MixedWord::t_pow(&g, g.exponent() as i64), &g);
    let (words, truncated) = enumerate_mixed_words(&g, a.depth, a.limit);
    let flags: Vec<bool> = words.par_iter().map(|w| is_mixed_identity(w, &g).is_identity).collect();
    let identities_found = flags.iter().filter(|&&f| f).count();
    let identities = words
        .iter()
        .zip(&flags)
        .filter(|(_, &f)| f)
        .take(LISTED_IDENTITIES)
        .map(|(w, _)| w.display(&g))
        .collect();
    let word = match &a.word {
        Some(text) => Some(word_verdict(&MixedWord::parse(&g, text)?, &g)),
        None => None,
    };
    let passed = exponent_word.is_identity;
    let result = MifResult {
        order: g.order(),
        exponent: g.exponent(),
        exponent_word,
        words_checked: words.len(),
        truncated,
        identities_found,
        identities,
        word,
    };
    Ok(render_json(config, passed, result))
}

/// The configuration embedded in a JSON or CSV report.
pub fn embedded_config(report: &str) -> Result<RunConfig, CliError> {
    let bad = |e: serde_json::Error| usage(format!("malformed embedded config: {e}"));
    if report.trim_start().starts_with('{') {
        #[derive(Deserialize)]
        struct Envelope {
            config: RunConfig,
        }
        let env: Envelope = serde_json::from_str(report).map_err(bad)?;
        return Ok(env.config);
    }
    let line = report
        .lines()
        .find_map(|l| l.strip_prefix("# config: "))
        .ok_or_else(|| usage("no embedded config found"))?;
    serde_json::from_str(line).map_err(bad)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn run_inner(cli: Cli) -> Result<bool, CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(format!("cannot configure {threads} threads: {e}")))?;
    }
    let config = match cli.command {
        TopLevel::Run(command) => RunConfig::new(command, cli.seed, cli.format, cli.out.as_deref()),
        TopLevel::Rerun(r) => embedded_config(&read_input(&r.report.display().to_string())?)?,
    };
    let rendered = execute(&config)?;
    match &cli.out {
        Some(path) => write_atomic(path, &rendered.text)?,
        None => std::io::stdout().write_all(rendered.text.as_bytes())?,
    }
    if !rendered.passed {
        eprintln!("commlab: check failed");
    }
    Ok(rendered.passed)
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match run_inner(cli) {
        Ok(true) => 0,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("commlab: {e}");
            EXIT_USAGE
        }
    }
}
