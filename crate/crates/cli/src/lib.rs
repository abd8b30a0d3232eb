//! Command-line front end: `bound`, `analyze`, `worst-case`, `oracle` and
//! `dynamics`.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | the oracle found a bound violation, or an output file could not be written |
//! | 2 | invalid payoff parameters (or a command-line usage error) |
//! | 3 | graph or campaign file could not be read or parsed |
//! | 4 | strategies missing or not matching the graph |
//! | 5 | a generated tight instance failed verification |
//! | 6 | graph too large for exhaustive enumeration |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use netcoord::analysis::{
    decompose, lambda_bound_check, mediant_check, nash_decomposition_check, phi_counting_check,
    poa_upper_bound, BoundReport,
};
use netcoord::dynamics::{run_dynamics, Schedule, Step, DYNAMICS_PRNG};
use netcoord::game::{is_nash, optimal_welfare, quotient, social_welfare, NashReport};
use netcoord::io::{parse_graph_text, GraphDocument};
use netcoord::oracle::{
    exact_poa, verify_bound_campaign, CampaignConfig, CampaignReport, OracleResult, DEFAULT_CAP,
};
use netcoord::rational::{display_with_approx, parse_rational, serde_opt_str, serde_str};
use netcoord::worst_case::{worst_case_report, WorstCaseReport};
use netcoord::{classify_edges, EdgeState, Error, Graph, Params, Profile, Rational, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "netcoord",
    version,
    about = "Price of anarchy in networked coordination games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form price-of-anarchy upper bound for (alpha, beta, gamma).
    Bound {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Welfare, equilibrium status, decomposition and lemma checks for a
    /// graph with strategies.
    Analyze {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Build an equilibrium that attains the bound exactly.
    WorstCase {
        #[command(flatten)]
        params: ParamArgs,
        /// Write the instance (graph JSON with strategies) here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exhaustive equilibrium enumeration: one graph, or a random campaign.
    Oracle(OracleArgs),
    /// Strict best-response dynamics from the file's strategies (all-B if
    /// the file has none).
    Dynamics {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "round-robin")]
        schedule: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Payoff of an A–A edge (`p`, `p/q` or decimal).
    #[arg(short = 'a', long, allow_hyphen_values = true)]
    pub alpha: String,
    /// Payoff of a B–B edge.
    #[arg(short = 'b', long, allow_hyphen_values = true)]
    pub beta: String,
    /// Payoff of a mixed edge.
    #[arg(short = 'g', long, allow_hyphen_values = true)]
    pub gamma: String,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Graph file to enumerate.
    #[arg(long, conflicts_with_all = ["campaign", "num_graphs"])]
    pub graph: Option<PathBuf>,
    /// Campaign config JSON: num_graphs, n, edge_probability, params_list, seed.
    #[arg(long, conflicts_with = "num_graphs")]
    pub campaign: Option<PathBuf>,
    /// Inline campaign: number of G(n, p) graphs.
    #[arg(long, requires = "nodes")]
    pub num_graphs: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, default_value = "1/2")]
    pub edge_probability: String,
    #[arg(short = 'a', long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(short = 'b', long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(short = 'g', long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    /// Include wall time in the campaign report (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParams(_) => 2,
            Error::Parse(_)
            | Error::DuplicateNode(_)
            | Error::DuplicateEdge(..)
            | Error::SelfLoop(_)
            | Error::UnknownEndpoint(_)
            | Error::EmptyGraph => 3,
            Error::ProfileMismatch(_) | Error::UnknownNode(_) => 4,
            Error::InternalRealizationFailure(_) => 5,
            Error::TooLarge { .. } => 6,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

/// What a command printed and the exit code it asks for.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Bound { params, format } => cmd_bound(&params, format),
        Command::Analyze {
            graph,
            params,
            format,
        } => cmd_analyze(&graph, &params, format),
        Command::WorstCase {
            params,
            out,
            format,
        } => cmd_worst_case(&params, out.as_deref(), format),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Dynamics {
            graph,
            params,
            schedule,
            seed,
            format,
        } => cmd_dynamics(&graph, &params, &schedule, seed, format),
    }
}

fn params_of(args: &ParamArgs) -> Result<Params, CliError> {
    Ok(Params::parse(&args.alpha, &args.beta, &args.gamma)?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

fn load_graph(path: &Path) -> Result<GraphDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(3, format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_graph_text(&text)?)
}

fn q(x: &Rational) -> String {
    display_with_approx(x)
}

pub fn cmd_bound(args: &ParamArgs, format: Format) -> Result<Outcome, CliError> {
    let report = poa_upper_bound(&params_of(args)?);
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&report),
        Format::Text => bound_text(&report),
    }))
}

fn bound_text(r: &BoundReport) -> String {
    let mut s = String::new();
    writeln!(s, "{}", r.bound).unwrap();
    writeln!(s, "params           {}", r.inputs).unwrap();
    writeln!(s, "bound            {}", q(&r.bound)).unwrap();
    writeln!(s, "alpha/beta + 1   {}", q(&r.corollary_bound)).unwrap();
    writeln!(s, "alpha/beta       {}", q(&r.gamma_eq_beta_value)).unwrap();
    if r.degenerate {
        writeln!(
            s,
            "note             alpha = beta = gamma: every profile is optimal"
        )
        .unwrap();
    }
    s
}

/// Result of one lemma check on an analyzed profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Pass,
    Fail,
    Skipped(String),
}

impl Check {
    fn from_result(r: netcoord::Result<bool>) -> Self {
        match r {
            Ok(true) => Check::Pass,
            Ok(false) => Check::Fail,
            Err(e) => Check::Skipped(e.to_string()),
        }
    }

    fn label(&self) -> String {
        match self {
            Check::Pass => "pass".into(),
            Check::Fail => "FAIL".into(),
            Check::Skipped(why) => format!("skipped ({why})"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DecompositionSummary {
    pub phi_edges: Vec<[String; 2]>,
    pub lambda_edges: Vec<[String; 2]>,
    pub phi_state: EdgeState,
    pub lambda_state: EdgeState,
}

#[derive(Debug, Serialize)]
pub struct LemmaChecks {
    pub quotient_within_bound: Check,
    pub nash_decomposition: Check,
    pub mediant: Check,
    pub lambda_bound: Check,
    pub phi_counting: Check,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub params: Params,
    pub nodes: usize,
    pub edges: usize,
    pub state: EdgeState,
    #[serde(with = "serde_str")]
    pub social_welfare: Rational,
    #[serde(with = "serde_str")]
    pub optimal_welfare: Rational,
    /// Absent when the profile has zero welfare.
    #[serde(with = "serde_opt_str")]
    pub quotient: Option<Rational>,
    #[serde(with = "serde_str")]
    pub bound: Rational,
    pub nash: NashReport,
    pub decomposition: DecompositionSummary,
    pub checks: LemmaChecks,
}

pub fn analyze(g: &Graph, s: &Profile, p: &Params) -> netcoord::Result<AnalyzeReport> {
    let state = classify_edges(g, s)?;
    let nash = is_nash(g, s, p)?;
    let d = decompose(g, s)?;
    let bound = poa_upper_bound(p).bound;
    let quotient = quotient(&state, p).ok();
    let ids = |edges: &[usize]| -> Vec<[String; 2]> {
        edges
            .iter()
            .map(|&e| {
                let (u, v) = g.edges()[e];
                [g.node_id(u).to_string(), g.node_id(v).to_string()]
            })
            .collect()
    };
    let not_ne = || Check::Skipped("not an equilibrium".into());
    let checks = LemmaChecks {
        quotient_within_bound: match (&quotient, nash.is_nash) {
            (Some(r), true) => {
                if r <= &bound {
                    Check::Pass
                } else {
                    Check::Fail
                }
            }
            (None, _) => Check::Skipped("zero welfare".into()),
            (_, false) => not_ne(),
        },
        nash_decomposition: if nash.is_nash {
            Check::from_result(nash_decomposition_check(g, s, p))
        } else {
            not_ne()
        },
        mediant: Check::from_result(mediant_check(&state, &d, p)),
        lambda_bound: if d.lambda_edges.is_empty() {
            Check::Skipped("H_Lambda is empty".into())
        } else {
            Check::from_result(lambda_bound_check(&d.lambda_state, p))
        },
        phi_counting: if nash.is_nash {
            Check::from_result(phi_counting_check(g, s, p))
        } else {
            not_ne()
        },
    };
    Ok(AnalyzeReport {
        params: p.clone(),
        nodes: g.node_count(),
        edges: g.edge_count(),
        social_welfare: social_welfare(g, s, p)?,
        optimal_welfare: optimal_welfare(g, p),
        quotient,
        bound,
        nash,
        decomposition: DecompositionSummary {
            phi_edges: ids(&d.phi_edges),
            lambda_edges: ids(&d.lambda_edges),
            phi_state: d.phi_state,
            lambda_state: d.lambda_state,
        },
        checks,
        state,
    })
}

pub fn cmd_analyze(path: &Path, args: &ParamArgs, format: Format) -> Result<Outcome, CliError> {
    let p = params_of(args)?;
    let doc = load_graph(path)?;
    let g = doc.to_graph()?;
    let s = doc.profile(&g)?;
    let report = analyze(&g, &s, &p)?;
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&report),
        Format::Text => analyze_text(&report),
    }))
}

fn analyze_text(r: &AnalyzeReport) -> String {
    let mut s = String::new();
    writeln!(s, "params        {}", r.params).unwrap();
    writeln!(s, "graph         {} nodes, {} edges", r.nodes, r.edges).unwrap();
    writeln!(s, "edge state    {}", r.state).unwrap();
    writeln!(s, "SW            {}", q(&r.social_welfare)).unwrap();
    writeln!(s, "OPT           {}", q(&r.optimal_welfare)).unwrap();
    match &r.quotient {
        Some(x) => writeln!(s, "OPT/SW        {}", q(x)).unwrap(),
        None => writeln!(s, "OPT/SW        undefined (zero welfare)").unwrap(),
    }
    writeln!(s, "bound         {}", q(&r.bound)).unwrap();
    writeln!(s, "NE            {}", r.nash.is_nash).unwrap();
    for d in &r.nash.deviators {
        writeln!(
            s,
            "  deviator {}: {} -> {}",
            d.node, d.current_utility, d.deviation_utility
        )
        .unwrap();
    }
    let d = &r.decomposition;
    writeln!(
        s,
        "H_Phi         {} edges, state {}",
        d.phi_edges.len(),
        d.phi_state
    )
    .unwrap();
    writeln!(
        s,
        "H_Lambda      {} edges, state {}",
        d.lambda_edges.len(),
        d.lambda_state
    )
    .unwrap();
    let c = &r.checks;
    for (name, check) in [
        ("quotient <= bound", &c.quotient_within_bound),
        ("NE decomposition", &c.nash_decomposition),
        ("mediant", &c.mediant),
        ("lambda bound", &c.lambda_bound),
        ("phi counting", &c.phi_counting),
    ] {
        writeln!(s, "check {name:<18} {}", check.label()).unwrap();
    }
    s
}

pub fn cmd_worst_case(
    args: &ParamArgs,
    out: Option<&Path>,
    format: Format,
) -> Result<Outcome, CliError> {
    let p = params_of(args)?;
    let report = worst_case_report(&p)?;
    if let Some(path) = out {
        std::fs::write(path, report.instance.to_json() + "\n")
            .map_err(|e| CliError::new(1, format!("cannot write {}: {e}", path.display())))?;
    }
    if !report.equal {
        return Err(CliError::new(
            5,
            format!("achieved {} but bound is {}", report.achieved, report.bound),
        ));
    }
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&report),
        Format::Text => worst_case_text(&report),
    }))
}

fn worst_case_text(r: &WorstCaseReport) -> String {
    let mut s = String::new();
    writeln!(s, "params        {}", r.params).unwrap();
    if r.perfect_compatibility {
        writeln!(
            s,
            "gamma = beta: no C-edges possible, worst equilibrium is all-B"
        )
        .unwrap();
    }
    if let Some(plan) = &r.plan {
        writeln!(s, "fractional    {}", plan.fractional_state).unwrap();
        writeln!(
            s,
            "integral      {} (factor {})",
            plan.integral_state, plan.scaling_factor
        )
        .unwrap();
        writeln!(
            s,
            "players       {} A ({} C-edges, {} A-edges each), {} B ({} C-edges, {} B-edges each)",
            plan.num_a_players,
            plan.a_group_size,
            plan.a_degree,
            plan.num_b_players,
            plan.b_group_size,
            plan.b_degree
        )
        .unwrap();
    }
    writeln!(
        s,
        "instance      {} nodes, {} edges",
        r.instance.nodes.len(),
        r.instance.edges.len()
    )
    .unwrap();
    writeln!(s, "state         {}", r.state).unwrap();
    writeln!(s, "SW            {}", q(&r.social_welfare)).unwrap();
    writeln!(s, "OPT           {}", q(&r.optimal_welfare)).unwrap();
    writeln!(s, "ratio         {}", q(&r.achieved)).unwrap();
    writeln!(s, "bound         {}", q(&r.bound)).unwrap();
    writeln!(s, "equal         {}", r.equal).unwrap();
    s
}

fn optional_params(args: &OracleArgs) -> Result<Option<Params>, CliError> {
    match (&args.alpha, &args.beta, &args.gamma) {
        (Some(a), Some(b), Some(g)) => Ok(Some(Params::parse(a, b, g)?)),
        (None, None, None) => Ok(None),
        _ => Err(CliError::new(2, "give all of --alpha, --beta and --gamma")),
    }
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<Outcome, CliError> {
    let params = optional_params(args)?;
    let need_params = || {
        params
            .clone()
            .ok_or_else(|| CliError::new(2, "payoff parameters required"))
    };

    if let Some(path) = &args.graph {
        let p = need_params()?;
        let g = load_graph(path)?.to_graph()?;
        let result = exact_poa(&g, &p, args.cap)?;
        let code = if result.exact_poa > result.bound {
            1
        } else {
            0
        };
        let stdout = match args.format {
            Format::Json => to_json(&result),
            Format::Text => oracle_text(&result),
        };
        return Ok(Outcome { stdout, code });
    }

    let mut config = if let Some(path) = &args.campaign {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(3, format!("cannot read {}: {e}", path.display())))?;
        let mut config: CampaignConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::new(3, format!("campaign config: {e}")))?;
        if let Some(p) = params {
            config.params_list = vec![p];
        }
        config
    } else if let (Some(num_graphs), Some(n)) = (args.num_graphs, args.nodes) {
        CampaignConfig {
            num_graphs,
            n,
            edge_probability: parse_rational(&args.edge_probability)
                .map_err(|e| CliError::new(3, e.to_string()))?,
            params_list: vec![need_params()?],
            seed: args.seed,
            cap: args.cap,
        }
    } else {
        return Err(CliError::new(
            2,
            "oracle needs --graph FILE, --campaign FILE, or --num-graphs N --nodes N",
        ));
    };
    if args.campaign.is_some() && args.cap != DEFAULT_CAP {
        config.cap = args.cap;
    }

    let started = Instant::now();
    let mut report = verify_bound_campaign(&config)?;
    if args.timing {
        report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    }
    let code = if report.is_clean() { 0 } else { 1 };
    let stdout = match args.format {
        Format::Json => to_json(&report),
        Format::Text => campaign_text(&report),
    };
    Ok(Outcome { stdout, code })
}

fn oracle_text(r: &OracleResult) -> String {
    let mut s = String::new();
    writeln!(s, "equilibria    {}", r.nash_profiles.len()).unwrap();
    writeln!(s, "worst NE SW   {}", q(&r.worst_ne_welfare)).unwrap();
    writeln!(s, "OPT           {}", q(&r.optimal_welfare)).unwrap();
    writeln!(s, "exact PoA     {}", q(&r.exact_poa)).unwrap();
    writeln!(s, "bound         {}", q(&r.bound)).unwrap();
    writeln!(s, "margin        {}", q(&r.margin)).unwrap();
    s
}

fn campaign_text(r: &CampaignReport) -> String {
    let mut s = String::new();
    if let Some(c) = &r.config {
        writeln!(
            s,
            "campaign      {} graphs, G({}, {}), seed {}",
            c.num_graphs, c.n, c.edge_probability, c.seed
        )
        .unwrap();
        for p in &c.params_list {
            writeln!(s, "params        {p}").unwrap();
        }
    }
    writeln!(s, "prng          {}", r.prng).unwrap();
    writeln!(
        s,
        "graphs        {} checked, {} skipped (edgeless)",
        r.graphs_checked, r.graphs_skipped
    )
    .unwrap();
    writeln!(s, "equilibria    {}", r.equilibria_checked).unwrap();
    if let Some(m) = r.min_margin() {
        writeln!(s, "min margin    {}", q(m)).unwrap();
    }
    if let Some(ms) = r.wall_time_ms {
        writeln!(s, "wall time     {ms} ms").unwrap();
    }
    writeln!(s, "violations    {}", r.violations.len()).unwrap();
    for v in &r.violations {
        writeln!(
            s,
            "  graph {} {} {}: {} ({})",
            v.graph,
            v.params,
            v.profile.as_deref().unwrap_or("-"),
            v.check,
            v.detail
        )
        .unwrap();
    }
    s
}

#[derive(Debug, Serialize)]
pub struct DynamicsReport {
    pub params: Params,
    pub schedule: Schedule,
    pub seed: u64,
    pub prng: &'static str,
    pub start: std::collections::BTreeMap<String, Strategy>,
    pub steps: Vec<Step>,
    pub rounds: usize,
    pub converged: bool,
    #[serde(rename = "final")]
    pub final_profile: std::collections::BTreeMap<String, Strategy>,
    pub final_is_nash: bool,
    #[serde(with = "serde_str")]
    pub final_welfare: Rational,
}

pub fn cmd_dynamics(
    path: &Path,
    args: &ParamArgs,
    schedule: &str,
    seed: u64,
    format: Format,
) -> Result<Outcome, CliError> {
    let p = params_of(args)?;
    let schedule: Schedule = schedule
        .parse()
        .map_err(|e: Error| CliError::new(2, e.to_string()))?;
    let doc = load_graph(path)?;
    let g = doc.to_graph()?;
    let start = match doc.strategies {
        Some(_) => doc.profile(&g)?,
        None => Profile::uniform(g.node_count(), Strategy::B),
    };
    let trace = run_dynamics(&g, &start, &p, schedule, seed)?;
    let report = DynamicsReport {
        params: p.clone(),
        schedule,
        seed,
        prng: DYNAMICS_PRNG,
        start: start.to_map(&g),
        final_is_nash: is_nash(&g, &trace.final_profile, &p)?.is_nash,
        final_welfare: social_welfare(&g, &trace.final_profile, &p)?,
        final_profile: trace.final_profile.to_map(&g),
        steps: trace.steps,
        rounds: trace.rounds,
        converged: trace.converged,
    };
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&report),
        Format::Text => dynamics_text(&report),
    }))
}

fn dynamics_text(r: &DynamicsReport) -> String {
    let mut s = String::new();
    writeln!(s, "params        {}", r.params).unwrap();
    writeln!(s, "schedule      {} (seed {})", r.schedule, r.seed).unwrap();
    for (i, step) in r.steps.iter().enumerate() {
        writeln!(
            s,
            "step {:<4} {} {} -> {}  potential {}",
            i + 1,
            step.node,
            step.from,
            step.to,
            step.potential_after
        )
        .unwrap();
    }
    writeln!(s, "steps         {}", r.steps.len()).unwrap();
    writeln!(s, "rounds        {}", r.rounds).unwrap();
    writeln!(s, "converged     {}", r.converged).unwrap();
    let letters: Vec<String> = r
        .final_profile
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    writeln!(s, "final         {}", letters.join(" ")).unwrap();
    writeln!(s, "final SW      {}", q(&r.final_welfare)).unwrap();
    writeln!(s, "final NE      {}", r.final_is_nash).unwrap();
    s
}
