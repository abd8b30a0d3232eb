//! Brute-force ground truth: every pure equilibrium of small graphs, the
//! exact price of anarchy, and randomized campaigns that run each bound and
//! lemma against real equilibria.

use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::analysis::{
    decompose, lambda_bound_check, mediant_check, nash_decomposition_check, phi_counting_check,
    poa_upper_bound,
};
use crate::error::{Error, Result};
use crate::game::{optimal_welfare, quotient};
use crate::graph::{classify_edges, Graph, Params, Profile};
use crate::rational::{self, Rational};

pub const DEFAULT_CAP: usize = 20;
/// Profiles are indexed by a `u64`, so no cap can go past this.
pub const HARD_CAP: usize = 63;
pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

/// Sizes below this are scanned on one thread.
const PARALLEL_THRESHOLD: usize = 14;

/// Integer form of the stability test. A node with `same` coordinated and
/// `other` mixed neighbours keeps A iff same·(α−γ) >= other·(β−γ), and keeps
/// B iff same·(β−γ) >= other·(α−γ).
struct StabilityRule {
    a_gap: BigInt,
    b_gap: BigInt,
    small: Option<(i128, i128)>,
}

impl StabilityRule {
    fn new(p: &Params) -> Self {
        let a_gap = p.alpha() - p.gamma();
        let b_gap = p.beta() - p.gamma();
        let lcm = rational::denominator_lcm([&a_gap, &b_gap]);
        let a_gap = (a_gap * Rational::from_integer(lcm.clone())).to_integer();
        let b_gap = (b_gap * Rational::from_integer(lcm)).to_integer();
        let limit = BigInt::from(1u128 << 100);
        let small = (a_gap < limit && b_gap < limit)
            .then(|| (a_gap.to_i128().unwrap(), b_gap.to_i128().unwrap()));
        Self {
            a_gap,
            b_gap,
            small,
        }
    }

    fn stable(&self, plays_a: bool, same: u32, other: u32) -> bool {
        if let Some((a_gap, b_gap)) = self.small {
            let (mine, theirs) = if plays_a {
                (a_gap, b_gap)
            } else {
                (b_gap, a_gap)
            };
            return same as i128 * mine >= other as i128 * theirs;
        }
        let (mine, theirs) = if plays_a {
            (&self.a_gap, &self.b_gap)
        } else {
            (&self.b_gap, &self.a_gap)
        };
        mine * BigInt::from(same) >= theirs * BigInt::from(other)
    }
}

struct Scanner {
    masks: Vec<u64>,
    degrees: Vec<u32>,
    rule: StabilityRule,
}

impl Scanner {
    fn new(g: &Graph, p: &Params) -> Self {
        let masks = (0..g.node_count())
            .map(|i| g.neighbors(i).iter().fold(0u64, |m, &w| m | 1 << w))
            .collect();
        let degrees = (0..g.node_count()).map(|i| g.degree(i) as u32).collect();
        Self {
            masks,
            degrees,
            rule: StabilityRule::new(p),
        }
    }

    /// Bit `i` of `index` set means node `i` plays B.
    fn is_equilibrium(&self, index: u64) -> bool {
        self.masks
            .iter()
            .zip(&self.degrees)
            .enumerate()
            .all(|(i, (&mask, &deg))| {
                let b_neighbors = (mask & index).count_ones();
                let a_neighbors = deg - b_neighbors;
                if index >> i & 1 == 1 {
                    self.rule.stable(false, b_neighbors, a_neighbors)
                } else {
                    self.rule.stable(true, a_neighbors, b_neighbors)
                }
            })
    }

    fn scan(&self, range: Range<u64>) -> Vec<u64> {
        range.filter(|&i| self.is_equilibrium(i)).collect()
    }
}

fn check_cap(g: &Graph, cap: usize) -> Result<()> {
    let cap = cap.min(HARD_CAP);
    if g.node_count() > cap {
        return Err(Error::TooLarge {
            nodes: g.node_count(),
            cap,
        });
    }
    Ok(())
}

/// All pure weak equilibria, in binary-counter order (see
/// [`Profile::from_index`]).
pub fn enumerate_nash(g: &Graph, p: &Params, cap: usize) -> Result<Vec<Profile>> {
    if g.node_count() >= PARALLEL_THRESHOLD {
        enumerate_nash_parallel(g, p, cap)
    } else {
        enumerate_nash_sequential(g, p, cap)
    }
}

pub fn enumerate_nash_sequential(g: &Graph, p: &Params, cap: usize) -> Result<Vec<Profile>> {
    check_cap(g, cap)?;
    let n = g.node_count();
    let scanner = Scanner::new(g, p);
    Ok(scanner
        .scan(0..1u64 << n)
        .into_iter()
        .map(|i| Profile::from_index(n, i))
        .collect())
}

/// Splits the index space into disjoint chunks scanned by the rayon pool.
pub fn enumerate_nash_parallel(g: &Graph, p: &Params, cap: usize) -> Result<Vec<Profile>> {
    check_cap(g, cap)?;
    let n = g.node_count();
    let scanner = Scanner::new(g, p);
    let total = 1u64 << n;
    let chunk = (total / 256).max(1);
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let hits: Vec<Vec<u64>> = starts
        .par_iter()
        .map(|&start| scanner.scan(start..(start + chunk).min(total)))
        .collect();
    Ok(hits
        .into_iter()
        .flatten()
        .map(|i| Profile::from_index(n, i))
        .collect())
}

fn profiles_as_letters<S: Serializer>(profiles: &[Profile], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(profiles.iter().map(Profile::to_letters))
}

/// Exact price of anarchy of one graph. Profiles serialize as strings of
/// `A`/`B` in node order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    #[serde(serialize_with = "profiles_as_letters")]
    pub nash_profiles: Vec<Profile>,
    #[serde(with = "rational::serde_str")]
    pub worst_ne_welfare: Rational,
    #[serde(with = "rational::serde_str")]
    pub optimal_welfare: Rational,
    #[serde(with = "rational::serde_str")]
    pub exact_poa: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    #[serde(with = "rational::serde_str")]
    pub margin: Rational,
}

pub fn exact_poa(g: &Graph, p: &Params, cap: usize) -> Result<OracleResult> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let nash_profiles = enumerate_nash(g, p, cap)?;
    exact_poa_from(g, p, nash_profiles)
}

fn exact_poa_from(g: &Graph, p: &Params, nash_profiles: Vec<Profile>) -> Result<OracleResult> {
    let mut worst: Option<Rational> = None;
    for s in &nash_profiles {
        let w = classify_edges(g, s)?.welfare(p);
        if worst.as_ref().is_none_or(|cur| &w < cur) {
            worst = Some(w);
        }
    }
    // all-B is always an equilibrium with welfare 2|E|β > 0
    let worst_ne_welfare = worst.ok_or(Error::ZeroWelfare)?;
    if !worst_ne_welfare.is_positive() {
        return Err(Error::ZeroWelfare);
    }
    let optimal = optimal_welfare(g, p);
    let exact = &optimal / &worst_ne_welfare;
    let bound = poa_upper_bound(p).bound;
    Ok(OracleResult {
        nash_profiles,
        worst_ne_welfare,
        optimal_welfare: optimal,
        margin: &bound - &exact,
        exact_poa: exact,
        bound,
    })
}

/// G(n, q) sample on nodes `v1..vn`: each pair `i < j`, in lexicographic
/// index order, is kept with probability `q`. Draws come from
/// [`PRNG_NAME`] seeded with `seed`; a probability with numerator and
/// denominator in `u64` is sampled exactly as `uniform(0..den) < num`.
pub fn random_graph(n: usize, edge_probability: &Rational, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_graph(n, edge_probability, &mut rng)
}

fn sample_graph(n: usize, q: &Rational, rng: &mut ChaCha8Rng) -> Graph {
    let exact = q.numer().to_u64().zip(q.denom().to_u64());
    let approx = q.to_f64().unwrap_or(0.0);
    let mut keep = || match exact {
        Some((num, den)) => rng.gen_range(0..den) < num,
        None => rng.gen::<f64>() < approx,
    };
    let nodes: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if keep() {
                edges.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    Graph::new(nodes, edges).expect("sampled pairs are distinct and loop-free")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub num_graphs: usize,
    pub n: usize,
    #[serde(with = "rational::serde_str")]
    pub edge_probability: Rational,
    pub params_list: Vec<Params>,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamsOutcome {
    pub params: Params,
    pub nash_count: usize,
    #[serde(with = "rational::serde_str")]
    pub exact_poa: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    #[serde(with = "rational::serde_str")]
    pub margin: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphOutcome {
    pub index: usize,
    pub nodes: usize,
    pub edges: usize,
    /// Edgeless graphs have no defined price of anarchy and are skipped.
    pub skipped: bool,
    pub results: Vec<ParamsOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub graph: usize,
    pub params: Params,
    /// `A`/`B` letters in node order, absent for graph-level checks.
    pub profile: Option<String>,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CampaignReport {
    pub config: Option<CampaignConfig>,
    pub prng: String,
    pub graphs_checked: usize,
    pub graphs_skipped: usize,
    pub equilibria_checked: usize,
    pub graphs: Vec<GraphOutcome>,
    pub violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl CampaignReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Smallest bound − exact_poa seen, over all graphs and params.
    pub fn min_margin(&self) -> Option<&Rational> {
        self.graphs
            .iter()
            .flat_map(|g| g.results.iter().map(|r| &r.margin))
            .min()
    }
}

/// Samples `config.num_graphs` graphs from one seeded stream, then checks
/// each against every parameter triple.
pub fn verify_bound_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    if config.n > config.cap.min(HARD_CAP) {
        return Err(Error::TooLarge {
            nodes: config.n,
            cap: config.cap.min(HARD_CAP),
        });
    }
    let graphs = campaign_graphs(config);
    let mut report = verify_graphs(&graphs, &config.params_list, config.cap)?;
    report.config = Some(config.clone());
    Ok(report)
}

/// The graphs a campaign samples, in order.
pub fn campaign_graphs(config: &CampaignConfig) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.num_graphs)
        .map(|_| sample_graph(config.n, &config.edge_probability, &mut rng))
        .collect()
}

/// Runs the exact oracle and every lemma checker over the given graphs.
pub fn verify_graphs(
    graphs: &[Graph],
    params_list: &[Params],
    cap: usize,
) -> Result<CampaignReport> {
    for g in graphs {
        check_cap(g, cap)?;
    }
    let per_graph: Vec<Result<(GraphOutcome, Vec<Violation>, usize)>> = graphs
        .par_iter()
        .enumerate()
        .map(|(index, g)| verify_one(index, g, params_list, cap))
        .collect();
    let mut report = CampaignReport {
        config: None,
        prng: PRNG_NAME.to_string(),
        graphs_checked: 0,
        graphs_skipped: 0,
        equilibria_checked: 0,
        graphs: Vec::with_capacity(graphs.len()),
        violations: Vec::new(),
        wall_time_ms: None,
    };
    for item in per_graph {
        let (outcome, violations, checked) = item?;
        if outcome.skipped {
            report.graphs_skipped += 1;
        } else {
            report.graphs_checked += 1;
        }
        report.equilibria_checked += checked;
        report.graphs.push(outcome);
        report.violations.extend(violations);
    }
    Ok(report)
}

fn verify_one(
    index: usize,
    g: &Graph,
    params_list: &[Params],
    cap: usize,
) -> Result<(GraphOutcome, Vec<Violation>, usize)> {
    let mut outcome = GraphOutcome {
        index,
        nodes: g.node_count(),
        edges: g.edge_count(),
        skipped: g.edge_count() == 0,
        results: Vec::new(),
    };
    let mut violations = Vec::new();
    let mut checked = 0;
    if outcome.skipped {
        return Ok((outcome, violations, checked));
    }
    for p in params_list {
        let nash = enumerate_nash(g, p, cap)?;
        let result = exact_poa_from(g, p, nash)?;
        if result.exact_poa > result.bound {
            violations.push(Violation {
                graph: index,
                params: p.clone(),
                profile: None,
                check: "exact_poa <= bound".into(),
                detail: format!("exact {} > bound {}", result.exact_poa, result.bound),
            });
        }
        for s in &result.nash_profiles {
            checked += 1;
            for (check, detail) in equilibrium_failures(g, s, p, &result.bound) {
                violations.push(Violation {
                    graph: index,
                    params: p.clone(),
                    profile: Some(s.to_letters()),
                    check,
                    detail,
                });
            }
        }
        outcome.results.push(ParamsOutcome {
            params: p.clone(),
            nash_count: result.nash_profiles.len(),
            exact_poa: result.exact_poa,
            bound: result.bound,
            margin: result.margin,
        });
    }
    Ok((outcome, violations, checked))
}

/// Every bound and lemma that should hold at the equilibrium `s`; returns
/// the ones that fail (or error) as `(check, detail)`.
pub fn equilibrium_failures(
    g: &Graph,
    s: &Profile,
    p: &Params,
    bound: &Rational,
) -> Vec<(String, String)> {
    let mut failures = Vec::new();
    let mut record = |name: &str, outcome: Result<bool>| match outcome {
        Ok(true) => {}
        Ok(false) => failures.push((name.to_string(), "inequality fails".to_string())),
        Err(e) => failures.push((name.to_string(), e.to_string())),
    };

    let state = match classify_edges(g, s) {
        Ok(n) => n,
        Err(e) => {
            record("classify", Err(e));
            return failures;
        }
    };
    record(
        "quotient <= bound",
        quotient(&state, p).map(|r| &r <= bound),
    );
    record("nash_decomposition", nash_decomposition_check(g, s, p));
    match decompose(g, s) {
        Ok(d) => {
            record("mediant", mediant_check(&state, &d, p));
            if !d.lambda_edges.is_empty() {
                record("lambda_bound", lambda_bound_check(&d.lambda_state, p));
            }
        }
        Err(e) => record("decompose", Err(e)),
    }
    if p.alpha() > p.gamma() && p.beta() > p.gamma() {
        record("phi_counting", phi_counting_check(g, s, p));
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_nash;
    use crate::rational::{int, ratio};

    fn triangle() -> Graph {
        Graph::new(["x", "y", "z"], [("x", "y"), ("y", "z"), ("x", "z")]).unwrap()
    }

    /// Reference enumeration through the rational engine.
    fn enumerate_slow(g: &Graph, p: &Params) -> Vec<Profile> {
        (0..1u64 << g.node_count())
            .map(|i| Profile::from_index(g.node_count(), i))
            .filter(|s| is_nash(g, s, p).unwrap().is_nash)
            .collect()
    }

    #[test]
    fn single_edge_and_triangle() {
        let edge = Graph::new(["u", "v"], [("u", "v")]).unwrap();
        let p = Params::from_ints(1, 1, 0).unwrap();
        let letters: Vec<_> = enumerate_nash(&edge, &p, DEFAULT_CAP)
            .unwrap()
            .iter()
            .map(Profile::to_letters)
            .collect();
        assert_eq!(letters, ["AA", "BB"]);
        assert_eq!(exact_poa(&edge, &p, DEFAULT_CAP).unwrap().exact_poa, int(1));

        let p = Params::from_ints(2, 1, 0).unwrap();
        let letters: Vec<_> = enumerate_nash(&triangle(), &p, DEFAULT_CAP)
            .unwrap()
            .iter()
            .map(Profile::to_letters)
            .collect();
        assert_eq!(letters, ["AAA", "BBB"]);
        let r = exact_poa(&triangle(), &p, DEFAULT_CAP).unwrap();
        assert_eq!((r.exact_poa, r.bound, r.margin), (int(2), int(3), int(1)));
        assert_eq!(r.optimal_welfare, int(12));
        assert_eq!(r.worst_ne_welfare, int(6));
    }

    #[test]
    fn edgeless_graphs() {
        let g = Graph::new(["a", "b", "c"], Vec::<(&str, &str)>::new()).unwrap();
        let p = Params::from_ints(2, 1, 0).unwrap();
        assert_eq!(enumerate_nash(&g, &p, DEFAULT_CAP).unwrap().len(), 8);
        assert_eq!(exact_poa(&g, &p, DEFAULT_CAP), Err(Error::EmptyGraph));
    }

    #[test]
    fn cap_is_enforced() {
        let g = random_graph(30, &ratio(1, 10), 1);
        let p = Params::from_ints(2, 1, 0).unwrap();
        assert_eq!(
            enumerate_nash(&g, &p, DEFAULT_CAP),
            Err(Error::TooLarge { nodes: 30, cap: 20 })
        );
        let huge = random_graph(64, &ratio(1, 10), 1);
        assert!(matches!(
            enumerate_nash(&huge, &p, 100),
            Err(Error::TooLarge { cap: 63, .. })
        ));
    }

    #[test]
    fn fast_scan_agrees_with_engine() {
        let params = [
            Params::from_ints(3, 2, 1).unwrap(),
            Params::from_ints(1, 1, 0).unwrap(),
            Params::parse("7/3", "2", "1/2").unwrap(),
            Params::from_ints(2, 2, 2).unwrap(),
        ];
        for seed in 0..20 {
            let g = random_graph(7, &ratio(2, 5), seed);
            for p in &params {
                assert_eq!(
                    enumerate_nash(&g, p, DEFAULT_CAP).unwrap(),
                    enumerate_slow(&g, p),
                    "seed {seed}, {p}"
                );
            }
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let g = random_graph(15, &ratio(1, 4), 3);
        let p = Params::from_ints(3, 2, 1).unwrap();
        let seq = enumerate_nash_sequential(&g, &p, DEFAULT_CAP).unwrap();
        let par = enumerate_nash_parallel(&g, &p, DEFAULT_CAP).unwrap();
        assert_eq!(seq, par);
        assert!(seq.contains(&Profile::from_index(15, 0)));
        assert!(seq.contains(&Profile::from_index(15, (1 << 15) - 1)));
    }

    #[test]
    fn random_graph_extremes_and_determinism() {
        let k5 = random_graph(5, &int(1), 11);
        assert_eq!(k5.edge_count(), 10);
        assert_eq!(random_graph(5, &int(0), 11).edge_count(), 0);
        assert_eq!(
            random_graph(8, &ratio(1, 2), 42),
            random_graph(8, &ratio(1, 2), 42)
        );
        assert_ne!(
            random_graph(20, &ratio(1, 2), 42),
            random_graph(20, &ratio(1, 2), 43)
        );
    }

    #[test]
    fn small_campaign_is_clean_and_deterministic() {
        let config = CampaignConfig {
            num_graphs: 10,
            n: 6,
            edge_probability: ratio(1, 2),
            params_list: vec![
                Params::from_ints(3, 2, 1).unwrap(),
                Params::from_ints(2, 1, 1).unwrap(),
            ],
            seed: 7,
            cap: DEFAULT_CAP,
        };
        let a = verify_bound_campaign(&config).unwrap();
        assert!(a.is_clean(), "{:?}", a.violations);
        assert_eq!(a, verify_bound_campaign(&config).unwrap());
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&verify_bound_campaign(&config).unwrap()).unwrap()
        );
    }

    #[test]
    fn campaign_config_parses_from_json() {
        let text = r#"{"num_graphs": 3, "n": 5, "edge_probability": "0.5",
                       "params_list": [{"alpha": "3", "beta": "2", "gamma": "1"}], "seed": 1}"#;
        let config: CampaignConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.edge_probability, ratio(1, 2));
        assert_eq!(config.cap, DEFAULT_CAP);
        let too_big = CampaignConfig { n: 30, ..config };
        assert!(matches!(
            verify_bound_campaign(&too_big),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn failures_are_reported_for_non_equilibria() {
        let g = triangle();
        let p = Params::from_ints(2, 1, 0).unwrap();
        let s = Profile::from_index(3, 1);
        let failures = equilibrium_failures(&g, &s, &p, &poa_upper_bound(&p).bound);
        assert!(failures.iter().any(|(c, _)| c == "nash_decomposition"));
    }
}
