//! Tight instances: graphs whose worst equilibrium reaches the closed-form
//! price-of-anarchy bound exactly.
//!
//! Write (β−γ)/(α−γ) = a/b in lowest terms. Every A-player gets `b` C-edges
//! and `a` A-edges, every B-player `a` C-edges and `b` B-edges, which leaves
//! each of them exactly indifferent between A and B. A-edges form an
//! a-regular circulant on the A-players, B-edges a b-regular circulant on the
//! B-players, and the C-edges a bipartite circulant between the two sides.
//! The emitted instance is re-checked with the game engine before it is
//! returned.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::analysis::poa_upper_bound;
use crate::error::{Error, Result};
use crate::game::{is_nash, optimal_welfare, quotient, social_welfare};
use crate::graph::{classify_edges, EdgeState, Graph, Params, Profile, Strategy};
use crate::io::GraphDocument;
use crate::rational::{self, Rational};

/// Largest instance [`realize_graph`] will build.
pub const MAX_REALIZED_NODES: usize = 1_000_000;

/// The continuous worst equilibrium state
/// ((β−γ)/(2(α−γ))·n_c, (α−γ)/(2(β−γ))·n_c, n_c) with n_c = (α−γ)/(β−γ) + 1.
///
/// Fails with [`Error::PerfectCompatibility`] when γ = β: there the worst
/// equilibrium is all-B with ratio α/β.
pub fn fractional_worst_state(p: &Params) -> Result<EdgeState> {
    let x = p.alpha() - p.gamma();
    let y = p.beta() - p.gamma();
    if !y.is_positive() {
        return Err(Error::PerfectCompatibility {
            ratio: p.alpha() / p.beta(),
        });
    }
    let two = rational::int(2);
    let n_c = min_c_edges(p);
    Ok(EdgeState::new(
        &y / (&x * &two) * &n_c,
        &x / (&y * &two) * &n_c,
        n_c,
    ))
}

/// Fewest C-edges for which the shared-edge counts are achievable in a
/// simple graph: (α−γ)/(β−γ) + 1. Requires γ < β.
fn min_c_edges(p: &Params) -> Rational {
    (p.alpha() - p.gamma()) / (p.beta() - p.gamma()) + Rational::one()
}

/// Smallest positive multiple of `n` with coprime integer components.
pub fn scale_to_integral(n: &EdgeState) -> Result<(EdgeState, Rational)> {
    if !n.is_nonnegative() {
        return Err(Error::StateMismatch(format!("negative component in {n}")));
    }
    if n.is_zero() {
        return Err(Error::ZeroState);
    }
    let parts = [&n.n_ea, &n.n_eb, &n.n_ec];
    let lcm = rational::denominator_lcm(parts);
    let gcd = parts
        .iter()
        .map(|x| (*x * Rational::from_integer(lcm.clone())).to_integer())
        .fold(BigInt::zero(), |acc, v| acc.gcd(&v));
    let factor = Rational::new(lcm, gcd);
    Ok((n.scale(&factor), factor))
}

/// How a tight instance was sized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorstCasePlan {
    pub fractional_state: EdgeState,
    pub integral_state: EdgeState,
    /// (α−γ)/(β−γ) + 1
    #[serde(with = "rational::serde_str")]
    pub n_c_min: Rational,
    /// integral_state = scaling_factor · fractional_state
    #[serde(with = "rational::serde_str")]
    pub scaling_factor: Rational,
    /// The realized state is this multiple of `integral_state`.
    pub realizability_multiplier: u64,
    /// C-edges per A-player.
    pub a_group_size: u64,
    /// C-edges per B-player.
    pub b_group_size: u64,
    /// A-edges per A-player.
    pub a_degree: u64,
    /// B-edges per B-player.
    pub b_degree: u64,
    pub num_a_players: u64,
    pub num_b_players: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightInstance {
    pub graph: Graph,
    pub profile: Profile,
    pub plan: WorstCasePlan,
}

/// Side lengths for a given number of C-edges, if every regular piece can be
/// drawn as a simple graph.
fn sides_for(n_c: u64, a: u64, b: u64) -> Option<(u64, u64)> {
    if !n_c.is_multiple_of(a) || !n_c.is_multiple_of(b) {
        return None;
    }
    let (num_a, num_b) = (n_c / b, n_c / a);
    let regular_ok = |degree: u64, count: u64| degree < count && (degree * count).is_multiple_of(2);
    (regular_ok(a, num_a) && regular_ok(b, num_b) && b <= num_b && a <= num_a)
        .then_some((num_a, num_b))
}

fn to_u64(x: &BigInt) -> Result<u64> {
    x.to_u64().ok_or(Error::TooLarge {
        nodes: usize::MAX,
        cap: MAX_REALIZED_NODES,
    })
}

/// Edges of a `degree`-regular circulant on `count` vertices.
/// Needs `degree < count` and `degree * count` even.
fn circulant(count: u64, degree: u64) -> Vec<(u64, u64)> {
    let mut edges = Vec::new();
    for i in 0..count {
        for j in 1..=degree / 2 {
            edges.push((i, (i + j) % count));
        }
    }
    if degree % 2 == 1 {
        for i in 0..count / 2 {
            edges.push((i, i + count / 2));
        }
    }
    edges
}

/// Builds and verifies the tight instance for `p` (γ < β).
pub fn realize_graph(p: &Params) -> Result<TightInstance> {
    let fractional_state = fractional_worst_state(p)?;
    let (integral_state, scaling_factor) = scale_to_integral(&fractional_state)?;
    let n_c_min = min_c_edges(p);

    let share = (p.beta() - p.gamma()) / (p.alpha() - p.gamma());
    let a = to_u64(share.numer())?;
    let b = to_u64(share.denom())?;
    let base_c = to_u64(&integral_state.n_ec.to_integer())?;

    let mut multiplier = 1u64;
    let (n_c, num_a, num_b) = loop {
        let n_c = base_c.checked_mul(multiplier).ok_or(Error::TooLarge {
            nodes: usize::MAX,
            cap: MAX_REALIZED_NODES,
        })?;
        if let Some((num_a, num_b)) = sides_for(n_c, a, b) {
            if Rational::from_integer(n_c.into()) >= n_c_min {
                break (n_c, num_a, num_b);
            }
        }
        if n_c / a.min(b) > MAX_REALIZED_NODES as u64 {
            return Err(Error::TooLarge {
                nodes: (n_c / a.min(b)) as usize,
                cap: MAX_REALIZED_NODES,
            });
        }
        multiplier += 1;
    };
    let total = num_a + num_b;
    if total > MAX_REALIZED_NODES as u64 {
        return Err(Error::TooLarge {
            nodes: total as usize,
            cap: MAX_REALIZED_NODES,
        });
    }

    let a_id = |i: u64| format!("a{}", i + 1);
    let b_id = |i: u64| format!("b{}", i + 1);
    let nodes: Vec<String> = (0..num_a).map(a_id).chain((0..num_b).map(b_id)).collect();
    let mut edges: Vec<(String, String)> = Vec::with_capacity((n_c * 2) as usize);
    edges.extend(
        circulant(num_a, a)
            .into_iter()
            .map(|(u, v)| (a_id(u), a_id(v))),
    );
    edges.extend(
        circulant(num_b, b)
            .into_iter()
            .map(|(u, v)| (b_id(u), b_id(v))),
    );
    for i in 0..num_a {
        for j in 0..b {
            edges.push((a_id(i), b_id((i * b + j) % num_b)));
        }
    }
    let graph = Graph::new(nodes, edges)
        .map_err(|e| Error::InternalRealizationFailure(format!("not a simple graph: {e}")))?;
    let profile = Profile::new(
        (0..num_a)
            .map(|_| Strategy::A)
            .chain((0..num_b).map(|_| Strategy::B))
            .collect(),
    );

    let plan = WorstCasePlan {
        fractional_state,
        integral_state,
        n_c_min,
        scaling_factor,
        realizability_multiplier: multiplier,
        a_group_size: b,
        b_group_size: a,
        a_degree: a,
        b_degree: b,
        num_a_players: num_a,
        num_b_players: num_b,
    };
    verify_instance(&graph, &profile, &plan, p, n_c)?;
    Ok(TightInstance {
        graph,
        profile,
        plan,
    })
}

fn verify_instance(
    g: &Graph,
    s: &Profile,
    plan: &WorstCasePlan,
    p: &Params,
    n_c: u64,
) -> Result<()> {
    let fail = |m: String| Err(Error::InternalRealizationFailure(m));
    let report = is_nash(g, s, p)?;
    if !report.is_nash {
        return fail(format!("{} nodes can deviate", report.deviators.len()));
    }
    let state = classify_edges(g, s)?;
    let expected = plan.integral_state.scale(&Rational::from_integer(
        plan.realizability_multiplier.into(),
    ));
    if state != expected {
        return fail(format!("state {state}, planned {expected}"));
    }
    if state.n_ec != Rational::from_integer(n_c.into()) {
        return fail(format!("{} C-edges, planned {n_c}", state.n_ec));
    }
    let achieved = quotient(&state, p)?;
    let bound = poa_upper_bound(p).bound;
    if achieved != bound {
        return fail(format!("ratio {achieved} differs from bound {bound}"));
    }
    Ok(())
}

/// Everything about the tight instance for one parameter triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorstCaseReport {
    pub params: Params,
    /// γ = β: no C-edge construction, the instance is a single all-B edge.
    pub perfect_compatibility: bool,
    pub plan: Option<WorstCasePlan>,
    pub instance: GraphDocument,
    pub state: EdgeState,
    #[serde(with = "rational::serde_str")]
    pub social_welfare: Rational,
    #[serde(with = "rational::serde_str")]
    pub optimal_welfare: Rational,
    #[serde(with = "rational::serde_str")]
    pub achieved: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub equal: bool,
}

pub fn worst_case_report(p: &Params) -> Result<WorstCaseReport> {
    let (graph, profile, plan, perfect) = match realize_graph(p) {
        Ok(t) => (t.graph, t.profile, Some(t.plan), false),
        Err(Error::PerfectCompatibility { .. }) => {
            let g = Graph::new(["b1", "b2"], [("b1", "b2")])?;
            (g, Profile::uniform(2, Strategy::B), None, true)
        }
        Err(e) => return Err(e),
    };
    let state = classify_edges(&graph, &profile)?;
    let achieved = quotient(&state, p)?;
    let bound = poa_upper_bound(p).bound;
    Ok(WorstCaseReport {
        params: p.clone(),
        perfect_compatibility: perfect,
        plan,
        instance: GraphDocument::from_graph(&graph, Some(&profile)),
        social_welfare: social_welfare(&graph, &profile, p)?,
        optimal_welfare: optimal_welfare(&graph, p),
        equal: achieved == bound,
        state,
        achieved,
        bound,
    })
}
