//! Utilities, welfare, the equilibrium test and the quotient r(n).

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{classify_edges, EdgeState, Graph, Params, Profile, Strategy};
use crate::rational::{self, Rational};

/// u_v(s): the sum of W(s_v, s_w) over the neighbours w of v.
pub fn utility(g: &Graph, s: &Profile, p: &Params, v: &str) -> Result<Rational> {
    s.check_covers(g)?;
    let i = g
        .node_index(v)
        .ok_or_else(|| Error::UnknownNode(v.to_string()))?;
    Ok(utility_at(g, s, p, i))
}

pub(crate) fn utility_at(g: &Graph, s: &Profile, p: &Params, i: usize) -> Rational {
    utility_if(g, s, p, i, s.get(i))
}

/// Utility node `i` would get playing `own` while everyone else keeps `s`.
pub(crate) fn utility_if(g: &Graph, s: &Profile, p: &Params, i: usize, own: Strategy) -> Rational {
    let (mut same_a, mut same_b) = (0i64, 0i64);
    for &w in g.neighbors(i) {
        match s.get(w) {
            Strategy::A => same_a += 1,
            Strategy::B => same_b += 1,
        }
    }
    let (coordinated, mixed, payoff) = match own {
        Strategy::A => (same_a, same_b, p.alpha()),
        Strategy::B => (same_b, same_a, p.beta()),
    };
    payoff * rational::int(coordinated) + p.gamma() * rational::int(mixed)
}

/// Σ_v u_v(s).
pub fn social_welfare(g: &Graph, s: &Profile, p: &Params) -> Result<Rational> {
    s.check_covers(g)?;
    Ok((0..g.node_count())
        .map(|i| utility_at(g, s, p, i))
        .fold(Rational::zero(), |acc, u| acc + u))
}

/// 2·|E|·α, the welfare of the all-A profile.
pub fn optimal_welfare(g: &Graph, p: &Params) -> Rational {
    p.alpha() * rational::int(2 * g.edge_count() as i64)
}

/// Exact potential Φ(s) = SW(s) / 2.
pub fn potential(g: &Graph, s: &Profile, p: &Params) -> Result<Rational> {
    Ok(classify_edges(g, s)?.welfare(p) / rational::int(2))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub node: String,
    #[serde(with = "rational::serde_str")]
    pub current_utility: Rational,
    #[serde(with = "rational::serde_str")]
    pub deviation_utility: Rational,
}

/// Outcome of the weak-equilibrium test. `deviators` lists every node with a
/// strictly improving unilateral switch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NashReport {
    pub is_nash: bool,
    pub deviators: Vec<Deviation>,
}

/// Weak Nash test: indifferent nodes count as stable.
pub fn is_nash(g: &Graph, s: &Profile, p: &Params) -> Result<NashReport> {
    s.check_covers(g)?;
    let deviators: Vec<_> = (0..g.node_count())
        .filter_map(|i| {
            let current = utility_at(g, s, p, i);
            let switched = utility_if(g, s, p, i, s.get(i).flip());
            (switched > current).then(|| Deviation {
                node: g.node_id(i).to_string(),
                current_utility: current,
                deviation_utility: switched,
            })
        })
        .collect();
    Ok(NashReport {
        is_nash: deviators.is_empty(),
        deviators,
    })
}

/// The strictly better strategy for node `i`, if any.
pub(crate) fn strict_best_response(
    g: &Graph,
    s: &Profile,
    p: &Params,
    i: usize,
) -> Option<Strategy> {
    let other = s.get(i).flip();
    (utility_if(g, s, p, i, other) > utility_at(g, s, p, i)).then_some(other)
}

/// r(n) = 2(n_ea + n_eb + n_ec)α / 2(n_ea·α + n_eb·β + n_ec·γ).
pub fn quotient(n: &EdgeState, p: &Params) -> Result<Rational> {
    let welfare = n.welfare(p);
    if !welfare.is_positive() {
        return Err(Error::ZeroWelfare);
    }
    Ok(n.optimal_welfare(p) / welfare)
}
