//! Price-of-anarchy analysis: the Φ/Λ edge decomposition, the closed-form
//! upper bound and checkers for each inequality in the bounding argument.
//!
//! The checkers return `Ok(false)` when an inequality fails. They are meant
//! to be run against real equilibria (see [`crate::oracle`]), where every one
//! of them should hold.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{is_nash, quotient};
use crate::graph::{count_kinds, edge_kind, EdgeKind, EdgeState, Graph, Params, Profile};
use crate::rational::{self, Rational};

/// Split of the edge set into H_Φ (C-edges and every edge sharing an
/// endpoint with one) and H_Λ (the rest). Edges are indices into
/// [`Graph::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub phi_edges: Vec<usize>,
    pub lambda_edges: Vec<usize>,
    pub phi_state: EdgeState,
    pub lambda_state: EdgeState,
}

pub fn decompose(g: &Graph, s: &Profile) -> Result<Decomposition> {
    s.check_covers(g)?;
    let mut touches_c = vec![false; g.node_count()];
    for &(u, v) in g.edges() {
        if edge_kind(s, (u, v)) == EdgeKind::C {
            touches_c[u] = true;
            touches_c[v] = true;
        }
    }
    let (phi_edges, lambda_edges): (Vec<usize>, Vec<usize>) = (0..g.edge_count()).partition(|&e| {
        let (u, v) = g.edges()[e];
        touches_c[u] || touches_c[v]
    });
    let phi_state = count_kinds(s, phi_edges.iter().map(|&e| &g.edges()[e]));
    let lambda_state = count_kinds(s, lambda_edges.iter().map(|&e| &g.edges()[e]));
    Ok(Decomposition {
        phi_edges,
        lambda_edges,
        phi_state,
        lambda_state,
    })
}

impl Decomposition {
    pub fn phi_subgraph(&self, g: &Graph) -> Graph {
        g.edge_induced_subgraph(&self.phi_edges)
    }

    pub fn lambda_subgraph(&self, g: &Graph) -> Graph {
        g.edge_induced_subgraph(&self.lambda_edges)
    }
}

/// Whether the restrictions of an equilibrium to H_Φ and H_Λ are themselves
/// equilibria of those subgraphs.
pub fn nash_decomposition_check(g: &Graph, s: &Profile, p: &Params) -> Result<bool> {
    if !is_nash(g, s, p)?.is_nash {
        return Err(Error::NotAnEquilibrium);
    }
    let d = decompose(g, s)?;
    for sub in [d.phi_subgraph(g), d.lambda_subgraph(g)] {
        let restricted = s.restrict(g, &sub)?;
        if !is_nash(&sub, &restricted, p)?.is_nash {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `r(x + y) <= max(r(x), r(y))`, with a zero part left out of the max.
pub fn mediant_holds(x: &EdgeState, y: &EdgeState, p: &Params) -> Result<bool> {
    let whole = quotient(&(x + y), p)?;
    let mut best: Option<Rational> = None;
    for part in [x, y] {
        if part.is_zero() {
            continue;
        }
        let r = quotient(part, p)?;
        if best.as_ref().is_none_or(|b| &r > b) {
            best = Some(r);
        }
    }
    Ok(best.is_some_and(|b| whole <= b))
}

/// The mediant step for a decomposition: `r(n) <= max(r(n_Φ), r(n_Λ))`.
pub fn mediant_check(n: &EdgeState, d: &Decomposition, p: &Params) -> Result<bool> {
    let sum = &d.phi_state + &d.lambda_state;
    if &sum != n {
        return Err(Error::StateMismatch(format!(
            "phi {} + lambda {} = {sum}, expected {n}",
            d.phi_state, d.lambda_state
        )));
    }
    mediant_holds(&d.phi_state, &d.lambda_state, p)
}

/// `r(n_Λ) <= α/β` for a C-edge-free state.
pub fn lambda_bound_check(lambda_state: &EdgeState, p: &Params) -> Result<bool> {
    if !lambda_state.n_ec.is_zero() {
        return Err(Error::InvalidLambdaState(lambda_state.n_ec.clone()));
    }
    Ok(quotient(lambda_state, p)? <= p.alpha() / p.beta())
}

/// The four lower bounds on A- and B-edges in H_Φ, each evaluated on a
/// concrete state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingBounds {
    /// (β−γ)/(2(α−γ))·n_c
    #[serde(with = "rational::serde_str")]
    pub a_shared: Rational,
    /// (α−γ)/(2(β−γ))·n_c
    #[serde(with = "rational::serde_str")]
    pub b_shared: Rational,
    /// (β−γ)/(α−γ)·n_c − n_c(n_c−1)/2
    #[serde(with = "rational::serde_str")]
    pub a_simple: Rational,
    /// (α−γ)/(β−γ)·n_c − n_c(n_c−1)/2
    #[serde(with = "rational::serde_str")]
    pub b_simple: Rational,
}

impl CountingBounds {
    pub fn for_c_edges(n_c: &Rational, p: &Params) -> Result<Self> {
        let (x, y) = gaps(p)?;
        let two = rational::int(2);
        let pairs = n_c * (n_c - Rational::one()) / &two;
        Ok(Self {
            a_shared: &y / (&x * &two) * n_c,
            b_shared: &x / (&y * &two) * n_c,
            a_simple: &y / &x * n_c - &pairs,
            b_simple: &x / &y * n_c - &pairs,
        })
    }

    pub fn holds_for(&self, n: &EdgeState) -> bool {
        n.n_ea >= self.a_shared
            && n.n_eb >= self.b_shared
            && n.n_ea >= self.a_simple
            && n.n_eb >= self.b_simple
    }
}

/// (α−γ, β−γ), both required to be positive.
fn gaps(p: &Params) -> Result<(Rational, Rational)> {
    let x = p.alpha() - p.gamma();
    let y = p.beta() - p.gamma();
    if !x.is_positive() || !y.is_positive() {
        return Err(Error::DegenerateRatio);
    }
    Ok((x, y))
}

/// Checks the H_Φ counting lemmas (the shared-edge bounds and their
/// simple-graph strengthening) on the equilibrium `s`.
pub fn phi_counting_check(g: &Graph, s: &Profile, p: &Params) -> Result<bool> {
    gaps(p)?;
    if !is_nash(g, s, p)?.is_nash {
        return Err(Error::NotAnEquilibrium);
    }
    let d = decompose(g, s)?;
    Ok(CountingBounds::for_c_edges(&d.phi_state.n_ec, p)?.holds_for(&d.phi_state))
}

/// The closed-form upper bound and the two related values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    /// α(α+β−2γ)/(αβ−γ²), or 1 when α = β = γ.
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    /// α/β + 1
    #[serde(with = "rational::serde_str")]
    pub corollary_bound: Rational,
    /// α/β, the value of the bound at γ = β.
    #[serde(with = "rational::serde_str")]
    pub gamma_eq_beta_value: Rational,
    /// Set when αβ = γ², i.e. α = β = γ, where the closed form is 0/0.
    pub degenerate: bool,
    pub inputs: Params,
}

pub fn poa_upper_bound(p: &Params) -> BoundReport {
    let (a, b, c) = (p.alpha(), p.beta(), p.gamma());
    let denom = a * b - c * c;
    let degenerate = denom.is_zero();
    let bound = if degenerate {
        Rational::one()
    } else {
        a * (a + b - c * rational::int(2)) / denom
    };
    BoundReport {
        bound,
        corollary_bound: a / b + Rational::one(),
        gamma_eq_beta_value: a / b,
        degenerate,
        inputs: p.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityViolation {
    pub check: String,
    pub params: Params,
    pub state: Option<EdgeState>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GammaPoint {
    #[serde(with = "rational::serde_str")]
    pub gamma: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GammaSeries {
    #[serde(with = "rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "rational::serde_str")]
    pub beta: Rational,
    pub points: Vec<GammaPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub state_checks: usize,
    /// (params, state) pairs left out because a quotient had zero welfare.
    pub skipped: usize,
    pub gamma_series: Vec<GammaSeries>,
    pub violations: Vec<MonotonicityViolation>,
}

impl MonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sign checks of the quotient's partial derivatives by exact unit finite
/// differences, plus monotonicity of the bound in γ.
///
/// r is a ratio of linear forms, so the sign of a finite difference along a
/// coordinate equals the sign of the partial derivative along it.
pub fn monotonicity_report(p_grid: &[Params], state_grid: &[EdgeState]) -> MonotonicityReport {
    let mut violations = Vec::new();
    let mut state_checks = 0;
    let mut skipped = 0;
    let one = Rational::one();
    for p in p_grid {
        for n in state_grid {
            let step = |da: bool, db: bool, dc: bool| {
                let bump = |x: &Rational, on: bool| if on { x + &one } else { x.clone() };
                EdgeState::new(bump(&n.n_ea, da), bump(&n.n_eb, db), bump(&n.n_ec, dc))
            };
            let values = (
                quotient(n, p),
                quotient(&step(true, false, false), p),
                quotient(&step(false, true, false), p),
                quotient(&step(false, false, true), p),
            );
            let (Ok(base), Ok(more_a), Ok(more_b), Ok(more_c)) = values else {
                skipped += 1;
                continue;
            };
            state_checks += 1;
            let mut flag = |check: &str, detail: String| {
                violations.push(MonotonicityViolation {
                    check: check.to_string(),
                    params: p.clone(),
                    state: Some(n.clone()),
                    detail,
                })
            };
            if more_a > base {
                flag("dr/dn_ea <= 0", format!("r rose from {base} to {more_a}"));
            }
            if more_c < base {
                flag("dr/dn_ec >= 0", format!("r fell from {base} to {more_c}"));
            }
            let predicted =
                (&n.n_ea * (p.alpha() - p.beta()) + &n.n_ec * (p.gamma() - p.beta())).signum();
            let observed = (&more_b - &base).signum();
            if predicted != observed {
                flag(
                    "sign dr/dn_eb",
                    format!("predicted sign {predicted}, observed {observed}"),
                );
            }
        }
    }

    let mut gamma_series: Vec<GammaSeries> = Vec::new();
    for p in p_grid {
        let point = GammaPoint {
            gamma: p.gamma().clone(),
            bound: poa_upper_bound(p).bound,
        };
        match gamma_series
            .iter_mut()
            .find(|g| &g.alpha == p.alpha() && &g.beta == p.beta())
        {
            Some(series) => series.points.push(point),
            None => gamma_series.push(GammaSeries {
                alpha: p.alpha().clone(),
                beta: p.beta().clone(),
                points: vec![point],
            }),
        }
    }
    for series in &mut gamma_series {
        series.points.sort_by(|x, y| x.gamma.cmp(&y.gamma));
        series.points.dedup_by(|x, y| x.gamma == y.gamma);
        for w in series.points.windows(2) {
            if w[1].bound > w[0].bound {
                let params = Params::new(
                    series.alpha.clone(),
                    series.beta.clone(),
                    w[1].gamma.clone(),
                )
                .expect("grid params were validated");
                violations.push(MonotonicityViolation {
                    check: "bound non-increasing in gamma".to_string(),
                    params,
                    state: None,
                    detail: format!(
                        "bound {} at gamma {} exceeds {} at gamma {}",
                        w[1].bound, w[1].gamma, w[0].bound, w[0].gamma
                    ),
                });
            }
        }
    }

    MonotonicityReport {
        state_checks,
        skipped,
        gamma_series,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Strategy::{A, B};
    use crate::rational::{int, ratio};

    fn cycle4() -> (Graph, Profile) {
        let g = Graph::new(
            ["v1", "v2", "v3", "v4"],
            [("v1", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v1")],
        )
        .unwrap();
        (g, Profile::new(vec![A, A, B, B]))
    }

    fn nine_edge() -> (Graph, Profile) {
        let g = Graph::new(
            ["a1", "a2", "b1", "b2", "b3", "b4"],
            [
                ("a1", "a2"),
                ("a1", "b1"),
                ("a1", "b2"),
                ("a2", "b3"),
                ("a2", "b4"),
                ("b1", "b2"),
                ("b2", "b3"),
                ("b3", "b4"),
                ("b4", "b1"),
            ],
        )
        .unwrap();
        (g, Profile::new(vec![A, A, B, B, B, B]))
    }

    fn s(a: u64, b: u64, c: u64) -> EdgeState {
        EdgeState::from_counts(a, b, c)
    }

    #[test]
    fn decompose_examples() {
        let (g, _) = nine_edge();
        let d = decompose(&g, &Profile::uniform(6, A)).unwrap();
        assert!(d.phi_edges.is_empty());
        assert_eq!(d.lambda_state, s(9, 0, 0));

        let (g, prof) = cycle4();
        let d = decompose(&g, &prof).unwrap();
        assert_eq!(d.phi_edges.len(), 4);
        assert!(d.lambda_edges.is_empty());

        let path = Graph::new(
            ["v1", "v2", "v3", "v4"],
            [("v1", "v2"), ("v2", "v3"), ("v3", "v4")],
        )
        .unwrap();
        let d = decompose(&path, &Profile::new(vec![A, A, A, B])).unwrap();
        assert_eq!(d.phi_state, s(1, 0, 1));
        assert_eq!(d.lambda_state, s(1, 0, 0));
        let lambda_ids: Vec<_> = d
            .lambda_edges
            .iter()
            .map(|&e| path.edge_ids().nth(e).unwrap())
            .collect();
        assert_eq!(lambda_ids, vec![("v1", "v2")]);
    }

    #[test]
    fn nash_decomposition_examples() {
        let (g, prof) = cycle4();
        let p = Params::from_ints(1, 1, 0).unwrap();
        assert!(nash_decomposition_check(&g, &prof, &p).unwrap());
        assert!(nash_decomposition_check(&g, &Profile::uniform(4, B), &p).unwrap());
        assert_eq!(
            nash_decomposition_check(&g, &Profile::new(vec![A, B, A, B]), &p),
            Err(Error::NotAnEquilibrium)
        );
    }

    #[test]
    fn mediant_examples() {
        let p = Params::from_ints(3, 2, 1).unwrap();
        let d = Decomposition {
            phi_edges: vec![],
            lambda_edges: vec![],
            phi_state: s(1, 4, 4),
            lambda_state: EdgeState::zero(),
        };
        assert!(mediant_check(&s(1, 4, 4), &d, &p).unwrap());

        let p = Params::from_ints(1, 1, 0).unwrap();
        let d = Decomposition {
            phi_edges: vec![],
            lambda_edges: vec![],
            phi_state: s(1, 0, 1),
            lambda_state: s(1, 0, 0),
        };
        assert_eq!(quotient(&s(2, 0, 1), &p).unwrap(), ratio(3, 2));
        assert_eq!(quotient(&s(1, 0, 1), &p).unwrap(), int(2));
        assert!(mediant_check(&s(2, 0, 1), &d, &p).unwrap());
        assert!(matches!(
            mediant_check(&s(2, 0, 2), &d, &p),
            Err(Error::StateMismatch(_))
        ));
        assert_eq!(
            mediant_holds(&EdgeState::zero(), &EdgeState::zero(), &p),
            Err(Error::ZeroWelfare)
        );
    }

    #[test]
    fn bound_examples() {
        let b = |a, be, g| poa_upper_bound(&Params::from_ints(a, be, g).unwrap());
        assert_eq!(b(1, 1, 0).bound, int(2));
        assert_eq!(b(3, 2, 1).bound, ratio(9, 5));
        assert_eq!(b(5, 3, 3).bound, ratio(5, 3));
        assert_eq!(b(5, 3, 3).gamma_eq_beta_value, ratio(5, 3));
        let r = b(2, 1, 0);
        assert_eq!(r.bound, int(3));
        assert_eq!(r.bound, r.corollary_bound);
        let flat = b(2, 2, 2);
        assert!(flat.degenerate);
        assert_eq!(flat.bound, int(1));
        assert!(!b(2, 2, 1).degenerate);
    }

    #[test]
    fn lambda_bound_examples() {
        let p = Params::from_ints(3, 2, 1).unwrap();
        assert!(lambda_bound_check(&s(0, 5, 0), &p).unwrap());
        assert_eq!(quotient(&s(0, 5, 0), &p).unwrap(), ratio(3, 2));
        assert!(lambda_bound_check(&s(5, 0, 0), &p).unwrap());
        let p = Params::from_ints(3, 2, 0).unwrap();
        assert_eq!(quotient(&s(1, 1, 0), &p).unwrap(), ratio(6, 5));
        assert!(lambda_bound_check(&s(1, 1, 0), &p).unwrap());
        assert!(matches!(
            lambda_bound_check(&s(1, 1, 1), &p),
            Err(Error::InvalidLambdaState(_))
        ));
    }

    #[test]
    fn counting_check_examples() {
        let (g, prof) = nine_edge();
        let p = Params::from_ints(3, 2, 1).unwrap();
        assert!(phi_counting_check(&g, &prof, &p).unwrap());
        let bounds = CountingBounds::for_c_edges(&int(4), &p).unwrap();
        // tight at the worst-case instance
        assert_eq!(bounds.a_shared, int(1));
        assert_eq!(bounds.b_shared, int(4));

        assert!(phi_counting_check(&g, &Profile::uniform(6, B), &p).unwrap());
        assert_eq!(
            phi_counting_check(&g, &prof, &Params::from_ints(3, 2, 2).unwrap()),
            Err(Error::DegenerateRatio)
        );
        assert_eq!(
            phi_counting_check(&g, &Profile::new(vec![A, B, B, B, B, B]), &p),
            Err(Error::NotAnEquilibrium)
        );
    }

    #[test]
    fn gamma_series_decreases_to_alpha_over_beta() {
        let grid: Vec<_> = [0, 1, 2, 3, 4]
            .iter()
            .map(|&k| Params::new(int(3), int(2), ratio(k, 2)).unwrap())
            .collect();
        let report = monotonicity_report(&grid, &[s(1, 1, 1), s(2, 1, 1)]);
        assert!(report.is_clean(), "{:?}", report.violations);
        let bounds: Vec<_> = report.gamma_series[0]
            .points
            .iter()
            .map(|pt| pt.bound.clone())
            .collect();
        assert_eq!(
            bounds,
            vec![
                ratio(5, 2),
                ratio(48, 23),
                ratio(9, 5),
                ratio(8, 5),
                ratio(3, 2)
            ]
        );
        assert!(bounds.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn moving_an_edge_to_a_never_raises_quotient() {
        for (a, b, g) in [(3, 2, 1), (1, 1, 0), (2, 2, 1), (5, 1, 1)] {
            let p = Params::from_ints(a, b, g).unwrap();
            assert!(quotient(&s(2, 1, 1), &p).unwrap() <= quotient(&s(1, 1, 1), &p).unwrap());
        }
    }

    #[test]
    fn monotonicity_flags_a_nonmonotone_series() {
        // at gamma = beta = alpha the bound flag gives 1, still fine; feed an
        // out-of-order grid to make sure sorting happens before comparing
        let grid = vec![
            Params::from_ints(3, 2, 2).unwrap(),
            Params::from_ints(3, 2, 0).unwrap(),
        ];
        let report = monotonicity_report(&grid, &[s(0, 0, 1)]);
        assert!(report.is_clean());
        assert_eq!(report.gamma_series[0].points[0].gamma, int(0));
        // (0,0,1) at gamma = 0 has zero welfare
        assert_eq!(report.skipped, 1);
    }
}
