//! Sequential strict best-response dynamics.
//!
//! The game is an exact potential game with Φ = SW/2, so every strict
//! improvement raises Φ and the process stops after finitely many steps at a
//! weak equilibrium.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{potential, strict_best_response};
use crate::graph::{Graph, Params, Profile, Strategy};
use crate::rational::{self, Rational};

/// Name of the generator behind [`Schedule::Random`].
pub const DYNAMICS_PRNG: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Nodes in declaration order, every round.
    RoundRobin,
    /// A fresh seeded permutation each round.
    Random,
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "round-robin" => Ok(Schedule::RoundRobin),
            "random" | "random-permutation" => Ok(Schedule::Random),
            other => Err(Error::Parse(format!("unknown schedule `{other}`"))),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::RoundRobin => "round-robin",
            Schedule::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub node: String,
    pub from: Strategy,
    pub to: Strategy,
    #[serde(with = "rational::serde_str")]
    pub potential_after: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsTrace {
    pub steps: Vec<Step>,
    pub final_profile: Profile,
    pub rounds: usize,
    pub converged: bool,
}

/// Applies strict best responses until a whole round changes nothing.
pub fn run_dynamics(
    g: &Graph,
    start: &Profile,
    p: &Params,
    schedule: Schedule,
    seed: u64,
) -> Result<DynamicsTrace> {
    start.check_covers(g)?;
    let mut s = start.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    let mut steps = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        if schedule == Schedule::Random {
            order.shuffle(&mut rng);
        }
        let mut changed = false;
        for &i in &order {
            if let Some(to) = strict_best_response(g, &s, p, i) {
                let from = s.get(i);
                s.set(i, to);
                steps.push(Step {
                    node: g.node_id(i).to_string(),
                    from,
                    to,
                    potential_after: potential(g, &s, p)?,
                });
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(DynamicsTrace {
        steps,
        final_profile: s,
        rounds,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_nash;
    use crate::graph::Strategy::{A, B};

    #[test]
    fn single_edge_moves_to_bb() {
        let g = Graph::new(["u", "v"], [("u", "v")]).unwrap();
        let p = Params::from_ints(2, 1, 0).unwrap();
        let trace =
            run_dynamics(&g, &Profile::new(vec![A, B]), &p, Schedule::RoundRobin, 0).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].node, "u");
        assert_eq!((trace.steps[0].from, trace.steps[0].to), (A, B));
        assert_eq!(trace.steps[0].potential_after, rational::int(1));
        assert_eq!(trace.final_profile.strategies(), &[B, B]);
        assert!(trace.converged);
    }

    #[test]
    fn equilibria_take_no_steps() {
        let g = Graph::new(
            ["v1", "v2", "v3", "v4"],
            [("v1", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v1")],
        )
        .unwrap();
        let p = Params::from_ints(1, 1, 0).unwrap();
        for start in [Profile::uniform(4, A), Profile::new(vec![A, A, B, B])] {
            for schedule in [Schedule::RoundRobin, Schedule::Random] {
                let trace = run_dynamics(&g, &start, &p, schedule, 9).unwrap();
                assert!(trace.steps.is_empty());
                assert_eq!(trace.final_profile, start);
            }
        }
    }

    #[test]
    fn random_schedule_is_reproducible_and_ends_at_equilibrium() {
        let g = crate::oracle::random_graph(12, &rational::ratio(1, 3), 5);
        let p = Params::from_ints(3, 2, 0).unwrap();
        let start = Profile::from_index(12, 0b1010_1100_0110);
        let a = run_dynamics(&g, &start, &p, Schedule::Random, 77).unwrap();
        let b = run_dynamics(&g, &start, &p, Schedule::Random, 77).unwrap();
        assert_eq!(a, b);
        assert!(is_nash(&g, &a.final_profile, &p).unwrap().is_nash);
        assert!(a
            .steps
            .windows(2)
            .all(|w| w[1].potential_after > w[0].potential_after));
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!(
            "round-robin".parse::<Schedule>().unwrap(),
            Schedule::RoundRobin
        );
        assert_eq!("random".parse::<Schedule>().unwrap(), Schedule::Random);
        assert!("sideways".parse::<Schedule>().is_err());
    }
}
