//! Bounded exploration of every interleaving.
//!
//! States are identified by their canonical form. Exploration is
//! breadth-first and level-synchronous: a level is expanded as a batch
//! (possibly in parallel) and successors are merged in a fixed order, so
//! state numbering does not depend on thread scheduling.

mod canon;
mod dot;

use std::collections::HashMap;

use serde::Serialize;

pub use canon::{
    canonical, canonical_config, canonicalize, normalize_shape, redex_labels, Canonical,
    CanonicalState, MAX_TIE_PERMUTATIONS,
};
pub use dot::to_dot;

use crate::engine::{enabled_redexes, Configuration, EngineError, Redex, TraceEvent};
use crate::par::{self, Parallelism};
use crate::store::ObjectStore;
use crate::syntax::Program;

pub type StateId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreOptions {
    pub max_depth: usize,
    pub max_states: usize,
    /// Copies each replication may spawn along one path.
    pub repl_budget: u32,
    pub parallelism: Parallelism,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            max_depth: 32,
            max_states: 100_000,
            repl_budget: 2,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StateFlags {
    /// No moves, and not every process is finished.
    pub deadlock: bool,
    /// Every process is finished.
    pub terminal: bool,
    /// Has moves that were not explored because of a bound.
    pub frontier: bool,
}

#[derive(Clone, Debug)]
pub struct StateNode {
    pub key: CanonicalState,
    pub depth: usize,
    pub flags: StateFlags,
    /// First edge that reached this state; on a shortest path.
    pub parent: Option<usize>,
    pub store: ObjectStore,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub from: StateId,
    pub to: StateId,
    pub event: TraceEvent,
}

impl Edge {
    /// The event without process ids or step number.
    pub fn label(&self) -> String {
        let kind = self.event.kind.as_str();
        match (&self.event.chan, &self.event.payload) {
            (Some(c), Some(p)) => format!("{kind} {c} {p}"),
            _ => kind.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct StateGraph {
    pub states: Vec<StateNode>,
    pub edges: Vec<Edge>,
    index: HashMap<CanonicalState, StateId>,
    /// Exploration stopped early because `max_states` was reached.
    pub truncated: bool,
}

impl StateGraph {
    pub fn lookup(&self, key: &CanonicalState) -> Option<StateId> {
        self.index.get(key).copied()
    }

    pub fn outgoing(&self, id: StateId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    /// Edges from the initial state to `id` along first-discovery parents.
    pub fn path_to(&self, id: StateId) -> Vec<&Edge> {
        let mut path = Vec::new();
        let mut at = id;
        while let Some(e) = self.states[at].parent {
            path.push(&self.edges[e]);
            at = self.edges[e].from;
        }
        path.reverse();
        path
    }

    pub fn has_frontier(&self) -> bool {
        self.states.iter().any(|s| s.flags.frontier)
    }

    fn insert(
        &mut self,
        key: CanonicalState,
        store: ObjectStore,
        depth: usize,
        parent: Option<usize>,
    ) -> StateId {
        let id = self.states.len();
        self.index.insert(key.clone(), id);
        self.states.push(StateNode {
            key,
            depth,
            flags: StateFlags::default(),
            parent,
            store,
        });
        id
    }
}

struct Successor {
    key: CanonicalState,
    event: TraceEvent,
    config: Configuration,
}

struct Expansion {
    terminal: bool,
    /// Some move exists, explored or not.
    any_move: bool,
    /// Spawns withheld by the replication budget.
    over_budget: bool,
    successors: Vec<Successor>,
}

fn expand(
    config: &Configuration,
    depth: usize,
    options: &ExploreOptions,
) -> Result<Expansion, EngineError> {
    let redexes = enabled_redexes(config)?;
    let mut out = Expansion {
        terminal: config.is_terminated(),
        any_move: !redexes.is_empty(),
        over_budget: false,
        successors: Vec::new(),
    };
    if depth >= options.max_depth {
        return Ok(out);
    }
    for redex in &redexes {
        if let Redex::ReplSpawn { pid } = redex {
            let spawned = config.agent(*pid).map_or(0, |a| a.spawned);
            if spawned >= options.repl_budget {
                out.over_budget = true;
                continue;
            }
        }
        let mut next = config.clone();
        let event = next.apply(redex)?;
        out.successors.push(Successor {
            key: canonicalize(&next),
            event,
            config: next,
        });
    }
    Ok(out)
}

pub fn explore(program: &Program, options: &ExploreOptions) -> Result<StateGraph, EngineError> {
    explore_config(Configuration::load(program, 0)?, options)
}

pub fn explore_config(
    initial: Configuration,
    options: &ExploreOptions,
) -> Result<StateGraph, EngineError> {
    let initial = initial.without_trace();
    let mut graph = StateGraph::default();
    let root = graph.insert(canonicalize(&initial), initial.store().clone(), 0, None);
    let mut level: Vec<(StateId, Configuration)> = vec![(root, initial)];

    while !level.is_empty() {
        let expansions = par::map(options.parallelism, &level, |(id, config)| {
            expand(config, graph.states[*id].depth, options)
        });
        let mut next_level = Vec::new();
        for ((id, _), expansion) in level.iter().zip(expansions) {
            let expansion = expansion?;
            let depth = graph.states[*id].depth;
            let mut cut =
                expansion.over_budget || (expansion.any_move && depth >= options.max_depth);
            for succ in expansion.successors {
                let target = match graph.lookup(&succ.key) {
                    Some(t) => t,
                    None if graph.states.len() >= options.max_states => {
                        graph.truncated = true;
                        cut = true;
                        continue;
                    }
                    None => {
                        let store = succ.config.store().clone();
                        let t = graph.insert(succ.key, store, depth + 1, Some(graph.edges.len()));
                        next_level.push((t, succ.config));
                        t
                    }
                };
                graph.edges.push(Edge {
                    from: *id,
                    to: target,
                    event: succ.event,
                });
            }
            let flags = &mut graph.states[*id].flags;
            flags.terminal = expansion.terminal;
            flags.deadlock = !expansion.terminal && !expansion.any_move;
            flags.frontier = cut;
        }
        level = next_level;
    }
    Ok(graph)
}

#[derive(Clone, Debug)]
pub struct DeadlockWitness {
    pub state: StateId,
    pub key: CanonicalState,
    pub path: Vec<TraceEvent>,
}

#[derive(Clone, Debug)]
pub struct DeadlockReport {
    pub witnesses: Vec<DeadlockWitness>,
    /// Some part of the space was left unexplored, so absence of
    /// witnesses is not a proof of deadlock freedom.
    pub frontier_warning: bool,
}

impl DeadlockReport {
    pub fn is_deadlock_free(&self) -> bool {
        self.witnesses.is_empty()
    }
}

pub fn find_deadlocks(graph: &StateGraph) -> DeadlockReport {
    let witnesses = graph
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.flags.deadlock)
        .map(|(id, s)| DeadlockWitness {
            state: id,
            key: s.key.clone(),
            path: graph
                .path_to(id)
                .into_iter()
                .map(|e| e.event.clone())
                .collect(),
        })
        .collect();
    DeadlockReport {
        witnesses,
        frontier_warning: graph.has_frontier() || graph.truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile, CompileOptions};
    use crate::prelude::FILESYSTEM_DEMO;
    use crate::syntax::parse_program;

    fn graph(src: &str) -> StateGraph {
        explore(&parse_program(src).unwrap(), &ExploreOptions::default()).unwrap()
    }

    #[test]
    fn lone_receiver_is_one_deadlocked_state() {
        let g = graph("system = new c : nat in c?(x).0");
        assert_eq!(g.states.len(), 1);
        assert!(g.states[0].flags.deadlock);
        let report = find_deadlocks(&g);
        assert_eq!(report.witnesses.len(), 1);
        assert!(report.witnesses[0].path.is_empty());
    }

    #[test]
    fn sum_with_itself_deadlocks() {
        let g = graph("chan c : nat\nsystem = c!(z).0 + c?(x).0");
        assert_eq!(g.states.len(), 1);
        assert!(g.states[0].flags.deadlock);
    }

    #[test]
    fn demo_is_deadlock_free_with_one_terminal() {
        let compiled = compile(FILESYSTEM_DEMO, &CompileOptions::default()).unwrap();
        let g = explore(&compiled.linked, &ExploreOptions::default()).unwrap();
        let report = find_deadlocks(&g);
        assert!(report.is_deadlock_free());
        assert!(!report.frontier_warning);
        assert_eq!(g.states.iter().filter(|s| s.flags.terminal).count(), 1);
    }

    #[test]
    fn interleavings_merge() {
        // Two independent comms: four orders collapse to a diamond.
        let g = graph("chan a : nat\nchan b : nat\nsystem = a!(z).0 | a?(x).0 | b!(z).0 | b?(x).0");
        assert_eq!(g.states.len(), 4);
        assert_eq!(g.edges.len(), 4);
    }

    #[test]
    fn witness_path_is_shortest() {
        let g = graph("chan a : nat\nchan b : nat\nsystem = a!(z).b?(y).0 | a?(x).0");
        let report = find_deadlocks(&g);
        assert_eq!(report.witnesses.len(), 1);
        assert_eq!(report.witnesses[0].path.len(), 1);
    }

    #[test]
    fn replication_budget_marks_frontier() {
        let g = graph("chan a : nat\nsystem = !a!(z).0 | !a?(x).0");
        assert!(g.states.iter().any(|s| s.flags.frontier));
        assert!(g.states.iter().all(|s| !s.flags.deadlock));
        assert!(find_deadlocks(&g).frontier_warning);
    }

    #[test]
    fn depth_bound_marks_frontier() {
        let src = "chan a : nat\nsystem = a!(z).a!(z).a!(z).0 | a?(x).a?(x).a?(x).0";
        let opts = ExploreOptions {
            max_depth: 1,
            ..ExploreOptions::default()
        };
        let g = explore(&parse_program(src).unwrap(), &opts).unwrap();
        assert_eq!(g.states.len(), 2);
        assert!(g.states[1].flags.frontier);
        assert!(!g.states[1].flags.deadlock);
    }

    #[test]
    fn state_cap_truncates() {
        let src = "chan a : nat\nchan b : nat\nsystem = a!(z).0 | a?(x).0 | b!(z).0 | b?(x).0";
        let opts = ExploreOptions {
            max_states: 2,
            ..ExploreOptions::default()
        };
        let g = explore(&parse_program(src).unwrap(), &opts).unwrap();
        assert_eq!(g.states.len(), 2);
        assert!(g.truncated);
        assert!(find_deadlocks(&g).frontier_warning);
    }

    #[test]
    fn alpha_variants_share_a_state() {
        let p = parse_program(
            "chan o : nat\nsystem = new a : nat in new b : nat in (a!(z).o!(1).0 | b!(z).o!(2).0)",
        )
        .unwrap();
        let q = parse_program(
            "chan o : nat\nsystem = new b : nat in new a : nat in (b!(z).o!(2).0 | a!(z).o!(1).0)",
        )
        .unwrap();
        let cp = canonicalize(&Configuration::load(&p, 0).unwrap());
        let cq = canonicalize(&Configuration::load(&q, 0).unwrap());
        assert_eq!(cp, cq);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let compiled = compile(FILESYSTEM_DEMO, &CompileOptions::default()).unwrap();
        let seq = explore(
            &compiled.linked,
            &ExploreOptions {
                parallelism: Parallelism::Sequential,
                ..ExploreOptions::default()
            },
        )
        .unwrap();
        let par = explore(&compiled.linked, &ExploreOptions::default()).unwrap();
        let keys = |g: &StateGraph| g.states.iter().map(|s| s.key.clone()).collect::<Vec<_>>();
        assert_eq!(keys(&seq), keys(&par));
        assert_eq!(seq.edges.len(), par.edges.len());
    }
}
