//! Canonical forms of configurations up to structural congruence.
//!
//! Each agent is rendered with its environment inlined. Parallel and sum
//! operands are flattened, stripped of `0` and sorted; restrictions inside
//! terms are named by nesting level. Channels opened at top level are
//! renamed `$0`, `$1`, ... in an order fixed by how they are used, so
//! states differing only in fresh ids, process ids or presentation collide.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::engine::{alternatives, Agent, ChanScope, Configuration, Endpoint, Redex};
use crate::syntax::{
    pretty_proc, pretty_sort, Action, ActionKind, ChannelSort, CompExpr, CompKind, CompPrinter,
    Name, Payload, ProcKind, ProcTerm, Span,
};
use crate::value::{ChanId, Value, ValueEnv};

/// Tie-breaking among interchangeable fresh channels tries at most this
/// many orderings; beyond it, ties fall back to id order.
pub const MAX_TIE_PERMUTATIONS: usize = 720;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalState(Arc<str>);

impl CanonicalState {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone)]
enum Bound {
    Chan(String, Option<ChannelSort>),
    Value,
}

struct Renderer<'c> {
    config: &'c Configuration,
    fresh: &'c dyn Fn(ChanId) -> String,
    seen: RefCell<BTreeSet<ChanId>>,
}

impl<'c> Renderer<'c> {
    fn new(config: &'c Configuration, fresh: &'c dyn Fn(ChanId) -> String) -> Self {
        Renderer {
            config,
            fresh,
            seen: RefCell::new(BTreeSet::new()),
        }
    }

    fn chan_id_token(&self, id: ChanId) -> String {
        match self.config.chan_info(id) {
            Some(info) if info.scope == ChanScope::Global => info.name.to_string(),
            _ => {
                self.seen.borrow_mut().insert(id);
                (self.fresh)(id)
            }
        }
    }

    fn chan_binding(
        &self,
        name: &Name,
        scope: &[(Name, Bound)],
        env: &ValueEnv,
    ) -> (String, Option<ChannelSort>) {
        for (n, b) in scope.iter().rev() {
            if n == name {
                if let Bound::Chan(token, sort) = b {
                    return (token.clone(), sort.clone());
                }
            }
        }
        match env.lookup_chan(name) {
            Some(id) => (
                self.chan_id_token(id),
                self.config.chan_info(id).map(|i| i.sort.clone()),
            ),
            None => (format!("?{name}"), None),
        }
    }

    fn value(&self, v: &Value) -> String {
        match v {
            Value::Nat(n) => n.to_string(),
            Value::Obj(id) => id.to_string(),
            Value::Chan(id) => self.chan_id_token(*id),
            Value::Closure(c) => {
                let lambda = CompExpr::new(
                    CompKind::Lambda {
                        param: c.param.clone(),
                        param_ty: c.param_ty.clone(),
                        body: c.body.clone(),
                    },
                    Span::default(),
                );
                let mut hook = |name: &Name| {
                    c.env
                        .lookup_local_value(name)
                        .map(|v| format!("({})", self.value(v)))
                };
                CompPrinter::new(&mut hook).print(&lambda)
            }
        }
    }

    fn value_hook<'a>(
        &'a self,
        scope: &'a [(Name, Bound)],
        env: &'a ValueEnv,
    ) -> impl FnMut(&Name) -> Option<String> + 'a {
        move |name: &Name| {
            let bound_here = scope
                .iter()
                .rev()
                .any(|(n, b)| n == name && matches!(b, Bound::Value));
            if bound_here {
                None
            } else {
                env.lookup_local_value(name)
                    .map(|v| format!("({})", self.value(v)))
            }
        }
    }

    fn payload(&self, p: &Payload, scope: &[(Name, Bound)], env: &ValueEnv) -> String {
        match p {
            Payload::Chan { name, .. } => self.chan_binding(name, scope, env).0,
            Payload::Comp(e) => {
                let mut hook = self.value_hook(scope, env);
                CompPrinter::new(&mut hook).print(e)
            }
            Payload::Data(d) => {
                let mut hook = self.value_hook(scope, env);
                let mut out = String::new();
                CompPrinter::new(&mut hook).write_data(&mut out, d);
                out
            }
        }
    }

    /// Renders an action and pushes whatever it binds.
    fn action(&self, a: &Action, scope: &mut Vec<(Name, Bound)>, env: &ValueEnv) -> String {
        match &a.kind {
            ActionKind::Send { chan, payload } => {
                let (token, _) = self.chan_binding(chan, scope, env);
                format!("{token}!({})", self.payload(payload, scope, env))
            }
            ActionKind::Receive { chan, binder } => {
                let (token, sort) = self.chan_binding(chan, scope, env);
                let bound = match sort {
                    Some(ChannelSort::CarriesChan(inner)) => {
                        Bound::Chan(format!("'{binder}"), Some(*inner))
                    }
                    _ => Bound::Value,
                };
                scope.push((binder.clone(), bound));
                format!("{token}?({binder})")
            }
            ActionKind::Match { left, right, inner } => {
                let l = self.payload(left, scope, env);
                let r = self.payload(right, scope, env);
                format!("[{l}={r}]{}", self.action(inner, scope, env))
            }
        }
    }

    fn binds(a: &Action) -> bool {
        matches!(a.innermost().kind, ActionKind::Receive { .. })
    }

    fn term(&self, p: &ProcTerm, scope: &mut Vec<(Name, Bound)>, env: &ValueEnv) -> String {
        match &p.kind {
            ProcKind::Nil => "0".to_string(),
            ProcKind::Par(..) => self.group(p, scope, env, true),
            ProcKind::Sum(..) => self.group(p, scope, env, false),
            ProcKind::Prefix(a, cont) => {
                let head = self.action(a, scope, env);
                let tail = self.term(cont, scope, env);
                if Self::binds(a) {
                    scope.pop();
                }
                format!("{head}.{tail}")
            }
            ProcKind::Restrict { chan, sort, body } => {
                let level = scope
                    .iter()
                    .filter(|(_, b)| matches!(b, Bound::Chan(t, _) if t.starts_with('%')))
                    .count();
                let token = format!("%{level}");
                scope.push((chan.clone(), Bound::Chan(token.clone(), Some(sort.clone()))));
                let body = self.term(body, scope, env);
                scope.pop();
                format!("new {token}:{} in {body}", pretty_sort(sort))
            }
            ProcKind::Repl(body) => format!("!({})", self.term(body, scope, env)),
            ProcKind::Ref(name) => match self.config_proc(name) {
                Some((body, base)) => self.term(&body, &mut Vec::new(), &base),
                None => format!("?{name}"),
            },
        }
    }

    fn config_proc(&self, name: &Name) -> Option<(ProcTerm, ValueEnv)> {
        self.config
            .proc_def(name)
            .map(|body| (body.clone(), self.config.base_env().clone()))
    }

    fn group(
        &self,
        p: &ProcTerm,
        scope: &mut Vec<(Name, Bound)>,
        env: &ValueEnv,
        par: bool,
    ) -> String {
        fn flatten<'t>(p: &'t ProcTerm, par: bool, out: &mut Vec<&'t ProcTerm>) {
            match &p.kind {
                ProcKind::Par(l, r) if par => {
                    flatten(l, par, out);
                    flatten(r, par, out);
                }
                ProcKind::Sum(l, r) if !par => {
                    flatten(l, par, out);
                    flatten(r, par, out);
                }
                _ => out.push(p),
            }
        }
        let mut operands = Vec::new();
        flatten(p, par, &mut operands);
        let mut parts: Vec<String> = operands
            .into_iter()
            .map(|o| self.term(o, scope, env))
            .filter(|s| s != "0")
            .collect();
        parts.sort();
        match parts.len() {
            0 => "0".to_string(),
            1 => parts.pop().expect("one part"),
            _ => format!("({})", parts.join(if par { " | " } else { " + " })),
        }
    }

    fn agent(&self, agent: &Agent) -> String {
        let mut scope = Vec::new();
        match &agent.term.kind {
            ProcKind::Repl(body) => {
                format!(
                    "!{}({})",
                    agent.spawned,
                    self.term(body, &mut scope, &agent.env)
                )
            }
            _ => self.term(&agent.term, &mut scope, &agent.env),
        }
    }

    fn soup(&self) -> Vec<String> {
        let mut parts: Vec<String> = self.config.agents().map(|a| self.agent(a)).collect();
        parts.sort();
        parts
    }
}

/// Canonical form plus the names it gave to fresh channels.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub state: CanonicalState,
    pub chan_names: BTreeMap<ChanId, String>,
}

pub fn canonicalize(config: &Configuration) -> CanonicalState {
    canonical(config).state
}

fn fresh_order(config: &Configuration) -> Vec<ChanId> {
    let marker = |_: ChanId| "ν".to_string();
    let probe = Renderer::new(config, &marker);
    probe.soup();
    let fresh: Vec<ChanId> = probe.seen.into_inner().into_iter().collect();
    if fresh.is_empty() {
        return fresh;
    }

    let mut signed: Vec<(String, ChanId)> = fresh
        .iter()
        .map(|&target| {
            let mark = move |id: ChanId| {
                if id == target {
                    "@".to_string()
                } else {
                    "ν".to_string()
                }
            };
            let sort = config
                .chan_info(target)
                .map(|i| pretty_sort(&i.sort))
                .unwrap_or_default();
            let sig = Renderer::new(config, &mark).soup().join(" | ");
            (format!("{sort}/{sig}"), target)
        })
        .collect();
    signed.sort();

    // Runs of equal signatures are interchangeable as far as the signature
    // can tell; settle them by trying every ordering.
    let mut groups: Vec<Vec<ChanId>> = Vec::new();
    let mut last: Option<&str> = None;
    for (sig, id) in &signed {
        if last == Some(sig.as_str()) {
            groups.last_mut().expect("group exists").push(*id);
        } else {
            groups.push(vec![*id]);
        }
        last = Some(sig.as_str());
    }
    let orderings: usize = groups
        .iter()
        .map(|g| (1..=g.len()).product::<usize>())
        .try_fold(1usize, |acc, n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
    if orderings == 1 || orderings > MAX_TIE_PERMUTATIONS {
        return groups.concat();
    }
    let mut best: Option<(Vec<String>, Vec<ChanId>)> = None;
    for order in orderings_of(&groups) {
        let names: BTreeMap<ChanId, String> = order
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, format!("${i}")))
            .collect();
        let lookup = |id: ChanId| names.get(&id).cloned().unwrap_or_else(|| "ν".into());
        let rendering = Renderer::new(config, &lookup).soup();
        if best.as_ref().is_none_or(|(r, _)| rendering < *r) {
            best = Some((rendering, order));
        }
    }
    best.expect("at least one ordering").1
}

/// Every concatenation of the groups with each group permuted.
fn orderings_of(groups: &[Vec<ChanId>]) -> Vec<Vec<ChanId>> {
    fn permutations(items: &[ChanId]) -> Vec<Vec<ChanId>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
    let mut acc: Vec<Vec<ChanId>> = vec![Vec::new()];
    for group in groups {
        let perms = permutations(group);
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.extend(p);
                    v
                })
            })
            .collect();
    }
    acc
}

pub fn canonical(config: &Configuration) -> Canonical {
    let order = fresh_order(config);
    let chan_names: BTreeMap<ChanId, String> = order
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, format!("${i}")))
        .collect();
    let lookup = |id: ChanId| chan_names.get(&id).cloned().unwrap_or_else(|| "ν".into());
    let renderer = Renderer::new(config, &lookup);
    let soup = renderer.soup();
    let mut key = if soup.is_empty() {
        "0".to_string()
    } else {
        soup.join(" | ")
    };
    key.push_str(" || ");
    let objects: Vec<String> = config
        .store()
        .objects()
        .map(|o| {
            let fields: Vec<String> = o
                .fields()
                .map(|(l, v)| format!("{l}={}", renderer.value(v)))
                .collect();
            format!("{}{{{}}}@v{}", o.id, fields.join(","), o.version)
        })
        .collect();
    key.push_str(&objects.join(" "));
    key.push_str(" || ");
    let scopes: Vec<String> = order
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let sort = config
                .chan_info(*id)
                .map(|info| pretty_sort(&info.sort))
                .unwrap_or_default();
            format!("${i}:{sort}")
        })
        .collect();
    key.push_str(&scopes.join(" "));
    Canonical {
        state: CanonicalState(key.into()),
        chan_names,
    }
}

/// Labels of enabled redexes that do not mention process ids or raw
/// channel ids, so congruent configurations yield equal label sets.
pub fn redex_labels(config: &Configuration, redexes: &[Redex]) -> BTreeSet<String> {
    let canon = canonical(config);
    let lookup = |id: ChanId| {
        canon
            .chan_names
            .get(&id)
            .cloned()
            .unwrap_or_else(|| "ν".into())
    };
    let renderer = Renderer::new(config, &lookup);
    let side = |end: &Endpoint| -> String {
        let Some(agent) = config.agent(end.pid) else {
            return "?".into();
        };
        let whole = renderer.agent(agent);
        let branch = alternatives(&agent.term)
            .into_iter()
            .find(|(b, _, _)| *b == end.branch)
            .map(|(_, action, cont)| {
                let prefix = ProcTerm::prefix(action.clone(), cont.clone());
                renderer.term(&prefix, &mut Vec::new(), &agent.env)
            })
            .unwrap_or_default();
        format!("{whole} @ {branch}")
    };
    redexes
        .iter()
        .map(|r| match r {
            Redex::Comm {
                sender, receiver, ..
            } => format!("comm {} => {}", side(sender), side(receiver)),
            Redex::ReplSpawn { pid } => format!(
                "spawn {}",
                config
                    .agent(*pid)
                    .map(|a| renderer.agent(a))
                    .unwrap_or_default()
            ),
        })
        .collect()
}

/// Flattens and sorts parallel and sum operands and drops `0` operands,
/// recursively. Binder names are left alone.
pub fn normalize_shape(p: &ProcTerm) -> ProcTerm {
    fn collect(p: &ProcTerm, par: bool, out: &mut Vec<ProcTerm>) {
        match &p.kind {
            ProcKind::Par(l, r) if par => {
                collect(l, par, out);
                collect(r, par, out);
            }
            ProcKind::Sum(l, r) if !par => {
                collect(l, par, out);
                collect(r, par, out);
            }
            _ => {
                let n = normalize_shape(p);
                if !n.is_nil() {
                    out.push(n);
                }
            }
        }
    }
    fn rebuild(mut parts: Vec<ProcTerm>, par: bool) -> ProcTerm {
        parts.sort_by_cached_key(pretty_proc);
        let mut iter = parts.into_iter();
        let Some(first) = iter.next() else {
            return ProcTerm::nil();
        };
        iter.fold(first, |acc, next| {
            if par {
                ProcTerm::par(acc, next)
            } else {
                ProcTerm::sum(acc, next)
            }
        })
    }
    match &p.kind {
        ProcKind::Par(..) | ProcKind::Sum(..) => {
            let par = matches!(p.kind, ProcKind::Par(..));
            let mut parts = Vec::new();
            collect(p, par, &mut parts);
            rebuild(parts, par)
        }
        ProcKind::Prefix(a, cont) => ProcTerm::prefix(a.clone(), normalize_shape(cont)),
        ProcKind::Restrict { chan, sort, body } => {
            ProcTerm::restrict(chan.clone(), sort.clone(), normalize_shape(body))
        }
        ProcKind::Repl(body) => ProcTerm::repl(normalize_shape(body)),
        ProcKind::Nil | ProcKind::Ref(_) => p.clone(),
    }
}

/// A configuration rebuilt in canonical presentation: agents renumbered in
/// canonical order, terms shape-normalized, fresh channels renumbered.
pub fn canonical_config(config: &Configuration) -> Configuration {
    let canon = canonical(config);
    let lookup = |id: ChanId| {
        canon
            .chan_names
            .get(&id)
            .cloned()
            .unwrap_or_else(|| "ν".into())
    };
    let renderer = Renderer::new(config, &lookup);
    let mut agents: Vec<(String, &Agent)> =
        config.agents().map(|a| (renderer.agent(a), a)).collect();
    agents.sort_by(|a, b| a.0.cmp(&b.0));
    let first_fresh = config
        .chans()
        .filter(|(_, i)| i.scope == ChanScope::Global)
        .count() as u64;
    let renumber: BTreeMap<ChanId, ChanId> = canon
        .chan_names
        .keys()
        .map(|id| {
            let rank: u64 = canon.chan_names[id][1..].parse().expect("names are $k");
            (*id, ChanId(first_fresh + rank))
        })
        .collect();
    let rebuilt: Vec<Agent> = agents
        .into_iter()
        .enumerate()
        .map(|(i, (_, a))| Agent {
            pid: crate::engine::Pid(i as u64),
            term: normalize_shape(&a.term),
            env: remap_env(&a.env, &renumber),
            spawned: a.spawned,
        })
        .collect();
    config.rebuilt(rebuilt, &renumber)
}

fn remap_env(env: &ValueEnv, renumber: &BTreeMap<ChanId, ChanId>) -> ValueEnv {
    let bindings: Vec<(Name, Value)> = env
        .local_values()
        .map(|(n, v)| (n.clone(), v.clone()))
        .collect();
    let mut out = ValueEnv::new(env.globals().clone());
    for (name, value) in bindings.into_iter().rev() {
        let value = match value {
            Value::Chan(id) => Value::Chan(renumber.get(&id).copied().unwrap_or(id)),
            other => other,
        };
        out = out.bind(name, value);
    }
    out
}
