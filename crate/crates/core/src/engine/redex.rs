use std::collections::BTreeMap;

use serde::Serialize;

use super::config::{Configuration, Pid};
use super::EngineError;
use crate::eval::eval_comp;
use crate::store::ObjectStore;
use crate::syntax::{Action, ActionKind, Name, Payload, ProcKind, ProcTerm};
use crate::value::{guard_equal, ChanId, Value, ValueEnv};

/// One side of a communication: an agent and, for sums, the chosen branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Endpoint {
    pub pid: Pid,
    pub branch: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Redex {
    Comm {
        sender: Endpoint,
        receiver: Endpoint,
        chan: ChanId,
    },
    /// Unfold one copy of a replication.
    ReplSpawn { pid: Pid },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Polarity {
    Send,
    Receive,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Offer {
    pub(crate) branch: Option<usize>,
    pub(crate) polarity: Polarity,
    pub(crate) chan: ChanId,
}

/// Channel ids at or above this are placeholders for restrictions a
/// replication would open if it were unfolded.
const SPECULATIVE_BASE: u64 = 1 << 62;

fn is_speculative(id: ChanId) -> bool {
    id.0 >= SPECULATIVE_BASE
}

/// The prefixed alternatives of an agent, with branch indices for sums.
pub fn alternatives(term: &ProcTerm) -> Vec<(Option<usize>, &Action, &ProcTerm)> {
    fn flatten<'t>(term: &'t ProcTerm, out: &mut Vec<&'t ProcTerm>) {
        match &term.kind {
            ProcKind::Sum(l, r) => {
                flatten(l, out);
                flatten(r, out);
            }
            ProcKind::Prefix(..) => out.push(term),
            _ => {}
        }
    }
    match &term.kind {
        ProcKind::Prefix(action, cont) => vec![(None, action, &**cont)],
        ProcKind::Sum(..) => {
            let mut prefixes = Vec::new();
            flatten(term, &mut prefixes);
            prefixes
                .into_iter()
                .enumerate()
                .filter_map(|(i, p)| match &p.kind {
                    ProcKind::Prefix(action, cont) => Some((Some(i), action, &**cont)),
                    _ => None,
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

pub(crate) fn lookup_chan(env: &ValueEnv, name: &Name) -> Result<ChanId, EngineError> {
    env.lookup_chan(name)
        .ok_or_else(|| EngineError::UnboundChannel(name.clone()))
}

fn guard_operand(env: &ValueEnv, store: &ObjectStore, p: &Payload) -> Result<Value, EngineError> {
    match p {
        Payload::Chan { name, .. } => lookup_chan(env, name).map(Value::Chan),
        Payload::Comp(e) => Ok(eval_comp(env, store, e)?.value),
        Payload::Data(_) => Err(EngineError::ObjectLiteralInGuard),
    }
}

/// Evaluates guards; returns the subject and polarity when all pass.
pub(crate) fn resolve_action(
    env: &ValueEnv,
    store: &ObjectStore,
    action: &Action,
) -> Result<Option<(Polarity, ChanId)>, EngineError> {
    match &action.kind {
        ActionKind::Send { chan, .. } => Ok(Some((Polarity::Send, lookup_chan(env, chan)?))),
        ActionKind::Receive { chan, .. } => Ok(Some((Polarity::Receive, lookup_chan(env, chan)?))),
        ActionKind::Match { left, right, inner } => {
            let l = guard_operand(env, store, left)?;
            let r = guard_operand(env, store, right)?;
            match guard_equal(&l, &r) {
                Some(true) => resolve_action(env, store, inner),
                Some(false) => Ok(None),
                None => Err(EngineError::IncomparableGuard(l.category(), r.category())),
            }
        }
    }
}

pub(crate) fn offers(
    term: &ProcTerm,
    env: &ValueEnv,
    store: &ObjectStore,
) -> Result<Vec<Offer>, EngineError> {
    let mut out = Vec::new();
    for (branch, action, _) in alternatives(term) {
        if let Some((polarity, chan)) = resolve_action(env, store, action)? {
            out.push(Offer {
                branch,
                polarity,
                chan,
            });
        }
    }
    Ok(out)
}

/// An offer a replication would make after one unfolding. `part` tells
/// apart the parallel components of the copy.
#[derive(Clone, Copy, Debug)]
struct LatentOffer {
    part: usize,
    polarity: Polarity,
    chan: ChanId,
}

fn latent_offers<'t>(
    config: &'t Configuration,
    body: &'t ProcTerm,
    env: &ValueEnv,
) -> Result<Vec<LatentOffer>, EngineError> {
    fn split<'t>(
        config: &'t Configuration,
        term: &'t ProcTerm,
        env: ValueEnv,
        next: &mut u64,
        out: &mut Vec<(&'t ProcTerm, ValueEnv)>,
    ) -> Result<(), EngineError> {
        match &term.kind {
            ProcKind::Nil | ProcKind::Repl(_) => {}
            ProcKind::Par(l, r) => {
                split(config, l, env.clone(), next, out)?;
                split(config, r, env, next, out)?;
            }
            ProcKind::Restrict { chan, body, .. } => {
                let id = ChanId(*next);
                *next += 1;
                split(
                    config,
                    body,
                    env.bind(chan.clone(), Value::Chan(id)),
                    next,
                    out,
                )?;
            }
            ProcKind::Ref(name) => {
                let body = config
                    .image
                    .procs
                    .get(name)
                    .ok_or_else(|| EngineError::UnknownProc(name.clone()))?;
                split(config, body, config.image.base_env.clone(), next, out)?;
            }
            ProcKind::Prefix(..) | ProcKind::Sum(..) => out.push((term, env)),
        }
        Ok(())
    }
    let mut parts = Vec::new();
    let mut next = SPECULATIVE_BASE;
    split(config, body, env.clone(), &mut next, &mut parts)?;
    let mut out = Vec::new();
    for (part, (term, env)) in parts.into_iter().enumerate() {
        for offer in offers(term, &env, &config.store)? {
            out.push(LatentOffer {
                part,
                polarity: offer.polarity,
                chan: offer.chan,
            });
        }
    }
    Ok(out)
}

/// Every redex of `config`, in canonical order.
pub fn enabled_redexes(config: &Configuration) -> Result<Vec<Redex>, EngineError> {
    let mut senders: BTreeMap<ChanId, Vec<Endpoint>> = BTreeMap::new();
    let mut receivers: BTreeMap<ChanId, Vec<Endpoint>> = BTreeMap::new();
    let mut latent: Vec<(Pid, Vec<LatentOffer>)> = Vec::new();
    for agent in config.soup.values() {
        if let ProcKind::Repl(body) = &agent.term.kind {
            latent.push((agent.pid, latent_offers(config, body, &agent.env)?));
            continue;
        }
        for offer in offers(&agent.term, &agent.env, &config.store)? {
            let endpoint = Endpoint {
                pid: agent.pid,
                branch: offer.branch,
            };
            match offer.polarity {
                Polarity::Send => senders.entry(offer.chan).or_default().push(endpoint),
                Polarity::Receive => receivers.entry(offer.chan).or_default().push(endpoint),
            }
        }
    }

    let mut redexes = Vec::new();
    for (chan, sends) in &senders {
        let Some(recvs) = receivers.get(chan) else {
            continue;
        };
        for s in sends {
            for r in recvs.iter().filter(|r| r.pid != s.pid) {
                redexes.push(Redex::Comm {
                    sender: *s,
                    receiver: *r,
                    chan: *chan,
                });
            }
        }
    }

    let direct = |polarity: Polarity, chan: ChanId| {
        let table = match polarity {
            Polarity::Send => &senders,
            Polarity::Receive => &receivers,
        };
        table.get(&chan).is_some_and(|v| !v.is_empty())
    };
    for (pid, mine) in &latent {
        let enabled = mine.iter().any(|o| {
            let wanted = match o.polarity {
                Polarity::Send => Polarity::Receive,
                Polarity::Receive => Polarity::Send,
            };
            // against an agent already in the soup
            (!is_speculative(o.chan) && direct(wanted, o.chan))
                // between two parts of the same copy
                || mine
                    .iter()
                    .any(|p| p.part != o.part && p.polarity == wanted && p.chan == o.chan)
                // against a copy of some replication, this one included
                || (!is_speculative(o.chan)
                    && latent.iter().any(|(_, theirs)| {
                        theirs.iter().any(|p| p.polarity == wanted && p.chan == o.chan)
                    }))
        });
        if enabled {
            redexes.push(Redex::ReplSpawn { pid: *pid });
        }
    }
    redexes.sort();
    Ok(redexes)
}
