use std::collections::BTreeMap;

use super::config::{ChanScope, Configuration};
use super::redex::{alternatives, enabled_redexes, lookup_chan, Endpoint, Redex};
use super::trace::{render_object, render_value, EventKind, TraceEvent};
use super::EngineError;
use crate::eval::eval_comp;
use crate::syntax::{ActionKind, ChannelSort, DataKind, Name, Payload, ProcKind, ProcTerm};
use crate::value::{ChanId, ObjId, Value, ValueEnv};

struct Transmitted {
    value: Value,
    eval_steps: u64,
    touched: Option<ObjId>,
}

impl Configuration {
    /// Applies `redex`, which must be enabled in this configuration.
    pub fn step(&mut self, redex: &Redex) -> Result<TraceEvent, EngineError> {
        if !enabled_redexes(self)?.contains(redex) {
            return Err(EngineError::StaleRedex);
        }
        self.apply(redex)
    }

    /// Applies a redex known to come from [`enabled_redexes`] on `self`.
    pub(crate) fn apply(&mut self, redex: &Redex) -> Result<TraceEvent, EngineError> {
        let event = match *redex {
            Redex::Comm {
                sender,
                receiver,
                chan,
            } => self.communicate(sender, receiver, chan)?,
            Redex::ReplSpawn { pid } => {
                let agent = self.soup.get_mut(&pid).ok_or(EngineError::StaleRedex)?;
                let ProcKind::Repl(body) = &agent.term.kind else {
                    return Err(EngineError::StaleRedex);
                };
                let body = (**body).clone();
                let env = agent.env.clone();
                agent.spawned += 1;
                let spawned = self.open(body, env, None)?;
                let mut pids = vec![pid.0];
                pids.extend(spawned.iter().map(|p| p.0));
                TraceEvent {
                    step: self.step_count,
                    kind: EventKind::Spawn,
                    pids,
                    chan: None,
                    payload: None,
                    eval_steps: 0,
                    store_delta: Vec::new(),
                }
            }
        };
        self.step_count += 1;
        if self.recording {
            self.trace.push(event.clone());
        }
        #[cfg(debug_assertions)]
        self.assert_well_formed();
        Ok(event)
    }

    fn chosen(&self, end: Endpoint) -> Result<(ActionKind, ProcTerm, ValueEnv), EngineError> {
        let agent = self.soup.get(&end.pid).ok_or(EngineError::StaleRedex)?;
        let (_, action, cont) = alternatives(&agent.term)
            .into_iter()
            .find(|(b, _, _)| *b == end.branch)
            .ok_or(EngineError::StaleRedex)?;
        Ok((
            action.innermost().kind.clone(),
            cont.clone(),
            agent.env.clone(),
        ))
    }

    fn communicate(
        &mut self,
        sender: Endpoint,
        receiver: Endpoint,
        chan: ChanId,
    ) -> Result<TraceEvent, EngineError> {
        let (send, s_cont, s_env) = self.chosen(sender)?;
        let (recv, r_cont, r_env) = self.chosen(receiver)?;
        let ActionKind::Send { payload, .. } = send else {
            return Err(EngineError::StaleRedex);
        };
        let ActionKind::Receive { binder, .. } = recv else {
            return Err(EngineError::StaleRedex);
        };
        let sent = self.transmit(&s_env, &payload, chan)?;
        self.check_sort(chan, &sent.value)?;
        if let Value::Chan(id) = sent.value {
            if let Some(info) = self.chans.get_mut(&id) {
                if info.scope == ChanScope::Restricted {
                    info.scope = ChanScope::Extruded;
                }
            }
        }
        let payload_text = render_value(self, &sent.value);
        let store_delta = sent
            .touched
            .and_then(|id| self.store.object(id))
            .map(|obj| vec![render_object(self, obj)])
            .unwrap_or_default();

        self.soup.remove(&sender.pid);
        self.soup.remove(&receiver.pid);
        self.open(s_cont, s_env, Some(sender.pid))?;
        self.open(r_cont, r_env.bind(binder, sent.value), Some(receiver.pid))?;
        Ok(TraceEvent {
            step: self.step_count,
            kind: EventKind::Comm,
            pids: vec![sender.pid.0, receiver.pid.0],
            chan: Some(self.chan_label(chan)),
            payload: Some(payload_text),
            eval_steps: sent.eval_steps,
            store_delta,
        })
    }

    fn object_sig(&self, chan: ChanId) -> Result<crate::syntax::ObjSig, EngineError> {
        match self.chans.get(&chan).map(|info| &info.sort) {
            Some(ChannelSort::CarriesObj(sig)) => Ok(sig.clone()),
            _ => Err(EngineError::SortViolation {
                chan: self.chan_label(chan),
                found: "object",
            }),
        }
    }

    /// Evaluates a payload eagerly; object payloads commit to the store.
    fn transmit(
        &mut self,
        env: &ValueEnv,
        payload: &Payload,
        chan: ChanId,
    ) -> Result<Transmitted, EngineError> {
        match payload {
            Payload::Chan { name, .. } => Ok(Transmitted {
                value: Value::Chan(lookup_chan(env, name)?),
                eval_steps: 0,
                touched: None,
            }),
            Payload::Comp(e) => {
                let r = eval_comp(env, &self.store, e)?;
                Ok(Transmitted {
                    value: r.value,
                    eval_steps: r.steps,
                    touched: None,
                })
            }
            Payload::Data(d) => match &d.kind {
                DataKind::MakeObject(fields) => {
                    let sig = self.object_sig(chan)?;
                    let mut steps = 0;
                    let mut initial = BTreeMap::new();
                    for (label, init) in fields {
                        let r = eval_comp(env, &self.store, init)?;
                        steps += r.steps;
                        initial.insert(label.clone(), r.value);
                    }
                    let id = self.store.alloc(sig, initial)?;
                    Ok(Transmitted {
                        value: Value::Obj(id),
                        eval_steps: steps,
                        touched: Some(id),
                    })
                }
                DataKind::UpdateObject { target, updates } => {
                    let t = eval_comp(env, &self.store, target)?;
                    let mut steps = t.steps;
                    let id = match t.value {
                        Value::Obj(id) => id,
                        other => return Err(EngineError::NotAnObject(other.category())),
                    };
                    let mut writes: Vec<(Name, Value)> = Vec::with_capacity(updates.len());
                    for (label, rhs) in updates {
                        let r = eval_comp(env, &self.store, rhs)?;
                        steps += r.steps;
                        writes.push((label.clone(), r.value));
                    }
                    let sig = self.object_sig(chan)?;
                    if self.store.object(id).is_some_and(|o| o.signature != sig) {
                        return Err(EngineError::SortViolation {
                            chan: self.chan_label(chan),
                            found: "object of another shape",
                        });
                    }
                    self.store.update(id, writes)?;
                    Ok(Transmitted {
                        value: Value::Obj(id),
                        eval_steps: steps,
                        touched: Some(id),
                    })
                }
            },
        }
    }

    /// Dynamic sort check on every transmitted value.
    fn check_sort(&self, chan: ChanId, value: &Value) -> Result<(), EngineError> {
        let sort = &self.chans.get(&chan).ok_or(EngineError::StaleRedex)?.sort;
        let ok = match (sort, value) {
            (ChannelSort::CarriesChan(inner), Value::Chan(id)) => {
                self.chans.get(id).is_some_and(|info| info.sort == **inner)
            }
            (ChannelSort::CarriesChan(_), _) | (_, Value::Chan(_)) => false,
            (sort, value) => sort
                .carried_type()
                .is_some_and(|ty| self.store.inhabits(value, &ty)),
        };
        if ok {
            Ok(())
        } else {
            Err(EngineError::SortViolation {
                chan: self.chan_label(chan),
                found: value.category(),
            })
        }
    }
}
