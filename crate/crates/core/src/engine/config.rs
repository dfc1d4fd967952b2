use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::trace::TraceEvent;
use super::EngineError;
use crate::eval::eval_comp;
use crate::store::ObjectStore;
use crate::syntax::{ChannelSort, Item, Name, ProcKind, ProcTerm, Program};
use crate::value::{ChanId, Globals, Value, ValueEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pid(pub u64);

/// One member of the process soup. `term` is always a prefix, a sum with
/// at least one live branch, or a replication.
#[derive(Clone, Debug)]
pub struct Agent {
    pub pid: Pid,
    pub term: ProcTerm,
    pub env: ValueEnv,
    /// Copies spawned so far, for replications.
    pub spawned: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChanScope {
    Global,
    Restricted,
    /// A restricted channel that has been sent to another process.
    Extruded,
}

#[derive(Clone, Debug)]
pub struct ChanInfo {
    pub name: Name,
    pub sort: ChannelSort,
    pub scope: ChanScope,
}

/// Loaded program parts shared by every configuration derived from it.
#[derive(Debug)]
pub(crate) struct Image {
    pub(crate) procs: BTreeMap<Name, ProcTerm>,
    pub(crate) base_env: ValueEnv,
}

#[derive(Clone, Debug)]
pub struct Configuration {
    pub(crate) soup: BTreeMap<Pid, Agent>,
    pub(crate) chans: BTreeMap<ChanId, ChanInfo>,
    pub(crate) store: ObjectStore,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) step_count: u64,
    pub(crate) trace: Vec<TraceEvent>,
    pub(crate) recording: bool,
    next_pid: u64,
    next_chan: u64,
    pub(crate) image: Arc<Image>,
}

impl Configuration {
    /// Evaluates definitions, numbers global channels in declaration order,
    /// and opens the system process.
    pub fn load(program: &Program, seed: u64) -> Result<Configuration, EngineError> {
        let mut globals = Globals::default();
        let mut chans = BTreeMap::new();
        let mut procs = BTreeMap::new();
        let store = ObjectStore::new();
        for item in &program.items {
            match item {
                Item::Def { name, body, .. } => {
                    let env = ValueEnv::new(Arc::new(Globals::clone(&globals)));
                    let result = eval_comp(&env, &store, body).map_err(|source| {
                        EngineError::Definition {
                            name: name.clone(),
                            source,
                        }
                    })?;
                    globals.insert(name.clone(), result.value);
                }
                Item::Chan { name, sort, .. } => {
                    let id = ChanId(chans.len() as u64);
                    chans.insert(
                        id,
                        ChanInfo {
                            name: name.clone(),
                            sort: sort.clone(),
                            scope: ChanScope::Global,
                        },
                    );
                    globals.insert(name.clone(), Value::Chan(id));
                }
                Item::Proc { name, body, .. } => {
                    procs.insert(name.clone(), body.clone());
                }
            }
        }
        let base_env = ValueEnv::new(Arc::new(globals));
        let next_chan = chans.len() as u64;
        let mut config = Configuration {
            soup: BTreeMap::new(),
            chans,
            store,
            rng: ChaCha8Rng::seed_from_u64(seed),
            step_count: 0,
            trace: Vec::new(),
            recording: true,
            next_pid: 0,
            next_chan,
            image: Arc::new(Image {
                procs,
                base_env: base_env.clone(),
            }),
        };
        if let Some(system) = &program.system {
            config.open(system.clone(), base_env, None)?;
        }
        Ok(config)
    }

    /// Environment holding every top-level definition and channel.
    pub fn base_env(&self) -> &ValueEnv {
        &self.image.base_env
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.soup.values()
    }

    pub fn agent(&self, pid: Pid) -> Option<&Agent> {
        self.soup.get(&pid)
    }

    pub fn is_terminated(&self) -> bool {
        self.soup.is_empty()
    }

    pub fn store(&self) -> &ObjectStore {
        &self.store
    }

    pub fn chan_info(&self, id: ChanId) -> Option<&ChanInfo> {
        self.chans.get(&id)
    }

    pub fn chans(&self) -> impl Iterator<Item = (ChanId, &ChanInfo)> {
        self.chans.iter().map(|(id, info)| (*id, info))
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// Stops appending events; used when configurations are only compared.
    pub fn without_trace(mut self) -> Configuration {
        self.recording = false;
        self.trace.clear();
        self
    }

    /// Human-readable channel name: globals by name, fresh ones as `name#id`.
    pub fn chan_label(&self, id: ChanId) -> String {
        match self.chans.get(&id) {
            Some(info) if info.scope == ChanScope::Global => info.name.to_string(),
            Some(info) => format!("{}#{}", info.name, id.0),
            None => format!("?#{}", id.0),
        }
    }

    pub fn proc_def(&self, name: &Name) -> Option<&ProcTerm> {
        self.image.procs.get(name)
    }

    /// Same program and store, with `agents` as the soup and restricted
    /// channels renamed by `renumber`. Unreferenced restricted channels
    /// are dropped; trace and step count restart.
    pub fn rebuilt(
        &self,
        agents: Vec<Agent>,
        renumber: &BTreeMap<ChanId, ChanId>,
    ) -> Configuration {
        let mut chans: BTreeMap<ChanId, ChanInfo> = self
            .chans
            .iter()
            .filter(|(_, info)| info.scope == ChanScope::Global)
            .map(|(id, info)| (*id, info.clone()))
            .collect();
        for (old, new) in renumber {
            if let Some(info) = self.chans.get(old) {
                chans.insert(*new, info.clone());
            }
        }
        let next_chan = chans.keys().next_back().map_or(0, |id| id.0 + 1);
        let next_pid = agents.iter().map(|a| a.pid.0 + 1).max().unwrap_or(0);
        Configuration {
            soup: agents.into_iter().map(|a| (a.pid, a)).collect(),
            chans,
            store: self.store.clone(),
            rng: self.rng.clone(),
            step_count: 0,
            trace: Vec::new(),
            recording: self.recording,
            next_pid,
            next_chan,
            image: self.image.clone(),
        }
    }

    pub(crate) fn fresh_pid(&mut self) -> Pid {
        let pid = Pid(self.next_pid);
        self.next_pid += 1;
        pid
    }

    pub(crate) fn fresh_chan(&mut self, name: Name, sort: ChannelSort) -> ChanId {
        let id = ChanId(self.next_chan);
        self.next_chan += 1;
        self.chans.insert(
            id,
            ChanInfo {
                name,
                sort,
                scope: ChanScope::Restricted,
            },
        );
        id
    }

    /// Puts `term` into the soup in normal form: parallel parts split into
    /// separate agents, top-level restrictions opened with fresh channels,
    /// process names expanded, inert parts dropped. The first part keeps
    /// `pid` when given. Returns the pids of the new agents.
    pub(crate) fn open(
        &mut self,
        term: ProcTerm,
        env: ValueEnv,
        pid: Option<Pid>,
    ) -> Result<Vec<Pid>, EngineError> {
        let mut parts = Vec::new();
        self.split(term, env, &mut parts)?;
        let mut pids = Vec::with_capacity(parts.len());
        let mut keep = pid;
        for (term, env) in parts {
            let pid = keep.take().unwrap_or_else(|| self.fresh_pid());
            self.soup.insert(
                pid,
                Agent {
                    pid,
                    term,
                    env,
                    spawned: 0,
                },
            );
            pids.push(pid);
        }
        Ok(pids)
    }

    fn split(
        &mut self,
        term: ProcTerm,
        env: ValueEnv,
        out: &mut Vec<(ProcTerm, ValueEnv)>,
    ) -> Result<(), EngineError> {
        match term.kind {
            ProcKind::Nil => {}
            ProcKind::Par(l, r) => {
                self.split(*l, env.clone(), out)?;
                self.split(*r, env, out)?;
            }
            ProcKind::Restrict { chan, sort, body } => {
                let id = self.fresh_chan(chan.clone(), sort);
                self.split(*body, env.bind(chan, Value::Chan(id)), out)?;
            }
            ProcKind::Ref(name) => {
                let body = self
                    .image
                    .procs
                    .get(&name)
                    .cloned()
                    .ok_or(EngineError::UnknownProc(name))?;
                let base = self.image.base_env.clone();
                self.split(body, base, out)?;
            }
            ProcKind::Repl(ref body) => {
                if !self.is_inert(body) {
                    out.push((term, env));
                }
            }
            ProcKind::Sum(..) => {
                if !self.is_inert(&term) {
                    out.push((term, env));
                }
            }
            ProcKind::Prefix(..) => out.push((term, env)),
        }
        Ok(())
    }

    /// Whether opening `term` produces no agents at all.
    fn is_inert(&self, term: &ProcTerm) -> bool {
        match &term.kind {
            ProcKind::Nil => true,
            ProcKind::Prefix(..) => false,
            ProcKind::Sum(l, r) | ProcKind::Par(l, r) => self.is_inert(l) && self.is_inert(r),
            ProcKind::Restrict { body, .. } | ProcKind::Repl(body) => self.is_inert(body),
            ProcKind::Ref(name) => self
                .image
                .procs
                .get(name)
                .is_some_and(|body| self.is_inert(body)),
        }
    }

    /// Structural invariants; panics with a description on violation.
    pub fn assert_well_formed(&self) {
        for agent in self.soup.values() {
            for (name, value) in agent.env.local_values() {
                if let Value::Chan(id) = value {
                    assert!(
                        self.chans.contains_key(id),
                        "agent {} binds `{name}` to unknown channel {}",
                        agent.pid.0,
                        id.0
                    );
                }
            }
            assert!(
                matches!(
                    agent.term.kind,
                    ProcKind::Prefix(..) | ProcKind::Sum(..) | ProcKind::Repl(_)
                ),
                "agent {} is not in normal form",
                agent.pid.0
            );
        }
        if self.recording {
            let reductions = self.trace.iter().filter(|e| e.kind.is_reduction()).count();
            assert_eq!(
                reductions as u64, self.step_count,
                "step count and trace disagree"
            );
        }
    }
}
