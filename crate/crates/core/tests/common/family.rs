//! The finite family of replication-free terms used to cross-check the
//! explorer: up to three parallel components, each a sequence of one to
//! three prefixes over two channels.

use microlang::syntax::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Act {
    SendA,
    RecvA,
    SendB,
    RecvB,
}

pub const ACTS: [Act; 4] = [Act::SendA, Act::RecvA, Act::SendB, Act::RecvB];

impl Act {
    fn complements(self, other: Act) -> bool {
        matches!(
            (self, other),
            (Act::SendA, Act::RecvA)
                | (Act::RecvA, Act::SendA)
                | (Act::SendB, Act::RecvB)
                | (Act::RecvB, Act::SendB)
        )
    }

    fn source(self, binder: usize) -> String {
        match self {
            Act::SendA => "a!(z)".into(),
            Act::RecvA => format!("a?(x{binder})"),
            Act::SendB => "b!(z)".into(),
            Act::RecvB => format!("b?(x{binder})"),
        }
    }
}

pub type Component = Vec<Act>;

/// Every sequence of one to three actions.
pub fn components() -> Vec<Component> {
    let mut out: Vec<Component> = ACTS.iter().map(|a| vec![*a]).collect();
    for len in 2..=3 {
        let shorter: Vec<Component> = out.iter().filter(|c| c.len() == len - 1).cloned().collect();
        for c in shorter {
            for a in ACTS {
                let mut next = c.clone();
                next.push(a);
                out.push(next);
            }
        }
    }
    out
}

/// Every multiset of one to three components. Order of components is
/// irrelevant to deadlock, so multisets cover the family.
pub fn systems() -> Vec<Vec<Component>> {
    let cs = components();
    let mut out = Vec::new();
    for i in 0..cs.len() {
        out.push(vec![cs[i].clone()]);
        for j in i..cs.len() {
            out.push(vec![cs[i].clone(), cs[j].clone()]);
            for k in j..cs.len() {
                out.push(vec![cs[i].clone(), cs[j].clone(), cs[k].clone()]);
            }
        }
    }
    out
}

pub fn source(system: &[Component]) -> String {
    let parts: Vec<String> = system
        .iter()
        .map(|c| {
            let mut s: Vec<String> = c.iter().enumerate().map(|(i, a)| a.source(i)).collect();
            s.push("0".into());
            s.join(" . ")
        })
        .collect();
    format!("chan a : nat\nchan b : nat\nsystem = {}", parts.join(" | "))
}

pub fn program(system: &[Component]) -> Program {
    super::program(&source(system))
}

/// Depth-first search over raw interleavings, without merging states.
/// True if some reachable state has an unfinished component and no move.
pub fn brute_force_deadlocks(system: &[Component]) -> bool {
    fn go(system: &[Component], pos: &mut Vec<usize>) -> bool {
        let n = system.len();
        let head = |i: usize, pos: &Vec<usize>| system[i].get(pos[i]).copied();
        let mut moved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (Some(x), Some(y)) = (head(i, pos), head(j, pos)) else {
                    continue;
                };
                if x.complements(y) && matches!(x, Act::SendA | Act::SendB) {
                    moved = true;
                    pos[i] += 1;
                    pos[j] += 1;
                    let found = go(system, pos);
                    pos[i] -= 1;
                    pos[j] -= 1;
                    if found {
                        return true;
                    }
                }
            }
        }
        let finished = (0..n).all(|i| pos[i] == system[i].len());
        !moved && !finished
    }
    go(system, &mut vec![0; system.len()])
}

#[cfg(test)]
mod tests {}
