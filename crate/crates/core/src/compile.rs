//! Source to runnable program: parse, resolve, check, link the prelude.

use crate::diagnostics::Diagnostic;
use crate::prelude::{load_prelude, DEFAULT_BLOCK_SIZE};
use crate::syntax::{parse_program_in, Program};
use crate::typecheck::{check_program_with, reject_replication, TypeEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub prelude: bool,
    pub block_size: u64,
    pub check: bool,
    pub allow_replication: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            prelude: true,
            block_size: DEFAULT_BLOCK_SIZE,
            check: true,
            allow_replication: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Compiled {
    /// The items written in the source.
    pub user: Program,
    /// Prelude items followed by the user's.
    pub linked: Program,
}

pub fn compile(src: &str, options: &CompileOptions) -> Result<Compiled, Vec<Diagnostic>> {
    let (base, env) = if options.prelude {
        let prelude = load_prelude(options.block_size);
        (prelude.program, prelude.env)
    } else {
        (Program::default(), TypeEnv::new())
    };
    let user = parse_program_in(src, &base)?;
    if !options.allow_replication {
        let errors = reject_replication(&user);
        if !errors.is_empty() {
            return Err(errors);
        }
    }
    if options.check {
        check_program_with(&env, &user)?;
    }
    let linked = user.linked_after(&base);
    Ok(Compiled { user, linked })
}
