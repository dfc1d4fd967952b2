//! The `mlg` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 check failure,
//! 3 deadlock, 4 step limit, 5 exploration cut by a budget, 6 runtime fault.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compile::{compile, CompileOptions, Compiled};
use crate::diagnostics::{render_records, render_text, Diagnostic};
use crate::engine::{render_trace_records, render_trace_text, run, EngineError, Verdict};
use crate::explorer::{explore, find_deadlocks, to_dot, ExploreOptions};
use crate::par::Parallelism;
use crate::prelude::DEFAULT_BLOCK_SIZE;
use crate::syntax::pretty_program;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_DEADLOCK: i32 = 3;
pub const EXIT_STEP_LIMIT: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;
pub const EXIT_RUNTIME: i32 = 6;

#[derive(Parser, Debug)]
#[command(
    name = "mlg",
    version,
    about = "Check, run and explore micro-language programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check a program
    Check(Common),
    /// Run the system process with a seeded scheduler
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        format: TraceFormat,
    },
    /// Explore every interleaving up to the given budgets
    Explore {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        max_depth: u64,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        max_states: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        repl_budget: u32,
        /// Write the state graph in Graphviz format
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
        /// Expand each level on one thread
        #[arg(long)]
        sequential: bool,
        #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
        format: TraceFormat,
    },
    /// Print the program in canonical layout
    Fmt(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Source file, or `-` for standard input
    input: String,
    /// Skip static checking
    #[arg(long)]
    unchecked: bool,
    /// Do not put the standard definitions in scope
    #[arg(long)]
    no_prelude: bool,
    /// Reject programs that use replication
    #[arg(long)]
    no_repl: bool,
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE, value_parser = clap::value_parser!(u64).range(1..))]
    block_size: u64,
    #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
    diagnostics: TraceFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TraceFormat {
    Text,
    Records,
}

struct Input {
    file: String,
    src: String,
}

struct Streams<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Common {
    fn options(&self) -> CompileOptions {
        CompileOptions {
            prelude: !self.no_prelude,
            block_size: self.block_size,
            check: !self.unchecked,
            allow_replication: !self.no_repl,
        }
    }

    fn report(&self, io: &mut Streams, input: &Input, diags: &[Diagnostic]) {
        let text = match self.diagnostics {
            TraceFormat::Text => render_text(&input.file, &input.src, diags),
            TraceFormat::Records => render_records(&input.file, &input.src, diags),
        };
        let _ = io.err.write_all(text.as_bytes());
    }

    fn runtime_fault(&self, io: &mut Streams, input: &Input, e: &EngineError) -> i32 {
        self.report(io, input, &[e.to_diagnostic()]);
        EXIT_RUNTIME
    }
}

fn read_input(path: &str, stdin: &mut dyn Read) -> std::io::Result<Input> {
    if path == "-" {
        let mut src = String::new();
        stdin.read_to_string(&mut src)?;
        Ok(Input {
            file: "<stdin>".into(),
            src,
        })
    } else {
        Ok(Input {
            file: path.into(),
            src: fs::read_to_string(path)?,
        })
    }
}

/// Runs one command. `args` includes the program name.
pub fn main_with<I, S>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let mut io = Streams {
        out: stdout,
        err: stderr,
    };
    let common = match &cli.command {
        Command::Check(c) | Command::Fmt(c) => c,
        Command::Run { common, .. } | Command::Explore { common, .. } => common,
    };
    let input = match read_input(&common.input, stdin) {
        Ok(input) => input,
        Err(e) => {
            let _ = writeln!(io.err, "mlg: cannot read {}: {e}", common.input);
            return EXIT_USAGE;
        }
    };
    let compiled = match compile(&input.src, &common.options()) {
        Ok(c) => c,
        Err(diags) => {
            common.report(&mut io, &input, &diags);
            return EXIT_CHECK;
        }
    };
    match &cli.command {
        Command::Check(_) => EXIT_OK,
        Command::Fmt(_) => {
            let _ = io.out.write_all(pretty_program(&compiled.user).as_bytes());
            EXIT_OK
        }
        Command::Run {
            common,
            seed,
            max_steps,
            format,
        } => run_command(
            &mut io, common, &input, &compiled, *seed, *max_steps, *format,
        ),
        Command::Explore {
            common,
            max_depth,
            max_states,
            repl_budget,
            dot,
            sequential,
            format,
        } => {
            let options = ExploreOptions {
                max_depth: usize::try_from(*max_depth).unwrap_or(usize::MAX),
                max_states: usize::try_from(*max_states).unwrap_or(usize::MAX),
                repl_budget: *repl_budget,
                parallelism: if *sequential {
                    Parallelism::Sequential
                } else {
                    Parallelism::Parallel
                },
            };
            explore_command(
                &mut io,
                common,
                &input,
                &compiled,
                &options,
                dot.as_ref(),
                *format,
            )
        }
    }
}

fn run_command(
    io: &mut Streams,
    common: &Common,
    input: &Input,
    compiled: &Compiled,
    seed: u64,
    max_steps: u64,
    format: TraceFormat,
) -> i32 {
    let outcome = match run(&compiled.linked, seed, max_steps) {
        Ok(o) => o,
        Err(e) => return common.runtime_fault(io, input, &e),
    };
    let text = match format {
        TraceFormat::Text => render_trace_text(outcome.trace()),
        TraceFormat::Records => render_trace_records(outcome.trace()),
    };
    let _ = io.out.write_all(text.as_bytes());
    match outcome.verdict {
        Verdict::Terminated => EXIT_OK,
        Verdict::Deadlock => EXIT_DEADLOCK,
        Verdict::StepLimit => EXIT_STEP_LIMIT,
    }
}

fn explore_command(
    io: &mut Streams,
    common: &Common,
    input: &Input,
    compiled: &Compiled,
    options: &ExploreOptions,
    dot: Option<&PathBuf>,
    format: TraceFormat,
) -> i32 {
    let graph = match explore(&compiled.linked, options) {
        Ok(g) => g,
        Err(e) => return common.runtime_fault(io, input, &e),
    };
    if let Some(path) = dot {
        if let Err(e) = fs::write(path, to_dot(&graph)) {
            let _ = writeln!(io.err, "mlg: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    let report = find_deadlocks(&graph);
    let count = |f: fn(&crate::explorer::StateFlags) -> bool| {
        graph.states.iter().filter(|s| f(&s.flags)).count()
    };
    let _ = writeln!(
        io.out,
        "states={} edges={} deadlocks={} terminal={} frontier={}",
        graph.states.len(),
        graph.edges.len(),
        report.witnesses.len(),
        count(|f| f.terminal),
        count(|f| f.frontier),
    );
    for w in &report.witnesses {
        let _ = writeln!(
            io.out,
            "deadlock s{} after {} steps: {}",
            w.state,
            w.path.len(),
            w.key
        );
        let text = match format {
            TraceFormat::Text => render_trace_text(&w.path),
            TraceFormat::Records => render_trace_records(&w.path),
        };
        let _ = io.out.write_all(text.as_bytes());
    }
    if !report.is_deadlock_free() {
        EXIT_DEADLOCK
    } else if report.frontier_warning {
        let _ = writeln!(io.err, "mlg: exploration was cut by a budget; no verdict");
        EXIT_BUDGET
    } else {
        EXIT_OK
    }
}
