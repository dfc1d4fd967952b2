//! Surface syntax: AST, lexer, parser, name resolution and pretty-printer.

mod ast;
mod lexer;
mod parser;
mod pretty;
mod resolve;

pub use ast::*;
pub use lexer::{lex, Tok, Token};
pub use parser::{
    parse_comp_expr, parse_comp_type, parse_payload, parse_proc_term, parse_program,
    parse_program_in, parse_sort,
};
pub use pretty::{
    pretty_action, pretty_comp, pretty_data, pretty_item, pretty_payload, pretty_proc,
    pretty_program, pretty_sort, pretty_type, CompPrinter,
};

pub(crate) use lexer::is_keyword;
