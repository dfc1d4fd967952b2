#![allow(dead_code)]

pub mod family;
pub mod gen;
pub mod oracle;
pub mod procgen;

use microlang::syntax::Program;

pub fn program(src: &str) -> Program {
    match microlang::syntax::parse_program(src) {
        Ok(p) => p,
        Err(e) => panic!("fixture does not parse: {e:?}\n{src}"),
    }
}
