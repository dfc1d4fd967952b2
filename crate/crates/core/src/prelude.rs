//! The embedded standard definitions and the file-system demo.

use crate::syntax::{
    parse_comp_type, parse_program, pretty_comp, CompExpr, CompType, Item, Name, Program,
};
use crate::typecheck::{check_program, TypeEnv};

pub const PRELUDE_SOURCE: &str = include_str!("prelude.mlg");
pub const FILESYSTEM_DEMO: &str = include_str!("../examples/filesystem.mlg");
pub const DEFAULT_BLOCK_SIZE: u64 = 4;

const SIGNATURES: &[(&str, &str)] = &[
    ("add", "nat -> nat -> nat"),
    ("mul", "nat -> nat -> nat"),
    ("pred", "nat -> nat"),
    ("monus", "nat -> nat -> nat"),
    ("isZero", "nat -> nat"),
    ("lt", "nat -> nat -> nat"),
    ("le", "nat -> nat -> nat"),
    ("div_ceil", "nat -> nat -> nat"),
    ("div_floor", "nat -> nat -> nat"),
    ("half", "nat -> nat"),
    ("parity", "nat -> nat"),
    ("shiftRight", "nat -> nat -> nat"),
    ("hasPermission", "nat -> nat -> nat"),
    ("blockSize", "nat"),
    ("blockCount", "nat -> nat"),
    ("indexToBlock", "nat -> nat"),
    ("blockOffset", "nat -> nat"),
];

#[derive(Clone, Debug)]
pub struct PreludeDef {
    pub name: Name,
    pub source: String,
    pub expected: CompType,
}

#[derive(Clone, Debug)]
pub struct Prelude {
    pub program: Program,
    pub env: TypeEnv,
    pub defs: Vec<PreludeDef>,
}

/// Parses and checks the prelude with `blockSize` set to `block_size`.
///
/// # Panics
/// If the embedded source fails to parse or check, or a definition's type
/// differs from its expected type.
pub fn load_prelude(block_size: u64) -> Prelude {
    let mut program =
        parse_program(PRELUDE_SOURCE).unwrap_or_else(|e| panic!("prelude does not parse: {e:?}"));
    for item in &mut program.items {
        if let Item::Def { name, body, .. } = item {
            if name.as_str() == "blockSize" {
                *body = CompExpr::num(block_size);
            }
        }
    }
    let env = check_program(&program).unwrap_or_else(|e| panic!("prelude does not check: {e:?}"));
    let defs = program
        .items
        .iter()
        .filter_map(|item| match item {
            Item::Def { name, body, .. } => Some((name, body)),
            _ => None,
        })
        .map(|(name, body)| {
            let expected = SIGNATURES
                .iter()
                .find(|(n, _)| *n == name.as_str())
                .map(|(_, ty)| parse_comp_type(ty).expect("signature parses"))
                .unwrap_or_else(|| panic!("prelude definition `{name}` has no signature"));
            let actual = env
                .lookup_comp(name)
                .expect("checked definitions are bound");
            assert_eq!(*actual, expected, "prelude definition `{name}`");
            PreludeDef {
                name: name.clone(),
                source: pretty_comp(body),
                expected,
            }
        })
        .collect();
    Prelude { program, env, defs }
}
