//! Litmus test representation, validation, and pretty-printing.
//!
//! A litmus test is a tiny multi-hart RISC-V program plus an `exists`
//! predicate over the final state. The textual format is the usual
//! column-per-hart layout:
//!
//! ```text
//! RISCV message passing
//! {
//! 0:x1=x; 0:x2=y;
//! 1:x1=x; 1:x2=y;
//! x=0; y=0;
//! }
//! P0              | P1            ;
//! addi x3, x0, 1  | lw x3, 0(x2)  ;
//! sw x3, 0(x1)    | lw x4, 0(x1)  ;
//! exists (1:x3=1 /\ 1:x4=0)
//! ```
//!
//! An optional comment line `# expect: allowed` or `# expect: forbidden`
//! records the expected verdict for harness runs.

mod parse;

pub use parse::{parse_litmus, ParseError, ParseErrorKind};

use std::collections::BTreeMap;
use std::fmt;

/// A general-purpose register, `x0` through `x31`. `x0` always reads zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Reg(u8);

impl Reg {
    pub const ZERO: Reg = Reg(0);

    pub fn new(n: u8) -> Option<Reg> {
        (n < 32).then_some(Reg(n))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A runtime value: either a signed integer or the address of a named
/// memory location. Addresses are opaque; they never compare equal to an
/// integer, and immediate arithmetic on them is rejected by validation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Value {
    Int(i64),
    Addr(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Addr(loc) => write!(f, "{loc}"),
        }
    }
}

/// Which access kinds a fence side applies to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AccessSet {
    pub reads: bool,
    pub writes: bool,
}

impl AccessSet {
    pub const R: AccessSet = AccessSet { reads: true, writes: false };
    pub const W: AccessSet = AccessSet { reads: false, writes: true };
    pub const RW: AccessSet = AccessSet { reads: true, writes: true };

    pub fn is_empty(self) -> bool {
        !self.reads && !self.writes
    }
}

impl fmt::Display for AccessSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reads {
            write!(f, "r")?;
        }
        if self.writes {
            write!(f, "w")?;
        }
        Ok(())
    }
}

/// One straight-line instruction. Loads may carry an acquire annotation,
/// stores a release annotation; fences carry predecessor/successor sets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Instruction {
    AddImmediate { dst: Reg, src: Reg, imm: i64 },
    Load { dst: Reg, offset: i64, addr: Reg, acquire: bool },
    Store { src: Reg, offset: i64, addr: Reg, release: bool },
    Fence { pred: AccessSet, succ: AccessSet },
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::AddImmediate { dst, src, imm } => write!(f, "addi {dst}, {src}, {imm}"),
            Instruction::Load { dst, offset, addr, acquire } => {
                write!(f, "lw{} {dst}, {offset}({addr})", if *acquire { ".aq" } else { "" })
            }
            Instruction::Store { src, offset, addr, release } => {
                write!(f, "sw{} {src}, {offset}({addr})", if *release { ".rl" } else { "" })
            }
            Instruction::Fence { pred, succ } => write!(f, "fence {pred}, {succ}"),
        }
    }
}

/// One conjunct of the final-state predicate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Atom {
    Reg { hart: usize, reg: Reg, value: i64 },
    Loc { location: String, value: i64 },
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Reg { hart, reg, value } => write!(f, "{hart}:{reg}={value}"),
            Atom::Loc { location, value } => write!(f, "{location}={value}"),
        }
    }
}

/// The `exists` clause: a non-empty conjunction of atoms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExistsPredicate {
    pub atoms: Vec<Atom>,
}

impl fmt::Display for ExistsPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exists (")?;
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " /\\ ")?;
            }
            write!(f, "{atom}")?;
        }
        write!(f, ")")
    }
}

/// Expected verdict from the `# expect:` sidecar comment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Expectation {
    Allowed,
    Forbidden,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Allowed => write!(f, "allowed"),
            Expectation::Forbidden => write!(f, "forbidden"),
        }
    }
}

/// A parsed litmus test.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LitmusTest {
    pub name: String,
    pub arch: String,
    pub reg_init: BTreeMap<(usize, Reg), Value>,
    pub mem_init: BTreeMap<String, i64>,
    pub programs: Vec<Vec<Instruction>>,
    pub condition: ExistsPredicate,
    pub expected: Option<Expectation>,
}

impl LitmusTest {
    pub fn hart_count(&self) -> usize {
        self.programs.len()
    }

    /// Initial register file of one hart: the init-block bindings, with
    /// `x0` pinned to zero.
    pub fn initial_regs(&self, hart: usize) -> BTreeMap<Reg, Value> {
        let mut regs: BTreeMap<Reg, Value> = self
            .reg_init
            .iter()
            .filter(|((h, _), _)| *h == hart)
            .map(|((_, r), v)| (*r, v.clone()))
            .collect();
        regs.insert(Reg::ZERO, Value::Int(0));
        regs
    }

    /// Canonical textual form. Reparsing the result yields a structurally
    /// identical test.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.arch, self.name));
        out.push_str("{\n");
        for hart in 0..self.hart_count() {
            let mut line = String::new();
            for ((h, reg), value) in &self.reg_init {
                if *h == hart {
                    line.push_str(&format!("{h}:{reg}={value}; "));
                }
            }
            if !line.is_empty() {
                out.push_str(line.trim_end());
                out.push('\n');
            }
        }
        let mem_line: String = self.mem_init.iter().map(|(loc, v)| format!("{loc}={v}; ")).collect();
        if !mem_line.is_empty() {
            out.push_str(mem_line.trim_end());
            out.push('\n');
        }
        out.push_str("}\n");

        let rows = self.programs.iter().map(|p| p.len()).max().unwrap_or(0);
        let mut cells: Vec<Vec<String>> = Vec::new();
        cells.push((0..self.hart_count()).map(|h| format!("P{h}")).collect());
        for row in 0..rows {
            cells.push(
                self.programs
                    .iter()
                    .map(|p| p.get(row).map(|i| i.to_string()).unwrap_or_default())
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..self.hart_count())
            .map(|col| cells.iter().map(|row| row[col].len()).max().unwrap_or(0))
            .collect();
        for row in &cells {
            let line: Vec<String> =
                row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
            out.push_str(line.join(" | ").trim_end());
            out.push_str(" ;\n");
        }
        out.push_str(&format!("{}\n", self.condition));
        if let Some(e) = self.expected {
            out.push_str(&format!("# expect: {e}\n"));
        }
        out
    }
}

/// A validation finding. An empty diagnostic list means the test satisfies
/// every structural invariant the checker relies on.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Diagnostic {
    /// Register read (in a program or the condition) before any write,
    /// without an init-block binding.
    UninitializedRegister { hart: usize, reg: Reg },
    /// A location named in the init block or condition has no `mem_init`
    /// entry.
    UndeclaredLocation { location: String },
    /// A hart index referenced outside the range of program columns.
    UndeclaredHart { hart: usize },
    /// The effective address of a memory access has a nonzero offset from
    /// its location base.
    NonzeroOffset { hart: usize, instr: usize, offset: i64 },
    /// The address register of a memory access does not statically resolve
    /// to a declared location.
    UnresolvedAddress { hart: usize, instr: usize, reg: Reg },
    /// Immediate arithmetic applied to an address value.
    AddressArithmetic { hart: usize, instr: usize },
    /// A fence with an empty predecessor or successor set.
    EmptyFenceSet { hart: usize, instr: usize },
    /// Architecture tag is not the RISC-V tag.
    UnsupportedArch { arch: String },
    /// The condition has no atoms.
    EmptyCondition,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UninitializedRegister { hart, reg } => {
                write!(f, "hart {hart}: register {reg} is read before it is initialized or written")
            }
            Diagnostic::UndeclaredLocation { location } => {
                write!(f, "location `{location}` is not declared in the init block")
            }
            Diagnostic::UndeclaredHart { hart } => write!(f, "hart {hart} has no program column"),
            Diagnostic::NonzeroOffset { hart, instr, offset } => {
                write!(f, "hart {hart} instruction {instr}: effective offset {offset} is not 0")
            }
            Diagnostic::UnresolvedAddress { hart, instr, reg } => write!(
                f,
                "hart {hart} instruction {instr}: address register {reg} does not resolve to a declared location"
            ),
            Diagnostic::AddressArithmetic { hart, instr } => {
                write!(f, "hart {hart} instruction {instr}: immediate arithmetic on an address")
            }
            Diagnostic::EmptyFenceSet { hart, instr } => {
                write!(f, "hart {hart} instruction {instr}: fence with an empty access set")
            }
            Diagnostic::UnsupportedArch { arch } => write!(f, "unsupported architecture tag `{arch}`"),
            Diagnostic::EmptyCondition => write!(f, "exists clause has no atoms"),
        }
    }
}

/// Static value of a register at a program point, as far as straight-line
/// constant propagation can tell.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) enum StaticValue {
    Int(i64),
    Addr(String),
    Unknown,
}

/// Resolve, per instruction, the location a memory access touches. Returns
/// one entry per instruction: `None` for non-memory instructions or
/// unresolvable addresses, `Some((location, effective_offset))` otherwise.
pub(crate) fn resolve_addresses(
    program: &[Instruction],
    init_regs: &BTreeMap<Reg, Value>,
) -> Vec<Option<(String, i64)>> {
    let mut statics: BTreeMap<Reg, StaticValue> = init_regs
        .iter()
        .map(|(r, v)| {
            let sv = match v {
                Value::Int(n) => StaticValue::Int(*n),
                Value::Addr(l) => StaticValue::Addr(l.clone()),
            };
            (*r, sv)
        })
        .collect();
    statics.insert(Reg::ZERO, StaticValue::Int(0));

    let mut out = Vec::with_capacity(program.len());
    for instr in program {
        match instr {
            Instruction::AddImmediate { dst, src, imm } => {
                let v = match statics.get(src) {
                    Some(StaticValue::Int(n)) => StaticValue::Int(n.wrapping_add(*imm)),
                    Some(StaticValue::Addr(l)) if *imm == 0 => StaticValue::Addr(l.clone()),
                    Some(StaticValue::Addr(_)) => StaticValue::Unknown,
                    _ => StaticValue::Unknown,
                };
                if !dst.is_zero() {
                    statics.insert(*dst, v);
                }
                out.push(None);
            }
            Instruction::Load { dst, offset, addr, .. } => {
                let resolved = match statics.get(addr) {
                    Some(StaticValue::Addr(l)) => Some((l.clone(), *offset)),
                    _ => None,
                };
                if !dst.is_zero() {
                    statics.insert(*dst, StaticValue::Unknown);
                }
                out.push(resolved);
            }
            Instruction::Store { offset, addr, .. } => {
                let resolved = match statics.get(addr) {
                    Some(StaticValue::Addr(l)) => Some((l.clone(), *offset)),
                    _ => None,
                };
                out.push(resolved);
            }
            Instruction::Fence { .. } => out.push(None),
        }
    }
    out
}

/// Check every structural invariant; returns one diagnostic per violation.
/// Never mutates the test.
pub fn validate(test: &LitmusTest) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if test.arch != "RISCV" {
        diags.push(Diagnostic::UnsupportedArch { arch: test.arch.clone() });
    }
    if test.condition.atoms.is_empty() {
        diags.push(Diagnostic::EmptyCondition);
    }

    // Locations referenced in the init block and condition must be declared.
    for value in test.reg_init.values() {
        if let Value::Addr(loc) = value {
            if !test.mem_init.contains_key(loc) {
                let d = Diagnostic::UndeclaredLocation { location: loc.clone() };
                if !diags.contains(&d) {
                    diags.push(d);
                }
            }
        }
    }
    for atom in &test.condition.atoms {
        if let Atom::Loc { location, .. } = atom {
            if !test.mem_init.contains_key(location) {
                let d = Diagnostic::UndeclaredLocation { location: location.clone() };
                if !diags.contains(&d) {
                    diags.push(d);
                }
            }
        }
    }

    // Hart references must have a program column.
    for (hart, _) in test.reg_init.keys() {
        if *hart >= test.hart_count() {
            let d = Diagnostic::UndeclaredHart { hart: *hart };
            if !diags.contains(&d) {
                diags.push(d);
            }
        }
    }
    for atom in &test.condition.atoms {
        if let Atom::Reg { hart, .. } = atom {
            if *hart >= test.hart_count() {
                let d = Diagnostic::UndeclaredHart { hart: *hart };
                if !diags.contains(&d) {
                    diags.push(d);
                }
            }
        }
    }

    for (hart, program) in test.programs.iter().enumerate() {
        let init_regs = test.initial_regs(hart);

        // Reads-before-writes: walk the program tracking defined registers.
        let mut defined: Vec<Reg> = init_regs.keys().copied().collect();
        let mut flagged: Vec<Reg> = Vec::new();
        let check_read = |reg: Reg, defined: &[Reg], flagged: &mut Vec<Reg>, diags: &mut Vec<Diagnostic>| {
            if !defined.contains(&reg) && !flagged.contains(&reg) {
                flagged.push(reg);
                diags.push(Diagnostic::UninitializedRegister { hart, reg });
            }
        };
        for (idx, instr) in program.iter().enumerate() {
            match instr {
                Instruction::AddImmediate { dst, src, .. } => {
                    check_read(*src, &defined, &mut flagged, &mut diags);
                    if !defined.contains(dst) {
                        defined.push(*dst);
                    }
                }
                Instruction::Load { dst, addr, .. } => {
                    check_read(*addr, &defined, &mut flagged, &mut diags);
                    if !defined.contains(dst) {
                        defined.push(*dst);
                    }
                }
                Instruction::Store { src, addr, .. } => {
                    check_read(*src, &defined, &mut flagged, &mut diags);
                    check_read(*addr, &defined, &mut flagged, &mut diags);
                }
                Instruction::Fence { pred, succ } => {
                    if pred.is_empty() || succ.is_empty() {
                        diags.push(Diagnostic::EmptyFenceSet { hart, instr: idx });
                    }
                }
            }
        }

        // Condition reads of this hart's registers must be defined somewhere.
        for atom in &test.condition.atoms {
            if let Atom::Reg { hart: h, reg, .. } = atom {
                if *h == hart && !defined.contains(reg) && !flagged.contains(reg) {
                    flagged.push(*reg);
                    diags.push(Diagnostic::UninitializedRegister { hart, reg: *reg });
                }
            }
        }

        // Addresses must statically resolve to a declared location at
        // offset 0. Address arithmetic is flagged where it happens.
        let resolved = resolve_addresses(program, &init_regs);
        for (idx, instr) in program.iter().enumerate() {
            match instr {
                Instruction::AddImmediate { src, imm, .. } => {
                    if *imm != 0 {
                        if let Some(Value::Addr(_)) = init_regs.get(src) {
                            diags.push(Diagnostic::AddressArithmetic { hart, instr: idx });
                        }
                    }
                }
                Instruction::Load { addr, .. } | Instruction::Store { addr, .. } => {
                    match &resolved[idx] {
                        None => diags.push(Diagnostic::UnresolvedAddress { hart, instr: idx, reg: *addr }),
                        Some((loc, offset)) => {
                            if *offset != 0 {
                                diags.push(Diagnostic::NonzeroOffset { hart, instr: idx, offset: *offset });
                            }
                            if !test.mem_init.contains_key(loc) {
                                let d = Diagnostic::UndeclaredLocation { location: loc.clone() };
                                if !diags.contains(&d) {
                                    diags.push(d);
                                }
                            }
                        }
                    }
                }
                Instruction::Fence { .. } => {}
            }
        }
    }

    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp_test() -> LitmusTest {
        parse_litmus(
            "RISCV mp\n{\n0:x1=x; 0:x2=y;\n1:x1=x; 1:x2=y;\nx=0; y=0;\n}\nP0 | P1 ;\naddi x3, x0, 1 | lw x3, 0(x2) ;\nsw x3, 0(x1)   | lw x4, 0(x1) ;\nexists (1:x3=1 /\\ 1:x4=0)\n",
        )
        .unwrap()
    }

    #[test]
    fn valid_test_has_no_diagnostics() {
        assert!(validate(&mp_test()).is_empty());
    }

    #[test]
    fn uninitialized_register_is_flagged() {
        let mut t = mp_test();
        t.programs[0].insert(
            0,
            Instruction::AddImmediate { dst: Reg::new(5).unwrap(), src: Reg::new(9).unwrap(), imm: 0 },
        );
        let diags = validate(&t);
        assert_eq!(diags, vec![Diagnostic::UninitializedRegister { hart: 0, reg: Reg::new(9).unwrap() }]);
    }

    #[test]
    fn condition_location_must_be_declared() {
        let mut t = mp_test();
        t.condition.atoms.push(Atom::Loc { location: "q".into(), value: 0 });
        let diags = validate(&t);
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::UndeclaredLocation { location } if location == "q")));
    }

    #[test]
    fn nonzero_offset_is_flagged() {
        let mut t = mp_test();
        if let Instruction::Store { offset, .. } = &mut t.programs[0][1] {
            *offset = 8;
        }
        let diags = validate(&t);
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::NonzeroOffset { offset: 8, .. })));
    }

    #[test]
    fn loaded_address_register_is_unresolved() {
        // x3 comes from memory, then addresses a store.
        let mut t = mp_test();
        t.programs[1].push(Instruction::Store {
            src: Reg::ZERO,
            offset: 0,
            addr: Reg::new(3).unwrap(),
            release: false,
        });
        let diags = validate(&t);
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::UnresolvedAddress { hart: 1, .. })));
    }

    #[test]
    fn x0_is_always_readable() {
        let t = parse_litmus(
            "RISCV zeros\n{\n0:x1=x;\nx=0;\n}\nP0 ;\nsw x0, 0(x1) ;\nexists (x=0)\n",
        )
        .unwrap();
        assert!(validate(&t).is_empty());
    }

    #[test]
    fn empty_fence_set_diagnostic() {
        let mut t = mp_test();
        t.programs[0].push(Instruction::Fence {
            pred: AccessSet { reads: false, writes: false },
            succ: AccessSet::RW,
        });
        let diags = validate(&t);
        assert!(diags.iter().any(|d| matches!(d, Diagnostic::EmptyFenceSet { hart: 0, .. })));
    }
}
