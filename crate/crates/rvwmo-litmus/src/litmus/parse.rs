//! Parser for the textual litmus format.
//!
//! The parser is line-oriented: header, brace-delimited init block, a
//! column-per-hart program table with `;`-terminated rows, and a final
//! `exists` clause. Cells are trimmed, so the ragged `|` alignment common
//! in hand-written tests parses fine; a cell containing only whitespace
//! contributes no instruction.

use std::collections::BTreeMap;
use std::fmt;

use super::{
    validate, AccessSet, Atom, Diagnostic, ExistsPredicate, Expectation, Instruction, LitmusTest, Reg,
    Value,
};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownMnemonic(String),
    UnsupportedArch(String),
    Invalid(Diagnostic),
}

/// A parse failure with a 1-based source position. `line == 0` marks
/// whole-file errors with no useful position.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}: ", self.line, self.col)?;
        }
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "{msg}"),
            ParseErrorKind::UnknownMnemonic(m) => write!(f, "unknown mnemonic `{m}`"),
            ParseErrorKind::UnsupportedArch(a) => write!(f, "unsupported architecture tag `{a}`"),
            ParseErrorKind::Invalid(d) => write!(f, "{d}"),
        }
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, col: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, col, kind })
}

fn syntax<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    err(line, col, ParseErrorKind::Syntax(msg.into()))
}

/// Parse a litmus test. The returned test satisfies every structural
/// invariant; violations surface as errors here rather than later.
pub fn parse_litmus(text: &str) -> Result<LitmusTest, ParseError> {
    let mut expected: Option<Expectation> = None;
    let mut lines: Vec<(usize, &str)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("expect:") {
                expected = Some(match rest.trim() {
                    "allowed" => Expectation::Allowed,
                    "forbidden" => Expectation::Forbidden,
                    other => {
                        return syntax(lineno, 1, format!("expected `allowed` or `forbidden`, got `{other}`"))
                    }
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        lines.push((lineno, raw));
    }

    let mut cursor = lines.into_iter().peekable();
    let eof_line = text.lines().count() + 1;

    // Header: architecture tag followed by the test name.
    let (header_line, header) = match cursor.next() {
        Some(l) => l,
        None => return syntax(eof_line, 1, "empty litmus file"),
    };
    let header = header.trim();
    let (arch, name) = match header.split_once(char::is_whitespace) {
        Some((arch, rest)) => (arch.to_string(), rest.trim().to_string()),
        None => (header.to_string(), String::new()),
    };
    if arch != "RISCV" {
        return err(header_line, 1, ParseErrorKind::UnsupportedArch(arch));
    }
    if name.is_empty() {
        return syntax(header_line, 1, "missing test name after architecture tag");
    }

    // Init block.
    let (brace_line, brace) = match cursor.next() {
        Some(l) => l,
        None => return syntax(eof_line, 1, "expected `{` to open the init block"),
    };
    if brace.trim() != "{" {
        return syntax(brace_line, 1, "expected `{` to open the init block");
    }
    let mut reg_init: BTreeMap<(usize, Reg), Value> = BTreeMap::new();
    let mut mem_init: BTreeMap<String, i64> = BTreeMap::new();
    loop {
        let (lineno, line) = match cursor.next() {
            Some(l) => l,
            None => return syntax(eof_line, 1, "unterminated init block"),
        };
        let line = line.trim();
        if line == "}" {
            break;
        }
        for entry in line.split(';') {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            parse_init_entry(entry, lineno, &mut reg_init, &mut mem_init)?;
        }
    }

    // Program header row: `P0 | P1 | ... ;`
    let (hdr_line, hdr) = match cursor.next() {
        Some(l) => l,
        None => return syntax(eof_line, 1, "expected program header row"),
    };
    let hdr_cells = split_row(hdr, hdr_line)?;
    let mut hart_count = 0usize;
    for (col, cell) in hdr_cells.iter().enumerate() {
        let label = cell.trim();
        if label != format!("P{col}") {
            return syntax(hdr_line, 1, format!("expected hart label `P{col}`, got `{label}`"));
        }
        hart_count += 1;
    }
    if hart_count == 0 {
        return syntax(hdr_line, 1, "program header declares no harts");
    }

    // Instruction rows until the exists clause.
    let mut programs: Vec<Vec<Instruction>> = vec![Vec::new(); hart_count];
    let condition;
    loop {
        let (lineno, line) = match cursor.next() {
            Some(l) => l,
            None => return syntax(eof_line, 1, "expected `exists` clause"),
        };
        let trimmed = line.trim();
        if trimmed.starts_with("exists") {
            condition = parse_exists(trimmed, lineno)?;
            break;
        }
        let cells = split_row(line, lineno)?;
        for (col, cell) in cells.iter().enumerate() {
            let cell_text = cell.trim();
            if cell_text.is_empty() {
                continue;
            }
            if col >= hart_count {
                return syntax(lineno, 1, format!("row has an instruction in column {col} but only {hart_count} harts are declared"));
            }
            let instr = parse_instruction(cell_text, lineno)?;
            programs[col].push(instr);
        }
    }

    if let Some((lineno, line)) = cursor.next() {
        return syntax(lineno, 1, format!("unexpected content after exists clause: `{}`", line.trim()));
    }

    let test = LitmusTest { name, arch, reg_init, mem_init, programs, condition, expected };

    // Parsed tests must satisfy the structural invariants; report the
    // first violation as a parse-level error.
    if let Some(diag) = validate(&test).into_iter().next() {
        return err(0, 0, ParseErrorKind::Invalid(diag));
    }
    Ok(test)
}

/// Split a `;`-terminated program row into its `|`-separated cells.
fn split_row(line: &str, lineno: usize) -> Result<Vec<&str>, ParseError> {
    let trimmed = line.trim_end();
    match trimmed.strip_suffix(';') {
        Some(body) => Ok(body.split('|').collect()),
        None => syntax(lineno, trimmed.len().max(1), "program row must end with `;`"),
    }
}

fn parse_init_entry(
    entry: &str,
    lineno: usize,
    reg_init: &mut BTreeMap<(usize, Reg), Value>,
    mem_init: &mut BTreeMap<String, i64>,
) -> Result<(), ParseError> {
    let (lhs, rhs) = match entry.split_once('=') {
        Some(parts) => parts,
        None => return syntax(lineno, 1, format!("init entry `{entry}` is missing `=`")),
    };
    let lhs = lhs.trim();
    let rhs = rhs.trim();
    if let Some((hart_str, reg_str)) = lhs.split_once(':') {
        let hart: usize = match hart_str.trim().parse() {
            Ok(h) => h,
            Err(_) => return syntax(lineno, 1, format!("invalid hart index `{}`", hart_str.trim())),
        };
        let reg = parse_reg(reg_str.trim(), lineno)?;
        let value = if let Ok(n) = rhs.parse::<i64>() {
            Value::Int(n)
        } else if is_identifier(rhs) {
            Value::Addr(rhs.to_string())
        } else {
            return syntax(lineno, 1, format!("invalid init value `{rhs}`"));
        };
        reg_init.insert((hart, reg), value);
    } else {
        if !is_identifier(lhs) {
            return syntax(lineno, 1, format!("invalid location name `{lhs}`"));
        }
        let value: i64 = match rhs.parse() {
            Ok(v) => v,
            Err(_) => return syntax(lineno, 1, format!("invalid memory init value `{rhs}`")),
        };
        mem_init.insert(lhs.to_string(), value);
    }
    Ok(())
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_reg(s: &str, lineno: usize) -> Result<Reg, ParseError> {
    let digits = match s.strip_prefix('x') {
        Some(d) => d,
        None => return syntax(lineno, 1, format!("invalid register name `{s}`")),
    };
    match digits.parse::<u8>().ok().and_then(Reg::new) {
        Some(r) if digits == r.number().to_string() => Ok(r),
        _ => syntax(lineno, 1, format!("invalid register name `{s}` (expected x0..x31)")),
    }
}

/// Parse `offset(reg)`.
fn parse_offset_operand(s: &str, lineno: usize) -> Result<(i64, Reg), ParseError> {
    let open = match s.find('(') {
        Some(i) => i,
        None => return syntax(lineno, 1, format!("expected `offset(reg)`, got `{s}`")),
    };
    if !s.ends_with(')') {
        return syntax(lineno, 1, format!("expected `offset(reg)`, got `{s}`"));
    }
    let offset_str = s[..open].trim();
    let offset: i64 = match offset_str.parse() {
        Ok(v) => v,
        Err(_) => return syntax(lineno, 1, format!("invalid offset `{offset_str}`")),
    };
    let reg = parse_reg(s[open + 1..s.len() - 1].trim(), lineno)?;
    Ok((offset, reg))
}

fn parse_access_set(s: &str, lineno: usize) -> Result<AccessSet, ParseError> {
    match s {
        "r" => Ok(AccessSet::R),
        "w" => Ok(AccessSet::W),
        "rw" => Ok(AccessSet::RW),
        other => syntax(lineno, 1, format!("invalid fence access set `{other}` (expected r, w, or rw)")),
    }
}

fn parse_instruction(cell: &str, lineno: usize) -> Result<Instruction, ParseError> {
    let (mnemonic, rest) = match cell.split_once(char::is_whitespace) {
        Some((m, r)) => (m, r.trim()),
        None => (cell, ""),
    };
    let operands: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(',').map(str::trim).collect() };

    match mnemonic {
        "addi" => {
            if operands.len() != 3 {
                return syntax(lineno, 1, format!("addi expects 3 operands, got {}", operands.len()));
            }
            let dst = parse_reg(operands[0], lineno)?;
            let src = parse_reg(operands[1], lineno)?;
            let imm: i64 = match operands[2].parse() {
                Ok(v) => v,
                Err(_) => return syntax(lineno, 1, format!("invalid immediate `{}`", operands[2])),
            };
            Ok(Instruction::AddImmediate { dst, src, imm })
        }
        "lw" | "ld" | "lw.aq" | "ld.aq" => {
            if operands.len() != 2 {
                return syntax(lineno, 1, format!("{mnemonic} expects 2 operands, got {}", operands.len()));
            }
            let dst = parse_reg(operands[0], lineno)?;
            let (offset, addr) = parse_offset_operand(operands[1], lineno)?;
            Ok(Instruction::Load { dst, offset, addr, acquire: mnemonic.ends_with(".aq") })
        }
        "sw" | "sd" | "sw.rl" | "sd.rl" => {
            if operands.len() != 2 {
                return syntax(lineno, 1, format!("{mnemonic} expects 2 operands, got {}", operands.len()));
            }
            let src = parse_reg(operands[0], lineno)?;
            let (offset, addr) = parse_offset_operand(operands[1], lineno)?;
            Ok(Instruction::Store { src, offset, addr, release: mnemonic.ends_with(".rl") })
        }
        "fence" => {
            if operands.len() != 2 {
                return syntax(lineno, 1, format!("fence expects 2 operands, got {}", operands.len()));
            }
            let pred = parse_access_set(operands[0], lineno)?;
            let succ = parse_access_set(operands[1], lineno)?;
            Ok(Instruction::Fence { pred, succ })
        }
        other => err(lineno, 1, ParseErrorKind::UnknownMnemonic(other.to_string())),
    }
}

fn parse_exists(line: &str, lineno: usize) -> Result<ExistsPredicate, ParseError> {
    let body = line.strip_prefix("exists").map(str::trim).unwrap_or("");
    let inner = match body.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
        Some(i) => i.trim(),
        None => return syntax(lineno, 1, "exists clause must be parenthesized"),
    };
    if inner.is_empty() {
        return syntax(lineno, 1, "exists clause has no atoms");
    }
    let mut atoms = Vec::new();
    for atom_str in inner.split("/\\") {
        let atom_str = atom_str.trim();
        let (lhs, rhs) = match atom_str.split_once('=') {
            Some(parts) => parts,
            None => return syntax(lineno, 1, format!("atom `{atom_str}` is missing `=`")),
        };
        let lhs = lhs.trim();
        let value: i64 = match rhs.trim().parse() {
            Ok(v) => v,
            Err(_) => return syntax(lineno, 1, format!("invalid atom value `{}`", rhs.trim())),
        };
        if let Some((hart_str, reg_str)) = lhs.split_once(':') {
            let hart: usize = match hart_str.trim().parse() {
                Ok(h) => h,
                Err(_) => return syntax(lineno, 1, format!("invalid hart index `{}`", hart_str.trim())),
            };
            let reg = parse_reg(reg_str.trim(), lineno)?;
            atoms.push(Atom::Reg { hart, reg, value });
        } else if is_identifier(lhs) {
            atoms.push(Atom::Loc { location: lhs.to_string(), value });
        } else {
            return syntax(lineno, 1, format!("invalid atom `{atom_str}`"));
        }
    }
    Ok(ExistsPredicate { atoms })
}
