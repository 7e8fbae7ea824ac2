//! Shared helpers for the integration suites: fixture paths, a
//! deterministic litmus-test generator, and structure-preserving
//! mutations for the monotonicity property.

#![allow(dead_code)]

use std::path::PathBuf;

pub fn appendix_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../appendix").join(name)
}

pub fn read_listing(n: usize) -> String {
    std::fs::read_to_string(appendix_path(&format!("listing{n}.litmus"))).unwrap()
}

/// SplitMix64; fixed seeds keep generated tests identical across runs.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed.wrapping_add(0x9E3779B97F4A7C15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.below(100) < percent
    }
}

/// A generated test in cell form, so mutations can edit instructions
/// without reparsing.
#[derive(Clone, Debug)]
pub struct GeneratedTest {
    pub name: String,
    pub locations: Vec<&'static str>,
    /// One instruction string per cell, per hart.
    pub programs: Vec<Vec<String>>,
    pub condition_atoms: Vec<String>,
}

impl GeneratedTest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("RISCV {}\n{{\n", self.name));
        for hart in 0..self.programs.len() {
            let binds: Vec<String> = self
                .locations
                .iter()
                .enumerate()
                .map(|(i, loc)| format!("{hart}:x{}={loc};", i + 1))
                .collect();
            out.push_str(&binds.join(" "));
            out.push('\n');
        }
        let mems: Vec<String> = self.locations.iter().map(|l| format!("{l}=0;")).collect();
        out.push_str(&mems.join(" "));
        out.push_str("\n}\n");

        let rows = self.programs.iter().map(Vec::len).max().unwrap_or(0);
        let mut table: Vec<Vec<String>> = Vec::new();
        table.push((0..self.programs.len()).map(|h| format!("P{h}")).collect());
        for row in 0..rows {
            table.push(
                self.programs.iter().map(|p| p.get(row).cloned().unwrap_or_default()).collect(),
            );
        }
        let widths: Vec<usize> = (0..self.programs.len())
            .map(|col| table.iter().map(|r| r[col].len()).max().unwrap_or(0))
            .collect();
        for row in &table {
            let cells: Vec<String> =
                row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join(" | ").trim_end());
            out.push_str(" ;\n");
        }
        out.push_str(&format!("exists ({})\n", self.condition_atoms.join(" /\\ ")));
        out
    }
}

const LOCS: [&str; 3] = ["x", "y", "z"];

/// Generate a small straight-line test: up to 3 harts, up to 4 memory
/// operations per hart, at most 8 memory events and 2 writes per location
/// overall, so exhaustive enumeration stays tiny.
pub fn generate_test(seed: u64) -> GeneratedTest {
    let mut rng = Rng::new(seed);
    let hart_count = 1 + rng.below(3) as usize;
    let loc_count = 2 + rng.below(2) as usize;
    let locations: Vec<&'static str> = LOCS[..loc_count].to_vec();

    let mut writes_per_loc = vec![0usize; loc_count];
    let mut total_mem_events = 0usize;
    let mut programs: Vec<Vec<String>> = Vec::new();
    let mut condition_atoms: Vec<String> = Vec::new();

    for hart in 0..hart_count {
        let mut cells: Vec<String> = Vec::new();
        let mut loads = 0usize;
        let mut consts = 0usize;
        let mut loaded_regs: Vec<u32> = Vec::new();
        let ops = 1 + rng.below(4) as usize;
        for _ in 0..ops {
            if total_mem_events >= 8 {
                break;
            }
            let roll = rng.below(100);
            if roll < 15 {
                let sets = ["r", "w", "rw"];
                let pred = sets[rng.below(3) as usize];
                let succ = sets[rng.below(3) as usize];
                cells.push(format!("fence {pred}, {succ}"));
                total_mem_events += 1;
            } else if roll < 55 || !writes_per_loc.iter().any(|&w| w < 2) {
                let loc = rng.below(loc_count as u64) as usize;
                let dst = 20 + loads as u32;
                let aq = if rng.chance(25) { ".aq" } else { "" };
                cells.push(format!("lw{aq} x{dst}, 0(x{})", loc + 1));
                loaded_regs.push(dst);
                loads += 1;
                total_mem_events += 1;
            } else {
                let writable: Vec<usize> =
                    (0..loc_count).filter(|&l| writes_per_loc[l] < 2).collect();
                let loc = writable[rng.below(writable.len() as u64) as usize];
                let rl = if rng.chance(25) { ".rl" } else { "" };
                let src = if !loaded_regs.is_empty() && rng.chance(40) {
                    loaded_regs[rng.below(loaded_regs.len() as u64) as usize]
                } else {
                    let reg = 10 + consts as u32;
                    let value = 1 + rng.below(3);
                    cells.push(format!("addi x{reg}, x0, {value}"));
                    consts += 1;
                    reg
                };
                cells.push(format!("sw{rl} x{src}, 0(x{})", loc + 1));
                writes_per_loc[loc] += 1;
                total_mem_events += 1;
            }
        }
        for reg in &loaded_regs {
            if rng.chance(70) || condition_atoms.is_empty() {
                condition_atoms.push(format!("{hart}:x{reg}=1"));
            }
        }
        programs.push(cells);
    }
    if condition_atoms.is_empty() {
        condition_atoms.push(format!("{}=1", locations[0]));
    }
    if rng.chance(30) {
        condition_atoms.push(format!("{}=1", locations[loc_count - 1]));
    }

    GeneratedTest { name: format!("gen{seed}"), locations, programs, condition_atoms }
}

/// Strengthening mutations: never change the condition, only add order.
pub enum Mutation {
    InsertFullFence,
    UpgradeAccess,
}

/// Apply one mutation; returns `None` when the test has no applicable
/// site (e.g. nothing to upgrade).
pub fn mutate(test: &GeneratedTest, which: Mutation, rng: &mut Rng) -> Option<GeneratedTest> {
    let mut out = test.clone();
    match which {
        Mutation::InsertFullFence => {
            let hart = rng.below(out.programs.len() as u64) as usize;
            let pos = rng.below(out.programs[hart].len() as u64 + 1) as usize;
            out.programs[hart].insert(pos, "fence rw, rw".to_string());
            Some(out)
        }
        Mutation::UpgradeAccess => {
            let mut sites: Vec<(usize, usize)> = Vec::new();
            for (h, cells) in out.programs.iter().enumerate() {
                for (i, cell) in cells.iter().enumerate() {
                    if cell.starts_with("lw ") || cell.starts_with("sw ") {
                        sites.push((h, i));
                    }
                }
            }
            if sites.is_empty() {
                return None;
            }
            let (h, i) = sites[rng.below(sites.len() as u64) as usize];
            let cell = &out.programs[h][i];
            let upgraded = if cell.starts_with("lw ") {
                cell.replacen("lw ", "lw.aq ", 1)
            } else {
                cell.replacen("sw ", "sw.rl ", 1)
            };
            out.programs[h][i] = upgraded;
            Some(out)
        }
    }
}
