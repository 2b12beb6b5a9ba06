//! Plain-text file formats.
//!
//! All files are whitespace-separated integers; `#` starts a comment.
//!
//! ```text
//! mapping:         s n  then s^n images in input-index order
//! matrix:          s n  then n rows of n residues
//! program:         program s n m  then m times: i v_0 ... v_{s^n-1}
//! linear program:  linear s n m   then m times: i c_1 ... c_n
//! ```
//!
//! Component numbers `i` are one-based.

use std::fmt::Write as _;

use insitu_core::linmod::{AssignmentMatrix, LinearProgram, MatrixMod, ModRing};
use insitu_core::program::Payload;
use insitu_core::{Alphabet, Assignment, InSituProgram, Mapping};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| {
                let line_no = i + 1;
                let code = line.split('#').next().unwrap_or("");
                code.split_whitespace().map(move |t| (line_no, t))
            })
            .collect::<Vec<_>>();
        let last_line = text.lines().count().max(1);
        Tokens { items, pos: 0, last_line }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).map_or(self.last_line, |&(l, _)| l)
    }

    fn err<T>(&self, line: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line, message: message.into() })
    }

    fn word(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.items.get(self.pos) {
            Some(&item) => {
                self.pos += 1;
                Ok(item)
            }
            None => self.err(self.last_line, format!("unexpected end of file, expected {what}")),
        }
    }

    fn int(&mut self, what: &str) -> Result<(usize, u64), ParseError> {
        let (line, w) = self.word(what)?;
        match w.parse::<u64>() {
            Ok(v) => Ok((line, v)),
            Err(_) => self.err(line, format!("expected {what}, found {w:?}")),
        }
    }

    fn below(&mut self, what: &str, bound: u64) -> Result<u64, ParseError> {
        let (line, v) = self.int(what)?;
        if v >= bound {
            return self.err(line, format!("{what} {v} out of range 0..{bound}"));
        }
        Ok(v)
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.items.get(self.pos) {
            Some(&(line, w)) => self.err(line, format!("unexpected trailing token {w:?}")),
            None => Ok(()),
        }
    }

    fn alphabet(&mut self) -> Result<Alphabet, ParseError> {
        let (line, s) = self.int("s")?;
        let (_, n) = self.int("n")?;
        Alphabet::new(s as usize, n as usize).map_err(|e| ParseError { line, message: e.to_string() })
    }
}

pub fn parse_mapping(text: &str) -> Result<Mapping, ParseError> {
    let mut t = Tokens::new(text);
    let a = t.alphabet()?;
    let line = t.line();
    let images = (0..a.size())
        .map(|_| t.below("image", a.size() as u64).map(|v| v as usize))
        .collect::<Result<Vec<_>, _>>()?;
    t.finish()?;
    Mapping::new(a, images).map_err(|e| ParseError { line, message: e.to_string() })
}

pub fn parse_matrix(text: &str) -> Result<MatrixMod, ParseError> {
    let mut t = Tokens::new(text);
    let (line, s) = t.int("s")?;
    let (_, n) = t.int("n")?;
    let ring = ModRing::new(s).map_err(|e| ParseError { line, message: e.to_string() })?;
    if n == 0 {
        return t.err(line, "n must be positive");
    }
    let n = n as usize;
    let rows = (0..n)
        .map(|_| (0..n).map(|_| t.below("residue", s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    t.finish()?;
    MatrixMod::new(ring, rows).map_err(|e| ParseError { line, message: e.to_string() })
}

/// Either kind of program file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProgramFile {
    Table(InSituProgram),
    Linear(LinearProgram),
}

impl ProgramFile {
    /// The program as in-situ assignments; linear factors keep linear payloads.
    pub fn to_in_situ(&self) -> insitu_core::Result<InSituProgram> {
        match self {
            ProgramFile::Table(p) => Ok(p.clone()),
            ProgramFile::Linear(p) => insitu_core::linmod::to_in_situ(p),
        }
    }
}

pub fn parse_program(text: &str) -> Result<ProgramFile, ParseError> {
    let mut t = Tokens::new(text);
    let (line, kind) = t.word("`program` or `linear`")?;
    match kind {
        "program" => {
            let a = t.alphabet()?;
            let (_, m) = t.int("m")?;
            let mut assignments = Vec::with_capacity(m as usize);
            for _ in 0..m {
                let target = component(&mut t, a.n())?;
                let table = (0..a.size())
                    .map(|_| t.below("value", a.s() as u64).map(|v| v as usize))
                    .collect::<Result<Vec<_>, _>>()?;
                assignments.push(Assignment::table(target, table));
            }
            t.finish()?;
            let p = InSituProgram::new(a, assignments).map_err(|e| ParseError { line, message: e.to_string() })?;
            Ok(ProgramFile::Table(p))
        }
        "linear" => {
            let (sline, s) = t.int("s")?;
            let ring = ModRing::new(s).map_err(|e| ParseError { line: sline, message: e.to_string() })?;
            let (_, n) = t.int("n")?;
            if n == 0 {
                return t.err(sline, "n must be positive");
            }
            let n = n as usize;
            let (_, m) = t.int("m")?;
            let mut factors = Vec::with_capacity(m as usize);
            for _ in 0..m {
                let row = component(&mut t, n)?;
                let coeffs = (0..n).map(|_| t.below("coefficient", s)).collect::<Result<Vec<_>, _>>()?;
                factors.push(AssignmentMatrix::new(&ring, row, coeffs).expect("row checked"));
            }
            t.finish()?;
            let p = LinearProgram::new(ring, n, factors).map_err(|e| ParseError { line, message: e.to_string() })?;
            Ok(ProgramFile::Linear(p))
        }
        other => t.err(line, format!("expected `program` or `linear`, found {other:?}")),
    }
}

fn component(t: &mut Tokens<'_>, n: usize) -> Result<usize, ParseError> {
    let (line, i) = t.int("component")?;
    if i == 0 || i as usize > n {
        return t.err(line, format!("component {i} out of range 1..={n}"));
    }
    Ok(i as usize - 1)
}

pub fn write_mapping(e: &Mapping) -> String {
    let a = e.alphabet();
    let mut out = format!("{} {}\n", a.s(), a.n());
    out.push_str(&join(e.images()));
    out.push('\n');
    out
}

pub fn write_matrix(m: &MatrixMod) -> String {
    m.to_string()
}

/// Table format; linear payloads are materialised.
pub fn write_program(p: &InSituProgram) -> String {
    let a = p.alphabet();
    let mut out = format!("program {} {} {}\n", a.s(), a.n(), p.len());
    for asg in p.assignments() {
        let _ = writeln!(out, "{} {}", asg.target() + 1, join(&asg.to_table(a)));
    }
    out
}

pub fn write_linear_program(p: &LinearProgram) -> String {
    let mut out = format!("linear {} {} {}\n", p.ring().s(), p.n(), p.len());
    for f in p.factors() {
        let _ = writeln!(out, "{} {}", f.row() + 1, join(f.coefficients()));
    }
    out
}

pub fn write_program_file(p: &ProgramFile) -> String {
    match p {
        ProgramFile::Table(p) => write_program(p),
        ProgramFile::Linear(p) => write_linear_program(p),
    }
}

/// Linear payloads throughout means the program can be written compactly.
pub fn as_linear(p: &InSituProgram) -> Option<LinearProgram> {
    let a = p.alphabet();
    let ring = ModRing::new(a.s() as u64).ok()?;
    let factors = p
        .assignments()
        .iter()
        .map(|asg| match asg.payload() {
            Payload::Linear(c) => AssignmentMatrix::new(&ring, asg.target(), c.clone()).ok(),
            Payload::Table(_) => None,
        })
        .collect::<Option<Vec<_>>>()?;
    LinearProgram::new(ring, a.n(), factors).ok()
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}
