//! Free-format MPS.
//!
//! Supported sections: `NAME`, `OBJSENSE`, `ROWS`, `COLUMNS` (with integer
//! markers), `RHS`, `RANGES`, `BOUNDS` and `ENDATA`. A right-hand side on the
//! objective row carries the negated objective offset. Values whose
//! magnitude reaches the infinity threshold are read as infinite, and
//! infinite bounds are written by leaving the entry out. Range values are
//! taken at their exact decimal value, so the far side of a ranged row is
//! rounded once and every written row reads back bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::exact::Decimal;
use super::{check_name, parse_number, read_to_string, write_string, IoError};
use crate::model::{Constraint, ObjSense, Problem, Tolerances, VarType, Variable};

/// Shortest decimal text that parses back to exactly `value`.
pub fn format_number(value: f64) -> String {
    if value == f64::INFINITY {
        return "inf".into();
    }
    if value == f64::NEG_INFINITY {
        return "-inf".into();
    }
    let magnitude = value.abs();
    if magnitude == 0.0 || (1e-4..1e15).contains(&magnitude) {
        format!("{value}")
    } else {
        format!("{value:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Le,
    Ge,
    Eq,
}

struct RowDraft {
    name: String,
    kind: RowKind,
    entries: Vec<(usize, f64)>,
    rhs: f64,
    /// Range value, with its exact decimal form when the token has one.
    range: Option<(f64, Option<Decimal>)>,
}

enum RowRef {
    Objective,
    Free,
    Row(usize),
}

struct Reader {
    tol: Tolerances,
    name: String,
    sense: ObjSense,
    objective_row: Option<String>,
    free_rows: Vec<String>,
    rows: Vec<RowDraft>,
    row_index: HashMap<String, usize>,
    vars: Vec<Variable>,
    var_index: HashMap<String, usize>,
    integer_block: bool,
    offset: f64,
}

impl Reader {
    fn row_ref(&self, name: &str, line: usize) -> Result<RowRef, IoError> {
        if self.objective_row.as_deref() == Some(name) {
            return Ok(RowRef::Objective);
        }
        if self.free_rows.iter().any(|r| r == name) {
            return Ok(RowRef::Free);
        }
        self.row_index
            .get(name)
            .map(|&i| RowRef::Row(i))
            .ok_or_else(|| IoError::syntax(line, format!("unknown row `{name}`")))
    }

    fn number(&self, token: &str, line: usize) -> Result<f64, IoError> {
        parse_number(token)
            .map(|v| self.tol.clamp_infinite(v))
            .ok_or_else(|| IoError::syntax(line, format!("invalid number `{token}`")))
    }

    fn rows_line(&mut self, tokens: &[&str], line: usize) -> Result<(), IoError> {
        let [kind, name] = tokens else {
            return Err(IoError::syntax(line, "expected `<type> <row name>`"));
        };
        let name = name.to_string();
        if self.row_index.contains_key(&name)
            || self.objective_row.as_ref() == Some(&name)
            || self.free_rows.contains(&name)
        {
            return Err(IoError::syntax(line, format!("duplicate row `{name}`")));
        }
        let kind = match kind.to_ascii_uppercase().as_str() {
            "N" => {
                if self.objective_row.is_none() {
                    self.objective_row = Some(name);
                } else {
                    self.free_rows.push(name);
                }
                return Ok(());
            }
            "L" => RowKind::Le,
            "G" => RowKind::Ge,
            "E" => RowKind::Eq,
            other => return Err(IoError::syntax(line, format!("unknown row type `{other}`"))),
        };
        self.row_index.insert(name.clone(), self.rows.len());
        self.rows.push(RowDraft {
            name,
            kind,
            entries: Vec::new(),
            rhs: 0.0,
            range: None,
        });
        Ok(())
    }

    fn columns_line(&mut self, tokens: &[&str], line: usize) -> Result<(), IoError> {
        if tokens.len() >= 3 && tokens[1].trim_matches('\'') == "MARKER" {
            match tokens[2].trim_matches('\'') {
                "INTORG" => self.integer_block = true,
                "INTEND" => self.integer_block = false,
                other => return Err(IoError::syntax(line, format!("unknown marker `{other}`"))),
            }
            return Ok(());
        }
        if tokens.len() != 3 && tokens.len() != 5 {
            return Err(IoError::syntax(line, "expected `<column> <row> <value> [<row> <value>]`"));
        }
        let col = tokens[0];
        let j = match self.vars.last() {
            Some(last) if last.name == col => self.vars.len() - 1,
            _ => {
                if self.var_index.contains_key(col) {
                    return Err(IoError::syntax(line, format!("duplicate column `{col}`")));
                }
                let var_type = if self.integer_block {
                    VarType::Integer
                } else {
                    VarType::Continuous
                };
                self.var_index.insert(col.to_string(), self.vars.len());
                self.vars.push(Variable {
                    name: col.to_string(),
                    lower: 0.0,
                    upper: f64::INFINITY,
                    objective: 0.0,
                    var_type,
                });
                self.vars.len() - 1
            }
        };
        for pair in tokens[1..].chunks(2) {
            let value = self.number(pair[1], line)?;
            match self.row_ref(pair[0], line)? {
                RowRef::Objective => self.vars[j].objective = value,
                RowRef::Free => {}
                RowRef::Row(i) => {
                    let entries = &mut self.rows[i].entries;
                    if entries.last().is_some_and(|&(last, _)| last == j) {
                        return Err(IoError::syntax(
                            line,
                            format!("duplicate entry for column `{col}` in row `{}`", pair[0]),
                        ));
                    }
                    if value != 0.0 {
                        entries.push((j, value));
                    }
                }
            }
        }
        Ok(())
    }

    /// RHS and RANGES lines: an optional set name followed by pairs.
    fn side_line(&mut self, tokens: &[&str], line: usize, ranges: bool) -> Result<(), IoError> {
        let pairs = match tokens.len() {
            2 | 4 => tokens,
            3 | 5 => &tokens[1..],
            _ => return Err(IoError::syntax(line, "expected `[<set>] <row> <value> [<row> <value>]`")),
        };
        for pair in pairs.chunks(2) {
            let value = self.number(pair[1], line)?;
            match (self.row_ref(pair[0], line)?, ranges) {
                (RowRef::Objective, false) => self.offset = -value,
                (RowRef::Objective, true) => {
                    return Err(IoError::syntax(line, "range on objective row"));
                }
                (RowRef::Free, _) => {}
                (RowRef::Row(i), false) => self.rows[i].rhs = value,
                (RowRef::Row(i), true) => self.rows[i].range = Some((value, Decimal::parse(pair[1]))),
            }
        }
        Ok(())
    }

    fn bounds_line(&mut self, tokens: &[&str], line: usize) -> Result<(), IoError> {
        let kind = tokens.first().map(|t| t.to_ascii_uppercase()).unwrap_or_default();
        let needs_value = matches!(kind.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
        let (col, value) = match (needs_value, tokens.len()) {
            (true, 4) => (tokens[2], Some(tokens[3])),
            (true, 3) => (tokens[1], Some(tokens[2])),
            (false, 3) => (tokens[2], None),
            (false, 2) => (tokens[1], None),
            (false, 4) if kind == "BV" => (tokens[2], None),
            _ => return Err(IoError::syntax(line, "malformed bound")),
        };
        let &j = self
            .var_index
            .get(col)
            .ok_or_else(|| IoError::syntax(line, format!("unknown column `{col}`")))?;
        let value = value.map(|v| self.number(v, line)).transpose()?;
        let var = &mut self.vars[j];
        match (kind.as_str(), value) {
            ("UP", Some(v)) => var.upper = v,
            ("LO", Some(v)) => var.lower = v,
            ("FX", Some(v)) => {
                var.lower = v;
                var.upper = v;
            }
            ("UI", Some(v)) => {
                var.var_type = VarType::Integer;
                var.upper = v;
            }
            ("LI", Some(v)) => {
                var.var_type = VarType::Integer;
                var.lower = v;
            }
            ("FR", None) => {
                var.lower = f64::NEG_INFINITY;
                var.upper = f64::INFINITY;
            }
            ("MI", None) => var.lower = f64::NEG_INFINITY,
            ("PL", None) => var.upper = f64::INFINITY,
            ("BV", None) => {
                var.var_type = VarType::Integer;
                var.lower = 0.0;
                var.upper = 1.0;
            }
            _ => return Err(IoError::syntax(line, format!("unknown bound type `{kind}`"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<Problem, IoError> {
        let mut problem = Problem::new(self.name);
        problem.variables = self.vars;
        problem.offset = self.offset;
        for row in self.rows {
            let b = row.rhs;
            let (lhs, rhs) = match (row.kind, &row.range) {
                (RowKind::Le, None) => (f64::NEG_INFINITY, b),
                (RowKind::Ge, None) => (b, f64::INFINITY),
                (RowKind::Eq, None) => (b, b),
                (RowKind::Le, Some(r)) => (shift(b, r, false), b),
                (RowKind::Ge, Some(r)) => (b, shift(b, r, true)),
                (RowKind::Eq, Some(r)) if r.0 >= 0.0 => (b, shift(b, r, true)),
                (RowKind::Eq, Some(r)) => (shift(b, r, false), b),
            };
            let (lhs, rhs) = (self.tol.clamp_infinite(lhs), self.tol.clamp_infinite(rhs));
            problem.add_constraint(Constraint {
                name: row.name,
                coefficients: row.entries,
                lhs,
                rhs,
            });
        }
        if self.sense == ObjSense::Maximize {
            problem.sense = ObjSense::Maximize;
            for var in &mut problem.variables {
                var.objective = -var.objective;
            }
            problem.offset = -problem.offset;
        }
        Ok(problem)
    }
}

/// Parses free-MPS text.
pub fn parse_instance(text: &str) -> Result<Problem, IoError> {
    let mut reader = Reader {
        tol: Tolerances::default(),
        name: String::new(),
        sense: ObjSense::Minimize,
        objective_row: None,
        free_rows: Vec::new(),
        rows: Vec::new(),
        row_index: HashMap::new(),
        vars: Vec::new(),
        var_index: HashMap::new(),
        integer_block: false,
        offset: 0.0,
    };
    let mut section = Section::None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let is_header = !raw.starts_with(char::is_whitespace);
        if is_header {
            if section == Section::End {
                return Err(IoError::syntax(line, "content after ENDATA"));
            }
            section = match tokens[0].to_ascii_uppercase().as_str() {
                "NAME" => {
                    reader.name = tokens.get(1).copied().unwrap_or_default().to_string();
                    Section::None
                }
                "OBJSENSE" => match tokens.get(1) {
                    Some(sense) => {
                        reader.sense = parse_sense(sense, line)?;
                        Section::None
                    }
                    None => Section::ObjSense,
                },
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(IoError::syntax(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::ObjSense => reader.sense = parse_sense(tokens[0], line)?,
            Section::Rows => reader.rows_line(&tokens, line)?,
            Section::Columns => reader.columns_line(&tokens, line)?,
            Section::Rhs => reader.side_line(&tokens, line, false)?,
            Section::Ranges => reader.side_line(&tokens, line, true)?,
            Section::Bounds => reader.bounds_line(&tokens, line)?,
            Section::None | Section::End => {
                return Err(IoError::syntax(line, "data line outside of a section"));
            }
        }
    }
    reader.finish()
}

fn parse_sense(token: &str, line: usize) -> Result<ObjSense, IoError> {
    match token.to_ascii_uppercase().as_str() {
        "MIN" | "MINIMIZE" => Ok(ObjSense::Minimize),
        "MAX" | "MAXIMIZE" => Ok(ObjSense::Maximize),
        other => Err(IoError::syntax(line, format!("unknown objective sense `{other}`"))),
    }
}

pub fn read_instance(path: &Path) -> Result<Problem, IoError> {
    parse_instance(&read_to_string(path)?)
}

/// `b + |r|` (or `b - |r|`) for a range token, computed exactly on the
/// token's decimal value and rounded once. Tokens without a plain decimal
/// form (such as `inf`) fall back to float arithmetic on `value`.
fn shift(b: f64, range: &(f64, Option<Decimal>), up: bool) -> f64 {
    let (r, exact) = range;
    match exact {
        Some(d) if b.is_finite() && r.is_finite() => {
            let d = if up { d.abs() } else { d.abs().neg() };
            Decimal::from_f64(b).add(&d).to_f64()
        }
        _ if up => b + r.abs(),
        _ => b - r.abs(),
    }
}

/// Row type, right-hand side and optional range text that reproduce
/// `[lhs, rhs]` bit for bit when read back.
fn row_encoding(lhs: f64, rhs: f64) -> (char, f64, Option<String>) {
    if lhs == rhs {
        return ('E', rhs, None);
    }
    match (lhs.is_finite(), rhs.is_finite()) {
        (false, false) => ('L', 1e30, None),
        (false, true) => ('L', rhs, None),
        (true, false) => ('G', lhs, None),
        (true, true) => {
            // Reading computes the far side from the near one. Prefer the
            // short text of a float next to the width when it reads back
            // exactly; otherwise write the exact decimal difference.
            let width = rhs - lhs;
            let (mut up, mut down) = (width, width);
            let candidates = std::iter::once(width).chain((0..8).flat_map(|_| {
                up = up.next_up();
                down = down.next_down();
                [up, down]
            }));
            for r in candidates {
                let text = format_number(r);
                let range = (r, Decimal::parse(&text));
                if shift(rhs, &range, false) == lhs {
                    return ('L', rhs, Some(text));
                }
                if shift(lhs, &range, true) == rhs {
                    return ('G', lhs, Some(text));
                }
            }
            let exact = Decimal::from_f64(rhs).add(&Decimal::from_f64(lhs).neg());
            ('L', rhs, Some(exact.to_text()))
        }
    }
}

/// Renders `problem` as free-MPS text.
pub fn write_instance_string(problem: &Problem) -> Result<String, IoError> {
    let tol = Tolerances::default();
    let finite = |v: f64| tol.clamp_infinite(v);
    let mut objective_name = String::from("OBJ");
    while problem.constraints.iter().any(|c| c.name == objective_name) {
        objective_name.push('_');
    }
    let maximize = problem.sense == ObjSense::Maximize;
    let sign = if maximize { -1.0 } else { 1.0 };

    let mut out = String::new();
    if problem.name.is_empty() {
        out.push_str("NAME\n");
    } else {
        check_name(&problem.name)?;
        writeln!(out, "NAME {}", problem.name).unwrap();
    }
    if maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }

    out.push_str("ROWS\n");
    writeln!(out, " N  {objective_name}").unwrap();
    let mut encodings = Vec::with_capacity(problem.num_conss());
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); problem.num_vars()];
    for (i, cons) in problem.constraints.iter().enumerate() {
        check_name(&cons.name)?;
        let (lhs, rhs) = (finite(cons.lhs), finite(cons.rhs));
        if lhs > rhs {
            return Err(IoError::InvalidName(format!(
                "{} (left-hand side {} exceeds right-hand side {})",
                cons.name, lhs, rhs
            )));
        }
        let enc = row_encoding(lhs, rhs);
        writeln!(out, " {}  {}", enc.0, cons.name).unwrap();
        encodings.push(enc);
        for &(j, a) in &cons.coefficients {
            columns
                .get_mut(j)
                .ok_or_else(|| IoError::InvalidName(format!("{} (bad column index {j})", cons.name)))?
                .push((i, a));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_integer_block = false;
    let mut markers = 0usize;
    for (j, var) in problem.variables.iter().enumerate() {
        check_name(&var.name)?;
        if var.is_integer() != in_integer_block {
            let tag = if var.is_integer() { "INTORG" } else { "INTEND" };
            writeln!(out, "    MARKER{markers}  'MARKER'  '{tag}'").unwrap();
            markers += 1;
            in_integer_block = var.is_integer();
        }
        let objective = sign * var.objective;
        if objective != 0.0 || columns[j].is_empty() {
            writeln!(out, "    {}  {}  {}", var.name, objective_name, format_number(objective)).unwrap();
        }
        for &(i, a) in &columns[j] {
            writeln!(out, "    {}  {}  {}", var.name, problem.constraints[i].name, format_number(a)).unwrap();
        }
    }
    if in_integer_block {
        writeln!(out, "    MARKER{markers}  'MARKER'  'INTEND'").unwrap();
    }

    out.push_str("RHS\n");
    for (cons, &(_, rhs, _)) in problem.constraints.iter().zip(&encodings) {
        if rhs != 0.0 {
            writeln!(out, "    RHS  {}  {}", cons.name, format_number(rhs)).unwrap();
        }
    }
    let offset = sign * problem.offset;
    if offset != 0.0 {
        writeln!(out, "    RHS  {}  {}", objective_name, format_number(-offset)).unwrap();
    }

    if encodings.iter().any(|e| e.2.is_some()) {
        out.push_str("RANGES\n");
        for (cons, (_, _, range)) in problem.constraints.iter().zip(&encodings) {
            if let Some(r) = range {
                writeln!(out, "    RNG  {}  {}", cons.name, r).unwrap();
            }
        }
    }

    out.push_str("BOUNDS\n");
    for var in &problem.variables {
        let (lower, upper) = (finite(var.lower), finite(var.upper));
        let name = &var.name;
        if lower == upper {
            writeln!(out, " FX BND  {name}  {}", format_number(lower)).unwrap();
            continue;
        }
        if lower == f64::NEG_INFINITY && upper == f64::INFINITY {
            writeln!(out, " FR BND  {name}").unwrap();
            continue;
        }
        if lower == f64::NEG_INFINITY {
            writeln!(out, " MI BND  {name}").unwrap();
        } else if lower != 0.0 || lower.is_sign_negative() {
            writeln!(out, " LO BND  {name}  {}", format_number(lower)).unwrap();
        }
        if upper != f64::INFINITY {
            writeln!(out, " UP BND  {name}  {}", format_number(upper)).unwrap();
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn write_instance(problem: &Problem, path: &Path) -> Result<(), IoError> {
    write_string(path, &write_instance_string(problem)?)
}
