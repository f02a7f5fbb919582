use std::path::Path;

use super::{check_name, format_number, parse_number, read_to_string, write_string, IoError};
use crate::model::{Problem, Solution};

/// A parsed solution file plus the number of problem variables the file did
/// not mention (those default to zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRead {
    pub solution: Solution,
    pub missing: usize,
}

/// Parses `name value` lines against `problem`.
///
/// Values for names that are not variables of `problem` are rejected, since
/// they almost always mean the file belongs to a different instance.
pub fn parse_solution(text: &str, problem: &Problem) -> Result<SolutionRead, IoError> {
    let known: std::collections::HashMap<&str, usize> = problem
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| (v.name.as_str(), j))
        .collect();
    let mut values: Vec<Option<f64>> = vec![None; problem.num_vars()];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(name), Some(value), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(IoError::syntax(line_no, format!("expected `name value`, got `{line}`")));
        };
        let value =
            parse_number(value).ok_or_else(|| IoError::syntax(line_no, format!("invalid value `{value}`")))?;
        let &j = known
            .get(name)
            .ok_or_else(|| IoError::syntax(line_no, format!("unknown variable `{name}`")))?;
        if values[j].replace(value).is_some() {
            return Err(IoError::syntax(line_no, format!("duplicate variable `{name}`")));
        }
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    let solution = problem
        .variables
        .iter()
        .zip(values)
        .map(|(v, x)| (v.name.clone(), x.unwrap_or(0.0)))
        .collect();
    Ok(SolutionRead { solution, missing })
}

pub fn read_solution(path: &Path, problem: &Problem) -> Result<SolutionRead, IoError> {
    let read = parse_solution(&read_to_string(path)?, problem)?;
    if read.missing > 0 {
        log::warn!(
            "{}: {} variables missing, assumed zero",
            path.display(),
            read.missing
        );
    }
    Ok(read)
}

pub fn solution_to_string(solution: &Solution) -> Result<String, IoError> {
    let mut out = String::new();
    for (name, &value) in &solution.values {
        check_name(name)?;
        out.push_str(name);
        out.push(' ');
        out.push_str(&format_number(value));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_solution(solution: &Solution, path: &Path) -> Result<(), IoError> {
    write_string(path, &solution_to_string(solution)?)
}
