//! Size and statistics table built from run logs.

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SummaryError {
    #[error("run log line {line}: {message}")]
    Malformed { line: usize, message: String },
}

struct Row {
    instance: String,
    original: [u64; 3],
    reduced: [u64; 3],
    rounds: u64,
    solves: u64,
    time: Option<f64>,
}

fn size(value: &Value, line: usize) -> Result<[u64; 3], SummaryError> {
    let get = |key: &str| {
        value["size"][key].as_u64().ok_or_else(|| SummaryError::Malformed {
            line,
            message: format!("missing size field `{key}`"),
        })
    };
    Ok([get("vars")?, get("conss")?, get("nonzeros")?])
}

fn count(value: &Value, key: &str, line: usize) -> Result<u64, SummaryError> {
    value[key].as_u64().ok_or_else(|| SummaryError::Malformed {
        line,
        message: format!("missing field `{key}`"),
    })
}

const HEADER: &str = concat!(
    "                        Original                    Final\n",
    "Instance          Vars  Conss  Nonzeroes    Vars  Conss  Nonzeroes  Rounds  MIP Solves     Time\n",
);

/// Renders one row per completed run in `log` (one or more concatenated
/// JSON-lines run logs). Runs without an `end` record are skipped.
pub fn summarize(log: &str) -> Result<String, SummaryError> {
    let mut rows = Vec::new();
    let mut open: Option<(String, [u64; 3])> = None;
    for (idx, text) in log.lines().enumerate() {
        let line = idx + 1;
        if text.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(text).map_err(|e| SummaryError::Malformed {
            line,
            message: e.to_string(),
        })?;
        match value["event"].as_str() {
            Some("start") => {
                let name = value["instance"].as_str().unwrap_or("-").to_string();
                open = Some((name, size(&value, line)?));
            }
            Some("end") => {
                let Some((instance, original)) = open.take() else {
                    return Err(SummaryError::Malformed {
                        line,
                        message: "end record without start".into(),
                    });
                };
                rows.push(Row {
                    instance,
                    original,
                    reduced: size(&value, line)?,
                    rounds: count(&value, "rounds", line)?,
                    solves: count(&value, "solves", line)?,
                    time: value["wall_time"].as_f64(),
                });
            }
            _ => {}
        }
    }
    let mut out = String::from(HEADER);
    for row in rows {
        let time = row.time.map_or_else(|| "-".to_string(), |t| format!("{t:.1}"));
        let mut name = row.instance;
        if name.chars().count() > 16 {
            name = name.chars().take(15).collect::<String>() + "~";
        }
        out.push_str(&format!(
            "{:<16}{:>6} {:>6} {:>10}  {:>6} {:>6} {:>10}  {:>6}  {:>10} {:>8}\n",
            name,
            row.original[0],
            row.original[1],
            row.original[2],
            row.reduced[0],
            row.reduced[1],
            row.reduced[2],
            row.rounds,
            row.solves,
            time
        ));
    }
    Ok(out)
}
