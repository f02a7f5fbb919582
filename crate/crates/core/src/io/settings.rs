use std::path::Path;

use super::{check_name, read_to_string, write_string, IoError};
use crate::model::Settings;

/// Parses `name = value` lines. `#` starts a comment, blank lines are
/// skipped, values are kept verbatim (trimmed).
pub fn parse_settings(text: &str) -> Result<Settings, IoError> {
    let mut settings = Settings::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| IoError::syntax(line_no, format!("expected `name = value`, got `{line}`")))?;
        let name = name.trim();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(IoError::syntax(line_no, format!("invalid parameter name `{name}`")));
        }
        if settings.entries.contains_key(name) {
            return Err(IoError::syntax(line_no, format!("duplicate parameter `{name}`")));
        }
        settings.set(name, value.trim());
    }
    Ok(settings)
}

pub fn read_settings(path: &Path) -> Result<Settings, IoError> {
    parse_settings(&read_to_string(path)?)
}

pub fn settings_to_string(settings: &Settings) -> Result<String, IoError> {
    let mut out = String::new();
    for (name, value) in settings.iter() {
        check_name(name)?;
        if value.contains('#') || value.contains('\n') {
            return Err(IoError::InvalidName(format!("{name} = {value}")));
        }
        out.push_str(name);
        out.push_str(" = ");
        out.push_str(value);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_settings(settings: &Settings, path: &Path) -> Result<(), IoError> {
    write_string(path, &settings_to_string(settings)?)
}
