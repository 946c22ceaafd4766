use serde::{Deserialize, Serialize};

pub const MAX_IDENTIFIER_LEN: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "error")]
pub enum IdentifierError {
    #[error("A name is required.")]
    EmptyName,
    #[error("“{name}” starts with a digit. Names must start with letters (or an underscore), for example “{suggestion}”.")]
    StartsWithDigit { name: String, suggestion: String },
    #[error("“{name}” contains {ch:?} at position {position}. Names may only contain letters, digits and underscores, and must start with letters.")]
    IllegalCharacter { name: String, ch: char, position: usize },
    #[error("“{name}” is {length} bytes long; names can be at most 63 bytes.")]
    TooLong { name: String, length: usize },
}

/// Accepts a letter or underscore followed by letters, digits or underscores,
/// at most 63 bytes.
pub fn validate_identifier(name: &str) -> Result<(), IdentifierError> {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return Err(IdentifierError::EmptyName);
    };
    if first.is_ascii_digit() {
        let rest: String = name.trim_start_matches(|c: char| c.is_ascii_digit()).to_string();
        let suggestion = if rest.is_empty() || !rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
            format!("t_{name}")
        } else {
            format!("{rest}_{}", &name[..name.len() - rest.len()])
        };
        return Err(IdentifierError::StartsWithDigit { name: name.to_string(), suggestion });
    }
    for (position, ch) in name.chars().enumerate() {
        let ok = if position == 0 { ch.is_ascii_alphabetic() || ch == '_' } else { ch.is_ascii_alphanumeric() || ch == '_' };
        if !ok {
            return Err(IdentifierError::IllegalCharacter { name: name.to_string(), ch, position });
        }
    }
    if name.len() > MAX_IDENTIFIER_LEN {
        return Err(IdentifierError::TooLong { name: name.to_string(), length: name.len() });
    }
    Ok(())
}
