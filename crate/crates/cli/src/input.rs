//! Spec arguments: inline JSON or a path to a JSON file.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::CliError;

/// Parses `arg` as JSON if it looks like an object, otherwise reads it as a file.
pub fn load<T: DeserializeOwned>(what: &str, arg: &str) -> Result<T, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(Path::new(arg))
            .map_err(|e| CliError::usage(format!("cannot read {what} from `{arg}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("cannot parse {what}: {e}")))
}
