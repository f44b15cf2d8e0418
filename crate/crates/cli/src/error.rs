use std::fmt;

use sinar_core::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A failure reported as one `error: kind=<kind> msg="<msg>"` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: &'static str,
    pub msg: String,
}

impl CliError {
    pub fn new(kind: &'static str, msg: impl Into<String>) -> CliError {
        CliError { kind, msg: msg.into() }
    }

    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::new("config", msg)
    }

    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::new("usage", msg)
    }

    /// The single diagnostic line, with the message on one line and its
    /// quotes and backslashes escaped.
    pub fn line(&self) -> String {
        let mut msg = String::with_capacity(self.msg.len());
        for c in self.msg.chars() {
            match c {
                '"' => msg.push_str("\\\""),
                '\\' => msg.push_str("\\\\"),
                '\n' => msg.push_str("\\n"),
                '\r' => {}
                c => msg.push(c),
            }
        }
        format!("error: kind={} msg=\"{msg}\"", self.kind)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_is_single_and_escaped() {
        let e = CliError::new("parse", "bad \"x\"\nnext");
        assert_eq!(e.line(), r#"error: kind=parse msg="bad \"x\"\nnext""#);
        assert!(!e.line().contains('\n'));
    }
}
