//! Exit statuses and the one-line error record on stderr.

use std::fmt;

/// Failure class, which fixes the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Io,
    Schema,
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub kind: Kind,
    pub code: &'static str,
    /// Offending configuration path, empty when none applies.
    pub path: String,
    pub message: String,
}

impl Failure {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Failure { kind: Kind::Schema, code: "schema_violation", path: path.into(), message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure { kind: Kind::Io, code: "io", path: String::new(), message: message.into() }
    }

    pub fn numerical(code: &'static str, message: impl Into<String>) -> Self {
        Failure { kind: Kind::Numerical, code, path: String::new(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Io => 1,
            Kind::Schema => 2,
            Kind::Numerical => 3,
        }
    }
}

/// `error code=<code> path=<path> message=<json string>`.
impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "-" } else { &self.path };
        let message = serde_json::to_string(&self.message).expect("string serializes");
        write!(f, "error code={} path={} message={}", self.code, path, message)
    }
}

impl From<netlq::Error> for Failure {
    fn from(e: netlq::Error) -> Self {
        let message = e.to_string();
        if e.is_numerical() {
            return Failure::numerical(e.code(), message);
        }
        let path = match &e {
            netlq::Error::InvalidParameter { field, .. } => field.clone(),
            netlq::Error::Wiring(_) => "channel.kind,encoder.kind".to_string(),
            netlq::Error::UnknownAxis(_) => "experiment.sweep.axis".to_string(),
            _ => String::new(),
        };
        Failure { kind: Kind::Schema, code: e.code(), path, message }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_is_one_line() {
        let f = Failure::schema("cost.q", "bad\nvalue");
        let line = f.to_string();
        assert!(!line.contains('\n'));
        assert_eq!(line, r#"error code=schema_violation path=cost.q message="bad\nvalue""#);
        assert_eq!(f.exit_code(), 2);
    }

    #[test]
    fn numerical_library_errors_exit_3() {
        let f = Failure::from(netlq::Error::GridTooCoarse { t: 1, mass: 0.1 });
        assert_eq!((f.exit_code(), f.code), (3, "grid_too_coarse"));
        let g = Failure::from(netlq::Error::invalid("cost.p", "must be > 0"));
        assert_eq!((g.exit_code(), g.path.as_str()), (2, "cost.p"));
    }
}
