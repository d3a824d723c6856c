use std::fmt;

/// Failure classes, each with its own exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Io,
    /// The LP did not solve or its measure was degenerate.
    Lp,
    /// A verification run (oracle suite) found a disagreement.
    Check,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Usage => 2,
            Kind::Io => 3,
            Kind::Lp => 4,
            Kind::Check => 5,
            Kind::Internal => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Io => "io",
            Kind::Lp => "lp",
            Kind::Check => "check",
            Kind::Internal => "internal",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure::new(Kind::Usage, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure::new(Kind::Io, message)
    }

    /// The single stderr line: `error kind=<kind> exit=<code> message="<escaped>"`.
    pub fn line(&self) -> String {
        let escaped = self.message.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n");
        format!("error kind={} exit={} message=\"{escaped}\"", self.kind.as_str(), self.kind.exit_code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_line_is_one_quoted_record() {
        let f = Failure::usage("bad \"key\"\nsecond");
        assert_eq!(f.line(), "error kind=usage exit=2 message=\"bad \\\"key\\\"\\nsecond\"");
    }
}
