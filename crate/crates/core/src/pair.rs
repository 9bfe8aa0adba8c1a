use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// An ordered pair of surface words, the unit of classification.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordPair {
    pub x: String,
    pub y: String,
}

impl WordPair {
    pub fn new(x: impl Into<String>, y: impl Into<String>) -> Self {
        WordPair {
            x: x.into(),
            y: y.into(),
        }
    }
}

impl fmt::Display for WordPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.x, self.y)
    }
}

impl FromStr for WordPair {
    type Err = Error;

    /// Parses `x:y`. Both sides are trimmed and lowercased.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("expected x:y, got {s:?}")))?;
        let x = x.trim().to_lowercase();
        let y = y.trim().to_lowercase();
        if x.is_empty() || y.is_empty() || y.contains(':') {
            return Err(Error::InvalidArgument(format!("expected x:y, got {s:?}")));
        }
        Ok(WordPair { x, y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: WordPair = "Mason:stone".parse().unwrap();
        assert_eq!(p, WordPair::new("mason", "stone"));
        assert_eq!(p.to_string(), "mason:stone");
        assert!("mason".parse::<WordPair>().is_err());
        assert!(":stone".parse::<WordPair>().is_err());
        assert!("a:b:c".parse::<WordPair>().is_err());
    }
}
