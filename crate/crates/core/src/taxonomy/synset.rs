use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Identifier of a taxonomy node.
///
/// Either a WordNet id (`n` followed by an 8-digit offset, e.g. `n01443537`)
/// or a plain token such as `c03` for hand-made taxonomies. Tokens may use
/// ASCII letters, digits, `_`, `-`, `.` and `:`. A token made of `n` followed
/// only by digits is taken to be a WordNet id and must have exactly 8 digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetRef(String);

impl SynsetRef {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty()
            || !id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b':'))
        {
            return Err(Error::InvalidSynsetId(id));
        }
        let rest = &id[1..];
        if id.starts_with('n')
            && !rest.is_empty()
            && rest.bytes().all(|b| b.is_ascii_digit())
            && rest.len() != 8
        {
            return Err(Error::InvalidSynsetId(id));
        }
        Ok(SynsetRef(id))
    }

    /// WordNet id for a noun byte offset.
    pub fn from_noun_offset(offset: u64) -> Self {
        SynsetRef(format!("n{offset:08}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Byte offset when this is a WordNet noun id.
    pub fn noun_offset(&self) -> Option<u64> {
        let rest = self.0.strip_prefix('n')?;
        if rest.len() == 8 && rest.bytes().all(|b| b.is_ascii_digit()) {
            rest.parse().ok()
        } else {
            None
        }
    }
}

impl fmt::Display for SynsetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SynsetRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynsetRef::new(s)
    }
}

impl AsRef<str> for SynsetRef {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for SynsetRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SynsetRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SynsetRef::new(s).map_err(serde::de::Error::custom)
    }
}
