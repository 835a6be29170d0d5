//! Event file schema.
//!
//! ```json
//! {"n": 2, "explicit": ["10", "11"]}
//! {"n": 2, "monotone_minimal": ["10"]}
//! ```
//!
//! Measure files are [`MeasureSpec`](crate::MeasureSpec) serialized directly.

use serde::{Deserialize, Serialize};

use crate::cube::{Config, Event};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_minimal: Option<Vec<String>>,
}

fn parse_members(n: usize, members: &[String]) -> Result<Vec<Config>> {
    members
        .iter()
        .map(|s| {
            let c = Config::parse(s)?;
            if c.n() != n {
                return Err(Error::InvalidBitstring(format!("{s} (expected length {n})")));
            }
            Ok(c)
        })
        .collect()
}

impl EventFile {
    pub fn to_event(&self) -> Result<Event> {
        match (&self.explicit, &self.monotone_minimal) {
            (Some(members), None) => Event::from_configs(self.n, parse_members(self.n, members)?),
            (None, Some(minimal)) => Event::up_closure(self.n, &parse_members(self.n, minimal)?),
            _ => Err(Error::InvalidParameter(
                "event file needs exactly one of \"explicit\" or \"monotone_minimal\"".into(),
            )),
        }
    }

    /// Minimal elements for increasing events, the member list otherwise.
    pub fn describe(e: &Event) -> EventFile {
        match e.minimal_elements() {
            Ok(min) => EventFile {
                n: e.n(),
                explicit: None,
                monotone_minimal: Some(min.iter().map(|c| c.to_string()).collect()),
            },
            Err(_) => EventFile { n: e.n(), explicit: Some(e.members().map(|c| c.to_string()).collect()), monotone_minimal: None },
        }
    }

    pub fn explicit(e: &Event) -> EventFile {
        EventFile { n: e.n(), explicit: Some(e.members().map(|c| c.to_string()).collect()), monotone_minimal: None }
    }

    /// Compact form such as `up{10}` or `{10,01}`.
    pub fn short(&self) -> String {
        match (&self.explicit, &self.monotone_minimal) {
            (_, Some(min)) => format!("up{{{}}}", min.join(",")),
            (Some(members), None) => format!("{{{}}}", members.join(",")),
            (None, None) => "?".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        let f: EventFile = serde_json::from_str(r#"{"n": 2, "monotone_minimal": ["10"]}"#).unwrap();
        assert_eq!(f.to_event().unwrap(), Event::from_bitstrings(2, &["10", "11"]).unwrap());
        let f: EventFile = serde_json::from_str(r#"{"n": 2, "explicit": ["11", "00"]}"#).unwrap();
        assert_eq!(f.to_event().unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_files() {
        let f: EventFile = serde_json::from_str(r#"{"n": 2, "explicit": ["101"]}"#).unwrap();
        assert!(matches!(f.to_event(), Err(Error::InvalidBitstring(_))));
        let f: EventFile = serde_json::from_str(r#"{"n": 2, "explicit": ["1x"]}"#).unwrap();
        assert!(matches!(f.to_event(), Err(Error::InvalidBitstring(_))));
        let f = EventFile { n: 2, explicit: None, monotone_minimal: None };
        assert!(f.to_event().is_err());
        let f: EventFile = serde_json::from_str(r#"{"n": 2, "monotone_minimal": ["10", "11"]}"#).unwrap();
        assert!(matches!(f.to_event(), Err(Error::NotAntichain(..))));
        assert!(serde_json::from_str::<EventFile>(r#"{"n": 2, "bogus": []}"#).is_err());
    }

    #[test]
    fn describe_round_trips() {
        let up = Event::from_bitstrings(3, &["110", "111", "011"]).unwrap();
        let f = EventFile::describe(&up);
        assert_eq!(f.short(), "up{110,011}");
        assert_eq!(f.to_event().unwrap(), up);
        let odd = Event::from_bitstrings(3, &["100"]).unwrap();
        let f = EventFile::describe(&odd);
        assert_eq!(f.short(), "{100}");
        let back: EventFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back.to_event().unwrap(), odd);
    }
}
