//! Plain-text trace files: one `<id> <size> <cost>` record per line.
//!
//! `#` starts a comment; blank lines are skipped. Costs accept integer,
//! decimal and `p/q` literals and are parsed exactly.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::file::{FileId, FileSpec, RequestSequence};
use crate::rational::{self, Rational};

pub fn parse_trace(text: &str) -> Result<RequestSequence> {
    let mut requests = Vec::new();
    let mut seen: HashMap<FileId, (u64, Rational)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                reason: format!("expected `<id> <size> <cost>`, found {} fields", fields.len()),
            });
        }
        let size: u64 = fields[1].parse().map_err(|_| Error::Parse {
            line,
            reason: format!("size `{}` is not a non-negative integer", fields[1]),
        })?;
        let cost = rational::parse_rational(fields[2]).map_err(|e| Error::Parse {
            line,
            reason: e.0,
        })?;
        let id = FileId::new(fields[0]);
        let spec = FileSpec::new(id.clone(), size, cost.clone()).map_err(|e| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        match seen.get(&id) {
            Some((s, c)) if *s != size || *c != cost => {
                return Err(Error::Consistency { line, id });
            }
            Some(_) => {}
            None => {
                seen.insert(id, (size, cost));
            }
        }
        requests.push(spec);
    }
    RequestSequence::new(requests)
}

/// Writes one normalized record per request (costs as `n` or `p/q`).
pub fn serialize_trace(seq: &RequestSequence) -> String {
    let mut out = String::new();
    for f in seq.iter() {
        writeln!(out, "{} {} {}", f.id, f.size, rational::format_rational(&f.cost)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn three_records() {
        let seq = parse_trace("a 2 4\nb 1 1\nc 2 3").unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.requests()[0].size, 2);
        assert_eq!(seq.requests()[2].cost, int(3));
    }

    #[test]
    fn comments_and_blank_lines() {
        let seq = parse_trace("# comment\n\n   \na 1 1 # trailing\n").unwrap();
        assert_eq!(seq.len(), 1);
    }

    #[test]
    fn contradictory_cost() {
        assert_eq!(
            parse_trace("a 2 4\na 2 5").unwrap_err(),
            Error::Consistency { line: 2, id: FileId::new("a") }
        );
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        for (text, line) in [
            ("a 1", 1),
            ("a 1 1\nb x 1", 2),
            ("a 1 1\n\nb 1 1/0", 3),
            ("a 0 1", 1),
            ("a 1 -2", 1),
            ("a 1 1 extra", 1),
        ] {
            match parse_trace(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn exact_costs_and_round_trip() {
        let seq = parse_trace("a 1 0.25\nb 3 2/6\na 1 1/4").unwrap();
        assert_eq!(seq.requests()[0].cost, ratio(1, 4));
        assert_eq!(seq.requests()[1].cost, ratio(1, 3));
        let text = serialize_trace(&seq);
        assert_eq!(text, "a 1 1/4\nb 3 1/3\na 1 1/4\n");
        assert_eq!(serialize_trace(&parse_trace(&text).unwrap()), text);
    }
}
