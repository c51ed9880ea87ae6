//! Nodal field text format: a `perfhom-field v1` header followed by one value
//! per vertex line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const FIELD_HEADER: &str = "perfhom-field v1";

pub fn write_field(values: &[f64]) -> String {
    let mut s = String::with_capacity(24 * (values.len() + 1));
    s.push_str(FIELD_HEADER);
    s.push('\n');
    for v in values {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn write_field_file(values: &[f64], path: &Path) -> Result<()> {
    std::fs::write(path, write_field(values)).map_err(|e| Error::io(path, e))
}

pub fn read_field(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == FIELD_HEADER => {}
        other => {
            return Err(Error::parse(
                "field header",
                format!("expected `{FIELD_HEADER}`, found {:?}", other.unwrap_or("")),
            ))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(format!("field line {}", k + 2), e.to_string()))
        })
        .collect()
}

pub fn read_field_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_field(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let v = vec![0.0, -1.5, 1.0 / 3.0, 1e-300, f64::MAX, -0.0];
        let back = read_field(&write_field(&v)).unwrap();
        assert_eq!(back.len(), v.len());
        for (a, b) in v.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn malformed_input() {
        assert!(read_field("perfhom-mesh v1\n1\n").is_err());
        assert!(read_field("perfhom-field v1\n1\nabc\n").is_err());
        assert_eq!(read_field("perfhom-field v1\n").unwrap(), Vec::<f64>::new());
    }
}
