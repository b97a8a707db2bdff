//! Artifact assembly. Tables are built fully in memory so a run either
//! produces the whole file or nothing, and so identical configurations
//! produce byte-identical output regardless of worker count.

use crate::error::CliResult;
use std::path::Path;

/// 17 significant digits: round-trips through parse exactly.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// RFC-4180 quoting for the rare non-numeric field.
pub fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub struct Table {
    lines: Vec<String>,
}

impl Table {
    /// Starts with the tool version and the fully resolved configuration.
    pub fn new(config: &str) -> Self {
        Table {
            lines: vec![
                format!("# gradstorm {}", env!("CARGO_PKG_VERSION")),
                format!("# config: {config}"),
            ],
        }
    }

    pub fn comment(&mut self, note: &str) {
        self.lines.push(format!("# {note}"));
    }

    pub fn header(&mut self, columns: &[&str]) {
        self.lines.push(columns.join(","));
    }

    pub fn row(&mut self, cells: &[String]) {
        let escaped: Vec<String> = cells.iter().map(|c| escape(c)).collect();
        self.lines.push(escaped.join(","));
    }

    pub fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Write to the path when given, stdout otherwise.
pub fn emit(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [
            -2.0,
            0.1,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            -1.7976931348623157e308,
        ] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(escape("plain"), "plain");
        assert_eq!(escape("a,b"), "\"a,b\"");
        assert_eq!(escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn tables_carry_version_and_config() {
        let mut t = Table::new("t=0.5 x=1");
        t.header(&["a", "b"]);
        t.row(&["1".into(), "2".into()]);
        let s = t.finish();
        let mut lines = s.lines();
        assert!(lines.next().unwrap().starts_with("# gradstorm "));
        assert_eq!(lines.next().unwrap(), "# config: t=0.5 x=1");
        assert_eq!(lines.next().unwrap(), "a,b");
        assert_eq!(lines.next().unwrap(), "1,2");
    }
}
