//! CSV formatting shared by the report writers.
//!
//! Floats use the shortest representation that parses back to the same bits,
//! so identical inputs give byte-identical files.

use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip form of `x`.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

/// One-line `#` header naming the command, version and tolerances.
pub fn header(command: &str, settings: &[(&str, String)]) -> String {
    let mut line = format!("# signgraph {VERSION} command={command}");
    for (k, v) in settings {
        let _ = write!(line, " {k}={v}");
    }
    line.push('\n');
    line
}

/// Join already formatted fields into one CSV line with a trailing newline.
pub fn row<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(f.as_ref());
    }
    out.push('\n');
    out
}
