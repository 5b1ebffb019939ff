use std::io::{ErrorKind, IsTerminal, Write};

use anyhow::Result;
use serde_json::Value;

/// JSON when requested or when stdout is not a terminal; text otherwise.
#[derive(Debug, Clone, Copy)]
pub struct Output {
    pub json: bool,
}

impl Output {
    pub fn new(force_json: bool) -> Self {
        Output {
            json: force_json || !std::io::stdout().is_terminal(),
        }
    }

    /// A reader that closes the pipe early is not an error.
    pub fn emit(&self, value: &Value, text: impl FnOnce() -> String) -> Result<()> {
        let body = if self.json {
            serde_json::to_string_pretty(value)? + "\n"
        } else {
            text()
        };
        let mut out = std::io::stdout().lock();
        match out.write_all(body.as_bytes()).and_then(|()| out.flush()) {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        }
    }
}

/// Right-aligned columns under a header row.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain(std::iter::once(header[c].len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut s = line(header.to_vec());
    s.push('\n');
    for r in rows {
        s.push_str(&line(r.iter().map(String::as_str).collect()));
        s.push('\n');
    }
    s
}

pub fn fixed(x: f64) -> String {
    format!("{x:.4}")
}
