//! Plain-text problem files.
//!
//! ```text
//! conic 1
//! n <vars> m <rows>
//! cones <count>
//! zero <dim> | nonneg <dim> | psd <side> | exp <triples>
//! names <0 or n>
//! <one name per line>
//! a <nnz>
//! <row> <col> <value>
//! b
//! <m values, one per line>
//! c
//! <n values, one per line>
//! ```
//!
//! Lines starting with `#` are ignored. Floats are written in shortest
//! round-trip form so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use super::{Cone, ConicProgram};
use crate::error::{Error, Result};

pub fn to_text(p: &ConicProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conic 1");
    let _ = writeln!(out, "n {} m {}", p.n, p.m());
    let _ = writeln!(out, "cones {}", p.cones.len());
    for cone in &p.cones {
        let _ = match *cone {
            Cone::Zero(d) => writeln!(out, "zero {d}"),
            Cone::NonNeg(d) => writeln!(out, "nonneg {d}"),
            Cone::Psd(s) => writeln!(out, "psd {s}"),
            Cone::Exp(c) => writeln!(out, "exp {c}"),
        };
    }
    let _ = writeln!(out, "names {}", p.var_names.len());
    for name in &p.var_names {
        let _ = writeln!(out, "{name}");
    }
    let _ = writeln!(out, "a {}", p.a.len());
    for &(r, c, v) in &p.a {
        let _ = writeln!(out, "{r} {c} {v:?}");
    }
    let _ = writeln!(out, "b");
    for v in &p.b {
        let _ = writeln!(out, "{v:?}");
    }
    let _ = writeln!(out, "c");
    for v in &p.c {
        let _ = writeln!(out, "{v:?}");
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    let t = l.trim();
                    if t.is_empty() || t.starts_with('#') {
                        continue;
                    }
                    return Ok((i + 1, t));
                }
                None => return Err(Error::Parse("unexpected end of file".into())),
            }
        }
    }

    fn next_raw(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((_, l)) => Ok(l.trim_end_matches('\r')),
            None => Err(Error::Parse("unexpected end of file".into())),
        }
    }
}

fn bad(line: usize, what: &str) -> Error {
    Error::Parse(format!("line {line}: {what}"))
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| bad(line, "expected a number"))
}

fn keyword<'a>(line: usize, text: &'a str, key: &str) -> Result<std::str::SplitWhitespace<'a>> {
    let mut it = text.split_whitespace();
    if it.next() != Some(key) {
        return Err(bad(line, &format!("expected `{key}`")));
    }
    Ok(it)
}

pub fn from_text(text: &str) -> Result<ConicProgram> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable() };
    let (l, t) = lines.next()?;
    if num::<u32>(l, keyword(l, t, "conic")?.next())? != 1 {
        return Err(bad(l, "unsupported format version"));
    }
    let (l, t) = lines.next()?;
    let mut it = keyword(l, t, "n")?;
    let n: usize = num(l, it.next())?;
    if it.next() != Some("m") {
        return Err(bad(l, "expected `m`"));
    }
    let m: usize = num(l, it.next())?;
    let (l, t) = lines.next()?;
    let count: usize = num(l, keyword(l, t, "cones")?.next())?;
    let mut cones = Vec::with_capacity(count);
    for _ in 0..count {
        let (l, t) = lines.next()?;
        let mut it = t.split_whitespace();
        let kind = it.next().unwrap_or("");
        let d: usize = num(l, it.next())?;
        cones.push(match kind {
            "zero" => Cone::Zero(d),
            "nonneg" => Cone::NonNeg(d),
            "psd" => Cone::Psd(d),
            "exp" => Cone::Exp(d),
            _ => return Err(bad(l, "unknown cone kind")),
        });
    }
    let (l, t) = lines.next()?;
    let names: usize = num(l, keyword(l, t, "names")?.next())?;
    let mut var_names = Vec::with_capacity(names);
    for _ in 0..names {
        var_names.push(lines.next_raw()?.to_string());
    }
    let (l, t) = lines.next()?;
    let nnz: usize = num(l, keyword(l, t, "a")?.next())?;
    let mut a = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (l, t) = lines.next()?;
        let mut it = t.split_whitespace();
        a.push((num(l, it.next())?, num(l, it.next())?, num(l, it.next())?));
    }
    let (l, t) = lines.next()?;
    keyword(l, t, "b")?;
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        let (l, t) = lines.next()?;
        b.push(num(l, Some(t))?);
    }
    let (l, t) = lines.next()?;
    keyword(l, t, "c")?;
    let mut c = Vec::with_capacity(n);
    for _ in 0..n {
        let (l, t) = lines.next()?;
        c.push(num(l, Some(t))?);
    }
    let prog = ConicProgram { n, a, b, c, cones, var_names };
    prog.validate()?;
    Ok(prog)
}

pub fn write_file(p: &ConicProgram, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(p))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<ConicProgram> {
    from_text(&std::fs::read_to_string(path)?)
}
