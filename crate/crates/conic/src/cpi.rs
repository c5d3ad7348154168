//! The `.cpi` interchange format. See `docs/cpi-format.md` for the grammar.

use crate::cone::ConeSpec;
use crate::error::{ConicError, Result};
use crate::problem::{ConicProblem, VarBlock, VarShape};
use crate::sparse::SparseMatrix;
use std::fmt::Write as _;

pub fn export_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "cpi 1");
    let _ = writeln!(w, "vars {}", p.num_vars());
    let _ = writeln!(w, "rows {}", p.num_rows());
    let _ = writeln!(w, "nnz {}", p.a.nnz());
    let _ = writeln!(w, "offset {}", p.objective_offset);
    let _ = writeln!(w, "A");
    for (r, c, v) in p.a.triplets() {
        let _ = writeln!(w, "{r} {c} {v}");
    }
    let _ = writeln!(w, "b");
    for v in &p.b {
        let _ = writeln!(w, "{v}");
    }
    let _ = writeln!(w, "c");
    for v in &p.c {
        let _ = writeln!(w, "{v}");
    }
    let _ = writeln!(w, "cones");
    let _ = writeln!(w, "zero {}", p.cones.zero);
    let _ = writeln!(w, "nonneg {}", p.cones.nonneg);
    for d in &p.cones.psd {
        let _ = writeln!(w, "psd {d}");
    }
    if !p.vars.is_empty() {
        let _ = writeln!(w, "vars-meta {}", p.vars.len());
        for v in &p.vars {
            let shape = match v.shape {
                VarShape::Scalar => "scalar".to_string(),
                VarShape::Vector(k) => format!("vector {k}"),
                VarShape::Sym(d) => format!("sym {d}"),
            };
            let _ = writeln!(w, "{} {} {}", v.name, v.offset, shape);
        }
    }
    let _ = writeln!(w, "end");
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    /// Byte offset of the start of each line.
    starts: Vec<usize>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut starts = vec![0];
        for (i, ch) in text.char_indices() {
            if ch == '\n' {
                starts.push(i + 1);
            }
        }
        Self {
            inner: text.lines().enumerate().peekable(),
            starts,
            last_line: 0,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> ConicError {
        ConicError::Parse {
            line,
            offset: self.starts.get(line.saturating_sub(1)).copied().unwrap_or(0),
            message: message.into(),
        }
    }

    /// Next non-blank, non-comment line as (1-based line number, trimmed text).
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last_line = i + 1;
            return Ok((i + 1, t));
        }
        Err(self.err(self.last_line + 1, "unexpected end of file"))
    }

    fn keyword(&mut self, kw: &str) -> Result<(usize, Vec<&'a str>)> {
        let (ln, t) = self.next()?;
        let mut parts: Vec<&str> = t.split_whitespace().collect();
        if parts.first() != Some(&kw) {
            return Err(self.err(ln, format!("expected '{kw}', found '{t}'")));
        }
        parts.remove(0);
        Ok((ln, parts))
    }

    fn count(&mut self, kw: &str) -> Result<usize> {
        let (ln, parts) = self.keyword(kw)?;
        match parts.as_slice() {
            [v] => v
                .parse()
                .map_err(|_| self.err(ln, format!("'{kw}' needs a nonnegative integer, found '{v}'"))),
            _ => Err(self.err(ln, format!("'{kw}' takes exactly one value"))),
        }
    }
}

fn parse_f64(lines: &Lines, ln: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| lines.err(ln, format!("invalid number '{s}'")))
}

fn parse_usize(lines: &Lines, ln: usize, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| lines.err(ln, format!("invalid index '{s}'")))
}

pub fn import_problem(text: &str) -> Result<ConicProblem> {
    let mut lines = Lines::new(text);
    let (ln, version) = lines.keyword("cpi")?;
    if version != ["1"] {
        return Err(lines.err(ln, "unsupported version; expected 'cpi 1'"));
    }
    let n = lines.count("vars")?;
    let m = lines.count("rows")?;
    let nnz = lines.count("nnz")?;
    let (ln, off) = lines.keyword("offset")?;
    let offset = match off.as_slice() {
        [v] => parse_f64(&lines, ln, v)?,
        _ => return Err(lines.err(ln, "'offset' takes exactly one value")),
    };

    lines.keyword("A")?;
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, t) = lines.next()?;
        let parts: Vec<&str> = t.split_whitespace().collect();
        let [r, c, v] = parts.as_slice() else {
            return Err(lines.err(ln, format!("expected 'row col value', found '{t}'")));
        };
        let (r, c, v) = (
            parse_usize(&lines, ln, r)?,
            parse_usize(&lines, ln, c)?,
            parse_f64(&lines, ln, v)?,
        );
        if r >= m || c >= n {
            return Err(lines.err(ln, format!("entry ({r}, {c}) outside {m}x{n}")));
        }
        trip.push((r, c, v));
    }

    let dense = |lines: &mut Lines, kw: &str, len: usize| -> Result<Vec<f64>> {
        lines.keyword(kw)?;
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            let (ln, t) = lines.next()?;
            v.push(parse_f64(lines, ln, t)?);
        }
        Ok(v)
    };
    let b = dense(&mut lines, "b", m)?;
    let c = dense(&mut lines, "c", n)?;

    lines.keyword("cones")?;
    let zero = lines.count("zero")?;
    let nonneg = lines.count("nonneg")?;
    let mut psd = Vec::new();
    let mut covered = zero + nonneg;
    if covered > m {
        return Err(lines.err(lines.last_line, format!("zero and nonneg blocks cover {covered} rows but the problem has {m}")));
    }
    let mut vars = Vec::new();
    loop {
        let (ln, t) = lines.next()?;
        let parts: Vec<&str> = t.split_whitespace().collect();
        match parts.as_slice() {
            ["psd", d] => {
                let d = parse_usize(&lines, ln, d)?;
                if d == 0 {
                    return Err(lines.err(ln, format!("psd block {} has side 0", psd.len())));
                }
                covered += d * (d + 1) / 2;
                if covered > m {
                    return Err(lines.err(
                        ln,
                        format!("psd block {} (side {d}) overruns the {m} constraint rows", psd.len()),
                    ));
                }
                psd.push(d);
            }
            ["vars-meta", k] => {
                let k = parse_usize(&lines, ln, k)?;
                for _ in 0..k {
                    let (ln, t) = lines.next()?;
                    let parts: Vec<&str> = t.split_whitespace().collect();
                    let (name, offset, shape) = match parts.as_slice() {
                        [name, off, "scalar"] => (name, off, VarShape::Scalar),
                        [name, off, "vector", k] => (name, off, VarShape::Vector(parse_usize(&lines, ln, k)?)),
                        [name, off, "sym", d] => (name, off, VarShape::Sym(parse_usize(&lines, ln, d)?)),
                        _ => return Err(lines.err(ln, format!("malformed variable block '{t}'"))),
                    };
                    vars.push(VarBlock {
                        name: name.to_string(),
                        offset: parse_usize(&lines, ln, offset)?,
                        shape,
                    });
                }
            }
            ["end"] => {
                if covered != m {
                    return Err(lines.err(
                        ln,
                        format!("cone blocks cover {covered} rows but the problem has {m}"),
                    ));
                }
                break;
            }
            _ => return Err(lines.err(ln, format!("unexpected line '{t}' in cone section"))),
        }
    }

    let p = ConicProblem {
        c,
        a: SparseMatrix::from_triplets(m, n, &trip),
        b,
        cones: ConeSpec { zero, nonneg, psd },
        objective_offset: offset,
        vars,
    };
    p.validate().map_err(|e| lines.err(lines.last_line, e.to_string()))?;
    Ok(p)
}
