//! CSV node tables for domains and grid functions.
//!
//! Layout:
//!
//! ```text
//! n,h_grid,t,width,mirror_axis,lower_1,..,lower_n,upper_1,..,upper_n,count_1,..,count_n
//! 2,1.0000000000000000e-1,0.0000000000000000e0,1,-1,...
//! x_1,x_2,class,value
//! <one row per interior or band node>
//! ```
//!
//! Reals use 17 significant digits so that a write/read cycle is bit-exact.
//! Exterior nodes are implied by omission.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use super::domain::{Domain, NodeClass};
use super::function::GridFunction;
use crate::error::{Error, Result};

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_grid<W: Write>(u: &GridFunction, out: &mut W) -> Result<()> {
    write_table(u.domain(), Some(u.values()), u.time(), out)
}

pub fn write_domain<W: Write>(domain: &Domain, out: &mut W) -> Result<()> {
    write_table(domain, None, 0.0, out)
}

fn write_table<W: Write>(d: &Domain, values: Option<&[f64]>, t: f64, out: &mut W) -> Result<()> {
    let n = d.dim();
    let mut head = vec!["n".to_string(), "h_grid".into(), "t".into(), "width".into(), "mirror_axis".into()];
    head.extend((1..=n).map(|k| format!("lower_{k}")));
    head.extend((1..=n).map(|k| format!("upper_{k}")));
    head.extend((1..=n).map(|k| format!("count_{k}")));
    writeln!(out, "{}", head.join(","))?;
    let mut row = vec![
        n.to_string(),
        fmt_real(d.spacing()),
        fmt_real(t),
        d.width().to_string(),
        d.mirror_axis().map(|a| a as i64).unwrap_or(-1).to_string(),
    ];
    row.extend(d.box_lower().iter().map(|v| fmt_real(*v)));
    row.extend(d.box_upper().iter().map(|v| fmt_real(*v)));
    row.extend(d.counts().iter().map(|c| c.to_string()));
    writeln!(out, "{}", row.join(","))?;

    let mut cols: Vec<String> = (1..=n).map(|k| format!("x_{k}")).collect();
    cols.push("class".into());
    cols.push("value".into());
    writeln!(out, "{}", cols.join(","))?;
    let mut x = vec![0.0; n];
    for i in 0..d.len() {
        let class = d.class(i);
        if class == NodeClass::Exterior {
            continue;
        }
        d.coords_into(i, &mut x);
        let mut line = String::with_capacity(32 * (n + 2));
        for v in &x {
            line.push_str(&fmt_real(*v));
            line.push(',');
        }
        line.push_str(class.as_str());
        line.push(',');
        if let Some(vals) = values {
            line.push_str(&fmt_real(vals[i]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse_real(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse { line, message: format!("{s:?}: {e}") })
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|e| Error::Parse { line, message: format!("{s:?}: {e}") })
}

/// Reads a node table; returns the domain, the values (NaN where absent) and `t`.
pub fn read_table<R: BufRead>(input: R) -> Result<(Domain, Vec<f64>, f64)> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((k, l)) => Ok((k + 1, l?)),
            None => Err(Error::Parse { line: 0, message: format!("missing {what}") }),
        }
    };
    let (_, _keys) = next("header keys")?;
    let (ln, meta) = next("header values")?;
    let f: Vec<&str> = meta.split(',').collect();
    let n = parse_usize(f.first().copied().unwrap_or(""), ln)?;
    if f.len() != 5 + 3 * n {
        return Err(Error::Parse { line: ln, message: format!("expected {} header fields", 5 + 3 * n) });
    }
    let spacing = parse_real(f[1], ln)?;
    let t = parse_real(f[2], ln)?;
    let width = parse_usize(f[3], ln)?;
    let mirror: i64 = f[4].trim().parse().map_err(|e| Error::Parse { line: ln, message: format!("{e}") })?;
    let lower: Vec<f64> = f[5..5 + n].iter().map(|s| parse_real(s, ln)).collect::<Result<_>>()?;
    let upper: Vec<f64> = f[5 + n..5 + 2 * n].iter().map(|s| parse_real(s, ln)).collect::<Result<_>>()?;
    let counts: Vec<usize> = f[5 + 2 * n..].iter().map(|s| parse_usize(s, ln)).collect::<Result<_>>()?;
    let total: usize = counts.iter().product();
    let (_, _cols) = next("column header")?;

    let mut classes = vec![NodeClass::Exterior; total];
    let mut values = vec![f64::NAN; total];
    for (k, l) in lines {
        let ln = k + 1;
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != n + 2 {
            return Err(Error::Parse { line: ln, message: format!("expected {} fields", n + 2) });
        }
        let mut mi = Vec::with_capacity(n);
        for a in 0..n {
            let x = parse_real(f[a], ln)?;
            let idx = ((x - lower[a]) / spacing).round() + width as f64;
            if idx < 0.0 || idx >= counts[a] as f64 {
                return Err(Error::Parse { line: ln, message: format!("coordinate {x} off lattice") });
            }
            mi.push(idx as usize);
        }
        let flat: usize = {
            let mut s = 1;
            let mut acc = 0;
            for a in 0..n {
                acc += mi[a] * s;
                s *= counts[a];
            }
            acc
        };
        classes[flat] = NodeClass::parse(f[n].trim())
            .ok_or_else(|| Error::Parse { line: ln, message: format!("unknown class {:?}", f[n]) })?;
        if !f[n + 1].trim().is_empty() {
            values[flat] = parse_real(f[n + 1], ln)?;
        }
    }
    let mirror_axis = (mirror >= 0).then_some(mirror as usize);
    let domain = Domain::from_classes(n, spacing, width, lower, upper, counts, classes, mirror_axis)?;
    Ok((domain, values, t))
}

pub fn read_grid<R: BufRead>(input: R) -> Result<GridFunction> {
    let (domain, values, t) = read_table(input)?;
    GridFunction::from_values(Arc::new(domain), values, t)
}

pub fn save_grid(u: &GridFunction, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_grid(u, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<GridFunction> {
    read_grid(BufReader::new(File::open(path)?))
}
