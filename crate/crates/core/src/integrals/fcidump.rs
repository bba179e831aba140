use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::IntegralSet;
use crate::{Error, Result};

const DUPLICATE_TOL: f64 = 1e-10;
const WRITE_CUTOFF: f64 = 1e-14;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<IntegralSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    parse_fcidump(&text)
}

#[derive(Clone, Copy, Hash, PartialEq, Eq)]
enum Slot {
    Core,
    One(usize, usize),
    Two(usize, usize, usize, usize),
}

fn canonical_two(i: usize, j: usize, k: usize, l: usize) -> Slot {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    let (k, l) = if k >= l { (k, l) } else { (l, k) };
    if (i, j) >= (k, l) {
        Slot::Two(i, j, k, l)
    } else {
        Slot::Two(k, l, i, j)
    }
}

/// Parses Molpro-style FCIDUMP text.
///
/// The `&FCI ... &END` namelist must declare `NORB`, `NELEC` and `MS2`;
/// `ORBSYM` and `ISYM` are kept when present. Each following record is
/// `value i j k l` with 1-based indices: `(i j k l)` all non-zero is a
/// two-electron integral, `(i j 0 0)` a one-electron integral, `(0 0 0 0)`
/// the core energy. `(i 0 0 0)` orbital-energy records are skipped.
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| l.trim_start().to_ascii_uppercase().starts_with("&FCI"))
        .ok_or_else(|| perr(1, "missing &FCI namelist"))?;

    let mut namelist = String::new();
    let mut body_start = None;
    for (k, line) in lines.iter().enumerate().skip(start) {
        let upper = line.to_ascii_uppercase();
        let mut chunk = upper.as_str();
        if k == start {
            chunk = &chunk[chunk.find("&FCI").unwrap() + 4..];
        }
        let end = chunk.find("&END").map(|p| (p, 4)).or_else(|| {
            let t = chunk.trim_end();
            t.ends_with('/').then(|| (t.len() - 1, 1))
        });
        match end {
            Some((p, _)) => {
                namelist.push_str(&chunk[..p]);
                body_start = Some(k + 1);
                break;
            }
            None => {
                namelist.push_str(chunk);
                namelist.push(' ');
            }
        }
    }
    let body_start = body_start.ok_or_else(|| perr(start + 1, "unterminated &FCI namelist"))?;
    let header = parse_namelist(&namelist, start + 1)?;

    let get = |key: &str| -> Result<i64> {
        let v = header
            .get(key)
            .ok_or_else(|| perr(start + 1, format!("namelist lacks {key}")))?;
        if v.len() != 1 {
            return Err(perr(start + 1, format!("{key} expects one value")));
        }
        Ok(v[0])
    };
    let norb = get("NORB")?;
    let nelec = get("NELEC")?;
    let ms2 = header.get("MS2").map(|v| v.first().copied().unwrap_or(0)).unwrap_or(0);
    if norb <= 0 {
        return Err(perr(start + 1, "NORB must be positive"));
    }
    if nelec < 0 {
        return Err(perr(start + 1, "NELEC must be non-negative"));
    }
    let norb = norb as usize;
    let orbsym = header.get("ORBSYM").map(|v| v.iter().map(|&x| x as i32).collect::<Vec<_>>());
    if let Some(sym) = &orbsym {
        if sym.len() != norb {
            return Err(perr(start + 1, format!("ORBSYM has {} entries, NORB = {norb}", sym.len())));
        }
    }
    let isym = header.get("ISYM").and_then(|v| v.first()).map(|&x| x as i32);

    let mut seen: HashMap<Slot, (f64, usize)> = HashMap::new();
    for (k, raw) in lines.iter().enumerate().skip(body_start) {
        let lineno = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(perr(lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let value: f64 = parse_real(fields[0])
            .ok_or_else(|| perr(lineno, format!("bad value '{}'", fields[0])))?;
        if !value.is_finite() {
            return Err(perr(lineno, "non-finite value"));
        }
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            let i: i64 = f.parse().map_err(|_| perr(lineno, format!("bad index '{f}'")))?;
            if i < 0 || i as usize > norb {
                return Err(perr(lineno, format!("index {i} outside [1, {norb}]")));
            }
            *slot = i as usize;
        }
        let slot = match idx {
            [0, 0, 0, 0] => Slot::Core,
            [i, 0, 0, 0] if i > 0 => continue,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (a, b) = if i >= j { (i - 1, j - 1) } else { (j - 1, i - 1) };
                Slot::One(a, b)
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                canonical_two(i - 1, j - 1, k - 1, l - 1)
            }
            _ => return Err(perr(lineno, format!("invalid index pattern {idx:?}"))),
        };
        if let Some(&(prev, prev_line)) = seen.get(&slot) {
            if (prev - value).abs() > DUPLICATE_TOL {
                return Err(perr(
                    lineno,
                    format!("conflicts with line {prev_line} ({prev} vs {value})"),
                ));
            }
            continue;
        }
        seen.insert(slot, (value, lineno));
    }

    let mut ints = IntegralSet::zeros(norb, nelec as usize, ms2 as i32);
    ints.orbsym = orbsym;
    ints.isym = isym;
    for (slot, (v, _)) in seen {
        match slot {
            Slot::Core => ints.e_core = v,
            Slot::One(i, j) => {
                ints.h[[i, j]] = v;
                ints.h[[j, i]] = v;
            }
            Slot::Two(i, j, k, l) => {
                for w in super::eight_fold(i, j, k, l) {
                    ints.eri[w] = v;
                }
            }
        }
    }
    Ok(ints)
}

// Fortran writers sometimes use D exponents.
fn parse_real(s: &str) -> Option<f64> {
    s.parse().ok().or_else(|| s.replace(['D', 'd'], "e").parse().ok())
}

fn parse_namelist(text: &str, line: usize) -> Result<HashMap<String, Vec<i64>>> {
    let spaced = text.replace('=', " = ");
    let tokens: Vec<&str> = spaced
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    let mut out: HashMap<String, Vec<i64>> = HashMap::new();
    let mut current: Option<String> = None;
    let mut i = 0;
    while i < tokens.len() {
        if tokens.get(i + 1) == Some(&"=") {
            let key = tokens[i].to_string();
            if !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(perr(line, format!("malformed namelist key '{key}'")));
            }
            out.insert(key.clone(), Vec::new());
            current = Some(key);
            i += 2;
            continue;
        }
        let key = current
            .as_ref()
            .ok_or_else(|| perr(line, format!("value '{}' before any key", tokens[i])))?;
        // Non-integer entries (e.g. logical flags) are kept out of the map.
        if let Ok(v) = tokens[i].parse::<i64>() {
            out.get_mut(key).unwrap().push(v);
        } else if !matches!(tokens[i].to_ascii_uppercase().as_str(), ".TRUE." | ".FALSE." | "T" | "F") {
            return Err(perr(line, format!("malformed namelist value '{}'", tokens[i])));
        }
        i += 1;
    }
    Ok(out)
}

fn fmt_value(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Writes symmetry-unique elements (p>=q, r>=s, (pq)>=(rs)) with 17
/// significant digits and 1-based indices; entries below 1e-14 are omitted,
/// the core-energy line is always written.
pub fn write_fcidump(ints: &IntegralSet) -> String {
    let n = ints.norb;
    let mut out = String::new();
    let _ = writeln!(out, "&FCI NORB={},NELEC={},MS2={},", n, ints.nelec, ints.ms2);
    if let Some(sym) = &ints.orbsym {
        let list: Vec<String> = sym.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, " ORBSYM={},", list.join(","));
    }
    let _ = writeln!(out, " ISYM={},", ints.isym.unwrap_or(1));
    out.push_str("&END\n");
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let smax = if r == p { q } else { r };
                for s in 0..=smax {
                    let v = ints.eri[[p, q, r, s]];
                    if v.abs() >= WRITE_CUTOFF {
                        let _ = writeln!(out, "{} {} {} {} {}", fmt_value(v), p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.h[[p, q]];
            if v.abs() >= WRITE_CUTOFF {
                let _ = writeln!(out, "{} {} {} 0 0", fmt_value(v), p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{} 0 0 0 0", fmt_value(ints.e_core));
    out
}
