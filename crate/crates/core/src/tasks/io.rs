//! Flat CSV forms for cached transitions and reference values.
//!
//! Transitions: `x,v,a,r,x_next,v_next,terminal` (terminal as 0/1).
//! Reference values: `x,v,value`. Floats use Rust's shortest round-trip
//! formatting, so a write/read cycle is lossless.

use std::io::{BufRead, Write};
use std::path::Path;

use super::mountain_car::{State, Transition};
use crate::error::{Error, Result};

pub const TRANSITION_HEADER: &str = "x,v,a,r,x_next,v_next,terminal";
pub const REFERENCE_HEADER: &str = "x,v,value";

pub fn write_transitions<W: Write>(mut w: W, transitions: &[Transition]) -> Result<()> {
    writeln!(w, "{TRANSITION_HEADER}")?;
    for t in transitions {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            t.s[0],
            t.s[1],
            t.a,
            t.r,
            t.s_next[0],
            t.s_next[1],
            u8::from(t.terminal)
        )?;
    }
    Ok(())
}

pub fn write_reference<W: Write>(mut w: W, states: &[State], values: &[f64]) -> Result<()> {
    if states.len() != values.len() {
        return Err(Error::contract(
            "reference states and values differ in length",
        ));
    }
    writeln!(w, "{REFERENCE_HEADER}")?;
    for (s, v) in states.iter().zip(values) {
        writeln!(w, "{},{},{}", s[0], s[1], v)?;
    }
    Ok(())
}

fn rows<R: BufRead>(
    r: R,
    path: &Path,
    header: &str,
    width: usize,
) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        if i == 0 {
            if line.trim() != header {
                return Err(err(format!("expected header '{header}'")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != width {
            return Err(err(format!(
                "expected {width} fields, found {}",
                fields.len()
            )));
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("cannot parse '{field}'"),
    })
}

pub fn read_transitions<R: BufRead>(r: R, path: &Path) -> Result<Vec<Transition>> {
    rows(r, path, TRANSITION_HEADER, 7)?
        .into_iter()
        .map(|(line, f)| {
            let terminal: u8 = num(path, line, &f[6])?;
            Ok(Transition {
                s: [num(path, line, &f[0])?, num(path, line, &f[1])?],
                a: num(path, line, &f[2])?,
                r: num(path, line, &f[3])?,
                s_next: [num(path, line, &f[4])?, num(path, line, &f[5])?],
                terminal: terminal != 0,
            })
        })
        .collect()
}

pub fn read_reference<R: BufRead>(r: R, path: &Path) -> Result<(Vec<State>, Vec<f64>)> {
    let mut states = Vec::new();
    let mut values = Vec::new();
    for (line, f) in rows(r, path, REFERENCE_HEADER, 3)? {
        states.push([num(path, line, &f[0])?, num(path, line, &f[1])?]);
        values.push(num(path, line, &f[2])?);
    }
    Ok((states, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::mountain_car::{collect_transitions, EnergyPolicy};
    use proptest::prelude::*;

    #[test]
    fn transitions_round_trip() {
        let ts = collect_transitions(&EnergyPolicy, 3, 4);
        let mut buf = Vec::new();
        write_transitions(&mut buf, &ts).unwrap();
        let back = read_transitions(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn bad_header_is_reported() {
        let err = read_reference(&b"a,b,c\n1,2,3\n"[..], Path::new("ref.csv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn reference_round_trips(rows in prop::collection::vec((-1.2f64..0.6, -0.07f64..0.07, -100.0f64..0.0), 0..20)) {
            let states: Vec<State> = rows.iter().map(|r| [r.0, r.1]).collect();
            let values: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let mut buf = Vec::new();
            write_reference(&mut buf, &states, &values).unwrap();
            let (s2, v2) = read_reference(&buf[..], Path::new("mem")).unwrap();
            prop_assert_eq!(s2, states);
            prop_assert_eq!(v2, values);
        }
    }
}
