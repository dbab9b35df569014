//! Text persistence for a model and its count table.
//!
//! ```text
//! STATES            one "id ordinal" per line
//! TRANS             "from to probability"
//! EMIT              "state symbol probability"   (&lambda; is the null symbol)
//! COUNTS            "state count" | "from to count" | "from to symbol count"
//! ```
//!
//! Reals are written with 17 significant digits so a save/load round trip
//! is bit-exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::hmm::{Hmm, StateId};
use crate::symbol::Emission;

const HEADER: &str = "# script-hmm model v1";

pub(crate) fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_text(hmm: &Hmm, counts: &CountTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "STATES");
    for (i, q) in hmm.states().iter().enumerate() {
        let _ = writeln!(out, "{q} {i}");
    }
    let _ = writeln!(out, "TRANS");
    for q in hmm.states() {
        for (s, p) in hmm.successors(*q) {
            let _ = writeln!(out, "{q} {s} {}", real(p));
        }
    }
    let _ = writeln!(out, "EMIT");
    for q in hmm.states() {
        for (o, p) in hmm.emissions(*q) {
            let _ = writeln!(out, "{q} {o} {}", real(p));
        }
    }
    let _ = writeln!(out, "COUNTS");
    for q in hmm.states() {
        let c = counts.visits(*q);
        if c != 0.0 {
            let _ = writeln!(out, "{q} {}", real(c));
        }
    }
    for (a, b, c) in counts.transitions() {
        let _ = writeln!(out, "{a} {b} {}", real(c));
    }
    for (a, b, o, c) in counts.emissions() {
        let _ = writeln!(out, "{a} {b} {o} {}", real(c));
    }
    out
}

pub fn save(hmm: &Hmm, counts: &CountTable, path: &Path) -> Result<()> {
    hmm.validate()?;
    std::fs::write(path, to_text(hmm, counts)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(Hmm, CountTable)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text).map_err(|e| e.with_path(path))
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    States,
    Trans,
    Emit,
    Counts,
}

pub fn parse(text: &str) -> Result<(Hmm, CountTable)> {
    let mut section = Section::None;
    let mut ordinals: Vec<(usize, StateId)> = Vec::new();
    let mut known: BTreeSet<StateId> = BTreeSet::new();
    let mut trans: BTreeMap<StateId, BTreeMap<StateId, f64>> = BTreeMap::new();
    let mut emit: BTreeMap<StateId, BTreeMap<Emission, f64>> = BTreeMap::new();
    let mut counts = CountTable::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let next = match line {
            "STATES" => Some(Section::States),
            "TRANS" => Some(Section::Trans),
            "EMIT" => Some(Section::Emit),
            "COUNTS" => Some(Section::Counts),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let state = |field: &str, name: &str| -> Result<StateId> {
            let id = field.parse::<u32>().map_err(|_| {
                Error::parse(
                    line_no,
                    format!("{name}: expected a state id, found {field:?}"),
                )
            })?;
            let id = StateId(id);
            if !known.contains(&id) {
                return Err(Error::parse(line_no, format!("{name}: unknown state {id}")));
            }
            Ok(id)
        };
        let real = |field: &str, name: &str, is_prob: bool| -> Result<f64> {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(
                    line_no,
                    format!("{name}: expected a number, found {field:?}"),
                )
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::parse(
                    line_no,
                    format!("{name}: negative or non-finite value {field}"),
                ));
            }
            if is_prob && v > 1.0 {
                return Err(Error::parse(
                    line_no,
                    format!("{name}: probability {field} exceeds 1"),
                ));
            }
            Ok(v)
        };
        let arity = |k: usize| -> Result<()> {
            if f.len() == k {
                Ok(())
            } else {
                Err(Error::parse(
                    line_no,
                    format!("expected {k} fields, found {}", f.len()),
                ))
            }
        };
        match section {
            Section::None => return Err(Error::parse(line_no, "data before any section header")),
            Section::States => {
                arity(2)?;
                let id = StateId(f[0].parse().map_err(|_| {
                    Error::parse(
                        line_no,
                        format!("id: expected a state id, found {:?}", f[0]),
                    )
                })?);
                let ord: usize = f[1].parse().map_err(|_| {
                    Error::parse(
                        line_no,
                        format!("ordinal: expected an integer, found {:?}", f[1]),
                    )
                })?;
                if !known.insert(id) {
                    return Err(Error::parse(
                        line_no,
                        format!("id: state {id} declared twice"),
                    ));
                }
                ordinals.push((ord, id));
            }
            Section::Trans => {
                arity(3)?;
                let a = state(f[0], "from")?;
                let b = state(f[1], "to")?;
                let p = real(f[2], "probability", true)?;
                if trans.entry(a).or_default().insert(b, p).is_some() {
                    return Err(Error::parse(
                        line_no,
                        format!("transition {a}->{b} listed twice"),
                    ));
                }
            }
            Section::Emit => {
                arity(3)?;
                let q = state(f[0], "state")?;
                let o = Emission::parse(f[1])
                    .map_err(|e| Error::parse(line_no, format!("symbol: {e}")))?;
                let p = real(f[2], "probability", true)?;
                if emit.entry(q).or_default().insert(o, p).is_some() {
                    return Err(Error::parse(
                        line_no,
                        format!("emission {} at {q} listed twice", f[1]),
                    ));
                }
            }
            Section::Counts => match f.len() {
                2 => {
                    let q = state(f[0], "state")?;
                    counts.add_visits(q, real(f[1], "count", false)?);
                }
                3 => {
                    let a = state(f[0], "from")?;
                    let b = state(f[1], "to")?;
                    counts.add_transition(a, b, real(f[2], "count", false)?);
                }
                4 => {
                    let a = state(f[0], "from")?;
                    let b = state(f[1], "to")?;
                    let o = Emission::parse(f[2])
                        .map_err(|e| Error::parse(line_no, format!("symbol: {e}")))?;
                    counts.add_emission(a, b, o, real(f[3], "count", false)?);
                }
                k => {
                    return Err(Error::parse(
                        line_no,
                        format!("expected 2 to 4 fields, found {k}"),
                    ))
                }
            },
        }
    }

    ordinals.sort();
    for (i, (ord, id)) in ordinals.iter().enumerate() {
        if *ord != i {
            return Err(Error::parse(
                0,
                format!("ordinals must be 0..n; state {id} has {ord}"),
            ));
        }
    }
    let order: Vec<StateId> = ordinals.into_iter().map(|(_, id)| id).collect();
    let hmm = Hmm::from_parts(order, trans, emit);
    hmm.validate()?;
    Ok((hmm, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::fixtures::m0;
    use crate::pta::build_pta;
    use crate::symbol::seq;

    #[test]
    fn m0_round_trips() {
        let h = m0();
        let mut c = CountTable::new();
        c.add_visits(StateId(2), 0.1 + 0.2);
        let (h2, c2) = parse(&to_text(&h, &c)).unwrap();
        assert_eq!(h, h2);
        assert_eq!(c, c2);
    }

    #[test]
    fn pta_round_trips_through_disk() {
        let (h, c) = build_pta(&[seq(&["a", "b"]), seq(&["a", "c"]), seq(&[])]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.hmm");
        save(&h, &c, &path).unwrap();
        let (h2, c2) = load(&path).unwrap();
        assert_eq!(h, h2);
        assert_eq!(c, c2);
    }

    #[test]
    fn negative_probability_names_the_field() {
        let text =
            to_text(&m0(), &CountTable::new()).replace("2 1 1.0000000000000000e0", "2 1 -1.0");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("probability"), "{err}");
        assert!(err.contains("negative"), "{err}");
    }

    #[test]
    fn unknown_state_in_transition_row() {
        let text = to_text(&m0(), &CountTable::new()).replace("TRANS\n", "TRANS\n9 1 0.5\n");
        let err = parse(&text).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 7);
                assert!(message.contains("unknown state 9"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rows_not_summing_to_one_are_rejected() {
        let text =
            to_text(&m0(), &CountTable::new()).replace("2 a 6.9999999999999996e-1", "2 a 0.5");
        assert!(matches!(parse(&text), Err(Error::InvalidModel(_))));
    }
}
