use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::model::{Flavour, HiddenVariable, PairEvent};
use crate::montecarlo::{params_fingerprint, EventBatch, SimConfig};
use crate::{Error, Result};

pub const EVENT_COLUMNS: &str = "index,lambda,t1,flavour1,t2,flavour2,swapped";

/// Parsed event file: header key/value pairs and the events in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EventFile {
    pub header: BTreeMap<String, String>,
    pub first_index: Option<u64>,
    pub events: Vec<PairEvent>,
}

impl EventFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.get(key).map(String::as_str)
    }
}

/// Writes `batch` as delimited text. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_events<W: Write>(w: &mut W, batch: &EventBatch, config: &SimConfig) -> Result<()> {
    super::write_header(w, "events", &batch.config_fingerprint)?;
    let stats = batch.rng_stats();
    writeln!(w, "# params_fingerprint={}", params_fingerprint(&config.params))?;
    writeln!(w, "# tau={}", config.params.tau())?;
    writeln!(w, "# delta_m={}", config.params.delta_m())?;
    writeln!(w, "# n_events={}", config.n_events)?;
    writeln!(w, "# seed={}", config.seed)?;
    writeln!(w, "# symmetrized={}", config.symmetrized)?;
    writeln!(w, "# max_rejection_iters={}", config.max_rejection_iters)?;
    writeln!(w, "# lambda_acceptance={}", stats.lambda_acceptance_rate)?;
    writeln!(w, "# t2_acceptance={}", stats.t2_acceptance_rate)?;
    writeln!(w, "# columns={EVENT_COLUMNS}")?;
    for (i, ev) in batch.events.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            batch.first_index + i as u64,
            ev.lambda.value(),
            ev.t1,
            ev.flavour1,
            ev.t2,
            ev.flavour2,
            u8::from(ev.swapped)
        )?;
    }
    Ok(())
}

fn field<'a>(it: &mut impl Iterator<Item = &'a str>, name: &str, line: usize) -> Result<&'a str> {
    it.next().ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing column `{name}`"),
    })
}

fn num<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value `{s}` for `{name}`"),
    })
}

/// Reads an event file written by [`write_events`].
pub fn read_events<R: BufRead>(r: R) -> Result<EventFile> {
    let mut header = BTreeMap::new();
    let mut events = Vec::new();
    let mut first_index = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((k, v)) = rest.split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            } else if let Some((k, v)) = rest.split_once(':') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let mut it = trimmed.split(',');
        let index: u64 = num(field(&mut it, "index", lineno)?, "index", lineno)?;
        let lambda: f64 = num(field(&mut it, "lambda", lineno)?, "lambda", lineno)?;
        let t1: f64 = num(field(&mut it, "t1", lineno)?, "t1", lineno)?;
        let flavour1: Flavour = field(&mut it, "flavour1", lineno)?
            .trim()
            .parse()
            .map_err(|msg| Error::Parse { line: lineno, msg })?;
        let t2: f64 = num(field(&mut it, "t2", lineno)?, "t2", lineno)?;
        let flavour2: Flavour = field(&mut it, "flavour2", lineno)?
            .trim()
            .parse()
            .map_err(|msg| Error::Parse { line: lineno, msg })?;
        let swapped = match field(&mut it, "swapped", lineno)?.trim() {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("bad value `{other}` for `swapped`"),
                })
            }
        };
        if it.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                msg: "too many columns".into(),
            });
        }
        if !(t1 >= 0.0 && t2 >= 0.0 && t1.is_finite() && t2.is_finite()) {
            return Err(Error::Parse {
                line: lineno,
                msg: "decay times must be finite and >= 0".into(),
            });
        }
        first_index.get_or_insert(index);
        events.push(PairEvent {
            lambda: HiddenVariable::new(lambda),
            t1,
            t2,
            flavour1,
            flavour2,
            swapped,
        });
    }
    Ok(EventFile {
        header,
        first_index,
        events,
    })
}
