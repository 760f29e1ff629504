//! Per-iteration run log and its CSV form (`iter,metric,rounds,words,seconds`).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::engine::CommStats;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub iter: usize,
    /// Lasso objective or SVM duality gap.
    pub metric: f64,
    pub rounds: u64,
    pub words: u64,
    pub seconds: f64,
}

impl RunRecord {
    pub fn new(iter: usize, metric: f64, stats: CommStats, seconds: f64) -> Self {
        Self { iter, metric, rounds: stats.rounds, words: stats.words, seconds }
    }
}

pub fn write_records<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let expected = ["iter", "metric", "rounds", "words", "seconds"];
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse { line: 1, message: format!("unexpected CSV header {headers:?}") });
    }
    let mut out = Vec::new();
    for (k, rec) in rd.deserialize().enumerate() {
        let rec: RunRecord = rec.map_err(|e| Error::Parse { line: k + 2, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line: 0, message: format!("{other:?}") },
    }
}
