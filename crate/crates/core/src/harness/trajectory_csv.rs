//! Trajectory CSV: `k,khat`, then `hat_a_j,a_j,r_j` per node (1-based), then
//! `lambda`. Floats use the shortest representation that round-trips.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::seeker::{Record, Trajectory};

pub fn header(nodes: usize) -> Vec<String> {
    let mut h = vec!["k".to_string(), "khat".to_string()];
    for j in 1..=nodes {
        h.push(format!("hat_a_{j}"));
        h.push(format!("a_{j}"));
        h.push(format!("r_{j}"));
    }
    h.push("lambda".to_string());
    h
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let n = traj.node_count();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n))?;
    let mut row = Vec::with_capacity(3 + 3 * n);
    for r in &traj.records {
        row.clear();
        row.push(r.k.to_string());
        row.push(r.khat.to_string());
        for j in 0..n {
            row.push(r.hat_a[j].to_string());
            row.push(r.a[j].to_string());
            row.push(r.payoff[j].to_string());
        }
        row.push(r.lambda.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(s: &str, line: u64, column: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Malformed(format!("line {line}: bad value {s:?} in column {column}")))
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Trajectory> {
    let mut rdr = csv::Reader::from_reader(input);
    let head: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if head.len() < 6 || !(head.len() - 3).is_multiple_of(3) {
        return Err(Error::Malformed(format!(
            "unexpected header with {} columns",
            head.len()
        )));
    }
    let n = (head.len() - 3) / 3;
    if head != header(n) {
        return Err(Error::Malformed(format!(
            "header mismatch: {}",
            head.join(",")
        )));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let col = |i: usize| &head[i];
        let mut hat_a = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n);
        let mut payoff = Vec::with_capacity(n);
        for j in 0..n {
            let base = 2 + 3 * j;
            hat_a.push(parse(&row[base], line, col(base))?);
            a.push(parse(&row[base + 1], line, col(base + 1))?);
            payoff.push(parse(&row[base + 2], line, col(base + 2))?);
        }
        let k: usize = parse(&row[0], line, col(0))?;
        if k != records.len() {
            return Err(Error::Malformed(format!(
                "line {line}: expected k = {}, got {k}",
                records.len()
            )));
        }
        records.push(Record {
            k,
            khat: parse(&row[1], line, col(1))?,
            hat_a,
            a,
            payoff,
            lambda: parse(&row[head.len() - 1], line, col(head.len() - 1))?,
        });
    }
    if records.is_empty() {
        return Err(Error::Malformed("trajectory has no rows".into()));
    }
    Ok(Trajectory { records })
}
