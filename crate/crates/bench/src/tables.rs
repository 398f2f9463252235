use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::grid::ResultRecord;

pub const RESULTS_HEADER: &str = "n,p,pi,decay,lambda,proportion,total_share,starts,minutes";

/// One line of the results CSV.
#[derive(Debug, Serialize, Deserialize)]
struct Row {
    n: usize,
    p: usize,
    pi: f64,
    decay: String,
    lambda: f64,
    proportion: f64,
    total_share: f64,
    starts: usize,
    minutes: f64,
}

impl From<&ResultRecord> for Row {
    fn from(r: &ResultRecord) -> Self {
        Row {
            n: r.n,
            p: r.p,
            pi: r.pi,
            decay: r.decay.clone(),
            lambda: r.lambda,
            proportion: r.proportion,
            total_share: r.total_share,
            starts: r.starts,
            minutes: r.minutes,
        }
    }
}

impl From<Row> for ResultRecord {
    fn from(r: Row) -> Self {
        ResultRecord {
            n: r.n,
            p: r.p,
            pi: r.pi,
            decay: r.decay,
            lambda: r.lambda,
            proportion: r.proportion,
            total_share: r.total_share,
            starts: r.starts,
            minutes: r.minutes,
            layout: None,
        }
    }
}

pub fn write_results<W: Write>(records: &[ResultRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row::from(r))?;
    }
    if records.is_empty() {
        w.write_record(RESULTS_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn results_csv(records: &[ResultRecord]) -> String {
    let mut buf = Vec::new();
    write_results(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn write_results_csv(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_results(records, file)
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    anyhow::ensure!(header.join(",") == RESULTS_HEADER, "unexpected results header `{}`", header.join(","));
    rd.deserialize::<Row>().map(|row| Ok(row?.into())).collect()
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_results(file)
}

fn decay_title(decay: &str) -> &str {
    match decay {
        "power" => "Power Decay",
        "exp" => "Exponential Decay",
        other => other,
    }
}

/// Key for ordering π and λ values exactly.
fn key(v: f64) -> u64 {
    // All values are non-negative, so the bit pattern orders like the value.
    v.to_bits()
}

/// Render one block per (n, decay, λ): rows p, columns π, proportions to 5
/// decimals, then run times in minutes. Depends only on `records`.
pub fn render_tables(records: &[ResultRecord]) -> String {
    let mut out = String::new();
    let groups: BTreeSet<(usize, u8, String, u64)> = records
        .iter()
        .map(|r| (r.n, if r.decay == "power" { 0 } else { 1 }, r.decay.clone(), key(r.lambda)))
        .collect();

    for (n, _, decay, lambda_key) in groups {
        let rows: Vec<&ResultRecord> =
            records.iter().filter(|r| r.n == n && r.decay == decay && key(r.lambda) == lambda_key).collect();
        let ps: BTreeSet<usize> = rows.iter().map(|r| r.p).collect();
        let pis: Vec<f64> = {
            let set: BTreeSet<u64> = rows.iter().map(|r| key(r.pi)).collect();
            set.into_iter().map(f64::from_bits).collect()
        };
        let starts: BTreeSet<usize> = rows.iter().map(|r| r.starts).collect();
        let starts = starts.into_iter().map(|s| s.to_string()).collect::<Vec<_>>().join("/");
        let lambda = f64::from_bits(lambda_key);
        let cell = |p: usize, pi: f64| rows.iter().find(|r| r.p == p && key(r.pi) == key(pi));

        let _ = writeln!(out, "Results for n={n} ({}, lambda={lambda})", decay_title(&decay));
        let mut header = format!("{:>4}", "p");
        for pi in &pis {
            let _ = write!(header, " | {:>8}", format!("pi={pi:.1}"));
        }
        let rule = "-".repeat(header.len());

        let _ = writeln!(out, "Proportion of Market Share Captured");
        let _ = writeln!(out, "{header}\n{rule}");
        for &p in &ps {
            let _ = write!(out, "{p:>4}");
            for &pi in &pis {
                match cell(p, pi) {
                    Some(r) => write!(out, " | {:>8.5}", r.proportion),
                    None => write!(out, " | {:>8}", "-"),
                }
                .unwrap();
            }
            out.push('\n');
        }
        let _ = writeln!(out, "Run Time in Minutes for all {starts} Runs");
        let _ = writeln!(out, "{header}\n{rule}");
        for &p in &ps {
            let _ = write!(out, "{p:>4}");
            for &pi in &pis {
                match cell(p, pi) {
                    Some(r) => write!(out, " | {:>8.2}", r.minutes),
                    None => write!(out, " | {:>8}", "-"),
                }
                .unwrap();
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
