//! Serialized documents. JSON keys come out sorted, reals use the shortest
//! decimal that round-trips, exponents are decimal strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembly::{BlockLayout, Trajectory};
use crate::error::{Error, Result};
use crate::lemma1::Lemma1Construction;
use crate::lemma2::Lemma2Construction;
use crate::linalg::Real;
use crate::monomial::BlockMonomial;
use crate::report::Report;
use crate::wordexpr::{BigExponent, WordExpr};

fn reals(xs: &[Real]) -> Vec<f64> {
    xs.iter().map(Real::to_f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Doc {
    pub epsilon: f64,
    pub r: usize,
    pub alphas: Vec<f64>,
    pub n: Vec<BigExponent>,
    pub achieved_errors: Vec<f64>,
    pub chain_ranks: Vec<usize>,
}

impl Lemma1Doc {
    pub fn new(c: &Lemma1Construction) -> Self {
        Lemma1Doc {
            epsilon: c.epsilon,
            r: c.r(),
            alphas: reals(&c.alphas),
            n: c.n.clone(),
            achieved_errors: reals(&c.achieved_errors),
            chain_ranks: c.chain.iter().map(|p| p.rank()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Doc {
    pub epsilon: f64,
    pub betas: Vec<f64>,
    pub m: Vec<BigExponent>,
    pub achieved_errors: Vec<f64>,
    pub q_rank: usize,
}

impl Lemma2Doc {
    pub fn new(c: &Lemma2Construction) -> Self {
        Lemma2Doc {
            epsilon: c.epsilon,
            betas: reals(&c.betas),
            m: c.m.clone(),
            achieved_errors: reals(&c.achieved_errors),
            q_rank: c.q.rank(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub m: BigExponent,
    pub n: BigExponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub eps: f64,
    pub r: usize,
    pub factor_tolerance: f64,
    pub q_tolerance: f64,
    pub refinements: u32,
    pub eta: f64,
    pub exponent_pairs: Vec<ExponentPair>,
    pub factor_errors: Vec<f64>,
    pub word: WordExpr,
    pub word_length: BigExponent,
    pub lemma1: Lemma1Doc,
    pub lemma2: Lemma2Doc,
}

impl BlockDoc {
    pub fn new(b: &BlockMonomial) -> Self {
        BlockDoc {
            eps: b.eps,
            r: b.r,
            factor_tolerance: b.epsilon2,
            q_tolerance: b.construction.epsilon1,
            refinements: b.construction.refinements,
            eta: b.eta.to_f64(),
            exponent_pairs: b.exponent_pairs.iter().map(|(m, n)| ExponentPair { m: m.clone(), n: n.clone() }).collect(),
            factor_errors: reals(&b.construction.achieved_errors),
            word: b.word.clone(),
            word_length: b.word.word_length(),
            lemma1: Lemma1Doc::new(&b.construction.lemma1),
            lemma2: Lemma2Doc::new(&b.construction.lemma2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyDoc {
    pub blocks: usize,
    pub epsilons: Vec<f64>,
    pub rs: Vec<usize>,
    pub dims: Vec<usize>,
    pub global_dim: usize,
    pub markers: Vec<usize>,
    pub monomials: Vec<BlockDoc>,
}

impl AssemblyDoc {
    pub fn new(layout: &BlockLayout, blocks: &[BlockMonomial]) -> Self {
        AssemblyDoc {
            blocks: layout.k(),
            epsilons: layout.epsilons.clone(),
            rs: layout.rs.clone(),
            dims: layout.dims.clone(),
            global_dim: layout.global_dim,
            markers: layout.markers.clone(),
            monomials: blocks.iter().map(BlockDoc::new).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConstructionDoc {
    Lemma1(Lemma1Doc),
    Lemma2 { lemma1: Lemma1Doc, lemma2: Lemma2Doc },
    Monomial(BlockDoc),
    Assembly(AssemblyDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub pass: bool,
    pub reports: Vec<Report>,
}

impl ReportDoc {
    pub fn new(reports: Vec<Report>) -> Self {
        ReportDoc { pass: reports.iter().all(Report::all_pass), reports }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

pub const CSV_HEADER: &str = "step,block,norm,overlap_next_marker,expected_overlap,deviation,log10_word_length";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub block: usize,
    pub norm: f64,
    pub overlap_next_marker: f64,
    pub expected_overlap: f64,
    pub deviation: f64,
    pub log10_word_length: f64,
}

pub fn trajectory_rows(t: &Trajectory) -> Vec<TrajectoryRow> {
    (0..t.checkpoints.len())
        .map(|k| TrajectoryRow {
            step: k,
            block: k,
            norm: t.norms[k].to_f64(),
            overlap_next_marker: t.overlaps[k].to_f64(),
            expected_overlap: t.expected_overlaps[k].to_f64(),
            deviation: (&t.overlaps[k] - &t.expected_overlaps[k]).abs().to_f64(),
            log10_word_length: t.word_lengths[k].log10(),
        })
        .collect()
}

pub fn format_csv(rows: &[TrajectoryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(format!("trajectory: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(|e| Error::Config(format!("trajectory: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("trajectory: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("trajectory: {e}")))
}

pub fn parse_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Config(format!("trajectory: {e}")))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Config("unexpected trajectory header".into()));
    }
    rdr.deserialize().map(|row| row.map_err(|e| Error::Config(format!("bad trajectory row: {e}")))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            TrajectoryRow {
                step: 0,
                block: 0,
                norm: 1.0,
                overlap_next_marker: 1.0,
                expected_overlap: 1.0,
                deviation: 0.0,
                log10_word_length: f64::NEG_INFINITY,
            },
            TrajectoryRow {
                step: 1,
                block: 1,
                norm: 0.8012,
                overlap_next_marker: 0.7495333551,
                expected_overlap: 0.7495333551,
                deviation: 1.2e-60,
                log10_word_length: 70.25,
            },
        ];
        let text = format_csv(&rows).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(format_csv(&back).unwrap(), text);
    }

    #[test]
    fn json_keys_sorted() {
        let doc = ReportDoc::new(vec![Report::new("x")]);
        let text = to_json(&doc).unwrap();
        assert!(text.find("\"pass\"").unwrap() < text.find("\"reports\"").unwrap());
    }
}
