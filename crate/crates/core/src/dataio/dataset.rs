use std::io::BufRead;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{check_cell, numbered_lines, open, parse_f64, source_name, write_file, Emotion, LabeledInstance};
use crate::error::{Error, Result};
use crate::eval::{BiasAxis, BiasPair};

/// Which label column an intensity file carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    /// Real-valued intensity in [0, 1].
    Reg,
    /// Ordinal class written as `<int>: <description>`.
    Oc,
}

pub fn read_intensity_dataset(path: &Path, kind: DatasetKind) -> Result<Vec<LabeledInstance>> {
    parse_intensity_dataset(open(path)?, kind, &source_name(path))
}

pub fn parse_intensity_dataset<R: BufRead>(reader: R, kind: DatasetKind, name: &str) -> Result<Vec<LabeledInstance>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if !header_seen {
            let cols = line.split('\t').count();
            if cols != 4 {
                return Err(Error::parse(
                    name,
                    lineno,
                    format!("header has {cols} columns, expected 4"),
                ));
            }
            header_seen = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 4 {
            return Err(Error::parse(
                name,
                lineno,
                format!("row has {} columns, expected 4", cells.len()),
            ));
        }
        let emotion: Emotion = cells[2].parse().map_err(|e: String| Error::parse(name, lineno, e))?;
        let mut inst = LabeledInstance::new(cells[0], cells[1]);
        inst.emotion = Some(emotion);
        match kind {
            DatasetKind::Reg => {
                let v = parse_f64(cells[3], name, lineno)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Range {
                        source_name: name.to_string(),
                        line: lineno,
                        value: v,
                        lo: 0.0,
                        hi: 1.0,
                    });
                }
                inst.reg_label = Some(v);
            }
            DatasetKind::Oc => {
                let ord = parse_ordinal_cell(cells[3])
                    .ok_or_else(|| Error::parse(name, lineno, format!("bad class cell '{}'", cells[3])))?;
                let (lo, hi) = emotion.ordinal_range();
                if ord < lo || ord > hi {
                    return Err(Error::Range {
                        source_name: name.to_string(),
                        line: lineno,
                        value: ord as f64,
                        lo: lo as f64,
                        hi: hi as f64,
                    });
                }
                inst.ord_label = Some(ord);
            }
        }
        out.push(inst);
    }
    if !header_seen {
        return Err(Error::parse(name, 1, "missing header row"));
    }
    Ok(out)
}

/// Integer before the first ':'; a bare integer is accepted too.
fn parse_ordinal_cell(cell: &str) -> Option<i32> {
    let prefix = cell.split(':').next()?;
    prefix.trim().parse().ok()
}

pub fn write_intensity_dataset(path: &Path, kind: DatasetKind, data: &[LabeledInstance]) -> Result<()> {
    let mut s = String::new();
    s.push_str(match kind {
        DatasetKind::Reg => "ID\tTweet\tAffect Dimension\tIntensity Score\n",
        DatasetKind::Oc => "ID\tTweet\tAffect Dimension\tIntensity Class\n",
    });
    for inst in data {
        check_cell(&inst.id)?;
        check_cell(&inst.raw_text)?;
        let emotion = inst
            .emotion
            .ok_or_else(|| Error::InvalidInput(format!("instance '{}' has no affect dimension", inst.id)))?;
        let label = match kind {
            DatasetKind::Reg => inst
                .reg_label
                .map(|v| v.to_string())
                .ok_or_else(|| Error::InvalidInput(format!("instance '{}' has no intensity", inst.id)))?,
            DatasetKind::Oc => inst
                .ord_label
                .map(|v| format!("{v}: ordinal class"))
                .ok_or_else(|| Error::InvalidInput(format!("instance '{}' has no class", inst.id)))?,
        };
        s.push_str(&format!("{}\t{}\t{}\t{}\n", inst.id, inst.raw_text, emotion, label));
    }
    write_file(path, &s)
}

pub fn read_multilabel_dataset(path: &Path) -> Result<(Vec<String>, Vec<LabeledInstance>)> {
    parse_multilabel_dataset(open(path)?, &source_name(path))
}

pub fn parse_multilabel_dataset<R: BufRead>(reader: R, name: &str) -> Result<(Vec<String>, Vec<LabeledInstance>)> {
    let mut labels: Option<Vec<String>> = None;
    let mut out = Vec::new();
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        let Some(labels) = labels.as_ref() else {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 3 {
                return Err(Error::parse(
                    name,
                    lineno,
                    "header needs ID, Tweet and at least one label",
                ));
            }
            labels = Some(cols[2..].iter().map(|s| s.trim().to_string()).collect());
            continue;
        };
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != labels.len() + 2 {
            return Err(Error::parse(
                name,
                lineno,
                format!("row has {} columns, expected {}", cells.len(), labels.len() + 2),
            ));
        }
        let bits = cells[2..]
            .iter()
            .map(|c| match c.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::parse(name, lineno, format!("non-binary label cell '{other}'"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        let mut inst = LabeledInstance::new(cells[0], cells[1]);
        inst.multilabels = Some(bits);
        out.push(inst);
    }
    let labels = labels.ok_or_else(|| Error::parse(name, 1, "missing header row"))?;
    Ok((labels, out))
}

pub fn write_multilabel_dataset(path: &Path, labels: &[String], data: &[LabeledInstance]) -> Result<()> {
    let mut s = String::from("ID\tTweet");
    for l in labels {
        check_cell(l)?;
        s.push('\t');
        s.push_str(l);
    }
    s.push('\n');
    for inst in data {
        check_cell(&inst.id)?;
        check_cell(&inst.raw_text)?;
        let bits = inst
            .multilabels
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("instance '{}' has no label set", inst.id)))?;
        if bits.len() != labels.len() {
            return Err(Error::Dimension {
                expected: labels.len(),
                got: bits.len(),
            });
        }
        s.push_str(&inst.id);
        s.push('\t');
        s.push_str(&inst.raw_text);
        for &b in bits {
            s.push_str(if b { "\t1" } else { "\t0" });
        }
        s.push('\n');
    }
    write_file(path, &s)
}

/// One document of the hashtag-labelled corpus used to train word vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashtagDoc {
    pub label: String,
    pub text: String,
}

pub fn read_hashtag_corpus(path: &Path) -> Result<Vec<HashtagDoc>> {
    parse_hashtag_corpus(open(path)?, &source_name(path))
}

pub fn parse_hashtag_corpus<R: BufRead>(reader: R, name: &str) -> Result<Vec<HashtagDoc>> {
    let mut out = Vec::new();
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if line.is_empty() {
            continue;
        }
        let (label, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(name, lineno, "expected 'label<TAB>text'"))?;
        if text.contains('\t') {
            return Err(Error::parse(name, lineno, "too many columns"));
        }
        out.push(HashtagDoc {
            label: label.trim().to_string(),
            text: text.to_string(),
        });
    }
    Ok(out)
}

pub fn write_hashtag_corpus(path: &Path, docs: &[HashtagDoc]) -> Result<()> {
    let mut s = String::new();
    for d in docs {
        check_cell(&d.label)?;
        check_cell(&d.text)?;
        s.push_str(&format!("{}\t{}\n", d.label, d.text));
    }
    write_file(path, &s)
}

/// Reads `id<TAB>score` lines; order is preserved.
pub fn read_predictions(path: &Path) -> Result<IndexMap<String, f64>> {
    parse_predictions(open(path)?, &source_name(path))
}

pub fn parse_predictions<R: BufRead>(reader: R, name: &str) -> Result<IndexMap<String, f64>> {
    let mut out = IndexMap::new();
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if line.is_empty() {
            continue;
        }
        let (id, score) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(name, lineno, "expected 'id<TAB>score'"))?;
        let v = parse_f64(score, name, lineno)?;
        if out.insert(id.to_string(), v).is_some() {
            return Err(Error::Duplicate(id.to_string()));
        }
    }
    Ok(out)
}

pub fn write_predictions<'a, I>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut s = String::new();
    for (id, v) in rows {
        check_cell(id)?;
        s.push_str(&format!("{id}\t{v}\n"));
    }
    write_file(path, &s)
}

pub fn read_bias_pairs(path: &Path) -> Result<Vec<BiasPair>> {
    parse_bias_pairs(open(path)?, &source_name(path))
}

pub fn parse_bias_pairs<R: BufRead>(reader: R, name: &str) -> Result<Vec<BiasPair>> {
    let mut out = Vec::new();
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 4 {
            return Err(Error::parse(
                name,
                lineno,
                "expected 'id_A<TAB>id_B<TAB>axis<TAB>emotion'",
            ));
        }
        let axis = match cells[2].trim() {
            "gender" => BiasAxis::Gender,
            "race" => BiasAxis::Race,
            other => return Err(Error::parse(name, lineno, format!("unknown axis '{other}'"))),
        };
        let emotion: Emotion = cells[3].parse().map_err(|e: String| Error::parse(name, lineno, e))?;
        if cells[0] == cells[1] {
            return Err(Error::parse(name, lineno, "pair ids must differ"));
        }
        out.push(BiasPair {
            id_a: cells[0].to_string(),
            id_b: cells[1].to_string(),
            axis,
            emotion,
        });
    }
    Ok(out)
}
