use std::io::BufRead;
use std::path::Path;

use indexmap::IndexMap;

use super::{check_cell, numbered_lines, open, parse_f64, source_name, write_file};
use crate::error::{Error, Result};

/// Token → dense vector, every vector of length `dim`. Iteration follows
/// insertion order so written files are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    entries: IndexMap<String, Vec<f64>>,
}

impl WordVectorTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("vector dimension must be positive".into()));
        }
        Ok(WordVectorTable {
            dim,
            entries: IndexMap::new(),
        })
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let token = token.into();
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if self.entries.contains_key(&token) {
            return Err(Error::Duplicate(token));
        }
        self.entries.insert(token, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn read_word_vectors(path: &Path) -> Result<WordVectorTable> {
    parse_word_vectors(open(path)?, &source_name(path))
}

pub fn parse_word_vectors<R: BufRead>(reader: R, name: &str) -> Result<WordVectorTable> {
    let mut table: Option<WordVectorTable> = None;
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let values = parts
            .map(|p| parse_f64(p, name, lineno))
            .collect::<Result<Vec<f64>>>()?;
        let table = match table.as_mut() {
            Some(t) => t,
            None => {
                if values.is_empty() {
                    return Err(Error::format(name, lineno, "line has no vector values"));
                }
                table.insert(WordVectorTable::new(values.len())?)
            }
        };
        if values.len() != table.dim {
            return Err(Error::format(
                name,
                lineno,
                format!("expected {} values, found {}", table.dim, values.len()),
            ));
        }
        if table.contains(token) {
            return Err(Error::Duplicate(token.to_string()));
        }
        table.entries.insert(token.to_string(), values);
    }
    table.ok_or_else(|| Error::format(name, 0, "no vectors found; dimension undefined"))
}

pub fn write_word_vectors(path: &Path, table: &WordVectorTable) -> Result<()> {
    let mut s = String::new();
    for (token, v) in table.iter() {
        if token.is_empty() || token.contains(char::is_whitespace) {
            return Err(Error::InvalidInput(format!("token {token:?} cannot be written")));
        }
        s.push_str(token);
        for x in v {
            s.push(' ');
            s.push_str(&x.to_string());
        }
        s.push('\n');
    }
    write_file(path, &s)
}

/// Sample id → fixed-width representation produced by an external encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceFeatureMatrix {
    dim: usize,
    rows: IndexMap<String, Vec<f64>>,
}

impl SentenceFeatureMatrix {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("feature dimension must be positive".into()));
        }
        Ok(SentenceFeatureMatrix {
            dim,
            rows: IndexMap::new(),
        })
    }

    pub fn insert(&mut self, id: impl Into<String>, row: Vec<f64>) -> Result<()> {
        let id = id.into();
        if row.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: row.len(),
            });
        }
        if self.rows.contains_key(&id) {
            return Err(Error::Duplicate(id));
        }
        self.rows.insert(id, row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.rows.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

pub fn read_sentence_features(path: &Path) -> Result<SentenceFeatureMatrix> {
    parse_sentence_features(open(path)?, &source_name(path))
}

pub fn parse_sentence_features<R: BufRead>(reader: R, name: &str) -> Result<SentenceFeatureMatrix> {
    let mut declared: Option<usize> = None;
    let mut matrix: Option<SentenceFeatureMatrix> = None;
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(d) = rest.trim().strip_prefix("dim=") {
                if declared.is_some() || matrix.is_some() {
                    return Err(Error::format(name, lineno, "dim header must come first"));
                }
                let d: usize = d
                    .trim()
                    .parse()
                    .map_err(|_| Error::format(name, lineno, format!("bad dim header '{line}'")))?;
                declared = Some(d);
                matrix = Some(SentenceFeatureMatrix::new(d)?);
            }
            continue;
        }
        let mut cells = line.split('\t');
        let id = cells.next().unwrap_or_default();
        let values = cells
            .map(|c| parse_f64(c, name, lineno))
            .collect::<Result<Vec<f64>>>()?;
        let m = match matrix.as_mut() {
            Some(m) => m,
            None => {
                if values.is_empty() {
                    return Err(Error::format(name, lineno, "row has no feature values"));
                }
                matrix.insert(SentenceFeatureMatrix::new(values.len())?)
            }
        };
        if values.len() != m.dim {
            let what = if declared.is_some() {
                "header declares"
            } else {
                "expected"
            };
            return Err(Error::format(
                name,
                lineno,
                format!("{what} {} values, row has {}", m.dim, values.len()),
            ));
        }
        if m.rows.contains_key(id) {
            return Err(Error::Duplicate(id.to_string()));
        }
        m.rows.insert(id.to_string(), values);
    }
    matrix.ok_or_else(|| Error::format(name, 0, "no rows and no dim header"))
}

pub fn write_sentence_features(path: &Path, matrix: &SentenceFeatureMatrix) -> Result<()> {
    let mut s = format!("#dim={}\n", matrix.dim);
    for (id, row) in matrix.iter() {
        check_cell(id)?;
        s.push_str(id);
        for x in row {
            s.push('\t');
            s.push_str(&x.to_string());
        }
        s.push('\n');
    }
    write_file(path, &s)
}
