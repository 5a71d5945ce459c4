//! JSON file formats for graphs, colorings and words.
//!
//! All writers emit compact single-line JSON with keys in declaration order,
//! so identical data produces identical bytes.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::graph::{Coloring, Graph, Word};
use crate::{Error, Result};

/// On-disk form of a [`Graph`], plus optional display names per vertex.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub k: usize,
    pub adj: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph, names: Option<Vec<String>>) -> Self {
        Self {
            n: g.n(),
            k: g.k(),
            adj: g.adj().to_vec(),
            names,
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        if let Some(names) = &self.names {
            if names.len() != self.n {
                return Err(Error::ShapeMismatch(format!(
                    "{} names for {} vertices",
                    names.len(),
                    self.n
                )));
            }
        }
        Graph::new(self.n, self.k, self.adj.clone())
    }
}

/// On-disk form of a [`Coloring`]: per-vertex slot-to-color rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColoringFile {
    pub colors: Vec<Vec<usize>>,
}

/// On-disk form of a [`Word`]: numeric letters plus a readable rendering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WordFile {
    pub word: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display: Option<String>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Compact one-line JSON with a trailing newline.
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)? + "\n")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_line(value)?)?;
    Ok(())
}

/// Compact one-line JSON rendering of a graph, as `write_graph` emits.
pub fn graph_to_json_line(g: &Graph) -> String {
    to_json_line(&GraphFile::from_graph(g, None)).expect("graphs serialize")
}

/// Compact one-line JSON rendering of a coloring, as `write_coloring` emits.
pub fn coloring_to_json_line(c: &Coloring) -> String {
    to_json_line(&ColoringFile {
        colors: c.rows().to_vec(),
    })
    .expect("colorings serialize")
}

pub fn read_graph(path: &Path) -> Result<(Graph, Option<Vec<String>>)> {
    let file: GraphFile = read_json(path)?;
    Ok((file.to_graph()?, file.names))
}

pub fn write_graph(path: &Path, g: &Graph, names: Option<Vec<String>>) -> Result<()> {
    write_json(path, &GraphFile::from_graph(g, names))
}

/// Reads a coloring and checks its shape against `g`.
pub fn read_coloring(path: &Path, g: &Graph) -> Result<Coloring> {
    let file: ColoringFile = read_json(path)?;
    if file.colors.len() != g.n() {
        return Err(Error::ShapeMismatch(format!(
            "coloring has {} rows, graph has {} vertices",
            file.colors.len(),
            g.n()
        )));
    }
    Coloring::new(g.k(), file.colors)
}

pub fn write_coloring(path: &Path, c: &Coloring) -> Result<()> {
    write_json(
        path,
        &ColoringFile {
            colors: c.rows().to_vec(),
        },
    )
}

/// Reads a word and checks every letter against the color count `k`.
pub fn read_word(path: &Path, k: usize) -> Result<Word> {
    let file: WordFile = read_json(path)?;
    if let Some(&c) = file.word.iter().find(|&&c| c >= k) {
        return Err(Error::InvalidParams(format!("letter {c} outside 0..{k}")));
    }
    Ok(Word(file.word))
}

pub fn write_word(path: &Path, w: &Word) -> Result<()> {
    write_json(
        path,
        &WordFile {
            word: w.0.clone(),
            display: Some(w.to_string()),
        },
    )
}
