//! JSON documents read and written by the command line tool.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use fraisse_core::{BallTree, FiniteSpace, PaddingSchedule};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A map between finite spaces, keyed by label.
pub type Table = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub depth: usize,
    pub levels: Vec<Vec<String>>,
    /// `parents[l][i]`: index in level `l` of the parent of ball `i` of level `l + 1`.
    pub parents: Vec<Vec<usize>>,
}

impl TreeDoc {
    pub fn from_tree(t: &BallTree) -> Self {
        Self {
            depth: t.depth(),
            levels: t.levels().iter().map(|l| l.points().to_vec()).collect(),
            parents: (0..t.depth()).map(|l| t.parents(l).to_vec()).collect(),
        }
    }

    pub fn to_tree(&self) -> Result<BallTree, String> {
        if self.levels.len() != self.depth + 1 {
            return Err(format!(
                "depth is {} but {} levels are listed",
                self.depth,
                self.levels.len()
            ));
        }
        BallTree::from_labels(self.levels.clone(), self.parents.clone()).map_err(|e| e.to_string())
    }
}

/// A subset of an ambient tree, given by point labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddedSetDoc {
    pub ambient: TreeDoc,
    pub subset: Vec<String>,
}

impl EmbeddedSetDoc {
    pub fn resolve(&self) -> Result<(BallTree, Vec<usize>), String> {
        let tree = self.ambient.to_tree()?;
        let subset = self
            .subset
            .iter()
            .map(|l| tree.point_index(l).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((tree, subset))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendInput {
    pub src: EmbeddedSetDoc,
    pub dst: EmbeddedSetDoc,
    /// Point of `src.subset` to point of `dst.subset`.
    pub h: Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub depth: usize,
    pub pad_base: usize,
    pub pad_growth: usize,
}

impl ConfigDoc {
    pub fn schedule(&self) -> Result<PaddingSchedule, CliError> {
        Ok(PaddingSchedule::new(self.pad_base, self.pad_growth)?)
    }
}

pub fn table(dom: &FiniteSpace, cod: &FiniteSpace, images: &[usize]) -> Table {
    images
        .iter()
        .enumerate()
        .map(|(i, &y)| (dom.label(i).to_string(), cod.label(y).to_string()))
        .collect()
}

/// Reads a table back as indices; its keys must be exactly the points of `dom`.
pub fn read_table(t: &Table, dom: &FiniteSpace, cod: &FiniteSpace) -> Result<Vec<usize>, String> {
    if t.len() != dom.len() {
        return Err(format!(
            "table has {} entries for {} points of `{}`",
            t.len(),
            dom.len(),
            dom.id()
        ));
    }
    dom.points()
        .iter()
        .map(|x| {
            let y = t.get(x).ok_or_else(|| format!("no entry for `{x}`"))?;
            cod.index_of(y)
                .ok_or_else(|| format!("`{x}` maps to unknown `{y}`"))
        })
        .collect()
}

pub fn space(id: &str, labels: &[String]) -> Result<Arc<FiniteSpace>, String> {
    FiniteSpace::new(id, labels.to_vec())
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

pub fn parse<T: DeserializeOwned>(path: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        CliError::Parse {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message,
        }
    })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&path.display().to_string(), &text)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use fraisse_core::fixtures;

    #[test]
    fn tree_round_trip() {
        let t = fixtures::binary_tree(3);
        let doc = TreeDoc::from_tree(&t);
        assert!(doc.to_tree().unwrap().same_shape(&t));
        let bad = TreeDoc { depth: 4, ..doc };
        assert!(bad.to_tree().is_err());
    }

    #[test]
    fn tables_need_every_key() {
        let x = space("X", &["a".into(), "b".into()]).unwrap();
        let y = space("Y", &["u".into()]).unwrap();
        let t = table(&x, &y, &[0, 0]);
        assert_eq!(read_table(&t, &x, &y).unwrap(), vec![0, 0]);
        let mut short = t.clone();
        short.remove("b");
        assert!(read_table(&short, &x, &y).is_err());
        let mut unknown = t;
        unknown.insert("a".into(), "v".into());
        assert!(read_table(&unknown, &x, &y)
            .unwrap_err()
            .contains("unknown"));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse::<TreeDoc>("in.json", "{\n \"depth\": x}").unwrap_err();
        match err {
            CliError::Parse {
                line,
                column,
                message,
                ..
            } => {
                assert_eq!((line, column), (2, 11));
                assert!(!message.contains("line"));
            }
            e => panic!("{e}"),
        }
    }
}
