//! Instance files and their resolution to algorithm inputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{TreeJson, WeightedTree};

/// `{tree, k, h, initial, requests, opt_initial?}` with leaves named by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KServerInstance {
    pub tree: TreeJson,
    pub k: usize,
    pub h: usize,
    pub initial: Vec<String>,
    pub requests: Vec<String>,
    /// Starting servers of the offline comparator; defaults to the first `h`
    /// entries of `initial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_initial: Option<Vec<String>>,
}

/// Resolved k-server instance with leaf positions.
#[derive(Debug, Clone)]
pub struct KServerInput {
    pub tree: WeightedTree,
    pub k: usize,
    pub h: usize,
    pub initial: Vec<usize>,
    pub requests: Vec<usize>,
    pub opt_initial: Vec<usize>,
}

impl KServerInstance {
    pub fn resolve(&self) -> Result<KServerInput> {
        let tree = WeightedTree::from_records(self.tree.nodes.clone())?;
        let pos = |ids: &[String]| -> Result<Vec<usize>> { ids.iter().map(|id| tree.leaf_by_id(id)).collect() };
        let initial = pos(&self.initial)?;
        let requests = pos(&self.requests)?;
        let opt_initial = match &self.opt_initial {
            Some(ids) => pos(ids)?,
            None => initial.iter().take(self.h).copied().collect(),
        };
        Ok(KServerInput { tree, k: self.k, h: self.h, initial, requests, opt_initial })
    }

    pub fn from_input(input: &KServerInput) -> Self {
        let ids = |ps: &[usize]| -> Vec<String> {
            ps.iter().map(|&p| input.tree.id(input.tree.leaf_node(p)).to_string()).collect()
        };
        KServerInstance {
            tree: input.tree.to_json(),
            k: input.k,
            h: input.h,
            initial: ids(&input.initial),
            requests: ids(&input.requests),
            opt_initial: Some(ids(&input.opt_initial)),
        }
    }
}

/// `{weights, k, h, requests, initial}` with 0-based page indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagingInstance {
    pub weights: Vec<f64>,
    pub k: usize,
    pub h: usize,
    pub requests: Vec<usize>,
    pub initial: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_initial: Option<Vec<usize>>,
}

impl PagingInstance {
    pub fn opt_start(&self) -> Vec<usize> {
        self.opt_initial.clone().unwrap_or_else(|| self.initial.iter().take(self.h).copied().collect())
    }
}

/// `{n, rows}` with rows as 0/1 lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetCoverInstance {
    pub n: usize,
    pub rows: Vec<Vec<u8>>,
}

impl SetCoverInstance {
    pub fn boolean_rows(&self) -> Result<Vec<Vec<bool>>> {
        self.rows
            .iter()
            .map(|r| {
                if r.len() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, got: r.len() });
                }
                r.iter()
                    .map(|&v| match v {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::param(format!("row entry {other} is not 0 or 1"))),
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Instance {
    KServer(KServerInstance),
    Paging(PagingInstance),
    SetCover(SetCoverInstance),
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kserver_instance_round_trip() {
        let text = r#"{"tree":{"nodes":[{"id":"r","parent":null,"weight":1.0},
            {"id":"u","parent":"r","weight":1.0},{"id":"v","parent":"r","weight":1.0},
            {"id":"w","parent":"r","weight":1.0}]},
            "k":2,"h":1,"initial":["v","u"],"requests":["w","u"]}"#;
        let inst: KServerInstance = serde_json::from_str(text).unwrap();
        let input = inst.resolve().unwrap();
        assert_eq!(input.initial, vec![1, 0]);
        assert_eq!(input.opt_initial, vec![1]);
        assert_eq!(input.requests, vec![2, 0]);
        let back = KServerInstance::from_input(&input).resolve().unwrap();
        assert_eq!(back.requests, input.requests);
    }

    #[test]
    fn unknown_leaf_is_rejected() {
        let text = r#"{"tree":{"nodes":[{"id":"r","parent":null,"weight":1.0},
            {"id":"u","parent":"r","weight":1.0},{"id":"v","parent":"r","weight":1.0}]},
            "k":1,"h":1,"initial":["u"],"requests":["x"]}"#;
        let inst: KServerInstance = serde_json::from_str(text).unwrap();
        assert!(inst.resolve().is_err());
    }

    #[test]
    fn setcover_rows_must_be_boolean() {
        let bad = SetCoverInstance { n: 2, rows: vec![vec![1, 2]] };
        assert!(bad.boolean_rows().is_err());
        let short = SetCoverInstance { n: 3, rows: vec![vec![1, 0]] };
        assert!(short.boolean_rows().is_err());
    }
}
