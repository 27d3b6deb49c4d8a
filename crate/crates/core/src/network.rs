//! Weighted coupled cell networks.
//!
//! A [`Network`] is a list of typed cells plus a square in-adjacency matrix.
//! **Rows are receivers and columns are senders**: `weight(c, d)` is the
//! weight of the edge `d -> c`. Graph libraries usually store the
//! transpose, so take care when converting.
//!
//! Files use a small JSON format:
//!
//! ```json
//! {"monoid": "int-add",
//!  "cells": [{"id": "1", "type": 1}, {"id": "2", "type": 1}],
//!  "edges": [{"from": "1", "to": "2", "weight": 1}]}
//! ```
//!
//! Repeated `(from, to)` pairs are combined with the monoid operation when
//! the file is loaded, so only the folded matrix is kept in memory.

use crate::monoid::{MonoidError, MonoidFamily, MonoidKind, MonoidSpec, TypeId, Weight};
use crate::partition::Partition;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("duplicate cell id '{0}'")]
    DuplicateCellId(String),
    #[error("edge refers to unknown cell '{0}'")]
    UnknownCellInEdge(String),
    #[error("malformed network document: {0}")]
    MalformedDocument(String),
    #[error("partition covers {partition} cells but the network has {network}")]
    PartitionDomainMismatch { partition: usize, network: usize },
    #[error("colors mixing monoids cannot be summed")]
    MixedMonoids,
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One cell entry of a network file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub cell_type: i64,
}

/// One edge entry of a network file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    pub weight: i64,
}

fn default_monoid() -> String {
    MonoidKind::IntegerAdd.name().to_string()
}

/// The serialized network document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default = "default_monoid")]
    pub monoid: String,
    pub cells: Vec<CellEntry>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
}

impl NetworkFile {
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        serde_json::from_str(text).map_err(|e| NetworkError::MalformedDocument(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network documents always serialize")
    }
}

/// An immutable coupled cell network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    ids: Vec<String>,
    types: Vec<TypeId>,
    num_types: u32,
    adjacency: Vec<i64>,
    monoids: MonoidFamily,
}

impl Network {
    /// Build from cell ids, 1-based type ids and a dense in-adjacency
    /// matrix (`adjacency[c][d]` is the weight of `d -> c`).
    pub fn from_parts(
        ids: Vec<String>,
        types: Vec<TypeId>,
        adjacency: Vec<Vec<i64>>,
        kind: MonoidKind,
    ) -> Result<Network, NetworkError> {
        let n = ids.len();
        let num_types = validate_cells(&ids, &types)?;
        if adjacency.len() != n || adjacency.iter().any(|row| row.len() != n) {
            return Err(NetworkError::MalformedDocument(format!(
                "adjacency must be {n}x{n}"
            )));
        }
        let monoids = MonoidFamily::uniform(kind, num_types);
        let flat: Vec<i64> = adjacency.into_iter().flatten().collect();
        let net = Network {
            ids,
            types,
            num_types,
            adjacency: flat,
            monoids,
        };
        for c in 0..n {
            for d in 0..n {
                let value = net.adjacency[c * n + d];
                if !net.monoid(c, d).contains(value) {
                    return Err(MonoidError::OutOfRange(value as i128).into());
                }
            }
        }
        Ok(net)
    }

    /// Load and validate a network document, folding parallel edges.
    pub fn parse(doc: &NetworkFile) -> Result<Network, NetworkError> {
        let kind = MonoidKind::from_name(&doc.monoid)?;
        let mut ids = Vec::with_capacity(doc.cells.len());
        let mut types = Vec::with_capacity(doc.cells.len());
        for cell in &doc.cells {
            if cell.cell_type < 1 || cell.cell_type > u32::MAX as i64 {
                return Err(NetworkError::MalformedDocument(format!(
                    "cell '{}' has invalid type {}",
                    cell.id, cell.cell_type
                )));
            }
            ids.push(cell.id.clone());
            types.push(cell.cell_type as TypeId);
        }
        let num_types = validate_cells(&ids, &types)?;
        let n = ids.len();
        let index: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let monoids = MonoidFamily::uniform(kind, num_types);
        let mut adjacency = vec![0i64; n * n];
        for c in 0..n {
            for d in 0..n {
                adjacency[c * n + d] = monoids.get(types[c], types[d]).zero();
            }
        }
        for edge in &doc.edges {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| NetworkError::UnknownCellInEdge(id.to_string()))
            };
            let (to, from) = (lookup(&edge.to)?, lookup(&edge.from)?);
            let spec = monoids.get(types[to], types[from]);
            if !spec.contains(edge.weight) {
                return Err(MonoidError::OutOfRange(edge.weight as i128).into());
            }
            let slot = &mut adjacency[to * n + from];
            *slot = spec.checked_add(*slot, edge.weight)?;
        }
        Ok(Network {
            ids,
            types,
            num_types,
            adjacency,
            monoids,
        })
    }

    pub fn from_json(text: &str) -> Result<Network, NetworkError> {
        Network::parse(&NetworkFile::from_json(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Network, NetworkError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| NetworkError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Network::from_json(&text)
    }

    /// Serialize back to a document with one edge per nonzero entry, listed
    /// by receiver then sender.
    pub fn to_file(&self) -> NetworkFile {
        let kind = self
            .monoids
            .homogeneous_kind()
            .unwrap_or(MonoidKind::IntegerAdd);
        let cells = self
            .ids
            .iter()
            .zip(&self.types)
            .map(|(id, &t)| CellEntry {
                id: id.clone(),
                cell_type: t as i64,
            })
            .collect();
        let mut edges = Vec::new();
        for c in 0..self.len() {
            for d in 0..self.len() {
                if self.has_edge(c, d) {
                    edges.push(EdgeEntry {
                        from: self.ids[d].clone(),
                        to: self.ids[c].clone(),
                        weight: self.raw(c, d),
                    });
                }
            }
        }
        NetworkFile {
            monoid: kind.name().to_string(),
            cells,
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, cell: usize) -> &str {
        &self.ids[cell]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn cell_type(&self, cell: usize) -> TypeId {
        self.types[cell]
    }

    pub fn types(&self) -> &[TypeId] {
        &self.types
    }

    pub fn num_types(&self) -> u32 {
        self.num_types
    }

    pub fn monoids(&self) -> &MonoidFamily {
        &self.monoids
    }

    /// The monoid of the edge `sender -> receiver`.
    pub fn monoid(&self, receiver: usize, sender: usize) -> MonoidSpec {
        self.monoids.get(self.types[receiver], self.types[sender])
    }

    /// Raw monoid element of the edge `sender -> receiver`.
    pub fn raw(&self, receiver: usize, sender: usize) -> i64 {
        self.adjacency[receiver * self.len() + sender]
    }

    pub fn weight(&self, receiver: usize, sender: usize) -> Weight {
        Weight::new(
            self.raw(receiver, sender),
            self.types[receiver],
            self.types[sender],
            self.monoid(receiver, sender),
        )
    }

    /// Raw in-adjacency row of `receiver`.
    pub fn row(&self, receiver: usize) -> &[i64] {
        let n = self.len();
        &self.adjacency[receiver * n..(receiver + 1) * n]
    }

    pub fn has_edge(&self, receiver: usize, sender: usize) -> bool {
        !self.monoid(receiver, sender).is_zero(self.raw(receiver, sender))
    }

    pub fn edge_count(&self) -> usize {
        (0..self.len())
            .flat_map(|c| (0..self.len()).map(move |d| (c, d)))
            .filter(|&(c, d)| self.has_edge(c, d))
            .count()
    }

    /// Dense matrix view, rows are receivers.
    pub fn adjacency_rows(&self) -> Vec<Vec<i64>> {
        (0..self.len()).map(|c| self.row(c).to_vec()).collect()
    }

    /// The partition of cells by type.
    pub fn type_partition(&self) -> Partition {
        Partition::from_labels(&self.types)
    }

    /// Whether every edge weight is a strictly positive integer or zero.
    pub fn has_nonnegative_integer_weights(&self) -> bool {
        self.monoids.homogeneous_kind() == Some(MonoidKind::IntegerAdd)
            && self.adjacency.iter().all(|&w| w >= 0)
    }

    fn check_partition(&self, partition: &Partition) -> Result<(), NetworkError> {
        if partition.num_cells() != self.len() {
            return Err(NetworkError::PartitionDomainMismatch {
                partition: partition.num_cells(),
                network: self.len(),
            });
        }
        Ok(())
    }

    /// Row `c` of `M P`: for every color, the monoid sum of the weights
    /// that `c` receives from cells of that color.
    pub fn row_color_sum(
        &self,
        partition: &Partition,
        cell: usize,
    ) -> Result<Vec<Weight>, NetworkError> {
        self.check_partition(partition)?;
        let reps = partition.representatives();
        let mut out: Vec<Weight> = reps
            .iter()
            .map(|&r| Weight::zero(self.types[cell], self.types[r], self.monoid(cell, r)))
            .collect();
        for d in 0..self.len() {
            let k = partition.color_of(d);
            if self.monoid(cell, d) != out[k].monoid {
                return Err(NetworkError::MixedMonoids);
            }
            out[k].value = out[k].monoid.add(out[k].value, self.raw(cell, d));
        }
        Ok(out)
    }

    /// The network induced on `cells` (kept in the given order). Types are
    /// renumbered contiguously by ascending original id; the second value
    /// maps each new type id (minus one) to its original id.
    pub fn induced_subnetwork(&self, cells: &[usize]) -> (Network, Vec<TypeId>) {
        let used: BTreeSet<TypeId> = cells.iter().map(|&c| self.types[c]).collect();
        let type_map: Vec<TypeId> = used.into_iter().collect();
        let renumber: HashMap<TypeId, TypeId> = type_map
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i as TypeId + 1))
            .collect();
        let n = cells.len();
        let mut adjacency = Vec::with_capacity(n * n);
        for &c in cells {
            for &d in cells {
                adjacency.push(self.raw(c, d));
            }
        }
        let net = Network {
            ids: cells.iter().map(|&c| self.ids[c].clone()).collect(),
            types: cells.iter().map(|&c| renumber[&self.types[c]]).collect(),
            num_types: type_map.len() as u32,
            adjacency,
            monoids: self.monoids.restrict(&type_map),
        };
        (net, type_map)
    }

    /// Construct a network that shares this network's monoid family. Used
    /// for quotients, whose type set is the same.
    pub(crate) fn with_same_types(
        &self,
        ids: Vec<String>,
        types: Vec<TypeId>,
        adjacency: Vec<i64>,
    ) -> Network {
        Network {
            ids,
            types,
            num_types: self.num_types,
            adjacency,
            monoids: self.monoids.clone(),
        }
    }

    /// GraphViz rendering. Node shape encodes the cell type, fill color the
    /// partition color when a partition is given, and edge labels carry the
    /// weights. Zero-weight entries are not drawn.
    pub fn export_dot(&self, partition: Option<&Partition>) -> Result<String, NetworkError> {
        if let Some(p) = partition {
            self.check_partition(p)?;
        }
        let mut out = String::from("digraph network {\n  rankdir=LR;\n");
        for c in 0..self.len() {
            let shape = SHAPES[(self.types[c] as usize - 1) % SHAPES.len()];
            let _ = write!(
                out,
                "  \"{}\" [shape={}",
                escape(&self.ids[c]),
                shape
            );
            if let Some(p) = partition {
                let fill = FILLS[p.color_of(c) % FILLS.len()];
                let _ = write!(out, ", style=filled, fillcolor=\"{fill}\"");
            }
            out.push_str("];\n");
        }
        for c in 0..self.len() {
            for d in 0..self.len() {
                if self.has_edge(c, d) {
                    let _ = writeln!(
                        out,
                        "  \"{}\" -> \"{}\" [label=\"{}\"];",
                        escape(&self.ids[d]),
                        escape(&self.ids[c]),
                        self.raw(c, d)
                    );
                }
            }
        }
        out.push_str("}\n");
        Ok(out)
    }
}

const SHAPES: [&str; 8] = [
    "circle", "box", "diamond", "hexagon", "triangle", "octagon", "house", "ellipse",
];

pub(crate) const FILLS: [&str; 10] = [
    "#ffffff", "#bdbdbd", "#636363", "#9ecae1", "#fdae6b", "#a1d99b", "#bcbddc", "#fc9272",
    "#fdd0a2", "#c7e9c0",
];

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn validate_cells(ids: &[String], types: &[TypeId]) -> Result<u32, NetworkError> {
    if ids.is_empty() {
        return Err(NetworkError::MalformedDocument("network has no cells".into()));
    }
    if ids.len() != types.len() {
        return Err(NetworkError::MalformedDocument(
            "one type per cell is required".into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for id in ids {
        if id.is_empty() || id.contains(['/', ',']) {
            return Err(NetworkError::MalformedDocument(format!(
                "cell id '{id}' must be nonempty and free of '/' and ','"
            )));
        }
        if !seen.insert(id.as_str()) {
            return Err(NetworkError::DuplicateCellId(id.clone()));
        }
    }
    let used: BTreeSet<TypeId> = types.iter().copied().collect();
    let max = *used.iter().next_back().expect("nonempty");
    if used.len() as u32 != max || used.contains(&0) {
        return Err(NetworkError::MalformedDocument(format!(
            "cell types must be exactly 1..={max}"
        )));
    }
    Ok(max)
}
