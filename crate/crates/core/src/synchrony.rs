//! Balanced partitions and the lattice they form.
//!
//! A partition `A` that refines the cell types is *balanced* when any two
//! cells of the same color receive the same total weight from every color,
//! i.e. `M P = P Q` for some matrix `Q`. `Q` is the adjacency matrix of the
//! quotient network whose cells are the colors of `A`.
//!
//! Balanced partitions contain the trivial partition and are closed under
//! join, so they form a lattice. Its meet is the coarsest balanced
//! refinement ([`cir_balanced`]) of the ordinary meet.

use crate::network::{escape, Network, NetworkError};
use crate::partition::{Partition, PartitionError};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt::Write as _;

/// Default largest network accepted by [`enumerate_balanced`].
pub const DEFAULT_MAX_CELLS: usize = 12;

/// Environment variable overriding [`DEFAULT_MAX_CELLS`].
pub const MAX_CELLS_ENV: &str = "SYNCKIT_MAX_CELLS";

#[derive(Debug, thiserror::Error)]
pub enum SynchronyError {
    #[error("partition mixes cells of different types")]
    NotTypeRefining,
    #[error("partition is not balanced")]
    NotBalanced,
    #[error("partition is not an element of the lattice")]
    NotInLattice,
    #[error("network has {cells} cells, above the enumeration cap of {cap}")]
    TooLarge { cells: usize, cap: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Proof that a partition is balanced, carrying the quotient matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalancedCertificate {
    partition: Partition,
    quotient: Vec<Vec<i64>>,
}

impl BalancedCertificate {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// `Q[k][l]`: total weight a cell of color `k` receives from color `l`.
    pub fn quotient_matrix(&self) -> &[Vec<i64>] {
        &self.quotient
    }
}

fn check_type_refining(net: &Network, a: &Partition) -> Result<(), SynchronyError> {
    if !a.refines(&net.type_partition())? {
        return Err(SynchronyError::NotTypeRefining);
    }
    Ok(())
}

/// Per-cell color sums under an assignment, written into `out`.
fn color_sums(net: &Network, assignment: &[usize], reps: &[usize], cell: usize, out: &mut Vec<i64>) {
    out.clear();
    out.extend(reps.iter().map(|&r| net.monoid(cell, r).zero()));
    for (d, &w) in net.row(cell).iter().enumerate() {
        let k = assignment[d];
        out[k] = net.monoid(cell, reps[k]).add(out[k], w);
    }
}

fn representatives(assignment: &[usize], rank: usize) -> Vec<usize> {
    let mut reps = vec![usize::MAX; rank];
    for (cell, &k) in assignment.iter().enumerate() {
        if reps[k] == usize::MAX {
            reps[k] = cell;
        }
    }
    reps
}

/// Balanced test on a canonical type-refining assignment.
fn assignment_is_balanced(net: &Network, assignment: &[usize], rank: usize) -> bool {
    let reps = representatives(assignment, rank);
    let mut rep_sums = vec![Vec::new(); rank];
    let mut buf = Vec::with_capacity(rank);
    for cell in 0..assignment.len() {
        let k = assignment[cell];
        if reps[k] == cell {
            color_sums(net, assignment, &reps, cell, &mut rep_sums[k]);
        } else {
            color_sums(net, assignment, &reps, cell, &mut buf);
            if buf != rep_sums[k] {
                return false;
            }
        }
    }
    true
}

/// Check `M P = P Q`. Returns the certificate when balanced.
pub fn is_balanced(
    net: &Network,
    a: &Partition,
) -> Result<Option<BalancedCertificate>, SynchronyError> {
    check_type_refining(net, a)?;
    let reps = a.representatives();
    let mut quotient = vec![Vec::new(); a.rank()];
    for (k, &r) in reps.iter().enumerate() {
        color_sums(net, a.assignment(), &reps, r, &mut quotient[k]);
    }
    let mut buf = Vec::new();
    for cell in 0..net.len() {
        color_sums(net, a.assignment(), &reps, cell, &mut buf);
        if buf != quotient[a.color_of(cell)] {
            return Ok(None);
        }
    }
    Ok(Some(BalancedCertificate {
        partition: a.clone(),
        quotient,
    }))
}

/// Display names for the colors of `a`: member ids concatenated when every
/// id is a single character, joined with `+` otherwise.
pub fn color_labels(ids: &[String], a: &Partition) -> Vec<String> {
    let compact = ids.iter().all(|id| id.chars().count() == 1);
    a.colors()
        .iter()
        .map(|color| {
            let parts: Vec<&str> = color.iter().map(|&c| ids[c].as_str()).collect();
            if compact {
                parts.concat()
            } else {
                parts.join("+")
            }
        })
        .collect()
}

/// The quotient network: one cell per color, typed like its members, with
/// adjacency `Q`.
pub fn quotient_network(net: &Network, bp: &BalancedCertificate) -> Network {
    let a = bp.partition();
    let ids = color_labels(net.ids(), a);
    let types = a
        .representatives()
        .iter()
        .map(|&r| net.cell_type(r))
        .collect();
    let adjacency = bp.quotient.iter().flatten().copied().collect();
    net.with_same_types(ids, types, adjacency)
}

/// Coarsest balanced partition finer than `a`.
///
/// Colors are split by the signature (cell type, row color sums) until the
/// number of colors stops growing.
pub fn cir_balanced(net: &Network, a: &Partition) -> Result<Partition, SynchronyError> {
    check_type_refining(net, a)?;
    let mut current = a.clone();
    loop {
        let reps = current.representatives();
        let mut buf = Vec::new();
        let keys: Vec<(usize, u32, Vec<i64>)> = (0..net.len())
            .map(|c| {
                color_sums(net, current.assignment(), &reps, c, &mut buf);
                (current.color_of(c), net.cell_type(c), buf.clone())
            })
            .collect();
        let next = Partition::from_labels(&keys);
        if next.rank() == current.rank() {
            return Ok(current);
        }
        current = next;
    }
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub max_cells: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

impl EnumerationOptions {
    /// Defaults, with the cap taken from `SYNCKIT_MAX_CELLS` when set.
    pub fn from_env() -> Self {
        let max_cells = std::env::var(MAX_CELLS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_CELLS);
        EnumerationOptions { max_cells }
    }
}

fn lattice_order(a: &Partition, b: &Partition) -> Ordering {
    a.rank()
        .cmp(&b.rank())
        .then_with(|| a.assignment().cmp(b.assignment()))
}

/// A finite lattice of partitions of a common cell set.
///
/// Elements are sorted by rank ascending and then by assignment, so the top
/// comes first and the trivial partition last. Cover edges are pairs
/// `(finer, coarser)` of element indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalancedLattice {
    labels: Vec<String>,
    elements: Vec<Partition>,
    cover_edges: Vec<(usize, usize)>,
    top: usize,
    bottom: usize,
}

impl BalancedLattice {
    /// Sort, deduplicate and compute the cover relation. `labels` name the
    /// cells the partitions act on.
    pub fn from_elements(labels: Vec<String>, mut elements: Vec<Partition>) -> Self {
        assert!(!elements.is_empty(), "a lattice has at least one element");
        elements.sort_by(lattice_order);
        elements.dedup();
        let cover_edges = cover_relation(&elements);
        let bottom = elements.len() - 1;
        BalancedLattice {
            labels,
            elements,
            cover_edges,
            top: 0,
            bottom,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> &[Partition] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn cover_edges(&self) -> &[(usize, usize)] {
        &self.cover_edges
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top_partition(&self) -> &Partition {
        &self.elements[self.top]
    }

    pub fn bottom_partition(&self) -> &Partition {
        &self.elements[self.bottom]
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.elements
            .binary_search_by(|e| lattice_order(e, p))
            .ok()
    }

    pub fn contains(&self, p: &Partition) -> bool {
        self.index_of(p).is_some()
    }

    pub fn spec(&self, index: usize) -> String {
        self.elements[index].to_spec(&self.labels)
    }

    /// Whether the join of every pair of elements is again an element.
    pub fn is_join_closed(&self) -> bool {
        self.elements.par_iter().enumerate().all(|(i, a)| {
            self.elements[i..]
                .iter()
                .all(|b| a.join(b).map(|j| self.contains(&j)).unwrap_or(false))
        })
    }

    /// GraphViz Hasse diagram drawn bottom to top. `fills` optionally gives
    /// one fill color per element.
    pub fn to_dot(&self, fills: Option<&[&str]>) -> String {
        let mut out = String::from("digraph lattice {\n  rankdir=BT;\n  node [shape=box];\n");
        for (i, _) in self.elements.iter().enumerate() {
            let label = escape(&self.spec(i));
            let _ = write!(out, "  n{i} [label=\"{label}\"");
            if let Some(fill) = fills.and_then(|f| f.get(i)) {
                let _ = write!(out, ", style=filled, fillcolor=\"{fill}\"");
            }
            out.push_str("];\n");
        }
        for &(lo, hi) in &self.cover_edges {
            let _ = writeln!(out, "  n{lo} -> n{hi};");
        }
        out.push_str("}\n");
        out
    }
}

fn strictly_refines(a: &Partition, b: &Partition) -> bool {
    a.rank() > b.rank() && a.refines(b).unwrap_or(false)
}

/// Transitive reduction of the refinement order on sorted elements.
fn cover_relation(elements: &[Partition]) -> Vec<(usize, usize)> {
    let per_element: Vec<Vec<(usize, usize)>> = elements
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let mut covers: Vec<usize> = Vec::new();
            for j in (0..i).rev() {
                let b = &elements[j];
                if strictly_refines(a, b)
                    && !covers.iter().any(|&c| strictly_refines(&elements[c], b))
                {
                    covers.push(j);
                }
            }
            covers.sort_unstable();
            covers.into_iter().map(|j| (i, j)).collect()
        })
        .collect();
    per_element.into_iter().flatten().collect()
}

struct Enumerator<'a> {
    net: &'a Network,
}

impl Enumerator<'_> {
    /// Depth-first extension of a type-refining restricted growth string.
    fn extend(
        &self,
        assignment: &mut Vec<usize>,
        color_types: &mut Vec<u32>,
        out: &mut Vec<Partition>,
    ) {
        let cell = assignment.len();
        if cell == self.net.len() {
            if assignment_is_balanced(self.net, assignment, color_types.len()) {
                out.push(Partition::from_labels(assignment));
            }
            return;
        }
        let t = self.net.cell_type(cell);
        for k in 0..=color_types.len() {
            let fresh = k == color_types.len();
            if !fresh && color_types[k] != t {
                continue;
            }
            if fresh {
                color_types.push(t);
            }
            assignment.push(k);
            self.extend(assignment, color_types, out);
            assignment.pop();
            if fresh {
                color_types.pop();
            }
        }
    }

    fn prefixes(&self, depth: usize) -> Vec<(Vec<usize>, Vec<u32>)> {
        let mut level = vec![(Vec::new(), Vec::new())];
        for cell in 0..depth {
            let t = self.net.cell_type(cell);
            let mut next = Vec::new();
            for (assignment, color_types) in level {
                for k in 0..=color_types.len() {
                    let fresh = k == color_types.len();
                    if !fresh && color_types[k] != t {
                        continue;
                    }
                    let mut a = assignment.clone();
                    let mut ct: Vec<u32> = color_types.clone();
                    if fresh {
                        ct.push(t);
                    }
                    a.push(k);
                    next.push((a, ct));
                }
            }
            level = next;
        }
        level
    }
}

/// All balanced partitions, using the cap from [`EnumerationOptions::from_env`].
pub fn enumerate_balanced(net: &Network) -> Result<BalancedLattice, SynchronyError> {
    enumerate_balanced_with(net, EnumerationOptions::from_env())
}

pub fn enumerate_balanced_with(
    net: &Network,
    options: EnumerationOptions,
) -> Result<BalancedLattice, SynchronyError> {
    if net.len() > options.max_cells {
        return Err(SynchronyError::TooLarge {
            cells: net.len(),
            cap: options.max_cells,
        });
    }
    let enumerator = Enumerator { net };
    let prefixes = enumerator.prefixes(net.len().min(5));
    let elements: Vec<Partition> = prefixes
        .into_par_iter()
        .flat_map_iter(|(mut assignment, mut color_types)| {
            let mut out = Vec::new();
            enumerator.extend(&mut assignment, &mut color_types, &mut out);
            out
        })
        .collect();
    Ok(BalancedLattice::from_elements(net.ids().to_vec(), elements))
}

/// Meet inside the balanced lattice.
pub fn lattice_meet(
    net: &Network,
    b1: &Partition,
    b2: &Partition,
) -> Result<Partition, SynchronyError> {
    for b in [b1, b2] {
        if is_balanced(net, b)?.is_none() {
            return Err(SynchronyError::NotBalanced);
        }
    }
    cir_balanced(net, &b1.meet(b2)?)
}

/// `{B / a : B in lattice, a <= B}`, a lattice on the colors of `a`.
pub fn lattice_quotient(
    lattice: &BalancedLattice,
    a: &Partition,
) -> Result<BalancedLattice, SynchronyError> {
    if !lattice.contains(a) {
        return Err(SynchronyError::NotInLattice);
    }
    let mut elements = Vec::new();
    for b in lattice.elements() {
        if a.refines(b)? {
            elements.push(b.quotient_by(a)?);
        }
    }
    Ok(BalancedLattice::from_elements(
        color_labels(lattice.labels(), a),
        elements,
    ))
}

/// Same-color cells agree on all color sums except possibly their own
/// color's.
pub fn is_exo_balanced(net: &Network, a: &Partition) -> Result<bool, SynchronyError> {
    check_type_refining(net, a)?;
    let reps = a.representatives();
    let mut rep_sums = vec![Vec::new(); a.rank()];
    for (k, &r) in reps.iter().enumerate() {
        color_sums(net, a.assignment(), &reps, r, &mut rep_sums[k]);
    }
    let mut buf = Vec::new();
    for cell in 0..net.len() {
        let k = a.color_of(cell);
        color_sums(net, a.assignment(), &reps, cell, &mut buf);
        let differs = buf
            .iter()
            .zip(&rep_sums[k])
            .enumerate()
            .any(|(l, (x, y))| l != k && x != y);
        if differs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::MonoidKind;

    const THREE_CELL: &str = include_str!("../fixtures/three_cell_two_type.json");

    fn three_cell() -> Network {
        Network::from_json(THREE_CELL).unwrap()
    }

    fn spec(net: &Network, s: &str) -> Partition {
        Partition::parse_spec(s, net.ids()).unwrap()
    }

    fn from_rows(rows: Vec<Vec<i64>>, types: Vec<u32>) -> Network {
        let ids = (1..=rows.len()).map(|i| i.to_string()).collect();
        Network::from_parts(ids, types, rows, MonoidKind::IntegerAdd).unwrap()
    }

    #[test]
    fn three_cell_certificate() {
        let net = three_cell();
        let bp = is_balanced(&net, &spec(&net, "12/3")).unwrap().unwrap();
        assert_eq!(bp.quotient_matrix(), &[vec![1, 1], vec![2, 1]]);
        let bottom = is_balanced(&net, &Partition::trivial(3)).unwrap().unwrap();
        assert_eq!(bottom.quotient_matrix(), net.adjacency_rows().as_slice());
        assert!(matches!(
            is_balanced(&net, &spec(&net, "13/2")),
            Err(SynchronyError::NotTypeRefining)
        ));
    }

    #[test]
    fn quotient_of_three_cell_network() {
        let net = three_cell();
        let bp = is_balanced(&net, &spec(&net, "12/3")).unwrap().unwrap();
        let q = quotient_network(&net, &bp);
        assert_eq!(q.ids(), &["12".to_string(), "3".to_string()]);
        assert_eq!(q.types(), &[1, 2]);
        assert_eq!(q.adjacency_rows(), vec![vec![1, 1], vec![2, 1]]);
        let trivial = is_balanced(&net, &Partition::trivial(3)).unwrap().unwrap();
        assert_eq!(quotient_network(&net, &trivial), net);
    }

    #[test]
    fn cir_examples() {
        let net = three_cell();
        assert_eq!(
            cir_balanced(&net, &net.type_partition()).unwrap(),
            spec(&net, "12/3")
        );
        assert_eq!(
            cir_balanced(&net, &Partition::trivial(3)).unwrap(),
            Partition::trivial(3)
        );
        let chain = from_rows(
            vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]],
            vec![1, 1, 1],
        );
        let all = Partition::single(3);
        let refined = cir_balanced(&chain, &all).unwrap();
        assert!(refined.rank() > all.rank());
        assert!(is_balanced(&chain, &refined).unwrap().is_some());
    }

    #[test]
    fn lattice_of_three_cell_network() {
        let net = three_cell();
        let lattice = enumerate_balanced_with(&net, EnumerationOptions::default()).unwrap();
        assert_eq!(lattice.len(), 2);
        assert_eq!(lattice.top_partition(), &spec(&net, "12/3"));
        assert!(lattice.bottom_partition().is_trivial());
        assert_eq!(lattice.cover_edges(), &[(1, 0)]);
        assert!(lattice.is_join_closed());
        let dot = lattice.to_dot(None);
        assert!(dot.contains("n1 -> n0"));
    }

    #[test]
    fn distinct_types_give_only_bottom() {
        let net = from_rows(vec![vec![0, 1], vec![1, 0]], vec![1, 2]);
        let lattice = enumerate_balanced_with(&net, EnumerationOptions::default()).unwrap();
        assert_eq!(lattice.len(), 1);
        assert_eq!(lattice.top(), lattice.bottom());
    }

    #[test]
    fn enumeration_cap() {
        let net = three_cell();
        assert!(matches!(
            enumerate_balanced_with(&net, EnumerationOptions { max_cells: 2 }),
            Err(SynchronyError::TooLarge { cells: 3, cap: 2 })
        ));
    }

    #[test]
    fn meet_examples() {
        let net = three_cell();
        let top = spec(&net, "12/3");
        let bottom = Partition::trivial(3);
        assert_eq!(lattice_meet(&net, &top, &top).unwrap(), top);
        assert_eq!(lattice_meet(&net, &bottom, &top).unwrap(), bottom);
        let chain = from_rows(vec![vec![0, 0], vec![1, 0]], vec![1, 1]);
        assert!(matches!(
            lattice_meet(&chain, &Partition::single(2), &Partition::trivial(2)),
            Err(SynchronyError::NotBalanced)
        ));
    }

    #[test]
    fn quotient_lattice_by_bottom_and_top() {
        let net = three_cell();
        let lattice = enumerate_balanced_with(&net, EnumerationOptions::default()).unwrap();
        let by_bottom = lattice_quotient(&lattice, lattice.bottom_partition()).unwrap();
        assert_eq!(by_bottom.elements(), lattice.elements());
        let by_top = lattice_quotient(&lattice, lattice.top_partition()).unwrap();
        assert_eq!(by_top.len(), 1);
        assert!(matches!(
            lattice_quotient(&lattice, &Partition::single(3)),
            Err(SynchronyError::NotInLattice)
        ));
    }

    #[test]
    fn exo_examples() {
        let net = three_cell();
        assert!(is_exo_balanced(&net, &spec(&net, "12/3")).unwrap());
        let pair = from_rows(vec![vec![0, 0], vec![1, 0]], vec![1, 1]);
        assert!(is_exo_balanced(&pair, &Partition::single(2)).unwrap());
        assert!(is_balanced(&pair, &Partition::single(2)).unwrap().is_none());
        let unequal = from_rows(
            vec![vec![0, 0, 1], vec![0, 0, 0], vec![0, 0, 0]],
            vec![1, 1, 1],
        );
        let a = Partition::from_labels(&[0, 0, 1]);
        assert!(!is_exo_balanced(&unequal, &a).unwrap());
    }
}
