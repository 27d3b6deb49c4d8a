//! Partitions of a finite cell set.
//!
//! A [`Partition`] is stored as an assignment `cell -> color` in canonical
//! form: colors are numbered `0..rank` in order of first occurrence when the
//! cells are scanned in index order. Two partitions are therefore equal
//! exactly when their assignments are equal.
//!
//! The refinement order is written `A <= B` ("A is finer than B"): cells that
//! share a color in `A` share a color in `B`.

use serde::Serialize;
use std::collections::HashMap;
use std::hash::Hash;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("partitions are over different cell sets ({left} vs {right} cells)")]
    DomainMismatch { left: usize, right: usize },
    #[error("the first partition does not refine the second")]
    NotARefinement,
    #[error("unknown cell '{0}' in partition spec")]
    UnknownCell(String),
    #[error("cell '{0}' appears more than once in partition spec")]
    DuplicateCell(String),
}

/// A surjective map from cells to colors, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Partition {
    assignment: Vec<usize>,
    rank: usize,
}

impl Partition {
    /// Build from arbitrary per-cell labels; equal labels mean equal colors.
    pub fn from_labels<T: Eq + Hash>(labels: &[T]) -> Self {
        let mut seen: HashMap<&T, usize> = HashMap::with_capacity(labels.len());
        let mut assignment = Vec::with_capacity(labels.len());
        for label in labels {
            let next = seen.len();
            assignment.push(*seen.entry(label).or_insert(next));
        }
        let rank = seen.len();
        Partition { assignment, rank }
    }

    /// Build from a list of colors, each a list of cell indices. Cells not
    /// mentioned become singletons.
    pub fn from_colors(num_cells: usize, colors: &[Vec<usize>]) -> Self {
        let mut labels: Vec<usize> = (0..num_cells).map(|c| colors.len() + c).collect();
        for (k, color) in colors.iter().enumerate() {
            for &c in color {
                labels[c] = k;
            }
        }
        Partition::from_labels(&labels)
    }

    /// Every cell in its own color (the finest partition).
    pub fn trivial(num_cells: usize) -> Self {
        Partition {
            assignment: (0..num_cells).collect(),
            rank: num_cells,
        }
    }

    /// All cells in one color (the coarsest partition).
    pub fn single(num_cells: usize) -> Self {
        Partition {
            assignment: vec![0; num_cells],
            rank: usize::from(num_cells > 0),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.assignment.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn color_of(&self, cell: usize) -> usize {
        self.assignment[cell]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == self.assignment.len()
    }

    /// Cells of each color, colors in canonical order, cells ascending.
    pub fn colors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.rank];
        for (cell, &k) in self.assignment.iter().enumerate() {
            out[k].push(cell);
        }
        out
    }

    /// One representative cell per color (the first cell of each color).
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.rank];
        for (cell, &k) in self.assignment.iter().enumerate() {
            if reps[k] == usize::MAX {
                reps[k] = cell;
            }
        }
        reps
    }

    fn check_domain(&self, other: &Partition) -> Result<(), PartitionError> {
        if self.num_cells() != other.num_cells() {
            return Err(PartitionError::DomainMismatch {
                left: self.num_cells(),
                right: other.num_cells(),
            });
        }
        Ok(())
    }

    /// `self <= other`: every color of `self` lies inside a color of `other`.
    pub fn refines(&self, other: &Partition) -> Result<bool, PartitionError> {
        self.check_domain(other)?;
        let mut image = vec![usize::MAX; self.rank];
        for (&a, &b) in self.assignment.iter().zip(&other.assignment) {
            if image[a] == usize::MAX {
                image[a] = b;
            } else if image[a] != b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Least upper bound: the finest partition coarser than both.
    pub fn join(&self, other: &Partition) -> Result<Partition, PartitionError> {
        self.check_domain(other)?;
        let n = self.num_cells();
        let mut uf = UnionFind::new(n);
        let mut first_a = vec![usize::MAX; self.rank];
        let mut first_b = vec![usize::MAX; other.rank];
        for cell in 0..n {
            for (first, color) in [
                (&mut first_a, self.assignment[cell]),
                (&mut first_b, other.assignment[cell]),
            ] {
                if first[color] == usize::MAX {
                    first[color] = cell;
                } else {
                    uf.union(first[color], cell);
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|c| uf.find(c)).collect();
        Ok(Partition::from_labels(&roots))
    }

    /// Greatest lower bound: colors are the nonempty pairwise intersections.
    pub fn meet(&self, other: &Partition) -> Result<Partition, PartitionError> {
        self.check_domain(other)?;
        let pairs: Vec<(usize, usize)> = self
            .assignment
            .iter()
            .copied()
            .zip(other.assignment.iter().copied())
            .collect();
        Ok(Partition::from_labels(&pairs))
    }

    /// The quotient partition `self / finer`, a partition of the colors of
    /// `finer` that sends each of them to its color in `self`.
    pub fn quotient_by(&self, finer: &Partition) -> Result<Partition, PartitionError> {
        if !finer.refines(self)? {
            return Err(PartitionError::NotARefinement);
        }
        let mut labels = vec![0; finer.rank];
        for (cell, &k) in finer.assignment.iter().enumerate() {
            labels[k] = self.assignment[cell];
        }
        Ok(Partition::from_labels(&labels))
    }

    /// Compose a partition of the colors of `inner` with `inner` itself,
    /// giving a partition of the original cells. Inverse of [`quotient_by`].
    ///
    /// [`quotient_by`]: Partition::quotient_by
    pub fn lift_through(&self, inner: &Partition) -> Result<Partition, PartitionError> {
        if self.num_cells() != inner.rank() {
            return Err(PartitionError::DomainMismatch {
                left: self.num_cells(),
                right: inner.rank(),
            });
        }
        let labels: Vec<usize> = inner
            .assignment
            .iter()
            .map(|&k| self.assignment[k])
            .collect();
        Ok(Partition::from_labels(&labels))
    }

    /// Characteristic 0/1 matrix, one row per cell and one column per color.
    pub fn matrix(&self) -> PartitionMatrix {
        let mut data = vec![0u8; self.num_cells() * self.rank];
        for (cell, &k) in self.assignment.iter().enumerate() {
            data[cell * self.rank + k] = 1;
        }
        PartitionMatrix {
            rows: self.num_cells(),
            cols: self.rank,
            data,
        }
    }

    /// Parse the compact text form, e.g. `"12/45"` or `"a,b/c,d"`.
    ///
    /// Colors are separated by `/`, cells inside a color by `,`. A token
    /// without commas that is not itself a cell id is read one character per
    /// cell. Cells that are not mentioned are singletons. The empty string is
    /// the trivial partition.
    pub fn parse_spec(spec: &str, ids: &[String]) -> Result<Partition, PartitionError> {
        let index: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| PartitionError::UnknownCell(name.to_string()))
        };
        let mut colors: Vec<Vec<usize>> = Vec::new();
        let mut used = vec![false; ids.len()];
        for group in spec.split('/') {
            let group = group.trim();
            if group.is_empty() {
                continue;
            }
            let mut members = Vec::new();
            if group.contains(',') {
                for token in group.split(',') {
                    let token = token.trim();
                    if !token.is_empty() {
                        members.push(lookup(token)?);
                    }
                }
            } else if let Some(&c) = index.get(group) {
                members.push(c);
            } else {
                for ch in group.chars() {
                    members.push(lookup(&ch.to_string())?);
                }
            }
            for &c in &members {
                if std::mem::replace(&mut used[c], true) {
                    return Err(PartitionError::DuplicateCell(ids[c].clone()));
                }
            }
            colors.push(members);
        }
        Ok(Partition::from_colors(ids.len(), &colors))
    }

    /// Render in the compact text form with every color listed, including
    /// singletons. Cells are concatenated when every id is one character and
    /// comma-separated otherwise.
    pub fn to_spec(&self, ids: &[String]) -> String {
        let compact = ids.iter().all(|id| id.chars().count() == 1);
        let sep = if compact { "" } else { "," };
        self.colors()
            .iter()
            .map(|color| {
                color
                    .iter()
                    .map(|&c| ids[c].as_str())
                    .collect::<Vec<_>>()
                    .join(sep)
            })
            .collect::<Vec<_>>()
            .join("/")
    }
}

/// Characteristic matrix of a partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl PartitionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.data.chunks(self.cols.max(1)).map(|r| r.to_vec()).collect()
    }

    /// Integer matrix product; `None` on a dimension mismatch.
    pub fn multiply(&self, rhs: &PartitionMatrix) -> Option<Vec<Vec<u32>>> {
        if self.cols != rhs.rows {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|i| {
                    (0..rhs.cols)
                        .map(|j| {
                            (0..self.cols)
                                .map(|k| self.get(i, k) as u32 * rhs.get(k, j) as u32)
                                .sum()
                        })
                        .collect()
                })
                .collect(),
        )
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(names: &str) -> Vec<String> {
        names.chars().map(|c| c.to_string()).collect()
    }

    fn p(spec: &str, names: &str) -> Partition {
        Partition::parse_spec(spec, &ids(names)).unwrap()
    }

    #[test]
    fn canonical_numbering_by_first_occurrence() {
        let a = Partition::from_labels(&[7, 3, 7, 9]);
        assert_eq!(a.assignment(), &[0, 1, 0, 2]);
        assert_eq!(a.rank(), 3);
        assert_eq!(a, Partition::from_labels(&["x", "y", "x", "z"]));
    }

    #[test]
    fn refinement_examples() {
        let a = p("ab/c/de", "abcde");
        let b = p("ab/cde", "abcde");
        assert!(a.refines(&b).unwrap());
        assert!(!b.refines(&a).unwrap());
        assert!(Partition::trivial(5).refines(&b).unwrap());
        assert!(b.refines(&Partition::single(5)).unwrap());
    }

    #[test]
    fn join_and_meet_examples() {
        let a = p("12/34", "1234");
        let b = p("1/23/4", "1234");
        assert_eq!(a.join(&b).unwrap(), Partition::single(4));
        assert_eq!(a.meet(&b).unwrap(), Partition::trivial(4));
        assert_eq!(a.join(&Partition::trivial(4)).unwrap(), a);
        assert_eq!(a.join(&a).unwrap(), a);
        assert_eq!(a.meet(&a).unwrap(), a);
        assert_eq!(a.meet(&Partition::trivial(4)).unwrap(), Partition::trivial(4));
    }

    #[test]
    fn quotient_partition_example() {
        let a = p("ab/c/de", "abcde");
        let b = p("ab/cde", "abcde");
        let q = b.quotient_by(&a).unwrap();
        assert_eq!(q.rank(), 2);
        assert_eq!(q.assignment(), &[0, 1, 1]);
        assert_eq!(a.quotient_by(&a).unwrap(), Partition::trivial(3));
        assert_eq!(
            Partition::single(5).quotient_by(&a).unwrap(),
            Partition::single(3)
        );
        assert_eq!(a.quotient_by(&b), Err(PartitionError::NotARefinement));
        assert_eq!(q.lift_through(&a).unwrap(), b);
    }

    #[test]
    fn partition_matrix_examples() {
        let a = p("ab/c/de", "abcde");
        assert_eq!(
            a.matrix().to_rows(),
            vec![
                vec![1, 0, 0],
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![0, 0, 1]
            ]
        );
        let id = Partition::trivial(3).matrix();
        assert_eq!(id.to_rows(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(Partition::single(3).matrix().to_rows(), vec![vec![1]; 3]);
    }

    #[test]
    fn spec_parsing_and_rendering() {
        let names = ids("12345");
        let a = Partition::parse_spec("12/45", &names).unwrap();
        assert_eq!(a.assignment(), &[0, 0, 1, 2, 2]);
        assert_eq!(a.to_spec(&names), "12/3/45");
        assert_eq!(Partition::parse_spec("", &names).unwrap(), Partition::trivial(5));
        assert_eq!(Partition::parse_spec("1,2/4,5", &names).unwrap(), a);
        assert!(matches!(
            Partition::parse_spec("16", &names),
            Err(PartitionError::UnknownCell(_))
        ));
        assert!(matches!(
            Partition::parse_spec("12/23", &names),
            Err(PartitionError::DuplicateCell(_))
        ));
        let long: Vec<String> = vec!["a1".into(), "b2".into(), "c3".into()];
        let b = Partition::parse_spec("a1,c3", &long).unwrap();
        assert_eq!(b.to_spec(&long), "a1,c3/b2");
    }

    #[test]
    fn whole_token_ids_take_precedence() {
        let names: Vec<String> = vec!["12".into(), "3".into(), "4".into()];
        let a = Partition::parse_spec("12/34", &names).unwrap();
        assert_eq!(a.assignment(), &[0, 1, 1]);
    }

    #[test]
    fn domain_mismatch_is_an_error() {
        let a = Partition::trivial(3);
        let b = Partition::trivial(4);
        assert!(matches!(a.join(&b), Err(PartitionError::DomainMismatch { .. })));
        assert!(a.meet(&b).is_err());
        assert!(a.refines(&b).is_err());
    }

    fn partition_strategy(max: usize) -> impl Strategy<Value = Partition> {
        (1..=max).prop_flat_map(|n| {
            proptest::collection::vec(0..n, n).prop_map(|labels| Partition::from_labels(&labels))
        })
    }

    fn pair_strategy(max: usize) -> impl Strategy<Value = (Partition, Partition)> {
        (1..=max).prop_flat_map(|n| {
            (
                proptest::collection::vec(0..n, n),
                proptest::collection::vec(0..n, n),
            )
                .prop_map(|(a, b)| (Partition::from_labels(&a), Partition::from_labels(&b)))
        })
    }

    proptest! {
        #[test]
        fn canonical_form_is_surjective(a in partition_strategy(10)) {
            let mut seen = vec![false; a.rank()];
            let mut next = 0;
            for &k in a.assignment() {
                prop_assert!(k <= next);
                if k == next { next += 1; }
                seen[k] = true;
            }
            prop_assert!(seen.into_iter().all(|s| s));
        }

        #[test]
        fn join_meet_bounds((a, b) in pair_strategy(8)) {
            let j = a.join(&b).unwrap();
            let m = a.meet(&b).unwrap();
            prop_assert!(a.refines(&j).unwrap() && b.refines(&j).unwrap());
            prop_assert!(m.refines(&a).unwrap() && m.refines(&b).unwrap());
            prop_assert_eq!(a.join(&a.meet(&b).unwrap()).unwrap(), a.clone());
            prop_assert_eq!(a.meet(&a.join(&b).unwrap()).unwrap(), a.clone());
            prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
            prop_assert_eq!(a.meet(&b).unwrap(), b.meet(&a).unwrap());
        }

        #[test]
        fn matrix_composition((a, b) in pair_strategy(8)) {
            let fine = a.meet(&b).unwrap();
            let q = a.quotient_by(&fine).unwrap();
            prop_assert_eq!(q.rank(), a.rank());
            let product = fine.matrix().multiply(&q.matrix()).unwrap();
            let expected: Vec<Vec<u32>> = a
                .matrix()
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(u32::from).collect())
                .collect();
            prop_assert_eq!(product, expected);
        }

        #[test]
        fn spec_round_trip(a in partition_strategy(9)) {
            let names: Vec<String> = (1..=a.num_cells()).map(|i| i.to_string()).collect();
            let text = a.to_spec(&names);
            prop_assert_eq!(Partition::parse_spec(&text, &names).unwrap(), a);
        }
    }
}
