//! Strong, rooted and weak colors, matched and invariant partitions.
//!
//! For a color, compare the in-reachability sets of its cells:
//!
//! * **Strong** if they are all equal (the cells share one component);
//! * **Weak** if their intersection is empty;
//! * **Rooted** otherwise.
//!
//! A partition is weak if any color is weak, strong if every color is
//! strong, and rooted otherwise.

use crate::connectivity::{cumulative_in_k, in_neighborhood, CellSet, ReachabilityIndex};
use crate::connectivity::{rdc_decomposition, scc_decomposition};
use crate::network::Network;
use crate::partition::{Partition, PartitionError};
use crate::synchrony::{
    cir_balanced, is_balanced, quotient_network, BalancedCertificate, BalancedLattice,
    SynchronyError,
};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ClassificationError {
    #[error("a color must contain at least one cell")]
    EmptyColor,
    #[error("invalid neighborhood kind '{0}' (expected n, v, vk:<k> or r)")]
    InvalidKind(String),
    #[error("the partition is not invariant under in-reachability; table not asserted")]
    PreconditionFailed(Box<QuotientClassReport>),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Synchrony(#[from] SynchronyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorClass {
    Strong,
    Rooted,
    Weak,
}

impl ColorClass {
    pub fn letter(self) -> char {
        match self {
            ColorClass::Strong => 'S',
            ColorClass::Rooted => 'R',
            ColorClass::Weak => 'W',
        }
    }
}

impl fmt::Display for ColorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorClass::Strong => "strong",
            ColorClass::Rooted => "rooted",
            ColorClass::Weak => "weak",
        })
    }
}

/// Which neighborhood a matched or invariant test looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NeighborhoodKind {
    /// Direct in-neighbors.
    Nin,
    /// The cell and its in-neighbors.
    Vin,
    /// Cells within `k >= 1` steps upstream.
    VinK(usize),
    /// Every upstream cell.
    Rin,
}

impl FromStr for NeighborhoodKind {
    type Err = ClassificationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "n" => Ok(NeighborhoodKind::Nin),
            "v" => Ok(NeighborhoodKind::Vin),
            "r" => Ok(NeighborhoodKind::Rin),
            other => other
                .strip_prefix("vk:")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(NeighborhoodKind::VinK)
                .ok_or_else(|| ClassificationError::InvalidKind(s.to_string())),
        }
    }
}

impl fmt::Display for NeighborhoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborhoodKind::Nin => f.write_str("n"),
            NeighborhoodKind::Vin => f.write_str("v"),
            NeighborhoodKind::VinK(k) => write!(f, "vk:{k}"),
            NeighborhoodKind::Rin => f.write_str("r"),
        }
    }
}

/// Neighborhood sets of every cell for one kind.
fn neighborhoods(net: &Network, kind: NeighborhoodKind) -> Vec<CellSet> {
    let index = matches!(kind, NeighborhoodKind::Rin).then(|| ReachabilityIndex::new(net));
    (0..net.len())
        .map(|c| match kind {
            NeighborhoodKind::Nin => in_neighborhood(net, c).expect("cell in range"),
            NeighborhoodKind::Vin => cumulative_in_k(net, c, 1).expect("cell in range"),
            NeighborhoodKind::VinK(k) => cumulative_in_k(net, c, k).expect("cell in range"),
            NeighborhoodKind::Rin => index.as_ref().expect("built for Rin").reach(c).clone(),
        })
        .collect()
}

fn image(a: &Partition, cells: &CellSet) -> BTreeSet<usize> {
    cells.iter().map(|&c| a.color_of(c)).collect()
}

fn classify_with(index: &ReachabilityIndex, color: &[usize]) -> Result<ColorClass, ClassificationError> {
    let (first, rest) = color.split_first().ok_or(ClassificationError::EmptyColor)?;
    let mut inter = index.reach(*first).clone();
    let mut union = inter.clone();
    for &c in rest {
        let r = index.reach(c);
        inter.retain(|x| r.contains(x));
        union.extend(r.iter().copied());
    }
    Ok(if inter.is_empty() {
        ColorClass::Weak
    } else if inter.len() == union.len() {
        ColorClass::Strong
    } else {
        ColorClass::Rooted
    })
}

pub fn classify_color(net: &Network, color: &[usize]) -> Result<ColorClass, ClassificationError> {
    classify_with(&ReachabilityIndex::new(net), color)
}

/// Class of every color of `a`, in canonical color order.
pub fn classify_colors(net: &Network, a: &Partition) -> Result<Vec<ColorClass>, ClassificationError> {
    check_domain(net, a)?;
    let index = ReachabilityIndex::new(net);
    a.colors()
        .iter()
        .map(|color| classify_with(&index, color))
        .collect()
}

fn combine(classes: impl IntoIterator<Item = ColorClass>) -> ColorClass {
    classes.into_iter().max().unwrap_or(ColorClass::Strong)
}

pub fn classify_partition(net: &Network, a: &Partition) -> Result<ColorClass, ClassificationError> {
    Ok(combine(classify_colors(net, a)?))
}

fn check_domain(net: &Network, a: &Partition) -> Result<(), ClassificationError> {
    if a.num_cells() != net.len() {
        return Err(PartitionError::DomainMismatch {
            left: a.num_cells(),
            right: net.len(),
        }
        .into());
    }
    Ok(())
}

/// Same-color cells see the same set of colors in their neighborhoods.
pub fn is_matched(
    net: &Network,
    a: &Partition,
    kind: NeighborhoodKind,
) -> Result<bool, ClassificationError> {
    check_domain(net, a)?;
    let sets = neighborhoods(net, kind);
    let mut seen: Vec<Option<BTreeSet<usize>>> = vec![None; a.rank()];
    for (c, set) in sets.iter().enumerate() {
        let img = image(a, set);
        match &seen[a.color_of(c)] {
            None => seen[a.color_of(c)] = Some(img),
            Some(prev) if *prev != img => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

/// Taking colors of a neighborhood commutes with passing to the quotient
/// network.
pub fn is_invariant(
    net: &Network,
    bp: &BalancedCertificate,
    kind: NeighborhoodKind,
) -> Result<bool, ClassificationError> {
    let a = bp.partition();
    check_domain(net, a)?;
    let quotient = quotient_network(net, bp);
    let upstairs = neighborhoods(net, kind);
    let downstairs = neighborhoods(&quotient, kind);
    Ok((0..net.len()).all(|c| image(a, &upstairs[c]) == downstairs[a.color_of(c)]))
}

/// Top of the strong balanced partitions.
pub fn top_strong(net: &Network) -> Result<Partition, ClassificationError> {
    let seed = net.type_partition().meet(&scc_decomposition(net))?;
    Ok(cir_balanced(net, &seed)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopNonWeak {
    pub partition: Partition,
    /// Every rooted element of the lattice is matched under in-reachability,
    /// so `partition` is the top of the non-weak elements.
    pub valid: bool,
}

/// Coarsest balanced refinement of the types and root-dependency classes,
/// with the validity flag checked against `lattice`.
pub fn top_nonweak(
    net: &Network,
    lattice: &BalancedLattice,
) -> Result<TopNonWeak, ClassificationError> {
    let seed = net.type_partition().meet(&rdc_decomposition(net))?;
    let partition = cir_balanced(net, &seed)?;
    let mut valid = true;
    for element in lattice.elements() {
        if classify_partition(net, element)? == ColorClass::Rooted
            && !is_matched(net, element, NeighborhoodKind::Rin)?
        {
            valid = false;
            break;
        }
    }
    Ok(TopNonWeak { partition, valid })
}

/// One pair of lattice elements and their join.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinRecord {
    pub left: usize,
    pub right: usize,
    pub join: usize,
    pub classes: (ColorClass, ColorClass, ColorClass),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinTableReport {
    pub element_classes: Vec<ColorClass>,
    pub records: Vec<JoinRecord>,
    /// Rooted elements all matched under in-reachability.
    pub rooted_all_matched: bool,
    pub general_violations: Vec<JoinRecord>,
    pub restricted_violations: Vec<JoinRecord>,
}

impl JoinTableReport {
    /// No violation of the general table, and none of the restricted table
    /// when it applies.
    pub fn consistent(&self) -> bool {
        self.general_violations.is_empty() && self.restricted_violations.is_empty()
    }

    /// Observed outcome classes for each unordered pair of input classes.
    pub fn observed(&self) -> std::collections::BTreeMap<(ColorClass, ColorClass), BTreeSet<ColorClass>> {
        let mut map = std::collections::BTreeMap::<_, BTreeSet<_>>::new();
        for r in &self.records {
            let (a, b, j) = r.classes;
            map.entry((a.min(b), a.max(b))).or_default().insert(j);
        }
        map
    }
}

fn general_allows(a: ColorClass, b: ColorClass, j: ColorClass) -> bool {
    use ColorClass::*;
    match (a.min(b), a.max(b)) {
        (Strong, Strong) => j == Strong,
        (_, Weak) => j == Weak,
        _ => j != Strong,
    }
}

fn restricted_allows(a: ColorClass, b: ColorClass, j: ColorClass) -> bool {
    j == a.max(b)
}

/// Classes of every pair of lattice elements and of their join.
pub fn join_table_report(
    net: &Network,
    lattice: &BalancedLattice,
) -> Result<JoinTableReport, ClassificationError> {
    let classes: Vec<ColorClass> = lattice
        .elements()
        .iter()
        .map(|e| classify_partition(net, e))
        .collect::<Result<_, _>>()?;
    let mut rooted_all_matched = true;
    for (e, &class) in lattice.elements().iter().zip(&classes) {
        if class == ColorClass::Rooted && !is_matched(net, e, NeighborhoodKind::Rin)? {
            rooted_all_matched = false;
        }
    }
    let mut records = Vec::new();
    for i in 0..lattice.len() {
        for j in i..lattice.len() {
            let joined = lattice.elements()[i].join(&lattice.elements()[j])?;
            let k = lattice
                .index_of(&joined)
                .ok_or(SynchronyError::NotInLattice)?;
            records.push(JoinRecord {
                left: i,
                right: j,
                join: k,
                classes: (classes[i], classes[j], classes[k]),
            });
        }
    }
    let general_violations = records
        .iter()
        .filter(|r| !general_allows(r.classes.0, r.classes.1, r.classes.2))
        .cloned()
        .collect();
    let restricted_violations = if rooted_all_matched {
        records
            .iter()
            .filter(|r| !restricted_allows(r.classes.0, r.classes.1, r.classes.2))
            .cloned()
            .collect()
    } else {
        Vec::new()
    };
    Ok(JoinTableReport {
        element_classes: classes,
        records,
        rooted_all_matched,
        general_violations,
        restricted_violations,
    })
}

/// How the class of a lattice element changes in the quotient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientClassRecord {
    pub element: usize,
    pub in_network: ColorClass,
    pub in_quotient: ColorClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientClassReport {
    pub records: Vec<QuotientClassRecord>,
    /// Only filled in when the precondition holds.
    pub violations: Vec<QuotientClassRecord>,
}

/// Allowed class transitions from the network to the quotient.
pub fn quotient_transition_allowed(from: ColorClass, to: ColorClass) -> bool {
    to <= from
}

/// Class of every lattice element coarser than `bp` in the network and in
/// the quotient. Fails with the unchecked report when `bp` is not
/// invariant under in-reachability.
pub fn quotient_class_report(
    net: &Network,
    lattice: &BalancedLattice,
    bp: &BalancedCertificate,
) -> Result<QuotientClassReport, ClassificationError> {
    let a = bp.partition();
    let quotient = quotient_network(net, bp);
    let mut records = Vec::new();
    for (i, b) in lattice.elements().iter().enumerate() {
        if a.refines(b)? {
            records.push(QuotientClassRecord {
                element: i,
                in_network: classify_partition(net, b)?,
                in_quotient: classify_partition(&quotient, &b.quotient_by(a)?)?,
            });
        }
    }
    if !is_invariant(net, bp, NeighborhoodKind::Rin)? {
        return Err(ClassificationError::PreconditionFailed(Box::new(
            QuotientClassReport {
                records,
                violations: Vec::new(),
            },
        )));
    }
    let violations = records
        .iter()
        .filter(|r| !quotient_transition_allowed(r.in_network, r.in_quotient))
        .cloned()
        .collect();
    Ok(QuotientClassReport {
        records,
        violations,
    })
}

/// Convenience: certificate for `a` or an error when it is not balanced.
pub fn certify(net: &Network, a: &Partition) -> Result<BalancedCertificate, ClassificationError> {
    is_balanced(net, a)?.ok_or(ClassificationError::Synchrony(SynchronyError::NotBalanced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::MonoidKind;

    fn from_edges(n: usize, edges: &[(usize, usize, i64)]) -> Network {
        let mut rows = vec![vec![0; n]; n];
        for &(from, to, w) in edges {
            rows[to - 1][from - 1] += w;
        }
        let ids = (1..=n).map(|i| i.to_string()).collect();
        Network::from_parts(ids, vec![1; n], rows, MonoidKind::IntegerAdd).unwrap()
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("n".parse::<NeighborhoodKind>().unwrap(), NeighborhoodKind::Nin);
        assert_eq!("V".parse::<NeighborhoodKind>().unwrap(), NeighborhoodKind::Vin);
        assert_eq!(
            "vk:3".parse::<NeighborhoodKind>().unwrap(),
            NeighborhoodKind::VinK(3)
        );
        assert_eq!("r".parse::<NeighborhoodKind>().unwrap(), NeighborhoodKind::Rin);
        for bad in ["vk:0", "vk:", "x", "vk:-1"] {
            assert!(bad.parse::<NeighborhoodKind>().is_err(), "{bad}");
        }
        assert_eq!(NeighborhoodKind::VinK(2).to_string(), "vk:2");
    }

    #[test]
    fn singleton_and_empty_colors() {
        let net = from_edges(2, &[(1, 2, 1)]);
        assert_eq!(classify_color(&net, &[1]).unwrap(), ColorClass::Strong);
        assert!(matches!(
            classify_color(&net, &[]),
            Err(ClassificationError::EmptyColor)
        ));
        assert_eq!(
            classify_partition(&net, &Partition::trivial(2)).unwrap(),
            ColorClass::Strong
        );
        assert_eq!(
            classify_partition(&net, &Partition::single(2)).unwrap(),
            ColorClass::Rooted
        );
    }

    #[test]
    fn two_isolated_cells_form_a_weak_color() {
        let net = from_edges(2, &[]);
        assert_eq!(classify_color(&net, &[0, 1]).unwrap(), ColorClass::Weak);
    }

    #[test]
    fn single_component_partitions_are_reach_matched() {
        let net = from_edges(3, &[(1, 2, 1), (2, 3, 1), (3, 1, 2)]);
        for labels in [[0, 0, 1], [0, 1, 0], [0, 0, 0]] {
            let a = Partition::from_labels(&labels);
            assert!(is_matched(&net, &a, NeighborhoodKind::Rin).unwrap());
        }
    }

    #[test]
    fn trivial_partition_is_invariant_for_every_kind() {
        let net = from_edges(3, &[(1, 2, 1), (2, 3, -1), (3, 3, 2)]);
        let bp = is_balanced(&net, &Partition::trivial(3)).unwrap().unwrap();
        for kind in [
            NeighborhoodKind::Nin,
            NeighborhoodKind::Vin,
            NeighborhoodKind::VinK(2),
            NeighborhoodKind::Rin,
        ] {
            assert!(is_invariant(&net, &bp, kind).unwrap());
        }
    }

    #[test]
    fn dag_top_strong_is_bottom() {
        let net = from_edges(3, &[(1, 2, 1), (2, 3, 1)]);
        assert!(top_strong(&net).unwrap().is_trivial());
    }

    #[test]
    fn table_rules() {
        use ColorClass::*;
        assert!(general_allows(Strong, Strong, Strong));
        assert!(!general_allows(Strong, Strong, Rooted));
        assert!(general_allows(Rooted, Rooted, Weak));
        assert!(!general_allows(Strong, Rooted, Strong));
        assert!(!general_allows(Weak, Strong, Rooted));
        assert!(restricted_allows(Strong, Rooted, Rooted));
        assert!(!restricted_allows(Rooted, Rooted, Weak));
        assert!(quotient_transition_allowed(Weak, Strong));
        assert!(quotient_transition_allowed(Rooted, Rooted));
        assert!(!quotient_transition_allowed(Strong, Rooted));
        assert!(!quotient_transition_allowed(Rooted, Weak));
    }
}
