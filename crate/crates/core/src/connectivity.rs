//! Neighborhoods, reachability and strongly connected structure.
//!
//! An edge `d -> c` exists when the folded weight `weight(c, d)` is not the
//! monoid identity, so weights that cancel remove connectivity.
//!
//! * `N(c)`: cells with an edge into `c`.
//! * `V_k(c)`: cells with a directed path of at most `k` edges ending at `c`.
//! * `R(c)`: every cell with a path to `c`, including `c` itself.

use crate::network::Network;
use crate::partition::Partition;
use serde::Serialize;
use std::collections::{BTreeSet, VecDeque};

pub type CellSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConnectivityError {
    #[error("cell index {0} is out of range")]
    UnknownCell(usize),
}

fn check_cell(net: &Network, c: usize) -> Result<(), ConnectivityError> {
    if c >= net.len() {
        Err(ConnectivityError::UnknownCell(c))
    } else {
        Ok(())
    }
}

/// Senders with a nonzero edge into `c`.
pub fn in_neighborhood(net: &Network, c: usize) -> Result<CellSet, ConnectivityError> {
    check_cell(net, c)?;
    Ok((0..net.len()).filter(|&d| net.has_edge(c, d)).collect())
}

/// Cells that reach `c` in at most `k` steps.
pub fn cumulative_in_k(net: &Network, c: usize, k: usize) -> Result<CellSet, ConnectivityError> {
    check_cell(net, c)?;
    let mut set = CellSet::from([c]);
    let mut frontier = vec![c];
    for _ in 0..k {
        let mut next = Vec::new();
        for &x in &frontier {
            for d in 0..net.len() {
                if net.has_edge(x, d) && set.insert(d) {
                    next.push(d);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(set)
}

/// Every cell that reaches `c`, found by a reverse breadth-first search.
pub fn in_reachability(net: &Network, c: usize) -> Result<CellSet, ConnectivityError> {
    check_cell(net, c)?;
    let mut set = CellSet::from([c]);
    let mut queue = VecDeque::from([c]);
    while let Some(x) = queue.pop_front() {
        for d in 0..net.len() {
            if net.has_edge(x, d) && set.insert(d) {
                queue.push_back(d);
            }
        }
    }
    Ok(set)
}

fn out_lists(net: &Network) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); net.len()];
    for c in 0..net.len() {
        for (d, senders) in out.iter_mut().enumerate() {
            if net.has_edge(c, d) {
                senders.push(c);
            }
        }
    }
    out
}

/// Tarjan's algorithm, run with an explicit stack.
struct Tarjan<'a> {
    succ: &'a [Vec<usize>],
    index: Vec<usize>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next_index: usize,
    component: Vec<usize>,
    components: usize,
}

impl<'a> Tarjan<'a> {
    const UNVISITED: usize = usize::MAX;

    fn run(succ: &'a [Vec<usize>]) -> Vec<usize> {
        let n = succ.len();
        let mut t = Tarjan {
            succ,
            index: vec![Self::UNVISITED; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next_index: 0,
            component: vec![0; n],
            components: 0,
        };
        for v in 0..n {
            if t.index[v] == Self::UNVISITED {
                t.strongconnect(v);
            }
        }
        t.component
    }

    fn visit(&mut self, v: usize) {
        self.index[v] = self.next_index;
        self.low[v] = self.next_index;
        self.next_index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
    }

    fn strongconnect(&mut self, root: usize) {
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        self.visit(root);
        while let Some(&(v, pos)) = call.last() {
            if let Some(&w) = self.succ[v].get(pos) {
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if self.index[w] == Self::UNVISITED {
                    self.visit(w);
                    call.push((w, 0));
                } else if self.on_stack[w] {
                    self.low[v] = self.low[v].min(self.index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                self.low[parent] = self.low[parent].min(self.low[v]);
            }
            if self.low[v] == self.index[v] {
                loop {
                    let w = self.stack.pop().expect("component members are on the stack");
                    self.on_stack[w] = false;
                    self.component[w] = self.components;
                    if w == v {
                        break;
                    }
                }
                self.components += 1;
            }
        }
    }
}

/// Strongly connected components as a canonical partition.
pub fn scc_decomposition(net: &Network) -> Partition {
    Partition::from_labels(&Tarjan::run(&out_lists(net)))
}

/// The acyclic graph of strongly connected components. Component ids are
/// the colors of `scc_partition`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condensation {
    pub scc_partition: Partition,
    pub dag_edges: BTreeSet<(usize, usize)>,
    pub roots: BTreeSet<usize>,
}

impl Condensation {
    pub fn num_components(&self) -> usize {
        self.scc_partition.rank()
    }

    /// Component ids in a topological order (sources first), ties broken by
    /// smallest id.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.num_components();
        let mut indegree = vec![0usize; n];
        for &(_, to) in &self.dag_edges {
            indegree[to] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&s| indegree[s] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(s) = ready.pop_first() {
            order.push(s);
            for &(from, to) in self.dag_edges.range((s, 0)..(s + 1, 0)) {
                debug_assert_eq!(from, s);
                indegree[to] -= 1;
                if indegree[to] == 0 {
                    ready.insert(to);
                }
            }
        }
        order
    }
}

pub fn condensation(net: &Network) -> Condensation {
    let scc = scc_decomposition(net);
    let mut dag_edges = BTreeSet::new();
    for c in 0..net.len() {
        for d in 0..net.len() {
            let (from, to) = (scc.color_of(d), scc.color_of(c));
            if from != to && net.has_edge(c, d) {
                dag_edges.insert((from, to));
            }
        }
    }
    let targets: BTreeSet<usize> = dag_edges.iter().map(|&(_, to)| to).collect();
    let roots = (0..scc.rank()).filter(|s| !targets.contains(s)).collect();
    Condensation {
        scc_partition: scc,
        dag_edges,
        roots,
    }
}

/// In-reachability sets of every cell, computed once per component.
#[derive(Debug, Clone)]
pub struct ReachabilityIndex {
    condensation: Condensation,
    per_component: Vec<CellSet>,
}

impl ReachabilityIndex {
    pub fn new(net: &Network) -> Self {
        let condensation = condensation(net);
        let members = condensation.scc_partition.colors();
        let mut per_component: Vec<CellSet> = vec![CellSet::new(); members.len()];
        for s in condensation.topological_order() {
            let mut set: CellSet = members[s].iter().copied().collect();
            for &(from, _) in condensation.dag_edges.iter().filter(|e| e.1 == s) {
                set.extend(per_component[from].iter().copied());
            }
            per_component[s] = set;
        }
        ReachabilityIndex {
            condensation,
            per_component,
        }
    }

    pub fn condensation(&self) -> &Condensation {
        &self.condensation
    }

    pub fn reach(&self, c: usize) -> &CellSet {
        &self.per_component[self.condensation.scc_partition.color_of(c)]
    }

    /// The root components whose cells reach `c`.
    pub fn roots_of(&self, c: usize) -> BTreeSet<usize> {
        let scc = &self.condensation.scc_partition;
        self.reach(c)
            .iter()
            .map(|&d| scc.color_of(d))
            .filter(|s| self.condensation.roots.contains(s))
            .collect()
    }
}

/// Cells grouped by the exact set of roots that reach them.
pub fn rdc_decomposition(net: &Network) -> Partition {
    let index = ReachabilityIndex::new(net);
    let keys: Vec<BTreeSet<usize>> = (0..net.len()).map(|c| index.roots_of(c)).collect();
    Partition::from_labels(&keys)
}
