//! Fixture loading, brute-force oracles and random networks shared by the
//! integration tests. The oracles work straight from the definitions and
//! deliberately share no code with the library algorithms.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::path::PathBuf;
use synckit::monoid::MonoidKind;
use synckit::network::Network;
use synckit::partition::Partition;

pub const FIXTURES: &[&str] = &[
    "three_cell_two_type",
    "chain4",
    "four_scc",
    "cancellation",
    "rooted_lattice",
    "nonlattice_nonweak",
    "quotient_classes",
    "v_not_n_matched",
    "r_not_v_matched",
    "v_not_n_invariant",
    "r_not_v_invariant",
    "spurious_unmatched",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Network {
    Network::load(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn all_fixtures() -> Vec<(&'static str, Network)> {
    FIXTURES.iter().map(|&n| (n, fixture(n))).collect()
}

pub fn spec(net: &Network, s: &str) -> Partition {
    Partition::parse_spec(s, net.ids()).unwrap_or_else(|e| panic!("partition {s}: {e}"))
}

/// A network from 1-based `(from, to, weight)` edges with ids "1".."n".
pub fn from_edges(types: &[u32], edges: &[(usize, usize, i64)]) -> Network {
    let n = types.len();
    let mut rows = vec![vec![0; n]; n];
    for &(from, to, w) in edges {
        rows[to - 1][from - 1] += w;
    }
    from_rows(rows, types.to_vec())
}

pub fn from_rows(rows: Vec<Vec<i64>>, types: Vec<u32>) -> Network {
    let ids = (1..=rows.len()).map(|i| i.to_string()).collect();
    Network::from_parts(ids, types, rows, MonoidKind::IntegerAdd).unwrap()
}

/// Random integer network with `1..=max_cells` cells, up to `max_types`
/// types (all used, numbered contiguously) and weights drawn from `weights`.
/// Each entry is zero with probability `sparsity` before drawing.
pub fn random_network(
    rng: &mut ChaCha8Rng,
    max_cells: usize,
    max_types: u32,
    weights: &[i64],
    sparsity: f64,
) -> Network {
    let n = rng.gen_range(1..=max_cells);
    let num_types = max_types.min(n as u32);
    let mut types: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=num_types)).collect();
    for t in 1..=num_types {
        if !types.contains(&t) {
            let c = rng.gen_range(0..n);
            types[c] = t;
        }
    }
    let mut used: Vec<u32> = types.clone();
    used.sort_unstable();
    used.dedup();
    for t in types.iter_mut() {
        *t = used.iter().position(|u| u == t).unwrap() as u32 + 1;
    }
    let rows = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.gen_bool(sparsity) {
                        0
                    } else {
                        weights[rng.gen_range(0..weights.len())]
                    }
                })
                .collect()
        })
        .collect();
    from_rows(rows, types)
}

/// Random network with a planted balanced partition: a random
/// type-refining partition is drawn, one row is sampled per color, and the
/// other cells of the color get that row shuffled within each color block.
pub fn planted_network(
    rng: &mut ChaCha8Rng,
    max_cells: usize,
    max_types: u32,
    weights: &[i64],
    sparsity: f64,
) -> Network {
    use rand::seq::SliceRandom;
    let base = random_network(rng, max_cells, max_types, weights, sparsity);
    let n = base.len();
    let k = rng.gen_range(1..=3);
    let labels: Vec<usize> = (0..n)
        .map(|c| base.cell_type(c) as usize * 8 + rng.gen_range(0..k))
        .collect();
    let planted = Partition::from_labels(&labels);
    let colors = planted.colors();
    let mut rows = base.adjacency_rows();
    for color in &colors {
        let template = rows[color[0]].clone();
        for &c in &color[1..] {
            let mut row = template.clone();
            for block in &colors {
                let mut values: Vec<i64> = block.iter().map(|&d| template[d]).collect();
                values.shuffle(rng);
                for (&d, v) in block.iter().zip(values) {
                    row[d] = v;
                }
            }
            rows[c] = row;
        }
    }
    from_rows(rows, base.types().to_vec())
}

/// Alternates plain and planted random networks.
pub fn mixed_network(
    rng: &mut ChaCha8Rng,
    index: usize,
    max_cells: usize,
    max_types: u32,
    weights: &[i64],
    sparsity: f64,
) -> Network {
    if index.is_multiple_of(2) {
        random_network(rng, max_cells, max_types, weights, sparsity)
    } else {
        planted_network(rng, max_cells, max_types, weights, sparsity)
    }
}

/// Every set partition of `n` cells as a label vector, by recursive
/// placement of each cell into an existing block or a new one.
pub fn all_set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, labels: &mut Vec<usize>, blocks: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(labels.clone());
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            go(i + 1, n, labels, blocks.max(b + 1), out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

fn same_block(labels: &[usize], a: usize, b: usize) -> bool {
    labels[a] == labels[b]
}

pub fn brute_type_refining(net: &Network, labels: &[usize]) -> bool {
    (0..net.len()).all(|a| {
        (0..net.len()).all(|b| !same_block(labels, a, b) || net.cell_type(a) == net.cell_type(b))
    })
}

/// Sum of the weights `c` receives from the block containing `rep`.
fn block_sum(net: &Network, labels: &[usize], c: usize, rep: usize) -> i64 {
    let m = net.monoid(c, rep);
    m.sum((0..net.len()).filter(|&d| same_block(labels, d, rep)).map(|d| net.raw(c, d)))
}

/// Balanced straight from the definition: type-refining, and any two cells
/// of one block receive equal totals from every block.
pub fn brute_balanced(net: &Network, labels: &[usize]) -> bool {
    if !brute_type_refining(net, labels) {
        return false;
    }
    let n = net.len();
    (0..n).all(|a| {
        (0..n).all(|b| {
            !same_block(labels, a, b)
                || (0..n).all(|rep| block_sum(net, labels, a, rep) == block_sum(net, labels, b, rep))
        })
    })
}

/// Same as [`brute_balanced`] but ignoring each cell's own block.
pub fn brute_exo_balanced(net: &Network, labels: &[usize]) -> bool {
    let n = net.len();
    brute_type_refining(net, labels)
        && (0..n).all(|a| {
            (0..n).all(|b| {
                !same_block(labels, a, b)
                    || (0..n).filter(|&rep| !same_block(labels, a, rep)).all(|rep| {
                        block_sum(net, labels, a, rep) == block_sum(net, labels, b, rep)
                    })
            })
        })
}

pub fn canonical(labels: &[usize]) -> Vec<usize> {
    Partition::from_labels(labels).assignment().to_vec()
}

/// Every balanced partition, as canonical assignments.
pub fn brute_lattice(net: &Network) -> BTreeSet<Vec<usize>> {
    all_set_partitions(net.len())
        .into_iter()
        .filter(|l| brute_balanced(net, l))
        .map(|l| canonical(&l))
        .collect()
}

/// `a` refines `b`: every block of `a` sits inside a block of `b`.
pub fn brute_refines(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| a[i] != a[j] || b[i] == b[j]))
}

/// The coarsest balanced partition refining `a`, found by scanning every
/// balanced partition below `a`. Panics if there is no unique coarsest one.
pub fn brute_cir(net: &Network, a: &[usize]) -> Vec<usize> {
    let below: Vec<Vec<usize>> = brute_lattice(net)
        .into_iter()
        .filter(|b| brute_refines(b, a))
        .collect();
    let tops: Vec<&Vec<usize>> = below
        .iter()
        .filter(|b| below.iter().all(|c| brute_refines(c, b)))
        .collect();
    assert_eq!(tops.len(), 1, "no unique coarsest balanced refinement");
    tops[0].clone()
}

/// Join by closing "same block in a or in b" under transitivity.
pub fn brute_join(a: &[usize], b: &[usize]) -> Vec<usize> {
    let n = a.len();
    let mut rel = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            rel[i][j] = a[i] == a[j] || b[i] == b[j];
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if rel[i][k] && rel[k][j] {
                    rel[i][j] = true;
                }
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| (0..n).find(|&j| rel[i][j]).unwrap()).collect();
    canonical(&labels)
}

/// `reach[d][c]`: there is a path (possibly empty) from `d` to `c`.
pub fn brute_reach(net: &Network) -> Vec<Vec<bool>> {
    let n = net.len();
    let mut r = vec![vec![false; n]; n];
    for d in 0..n {
        r[d][d] = true;
        for c in 0..n {
            if net.has_edge(c, d) {
                r[d][c] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

/// Strongly connected components as mutual reachability classes.
pub fn brute_scc(net: &Network) -> Vec<usize> {
    let r = brute_reach(net);
    let n = net.len();
    let labels: Vec<usize> = (0..n)
        .map(|i| (0..n).find(|&j| r[i][j] && r[j][i]).unwrap())
        .collect();
    canonical(&labels)
}

/// Cells with a path of at most `k` edges to `c`, by iterating the
/// adjacency `k` times.
pub fn brute_within(net: &Network, c: usize, k: usize) -> BTreeSet<usize> {
    let mut set = BTreeSet::from([c]);
    for _ in 0..k {
        let next: BTreeSet<usize> = (0..net.len())
            .filter(|&d| set.iter().any(|&x| net.has_edge(x, d)))
            .collect();
        set.extend(next);
    }
    set
}

pub fn set(cells: &[usize]) -> BTreeSet<usize> {
    cells.iter().map(|c| c - 1).collect()
}

pub fn blocks(cells: &[&[usize]]) -> Vec<usize> {
    let n: usize = cells.iter().map(|b| b.len()).sum();
    let mut labels = vec![0; n];
    for (k, b) in cells.iter().enumerate() {
        for &c in *b {
            labels[c - 1] = k;
        }
    }
    canonical(&labels)
}
