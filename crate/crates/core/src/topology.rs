//! Hardware connectivity, logical-to-physical placements and greedy SWAP
//! routing.

use std::collections::BTreeSet;

use petgraph::algo::{astar, dijkstra};
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::circuit::{transpile_native, Circuit, Gate};
use crate::error::{Error, Result};

/// Largest map searched exhaustively by [`preset_placements`].
pub const PRESET_SEARCH_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingMap {
    n_physical: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CouplingMap {
    pub fn new(n_physical: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            Error::check_index(a, n_physical)?;
            Error::check_index(b, n_physical)?;
            if a == b {
                return Err(Error::DimensionMismatch(format!("self-loop on qubit {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let map = Self {
            n_physical,
            edges: set,
        };
        if n_physical > 1 && map.distances_from(0).iter().any(Option::is_none) {
            return Err(Error::DisconnectedMap);
        }
        Ok(map)
    }

    /// Seven-qubit heavy-hex layout.
    pub fn heavy_hex_7() -> Self {
        Self::new(7, [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)]).expect("valid map")
    }

    pub fn fully_connected(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("valid map")
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn graph(&self) -> UnGraph<(), ()> {
        let mut g = UnGraph::with_capacity(self.n_physical, self.edges.len());
        for _ in 0..self.n_physical {
            g.add_node(());
        }
        for &(a, b) in &self.edges {
            g.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
        }
        g
    }

    fn distances_from(&self, a: usize) -> Vec<Option<usize>> {
        let costs = dijkstra(&self.graph(), NodeIndex::new(a), None, |_| 1usize);
        (0..self.n_physical)
            .map(|b| costs.get(&NodeIndex::new(b)).copied())
            .collect()
    }

    /// All-pairs hop counts.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.n_physical)
            .map(|a| {
                self.distances_from(a)
                    .into_iter()
                    .map(|d| d.expect("connected map"))
                    .collect()
            })
            .collect()
    }

    /// A shortest path `a -> b`, endpoints included.
    pub fn shortest_path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        Error::check_index(a, self.n_physical)?;
        Error::check_index(b, self.n_physical)?;
        let (_, path) = astar(
            &self.graph(),
            NodeIndex::new(a),
            |n| n == NodeIndex::new(b),
            |_| 1usize,
            |_| 0,
        )
        .ok_or(Error::DisconnectedMap)?;
        Ok(path.into_iter().map(NodeIndex::index).collect())
    }
}

/// Shortest-path edge count between two physical qubits.
pub fn graph_distance(map: &CouplingMap, a: usize, b: usize) -> Result<usize> {
    Error::check_index(a, map.n_physical)?;
    Error::check_index(b, map.n_physical)?;
    map.distances_from(a)[b].ok_or(Error::DisconnectedMap)
}

/// Injective logical-to-physical assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub name: String,
    pub mapping: Vec<usize>,
}

impl Placement {
    pub fn new(name: impl Into<String>, mapping: Vec<usize>, n_physical: usize) -> Result<Self> {
        let mut seen = vec![false; n_physical];
        for &p in &mapping {
            Error::check_index(p, n_physical)?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::DimensionMismatch(format!(
                    "placement maps two logical qubits to physical {p}"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            mapping,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            name: "identity".into(),
            mapping: (0..n).collect(),
        }
    }
}

/// Summed distance between the two impurity blocks `{0,1}` and `{2,3}`.
pub fn impurity_block_score(dist: &[Vec<usize>], mapping: &[usize]) -> usize {
    let mut s = 0;
    for a in [0, 1] {
        for b in [2, 3] {
            s += dist[mapping[a]][mapping[b]];
        }
    }
    s
}

fn injections(n_logical: usize, n_physical: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], k: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in 0..used.len() {
            if !used[p] {
                used[p] = true;
                cur.push(p);
                rec(cur, used, k, out);
                cur.pop();
                used[p] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n_physical], n_logical, &mut out);
    out
}

/// Config-A / B / C: minimum, median and maximum impurity-block distance over
/// every six-qubit injection, ties broken by lexicographic mapping.
pub fn preset_placements(map: &CouplingMap) -> Result<[Placement; 3]> {
    let n = map.n_physical();
    if n < 6 {
        return Err(Error::TooSmallMap { needed: 6, found: n });
    }
    if n > PRESET_SEARCH_LIMIT {
        return Err(Error::DimensionMismatch(format!(
            "exhaustive placement search supports at most {PRESET_SEARCH_LIMIT} physical qubits"
        )));
    }
    let dist = map.distance_matrix();
    // injections come out in lexicographic order, so a stable sort by score
    // keeps the tie-break
    let mut scored: Vec<(usize, Vec<usize>)> = injections(6, n)
        .into_iter()
        .map(|m| (impurity_block_score(&dist, &m), m))
        .collect();
    scored.sort_by_key(|(s, _)| *s);
    let max = scored.last().expect("nonempty").0;
    let c = scored.iter().find(|(s, _)| *s == max).expect("max exists");
    let mk = |name: &str, m: &[usize]| Placement {
        name: name.into(),
        mapping: m.to_vec(),
    };
    Ok([
        mk("Config-A", &scored[0].1),
        mk("Config-B", &scored[scored.len() / 2].1),
        mk("Config-C", &c.1),
    ])
}

/// Routes onto the map: Pauli evolutions are lowered to CNOT ladders first,
/// then every non-adjacent two-qubit gate is preceded by SWAPs walking the
/// control along a shortest path towards the target. Returns the routed
/// circuit on `n_physical` qubits and the final logical-to-physical layout.
pub fn route_circuit(
    c: &Circuit,
    map: &CouplingMap,
    placement: &Placement,
) -> Result<(Circuit, Vec<usize>)> {
    let np = map.n_physical();
    if c.n_qubits() > np {
        return Err(Error::TooSmallMap {
            needed: c.n_qubits(),
            found: np,
        });
    }
    if placement.mapping.len() != c.n_qubits() {
        return Err(Error::WidthMismatch {
            expected: c.n_qubits(),
            found: placement.mapping.len(),
        });
    }
    Placement::new(placement.name.clone(), placement.mapping.clone(), np)?;
    let mut layout = placement.mapping.clone();
    let mut owner: Vec<Option<usize>> = vec![None; np];
    for (l, &p) in layout.iter().enumerate() {
        owner[p] = Some(l);
    }
    let mut out = Vec::with_capacity(c.len());
    let mut pending: Vec<Gate> = Vec::new();
    for g in c.gates() {
        match g {
            Gate::PauliEvolution { string, .. } if string.weight() > 1 => {
                let single = c.with_gates(vec![g.clone()]);
                pending.extend(transpile_native(&single).gates().iter().cloned());
            }
            _ => pending.push(g.clone()),
        }
        for g in pending.drain(..) {
            let qs = g.qubits();
            if qs.len() == 2 {
                let (a, b) = (layout[qs[0]], layout[qs[1]]);
                if !map.are_adjacent(a, b) {
                    let path = map.shortest_path(a, b)?;
                    for w in path[..path.len() - 1].windows(2) {
                        let (x, y) = (w[0], w[1]);
                        out.push(Gate::SWAP { a: x, b: y });
                        let (lx, ly) = (owner[x], owner[y]);
                        owner[x] = ly;
                        owner[y] = lx;
                        if let Some(l) = lx {
                            layout[l] = y;
                        }
                        if let Some(l) = ly {
                            layout[l] = x;
                        }
                    }
                }
            }
            out.push(g.remap(&layout));
        }
    }
    Ok((c.with_width_and_gates(np, out), layout))
}

/// True when every two-qubit gate acts on a map edge.
pub fn respects_map(c: &Circuit, map: &CouplingMap) -> bool {
    c.gates().iter().all(|g| {
        let q = g.qubits();
        q.len() < 2 || (q.len() == 2 && map.are_adjacent(q[0], q[1]))
    })
}

/// Number of SWAP gates in a routed circuit.
pub fn swap_count(c: &Circuit) -> usize {
    c.gates()
        .iter()
        .filter(|g| matches!(g, Gate::SWAP { .. }))
        .count()
}
