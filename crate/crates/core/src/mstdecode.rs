//! Head-selection probabilities and maximum spanning arborescence decoding
//! over a dense score matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deptree::DepTree;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ScoreMatrixError {
    #[error("n must be at least 1")]
    Empty,
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("score for head {head}, dependent {dependent} is missing or not finite")]
    NotFinite { head: usize, dependent: usize },
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// Wire format: row `h` lists the scores of every dependent `1..=n`
/// choosing head `h`; row 0 is the virtual root. Diagonal cells may be
/// `null`.
#[derive(Deserialize, Serialize)]
struct RawMatrix {
    n: usize,
    scores: Vec<Vec<Option<f64>>>,
}

/// Scores `g(dependent, head)` for one sentence of `n` tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    /// `(n + 1) × n`, indexed `[head][dependent - 1]`.
    scores: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    /// `scores[h][d - 1]` is the score of dependent `d` taking head `h`.
    /// Diagonal cells (`h == d`) are ignored.
    pub fn new(scores: Vec<Vec<f64>>) -> Result<Self, ScoreMatrixError> {
        let n = scores.len().checked_sub(1).ok_or(ScoreMatrixError::Empty)?;
        if n == 0 {
            return Err(ScoreMatrixError::Empty);
        }
        for (h, row) in scores.iter().enumerate() {
            if row.len() != n {
                return Err(ScoreMatrixError::ColumnCount {
                    row: h,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if h != j + 1 && !v.is_finite() {
                    return Err(ScoreMatrixError::NotFinite {
                        head: h,
                        dependent: j + 1,
                    });
                }
            }
        }
        Ok(ScoreMatrix { n, scores })
    }

    pub fn from_json(text: &str) -> Result<Self, ScoreMatrixError> {
        let raw: RawMatrix =
            serde_json::from_str(text).map_err(|e| ScoreMatrixError::Json(e.to_string()))?;
        if raw.scores.len() != raw.n + 1 {
            return Err(ScoreMatrixError::RowCount {
                expected: raw.n + 1,
                found: raw.scores.len(),
            });
        }
        let scores = raw
            .scores
            .into_iter()
            .enumerate()
            .map(|(h, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, v)| match v {
                        Some(v) => Ok(v),
                        None if h == j + 1 => Ok(0.0),
                        None => Err(ScoreMatrixError::NotFinite {
                            head: h,
                            dependent: j + 1,
                        }),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(scores)
    }

    pub fn to_json(&self) -> String {
        let scores = self
            .scores
            .iter()
            .enumerate()
            .map(|(h, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| (h != j + 1).then_some(v))
                    .collect()
            })
            .collect();
        serde_json::to_string(&RawMatrix { n: self.n, scores }).expect("serializable")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn score(&self, head: usize, dependent: usize) -> f64 {
        self.scores[head][dependent - 1]
    }

    /// Sum of arc scores of a head assignment (`heads[d - 1]` heads `d`).
    pub fn total(&self, heads: &[usize]) -> f64 {
        heads
            .iter()
            .enumerate()
            .map(|(i, &h)| self.score(h, i + 1))
            .sum()
    }
}

/// Softmax over admissible heads, per dependent. The result has the shape
/// of the score matrix with zeros on the diagonal.
pub fn head_probabilities(m: &ScoreMatrix) -> Vec<Vec<f64>> {
    let n = m.n;
    let mut probs = vec![vec![0.0; n]; n + 1];
    for d in 1..=n {
        let heads = (0..=n).filter(|&h| h != d);
        let max = heads
            .clone()
            .map(|h| m.score(h, d))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for h in heads.clone() {
            let e = (m.score(h, d) - max).exp();
            probs[h][d - 1] = e;
            total += e;
        }
        for h in heads {
            probs[h][d - 1] /= total;
        }
    }
    probs
}

#[derive(Clone, Copy, Debug)]
struct Arc {
    from: usize,
    to: usize,
    weight: f64,
}

/// Chu-Liu/Edmonds on an arc list. Returns indices of the chosen arcs, one
/// per non-root node, or `None` if some node has no incoming arc.
fn chu_liu_edmonds(n_nodes: usize, root: usize, arcs: &[Arc]) -> Option<Vec<usize>> {
    // Best incoming arc per node; ties go to the lowest source node.
    let mut best_in: Vec<Option<usize>> = vec![None; n_nodes];
    for (i, a) in arcs.iter().enumerate() {
        if a.to == root || a.from == a.to {
            continue;
        }
        let replace = match best_in[a.to] {
            None => true,
            Some(j) => {
                let b = &arcs[j];
                a.weight > b.weight || (a.weight == b.weight && a.from < b.from)
            }
        };
        if replace {
            best_in[a.to] = Some(i);
        }
    }
    if (0..n_nodes).any(|v| v != root && best_in[v].is_none()) {
        return None;
    }

    let cycle = match find_cycle(n_nodes, root, arcs, &best_in) {
        Some(c) => c,
        None => return Some((0..n_nodes).filter_map(|v| best_in[v]).collect()),
    };

    let mut in_cycle = vec![false; n_nodes];
    for &v in &cycle {
        in_cycle[v] = true;
    }
    // Non-cycle nodes keep their relative order; the cycle becomes the last node.
    let mut new_id = vec![0; n_nodes];
    let mut next = 0;
    for v in 0..n_nodes {
        if !in_cycle[v] {
            new_id[v] = next;
            next += 1;
        }
    }
    let cycle_node = next;
    for &v in &cycle {
        new_id[v] = cycle_node;
    }

    let mut contracted = Vec::new();
    let mut origin = Vec::new();
    for (i, a) in arcs.iter().enumerate() {
        if in_cycle[a.from] && in_cycle[a.to] {
            continue;
        }
        let weight = if in_cycle[a.to] {
            a.weight - arcs[best_in[a.to].unwrap()].weight
        } else {
            a.weight
        };
        contracted.push(Arc {
            from: new_id[a.from],
            to: new_id[a.to],
            weight,
        });
        origin.push(i);
    }

    let chosen = chu_liu_edmonds(cycle_node + 1, new_id[root], &contracted)?;
    let mut result: Vec<usize> = chosen.iter().map(|&i| origin[i]).collect();
    let entering = result
        .iter()
        .map(|&i| arcs[i].to)
        .find(|&v| in_cycle[v])
        .expect("contracted node has an incoming arc");
    for &v in &cycle {
        if v != entering {
            result.push(best_in[v].unwrap());
        }
    }
    Some(result)
}

fn find_cycle(
    n_nodes: usize,
    root: usize,
    arcs: &[Arc],
    best_in: &[Option<usize>],
) -> Option<Vec<usize>> {
    let mut state = vec![0u8; n_nodes];
    state[root] = 2;
    for start in 0..n_nodes {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = arcs[best_in[v].unwrap()].from;
        }
        if state[v] == 1 {
            let pos = path.iter().position(|&u| u == v).unwrap();
            return Some(path[pos..].to_vec());
        }
        for u in path {
            state[u] = 2;
        }
    }
    None
}

fn decode_with_arcs(n: usize, arcs: &[Arc]) -> Option<Vec<usize>> {
    let chosen = chu_liu_edmonds(n + 1, 0, arcs)?;
    let mut heads = vec![0; n];
    for i in chosen {
        heads[arcs[i].to - 1] = arcs[i].from;
    }
    Some(heads)
}

/// Highest-scoring head assignment in which exactly one token attaches to
/// the virtual root.
pub fn mst_decode(m: &ScoreMatrix) -> Vec<usize> {
    let n = m.n;
    let arcs: Vec<Arc> = (0..=n)
        .flat_map(|h| (1..=n).map(move |d| (h, d)))
        .filter(|&(h, d)| h != d)
        .map(|(h, d)| Arc {
            from: h,
            to: d,
            weight: m.score(h, d),
        })
        .collect();

    let free = decode_with_arcs(n, &arcs).expect("dense graph has an arborescence");
    if free.iter().filter(|&&h| h == 0).count() == 1 {
        return free;
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for root_child in 1..=n {
        let restricted: Vec<Arc> = arcs
            .iter()
            .copied()
            .filter(|a| a.from != 0 || a.to == root_child)
            .collect();
        let heads = decode_with_arcs(n, &restricted).expect("token arcs span the graph");
        let total = m.total(&heads);
        if best.as_ref().is_none_or(|(t, _)| total > *t) {
            best = Some((total, heads));
        }
    }
    best.expect("n >= 1").1
}

/// A CoNLL-U skeleton (`w1..wN`, relation `dep`) for decoded heads.
pub fn decoded_tree(heads: &[usize]) -> DepTree {
    DepTree::from_heads(heads)
}
