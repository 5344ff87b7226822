//! Brute-force oracles and seeded generators shared by the core property
//! tests and the CLI acceptance suite. Nothing here calls into the library's
//! own traversal or decoding code.

#![allow(dead_code)]

use rand::Rng;

/// Random single-root tree of `n` tokens: tokens are attached in a random
/// order, each to one already placed.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut heads = vec![0; n];
    for k in 1..n {
        heads[order[k] - 1] = order[rng.random_range(0..k)];
    }
    heads
}

/// Whether following heads from every token reaches 0, with exactly one
/// token attached to 0 and every head in range.
pub fn reachability_valid(heads: &[usize]) -> bool {
    let n = heads.len();
    if n == 0 || heads.iter().any(|&h| h > n) {
        return false;
    }
    if heads.iter().filter(|&&h| h == 0).count() != 1 {
        return false;
    }
    (1..=n).all(|start| {
        let mut node = start;
        for _ in 0..=n {
            if node == 0 {
                return true;
            }
            node = heads[node - 1];
        }
        false
    })
}

/// Arcs from the virtual root to `token`, by walking up the head chain.
pub fn path_length(heads: &[usize], token: usize) -> usize {
    let mut steps = 0;
    let mut node = token;
    while node != 0 {
        node = heads[node - 1];
        steps += 1;
    }
    steps
}

pub struct OracleMetrics {
    pub depth: usize,
    pub head_count: usize,
    pub branching_factor: f64,
}

/// Metrics of a valid tree by enumerating every root path and every
/// (governor, dependent) pair.
pub fn oracle_metrics(heads: &[usize]) -> OracleMetrics {
    let n = heads.len();
    let depth = (1..=n).map(|t| path_length(heads, t)).max().unwrap_or(0);
    let mut governors = 0;
    let mut dependents = 0;
    for g in 1..=n {
        let k = (1..=n).filter(|&d| heads[d - 1] == g).count();
        if k > 0 {
            governors += 1;
            dependents += k;
        }
    }
    OracleMetrics {
        depth,
        head_count: if n == 0 { 0 } else { governors + 1 },
        branching_factor: if governors == 0 {
            0.0
        } else {
            dependents as f64 / governors as f64
        },
    }
}

/// `(n + 1) × n` scores indexed `[head][dependent - 1]`, uniform in
/// [-5, 5); diagonal cells are zero and ignored by consumers.
pub fn random_scores<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|h| {
            (1..=n)
                .map(|d| {
                    if h == d {
                        0.0
                    } else {
                        rng.random_range(-5.0..5.0)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn total_score(scores: &[Vec<f64>], heads: &[usize]) -> f64 {
    heads.iter().enumerate().map(|(i, &h)| scores[h][i]).sum()
}

/// Best single-root arborescence by trying all `(n + 1)^n` head vectors in
/// lexicographic order; ties keep the first found.
pub fn brute_force_decode(scores: &[Vec<f64>]) -> Vec<usize> {
    let n = scores[0].len();
    let mut heads = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        if reachability_valid(&heads) && heads.iter().enumerate().all(|(i, &h)| h != i + 1) {
            let total = total_score(scores, &heads);
            if best.as_ref().is_none_or(|(t, _)| total > *t) {
                best = Some((total, heads.clone()));
            }
        }
        // Odometer increment, last position fastest.
        let mut i = n;
        loop {
            if i == 0 {
                return best.expect("a chain is always a valid tree").1;
            }
            i -= 1;
            heads[i] += 1;
            if heads[i] <= n {
                break;
            }
            heads[i] = 0;
        }
    }
}

/// Direct softmax over admissible heads of one dependent, without
/// max-subtraction.
pub fn naive_column_softmax(scores: &[Vec<f64>], dependent: usize) -> Vec<f64> {
    let n = scores[0].len();
    let z: f64 = (0..=n)
        .filter(|&h| h != dependent)
        .map(|h| scores[h][dependent - 1].exp())
        .sum();
    (0..=n)
        .map(|h| {
            if h == dependent {
                0.0
            } else {
                scores[h][dependent - 1].exp() / z
            }
        })
        .collect()
}
