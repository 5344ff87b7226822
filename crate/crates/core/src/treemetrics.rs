//! Structural quantities of a dependency tree.
//!
//! All functions assume a tree that passed [`DepTree::validate`]. Depth is
//! measured in arcs from the virtual root, so the sentence root itself sits
//! at depth 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deptree::DepTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsOptions {
    /// Drop PUNCT tokens from the sentence length.
    pub exclude_punct: bool,
    /// Additionally ignore PUNCT tokens when computing depth and branching.
    pub exclude_punct_structure: bool,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            exclude_punct: true,
            exclude_punct_structure: false,
        }
    }
}

impl MetricsOptions {
    /// Every token counts, punctuation included.
    pub fn all_tokens() -> Self {
        MetricsOptions {
            exclude_punct: false,
            exclude_punct_structure: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeMetrics {
    /// Number of syntactic words, `L`.
    pub length: usize,
    /// Governing tokens plus the virtual root, `α`.
    pub head_count: usize,
    /// Arcs from the virtual root to the deepest token, `β`.
    pub depth: usize,
    pub branching_factor: f64,
    pub node_count: usize,
}

impl TreeMetrics {
    pub fn compute(tree: &DepTree, options: MetricsOptions) -> Self {
        let structure = Structure::new(tree, options.exclude_punct_structure);
        TreeMetrics {
            length: sentence_length(tree, options.exclude_punct),
            head_count: head_count(tree),
            depth: structure.depth(),
            branching_factor: structure.branching_factor().unwrap_or(0.0),
            node_count: tree.len(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("branching factor is undefined for an empty tree")]
    EmptyTree,
}

/// Number of heads, counting the virtual root once for non-empty trees.
pub fn head_count(tree: &DepTree) -> usize {
    if tree.is_empty() {
        return 0;
    }
    let governing = tree
        .children()
        .iter()
        .skip(1)
        .filter(|deps| !deps.is_empty())
        .count();
    governing + 1
}

/// Longest root-to-token path, in arcs.
pub fn tree_depth(tree: &DepTree) -> usize {
    Structure::new(tree, false).depth()
}

/// Mean number of dependents over tokens that have dependents.
pub fn branching_factor(tree: &DepTree) -> Result<f64, MetricsError> {
    Structure::new(tree, false).branching_factor()
}

pub fn sentence_length(tree: &DepTree, exclude_punct: bool) -> usize {
    tree.tokens
        .iter()
        .filter(|t| !(exclude_punct && t.is_punct()))
        .count()
}

/// Child lists and depths, optionally blind to punctuation.
struct Structure {
    children: Vec<Vec<usize>>,
    depths: Vec<usize>,
    counted: Vec<bool>,
}

impl Structure {
    fn new(tree: &DepTree, skip_punct: bool) -> Self {
        let n = tree.len();
        let mut counted = vec![true; n + 1];
        if skip_punct {
            for t in &tree.tokens {
                counted[t.id] = !t.is_punct();
            }
        }

        let children = tree.children();
        // Breadth-first from the virtual root; unreachable tokens keep depth 0.
        let mut depths = vec![0; n + 1];
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &child in &children[node] {
                depths[child] = depths[node] + 1;
                queue.push_back(child);
            }
        }

        Structure {
            children,
            depths,
            counted,
        }
    }

    fn depth(&self) -> usize {
        (1..self.depths.len())
            .filter(|&id| self.counted[id])
            .map(|id| self.depths[id])
            .max()
            .unwrap_or(0)
    }

    fn branching_factor(&self) -> Result<f64, MetricsError> {
        if self.children.len() <= 1 {
            return Err(MetricsError::EmptyTree);
        }
        let (mut dependents, mut parents) = (0usize, 0usize);
        for id in 1..self.children.len() {
            if !self.counted[id] {
                continue;
            }
            let k = self.children[id]
                .iter()
                .filter(|&&c| self.counted[c])
                .count();
            if k > 0 {
                dependents += k;
                parents += 1;
            }
        }
        if parents == 0 {
            Ok(0.0)
        } else {
            Ok(dependents as f64 / parents as f64)
        }
    }
}
