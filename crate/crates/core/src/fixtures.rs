//! Small named spaces used by tests, the demo command and the docs.

use std::sync::Arc;

use crate::discrete::{FiniteSpace, Map};
use crate::inverse::InverseSequence;
use crate::ultrametric::BallTree;

/// Full binary tree of the given depth. Level `a` holds the bitstrings of
/// length `a` in lexicographic order; the root is labeled `root`.
pub fn binary_tree(depth: usize) -> BallTree {
    uniform_tree(depth, 2)
}

/// Full `arity`-branching tree; labels are digit strings.
pub fn uniform_tree(depth: usize, arity: usize) -> BallTree {
    assert!(depth >= 1 && (1..=10).contains(&arity));
    let mut levels = vec![vec!["root".to_string()]];
    let mut parents = Vec::new();
    for a in 0..depth {
        let mut next = Vec::new();
        let mut ps = Vec::new();
        for (i, label) in levels[a].iter().enumerate() {
            let stem = if a == 0 { "" } else { label.as_str() };
            for digit in 0..arity {
                next.push(format!("{stem}{digit}"));
                ps.push(i);
            }
        }
        levels.push(next);
        parents.push(ps);
    }
    BallTree::from_labels(levels, parents).expect("uniform trees are well formed")
}

/// The binary tree of depth 2 (four points).
pub fn k4() -> Arc<BallTree> {
    Arc::new(binary_tree(2))
}

/// A one-point space of depth 1.
pub fn one_point() -> Arc<BallTree> {
    Arc::new(
        BallTree::from_labels(vec![vec!["root".into()], vec!["x".into()]], vec![vec![0]])
            .expect("one-point tree"),
    )
}

/// Inverse sequence with sizes 1, 2, 5: two points over `a`, three over `b`.
pub fn sequence_125() -> InverseSequence {
    let u0 = Arc::new(FiniteSpace::singleton("U0", "r"));
    let u1 = Arc::new(FiniteSpace::from_labels("U1", ["a", "b"]).unwrap());
    let u2 = Arc::new(FiniteSpace::from_labels("U2", ["a0", "a1", "b0", "b1", "b2"]).unwrap());
    let s0 = Map::new(u1.clone(), u0.clone(), vec![0, 0]).unwrap();
    let s1 = Map::new(u2.clone(), u1.clone(), vec![0, 0, 1, 1, 1]).unwrap();
    InverseSequence::new(vec![u0, u1, u2], vec![s0, s1]).unwrap()
}

/// Builds a tree from per-level child counts listed ball by ball, e.g.
/// `[[2], [1, 3]]` is a root with two children carrying 1 and 3 leaves.
pub fn tree_from_arities(arities: &[Vec<usize>]) -> crate::Result<BallTree> {
    let mut levels = vec![vec!["root".to_string()]];
    let mut parents = Vec::new();
    for (a, counts) in arities.iter().enumerate() {
        if counts.len() != levels[a].len() {
            return Err(crate::Error::MalformedTree(format!(
                "level {a} has {} balls but {} child counts",
                levels[a].len(),
                counts.len()
            )));
        }
        let mut next = Vec::new();
        let mut ps = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            let stem = if a == 0 {
                String::new()
            } else {
                format!("{}.", levels[a][i])
            };
            for j in 0..c {
                next.push(format!("{stem}{j}"));
                ps.push(i);
            }
        }
        levels.push(next);
        parents.push(ps);
    }
    BallTree::from_labels(levels, parents)
}
