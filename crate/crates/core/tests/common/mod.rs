#![allow(dead_code)]

use fraisse_core::fixtures::tree_from_arities;
use fraisse_core::BallTree;
use proptest::prelude::*;

/// Builds a tree by reading child counts from `counts`, keeping the leaf
/// count at or below `max_points`.
pub fn tree_from_counts(depth: usize, counts: &[usize], max_points: usize) -> BallTree {
    let mut it = counts.iter().copied().cycle();
    let mut arities = Vec::new();
    let mut width = 1;
    for _ in 0..depth {
        let mut level = Vec::with_capacity(width);
        let mut total = 0;
        for i in 0..width {
            let remaining = width - i - 1;
            let room = max_points.saturating_sub(total + remaining).max(1);
            let c = it.next().unwrap_or(1).clamp(1, room);
            total += c;
            level.push(c);
        }
        width = total;
        arities.push(level);
    }
    tree_from_arities(&arities).unwrap()
}

pub fn arb_tree(
    max_depth: usize,
    max_arity: usize,
    max_points: usize,
) -> impl Strategy<Value = BallTree> {
    (1..=max_depth, prop::collection::vec(1..=max_arity, 1..40))
        .prop_map(move |(d, counts)| tree_from_counts(d, &counts, max_points))
}
