//! Truncated ultrametric spaces stored as leveled ball trees.
//!
//! Level `a` of a [`BallTree`] lists the closed balls of radius `a`; the
//! points of the space are the balls of the deepest level `d`. Distances are
//! meet levels: `u(x, y)` is the deepest level at which `x` and `y` share a
//! ball, so `u(x, x) = d` and larger values mean closer points.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::discrete::{FiniteSpace, Map};
use crate::error::{Error, Result};
use crate::inverse::{InverseSequence, Thread};

/// Label given to a root level prepended by [`BallTree::from_sequence`].
pub const ROOT_LABEL: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallTree {
    levels: Vec<Arc<FiniteSpace>>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<Vec<usize>>>,
    ancestry: Vec<Vec<usize>>,
}

/// A ball named by its level and its index within that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ball {
    pub level: usize,
    pub index: usize,
}

impl BallTree {
    /// `parents[a][i]` is the index in level `a` of the parent of ball `i`
    /// of level `a + 1`.
    pub fn new(levels: Vec<FiniteSpace>, parents: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_arcs(levels.into_iter().map(Arc::new).collect(), parents)
    }

    pub fn from_arcs(levels: Vec<Arc<FiniteSpace>>, parents: Vec<Vec<usize>>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::MalformedTree("depth must be at least 1".into()));
        }
        if levels[0].len() != 1 {
            return Err(Error::MalformedTree(format!(
                "level 0 must hold exactly one ball, found {}",
                levels[0].len()
            )));
        }
        if parents.len() + 1 != levels.len() {
            return Err(Error::MalformedTree(format!(
                "{} levels need {} parent lists, got {}",
                levels.len(),
                levels.len() - 1,
                parents.len()
            )));
        }
        let mut children = Vec::with_capacity(levels.len());
        for (a, ps) in parents.iter().enumerate() {
            if ps.len() != levels[a + 1].len() {
                return Err(Error::MalformedTree(format!(
                    "level {} has {} balls but {} parent entries",
                    a + 1,
                    levels[a + 1].len(),
                    ps.len()
                )));
            }
            let mut kids = vec![Vec::new(); levels[a].len()];
            for (i, &p) in ps.iter().enumerate() {
                if p >= levels[a].len() {
                    return Err(Error::MalformedTree(format!(
                        "ball `{}` at level {} points to missing parent {p}",
                        levels[a + 1].label(i),
                        a + 1
                    )));
                }
                kids[p].push(i);
            }
            if let Some(empty) = kids.iter().position(Vec::is_empty) {
                return Err(Error::MalformedTree(format!(
                    "ball `{}` at level {a} has no children",
                    levels[a].label(empty)
                )));
            }
            children.push(kids);
        }
        children.push(vec![Vec::new(); levels[levels.len() - 1].len()]);
        let d = levels.len() - 1;
        let ancestry = (0..levels[d].len())
            .map(|leaf| {
                let mut chain = vec![0; d + 1];
                chain[d] = leaf;
                for a in (0..d).rev() {
                    chain[a] = parents[a][chain[a + 1]];
                }
                chain
            })
            .collect();
        Ok(Self {
            levels,
            parents,
            children,
            ancestry,
        })
    }

    /// Convenience constructor from raw label lists.
    pub fn from_labels(levels: Vec<Vec<String>>, parents: Vec<Vec<usize>>) -> Result<Self> {
        let levels = levels
            .into_iter()
            .enumerate()
            .map(|(a, labels)| FiniteSpace::new(format!("L{a}"), labels))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, parents)
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, a: usize) -> &Arc<FiniteSpace> {
        &self.levels[a]
    }

    pub fn levels(&self) -> &[Arc<FiniteSpace>] {
        &self.levels
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    /// Parent indices of the balls of level `a + 1`.
    pub fn parents(&self, a: usize) -> &[usize] {
        &self.parents[a]
    }

    pub fn children(&self, level: usize, index: usize) -> &[usize] {
        &self.children[level][index]
    }

    pub fn points(&self) -> &Arc<FiniteSpace> {
        &self.levels[self.depth()]
    }

    pub fn num_points(&self) -> usize {
        self.points().len()
    }

    pub fn point_index(&self, label: &str) -> Result<usize> {
        self.points().require(label)
    }

    /// Ancestor at level `to` of ball `index` of level `from` (`to <= from`).
    pub fn ancestor(&self, from: usize, mut index: usize, to: usize) -> usize {
        debug_assert!(to <= from);
        for a in (to..from).rev() {
            index = self.parents[a][index];
        }
        index
    }

    /// Index of the level-`a` ball containing point `leaf`.
    pub fn leaf_ancestor(&self, leaf: usize, a: usize) -> usize {
        self.ancestry[leaf][a]
    }

    /// The chain of balls containing `leaf`, from the root down.
    pub fn ancestry(&self, leaf: usize) -> &[usize] {
        &self.ancestry[leaf]
    }

    /// Points inside ball `index` of level `level`.
    pub fn leaves_under(&self, level: usize, index: usize) -> Vec<usize> {
        (0..self.num_points())
            .filter(|&p| self.ancestry[p][level] == index)
            .collect()
    }

    /// Balls of level `to` inside ball `index` of level `from` (`to >= from`).
    pub fn descendants(&self, from: usize, index: usize, to: usize) -> Vec<usize> {
        (0..self.levels[to].len())
            .filter(|&b| self.ancestor(to, b, from) == index)
            .collect()
    }

    /// Meet level of two points.
    pub fn u(&self, a: usize, b: usize) -> usize {
        let (x, y) = (&self.ancestry[a], &self.ancestry[b]);
        (0..=self.depth())
            .rev()
            .find(|&l| x[l] == y[l])
            .expect("level 0 is shared by every pair")
    }

    pub fn u_labels(&self, a: &str, b: &str) -> Result<usize> {
        Ok(self.u(self.point_index(a)?, self.point_index(b)?))
    }

    /// `B_a(x) = {y : u(x, y) >= a}`.
    pub fn ball(&self, x: usize, a: usize) -> Result<Vec<usize>> {
        if a > self.depth() {
            return Err(Error::InvalidLevel {
                level: a,
                depth: self.depth(),
            });
        }
        if x >= self.num_points() {
            return Err(Error::Mismatch(format!("no point with index {x}")));
        }
        Ok(self.leaves_under(a, self.ancestry[x][a]))
    }

    /// Exhaustive check of the ultrametric axioms and the ball laws,
    /// computed from `u` alone.
    pub fn check_axioms(&self) -> AxiomReport {
        let n = self.num_points();
        let d = self.depth();
        let mut violations = Vec::new();
        let label = |p: usize| self.points().label(p).to_string();
        let dist: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| self.u(a, b)).collect())
            .collect();
        for a in 0..n {
            for b in 0..n {
                if (dist[a][b] == d) != (a == b) {
                    violations.push(format!("U1 fails for ({}, {})", label(a), label(b)));
                }
                if dist[a][b] != dist[b][a] {
                    violations.push(format!("U3 fails for ({}, {})", label(a), label(b)));
                }
                for c in 0..n {
                    if dist[b][c] < dist[b][a].min(dist[a][c]) {
                        violations.push(format!(
                            "U2 fails for ({}, {}, {})",
                            label(b),
                            label(c),
                            label(a)
                        ));
                    }
                }
            }
        }
        let mut balls: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
        for row in &dist {
            for r in 0..=d {
                let set = (0..n).filter(|&y| row[y] >= r).collect();
                balls.insert((r, set));
            }
        }
        let balls: Vec<_> = balls.into_iter().collect();
        for (i, (ra, sa)) in balls.iter().enumerate() {
            for (rb, sb) in &balls[i + 1..] {
                let inter = sa.iter().filter(|p| sb.binary_search(p).is_ok()).count();
                let a_in_b = inter == sa.len();
                let b_in_a = inter == sb.len();
                if inter > 0 && !a_in_b && !b_in_a {
                    violations.push(format!(
                        "balls of radius {ra} and {rb} overlap without nesting"
                    ));
                }
                if a_in_b && !b_in_a && ra <= rb {
                    violations.push(format!("strict nesting of radius {ra} inside {rb}"));
                }
                if b_in_a && !a_in_b && rb <= ra {
                    violations.push(format!("strict nesting of radius {rb} inside {ra}"));
                }
            }
        }
        AxiomReport { violations }
    }

    /// The inverse sequence of ball quotients: level spaces with parent maps.
    pub fn ball_quotients(&self) -> InverseSequence {
        let steps = (0..self.depth())
            .map(|a| {
                Map::new(
                    self.levels[a + 1].clone(),
                    self.levels[a].clone(),
                    self.parents[a].clone(),
                )
                .expect("parent lists are validated")
            })
            .collect();
        InverseSequence::new(self.levels.clone(), steps).expect("levels and steps line up")
    }

    /// The tree whose level-`a` balls are the points of `spaces[a]` and
    /// whose points are the threads of `s`. A one-ball root level is
    /// prepended when `spaces[0]` is not a singleton (or `s` has one level).
    pub fn from_sequence(s: &InverseSequence) -> Result<Self> {
        let report = s.check_coherent();
        if let Some(p) = report.problems.first() {
            return Err(Error::Incoherent(p.clone()));
        }
        let mut levels: Vec<Arc<FiniteSpace>> = Vec::new();
        let mut parents: Vec<Vec<usize>> = Vec::new();
        if Self::needs_root(s) {
            levels.push(Arc::new(FiniteSpace::singleton("root", ROOT_LABEL)));
            parents.push(vec![0; s.space(0).len()]);
        }
        levels.extend(s.spaces().iter().cloned());
        parents.extend(s.steps().iter().map(|m| m.images().to_vec()));
        Self::from_arcs(levels, parents)
    }

    /// Whether [`Self::from_sequence`] prepends a root level for `s`.
    pub fn needs_root(s: &InverseSequence) -> bool {
        s.space(0).len() != 1 || s.top() == 0
    }

    /// `h(x) = (B_a(x))_a` as threads of [`Self::ball_quotients`].
    pub fn thread_embedding(&self) -> Vec<Thread> {
        self.ancestry
            .iter()
            .map(|chain| Thread {
                entries: chain.clone(),
            })
            .collect()
    }

    /// Same level sizes and parent structure.
    pub fn same_shape(&self, other: &BallTree) -> bool {
        self.level_sizes() == other.level_sizes() && self.parents == other.parents
    }

    fn mask(&self, subset: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.num_points()];
        for &p in subset {
            *mask.get_mut(p).ok_or_else(|| {
                Error::Mismatch(format!(
                    "subset names point {p}, tree has {}",
                    self.num_points()
                ))
            })? = true;
        }
        Ok(mask)
    }

    /// `meets[a][b]`: ball `b` of level `a` contains a point of the subset.
    pub fn meets(&self, subset: &[usize]) -> Result<Vec<Vec<bool>>> {
        let d = self.depth();
        let mut meets: Vec<Vec<bool>> = self.levels.iter().map(|l| vec![false; l.len()]).collect();
        meets[d] = self.mask(subset)?;
        for a in (0..d).rev() {
            for (child, &p) in self.parents[a].iter().enumerate() {
                if meets[a + 1][child] {
                    meets[a][p] = true;
                }
            }
        }
        Ok(meets)
    }

    /// For every level `a < d`, the least `b > a` such that every `a`-ball
    /// contains a `b`-ball missing the subset, with the least such ball per
    /// `a`-ball; or the least level where no `b` works.
    pub fn is_uniformly_nowhere_dense(&self, subset: &[usize]) -> Result<NowhereDense> {
        let meets = self.meets(subset)?;
        let d = self.depth();
        let mut levels = Vec::with_capacity(d);
        for a in 0..d {
            let found = (a + 1..=d).find_map(|b| {
                let mut choice = vec![None; self.levels[a].len()];
                for ball in 0..self.levels[b].len() {
                    if !meets[b][ball] {
                        let slot = &mut choice[self.ancestor(b, ball, a)];
                        if slot.is_none() {
                            *slot = Some(ball);
                        }
                    }
                }
                choice
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .map(|balls| LevelWitness { beta: b, balls })
            });
            match found {
                Some(w) => levels.push(w),
                None => return Ok(NowhereDense::FailsAt { level: a }),
            }
        }
        Ok(NowhereDense::Witness(NowhereDenseWitness { levels }))
    }

    /// Turns per-ball witnesses (`per_ball[a][V] = (beta_V, ball at beta_V
    /// inside V)`) into a uniform witness with `beta(a) = max beta_V`, each
    /// ball deepened to its least descendant at that level.
    pub fn nowhere_dense_to_uniform(
        &self,
        subset: &[usize],
        per_ball: &[Vec<(usize, usize)>],
    ) -> Result<NowhereDenseWitness> {
        let meets = self.meets(subset)?;
        let d = self.depth();
        if per_ball.len() != d {
            return Err(Error::Mismatch(format!(
                "need per-ball witnesses for {d} levels, got {}",
                per_ball.len()
            )));
        }
        let mut levels = Vec::with_capacity(d);
        for (a, entries) in per_ball.iter().enumerate() {
            if entries.len() != self.levels[a].len() {
                return Err(Error::Mismatch(format!(
                    "level {a} has {} balls, {} witnesses given",
                    self.levels[a].len(),
                    entries.len()
                )));
            }
            for (v, &(bv, w)) in entries.iter().enumerate() {
                let bad = |reason: &str| Error::BadWitness {
                    level: a,
                    ball: self.levels[a].label(v).to_string(),
                    reason: reason.to_string(),
                };
                if bv <= a || bv > d || w >= self.levels[bv].len() {
                    return Err(bad("witness level must lie strictly below the ball"));
                }
                if self.ancestor(bv, w, a) != v {
                    return Err(bad("witness ball is not inside the ball"));
                }
                if meets[bv][w] {
                    return Err(bad("witness ball meets the set"));
                }
            }
            let beta = entries.iter().map(|e| e.0).max().unwrap_or(a + 1);
            let balls = entries
                .iter()
                .map(|&(bv, w)| self.descendants(bv, w, beta)[0])
                .collect();
            levels.push(LevelWitness { beta, balls });
        }
        Ok(NowhereDenseWitness { levels })
    }

    /// Least level `l` with `images` constant on every `l`-ball; this is the
    /// modulus of uniform continuity of the point map.
    pub fn factoring_level(&self, images: &[usize]) -> Result<usize> {
        if images.len() != self.num_points() {
            return Err(Error::Partial(format!(
                "{} images for {} points",
                images.len(),
                self.num_points()
            )));
        }
        let d = self.depth();
        Ok((0..=d)
            .find(|&l| {
                let mut rep = vec![None; self.levels[l].len()];
                images.iter().enumerate().all(|(p, &y)| {
                    let slot = &mut rep[self.ancestry[p][l]];
                    *slot.get_or_insert(y) == y
                })
            })
            .unwrap_or(d))
    }

    /// Compares ball counts per level with a bound schedule.
    pub fn check_bounded(&self, s: &BoundSchedule) -> BoundReport {
        let mut failures = Vec::new();
        for (a, level) in self.levels.iter().enumerate() {
            match s.bounds.get(a) {
                Some(&m) if level.len() <= m => {}
                Some(&m) => failures.push(BoundFailure {
                    level: a,
                    count: level.len(),
                    bound: Some(m),
                }),
                None => failures.push(BoundFailure {
                    level: a,
                    count: level.len(),
                    bound: None,
                }),
            }
        }
        BoundReport { failures }
    }

    /// The subtree of balls meeting `subset`, with labels kept, plus for each
    /// level the index in `self` of each kept ball.
    pub fn induced(&self, subset: &[usize]) -> Result<(BallTree, Vec<Vec<usize>>)> {
        if subset.is_empty() {
            return Err(Error::EmptySpace {
                space: "subset".into(),
            });
        }
        let meets = self.meets(subset)?;
        let keep: Vec<Vec<usize>> = meets
            .iter()
            .map(|m| (0..m.len()).filter(|&i| m[i]).collect())
            .collect();
        let mut position: Vec<Vec<usize>> = self
            .levels
            .iter()
            .map(|l| vec![usize::MAX; l.len()])
            .collect();
        for (a, kept) in keep.iter().enumerate() {
            for (j, &i) in kept.iter().enumerate() {
                position[a][i] = j;
            }
        }
        let levels = keep
            .iter()
            .enumerate()
            .map(|(a, kept)| {
                FiniteSpace::new(
                    self.levels[a].id().to_string(),
                    kept.iter()
                        .map(|&i| self.levels[a].label(i).to_string())
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let parents = (0..self.depth())
            .map(|a| {
                keep[a + 1]
                    .iter()
                    .map(|&i| position[a][self.parents[a][i]])
                    .collect()
            })
            .collect();
        Ok((BallTree::new(levels, parents)?, keep))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-level upper bounds `m_0 <= m_1 <= …` on ball counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSchedule {
    bounds: Vec<usize>,
}

impl BoundSchedule {
    pub fn new(bounds: Vec<usize>) -> Result<Self> {
        if bounds.contains(&0) {
            return Err(Error::InvalidSchedule("bounds must be positive".into()));
        }
        if bounds.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSchedule(
                "bounds must be nondecreasing".into(),
            ));
        }
        Ok(Self { bounds })
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundFailure {
    pub level: usize,
    pub count: usize,
    /// `None` when the schedule has no entry for the level.
    pub bound: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundReport {
    pub failures: Vec<BoundFailure>,
}

impl BoundReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Witness for one level `a`: the level `beta > a` and, for each `a`-ball,
/// a `beta`-ball inside it that misses the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelWitness {
    pub beta: usize,
    pub balls: Vec<usize>,
}

/// Certificate of uniform nowhere density, indexed by level `a < d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NowhereDenseWitness {
    pub levels: Vec<LevelWitness>,
}

impl NowhereDenseWitness {
    pub fn betas(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.beta).collect()
    }

    /// Rechecks every chosen ball against the tree and the set.
    pub fn validate(&self, tree: &BallTree, subset: &[usize]) -> Result<()> {
        let meets = tree.meets(subset)?;
        let d = tree.depth();
        if self.levels.len() != d {
            return Err(Error::Mismatch(format!(
                "witness covers {} levels, tree has depth {d}",
                self.levels.len()
            )));
        }
        for (a, lw) in self.levels.iter().enumerate() {
            let beta = lw.beta;
            if beta <= a || beta > d {
                return Err(Error::BadWitness {
                    level: a,
                    ball: "-".into(),
                    reason: format!("beta = {beta} is not in ({a}, {d}]"),
                });
            }
            if lw.balls.len() != tree.level(a).len() {
                return Err(Error::Mismatch(format!(
                    "level {a} witness has wrong length"
                )));
            }
            for (v, &w) in lw.balls.iter().enumerate() {
                let bad = |reason: &str| Error::BadWitness {
                    level: a,
                    ball: tree.level(a).label(v).to_string(),
                    reason: reason.to_string(),
                };
                if w >= tree.level(beta).len() {
                    return Err(bad("chosen ball does not exist"));
                }
                if tree.ancestor(beta, w, a) != v {
                    return Err(bad("chosen ball is not inside the ball"));
                }
                if meets[beta][w] {
                    return Err(bad("chosen ball meets the set"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NowhereDense {
    Witness(NowhereDenseWitness),
    FailsAt { level: usize },
}

impl NowhereDense {
    pub fn witness(&self) -> Option<&NowhereDenseWitness> {
        match self {
            NowhereDense::Witness(w) => Some(w),
            NowhereDense::FailsAt { .. } => None,
        }
    }
}
