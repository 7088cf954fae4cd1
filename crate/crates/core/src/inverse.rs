//! Finite inverse sequences of discrete spaces and their limits.

use std::sync::Arc;

use crate::discrete::{FiniteSpace, Map, SliceObject, Surjection};
use crate::error::{Error, Result};

/// Spaces `U_0 .. U_n` with steps `U_{a+1} -> U_a`.
///
/// Construction only checks shapes; [`InverseSequence::check_coherent`]
/// reports non-surjective steps so damaged sequences can still be inspected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseSequence {
    spaces: Vec<Arc<FiniteSpace>>,
    steps: Vec<Map>,
}

impl InverseSequence {
    pub fn new(spaces: Vec<Arc<FiniteSpace>>, steps: Vec<Map>) -> Result<Self> {
        if spaces.is_empty() {
            return Err(Error::Mismatch("inverse sequence without spaces".into()));
        }
        if steps.len() + 1 != spaces.len() {
            return Err(Error::Mismatch(format!(
                "{} spaces need {} steps, got {}",
                spaces.len(),
                spaces.len() - 1,
                steps.len()
            )));
        }
        for (a, step) in steps.iter().enumerate() {
            if !step.dom().same_points(&spaces[a + 1]) || !step.cod().same_points(&spaces[a]) {
                return Err(Error::Mismatch(format!(
                    "step {a} must run U_{} -> U_{a}",
                    a + 1
                )));
            }
        }
        Ok(Self { spaces, steps })
    }

    /// Number of the top level `n`.
    pub fn top(&self) -> usize {
        self.spaces.len() - 1
    }

    pub fn spaces(&self) -> &[Arc<FiniteSpace>] {
        &self.spaces
    }

    pub fn space(&self, a: usize) -> &Arc<FiniteSpace> {
        &self.spaces[a]
    }

    pub fn steps(&self) -> &[Map] {
        &self.steps
    }

    pub fn step(&self, a: usize) -> &Map {
        &self.steps[a]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.len()).collect()
    }

    /// Derived bonding map `U_b -> U_a` for `a <= b`.
    pub fn bond(&self, a: usize, b: usize) -> Result<Map> {
        if a > b || b > self.top() {
            return Err(Error::InvalidLevel {
                level: b,
                depth: self.top(),
            });
        }
        let mut map = Map::identity(&self.spaces[b]);
        for c in (a..b).rev() {
            map = map.then(&self.steps[c])?;
        }
        Ok(map)
    }

    /// Position of `x ∈ U_b` in `U_a`.
    pub fn bond_point(&self, a: usize, b: usize, mut x: usize) -> usize {
        for c in (a..b).rev() {
            x = self.steps[c].apply(x);
        }
        x
    }

    /// Lists non-surjective steps and violated composition identities.
    pub fn check_coherent(&self) -> CoherenceReport {
        let mut problems = Vec::new();
        for (a, step) in self.steps.iter().enumerate() {
            if let Some(y) = step.missed_point() {
                problems.push(format!(
                    "step {a} (U_{} -> U_{a}) misses `{}`",
                    a + 1,
                    step.cod().label(y)
                ));
            }
        }
        let n = self.top();
        for a in 0..=n {
            for b in a..=n {
                for c in b..=n {
                    let (Ok(ac), Ok(ab), Ok(bc)) =
                        (self.bond(a, c), self.bond(a, b), self.bond(b, c))
                    else {
                        problems.push(format!("bonding {a}..{c} undefined"));
                        continue;
                    };
                    match bc.then(&ab) {
                        Ok(comp) if comp.same_as(&ac) => {}
                        _ => problems.push(format!("u_{a}^{c} != u_{a}^{b} ∘ u_{b}^{c}")),
                    }
                }
            }
        }
        CoherenceReport { problems }
    }

    fn ensure_coherent(&self) -> Result<()> {
        let report = self.check_coherent();
        match report.problems.first() {
            None => Ok(()),
            Some(p) => Err(Error::Incoherent(p.clone())),
        }
    }

    /// The thread through the top point `x`.
    pub fn thread_of_top(&self, x: usize) -> Thread {
        let n = self.top();
        let mut entries = vec![0; n + 1];
        entries[n] = x;
        for a in (0..n).rev() {
            entries[a] = self.steps[a].apply(entries[a + 1]);
        }
        Thread { entries }
    }

    /// All points of the limit, ordered by their top entry.
    pub fn limit_threads(&self) -> Result<Vec<Thread>> {
        self.ensure_coherent()?;
        Ok((0..self.spaces[self.top()].len())
            .map(|x| self.thread_of_top(x))
            .collect())
    }

    pub fn is_thread(&self, t: &Thread) -> bool {
        t.entries.len() == self.spaces.len()
            && t.entries
                .iter()
                .zip(&self.spaces)
                .all(|(&x, s)| x < s.len())
            && (0..self.top()).all(|a| self.steps[a].apply(t.entries[a + 1]) == t.entries[a])
    }

    /// Keeps levels `0..=m`.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m > self.top() {
            return Err(Error::InvalidLevel {
                level: m,
                depth: self.top(),
            });
        }
        Self::new(self.spaces[..=m].to_vec(), self.steps[..m].to_vec())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoherenceReport {
    pub problems: Vec<String>,
}

impl CoherenceReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

/// A compatible tuple `(x_0, …, x_n)`, one point index per level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Thread {
    pub entries: Vec<usize>,
}

impl Thread {
    pub fn project(&self, a: usize) -> Result<usize> {
        self.entries.get(a).copied().ok_or(Error::InvalidLevel {
            level: a,
            depth: self.entries.len().saturating_sub(1),
        })
    }

    pub fn top(&self) -> usize {
        *self.entries.last().expect("threads are nonempty")
    }
}

/// Arrow of sequences `src -> dst`: for each level `a` of `dst` a surjection
/// `src.spaces[reindex[a]] -> dst.spaces[a]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceArrow {
    src: InverseSequence,
    dst: InverseSequence,
    reindex: Vec<usize>,
    maps: Vec<Surjection>,
}

impl SequenceArrow {
    pub fn new(
        src: InverseSequence,
        dst: InverseSequence,
        reindex: Vec<usize>,
        maps: Vec<Surjection>,
    ) -> Result<Self> {
        if reindex.len() != dst.spaces.len() || maps.len() != dst.spaces.len() {
            return Err(Error::Mismatch(
                "one reindex entry and map per target level".into(),
            ));
        }
        if reindex.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Mismatch("reindex must be nondecreasing".into()));
        }
        for (a, (&r, m)) in reindex.iter().zip(&maps).enumerate() {
            if r > src.top() {
                return Err(Error::InvalidLevel {
                    level: r,
                    depth: src.top(),
                });
            }
            if !m.dom().same_points(&src.spaces[r]) || !m.cod().same_points(&dst.spaces[a]) {
                return Err(Error::Mismatch(format!(
                    "map {a} must run src level {r} -> dst level {a}"
                )));
            }
        }
        Ok(Self {
            src,
            dst,
            reindex,
            maps,
        })
    }

    pub fn src(&self) -> &InverseSequence {
        &self.src
    }

    pub fn dst(&self) -> &InverseSequence {
        &self.dst
    }

    pub fn reindex(&self) -> &[usize] {
        &self.reindex
    }

    pub fn maps(&self) -> &[Surjection] {
        &self.maps
    }

    /// Checks `dst_step ∘ F_{a+1} = F_a ∘ src_bond` for every level.
    pub fn check_natural(&self) -> Result<()> {
        for a in 0..self.dst.top() {
            let (lo, hi) = (self.reindex[a], self.reindex[a + 1]);
            let bond = self.src.bond(lo, hi)?;
            for x in 0..self.src.spaces[hi].len() {
                let via_dst = self.dst.steps[a].apply(self.maps[a + 1].apply(x));
                let via_src = self.maps[a].apply(bond.apply(x));
                if via_dst != via_src {
                    return Err(Error::NotCommuting {
                        point: self.src.spaces[hi].label(x).to_string(),
                        detail: format!("naturality square at target level {a}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// The limit map on threads.
    pub fn apply(&self, t: &Thread) -> Result<Thread> {
        if !self.src.is_thread(t) {
            return Err(Error::Mismatch(
                "not a thread of the source sequence".into(),
            ));
        }
        let entries: Vec<usize> = self
            .reindex
            .iter()
            .zip(&self.maps)
            .map(|(&r, m)| m.apply(t.entries[r]))
            .collect();
        let out = Thread { entries };
        if !self.dst.is_thread(&out) {
            return Err(Error::NotCommuting {
                point: format!("{:?}", t.entries),
                detail: "image is not a thread; the arrow is not natural".into(),
            });
        }
        Ok(out)
    }
}

/// An inverse sequence with compatible maps `φ_a: K -> U_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicedSequence {
    seq: InverseSequence,
    phis: Vec<SliceObject>,
}

impl SlicedSequence {
    /// Checks only that `φ_a` lands in `U_a`; see [`Self::check_compatible`].
    pub fn new(seq: InverseSequence, phis: Vec<SliceObject>) -> Result<Self> {
        if phis.len() != seq.spaces.len() {
            return Err(Error::Mismatch("one φ per level".into()));
        }
        for (a, phi) in phis.iter().enumerate() {
            if !phi.target().same_points(&seq.spaces[a]) {
                return Err(Error::Mismatch(format!("φ_{a} does not land in U_{a}")));
            }
            if !crate::discrete::same_base(phi.base(), phis[0].base()) {
                return Err(Error::Mismatch("φ maps over different bases".into()));
            }
        }
        Ok(Self { seq, phis })
    }

    pub fn seq(&self) -> &InverseSequence {
        &self.seq
    }

    pub fn phis(&self) -> &[SliceObject] {
        &self.phis
    }

    pub fn phi(&self, a: usize) -> &SliceObject {
        &self.phis[a]
    }

    pub fn top(&self) -> usize {
        self.seq.top()
    }

    /// Violations of `u_a^{a+1} ∘ φ_{a+1} = φ_a`, one line per bad point.
    pub fn check_compatible(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let base = self.phis[0].base().clone();
        for a in 0..self.seq.top() {
            let upper = self.phis[a + 1].point_images();
            let lower = self.phis[a].point_images();
            for p in 0..base.num_points() {
                if self.seq.steps[a].apply(upper[p]) != lower[p] {
                    problems.push(format!(
                        "level {a}: point `{}` breaks u∘φ_{} = φ_{a}",
                        base.points().label(p),
                        a + 1
                    ));
                }
            }
        }
        problems
    }
}
