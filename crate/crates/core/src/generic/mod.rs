//! Presentations of `K` inside the generic limit and the maps built on them.

mod extend;
mod lift;
mod retract;

pub use extend::{extend_homeo, AmbientAutoMap, PartialHomeo};
pub use lift::{brute_force_lift_oracle, lift_at_level, lift_through_generic, Lift};
pub use retract::{retract_onto, Retraction};

use std::sync::Arc;

use crate::discrete::{FiniteSpace, SliceObject};
use crate::error::{Error, Result};
use crate::fraisse::{build_fraisse, PaddingSchedule, TaskSchedule};
use crate::inverse::SlicedSequence;
use crate::ultrametric::{BallTree, NowhereDense, NowhereDenseWitness};

/// `K` embedded in the limit of a sliced sequence.
///
/// Ambient level `l` corresponds to sequence level `l - offset`; the offset
/// is 1 when a root level had to be prepended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericPresentation {
    k: Arc<BallTree>,
    seq: SlicedSequence,
    ambient: BallTree,
    offset: usize,
    eta: Vec<usize>,
    witness: NowhereDenseWitness,
}

impl GenericPresentation {
    /// Builds the Fraïssé sequence of length `n` with no tasks and embeds `K`.
    pub fn embed_generic(k: &Arc<BallTree>, n: usize, s: &PaddingSchedule) -> Result<Self> {
        Self::embed_generic_with(k, n, s, &TaskSchedule::new())
    }

    pub fn embed_generic_with(
        k: &Arc<BallTree>,
        n: usize,
        s: &PaddingSchedule,
        schedule: &TaskSchedule,
    ) -> Result<Self> {
        if n < k.depth() {
            return Err(Error::DepthTooSmall {
                needed: k.depth(),
                available: n,
            });
        }
        let build = build_fraisse(k, n, s, schedule)?;
        Self::from_sliced(build.sequence)
    }

    /// Wraps any compatible sliced sequence whose top map is injective.
    pub fn from_sliced(seq: SlicedSequence) -> Result<Self> {
        if let Some(p) = seq.check_compatible().first() {
            return Err(Error::Incoherent(p.clone()));
        }
        let k = seq.phi(0).base().clone();
        let ambient = BallTree::from_sequence(seq.seq())?;
        let offset = usize::from(BallTree::needs_root(seq.seq()));
        let eta = seq.phi(seq.top()).point_images();
        let mut seen = vec![None; ambient.num_points()];
        for (p, &a) in eta.iter().enumerate() {
            if let Some(q) = seen[a] {
                return Err(Error::Mismatch(format!(
                    "phi_{} does not separate `{}` and `{}`",
                    seq.top(),
                    k.points().label(q),
                    k.points().label(p)
                )));
            }
            seen[a] = Some(p);
        }
        let witness = match child_witness(&ambient, &eta) {
            Some(w) => w,
            None => checked_witness(&ambient, &eta)?,
        };
        Ok(Self {
            k,
            seq,
            ambient,
            offset,
            eta,
            witness,
        })
    }

    /// `K` as the induced subtree of `subset` inside a given ambient tree.
    pub fn from_subset(ambient: &BallTree, subset: &[usize]) -> Result<Self> {
        let (k, keep) = ambient.induced(subset)?;
        let k = Arc::new(k);
        let quotients = ambient.ball_quotients();
        let phis = (0..=ambient.depth())
            .map(|l| SliceObject::new(k.clone(), l, ambient.level(l).clone(), keep[l].clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_sliced(SlicedSequence::new(quotients, phis)?)
    }

    pub fn k(&self) -> &Arc<BallTree> {
        &self.k
    }

    pub fn seq(&self) -> &SlicedSequence {
        &self.seq
    }

    pub fn ambient(&self) -> &BallTree {
        &self.ambient
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// `eta[p]`: the ambient point of `K` point `p`.
    pub fn eta(&self) -> &[usize] {
        &self.eta
    }

    pub fn witness(&self) -> &NowhereDenseWitness {
        &self.witness
    }

    /// Ambient points in `eta[K]`.
    pub fn eta_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.ambient.num_points()];
        for &a in &self.eta {
            mask[a] = true;
        }
        mask
    }

    /// Rechecks the stored witness against the exhaustive checker.
    pub fn validate_witness(&self) -> Result<()> {
        self.witness.validate(&self.ambient, &self.eta)?;
        match self.ambient.is_uniformly_nowhere_dense(&self.eta)? {
            NowhereDense::Witness(w) if w == self.witness => Ok(()),
            NowhereDense::Witness(_) => Err(Error::BadWitness {
                level: 0,
                ball: "-".into(),
                reason: "witness is valid but not the canonical one".into(),
            }),
            NowhereDense::FailsAt { level } => Err(Error::NotNowhereDense { level }),
        }
    }
}

/// For each ball, its least child missing `eta[K]`, when every ball has one.
fn child_witness(ambient: &BallTree, eta: &[usize]) -> Option<NowhereDenseWitness> {
    let meets = ambient.meets(eta).ok()?;
    let levels = (0..ambient.depth())
        .map(|l| {
            let balls = (0..ambient.level(l).len())
                .map(|v| {
                    ambient
                        .children(l, v)
                        .iter()
                        .copied()
                        .find(|&c| !meets[l + 1][c])
                })
                .collect::<Option<Vec<_>>>()?;
            Some(crate::ultrametric::LevelWitness { beta: l + 1, balls })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(NowhereDenseWitness { levels })
}

fn checked_witness(ambient: &BallTree, eta: &[usize]) -> Result<NowhereDenseWitness> {
    match ambient.is_uniformly_nowhere_dense(eta)? {
        NowhereDense::Witness(w) => Ok(w),
        NowhereDense::FailsAt { level } => Err(Error::NotNowhereDense { level }),
    }
}

/// A map on the points of an ambient tree that is constant on the balls of
/// `level`, stored by its values on those balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallMap {
    pub level: usize,
    pub cod: Arc<FiniteSpace>,
    pub images: Vec<usize>,
}

impl BallMap {
    pub fn new(
        ambient: &BallTree,
        level: usize,
        cod: Arc<FiniteSpace>,
        images: Vec<usize>,
    ) -> Result<Self> {
        if level > ambient.depth() {
            return Err(Error::InvalidLevel {
                level,
                depth: ambient.depth(),
            });
        }
        if images.len() != ambient.level(level).len() {
            return Err(Error::Partial(format!(
                "{} values for {} balls at level {level}",
                images.len(),
                ambient.level(level).len()
            )));
        }
        if let Some(&y) = images.iter().find(|&&y| y >= cod.len()) {
            return Err(Error::Mismatch(format!(
                "value {y} is outside `{}`",
                cod.id()
            )));
        }
        Ok(Self { level, cod, images })
    }

    pub fn point_image(&self, ambient: &BallTree, a: usize) -> usize {
        self.images[ambient.leaf_ancestor(a, self.level)]
    }

    pub fn point_images(&self, ambient: &BallTree) -> Vec<usize> {
        (0..ambient.num_points())
            .map(|a| self.point_image(ambient, a))
            .collect()
    }

    /// Values on the balls of `level`; fails if the map is not constant there.
    pub fn at_level(&self, ambient: &BallTree, level: usize) -> Result<Vec<usize>> {
        let mut out: Vec<Option<usize>> = vec![None; ambient.level(level).len()];
        for a in 0..ambient.num_points() {
            let y = self.point_image(ambient, a);
            if *out[ambient.leaf_ancestor(a, level)].get_or_insert(y) != y {
                return Err(Error::Mismatch(format!(
                    "map is not constant on the level-{level} balls"
                )));
            }
        }
        Ok(out
            .into_iter()
            .map(|y| y.expect("balls are nonempty"))
            .collect())
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.cod.len()];
        for &y in &self.images {
            hit[y] = true;
        }
        hit.into_iter().all(|h| h)
    }
}
