use std::fmt;
use std::sync::Arc;

use crate::discrete::{
    amalgamate_slice, compose_slice, FiniteSpace, Map, SliceArrow, SliceObject, Surjection,
};
use crate::error::{Error, Result};
use crate::inverse::{InverseSequence, SlicedSequence};

use super::{dominate_arrow, dominating_arrow, PaddedObject, PaddingSchedule};

/// An arrow `f: Y -> U_stage` that the sequence has to absorb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FraisseTask {
    pub stage: usize,
    pub arrow: SliceArrow,
}

type MakeArrow = dyn Fn(&PaddedObject, &PaddingSchedule) -> Result<SliceArrow> + Send + Sync;

/// Produces a task arrow once `U_stage` exists.
#[derive(Clone)]
pub enum TaskGenerator {
    /// The identity arrow on `U_stage`.
    Identity {
        stage: usize,
    },
    /// `U_stage` with its points renamed, mapped back bijectively.
    Relabel {
        stage: usize,
    },
    /// `U_stage` with point `point` replaced by two copies.
    SplitPoint {
        stage: usize,
        point: usize,
    },
    /// The next dominating arrow into `U_stage`.
    Dominating {
        stage: usize,
    },
    Custom {
        stage: usize,
        make: Arc<MakeArrow>,
    },
}

impl fmt::Debug for TaskGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity { stage } => write!(f, "Identity({stage})"),
            Self::Relabel { stage } => write!(f, "Relabel({stage})"),
            Self::SplitPoint { stage, point } => write!(f, "SplitPoint({stage}, {point})"),
            Self::Dominating { stage } => write!(f, "Dominating({stage})"),
            Self::Custom { stage, .. } => write!(f, "Custom({stage})"),
        }
    }
}

impl TaskGenerator {
    pub fn stage(&self) -> usize {
        match self {
            Self::Identity { stage }
            | Self::Relabel { stage }
            | Self::SplitPoint { stage, .. }
            | Self::Dominating { stage }
            | Self::Custom { stage, .. } => *stage,
        }
    }

    pub fn generate(&self, u: &PaddedObject, s: &PaddingSchedule) -> Result<SliceArrow> {
        let target = u.target();
        match self {
            Self::Identity { .. } => Ok(SliceArrow::identity(&u.object)),
            Self::Relabel { .. } => {
                let labels = target.points().iter().map(|l| format!("r:{l}")).collect();
                let y = Arc::new(FiniteSpace::new(format!("r:{}", target.id()), labels)?);
                let obj = SliceObject::new(
                    u.base().clone(),
                    u.object.level(),
                    y.clone(),
                    u.object.ball_images().to_vec(),
                )?;
                let q = Surjection::new(Map::new(y, target.clone(), (0..target.len()).collect())?)?;
                SliceArrow::new(obj, u.object.clone(), q)
            }
            Self::SplitPoint { point, .. } => split_point(u, *point),
            Self::Dominating { .. } => {
                let k = u.base();
                let next = ((u.alpha + 1).min(k.depth()), u.gamma + 1);
                dominating_arrow(k, (u.alpha, u.gamma), next, s)
            }
            Self::Custom { make, .. } => make(u, s),
        }
    }
}

fn split_point(u: &PaddedObject, point: usize) -> Result<SliceArrow> {
    let target = u.target();
    if point >= target.len() {
        return Err(Error::Mismatch(format!(
            "cannot split point {point} of `{}` ({} points)",
            target.id(),
            target.len()
        )));
    }
    let mut labels = Vec::with_capacity(target.len() + 1);
    let mut back = Vec::with_capacity(target.len() + 1);
    for (i, l) in target.points().iter().enumerate() {
        if i == point {
            labels.push(format!("{l}#0"));
            labels.push(format!("{l}#1"));
            back.extend([i, i]);
        } else {
            labels.push(l.clone());
            back.push(i);
        }
    }
    let y = Arc::new(FiniteSpace::new(
        format!("{}/{}", target.id(), target.label(point)),
        labels,
    )?);
    let lift = |x: usize| if x > point { x + 1 } else { x };
    let obj = SliceObject::new(
        u.base().clone(),
        u.object.level(),
        y.clone(),
        u.object.ball_images().iter().map(|&x| lift(x)).collect(),
    )?;
    let q = Surjection::new(Map::new(y, target.clone(), back)?)?;
    SliceArrow::new(obj, u.object.clone(), q)
}

/// Tagged task generators, serviced first in, first out.
#[derive(Debug, Clone, Default)]
pub struct TaskSchedule {
    entries: Vec<(String, TaskGenerator)>,
}

impl TaskSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tag: impl Into<String>, generator: TaskGenerator) -> &mut Self {
        self.entries.push((tag.into(), generator));
        self
    }

    pub fn with(mut self, tag: impl Into<String>, generator: TaskGenerator) -> Self {
        self.push(tag, generator);
        self
    }

    pub fn entries(&self) -> &[(String, TaskGenerator)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A task absorbed at `beta`: `bond(stage, beta) = task ∘ witness`.
#[derive(Debug, Clone)]
pub struct ServicedTask {
    pub tag: String,
    pub task: FraisseTask,
    pub beta: usize,
    pub witness: SliceArrow,
}

#[derive(Debug, Clone)]
pub struct FraisseBuild {
    pub sequence: SlicedSequence,
    pub objects: Vec<PaddedObject>,
    /// `bonds[a]: U_{a+1} -> U_a`.
    pub bonds: Vec<SliceArrow>,
    pub serviced: Vec<ServicedTask>,
}

impl FraisseBuild {
    pub fn tasks(&self) -> Vec<FraisseTask> {
        self.serviced.iter().map(|t| t.task.clone()).collect()
    }

    /// `u_a^b` as a slice arrow.
    pub fn bond(&self, a: usize, b: usize) -> Result<SliceArrow> {
        slice_bond(&self.objects, &self.bonds, a, b)
    }
}

fn slice_bond(
    objects: &[PaddedObject],
    bonds: &[SliceArrow],
    a: usize,
    b: usize,
) -> Result<SliceArrow> {
    if a > b || b >= objects.len() {
        return Err(Error::InvalidLevel {
            level: b,
            depth: objects.len() - 1,
        });
    }
    let mut acc = SliceArrow::identity(&objects[b].object);
    for i in (a..b).rev() {
        acc = compose_slice(&bonds[i], &acc)?;
    }
    Ok(acc)
}

/// Builds `U_0 .. U_n` starting from `X_0^0`. Step `k` pulls every ready
/// task (stage <= k) back to `U_k`, then closes the resulting arrow into
/// `U_k` with one domination step, which yields `U_{k+1}`.
pub fn build_fraisse(
    k: &Arc<crate::ultrametric::BallTree>,
    n: usize,
    s: &PaddingSchedule,
    schedule: &TaskSchedule,
) -> Result<FraisseBuild> {
    if n == 0 {
        return Err(Error::DepthTooSmall {
            needed: 1,
            available: 0,
        });
    }
    if let Some((tag, g)) = schedule.entries.iter().find(|(_, g)| g.stage() >= n) {
        return Err(Error::Unserviceable {
            tag: tag.clone(),
            reason: format!("stage {} is not below the length {n}", g.stage()),
        });
    }
    let mut objects = vec![super::make_padded_object(k, 0, 0, s)?];
    let mut bonds: Vec<SliceArrow> = Vec::new();
    let mut serviced = Vec::new();
    let mut pending: Vec<usize> = (0..schedule.len()).collect();

    for step in 0..n {
        let current = objects[step].clone();
        let mut apex = SliceArrow::identity(&current.object);
        let mut legs: Vec<(usize, FraisseTask, SliceArrow)> = Vec::new();
        let (ready, later): (Vec<usize>, Vec<usize>) = pending
            .iter()
            .partition(|&&i| schedule.entries[i].1.stage() <= step);
        pending = later;
        for i in ready {
            let (tag, generator) = &schedule.entries[i];
            let stage = generator.stage();
            let arrow = generator.generate(&objects[stage], s)?;
            if !arrow.dst().same_map(&objects[stage].object) {
                return Err(Error::Unserviceable {
                    tag: tag.clone(),
                    reason: format!("arrow does not end at U_{stage}"),
                });
            }
            let down = compose_slice(&slice_bond(&objects, &bonds, stage, step)?, &apex)?;
            let square = amalgamate_slice(&arrow, &down)?;
            apex = compose_slice(&apex, &square.right)?;
            for leg in &mut legs {
                leg.2 = compose_slice(&leg.2, &square.right)?;
            }
            legs.push((i, FraisseTask { stage, arrow }, square.left));
        }
        let closed = dominate_arrow(&apex, &current, s)?;
        objects.push(closed.source);
        bonds.push(closed.dominating);
        for (i, task, leg) in legs {
            let witness = compose_slice(&leg, &closed.g)?;
            let expected = slice_bond(&objects, &bonds, task.stage, step + 1)?;
            let got = crate::discrete::compose(task.arrow.q(), witness.q())?;
            if &got != expected.q() {
                return Err(Error::Internal(format!(
                    "task `{}` is not absorbed at step {step}",
                    schedule.entries[i].0
                )));
            }
            serviced.push(ServicedTask {
                tag: schedule.entries[i].0.clone(),
                task,
                beta: step + 1,
                witness,
            });
        }
    }

    let spaces = objects.iter().map(|o| o.target().clone()).collect();
    let steps = bonds.iter().map(|b| b.q().as_map().clone()).collect();
    let sequence = SlicedSequence::new(
        InverseSequence::new(spaces, steps)?,
        objects.iter().map(|o| o.object.clone()).collect(),
    )?;
    Ok(FraisseBuild {
        sequence,
        objects,
        bonds,
        serviced,
    })
}
