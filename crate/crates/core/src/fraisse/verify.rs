//! Exact decision procedures for the Fraïssé conditions on a finite sequence.
//!
//! A map `g: U_b -> Y` over `K` is forced on the points reached by `phi_b`;
//! all other points are free within their fiber. Both conditions therefore
//! reduce to per-fiber counting.

use std::sync::Arc;

use crate::digest;
use crate::discrete::{FiniteSpace, Map, SliceObject};
use crate::error::{Error, Result};
use crate::inverse::{InverseSequence, SlicedSequence};

use super::FraisseTask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AFailure {
    pub beta: usize,
    pub point: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AOutcome {
    Witnessed { beta: usize, g: Vec<usize> },
    Failed(Vec<AFailure>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskCheck {
    pub stage: usize,
    pub outcome: AOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UOutcome {
    Witnessed { alpha: usize, g: Vec<usize> },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UCheck {
    pub outcome: UOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FraisseReport {
    pub tasks: Vec<TaskCheck>,
    pub probes: Vec<UCheck>,
    /// One line per task and probe.
    pub log: Vec<String>,
}

impl FraisseReport {
    pub fn all_passed(&self) -> bool {
        self.tasks
            .iter()
            .all(|t| matches!(t.outcome, AOutcome::Witnessed { .. }))
            && self
                .probes
                .iter()
                .all(|p| matches!(p.outcome, UOutcome::Witnessed { .. }))
    }
}

fn map_digest(cod: &FiniteSpace, images: &[usize]) -> String {
    digest(images.iter().map(|&y| cod.label(y)))
}

/// Checks (A) for every task and (U) for every probe.
pub fn verify_fraisse(
    seq: &SlicedSequence,
    tasks: &[FraisseTask],
    probes: &[SliceObject],
) -> FraisseReport {
    let mut log = Vec::new();
    let task_checks: Vec<TaskCheck> = tasks
        .iter()
        .enumerate()
        .map(|(i, task)| {
            let outcome = check_task(seq, task);
            log.push(match &outcome {
                AOutcome::Witnessed { beta, g } => format!(
                    "A task {i} stage {}: witnessed at beta {beta}, g {}",
                    task.stage,
                    map_digest(task.arrow.src().target(), g)
                ),
                AOutcome::Failed(fails) => {
                    let last = fails.last().expect("at least one level is tried");
                    format!(
                        "A task {i} stage {}: FAILED, at beta {} point `{}`: {}",
                        task.stage, last.beta, last.point, last.reason
                    )
                }
            });
            TaskCheck {
                stage: task.stage,
                outcome,
            }
        })
        .collect();
    let probe_checks: Vec<UCheck> = probes
        .iter()
        .enumerate()
        .map(|(i, probe)| {
            let outcome = check_probe(seq, probe);
            log.push(match &outcome {
                UOutcome::Witnessed { alpha, g } => format!(
                    "U probe {i}: witnessed at alpha {alpha}, g {}",
                    map_digest(probe.target(), g)
                ),
                UOutcome::Failed { reason } => format!("U probe {i}: FAILED, {reason}"),
            });
            UCheck { outcome }
        })
        .collect();
    FraisseReport {
        tasks: task_checks,
        probes: probe_checks,
        log,
    }
}

fn check_task(seq: &SlicedSequence, task: &FraisseTask) -> AOutcome {
    let j = task.stage;
    let n = seq.top();
    if j > n || !task.arrow.dst().target().same_points(seq.seq().space(j)) {
        return AOutcome::Failed(vec![AFailure {
            beta: j,
            point: "-".into(),
            reason: format!("task does not end at U_{j}"),
        }]);
    }
    let mut failures = Vec::new();
    for beta in j..=n {
        match solve_a(seq, task, beta) {
            Ok(g) => return AOutcome::Witnessed { beta, g },
            Err(f) => failures.push(f),
        }
    }
    AOutcome::Failed(failures)
}

fn solve_a(
    seq: &SlicedSequence,
    task: &FraisseTask,
    beta: usize,
) -> std::result::Result<Vec<usize>, AFailure> {
    let s = seq.seq();
    let j = task.stage;
    let k = seq.phi(beta).base();
    let f = task.arrow.q();
    let y = task.arrow.src();
    let ub = s.space(beta);
    let fail = |point: String, reason: String| AFailure {
        beta,
        point,
        reason,
    };
    let down: Vec<usize> = (0..ub.len()).map(|w| s.bond_point(j, beta, w)).collect();
    let mut g: Vec<Option<usize>> = vec![None; ub.len()];
    let phi = seq.phi(beta);
    for p in 0..k.num_points() {
        let w = phi.image_of_point(p);
        let want = y.image_of_point(p);
        if f.apply(want) != down[w] {
            return Err(fail(
                k.points().label(p).to_string(),
                format!(
                    "phi sends it to `{}` over `{}`, but the task needs a point over `{}`",
                    ub.label(w),
                    s.space(j).label(down[w]),
                    s.space(j).label(f.apply(want))
                ),
            ));
        }
        match g[w] {
            Some(prev) if prev != want => {
                return Err(fail(
                    k.points().label(p).to_string(),
                    format!(
                        "`{}` would have to go to both `{}` and `{}`",
                        ub.label(w),
                        y.target().label(prev),
                        y.target().label(want)
                    ),
                ))
            }
            _ => g[w] = Some(want),
        }
    }
    let fibers = f.fibers();
    let mut covered = vec![false; y.target().len()];
    for v in g.iter().flatten() {
        covered[*v] = true;
    }
    let mut free: Vec<Vec<usize>> = vec![Vec::new(); fibers.len()];
    for w in 0..ub.len() {
        if g[w].is_none() {
            free[down[w]].push(w);
        }
    }
    for (x, fib) in fibers.iter().enumerate() {
        let missing: Vec<usize> = fib.iter().copied().filter(|&v| !covered[v]).collect();
        if missing.len() > free[x].len() {
            return Err(fail(
                y.target().label(missing[free[x].len()]).to_string(),
                format!(
                    "fiber over `{}` has {} free points for {} uncovered targets",
                    s.space(j).label(x),
                    free[x].len(),
                    missing.len()
                ),
            ));
        }
        for (i, &w) in free[x].iter().enumerate() {
            g[w] = Some(missing.get(i).copied().unwrap_or(fib[0]));
        }
    }
    Ok(g.into_iter()
        .map(|v| v.expect("every point assigned"))
        .collect())
}

fn check_probe(seq: &SlicedSequence, probe: &SliceObject) -> UOutcome {
    if !crate::discrete::same_base(probe.base(), seq.phi(0).base()) {
        return UOutcome::Failed {
            reason: "probe lives over a different space".into(),
        };
    }
    let mut reason = String::new();
    for alpha in 0..=seq.top() {
        let ua = seq.seq().space(alpha);
        let phi = seq.phi(alpha);
        let k = phi.base();
        let mut g: Vec<Option<usize>> = vec![None; ua.len()];
        let mut conflict = None;
        for p in 0..k.num_points() {
            let w = phi.image_of_point(p);
            let want = probe.image_of_point(p);
            match g[w] {
                Some(prev) if prev != want => {
                    conflict = Some(k.points().label(p).to_string());
                    break;
                }
                _ => g[w] = Some(want),
            }
        }
        if let Some(p) = conflict {
            reason = format!("at alpha {alpha}, phi does not separate `{p}` as the probe does");
            continue;
        }
        let mut covered = vec![false; probe.target().len()];
        for v in g.iter().flatten() {
            covered[*v] = true;
        }
        let missing: Vec<usize> = (0..covered.len()).filter(|&v| !covered[v]).collect();
        let free: Vec<usize> = (0..ua.len()).filter(|&w| g[w].is_none()).collect();
        if missing.len() > free.len() {
            reason = format!(
                "at alpha {alpha}, {} free points for {} uncovered targets",
                free.len(),
                missing.len()
            );
            continue;
        }
        for (i, &w) in free.iter().enumerate() {
            g[w] = Some(missing.get(i).copied().unwrap_or(0));
        }
        return UOutcome::Witnessed {
            alpha,
            g: g.into_iter().map(|v| v.expect("assigned")).collect(),
        };
    }
    UOutcome::Failed { reason }
}

/// Copy of `seq` whose bonding map at `step` sends one `phi_{step+1}` image
/// to a different point of `U_step`.
pub fn corrupt_bonding(seq: &SlicedSequence, step: usize) -> Result<SlicedSequence> {
    let s = seq.seq();
    if step >= s.top() {
        return Err(Error::InvalidLevel {
            level: step + 1,
            depth: s.top(),
        });
    }
    let w = seq.phi(step + 1).image_of_point(0);
    let bond = s.step(step);
    let mut images = bond.images().to_vec();
    images[w] = (images[w] + 1) % s.space(step).len();
    let mut steps = s.steps().to_vec();
    steps[step] = Map::new(bond.dom().clone(), bond.cod().clone(), images)?;
    let spaces: Vec<Arc<FiniteSpace>> = s.spaces().to_vec();
    SlicedSequence::new(InverseSequence::new(spaces, steps)?, seq.phis().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::SliceArrow;
    use crate::fixtures;
    use crate::fraisse::{build_fraisse, PaddingSchedule, TaskGenerator, TaskSchedule};

    fn s() -> PaddingSchedule {
        PaddingSchedule::default()
    }

    /// Every `g: U_beta -> Y` that absorbs the task, by enumeration.
    fn brute_a(seq: &SlicedSequence, task: &FraisseTask, beta: usize) -> Vec<Vec<usize>> {
        let ub = seq.seq().space(beta).len();
        let ny = task.arrow.src().target().len();
        let bond = seq.seq().bond(task.stage, beta).unwrap();
        let mut out = Vec::new();
        let mut g = vec![0usize; ub];
        loop {
            let ok_bond = (0..ub).all(|w| task.arrow.q().apply(g[w]) == bond.apply(w));
            let ok_k = (0..seq.phi(beta).base().num_points())
                .all(|p| g[seq.phi(beta).image_of_point(p)] == task.arrow.src().image_of_point(p));
            let onto = (0..ny).all(|v| g.contains(&v));
            if ok_bond && ok_k && onto {
                out.push(g.clone());
            }
            let mut i = 0;
            while i < ub && g[i] + 1 == ny {
                g[i] = 0;
                i += 1;
            }
            if i == ub {
                return out;
            }
            g[i] += 1;
        }
    }

    #[test]
    fn exact_a_agrees_with_enumeration() {
        let k = fixtures::one_point();
        let sched = TaskSchedule::new()
            .with("s0", TaskGenerator::SplitPoint { stage: 0, point: 1 })
            .with("id", TaskGenerator::Identity { stage: 0 });
        let b = build_fraisse(&k, 2, &s(), &sched).unwrap();
        for task in b.tasks() {
            for beta in task.stage..=b.sequence.top() {
                if b.sequence.seq().space(beta).len() > 9 {
                    continue;
                }
                let all = brute_a(&b.sequence, &task, beta);
                match solve_a(&b.sequence, &task, beta) {
                    Ok(g) => assert!(all.contains(&g)),
                    Err(_) => assert!(all.is_empty()),
                }
            }
        }
    }

    #[test]
    fn spine_probe_constant_is_witnessed_at_zero() {
        let k = fixtures::k4();
        let b = build_fraisse(&k, 3, &s(), &TaskSchedule::new()).unwrap();
        let t = Arc::new(FiniteSpace::singleton("T", "t"));
        let probe = SliceObject::new(k.clone(), 0, t, vec![0]).unwrap();
        let r = verify_fraisse(&b.sequence, &[], &[probe]);
        assert!(matches!(
            r.probes[0].outcome,
            UOutcome::Witnessed { alpha: 0, .. }
        ));
    }

    #[test]
    fn probe_needing_separation_waits_for_level() {
        let k = fixtures::k4();
        let b = build_fraisse(&k, 3, &s(), &TaskSchedule::new()).unwrap();
        let t = Arc::new(FiniteSpace::from_labels("T", ["a", "b", "c", "d", "e"]).unwrap());
        let probe = SliceObject::new(k.clone(), 2, t, vec![0, 1, 2, 3]).unwrap();
        let r = verify_fraisse(&b.sequence, &[], std::slice::from_ref(&probe));
        let UOutcome::Witnessed { alpha, g } = &r.probes[0].outcome else {
            panic!("{:?}", r.probes[0]);
        };
        assert_eq!(*alpha, 2);
        let q = crate::discrete::Surjection::new(
            Map::new(
                b.sequence.seq().space(2).clone(),
                probe.target().clone(),
                g.clone(),
            )
            .unwrap(),
        )
        .unwrap();
        SliceArrow::new(b.sequence.phi(2).clone(), probe, q).unwrap();
    }

    #[test]
    fn build_passes_own_tasks_and_mutant_fails() {
        let k = fixtures::k4();
        let sched = TaskSchedule::new()
            .with("a", TaskGenerator::SplitPoint { stage: 1, point: 0 })
            .with("b", TaskGenerator::SplitPoint { stage: 1, point: 4 });
        let b = build_fraisse(&k, 3, &s(), &sched).unwrap();
        let r = verify_fraisse(&b.sequence, &b.tasks(), &[]);
        assert!(r.all_passed(), "{:?}", r.log);
        assert_eq!(r.log.len(), 2);
        let bad = corrupt_bonding(&b.sequence, 1).unwrap();
        let r = verify_fraisse(&bad, &b.tasks(), &[]);
        let AOutcome::Failed(fails) = &r.tasks[0].outcome else {
            panic!("mutant passed");
        };
        assert!(fails.iter().any(|f| f.point == "00"));
    }
}
