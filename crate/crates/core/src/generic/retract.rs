use crate::discrete::{Map, Surjection};
use crate::error::{Error, Result};
use crate::inverse::SequenceArrow;

use super::GenericPresentation;

/// An arrow from the presenting sequence onto the ball quotients of `K`,
/// and the induced map on ambient points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retraction {
    pub arrow: SequenceArrow,
    /// `table[a]`: the `K` point that ambient point `a` retracts to.
    pub table: Vec<usize>,
    /// `ball_levels[a]`: ambient level on whose balls `r` is constant modulo
    /// the `a`-balls of `K`.
    pub ball_levels: Vec<usize>,
}

impl Retraction {
    /// Checks `r ∘ eta = id` and the recorded uniform-continuity levels.
    pub fn check(&self, pres: &GenericPresentation) -> Result<()> {
        let k = pres.k();
        for (p, &a) in pres.eta().iter().enumerate() {
            if self.table[a] != p {
                return Err(Error::NotCommuting {
                    point: k.points().label(p).to_string(),
                    detail: format!("r sends its image to `{}`", k.points().label(self.table[a])),
                });
            }
        }
        let amb = pres.ambient();
        for (alpha, &level) in self.ball_levels.iter().enumerate() {
            let mut seen: Vec<Option<usize>> = vec![None; amb.level(level).len()];
            for a in 0..amb.num_points() {
                let ball = k.leaf_ancestor(self.table[a], alpha);
                if *seen[amb.leaf_ancestor(a, level)].get_or_insert(ball) != ball {
                    return Err(Error::Mismatch(format!(
                        "r is not constant modulo level-{alpha} balls on ambient level {level}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn retract_onto(pres: &GenericPresentation) -> Result<Retraction> {
    let k = pres.k();
    let sliced = pres.seq();
    let seq = sliced.seq();
    let n = seq.top();
    let d = k.depth();

    // least sequence level whose phi separates the a-balls of K
    let separates = |m: usize, alpha: usize| {
        let phi = sliced.phi(m).point_images();
        let mut owner: Vec<Option<usize>> = vec![None; seq.space(m).len()];
        (0..k.num_points()).all(|p| {
            let ball = k.leaf_ancestor(p, alpha);
            *owner[phi[p]].get_or_insert(ball) == ball
        })
    };
    let mut reindex = Vec::with_capacity(d + 1);
    for alpha in 0..=d {
        let from = reindex.last().copied().unwrap_or(0);
        let m = (from..=n)
            .find(|&m| separates(m, alpha))
            .ok_or(Error::DepthTooSmall {
                needed: n + 1,
                available: n,
            })?;
        reindex.push(m);
    }

    let mut maps: Vec<Surjection> = Vec::with_capacity(d + 1);
    let mut prev: Vec<usize> = Vec::new();
    for alpha in 0..=d {
        let m = reindex[alpha];
        let phi = sliced.phi(m).point_images();
        let mut images: Vec<Option<usize>> = vec![None; seq.space(m).len()];
        for p in 0..k.num_points() {
            images[phi[p]] = Some(k.leaf_ancestor(p, alpha));
        }
        let images: Vec<usize> = (0..images.len())
            .map(|w| {
                images[w].unwrap_or_else(|| {
                    if alpha == 0 {
                        0
                    } else {
                        let below = seq.bond_point(reindex[alpha - 1], m, w);
                        k.children(alpha - 1, prev[below])[0]
                    }
                })
            })
            .collect();
        maps.push(Surjection::new(Map::new(
            seq.space(m).clone(),
            k.level(alpha).clone(),
            images.clone(),
        )?)?);
        prev = images;
    }

    let arrow = SequenceArrow::new(seq.clone(), k.ball_quotients(), reindex.clone(), maps)?;
    arrow.check_natural()?;
    let top = &arrow.maps()[d];
    let table = (0..pres.ambient().num_points())
        .map(|a| top.apply(seq.bond_point(reindex[d], n, a)))
        .collect();
    let retraction = Retraction {
        arrow,
        table,
        ball_levels: reindex.iter().map(|m| m + pres.offset()).collect(),
    };
    retraction.check(pres)?;
    Ok(retraction)
}
