use crate::discrete::{Map, Surjection};
use crate::error::{Error, Result};
use crate::ultrametric::BallTree;

use super::{lift_at_level, BallMap, GenericPresentation};

/// A bijection `K -> L` between two embedded sets that respects balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialHomeo {
    src: GenericPresentation,
    dst: GenericPresentation,
    h: Vec<usize>,
}

impl PartialHomeo {
    pub fn new(src: GenericPresentation, dst: GenericPresentation, h: Vec<usize>) -> Result<Self> {
        let (k, l) = (src.k().clone(), dst.k().clone());
        if h.len() != k.num_points() || k.num_points() != l.num_points() {
            return Err(Error::Mismatch(format!(
                "h has {} values, K has {} points, L has {}",
                h.len(),
                k.num_points(),
                l.num_points()
            )));
        }
        let mut seen = vec![false; l.num_points()];
        for (x, &y) in h.iter().enumerate() {
            if y >= seen.len() || std::mem::replace(&mut seen[y], true) {
                return Err(Error::NotHomeomorphism {
                    a: k.points().label(x).to_string(),
                    b: k.points().label(x).to_string(),
                    detail: "h is not a bijection".into(),
                });
            }
        }
        let common = k.depth().min(l.depth());
        for x in 0..h.len() {
            for y in x + 1..h.len() {
                let uk = k.u(x, y).min(common);
                let ul = l.u(h[x], h[y]).min(common);
                if uk != ul {
                    return Err(Error::NotHomeomorphism {
                        a: k.points().label(x).to_string(),
                        b: k.points().label(y).to_string(),
                        detail: format!("they share a ball down to level {uk} in K but {ul} in L"),
                    });
                }
            }
        }
        Ok(Self { src, dst, h })
    }

    pub fn src(&self) -> &GenericPresentation {
        &self.src
    }

    pub fn dst(&self) -> &GenericPresentation {
        &self.dst
    }

    pub fn h(&self) -> &[usize] {
        &self.h
    }
}

/// Level bijections `levels[l]: src ambient level l -> dst ambient level l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbientAutoMap {
    pub levels: Vec<Vec<usize>>,
}

impl AmbientAutoMap {
    pub fn apply_point(&self, a: usize) -> usize {
        self.levels[self.levels.len() - 1][a]
    }

    pub fn check_bijective(&self, src: &BallTree, dst: &BallTree) -> Result<()> {
        if self.levels.len() != src.depth() + 1 || src.depth() != dst.depth() {
            return Err(Error::Mismatch("level counts differ".into()));
        }
        for (l, map) in self.levels.iter().enumerate() {
            if map.len() != src.level(l).len() || map.len() != dst.level(l).len() {
                return Err(Error::Mismatch(format!("level {l} sizes differ")));
            }
            let mut seen = vec![false; map.len()];
            for (v, &w) in map.iter().enumerate() {
                if w >= seen.len() || std::mem::replace(&mut seen[w], true) {
                    return Err(Error::Mismatch(format!(
                        "level {l} is not a bijection at `{}`",
                        src.level(l).label(v)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn check_parents(&self, src: &BallTree, dst: &BallTree) -> Result<()> {
        for l in 0..src.depth() {
            for (v, &p) in src.parents(l).iter().enumerate() {
                if dst.parents(l)[self.levels[l + 1][v]] != self.levels[l][p] {
                    return Err(Error::NotCommuting {
                        point: src.level(l + 1).label(v).to_string(),
                        detail: format!("parent square fails at level {}", l + 1),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn check_extends(&self, p: &PartialHomeo) -> Result<()> {
        for (x, &y) in p.h.iter().enumerate() {
            let got = self.apply_point(p.src.eta()[x]);
            let want = p.dst.eta()[y];
            if got != want {
                return Err(Error::NotCommuting {
                    point: p.src.k().points().label(x).to_string(),
                    detail: format!(
                        "H sends it to `{}`, h to `{}`",
                        p.dst.ambient().points().label(got),
                        p.dst.ambient().points().label(want)
                    ),
                });
            }
        }
        Ok(())
    }

    /// All three clauses against the ambients of `p`.
    pub fn check(&self, p: &PartialHomeo) -> Result<()> {
        self.check_bijective(p.src.ambient(), p.dst.ambient())?;
        self.check_parents(p.src.ambient(), p.dst.ambient())?;
        self.check_extends(p)
    }
}

fn invert(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; map.len()];
    for (v, &w) in map.iter().enumerate() {
        inv[w] = v;
    }
    inv
}

/// One round: given a level-`l` bijection `from -> to`, lifts it to level
/// `l + 1` so that the image of `eta_from` follows `eta_to`.
fn round(
    l: usize,
    from: &BallTree,
    to: &BallTree,
    eta_from: &[usize],
    eta_to: &[usize],
    current: &[usize],
) -> Result<Vec<usize>> {
    let fail = |detail: String| Error::ExtensionFailed { round: l, detail };
    if from.level(l + 1).len() != to.level(l + 1).len() {
        return Err(fail(format!(
            "level {} has {} balls on one side and {} on the other",
            l + 1,
            from.level(l + 1).len(),
            to.level(l + 1).len()
        )));
    }
    let parent = Surjection::new(Map::new(
        to.level(l + 1).clone(),
        to.level(l).clone(),
        to.parents(l).to_vec(),
    )?)?;
    let g = BallMap::new(from, l, to.level(l).clone(), current.to_vec())?;
    let b: Vec<usize> = eta_to.iter().map(|&a| to.leaf_ancestor(a, l + 1)).collect();
    for (p, (&a, &y)) in eta_from.iter().zip(&b).enumerate() {
        if g.point_image(from, a) != parent.apply(y) {
            return Err(fail(format!(
                "the images of point {p} are not at the same place at level {l}"
            )));
        }
    }
    let lift = lift_at_level(from, eta_from, &parent, &b, &g, l + 1)
        .map_err(|e| fail(format!("{e}; need a deeper or matching ambient")))?;
    let next = lift.h.images;
    let mut seen = vec![false; next.len()];
    for (v, &w) in next.iter().enumerate() {
        if std::mem::replace(&mut seen[w], true) {
            return Err(fail(format!(
                "two balls of level {} go to `{}`; child counts differ under `{}`",
                l + 1,
                to.level(l + 1).label(w),
                from.level(l).label(from.parents(l)[v])
            )));
        }
    }
    Ok(next)
}

/// Back and forth: round `l` extends the level-`l` bijection one level down,
/// lifting from the source side on even rounds and from the target side on
/// odd rounds.
pub fn extend_homeo(p: &PartialHomeo) -> Result<AmbientAutoMap> {
    let (a, b) = (p.src.ambient(), p.dst.ambient());
    if a.depth() != b.depth() {
        return Err(Error::ExtensionFailed {
            round: 0,
            detail: format!("ambient depths {} and {} differ", a.depth(), b.depth()),
        });
    }
    let eta_src: Vec<usize> = p.src.eta().to_vec();
    let eta_dst: Vec<usize> = p.h.iter().map(|&y| p.dst.eta()[y]).collect();
    let mut levels = vec![vec![0usize]];
    for l in 0..a.depth() {
        let current = &levels[l];
        let next = if l % 2 == 0 {
            round(l, a, b, &eta_src, &eta_dst, current)?
        } else {
            invert(&round(l, b, a, &eta_dst, &eta_src, &invert(current))?)
        };
        levels.push(next);
    }
    let map = AmbientAutoMap { levels };
    map.check(p)
        .map_err(|e| Error::Internal(format!("extension fails its contract: {e}")))?;
    Ok(map)
}
