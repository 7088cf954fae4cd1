use crate::discrete::Surjection;
use crate::error::{Error, Result};
use crate::ultrametric::BallTree;

use super::{BallMap, GenericPresentation};

/// A lift `h` of `g` along `f` that extends `b` on `eta[K]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    pub beta: usize,
    pub h: BallMap,
    /// `a_families[y]`: balls sent to `y` that miss `eta[K]`.
    pub a_families: Vec<Vec<usize>>,
    /// `r_families[y]`: balls sent to `y` that meet `eta[K]`.
    pub r_families: Vec<Vec<usize>>,
}

fn check_inputs(
    ambient: &BallTree,
    k: &BallTree,
    eta: &[usize],
    f: &Surjection,
    b: &[usize],
    g: &BallMap,
) -> Result<()> {
    if !g.cod.same_points(f.cod()) {
        return Err(Error::Mismatch(format!(
            "g lands in `{}` but f ends at `{}`",
            g.cod.id(),
            f.cod().id()
        )));
    }
    if b.len() != eta.len() {
        return Err(Error::Partial(format!(
            "b has {} values for {} points",
            b.len(),
            eta.len()
        )));
    }
    if let Some(&y) = b.iter().find(|&&y| y >= f.dom().len()) {
        return Err(Error::Mismatch(format!(
            "b value {y} is outside `{}`",
            f.dom().id()
        )));
    }
    for (p, (&a, &y)) in eta.iter().zip(b).enumerate() {
        let via_g = g.point_image(ambient, a);
        let via_f = f.apply(y);
        if via_g != via_f {
            return Err(Error::NotCommuting {
                point: k.points().label(p).to_string(),
                detail: format!(
                    "g gives `{}` but f∘b gives `{}`",
                    g.cod.label(via_g),
                    g.cod.label(via_f)
                ),
            });
        }
    }
    Ok(())
}

/// Lifts at the least level above the factoring level of `g` where `b`
/// is constant on balls and every `g`-fiber has enough free balls.
pub fn lift_through_generic(
    pres: &GenericPresentation,
    f: &Surjection,
    b: &[usize],
    g: &BallMap,
) -> Result<Lift> {
    let ambient = pres.ambient();
    check_inputs(ambient, pres.k(), pres.eta(), f, b, g)?;
    let alpha = ambient.factoring_level(&g.point_images(ambient))?;
    (alpha + 1..=ambient.depth())
        .find_map(|beta| lift_at_level(ambient, pres.eta(), f, b, g, beta).ok())
        .ok_or(Error::DepthTooSmall {
            needed: ambient.depth() + 1,
            available: ambient.depth(),
        })
}

/// The lift at a fixed level `beta`. Balls meeting `eta[K]` follow `b`;
/// the free balls of each `g`-fiber first cover the points of `f^{-1}(x)`
/// missed by `b`, then cycle through `f^{-1}(x)`.
pub fn lift_at_level(
    ambient: &BallTree,
    eta: &[usize],
    f: &Surjection,
    b: &[usize],
    g: &BallMap,
    beta: usize,
) -> Result<Lift> {
    if beta > ambient.depth() {
        return Err(Error::InvalidLevel {
            level: beta,
            depth: ambient.depth(),
        });
    }
    let g_beta = g.at_level(ambient, beta)?;
    let nb = ambient.level(beta).len();
    let ny = f.dom().len();
    let mut h: Vec<Option<usize>> = vec![None; nb];
    for (&a, &y) in eta.iter().zip(b) {
        let w = ambient.leaf_ancestor(a, beta);
        match h[w] {
            Some(prev) if prev != y => {
                return Err(Error::Mismatch(format!(
                    "ball `{}` at level {beta} would need both `{}` and `{}`",
                    ambient.level(beta).label(w),
                    f.dom().label(prev),
                    f.dom().label(y)
                )))
            }
            _ => h[w] = Some(y),
        }
    }
    let mut r_families = vec![Vec::new(); ny];
    for (w, y) in h.iter().enumerate() {
        if let Some(y) = y {
            r_families[*y].push(w);
        }
    }
    let mut a_families = vec![Vec::new(); ny];
    for (x, fiber) in f.fibers().into_iter().enumerate() {
        let free: Vec<usize> = (0..nb)
            .filter(|&w| h[w].is_none() && g_beta[w] == x)
            .collect();
        let needy: Vec<usize> = fiber
            .iter()
            .copied()
            .filter(|&y| r_families[y].is_empty())
            .collect();
        if free.len() < needy.len() {
            return Err(Error::Mismatch(format!(
                "fiber over `{}` has {} free balls at level {beta} for {} points",
                f.cod().label(x),
                free.len(),
                needy.len()
            )));
        }
        for (i, &w) in free.iter().enumerate() {
            let y = if i < needy.len() {
                needy[i]
            } else {
                fiber[(i - needy.len()) % fiber.len()]
            };
            h[w] = Some(y);
            a_families[y].push(w);
        }
    }
    let images = h
        .into_iter()
        .map(|y| y.ok_or_else(|| Error::Internal("ball left unassigned".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Lift {
        beta,
        h: BallMap::new(ambient, beta, f.dom().clone(), images)?,
        a_families,
        r_families,
    })
}

/// Every surjection `h` constant on `beta`-balls with `f ∘ h = g` and
/// `h ∘ eta = b`, checked pointwise on the ambient.
pub fn brute_force_lift_oracle(
    pres: &GenericPresentation,
    f: &Surjection,
    b: &[usize],
    g: &BallMap,
    beta: usize,
    bound: u128,
) -> Result<Vec<BallMap>> {
    let ambient = pres.ambient();
    if beta > ambient.depth() {
        return Err(Error::InvalidLevel {
            level: beta,
            depth: ambient.depth(),
        });
    }
    let nb = ambient.level(beta).len();
    let ny = f.dom().len();
    let needed = (ny as u128).checked_pow(nb as u32).unwrap_or(u128::MAX);
    if needed > bound {
        return Err(Error::BoundExceeded { needed, bound });
    }
    let points: Vec<(usize, usize)> = (0..ambient.num_points())
        .map(|a| (ambient.leaf_ancestor(a, beta), g.point_image(ambient, a)))
        .collect();
    let eta_balls: Vec<(usize, usize)> = pres
        .eta()
        .iter()
        .zip(b)
        .map(|(&a, &y)| (ambient.leaf_ancestor(a, beta), y))
        .collect();
    let mut out = Vec::new();
    let mut h = vec![0usize; nb];
    loop {
        let onto = (0..ny).all(|y| h.contains(&y));
        if onto
            && points.iter().all(|&(w, x)| f.apply(h[w]) == x)
            && eta_balls.iter().all(|&(w, y)| h[w] == y)
        {
            out.push(BallMap::new(ambient, beta, f.dom().clone(), h.clone())?);
        }
        let mut i = 0;
        while i < nb && h[i] + 1 == ny {
            h[i] = 0;
            i += 1;
        }
        if i == nb {
            return Ok(out);
        }
        h[i] += 1;
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::discrete::{FiniteSpace, Map};
    use crate::fixtures;
    use crate::fraisse::PaddingSchedule;

    fn k4_pres() -> GenericPresentation {
        GenericPresentation::embed_generic(&fixtures::k4(), 4, &PaddingSchedule::default()).unwrap()
    }

    fn space(id: &str, labels: &[&str]) -> Arc<FiniteSpace> {
        Arc::new(FiniteSpace::from_labels(id, labels.iter().copied()).unwrap())
    }

    fn surj(dom: &Arc<FiniteSpace>, cod: &Arc<FiniteSpace>, images: &[usize]) -> Surjection {
        Surjection::new(Map::new(dom.clone(), cod.clone(), images.to_vec()).unwrap()).unwrap()
    }

    fn level1_g(g: &GenericPresentation, x: &Arc<FiniteSpace>) -> BallMap {
        // ambient level 1 is U_0 = {root, p0, p1}
        BallMap::new(g.ambient(), 1, x.clone(), vec![0, 1, 2]).unwrap()
    }

    fn check(g: &GenericPresentation, f: &Surjection, b: &[usize], gm: &BallMap, lift: &Lift) {
        let amb = g.ambient();
        for a in 0..amb.num_points() {
            assert_eq!(f.apply(lift.h.point_image(amb, a)), gm.point_image(amb, a));
        }
        for (p, &a) in g.eta().iter().enumerate() {
            assert_eq!(lift.h.point_image(amb, a), b[p]);
        }
        assert!(lift.h.is_surjective());
    }

    #[test]
    fn bijective_f_has_unique_lift() {
        let g = k4_pres();
        let x = space("X", &["x0", "x1", "x2"]);
        let y = space("Y", &["y0", "y1", "y2"]);
        let f = surj(&y, &x, &[0, 1, 2]);
        let gm = level1_g(&g, &x);
        let b = vec![0; 4];
        let lift = lift_through_generic(&g, &f, &b, &gm).unwrap();
        assert_eq!(lift.beta, 2);
        check(&g, &f, &b, &gm, &lift);
        let all = brute_force_lift_oracle(&g, &f, &b, &gm, 2, 1 << 20).unwrap();
        assert_eq!(all, vec![lift.h]);
    }

    #[test]
    fn extra_point_goes_to_a_free_ball() {
        let g = k4_pres();
        let x = space("X", &["x0", "x1", "x2"]);
        let y = space("Y", &["y0", "y1", "y2", "extra"]);
        let f = surj(&y, &x, &[0, 1, 2, 0]);
        let gm = level1_g(&g, &x);
        let b = vec![0; 4];
        let lift = lift_through_generic(&g, &f, &b, &gm).unwrap();
        check(&g, &f, &b, &gm, &lift);
        assert!(!lift.a_families[3].is_empty());
        let mask = g.ambient().meets(g.eta()).unwrap();
        for &w in &lift.a_families[3] {
            assert!(!mask[lift.beta][w]);
        }
        let all = brute_force_lift_oracle(&g, &f, &b, &gm, lift.beta, 1 << 20).unwrap();
        assert!(all.contains(&lift.h));
    }

    #[test]
    fn b_separating_balls() {
        let g = k4_pres();
        let x = space("X", &["x0", "x1", "x2"]);
        let y = space("Y", &["left", "right", "y1", "y2"]);
        let f = surj(&y, &x, &[0, 0, 1, 2]);
        let gm = level1_g(&g, &x);
        let b = vec![0, 0, 1, 1];
        let lift = lift_through_generic(&g, &f, &b, &gm).unwrap();
        assert_eq!(lift.beta, 2);
        check(&g, &f, &b, &gm, &lift);
        assert_eq!(lift.r_families[0].len(), 1);
        let all = brute_force_lift_oracle(&g, &f, &b, &gm, 2, 1 << 20).unwrap();
        assert!(all.contains(&lift.h));
    }

    #[test]
    fn violated_square_is_rejected_everywhere() {
        let g = k4_pres();
        let x = space("X", &["x0", "x1", "x2"]);
        let y = space("Y", &["y0", "y1", "y2"]);
        let f = surj(&y, &x, &[0, 1, 2]);
        let gm = level1_g(&g, &x);
        let b = vec![0, 0, 0, 1];
        let err = lift_through_generic(&g, &f, &b, &gm).unwrap_err();
        assert_eq!(
            err,
            Error::NotCommuting {
                point: "11".into(),
                detail: "g gives `x0` but f∘b gives `x1`".into()
            }
        );
        assert!(brute_force_lift_oracle(&g, &f, &b, &gm, 2, 1 << 20)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn oracle_respects_bound() {
        let g = k4_pres();
        let x = space("X", &["x0", "x1", "x2"]);
        let f = Surjection::identity(&x);
        let gm = level1_g(&g, &x);
        assert!(matches!(
            brute_force_lift_oracle(&g, &f, &[0; 4], &gm, 3, 1000),
            Err(Error::BoundExceeded { .. })
        ));
    }
}
