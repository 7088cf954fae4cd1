//! The dominating family over `K` and the two domination constructions.
//!
//! A padded object `X_a^g` is the space of `a`-balls of `K` followed by
//! `pad(g)` extra points that `K` never reaches. Arrows between padded objects
//! send balls to their ancestors and split the pads between pads and balls.

mod build;
mod verify;

pub use build::{
    build_fraisse, FraisseBuild, FraisseTask, ServicedTask, TaskGenerator, TaskSchedule,
};
pub use verify::{
    corrupt_bonding, verify_fraisse, AFailure, AOutcome, FraisseReport, TaskCheck, UCheck, UOutcome,
};

use std::sync::Arc;

use crate::discrete::{FiniteSpace, Map, SliceArrow, SliceObject, Surjection};
use crate::error::{Error, Result};
use crate::ultrametric::BallTree;

/// Largest pad size the engine will allocate.
pub const MAX_PAD: usize = 1 << 20;

/// `pad(g) = base * growth^g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaddingSchedule {
    base: usize,
    growth: usize,
}

impl Default for PaddingSchedule {
    fn default() -> Self {
        Self { base: 2, growth: 2 }
    }
}

impl PaddingSchedule {
    pub fn new(base: usize, growth: usize) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidSchedule(format!("base {base} is below 2")));
        }
        if growth < 2 {
            return Err(Error::InvalidSchedule(format!(
                "growth {growth} is below 2, so pads would not double"
            )));
        }
        Ok(Self { base, growth })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn growth(&self) -> usize {
        self.growth
    }

    pub fn pad(&self, gamma: usize) -> Result<usize> {
        let mut p = self.base;
        for _ in 0..gamma {
            p = p
                .checked_mul(self.growth)
                .filter(|&p| p <= MAX_PAD)
                .ok_or_else(|| {
                    Error::ScheduleTooSmall(format!("pad({gamma}) exceeds the cap {MAX_PAD}"))
                })?;
        }
        Ok(p)
    }
}

pub fn pad_label(i: usize) -> String {
    format!("p{i}")
}

/// The slice object `f_a^g: K -> X_a^g` together with its indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedObject {
    pub alpha: usize,
    pub gamma: usize,
    pub object: SliceObject,
}

impl PaddedObject {
    pub fn target(&self) -> &Arc<FiniteSpace> {
        self.object.target()
    }

    pub fn base(&self) -> &Arc<BallTree> {
        self.object.base()
    }

    pub fn ball_count(&self) -> usize {
        self.base().level(self.alpha).len()
    }

    pub fn pad_count(&self) -> usize {
        self.target().len() - self.ball_count()
    }

    pub fn is_pad(&self, x: usize) -> bool {
        x >= self.ball_count()
    }
}

pub fn make_padded_object(
    k: &Arc<BallTree>,
    alpha: usize,
    gamma: usize,
    s: &PaddingSchedule,
) -> Result<PaddedObject> {
    if alpha > k.depth() {
        return Err(Error::InvalidLevel {
            level: alpha,
            depth: k.depth(),
        });
    }
    let balls = k.level(alpha);
    let mut labels = balls.points().to_vec();
    labels.extend((0..s.pad(gamma)?).map(pad_label));
    let target = Arc::new(FiniteSpace::new(format!("X{alpha}^{gamma}"), labels)?);
    let object = SliceObject::new(k.clone(), alpha, target, (0..balls.len()).collect())?;
    Ok(PaddedObject {
        alpha,
        gamma,
        object,
    })
}

/// `r: Pad(delta) -> Pad(xi) × {0,1}`, round-robin over the targets in
/// order `(0,0), (0,1), (1,0), …`; for `xi = delta` every pad goes to
/// `(x, 1)`.
pub fn make_splitter(xi: usize, delta: usize, s: &PaddingSchedule) -> Result<Vec<(usize, u8)>> {
    if xi > delta {
        return Err(Error::InvalidSchedule(format!(
            "splitter needs xi <= delta, got {xi} > {delta}"
        )));
    }
    let pd = s.pad(delta)?;
    if xi == delta {
        return Ok((0..pd).map(|x| (x, 1)).collect());
    }
    let targets = 2 * s.pad(xi)?;
    Ok((0..pd)
        .map(|i| {
            let t = i % targets;
            (t / 2, (t % 2) as u8)
        })
        .collect())
}

/// `p: Pad(xi) -> balls of K at level a`, pad `i` to ball `i mod count`.
pub fn make_ball_cover(
    k: &BallTree,
    alpha: usize,
    xi: usize,
    s: &PaddingSchedule,
) -> Result<Surjection> {
    if alpha > k.depth() {
        return Err(Error::InvalidLevel {
            level: alpha,
            depth: k.depth(),
        });
    }
    let pad = s.pad(xi)?;
    let balls = k.level(alpha);
    if pad < balls.len() {
        return Err(Error::PadTooSmall {
            pad,
            needed: balls.len(),
        });
    }
    let pads = Arc::new(FiniteSpace::new(
        format!("Pad{xi}"),
        (0..pad).map(pad_label).collect(),
    )?);
    Surjection::new(Map::new(
        pads,
        balls.clone(),
        (0..pad).map(|i| i % balls.len()).collect(),
    )?)
}

fn dominating_images(
    k: &BallTree,
    (alpha, xi): (usize, usize),
    (beta, delta): (usize, usize),
    s: &PaddingSchedule,
) -> Result<Vec<usize>> {
    if alpha > beta || beta > k.depth() {
        return Err(Error::InvalidLevel {
            level: beta,
            depth: k.depth(),
        });
    }
    let splitter = make_splitter(xi, delta, s)?;
    let nb_alpha = k.level(alpha).len();
    let cover = if xi < delta {
        Some(make_ball_cover(k, alpha, xi, s)?)
    } else {
        None
    };
    let mut images: Vec<usize> = (0..k.level(beta).len())
        .map(|b| k.ancestor(beta, b, alpha))
        .collect();
    images.extend(splitter.iter().map(|&(j, tag)| match tag {
        1 => nb_alpha + j,
        _ => cover.as_ref().expect("tag 0 needs xi < delta").apply(j),
    }));
    Ok(images)
}

/// The arrow `q_{(a,xi)}^{(b,delta)}: X_b^delta -> X_a^xi` of the dominating
/// family.
pub fn dominating_arrow(
    k: &Arc<BallTree>,
    from: (usize, usize),
    to: (usize, usize),
    s: &PaddingSchedule,
) -> Result<SliceArrow> {
    let dst = make_padded_object(k, from.0, from.1, s)?;
    let src = make_padded_object(k, to.0, to.1, s)?;
    padded_arrow(&src, &dst, s)
}

fn padded_arrow(src: &PaddedObject, dst: &PaddedObject, s: &PaddingSchedule) -> Result<SliceArrow> {
    let images = dominating_images(
        src.base(),
        (dst.alpha, dst.gamma),
        (src.alpha, src.gamma),
        s,
    )?;
    let q = Surjection::new(Map::new(
        src.target().clone(),
        dst.target().clone(),
        images,
    )?)?;
    SliceArrow::new(src.object.clone(), dst.object.clone(), q)
}

/// Condition (i): a padded object over `f` with an arrow onto it.
#[derive(Debug, Clone)]
pub struct DominatedObject {
    pub padded: PaddedObject,
    pub arrow: SliceArrow,
}

pub fn dominate_object(f: &SliceObject, s: &PaddingSchedule) -> Result<DominatedObject> {
    let k = f.base().clone();
    let beta = f.factoring_level();
    let hit = f.image_mask();
    let rest: Vec<usize> = (0..hit.len()).filter(|&y| !hit[y]).collect();
    let needed = rest.len().max(1);
    let mut gamma = 0;
    while s.pad(gamma)? < needed {
        gamma += 1;
    }
    let padded = make_padded_object(&k, beta, gamma, s)?;
    let mut images = f.images_at_level(beta)?;
    images.extend((0..padded.pad_count()).map(|i| {
        if rest.is_empty() {
            0
        } else {
            rest[i % rest.len()]
        }
    }));
    let q = Surjection::new(Map::new(
        padded.target().clone(),
        f.target().clone(),
        images,
    )?)?;
    let arrow = SliceArrow::new(padded.object.clone(), f.clone(), q)?;
    Ok(DominatedObject { padded, arrow })
}

/// Condition (ii): for `f: h -> X_a^xi`, a padded source `X_b^delta`, the
/// dominating arrow to `X_a^xi`, and `g: X_b^delta -> h` with `f ∘ g` equal
/// to the dominating arrow.
#[derive(Debug, Clone)]
pub struct DominatedArrow {
    pub source: PaddedObject,
    pub dominating: SliceArrow,
    pub g: SliceArrow,
}

pub fn dominate_arrow(
    f: &SliceArrow,
    dst: &PaddedObject,
    s: &PaddingSchedule,
) -> Result<DominatedArrow> {
    if !f.dst().same_map(&dst.object) {
        return Err(Error::Mismatch(
            "arrow does not end at the given padded object".into(),
        ));
    }
    let k = dst.base().clone();
    let h = f.src();
    let (alpha, xi) = (dst.alpha, dst.gamma);
    let beta = alpha
        .max(h.factoring_level())
        .max((alpha + 1).min(k.depth()));
    let nb_alpha = dst.ball_count();
    let nb_beta = k.level(beta).len();
    let fq = f.q();
    let fibers = fq.fibers();
    let hit = h.image_mask();

    // fiber over each target of X_a^xi, image points first
    let ordered: Vec<Vec<usize>> = fibers
        .iter()
        .map(|fib| {
            let (mut inside, outside): (Vec<usize>, Vec<usize>) =
                fib.iter().partition(|&&y| hit[y]);
            inside.extend(outside);
            inside
        })
        .collect();

    let pad_xi = s.pad(xi)?;
    let mut delta = xi + 1;
    let splitter = loop {
        let pd = s.pad(delta)?;
        let splitter = make_splitter(xi, delta, s)?;
        let mut tag0 = vec![0usize; nb_alpha];
        let mut tag1 = vec![0usize; pad_xi];
        for &(j, tag) in &splitter {
            match tag {
                1 => tag1[j] += 1,
                _ => tag0[j % nb_alpha] += 1,
            }
        }
        let short = (0..nb_alpha)
            .find(|&z| tag0[z] < ordered[z].len())
            .map(|z| (z, tag0[z]))
            .or_else(|| {
                (0..pad_xi)
                    .find(|&j| tag1[j] < ordered[nb_alpha + j].len())
                    .map(|j| (nb_alpha + j, tag1[j]))
            });
        match short {
            None if pd >= nb_beta => break splitter,
            short => {
                if s.pad(delta + 1).is_err() {
                    let detail = match short {
                        Some((z, have)) => format!(
                            "fiber over `{}` needs {} pads, pad({delta}) gives {have}",
                            dst.target().label(z),
                            ordered[z].len()
                        ),
                        None => format!("pad({delta}) = {pd} cannot cover {nb_beta} balls"),
                    };
                    return Err(Error::ScheduleTooSmall(detail));
                }
                delta += 1;
            }
        }
    };

    let source = make_padded_object(&k, beta, delta, s)?;
    let cover = make_ball_cover(&k, alpha, xi, s)?;
    let mut images = h.images_at_level(beta)?;
    let mut used = vec![0usize; dst.target().len()];
    for &(j, tag) in &splitter {
        let z = match tag {
            1 => nb_alpha + j,
            _ => cover.apply(j),
        };
        let fib = &ordered[z];
        images.push(fib[used[z] % fib.len()]);
        used[z] += 1;
    }
    let q = Surjection::new(Map::new(
        source.target().clone(),
        h.target().clone(),
        images,
    )?)?;
    let g = SliceArrow::new(source.object.clone(), h.clone(), q)?;
    let dominating = padded_arrow(&source, dst, s)?;
    Ok(DominatedArrow {
        source,
        dominating,
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::compose_slice;
    use crate::fixtures;

    fn s() -> PaddingSchedule {
        PaddingSchedule::default()
    }

    #[test]
    fn schedule_validation() {
        assert!(PaddingSchedule::new(1, 2).is_err());
        assert!(PaddingSchedule::new(2, 1).is_err());
        assert_eq!(s().pad(0).unwrap(), 2);
        assert_eq!(s().pad(3).unwrap(), 16);
        assert!(s().pad(40).is_err());
    }

    #[test]
    fn padded_object_sizes() {
        let k = fixtures::k4();
        let p = make_padded_object(&k, 0, 0, &s()).unwrap();
        assert_eq!(p.target().len(), 3);
        let p = make_padded_object(&k, 1, 1, &s()).unwrap();
        assert_eq!(p.target().len(), 6);
        assert_eq!(p.target().points()[..3], ["0", "1", "p0"]);
        for ball in 0..2 {
            let pre: Vec<usize> = (0..4)
                .filter(|&x| p.object.image_of_point(x) == ball)
                .collect();
            assert_eq!(pre, k.leaves_under(1, ball));
        }
        assert!(make_padded_object(&k, 3, 0, &s()).is_err());
    }

    #[test]
    fn splitter_examples() {
        let r = make_splitter(0, 1, &s()).unwrap();
        assert_eq!(r, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        let r = make_splitter(0, 2, &s()).unwrap();
        for target in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(r.iter().filter(|&&t| t == target).count(), 2);
        }
        let r = make_splitter(1, 1, &s()).unwrap();
        assert!(r.iter().enumerate().all(|(x, &t)| t == (x, 1)));
        assert!(make_splitter(2, 1, &s()).is_err());
    }

    #[test]
    fn ball_cover_examples() {
        let one = fixtures::one_point();
        let c = make_ball_cover(&one, 0, 0, &s()).unwrap();
        assert_eq!(c.images(), &[0, 0]);
        let k = fixtures::k4();
        let c = make_ball_cover(&k, 1, 1, &s()).unwrap();
        assert_eq!(c.fibers(), vec![vec![0, 2], vec![1, 3]]);
        let t3 = Arc::new(fixtures::uniform_tree(1, 3));
        assert!(matches!(
            make_ball_cover(&t3, 1, 0, &s()),
            Err(Error::PadTooSmall { pad: 2, needed: 3 })
        ));
    }

    #[test]
    fn dominating_arrow_examples() {
        let k = fixtures::k4();
        let id = dominating_arrow(&k, (1, 1), (1, 1), &s()).unwrap();
        assert_eq!(id.q().images(), (0..6).collect::<Vec<_>>().as_slice());

        let q = dominating_arrow(&k, (0, 0), (1, 1), &s()).unwrap();
        // balls 0,1 -> root; p0,p2 tag 0 -> root; p1,p3 -> p0,p1
        assert_eq!(q.q().images(), &[0, 0, 0, 1, 0, 2]);

        let q2 = dominating_arrow(&k, (1, 1), (2, 2), &s()).unwrap();
        let c = compose_slice(&q, &q2).unwrap();
        assert!(c.q().is_surjective());
    }

    #[test]
    fn dominate_object_examples() {
        let k = fixtures::k4();
        let t = Arc::new(FiniteSpace::from_labels("T", ["u", "v", "w"]).unwrap());
        let f = SliceObject::new(k.clone(), 1, t.clone(), vec![0, 1]).unwrap();
        let d = dominate_object(&f, &s()).unwrap();
        assert_eq!((d.padded.alpha, d.padded.gamma), (1, 0));
        assert_eq!(d.arrow.q().images(), &[0, 1, 2, 2]);

        let onto = SliceObject::new(k.clone(), 2, t.clone(), vec![0, 1, 2, 2]).unwrap();
        let d = dominate_object(&onto, &s()).unwrap();
        assert_eq!(&d.arrow.q().images()[4..], &[0, 0]);

        let constant = SliceObject::new(k.clone(), 2, t, vec![1; 4]).unwrap();
        let d = dominate_object(&constant, &s()).unwrap();
        assert_eq!(d.padded.alpha, 0);
        assert_eq!(d.arrow.q().images(), &[1, 0, 2]);
    }

    #[test]
    fn dominate_arrow_identity_gives_dominating_arrow() {
        let k = fixtures::k4();
        for (a, x) in [(0, 0), (1, 1), (2, 2)] {
            let p = make_padded_object(&k, a, x, &s()).unwrap();
            let d = dominate_arrow(&SliceArrow::identity(&p.object), &p, &s()).unwrap();
            assert_eq!(d.g.q(), d.dominating.q());
            assert_eq!(d.source.alpha, (a + 1).min(2));
            assert_eq!(d.source.gamma, x + 1);
        }
    }

    #[test]
    fn dominate_arrow_collapsing_pads() {
        let k = fixtures::k4();
        let p = make_padded_object(&k, 0, 0, &s()).unwrap();
        // h: K -> {a, b} at level 1 with f collapsing: a -> root, b -> p0;
        // p1 needs a preimage, so add c -> p1
        let y = Arc::new(FiniteSpace::from_labels("Y", ["a", "b", "c"]).unwrap());
        let h = SliceObject::new(k.clone(), 1, y.clone(), vec![0, 0]).unwrap();
        let fq = Surjection::new(Map::new(y, p.target().clone(), vec![0, 1, 2]).unwrap()).unwrap();
        let f = SliceArrow::new(h, p.object.clone(), fq).unwrap();
        let d = dominate_arrow(&f, &p, &s()).unwrap();
        let fg = crate::discrete::compose(f.q(), d.g.q()).unwrap();
        assert_eq!(&fg, d.dominating.q());
        for x in 0..4 {
            assert_eq!(
                d.g.q().apply(d.source.object.image_of_point(x)),
                f.src().image_of_point(x)
            );
        }
    }
}
