//! Finite discrete spaces, surjections between them, and the slice category
//! of maps out of a fixed ball tree `K`.
//!
//! Points are addressed by their index in the owning [`FiniteSpace`]; the
//! index order is the canonical order used for every tie-break in the crate.
//! Labels only matter for display and serialization.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ultrametric::BallTree;

/// A finite nonempty set of labelled points in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    id: String,
    points: Vec<String>,
    index: HashMap<String, usize>,
}

impl FiniteSpace {
    pub fn new(id: impl Into<String>, points: Vec<String>) -> Result<Self> {
        let id = id.into();
        if points.is_empty() {
            return Err(Error::EmptySpace { space: id });
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicateLabel {
                    space: id,
                    label: p.clone(),
                });
            }
        }
        Ok(Self { id, points, index })
    }

    pub fn from_labels<I, S>(id: impl Into<String>, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(id, labels.into_iter().map(Into::into).collect())
    }

    pub fn singleton(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self::new(id, vec![label.into()]).expect("a single label is always valid")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; spaces are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownLabel {
            space: self.id.clone(),
            label: label.to_string(),
        })
    }

    /// Two spaces are interchangeable when they list the same points in the
    /// same order; the id is only a name.
    pub fn same_points(&self, other: &FiniteSpace) -> bool {
        self.points == other.points
    }

    pub fn renamed(&self, id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..self.clone()
        }
    }
}

impl fmt::Display for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.id, self.points.join(","))
    }
}

/// A total function between finite spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Map {
    dom: Arc<FiniteSpace>,
    cod: Arc<FiniteSpace>,
    images: Vec<usize>,
}

impl Map {
    pub fn new(dom: Arc<FiniteSpace>, cod: Arc<FiniteSpace>, images: Vec<usize>) -> Result<Self> {
        if images.len() != dom.len() {
            return Err(Error::Partial(format!(
                "{} images given for {} points of `{}`",
                images.len(),
                dom.len(),
                dom.id()
            )));
        }
        if let Some(&bad) = images.iter().find(|&&y| y >= cod.len()) {
            return Err(Error::Mismatch(format!(
                "image index {bad} outside `{}` ({} points)",
                cod.id(),
                cod.len()
            )));
        }
        Ok(Self { dom, cod, images })
    }

    pub fn from_fn(
        dom: Arc<FiniteSpace>,
        cod: Arc<FiniteSpace>,
        f: impl FnMut(usize) -> usize,
    ) -> Result<Self> {
        let images = (0..dom.len()).map(f).collect();
        Self::new(dom, cod, images)
    }

    /// Builds a map from `(point, image)` label pairs; every domain point must
    /// appear exactly once.
    pub fn from_pairs(
        dom: Arc<FiniteSpace>,
        cod: Arc<FiniteSpace>,
        pairs: &[(&str, &str)],
    ) -> Result<Self> {
        let mut images = vec![None; dom.len()];
        for (x, y) in pairs {
            let i = dom.require(x)?;
            let j = cod.require(y)?;
            if images[i].replace(j).is_some() {
                return Err(Error::Mismatch(format!("`{x}` is assigned twice")));
            }
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, y)| {
                y.ok_or_else(|| Error::Partial(format!("no image for `{}`", dom.label(i))))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dom, cod, images)
    }

    pub fn identity(space: &Arc<FiniteSpace>) -> Self {
        Self {
            dom: space.clone(),
            cod: space.clone(),
            images: (0..space.len()).collect(),
        }
    }

    pub fn dom(&self) -> &Arc<FiniteSpace> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<FiniteSpace> {
        &self.cod
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn apply_label(&self, x: &str) -> Result<&str> {
        let i = self.dom.require(x)?;
        Ok(self.cod.label(self.images[i]))
    }

    /// The first codomain point with empty preimage, if any.
    pub fn missed_point(&self) -> Option<usize> {
        let mut hit = vec![false; self.cod.len()];
        for &y in &self.images {
            hit[y] = true;
        }
        hit.iter().position(|h| !h)
    }

    pub fn is_surjective(&self) -> bool {
        self.missed_point().is_none()
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.cod.len()];
        self.images
            .iter()
            .all(|&y| !std::mem::replace(&mut hit[y], true))
    }

    pub fn fiber(&self, y: usize) -> Vec<usize> {
        (0..self.images.len())
            .filter(|&x| self.images[x] == y)
            .collect()
    }

    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cod.len()];
        for (x, &y) in self.images.iter().enumerate() {
            out[y].push(x);
        }
        out
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Map) -> Result<Map> {
        if !self.cod.same_points(&next.dom) {
            return Err(Error::Mismatch(format!(
                "cannot compose: codomain `{}` is not domain `{}`",
                self.cod.id(),
                next.dom.id()
            )));
        }
        Ok(Map {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            images: self.images.iter().map(|&y| next.images[y]).collect(),
        })
    }

    /// Pointwise equality, ignoring space ids.
    pub fn same_as(&self, other: &Map) -> bool {
        self.images == other.images
            && self.dom.same_points(&other.dom)
            && self.cod.same_points(&other.cod)
    }

    pub fn describe(&self) -> String {
        format!("{} -> {}", self.dom.id(), self.cod.id())
    }
}

/// A map known to be onto its codomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surjection(Map);

impl Surjection {
    pub fn new(map: Map) -> Result<Self> {
        match map.missed_point() {
            None => Ok(Self(map)),
            Some(y) => Err(Error::NotSurjective {
                map: map.describe(),
                point: map.cod.label(y).to_string(),
            }),
        }
    }

    pub fn from_fn(
        dom: Arc<FiniteSpace>,
        cod: Arc<FiniteSpace>,
        f: impl FnMut(usize) -> usize,
    ) -> Result<Self> {
        Self::new(Map::from_fn(dom, cod, f)?)
    }

    pub fn identity(space: &Arc<FiniteSpace>) -> Self {
        Self(Map::identity(space))
    }

    pub fn as_map(&self) -> &Map {
        &self.0
    }

    pub fn into_map(self) -> Map {
        self.0
    }
}

impl Deref for Surjection {
    type Target = Map;

    fn deref(&self) -> &Map {
        &self.0
    }
}

/// `g ∘ f`.
pub fn compose(g: &Surjection, f: &Surjection) -> Result<Surjection> {
    // a composite of surjections is onto, no need to re-check
    Ok(Surjection(f.then(g)?))
}

/// Apex of a span together with its two legs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub apex: Arc<FiniteSpace>,
    pub left: Surjection,
    pub right: Surjection,
}

fn pair_label(x: &str, y: &str) -> String {
    format!("({x},{y})")
}

/// Pullback of the cospan `X --q1--> Z <--q2-- Y`: all pairs `(x, y)` with
/// `q1(x) = q2(y)`, ordered lexicographically by `(index x, index y)`.
pub fn pullback(q1: &Surjection, q2: &Surjection) -> Result<Span> {
    if !q1.cod().same_points(q2.cod()) {
        return Err(Error::Mismatch(format!(
            "pullback needs a common codomain, got `{}` and `{}`",
            q1.cod().id(),
            q2.cod().id()
        )));
    }
    let (x, y) = (q1.dom(), q2.dom());
    let by_image = q2.fibers();
    let mut pairs = Vec::new();
    for i in 0..x.len() {
        for &j in &by_image[q1.apply(i)] {
            pairs.push((i, j));
        }
    }
    span_from_pairs(format!("{}x{}", x.id(), y.id()), x, y, &pairs)
}

/// Cartesian product with its two projections.
pub fn product(x: &Arc<FiniteSpace>, y: &Arc<FiniteSpace>) -> Span {
    let pairs: Vec<_> = (0..x.len())
        .flat_map(|i| (0..y.len()).map(move |j| (i, j)))
        .collect();
    span_from_pairs(format!("{}x{}", x.id(), y.id()), x, y, &pairs)
        .expect("projections of a product are onto")
}

fn span_from_pairs(
    id: String,
    x: &Arc<FiniteSpace>,
    y: &Arc<FiniteSpace>,
    pairs: &[(usize, usize)],
) -> Result<Span> {
    let labels = pairs
        .iter()
        .map(|&(i, j)| pair_label(x.label(i), y.label(j)))
        .collect();
    let apex = Arc::new(FiniteSpace::new(id, labels)?);
    let left = Surjection::new(Map::new(
        apex.clone(),
        x.clone(),
        pairs.iter().map(|p| p.0).collect(),
    )?)?;
    let right = Surjection::new(Map::new(
        apex.clone(),
        y.clone(),
        pairs.iter().map(|p| p.1).collect(),
    )?)?;
    Ok(Span { apex, left, right })
}

pub(crate) fn same_base(a: &Arc<BallTree>, b: &Arc<BallTree>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A map `K -> target` that is constant on the balls of `level`, stored as
/// its values on the level-`level` balls of `K`.
///
/// The map need not be onto `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceObject {
    base: Arc<BallTree>,
    level: usize,
    target: Arc<FiniteSpace>,
    map: Vec<usize>,
}

impl SliceObject {
    pub fn new(
        base: Arc<BallTree>,
        level: usize,
        target: Arc<FiniteSpace>,
        map: Vec<usize>,
    ) -> Result<Self> {
        if level > base.depth() {
            return Err(Error::InvalidLevel {
                level,
                depth: base.depth(),
            });
        }
        // validates length and range
        Map::new(base.level(level).clone(), target.clone(), map.clone())?;
        Ok(Self {
            base,
            level,
            target,
            map,
        })
    }

    /// Builds the slice object of a point map `K -> target`, stored at its
    /// least factoring level.
    pub fn from_point_images(
        base: Arc<BallTree>,
        target: Arc<FiniteSpace>,
        images: &[usize],
    ) -> Result<Self> {
        let level = base.factoring_level(images)?;
        let mut map = vec![0; base.level(level).len()];
        for (p, &y) in images.iter().enumerate() {
            map[base.leaf_ancestor(p, level)] = y;
        }
        Self::new(base, level, target, map)
    }

    pub fn base(&self) -> &Arc<BallTree> {
        &self.base
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn target(&self) -> &Arc<FiniteSpace> {
        &self.target
    }

    /// Values on the balls of [`Self::level`].
    pub fn ball_images(&self) -> &[usize] {
        &self.map
    }

    pub fn quotient_map(&self) -> Map {
        Map::new(
            self.base.level(self.level).clone(),
            self.target.clone(),
            self.map.clone(),
        )
        .expect("validated at construction")
    }

    pub fn image_of_point(&self, p: usize) -> usize {
        self.map[self.base.leaf_ancestor(p, self.level)]
    }

    pub fn point_images(&self) -> Vec<usize> {
        (0..self.base.num_points())
            .map(|p| self.image_of_point(p))
            .collect()
    }

    /// Values on the balls of `level`; fails when the map is not constant on
    /// those balls.
    pub fn images_at_level(&self, level: usize) -> Result<Vec<usize>> {
        if level > self.base.depth() {
            return Err(Error::InvalidLevel {
                level,
                depth: self.base.depth(),
            });
        }
        if level >= self.level {
            return Ok((0..self.base.level(level).len())
                .map(|b| self.map[self.base.ancestor(level, b, self.level)])
                .collect());
        }
        let mut out: Vec<Option<usize>> = vec![None; self.base.level(level).len()];
        for p in 0..self.base.num_points() {
            let y = self.image_of_point(p);
            let slot = &mut out[self.base.leaf_ancestor(p, level)];
            if *slot.get_or_insert(y) != y {
                return Err(Error::Mismatch(format!(
                    "map into `{}` is not constant on the level-{level} balls",
                    self.target.id()
                )));
            }
        }
        Ok(out
            .into_iter()
            .map(|y| y.expect("every ball has a point"))
            .collect())
    }

    /// Membership mask of `f[K]` in the target.
    pub fn image_mask(&self) -> Vec<bool> {
        let mut hit = vec![false; self.target.len()];
        for &y in &self.map {
            hit[y] = true;
        }
        hit
    }

    pub fn is_surjective(&self) -> bool {
        self.image_mask().iter().all(|&h| h)
    }

    /// Least level at which the point map is constant on balls.
    pub fn factoring_level(&self) -> usize {
        self.base
            .factoring_level(&self.point_images())
            .expect("point images are total")
    }

    /// Same base, same target points, same values on every point of `K`.
    pub fn same_map(&self, other: &SliceObject) -> bool {
        same_base(&self.base, &other.base)
            && self.target.same_points(&other.target)
            && self.point_images() == other.point_images()
    }
}

/// An arrow `src -> dst` of the slice category: a surjection
/// `q: src.target -> dst.target` with `q ∘ src = dst` on `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceArrow {
    src: SliceObject,
    dst: SliceObject,
    q: Surjection,
}

impl SliceArrow {
    pub fn new(src: SliceObject, dst: SliceObject, q: Surjection) -> Result<Self> {
        if !same_base(&src.base, &dst.base) {
            return Err(Error::Mismatch(
                "slice arrow between different bases".into(),
            ));
        }
        if !q.dom().same_points(&src.target) || !q.cod().same_points(&dst.target) {
            return Err(Error::Mismatch(format!(
                "arrow {} does not run `{}` -> `{}`",
                q.describe(),
                src.target.id(),
                dst.target.id()
            )));
        }
        let base = src.base.clone();
        for p in 0..base.num_points() {
            let lhs = q.apply(src.image_of_point(p));
            let rhs = dst.image_of_point(p);
            if lhs != rhs {
                return Err(Error::NotCommuting {
                    point: base.points().label(p).to_string(),
                    detail: format!(
                        "q sends it to `{}`, target map gives `{}`",
                        dst.target.label(lhs),
                        dst.target.label(rhs)
                    ),
                });
            }
        }
        Ok(Self { src, dst, q })
    }

    pub fn identity(obj: &SliceObject) -> Self {
        Self {
            src: obj.clone(),
            dst: obj.clone(),
            q: Surjection::identity(&obj.target),
        }
    }

    pub fn src(&self) -> &SliceObject {
        &self.src
    }

    pub fn dst(&self) -> &SliceObject {
        &self.dst
    }

    pub fn q(&self) -> &Surjection {
        &self.q
    }
}

/// `g ∘ f` in the slice category.
pub fn compose_slice(g: &SliceArrow, f: &SliceArrow) -> Result<SliceArrow> {
    if !f.dst.same_map(&g.src) {
        return Err(Error::Mismatch("slice arrows are not composable".into()));
    }
    Ok(SliceArrow {
        src: f.src.clone(),
        dst: g.dst.clone(),
        q: compose(&g.q, &f.q)?,
    })
}

/// Result of amalgamation or directedness: an object `k` with arrows to the
/// two inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam {
    pub object: SliceObject,
    pub left: SliceArrow,
    pub right: SliceArrow,
}

fn pair_slice(span: &Span, f: &SliceObject, g: &SliceObject) -> Result<Amalgam> {
    let base = f.base.clone();
    let level = f.level.max(g.level);
    let fx = f.images_at_level(level)?;
    let gy = g.images_at_level(level)?;
    let lookup: HashMap<(usize, usize), usize> = (0..span.apex.len())
        .map(|w| ((span.left.apply(w), span.right.apply(w)), w))
        .collect();
    let map = fx
        .iter()
        .zip(&gy)
        .map(|(&x, &y)| {
            lookup
                .get(&(x, y))
                .copied()
                .ok_or_else(|| Error::NotCommuting {
                    point: format!("({},{})", f.target.label(x), g.target.label(y)),
                    detail: "pair is missing from the apex".into(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let object = SliceObject::new(base, level, span.apex.clone(), map)?;
    let left = SliceArrow::new(object.clone(), f.clone(), span.left.clone())?;
    let right = SliceArrow::new(object.clone(), g.clone(), span.right.clone())?;
    Ok(Amalgam {
        object,
        left,
        right,
    })
}

/// Amalgamates a cospan `f --q1--> h <--q2-- g` through the pullback of the
/// underlying surjections. The apex keeps every pullback pair, including
/// pairs not reached from `K`.
pub fn amalgamate_slice(q1: &SliceArrow, q2: &SliceArrow) -> Result<Amalgam> {
    if !q1.dst.same_map(&q2.dst) {
        return Err(Error::NotCommuting {
            point: q1.dst.target.id().to_string(),
            detail: "the two arrows do not share a codomain object".into(),
        });
    }
    let span = pullback(&q1.q, &q2.q)?;
    pair_slice(&span, &q1.src, &q2.src)
}

/// Directedness: the pair map `K -> X × Y` with both projections.
pub fn direct_slice(f: &SliceObject, g: &SliceObject) -> Result<Amalgam> {
    if !same_base(&f.base, &g.base) {
        return Err(Error::Mismatch("direct_slice needs a common base".into()));
    }
    let span = product(&f.target, &g.target);
    pair_slice(&span, f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn space(id: &str, labels: &[&str]) -> Arc<FiniteSpace> {
        Arc::new(FiniteSpace::from_labels(id, labels.iter().copied()).unwrap())
    }

    fn surj(dom: &Arc<FiniteSpace>, cod: &Arc<FiniteSpace>, images: &[usize]) -> Surjection {
        Surjection::new(Map::new(dom.clone(), cod.clone(), images.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn space_rejects_duplicates_and_empty() {
        assert!(matches!(
            FiniteSpace::from_labels("X", ["a", "a"]),
            Err(Error::DuplicateLabel { .. })
        ));
        assert!(matches!(
            FiniteSpace::new("X", vec![]),
            Err(Error::EmptySpace { .. })
        ));
    }

    #[test]
    fn surjection_reports_missed_point() {
        let x = space("X", &["a", "b"]);
        let y = space("Y", &["u", "v"]);
        let err = Surjection::new(Map::new(x, y, vec![0, 0]).unwrap()).unwrap_err();
        assert_eq!(
            err,
            Error::NotSurjective {
                map: "X -> Y".into(),
                point: "v".into()
            }
        );
    }

    #[test]
    fn compose_identity_laws() {
        let x = space("X", &["a", "b", "c"]);
        let y = space("Y", &["u", "v"]);
        let f = surj(&x, &y, &[0, 1, 1]);
        assert_eq!(compose(&Surjection::identity(&y), &f).unwrap(), f);
        assert_eq!(compose(&f, &Surjection::identity(&x)).unwrap(), f);
    }

    #[test]
    fn compose_constant() {
        let x = space("X", &["a", "b"]);
        let z = space("Z", &["z"]);
        let w = space("W", &["w"]);
        let f = surj(&x, &z, &[0, 0]);
        let g = surj(&z, &w, &[0]);
        let gf = compose(&g, &f).unwrap();
        assert_eq!(gf.images(), &[0, 0]);
        assert_eq!(gf.cod().label(0), "w");
    }

    #[test]
    fn compose_rejects_mismatch() {
        let x = space("X", &["a", "b"]);
        let y = space("Y", &["u"]);
        let f = surj(&x, &y, &[0, 0]);
        assert!(matches!(compose(&f, &f), Err(Error::Mismatch(_))));
    }

    #[test]
    fn pullback_over_singleton_is_product() {
        let x = space("X", &["x0", "x1"]);
        let y = space("Y", &["y0", "y1"]);
        let z = space("Z", &["z0"]);
        let w = pullback(&surj(&x, &z, &[0, 0]), &surj(&y, &z, &[0, 0])).unwrap();
        assert_eq!(
            w.apex.points(),
            &["(x0,y0)", "(x0,y1)", "(x1,y0)", "(x1,y1)"]
        );
    }

    #[test]
    fn pullback_along_identity() {
        let z = space("Z", &["z0", "z1"]);
        let y = space("Y", &["a", "b", "c"]);
        let w = pullback(&Surjection::identity(&z), &surj(&y, &z, &[0, 1, 1])).unwrap();
        assert!(w.right.is_injective());
        assert_eq!(w.apex.len(), y.len());
    }

    #[test]
    fn pullback_fiber_count_matches_enumeration() {
        let z = space("Z", &["z0", "z1"]);
        let x = space("X", &["a", "b", "c"]);
        let y = space("Y", &["p", "q", "r", "s"]);
        let q1 = surj(&x, &z, &[0, 0, 1]);
        let q2 = surj(&y, &z, &[0, 1, 1, 1]);
        let brute = (0..x.len())
            .flat_map(|i| (0..y.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| q1.apply(i) == q2.apply(j))
            .count();
        assert_eq!(brute, 5);
        let w = pullback(&q1, &q2).unwrap();
        assert_eq!(w.apex.len(), brute);
        for p in 0..w.apex.len() {
            assert_eq!(q1.apply(w.left.apply(p)), q2.apply(w.right.apply(p)));
        }
    }

    #[test]
    fn product_examples() {
        let x = space("X", &["a", "b"]);
        let y = space("Y", &["u", "v", "w"]);
        let p = product(&x, &y);
        assert_eq!(p.apex.len(), 6);
        let one = space("1", &["*"]);
        assert!(product(&one, &y).right.is_injective());
        for w in 0..p.apex.len() {
            let label = p.apex.label(w);
            assert!(label.starts_with(&format!("({},", x.label(p.left.apply(w)))));
        }
    }

    fn k4_slice(level: usize, target: &[&str], map: &[usize]) -> SliceObject {
        SliceObject::new(fixtures::k4(), level, space("T", target), map.to_vec()).unwrap()
    }

    #[test]
    fn slice_arrow_checks_commutation() {
        let f = k4_slice(1, &["u", "v"], &[0, 1]);
        let g = k4_slice(0, &["*"], &[0]);
        let q = surj(f.target(), g.target(), &[0, 0]);
        assert!(SliceArrow::new(f.clone(), g, q).is_ok());
        let h = k4_slice(1, &["u", "v"], &[1, 0]);
        let id = Surjection::identity(f.target());
        assert!(matches!(
            SliceArrow::new(f, h, id),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn amalgamate_along_identities() {
        let f = k4_slice(1, &["u", "v", "w"], &[0, 1]);
        let id = SliceArrow::identity(&f);
        let am = amalgamate_slice(&id, &id).unwrap();
        assert_eq!(am.object.target().len(), 3);
        assert!(am.left.q().is_injective());
        assert!(am
            .object
            .point_images()
            .iter()
            .zip(f.point_images())
            .all(|(&k, fx)| am.left.q().apply(k) == fx));
    }

    #[test]
    fn amalgamate_level_one_over_k4() {
        // f, g factor at level 1 with the same ball images into a 2-point h
        let f = k4_slice(1, &["a0", "a1", "b0"], &[0, 2]);
        let g = k4_slice(1, &["c0", "d0", "d1"], &[0, 1]);
        let h = k4_slice(1, &["A", "B"], &[0, 1]);
        let q1 = SliceArrow::new(
            f.clone(),
            h.clone(),
            surj(f.target(), h.target(), &[0, 0, 1]),
        )
        .unwrap();
        let q2 = SliceArrow::new(
            g.clone(),
            h.clone(),
            surj(g.target(), h.target(), &[0, 1, 1]),
        )
        .unwrap();
        let am = amalgamate_slice(&q1, &q2).unwrap();
        // brute force: pairs over A: 2*1, over B: 1*2
        let brute = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| q1.q().apply(i) == q2.q().apply(j))
            .count();
        assert_eq!(am.object.target().len(), brute);
        assert_eq!(am.object.level(), 1);
        for p in 0..4 {
            let k = am.object.image_of_point(p);
            assert_eq!(am.left.q().apply(k), f.image_of_point(p));
            assert_eq!(am.right.q().apply(k), g.image_of_point(p));
        }
        let sq1 = compose(q1.q(), am.left.q()).unwrap();
        let sq2 = compose(q2.q(), am.right.q()).unwrap();
        assert!(sq1.same_as(&sq2));
    }

    #[test]
    fn amalgamate_over_singleton_is_direct() {
        let f = k4_slice(1, &["u", "v"], &[0, 1]);
        let g = k4_slice(2, &["a", "b"], &[0, 1, 1, 0]);
        let h = k4_slice(0, &["*"], &[0]);
        let q1 =
            SliceArrow::new(f.clone(), h.clone(), surj(f.target(), h.target(), &[0, 0])).unwrap();
        let q2 =
            SliceArrow::new(g.clone(), h.clone(), surj(g.target(), h.target(), &[0, 0])).unwrap();
        let am = amalgamate_slice(&q1, &q2).unwrap();
        let d = direct_slice(&f, &g).unwrap();
        assert!(am.object.target().same_points(d.object.target()));
        assert_eq!(am.object.point_images(), d.object.point_images());
    }

    #[test]
    fn amalgamate_rejects_different_codomains() {
        let f = k4_slice(1, &["u", "v"], &[0, 1]);
        let h1 = k4_slice(0, &["*"], &[0]);
        let h2 = k4_slice(0, &["o"], &[0]);
        let q1 = SliceArrow::new(
            f.clone(),
            h1.clone(),
            surj(f.target(), h1.target(), &[0, 0]),
        )
        .unwrap();
        let q2 = SliceArrow::new(
            f.clone(),
            h2.clone(),
            surj(f.target(), h2.target(), &[0, 0]),
        )
        .unwrap();
        assert!(matches!(
            amalgamate_slice(&q1, &q2),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn direct_slice_examples() {
        let f = k4_slice(1, &["u", "v"], &[0, 1]);
        let c = k4_slice(0, &["*"], &[0]);
        let d = direct_slice(&f, &c).unwrap();
        assert_eq!(d.object.target().len(), 2);
        assert!(d.left.q().is_injective());

        let diag = direct_slice(&f, &f).unwrap();
        // full product kept, the pair map lands on the diagonal
        assert_eq!(diag.object.target().len(), 4);
        let mut hit = diag.object.image_mask();
        hit.retain(|&h| h);
        assert_eq!(hit.len(), 2);

        let g = k4_slice(2, &["0", "1", "2", "3"], &[0, 1, 2, 3]);
        let fg = direct_slice(&f, &g).unwrap();
        assert_eq!(fg.object.level(), 2);
        let mut pairs: Vec<_> = (0..4)
            .map(|p| (f.image_of_point(p), g.image_of_point(p)))
            .collect();
        pairs.sort();
        pairs.dedup();
        let distinct = fg.object.image_mask().iter().filter(|&&h| h).count();
        assert_eq!(distinct, pairs.len());
        assert_eq!(fg.object.factoring_level(), 2);
    }

    #[test]
    fn operations_are_deterministic() {
        let f = k4_slice(1, &["u", "v"], &[0, 1]);
        let g = k4_slice(2, &["a", "b"], &[0, 1, 1, 0]);
        assert_eq!(direct_slice(&f, &g).unwrap(), direct_slice(&f, &g).unwrap());
    }
}
