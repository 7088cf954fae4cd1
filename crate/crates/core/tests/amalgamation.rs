use std::sync::Arc;

use fraisse_core::fixtures;
use fraisse_core::{
    amalgamate_slice, compose, direct_slice, pullback, BallTree, FiniteSpace, Map, SliceArrow,
    SliceObject, Surjection,
};
use proptest::prelude::*;

fn space(id: &str, n: usize) -> Arc<FiniteSpace> {
    Arc::new(FiniteSpace::from_labels(id, (0..n).map(|i| format!("{id}{i}"))).unwrap())
}

/// A surjection `dom -> cod` read off `picks`, with the first `cod` points
/// forced onto distinct values.
fn surjection(dom: &Arc<FiniteSpace>, cod: &Arc<FiniteSpace>, picks: &[usize]) -> Surjection {
    let images = (0..dom.len())
        .map(|i| {
            if i < cod.len() {
                i
            } else {
                picks[i] % cod.len()
            }
        })
        .collect();
    Surjection::new(Map::new(dom.clone(), cod.clone(), images).unwrap()).unwrap()
}

#[derive(Debug, Clone)]
struct Cospan {
    left: SliceArrow,
    right: SliceArrow,
}

fn lift_object(k: &Arc<BallTree>, h: &SliceObject, q: &Surjection, picks: &[usize]) -> SliceObject {
    let fibers = q.fibers();
    let map = h
        .ball_images()
        .iter()
        .enumerate()
        .map(|(v, &z)| fibers[z][picks[v] % fibers[z].len()])
        .collect();
    SliceObject::new(k.clone(), h.level(), q.dom().clone(), map).unwrap()
}

fn arb_cospan() -> impl Strategy<Value = Cospan> {
    (
        0..=2usize,
        1..=3usize,
        1..=5usize,
        1..=5usize,
        prop::collection::vec(0..60usize, 24),
    )
        .prop_map(|(level, nz, nx, ny, picks)| {
            let k = fixtures::k4();
            let (nx, ny) = (nx.max(nz), ny.max(nz));
            let (z, x, y) = (space("z", nz), space("x", nx), space("y", ny));
            let balls = k.level(level).len();
            let h_map = (0..balls).map(|v| picks[v] % nz).collect();
            let h = SliceObject::new(k.clone(), level, z, h_map).unwrap();
            let q1 = surjection(&x, h.target(), &picks[4..]);
            let q2 = surjection(&y, h.target(), &picks[9..]);
            let f = lift_object(&k, &h, &q1, &picks[14..]);
            let g = lift_object(&k, &h, &q2, &picks[18..]);
            Cospan {
                left: SliceArrow::new(f, h.clone(), q1).unwrap(),
                right: SliceArrow::new(g, h, q2).unwrap(),
            }
        })
}

fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| (0..m).map(move |i| [v.clone(), vec![i]].concat()))
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn amalgam_closes_the_square(c in arb_cospan()) {
        let am = amalgamate_slice(&c.left, &c.right).unwrap();
        let top = compose(c.left.q(), am.left.q()).unwrap();
        let bottom = compose(c.right.q(), am.right.q()).unwrap();
        prop_assert_eq!(top.images(), bottom.images());
        let k = c.left.src().base();
        for p in 0..k.num_points() {
            let w = am.object.image_of_point(p);
            prop_assert_eq!(am.left.q().apply(w), c.left.src().image_of_point(p));
            prop_assert_eq!(am.right.q().apply(w), c.right.src().image_of_point(p));
        }
    }

    #[test]
    fn pullback_is_universal(
        c in arb_cospan(),
        cones in prop::collection::vec(prop::collection::vec((0..5usize, 0..5usize), 1..=4), 8),
    ) {
        let (q1, q2) = (c.left.q(), c.right.q());
        let span = pullback(q1, q2).unwrap();
        let (x, y) = (q1.dom().len(), q2.dom().len());
        let singletons = (0..x).flat_map(|i| (0..y).map(move |j| vec![(i, j)]));
        let sampled = cones.into_iter().map(|cone| {
            cone.into_iter().map(|(i, j)| (i % x, j % y)).collect::<Vec<_>>()
        });
        for cone in singletons.chain(sampled) {
            let commutes = cone.iter().all(|&(i, j)| q1.apply(i) == q2.apply(j));
            let mediating = all_maps(cone.len(), span.apex.len())
                .into_iter()
                .filter(|u| {
                    cone.iter().zip(u).all(|(&(i, j), &w)| span.left.apply(w) == i && span.right.apply(w) == j)
                })
                .count();
            prop_assert_eq!(mediating, usize::from(commutes));
        }
    }
}

#[test]
fn direct_slice_projects_onto_both() {
    let k = fixtures::k4();
    let x = space("x", 2);
    let y = space("y", 3);
    let f = SliceObject::new(k.clone(), 1, x, vec![0, 1]).unwrap();
    let g = SliceObject::new(k.clone(), 2, y, vec![0, 1, 2, 2]).unwrap();
    let am = direct_slice(&f, &g).unwrap();
    assert_eq!(am.object.level(), 2);
    assert_eq!(am.object.target().len(), 6);
    assert_eq!(am.object.ball_images(), &[0, 1, 5, 5]);
}
