//! Finite-depth projective Fraïssé constructions over ultrametric spaces.
//!
//! The crate models a truncated ultrametric space `K` as a [`BallTree`],
//! builds Fraïssé sequences of finite discrete spaces sliced over `K`, and
//! runs the embedding, lifting, extension and retraction algorithms on the
//! resulting generic limit.

pub mod discrete;
pub mod error;
pub mod fixtures;
pub mod fraisse;
pub mod generic;
pub mod inverse;
pub mod ultrametric;

pub use discrete::{
    amalgamate_slice, compose, compose_slice, direct_slice, product, pullback, Amalgam,
    FiniteSpace, Map, SliceArrow, SliceObject, Span, Surjection,
};
pub use error::{Error, Result};
pub use fraisse::{
    build_fraisse, corrupt_bonding, dominate_arrow, dominate_object, dominating_arrow,
    make_ball_cover, make_padded_object, make_splitter, verify_fraisse, AOutcome, FraisseBuild,
    FraisseReport, FraisseTask, PaddedObject, PaddingSchedule, TaskGenerator, TaskSchedule,
};
pub use generic::{
    brute_force_lift_oracle, extend_homeo, lift_through_generic, retract_onto, AmbientAutoMap,
    BallMap, GenericPresentation, Lift, PartialHomeo, Retraction,
};
pub use inverse::{InverseSequence, SequenceArrow, SlicedSequence, Thread};
pub use ultrametric::{
    Ball, BallTree, BoundSchedule, LevelWitness, NowhereDense, NowhereDenseWitness,
};

/// Short SHA-256 digest of a sequence of labels, one per line.
pub fn digest<I, S>(items: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for item in items {
        h.update(item.as_ref().as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..8])
}
