//! Certificates and the commands that produce them.

use std::sync::Arc;

use fraisse_core::fixtures;
use fraisse_core::{
    build_fraisse, extend_homeo, lift_through_generic, retract_onto, verify_fraisse, AOutcome,
    BallMap, BallTree, FraisseBuild, GenericPresentation, Map, PartialHomeo, SliceObject,
    Surjection, TaskGenerator, TaskSchedule,
};
use serde::{Deserialize, Serialize};

use crate::doc::{space, table, ConfigDoc, EmbeddedSetDoc, ExtendInput, Table, TreeDoc};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Embed(EmbedCert),
    Retract(RetractCert),
    Extend(ExtendCert),
    Lift(LiftCert),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Embed(_) => "embed",
            Self::Retract(_) => "retract",
            Self::Extend(_) => "extend",
            Self::Lift(_) => "lift",
        }
    }
}

/// For each `alpha`, the least ball of level `beta` below each `alpha`-ball
/// that misses the embedded set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub alpha: usize,
    pub beta: usize,
    pub balls: Table,
}

/// An absorbed arrow `f: Y -> U_stage` with the map `g: U_beta -> Y`
/// that factors the bond through it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDoc {
    pub tag: String,
    pub stage: usize,
    pub y: Vec<String>,
    /// `K` point to `Y`.
    pub k_images: Table,
    pub f: Table,
    pub beta: usize,
    pub g: Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedCert {
    pub config: ConfigDoc,
    pub k: TreeDoc,
    pub ambient: TreeDoc,
    /// Ambient level of sequence level 0.
    pub offset: usize,
    pub eta: Table,
    pub witness: Vec<WitnessDoc>,
    pub tasks: Vec<TaskDoc>,
    pub log: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetractCert {
    pub config: ConfigDoc,
    pub k: TreeDoc,
    pub ambient: TreeDoc,
    pub offset: usize,
    pub eta: Table,
    /// Sequence level serving each level of `K`.
    pub reindex: Vec<usize>,
    /// Ambient level on which `r` is constant modulo each level of `K`.
    pub ball_levels: Vec<usize>,
    /// Ambient point to `K` point.
    pub r: Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendCert {
    pub input: ExtendInput,
    /// Per ambient level, `src` ball to `dst` ball.
    pub levels: Vec<Table>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftCert {
    pub config: ConfigDoc,
    pub k: TreeDoc,
    pub ambient: TreeDoc,
    pub eta: Table,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub f: Table,
    pub b: Table,
    pub g_level: usize,
    pub g: Table,
    pub beta: usize,
    pub h: Table,
}

/// The task schedule used by `embed`: one dominating arrow per stage.
pub fn embed_schedule(n: usize) -> TaskSchedule {
    (0..n).fold(TaskSchedule::new(), |s, stage| {
        s.with(
            format!("dominating-{stage}"),
            TaskGenerator::Dominating { stage },
        )
    })
}

pub struct Presented {
    pub build: FraisseBuild,
    pub pres: GenericPresentation,
}

pub fn present(k: &Arc<BallTree>, config: &ConfigDoc) -> Result<Presented, CliError> {
    if config.depth < k.depth().max(1) {
        return Err(fraisse_core::Error::DepthTooSmall {
            needed: k.depth().max(1),
            available: config.depth,
        }
        .into());
    }
    let build = build_fraisse(
        k,
        config.depth,
        &config.schedule()?,
        &embed_schedule(config.depth),
    )?;
    let pres = GenericPresentation::from_sliced(build.sequence.clone())?;
    Ok(Presented { build, pres })
}

/// One probe per level of `K`: the quotient onto its balls.
pub fn probes(k: &Arc<BallTree>) -> Vec<SliceObject> {
    (0..=k.depth())
        .map(|l| {
            SliceObject::new(
                k.clone(),
                l,
                k.level(l).clone(),
                (0..k.level(l).len()).collect(),
            )
            .expect("ball quotients are slice objects")
        })
        .collect()
}

fn eta_table(pres: &GenericPresentation) -> Table {
    table(pres.k().points(), pres.ambient().points(), pres.eta())
}

fn witness_docs(pres: &GenericPresentation) -> Vec<WitnessDoc> {
    let amb = pres.ambient();
    pres.witness()
        .levels
        .iter()
        .enumerate()
        .map(|(alpha, w)| WitnessDoc {
            alpha,
            beta: w.beta,
            balls: table(amb.level(alpha), amb.level(w.beta), &w.balls),
        })
        .collect()
}

pub fn embed_certificate(k: &Arc<BallTree>, config: &ConfigDoc) -> Result<EmbedCert, CliError> {
    let Presented { build, pres } = present(k, config)?;
    let tasks = build.tasks();
    let report = verify_fraisse(pres.seq(), &tasks, &probes(k));
    if !report.all_passed() {
        return Err(CliError::Verification(report.log.join("; ")));
    }
    let amb = pres.ambient();
    let task_docs = build
        .serviced
        .iter()
        .zip(&report.tasks)
        .map(|(t, check)| {
            let AOutcome::Witnessed { beta, g } = &check.outcome else {
                unreachable!("all tasks passed")
            };
            let arrow = &t.task.arrow;
            let y = arrow.q().dom();
            TaskDoc {
                tag: t.tag.clone(),
                stage: t.task.stage,
                y: y.points().to_vec(),
                k_images: table(k.points(), y, &arrow.src().point_images()),
                f: table(
                    y,
                    amb.level(t.task.stage + pres.offset()),
                    arrow.q().images(),
                ),
                beta: *beta,
                g: table(amb.level(beta + pres.offset()), y, g),
            }
        })
        .collect();
    Ok(EmbedCert {
        config: *config,
        k: TreeDoc::from_tree(k),
        ambient: TreeDoc::from_tree(amb),
        offset: pres.offset(),
        eta: eta_table(&pres),
        witness: witness_docs(&pres),
        tasks: task_docs,
        log: report.log,
    })
}

pub fn retract_certificate(k: &Arc<BallTree>, config: &ConfigDoc) -> Result<RetractCert, CliError> {
    let Presented { pres, .. } = present(k, config)?;
    let r = retract_onto(&pres)?;
    let amb = pres.ambient();
    Ok(RetractCert {
        config: *config,
        k: TreeDoc::from_tree(k),
        ambient: TreeDoc::from_tree(amb),
        offset: pres.offset(),
        eta: eta_table(&pres),
        reindex: r.arrow.reindex().to_vec(),
        ball_levels: r.ball_levels.clone(),
        r: table(amb.points(), k.points(), &r.table),
    })
}

pub fn partial_homeo(input: &ExtendInput) -> Result<PartialHomeo, CliError> {
    let side = |d: &EmbeddedSetDoc| -> Result<GenericPresentation, CliError> {
        let (tree, subset) = d.resolve().map_err(CliError::Malformed)?;
        Ok(GenericPresentation::from_subset(&tree, &subset)?)
    };
    let (src, dst) = (side(&input.src)?, side(&input.dst)?);
    let h = crate::doc::read_table(&input.h, src.k().points(), dst.k().points())
        .map_err(CliError::Malformed)?;
    Ok(PartialHomeo::new(src, dst, h)?)
}

pub fn extend_certificate(input: &ExtendInput) -> Result<ExtendCert, CliError> {
    let p = partial_homeo(input)?;
    let map = extend_homeo(&p)?;
    let (a, b) = (p.src().ambient(), p.dst().ambient());
    Ok(ExtendCert {
        input: input.clone(),
        levels: map
            .levels
            .iter()
            .enumerate()
            .map(|(l, m)| table(a.level(l), b.level(l), m))
            .collect(),
    })
}

/// Inputs of a lift: `f: Y -> X`, `b: K -> Y` and `g` constant on the
/// balls of `g_level`.
pub struct LiftInput {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub f: Vec<usize>,
    pub b: Vec<usize>,
    pub g_level: usize,
    pub g: Vec<usize>,
}

pub fn lift_certificate(
    k: &Arc<BallTree>,
    config: &ConfigDoc,
    input: &LiftInput,
) -> Result<LiftCert, CliError> {
    let Presented { pres, .. } = present(k, config)?;
    let amb = pres.ambient();
    let x = space("X", &input.x).map_err(CliError::Malformed)?;
    let y = space("Y", &input.y).map_err(CliError::Malformed)?;
    let f = Surjection::new(Map::new(y.clone(), x.clone(), input.f.clone())?)?;
    let g = BallMap::new(amb, input.g_level, x.clone(), input.g.clone())?;
    let lift = lift_through_generic(&pres, &f, &input.b, &g)?;
    Ok(LiftCert {
        config: *config,
        k: TreeDoc::from_tree(k),
        ambient: TreeDoc::from_tree(amb),
        eta: eta_table(&pres),
        x: input.x.clone(),
        y: input.y.clone(),
        f: table(&y, &x, f.images()),
        b: table(k.points(), &y, &input.b),
        g_level: input.g_level,
        g: table(amb.level(input.g_level), &x, &input.g),
        beta: lift.beta,
        h: table(amb.level(lift.beta), &y, &lift.h.images),
    })
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// The shipped fixtures: the binary tree of depth `binary_depth` and the
/// four-point pipeline.
pub fn demo_certificates(
    binary_depth: usize,
    config: &ConfigDoc,
) -> Result<Vec<(String, Certificate)>, CliError> {
    let mut out = Vec::new();
    let binary = Arc::new(fixtures::binary_tree(binary_depth));
    let bconfig = ConfigDoc {
        depth: binary_depth,
        ..*config
    };
    out.push((
        format!("binary{binary_depth}-embed"),
        Certificate::Embed(embed_certificate(&binary, &bconfig)?),
    ));
    let last = binary.num_points() - 1;
    let doc = TreeDoc::from_tree(&binary);
    let single = |p: usize| EmbeddedSetDoc {
        ambient: doc.clone(),
        subset: vec![binary.points().label(p).to_string()],
    };
    let swap = ExtendInput {
        src: single(0),
        dst: single(last),
        h: [(
            binary.points().label(0).to_string(),
            binary.points().label(last).to_string(),
        )]
        .into(),
    };
    out.push((
        format!("binary{binary_depth}-swap"),
        Certificate::Extend(extend_certificate(&swap)?),
    ));

    let k4 = fixtures::k4();
    let kconfig = ConfigDoc {
        depth: config.depth.max(k4.depth()),
        ..*config
    };
    out.push((
        "k4-embed".into(),
        Certificate::Embed(embed_certificate(&k4, &kconfig)?),
    ));
    out.push((
        "k4-retract".into(),
        Certificate::Retract(retract_certificate(&k4, &kconfig)?),
    ));

    let pres = present(&k4, &kconfig)?.pres;
    let eta_labels: Vec<String> = pres
        .eta()
        .iter()
        .map(|&a| pres.ambient().points().label(a).to_string())
        .collect();
    let set = EmbeddedSetDoc {
        ambient: TreeDoc::from_tree(pres.ambient()),
        subset: eta_labels.clone(),
    };
    let pair_swap = ExtendInput {
        src: set.clone(),
        dst: set,
        h: [
            (eta_labels[0].clone(), eta_labels[1].clone()),
            (eta_labels[1].clone(), eta_labels[0].clone()),
            (eta_labels[2].clone(), eta_labels[2].clone()),
            (eta_labels[3].clone(), eta_labels[3].clone()),
        ]
        .into(),
    };
    out.push((
        "k4-swap".into(),
        Certificate::Extend(extend_certificate(&pair_swap)?),
    ));

    let top = pres.ambient().level(1).len();
    let lift = LiftInput {
        x: labels("x", top),
        y: [labels("y", top), vec!["extra".into()]].concat(),
        f: (0..top).chain([0]).collect(),
        b: vec![0; k4.num_points()],
        g_level: 1,
        g: (0..top).collect(),
    };
    out.push((
        "k4-lift".into(),
        Certificate::Lift(lift_certificate(&k4, &kconfig, &lift)?),
    ));
    Ok(out)
}
