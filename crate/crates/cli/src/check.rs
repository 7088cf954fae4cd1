//! Independent re-validation of certificates.

use std::sync::Arc;

use fraisse_core::{
    brute_force_lift_oracle, AmbientAutoMap, BallMap, BallTree, Error, LevelWitness, Map,
    NowhereDense, NowhereDenseWitness, Surjection,
};
use serde_json::Value;

use crate::cert::{
    embed_certificate, extend_certificate, lift_certificate, partial_homeo, present,
    retract_certificate, Certificate, EmbedCert, ExtendCert, LiftCert, LiftInput, RetractCert,
};
use crate::doc::{read_table, space, to_json, Table, TreeDoc};

/// Outcome of `verify`: one line per check, and the first failure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<String>,
    pub failure: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn skipped(&self) -> usize {
        self.lines
            .iter()
            .filter(|l| l.starts_with("skipped (bound)"))
            .count()
    }

    fn run(&mut self, name: &str, check: impl FnOnce(&mut Vec<String>) -> Result<(), String>) {
        if self.failure.is_some() {
            return;
        }
        let mut notes = Vec::new();
        let result = check(&mut notes);
        self.lines.extend(notes);
        match result {
            Ok(()) => self.lines.push(format!("ok: {name}")),
            Err(e) => {
                let msg = format!("{name}: {e}");
                self.lines.push(format!("FAILED: {msg}"));
                self.failure = Some(msg);
            }
        }
    }
}

pub fn verify_certificate(cert: &Certificate, bounds: u128) -> Report {
    let mut report = Report::default();
    match cert {
        Certificate::Embed(c) => verify_embed(c, bounds, &mut report),
        Certificate::Retract(c) => verify_retract(c, &mut report),
        Certificate::Extend(c) => verify_extend(c, &mut report),
        Certificate::Lift(c) => verify_lift(c, bounds, &mut report),
    }
    report
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn tree(doc: &TreeDoc, what: &str) -> Result<BallTree, String> {
    doc.to_tree().map_err(|e| format!("{what}: {e}"))
}

fn level_at(t: &BallTree, level: usize) -> Result<(), String> {
    if level > t.depth() {
        return Err(format!(
            "level {level} is below the ambient depth {}",
            t.depth()
        ));
    }
    Ok(())
}

fn injective_eta(k: &BallTree, amb: &BallTree, eta: &Table) -> Result<Vec<usize>, String> {
    let eta = read_table(eta, k.points(), amb.points()).map_err(|e| format!("eta: {e}"))?;
    let mut seen = vec![false; amb.num_points()];
    for (p, &a) in eta.iter().enumerate() {
        if std::mem::replace(&mut seen[a], true) {
            return Err(format!(
                "eta sends `{}` onto an image already taken (`{}`)",
                k.points().label(p),
                amb.points().label(a)
            ));
        }
    }
    Ok(eta)
}

fn onto(images: &[usize], n: usize, what: &str) -> Result<(), String> {
    let mut hit = vec![false; n];
    for &y in images {
        hit[y] = true;
    }
    match hit.iter().position(|h| !h) {
        Some(y) => Err(format!("{what} misses point {y}")),
        None => Ok(()),
    }
}

/// The first path at which two documents differ.
fn first_difference(want: &Value, got: &Value, path: &str) -> Option<String> {
    match (want, got) {
        (Value::Object(a), Value::Object(b)) => {
            for (key, va) in a {
                let here = format!("{path}/{key}");
                match b.get(key) {
                    Some(vb) => {
                        if let Some(d) = first_difference(va, vb, &here) {
                            return Some(d);
                        }
                    }
                    None => return Some(format!("{here} is missing")),
                }
            }
            b.keys()
                .find(|key| !a.contains_key(*key))
                .map(|key| format!("{path}/{key} is unexpected"))
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (va, vb)) in a.iter().zip(b).enumerate() {
                if let Some(d) = first_difference(va, vb, &format!("{path}/{i}")) {
                    return Some(d);
                }
            }
            (a.len() != b.len())
                .then(|| format!("{path} has {} entries, recomputed {}", b.len(), a.len()))
        }
        (a, b) if a == b => None,
        (a, b) => Some(format!("{path} is {b}, recomputed {a}")),
    }
}

fn compare_rebuilt(
    rebuilt: Result<Certificate, crate::CliError>,
    cert: &Certificate,
) -> Result<(), String> {
    let rebuilt = rebuilt.map_err(|e| format!("recomputation failed: {e}"))?;
    let want = serde_json::to_value(&rebuilt).map_err(err)?;
    let got = serde_json::to_value(cert).map_err(err)?;
    match first_difference(&want, &got, "") {
        Some(d) => Err(d),
        None if to_json(&rebuilt) == to_json(cert) => Ok(()),
        None => Err("documents differ in layout".into()),
    }
}

fn check_witness(c: &EmbedCert, amb: &BallTree, eta: &[usize]) -> Result<(), String> {
    if c.witness.len() != amb.depth() {
        return Err(format!(
            "{} witness levels for depth {}",
            c.witness.len(),
            amb.depth()
        ));
    }
    let levels = c
        .witness
        .iter()
        .enumerate()
        .map(|(alpha, w)| {
            if w.alpha != alpha {
                return Err(format!("entry {alpha} claims level {}", w.alpha));
            }
            level_at(amb, w.beta)?;
            let balls = read_table(&w.balls, amb.level(alpha), amb.level(w.beta))
                .map_err(|e| format!("level {alpha}: {e}"))?;
            Ok(LevelWitness {
                beta: w.beta,
                balls,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let witness = NowhereDenseWitness { levels };
    witness.validate(amb, eta).map_err(err)?;
    match amb.is_uniformly_nowhere_dense(eta).map_err(err)? {
        NowhereDense::Witness(w) if w == witness => Ok(()),
        NowhereDense::Witness(w) => Err(format!(
            "valid but not canonical; least levels are {:?}, least balls follow",
            w.betas()
        )),
        NowhereDense::FailsAt { level } => Err(format!("the checker rejects level {level}")),
    }
}

/// All maps `n -> m`, in lexicographic order, while `m^n <= bound`.
fn every_map(n: usize, m: usize, bound: u128) -> Option<impl Iterator<Item = Vec<usize>>> {
    let count = (m as u128).checked_pow(n as u32)?;
    if count > bound {
        return None;
    }
    Some((0..count).map(move |mut code| {
        (0..n)
            .map(|_| {
                let d = (code % m as u128) as usize;
                code /= m as u128;
                d
            })
            .collect()
    }))
}

fn verify_embed(c: &EmbedCert, bounds: u128, report: &mut Report) {
    let mut parsed = None;
    report.run("schema", |_| {
        let k = tree(&c.k, "K")?;
        let amb = tree(&c.ambient, "ambient")?;
        c.config.schedule().map_err(err)?;
        level_at(&amb, c.offset)?;
        let eta = injective_eta(&k, &amb, &c.eta)?;
        parsed = Some((k, amb, eta));
        Ok(())
    });
    let Some((k, amb, eta)) = parsed else { return };
    report.run("uniform nowhere density witness", |_| {
        check_witness(c, &amb, &eta)
    });
    for (i, t) in c.tasks.iter().enumerate() {
        report.run(
            &format!("task {i} ({}) factors at beta {}", t.tag, t.beta),
            |notes| {
                let (stage, beta) = (t.stage + c.offset, t.beta + c.offset);
                level_at(&amb, beta)?;
                if t.stage > t.beta {
                    return Err(format!("beta {} is above the stage {}", t.beta, t.stage));
                }
                let y = space("Y", &t.y)?;
                let f = read_table(&t.f, &y, amb.level(stage)).map_err(|e| format!("f: {e}"))?;
                let g = read_table(&t.g, amb.level(beta), &y).map_err(|e| format!("g: {e}"))?;
                let ki =
                    read_table(&t.k_images, k.points(), &y).map_err(|e| format!("K map: {e}"))?;
                onto(&f, amb.level(stage).len(), "f")?;
                onto(&g, y.len(), "g")?;
                for (p, &a) in eta.iter().enumerate() {
                    if f[ki[p]] != amb.leaf_ancestor(a, stage) {
                        return Err(format!(
                            "the task does not commute at `{}`",
                            k.points().label(p)
                        ));
                    }
                }
                let lands = |level: usize, g: &[usize]| {
                    (0..g.len()).all(|u| f[g[u]] == amb.ancestor(level, u, stage))
                        && eta
                            .iter()
                            .enumerate()
                            .all(|(p, &a)| g[amb.leaf_ancestor(a, level)] == ki[p])
                };
                if !lands(beta, &g) {
                    return Err("f ∘ g differs from the bond, or g misses the K map".into());
                }
                for lower in t.stage..t.beta {
                    let level = lower + c.offset;
                    match every_map(amb.level(level).len(), y.len(), bounds) {
                        None => notes.push(format!(
                            "skipped (bound): task {i} minimality at beta {lower}, {}^{} maps",
                            y.len(),
                            amb.level(level).len()
                        )),
                        Some(mut maps) => {
                            if maps.any(|g| onto(&g, y.len(), "").is_ok() && lands(level, &g)) {
                                return Err(format!(
                                    "a factorization already exists at beta {lower}"
                                ));
                            }
                        }
                    }
                }
                Ok(())
            },
        );
    }
    report.run("recomputation", |_| {
        compare_rebuilt(
            embed_certificate(&Arc::new(k.clone()), &c.config).map(Certificate::Embed),
            &Certificate::Embed(c.clone()),
        )
    });
}

fn verify_retract(c: &RetractCert, report: &mut Report) {
    let mut parsed = None;
    report.run("schema", |_| {
        let k = tree(&c.k, "K")?;
        let amb = tree(&c.ambient, "ambient")?;
        c.config.schedule().map_err(err)?;
        let eta = injective_eta(&k, &amb, &c.eta)?;
        let r = read_table(&c.r, amb.points(), k.points()).map_err(|e| format!("r: {e}"))?;
        parsed = Some((k, amb, eta, r));
        Ok(())
    });
    let Some((k, amb, eta, r)) = parsed else {
        return;
    };
    report.run("r ∘ eta = id", |_| {
        match eta.iter().enumerate().find(|&(p, &a)| r[a] != p) {
            Some((p, &a)) => Err(format!(
                "`{}` goes to `{}` and back to `{}`",
                k.points().label(p),
                amb.points().label(a),
                k.points().label(r[a])
            )),
            None => Ok(()),
        }
    });
    report.run("r is constant on the certified ball levels", |_| {
        if c.ball_levels.len() != k.depth() + 1 || c.reindex.len() != k.depth() + 1 {
            return Err(format!("expected {} levels", k.depth() + 1));
        }
        for (alpha, &level) in c.ball_levels.iter().enumerate() {
            if level != c.reindex[alpha] + c.offset {
                return Err(format!(
                    "level {alpha}: ball level {level} does not match the reindexing"
                ));
            }
            level_at(&amb, level)?;
            let mut seen: Vec<Option<usize>> = vec![None; amb.level(level).len()];
            for (a, &image) in r.iter().enumerate() {
                let ball = k.leaf_ancestor(image, alpha);
                let owner = amb.leaf_ancestor(a, level);
                if *seen[owner].get_or_insert(ball) != ball {
                    return Err(format!(
                        "ambient ball `{}` meets two level-{alpha} balls of K",
                        amb.level(level).label(owner)
                    ));
                }
            }
        }
        Ok(())
    });
    report.run("recomputation", |_| {
        compare_rebuilt(
            retract_certificate(&Arc::new(k.clone()), &c.config).map(Certificate::Retract),
            &Certificate::Retract(c.clone()),
        )
    });
}

fn verify_extend(c: &ExtendCert, report: &mut Report) {
    let mut parsed = None;
    report.run("inputs form a partial homeomorphism", |_| {
        parsed = Some(partial_homeo(&c.input).map_err(err)?);
        Ok(())
    });
    let Some(p) = parsed else { return };
    report.run("bijective, parent-compatible and extends h", |_| {
        let (a, b) = (p.src().ambient(), p.dst().ambient());
        if c.levels.len() != a.depth() + 1 {
            return Err(format!("{} levels for depth {}", c.levels.len(), a.depth()));
        }
        let levels = c
            .levels
            .iter()
            .enumerate()
            .map(|(l, t)| {
                level_at(b, l)?;
                read_table(t, a.level(l), b.level(l)).map_err(|e| format!("level {l}: {e}"))
            })
            .collect::<Result<Vec<_>, String>>()?;
        AmbientAutoMap { levels }.check(&p).map_err(err)
    });
    report.run("recomputation", |_| {
        compare_rebuilt(
            extend_certificate(&c.input).map(Certificate::Extend),
            &Certificate::Extend(c.clone()),
        )
    });
}

fn verify_lift(c: &LiftCert, bounds: u128, report: &mut Report) {
    let mut parsed = None;
    report.run("schema", |_| {
        let k = tree(&c.k, "K")?;
        let amb = tree(&c.ambient, "ambient")?;
        c.config.schedule().map_err(err)?;
        let eta = injective_eta(&k, &amb, &c.eta)?;
        let x = space("X", &c.x)?;
        let y = space("Y", &c.y)?;
        level_at(&amb, c.g_level)?;
        level_at(&amb, c.beta)?;
        let f = read_table(&c.f, &y, &x).map_err(|e| format!("f: {e}"))?;
        let b = read_table(&c.b, k.points(), &y).map_err(|e| format!("b: {e}"))?;
        let g = read_table(&c.g, amb.level(c.g_level), &x).map_err(|e| format!("g: {e}"))?;
        let h = read_table(&c.h, amb.level(c.beta), &y).map_err(|e| format!("h: {e}"))?;
        onto(&f, x.len(), "f")?;
        parsed = Some((k, amb, eta, x, y, f, b, g, h));
        Ok(())
    });
    let Some((k, amb, eta, x, y, f, b, g, h)) = parsed else {
        return;
    };
    report.run("f ∘ h = g and h ∘ eta = b pointwise", |_| {
        onto(&h, y.len(), "h")?;
        for a in 0..amb.num_points() {
            let (hv, gv) = (
                h[amb.leaf_ancestor(a, c.beta)],
                g[amb.leaf_ancestor(a, c.g_level)],
            );
            if f[hv] != gv {
                return Err(format!("f ∘ h and g differ at `{}`", amb.points().label(a)));
            }
        }
        for (p, &a) in eta.iter().enumerate() {
            if h[amb.leaf_ancestor(a, c.beta)] != b[p] {
                return Err(format!("h ∘ eta and b differ at `{}`", k.points().label(p)));
            }
        }
        Ok(())
    });
    let k = Arc::new(k);
    report.run("lift oracle", |notes| {
        let pres = present(&k, &c.config).map_err(err)?.pres;
        if TreeDoc::from_tree(pres.ambient()) != c.ambient {
            return Err("the ambient is not the one built from K and the configuration".into());
        }
        let fs = Surjection::new(Map::new(y.clone(), x.clone(), f.clone()).map_err(err)?)
            .map_err(err)?;
        let gm = BallMap::new(pres.ambient(), c.g_level, x.clone(), g.clone()).map_err(err)?;
        let hm = BallMap::new(pres.ambient(), c.beta, y.clone(), h.clone()).map_err(err)?;
        match brute_force_lift_oracle(&pres, &fs, &b, &gm, c.beta, bounds) {
            Ok(all) if all.contains(&hm) => Ok(()),
            Ok(all) => Err(format!(
                "h is not among the {} lifts found by enumeration",
                all.len()
            )),
            Err(Error::BoundExceeded { needed, bound }) => {
                notes.push(format!(
                    "skipped (bound): lift oracle needs {needed} maps, bound {bound}"
                ));
                Ok(())
            }
            Err(e) => Err(e.to_string()),
        }
    });
    report.run("recomputation", |_| {
        let input = LiftInput {
            x: c.x.clone(),
            y: c.y.clone(),
            f,
            b,
            g_level: c.g_level,
            g,
        };
        compare_rebuilt(
            lift_certificate(&k, &c.config, &input).map(Certificate::Lift),
            &Certificate::Lift(c.clone()),
        )
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn first_difference_names_the_path() {
        let a = json!({"eta": {"00": "p1"}, "levels": [1, 2]});
        assert_eq!(first_difference(&a, &a, ""), None);
        let b = json!({"eta": {"00": "p0"}, "levels": [1, 2]});
        assert_eq!(
            first_difference(&a, &b, "").unwrap(),
            "/eta/00 is \"p0\", recomputed \"p1\""
        );
        let c = json!({"eta": {"00": "p1"}, "levels": [1]});
        assert!(first_difference(&a, &c, "").unwrap().contains("1 entries"));
    }

    #[test]
    fn enumeration_respects_bound() {
        assert!(every_map(3, 4, 63).is_none());
        let all: Vec<_> = every_map(2, 2, 4).unwrap().collect();
        assert_eq!(all, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
    }
}
