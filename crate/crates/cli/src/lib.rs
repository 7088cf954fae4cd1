//! Command line front end: builds certificates for embeddings, retractions,
//! extensions and lifts, and re-checks them.

pub mod cert;
pub mod check;
pub mod doc;
pub mod error;

use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use cert::{demo_certificates, Certificate};
pub use check::{verify_certificate, Report};
pub use error::CliError;

use doc::{read, to_json, ConfigDoc, ExtendInput, TreeDoc};

pub const DEFAULT_BOUND: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Embed,
    Extend,
    Retract,
    Verify,
    Demo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub depth: usize,
    pub pad_base: usize,
    pub pad_growth: usize,
    /// Largest number of candidate maps a brute-force oracle may enumerate.
    pub bounds: u128,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            depth: 4,
            pad_base: 2,
            pad_growth: 2,
            bounds: DEFAULT_BOUND,
            out: None,
        }
    }

    fn config_doc(&self) -> Result<ConfigDoc, CliError> {
        if self.depth == 0 {
            return Err(CliError::Malformed("--depth must be at least 1".into()));
        }
        let doc = ConfigDoc {
            depth: self.depth,
            pad_base: self.pad_base,
            pad_growth: self.pad_growth,
        };
        doc.schedule()?;
        Ok(doc)
    }

    fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Malformed("an input file is required".into()))
    }
}

/// What a command prints: the document (to `--out` or stdout) and a
/// human-readable summary (to stderr).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub document: Option<String>,
    pub summary: Vec<String>,
}

pub fn cmd_embed(config: &RunConfig) -> Result<Certificate, CliError> {
    let k = read_tree(config.input()?)?;
    Ok(Certificate::Embed(cert::embed_certificate(
        &k,
        &config.config_doc()?,
    )?))
}

pub fn cmd_retract(config: &RunConfig) -> Result<Certificate, CliError> {
    let k = read_tree(config.input()?)?;
    Ok(Certificate::Retract(cert::retract_certificate(
        &k,
        &config.config_doc()?,
    )?))
}

pub fn cmd_extend(config: &RunConfig) -> Result<Certificate, CliError> {
    let input: ExtendInput = read(config.input()?)?;
    Ok(Certificate::Extend(cert::extend_certificate(&input)?))
}

pub fn cmd_verify(config: &RunConfig) -> Result<Report, CliError> {
    let cert: Certificate = read(config.input()?)?;
    Ok(verify_certificate(&cert, config.bounds))
}

fn read_tree(path: &Path) -> Result<Arc<fraisse_core::BallTree>, CliError> {
    let doc: TreeDoc = read(path)?;
    doc.to_tree().map(Arc::new).map_err(CliError::Malformed)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(config: &RunConfig, cert: &Certificate) -> Result<Outcome, CliError> {
    let text = to_json(cert);
    let summary = vec![format!("{} certificate built", cert.kind())];
    match &config.out {
        Some(path) => {
            write(path, &text)?;
            Ok(Outcome {
                document: None,
                summary,
            })
        }
        None => Ok(Outcome {
            document: Some(text),
            summary,
        }),
    }
}

/// Runs one command. Verification failures come back as
/// [`CliError::Verification`] carrying the first counterexample.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        Command::Embed => emit(config, &cmd_embed(config)?),
        Command::Retract => emit(config, &cmd_retract(config)?),
        Command::Extend => emit(config, &cmd_extend(config)?),
        Command::Verify => {
            let report = cmd_verify(config)?;
            match report.failure {
                Some(f) => Err(CliError::Verification(f)),
                None => Ok(Outcome {
                    document: Some(report.lines.join("\n") + "\n"),
                    summary: vec![format!("all checks passed ({} skipped)", report.skipped())],
                }),
            }
        }
        Command::Demo => {
            let certs = demo_certificates(3, &config.config_doc()?)?;
            let mut summary = Vec::new();
            match &config.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                        path: dir.clone(),
                        source,
                    })?;
                    for (name, cert) in &certs {
                        let path = dir.join(format!("{name}.json"));
                        write(&path, &to_json(cert))?;
                        summary.push(format!("wrote {}", path.display()));
                    }
                    Ok(Outcome {
                        document: None,
                        summary,
                    })
                }
                None => {
                    let all: serde_json::Map<String, serde_json::Value> = certs
                        .iter()
                        .map(|(n, c)| {
                            (
                                n.clone(),
                                serde_json::to_value(c).expect("certificates serialize"),
                            )
                        })
                        .collect();
                    summary.push(format!("{} certificates", certs.len()));
                    Ok(Outcome {
                        document: Some(to_json(&all)),
                        summary,
                    })
                }
            }
        }
    }
}
