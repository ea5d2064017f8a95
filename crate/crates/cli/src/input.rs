//! Input resolution: every command takes exactly one of a tournament file, an
//! inline spec JSON, or --family with its parameter flags.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qrt_core::{FamilySpec, SplitRule, Tournament};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SplitRuleArg {
    Canonical,
    Random,
}

impl From<SplitRuleArg> for SplitRule {
    fn from(arg: SplitRuleArg) -> Self {
        match arg {
            SplitRuleArg::Canonical => SplitRule::Canonical,
            SplitRuleArg::Random => SplitRule::Random,
        }
    }
}

/// Construction-spec flags shared by `construct` and the analysis commands.
#[derive(Args, Debug)]
pub struct SpecArgs {
    /// Construction spec as inline JSON (e.g. '{"family":"paley","p":7}')
    #[arg(long, value_name = "JSON")]
    pub spec_json: Option<String>,

    /// Construction family: paley | cyclotomic | elliptic
    #[arg(long)]
    pub family: Option<String>,

    /// Prime modulus (paley/cyclotomic) or base-field prime (elliptic)
    #[arg(long)]
    pub p: Option<u64>,

    /// Number of cyclotomic classes
    #[arg(long)]
    pub m: Option<u32>,

    /// Cyclotomic class indices, comma separated (e.g. 0,1)
    #[arg(long, value_delimiter = ',')]
    pub ivec: Option<Vec<u32>>,

    /// Group order of the elliptic curve
    #[arg(long)]
    pub n: Option<u64>,

    /// Inverse-pair split rule for the elliptic family
    #[arg(long, value_enum)]
    pub rule: Option<SplitRuleArg>,

    /// Seed for the random split rule
    #[arg(long)]
    pub split_seed: Option<u64>,
}

impl SpecArgs {
    fn source_count(&self) -> usize {
        self.spec_json.is_some() as usize + self.family.is_some() as usize
    }

    fn forbid(&self, family: &str, flags: &[(&str, bool)]) -> Result<(), CliError> {
        for (name, present) in flags {
            if *present {
                return Err(CliError::Usage(format!(
                    "{name} does not apply to the {family} family"
                )));
            }
        }
        Ok(())
    }

    fn require<T: Copy>(opt: Option<T>, name: &str, family: &str) -> Result<T, CliError> {
        opt.ok_or_else(|| CliError::Usage(format!("the {family} family requires {name}")))
    }

    /// Assemble a spec from the flags; assumes exactly one source was checked
    /// by the caller.
    pub fn to_spec(&self) -> Result<FamilySpec, CliError> {
        if let Some(json) = &self.spec_json {
            if self.family.is_some()
                || self.p.is_some()
                || self.m.is_some()
                || self.ivec.is_some()
                || self.n.is_some()
                || self.rule.is_some()
                || self.split_seed.is_some()
            {
                return Err(CliError::Usage(
                    "--spec-json cannot be combined with family parameter flags".into(),
                ));
            }
            return serde_json::from_str(json)
                .map_err(|e| CliError::Usage(format!("invalid spec JSON: {e}")));
        }
        let family = self.family.as_deref().ok_or_else(|| {
            CliError::Usage("provide a construction via --family or --spec-json".into())
        })?;
        match family {
            "paley" => {
                self.forbid(
                    family,
                    &[
                        ("--m", self.m.is_some()),
                        ("--ivec", self.ivec.is_some()),
                        ("--n", self.n.is_some()),
                        ("--rule", self.rule.is_some()),
                        ("--split-seed", self.split_seed.is_some()),
                    ],
                )?;
                Ok(FamilySpec::Paley { p: Self::require(self.p, "--p", family)? })
            }
            "cyclotomic" => {
                self.forbid(
                    family,
                    &[
                        ("--n", self.n.is_some()),
                        ("--rule", self.rule.is_some()),
                        ("--split-seed", self.split_seed.is_some()),
                    ],
                )?;
                Ok(FamilySpec::Cyclotomic {
                    p: Self::require(self.p, "--p", family)?,
                    m: Self::require(self.m, "--m", family)?,
                    ivec: self
                        .ivec
                        .clone()
                        .ok_or_else(|| CliError::Usage("the cyclotomic family requires --ivec".into()))?,
                })
            }
            "elliptic" => {
                self.forbid(family, &[("--m", self.m.is_some()), ("--ivec", self.ivec.is_some())])?;
                let rule = self.rule.map_or(SplitRule::Canonical, SplitRule::from);
                if self.split_seed.is_some() && rule == SplitRule::Canonical {
                    return Err(CliError::Usage(
                        "--split-seed only applies to --rule random".into(),
                    ));
                }
                Ok(FamilySpec::Elliptic {
                    p: Self::require(self.p, "--p", family)?,
                    n: Self::require(self.n, "--n", family)?,
                    rule,
                    seed: self.split_seed,
                })
            }
            other => Err(CliError::Usage(format!(
                "unknown family {other:?} (expected paley, cyclotomic, or elliptic)"
            ))),
        }
    }
}

/// SpecArgs plus the positional tournament file, for the analysis commands.
#[derive(Args, Debug)]
pub struct InputArgs {
    /// Tournament in text form: first line n, then n rows of 0/1
    #[arg(value_name = "FILE")]
    pub file: Option<PathBuf>,

    #[command(flatten)]
    pub spec: SpecArgs,
}

pub struct ResolvedInput {
    pub tournament: Tournament,
    pub spec: Option<FamilySpec>,
    /// Circulant connection set when the construction has one.
    pub residues: Option<Vec<u64>>,
    pub content_hash: String,
}

pub fn content_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

impl InputArgs {
    pub fn resolve(&self) -> Result<ResolvedInput, CliError> {
        let sources = self.file.is_some() as usize + self.spec.source_count();
        if sources != 1 {
            return Err(CliError::Usage(
                "provide exactly one input source: FILE, --spec-json, or --family".into(),
            ));
        }
        if let Some(path) = &self.file {
            if self.spec.p.is_some()
                || self.spec.m.is_some()
                || self.spec.ivec.is_some()
                || self.spec.n.is_some()
                || self.spec.rule.is_some()
                || self.spec.split_seed.is_some()
            {
                return Err(CliError::Usage(
                    "family parameter flags do not apply to a FILE input".into(),
                ));
            }
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let tournament = Tournament::from_text(&raw)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let hash = content_hash(&tournament.to_text());
            return Ok(ResolvedInput {
                tournament,
                spec: None,
                residues: None,
                content_hash: hash,
            });
        }
        let spec = self.spec.to_spec()?;
        let built = spec.build().map_err(|e| CliError::Usage(e.to_string()))?;
        let hash = content_hash(&built.tournament.to_text());
        Ok(ResolvedInput {
            tournament: built.tournament,
            spec: Some(spec),
            residues: built.residues,
            content_hash: hash,
        })
    }
}
