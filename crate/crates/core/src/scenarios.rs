//! Built-in learning problems, loaded from JSON and verified against their tags.
//!
//! The registry lives in `data/scenarios`: an `index.json` listing each
//! scenario's file, tags and note, plus one problem file per scenario. The
//! files are compiled in; setting `GERM_DATA_DIR` loads them from that
//! directory instead.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{bernstein_min_b, excess_moments};
use crate::error::{invalid, Result};
use crate::germ::Algorithm;
use crate::oracle::{erm_violations, exact_risk_curve, find_erm_nonmonotone};
use crate::problem::{optimal_risk, LearningProblem};
use crate::rng::stream_rng;

pub const DATA_DIR_ENV: &str = "GERM_DATA_DIR";

const EMBEDDED_INDEX: &str = include_str!("../../../data/scenarios/index.json");
const EMBEDDED_FILES: &[(&str, &str)] = &[
    ("s1.json", include_str!("../../../data/scenarios/s1.json")),
    ("s2.json", include_str!("../../../data/scenarios/s2.json")),
    ("s3.json", include_str!("../../../data/scenarios/s3.json")),
    ("s4.json", include_str!("../../../data/scenarios/s4.json")),
    ("s5.json", include_str!("../../../data/scenarios/s5.json")),
    ("s6.json", include_str!("../../../data/scenarios/s6.json")),
];

/// Tolerance for matching a recomputed witness curve against the stored one.
const WITNESS_CURVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    SingleHypothesis,
    Realizable,
    Misspecified,
    ErmNonmonotoneWitness,
    /// Satisfies the Bernstein condition with `β = 1`.
    Massart,
    /// Only the `β = 0` condition is informative: the closest competitor's
    /// excess loss keeps the full variance allowed by that condition.
    WorstCase,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::SingleHypothesis => "single-hypothesis",
            Tag::Realizable => "realizable",
            Tag::Misspecified => "misspecified",
            Tag::ErmNonmonotoneWitness => "erm-nonmonotone-witness",
            Tag::Massart => "massart",
            Tag::WorstCase => "worst-case",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a witness was found, and its exact plain-ERM curve at `n = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRecord {
    pub seed: u64,
    pub stream: u64,
    pub m: usize,
    pub class_size: usize,
    pub n_probe: usize,
    pub budget: usize,
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexEntry {
    id: String,
    file: String,
    tags: BTreeSet<Tag>,
    note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessRecord>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub problem: LearningProblem,
    pub tags: BTreeSet<Tag>,
    pub note: String,
    pub witness: Option<WitnessRecord>,
}

impl Scenario {
    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    /// Recomputes every tag's defining property.
    pub fn verify(&self) -> Result<()> {
        for &tag in &self.tags {
            if !self.check_tag(tag)? {
                return Err(invalid(format!("scenario {}: tag '{tag}' does not hold", self.id)));
            }
        }
        if self.witness.is_some() && !self.has_tag(Tag::ErmNonmonotoneWitness) {
            return Err(invalid(format!("scenario {}: witness record without witness tag", self.id)));
        }
        Ok(())
    }

    fn check_tag(&self, tag: Tag) -> Result<bool> {
        let p = &self.problem;
        let (best, hstar) = optimal_risk(p);
        Ok(match tag {
            Tag::SingleHypothesis => p.class_size() == 1,
            Tag::Realizable => best == 0.0,
            Tag::Misspecified => best > 0.0,
            Tag::Massart => bernstein_min_b(p, 1.0)?.minimal_b.is_finite(),
            Tag::WorstCase => {
                let b0 = bernstein_min_b(p, 0.0)?.minimal_b;
                let risks = p.risks();
                let closest = (0..p.class_size())
                    .filter(|&h| risks[h] > best)
                    .min_by(|&a, &b| risks[a].total_cmp(&risks[b]));
                match closest {
                    Some(h) => excess_moments(p, h, hstar).1 >= b0 - 1e-12,
                    None => false,
                }
            }
            Tag::ErmNonmonotoneWitness => match &self.witness {
                Some(w) => self.witness_holds(w)?,
                None => false,
            },
        })
    }

    fn witness_holds(&self, w: &WitnessRecord) -> Result<bool> {
        if w.curve.len() < 2 {
            return Ok(false);
        }
        let curve = exact_risk_curve(&self.problem, &Algorithm::PlainErm, w.curve.len() - 1)?;
        let matches = curve
            .values
            .iter()
            .zip(&w.curve)
            .all(|(a, b)| (a - b).abs() <= WITNESS_CURVE_TOL);
        Ok(matches && !erm_violations(&curve).is_empty())
    }
}

/// Reruns the witness search from the recorded seed and returns what it finds.
pub fn research_witness(record: &WitnessRecord) -> Result<Option<LearningProblem>> {
    let mut rng = stream_rng(record.seed, record.stream);
    find_erm_nonmonotone(record.m, record.class_size, record.n_probe, record.budget, &mut rng)
}

/// The registry, from `GERM_DATA_DIR` if set and otherwise the compiled-in copy.
pub fn builtin_scenarios() -> Result<Vec<Scenario>> {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => load_scenarios(Path::new(&dir)),
        None => parse_registry(EMBEDDED_INDEX, |file| {
            EMBEDDED_FILES
                .iter()
                .find(|(name, _)| *name == file)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| invalid(format!("no embedded scenario file '{file}'")))
        }),
    }
}

/// Loads and verifies the registry stored in `dir`.
pub fn load_scenarios(dir: &Path) -> Result<Vec<Scenario>> {
    let index = std::fs::read_to_string(dir.join("index.json"))?;
    parse_registry(&index, |file| Ok(std::fs::read_to_string(dir.join(file))?))
}

fn parse_registry<F>(index: &str, mut read: F) -> Result<Vec<Scenario>>
where
    F: FnMut(&str) -> Result<String>,
{
    let entries: Vec<IndexEntry> = serde_json::from_str(index)?;
    let mut out: Vec<Scenario> = Vec::with_capacity(entries.len());
    for e in entries {
        if out.iter().any(|s| s.id == e.id) {
            return Err(invalid(format!("duplicate scenario id '{}'", e.id)));
        }
        let problem = LearningProblem::from_json(&read(&e.file)?)?;
        if problem.name() != e.id {
            return Err(invalid(format!("scenario '{}' file names its problem '{}'", e.id, problem.name())));
        }
        let s = Scenario { id: e.id, problem, tags: e.tags, note: e.note, witness: e.witness };
        s.verify()?;
        out.push(s);
    }
    Ok(out)
}

/// Looks a scenario up by id, case-insensitively.
pub fn find_scenario(id: &str) -> Result<Scenario> {
    builtin_scenarios()?
        .into_iter()
        .find(|s| s.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| invalid(format!("unknown scenario '{id}'")))
}
