//! Experiment configuration: a flat key=value text format, validation, and
//! the canonical resolved echo written next to every run's outputs.

use crate::consistency::Release;
use crate::error::{Result, SimError};
use crate::ingest::EdgeListFormat;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Dissimilarity tolerance schedule over releases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaSpec {
    /// min(1500, 16 + 250 * (i - 2)^2): tight at the first attacked
    /// release, then widening quadratically up to a cap.
    Widening,
    Const(u64),
    Quad { base: u64, coef: u64, cap: u64 },
}

impl ThetaSpec {
    pub fn resolve(&self, release: Release) -> u64 {
        let quad = |base: u64, coef: u64, cap: u64| {
            let d = release.saturating_sub(2) as u64;
            cap.min(base.saturating_add(coef.saturating_mul(d * d)))
        };
        match *self {
            ThetaSpec::Widening => quad(16, 250, 1500),
            ThetaSpec::Const(v) => v,
            ThetaSpec::Quad { base, coef, cap } => quad(base, coef, cap),
        }
    }
}

impl fmt::Display for ThetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaSpec::Widening => write!(f, "widening"),
            ThetaSpec::Const(v) => write!(f, "const:{}", v),
            ThetaSpec::Quad { base, coef, cap } => write!(f, "quad:{},{},{}", base, coef, cap),
        }
    }
}

/// Minimum fingerprint similarity required for a victim match.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaSpec {
    /// Half the sybil count, rounded up.
    Half,
    Const(usize),
}

impl EtaSpec {
    pub fn resolve(&self, n_sybils: usize) -> usize {
        match *self {
            EtaSpec::Half => n_sybils.div_ceil(2).max(1),
            EtaSpec::Const(v) => v,
        }
    }
}

impl fmt::Display for EtaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaSpec::Half => write!(f, "half"),
            EtaSpec::Const(v) => write!(f, "const:{}", v),
        }
    }
}

/// Where cut timestamps come from when replaying a real edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutSpec {
    Explicit(Vec<i64>),
    /// Regular grid: from `start` (or the dataset minimum) in steps of
    /// `step`, until the dataset maximum is passed.
    Every { start: Option<i64>, step: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    Synthetic { n0: usize, me: usize, nv: usize, r_delta: f64, snapshots: usize },
    EdgeList {
        dataset: PathBuf,
        format: EdgeListFormat,
        cuts: CutSpec,
        include_isolated: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceSpec,
    pub trials: u32,
    pub master_seed: u64,
    pub noise_ratio: f64,
    pub theta: ThetaSpec,
    pub eta: EtaSpec,
    pub temporal: bool,
    pub victim_bounds: (usize, usize),
    pub first_attack: Release,
    pub creation_end: Release,
    pub refine_depth: u32,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: SourceSpec::Synthetic {
                n0: 30,
                me: 5,
                nv: 200,
                r_delta: 0.05,
                snapshots: 10,
            },
            trials: 1,
            master_seed: 42,
            noise_ratio: 0.005,
            theta: ThetaSpec::Widening,
            eta: EtaSpec::Half,
            temporal: true,
            victim_bounds: (1, 5),
            first_attack: 2,
            creation_end: 2,
            refine_depth: 1,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(SimError::Config("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_ratio) {
            return Err(SimError::Config(format!(
                "noise_ratio {} outside [0, 1]",
                self.noise_ratio
            )));
        }
        if self.victim_bounds.0 < 1 || self.victim_bounds.0 > self.victim_bounds.1 {
            return Err(SimError::Config(format!(
                "victim bounds ({}, {}) must satisfy 1 <= min <= max",
                self.victim_bounds.0, self.victim_bounds.1
            )));
        }
        if self.creation_end < 1 {
            return Err(SimError::Config("creation_end must be at least 1".into()));
        }
        if self.first_attack < self.creation_end {
            return Err(SimError::Config(format!(
                "first_attack {} before the creation span ends at {}",
                self.first_attack, self.creation_end
            )));
        }
        if let EtaSpec::Const(0) = self.eta {
            return Err(SimError::Config("eta must be at least 1".into()));
        }
        match &self.source {
            SourceSpec::Synthetic { n0, me, nv, r_delta, snapshots } => {
                if *n0 < 2 {
                    return Err(SimError::Config("n0 must be at least 2".into()));
                }
                if *me < 1 || me > n0 {
                    return Err(SimError::Config(
                        "edges_per_vertex must be in 1..=n0".into(),
                    ));
                }
                if nv < n0 {
                    return Err(SimError::Config(
                        "initial_vertices must be at least n0".into(),
                    ));
                }
                if *r_delta <= 0.0 {
                    return Err(SimError::Config("growth_ratio must be positive".into()));
                }
                if *snapshots < 1 {
                    return Err(SimError::Config("snapshots must be at least 1".into()));
                }
            }
            SourceSpec::EdgeList { cuts, .. } => match cuts {
                CutSpec::Explicit(ts) => {
                    if ts.is_empty() {
                        return Err(SimError::Config("cuts must not be empty".into()));
                    }
                    if ts.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(SimError::Config(
                            "cuts must strictly increase".into(),
                        ));
                    }
                }
                CutSpec::Every { step, .. } => {
                    if *step <= 0 {
                        return Err(SimError::Config("cut_every must be positive".into()));
                    }
                }
            },
        }
        Ok(())
    }

    /// Canonical echo of every resolved knob. Written verbatim to
    /// `config.resolved.txt`; stable ordering, one `key = value` per line.
    pub fn resolved_text(&self) -> String {
        let mut s = String::new();
        match &self.source {
            SourceSpec::Synthetic { n0, me, nv, r_delta, snapshots } => {
                s.push_str("source = synthetic\n");
                s.push_str(&format!("n0 = {}\n", n0));
                s.push_str(&format!("edges_per_vertex = {}\n", me));
                s.push_str(&format!("initial_vertices = {}\n", nv));
                s.push_str(&format!("growth_ratio = {}\n", r_delta));
                s.push_str(&format!("snapshots = {}\n", snapshots));
            }
            SourceSpec::EdgeList { dataset, format, cuts, include_isolated } => {
                s.push_str("source = edgelist\n");
                s.push_str(&format!("dataset = {}\n", dataset.display()));
                s.push_str(&format!(
                    "format = {}\n",
                    match format {
                        EdgeListFormat::Plain => "plain",
                        EdgeListFormat::Konect => "konect",
                    }
                ));
                match cuts {
                    CutSpec::Explicit(ts) => {
                        let joined: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                        s.push_str(&format!("cuts = {}\n", joined.join(",")));
                    }
                    CutSpec::Every { start, step } => {
                        if let Some(st) = start {
                            s.push_str(&format!("cut_start = {}\n", st));
                        }
                        s.push_str(&format!("cut_every = {}\n", step));
                    }
                }
                s.push_str(&format!("include_isolated = {}\n", include_isolated));
            }
        }
        s.push_str(&format!("trials = {}\n", self.trials));
        s.push_str(&format!("seed = {}\n", self.master_seed));
        s.push_str(&format!("noise_ratio = {}\n", self.noise_ratio));
        s.push_str(&format!("theta = {}\n", self.theta));
        s.push_str(&format!("eta = {}\n", self.eta));
        s.push_str(&format!("temporal = {}\n", self.temporal));
        s.push_str(&format!("victims_min = {}\n", self.victim_bounds.0));
        s.push_str(&format!("victims_max = {}\n", self.victim_bounds.1));
        s.push_str(&format!("first_attack = {}\n", self.first_attack));
        s.push_str(&format!("creation_end = {}\n", self.creation_end));
        s.push_str(&format!("refine_depth = {}\n", self.refine_depth));
        if let Some(out) = &self.out_dir {
            s.push_str(&format!("out = {}\n", out.display()));
        }
        s.push_str("# degree_kl direction: original distribution first, released second\n");
        s
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(SimError::Config(format!("{}: expected a boolean, got {:?}", key, v))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| SimError::Config(format!("{}: cannot parse {:?}", key, v)))
}

fn parse_theta(v: &str) -> Result<ThetaSpec> {
    if v == "widening" {
        return Ok(ThetaSpec::Widening);
    }
    if let Some(rest) = v.strip_prefix("const:") {
        return Ok(ThetaSpec::Const(parse_num("theta", rest)?));
    }
    if let Some(rest) = v.strip_prefix("quad:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(SimError::Config("theta quad wants base,coef,cap".into()));
        }
        return Ok(ThetaSpec::Quad {
            base: parse_num("theta", parts[0])?,
            coef: parse_num("theta", parts[1])?,
            cap: parse_num("theta", parts[2])?,
        });
    }
    Err(SimError::Config(format!("theta: unknown spec {:?}", v)))
}

fn parse_eta(v: &str) -> Result<EtaSpec> {
    if v == "half" {
        return Ok(EtaSpec::Half);
    }
    if let Some(rest) = v.strip_prefix("const:") {
        return Ok(EtaSpec::Const(parse_num("eta", rest)?));
    }
    Err(SimError::Config(format!("eta: unknown spec {:?}", v)))
}

/// Parses the key=value config format. Lines starting with `#` and blank
/// lines are skipped; inline `#` comments are stripped; keys may not repeat.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| SimError::Parse {
            line: ln + 1,
            msg: format!("expected key = value, got {:?}", line),
        })?;
        let k = k.trim().to_string();
        let v = v.trim().to_string();
        if kv.insert(k.clone(), v).is_some() {
            return Err(SimError::Parse { line: ln + 1, msg: format!("duplicate key {}", k) });
        }
    }
    build_config(kv)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn build_config(kv: BTreeMap<String, String>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let source_kind = kv.get("source").map(String::as_str).unwrap_or("synthetic");

    // synthetic defaults are the struct defaults; collect overrides first
    let mut n0 = 30usize;
    let mut me = 5usize;
    let mut nv = 200usize;
    let mut r_delta = 0.05f64;
    let mut snapshots = 10usize;
    let mut dataset: Option<PathBuf> = None;
    let mut format = EdgeListFormat::Konect;
    let mut cuts: Option<CutSpec> = None;
    let mut cut_start: Option<i64> = None;
    let mut cut_every: Option<i64> = None;
    let mut include_isolated = false;

    for (k, v) in &kv {
        match k.as_str() {
            "source" => {}
            "n0" => n0 = parse_num(k, v)?,
            "edges_per_vertex" => me = parse_num(k, v)?,
            "initial_vertices" => nv = parse_num(k, v)?,
            "growth_ratio" => r_delta = parse_num(k, v)?,
            "snapshots" => snapshots = parse_num(k, v)?,
            "dataset" => dataset = Some(PathBuf::from(v)),
            "format" => {
                format = match v.as_str() {
                    "plain" => EdgeListFormat::Plain,
                    "konect" => EdgeListFormat::Konect,
                    other => {
                        return Err(SimError::Config(format!("format: unknown {:?}", other)))
                    }
                }
            }
            "cuts" => {
                let ts: Result<Vec<i64>> =
                    v.split(',').map(|t| parse_num("cuts", t.trim())).collect();
                cuts = Some(CutSpec::Explicit(ts?));
            }
            "cut_start" => cut_start = Some(parse_num(k, v)?),
            "cut_every" => cut_every = Some(parse_num(k, v)?),
            "include_isolated" => include_isolated = parse_bool(k, v)?,
            "trials" => cfg.trials = parse_num(k, v)?,
            "seed" => cfg.master_seed = parse_num(k, v)?,
            "noise_ratio" => cfg.noise_ratio = parse_num(k, v)?,
            "theta" => cfg.theta = parse_theta(v)?,
            "eta" => cfg.eta = parse_eta(v)?,
            "temporal" => cfg.temporal = parse_bool(k, v)?,
            "victims_min" => cfg.victim_bounds.0 = parse_num(k, v)?,
            "victims_max" => cfg.victim_bounds.1 = parse_num(k, v)?,
            "first_attack" => cfg.first_attack = parse_num(k, v)?,
            "creation_end" => cfg.creation_end = parse_num(k, v)?,
            "refine_depth" => cfg.refine_depth = parse_num(k, v)?,
            "out" => cfg.out_dir = Some(PathBuf::from(v)),
            other => return Err(SimError::Config(format!("unknown key {:?}", other))),
        }
    }

    cfg.source = match source_kind {
        "synthetic" => SourceSpec::Synthetic { n0, me, nv, r_delta, snapshots },
        "edgelist" => {
            let dataset = dataset
                .ok_or_else(|| SimError::Config("edgelist source needs dataset".into()))?;
            let cuts = match (cuts, cut_every) {
                (Some(c), None) => c,
                (None, Some(step)) => CutSpec::Every { start: cut_start, step },
                (None, None) => {
                    return Err(SimError::Config(
                        "edgelist source needs cuts or cut_every".into(),
                    ))
                }
                (Some(_), Some(_)) => {
                    return Err(SimError::Config(
                        "cuts and cut_every are mutually exclusive".into(),
                    ))
                }
            };
            SourceSpec::EdgeList { dataset, format, cuts, include_isolated }
        }
        other => return Err(SimError::Config(format!("source: unknown {:?}", other))),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_the_echo() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let echoed = parse_config(&cfg.resolved_text()).unwrap();
        assert_eq!(cfg, echoed);
    }

    #[test]
    fn parses_a_full_synthetic_config() {
        let text = "\
source = synthetic
n0 = 30
edges_per_vertex = 10   # heavier growth
initial_vertices = 2000
growth_ratio = 0.05
snapshots = 10
trials = 20
seed = 7
noise_ratio = 0.01
theta = quad:4,8,600
eta = const:1
temporal = true
victims_min = 1
victims_max = 5
first_attack = 2
refine_depth = 2
";
        let cfg = parse_config(text).unwrap();
        match cfg.source {
            SourceSpec::Synthetic { me, nv, .. } => {
                assert_eq!(me, 10);
                assert_eq!(nv, 2000);
            }
            _ => panic!("wrong source"),
        }
        assert_eq!(cfg.theta, ThetaSpec::Quad { base: 4, coef: 8, cap: 600 });
        assert_eq!(cfg.eta, EtaSpec::Const(1));
        assert_eq!(cfg.refine_depth, 2);
    }

    #[test]
    fn parses_an_edgelist_config() {
        let text = "\
source = edgelist
dataset = data/pets.tsv
format = plain
cut_every = 15778800
include_isolated = true
trials = 1
";
        let cfg = parse_config(text).unwrap();
        match cfg.source {
            SourceSpec::EdgeList { cuts, include_isolated, .. } => {
                assert_eq!(cuts, CutSpec::Every { start: None, step: 15778800 });
                assert!(include_isolated);
            }
            _ => panic!("wrong source"),
        }
    }

    #[test]
    fn rejects_unknown_keys_and_duplicates() {
        assert!(parse_config("fnord = 1\n").is_err());
        assert!(parse_config("trials = 1\ntrials = 2\n").is_err());
        assert!(parse_config("trials\n").is_err());
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(parse_config("noise_ratio = 1.5\n").is_err());
        assert!(parse_config("victims_min = 0\n").is_err());
        assert!(parse_config("victims_min = 6\nvictims_max = 2\n").is_err());
        assert!(parse_config("eta = const:0\n").is_err());
        assert!(parse_config("theta = banana\n").is_err());
        assert!(parse_config("source = edgelist\n").is_err());
    }

    #[test]
    fn theta_schedules_evaluate() {
        assert_eq!(ThetaSpec::Widening.resolve(2), 16);
        assert_eq!(ThetaSpec::Widening.resolve(3), 266);
        assert_eq!(ThetaSpec::Widening.resolve(4), 1016);
        assert_eq!(ThetaSpec::Widening.resolve(5), 1500);
        assert_eq!(ThetaSpec::Const(9).resolve(10), 9);
        assert_eq!(ThetaSpec::Quad { base: 2, coef: 1, cap: 11 }.resolve(5), 11);
    }

    #[test]
    fn eta_specs_evaluate() {
        assert_eq!(EtaSpec::Half.resolve(7), 4);
        assert_eq!(EtaSpec::Half.resolve(8), 4);
        assert_eq!(EtaSpec::Half.resolve(0), 1);
        assert_eq!(EtaSpec::Const(2).resolve(9), 2);
    }
}
