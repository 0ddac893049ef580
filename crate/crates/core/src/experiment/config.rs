//! Flat `key = value` experiment configs.
//!
//! ```text
//! # comment
//! experiment = weyl-sweep
//! seed = 7
//! output = records.jsonl
//! h_list = 0.4, 0.2, 0.1
//! grid.n = 64
//! potential.family = smooth-bump
//! potential.depth = 10
//! ```
//!
//! Unknown keys, duplicates and bad values are reported with their line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::grid::{BoxGrid, ScalarField};
use crate::minimize::{EnergyConfig, FieldCoupling, MinimizeOptions};
use crate::potentials;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    TfConstant,
    WeylSweep,
    FieldMin,
    HydrogenCheck,
    BoundSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::TfConstant => "tf-constant",
            Self::WeylSweep => "weyl-sweep",
            Self::FieldMin => "field-min",
            Self::HydrogenCheck => "hydrogen-check",
            Self::BoundSweep => "bound-sweep",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "tf-constant" => Self::TfConstant,
            "weyl-sweep" => Self::WeylSweep,
            "field-min" => Self::FieldMin,
            "hydrogen-check" => Self::HydrogenCheck,
            "bound-sweep" => Self::BoundSweep,
            _ => {
                return Err(format!(
                    "unknown experiment '{s}' (expected tf-constant, weyl-sweep, field-min, hydrogen-check or bound-sweep)"
                ))
            }
        })
    }
}

/// Named potential family with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    SmoothBump { depth: f64, radius: f64 },
    TruncatedCoulomb { charge: f64, core: f64, cutoff: f64 },
    TfMeanField { core: f64 },
    ConstantWell { depth: f64 },
}

impl PotentialSpec {
    pub fn family(&self) -> &'static str {
        match self {
            Self::SmoothBump { .. } => "smooth-bump",
            Self::TruncatedCoulomb { .. } => "truncated-coulomb",
            Self::TfMeanField { .. } => "tf-mean-field",
            Self::ConstantWell { .. } => "constant-well",
        }
    }

    pub fn build(&self, grid: &Arc<BoxGrid>) -> Result<ScalarField> {
        match *self {
            Self::SmoothBump { depth, radius } => potentials::smooth_bump(grid, depth, radius),
            Self::TruncatedCoulomb { charge, core, cutoff } => potentials::truncated_coulomb(grid, charge, core, cutoff),
            Self::TfMeanField { core } => potentials::tf_mean_field_well(grid, core),
            Self::ConstantWell { depth } => potentials::constant_well(grid, depth),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_path: PathBuf,
    pub h_list: Vec<f64>,
    pub grid_n: usize,
    pub grid_side: f64,
    pub potential: PotentialSpec,
    pub energy: EnergyConfig,
    pub minimize: MinimizeOptions,
    pub start_band: usize,
    pub start_rms: f64,
    pub tf_tolerance: f64,
    pub hydrogen_c: Vec<f64>,
    pub hydrogen_samples: usize,
    pub hydrogen_rms: f64,
    pub hydrogen_band: usize,
    pub hydrogen_tol: f64,
    /// SHA-256 of the config file bytes, hex.
    pub hash: String,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Arc<BoxGrid>> {
        Ok(Arc::new(BoxGrid::cube(self.grid_n, self.grid_side)?))
    }
}

pub fn config_hash(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Table {
    entries: BTreeMap<String, Entry>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

impl Table {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(err(line, format!("expected key = value, got '{body}'")));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
                return Err(err(line, format!("bad key '{k}'")));
            }
            if let Some(prev) = entries.get(k).map(|e: &Entry| e.line) {
                return Err(err(line, format!("duplicate key '{k}' (first set on line {prev})")));
            }
            entries.insert(
                k.to_string(),
                Entry {
                    line,
                    value: v.to_string(),
                    used: false,
                },
            );
        }
        Ok(Self { entries })
    }

    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get_mut(key) {
            None => Ok(default),
            Some(e) => {
                e.used = true;
                e.value
                    .parse()
                    .map_err(|x| err(e.line, format!("{key}: cannot parse '{}': {x}", e.value)))
            }
        }
    }

    fn list(&mut self, key: &str, default: &[f64]) -> Result<(Vec<f64>, usize)> {
        match self.entries.get_mut(key) {
            None => Ok((default.to_vec(), 0)),
            Some(e) => {
                e.used = true;
                let body = e.value.trim_start_matches('[').trim_end_matches(']');
                let mut out = Vec::new();
                for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    out.push(
                        item.parse::<f64>()
                            .map_err(|_| err(e.line, format!("{key}: '{item}' is not a number")))?,
                    );
                }
                Ok((out, e.line))
            }
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().filter(|(_, e)| !e.used).min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(err(e.line, format!("unknown key '{k}'"))),
            None => Ok(()),
        }
    }
}

fn check(ok: bool, line: usize, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(err(line, msg.to_string()))
    }
}

/// Parses and validates a config. A relative `output` is resolved against
/// `base` (normally the directory of the config file).
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig> {
    let mut t = Table::parse(text)?;
    let experiment: ExperimentKind = match t.entries.get_mut("experiment") {
        None => return Err(err(0, "missing key 'experiment'")),
        Some(e) => {
            e.used = true;
            e.value.parse().map_err(|m: String| err(e.line, m))?
        }
    };
    let seed = t.get("seed", 1u64)?;
    let output: String = t.get("output", format!("{}.jsonl", experiment.name()))?;
    let output_path = base.join(output);

    let default_h: &[f64] = match experiment {
        ExperimentKind::WeylSweep => &[0.4, 0.3, 0.2, 0.15, 0.1],
        ExperimentKind::FieldMin | ExperimentKind::BoundSweep => &[0.4, 0.2, 0.1],
        _ => &[1.0],
    };
    let (h_list, h_line) = t.list("h_list", default_h)?;
    check(!h_list.is_empty(), h_line, "h_list is empty")?;
    for &h in &h_list {
        check(h > 0.0 && h.is_finite(), h_line, &format!("h_list entries must be strictly positive, got {h}"))?;
    }
    if matches!(experiment, ExperimentKind::BoundSweep) {
        check(h_list.windows(2).all(|w| w[1] < w[0]), h_line, "h_list must be strictly descending")?;
    }

    let (dn, dside) = match experiment {
        ExperimentKind::HydrogenCheck => (41, 20.0),
        _ => (32usize, 1.0f64),
    };
    let grid_n = t.get("grid.n", dn)?;
    check(grid_n >= 5, t.line_of("grid.n"), "grid.n must be at least 5")?;
    let grid_side = t.get("grid.side", dside)?;
    check(grid_side > 0.0 && grid_side.is_finite(), t.line_of("grid.side"), "grid.side must be positive")?;

    let fam_line = t.line_of("potential.family");
    let family: String = t.get("potential.family", "smooth-bump".to_string())?;
    let potential = match family.as_str() {
        "smooth-bump" => PotentialSpec::SmoothBump {
            depth: t.get("potential.depth", 10.0)?,
            radius: t.get("potential.radius", 0.45 * grid_side)?,
        },
        "truncated-coulomb" => PotentialSpec::TruncatedCoulomb {
            charge: t.get("potential.charge", 1.0)?,
            core: t.get("potential.core", 0.05 * grid_side)?,
            cutoff: t.get("potential.cutoff", 0.45 * grid_side)?,
        },
        "tf-mean-field" => PotentialSpec::TfMeanField {
            core: t.get("potential.core", 0.05 * grid_side)?,
        },
        "constant-well" => PotentialSpec::ConstantWell {
            depth: t.get("potential.depth", 30.0)?,
        },
        other => {
            return Err(err(
                fam_line,
                format!("unknown potential family '{other}' (expected smooth-bump, truncated-coulomb, tf-mean-field or constant-well)"),
            ))
        }
    };
    match potential {
        PotentialSpec::SmoothBump { depth, radius } => {
            check(depth.is_finite() && radius > 0.0, fam_line, "smooth-bump needs finite depth and positive radius")?
        }
        PotentialSpec::TruncatedCoulomb { charge, core, cutoff } => check(
            charge.is_finite() && core > 0.0 && cutoff > core,
            fam_line,
            "truncated-coulomb needs finite charge and 0 < core < cutoff",
        )?,
        PotentialSpec::TfMeanField { core } => check(core > 0.0, fam_line, "tf-mean-field needs core > 0")?,
        PotentialSpec::ConstantWell { depth } => check(depth.is_finite(), fam_line, "constant-well needs a finite depth")?,
    }

    let mut eigen = EigenOptions {
        seed,
        ..EigenOptions::default()
    };
    eigen.tol = t.get("eigen.tol", eigen.tol)?;
    eigen.max_iters = t.get("eigen.max_iters", eigen.max_iters)?;
    eigen.degree = t.get("eigen.degree", eigen.degree)?;
    eigen.dense_threshold = t.get("eigen.dense_threshold", eigen.dense_threshold)?;
    check(eigen.tol > 0.0 && eigen.tol < 1e-2, t.line_of("eigen.tol"), "eigen.tol must lie in (0, 1e-2)")?;
    check(eigen.degree >= 1, t.line_of("eigen.degree"), "eigen.degree must be at least 1")?;

    let pauli = t.get("energy.pauli", false)?;
    let mut energy = EnergyConfig::semiclassical(h_list[0], pauli);
    energy.eigen = eigen;
    energy.multiplicity = t.get("energy.multiplicity", energy.multiplicity)?;
    let lambda_line = t.line_of("energy.lambda");
    let alpha_line = t.line_of("energy.alpha");
    check(lambda_line == 0 || alpha_line == 0, alpha_line, "set either energy.lambda or energy.alpha, not both")?;
    if lambda_line > 0 {
        energy.coupling = FieldCoupling::Direct(t.get("energy.lambda", 1.0)?);
    }
    if alpha_line > 0 {
        energy.coupling = FieldCoupling::FineStructure {
            alpha: t.get("energy.alpha", 1.0)?,
        };
    }
    let z: f64 = t.get("energy.z", f64::NAN)?;
    energy.z = (!z.is_nan()).then_some(z);
    energy.kappa = t.get("energy.kappa", energy.kappa)?;
    energy.validate().map_err(|e| err(lambda_line.max(alpha_line), e.to_string()))?;

    let mut minimize = MinimizeOptions::default();
    minimize.max_iters = t.get("minimize.max_iters", minimize.max_iters)?;
    minimize.grad_tol = t.get("minimize.grad_tol", minimize.grad_tol)?;
    minimize.energy_rtol = t.get("minimize.energy_rtol", minimize.energy_rtol)?;
    let band: usize = t.get("minimize.band_limit", 0)?;
    minimize.band_limit = (band > 0).then_some(band);
    let start_band = t.get("minimize.start_band", 2usize)?;
    let start_rms = t.get("minimize.start_rms", 0.05f64)?;
    check(minimize.grad_tol > 0.0, t.line_of("minimize.grad_tol"), "minimize.grad_tol must be positive")?;
    check(minimize.energy_rtol >= 0.0, t.line_of("minimize.energy_rtol"), "minimize.energy_rtol must be non-negative")?;
    check(start_rms >= 0.0, t.line_of("minimize.start_rms"), "minimize.start_rms must be non-negative")?;
    if matches!(experiment, ExperimentKind::FieldMin | ExperimentKind::BoundSweep) {
        check(
            start_band >= 1 && 2 * start_band < grid_n - 1,
            t.line_of("minimize.start_band"),
            "minimize.start_band must satisfy 1 <= 2·band < grid.n - 1",
        )?;
    }

    let tf_tolerance = t.get("tf.tolerance", 1e-8f64)?;
    check(
        tf_tolerance > 0.0 && tf_tolerance <= 1e-2,
        t.line_of("tf.tolerance"),
        "tf.tolerance must lie in (0, 1e-2]",
    )?;

    let (hydrogen_c, c_line) = t.list("hydrogen.c", &[1.0, 2.0])?;
    for &c in &hydrogen_c {
        check(c > 0.0 && c.is_finite(), c_line, "hydrogen.c entries must be positive")?;
    }
    let hydrogen_samples = t.get("hydrogen.samples", 10usize)?;
    let hydrogen_rms = t.get("hydrogen.rms", 0.5f64)?;
    let hydrogen_band = t.get("hydrogen.band", 2usize)?;
    let hydrogen_tol = t.get("hydrogen.tol", 0.03f64)?;
    if experiment == ExperimentKind::HydrogenCheck {
        check(
            hydrogen_band >= 1 && 2 * hydrogen_band < grid_n - 1,
            t.line_of("hydrogen.band"),
            "hydrogen.band must satisfy 1 <= 2·band < grid.n - 1",
        )?;
    }

    t.finish()?;
    Ok(ExperimentConfig {
        experiment,
        seed,
        output_path,
        h_list,
        grid_n,
        grid_side,
        potential,
        energy,
        minimize,
        start_band,
        start_rms,
        tf_tolerance,
        hydrogen_c,
        hydrogen_samples,
        hydrogen_rms,
        hydrogen_band,
        hydrogen_tol,
        hash: config_hash(text.as_bytes()),
    })
}

/// Reads and parses a config file. Unreadable files map to line 0.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let bytes = std::fs::read(path).map_err(|e| err(0, format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| err(0, "config is not UTF-8"))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig> {
        parse_config(s, Path::new("/tmp"))
    }

    fn line(e: Error) -> usize {
        match e {
            Error::Config { line, .. } => line,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse("experiment = weyl-sweep\n").unwrap();
        assert_eq!(c.h_list, vec![0.4, 0.3, 0.2, 0.15, 0.1]);
        assert_eq!(c.output_path, Path::new("/tmp/weyl-sweep.jsonl"));
        assert_eq!(c.potential.family(), "smooth-bump");
        assert_eq!(c.seed, 1);
    }

    #[test]
    fn full_config_round_trip() {
        let text = "# sweep\nexperiment = bound-sweep\nseed = 9\nh_list = [0.4, 0.2]\ngrid.n = 17\n\
                    potential.family = truncated-coulomb\npotential.charge = 2\nenergy.lambda = 3.5\n";
        let c = parse(text).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.energy.eigen.seed, 9);
        assert_eq!(c.h_list, vec![0.4, 0.2]);
        assert_eq!(c.grid_n, 17);
        assert!(matches!(c.energy.coupling, FieldCoupling::Direct(l) if l == 3.5));
        assert!(matches!(c.potential, PotentialSpec::TruncatedCoulomb { charge, .. } if charge == 2.0));
        assert_eq!(c.hash, config_hash(text.as_bytes()));
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        assert_eq!(line(parse("experiment = weyl-sweep\n\nh_list = 0.4, -0.1\n").unwrap_err()), 3);
        assert_eq!(line(parse("experiment = nope\n").unwrap_err()), 1);
        assert_eq!(line(parse("experiment = weyl-sweep\ngrid.m = 3\n").unwrap_err()), 2);
        assert_eq!(line(parse("experiment = weyl-sweep\nseed = 1\nseed = 2\n").unwrap_err()), 3);
        assert_eq!(line(parse("experiment = weyl-sweep\ngrid.n = many\n").unwrap_err()), 2);
        assert_eq!(line(parse("experiment = weyl-sweep\njust words\n").unwrap_err()), 2);
        assert_eq!(line(parse("seed = 2\n").unwrap_err()), 0);
        assert_eq!(
            line(parse("experiment = field-min\npotential.family = gaussian\n").unwrap_err()),
            2
        );
        assert_eq!(line(parse("experiment = bound-sweep\nh_list = 0.1, 0.2\n").unwrap_err()), 2);
    }

    #[test]
    fn families_resolve() {
        for fam in ["smooth-bump", "truncated-coulomb", "tf-mean-field", "constant-well"] {
            let c = parse(&format!("experiment = weyl-sweep\ngrid.n = 9\npotential.family = {fam}\n")).unwrap();
            assert_eq!(c.potential.family(), fam);
            let v = c.potential.build(&c.grid().unwrap()).unwrap();
            assert!(v.sup_bound() > 0.0);
        }
    }
}
