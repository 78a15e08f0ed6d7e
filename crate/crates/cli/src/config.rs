//! Run configuration: defaults, then the key=value file, then command-line flags.
//!
//! The file format is UTF-8 text with one `key = value` pair per line. Blank
//! lines and lines starting with `#` are ignored. Keys may use `-` or `_`.
//! Every problem found in the file or the flags is collected and reported
//! together before anything runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use kappa_core::clusters::ExponentConvention;
use kappa_core::flip::FlipTable;
use kappa_core::starprod::MassTerm;
use kappa_core::{Kind, Vec3};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Dispersion,
    Compose,
    Circ,
    Flip,
    SolveShells,
    Cluster,
    Star,
    Verify,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Dispersion => "dispersion",
            Scenario::Compose => "compose",
            Scenario::Circ => "circ",
            Scenario::Flip => "flip",
            Scenario::SolveShells => "solve-shells",
            Scenario::Cluster => "cluster",
            Scenario::Star => "star",
            Scenario::Verify => "verify",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Scenario::Dispersion | Scenario::Cluster => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `points` samples spanning `[0, kmax]` for tables, or the cluster grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub kmax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub kappa: f64,
    pub m0: f64,
    pub seed: u64,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub exponent_convention: ExponentConvention,
    pub massterm: MassTerm,
    /// Deformation scales swept by `cluster`.
    pub kappas: Vec<f64>,
    pub p: Vec3,
    pub q: Vec3,
    pub kinds: (Kind, Kind),
    /// Width of the Gaussian packets in `cluster`.
    pub sigma: f64,
    /// Row-major noncommutativity matrix for the Moyal contrast.
    pub theta: [f64; 16],
    /// Fault-injection hook for `verify`.
    pub flip_table: FlipTable,
}

impl RunConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        RunConfig {
            scenario,
            kappa: 1.0,
            m0: 0.25,
            seed: 1,
            grid: GridSpec {
                points: 8,
                kmax: 2.88,
            },
            out: None,
            format: scenario.default_format(),
            exponent_convention: ExponentConvention::Full,
            massterm: MassTerm::On,
            kappas: vec![1.0, 4.0, 16.0],
            p: Vec3::new(0.3, 0.1, 0.0),
            q: Vec3::new(-0.2, 0.4, 0.1),
            kinds: (Kind::Annihilation, Kind::Annihilation),
            sigma: 0.5,
            theta: [0.0; 16],
            flip_table: FlipTable::STANDARD,
        }
    }

    /// Applies file pairs, then flag pairs, validating everything in one pass.
    pub fn resolve(
        scenario: Scenario,
        file: Option<&str>,
        flags: &[(&str, String)],
    ) -> Result<Self, CliError> {
        let mut problems = Vec::new();
        let mut settings: BTreeMap<String, (String, String)> = BTreeMap::new();
        if let Some(text) = file {
            for (key, value, origin) in parse_pairs(text, &mut problems) {
                if let Some((_, first)) = settings.get(&key) {
                    problems.push(format!(
                        "{origin}: duplicate key `{key}` (first set at {first})"
                    ));
                } else {
                    settings.insert(key, (value, origin));
                }
            }
        }
        for (key, value) in flags {
            settings.insert(
                normalize(key),
                (value.clone(), format!("--{}", key.replace('_', "-"))),
            );
        }

        let mut cfg = RunConfig::defaults(scenario);
        for (key, (value, origin)) in &settings {
            if let Err(msg) = cfg.apply(key, value) {
                problems.push(format!("{origin}: {msg}"));
            }
        }
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Config(problems))
        }
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "kappa" => self.kappa = positive(v, "kappa")?,
            "m0" => self.m0 = nonnegative(v, "m0")?,
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| format!("seed must be an unsigned 64-bit integer (got `{v}`)"))?
            }
            "grid" => self.grid = grid(v)?,
            "out" => {
                if v.is_empty() {
                    return Err("out must be a path".into());
                }
                self.out = Some(PathBuf::from(v))
            }
            "format" => {
                self.format = match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(format!("format must be csv or json (got `{v}`)")),
                }
            }
            "exponent_convention" => {
                self.exponent_convention = match v {
                    "half" => ExponentConvention::Half,
                    "full" => ExponentConvention::Full,
                    _ => {
                        return Err(format!(
                            "exponent-convention must be half or full (got `{v}`)"
                        ))
                    }
                }
            }
            "massterm" => {
                self.massterm = match v {
                    "on" => MassTerm::On,
                    "off" => MassTerm::Off,
                    _ => return Err(format!("massterm must be on or off (got `{v}`)")),
                }
            }
            "kappas" => {
                let list = reals(v, "kappas")?;
                if list.iter().any(|k| *k <= 0.0) {
                    return Err("kappas must all be positive".into());
                }
                self.kappas = list;
            }
            "p" => self.p = vector(v, "p")?,
            "q" => self.q = vector(v, "q")?,
            "kinds" => self.kinds = kinds(v)?,
            "sigma" => self.sigma = positive(v, "sigma")?,
            "theta" => {
                let t = reals(v, "theta")?;
                self.theta = t
                    .try_into()
                    .map_err(|t: Vec<f64>| format!("theta needs 16 entries (got {})", t.len()))?;
            }
            "flip_table" => {
                self.flip_table = match v {
                    "standard" => FlipTable::STANDARD,
                    "corrupted" => FlipTable::CORRUPTED,
                    _ => {
                        return Err(format!(
                            "flip-table must be standard or corrupted (got `{v}`)"
                        ))
                    }
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// `(key, value, origin)` triples; malformed lines are reported.
fn parse_pairs(text: &str, problems: &mut Vec<String>) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let origin = format!("line {}", n + 1);
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                out.push((normalize(k), v.trim().to_string(), origin))
            }
            _ => problems.push(format!("{origin}: expected `key = value`, found `{line}`")),
        }
    }
    out
}

fn real(v: &str, what: &str) -> Result<f64, String> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("{what} must be a finite number (got `{v}`)")),
    }
}

fn positive(v: &str, what: &str) -> Result<f64, String> {
    let x = real(v, what)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{what} must be positive (got {x})"))
    }
}

fn nonnegative(v: &str, what: &str) -> Result<f64, String> {
    let x = real(v, what)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("{what} must be nonnegative (got {x})"))
    }
}

fn reals(v: &str, what: &str) -> Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| real(s, what)).collect()
}

fn vector(v: &str, what: &str) -> Result<Vec3, String> {
    match reals(v, what)?.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        other => Err(format!(
            "{what} needs 3 comma-separated components (got {})",
            other.len()
        )),
    }
}

fn grid(v: &str) -> Result<GridSpec, String> {
    let (n, k) = v
        .split_once(':')
        .ok_or_else(|| format!("grid must be POINTS:KMAX (got `{v}`)"))?;
    let points: usize = n
        .trim()
        .parse()
        .map_err(|_| format!("grid points must be an integer (got `{n}`)"))?;
    if points < 2 {
        return Err(format!("grid needs at least 2 points (got {points})"));
    }
    Ok(GridSpec {
        points,
        kmax: positive(k, "grid kmax")?,
    })
}

fn kind(s: &str) -> Result<Kind, String> {
    match s.trim() {
        "a" => Ok(Kind::Annihilation),
        "a+" => Ok(Kind::Creation),
        other => Err(format!("kind must be `a` or `a+` (got `{other}`)")),
    }
}

fn kinds(v: &str) -> Result<(Kind, Kind), String> {
    let (l, r) = v.split_once(',').ok_or_else(|| {
        format!("kinds must be two comma-separated kinds such as `a+,a` (got `{v}`)")
    })?;
    Ok((kind(l)?, kind(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problems(r: Result<RunConfig, CliError>) -> Vec<String> {
        match r {
            Err(CliError::Config(p)) => p,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn file_then_flags() {
        let text = "# scenario\nkappa = 2\nm0=0.5\n\nkinds = a+,a\ngrid = 16:3\n";
        let cfg = RunConfig::resolve(Scenario::Flip, Some(text), &[("kappa", "4".into())]).unwrap();
        assert_eq!(cfg.kappa, 4.0);
        assert_eq!(cfg.m0, 0.5);
        assert_eq!(cfg.kinds, (Kind::Creation, Kind::Annihilation));
        assert_eq!(
            cfg.grid,
            GridSpec {
                points: 16,
                kmax: 3.0
            }
        );
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn all_problems_reported_together() {
        let text = "kappa = -1\nbogus = 3\nnot a pair\nm0 = 1\nm0 = 2\n";
        let p = problems(RunConfig::resolve(
            Scenario::Verify,
            Some(text),
            &[("format", "xml".into()), ("grid", "1:2".into())],
        ));
        assert_eq!(p.len(), 6, "{p:?}");
        assert!(p[0].starts_with("line 3"));
        assert!(p.iter().any(|s| s.contains("duplicate key `m0`")));
        assert!(p.iter().any(|s| s.contains("--format")));
    }

    #[test]
    fn lists_and_vectors() {
        let cfg = RunConfig::resolve(
            Scenario::Cluster,
            Some("kappas = 1, 2.5,10\np = 1,0,0\ntheta = 0,1,0,0,-1,0,0,0,0,0,0,0,0,0,0,0"),
            &[],
        )
        .unwrap();
        assert_eq!(cfg.kappas, vec![1.0, 2.5, 10.0]);
        assert_eq!(cfg.p, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(cfg.theta[1], 1.0);
        assert_eq!(cfg.format, Format::Csv);
        let cfg = RunConfig::resolve(Scenario::Cluster, Some("kappas ="), &[]).unwrap();
        assert!(cfg.kappas.is_empty());
        assert_eq!(
            problems(RunConfig::resolve(Scenario::Star, Some("theta = 1,2"), &[])).len(),
            1
        );
    }
}
