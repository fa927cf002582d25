//! Plain-text `key = value` run configuration, validated before any work.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sglab::diophantine::{Alpha, ModelSequence, MAX_PUBLIC_DEPTH, MAX_SUBSEQUENCE_LENGTH, MIN_SCAN};
use sglab::evolution::{Strategy, TimeGrid, MAX_CERTIFICATE_ROWS};
use sglab::grid::{Grid, OperatorSpec, DEFAULT_HALF_WIDTH, DEFAULT_POINTS};

use crate::CliError;

/// Keys accepted in a configuration file.
const KEYS: &[&str] = &[
    "L", "N", "m", "mu", "T", "omega_re", "omega_im", "alpha", "sequence", "lambdas", "j_max", "epsilons",
    "gamma_list", "M_max", "M_cert", "j_lo", "j_hi", "weyl_mode", "weyl_exponent", "weyl_count", "vectors", "modes",
    "forcing", "strategy", "mode", "K", "L_max", "out_dir", "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaChoice {
    Rational(i64, i64),
    Golden,
    Liouville(u32),
}

impl AlphaChoice {
    pub fn build(&self) -> sglab::Result<Alpha> {
        match *self {
            AlphaChoice::Rational(p, q) => Alpha::rational(p, q),
            AlphaChoice::Golden => Ok(Alpha::Golden),
            AlphaChoice::Liouville(d) => Alpha::liouville(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceChoice {
    Model(ModelSequence),
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeylMode {
    Measured,
    Synthetic { exponent: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    Zero,
    /// `e^{−√λ_j}` times a seeded trigonometric polynomial.
    Synthetic,
    /// Seeded band-limited coefficients without decay in `j`.
    Random,
    /// `e^{−ik* t}` on every resonant mode: not admissible.
    Resonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleMode {
    Hypoellipticity,
    Solvability,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub half_width: f64,
    pub points: usize,
    pub spec: OperatorSpec,
    pub time: TimeGrid,
    pub omega: Complex64,
    pub alpha: AlphaChoice,
    pub sequence: SequenceChoice,
    pub lambdas: Option<Vec<f64>>,
    pub j_max: u64,
    pub epsilons: Vec<f64>,
    pub gamma_list: Vec<u32>,
    pub m_max: f64,
    pub m_cert: u32,
    pub j_lo: usize,
    pub j_hi: Option<usize>,
    pub weyl_mode: WeylMode,
    pub vectors: usize,
    pub modes: usize,
    pub forcing: Forcing,
    pub strategy: Strategy,
    pub counterexample: CounterexampleMode,
    pub k: u32,
    pub l_max: u32,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Resolved `key = value` pairs, recorded with every run.
    pub resolved: BTreeMap<String, String>,
}

fn bad(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {reason}"))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| bad(key, format!("cannot parse {value:?}: {e}")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// Maps a library precondition failure on a config value to a config error.
fn check<T>(key: &str, r: sglab::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| bad(key, e))
}

fn parse_alpha(value: &str) -> Result<AlphaChoice, CliError> {
    let words: Vec<&str> = value.split_whitespace().collect();
    let rational = |s: &str| -> Result<AlphaChoice, CliError> {
        let (p, q) = s.split_once('/').unwrap_or((s, "1"));
        Ok(AlphaChoice::Rational(parse("alpha", p)?, parse("alpha", q)?))
    };
    match words.as_slice() {
        ["golden"] => Ok(AlphaChoice::Golden),
        ["liouville"] => Ok(AlphaChoice::Liouville(MAX_PUBLIC_DEPTH - 1)),
        ["liouville", d] => Ok(AlphaChoice::Liouville(parse("alpha", d)?)),
        ["rational", r] => rational(r),
        [r] if r.contains('/') || r.parse::<i64>().is_ok() => rational(r),
        _ => Err(bad("alpha", format!("expected `golden`, `p/q` or `liouville [depth]`, got {value:?}"))),
    }
}

fn parse_sequence(value: &str) -> Result<SequenceChoice, CliError> {
    let words: Vec<&str> = value.split_whitespace().collect();
    match words.as_slice() {
        ["linear"] => Ok(SequenceChoice::Model(ModelSequence::Power { a: 1.0, rho: 1.0 })),
        ["measured"] => Ok(SequenceChoice::Measured),
        ["power", a, rho] => Ok(SequenceChoice::Model(ModelSequence::Power {
            a: parse("sequence", a)?,
            rho: parse("sequence", rho)?,
        })),
        ["logpower", a, rho] => Ok(SequenceChoice::Model(ModelSequence::LogPower {
            a: parse("sequence", a)?,
            rho: parse("sequence", rho)?,
        })),
        _ => Err(bad(
            "sequence",
            format!("expected `linear`, `measured`, `power <a> <rho>` or `logpower <a> <rho>`, got {value:?}"),
        )),
    }
}

impl RunConfig {
    pub fn defaults() -> Self {
        Self::from_pairs(BTreeMap::new()).expect("defaults are valid")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!("line {}: unknown key `{key}`", n + 1)));
            }
            if pairs.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Self::from_pairs(pairs)
    }

    fn from_pairs(mut pairs: BTreeMap<String, String>) -> Result<Self, CliError> {
        let defaults = [
            ("L", DEFAULT_HALF_WIDTH.to_string()),
            ("N", DEFAULT_POINTS.to_string()),
            ("m", "2".into()),
            ("mu", "2".into()),
            ("T", "64".into()),
            ("omega_re", "0".into()),
            ("omega_im", "-1".into()),
            ("alpha", "golden".into()),
            ("sequence", "linear".into()),
            ("j_max", "100000".into()),
            ("epsilons", "1".into()),
            ("gamma_list", "0,1,2".into()),
            ("M_max", "3".into()),
            ("M_cert", "5".into()),
            ("j_lo", "20".into()),
            ("weyl_mode", "measured".into()),
            ("weyl_exponent", "2".into()),
            ("weyl_count", "500".into()),
            ("vectors", "50".into()),
            ("modes", "50".into()),
            ("forcing", "synthetic".into()),
            ("strategy", "fourier".into()),
            ("mode", "hypoellipticity".into()),
            ("K", "4".into()),
            ("L_max", "14".into()),
            ("out_dir", "out".into()),
            ("seed", "0".into()),
        ];
        for (k, v) in defaults {
            pairs.entry(k.to_string()).or_insert(v);
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let req = |k: &str| get(k).expect("defaulted");

        let half_width: f64 = parse("L", req("L"))?;
        let points: usize = parse("N", req("N"))?;
        check("L/N", Grid::new(half_width, points))?;
        let m = parse("m", req("m"))?;
        let mu = parse("mu", req("mu"))?;
        let spec = check("m/mu", OperatorSpec::new(m, mu))?;
        let time = check("T", TimeGrid::new(parse("T", req("T"))?))?;
        let omega = Complex64::new(parse("omega_re", req("omega_re"))?, parse("omega_im", req("omega_im"))?);
        if !(omega.re.is_finite() && omega.im.is_finite()) {
            return Err(bad("omega", "must be finite"));
        }
        let alpha = parse_alpha(req("alpha"))?;
        check("alpha", alpha.build())?;
        let sequence = parse_sequence(req("sequence"))?;
        let lambdas = get("lambdas").map(|v| list::<f64>("lambdas", v)).transpose()?;
        if let Some(ls) = &lambdas {
            if ls.is_empty() || ls.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(bad("lambdas", "must be a nonempty list of positive numbers"));
            }
        }
        let j_max: u64 = parse("j_max", req("j_max"))?;
        if j_max < MIN_SCAN {
            return Err(bad("j_max", format!("must be at least {MIN_SCAN}")));
        }
        let epsilons = list::<f64>("epsilons", req("epsilons"))?;
        if epsilons.is_empty() || epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(bad("epsilons", "must be a nonempty list of nonnegative numbers"));
        }
        let gamma_list = list::<u32>("gamma_list", req("gamma_list"))?;
        if gamma_list.is_empty() || gamma_list.iter().any(|&g| g > 40) {
            return Err(bad("gamma_list", "must be a nonempty list of orders <= 40"));
        }
        let m_max: f64 = parse("M_max", req("M_max"))?;
        if !(m_max.is_finite() && m_max > 0.0) {
            return Err(bad("M_max", "must be positive"));
        }
        let m_cert: u32 = parse("M_cert", req("M_cert"))?;
        let j_lo: usize = parse("j_lo", req("j_lo"))?;
        let j_hi = get("j_hi").map(|v| parse::<usize>("j_hi", v)).transpose()?;
        if j_hi.is_some_and(|h| h < j_lo) {
            return Err(bad("j_hi", "must not be below j_lo"));
        }
        let weyl_mode = match req("weyl_mode") {
            "measured" => WeylMode::Measured,
            "synthetic" => {
                let exponent: f64 = parse("weyl_exponent", req("weyl_exponent"))?;
                let count: usize = parse("weyl_count", req("weyl_count"))?;
                if !(exponent.is_finite() && exponent > 0.0) {
                    return Err(bad("weyl_exponent", "must be positive"));
                }
                if count < j_hi.unwrap_or(j_lo) {
                    return Err(bad("weyl_count", "must cover the fit range"));
                }
                WeylMode::Synthetic { exponent, count }
            }
            other => return Err(bad("weyl_mode", format!("expected `measured` or `synthetic`, got {other:?}"))),
        };
        let vectors: usize = parse("vectors", req("vectors"))?;
        let modes: usize = parse("modes", req("modes"))?;
        if modes == 0 {
            return Err(bad("modes", "must be positive"));
        }
        let forcing = match req("forcing") {
            "zero" => Forcing::Zero,
            "synthetic" => Forcing::Synthetic,
            "random" => Forcing::Random,
            "resonant" => Forcing::Resonant,
            other => {
                return Err(bad(
                    "forcing",
                    format!("expected `zero`, `synthetic`, `random` or `resonant`, got {other:?}"),
                ))
            }
        };
        let strategy = match req("strategy") {
            "fourier" => Strategy::FourierDivision,
            "quadrature" => Strategy::Quadrature,
            other => return Err(bad("strategy", format!("expected `fourier` or `quadrature`, got {other:?}"))),
        };
        let counterexample = match req("mode") {
            "hypoellipticity" => CounterexampleMode::Hypoellipticity,
            "solvability" => CounterexampleMode::Solvability,
            other => {
                return Err(bad(
                    "mode",
                    format!("expected `hypoellipticity` or `solvability`, got {other:?}"),
                ))
            }
        };
        let k: u32 = parse("K", req("K"))?;
        if !(1..=MAX_SUBSEQUENCE_LENGTH).contains(&k) {
            return Err(bad("K", format!("must lie in 1..={MAX_SUBSEQUENCE_LENGTH}")));
        }
        let l_max: u32 = parse("L_max", req("L_max"))?;
        if l_max < k || l_max > MAX_CERTIFICATE_ROWS {
            return Err(bad("L_max", format!("must lie in K..={MAX_CERTIFICATE_ROWS}")));
        }
        let out_dir = PathBuf::from(req("out_dir"));
        let seed: u64 = parse("seed", req("seed"))?;
        Ok(Self {
            half_width,
            points,
            spec,
            time,
            omega,
            alpha,
            sequence,
            lambdas,
            j_max,
            epsilons,
            gamma_list,
            m_max,
            m_cert,
            j_lo,
            j_hi,
            weyl_mode,
            vectors,
            modes,
            forcing,
            strategy,
            counterexample,
            k,
            l_max,
            out_dir,
            seed,
            resolved: pairs,
        })
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.half_width, self.points).expect("validated")
    }

    pub fn set_out_dir(&mut self, dir: PathBuf) {
        self.resolved.insert("out_dir".into(), dir.display().to_string());
        self.out_dir = dir;
    }
}
