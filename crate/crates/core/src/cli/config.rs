//! `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Every key is checked against a fixed list so that typos fail loudly, and
//! every diagnostic names the offending key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::apps::{MediumField, PreconditionerVariant, Profile, SsrConfig};
use crate::calculus::{IterOptions, MoyalDirection};
use crate::error::{DscError, Result};
use crate::grid::{ChebParams, GridParams, HierParams};
use crate::oracle::DenseKind;
use crate::symbol::GridFunction;

/// Keys accepted in a config file or through `--set`.
pub const KNOWN_KEYS: &[&str] = &[
    "dim",
    "representation",
    "B_x",
    "B_xi",
    "L",
    "K",
    "N_theta",
    "N_r",
    "L_map",
    "tol",
    "max_iter",
    "n",
    "noise_band",
    "seed",
    "medium",
    "medium_mean",
    "medium_amplitude",
    "medium_band",
    "medium_seed",
    "medium_dip",
    "medium_width",
    "medium_file",
    "depth_gradient",
    "frequency",
    "mass",
    "input",
    "input_b",
    "field",
    "t",
    "k_min",
    "direction",
    "op",
    "variants",
    "rtol",
    "solver_max_iter",
    "compress_tol",
    "source",
    "wave_k",
    "eps",
    "cap_fraction",
    "blend_start",
    "blend_end",
    "p_keep",
    "p_kill",
    "dz",
    "quad_nodes",
    "z_max",
    "initial",
    "packet_angle",
    "packet_width",
];

/// Grid representation selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    HierSpline,
    RationalChebyshev,
}

/// Operation checked by `oracle-check`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleOp {
    Compose,
    Inverse,
    Sqrt,
    InvSqrt,
    Exp,
}

impl OracleOp {
    pub fn name(self) -> &'static str {
        match self {
            Self::Compose => "compose",
            Self::Inverse => "inverse",
            Self::Sqrt => "sqrt",
            Self::InvSqrt => "inv-sqrt",
            Self::Exp => "exp",
        }
    }

    pub fn dense_kind(self, t: f64) -> DenseKind {
        match self {
            Self::Compose => DenseKind::Compose,
            Self::Inverse => DenseKind::Inverse,
            Self::Sqrt => DenseKind::Sqrt,
            Self::InvSqrt => DenseKind::InvSqrt,
            Self::Exp => DenseKind::Exp(t),
        }
    }
}

/// Right-hand side of the Helmholtz run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Gaussian,
    Noise,
}

/// Initial field of a migration run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Initial {
    Constant,
    Packet,
    Noise,
}

/// Named medium, resolved against the grid dimension at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum MediumSpec {
    Constant { value: f64 },
    Sinusoid { mean: f64, amplitude: f64 },
    RandomBandlimited { seed: u64, band: usize, mean: f64, amplitude: f64 },
    GaussianWaveguide { background: f64, dip: f64, width: f64 },
    File { path: PathBuf },
}

/// Fully validated run configuration with defaults filled in.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dim: usize,
    pub representation: Representation,
    pub grid: GridParams,
    /// `B_x`.
    pub band: usize,
    pub iter: IterOptions,
    /// Side of the spatial grid used for application and checks.
    pub n: usize,
    /// Random test functions keep Fourier modes `|k|∞ < noise_band`.
    pub noise_band: usize,
    pub seed: u64,
    pub medium: Option<MediumSpec>,
    pub depth_gradient: f64,
    /// `ω / 2π`.
    pub frequency: f64,
    /// Zero-order coefficient `m` of `m I − div(α∇)`, in units of `4π²`.
    pub mass: f64,
    pub input: Option<PathBuf>,
    pub input_b: Option<PathBuf>,
    pub field: Option<PathBuf>,
    pub t: Option<f64>,
    pub k_min: usize,
    pub direction: Option<MoyalDirection>,
    pub op: Option<OracleOp>,
    pub variants: Vec<Option<PreconditionerVariant>>,
    pub rtol: f64,
    pub solver_max_iter: usize,
    pub compress_tol: f64,
    pub source: Source,
    pub wave_k: [i64; 2],
    pub eps: f64,
    pub ssr: SsrConfig<f64>,
    pub z_max: f64,
    pub initial: Initial,
    pub packet_angle: f64,
    pub packet_width: f64,
}

struct Table {
    entries: BTreeMap<String, String>,
}

impl Table {
    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn get<V: FromStr>(&self, key: &str, what: &str) -> Result<Option<V>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(key, format!("cannot parse `{v}` as {what}"))),
        }
    }

    fn or<V: FromStr>(&self, key: &str, what: &str, default: V) -> Result<V> {
        Ok(self.get(key, what)?.unwrap_or(default))
    }

    fn choice<V: Copy>(&self, key: &str, options: &[(&str, V)]) -> Result<Option<V>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        options.iter().find(|(name, _)| *name == v).map(|(_, x)| Some(*x)).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            config_err(key, format!("`{v}` is not one of {}", names.join(", ")))
        })
    }
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> DscError {
    DscError::Config(format!("key `{key}`: {msg}"))
}

/// Splits a document into `key → value`, rejecting unknown and repeated keys.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            DscError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        check_key(key)?;
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(config_err(key, format!("assigned twice (line {})", lineno + 1)));
        }
    }
    Ok(out)
}

fn check_key(key: &str) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(config_err(key, "unknown key"))
    }
}

/// Parses a config document, then applies `overrides` (`key=value` strings
/// from the command line). Relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, overrides: &[String], base_dir: &Path) -> Result<RunConfig> {
    let mut entries = parse_entries(text)?;
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| DscError::Config(format!("override `{o}` is not of the form key=value")))?;
        check_key(k.trim())?;
        entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    build(&Table { entries }, base_dir)
}

fn build(t: &Table, base: &Path) -> Result<RunConfig> {
    let dim: usize = t.or("dim", "an integer", 2)?;
    if dim != 1 && dim != 2 {
        return Err(config_err("dim", format!("must be 1 or 2, got {dim}")));
    }
    let representation = t
        .choice(
            "representation",
            &[
                ("hier-spline", Representation::HierSpline),
                ("rational-chebyshev", Representation::RationalChebyshev),
            ],
        )?
        .unwrap_or(Representation::HierSpline);
    let grid = match representation {
        Representation::HierSpline => GridParams::Hier(HierParams {
            dim,
            coarse_band: t.or("B_xi", "an integer", 6)?,
            levels: t.or("L", "an integer", 4)?,
            nodes: t.or("K", "an integer", 5)?,
        }),
        Representation::RationalChebyshev => GridParams::Cheb(ChebParams {
            dim,
            n_theta: t.or("N_theta", "an integer", 16)?,
            n_r: t.or("N_r", "an integer", 32)?,
            map_scale: t.or("L_map", "a number", 8.0)?,
        }),
    };
    let band: usize = t.or("B_x", "an integer", 6)?;
    if band == 0 {
        return Err(config_err("B_x", "must be at least 1"));
    }
    let iter = IterOptions {
        tol: positive(t, "tol", 1e-10)?,
        max_iter: t.or("max_iter", "an integer", 200)?,
    };
    let n: usize = t.or("n", "an integer", 128)?;
    if n < 2 {
        return Err(config_err("n", "must be at least 2"));
    }
    let noise_band: usize = t.or("noise_band", "an integer", (n / 4).max(1))?;
    if noise_band == 0 || 2 * noise_band > n {
        return Err(config_err("noise_band", format!("must lie in 1..={}", n / 2)));
    }
    let path = |key: &str| -> Result<Option<PathBuf>> {
        Ok(t.raw(key).map(|p| base.join(p)))
    };
    let medium = match t.raw("medium") {
        None => None,
        Some(name) => Some(match name {
            "constant" => MediumSpec::Constant {
                value: t.or("medium_mean", "a number", 1.0)?,
            },
            "sinusoid" => MediumSpec::Sinusoid {
                mean: t.or("medium_mean", "a number", 1.0)?,
                amplitude: t.or("medium_amplitude", "a number", 0.5)?,
            },
            "random-bandlimited" => MediumSpec::RandomBandlimited {
                seed: t.or("medium_seed", "an integer", 1)?,
                band: t.or("medium_band", "an integer", 4)?,
                mean: t.or("medium_mean", "a number", 1.0)?,
                amplitude: t.or("medium_amplitude", "a number", 0.3)?,
            },
            "gaussian-waveguide" => MediumSpec::GaussianWaveguide {
                background: t.or("medium_mean", "a number", 1.0)?,
                dip: t.or("medium_dip", "a number", 0.3)?,
                width: t.or("medium_width", "a number", 0.15)?,
            },
            "file" => MediumSpec::File {
                path: path("medium_file")?.ok_or_else(|| config_err("medium_file", "required when medium = file"))?,
            },
            other => {
                return Err(config_err(
                    "medium",
                    format!("`{other}` is not one of constant, sinusoid, random-bandlimited, gaussian-waveguide, file"),
                ))
            }
        }),
    };
    let variants = match t.raw("variants") {
        None => vec![None, Some(PreconditionerVariant::M1), Some(PreconditionerVariant::M2)],
        Some(list) => list
            .split(',')
            .map(|v| match v.trim() {
                "none" => Ok(None),
                "m1" | "M1" => Ok(Some(PreconditionerVariant::M1)),
                "m2" | "M2" => Ok(Some(PreconditionerVariant::M2)),
                other => Err(config_err("variants", format!("`{other}` is not one of none, m1, m2"))),
            })
            .collect::<Result<_>>()?,
    };
    let wave_k = match t.raw("wave_k") {
        None => [5, 3],
        Some(v) => {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            let parse = |s: &str| {
                s.parse::<i64>()
                    .map_err(|_| config_err("wave_k", format!("cannot parse `{v}` as a wave vector `k1, k2`")))
            };
            match parts.as_slice() {
                [a] => [parse(a)?, 0],
                [a, b] => [parse(a)?, parse(b)?],
                _ => return Err(config_err("wave_k", format!("cannot parse `{v}` as a wave vector `k1, k2`"))),
            }
        }
    };
    let frequency = positive(t, "frequency", 4.0)?;
    let defaults = SsrConfig::<f64>::default();
    let ssr = SsrConfig {
        cap_fraction: t.or("cap_fraction", "a number", defaults.cap_fraction)?,
        blend_start: t.or("blend_start", "a number", defaults.blend_start)?,
        blend_end: t.or("blend_end", "a number", defaults.blend_end)?,
        p_keep: t.or("p_keep", "a number", defaults.p_keep)?,
        p_kill: t.or("p_kill", "a number", defaults.p_kill)?,
        dz: t.or("dz", "a number", 1.0 / frequency)?,
        quad_nodes: t.or("quad_nodes", "an integer", defaults.quad_nodes)?,
    };
    ssr.validate().map_err(|e| DscError::Config(format!("SSR keys: {e}")))?;

    Ok(RunConfig {
        dim,
        representation,
        grid,
        band,
        iter,
        n,
        noise_band,
        seed: t.or("seed", "an integer", 0)?,
        medium,
        depth_gradient: t.or("depth_gradient", "a number", 0.0)?,
        frequency,
        mass: t.or("mass", "a number", 1.0)?,
        input: path("input")?,
        input_b: path("input_b")?,
        field: path("field")?,
        t: t.get("t", "a number")?,
        k_min: t.or("k_min", "an integer", 0)?,
        direction: t.choice(
            "direction",
            &[("to-weyl", MoyalDirection::ToWeyl), ("from-weyl", MoyalDirection::FromWeyl)],
        )?,
        op: t.choice(
            "op",
            &[
                ("compose", OracleOp::Compose),
                ("inverse", OracleOp::Inverse),
                ("sqrt", OracleOp::Sqrt),
                ("inv-sqrt", OracleOp::InvSqrt),
                ("exp", OracleOp::Exp),
            ],
        )?,
        variants,
        rtol: positive(t, "rtol", 1e-3)?,
        solver_max_iter: t.or("solver_max_iter", "an integer", 20_000)?,
        compress_tol: t.or("compress_tol", "a number", 1e-2)?,
        source: t
            .choice("source", &[("gaussian", Source::Gaussian), ("noise", Source::Noise)])?
            .unwrap_or(Source::Gaussian),
        wave_k,
        eps: positive(t, "eps", 1e-4)?,
        ssr,
        z_max: t.or("z_max", "a number", 10.0 * ssr.dz)?,
        initial: t
            .choice(
                "initial",
                &[("constant", Initial::Constant), ("packet", Initial::Packet), ("noise", Initial::Noise)],
            )?
            .unwrap_or(Initial::Packet),
        packet_angle: t.or("packet_angle", "a number", 30.0)?,
        packet_width: positive(t, "packet_width", 0.05)?,
    })
}

fn positive(t: &Table, key: &str, default: f64) -> Result<f64> {
    let v: f64 = t.or(key, "a number", default)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(key, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Materializes the configured medium, or names the missing key.
    pub fn medium_field(&self) -> Result<MediumField<f64>> {
        let spec = self.medium.as_ref().ok_or_else(|| config_err("medium", "required for this command"))?;
        let mut m = match spec {
            MediumSpec::Constant { value } => MediumField::homogeneous(self.dim, *value, self.frequency),
            MediumSpec::Sinusoid { mean, amplitude } => MediumField::new(
                self.dim,
                Profile::Sinusoid {
                    mean: *mean,
                    amplitude: *amplitude,
                },
                self.frequency,
            ),
            MediumSpec::RandomBandlimited {
                seed,
                band,
                mean,
                amplitude,
            } => MediumField::random_bandlimited(self.dim, *seed, *band, *mean, *amplitude, self.frequency)?,
            MediumSpec::GaussianWaveguide { background, dip, width } => MediumField::new(
                self.dim,
                Profile::GaussianWaveguide {
                    background: *background,
                    dip: *dip,
                    width: *width,
                },
                self.frequency,
            ),
            MediumSpec::File { path } => {
                let f = std::fs::File::open(path)?;
                let g = GridFunction::read_from(std::io::BufReader::new(f))?;
                if g.dim() != self.dim {
                    return Err(config_err("medium_file", format!("holds a {}D field, dim = {}", g.dim(), self.dim)));
                }
                MediumField::from_samples(&g, self.frequency)?
            }
        };
        m.depth_gradient = self.depth_gradient;
        Ok(m)
    }
}
