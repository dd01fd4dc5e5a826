//! Execution of one `dsc` command against a [`RunConfig`].
//!
//! Every command writes its artifacts plus a flat `summary.txt` into the
//! output directory. The summary holds only quantities that are a function of
//! the config and the seed, so repeated runs produce byte-identical files.
//! Wall-clock timings are returned separately for the caller to print.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::apply::{apply, apply_compressed};
use crate::apps::{
    bicgstab, build_preconditioner, elliptic_symbol, helmholtz_apply, migrate, polarize, MediumField,
    SymbolSetup,
};
use crate::calculus::{compose, exponential, inverse, moyal, sqrt_invsqrt, IterationReport, MoyalDirection};
use crate::error::{DscError, Result};
use crate::oracle::{central_band_error, dense_reference, densify, full_error};
use crate::symbol::{read_symbol, relative_table_change, write_symbol, GridFunction, Symbol};
use crate::Complex64;

use super::config::{Initial, RunConfig, Source};

/// The `dsc` subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    BuildSymbol,
    Compose,
    Invert,
    Sqrt,
    Exp,
    Moyal,
    Apply,
    OracleCheck,
    Helmholtz,
    Polarize,
    Migrate,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Self::BuildSymbol,
        Self::Compose,
        Self::Invert,
        Self::Sqrt,
        Self::Exp,
        Self::Moyal,
        Self::Apply,
        Self::OracleCheck,
        Self::Helmholtz,
        Self::Polarize,
        Self::Migrate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BuildSymbol => "build-symbol",
            Self::Compose => "compose",
            Self::Invert => "invert",
            Self::Sqrt => "sqrt",
            Self::Exp => "exp",
            Self::Moyal => "moyal",
            Self::Apply => "apply",
            Self::OracleCheck => "oracle-check",
            Self::Helmholtz => "helmholtz",
            Self::Polarize => "polarize",
            Self::Migrate => "migrate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// What a finished run reports back to the front end.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    /// Ordered `key=value` lines written to `summary.txt`.
    pub summary: Vec<(String, String)>,
    /// Wall-clock seconds per stage; not written to disk.
    pub timings: Vec<(String, f64)>,
    /// Set when an iteration stopped without meeting its tolerance.
    pub unconverged: Option<String>,
}

impl RunOutcome {
    fn put(&mut self, key: impl Into<String>, value: impl Display) {
        self.summary.push((key.into(), value.to_string()));
    }

    fn num(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, format!("{value:.6e}"));
    }

    fn check(&mut self, what: &str, report: &IterationReport) {
        if !report.converged && self.unconverged.is_none() {
            self.unconverged = Some(format!("{what} did not converge in {} iterations", report.iterations));
        }
    }

    fn timed<V>(&mut self, stage: &str, f: impl FnOnce() -> Result<V>) -> Result<V> {
        let t = Instant::now();
        let v = f()?;
        self.timings.push((stage.to_string(), t.elapsed().as_secs_f64()));
        Ok(v)
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    log: Vec<String>,
}

impl Ctx<'_> {
    fn setup(&self) -> Result<SymbolSetup<f64>> {
        Ok(SymbolSetup {
            band: self.cfg.band,
            grid: Arc::new(self.cfg.grid.build()?),
            iter: self.cfg.iter,
        })
    }

    /// The symbol stored at `path`, or the elliptic symbol of the configured
    /// medium when no file is given.
    fn operand(&self, path: Option<&PathBuf>) -> Result<Symbol<f64>> {
        match path {
            Some(p) => read_symbol(BufReader::new(File::open(p)?)),
            None => {
                let alpha = self.cfg.medium_field()?;
                let fp2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
                elliptic_symbol(&alpha, fp2 * self.cfg.mass, &self.setup()?)
            }
        }
    }

    fn noise(&self) -> Result<GridFunction<f64>> {
        GridFunction::random_bandlimited(self.cfg.dim, self.cfg.n, self.cfg.noise_band, self.cfg.seed)
    }

    fn file(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn save_symbol(&self, name: &str, a: &Symbol<f64>) -> Result<()> {
        let mut w = self.file(name)?;
        write_symbol(a, &mut w)?;
        w.flush()?;
        Ok(())
    }

    fn save_field(&self, stem: &str, u: &GridFunction<f64>) -> Result<()> {
        let mut w = self.file(&format!("{stem}.dscf"))?;
        u.write_to(&mut w)?;
        w.flush()?;
        let mut w = self.file(&format!("{stem}.pgm"))?;
        u.write_pgm(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn record(&mut self, what: &str, report: &IterationReport) {
        self.log.push(format!("# {what}\n{report}"));
    }
}

/// Runs `command`, writing artifacts under `out` (created if missing).
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out)?;
    let mut ctx = Ctx {
        cfg,
        out,
        log: Vec::new(),
    };
    let mut o = RunOutcome::default();
    o.put("command", command.name());
    o.put("dim", cfg.dim);
    o.put("seed", cfg.seed);
    match command {
        Command::BuildSymbol => build_symbol(&mut ctx, &mut o)?,
        Command::Compose => run_compose(&mut ctx, &mut o)?,
        Command::Invert => run_invert(&mut ctx, &mut o)?,
        Command::Sqrt => run_sqrt(&mut ctx, &mut o)?,
        Command::Exp => run_exp(&mut ctx, &mut o)?,
        Command::Moyal => run_moyal(&mut ctx, &mut o)?,
        Command::Apply => run_apply(&mut ctx, &mut o)?,
        Command::OracleCheck => run_oracle(&mut ctx, &mut o)?,
        Command::Helmholtz => run_helmholtz(&mut ctx, &mut o)?,
        Command::Polarize => run_polarize(&mut ctx, &mut o)?,
        Command::Migrate => run_migrate(&mut ctx, &mut o)?,
    }
    o.put("converged", o.unconverged.is_none());
    if !ctx.log.is_empty() {
        let mut w = ctx.file("iterations.log")?;
        w.write_all(ctx.log.join("\n").as_bytes())?;
        w.flush()?;
    }
    let mut w = ctx.file("summary.txt")?;
    for (k, v) in &o.summary {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()?;
    Ok(o)
}

fn describe(o: &mut RunOutcome, a: &Symbol<f64>) {
    o.put("grid_points", a.grid().len());
    o.put("modes", a.modes().len());
    o.num("order", a.order());
}

fn build_symbol(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let a = o.timed("sample", || ctx.operand(None))?;
    describe(o, &a);
    o.num("max_abs_h", a.max_abs_h());
    ctx.save_symbol("symbol.dsc", &a)
}

fn run_compose(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let a = ctx.operand(ctx.cfg.input.as_ref())?;
    let b = match &ctx.cfg.input_b {
        Some(p) => ctx.operand(Some(p))?,
        None => a.clone(),
    };
    let c = o.timed("compose", || compose(&a, &b))?;
    describe(o, &c);
    let f = ctx.noise()?;
    let abf = apply(&a, &apply(&b, &f)?)?;
    o.num("residual", apply(&c, &f)?.relative_error(&abf));
    ctx.save_symbol("compose.dsc", &c)
}

fn run_invert(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let a = ctx.operand(ctx.cfg.input.as_ref())?;
    let (c, report) = o.timed("inverse", || inverse(&a, ctx.cfg.iter))?;
    describe(o, &c);
    o.put("iterations", report.iterations);
    o.num("alpha", report.alpha);
    let f = ctx.noise()?;
    o.num("residual", apply(&a, &apply(&c, &f)?)?.relative_error(&f));
    o.check("Schulz inverse", &report);
    ctx.record("Schulz inverse", &report);
    ctx.save_symbol("inverse.dsc", &c)
}

fn run_sqrt(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let a = ctx.operand(ctx.cfg.input.as_ref())?;
    let (s, d, report) = o.timed("sqrt", || sqrt_invsqrt(&a, ctx.cfg.iter))?;
    describe(o, &s);
    o.put("iterations", report.iterations);
    o.num("alpha", report.alpha);
    let f = ctx.noise()?;
    let af = apply(&a, &f)?;
    let sf = apply(&s, &f)?;
    o.num("residual", apply(&s, &sf)?.relative_error(&af));
    o.num("residual_inv_sqrt", apply(&d, &sf)?.relative_error(&f));
    o.check("Schulz-Higham square root", &report);
    ctx.record("Schulz-Higham square root", &report);
    ctx.save_symbol("sqrt.dsc", &s)?;
    ctx.save_symbol("inv_sqrt.dsc", &d)
}

fn required_t(cfg: &RunConfig) -> Result<f64> {
    cfg.t.ok_or_else(|| DscError::Config("key `t`: required for this command".into()))
}

fn run_exp(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let a = ctx.operand(ctx.cfg.input.as_ref())?;
    let t = required_t(ctx.cfg)?;
    let e = o.timed("exp", || exponential(&a, t, ctx.cfg.k_min))?;
    describe(o, &e);
    o.num("t", t);
    o.num("max_abs_h", e.max_abs_h());
    ctx.save_symbol("exp.dsc", &e)
}

fn run_moyal(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let a = ctx.operand(ctx.cfg.input.as_ref())?;
    let dir = ctx
        .cfg
        .direction
        .ok_or_else(|| DscError::Config("key `direction`: required for this command".into()))?;
    let w = o.timed("moyal", || moyal(&a, dir))?;
    let back = moyal(
        &w,
        match dir {
            MoyalDirection::ToWeyl => MoyalDirection::FromWeyl,
            MoyalDirection::FromWeyl => MoyalDirection::ToWeyl,
        },
    )?;
    describe(o, &w);
    o.put(
        "direction",
        match dir {
            MoyalDirection::ToWeyl => "to-weyl",
            MoyalDirection::FromWeyl => "from-weyl",
        },
    );
    o.num("roundtrip_change", relative_table_change(back.table(), a.table()));
    ctx.save_symbol("moyal.dsc", &w)
}

fn run_apply(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let a = ctx.operand(ctx.cfg.input.as_ref())?;
    let u = match &ctx.cfg.field {
        Some(p) => GridFunction::read_from(BufReader::new(File::open(p)?))?,
        None => ctx.noise()?,
    };
    let v = o.timed("apply", || apply(&a, &u))?;
    o.put("n", u.n());
    o.num("norm_in", u.norm());
    o.num("norm_out", v.norm());
    ctx.save_field("output", &v)
}

fn run_oracle(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let op = ctx
        .cfg
        .op
        .ok_or_else(|| DscError::Config("key `op`: required for this command".into()))?;
    let a = ctx.operand(ctx.cfg.input.as_ref())?;
    let n = ctx.cfg.n;
    let t = if op == super::config::OracleOp::Exp { required_t(ctx.cfg)? } else { 0.0 };
    let mut report = None;
    let sym = o.timed("symbol", || -> Result<Symbol<f64>> {
        use super::config::OracleOp::*;
        Ok(match op {
            Compose => compose(&a, &a)?,
            Inverse => {
                let (c, r) = inverse(&a, ctx.cfg.iter)?;
                report = Some(("Schulz inverse", r));
                c
            }
            Sqrt | InvSqrt => {
                let (s, d, r) = sqrt_invsqrt(&a, ctx.cfg.iter)?;
                report = Some(("Schulz-Higham square root", r));
                if op == Sqrt {
                    s
                } else {
                    d
                }
            }
            Exp => exponential(&a, t, ctx.cfg.k_min)?,
        })
    })?;
    if let Some((what, r)) = report {
        o.check(what, &r);
        ctx.record(what, &r);
    }
    let da = o.timed("densify", || densify(&a, n))?;
    let reference = o.timed("dense", || dense_reference(op.dense_kind(t), &da, Some(&da)))?;
    let ds = densify(&sym, n)?;
    o.put("op", op.name());
    o.put("n", n);
    o.num("relative_error", central_band_error(&ds, &reference));
    o.num("relative_error_full_window", full_error(&ds, &reference));
    Ok(())
}

fn source(ctx: &Ctx) -> Result<GridFunction<f64>> {
    match ctx.cfg.source {
        Source::Noise => ctx.noise(),
        Source::Gaussian => {
            let dim = ctx.cfg.dim;
            GridFunction::from_fn(dim, ctx.cfg.n, |x: [f64; 2]| {
                let d: f64 = (x[0] - 0.5).powi(2) + if dim == 2 { (x[1] - 0.5).powi(2) } else { 0.0 };
                Complex64::new((-d / (2.0 * 0.05f64.powi(2))).exp(), 0.0)
            })
        }
    }
}

fn run_helmholtz(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let c = ctx.cfg.medium_field()?;
    let setup = ctx.setup()?;
    let f = source(ctx)?;
    let n = ctx.cfg.n;
    o.num("frequency", c.frequency);
    o.put("n", n);
    let l = |u: &GridFunction<f64>| helmholtz_apply(&c, u);
    for variant in ctx.cfg.variants.clone() {
        let name = variant.map_or("none", |v| v.name());
        let report = match variant {
            None => o.timed(&format!("solve_{name}"), || {
                bicgstab(l, |u: &GridFunction<f64>| Ok(u.clone()), &f, ctx.cfg.rtol, ctx.cfg.solver_max_iter)
            })?,
            Some(v) => {
                let p = o.timed(&format!("build_{name}"), || {
                    build_preconditioner(&c, v, &setup, n, ctx.cfg.compress_tol)
                })?;
                o.put(format!("rank_{name}"), p.compressed.rank());
                o.put(format!("schulz_iterations_{name}"), p.report.iterations);
                ctx.record(&format!("Schulz inverse of {name}"), &p.report);
                o.timed(&format!("solve_{name}"), || {
                    bicgstab(
                        l,
                        |u: &GridFunction<f64>| apply_compressed(&p.compressed, u),
                        &f,
                        ctx.cfg.rtol,
                        ctx.cfg.solver_max_iter,
                    )
                })?
            }
        };
        o.put(format!("iterations_{name}"), report.iterations);
        o.num(format!("residual_{name}"), report.residual);
        o.put(format!("restarts_{name}"), report.restarts);
        if !report.converged && o.unconverged.is_none() {
            o.unconverged = Some(format!("BiCGStab ({name}) did not reach rtol in {} iterations", report.iterations));
        }
        ctx.save_field(&format!("solution_{name}"), &report.solution)?;
    }
    Ok(())
}

fn run_polarize(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let alpha = ctx.cfg.medium_field()?;
    let setup = ctx.setup()?;
    let k = ctx.cfg.wave_k;
    let kf = [k[0] as f64, if ctx.cfg.dim == 2 { k[1] as f64 } else { 0.0 }];
    let kn = (kf[0] * kf[0] + kf[1] * kf[1]).sqrt();
    let tp = 2.0 * std::f64::consts::PI;
    let wave = |x: [f64; 2]| Complex64::from_polar(1.0, tp * (kf[0] * x[0] + kf[1] * x[1]));
    let u0 = GridFunction::from_fn(ctx.cfg.dim, ctx.cfg.n, wave)?;
    let u1 = GridFunction::from_fn(ctx.cfg.dim, ctx.cfg.n, |x| Complex64::new(0.0, -tp * kn) * wave(x))?;
    let p = o.timed("polarize", || polarize(&alpha, &u0, &u1, ctx.cfg.eps, &setup))?;
    o.put("iterations", p.report.iterations);
    o.num("plus_over_u0", p.plus.norm() / u0.norm());
    o.num("minus_over_u0", p.minus.norm() / u0.norm());
    o.num("sum_error", p.plus.add(&p.minus).relative_error(&u0));
    o.check("Schulz-Higham square root", &p.report);
    ctx.record("Schulz-Higham square root", &p.report);
    ctx.save_field("u_plus", &p.plus)?;
    ctx.save_field("u_minus", &p.minus)
}

fn initial_field(ctx: &Ctx, c: &MediumField<f64>) -> Result<GridFunction<f64>> {
    let cfg = ctx.cfg;
    match cfg.initial {
        Initial::Constant => GridFunction::from_fn(cfg.dim, cfg.n, |_| Complex64::new(1.0, 0.0)),
        Initial::Noise => ctx.noise(),
        Initial::Packet => {
            let centre = [0.5, 0.5];
            let speed = c.value(centre);
            let kx = (cfg.frequency / speed * cfg.packet_angle.to_radians().sin()).round();
            let tp = 2.0 * std::f64::consts::PI;
            let w2 = 2.0 * cfg.packet_width * cfg.packet_width;
            GridFunction::from_fn(cfg.dim, cfg.n, |x: [f64; 2]| {
                let d: f64 = (x[0] - 0.5).powi(2) + if cfg.dim == 2 { (x[1] - 0.5).powi(2) } else { 0.0 };
                Complex64::from_polar((-d / w2).exp(), tp * kx * x[0])
            })
        }
    }
}

/// Depth section as a PGM: one row per depth, magnitude normalized to 255.
/// In 2D the row is the cross-section `x₂ = 1/2`.
fn write_section(w: &mut impl Write, slices: &[GridFunction<f64>]) -> Result<()> {
    let rows: Vec<Vec<f64>> = slices
        .iter()
        .map(|s| {
            let n = s.n();
            let vals = s.values();
            if s.dim() == 1 {
                vals.iter().map(|z| z.norm()).collect()
            } else {
                (0..n).map(|i| vals[i * n + n / 2].norm()).collect()
            }
        })
        .collect();
    let width = rows.first().map_or(0, Vec::len);
    let max = rows.iter().flatten().cloned().fold(0.0, f64::max);
    write!(w, "P5\n{width} {}\n255\n", rows.len())?;
    let bytes: Vec<u8> = rows
        .iter()
        .flatten()
        .map(|&m| if max > 0.0 { (m / max * 255.0).round() as u8 } else { 0 })
        .collect();
    w.write_all(&bytes)?;
    Ok(())
}

fn run_migrate(ctx: &mut Ctx, o: &mut RunOutcome) -> Result<()> {
    let c = ctx.cfg.medium_field()?;
    let setup = ctx.setup()?;
    let u0 = initial_field(ctx, &c)?;
    let m = o.timed("migrate", || migrate(&c, &u0, ctx.cfg.z_max, &ctx.cfg.ssr, &setup))?;
    o.num("frequency", c.frequency);
    o.num("dz", ctx.cfg.ssr.dz);
    o.put("steps", m.steps);
    let growth = m.slices.windows(2).map(|w| w[1].norm() / w[0].norm()).fold(0.0, f64::max);
    o.num("max_step_growth", growth);
    o.num("final_norm_ratio", m.slices.last().map_or(1.0, |s| s.norm() / u0.norm()));
    for (i, r) in m.reports.iter().enumerate() {
        o.check("generator square root", r);
        ctx.record(&format!("generator square root {i}"), r);
    }
    for (k, s) in m.slices.iter().enumerate() {
        let mut w = ctx.file(&format!("slice_{k:04}.dscf"))?;
        s.write_to(&mut w)?;
        w.flush()?;
    }
    let mut w = ctx.file("section.pgm")?;
    write_section(&mut w, &m.slices)?;
    w.flush()?;
    Ok(())
}
