use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{merge, RunConfig};
use super::*;
use crate::chain::{
    chain_truncation_error_bound, freq_cutoff_error_bound, prop2_mode_count, regularization_error_bound,
    regularization_error_bound_for_kernel, ChainCoefficients, DilationLayout, DilationParams,
};
use crate::dynamics::{
    evolve, expectation, fock_convergence_check, lightcone_experiment, random_product_state, EvolutionConfig,
    LightconeSetup, Observable, QuantumState,
};
use crate::error::Error;
use crate::kernels::{build_upper_bound, mollify, KernelSpec, MemoryKernel};
use crate::lattice::{lr_velocity, prop1_bound, LatticeModel, ModelSpec, Prop1Inputs};
use crate::numeric::fmt12;
use crate::numeric::sparse::TensorSpace;
use crate::supersonic::{
    bound_violation_report, simulate_protocol_with, simulate_restricted_with, BlockOptions, Protocol,
};

struct Ctx {
    config: Option<RunConfig>,
    seed: u64,
    dry_run: bool,
    lines: Vec<String>,
}

impl Ctx {
    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn merge<T: Default + Serialize + serde::de::DeserializeOwned>(&self, cli: &T, path: &[&str]) -> CliResult<T> {
        merge(cli, self.config.as_ref(), path, None)
    }

    fn merge_params<T: Default + Serialize + serde::de::DeserializeOwned>(
        &self,
        cli: &T,
        path: &[&str],
        params: Option<&Path>,
    ) -> CliResult<T> {
        merge(cli, self.config.as_ref(), path, params)
    }

    /// Prints the dry-run line; true if the command should stop here.
    fn dry(&mut self, what: &str, dim: u128) -> bool {
        if self.dry_run {
            self.say(format!("dry run: {what}; planned composite dimension {dim}"));
        }
        self.dry_run
    }
}

pub(super) fn dispatch<W: Write>(cli: Cli, out: &mut W) -> CliResult<()> {
    let config = cli.global.config.as_deref().map(RunConfig::load).transpose()?;
    let jobs = cli.global.jobs.or(config.as_ref().and_then(|c| c.jobs));
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let seed = cli.global.seed.or(config.as_ref().and_then(|c| c.seed)).unwrap_or(0);
    let mut ctx = Ctx { config, seed, dry_run: cli.global.dry_run, lines: Vec::new() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", jobs.unwrap_or(0))))?;
    let command = cli.command;
    let (ctx, result) = pool.install(move || {
        let r = run_command(&command, &mut ctx);
        (ctx, r)
    });
    for line in &ctx.lines {
        writeln!(out, "{line}").map_err(|e| CliError::Domain(e.into()))?;
    }
    result
}

fn run_command(command: &Command, ctx: &mut Ctx) -> CliResult<()> {
    match command {
        Command::Kernel(KernelCommand::Tv(a)) => kernel_tv(ctx.merge(a, &["kernel", "tv"])?, ctx),
        Command::Kernel(KernelCommand::Mollify(a)) => kernel_mollify(ctx.merge(a, &["kernel", "mollify"])?, ctx),
        Command::Kernel(KernelCommand::UpperBound(a)) => kernel_upper_bound(ctx.merge(a, &["kernel", "upper-bound"])?, ctx),
        Command::Model(ModelCommand::Stats(a)) => model_stats(ctx.merge(a, &["model", "stats"])?, ctx),
        Command::Model(ModelCommand::Restrict(a)) => model_restrict(ctx.merge(a, &["model", "restrict"])?, ctx),
        Command::Chain(a) => chain(ctx.merge(a, &["chain"])?, ctx),
        Command::Bounds(b) => bounds(b, ctx),
        Command::Simulate(a) => simulate(ctx.merge(a, &["simulate"])?, ctx),
        Command::Lightcone(a) => lightcone(ctx.merge(a, &["lightcone"])?, ctx),
        Command::Supersonic(a) => supersonic(ctx.merge(a, &["supersonic"])?, ctx),
        Command::Modes(a) => modes(ctx.merge(a, &["modes"])?, ctx),
    }
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Malformed input files are usage errors; everything else is a domain error.
fn parse_input<T>(path: &Path, f: impl FnOnce(&str) -> crate::Result<T>) -> CliResult<T> {
    let text = read_input(path)?;
    f(&text).map_err(|e| match e {
        Error::Json(e) => CliError::Usage(format!("{}: {e}", path.display())),
        other => CliError::Domain(other),
    })
}

fn load_kernel(path: &Path) -> CliResult<MemoryKernel> {
    parse_input(path, MemoryKernel::from_json)
}

fn load_model(path: &Path) -> CliResult<LatticeModel> {
    parse_input(path, LatticeModel::from_json)
}

/// Writes through a temporary file in the target directory and renames it.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Domain(Error::Io(e));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn round12(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            json!(r)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round12).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round12(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
fn to_json12<T: Serialize>(value: &T) -> CliResult<String> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Domain(e.into()))?;
    Ok(serde_json::to_string_pretty(&round12(v)).map_err(|e| CliError::Domain(e.into()))? + "\n")
}

fn written(summary: String, out: Option<&Path>) -> String {
    match out {
        Some(p) => format!("{summary} -> {}", p.display()),
        None => summary,
    }
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("cannot parse {what} entry {s:?}"))))
        .collect()
}

/// `start:step:end` (inclusive) or a comma-separated list.
pub(super) fn parse_times(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, s, b] => {
            let p = |x: &str| x.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad time range {text:?}")));
            let (a, s, b) = (p(a)?, p(s)?, p(b)?);
            if !(s > 0.0) || !(b >= a) {
                return Err(CliError::Usage(format!("time range {text:?} needs a positive step and end >= start")));
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| if k == n && ((a + k as f64 * s) - b).abs() < 1e-9 * s { b } else { a + k as f64 * s }).collect())
        }
        [_] => parse_list(text, "time"),
        _ => Err(CliError::Usage(format!("bad time syntax {text:?}"))),
    }
}

/// `a..b` (exclusive), `a..=b` or a comma-separated list.
pub(super) fn parse_radii(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("bad radius syntax {text:?}"));
    if let Some((a, b)) = text.split_once("..=") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return Ok((a..=b).collect());
    }
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return Ok((a..b).collect());
    }
    parse_list(text, "radius")
}

fn kernel_tv(a: KernelTvArgs, ctx: &mut Ctx) -> CliResult<()> {
    let k = load_kernel(&need(a.input, "in")?)?;
    let interval = match a.interval.as_deref() {
        None => None,
        Some([x, y]) => Some((*x, *y)),
        Some(_) => return Err(CliError::Usage("--interval takes two values".into())),
    };
    if ctx.dry("kernel parsed", 0) {
        return Ok(());
    }
    let tv = k.total_variation(interval)?;
    if let Some(out) = &a.out {
        write_atomic(out, &to_json12(&json!({ "tv": tv, "interval": a.interval }))?)?;
    }
    ctx.say(written(format!("TV = {tv:.6}"), a.out.as_deref()));
    Ok(())
}

fn kernel_mollify(a: KernelMollifyArgs, ctx: &mut Ctx) -> CliResult<()> {
    let k = load_kernel(&need(a.input, "in")?)?;
    let delta = need(a.delta, "delta")?;
    let delta_prime = a.delta_prime.unwrap_or(delta);
    if ctx.dry("kernel parsed", 0) {
        return Ok(());
    }
    let m = mollify(&k, delta, delta_prime)?;
    let tv = m.total_variation(None)?;
    let sup = m.continuous().sup_estimate(4096);
    if let Some(out) = &a.out {
        write_atomic(out, &to_json12(&KernelSpec::from_kernel(&m)?)?)?;
    }
    ctx.say(written(format!("mollified kernel: TV = {}, sup = {}", fmt12(tv), fmt12(sup)), a.out.as_deref()));
    Ok(())
}

fn kernel_upper_bound(a: KernelUpperBoundArgs, ctx: &mut Ctx) -> CliResult<()> {
    let u = match (&a.model, a.input.is_empty()) {
        (Some(m), true) => {
            let model = load_model(m)?;
            if ctx.dry("model parsed", 0) {
                return Ok(());
            }
            model.upper_bound()?
        }
        (None, false) => {
            let kernels = a.input.iter().map(|p| load_kernel(p)).collect::<CliResult<Vec<_>>>()?;
            if ctx.dry("kernels parsed", 0) {
                return Ok(());
            }
            build_upper_bound(&kernels)?
        }
        _ => return Err(CliError::Usage("give either --in (repeatable) or --model".into())),
    };
    let tv = u.total_variation(None)?;
    if let Some(out) = &a.out {
        write_atomic(out, &to_json12(&KernelSpec::from_kernel(u.kernel())?)?)?;
    }
    ctx.say(written(format!("TV(U) = {}", fmt12(tv)), a.out.as_deref()));
    Ok(())
}

#[derive(Serialize)]
struct ModelStats {
    sites: usize,
    dimension: usize,
    terms: usize,
    coupled_terms: usize,
    a0: usize,
    z: usize,
    tv_u: f64,
    velocity: f64,
}

fn model_stats(a: ModelStatsArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = load_model(&need(a.input, "in")?)?;
    let q = model.qudit_dim();
    let sites = model.lattice().num_sites();
    if ctx.dry("model parsed", TensorSpace::checked_dimension(&vec![q; sites])) {
        return Ok(());
    }
    let g = model.geometry_stats();
    let tv_u = model.upper_bound()?.total_variation(None)?;
    let stats = ModelStats {
        sites,
        dimension: model.lattice().dimension(),
        terms: model.terms().len(),
        coupled_terms: model.coupled_terms().count(),
        a0: g.a0,
        z: g.z,
        tv_u,
        velocity: lr_velocity(g.a0 as f64, g.z as f64, tv_u)?,
    };
    if let Some(out) = &a.out {
        write_atomic(out, &to_json12(&stats)?)?;
    }
    ctx.say(written(
        format!(
            "sites {}, terms {} ({} coupled), a0 = {}, Z = {}, TV(U) = {}, v_LR = {}",
            stats.sites,
            stats.terms,
            stats.coupled_terms,
            stats.a0,
            stats.z,
            fmt12(stats.tv_u),
            fmt12(stats.velocity)
        ),
        a.out.as_deref(),
    ));
    Ok(())
}

fn model_restrict(a: ModelRestrictArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = load_model(&need(a.input, "in")?)?;
    let x: Vec<usize> = parse_list(&need(a.x, "x")?, "site")?;
    let l = need(a.l, "l")?;
    let restricted = model.restrict(&x, l)?;
    if ctx.dry("restriction computed", 0) {
        return Ok(());
    }
    let out = need(a.out, "out")?;
    write_atomic(&out, &(serde_json::to_string_pretty(&ModelSpec::from_model(&restricted)?).map_err(|e| CliError::Domain(e.into()))? + "\n"))?;
    ctx.say(written(format!("kept {} of {} terms", restricted.terms().len(), model.terms().len()), Some(&out)));
    Ok(())
}

fn chain(a: ChainArgs, ctx: &mut Ctx) -> CliResult<()> {
    let v = load_kernel(&need(a.kernel, "kernel")?)?;
    let params = DilationParams::new(need(a.delta, "delta")?, need(a.omega_c, "omega-c")?, need(a.modes, "modes")?)?;
    if ctx.dry(&format!("{} chain modes", params.modes), 0) {
        return Ok(());
    }
    let c = params.chain_for(&v)?;
    if let Some(out) = &a.out {
        let text = if out.extension().is_some_and(|e| e == "csv") { c.to_csv() } else { to_json12(&c)? };
        write_atomic(out, &text)?;
    }
    ctx.say(written(format!("chain: {} modes, g = {}", c.modes(), fmt12(c.g)), a.out.as_deref()));
    Ok(())
}

fn bounds(b: &BoundsCommand, ctx: &mut Ctx) -> CliResult<()> {
    match b {
        BoundsCommand::Velocity(a) => {
            let a = ctx.merge(a, &["bounds", "velocity"])?;
            let v = lr_velocity(need(a.a0, "a0")?, need(a.z, "z")?, need(a.tv, "tv")?)?;
            if !ctx.dry("inputs valid", 0) {
                ctx.say(format!("v_LR = {}", fmt12(v)));
            }
        }
        BoundsCommand::Prop1(a) => {
            let a = ctx.merge_params(a, &["bounds", "prop1"], a.params.as_deref())?;
            let p = Prop1Inputs {
                o_norm: a.o_norm.unwrap_or(1.0),
                diam_x: a.diam_x.unwrap_or(0.0),
                l: need(a.l, "l")?,
                dt: need(a.t, "t")?,
                a0: need(a.a0, "a0")?,
                z: need(a.z, "z")?,
                tv_u: need(a.tv, "tv")?,
                d: a.d.unwrap_or(1),
            };
            let bound = prop1_bound(&p)?;
            if !ctx.dry("inputs valid", 0) {
                ctx.say(format!("bound = {}", fmt12(bound)));
            }
        }
        BoundsCommand::Reg(a) => {
            let a = ctx.merge_params(a, &["bounds", "reg"], a.params.as_deref())?;
            let (t, n, delta) = (need(a.t, "t")?, need(a.n_terms, "n-terms")?, need(a.delta, "delta")?);
            let bound = match &a.kernel {
                Some(k) => regularization_error_bound_for_kernel(&load_kernel(k)?, t, n, delta)?,
                None => regularization_error_bound(t, n, need(a.tv, "tv")?, need(a.window_tv, "window-tv")?, delta)?,
            };
            if !ctx.dry("inputs valid", 0) {
                ctx.say(format!("regularization error <= {}", fmt12(bound)));
            }
        }
        BoundsCommand::Cutoff(a) => {
            let a = ctx.merge_params(a, &["bounds", "cutoff"], a.params.as_deref())?;
            let bound = freq_cutoff_error_bound(
                need(a.t, "t")?,
                need(a.n_terms, "n-terms")?,
                a.o_norm.unwrap_or(1.0),
                need(a.tv, "tv")?,
                need(a.delta, "delta")?,
                need(a.omega_c, "omega-c")?,
            )?;
            if !ctx.dry("inputs valid", 0) {
                ctx.say(format!("frequency-cutoff error <= {}", fmt12(bound)));
            }
        }
        BoundsCommand::Chain(a) => {
            let a = ctx.merge_params(a, &["bounds", "chain"], a.params.as_deref())?;
            let bound = chain_truncation_error_bound(
                need(a.t, "t")?,
                need(a.n_terms, "n-terms")?,
                a.o_norm.unwrap_or(1.0),
                need(a.tv, "tv")?,
                need(a.modes, "modes")?,
                need(a.delta, "delta")?,
                need(a.omega_c, "omega-c")?,
            )?;
            if !ctx.dry("inputs valid", 0) {
                ctx.say(format!("chain-truncation error <= {}", fmt12(bound)));
            }
        }
        BoundsCommand::Modes(a) => {
            let a = ctx.merge_params(a, &["bounds", "modes"], a.params.as_deref())?;
            let k = load_kernel(&need(a.kernel, "kernel")?)?;
            let est = prop2_mode_count(need(a.eps, "eps")?, need(a.t, "t")?, a.d.unwrap_or(1), k.continuous())?;
            if !ctx.dry("inputs valid", 0) {
                ctx.say(format!(
                    "N_m ~ {} (time {}, precision {}, memory {}, kappa0 {})",
                    est.modes,
                    fmt12(est.time_term),
                    fmt12(est.precision_term),
                    fmt12(est.memory_term),
                    fmt12(est.kappa0)
                ));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ModesReport {
    modes: usize,
    t: f64,
    eps_tilde: f64,
    delta: f64,
    omega_c: f64,
    regularization: Option<f64>,
    cutoff: Option<f64>,
    chain: Option<f64>,
}

fn modes(a: ModesArgs, ctx: &mut Ctx) -> CliResult<()> {
    let n = need(a.modes, "modes")?;
    let t = need(a.t, "t")?;
    let eps_tilde = a.eps_tilde.unwrap_or(0.5);
    let p = DilationParams::from_mode_count(n, t, eps_tilde)?;
    let kernel = a.kernel.as_deref().map(load_kernel).transpose()?;
    if ctx.dry("parameters valid", 0) {
        return Ok(());
    }
    let mut report = ModesReport {
        modes: n,
        t,
        eps_tilde,
        delta: p.delta,
        omega_c: p.omega_c,
        regularization: None,
        cutoff: None,
        chain: None,
    };
    if let Some(v) = &kernel {
        let n_terms = a.n_terms.unwrap_or(1.0);
        let o = a.o_norm.unwrap_or(1.0);
        let tv = v.total_variation(None)?;
        report.regularization = Some(regularization_error_bound_for_kernel(v, t, n_terms, p.delta)?);
        report.cutoff = Some(freq_cutoff_error_bound(t, n_terms, o, tv, p.delta, p.omega_c)?);
        report.chain = Some(chain_truncation_error_bound(t, n_terms, o, tv, n, p.delta, p.omega_c)?);
    }
    if let Some(out) = &a.out {
        write_atomic(out, &to_json12(&report)?)?;
    }
    let mut line = format!("N_m = {n}: delta = {}, omega_c = {}", fmt12(p.delta), fmt12(p.omega_c));
    if let (Some(r), Some(c), Some(ch)) = (report.regularization, report.cutoff, report.chain) {
        line.push_str(&format!(", errors: regularization {}, cutoff {}, chain {}", fmt12(r), fmt12(c), fmt12(ch)));
    }
    ctx.say(written(line, a.out.as_deref()));
    Ok(())
}

/// Chains for every coupled term: from a file, or built from the baths.
fn load_chains(a: &DynamicsArgs, model: &LatticeModel) -> CliResult<BTreeMap<usize, ChainCoefficients>> {
    let coupled: Vec<(usize, String)> =
        model.coupled_terms().map(|(alpha, _, c)| (model.origin()[alpha], c.bath.clone())).collect();
    if let Some(path) = &a.chain {
        let text = read_input(path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let bad = |e: serde_json::Error| CliError::Usage(format!("{}: {e}", path.display()));
        if value.get("g").is_some() {
            let c: ChainCoefficients = serde_json::from_value(value).map_err(bad)?;
            c.validate()?;
            return Ok(coupled.into_iter().map(|(k, _)| (k, c.clone())).collect());
        }
        let map: BTreeMap<usize, ChainCoefficients> = serde_json::from_value(value).map_err(bad)?;
        for c in map.values() {
            c.validate()?;
        }
        return Ok(map);
    }
    let params = DilationParams::new(
        need(a.delta, "delta (or --chain)")?,
        need(a.omega_c, "omega-c (or --chain)")?,
        need(a.modes, "modes (or --chain)")?,
    )?;
    let mut by_bath: BTreeMap<String, ChainCoefficients> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for (k, bath) in coupled {
        if !by_bath.contains_key(&bath) {
            let v = model
                .bath(&bath)
                .and_then(|b| b.commutator_kernel())
                .ok_or_else(|| Error::InvalidModel(format!("bath {bath} has no commutator kernel to build a chain from")))?;
            by_bath.insert(bath.clone(), params.chain_for(v)?);
        }
        out.insert(k, by_bath[&bath].clone());
    }
    Ok(out)
}

fn load_initial(a: &DynamicsArgs, model: &LatticeModel, seed: u64) -> CliResult<Vec<Vec<C64>>> {
    let q = model.qudit_dim();
    let sites = model.lattice().num_sites();
    match &a.initial {
        Some(path) => {
            let text = read_input(path)?;
            let raw: Vec<Vec<[f64; 2]>> =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok(raw.into_iter().map(|v| v.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect())
        }
        None => Ok(random_product_state(q, sites, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))),
    }
}

fn load_observable(path: &Path) -> CliResult<Observable> {
    let o: Observable = serde_json::from_str(&read_input(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Observable::new(o.sites, o.matrix)?)
}

fn evolution_config(a: &DynamicsArgs) -> EvolutionConfig {
    let d = EvolutionConfig::default();
    EvolutionConfig {
        dt: a.dt.unwrap_or(d.dt),
        tolerance: a.tolerance.unwrap_or(d.tolerance),
        krylov_dim: a.krylov_dim.unwrap_or(d.krylov_dim),
        n_max: a.fock.unwrap_or(d.n_max),
        ..d
    }
}

fn simulate(a: SimulateArgs, ctx: &mut Ctx) -> CliResult<()> {
    let d = &a.dynamics;
    let model = load_model(&need(d.model.clone(), "model")?)?;
    let observable = load_observable(&need(d.observable.clone(), "observable")?)?;
    let times = parse_times(&need(d.t.clone(), "t")?)?;
    let fock_check: Option<Vec<usize>> = a.fock_check.as_deref().map(|s| parse_list(s, "cutoff")).transpose()?;
    let cfg = evolution_config(d);
    let chains = load_chains(d, &model)?;
    let layout = DilationLayout::new(&model, &chains, cfg.n_max)?;
    if ctx.dry("model, chains and observable valid", layout.planned_dimension()) {
        return Ok(());
    }
    let out = need(d.out.clone(), "out")?;
    let initial = load_initial(d, &model, ctx.seed)?;
    let h = layout.assemble(&model, &chains, cfg.dim_cap)?;
    let mut psi = QuantumState::with_vacuum(layout.dims().to_vec(), &initial)?;
    let mut now = 0.0;
    let mut csv = String::from("t,expectation\n");
    let mut last = 0.0;
    for &t in &times {
        if t < now {
            return Err(CliError::Usage("times must be nondecreasing and nonnegative".into()));
        }
        psi = evolve(&h, &psi, now, t, &cfg)?;
        now = t;
        last = expectation(&psi, &observable.matrix, &observable.sites)?;
        csv.push_str(&format!("{},{}\n", fmt12(t), fmt12(last)));
    }
    write_atomic(&out, &csv)?;
    ctx.say(written(
        format!("{} times on dimension {}, final expectation {}", times.len(), h.dim(), fmt12(last)),
        Some(&out),
    ));
    if let Some(cutoffs) = fock_check {
        let rows = fock_convergence_check(&model, &chains, &observable, &initial, now, &cutoffs, &cfg)?;
        for r in rows {
            ctx.say(format!(
                "fock {}: {}{}",
                r.n_max,
                fmt12(r.value),
                r.difference.map(|d| format!(" (change {}{})", fmt12(d), if r.converged { ", converged" } else { "" })).unwrap_or_default()
            ));
        }
    }
    Ok(())
}

fn lightcone(a: LightconeArgs, ctx: &mut Ctx) -> CliResult<()> {
    let d = &a.dynamics;
    let model = load_model(&need(d.model.clone(), "model")?)?;
    let observable = load_observable(&need(d.observable.clone(), "observable")?)?;
    let t_values = parse_times(&need(d.t.clone(), "t")?)?;
    let l_values = parse_radii(&need(a.l.clone(), "l")?)?;
    let config = evolution_config(d);
    let chains = load_chains(d, &model)?;
    let layout = DilationLayout::new(&model, &chains, config.n_max)?;
    if ctx.dry(&format!("{} radii x {} times", l_values.len(), t_values.len()), layout.planned_dimension()) {
        return Ok(());
    }
    let out = need(d.out.clone(), "out")?;
    let json_path = a.json.clone().unwrap_or_else(|| with_extension(&out, "json"));
    let initial = load_initial(d, &model, ctx.seed)?;
    let setup = LightconeSetup { model, chains, observable, l_values, t_values, initial, config };
    let result = lightcone_experiment(&setup)?;
    write_atomic(&out, &result.to_csv())?;
    write_atomic(&json_path, &to_json12(&result)?)?;
    let worst = result.rows.iter().map(|r| r.delta - r.bound).fold(f64::NEG_INFINITY, f64::max);
    let violations = result.rows.iter().filter(|r| r.delta > r.bound).count();
    ctx.say(written(
        format!("{} cells, {violations} above the bound (max delta - bound {})", result.rows.len(), fmt12(worst)),
        Some(&out),
    ));
    Ok(())
}

fn supersonic(a: SupersonicArgs, ctx: &mut Ctx) -> CliResult<()> {
    let m = need(a.m, "m")?;
    let t = m * m;
    let qubits = a.qubits.unwrap_or(m.pow(3) + 2);
    let p = Protocol::new(m, qubits, a.shape.unwrap_or_default().into())?;
    let fock = a.fock.unwrap_or(t + 2);
    let l = a.l.unwrap_or(p.hops() - 1);
    p.restricted_terms(l)?;
    let surrogates: Vec<f64> = parse_list(a.tv.as_deref().unwrap_or("0,1,10,100"), "TV surrogate")?;
    if ctx.dry_run {
        let full = TensorSpace::checked_dimension(&p.full_dims(fock));
        ctx.say(format!(
            "dry run: {} blocks of dimension <= {}; planned composite dimension {full} (never allocated)",
            p.oscillators() + 1 + p.hops(),
            4 * fock
        ));
        return Ok(());
    }
    let out = need(a.out, "out")?;
    let report_path = a.report.unwrap_or_else(|| with_extension(&out, "json"));
    let opts = BlockOptions { oracle: !a.no_oracle, ..BlockOptions::new(fock) };
    let full = simulate_protocol_with(&p, &opts)?;
    let restricted = simulate_restricted_with(&p, l, &opts)?;
    let report = bound_violation_report(&p, l, &full, &restricted, &surrogates)?;
    let diagnostics = json!({
        "blocks": full.blocks.len() + restricted.blocks.len(),
        "max_oracle_error": full.max_oracle_error().into_iter().chain(restricted.max_oracle_error()).reduce(f64::max),
        "min_purity": full.min_purity().min(restricted.min_purity()),
        "max_leakage": full.max_leakage().max(restricted.max_leakage()),
        "pump_photons": full.oscillator_photons.len() as f64 * t as f64,
        "final_photons": full.total_photons(),
    });
    write_atomic(&out, &full.to_csv())?;
    write_atomic(&report_path, &to_json12(&json!({ "report": report, "diagnostics": diagnostics }))?)?;
    ctx.say(written(
        format!(
            "qubit {}: full {}, restricted (l = {l}) {}, delta {}; report {}",
            report.target,
            fmt12(report.full_population),
            fmt12(report.restricted_population),
            fmt12(report.delta_observed),
            report_path.display()
        ),
        Some(&out),
    ));
    Ok(())
}
