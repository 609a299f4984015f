//! Sweep orchestration for the `run` and `oracle-check` commands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rug::Float;

use crate::analysis::{c_eff, fit_entropy_scaling, nn_profile, symmetric_hopping, CouplingProfile, EntropySample};
use crate::chain::{build_chain, ChainSpec, Coupling, DefectKind, DefectSpec, SubsystemSpec};
use crate::config::{Cut, ExperimentConfig, Observable};
use crate::error::{Error, Result};
use crate::gaussian::{
    chain_ground_state, entanglement_hamiltonian, many_body_spectrum, restrict, single_particle_spectrum, GroundState,
};
use crate::observables::{entropy, fidelity, log_negativity, BipartitionSpec};
use crate::oracle::{covariance_of, oracle_context, rdm_spectrum, shannon, spin_ed_ground};
use crate::precision::PrecisionContext;

pub const ENV_MAX_THREADS: &str = "WORKBENCH_MAX_THREADS";
pub const CSV_HEADER: &str = "n,l,defects,j_star,observable,row,col,position,kind,value,value_bits,dps";
/// Largest ring accepted by `oracle-check`.
pub const ORACLE_MAX_SITES: usize = 12;
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ORACLE_MISMATCH: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const PRECISION: i32 = 3;
}

/// Exit status for an error escaping a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidChain(_) | Error::InvalidSubsystem(_) | Error::OracleRange { .. } => exit::CONFIG,
        _ => exit::PRECISION,
    }
}

/// One `(N, J*)` combination of the sweep lists.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub n_sites: usize,
    pub j_star: Option<Coupling>,
}

pub fn sweep_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let js: Vec<Option<Coupling>> =
        if config.j_star.is_empty() { vec![None] } else { config.j_star.iter().cloned().map(Some).collect() };
    config
        .n_values
        .iter()
        .flat_map(|&n| js.iter().map(move |j| SweepPoint { n_sites: n, j_star: j.clone() }))
        .collect()
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRecord {
    pub n: String,
    pub l: String,
    pub defects: String,
    pub j_star: String,
    pub observable: &'static str,
    pub row: String,
    pub col: String,
    pub position: String,
    pub kind: String,
    pub value: String,
    /// Entropy in bits; empty for other observables.
    pub value_bits: String,
    pub dps: u32,
}

impl SweepRecord {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.l,
            self.defects,
            self.j_star,
            self.observable,
            self.row,
            self.col,
            self.position,
            self.kind,
            self.value,
            self.value_bits,
            self.dps
        )
    }
}

fn describe_defects(defects: &[DefectSpec]) -> String {
    defects
        .iter()
        .map(|d| match &d.kind {
            DefectKind::Energy(j) => format!("energy:{j}@{}", d.bond),
            DefectKind::Antiperiodic => format!("antiperiodic@{}", d.bond),
            DefectKind::Duality => format!("duality@{}", d.bond),
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Ground-state bookkeeping echoed into the manifest.
#[derive(Clone, Debug)]
pub struct SectorInfo {
    pub parity: i32,
    pub target_parity: i32,
    pub zero_modes: usize,
    pub flipped_block: Option<usize>,
}

impl SectorInfo {
    fn of(gs: &GroundState) -> Self {
        Self {
            parity: gs.parity,
            target_parity: gs.target_parity.unwrap_or(gs.parity),
            zero_modes: gs.zero_modes,
            flipped_block: gs.flipped_block,
        }
    }
}

/// Everything computed at one sweep point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub rows: BTreeMap<Observable, Vec<SweepRecord>>,
    pub dps: u32,
    pub attempts: u32,
    pub sector: SectorInfo,
    pub entropy: Option<Float>,
    pub length: usize,
}

#[derive(Clone, Debug)]
pub enum PointStatus {
    Done(Box<PointResult>),
    Failed { dps: u32, attempts: u32, reason: String },
}

struct Emitter<'a> {
    base: SweepRecord,
    ctx: &'a PrecisionContext,
    rows: BTreeMap<Observable, Vec<SweepRecord>>,
}

impl Emitter<'_> {
    fn push(&mut self, obs: Observable, row: String, col: String, position: String, kind: &str, value: &Float) {
        let record = SweepRecord {
            observable: obs.name(),
            row,
            col,
            position,
            kind: kind.to_string(),
            value: self.ctx.to_decimal(value),
            ..self.base.clone()
        };
        self.rows.entry(obs).or_default().push(record);
    }

    fn scalar(&mut self, obs: Observable, kind: &str, value: &Float) {
        self.push(obs, String::new(), String::new(), String::new(), kind, value);
    }

    fn profile(&mut self, obs: Observable, profile: &CouplingProfile, pair_of: impl Fn(i64) -> i64) {
        for p in &profile.points {
            self.push(obs, p.index.to_string(), pair_of(p.index).to_string(), format!("{}", p.position), p.kind.as_str(), &p.value);
        }
    }
}

fn subsystem_chain(
    config: &ExperimentConfig,
    templates: &[crate::config::DefectTemplate],
    point: &SweepPoint,
    sub: &SubsystemSpec,
    ctx: &PrecisionContext,
) -> Result<(ChainSpec, Vec<DefectSpec>)> {
    let defects = templates
        .iter()
        .map(|t| t.resolve(point.n_sites, sub, point.j_star.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok((build_chain(point.n_sites, &defects, config.boundary_sign, ctx)?, defects))
}

/// All requested observables at one point and precision.
pub fn compute_point(config: &ExperimentConfig, point: &SweepPoint, digits: u32) -> Result<PointResult> {
    let ctx = PrecisionContext::new(digits)?;
    let n = point.n_sites;
    let sub = config.subsystem(n);
    let (chain, defects) = subsystem_chain(config, &config.defects, point, &sub, &ctx)?;
    let base = SweepRecord {
        n: n.to_string(),
        l: sub.length.to_string(),
        defects: describe_defects(&defects),
        j_star: point.j_star.as_ref().map(|j| j.to_string()).unwrap_or_default(),
        observable: "",
        row: String::new(),
        col: String::new(),
        position: String::new(),
        kind: String::new(),
        value: String::new(),
        value_bits: String::new(),
        dps: digits,
    };
    let mut out = Emitter { base, ctx: &ctx, rows: BTreeMap::new() };
    let gs = chain_ground_state(&chain, &ctx)?;
    let gamma_a = restrict(&gs.gamma, &sub)?;

    let mut entropy_value = None;
    if config.wants(Observable::Entropy) {
        let s = entropy(&gamma_a, &ctx)?;
        out.scalar(Observable::Entropy, "nats", &s);
        let bits = ctx.to_decimal(&Float::with_val(ctx.bits(), &s / ctx.ln2()));
        if let Some(row) = out.rows.get_mut(&Observable::Entropy).and_then(|r| r.last_mut()) {
            row.value_bits = bits;
        }
        entropy_value = Some(s);
    }
    if config.wants(Observable::Spectrum) {
        let sp = single_particle_spectrum(&gamma_a, &ctx)?;
        for (k, (nu, eps)) in sp.nu.iter().zip(&sp.eps).enumerate() {
            out.push(Observable::Spectrum, k.to_string(), String::new(), String::new(), "nu", nu);
            out.push(Observable::Spectrum, k.to_string(), String::new(), String::new(), "epsilon", eps);
        }
        for (k, level) in many_body_spectrum(&sp.eps, config.spectrum_count).iter().enumerate() {
            out.push(Observable::Spectrum, k.to_string(), String::new(), String::new(), "many_body", level);
        }
    }
    if [Observable::KMatrix, Observable::NnProfile, Observable::SymmetricHopping].iter().any(|&o| config.wants(o)) {
        let eh = entanglement_hamiltonian(&gamma_a, &ctx)?;
        if config.wants(Observable::KMatrix) {
            for c in 0..eh.w.dim() {
                for r in c + 1..eh.w.dim() {
                    out.push(Observable::KMatrix, r.to_string(), c.to_string(), String::new(), "w", eh.w.get(r, c));
                }
            }
        }
        if config.wants(Observable::NnProfile) {
            out.profile(Observable::NnProfile, &nn_profile(&eh.w), |m| m + 1);
        }
        if config.wants(Observable::SymmetricHopping) {
            let l = sub.length as i64;
            let profile = symmetric_hopping(&eh.w);
            for p in &profile.points {
                let (hi, lo) = (l + p.index - 1, l - p.index);
                out.push(Observable::SymmetricHopping, hi.to_string(), lo.to_string(), format!("{}", p.position), "signed", &p.value);
                out.push(
                    Observable::SymmetricHopping,
                    hi.to_string(),
                    lo.to_string(),
                    format!("{}", p.position),
                    "magnitude",
                    &Float::with_val(ctx.bits(), p.value.abs_ref()),
                );
            }
        }
    }
    if config.wants(Observable::Negativity) {
        let left = match config.negativity_cut.as_ref().expect("validated") {
            Cut::Center => sub.length / 2,
            Cut::Modes(m) => *m,
        };
        let e = log_negativity(&gamma_a, BipartitionSpec::new(left), &ctx)?;
        out.scalar(Observable::Negativity, "value", &e.value);
        out.scalar(Observable::Negativity, "raw", &e.raw);
    }
    if config.wants(Observable::Fidelity) {
        let partner = config.partner_defects.as_deref().expect("validated");
        let (partner_chain, _) = subsystem_chain(config, partner, point, &sub, &ctx)?;
        let partner_gs = chain_ground_state(&partner_chain, &ctx)?;
        let f = fidelity(&gamma_a, &restrict(&partner_gs.gamma, &sub)?, &ctx)?;
        out.scalar(Observable::Fidelity, "fidelity", &f.value);
        out.scalar(Observable::Fidelity, "infidelity", &f.infidelity);
    }
    if config.wants(Observable::CEff) {
        if let Some(j) = &point.j_star {
            out.scalar(Observable::CEff, "c_eff", &c_eff(&j.value(&ctx), &ctx)?);
        }
    }
    Ok(PointResult { rows: out.rows, dps: digits, attempts: 1, sector: SectorInfo::of(&gs), entropy: entropy_value, length: sub.length })
}

/// Runs one point at `ceil(ratio N)` digits, retrying once at `2N` on a
/// precision failure.
pub fn run_point(config: &ExperimentConfig, point: &SweepPoint) -> Result<PointStatus> {
    let first = config.digits_for(point.n_sites);
    let retry = (2 * point.n_sites as u32).max(crate::precision::MIN_DIGITS);
    match compute_point(config, point, first) {
        Ok(r) => Ok(PointStatus::Done(Box::new(r))),
        Err(e) if exit_code(&e) == exit::CONFIG => Err(e),
        Err(e) if retry > first => match compute_point(config, point, retry) {
            Ok(mut r) => {
                r.attempts = 2;
                Ok(PointStatus::Done(Box::new(r)))
            }
            Err(e2) if exit_code(&e2) == exit::CONFIG => Err(e2),
            Err(e2) => Ok(PointStatus::Failed { dps: retry, attempts: 2, reason: format!("{e}; retry: {e2}") }),
        },
        Err(e) => Ok(PointStatus::Failed { dps: first, attempts: 1, reason: e.to_string() }),
    }
}

/// Worker count from `WORKBENCH_MAX_THREADS`, defaulting to the available
/// parallelism.
pub fn max_threads() -> Result<usize> {
    match std::env::var(ENV_MAX_THREADS) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => Err(Error::config(ENV_MAX_THREADS, format!("`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Evaluates `f` on every item with at most `threads` workers; results keep
/// the input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, items.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Summary of a finished run.
#[derive(Debug)]
pub struct RunReport {
    pub points: usize,
    pub failed: usize,
    pub files: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 {
            exit::PRECISION
        } else {
            exit::OK
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn library_versions() -> String {
    use gmp_mpfr_sys::{gmp, mpfr};
    format!(
        "entham {}; mpfr {}.{}.{}; gmp {}.{}.{}",
        env!("CARGO_PKG_VERSION"),
        mpfr::VERSION_MAJOR,
        mpfr::VERSION_MINOR,
        mpfr::VERSION_PATCHLEVEL,
        gmp::VERSION,
        gmp::VERSION_MINOR,
        gmp::VERSION_PATCHLEVEL
    )
}

/// Executes a configuration and writes `<observable>.csv`, `timings.csv` and
/// `manifest.txt` into the output directory.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let threads = max_threads()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let points = sweep_points(config);
    let outcomes: Vec<(Result<PointStatus>, u128)> = parallel_map(&points, threads, |p| {
        let start = Instant::now();
        let r = run_point(config, p);
        (r, start.elapsed().as_millis())
    });

    let mut statuses = Vec::with_capacity(points.len());
    let mut timings = String::from("n,j_star,dps,attempts,wall_time_ms\n");
    for (point, (status, ms)) in points.iter().zip(outcomes) {
        let status = status?;
        let (dps, attempts) = match &status {
            PointStatus::Done(r) => (r.dps, r.attempts),
            PointStatus::Failed { dps, attempts, .. } => (*dps, *attempts),
        };
        let j = point.j_star.as_ref().map(|j| j.to_string()).unwrap_or_default();
        writeln!(timings, "{},{j},{dps},{attempts},{ms}", point.n_sites).expect("string write");
        statuses.push(status);
    }

    let mut files = Vec::new();
    for obs in config.observables.iter().copied().filter(|o| *o != Observable::ScalingFit) {
        let mut text = format!("{CSV_HEADER}\n");
        for status in &statuses {
            if let PointStatus::Done(r) = status {
                for rec in r.rows.get(&obs).into_iter().flatten() {
                    text.push_str(&rec.to_csv());
                    text.push('\n');
                }
            }
        }
        let name = format!("{}.csv", obs.name());
        write_file(&dir.join(&name), &text)?;
        files.push(name);
    }
    if config.wants(Observable::ScalingFit) {
        let text = scaling_fit_csv(config, &points, &statuses)?;
        write_file(&dir.join("scaling_fit.csv"), &text)?;
        files.push("scaling_fit.csv".into());
    }
    write_file(&dir.join("timings.csv"), &timings)?;
    files.push("timings.csv".into());

    let failed = statuses.iter().filter(|s| matches!(s, PointStatus::Failed { .. })).count();
    let manifest = manifest_text(config, &points, &statuses, &files, failed);
    write_file(&dir.join("manifest.txt"), &manifest)?;
    files.push("manifest.txt".into());
    Ok(RunReport { points: points.len(), failed, files })
}

fn scaling_fit_csv(config: &ExperimentConfig, points: &[SweepPoint], statuses: &[PointStatus]) -> Result<String> {
    let mut text = format!("{CSV_HEADER}\n");
    let groups: Vec<Option<Coupling>> =
        if config.j_star.is_empty() { vec![None] } else { config.j_star.iter().cloned().map(Some).collect() };
    let digits = config.n_values.iter().map(|&n| config.digits_for(n)).min().expect("n is non-empty");
    let ctx = PrecisionContext::new(digits)?;
    for j in groups {
        let mut samples = Vec::new();
        let mut dps = u32::MAX;
        for (p, s) in points.iter().zip(statuses) {
            if p.j_star != j {
                continue;
            }
            if let PointStatus::Done(r) = s {
                if let Some(e) = &r.entropy {
                    samples.push(EntropySample { n_sites: p.n_sites, length: r.length, entropy: e.clone() });
                    dps = dps.min(r.dps);
                }
            }
        }
        if samples.len() < 3 {
            continue;
        }
        let fit = fit_entropy_scaling(&samples, &ctx)?;
        let j_text = j.map(|j| j.to_string()).unwrap_or_default();
        for (kind, v) in [("slope", &fit.slope), ("intercept", &fit.intercept), ("residual", &fit.residual)] {
            let rec = SweepRecord {
                n: String::new(),
                l: String::new(),
                defects: String::new(),
                j_star: j_text.clone(),
                observable: Observable::ScalingFit.name(),
                row: String::new(),
                col: String::new(),
                position: String::new(),
                kind: kind.into(),
                value: ctx.to_decimal(v),
                value_bits: String::new(),
                dps: dps.min(digits),
            };
            text.push_str(&rec.to_csv());
            text.push('\n');
        }
    }
    Ok(text)
}

fn manifest_text(
    config: &ExperimentConfig,
    points: &[SweepPoint],
    statuses: &[PointStatus],
    files: &[String],
    failed: usize,
) -> String {
    let mut m = String::new();
    let timestamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    writeln!(m, "# run manifest").ok();
    writeln!(m, "timestamp_unix = {timestamp}").ok();
    writeln!(m, "versions = {}", library_versions()).ok();
    writeln!(m, "status = {}", if failed == 0 { "ok" } else { "precision_failure" }).ok();
    writeln!(m, "failed_points = {failed}").ok();
    writeln!(m, "files = {}", files.join(" ")).ok();
    writeln!(m, "boundary_sign = {}", config.boundary_sign).ok();
    writeln!(m, "sector = prod sigma^z = {}", -config.boundary_sign).ok();
    writeln!(m, "zero_mode_threshold = 10^-(dps/2)").ok();
    writeln!(m, "zero_mode_filling = Schur orientation; last zero-mode block reversed when the parity misses the sector").ok();
    writeln!(m, "precision_rule = max(30, ceil({} N)), retry at max(30, 2N)", config.precision_ratio).ok();
    writeln!(m, "\n[config]").ok();
    m.push_str(&config.echo_text());
    writeln!(m, "\n[points]").ok();
    for (p, s) in points.iter().zip(statuses) {
        let j = p.j_star.as_ref().map(|j| j.to_string()).unwrap_or_else(|| "-".into());
        match s {
            PointStatus::Done(r) => writeln!(
                m,
                "n={} j_star={j} dps={} attempts={} status=ok parity={} target_parity={} zero_modes={} flipped_block={}",
                p.n_sites,
                r.dps,
                r.attempts,
                r.sector.parity,
                r.sector.target_parity,
                r.sector.zero_modes,
                r.sector.flipped_block.map_or("none".into(), |b| b.to_string())
            ),
            PointStatus::Failed { dps, attempts, reason } => {
                writeln!(m, "n={} j_star={j} dps={dps} attempts={attempts} status=failed reason={reason}", p.n_sites)
            }
        }
        .ok();
    }
    m
}

/// Largest deviation between the Gaussian pipeline and spin exact
/// diagonalization for one observable.
#[derive(Clone, Debug)]
pub struct OracleDeviation {
    pub observable: &'static str,
    pub max_deviation: f64,
    pub compared: usize,
    pub skipped: usize,
}

pub struct OracleReport {
    pub deviations: Vec<OracleDeviation>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.deviations.iter().all(|d| d.max_deviation <= ORACLE_TOLERANCE)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            exit::OK
        } else {
            exit::ORACLE_MISMATCH
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::from("observable,max_deviation,compared,skipped\n");
        for d in &self.deviations {
            writeln!(s, "{},{:.3e},{},{}", d.observable, d.max_deviation, d.compared, d.skipped).ok();
        }
        s
    }
}

/// Per-point comparison of the Gaussian pipeline with spin ED.
#[derive(Clone, Debug)]
pub struct OracleComparison {
    pub energy: f64,
    pub entropy: f64,
    pub spectrum: f64,
    /// `None` when the Gaussian state could not be put in the requested sector.
    pub covariance: Option<f64>,
}

/// Compares energy, half-block entropy, the `levels` lowest many-body
/// entanglement energies and the covariance with spin ED in the chain's sector.
pub fn compare_with_oracle(chain: &ChainSpec, sub: &SubsystemSpec, levels: usize) -> Result<OracleComparison> {
    let ctx = oracle_context();
    let n = chain.n_sites();
    if n > ORACLE_MAX_SITES {
        return Err(Error::OracleRange { what: "oracle-check", max: ORACLE_MAX_SITES, got: n });
    }
    if sub.start + sub.length > n {
        return Err(Error::InvalidSubsystem("oracle comparison needs a block that does not wrap around site 0".into()));
    }
    let gs = chain_ground_state(chain, &ctx)?;
    let ed = spin_ed_ground(chain)?;
    let sector = ed.sector(chain.target_parity());

    let gaussian_energy = gs.energies.iter().fold(ctx.zero(), |a, e| a - e) / 2u32;
    let energy = Float::with_val(ctx.bits(), &gaussian_energy - &sector.energy).abs().to_f64();

    let gamma_a = restrict(&gs.gamma, sub)?;
    let s_gauss = entropy(&gamma_a, &ctx)?;
    let weights = rdm_spectrum(&sector.state, sub)?;
    let s_ed = shannon(&weights);
    let entropy_dev = Float::with_val(ctx.bits(), &s_gauss - &s_ed).abs().to_f64();

    let sp = single_particle_spectrum(&gamma_a, &ctx)?;
    let gauss_levels = many_body_spectrum(&sp.eps, levels);
    let top = weights[0].clone().ln();
    let mut spectrum = 0f64;
    for (k, level) in gauss_levels.iter().enumerate().take(weights.len()) {
        let ed_level = Float::with_val(ctx.bits(), &top - weights[k].clone().ln());
        spectrum = spectrum.max(Float::with_val(ctx.bits(), level - &ed_level).abs().to_f64());
    }
    let covariance = gs
        .parity_matched()
        .then(|| covariance_of(&sector.state).as_matrix().max_abs_diff(gs.gamma.as_matrix()).to_f64());
    Ok(OracleComparison { energy, entropy: entropy_dev, spectrum, covariance })
}

pub fn oracle_check(config: &ExperimentConfig) -> Result<OracleReport> {
    if let Some(&n) = config.n_values.iter().find(|&&n| n > ORACLE_MAX_SITES) {
        return Err(Error::OracleRange { what: "oracle-check", max: ORACLE_MAX_SITES, got: n });
    }
    let ctx = oracle_context();
    let threads = max_threads()?;
    let points = sweep_points(config);
    let results = parallel_map(&points, threads, |p| -> Result<OracleComparison> {
        let sub = config.subsystem(p.n_sites);
        let (chain, _) = subsystem_chain(config, &config.defects, p, &sub, &ctx)?;
        compare_with_oracle(&chain, &sub, config.spectrum_count)
    });
    let dev = |name: &'static str| OracleDeviation { observable: name, max_deviation: 0.0, compared: 0, skipped: 0 };
    let (mut energy, mut ent, mut levels_dev, mut cov) = (dev("energy"), dev("entropy"), dev("spectrum"), dev("covariance"));
    for r in results {
        let r = r?;
        for (d, v) in [(&mut energy, Some(r.energy)), (&mut ent, Some(r.entropy)), (&mut levels_dev, Some(r.spectrum)), (&mut cov, r.covariance)] {
            match v {
                Some(v) => {
                    d.max_deviation = d.max_deviation.max(v);
                    d.compared += 1;
                }
                None => d.skipped += 1,
            }
        }
    }
    Ok(OracleReport { deviations: vec![energy, ent, levels_dev, cov] })
}
