//! Line-oriented `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys marked
//! repeatable build lists in the order they appear.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use crate::chain::{antipodal_bond, boundary_bond, centered_defect_bond, Coupling, DefectSpec, SubsystemSpec};
use crate::error::{Error, Result};

/// Documentation of every key, printed by `print-config-schema`.
pub const SCHEMA: &str = "\
# key = value, one per line; '#' starts a comment line; [list] keys repeat.
n                 [list] even integer >= 8            sweep over ring sizes (required)
j_star            [list] decimal                      sweep over values substituted for `$j` in defects
subsystem_start   integer, default 0                  first site of the block A
subsystem_length  integer or `half`, default half     sites in A, 1 <= L < N
defect            [list] KIND[:STRENGTH]@PLACE        KIND = energy | antiperiodic | duality
                                                      STRENGTH = decimal or $j (energy only)
                                                      PLACE = center | antipodal | boundary | bond:K
boundary_sign     -1 or 1, default -1                 sign of the ring-closing Majorana coupling
precision_ratio   decimal in [1, 2], default 1.5      digits = max(30, ceil(ratio * N)); retried at 2N
observable        [list] one of:                      entropy, spectrum, k_matrix, nn_profile,
                                                      symmetric_hopping, negativity, fidelity,
                                                      c_eff, scaling_fit
spectrum_count    integer >= 1, default 10            many-body levels for `spectrum`
negativity_cut    integer or `center`                 modes of A left of the cut (required by negativity)
partner_defect    [list] KIND[:STRENGTH]@PLACE        defects of the reference state for `fidelity`
                                                      (the key `partner_defect = none` gives a clean ring)
output_dir        path                                directory for CSV files and the manifest (required)
";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observable {
    Entropy,
    Spectrum,
    KMatrix,
    NnProfile,
    SymmetricHopping,
    Negativity,
    Fidelity,
    CEff,
    ScalingFit,
}

impl Observable {
    pub const ALL: [Observable; 9] = [
        Observable::Entropy,
        Observable::Spectrum,
        Observable::KMatrix,
        Observable::NnProfile,
        Observable::SymmetricHopping,
        Observable::Negativity,
        Observable::Fidelity,
        Observable::CEff,
        Observable::ScalingFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Entropy => "entropy",
            Observable::Spectrum => "spectrum",
            Observable::KMatrix => "k_matrix",
            Observable::NnProfile => "nn_profile",
            Observable::SymmetricHopping => "symmetric_hopping",
            Observable::Negativity => "negativity",
            Observable::Fidelity => "fidelity",
            Observable::CEff => "c_eff",
            Observable::ScalingFit => "scaling_fit",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    Center,
    Antipodal,
    Boundary,
    Bond(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strength {
    Fixed(Coupling),
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefectTemplateKind {
    Energy(Strength),
    Antiperiodic,
    Duality,
}

/// A defect whose bond and strength are resolved per sweep point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectTemplate {
    pub kind: DefectTemplateKind,
    pub place: Placement,
    text: String,
}

impl fmt::Display for DefectTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl DefectTemplate {
    pub fn parse(field: &str, text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, place) =
            text.split_once('@').ok_or_else(|| Error::config(field, format!("`{text}` lacks `@PLACE`")))?;
        let place = match place.trim() {
            "center" => Placement::Center,
            "antipodal" => Placement::Antipodal,
            "boundary" => Placement::Boundary,
            other => {
                let k = other
                    .strip_prefix("bond:")
                    .and_then(|k| k.trim().parse().ok())
                    .ok_or_else(|| Error::config(field, format!("unknown placement `{other}`")))?;
                Placement::Bond(k)
            }
        };
        let (kind, strength) = match head.split_once(':') {
            Some((k, s)) => (k.trim(), Some(s.trim())),
            None => (head.trim(), None),
        };
        let kind = match (kind, strength) {
            ("energy", Some("$j")) => DefectTemplateKind::Energy(Strength::Sweep),
            ("energy", Some(s)) => DefectTemplateKind::Energy(Strength::Fixed(
                Coupling::new(s).map_err(|_| Error::config(field, format!("strength `{s}` is not a decimal")))?,
            )),
            ("energy", None) => return Err(Error::config(field, "energy defects need a strength, e.g. energy:0.2@center")),
            ("antiperiodic", None) => DefectTemplateKind::Antiperiodic,
            ("duality", None) => DefectTemplateKind::Duality,
            ("antiperiodic" | "duality", Some(_)) => {
                return Err(Error::config(field, format!("`{kind}` defects take no strength")))
            }
            (other, _) => return Err(Error::config(field, format!("unknown defect kind `{other}`"))),
        };
        Ok(Self { kind, place, text: text.to_string() })
    }

    pub fn uses_sweep(&self) -> bool {
        matches!(self.kind, DefectTemplateKind::Energy(Strength::Sweep))
    }

    pub fn resolve(&self, n_sites: usize, sub: &SubsystemSpec, j_star: Option<&Coupling>) -> Result<DefectSpec> {
        let bond = match self.place {
            Placement::Center => centered_defect_bond(sub, n_sites)?,
            Placement::Antipodal => antipodal_bond(sub, n_sites)?,
            Placement::Boundary => boundary_bond(sub, n_sites)?,
            Placement::Bond(k) => k,
        };
        Ok(match &self.kind {
            DefectTemplateKind::Energy(Strength::Fixed(c)) => DefectSpec::energy(c.clone(), bond),
            DefectTemplateKind::Energy(Strength::Sweep) => {
                let j = j_star.ok_or_else(|| Error::config("j_star", "a `$j` defect needs j_star values"))?;
                DefectSpec::energy(j.clone(), bond)
            }
            DefectTemplateKind::Antiperiodic => DefectSpec::antiperiodic(bond),
            DefectTemplateKind::Duality => DefectSpec::duality(bond),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsystemLength {
    Half,
    Sites(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cut {
    Center,
    Modes(usize),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub j_star: Vec<Coupling>,
    pub subsystem_start: usize,
    pub subsystem_length: SubsystemLength,
    pub defects: Vec<DefectTemplate>,
    pub boundary_sign: i32,
    /// Kept as text so the digit rule is exact.
    pub precision_ratio: String,
    pub observables: BTreeSet<Observable>,
    pub spectrum_count: usize,
    pub negativity_cut: Option<Cut>,
    pub partner_defects: Option<Vec<DefectTemplate>>,
    pub output_dir: PathBuf,
    /// Normalized `key = value` lines, in input order.
    pub echo: Vec<(String, String)>,
}

impl ExperimentConfig {
    pub fn subsystem(&self, n_sites: usize) -> SubsystemSpec {
        let length = match self.subsystem_length {
            SubsystemLength::Half => n_sites / 2,
            SubsystemLength::Sites(l) => l,
        };
        SubsystemSpec::new(self.subsystem_start, length)
    }

    /// `max(30, ceil(ratio * N))`.
    pub fn digits_for(&self, n_sites: usize) -> u32 {
        let (num, den) = decimal_fraction(&self.precision_ratio).expect("validated at parse time");
        let d = (num * n_sites as u64).div_ceil(den);
        (d as u32).max(crate::precision::MIN_DIGITS)
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n_values = Vec::new();
        let mut j_star = Vec::new();
        let mut subsystem_start = None;
        let mut subsystem_length = None;
        let mut defects = Vec::new();
        let mut boundary_sign = None;
        let mut precision_ratio = None;
        let mut observables = BTreeSet::new();
        let mut spectrum_count = None;
        let mut negativity_cut = None;
        let mut partner_defects: Option<Vec<DefectTemplate>> = None;
        let mut output_dir = None;
        let mut echo = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            echo.push((key.to_string(), value.to_string()));
            let once = |slot: bool| -> Result<()> {
                if slot {
                    Err(Error::config(key, "given more than once"))
                } else {
                    Ok(())
                }
            };
            match key {
                "n" => n_values.push(parse_usize(key, value)?),
                "j_star" => j_star.push(Coupling::new(value).map_err(|_| Error::config(key, format!("`{value}` is not a decimal")))?),
                "subsystem_start" => {
                    once(subsystem_start.is_some())?;
                    subsystem_start = Some(parse_usize(key, value)?);
                }
                "subsystem_length" => {
                    once(subsystem_length.is_some())?;
                    subsystem_length =
                        Some(if value == "half" { SubsystemLength::Half } else { SubsystemLength::Sites(parse_usize(key, value)?) });
                }
                "defect" => defects.push(DefectTemplate::parse(key, value)?),
                "boundary_sign" => {
                    once(boundary_sign.is_some())?;
                    boundary_sign = Some(match value {
                        "1" | "+1" => 1,
                        "-1" => -1,
                        _ => return Err(Error::config(key, format!("must be 1 or -1, got `{value}`"))),
                    });
                }
                "precision_ratio" => {
                    once(precision_ratio.is_some())?;
                    let (num, den) = decimal_fraction(value)
                        .ok_or_else(|| Error::config(key, format!("`{value}` is not a plain decimal")))?;
                    if num < den || num > 2 * den {
                        return Err(Error::config(key, format!("{value} is outside [1, 2]")));
                    }
                    precision_ratio = Some(value.to_string());
                }
                "observable" => {
                    let o = Observable::parse(value).ok_or_else(|| Error::config(key, format!("unknown observable `{value}`")))?;
                    observables.insert(o);
                }
                "spectrum_count" => {
                    once(spectrum_count.is_some())?;
                    let c = parse_usize(key, value)?;
                    if c == 0 {
                        return Err(Error::config(key, "must be at least 1"));
                    }
                    spectrum_count = Some(c);
                }
                "negativity_cut" => {
                    once(negativity_cut.is_some())?;
                    negativity_cut = Some(if value == "center" { Cut::Center } else { Cut::Modes(parse_usize(key, value)?) });
                }
                "partner_defect" => {
                    let list = partner_defects.get_or_insert_with(Vec::new);
                    if value != "none" {
                        list.push(DefectTemplate::parse(key, value)?);
                    }
                }
                "output_dir" => {
                    once(output_dir.is_some())?;
                    output_dir = Some(PathBuf::from(value));
                }
                other => return Err(Error::config(other, "unknown key")),
            }
        }

        if n_values.is_empty() {
            return Err(Error::config("n", "at least one ring size is required"));
        }
        for &n in &n_values {
            if n < 8 || n % 2 != 0 {
                return Err(Error::config("n", format!("{n} is not an even integer >= 8")));
            }
        }
        let output_dir = output_dir.ok_or_else(|| Error::config("output_dir", "required"))?;
        if observables.is_empty() {
            return Err(Error::config("observable", "at least one observable is required"));
        }
        let sweeps = defects.iter().chain(partner_defects.iter().flatten()).any(DefectTemplate::uses_sweep);
        if sweeps && j_star.is_empty() {
            return Err(Error::config("j_star", "defects use `$j` but no j_star values are given"));
        }
        if !sweeps && !j_star.is_empty() && !observables.contains(&Observable::CEff) {
            return Err(Error::config("j_star", "values given but no defect uses `$j`"));
        }
        if observables.contains(&Observable::Negativity) && negativity_cut.is_none() {
            return Err(Error::config("negativity_cut", "required by observable negativity"));
        }
        if observables.contains(&Observable::Fidelity) && partner_defects.is_none() {
            return Err(Error::config("partner_defect", "required by observable fidelity"));
        }
        if observables.contains(&Observable::CEff) && j_star.is_empty() {
            return Err(Error::config("j_star", "required by observable c_eff"));
        }
        if observables.contains(&Observable::ScalingFit) {
            if !observables.contains(&Observable::Entropy) {
                return Err(Error::config("observable", "scaling_fit needs entropy"));
            }
            if n_values.len() < 3 {
                return Err(Error::config("n", "scaling_fit needs at least three ring sizes"));
            }
        }
        let config = Self {
            n_values,
            j_star,
            subsystem_start: subsystem_start.unwrap_or(0),
            subsystem_length: subsystem_length.unwrap_or(SubsystemLength::Half),
            defects,
            boundary_sign: boundary_sign.unwrap_or(-1),
            precision_ratio: precision_ratio.unwrap_or_else(|| "1.5".into()),
            observables,
            spectrum_count: spectrum_count.unwrap_or(10),
            negativity_cut,
            partner_defects,
            output_dir,
            echo,
        };
        for &n in &config.n_values {
            let sub = config.subsystem(n);
            if sub.length == 0 || sub.length >= n || sub.start >= n {
                return Err(Error::config("subsystem_length", format!("block {sub:?} does not fit a ring of {n}")));
            }
            if let Some(Cut::Modes(c)) = config.negativity_cut {
                if c == 0 || c >= sub.length {
                    return Err(Error::config("negativity_cut", format!("{c} is not inside a block of {} sites", sub.length)));
                }
            }
            if config.negativity_cut == Some(Cut::Center) && sub.length < 2 {
                return Err(Error::config("negativity_cut", "block too short to cut"));
            }
            for t in config.defects.iter().chain(config.partner_defects.iter().flatten()) {
                if t.place == Placement::Center && sub.length % 2 != 0 {
                    return Err(Error::config("defect", format!("`{t}` needs an even block length")));
                }
                if let Placement::Bond(k) = t.place {
                    if k >= n {
                        return Err(Error::config("defect", format!("bond {k} out of range for N = {n}")));
                    }
                }
            }
        }
        Ok(config)
    }

    /// Normalized echo of the parsed input, one `key = value` per line.
    pub fn echo_text(&self) -> String {
        self.echo.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn parse_usize(field: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| Error::config(field, format!("`{value}` is not a non-negative integer")))
}

/// `"1.25"` as `(125, 100)`.
fn decimal_fraction(text: &str) -> Option<(u64, u64)> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 9 {
        return None;
    }
    let den = 10u64.pow(frac.len() as u32);
    let num = format!("{int}{frac}").parse::<u64>().ok()?;
    Some((num, den))
}
