//! Post-processing of entanglement Hamiltonians into coupling profiles, plus
//! the boundary-defect central charge and entropy-scaling fits.

use rug::Float;

use crate::error::{Error, Result};
use crate::linalg::{dilog, SkewMatrix};
use crate::precision::PrecisionContext;

/// Which Majorana pair an entry couples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BondKind {
    /// `(2j, 2j+1)`, within a site.
    Field,
    /// `(2j+1, 2j+2)`, across a bond.
    Hopping,
    /// Mirror pair about the block centre.
    Symmetric,
}

impl BondKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BondKind::Field => "field",
            BondKind::Hopping => "hopping",
            BondKind::Symmetric => "symmetric",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProfilePoint {
    /// Majorana index of the entry's lower member, or `m` for mirror pairs.
    pub index: i64,
    /// `index` for nearest-neighbour profiles, `m / L` for mirror pairs.
    pub position: f64,
    pub kind: BondKind,
    /// Entry `W[hi][lo]`, oriented like the Hamiltonian's couplings.
    pub value: Float,
}

/// Points sorted by position.
#[derive(Clone, Debug)]
pub struct CouplingProfile {
    pub label: String,
    pub points: Vec<ProfilePoint>,
}

impl CouplingProfile {
    pub fn value_at(&self, index: i64) -> Option<&Float> {
        self.points.iter().find(|p| p.index == index).map(|p| &p.value)
    }
}

/// `W[m+1][m]` for `m = 0 .. 2L-2`.
pub fn nn_profile(w: &SkewMatrix) -> CouplingProfile {
    let points = (0..w.dim().saturating_sub(1))
        .map(|m| ProfilePoint {
            index: m as i64,
            position: m as f64,
            kind: if m % 2 == 0 { BondKind::Field } else { BondKind::Hopping },
            value: w.get(m + 1, m).clone(),
        })
        .collect();
    CouplingProfile { label: "nn".into(), points }
}

/// Mirror pairs `(L-m, L+m-1)` of the `2L` Majoranas for `m = 1..L`, valued
/// `W[L+m-1][L-m]` at position `m / L`. Pair `m = 1` is the central bond.
pub fn symmetric_hopping(w: &SkewMatrix) -> CouplingProfile {
    let l = w.dim() / 2;
    let points = (1..=l)
        .map(|m| ProfilePoint {
            index: m as i64,
            position: m as f64 / l as f64,
            kind: BondKind::Symmetric,
            value: w.get(l + m - 1, l - m).clone(),
        })
        .collect();
    CouplingProfile { label: "symmetric".into(), points }
}

/// Nearest-neighbour profile of `W_1 - W_2` with indices shifted so that the
/// entry `center` sits at 0.
pub fn profile_diff(w1: &SkewMatrix, w2: &SkewMatrix, center: i64) -> Result<CouplingProfile> {
    if w1.dim() != w2.dim() {
        return Err(Error::Dimension(format!("profile_diff of {}- and {}-dimensional matrices", w1.dim(), w2.dim())));
    }
    let diff = SkewMatrix::from_lower(&w1.as_matrix().sub(w2.as_matrix())?)?;
    let mut profile = nn_profile(&diff);
    for p in &mut profile.points {
        p.index -= center;
        p.position = p.index as f64;
    }
    profile.label = "nn_diff".into();
    Ok(profile)
}

/// `s = |sin(2 arccot J*)| = 2|J*| / (1 + J*^2)`.
pub fn transmission(j_star: &Float, ctx: &PrecisionContext) -> Float {
    let prec = ctx.bits();
    let num = Float::with_val(prec, &*j_star.as_abs()) * 2u32;
    let den = Float::with_val(prec, j_star.clone().square()) + 1u32;
    num / den
}

/// Effective central charge of an interval ending on a defect of strength `J*`:
/// `c(s) = s/3 - 1/3 - 3/pi^2 [(s+1) ln(s+1) ln s + (s-1) Li2(1-s) + (s+1) Li2(-s)]`.
/// The `ln s` term is dropped for `s < 10^-(digits/2)`, its limit being 0.
pub fn c_eff(j_star: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let s = transmission(j_star, ctx);
    c_eff_of_transmission(&s, ctx)
}

pub fn c_eff_of_transmission(s: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let prec = ctx.bits();
    if s.is_sign_negative() && !s.is_zero() || *s > 1u32 {
        return Err(Error::Domain { function: "c_eff", value: ctx.to_decimal(s) });
    }
    let sp1 = Float::with_val(prec, s + 1u32);
    let sm1 = Float::with_val(prec, s - 1u32);
    let mut bracket = Float::with_val(prec, &sm1 * dilog(&Float::with_val(prec, 1u32 - s), ctx)?);
    bracket += Float::with_val(prec, &sp1 * dilog(&Float::with_val(prec, -s), ctx)?);
    if *s >= ctx.pow10(-(ctx.digits() as i32 / 2)) {
        bracket += Float::with_val(prec, &sp1 * sp1.clone().ln()) * s.clone().ln();
    }
    let third = ctx.ratio(1, 3);
    let pi2 = ctx.pi().square();
    let c = Float::with_val(prec, s * &third) - &third - bracket * 3u32 / pi2;
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct ScalingFit {
    pub slope: Float,
    pub intercept: Float,
    /// Largest absolute deviation from the fitted line.
    pub residual: Float,
}

/// One entropy sample `S(N, L)`.
#[derive(Clone, Debug)]
pub struct EntropySample {
    pub n_sites: usize,
    pub length: usize,
    pub entropy: Float,
}

/// `ln[(N/pi) sin(pi L / N)]`.
pub fn chord_log(n_sites: usize, length: usize, ctx: &PrecisionContext) -> Float {
    let prec = ctx.bits();
    let arg = ctx.pi() * Float::with_val(prec, length) / Float::with_val(prec, n_sites);
    let chord = Float::with_val(prec, n_sites) / ctx.pi() * arg.sin();
    chord.ln()
}

/// Ordinary least squares of `S` against the chord log. Samples are sorted by
/// `(N, L)` first so the result does not depend on their order.
pub fn fit_entropy_scaling(samples: &[EntropySample], ctx: &PrecisionContext) -> Result<ScalingFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} samples, need at least 3", samples.len())));
    }
    let prec = ctx.bits();
    let mut sorted: Vec<&EntropySample> = samples.iter().collect();
    sorted.sort_by_key(|s| (s.n_sites, s.length));
    let xs: Vec<Float> = sorted.iter().map(|s| chord_log(s.n_sites, s.length, ctx)).collect();
    let ys: Vec<Float> = sorted.iter().map(|s| Float::with_val(prec, &s.entropy)).collect();
    let tie = ctx.pow10(-(ctx.digits() as i32 / 2));
    for i in 0..xs.len() {
        for j in 0..i {
            if Float::with_val(prec, &xs[i] - &xs[j]).abs() < tie {
                return Err(Error::DegenerateFit(format!(
                    "samples (N={}, L={}) and (N={}, L={}) share an abscissa",
                    sorted[j].n_sites, sorted[j].length, sorted[i].n_sites, sorted[i].length
                )));
            }
        }
    }
    let n = Float::with_val(prec, xs.len());
    let mean_x = xs.iter().fold(ctx.zero(), |a, x| a + x) / &n;
    let mean_y = ys.iter().fold(ctx.zero(), |a, y| a + y) / &n;
    let mut sxx = ctx.zero();
    let mut sxy = ctx.zero();
    for (x, y) in xs.iter().zip(&ys) {
        let dx = Float::with_val(prec, x - &mean_x);
        let dy = Float::with_val(prec, y - &mean_y);
        sxy += Float::with_val(prec, &dx * &dy);
        sxx += dx.square();
    }
    let slope = sxy / sxx;
    let intercept = mean_y - Float::with_val(prec, &slope * &mean_x);
    let mut residual = ctx.zero();
    for (x, y) in xs.iter().zip(&ys) {
        let fit = Float::with_val(prec, &slope * x) + &intercept;
        let d = Float::with_val(prec, y - fit).abs();
        if d > residual {
            residual = d;
        }
    }
    Ok(ScalingFit { slope, intercept, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn c_eff_endpoints() {
        let ctx = ctx();
        let half = ctx.ratio(1, 2);
        for j in [1, -1] {
            let c = c_eff(&ctx.int(j), &ctx).unwrap();
            assert!(Float::with_val(ctx.bits(), c - &half).abs() < ctx.pow10(-35));
        }
        let c0 = c_eff(&ctx.zero(), &ctx).unwrap();
        assert!(Float::with_val(ctx.bits(), c0 - ctx.ratio(1, 6)).abs() < ctx.pow10(-35));
    }

    #[test]
    fn c_eff_is_even_and_rises_past_its_dip() {
        let ctx = ctx();
        let j = ctx.float(0.37);
        let a = c_eff(&j, &ctx).unwrap();
        let b = c_eff(&Float::with_val(ctx.bits(), -&j), &ctx).unwrap();
        assert_eq!(a, b);
        // The formula dips to about 0.16116 near s = 0.077 before rising.
        let dip = c_eff_of_transmission(&ctx.ratio(77, 1000), &ctx).unwrap();
        assert!(dip < c_eff_of_transmission(&ctx.zero(), &ctx).unwrap());
        let mut prev = c_eff_of_transmission(&ctx.ratio(8, 100), &ctx).unwrap();
        for k in 9..=100 {
            let c = c_eff_of_transmission(&ctx.ratio(k, 100), &ctx).unwrap();
            assert!(c > prev, "not increasing at s = {k}/100");
            prev = c;
        }
    }

    #[test]
    fn exact_line_is_recovered() {
        let ctx = ctx();
        let samples: Vec<EntropySample> = [(16, 8), (32, 16), (64, 32), (64, 16)]
            .iter()
            .map(|&(n, l)| EntropySample {
                n_sites: n,
                length: l,
                entropy: chord_log(n, l, &ctx) * ctx.ratio(1, 3) + ctx.ratio(1, 7),
            })
            .collect();
        let fit = fit_entropy_scaling(&samples, &ctx).unwrap();
        assert!(Float::with_val(ctx.bits(), &fit.slope - ctx.ratio(1, 3)).abs() < ctx.pow10(-30));
        assert!(fit.residual < ctx.pow10(-30));
        let mut reversed = samples.clone();
        reversed.reverse();
        assert_eq!(fit_entropy_scaling(&reversed, &ctx).unwrap().slope, fit.slope);
    }

    #[test]
    fn duplicate_abscissae_are_rejected() {
        let ctx = ctx();
        let s = |n, l| EntropySample { n_sites: n, length: l, entropy: ctx.one() };
        assert!(fit_entropy_scaling(&[s(16, 8), s(16, 8), s(32, 8)], &ctx).is_err());
        assert!(fit_entropy_scaling(&[s(16, 8), s(32, 8)], &ctx).is_err());
    }

    #[test]
    fn profiles_of_zero_are_zero() {
        let ctx = ctx();
        let w = SkewMatrix::zeros(8, ctx.bits()).unwrap();
        assert!(nn_profile(&w).points.iter().all(|p| p.value.is_zero()));
        let sym = symmetric_hopping(&w);
        assert_eq!(sym.points.len(), 4);
        assert_eq!(sym.points[3].position, 1.0);
        let d = profile_diff(&w, &w, 3).unwrap();
        assert_eq!(d.points[0].index, -3);
    }
}
