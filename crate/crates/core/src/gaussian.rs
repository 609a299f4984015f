//! Gaussian (free-fermion) states described by their Majorana covariance
//! `Gamma`, with `<gamma_m gamma_n> = delta_mn + i Gamma_mn`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rug::Float;

use crate::chain::{majorana_hamiltonian, ChainSpec, SubsystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{invert_complex, log_fn, matrix_function, skew_schur, CMatrix, Matrix, SchurForm, SkewMatrix};
use crate::precision::PrecisionContext;

/// Covariance of a pure Gaussian ground state plus bookkeeping about how the
/// zero-mode ambiguity was resolved.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub gamma: SkewMatrix,
    /// Single-particle energies (Schur values of `S`), decreasing.
    pub energies: Vec<Float>,
    /// Number of blocks with energy below `10^-(digits/2)`.
    pub zero_modes: usize,
    /// `prod sigma^z` of the constructed state, `(-1)^N Pf(Gamma)`.
    pub parity: i32,
    /// Parity that was requested, if any.
    pub target_parity: Option<i32>,
    /// Zero-mode block whose filling was reversed to reach the target parity.
    pub flipped_block: Option<usize>,
}

impl GroundState {
    pub fn parity_matched(&self) -> bool {
        self.target_parity.is_none_or(|p| p == self.parity)
    }

    pub fn n_sites(&self) -> usize {
        self.gamma.dim() / 2
    }
}

/// Ground state of `H = (i/4) gamma^T S gamma`: `Gamma = U (+)[[0,-1],[1,0]] U^T`.
///
/// Zero modes are filled in the orientation delivered by the Schur form. If
/// `target_parity` is given and the resulting parity differs, the filling of
/// the last zero-mode block is reversed. Without zero modes the parity is
/// fixed and a mismatch is only recorded.
pub fn ground_state_covariance(s: &SkewMatrix, target_parity: Option<i32>, ctx: &PrecisionContext) -> Result<GroundState> {
    let mut form = skew_schur(s, ctx)?;
    let zero_tol = ctx.pow10(-(ctx.digits() as i32 / 2));
    let zero_modes = form.block_values.iter().filter(|e| **e < zero_tol).count();
    let mut parity = form.det_sign();
    let mut flipped_block = None;
    if let Some(target) = target_parity {
        if parity != target && zero_modes > 0 {
            let k = form.blocks() - 1;
            form.swap_block(k);
            parity = -parity;
            flipped_block = Some(k);
        }
    }
    let ones = vec![ctx.one(); form.blocks()];
    let gamma = form.assemble(&ones);
    Ok(GroundState { gamma, energies: form.block_values, zero_modes, parity, target_parity, flipped_block })
}

/// Ground state of a chain in the parity sector selected by its boundary sign.
pub fn chain_ground_state(chain: &ChainSpec, ctx: &PrecisionContext) -> Result<GroundState> {
    let s = majorana_hamiltonian(chain, ctx)?;
    ground_state_covariance(&s, Some(chain.target_parity()), ctx)
}

/// Covariance of the block of sites `sub`, indexed locally `0..2L`.
pub fn restrict(gamma: &SkewMatrix, sub: &SubsystemSpec) -> Result<SkewMatrix> {
    let n = gamma.dim() / 2;
    sub.validate(n)?;
    gamma.restrict(&sub.majorana_indices(n))
}

/// `Gamma_A = U (+)[[0,-nu],[nu,0]] U^T` and `W = U (+)[[0,-e],[e,0]] U^T`
/// with `e = log((1+nu)/(1-nu))`, so that `rho_A ~ exp(-(i/4) gamma^T W gamma)`.
#[derive(Clone, Debug)]
pub struct EntanglementHamiltonian {
    pub w: SkewMatrix,
    /// Occupation-like values `nu_k`, decreasing.
    pub nu: Vec<Float>,
    /// Single-particle entanglement energies, matching `nu`.
    pub eps: Vec<Float>,
    pub schur: SchurForm,
}

/// Fails with a precision-escalation error if any `1 - nu_k` is below
/// `10^-(digits-8)`, where `eps_k` would be dominated by roundoff.
pub fn entanglement_hamiltonian(gamma_a: &SkewMatrix, ctx: &PrecisionContext) -> Result<EntanglementHamiltonian> {
    let schur = skew_schur(gamma_a, ctx)?;
    let guard = ctx.pow10(-(ctx.digits() as i32 - 8));
    let mut eps = Vec::with_capacity(schur.blocks());
    for (k, nu) in schur.block_values.iter().enumerate() {
        let gap = Float::with_val(ctx.bits(), 1u32 - nu);
        if gap < guard {
            return Err(Error::PrecisionEscalation {
                reason: format!("1 - nu_{k} = {} is below 1e-{}", crate::precision::to_decimal(&gap, 6), ctx.digits() - 8),
            });
        }
        eps.push(epsilon_of(nu, ctx));
    }
    let w = schur.assemble(&eps);
    Ok(EntanglementHamiltonian { w, nu: schur.block_values.clone(), eps, schur })
}

fn epsilon_of(nu: &Float, ctx: &PrecisionContext) -> Float {
    let p = Float::with_val(ctx.bits(), 1u32 + nu);
    let q = Float::with_val(ctx.bits(), 1u32 - nu);
    (p / q).ln()
}

/// Single-particle entanglement spectrum with `nu` descending and `eps`
/// aligned to it.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub nu: Vec<Float>,
    /// `log((1+nu)/(1-nu))`; `+inf` where `nu` reached 1.
    pub eps: Vec<Float>,
    /// Largest distance by which a value was moved into `[0, 1]`.
    pub clamp: Float,
}

/// `nu` is clamped to `[0, 1]`, so this never fails on roundoff.
pub fn single_particle_spectrum(gamma_a: &SkewMatrix, ctx: &PrecisionContext) -> Result<SpectrumResult> {
    let schur = skew_schur(gamma_a, ctx)?;
    let mut clamp = ctx.zero();
    let mut nu = Vec::with_capacity(schur.blocks());
    let mut eps = Vec::with_capacity(schur.blocks());
    for raw in &schur.block_values {
        let v = raw.clone().clamp(&0u32, &1u32);
        let moved = Float::with_val(ctx.bits(), raw - &v).abs();
        if moved > clamp {
            clamp = moved;
        }
        eps.push(if v == 1u32 { Float::with_val(ctx.bits(), rug::float::Special::Infinity) } else { epsilon_of(&v, ctx) });
        nu.push(v);
    }
    Ok(SpectrumResult { nu, eps, clamp })
}

/// The `count` smallest subset sums of `eps` (each occupation pattern is one
/// many-body level), ascending, starting with 0.
pub fn many_body_spectrum(eps: &[Float], count: usize) -> Vec<Float> {
    let mut sorted: Vec<&Float> = eps.iter().filter(|e| e.is_finite()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let prec = eps.first().map_or(64, |e| e.prec());
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(Float::new(prec));
    let mut heap = BinaryHeap::new();
    if let Some(first) = sorted.first() {
        heap.push(Candidate { sum: (*first).clone(), last: 0 });
    }
    // Successors of a subset whose largest index is i: add i+1, or move i to i+1.
    while out.len() < count {
        let Some(Candidate { sum, last }) = heap.pop() else { break };
        if last + 1 < sorted.len() {
            let next = sorted[last + 1];
            heap.push(Candidate { sum: Float::with_val(prec, &sum + next), last: last + 1 });
            let moved = Float::with_val(prec, &sum - sorted[last]) + next;
            heap.push(Candidate { sum: moved, last: last + 1 });
        }
        out.push(sum);
    }
    out
}

struct Candidate {
    sum: Float,
    last: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed so that BinaryHeap pops the smallest sum first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.sum.partial_cmp(&self.sum).unwrap_or(Ordering::Equal).then(other.last.cmp(&self.last))
    }
}

/// Independent route to the entanglement Hamiltonian through
/// `K = -log(2 G^-1 - 1)` with `G = 1 + i Gamma_A`. Returns `K`, which should
/// equal `i W`.
pub fn entanglement_hamiltonian_via_inverse(gamma_a: &SkewMatrix, ctx: &PrecisionContext) -> Result<CMatrix> {
    let n = gamma_a.dim();
    let prec = ctx.bits();
    let g = CMatrix { re: Matrix::identity(n, prec), im: gamma_a.as_matrix().with_prec(prec) };
    let ginv = invert_complex(&g, ctx)?;
    let two = Float::with_val(prec, 2);
    let mut arg = CMatrix { re: ginv.re.scale(&two), im: ginv.im.scale(&two) };
    for i in 0..n {
        *arg.re.get_mut(i, i) -= 1u32;
    }
    let arg = arg.hermitian_part();
    let l = matrix_function(&arg, log_fn, "log", ctx)?;
    Ok(CMatrix { re: l.re.neg(), im: l.im.neg() })
}

/// Gaussian state with Schur values `nu` in a random orthonormal frame drawn
/// from `rng` (the rotation of a random antisymmetric matrix).
pub fn random_covariance(nu: &[f64], rng: &mut impl rand::Rng, ctx: &PrecisionContext) -> Result<SkewMatrix> {
    let dim = 2 * nu.len();
    let mut s = SkewMatrix::zeros(dim, ctx.bits())?;
    for i in 0..dim {
        for j in 0..i {
            s.set(i, j, ctx.float(rng.gen_range(-1.0..1.0)));
        }
    }
    let form = skew_schur(&s, ctx)?;
    let values: Vec<Float> = nu.iter().map(|&v| ctx.float(v)).collect();
    Ok(form.assemble(&values))
}
