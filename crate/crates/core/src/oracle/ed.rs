//! Exact diagonalization of spin rings and quadratic Majorana Hamiltonians,
//! one `prod sigma^z` parity sector at a time.

use rug::Float;

use super::pauli::{phase_value, PauliString};
use super::sparse::{ground_pair, CVector, PauliTerm, SectorOperator};
use crate::chain::{ChainSpec, SubsystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, Matrix, SkewMatrix};
use crate::precision::PrecisionContext;

pub const MAX_SPIN_SITES: usize = 14;
pub const MAX_FERMION_MODES: usize = 8;
/// Fixed working precision of every oracle computation.
pub const ORACLE_DIGITS: u32 = 50;

pub fn oracle_context() -> PrecisionContext {
    PrecisionContext::new(ORACLE_DIGITS).expect("50 digits is valid")
}

/// State on `n_sites` qubits; basis state `s` has site `j` at bit `j`.
#[derive(Clone, Debug)]
pub struct DenseState {
    pub n_sites: usize,
    pub amplitudes: CVector,
}

impl DenseState {
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// `<psi| P |psi>` for a Pauli string `P`.
    pub fn expectation(&self, p: PauliString) -> (Float, Float) {
        let prec = self.amplitudes.re[0].prec();
        let mut re = Float::new(prec);
        let mut im = Float::new(prec);
        for s in 0..self.dim() {
            let (phase, t) = p.apply(s as u64);
            let t = t as usize;
            let (pr, pi) = phase_value(phase);
            // conj(psi_t) * i^phase * psi_s
            let (ar, ai) = (&self.amplitudes.re[t], &self.amplitudes.im[t]);
            let (br, bi) = (&self.amplitudes.re[s], &self.amplitudes.im[s]);
            let xr = Float::with_val(prec, ar * br) + Float::with_val(prec, ai * bi);
            let xi = Float::with_val(prec, ar * bi) - Float::with_val(prec, ai * br);
            re += Float::with_val(prec, &xr * pr) - Float::with_val(prec, &xi * pi);
            im += Float::with_val(prec, &xr * pi) + Float::with_val(prec, &xi * pr);
        }
        (re, im)
    }
}

/// Lowest state of one parity sector.
#[derive(Clone, Debug)]
pub struct SectorGround {
    /// Eigenvalue of `prod sigma^z`.
    pub parity: i32,
    pub energy: Float,
    pub state: DenseState,
    /// Next level in the same sector, when resolved.
    pub next_energy: Option<Float>,
    pub residual: Float,
}

/// Ground states of both parity sectors.
#[derive(Clone, Debug)]
pub struct EdGround {
    pub sectors: Vec<SectorGround>,
    pub ground_energy: Float,
    /// Number of levels within `10^-(digits/2)` of the ground energy,
    /// counting one within-sector excitation per sector at most.
    pub degeneracy: usize,
}

impl EdGround {
    pub fn sector(&self, parity: i32) -> &SectorGround {
        self.sectors.iter().find(|s| s.parity == parity).expect("both sectors are solved")
    }

    /// Orthonormal basis of the degenerate ground manifold (one vector per
    /// sector at the ground energy).
    pub fn ground_basis(&self) -> Vec<&DenseState> {
        let tol = degeneracy_tol();
        self.sectors.iter().filter(|s| within(&s.energy, &self.ground_energy, &tol)).map(|s| &s.state).collect()
    }
}

fn degeneracy_tol() -> Float {
    let ctx = oracle_context();
    ctx.pow10(-(ORACLE_DIGITS as i32 / 2))
}

fn within(a: &Float, b: &Float, tol: &Float) -> bool {
    Float::with_val(a.prec(), a - b).abs() < *tol
}

/// Spin ring `H = -1/2 [sum J X X + sum g Z] + 1/2 sum_dual X_j Y_{j+1}`,
/// with no field on the site following a duality bond.
pub fn spin_terms(chain: &ChainSpec, ctx: &PrecisionContext) -> Vec<PauliTerm> {
    let n = chain.n_sites();
    let prec = ctx.bits();
    let half = ctx.ratio(1, 2);
    let mut terms = Vec::new();
    let mut push = |re: Float, im: Float, string: PauliString| {
        if !(re.is_zero() && im.is_zero()) {
            terms.push(PauliTerm { re, im, string });
        }
    };
    for j in 0..n {
        let k = (j + 1) % n;
        let skipped = chain.duality_bonds.contains(&((j + n - 1) % n));
        if !skipped {
            let field = -Float::with_val(prec, &chain.fields[j] * &half);
            push(field, ctx.zero(), PauliString::z(j));
        }
        if chain.duality_bonds.contains(&j) {
            push(half.clone(), ctx.zero(), PauliString::x(j).mul(PauliString::y(k)));
        } else {
            let bond = -Float::with_val(prec, &chain.couplings[j] * &half);
            push(bond, ctx.zero(), PauliString::x(j).mul(PauliString::x(k)));
        }
    }
    terms
}

/// `H = (i/4) gamma^T S gamma = (i/2) sum_{m<n} S_mn gamma_m gamma_n`.
pub fn majorana_terms(s: &SkewMatrix, ctx: &PrecisionContext) -> Vec<PauliTerm> {
    let prec = ctx.bits();
    let mut terms = Vec::new();
    for m in 0..s.dim() {
        for n in m + 1..s.dim() {
            let v = s.get(m, n);
            if v.is_zero() {
                continue;
            }
            let string = PauliString::majorana(m).mul(PauliString::majorana(n));
            terms.push(PauliTerm { re: ctx.zero(), im: Float::with_val(prec, v / 2u32), string });
        }
    }
    terms
}

/// Ground states of both parity sectors of a Pauli sum on `n` qubits.
pub fn sector_grounds(terms: &[PauliTerm], n: usize, ctx: &PrecisionContext) -> Result<EdGround> {
    let mut sectors = Vec::new();
    for parity in [1, -1] {
        let states: Vec<u64> = (0..1u64 << n).filter(|s| sign_of(s.count_ones()) == parity).collect();
        let op = SectorOperator::new(terms, states, ctx.bits())?;
        let pair = ground_pair(&op, ctx)?;
        let mut full = CVector::zeros(1 << n, ctx.bits());
        for (i, &s) in op.states.iter().enumerate() {
            full.re[s as usize] = pair.vector.re[i].clone();
            full.im[s as usize] = pair.vector.im[i].clone();
        }
        sectors.push(SectorGround {
            parity,
            energy: pair.energy,
            state: DenseState { n_sites: n, amplitudes: full },
            next_energy: pair.next_energy,
            residual: pair.residual,
        });
    }
    let ground_energy = sectors.iter().map(|s| s.energy.clone()).fold(None::<Float>, |acc, e| match acc {
        Some(a) if a <= e => Some(a),
        _ => Some(e),
    });
    let ground_energy = ground_energy.expect("two sectors");
    let tol = degeneracy_tol();
    let mut degeneracy = 0;
    for s in &sectors {
        if within(&s.energy, &ground_energy, &tol) {
            degeneracy += 1;
            if s.next_energy.as_ref().is_some_and(|e| within(e, &ground_energy, &tol)) {
                degeneracy += 1;
            }
        }
    }
    Ok(EdGround { sectors, ground_energy, degeneracy })
}

fn sign_of(ones: u32) -> i32 {
    if ones % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Spin-ring ground states at oracle precision.
pub fn spin_ed_ground(chain: &ChainSpec) -> Result<EdGround> {
    let n = chain.n_sites();
    if n > MAX_SPIN_SITES {
        return Err(Error::OracleRange { what: "spin sites", max: MAX_SPIN_SITES, got: n });
    }
    let ctx = oracle_context();
    let chain = ChainSpec {
        couplings: chain.couplings.iter().map(|x| Float::with_val(ctx.bits(), x)).collect(),
        fields: chain.fields.iter().map(|x| Float::with_val(ctx.bits(), x)).collect(),
        ..chain.clone()
    };
    sector_grounds(&spin_terms(&chain, &ctx), n, &ctx)
}

/// Fock-space ground states of `H = (i/4) gamma^T S gamma` at oracle precision.
pub fn fermion_ed_ground(s: &SkewMatrix) -> Result<EdGround> {
    let n = s.dim() / 2;
    if n > MAX_FERMION_MODES {
        return Err(Error::OracleRange { what: "fermion modes", max: MAX_FERMION_MODES, got: n });
    }
    let ctx = oracle_context();
    sector_grounds(&majorana_terms(&s.with_prec(ctx.bits()), &ctx), n, &ctx)
}

/// `Gamma_mn = -i <gamma_m gamma_n>` for `m != n`.
pub fn covariance_of(state: &DenseState) -> SkewMatrix {
    let dim = 2 * state.n_sites;
    let prec = state.amplitudes.re[0].prec();
    let mut gamma = SkewMatrix::zeros(dim, prec).expect("even dimension");
    for m in 0..dim {
        for n in m + 1..dim {
            let (_, im) = state.expectation(PauliString::majorana(m).mul(PauliString::majorana(n)));
            gamma.set(m, n, im);
        }
    }
    gamma
}

/// Reduced density matrix on the sites of `region`, indexed by the region's
/// bits in increasing site order.
pub fn reduced_density_matrix(state: &DenseState, region: &SubsystemSpec) -> Result<CMatrix> {
    let n = state.n_sites;
    region.validate(n)?;
    let sites: Vec<usize> = (0..region.length).map(|k| (region.start + k) % n).collect();
    let rest: Vec<usize> = (0..n).filter(|j| !sites.contains(j)).collect();
    let prec = state.amplitudes.re[0].prec();
    let da = 1usize << sites.len();
    let db = 1usize << rest.len();
    let compose = |a: usize, b: usize| -> usize {
        let mut s = 0;
        for (k, &site) in sites.iter().enumerate() {
            s |= ((a >> k) & 1) << site;
        }
        for (k, &site) in rest.iter().enumerate() {
            s |= ((b >> k) & 1) << site;
        }
        s
    };
    // rho[a][a'] = sum_b psi(a,b) conj(psi(a',b))
    let mut re = Matrix::zeros(da, da, prec);
    let mut im = Matrix::zeros(da, da, prec);
    for b in 0..db {
        let idx: Vec<usize> = (0..da).map(|a| compose(a, b)).collect();
        for a in 0..da {
            let (xr, xi) = (&state.amplitudes.re[idx[a]], &state.amplitudes.im[idx[a]]);
            for a2 in 0..da {
                let (yr, yi) = (&state.amplitudes.re[idx[a2]], &state.amplitudes.im[idx[a2]]);
                *re.get_mut(a, a2) += Float::with_val(prec, xr * yr) + Float::with_val(prec, xi * yi);
                *im.get_mut(a, a2) += Float::with_val(prec, xi * yr) - Float::with_val(prec, xr * yi);
            }
        }
    }
    Ok(CMatrix { re, im })
}

/// Eigenvalues of the reduced density matrix (squared Schmidt weights),
/// descending.
pub fn rdm_spectrum(state: &DenseState, region: &SubsystemSpec) -> Result<Vec<Float>> {
    let rho = reduced_density_matrix(state, region)?;
    let ctx = oracle_context();
    let mut values = hermitian_eigenvalues(&rho, &ctx)?;
    values.reverse();
    Ok(values)
}

/// `-sum p ln p` over a probability list; zero weights contribute nothing.
pub fn shannon(weights: &[Float]) -> Float {
    let prec = weights.first().map_or(64, |w| w.prec());
    let mut s = Float::new(prec);
    for w in weights {
        if w.is_sign_positive() && !w.is_zero() {
            s -= Float::with_val(prec, w * w.clone().ln());
        }
    }
    s
}
