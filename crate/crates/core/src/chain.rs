//! Critical transverse-field Ising rings with bond defects and their Majorana
//! coupling matrices.

use std::collections::BTreeSet;
use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::linalg::SkewMatrix;
use crate::precision::PrecisionContext;

/// A coupling kept as an exact decimal literal so that it is parsed afresh at
/// every working precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coupling(String);

impl Coupling {
    pub fn new(text: &str) -> Result<Self> {
        let t = text.trim();
        if Float::parse(t).is_err() {
            return Err(Error::InvalidChain(format!("`{text}` is not a decimal number")));
        }
        Ok(Self(t.to_string()))
    }

    /// Shortest decimal that round-trips the double, e.g. `0.2` for `0.2`.
    pub fn from_f64(x: f64) -> Self {
        Self(format!("{x}"))
    }

    pub fn value(&self, ctx: &PrecisionContext) -> Float {
        ctx.parse(&self.0).expect("validated at construction")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Bond `j` joins sites `j` and `j + 1 (mod N)`.
#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub couplings: Vec<Float>,
    pub fields: Vec<Float>,
    /// Sign multiplying the ring-closing Majorana coupling; `-1` corresponds
    /// to the even spin-parity sector.
    pub boundary_sign: i32,
    /// Bonds carrying a duality defect. Such a bond couples Majoranas `2j+1`
    /// and `2j+3` with unit strength; its `J` is ignored and the field on
    /// site `j+1` is removed.
    pub duality_bonds: BTreeSet<usize>,
}

impl ChainSpec {
    pub fn n_sites(&self) -> usize {
        self.fields.len()
    }

    /// Spin-parity sector `prod sigma^z` whose ground state this chain
    /// describes.
    pub fn target_parity(&self) -> i32 {
        -self.boundary_sign
    }

    fn validate(&self) -> Result<()> {
        let n = self.fields.len();
        if n < 2 {
            return Err(Error::InvalidChain(format!("need at least two sites, got {n}")));
        }
        if self.couplings.len() != n {
            return Err(Error::InvalidChain(format!("{} couplings for {n} sites", self.couplings.len())));
        }
        if self.boundary_sign.abs() != 1 {
            return Err(Error::InvalidChain(format!("boundary sign must be +1 or -1, got {}", self.boundary_sign)));
        }
        if let Some(&b) = self.duality_bonds.iter().find(|&&b| b >= n) {
            return Err(Error::InvalidChain(format!("duality bond {b} out of range for {n} sites")));
        }
        for &b in &self.duality_bonds {
            let next = (b + 1) % n;
            if self.duality_bonds.contains(&next) {
                return Err(Error::InvalidChain(format!("duality bonds {b} and {next} share the skipped Majorana")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefectKind {
    /// Bond coupling replaced by `J*`.
    Energy(Coupling),
    /// Bond coupling set to `-1`.
    Antiperiodic,
    Duality,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectSpec {
    pub kind: DefectKind,
    pub bond: usize,
}

impl DefectSpec {
    pub fn energy(strength: Coupling, bond: usize) -> Self {
        Self { kind: DefectKind::Energy(strength), bond }
    }

    pub fn antiperiodic(bond: usize) -> Self {
        Self { kind: DefectKind::Antiperiodic, bond }
    }

    pub fn duality(bond: usize) -> Self {
        Self { kind: DefectKind::Duality, bond }
    }
}

/// Contiguous block of sites `start, start+1, ..., start+length-1 (mod N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubsystemSpec {
    pub start: usize,
    pub length: usize,
}

impl SubsystemSpec {
    pub fn new(start: usize, length: usize) -> Self {
        Self { start, length }
    }

    /// `{0, ..., N/2 - 1}`.
    pub fn half(n_sites: usize) -> Self {
        Self { start: 0, length: n_sites / 2 }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.length == 0 || self.length > n_sites {
            return Err(Error::InvalidSubsystem(format!("length {} not in 1..={n_sites}", self.length)));
        }
        if self.start >= n_sites {
            return Err(Error::InvalidSubsystem(format!("start {} not below {n_sites}", self.start)));
        }
        Ok(())
    }

    /// The remaining `N - L` sites, starting right after this block.
    pub fn complement(&self, n_sites: usize) -> Result<Self> {
        self.validate(n_sites)?;
        if self.length == n_sites {
            return Err(Error::InvalidSubsystem("the full chain has an empty complement".into()));
        }
        Ok(Self { start: (self.start + self.length) % n_sites, length: n_sites - self.length })
    }

    /// Global Majorana indices of the block in order, wrapping around the ring.
    pub fn majorana_indices(&self, n_sites: usize) -> Vec<usize> {
        (0..2 * self.length).map(|k| (2 * self.start + k) % (2 * n_sites)).collect()
    }
}

/// Bond at the middle of an even-length block: `a + L/2 - 1`.
pub fn centered_defect_bond(sub: &SubsystemSpec, n_sites: usize) -> Result<usize> {
    sub.validate(n_sites)?;
    if sub.length % 2 != 0 {
        return Err(Error::InvalidSubsystem(format!("centered defect needs even length, got {}", sub.length)));
    }
    Ok((sub.start + sub.length / 2 - 1) % n_sites)
}

/// Bond diametrically opposite the centered bond, i.e. centered in the complement.
pub fn antipodal_bond(sub: &SubsystemSpec, n_sites: usize) -> Result<usize> {
    Ok((centered_defect_bond(sub, n_sites)? + n_sites / 2) % n_sites)
}

/// Bond just left of the block, `a - 1 (mod N)`.
pub fn boundary_bond(sub: &SubsystemSpec, n_sites: usize) -> Result<usize> {
    sub.validate(n_sites)?;
    Ok((sub.start + n_sites - 1) % n_sites)
}

/// Uniform critical ring (`J = g = 1`) with the given defects applied.
pub fn build_chain(
    n_sites: usize,
    defects: &[DefectSpec],
    boundary_sign: i32,
    ctx: &PrecisionContext,
) -> Result<ChainSpec> {
    let mut chain = ChainSpec {
        couplings: vec![ctx.one(); n_sites],
        fields: vec![ctx.one(); n_sites],
        boundary_sign,
        duality_bonds: BTreeSet::new(),
    };
    let mut used = BTreeSet::new();
    for d in defects {
        if d.bond >= n_sites {
            return Err(Error::InvalidChain(format!("defect bond {} out of range for {n_sites} sites", d.bond)));
        }
        if !used.insert(d.bond) {
            return Err(Error::InvalidChain(format!("two defects on bond {}", d.bond)));
        }
        match &d.kind {
            DefectKind::Energy(j) => chain.couplings[d.bond] = j.value(ctx),
            DefectKind::Antiperiodic => chain.couplings[d.bond] = ctx.int(-1),
            DefectKind::Duality => {
                chain.duality_bonds.insert(d.bond);
            }
        }
    }
    chain.validate()?;
    Ok(chain)
}

/// Majorana coupling matrix `S` with `H = (i/4) gamma^T S gamma`.
///
/// Entries use `S[later][earlier] = coupling` in chain order:
/// `S[2j+1][2j] = g_j`, `S[2j+2][2j+1] = J_j`, duality `S[2j+3][2j+1] = 1`,
/// and the ring-closing entries carry `boundary_sign`.
pub fn majorana_hamiltonian(chain: &ChainSpec, ctx: &PrecisionContext) -> Result<SkewMatrix> {
    chain.validate()?;
    let n = chain.n_sites();
    let dim = 2 * n;
    let mut s = SkewMatrix::zeros(dim, ctx.bits())?;
    let skipped: BTreeSet<usize> = chain.duality_bonds.iter().map(|&b| (b + 1) % n).collect();
    for j in 0..n {
        if !skipped.contains(&j) {
            s.set(2 * j + 1, 2 * j, &chain.fields[j]);
        }
    }
    for j in 0..n {
        let closes = j == n - 1;
        let sign = if closes { chain.boundary_sign } else { 1 };
        let (target, value) = if chain.duality_bonds.contains(&j) {
            ((2 * j + 3) % dim, Float::with_val(ctx.bits(), sign))
        } else {
            ((2 * j + 2) % dim, Float::with_val(ctx.bits(), &chain.couplings[j] * sign))
        };
        if value.is_zero() {
            continue;
        }
        s.set(target, 2 * j + 1, &value);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn single_field_block() {
        let c = ctx();
        let chain = build_chain(2, &[DefectSpec::energy(Coupling::new("0").unwrap(), 0), DefectSpec::energy(Coupling::new("0").unwrap(), 1)], -1, &c).unwrap();
        let s = majorana_hamiltonian(&chain, &c).unwrap();
        assert_eq!(s.get(1, 0).to_f64(), 1.0);
        assert_eq!(s.get(0, 1).to_f64(), -1.0);
        assert!(s.get(2, 1).is_zero() && s.get(0, 3).is_zero());
    }

    #[test]
    fn uniform_ring_closure() {
        let c = ctx();
        let chain = build_chain(4, &[], -1, &c).unwrap();
        let s = majorana_hamiltonian(&chain, &c).unwrap();
        assert_eq!(s.get(0, 7).to_f64(), -1.0);
        assert_eq!(s.get(2, 1).to_f64(), 1.0);
    }

    #[test]
    fn duality_bond_skips_majorana() {
        let c = ctx();
        let chain = build_chain(4, &[DefectSpec::duality(1)], -1, &c).unwrap();
        let s = majorana_hamiltonian(&chain, &c).unwrap();
        assert_eq!(s.get(5, 3).to_f64(), 1.0);
        for k in 0..8 {
            assert!(s.get(4, k).is_zero(), "skipped Majorana row must vanish");
        }
    }

    #[test]
    fn geometry_helpers() {
        let sub = SubsystemSpec::half(64);
        assert_eq!(centered_defect_bond(&sub, 64).unwrap(), 15);
        assert_eq!(antipodal_bond(&sub, 64).unwrap(), 47);
        assert_eq!(boundary_bond(&sub, 64).unwrap(), 63);
        assert!(centered_defect_bond(&SubsystemSpec::new(0, 5), 64).is_err());
        assert_eq!(sub.complement(64).unwrap(), SubsystemSpec::new(32, 32));
        assert_eq!(SubsystemSpec::new(3, 2).majorana_indices(4), vec![6, 7, 0, 1]);
    }

    #[test]
    fn rejects_bad_defects() {
        let c = ctx();
        assert!(build_chain(4, &[DefectSpec::antiperiodic(4)], -1, &c).is_err());
        assert!(build_chain(4, &[DefectSpec::antiperiodic(1), DefectSpec::duality(1)], -1, &c).is_err());
        assert!(build_chain(4, &[], 0, &c).is_err());
    }
}
