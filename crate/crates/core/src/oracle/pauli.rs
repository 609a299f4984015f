//! Pauli strings `i^phase X^x Z^z` on up to 64 qubits, with site `j` at bit `j`.

/// `i^phase * prod_j X_j^{x_j} * prod_j Z_j^{z_j}` (all X factors to the left).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliString {
    pub phase: u8,
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { phase: 0, x: 0, z: 0 };

    pub fn x(site: usize) -> Self {
        Self { phase: 0, x: 1 << site, z: 0 }
    }

    pub fn z(site: usize) -> Self {
        Self { phase: 0, x: 0, z: 1 << site }
    }

    /// `Y = i X Z`.
    pub fn y(site: usize) -> Self {
        Self { phase: 1, x: 1 << site, z: 1 << site }
    }

    /// Jordan-Wigner Majorana: `gamma_{2j} = Z_{<j} X_j`,
    /// `gamma_{2j+1} = -Z_{<j} Y_j`.
    pub fn majorana(index: usize) -> Self {
        let j = index / 2;
        let below = (1u64 << j) - 1;
        if index % 2 == 0 {
            Self { phase: 0, x: 1 << j, z: below }
        } else {
            Self { phase: 3, x: 1 << j, z: below | (1 << j) }
        }
    }

    pub fn mul(self, other: PauliString) -> PauliString {
        // Z^{z1} X^{x2} = (-1)^{|z1 & x2|} X^{x2} Z^{z1}
        let swap = ((self.z & other.x).count_ones() % 2) as u8 * 2;
        PauliString { phase: (self.phase + other.phase + swap) % 4, x: self.x ^ other.x, z: self.z ^ other.z }
    }

    /// Image of basis state `s`: returns `(phase, t)` with `P|s> = i^phase |t>`.
    pub fn apply(self, s: u64) -> (u8, u64) {
        let sign = ((s & self.z).count_ones() % 2) as u8 * 2;
        ((self.phase + sign) % 4, s ^ self.x)
    }
}

/// `i^phase` as `(re, im)`.
pub fn phase_value(phase: u8) -> (i32, i32) {
    match phase % 4 {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    }
}
