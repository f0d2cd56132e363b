//! n-qubit Pauli operators in symplectic form with exact phases.
//!
//! A [`PauliOperator`] stands for `i^phase · X^x Z^z`, where `X^x Z^z` is the
//! tensor product of `X^{x_j} Z^{z_j}` over qubits `j`. Keeping the X factor
//! to the left of the Z factor on every qubit makes multiplication a single
//! popcount: `(X^a Z^b)(X^c Z^d) = (-1)^{b·c} X^{a+c} Z^{b+d}`.
//!
//! Because `Y = i·XZ`, a `Y` on qubit `j` is stored as `x_j = z_j = 1` with one
//! unit of phase. The text form uses Pauli letters and converts the phase
//! accordingly: `i^k · P_0 P_1 … P_{n-1}`, qubit 0 first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: BitString,
    z: BitString,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            x: BitString::zeros(n),
            z: BitString::zeros(n),
            phase: 0,
        }
    }

    /// Builds `i^phase · X^x Z^z`.
    pub fn from_parts(x: BitString, z: BitString, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(PauliOperator {
            x,
            z,
            phase: phase & 3,
        })
    }

    /// A single Pauli letter on `qubit`, identity elsewhere, with sign +1.
    pub fn single(n: usize, qubit: usize, letter: char) -> Result<Self> {
        if qubit >= n {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                bound: n,
                what: "qubits",
            });
        }
        let mut p = PauliOperator::identity(n);
        match letter {
            'I' => {}
            'X' => p.x.set(qubit, true),
            'Z' => p.z.set(qubit, true),
            'Y' => {
                p.x.set(qubit, true);
                p.z.set(qubit, true);
                p.phase = 1;
            }
            other => return Err(Error::parse(0, format!("unknown Pauli letter {other:?}"))),
        }
        Ok(p)
    }

    /// `⊗_i X^{x_i ⊕ y_i}`, the operator mapping `|y⟩` to `|x⟩`.
    pub fn x_correction(x: &BitString, y: &BitString) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(PauliOperator {
            x: x.xor(y),
            z: BitString::zeros(x.len()),
            phase: 0,
        })
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_bits(&self) -> &BitString {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitString {
        &self.z
    }

    /// Exponent `k` of the `i^k` prefactor in the X^x Z^z form.
    #[inline]
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn set_phase_exp(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        self.x.get(q)
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        self.z.get(q)
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits())
            .filter(|&q| self.x(q) || self.z(q))
            .count()
    }

    /// True when the operator equals its adjoint.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + self.x.and_count(&self.z)).is_multiple_of(2)
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> Result<bool> {
        self.check_same_size(other)?;
        Ok(self.x.and_parity(&other.z) == self.z.and_parity(&other.x))
    }

    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator> {
        self.check_same_size(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// `self ← self · other`; sizes must already agree.
    pub(crate) fn mul_assign_unchecked(&mut self, other: &PauliOperator) {
        let swaps = self.z.and_count(&other.x);
        self.phase = ((self.phase as usize + other.phase as usize + 2 * swaps) & 3) as u8;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// `self ⊗ other`: `self` on the low indices, `other` after it.
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let mut x = self.x.clone();
        x.extend_from(&other.x);
        let mut z = self.z.clone();
        z.extend_from(&other.z);
        PauliOperator {
            x,
            z,
            phase: (self.phase + other.phase) & 3,
        }
    }

    /// Restriction to `qubits`, keeping the phase. Only meaningful as a
    /// tensor factor when the dropped qubits carry identity.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOperator {
        PauliOperator {
            x: self.x.select(qubits),
            z: self.z.select(qubits),
            phase: self.phase,
        }
    }

    /// Action on a computational basis state: `P|a⟩ = i^k |b⟩` with
    /// `b = a ⊕ x`.
    pub fn apply_to_basis(&self, a: &BitString) -> Result<(u8, BitString)> {
        if a.len() != self.num_qubits() {
            return Err(Error::Dimension {
                expected: self.num_qubits(),
                found: a.len(),
            });
        }
        let sign = self.z.and_count(a);
        let k = ((self.phase as usize + 2 * sign) & 3) as u8;
        Ok((k, a.xor(&self.x)))
    }

    /// The string `ã` with `|ã⟩⟨ã| ⊗ I = P (|a⟩⟨a| ⊗ I) P†`, where the
    /// projector acts on the `measured` qubits in order. Z components and the
    /// global phase cancel in the conjugation, so only the X part matters.
    pub fn conjugate_projector(&self, a: &BitString, measured: &[usize]) -> Result<BitString> {
        if a.len() != measured.len() {
            return Err(Error::Dimension {
                expected: measured.len(),
                found: a.len(),
            });
        }
        let mut out = a.clone();
        for (j, &q) in measured.iter().enumerate() {
            if q >= self.num_qubits() {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    bound: self.num_qubits(),
                    what: "qubits",
                });
            }
            if self.x(q) {
                out.flip(j);
            }
        }
        Ok(out)
    }

    /// Pauli letters and the phase exponent `k` such that the operator is
    /// `i^k · P_0 ⊗ … ⊗ P_{n-1}` with `P_j ∈ {I, X, Y, Z}`.
    pub fn letters(&self) -> (u8, String) {
        let ys = self.x.and_count(&self.z);
        let k = ((self.phase as usize + 4 - ys % 4) & 3) as u8;
        let s = (0..self.num_qubits())
            .map(|q| match (self.x(q), self.z(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            })
            .collect();
        (k, s)
    }

    /// Builds an operator from letters and an `i^k` prefactor on them.
    pub fn from_letters(k: u8, letters: &str) -> Result<Self> {
        let n = letters.chars().count();
        let mut x = BitString::zeros(n);
        let mut z = BitString::zeros(n);
        let mut ys = 0usize;
        for (q, c) in letters.chars().enumerate() {
            match c {
                'I' | '_' | '.' => {}
                'X' => x.set(q, true),
                'Z' => z.set(q, true),
                'Y' => {
                    x.set(q, true);
                    z.set(q, true);
                    ys += 1;
                }
                other => return Err(Error::parse(0, format!("unknown Pauli letter {other:?}"))),
            }
        }
        Ok(PauliOperator {
            x,
            z,
            phase: ((k as usize + ys) & 3) as u8,
        })
    }

    // Gate conjugations, P ← G P G†. Indices are not checked here.

    #[inline]
    pub(crate) fn conj_h(&mut self, q: usize) {
        let (xb, zb) = (self.x(q), self.z(q));
        if xb && zb {
            self.phase = (self.phase + 2) & 3;
        }
        self.x.set(q, zb);
        self.z.set(q, xb);
    }

    #[inline]
    pub(crate) fn conj_s(&mut self, q: usize) {
        if self.x(q) {
            self.phase = (self.phase + 1) & 3;
            self.z.flip(q);
        }
    }

    #[inline]
    pub(crate) fn conj_cnot(&mut self, c: usize, t: usize) {
        if self.x(c) {
            self.x.flip(t);
        }
        if self.z(t) {
            self.z.flip(c);
        }
    }

    fn check_same_size(&self, other: &PauliOperator) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::Dimension {
                expected: self.num_qubits(),
                found: other.num_qubits(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (k, s) = self.letters();
        write!(f, "i^{k} · {s}")
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Accepts `i^k · XYZ`, `i^k XYZ`, signed forms (`+XZ`, `-XZ`, `iXZ`,
    /// `-iXZ`) and bare letters.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("i^") {
            let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
            if digits.is_empty() {
                return Err(Error::parse(0, format!("missing phase exponent in {s:?}")));
            }
            let k: u32 = digits
                .parse()
                .map_err(|_| Error::parse(0, "bad phase exponent"))?;
            let letters = rest[digits.len()..].trim_start().trim_start_matches('·');
            let letters = letters.trim_start_matches('*').trim();
            return PauliOperator::from_letters((k % 4) as u8, letters);
        }
        let (k, letters) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else {
            (0, s)
        };
        PauliOperator::from_letters(k, letters.trim())
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
