//! Brute-force statevector simulation.
//!
//! Qubit `j` is bit `j` of the basis index. This backend is the independent
//! oracle the symplectic code is checked against, so it works from explicit
//! matrices and never consults the Pauli or tableau machinery for its
//! arithmetic.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::bits::BitString;
use crate::clifford::{CliffordCircuit, CliffordGate};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::rng::SplitMix64;

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

/// Norm tolerance for states.
pub const NORM_TOL: f64 = 1e-12;
/// Unitarity tolerance for user supplied blocks.
pub const UNITARY_TOL: f64 = 1e-10;
pub const DEFAULT_QUBIT_CAP: usize = 12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub mod gates {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn h() -> Mat2 {
        let r = c(FRAC_1_SQRT_2, 0.0);
        [[r, r], [r, -r]]
    }
    pub fn s() -> Mat2 {
        [[ONE, ZERO], [ZERO, c(0.0, 1.0)]]
    }
    pub fn t() -> Mat2 {
        [[ONE, ZERO], [ZERO, c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)]]
    }
    pub fn tdg() -> Mat2 {
        [[ONE, ZERO], [ZERO, c(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)]]
    }
    pub fn x() -> Mat2 {
        [[ZERO, ONE], [ONE, ZERO]]
    }
    pub fn z() -> Mat2 {
        [[ONE, ZERO], [ZERO, -ONE]]
    }
    /// CNOT with the control on the low qubit of the pair.
    pub fn cnot() -> Mat4 {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = ONE;
        m[2][2] = ONE;
        m[1][3] = ONE;
        m[3][1] = ONE;
        m
    }
}

/// Checks `U†U = I` entrywise within [`UNITARY_TOL`].
pub fn check_unitary(m: &[Vec<C64>]) -> Result<()> {
    let d = m.len();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let acc: C64 = m.iter().map(|row| row[i].conj() * row[j]).sum();
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((acc - target).norm());
        }
    }
    if worst > UNITARY_TOL {
        return Err(Error::NonUnitary(worst));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        DenseState { n, amps }
    }

    pub fn basis(bits: &BitString) -> Self {
        let mut s = DenseState::zero(bits.len());
        s.amps[0] = ZERO;
        s.amps[bits.to_u64() as usize] = ONE;
        s
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                found: amps.len(),
            });
        }
        let s = DenseState { n, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Strategy(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    /// Unchecked constructor for intermediate, unnormalized vectors.
    pub(crate) fn from_raw(n: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        DenseState { n, amps }
    }

    /// Haar-ish random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn random(n: usize, rng: &mut SplitMix64) -> Self {
        let mut amps: Vec<C64> = (0..1usize << n)
            .map(|_| {
                let u1 = 1.0 - rng.next_f64();
                let u2 = rng.next_f64();
                let r = (-2.0 * u1.ln()).sqrt();
                let th = 2.0 * std::f64::consts::PI * u2;
                c(r * th.cos(), r * th.sin())
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        DenseState { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &DenseState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self⟩ ⊗ |other⟩` in tensor order, i.e. `other` on the high qubits.
    pub fn tensor(&self, other: &DenseState) -> DenseState {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        DenseState {
            n: self.n + other.n,
            amps,
        }
    }

    /// Appends a fresh qubit in `|bit⟩` as qubit `n`; returns its index.
    pub fn push_qubit(&mut self, bit: bool) -> usize {
        let half = self.amps.len();
        let mut amps = vec![ZERO; 2 * half];
        let off = if bit { half } else { 0 };
        amps[off..off + half].copy_from_slice(&self.amps);
        self.amps = amps;
        self.n += 1;
        self.n - 1
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange {
                index: q,
                bound: self.n,
                what: "qubits",
            });
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Two-qubit block; the block's basis index is `b(q0) + 2·b(q1)`.
    pub fn apply_2q(&mut self, q0: usize, q1: usize, m: &Mat4) -> Result<()> {
        self.check_qubit(q0)?;
        self.check_qubit(q1)?;
        if q0 == q1 {
            return Err(Error::InvalidGate(format!(
                "two-qubit block on repeated qubit {q0}"
            )));
        }
        let (b0, b1) = (1usize << q0, 1usize << q1);
        for i in 0..self.amps.len() {
            if i & (b0 | b1) == 0 {
                let idx = [i, i | b0, i | b1, i | b0 | b1];
                let v = idx.map(|k| self.amps[k]);
                for (r, &k) in idx.iter().enumerate() {
                    self.amps[k] = (0..4).map(|col| m[r][col] * v[col]).sum();
                }
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &CliffordGate) -> Result<()> {
        match *g {
            CliffordGate::H(q) => self.apply_1q(q, &gates::h()),
            CliffordGate::S(q) => self.apply_1q(q, &gates::s()),
            CliffordGate::Cnot(ctl, t) => self.apply_2q(ctl, t, &gates::cnot()),
        }
    }

    pub fn apply_circuit(&mut self, u: &CliffordCircuit) -> Result<()> {
        if u.arity() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: u.arity(),
            });
        }
        u.gates().iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Applies a Pauli operator built from explicit X and Z matrices and its
    /// `i^k` prefactor.
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        // X^x Z^z: Z acts first.
        for q in 0..self.n {
            if p.z(q) {
                self.apply_1q(q, &gates::z())?;
            }
        }
        for q in 0..self.n {
            if p.x(q) {
                self.apply_1q(q, &gates::x())?;
            }
        }
        let phase = [ONE, c(0.0, 1.0), -ONE, c(0.0, -1.0)][p.phase_exp() as usize];
        for a in &mut self.amps {
            *a *= phase;
        }
        Ok(())
    }

    pub fn probability(&self, q: usize, bit: bool) -> Result<f64> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & mask != 0) == bit)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects qubit `q` onto `|bit⟩` and renormalizes.
    pub fn collapse(&mut self, q: usize, bit: bool) -> Result<f64> {
        let p = self.probability(q, bit)?;
        if p <= NORM_TOL * NORM_TOL {
            return Err(Error::ZeroProbability);
        }
        let mask = 1usize << q;
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) == bit {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(p)
    }

    /// Born-rule marginal over `indices`; outcome bit `k` is qubit
    /// `indices[k]`.
    pub fn measure_distribution(&self, indices: &[usize]) -> Result<BTreeMap<BitString, f64>> {
        for &q in indices {
            self.check_qubit(q)?;
        }
        let mut dist = BTreeMap::new();
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let key = BitString::from_bools(indices.iter().map(|&q| i >> q & 1 == 1));
            *dist.entry(key).or_insert(0.0) += p;
        }
        Ok(dist)
    }

    /// Post-measurement state for `outcome` on `indices`.
    pub fn condition(&self, indices: &[usize], outcome: &BitString) -> Result<DenseState> {
        if outcome.len() != indices.len() {
            return Err(Error::Dimension {
                expected: indices.len(),
                found: outcome.len(),
            });
        }
        let mut s = self.clone();
        for (k, &q) in indices.iter().enumerate() {
            s.collapse(q, outcome.get(k))?;
        }
        Ok(s)
    }

    /// Dense-state text: first line `n`, then `index re im` triples; missing
    /// indices are zero.
    pub fn parse_text(text: &str) -> Result<DenseState> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing qubit count"))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::parse(ln, format!("bad qubit count {header:?}")))?;
        if n > 30 {
            return Err(Error::parse(
                ln,
                format!("{n} qubits is too many for a dense state"),
            ));
        }
        let mut amps = vec![ZERO; 1 << n];
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(ln, "expected `index re im`"));
            }
            let idx: usize = f[0]
                .parse()
                .map_err(|_| Error::parse(ln, "bad basis index"))?;
            let re: f64 = f[1]
                .parse()
                .map_err(|_| Error::parse(ln, "bad real part"))?;
            let im: f64 = f[2]
                .parse()
                .map_err(|_| Error::parse(ln, "bad imaginary part"))?;
            if idx >= amps.len() {
                return Err(Error::parse(ln, format!("basis index {idx} out of range")));
            }
            amps[idx] = c(re, im);
        }
        DenseState::from_amplitudes(n, amps)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (i, a) in self.amps.iter().enumerate() {
            if *a != ZERO {
                // {:?} on f64 prints the shortest round-tripping form
                let _ = writeln!(s, "{i} {:?} {:?}", a.re, a.im);
            }
        }
        s
    }
}

/// Square complex matrix for operator-level checks.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        DenseMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    /// Matrix whose column `j` is the image of basis state `j`.
    pub fn from_columns(
        n: usize,
        mut column: impl FnMut(&mut DenseState) -> Result<()>,
    ) -> Result<Self> {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        for j in 0..dim {
            let mut s = DenseState::basis(&BitString::from_u64(j as u64, n));
            column(&mut s)?;
            for i in 0..dim {
                data[i * dim + j] = s.amps[i];
            }
        }
        Ok(DenseMatrix { dim, data })
    }

    pub fn of_circuit(u: &CliffordCircuit) -> Result<Self> {
        DenseMatrix::from_columns(u.arity(), |s| s.apply_circuit(u))
    }

    pub fn of_pauli(p: &PauliOperator) -> Result<Self> {
        DenseMatrix::from_columns(p.num_qubits(), |s| s.apply_pauli(p))
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        DenseMatrix { dim: d, data }
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        DenseMatrix { dim: d, data }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(s: &DenseState) -> DenseMatrix {
        let d = s.amps.len();
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = s.amps[i] * s.amps[j].conj();
            }
        }
        DenseMatrix { dim: d, data }
    }

    pub fn frobenius_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `‖ |a⟩⟨a| − |b⟩⟨b| ‖_F` for normalized states.
///
/// With `c = |⟨a|b⟩|` and `b'` the phase-aligned `b`, the norm equals
/// `‖a − b'‖ · √(1 + c)`. The difference vector is computed entrywise, so
/// nearly equal states do not lose precision to `1 − c²` cancellation.
pub fn pure_state_frobenius(a: &DenseState, b: &DenseState) -> f64 {
    assert_eq!(a.n, b.n);
    let overlap = a.inner(b);
    let c = overlap.norm();
    let align = if c > 0.0 { overlap.conj() / c } else { ONE };
    let diff: f64 = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x - y * align).norm_sqr())
        .sum();
    diff.sqrt() * (1.0 + c).sqrt()
}
