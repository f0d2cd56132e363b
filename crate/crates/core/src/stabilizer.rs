//! Stabilizer states in destabilizer/stabilizer tableau form.
//!
//! Row `i` of the tableau is destabilizer `D_i` and stabilizer `S_i`, each a
//! Hermitian [`PauliOperator`]. The pairs satisfy `{D_i, S_i} = 0` and all
//! other pairs commute. Measuring `Z_q` is random iff some `S_i` has an X
//! component on `q`; otherwise `Z_q = ±∏ S_i` over the rows whose `D_i` has
//! an X component on `q`, which gives the outcome in O(n²) word operations.

use std::fmt::Write as _;

use crate::bits::BitString;
use crate::clifford::{CliffordCircuit, CliffordGate};
use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    destab: Vec<PauliOperator>,
    stab: Vec<PauliOperator>,
}

impl StabilizerState {
    /// `|0…0⟩`, stabilized by `Z_j`.
    pub fn zero(n: usize) -> Self {
        StabilizerState {
            n,
            destab: (0..n)
                .map(|j| PauliOperator::single(n, j, 'X').unwrap())
                .collect(),
            stab: (0..n)
                .map(|j| PauliOperator::single(n, j, 'Z').unwrap())
                .collect(),
        }
    }

    /// The unique state stabilized by the given Hermitian, commuting,
    /// independent generators.
    pub fn from_generators(generators: &[PauliOperator]) -> Result<Self> {
        let n = generators.len();
        for (k, g) in generators.iter().enumerate() {
            if g.num_qubits() != n {
                return Err(Error::Generators(format!(
                    "generator {k} acts on {} qubits, expected {n}",
                    g.num_qubits()
                )));
            }
            if !g.is_hermitian() {
                return Err(Error::Generators(format!(
                    "generator {k} ({g}) is not Hermitian"
                )));
            }
            for (l, h) in generators.iter().enumerate().skip(k + 1) {
                if !g.commutes_with(h)? {
                    return Err(Error::Generators(format!(
                        "generators {k} and {l} anticommute"
                    )));
                }
            }
        }
        if symplectic_rank(generators) != n {
            return Err(Error::Generators("generators are not independent".into()));
        }
        let mut state = StabilizerState::zero(n);
        let mut locked = vec![false; n];
        for g in generators {
            state.project_onto(g, &mut locked)?;
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliOperator] {
        &self.stab
    }

    pub fn destabilizers(&self) -> &[PauliOperator] {
        &self.destab
    }

    fn rows_mut(&mut self) -> impl Iterator<Item = &mut PauliOperator> {
        self.destab.iter_mut().chain(self.stab.iter_mut())
    }

    /// Appends a fresh qubit in `|bit⟩` as qubit `n`; returns its index.
    pub fn push_qubit(&mut self, bit: bool) -> usize {
        let one = PauliOperator::identity(1);
        for row in self.rows_mut() {
            *row = row.tensor(&one);
        }
        let n = self.n + 1;
        let q = self.n;
        self.destab.push(PauliOperator::single(n, q, 'X').unwrap());
        let mut z = PauliOperator::single(n, q, 'Z').unwrap();
        if bit {
            z.set_phase_exp(2);
        }
        self.stab.push(z);
        self.n = n;
        q
    }

    pub fn apply_gate(&mut self, g: &CliffordGate) -> Result<()> {
        g.check(self.n)?;
        for row in self.rows_mut() {
            g.conjugate_in_place(row);
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, u: &CliffordCircuit) -> Result<()> {
        if u.arity() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: u.arity(),
            });
        }
        for row in self.rows_mut() {
            for g in u.gates() {
                g.conjugate_in_place(row);
            }
        }
        Ok(())
    }

    /// Applies a Pauli operator as a unitary: rows anticommuting with it pick
    /// up a sign.
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        for row in self.rows_mut() {
            if !row.commutes_with(p).unwrap() {
                row.set_phase_exp(row.phase_exp() + 2);
            }
        }
        Ok(())
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

    /// Whether a Z measurement of `q` has a uniformly random outcome.
    pub fn is_random(&self, q: usize) -> Result<bool> {
        self.check_qubit(q)?;
        Ok(self.stab.iter().any(|s| s.x(q)))
    }

    /// Outcome of a Z measurement on `q` when it is deterministic.
    fn deterministic_outcome(&self, q: usize) -> bool {
        let mut acc = PauliOperator::identity(self.n);
        for (d, s) in self.destab.iter().zip(&self.stab) {
            if d.x(q) {
                acc.mul_assign_unchecked(s);
            }
        }
        debug_assert!(acc.z(q) && acc.weight() == 1, "product is not ±Z_q: {acc}");
        acc.phase_exp() == 2
    }

    /// Exact probability of reading `bit` on `q`: 0, 1/2 or 1.
    pub fn outcome_probability(&self, q: usize, bit: bool) -> Result<f64> {
        if self.is_random(q)? {
            return Ok(0.5);
        }
        Ok(if self.deterministic_outcome(q) == bit {
            1.0
        } else {
            0.0
        })
    }

    /// Projects qubit `q` onto `|bit⟩`; returns the prior probability.
    pub fn collapse(&mut self, q: usize, bit: bool) -> Result<f64> {
        self.check_qubit(q)?;
        match self.stab.iter().position(|s| s.x(q)) {
            Some(p) => {
                let pivot = self.stab[p].clone();
                for i in 0..self.n {
                    if i != p && self.destab[i].x(q) {
                        self.destab[i].mul_assign_unchecked(&pivot);
                    }
                    if i != p && self.stab[i].x(q) {
                        self.stab[i].mul_assign_unchecked(&pivot);
                    }
                }
                self.destab[p] = pivot;
                let mut z = PauliOperator::single(self.n, q, 'Z').unwrap();
                if bit {
                    z.set_phase_exp(2);
                }
                self.stab[p] = z;
                Ok(0.5)
            }
            None => {
                if self.deterministic_outcome(q) == bit {
                    Ok(1.0)
                } else {
                    Err(Error::ZeroProbability)
                }
            }
        }
    }

    /// Z measurement of `q`: `(outcome, deterministic)`.
    pub fn measure(&mut self, q: usize, rng: &mut SplitMix64) -> Result<(bool, bool)> {
        if self.is_random(q)? {
            let bit = rng.next_bit();
            self.collapse(q, bit)?;
            Ok((bit, false))
        } else {
            Ok((self.deterministic_outcome(q), true))
        }
    }

    /// Projects onto the +1 eigenspace of Hermitian `p`. Stabilizer rows in
    /// `locked` hold earlier generators and are never flipped.
    fn project_onto(&mut self, p: &PauliOperator, locked: &mut [bool]) -> Result<()> {
        let anti = (0..self.n).find(|&i| !self.stab[i].commutes_with(p).unwrap());
        if let Some(k) = anti {
            let pivot = self.stab[k].clone();
            for i in 0..self.n {
                if i != k && !self.destab[i].commutes_with(p).unwrap() {
                    self.destab[i].mul_assign_unchecked(&pivot);
                }
                if i != k && !self.stab[i].commutes_with(p).unwrap() {
                    self.stab[i].mul_assign_unchecked(&pivot);
                }
            }
            self.destab[k] = pivot;
            self.stab[k] = p.clone();
            locked[k] = true;
            return Ok(());
        }
        let members: Vec<usize> = (0..self.n)
            .filter(|&i| !self.destab[i].commutes_with(p).unwrap())
            .collect();
        let mut acc = PauliOperator::identity(self.n);
        for &i in &members {
            acc.mul_assign_unchecked(&self.stab[i]);
        }
        if acc == *p {
            return Ok(());
        }
        let free = members
            .iter()
            .copied()
            .find(|&i| !locked[i])
            .ok_or_else(|| Error::Generators(format!("{p} contradicts earlier generators")))?;
        let flip = self.destab[free].clone();
        self.apply_pauli(&flip)
    }

    /// Commuting, Hermitian, independent stabilizers, and destabilizers
    /// pairing with them.
    pub fn check_invariants(&self) -> bool {
        let n = self.n;
        if !self
            .destab
            .iter()
            .chain(&self.stab)
            .all(PauliOperator::is_hermitian)
        {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                let ss = self.stab[i].commutes_with(&self.stab[j]).unwrap();
                let dd = self.destab[i].commutes_with(&self.destab[j]).unwrap();
                let ds = self.destab[i].commutes_with(&self.stab[j]).unwrap();
                if !ss || !dd || ds == (i == j) {
                    return false;
                }
            }
        }
        symplectic_rank(&self.stab) == n
    }

    /// Statevector of the stabilized state, up to a global phase, by
    /// projecting a basis state with `∏ (I + S_i)/2`.
    pub fn to_dense(&self) -> Result<DenseState> {
        for start in 0..1u64 << self.n {
            let mut v = DenseState::basis(&BitString::from_u64(start, self.n));
            let mut amps: Vec<_> = v.amplitudes().to_vec();
            for g in &self.stab {
                let mut gv = DenseState::from_raw(self.n, amps.clone());
                gv.apply_pauli(g)?;
                for (a, b) in amps.iter_mut().zip(gv.amplitudes()) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for a in &mut amps {
                    *a /= norm;
                }
                v = DenseState::from_amplitudes(self.n, amps)?;
                return Ok(v);
            }
        }
        unreachable!("some basis state overlaps every stabilizer state")
    }

    /// Stabilizer-state text: qubit count, then one generator per line.
    pub fn parse_text(text: &str) -> Result<StabilizerState> {
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
        let mut gens = Vec::with_capacity(n);
        for (ln, line) in lines {
            let g: PauliOperator = line.parse().map_err(|e| Error::parse(ln, format!("{e}")))?;
            if g.num_qubits() != n {
                return Err(Error::parse(
                    ln,
                    format!("generator has {} qubits, expected {n}", g.num_qubits()),
                ));
            }
            gens.push(g);
        }
        if gens.len() != n {
            return Err(Error::parse(
                0,
                format!("expected {n} generators, found {}", gens.len()),
            ));
        }
        StabilizerState::from_generators(&gens)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for g in &self.stab {
            let _ = writeln!(s, "{g}");
        }
        s
    }
}

/// Rank over GF(2) of the `[x | z]` rows.
pub fn symplectic_rank(rows: &[PauliOperator]) -> usize {
    let mut m: Vec<BitString> = rows
        .iter()
        .map(|p| {
            let mut v = p.x_bits().clone();
            v.extend_from(p.z_bits());
            v
        })
        .collect();
    let width = m.first().map_or(0, BitString::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(piv) = (rank..m.len()).find(|&r| m[r].get(col)) else {
            continue;
        };
        m.swap(rank, piv);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use CliffordGate::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn fidelity(a: &DenseState, b: &DenseState) -> f64 {
        a.inner(b).norm_sqr()
    }

    #[test]
    fn zero_state_generators() {
        assert_eq!(StabilizerState::zero(1).stabilizers(), &[p("Z")]);
        assert_eq!(StabilizerState::zero(2).stabilizers(), &[p("ZI"), p("IZ")]);
        let d = StabilizerState::zero(3).to_dense().unwrap();
        assert!((fidelity(&d, &DenseState::zero(3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_gives_plus() {
        let mut s = StabilizerState::zero(1);
        s.apply_gate(&H(0)).unwrap();
        assert_eq!(s.stabilizers(), &[p("X")]);
        assert_eq!(s.outcome_probability(0, true).unwrap(), 0.5);
    }

    #[test]
    fn bell_stabilizers() {
        let mut s = StabilizerState::zero(2);
        s.apply_circuit(&CliffordCircuit::new(2, vec![H(0), Cnot(0, 1)]).unwrap())
            .unwrap();
        let mut gens = s.stabilizers().to_vec();
        gens.sort_by_key(|g| g.to_string());
        assert_eq!(gens, vec![p("XX"), p("ZZ")]);
        assert!(s.check_invariants());
    }

    #[test]
    fn measurements() {
        let mut rng = SplitMix64::new(3);
        let mut s = StabilizerState::zero(1);
        assert_eq!(s.measure(0, &mut rng).unwrap(), (false, true));
        let mut s = StabilizerState::zero(1);
        s.push_qubit(true);
        assert_eq!(s.outcome_probability(1, false).unwrap(), 0.0);
        assert!(matches!(s.collapse(1, false), Err(Error::ZeroProbability)));
        let mut bell = StabilizerState::zero(2);
        bell.apply_gate(&H(0)).unwrap();
        bell.apply_gate(&Cnot(0, 1)).unwrap();
        for seed in 0..20 {
            let mut b = bell.clone();
            let mut rng = SplitMix64::new(seed);
            let (first, det) = b.measure(0, &mut rng).unwrap();
            assert!(!det);
            let (second, det2) = b.measure(1, &mut rng).unwrap();
            assert!(det2);
            assert_eq!(first, second);
            assert!(b.check_invariants());
        }
        assert!(StabilizerState::zero(1).is_random(1).is_err());
    }

    #[test]
    fn from_generators_handles_signs() {
        let s = StabilizerState::from_generators(&[p("-ZI"), p("-IZ")]).unwrap();
        let d = s.to_dense().unwrap();
        assert!((d.amplitude(0b11).norm() - 1.0).abs() < 1e-12);
        let s = StabilizerState::from_generators(&[p("XX"), p("-ZZ")]).unwrap();
        assert!(s.check_invariants());
        let d = s.to_dense().unwrap();
        // (|01⟩+|10⟩)/√2
        assert!((d.amplitude(0b01).norm_sqr() - 0.5).abs() < 1e-12);
        assert!((d.amplitude(0b10).norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn from_generators_rejects_bad_sets() {
        assert!(StabilizerState::from_generators(&[p("XI"), p("ZI")]).is_err());
        assert!(StabilizerState::from_generators(&[p("ZZ"), p("ZZ")]).is_err());
        assert!(StabilizerState::from_generators(&[p("iZ")]).is_err());
        assert!(StabilizerState::from_generators(&[p("ZZ"), p("-ZZ")]).is_err());
    }

    #[test]
    fn push_qubit_matches_dense() {
        let mut s = StabilizerState::zero(1);
        s.apply_gate(&H(0)).unwrap();
        s.push_qubit(true);
        s.apply_gate(&Cnot(0, 1)).unwrap();
        assert!(s.check_invariants());
        let d = s.to_dense().unwrap();
        let mut reference = DenseState::zero(1);
        reference.apply_gate(&H(0)).unwrap();
        reference.push_qubit(true);
        reference.apply_gate(&Cnot(0, 1)).unwrap();
        assert!((fidelity(&d, &reference) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let s = StabilizerState::parse_text("2\nXX\n-ZZ\n").unwrap();
        let t = StabilizerState::parse_text(&s.to_text()).unwrap();
        assert!((fidelity(&s.to_dense().unwrap(), &t.to_dense().unwrap()) - 1.0).abs() < 1e-12);
        assert!(StabilizerState::parse_text("2\nXX\n").is_err());
        assert!(StabilizerState::parse_text("1\nXX\n").is_err());
    }
}
