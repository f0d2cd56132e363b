//! Clifford circuits over {H, S, CNOT} and their action on Pauli operators.
//!
//! Two conjugation paths are kept: replaying the gate list, which is the
//! reference, and a compiled [`CliffordTableau`] holding the images of every
//! `X_j` and `Z_j`, which is cheaper when many Paulis go through the same
//! circuit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Cnot(usize, usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            CliffordGate::H(q) | CliffordGate::S(q) => (q, None),
            CliffordGate::Cnot(c, t) => (c, Some(t)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn check(&self, arity: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= arity {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    bound: arity,
                    what: "qubits",
                });
            }
        }
        if let CliffordGate::Cnot(c, t) = *self {
            if c == t {
                return Err(Error::InvalidGate(format!(
                    "CNOT with control == target == {c}"
                )));
            }
        }
        Ok(())
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn map_qubits(&self, mut f: impl FnMut(usize) -> usize) -> CliffordGate {
        match *self {
            CliffordGate::H(q) => CliffordGate::H(f(q)),
            CliffordGate::S(q) => CliffordGate::S(f(q)),
            CliffordGate::Cnot(c, t) => CliffordGate::Cnot(f(c), f(t)),
        }
    }

    /// `P ← G P G†`. Indices must be in range.
    #[inline]
    pub fn conjugate_in_place(&self, p: &mut PauliOperator) {
        match *self {
            CliffordGate::H(q) => p.conj_h(q),
            CliffordGate::S(q) => p.conj_s(q),
            CliffordGate::Cnot(c, t) => p.conj_cnot(c, t),
        }
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliffordGate::H(q) => write!(f, "H {q}"),
            CliffordGate::S(q) => write!(f, "S {q}"),
            CliffordGate::Cnot(c, t) => write!(f, "CNOT {c} {t}"),
        }
    }
}

/// Expands one line of the gate-list format into core gates. Aliases
/// (`SDG`, `CZ`, `CX`, `X`, `Y`, `Z`) are rewritten into {H, S, CNOT}; the
/// expansions agree with the named gate up to a global phase.
pub fn parse_gate_line(line: &str) -> Result<Vec<CliffordGate>> {
    let mut parts = line.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| Error::parse(0, "empty gate line"))?
        .to_ascii_uppercase();
    let args: Vec<usize> = parts
        .map(|a| {
            a.parse()
                .map_err(|_| Error::parse(0, format!("bad qubit index {a:?}")))
        })
        .collect::<Result<_>>()?;
    let want = |k: usize| -> Result<()> {
        if args.len() != k {
            Err(Error::parse(
                0,
                format!("{name} takes {k} qubit argument(s), got {}", args.len()),
            ))
        } else {
            Ok(())
        }
    };
    use CliffordGate::*;
    Ok(match name.as_str() {
        "H" => {
            want(1)?;
            vec![H(args[0])]
        }
        "S" => {
            want(1)?;
            vec![S(args[0])]
        }
        "CNOT" | "CX" => {
            want(2)?;
            vec![Cnot(args[0], args[1])]
        }
        "SDG" | "SDAG" => {
            want(1)?;
            vec![S(args[0]); 3]
        }
        "Z" => {
            want(1)?;
            vec![S(args[0]); 2]
        }
        "X" => {
            want(1)?;
            let q = args[0];
            vec![H(q), S(q), S(q), H(q)]
        }
        "Y" => {
            want(1)?;
            let q = args[0];
            vec![S(q), S(q), H(q), S(q), S(q), H(q)]
        }
        "CZ" => {
            want(2)?;
            let (a, b) = (args[0], args[1]);
            vec![H(b), Cnot(a, b), H(b)]
        }
        other => return Err(Error::parse(0, format!("unknown gate {other:?}"))),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    arity: usize,
    gates: Vec<CliffordGate>,
}

impl CliffordCircuit {
    pub fn new(arity: usize, gates: Vec<CliffordGate>) -> Result<Self> {
        for g in &gates {
            g.check(arity)?;
        }
        Ok(CliffordCircuit { arity, gates })
    }

    pub fn empty(arity: usize) -> Self {
        CliffordCircuit {
            arity,
            gates: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn gates(&self) -> &[CliffordGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: CliffordGate) -> Result<()> {
        gate.check(self.arity)?;
        self.gates.push(gate);
        Ok(())
    }

    /// The circuit that runs `self` and then `next`, i.e. the unitary
    /// `next · self`.
    pub fn then(&self, next: &CliffordCircuit) -> Result<CliffordCircuit> {
        self.check_arity(next.arity)?;
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&next.gates);
        Ok(CliffordCircuit {
            arity: self.arity,
            gates,
        })
    }

    /// `U P U†` by replaying the gates in order.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        self.check_arity(p.num_qubits())?;
        let mut out = p.clone();
        for g in &self.gates {
            g.conjugate_in_place(&mut out);
        }
        Ok(out)
    }

    pub fn compile_tableau(&self) -> CliffordTableau {
        let n = self.arity;
        let mut x_images = Vec::with_capacity(n);
        let mut z_images = Vec::with_capacity(n);
        for j in 0..n {
            let mut xj = PauliOperator::single(n, j, 'X').expect("in range");
            let mut zj = PauliOperator::single(n, j, 'Z').expect("in range");
            for g in &self.gates {
                g.conjugate_in_place(&mut xj);
                g.conjugate_in_place(&mut zj);
            }
            x_images.push(xj);
            z_images.push(zj);
        }
        CliffordTableau {
            arity: n,
            x_images,
            z_images,
        }
    }

    /// Places the circuit on qubits `offset..offset + arity` of a
    /// `total`-qubit register.
    pub fn embed(&self, offset: usize, total: usize) -> Result<CliffordCircuit> {
        if offset + self.arity > total {
            return Err(Error::IndexOutOfRange {
                index: offset + self.arity,
                bound: total,
                what: "embedding register",
            });
        }
        Ok(CliffordCircuit {
            arity: total,
            gates: self
                .gates
                .iter()
                .map(|g| g.map_qubits(|q| q + offset))
                .collect(),
        })
    }

    /// Gate-list text: an optional `qubits N` header, then one gate per
    /// line. `#` starts a comment. Without a header the arity is one more
    /// than the largest index used.
    pub fn parse_text(text: &str) -> Result<CliffordCircuit> {
        let mut arity = None;
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let lower = line.to_ascii_lowercase();
            if let Some(rest) = lower.strip_prefix("qubits") {
                let n = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad qubit count in {line:?}")))?;
                arity = Some(n);
                continue;
            }
            let expanded = parse_gate_line(line).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::parse(lineno, msg),
                other => other,
            })?;
            gates.extend(expanded);
        }
        let arity = arity.unwrap_or_else(|| {
            gates
                .iter()
                .flat_map(|g| g.qubits())
                .max()
                .map_or(0, |m| m + 1)
        });
        for (k, g) in gates.iter().enumerate() {
            g.check(arity)
                .map_err(|e| Error::parse(0, format!("gate {k}: {e}")))?;
        }
        Ok(CliffordCircuit { arity, gates })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.arity);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n != self.arity {
            return Err(Error::Dimension {
                expected: self.arity,
                found: n,
            });
        }
        Ok(())
    }
}

impl FromStr for CliffordCircuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CliffordCircuit::parse_text(s)
    }
}

/// Images of the generators `X_j`, `Z_j` under conjugation by a Clifford
/// unitary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTableau {
    arity: usize,
    x_images: Vec<PauliOperator>,
    z_images: Vec<PauliOperator>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        CliffordCircuit::empty(n).compile_tableau()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn x_image(&self, j: usize) -> &PauliOperator {
        &self.x_images[j]
    }

    pub fn z_image(&self, j: usize) -> &PauliOperator {
        &self.z_images[j]
    }

    /// `U P U† = i^k ∏_j (U X_j U†)^{x_j} (U Z_j U†)^{z_j}`, multiplied in
    /// qubit order so the X-before-Z convention is respected.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.num_qubits() != self.arity {
            return Err(Error::Dimension {
                expected: self.arity,
                found: p.num_qubits(),
            });
        }
        let mut out = PauliOperator::identity(self.arity);
        out.set_phase_exp(p.phase_exp());
        for j in 0..self.arity {
            if p.x(j) {
                out.mul_assign_unchecked(&self.x_images[j]);
            }
            if p.z(j) {
                out.mul_assign_unchecked(&self.z_images[j]);
            }
        }
        Ok(out)
    }

    /// True when the images satisfy the commutation relations of the
    /// generators: `X_j, Z_k` anticommute iff `j == k`, all other pairs
    /// commute, and every image is Hermitian.
    pub fn is_symplectic(&self) -> bool {
        let n = self.arity;
        let all = self.x_images.iter().chain(&self.z_images);
        if !all.clone().all(PauliOperator::is_hermitian) {
            return false;
        }
        for j in 0..n {
            for k in 0..n {
                let xz = self.x_images[j].commutes_with(&self.z_images[k]).unwrap();
                if xz == (j == k) {
                    return false;
                }
                if !self.x_images[j].commutes_with(&self.x_images[k]).unwrap()
                    || !self.z_images[j].commutes_with(&self.z_images[k]).unwrap()
                {
                    return false;
                }
            }
        }
        true
    }
}
