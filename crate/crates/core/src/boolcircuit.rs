//! Classical Boolean circuits over wires.
//!
//! Wires `0..inputs` are the inputs; gate `k` defines wire `inputs + k`.
//! Gates may only read earlier wires.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoolGate {
    Xor(Vec<usize>),
    And(Vec<usize>),
    Or(Vec<usize>),
    Not(usize),
    Const(bool),
}

impl BoolGate {
    fn reads(&self) -> &[usize] {
        match self {
            BoolGate::Xor(w) | BoolGate::And(w) | BoolGate::Or(w) => w,
            BoolGate::Not(w) => std::slice::from_ref(w),
            BoolGate::Const(_) => &[],
        }
    }

    fn remap(&self, f: impl Fn(usize) -> usize) -> BoolGate {
        match self {
            BoolGate::Xor(w) => BoolGate::Xor(w.iter().map(|&a| f(a)).collect()),
            BoolGate::And(w) => BoolGate::And(w.iter().map(|&a| f(a)).collect()),
            BoolGate::Or(w) => BoolGate::Or(w.iter().map(|&a| f(a)).collect()),
            BoolGate::Not(a) => BoolGate::Not(f(*a)),
            BoolGate::Const(b) => BoolGate::Const(*b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct BoolCircuit {
    inputs: usize,
    gates: Vec<BoolGate>,
    outputs: Vec<usize>,
}

#[derive(Deserialize)]
struct RawCircuit {
    inputs: usize,
    #[serde(default)]
    gates: Vec<BoolGate>,
    outputs: Vec<usize>,
}

impl TryFrom<RawCircuit> for BoolCircuit {
    type Error = Error;
    fn try_from(r: RawCircuit) -> Result<Self> {
        BoolCircuit::new(r.inputs, r.gates, r.outputs)
    }
}

impl BoolCircuit {
    pub fn new(inputs: usize, gates: Vec<BoolGate>, outputs: Vec<usize>) -> Result<Self> {
        for (k, g) in gates.iter().enumerate() {
            let bound = inputs + k;
            if let Some(&w) = g.reads().iter().find(|&&w| w >= bound) {
                return Err(Error::Protocol(format!(
                    "gate {k} reads wire {w}, which is not yet defined"
                )));
            }
        }
        let wires = inputs + gates.len();
        if let Some(&w) = outputs.iter().find(|&&w| w >= wires) {
            return Err(Error::Protocol(format!(
                "output wire {w} out of range ({wires} wires)"
            )));
        }
        Ok(BoolCircuit {
            inputs,
            gates,
            outputs,
        })
    }

    /// Outputs the selected inputs.
    pub fn projection(inputs: usize, selected: Vec<usize>) -> Result<Self> {
        BoolCircuit::new(inputs, Vec::new(), selected)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn gates(&self) -> &[BoolGate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn eval(&self, input: &BitString) -> Result<BitString> {
        if input.len() != self.inputs {
            return Err(Error::width("circuit input", self.inputs, input.len()));
        }
        let mut wires: Vec<bool> = input.iter().collect();
        wires.reserve(self.gates.len());
        for g in &self.gates {
            let v = match g {
                BoolGate::Xor(w) => w.iter().fold(false, |acc, &a| acc ^ wires[a]),
                BoolGate::And(w) => w.iter().all(|&a| wires[a]),
                BoolGate::Or(w) => w.iter().any(|&a| wires[a]),
                BoolGate::Not(a) => !wires[*a],
                BoolGate::Const(b) => *b,
            };
            wires.push(v);
        }
        Ok(BitString::from_bools(
            self.outputs.iter().map(|&w| wires[w]),
        ))
    }
}

/// Incremental construction of a circuit by inlining other circuits.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    inputs: usize,
    gates: Vec<BoolGate>,
}

impl CircuitBuilder {
    pub fn new(inputs: usize) -> Self {
        CircuitBuilder {
            inputs,
            gates: Vec::new(),
        }
    }

    pub fn constant(&mut self, b: bool) -> usize {
        self.push(BoolGate::Const(b))
    }

    pub fn push(&mut self, g: BoolGate) -> usize {
        self.gates.push(g);
        self.inputs + self.gates.len() - 1
    }

    /// Copies `c` with its inputs wired to `args`; returns its output wires.
    pub fn inline(&mut self, c: &BoolCircuit, args: &[usize]) -> Result<Vec<usize>> {
        if args.len() != c.inputs {
            return Err(Error::width(
                "inlined circuit arguments",
                c.inputs,
                args.len(),
            ));
        }
        let base = self.inputs + self.gates.len();
        let map = |w: usize| {
            if w < c.inputs {
                args[w]
            } else {
                base + (w - c.inputs)
            }
        };
        for g in &c.gates {
            self.gates.push(g.remap(map));
        }
        Ok(c.outputs.iter().map(|&w| map(w)).collect())
    }

    pub fn finish(self, outputs: Vec<usize>) -> Result<BoolCircuit> {
        BoolCircuit::new(self.inputs, self.gates, outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn json_form() {
        let c: BoolCircuit = serde_json::from_str(
            r#"{"inputs":2,"gates":[{"xor":[0,1]},{"and":[0,1]},{"not":3},{"const":true}],"outputs":[2,4,5]}"#,
        )
        .unwrap();
        assert_eq!(c.eval(&bits("11")).unwrap(), bits("001"));
        assert_eq!(c.eval(&bits("10")).unwrap(), bits("111"));
        let back: BoolCircuit = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_forward_references() {
        assert!(BoolCircuit::new(1, vec![BoolGate::Not(1)], vec![1]).is_err());
        assert!(BoolCircuit::new(1, vec![], vec![1]).is_err());
        assert!(serde_json::from_str::<BoolCircuit>(r#"{"inputs":1,"outputs":[3]}"#).is_err());
    }

    #[test]
    fn inlining_composes() {
        let xor = BoolCircuit::new(2, vec![BoolGate::Xor(vec![0, 1])], vec![2]).unwrap();
        let mut b = CircuitBuilder::new(3);
        let t = b.inline(&xor, &[0, 1]).unwrap();
        let u = b.inline(&xor, &[t[0], 2]).unwrap();
        let parity = b.finish(u).unwrap();
        for x in 0..8u64 {
            let input = BitString::from_u64(x, 3);
            assert_eq!(parity.eval(&input).unwrap().get(0), x.count_ones() % 2 == 1);
        }
    }
}
