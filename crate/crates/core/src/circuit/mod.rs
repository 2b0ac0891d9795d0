//! Gates, circuits and their JSON form.
//!
//! Gate matrices act on their wires in the listed order, with the first wire as
//! the most significant bit of the local index. Rotations are
//! `R_a(θ) = exp(−iθσ_a/2)`.

pub mod ansatz;
mod dense;

pub use dense::{apply_dense, circuit_unitary, simulate_dense, StateVector, DENSE_QUBIT_LIMIT};
pub use ansatz::Brickwork;

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{adjoint, contract_pair, DenseTensor};
use crate::C64;

pub const STANDARD_GATES: [&str; 13] = [
    "h", "x", "y", "z", "s", "t", "rx", "ry", "rz", "cnot", "cz", "crz", "swap",
];

/// Gates with a single angle and a two-term parameter-shift rule.
pub const ROTATION_GATES: [&str; 4] = ["rx", "ry", "rz", "crz"];

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    name: String,
    wires: Vec<usize>,
    param: Option<f64>,
    matrix: DenseTensor,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat(dim: usize, entries: Vec<C64>) -> DenseTensor {
    DenseTensor::from_parts(vec![dim, dim], entries)
}

fn arity(name: &str) -> Option<usize> {
    match name {
        "h" | "x" | "y" | "z" | "s" | "t" | "rx" | "ry" | "rz" => Some(1),
        "cnot" | "cz" | "crz" | "swap" => Some(2),
        _ => None,
    }
}

fn standard_matrix(name: &str, theta: f64) -> DenseTensor {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match name {
        "h" => mat(2, vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]),
        "x" => mat(2, vec![o, l, l, o]),
        "y" => mat(2, vec![o, c(0.0, -1.0), c(0.0, 1.0), o]),
        "z" => mat(2, vec![l, o, o, c(-1.0, 0.0)]),
        "s" => mat(2, vec![l, o, o, c(0.0, 1.0)]),
        "t" => mat(2, vec![l, o, o, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]),
        "rx" => mat(2, vec![c(ch, 0.0), c(0.0, -sh), c(0.0, -sh), c(ch, 0.0)]),
        "ry" => mat(2, vec![c(ch, 0.0), c(-sh, 0.0), c(sh, 0.0), c(ch, 0.0)]),
        "rz" => mat(2, vec![c(ch, -sh), o, o, c(ch, sh)]),
        "cnot" => mat(4, vec![l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o]),
        "cz" => mat(4, vec![l, o, o, o, o, l, o, o, o, o, l, o, o, o, o, c(-1.0, 0.0)]),
        "crz" => mat(4, vec![l, o, o, o, o, l, o, o, o, o, c(ch, -sh), o, o, o, o, c(ch, sh)]),
        "swap" => mat(4, vec![l, o, o, o, o, o, l, o, o, l, o, o, o, o, o, l]),
        _ => unreachable!("checked by caller"),
    }
}

/// Builds one of the predefined gates.
pub fn standard_gate(name: &str, wires: &[usize], param: Option<f64>) -> Result<Gate> {
    let expected = arity(name).ok_or_else(|| Error::UnknownGate(name.to_string()))?;
    if wires.len() != expected {
        return Err(Error::ArityMismatch {
            name: name.to_string(),
            expected,
            got: wires.len(),
        });
    }
    check_distinct(wires)?;
    let is_rotation = ROTATION_GATES.contains(&name);
    match (is_rotation, param) {
        (true, None) => return Err(Error::MissingParam(name.to_string())),
        (false, Some(_)) => return Err(Error::UnexpectedParam(name.to_string())),
        (true, Some(t)) if !t.is_finite() => {
            return Err(Error::InvalidArgument(format!("non-finite angle for `{name}`")))
        }
        _ => {}
    }
    Ok(Gate {
        name: name.to_string(),
        wires: wires.to_vec(),
        param,
        matrix: standard_matrix(name, param.unwrap_or(0.0)),
    })
}

fn check_distinct(wires: &[usize]) -> Result<()> {
    let set: BTreeSet<_> = wires.iter().collect();
    if set.len() != wires.len() {
        return Err(Error::InvalidArgument(format!("repeated wire in {wires:?}")));
    }
    Ok(())
}

/// True iff `‖U†U − I‖_max ≤ tol`.
pub fn validate_unitary(matrix: &DenseTensor, tol: f64) -> Result<bool> {
    let shape = matrix.shape();
    if shape.len() != 2 || shape[0] != shape[1] || !shape[0].is_power_of_two() {
        return Err(Error::ShapeError(format!(
            "expected a square matrix with power-of-two dimension, got {shape:?}"
        )));
    }
    let prod = contract_pair(&adjoint(matrix)?, &[1], matrix, &[0])?;
    Ok(prod.max_abs_diff(&DenseTensor::identity(shape[0])) <= tol)
}

impl Gate {
    /// A user-supplied gate. The matrix must be unitary unless
    /// `allow_nonunitary` is set, which permits projector-like insertions.
    pub fn custom(
        name: &str,
        wires: &[usize],
        matrix: DenseTensor,
        allow_nonunitary: bool,
    ) -> Result<Gate> {
        if wires.is_empty() {
            return Err(Error::InvalidArgument("gate needs at least one wire".into()));
        }
        check_distinct(wires)?;
        let dim = 1usize << wires.len();
        let matrix = if matrix.shape() == [dim, dim] {
            matrix
        } else if matrix.len() == dim * dim {
            matrix.reshape(vec![dim, dim])?
        } else {
            return Err(Error::ShapeError(format!(
                "{}-wire gate needs a {dim}x{dim} matrix, got {:?}",
                wires.len(),
                matrix.shape()
            )));
        };
        if !allow_nonunitary && !validate_unitary(&matrix, 1e-10)? {
            return Err(Error::NotUnitary(1e-10));
        }
        Ok(Gate {
            name: name.to_string(),
            wires: wires.to_vec(),
            param: None,
            matrix,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn param(&self) -> Option<f64> {
        self.param
    }

    /// `2^k × 2^k` matrix for `k` wires.
    pub fn matrix(&self) -> &DenseTensor {
        &self.matrix
    }

    pub fn arity(&self) -> usize {
        self.wires.len()
    }

    pub fn is_standard(&self) -> bool {
        STANDARD_GATES.contains(&self.name.as_str())
    }

    pub fn is_rotation(&self) -> bool {
        ROTATION_GATES.contains(&self.name.as_str())
    }

    /// Same gate at a different angle.
    pub fn with_param(&self, theta: f64) -> Result<Gate> {
        if !self.is_rotation() {
            return Err(Error::UnexpectedParam(self.name.clone()));
        }
        standard_gate(&self.name, &self.wires, Some(theta))
    }

    /// `dU/dθ` at the gate's current angle.
    pub fn derivative(&self) -> Result<DenseTensor> {
        let theta = match (self.is_rotation(), self.param) {
            (true, Some(t)) => t,
            _ => return Err(Error::UnsupportedGateForShift(self.name.clone())),
        };
        // d/dθ exp(−iθσ/2) = −(i/2) σ exp(−iθσ/2)
        let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let o = c(0.0, 0.0);
        let half = 0.5;
        Ok(match self.name.as_str() {
            "rx" => mat(2, vec![c(-half * sh, 0.0), c(0.0, -half * ch), c(0.0, -half * ch), c(-half * sh, 0.0)]),
            "ry" => mat(2, vec![c(-half * sh, 0.0), c(-half * ch, 0.0), c(half * ch, 0.0), c(-half * sh, 0.0)]),
            "rz" => mat(2, vec![c(-half * sh, -half * ch), o, o, c(-half * sh, half * ch)]),
            "crz" => mat(
                4,
                vec![
                    o, o, o, o, o, o, o, o, o, o,
                    c(-half * sh, -half * ch), o, o, o, o,
                    c(-half * sh, half * ch),
                ],
            ),
            _ => unreachable!("rotation names are exhaustive"),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    trainable: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("a circuit needs at least one qubit".into()));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            trainable: Vec::new(),
        })
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>, trainable: Vec<usize>) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        for t in trainable {
            c.mark_trainable(t)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<usize> {
        for &w in gate.wires() {
            if w >= self.n_qubits {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    n: self.n_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(self.gates.len() - 1)
    }

    /// Appends a standard gate; rotations are marked trainable.
    pub fn add(&mut self, name: &str, wires: &[usize], param: Option<f64>) -> Result<usize> {
        let g = standard_gate(name, wires, param)?;
        let trainable = g.is_rotation();
        let pos = self.push(g)?;
        if trainable {
            self.trainable.push(pos);
        }
        Ok(pos)
    }

    pub fn mark_trainable(&mut self, position: usize) -> Result<()> {
        let g = self.gates.get(position).ok_or_else(|| {
            Error::InvalidArgument(format!("trainable slot {position} is past the last gate"))
        })?;
        if !g.is_rotation() {
            return Err(Error::InvalidArgument(format!(
                "gate {position} (`{}`) has no trainable angle",
                g.name()
            )));
        }
        if self.trainable.contains(&position) {
            return Err(Error::InvalidArgument(format!("slot {position} listed twice")));
        }
        self.trainable.push(position);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate positions whose angles form the parameter vector, in order.
    pub fn trainable(&self) -> &[usize] {
        &self.trainable
    }

    pub fn num_params(&self) -> usize {
        self.trainable.len()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.trainable
            .iter()
            .map(|&p| self.gates[p].param().expect("trainable gates carry an angle"))
            .collect()
    }

    /// Copy with the trainable angles replaced by `theta`.
    pub fn with_parameters(&self, theta: &[f64]) -> Result<Circuit> {
        if theta.len() != self.trainable.len() {
            return Err(Error::ParamCountMismatch {
                expected: self.trainable.len(),
                got: theta.len(),
            });
        }
        let mut out = self.clone();
        for (&pos, &t) in self.trainable.iter().zip(theta) {
            out.gates[pos] = self.gates[pos].with_param(t)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CircuitDoc {
            n_qubits: self.n_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| GateDoc {
                    name: g.name.clone(),
                    wires: g.wires.clone(),
                    param: g.param,
                    matrix: (!g.is_standard())
                        .then(|| g.matrix.data().iter().map(|z| [z.re, z.im]).collect()),
                })
                .collect(),
            trainable: self.trainable.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        let mut c = Circuit::new(doc.n_qubits)?;
        for g in doc.gates {
            let gate = match g.matrix {
                Some(m) => {
                    let dim = 1usize << g.wires.len();
                    let t = DenseTensor::new(
                        vec![dim, dim],
                        m.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
                    )?;
                    Gate::custom(&g.name, &g.wires, t, false)?
                }
                None => standard_gate(&g.name, &g.wires, g.param)?,
            };
            c.push(gate)?;
        }
        for t in doc.trainable {
            c.mark_trainable(t)?;
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    n_qubits: usize,
    gates: Vec<GateDoc>,
    #[serde(default)]
    trainable: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    name: String,
    wires: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    param: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    matrix: Option<Vec<[f64; 2]>>,
}

/// Random circuit over the standard gate set. Every rotation is trainable
/// and its angle is uniform in `[−π, π)`.
pub fn random_circuit<R: Rng + ?Sized>(n_qubits: usize, num_gates: usize, rng: &mut R) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits)?;
    let pool: Vec<&str> = if n_qubits >= 2 {
        STANDARD_GATES.to_vec()
    } else {
        STANDARD_GATES.iter().copied().filter(|g| arity(g) == Some(1)).collect()
    };
    for _ in 0..num_gates {
        let name = pool[rng.random_range(0..pool.len())];
        let wires = pick_wires(n_qubits, arity(name).expect("standard"), rng);
        let param = ROTATION_GATES
            .contains(&name)
            .then(|| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        c.add(name, &wires, param)?;
    }
    Ok(c)
}

pub(crate) fn pick_wires<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut wires = Vec::with_capacity(k);
    while wires.len() < k {
        let w = rng.random_range(0..n);
        if !wires.contains(&w) {
            wires.push(w);
        }
    }
    wires
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_construction_rules() {
        assert!(matches!(standard_gate("foo", &[0], None), Err(Error::UnknownGate(_))));
        assert!(matches!(standard_gate("cnot", &[0], None), Err(Error::ArityMismatch { .. })));
        assert!(matches!(standard_gate("rx", &[0], None), Err(Error::MissingParam(_))));
        assert!(matches!(standard_gate("h", &[0], Some(1.0)), Err(Error::UnexpectedParam(_))));
        assert!(standard_gate("cz", &[1, 1], None).is_err());
    }

    #[test]
    fn textbook_matrices() {
        let rx0 = standard_gate("rx", &[0], Some(0.0)).unwrap();
        assert!(rx0.matrix().max_abs_diff(&DenseTensor::identity(2)) < 1e-15);
        let h = standard_gate("h", &[0], None).unwrap();
        let s = FRAC_1_SQRT_2;
        let expect = DenseTensor::from_real(vec![2, 2], &[s, s, s, -s]).unwrap();
        assert_eq!(h.matrix(), &expect);
    }

    #[test]
    fn unitarity_checks() {
        assert!(validate_unitary(&DenseTensor::identity(4), 1e-10).unwrap());
        let d = DenseTensor::from_real(vec![2, 2], &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(!validate_unitary(&d, 1e-10).unwrap());
        for name in STANDARD_GATES {
            let wires: Vec<usize> = (0..arity(name).unwrap()).collect();
            let p = ROTATION_GATES.contains(&name).then_some(0.7);
            assert!(validate_unitary(standard_gate(name, &wires, p).unwrap().matrix(), 1e-12).unwrap(), "{name}");
        }
        assert!(validate_unitary(&DenseTensor::zeros(vec![3, 3]), 1e-10).is_err());
        assert!(matches!(Gate::custom("p", &[0], d.clone(), false), Err(Error::NotUnitary(_))));
        assert!(Gate::custom("p", &[0], d, true).is_ok());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for name in ROTATION_GATES {
            let wires: Vec<usize> = (0..arity(name).unwrap()).collect();
            let theta = 0.43;
            let h = 1e-6;
            let g = standard_gate(name, &wires, Some(theta)).unwrap();
            let plus = standard_gate(name, &wires, Some(theta + h)).unwrap();
            let minus = standard_gate(name, &wires, Some(theta - h)).unwrap();
            let fd = plus.matrix().sub(minus.matrix()).unwrap().scale(C64::new(0.5 / h, 0.0));
            assert!(g.derivative().unwrap().max_abs_diff(&fd) < 1e-9, "{name}");
        }
        assert!(standard_gate("h", &[0], None).unwrap().derivative().is_err());
    }

    #[test]
    fn json_format() {
        let text = r#"{"n_qubits": 4, "gates": [{"name":"rx","wires":[0],"param":0.3},{"name":"cnot","wires":[0,1]}], "trainable":[0]}"#;
        let c = Circuit::from_json(text).unwrap();
        assert_eq!(c.n_qubits(), 4);
        assert_eq!(c.trainable(), &[0]);
        assert_eq!(c.parameters(), vec![0.3]);
        assert_eq!(
            c.to_json().unwrap(),
            r#"{"n_qubits":4,"gates":[{"name":"rx","wires":[0],"param":0.3},{"name":"cnot","wires":[0,1]}],"trainable":[0]}"#
        );
        assert!(Circuit::from_json(r#"{"n_qubits":2,"gates":[{"name":"h","wires":[2]}]}"#).is_err());
        assert!(Circuit::from_json(r#"{"n_qubits":2,"gates":[{"name":"h","wires":[0]}],"trainable":[0]}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::SeedableRng;

        proptest! {
            #[test]
            fn json_round_trip(seed in any::<u64>(), n in 1usize..6, gates in 0usize..30) {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut c = random_circuit(n, gates, &mut rng).unwrap();
                let iswap = DenseTensor::new(vec![4, 4], vec![
                    C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0),
                ]).unwrap();
                if n >= 2 {
                    c.push(Gate::custom("iswap", &[n - 1, 0], iswap, false).unwrap()).unwrap();
                }
                let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
                prop_assert_eq!(back, c);
            }
        }
    }
}
