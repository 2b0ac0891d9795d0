//! Hardware-efficient brickwork ansatz.
//!
//! One layer is a rotation on every qubit for each configured axis, followed
//! by controlled-Z gates on the even nearest-neighbor pairs `(0,1), (2,3), …`
//! and then the odd pairs `(1,2), (3,4), …`. A final rotation layer closes the
//! circuit. Every rotation is trainable and starts at angle 0.

use super::{standard_gate, Circuit};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Brickwork {
    pub n_qubits: usize,
    pub layers: usize,
    /// Rotation gate names applied per qubit in each layer, e.g. `["ry", "rz"]`.
    pub rotations: Vec<&'static str>,
    pub final_rotations: bool,
}

impl Brickwork {
    pub fn new(n_qubits: usize, layers: usize) -> Self {
        Self {
            n_qubits,
            layers,
            rotations: vec!["ry", "rz"],
            final_rotations: true,
        }
    }

    pub fn rotations(mut self, names: &[&'static str]) -> Self {
        self.rotations = names.to_vec();
        self
    }

    pub fn final_rotations(mut self, on: bool) -> Self {
        self.final_rotations = on;
        self
    }

    /// Gate names and wires in application order, without a length cap.
    fn sequence(&self) -> impl Iterator<Item = (&'static str, Vec<usize>)> + '_ {
        let n = self.n_qubits;
        let rot_layer = move || {
            self.rotations
                .iter()
                .flat_map(move |&r| (0..n).map(move |q| (r, vec![q])))
        };
        let entangler = move || {
            (0..n.saturating_sub(1))
                .step_by(2)
                .chain((1..n.saturating_sub(1)).step_by(2))
                .map(|q| ("cz", vec![q, q + 1]))
        };
        (0..self.layers)
            .flat_map(move |_| rot_layer().chain(entangler()))
            .chain(self.final_rotations.then(rot_layer).into_iter().flatten())
    }

    pub fn gate_count(&self) -> usize {
        self.sequence().count()
    }

    pub fn build(&self) -> Result<Circuit> {
        self.build_capped(usize::MAX)
    }

    /// Builds at most `max_gates` gates of the sequence.
    pub fn build_capped(&self, max_gates: usize) -> Result<Circuit> {
        let mut c = Circuit::new(self.n_qubits)?;
        for (name, wires) in self.sequence().take(max_gates) {
            let param = super::ROTATION_GATES.contains(&name).then_some(0.0);
            c.add(name, &wires, param)?;
        }
        Ok(c)
    }

    /// Enough layers (without the closing rotation layer) to reach exactly
    /// `gates` gates, truncating the last layer.
    pub fn with_gate_count(n_qubits: usize, gates: usize, rotations: &[&'static str]) -> Result<Circuit> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("ansatz needs at least one qubit".into()));
        }
        for r in rotations {
            standard_gate(r, &[0], Some(0.0))?;
        }
        let per_layer = rotations.len() * n_qubits + n_qubits.saturating_sub(1);
        if per_layer == 0 {
            return Err(Error::InvalidArgument("empty ansatz layer".into()));
        }
        let layers = gates.div_ceil(per_layer);
        let b = Brickwork {
            n_qubits,
            layers,
            rotations: rotations.to_vec(),
            final_rotations: false,
        };
        b.build_capped(gates)
    }
}
