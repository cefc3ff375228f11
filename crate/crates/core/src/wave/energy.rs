//! Collocated energy `eps |grad u|^2 + sum_j |X_j u|^2 + |u_t|^2`.

use super::WaveState;
use crate::geometry::AssembledOperator;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyEntry {
    pub gradient: f64,
    pub fields: f64,
    pub kinetic: f64,
    pub total: f64,
}

pub fn energy(state: &WaveState, op: &AssembledOperator) -> EnergyEntry {
    let gradient = if op.epsilon() > 0.0 {
        op.epsilon() * op.gradient_energy(&state.u)
    } else {
        0.0
    };
    let fields = op.fields_energy(&state.u);
    let kinetic = op.grid().dot_w(&state.v, &state.v);
    EnergyEntry {
        gradient,
        fields,
        kinetic,
        total: gradient + fields + kinetic,
    }
}
