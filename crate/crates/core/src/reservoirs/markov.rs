use std::borrow::Cow;
use std::sync::Arc;

use crate::dynamics::{StepKernel, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;

use super::Reservoir;

/// `rho_{k+1} = exp(L(s_{k+1}) dt) rho_k`.
#[derive(Clone, Debug)]
pub struct MarkovReservoir {
    kernel: Arc<StepKernel>,
    state: DensityMatrix,
}

impl MarkovReservoir {
    pub fn new(kernel: Arc<StepKernel>, initial: DensityMatrix) -> Result<Self> {
        if initial.dim() != kernel.spec().dim() {
            return Err(Error::Dimension(format!(
                "initial state dim {} for a {}-qubit reservoir",
                initial.dim(),
                kernel.spec().n_qubits()
            )));
        }
        Ok(Self { kernel, state: initial })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn dt(&self) -> f64 {
        self.kernel.dt()
    }
}

impl Reservoir for MarkovReservoir {
    fn kernel(&self) -> &Arc<StepKernel> {
        &self.kernel
    }

    fn advance(&mut self, propagator: &Superoperator) -> Result<()> {
        self.state = propagator.apply(&self.state);
        self.state.renormalize();
        Ok(())
    }

    fn reservoir_state(&self) -> Cow<'_, DensityMatrix> {
        Cow::Borrowed(&self.state)
    }

    fn full_state(&self) -> &DensityMatrix {
        &self.state
    }
}
