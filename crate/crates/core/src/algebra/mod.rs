//! Finite-dimensional algebra: `o(n+1,1)`, its graded modules, the Kostant
//! complex and the maps built from it.

pub mod dimension;
pub mod forms;
pub mod hodge;
pub mod kostant;
pub mod lie;
pub mod module;

pub use dimension::{killing_tensor_dimension, module_dimension, tracefree_symmetric_dimension};
pub use forms::{codifferential, lie_differential, FormBlock, FormSpace};
pub use hodge::{HodgeDecomposition, KostantComplex};
pub use kostant::{cartan_product_projection, check_phi, phi_map, CartanProduct, PhiCheck};
pub use lie::{Grade, GradedLieAlgebra};
pub use module::{Component, GradedModule, ModuleFamily};

use crate::Result;

/// A module together with its algebra and Kostant complex, built once and
/// shared read-only.
#[derive(Debug, Clone)]
pub struct AlgebraContext {
    pub algebra: GradedLieAlgebra,
    pub module: GradedModule,
    pub complex: KostantComplex,
}

impl AlgebraContext {
    pub fn new(n: usize, family: ModuleFamily) -> Result<Self> {
        let algebra = GradedLieAlgebra::new(n)?;
        let module = GradedModule::new(&algebra, family)?;
        let complex = KostantComplex::new(&module)?;
        Ok(AlgebraContext {
            algebra,
            module,
            complex,
        })
    }

    pub fn n(&self) -> usize {
        self.algebra.n
    }
}
