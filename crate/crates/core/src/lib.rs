//! Compressibility analysis of quantum Hamiltonian dynamics.
//!
//! Builds Hamiltonians and their trajectories, fits POD models to
//! trajectory covariances, predicts compression levels from the
//! time-bandwidth product and the spectrum of the sinc matrix, and refines
//! POD with a residual autoencoder.

pub mod autoencoder;
pub mod dynamics;
pub mod error;
pub mod expm;
pub mod hamiltonians;
pub mod linalg;
pub mod nldi;
pub mod pod;
pub mod rng;
pub mod spectral;
pub mod table;
pub mod unitary;

pub use error::{Error, Result};

/// Set the worker count used by rayon and the dense kernels.
///
/// Must run before any parallel work; rayon's global pool can only be
/// configured once, so later calls only affect the dense kernels.
pub fn set_threads(n: usize) {
    let n = n.max(1);
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    if n == 1 {
        faer::set_global_parallelism(faer::Par::Seq);
    } else {
        faer::set_global_parallelism(faer::Par::rayon(n));
    }
}
