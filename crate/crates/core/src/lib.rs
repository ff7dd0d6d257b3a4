//! Witness operators, Bell-CHSH quantities and teleportation fidelities for
//! controlled quantum teleportation over three-qubit states.
//!
//! Qubit ordering is big-endian throughout: `|abc⟩` has index `4a + 2b + c`.
//! Three-qubit states carry a [`states::QubitRoles`] map naming the slot of
//! each party.

pub mod chsh;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod optimizer;
pub mod power;
pub mod sampling;
pub mod states;
pub mod teleport;
pub mod witness;

pub use chsh::{CorrelationTensor, PlaneLabel};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use noise::{ChannelKind, ChannelSpec, KrausSet};
pub use optimizer::{SearchConfig, SearchResult};
pub use power::{CollapseResult, Flag, MeasurementDirection, PowerReport};
pub use states::{BellLabel, DensityMatrix, PreparedState, QubitRoles, StateSpec, ThreeQubitState};
pub use teleport::FidelityBundle;
pub use witness::{BoundPair, DetectionInterval, WitnessSpec};
