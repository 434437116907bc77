//! Link diagrams with a fixed underlying shadow, and the moves that act on them.
//!
//! A *shadow* is the 4-valent plane graph left when over/under information is
//! erased from a link diagram. Everything in this crate keeps the shadow
//! frozen and only toggles which strand passes over at each vertex:
//!
//! * [`diagram`] parses and validates diagrams, computes faces and
//!   orientations, and serializes back to text.
//! * [`labeling`] assigns the checkerboard-derived binary label to each
//!   diagram state and derives order/typing data for components.
//! * [`moves`] implements the arc crossing change (both variants) and the
//!   edge-based double switch, plus replayable move logs.
//! * [`stategraph`] builds the directed graph of all states under arc
//!   crossing changes and checks its degree structure.
//! * [`trail`] finds admissible trails in alternating diagrams and compiles
//!   them into move sequences realizing a single pair switch.
//! * [`census`] enumerates small connected shadows up to symmetry.
//! * [`braid`] builds diagrams from braid words and provides fixtures and
//!   seeded random links.
//! * [`unknot`] synthesizes move sequences bringing a link to an ascending
//!   (descending) position, with certificates.

pub mod braid;
pub mod census;
pub mod diagram;
pub mod error;
pub mod labeling;
pub mod moves;
pub mod stategraph;
pub mod trail;
pub mod unknot;

pub use diagram::{LinkDiagram, PortRef, Shadow};
pub use error::DiagramError;
