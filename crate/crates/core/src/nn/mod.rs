//! Small neural-network toolkit: scalar tape, batched ReLU MLP with input
//! tangents, Adam, and a text model container.

mod adam;
mod io;
mod mlp;
mod tape;

pub use adam::Adam;
pub use io::{ModelFile, NamedArray, MAGIC};
pub use mlp::{JvpPass, Mlp};
pub use tape::{Tape, Var};
