//! Explicit diffeomorphisms of `M_n = #ⁿ(S² × S¹)` realizing the Nielsen
//! generators of `Out(F_n)`, and a numerical certificate that their twisting
//! class vanishes.
//!
//! * [`freegroup`]: words, Nielsen automorphisms, mod-2 abelianization.
//! * [`smooth`]: the cut-off `ψ` and the twist step `η`.
//! * [`charts`]: chart models and the maps `F_{i,j}`, `G_j`, sphere twists.
//! * [`curve`]: tracked loops, images under maps, crossing words.
//! * [`loopclass`]: the `Z/2` class of a loop in `GL⁺(3, R)`.
//! * [`crosshom`]: derivative paths along loops and twist vectors.
//! * [`modgroup`]: the split extension and its section.
//! * [`cli`]: run configuration, verification report and CSV dumps.

pub mod charts;
pub mod cli;
pub mod crosshom;
pub mod curve;
pub mod freegroup;
pub mod loopclass;
pub mod modgroup;
pub mod smooth;
