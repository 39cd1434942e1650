//! Construction and verification engine for one-cusped reflectofolds built
//! from a hyperbolic Coxeter 4-polytope by iterated doubling.

pub mod coxeter;
pub mod doubling;
pub mod flatmfd;
pub mod geom;
pub mod golden;
pub mod label;
pub mod linkgeom;
pub mod pipeline;
pub mod reflectofold;
pub mod svg;
pub mod table;
