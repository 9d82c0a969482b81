pub mod duality;
pub mod error;
pub mod frame;
pub mod io;
pub mod numerics;
pub mod rng;
pub mod weaving;
pub mod certificates;
pub mod cli;
