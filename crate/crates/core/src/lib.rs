pub mod bench;
pub mod io;
pub mod model;
pub mod modular;
pub mod monolithic;
pub mod sim;
pub mod smt;
pub mod temporal;
