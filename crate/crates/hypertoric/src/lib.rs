pub mod lattice;
pub mod arrangement;
pub mod ncalg;
pub mod beilinson;
pub mod cosheaf;
pub mod skeleton;
pub mod cli;
