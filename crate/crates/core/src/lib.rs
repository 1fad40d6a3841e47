pub mod chain;
pub mod closedform;
pub mod evolve;
pub mod families;
pub mod qseries;
