pub mod cli_io;
pub mod complex_builder;
mod editor;
pub mod graph_core;
pub mod graph_ops;
pub mod orientation;
pub mod point_insertion;
pub mod spin_structure;
