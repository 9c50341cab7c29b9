#![no_std]
extern crate alloc;

pub mod bounds;
pub mod combinatorics;
pub mod euler;
pub mod fieldeval;
pub mod lattice;
pub mod ns;
pub mod quadrature;
pub mod ring;
pub mod table;
