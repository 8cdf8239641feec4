//! Support code for the `gfmm` command-line tool.

pub mod bench;
