//! One module per subcommand.

pub mod collapse_demo;
pub mod simulate;
pub mod sweep;
pub mod verify;
