pub mod simulate;
pub mod solve;
pub mod verify;
