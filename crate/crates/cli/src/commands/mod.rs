pub mod compare;
pub mod infer;
pub mod optimize;
pub mod sample;
pub mod verify;
