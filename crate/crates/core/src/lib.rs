pub mod beamform;
pub mod channel;
pub mod hermitian;
pub mod mobility;
pub mod rng;
pub mod trace;
