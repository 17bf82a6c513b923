//! Luminous robots simulating restricted-repetition synchrony on top of
//! SSYNCH and ASYNCH schedulers: simulator, exhaustive verifier and
//! two-color impossibility search.

pub mod engine;
pub mod impossibility;
pub mod model;
pub mod protocols;
pub mod schedulers;
pub mod verifier;
