pub mod analysis;
pub mod channels;
pub mod compiler;
pub mod engine;
pub mod experiment;
pub mod qasm;
pub mod qstate;
