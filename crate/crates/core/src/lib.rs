pub mod app;
pub mod chain;
pub mod dataset;
pub mod error;
pub mod io;
pub mod lda;
pub mod linalg;
pub mod oracle;
pub mod qda;
pub mod random;
pub mod qsim;
pub mod register;
pub mod rotation;
