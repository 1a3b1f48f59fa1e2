pub mod cm;
pub mod error;
pub mod io;
pub mod linalg;
pub mod sepcrit;
pub mod classify;
pub mod examples;
pub mod edge;
pub mod oracle;
pub mod cli;
