pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod exactmath;
pub mod hypercube;
pub mod krawtchouk;
pub mod lpbound;
pub mod oracle;
pub mod stability;

pub use error::{Error, Result};
