//! Streaming valence engine service: sessions over WebSocket, pluggable
//! speech recognition, training and evaluation entry points.

pub mod asr;
pub mod config;
mod error;
pub mod evaluate;
pub mod modelset;
pub mod protocol;
pub mod server;
pub mod session;
pub mod training;

pub use error::{Result, ServiceError};
