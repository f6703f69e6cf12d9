//! CLI, riddle store and HTTP play service for the riddler engine.

pub mod backend;
pub mod cli;
pub mod service;
pub mod store;
