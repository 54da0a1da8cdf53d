//! Command-line front end for `misig-core`.

pub mod app;
pub mod data;
pub mod error;
pub mod manifest;
