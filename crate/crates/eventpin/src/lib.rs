//! Storage, delivery, HTTP API and CLI around `eventpin-core`.
//!
//! The store is a single JSON-lines log; [`service::Service`] folds it and
//! appends to it, and [`api`] exposes the service over HTTP.

pub mod api;
pub mod ingest;
pub mod service;
pub mod sink;
pub mod store;

pub use service::{Service, ServiceError};
pub use store::{Store, StoreError};
