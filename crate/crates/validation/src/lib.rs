//! Acceptance suite for `kflow`; see `tests/acceptance.rs`.
