//! Hosts the `acceptance` test target; see `tests/acceptance.rs`.
