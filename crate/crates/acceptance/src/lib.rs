//! Acceptance checks for `kirchhoff-nehari` live in `tests/acceptance.rs`.
//! This package exists so that they run after the library's own suites.
