//! Holds the workspace acceptance suite (`tests/acceptance.rs`), which
//! exercises `nli-core` and the `nli` command line together. Run it with
//! `cargo test -p nli-tests --test acceptance`.
