//! Benchmark-only crate; see benches/field.rs.
