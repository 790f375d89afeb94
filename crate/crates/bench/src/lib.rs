//! Benchmarks for the dispersion and Lifshitz routines live in `benches/`.
