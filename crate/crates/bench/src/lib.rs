//! Benchmarks for hauteur-core live in `benches/`.
