//! Benchmarks live in `benches/`; run them with `cargo bench -p frame-extend-bench`.

use frame_extend::domain::{rasterize, Shape};
use frame_extend::{FrameOperator, GridSpec};

/// Operator for a builtin shape with `n_r = 4 n_lambda`.
pub fn operator(shape: Shape, n_lambda: usize) -> FrameOperator {
    let spec = GridSpec::square(4 * n_lambda, n_lambda).expect("valid grid");
    FrameOperator::new(rasterize(&shape.into(), &spec).expect("non-empty mask"))
}
