//! Shared input builders for the benchmarks.

use besov_reg::fixtures::sobolev_scale_signature;
use besov_reg::planner::ProblemSignature;
use besov_reg::scalar::Rational;
use besov_reg::sequence::{make_source, DiagonalScaleOperator};
use besov_reg::CoefField;

pub fn bench_signature() -> ProblemSignature {
    sobolev_scale_signature(1, Rational::ratio(1, 1000))
}

pub fn bench_problem(max_level: u32) -> (DiagonalScaleOperator, CoefField) {
    let sig = bench_signature();
    let source = make_source(&sig.source, max_level, 0.1, 42).expect("source");
    let op = DiagonalScaleOperator::new(1.0, max_level).expect("operator");
    let data = op.apply(&source).expect("forward data");
    (op, data)
}
