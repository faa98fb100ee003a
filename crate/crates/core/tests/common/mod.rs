#![allow(dead_code)]

use partial_cstar::instances::{
    build_fixtures, compact_operator, cq_spectral, function_grid, hermite_number, weighted_diagonal, Instance,
};

/// Builder instances at several sizes plus every fixture.
pub fn corpus() -> Vec<Instance> {
    let mut v = vec![
        weighted_diagonal(1, 1, 2.0).unwrap(),
        weighted_diagonal(2, 1, 3.0).unwrap(),
        weighted_diagonal(3, 1, 2.0).unwrap(),
        weighted_diagonal(8, 1, 1.5).unwrap(),
        function_grid(4, 1, 0.5, 1).unwrap(),
        compact_operator(2, 1).unwrap(),
        compact_operator(4, 1).unwrap(),
        hermite_number(3, 1).unwrap(),
        hermite_number(4, 1).unwrap(),
        cq_spectral(&[1, 1, 2], &[1.0, 2.0, 4.0], None).unwrap(),
        cq_spectral(&[2, 1], &[1.0, 3.0], None).unwrap(),
    ];
    v.extend(build_fixtures());
    v
}
