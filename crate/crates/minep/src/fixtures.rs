//! Built-in two- and three-player games used throughout the tests, the
//! CLI (`--fixture example-1` .. `example-6`) and the documentation.

use nalgebra::{DMatrix, DVector};

use crate::game::{BoxBounds, LinearSystem, QuadGame};

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// Two integer players with costs `x1^2 + (1+eps) x1 x2` and
/// `x2^2 - (1+eps) x1 x2` on the box `[-2, 2]`. Best-response iterations
/// cycle through four points around the unique equilibrium at the origin.
pub fn example_1(eps: f64) -> QuadGame {
    QuadGame::boxed(
        vec![1, 1],
        vec![1, 1],
        vec![
            vec![scalar(2.0), scalar(1.0 + eps)],
            vec![scalar(-(1.0 + eps)), scalar(2.0)],
        ],
        vec![DVector::zeros(1), DVector::zeros(1)],
        vec![
            BoxBounds::interval(1, -2.0, 2.0),
            BoxBounds::interval(1, -2.0, 2.0),
        ],
    )
    .expect("fixture dimensions consistent")
}

/// Two integer players with costs `1/2 (x_i - eta_i)^2 + eps_i x1 x2`
/// on the box `[-5, 5]`. For small couplings the existence condition
/// certifies a unique equilibrium at the rounded relaxed solution.
pub fn example_2(eta1: f64, eta2: f64, eps1: f64, eps2: f64) -> QuadGame {
    QuadGame::boxed(
        vec![1, 1],
        vec![1, 1],
        vec![
            vec![scalar(1.0), scalar(eps1)],
            vec![scalar(eps2), scalar(1.0)],
        ],
        vec![
            DVector::from_element(1, -eta1),
            DVector::from_element(1, -eta2),
        ],
        vec![
            BoxBounds::interval(1, -5.0, 5.0),
            BoxBounds::interval(1, -5.0, 5.0),
        ],
    )
    .expect("fixture dimensions consistent")
    .with_offsets(vec![0.5 * eta1 * eta1, 0.5 * eta2 * eta2])
}

/// Two integer players on `{0, 1}`: costs `1/2 (x1 - 1/2)^2 + eps x1 (x2 - 1/2)`
/// and `1/2 (x2 - 1/2)^2 - eps (x1 - 1/2) x2`. Has no equilibrium for any
/// `eps > 0` even though the contraction modulus can be arbitrarily small.
pub fn example_3(eps: f64) -> QuadGame {
    QuadGame::boxed(
        vec![1, 1],
        vec![1, 1],
        vec![
            vec![scalar(1.0), scalar(eps)],
            vec![scalar(-eps), scalar(1.0)],
        ],
        vec![
            DVector::from_element(1, -0.5 - eps / 2.0),
            DVector::from_element(1, -0.5 + eps / 2.0),
        ],
        vec![
            BoxBounds::interval(1, 0.0, 1.0),
            BoxBounds::interval(1, 0.0, 1.0),
        ],
    )
    .expect("fixture dimensions consistent")
    .with_offsets(vec![0.125, 0.125])
}

/// Three symmetric players with game-mapping matrix `[[3,2,2],[2,3,2],[2,2,3]]`:
/// strongly monotone with constant 1, but no weights make the condensed
/// matrix strictly row diagonally dominant.
pub fn example_4() -> QuadGame {
    let blocks = (0..3)
        .map(|nu| {
            (0..3)
                .map(|nv| if nu == nv { scalar(3.0) } else { scalar(2.0) })
                .collect()
        })
        .collect();
    QuadGame::boxed(
        vec![1, 1, 1],
        vec![1, 1, 1],
        blocks,
        vec![DVector::zeros(1); 3],
        vec![BoxBounds::interval(1, -10.0, 10.0); 3],
    )
    .expect("fixture dimensions consistent")
}

/// Two players with game-mapping matrix `[[2,1],[9,10]]`: strictly row
/// diagonally dominant with unit weights (modulus 0.9) but not monotone.
pub fn example_5() -> QuadGame {
    QuadGame::boxed(
        vec![1, 1],
        vec![1, 1],
        vec![
            vec![scalar(2.0), scalar(1.0)],
            vec![scalar(9.0), scalar(10.0)],
        ],
        vec![DVector::zeros(1), DVector::zeros(1)],
        vec![BoxBounds::interval(1, -10.0, 10.0); 2],
    )
    .expect("fixture dimensions consistent")
}

/// Single player minimizing `x1^2 + x2^2` over a non-separable polyhedron
/// `x1 >= 1/2`, `x2 >= upsilon x1 - (upsilon-1)/2` with both coordinates
/// integer: the gap between the mixed and continuous best responses grows
/// with `upsilon`.
pub fn example_6(upsilon: f64) -> QuadGame {
    QuadGame::new(
        vec![2],
        vec![2],
        vec![vec![DMatrix::identity(2, 2) * 2.0]],
        vec![DVector::zeros(2)],
        vec![BoxBounds::interval(2, -100.0, 100.0)],
        vec![LinearSystem {
            a: DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, upsilon, -1.0]),
            b: DVector::from_vec(vec![-0.5, (upsilon - 1.0) / 2.0]),
        }],
        vec![LinearSystem::empty(2)],
    )
    .expect("fixture dimensions consistent")
}

/// Fixture ids accepted on the command line.
pub const FIXTURE_IDS: [&str; 6] = [
    "example-1",
    "example-2",
    "example-3",
    "example-4",
    "example-5",
    "example-6",
];

/// Looks up a fixture by id with its default parameters.
pub fn by_name(id: &str) -> Option<QuadGame> {
    match id {
        "example-1" => Some(example_1(0.1)),
        "example-2" => Some(example_2(0.3, 0.3, 0.1, 0.1)),
        "example-3" => Some(example_3(0.05)),
        "example-4" => Some(example_4()),
        "example-5" => Some(example_5()),
        "example-6" => Some(example_6(3.0)),
        _ => None,
    }
}
