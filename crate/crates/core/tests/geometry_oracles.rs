//! Geometry kernels against brute-force references written here.

use quadcc_core::geometry::{self, PAIRS};
use quadcc_core::identities::sample_convex_configuration;
use quadcc_core::{PlanarConfiguration, SquaredDistanceVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Determinant by cofactor expansion along the first row.
fn laplace_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|col| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(k, _)| k != col).map(|(_, &v)| v).collect())
                .collect();
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][col] * laplace_det(&minor)
        })
        .sum()
}

fn bordered(sdv: &SquaredDistanceVector) -> Vec<Vec<f64>> {
    let mut m = vec![vec![1.0; 5]; 5];
    m[0][0] = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m[i + 1][j + 1] = if i == j { 0.0 } else { sdv.get(i, j) };
        }
    }
    m
}

/// Shoelace area of the triangle left after removing `body`, in ascending label order.
fn shoelace(q: &[[f64; 2]; 4], body: usize) -> f64 {
    let t: Vec<[f64; 2]> = (0..4).filter(|&k| k != body).map(|k| q[k]).collect();
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
}

fn samples(n: usize, seed: u64) -> Vec<PlanarConfiguration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_convex_configuration(&mut rng)).collect()
}

#[test]
fn determinant_matches_cofactor_expansion() {
    for cfg in samples(200, 3) {
        let sdv = geometry::squared_distances(&cfg).unwrap();
        let s = sdv.scale();
        let reference = laplace_det(&bordered(&sdv));
        assert!((geometry::cayley_menger(&sdv) - reference).abs() < 1e-12 * s * s * s);
    }
    // Off the planar manifold, where the value is not rounding noise.
    let tetra = SquaredDistanceVector::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    let reference = laplace_det(&bordered(&tetra));
    assert!((reference - 4.0).abs() < 1e-14);
    assert!((geometry::cayley_menger(&tetra) - reference).abs() < 1e-12);
}

#[test]
fn gradient_matches_cofactor_differences() {
    let sdv = SquaredDistanceVector::new(1.3, 2.1, 0.9, 1.7, 1.1, 0.8);
    let grad = geometry::cayley_menger_gradient(&sdv);
    let h = 1e-5;
    for k in 0..6 {
        let (mut p, mut m) = (sdv.to_array(), sdv.to_array());
        p[k] += h;
        m[k] -= h;
        let fd = (laplace_det(&bordered(&SquaredDistanceVector::from_array(p)))
            - laplace_det(&bordered(&SquaredDistanceVector::from_array(m))))
            / (2.0 * h);
        assert!((grad[k] - fd).abs() < 1e-8 * (1.0 + fd.abs()), "entry {k}: {} vs {fd}", grad[k]);
    }
}

#[test]
fn distance_areas_match_shoelace() {
    for cfg in samples(300, 4) {
        let sdv = geometry::squared_distances(&cfg).unwrap();
        let from_distances = geometry::oriented_areas_from_distances(&sdv).unwrap();
        let from_positions = geometry::oriented_areas_from_positions(&cfg);
        for body in 0..4 {
            let sign = if body % 2 == 0 { -1.0 } else { 1.0 };
            let reference = sign * shoelace(cfg.positions(), body);
            let scale = from_positions.abs_sum();
            assert!((from_positions.get(body) - reference).abs() < 1e-14 * scale);
            assert!((from_distances.get(body) - reference).abs() < 1e-9 * scale, "body {body}");
        }
    }
}

#[test]
fn dziobek_identity_on_a_hand_built_kite() {
    // Kite symmetric about the diagonal 13.
    let cfg = PlanarConfiguration::new([[0.0, 0.0], [2.0, -1.0], [3.0, 0.0], [2.0, 1.0]], [1.0; 4]).unwrap();
    let sdv = geometry::squared_distances(&cfg).unwrap();
    let areas = geometry::oriented_areas_from_positions(&cfg);
    let grad = geometry::cayley_menger_gradient(&sdv);
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let expected = -32.0 * areas.get(i) * areas.get(j);
        assert!((grad[k] - expected).abs() < 1e-10, "pair {i}{j}");
    }
}

#[test]
fn embedding_reproduces_distances() {
    for cfg in samples(100, 5) {
        let sdv = geometry::squared_distances(&cfg).unwrap();
        let back = geometry::squared_distances(&geometry::embed(&sdv, *cfg.masses()).unwrap()).unwrap();
        for (x, y) in sdv.to_array().iter().zip(back.to_array()) {
            assert!((x - y).abs() < 1e-10 * sdv.scale());
        }
    }
}

#[test]
fn concave_distances_are_rejected() {
    let cfg = PlanarConfiguration::new([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.6, 0.3]], [1.0; 4]).unwrap();
    let sdv = geometry::squared_distances(&cfg).unwrap();
    assert!(geometry::oriented_areas_from_distances(&sdv).is_err());
}
