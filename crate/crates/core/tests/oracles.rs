//! Independent oracles: explicit two-component spinors for the Born rule and
//! sequential collapse, and exhaustive enumeration of the measurement choice
//! on small paths.

use num_complex::Complex64;
use ontic_core::dd::{
    visible_count, visible_visit, DdPreparation, OnticStateId, PathOrdering, Resolution, Sampler,
};
use ontic_core::{
    born_probability, sequential_probability, Direction, DirectionGrid, Path, QubitState, Sign,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Spinor = [Complex64; 2];

/// `|n̂, +⟩ = (cos θ/2, e^{iφ} sin θ/2)`; the `−` eigenstate is the `+`
/// eigenstate of `−n̂`.
fn spinor(vector: [f64; 3], sign: Sign) -> Spinor {
    let v = match sign {
        Sign::Plus => vector,
        Sign::Minus => vector.map(|c| -c),
    };
    let theta = v[2].clamp(-1.0, 1.0).acos();
    let phi = v[1].atan2(v[0]);
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

fn overlap_squared(a: &Spinor, b: &Spinor) -> f64 {
    (a[0].conj() * b[0] + a[1].conj() * b[1]).norm_sqr()
}

fn spinor_born(state: &QubitState, axis: &Direction, outcome: Sign) -> f64 {
    overlap_squared(
        &spinor(axis.vector(), outcome),
        &spinor(state.direction.vector(), state.sign),
    )
}

fn spinor_sequential(prep: &QubitState, chain: &[(Direction, Sign)]) -> f64 {
    let mut psi = spinor(prep.direction.vector(), prep.sign);
    let mut p = 1.0;
    for (axis, outcome) in chain {
        let e = spinor(axis.vector(), *outcome);
        p *= overlap_squared(&e, &psi);
        psi = e;
    }
    p
}

fn grid_with_polar60() -> DirectionGrid {
    let mut grid = DirectionGrid::new();
    grid.push("z", [0.0, 0.0, 1.0]).unwrap();
    grid.push("x", [1.0, 0.0, 0.0]).unwrap();
    grid.push_polar("polar60", 60.0).unwrap();
    grid
}

#[test]
fn spinor_oracle_agrees_with_closed_form_on_standard_grid() {
    let mut grid = DirectionGrid::standard();
    grid.push("oblique", [1.0, -2.0, 0.5]).unwrap();
    for state in grid.eigenstates() {
        for axis in grid.directions() {
            for outcome in Sign::BOTH {
                let closed = born_probability(&state, axis, outcome);
                let oracle = spinor_born(&state, axis, outcome);
                assert!(
                    (closed - oracle).abs() <= 1e-12,
                    "{state:?} {axis:?} {outcome}: {closed} vs {oracle}"
                );
            }
            let sum: f64 = Sign::BOTH
                .iter()
                .map(|&o| spinor_born(&state, axis, o))
                .sum();
            assert!((sum - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn sixty_degree_axis_gives_three_quarters() {
    let grid = grid_with_polar60();
    let z_plus = QubitState::new(grid.find("z").unwrap(), Sign::Plus);
    let axis = grid.find("polar60").unwrap();
    let oracle = spinor_born(&z_plus, &axis, Sign::Plus);
    assert!((oracle - 0.75).abs() < 1e-12);
    assert!((born_probability(&z_plus, &axis, Sign::Plus) - oracle).abs() < 1e-12);
}

#[test]
fn sequential_probability_matches_spinor_collapse() {
    let grid = DirectionGrid::standard();
    let z = grid.find("z").unwrap();
    let x = grid.find("x").unwrap();
    let y = grid.find("y").unwrap();
    let p60 = grid.find("polar60").unwrap();
    let z_plus = QubitState::new(z, Sign::Plus);
    let chains: [&[(Direction, Sign)]; 5] = [
        &[(z, Sign::Plus)],
        &[(x, Sign::Plus), (x, Sign::Plus)],
        &[(x, Sign::Plus), (z, Sign::Plus)],
        &[(p60, Sign::Minus), (y, Sign::Plus), (z, Sign::Minus)],
        &[(x, Sign::Minus), (p60, Sign::Plus)],
    ];
    for chain in chains {
        let oracle = spinor_sequential(&z_plus, chain);
        let closed = sequential_probability(&z_plus, chain);
        assert!((closed - oracle).abs() < 1e-12, "{chain:?}");
    }
    assert!((spinor_sequential(&z_plus, &[(x, Sign::Plus), (z, Sign::Plus)]) - 0.25).abs() < 1e-12);
}

#[test]
fn quantized_counts_use_oracle_probabilities() {
    let grid = grid_with_polar60();
    let z_plus = QubitState::new(grid.find("z").unwrap(), Sign::Plus);
    let prep = DdPreparation::new(
        z_plus,
        &grid,
        Resolution::new(4).unwrap(),
        PathOrdering::Shuffled,
    )
    .unwrap();
    let counts = prep.quantized_counts();
    for axis in grid.directions() {
        let expected = (4.0 * spinor_born(&z_plus, axis, Sign::Plus)).round() as u32;
        assert_eq!(counts.pair(axis.id()), (expected, 4 - expected));
    }
    assert_eq!(counts.pair(grid.find("polar60").unwrap().id()), (3, 1));
}

/// Exact outcome distribution of one measurement on a fixed path: every
/// visible visit is one equally likely choice.
fn enumerated_plus_probability(path: &Path<OnticStateId>, axis: usize) -> (usize, usize) {
    let k = visible_count(path, axis);
    let plus = (0..k)
        .filter(|&i| visible_visit(path, axis, i) == Some(Sign::Plus))
        .count();
    (plus, k)
}

#[test]
fn measurement_on_a_fixed_path_is_exactly_relative_frequency() {
    let grid = grid_with_polar60();
    let axis = grid.find("polar60").unwrap();
    let z_plus = QubitState::new(grid.find("z").unwrap(), Sign::Plus);
    let prep = DdPreparation::new(
        z_plus,
        &grid,
        Resolution::new(4).unwrap(),
        PathOrdering::Shuffled,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let path = prep.generate_path(&mut rng);
        assert_eq!(enumerated_plus_probability(&path, axis.id()), (3, 4));
    }
}

#[test]
fn sampled_measurement_frequency_approaches_three_quarters() {
    let grid = grid_with_polar60();
    let axis = grid.find("polar60").unwrap();
    let z_plus = QubitState::new(grid.find("z").unwrap(), Sign::Plus);
    let prep = DdPreparation::new(
        z_plus,
        &grid,
        Resolution::new(4).unwrap(),
        PathOrdering::Shuffled,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 20_000;
    let plus = (0..n)
        .filter(|_| {
            let path = prep.generate_path(&mut rng);
            prep.measure(&path, &axis, &mut rng).unwrap().outcome == Sign::Plus
        })
        .count();
    let freq = plus as f64 / n as f64;
    let se = (0.75f64 * 0.25 / n as f64).sqrt();
    assert!((freq - 0.75).abs() <= 4.0 * se, "{freq}");
}

#[test]
fn sequential_dd_chain_matches_quantum_reference() {
    let grid = DirectionGrid::standard();
    let z = grid.find("z").unwrap();
    let x = grid.find("x").unwrap();
    let prep = DdPreparation::new(
        QubitState::new(z, Sign::Plus),
        &grid,
        Resolution::new(10).unwrap(),
        PathOrdering::Shuffled,
    )
    .unwrap();
    let n = 10_000;
    for sampler in [Sampler::FullPath, Sampler::VisitCounts] {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let hits = (0..n)
            .filter(|_| {
                prep.run_sequential(&[x, z], sampler, &mut rng).unwrap() == [Sign::Plus, Sign::Plus]
            })
            .count();
        let freq = hits as f64 / n as f64;
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!(
            (freq - 0.25).abs() <= 2.0 * (4.0 * se + 0.05),
            "{sampler:?}: {freq}"
        );
    }
}
