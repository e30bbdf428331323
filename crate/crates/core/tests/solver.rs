use frame_extend::domain::{rasterize, DomainSpec, Shape};
use frame_extend::fourier::{CoeffVector, FrameOperator, SampleVector};
use frame_extend::linalg::{matvec, norm2, thin_svd, CMat};
use frame_extend::solver::{
    error_metrics, estimate_plunge_rank, randomized_plunge_solve, residual, sample_on_mask,
};
use frame_extend::spectral::singular_profile;
use frame_extend::{solve_algorithm1, solve_dense_tsvd, GridSpec, SolverConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn op(shape: Shape, n_r: usize, n_lambda: usize) -> FrameOperator {
    let spec = GridSpec::square(n_r, n_lambda).unwrap();
    FrameOperator::new(rasterize(&shape.into(), &spec).unwrap())
}

fn exp_xy(x: &[f64]) -> f64 {
    (x[0] + x[1]).exp()
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

/// Least-squares solution restricted to singular values above `cutoff`.
fn lstsq(a: &CMat, b: &[Complex64], cutoff: f64) -> Vec<Complex64> {
    let svd = thin_svd(a).unwrap();
    let mut x = vec![Complex64::new(0.0, 0.0); a.ncols()];
    for k in 0..svd.s.len() {
        if svd.s[k] <= cutoff {
            continue;
        }
        let coef: Complex64 = (0..a.nrows())
            .map(|i| svd.u[(i, k)].conj() * b[i])
            .sum::<Complex64>()
            / svd.s[k];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += svd.v[(j, k)] * coef;
        }
    }
    x
}

fn pa_dense(o: &FrameOperator) -> CMat {
    let a = o.materialize_a_dense().unwrap();
    let cols: Vec<Vec<Complex64>> = (0..o.n_cols())
        .map(|j| {
            let col: Vec<Complex64> = a.col(j).iter().copied().collect();
            o.apply_p(&SampleVector(col)).unwrap().into_inner()
        })
        .collect();
    CMat::from_fn(o.n_rows(), o.n_cols(), |i, j| cols[j][i])
}

#[test]
fn disk_residual_is_close_to_dense_oracle() {
    let o = op(Shape::Disk, 32, 9);
    let b = sample_on_mask(&o, exp_xy);
    let (_, fast) = solve_algorithm1(&o, &b, &SolverConfig::default()).unwrap();
    let (_, dense) = solve_dense_tsvd(&o, &b, 1e-14).unwrap();
    assert!(fast.residual_norm <= 10.0 * dense.residual_norm);
}

#[test]
fn randomized_solve_matches_dense_projected_least_squares() {
    let o = op(Shape::Disk, 32, 9);
    let b = sample_on_mask(&o, exp_xy);
    let pb = o.apply_p(&b).unwrap();
    let sol = randomized_plunge_solve(&o, &pb, &SolverConfig::default()).unwrap();
    let pa = pa_dense(&o);
    let misfit = |y: &[Complex64]| {
        let r: Vec<Complex64> = matvec(&pa, y)
            .iter()
            .zip(pb.iter())
            .map(|(u, v)| u - v)
            .collect();
        norm2(&r)
    };
    let oracle = lstsq(
        &pa,
        &pb,
        1e-14 * singular_profile(&o, 1e-14).unwrap().sigma[0],
    );
    assert!(misfit(&sol.y) <= misfit(&oracle) + 1e-10 * pb.norm());
}

#[test]
fn correction_identity_holds_for_random_y() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for shape in Shape::ALL {
        let o = op(shape, 24, 7);
        for _ in 0..5 {
            let y = CoeffVector(random_vec(&mut rng, o.n_cols()));
            let b = SampleVector(random_vec(&mut rng, o.n_rows()));
            let ay = o.apply_a(&y).unwrap();
            let r = SampleVector(b.iter().zip(ay.iter()).map(|(u, v)| u - v).collect());
            let z = o.apply_adjoint(&r).unwrap();
            let x = CoeffVector(y.iter().zip(z.iter()).map(|(u, v)| u + v).collect());
            let combined = residual(&o, &x, &b).unwrap();
            let bound = o.apply_p(&r).unwrap().norm();
            assert!(combined <= bound * (1.0 + 1e-12) + 1e-12);
        }
    }
}

#[test]
fn oracle_equivalence_on_small_configurations() {
    let eps = 1e-14;
    for shape in Shape::ALL {
        for n_lambda in [5, 9, 13, 17] {
            let o = op(shape, 4 * n_lambda, n_lambda);
            let b = sample_on_mask(&o, exp_xy);
            let (_, fast) = solve_algorithm1(&o, &b, &SolverConfig::default()).unwrap();
            let (_, dense) = solve_dense_tsvd(&o, &b, eps).unwrap();
            assert!(
                fast.residual_norm <= dense.residual_norm + 10.0 * eps * b.norm(),
                "{shape} {n_lambda}: {} vs {}",
                fast.residual_norm,
                dense.residual_norm
            );
        }
    }
}

#[test]
fn seeded_solves_are_bit_identical() {
    let o = op(Shape::Star, 40, 10);
    let b = sample_on_mask(&o, exp_xy);
    let cfg = SolverConfig {
        seed: 99,
        ..SolverConfig::default()
    };
    let (x1, _) = solve_algorithm1(&o, &b, &cfg).unwrap();
    let (x2, _) = solve_algorithm1(&o, &b, &cfg).unwrap();
    assert_eq!(x1.0, x2.0);
}

#[test]
fn dense_residual_never_jumps_with_resolution() {
    for shape in [Shape::Disk, Shape::Diamond, Shape::Ring] {
        let mut previous: Option<f64> = None;
        for n_lambda in [5, 7, 9, 11, 13] {
            let o = op(shape, 4 * n_lambda, n_lambda);
            let b = sample_on_mask(&o, exp_xy);
            let (_, report) = solve_dense_tsvd(&o, &b, 1e-14).unwrap();
            if let Some(p) = previous {
                assert!(report.residual_norm <= 10.0 * p, "{shape} {n_lambda}");
            }
            previous = Some(report.residual_norm);
        }
    }
}

#[test]
fn start_rank_reaches_plunge_count_within_two_doublings() {
    let o = op(Shape::Disk, 64, 16);
    let r = estimate_plunge_rank(&o, 1.0).unwrap();
    let eta = singular_profile(&o, 1e-14).unwrap().eta;
    assert!(4 * r >= eta, "start rank {r}, eta {eta}");
}

#[test]
fn tiny_square_rank_is_clamped() {
    let o = op(Shape::Square, 16, 4);
    let r = estimate_plunge_rank(&o, 1.0).unwrap();
    assert!(r >= 1 && r <= o.n_cols());
}

#[test]
fn truncated_solution_is_the_projected_least_squares_solution() {
    let o = op(Shape::Diamond, 16, 5);
    let eps = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = SampleVector(random_vec(&mut rng, o.n_rows()));
    let (x, report) = solve_dense_tsvd(&o, &b, eps).unwrap();

    // Oracle: project onto the retained right singular subspace and solve
    // the least-squares problem there by normal equations.
    let a = o.materialize_a_dense().unwrap();
    let svd = thin_svd(&a).unwrap();
    let keep: Vec<usize> = (0..svd.s.len()).filter(|&k| svd.s[k] >= eps).collect();
    let basis = CMat::from_fn(a.ncols(), keep.len(), |i, j| svd.v[(i, keep[j])]);
    let ab = &a * &basis;
    let t = lstsq(&ab, &b, 0.0);
    let oracle = matvec(&basis, &t);
    let diff: Vec<Complex64> = x.iter().zip(&oracle).map(|(u, v)| u - v).collect();
    assert!(norm2(&diff) <= 1e-11 * norm2(&oracle).max(1.0));
    let r_oracle = {
        let r: Vec<Complex64> = matvec(&a, &oracle)
            .iter()
            .zip(b.iter())
            .map(|(u, v)| u - v)
            .collect();
        norm2(&r)
    };
    assert!((report.residual_norm - r_oracle).abs() <= 1e-11 * b.norm());
}

#[test]
fn unitary_case_error_metrics_vanish() {
    let spec = GridSpec::square(10, 10).unwrap();
    let o = FrameOperator::new(rasterize(&DomainSpec::predicate(|_| true), &spec).unwrap());
    let b = sample_on_mask(&o, exp_xy);
    let x = o.apply_adjoint(&b).unwrap();
    assert!(residual(&o, &x, &b).unwrap() <= 1e-12 * b.norm());
}

#[test]
fn smooth_function_on_disk_converges_to_tolerance() {
    let o = op(Shape::Disk, 100, 25);
    let b = sample_on_mask(&o, exp_xy);
    let (x, report) = solve_algorithm1(&o, &b, &SolverConfig::default()).unwrap();
    let metrics = error_metrics(&o, &Shape::Disk.into(), &x, exp_xy, 2000, 3).unwrap();
    assert_eq!(metrics.residual, report.residual_norm);
    assert!(metrics.residual < 1e-6, "residual {}", metrics.residual);
    assert!(metrics.max_error < 1e-6, "max error {}", metrics.max_error);
}
