use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use semideg::averaging::{average_field, MeanRule};
use semideg::cli::{RegionConfig, RunConfig};
use semideg::degree::{boundary_margin, brouwer_degree, degree_resolvent, DegreeOptions, Region};
use semideg::evolve::SemilinearProblem;
use semideg::linops::{decay_rate, LinearOperator};
use semideg::problems;

fn matrix(dim: usize, entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| entries[i * dim + j])
}

/// `M + shift·I` with `M` entries in [-1, 1].
fn shifted(dim: usize, entries: &[f64], shift: f64) -> DMatrix<f64> {
    matrix(dim, entries) + DMatrix::identity(dim, dim) * shift
}

fn spd(dim: usize, entries: &[f64]) -> DMatrix<f64> {
    let b = matrix(dim, entries);
    &b * b.transpose() + DMatrix::identity(dim, dim)
}

fn operator_parts() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, f64)> {
    (2usize..=5).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(-1.0..1.0f64, n * n),
            prop::collection::vec(-1.0..1.0f64, n * n),
            -0.5..3.0f64,
        )
    })
}

fn weighted_operator(n: usize, a: &[f64], w: &[f64], shift: f64) -> LinearOperator {
    LinearOperator::with_weight(shifted(n, a, shift), spd(n, w)).unwrap()
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_is_contractive_at_the_certified_rate(
        (n, a, w, shift) in operator_parts(),
        t in 0.0..10.0f64,
        seed in vector(5),
    ) {
        let op = weighted_operator(n, &a, &w, shift);
        let x = DVector::from_column_slice(&seed[..n]);
        let omega = decay_rate(&op);
        let lhs = op.norm(&op.semigroup_apply(t, &x).unwrap());
        prop_assert!(lhs <= (-omega * t).exp() * op.norm(&x) + 1e-9, "{lhs} vs omega {omega}");
    }

    #[test]
    fn semigroup_law(
        (n, a, w, shift) in operator_parts(),
        s in 0.0..5.0f64,
        t in 0.0..5.0f64,
        seed in vector(5),
    ) {
        let op = weighted_operator(n, &a, &w, shift.max(0.0));
        let x = DVector::from_column_slice(&seed[..n]);
        let joint = op.semigroup_apply(s + t, &x).unwrap();
        let split = op.semigroup_apply(s, &op.semigroup_apply(t, &x).unwrap()).unwrap();
        prop_assert!((joint - split).norm() <= 1e-9 * x.norm().max(1.0));
    }

    #[test]
    fn resolvent_bound(
        (n, a, w, _) in operator_parts(),
        shift in 1.0..4.0f64,
        nu_index in 0usize..3,
        seed in vector(5),
    ) {
        // shift ≥ 1 and the weight keep ω well away from zero for most draws
        let op = weighted_operator(n, &a, &w, shift + n as f64);
        let omega = decay_rate(&op);
        prop_assume!(omega > 0.0);
        let nu = [0.0, 1.0, 10.0][nu_index];
        let y = DVector::from_column_slice(&seed[..n]);
        let lhs = op.norm(&op.resolvent_apply(nu, &y).unwrap());
        prop_assert!(lhs <= op.norm(&y) / (omega + nu) + 1e-9);
    }

    #[test]
    fn resolvent_identity(
        (n, a, _, _) in operator_parts(),
        nu in 0.5..4.0f64,
        gap in 0.5..6.0f64,
        seed in vector(5),
    ) {
        let op = LinearOperator::new(shifted(n, &a, n as f64 + 1.0)).unwrap();
        let mu = nu + gap;
        let y = DVector::from_column_slice(&seed[..n]);
        let lhs = op.resolvent_apply(nu, &y).unwrap() - op.resolvent_apply(mu, &y).unwrap();
        let rhs = op.resolvent_apply(nu, &op.resolvent_apply(mu, &y).unwrap()).unwrap() * (mu - nu);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * y.norm().max(1.0));
    }
}

/// Composite Simpson on `[0, horizon]` of `e^{-νt} S(t) y`.
fn laplace_by_simpson(
    op: &LinearOperator,
    nu: f64,
    y: &DVector<f64>,
    horizon: f64,
    panels: usize,
) -> DVector<f64> {
    let h = horizon / panels as f64;
    let mut acc = DVector::zeros(y.len());
    for k in 0..=panels {
        let t = k as f64 * h;
        let c = if k == 0 || k == panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += op.semigroup_apply(t, y).unwrap() * (c * (-nu * t).exp());
    }
    acc * (h / 3.0)
}

#[test]
fn resolvent_is_the_laplace_transform_of_the_semigroup() {
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, -0.3, -0.4, 1.5, 0.2, 0.1, -0.6, 1.2]);
    let op = LinearOperator::new(a).unwrap();
    let y = DVector::from_row_slice(&[1.0, -2.0, 0.5]);
    for nu in [0.0, 1.0, 3.0] {
        let omega = decay_rate(&op);
        assert!(omega > 0.5);
        let horizon = 30.0 / (omega + nu);
        let quad = laplace_by_simpson(&op, nu, &y, horizon, 4000);
        let direct = op.resolvent_apply(nu, &y).unwrap();
        assert!((quad - &direct).norm() < 1e-6, "nu = {nu}");
    }
}

fn quick() -> DegreeOptions {
    DegreeOptions {
        seeds: Some(128),
        boundary_density: 64,
        ..DegreeOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translated_identity_has_degree_one(
        dim in 1usize..=3,
        point in prop::collection::vec(-0.8..0.8f64, 3),
    ) {
        let x0 = DVector::from_column_slice(&point[..dim]);
        let field = |x: &DVector<f64>| Ok(x - &x0);
        let region = Region::cube(vec![-1.0; dim], vec![1.0; dim]).unwrap();
        let r = brouwer_degree(&field, &region, &quick()).unwrap();
        prop_assert_eq!(r.value, 1);
    }

    #[test]
    fn degree_is_additive_over_disjoint_boxes(
        a in -2.5..-0.5f64,
        b in 0.5..2.5f64,
        tilt in -1.0..1.0f64,
    ) {
        // zeros at (a, 0) with sign −1 and (b, 0) with sign +1
        let field = |x: &DVector<f64>| {
            Ok(DVector::from_row_slice(&[(x[0] - a) * (x[0] - b), x[1] + tilt * (x[0] - a) * (x[0] - b)]))
        };
        let whole = Region::cube(vec![-3.0, -1.0], vec![3.0, 1.0]).unwrap();
        let left = Region::cube(vec![-3.0, -1.0], vec![0.0, 1.0]).unwrap();
        let right = Region::cube(vec![0.0, -1.0], vec![3.0, 1.0]).unwrap();
        let d = |r: &Region| brouwer_degree(&field, r, &quick()).unwrap().value;
        let (w, l, r) = (d(&whole), d(&left), d(&right));
        prop_assert_eq!(w, l + r);
        prop_assert_eq!((l, r), (-1, 1));
    }

    #[test]
    fn degree_is_invariant_along_admissible_homotopies(
        angle in -1.5..1.5f64,
        px in -0.2..0.2f64,
        py in -0.2..0.2f64,
    ) {
        let (c, s) = (angle.cos(), angle.sin());
        let p = DVector::from_row_slice(&[px, py]);
        let region = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let at = |h: f64| {
            let p = p.clone();
            move |x: &DVector<f64>| {
                let rotated = DVector::from_row_slice(&[c * x[0] - s * x[1], s * x[0] + c * x[1]]);
                Ok(x * (1.0 - h) + rotated * h - &p)
            }
        };
        for k in 0..=10 {
            prop_assert!(boundary_margin(&at(k as f64 / 10.0), &region, &quick()).is_ok());
        }
        let d0 = brouwer_degree(&at(0.0), &region, &quick()).unwrap();
        let d1 = brouwer_degree(&at(1.0), &region, &quick()).unwrap();
        prop_assert_eq!(d0.value, d1.value);
    }

    #[test]
    fn nonzero_certified_degree_lists_true_zeros(
        r in 0.3..1.5f64,
        shift in -0.5..0.5f64,
    ) {
        // zeros at (shift ± r, 0); only the right one lies in the box
        let field = |x: &DVector<f64>| {
            let u = x[0] - shift;
            Ok(DVector::from_row_slice(&[u * u + x[1] * x[1] - r * r, x[1]]))
        };
        let region = Region::cube(vec![shift, -1.0], vec![shift + 3.0, 1.0]).unwrap();
        let result = brouwer_degree(&field, &region, &quick()).unwrap();
        prop_assert_eq!(result.value, 1);
        if result.certified {
            prop_assert!(!result.zeros.is_empty());
            for z in &result.zeros {
                let v = field(&DVector::from_column_slice(&z.location)).unwrap();
                prop_assert!(v.norm() <= 1e-9);
            }
        }
    }
}

fn tanh_field(scale: f64, offset: Vec<f64>) -> impl Fn(&DVector<f64>) -> DVector<f64> + Sync {
    move |x: &DVector<f64>| x.map(|v| scale * v.tanh()) + DVector::from_column_slice(&offset)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn resolvent_degree_does_not_depend_on_nu(
        (n, a, w, _) in (2usize..=3).prop_flat_map(|n| (
            Just(n),
            prop::collection::vec(-1.0..1.0f64, n * n),
            prop::collection::vec(-1.0..1.0f64, n * n),
            Just(0.0),
        )),
        lip in 0.0..0.9f64,
        offset in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let op = weighted_operator(n, &a, &w, n as f64 + 1.0);
        let omega = decay_rate(&op);
        prop_assume!(omega > lip + 0.1);
        let f = tanh_field(lip, offset[..n].to_vec());
        let radius = 4.0 * (lip + 2.0) / (omega - lip) * op.weight().norm().sqrt();
        let region = Region::ball_in(&op, vec![0.0; n], radius).unwrap();
        let degrees: Vec<i64> = [0.0, 1.0, 10.0]
            .iter()
            .map(|&nu| degree_resolvent(&op, &f, &region, nu, &quick()).unwrap().value)
            .collect();
        prop_assert_eq!(degrees[0], degrees[1]);
        prop_assert_eq!(degrees[1], degrees[2]);
        prop_assert_eq!(degrees[0], 1);
    }

    #[test]
    fn reduced_nonlinearity_is_a_contraction_with_the_predicted_constant(
        (n, a) in (2usize..=4).prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0..1.0f64, n * n))),
        lip in 0.0..2.0f64,
        nu in 0.0..10.0f64,
        pairs in prop::collection::vec((vector(4), vector(4)), 20),
    ) {
        let op = LinearOperator::new(shifted(n, &a, n as f64)).unwrap();
        let omega = decay_rate(&op);
        prop_assume!(omega + nu > 0.0);
        let f = tanh_field(lip, vec![0.3; n]);
        let reduced = |x: &DVector<f64>| op.resolvent_apply(nu, &(x * nu + f(x))).unwrap();
        let limit = (lip + nu) / (omega + nu) + 1e-6;
        for (p, q) in pairs {
            let (x, y) = (DVector::from_column_slice(&p[..n]), DVector::from_column_slice(&q[..n]));
            let d = op.norm(&(&x - &y));
            prop_assume!(d > 1e-9);
            let quotient = op.norm(&(reduced(&x) - reduced(&y))) / d;
            prop_assert!(quotient <= limit, "{quotient} > {limit}");
        }
    }
}

fn averaging_cases() -> Vec<SemilinearProblem> {
    vec![
        problems::scalar_forced(),
        problems::scalar_sine_forced(1.0),
        problems::heat_1d(6).unwrap(),
        problems::preset("txline-default").unwrap(),
    ]
}

fn state_for(problem: &SemilinearProblem, raw: &[f64]) -> DVector<f64> {
    DVector::from_fn(problem.dim(), |i, _| {
        raw[i % raw.len()] * (1.0 + 0.1 * i as f64)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn averaging_inherits_lipschitz_and_growth(
        which in 0usize..4,
        p in vector(8),
        q in vector(8),
        mu in 0.0..1.0f64,
    ) {
        let problem = &averaging_cases()[which];
        let avg = average_field(problem, 64);
        let (x, y) = (state_for(problem, &p), state_for(problem, &q));
        let (fx, fy) = (avg.eval(&x, mu), avg.eval(&y, mu));
        let d = problem.norm(&(&x - &y));
        if d > 1e-12 {
            let quotient = problem.norm(&(&fx - &fy)) / d;
            prop_assert!(quotient <= problem.lipschitz + 1e-8, "{quotient} > {}", problem.lipschitz);
        }
        prop_assert!(problem.norm(&fx) <= problem.growth * (1.0 + problem.norm(&x)) + 1e-8);
    }

    #[test]
    fn gauss_legendre_average_has_converged_at_default_nodes(
        which in 0usize..4,
        p in vector(8),
    ) {
        let problem = &averaging_cases()[which];
        let x = state_for(problem, &p);
        let coarse = average_field(problem, 64).eval(&x, 1.0);
        let fine = average_field(problem, 128).eval(&x, 1.0);
        prop_assert!((coarse - fine).norm() < 1e-10);
    }

    #[test]
    fn average_matches_a_fine_trapezoid_rule(
        which in 0usize..4,
        p in vector(8),
    ) {
        let problem = &averaging_cases()[which];
        let x = state_for(problem, &p);
        let nodes = 10_000;
        let h = problem.period / nodes as f64;
        // periodic integrand: the trapezoid rule is the plain mean over a uniform grid
        let mut trap = DVector::zeros(problem.dim());
        for k in 0..nodes {
            trap += problem.eval(k as f64 * h, &x, 1.0);
        }
        trap /= nodes as f64;
        let gl = average_field(problem, 64).eval(&x, 1.0);
        prop_assert!((gl - trap).norm() < 1e-8);
    }
}

#[test]
fn mean_rule_weights_sum_to_one() {
    for nodes in [2, 5, 8, 64, 100] {
        let rule = MeanRule::new(3.0, nodes);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(rule.times.iter().all(|t| (0.0..=3.0).contains(t)));
    }
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(problems::PRESETS.to_vec()),
        0.0..10.0f64,
        any::<u64>(),
        prop::option::of(prop::collection::vec(0.01..1.0f64, 1..5)),
        prop::option::of((-3.0..3.0f64, 0.1..4.0f64, any::<bool>())),
        prop::option::of(1usize..40),
    )
        .prop_map(|(name, nu, seed, lambdas, ball, cells)| {
            let mut cfg = RunConfig::preset(name);
            cfg.nu = nu;
            cfg.seed = seed;
            // schedules must decrease strictly
            cfg.schedules.lambda = lambdas.map(|mut v| {
                v.sort_by(|a, b| b.partial_cmp(a).unwrap());
                v.dedup();
                v
            });
            cfg.problem.cells = cells;
            cfg.region = ball.map(|(c, radius, weighted)| RegionConfig::Ball {
                center: vec![c],
                radius,
                weighted,
            });
            cfg
        })
}

proptest! {
    #[test]
    fn config_survives_a_toml_round_trip(cfg in run_config()) {
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
