use hodgewave::dynamics::{simulate_partial, DEFAULT_SOLVER_TOL};
use hodgewave::metric::weighted_dot;
use hodgewave::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disc(name: &str) -> Discretization {
    disc_kind(name, DualKind::Barycentric)
}

fn disc_kind(name: &str, kind: DualKind) -> Discretization {
    Discretization::new(&read_off(bundled_mesh_dir().join(format!("{name}.off"))).unwrap(), kind).unwrap()
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_state(rng: &mut ChaCha8Rng, d: &Discretization) -> State {
    State {
        omega: random(rng, d.complex.count(0)),
        nu: random(rng, d.complex.count(1)),
        time: 0.0,
    }
}

fn gaussian(d: &Discretization) -> State {
    let p = Profile::GaussianBump {
        amplitude: 1.0,
        center: Some(vec![0.37, 0.21]),
        width: Some(0.08),
    };
    let (u0, v0) = p.samples(&d.complex).unwrap();
    initial_state(d, &u0, &v0, &MaterialFields::identity(&d.complex)).unwrap()
}

#[test]
fn identity_generator_is_the_hodge_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = disc("annulus");
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), None).unwrap();
    let x = random_state(&mut rng, &d);
    let ax = g.apply(&x);
    let mu = Cochain::new(&d.complex, 1, x.nu.clone()).unwrap();
    let w = Cochain::new(&d.complex, 0, x.omega.clone()).unwrap();
    let delta = d.codifferential(&mu).unwrap();
    let dw = d.exterior_derivative(&w).unwrap();
    for (a, b) in ax.omega.iter().zip(&delta.values) {
        assert!((a + b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    assert_eq!(ax.nu, dw.values);
}

#[test]
fn density_halves_the_velocity_block() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = disc("rect_8");
    let g1 = assemble_generator(&d, &MaterialFields::identity(&d.complex), None).unwrap();
    let g2 = assemble_generator(&d, &MaterialFields::uniform(&d.complex, 2.0, 1.0).unwrap(), None).unwrap();
    let x = random_state(&mut rng, &d);
    let (a1, a2) = (g1.apply(&x), g2.apply(&x));
    for (a, b) in a1.nu.iter().zip(&a2.nu) {
        assert!((a - 2.0 * b).abs() <= 1e-15 * a.abs().max(1.0));
    }
    assert_eq!(a1.omega, a2.omega);
}

#[test]
fn closed_mesh_generator_has_no_constraints() {
    let d = disc("icosphere_1");
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), None).unwrap();
    assert_eq!(g.constraint().nrows(), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert_eq!(g.boundary_power(&random_state(&mut rng, &d)), 0.0);
}

#[test]
fn energy_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = disc("annulus");
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), None).unwrap();
    assert_eq!(g.energy(&State::zeros(g.nv(), g.ne())), 0.0);
    let x = random_state(&mut rng, &d);
    let m0 = d.metric.hodge(0).unwrap();
    let m1 = d.metric.hodge(1).unwrap();
    let want = 0.5 * (weighted_dot(m0, &x.omega, &x.omega) + weighted_dot(m1, &x.nu, &x.nu));
    assert!((g.energy(&x) - want).abs() <= 1e-14 * want);
    assert!((g.energy(&x.scaled(2.0)) - 4.0 * g.energy(&x)).abs() <= 1e-13 * want);
    assert!(g.energy(&x) > 0.0);
}

#[test]
fn heterogeneous_energy() {
    let d = disc("square");
    let rho = vec![1.0, 2.0, 4.0, 8.0];
    let young = vec![0.5, 1.0, 1.5, 2.0, 2.5];
    let g = assemble_generator(&d, &MaterialFields::new(rho.clone(), young.clone()).unwrap(), None).unwrap();
    let x = State {
        omega: vec![1.0; 4],
        nu: vec![1.0; 5],
        time: 0.0,
    };
    let m0 = d.metric.hodge(0).unwrap();
    let m1 = d.metric.hodge(1).unwrap();
    let want: f64 = 0.5
        * (m0.iter().zip(&rho).map(|(m, r)| m / r).sum::<f64>()
            + m1.iter().zip(&young).map(|(m, t)| m * t).sum::<f64>());
    assert!((g.energy(&x) - want).abs() <= 1e-14 * want);
}

#[test]
fn boundary_power_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = disc("rect_8");
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), None).unwrap();
    let mut x = random_state(&mut rng, &d);
    for &v in d.boundary.vertices() {
        x.omega[v] = 0.0;
    }
    assert_eq!(g.boundary_power(&x), 0.0);
}

#[test]
fn power_balance_on_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let d = disc("square");
    let mat = MaterialFields::new(vec![1.0, 2.0, 0.5, 1.5], vec![1.0, 0.7, 1.3, 2.0, 0.4]).unwrap();
    let g = assemble_generator(&d, &mat, None).unwrap();
    for _ in 0..50 {
        let x = random_state(&mut rng, &d);
        let lhs = 2.0 * g.energy_form(&g.apply(&x), &x);
        let rhs = 2.0 * g.boundary_power(&x);
        let scale = g.energy(&x) * g.energy_form(&g.apply(&x), &g.apply(&x)).sqrt() / g.energy(&x).sqrt();
        assert!((lhs - rhs).abs() <= 1e-12 * scale.max(rhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn skew_symmetry_without_boundary_flux() {
    // zero boundary velocity kills both boundary terms
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = disc("annulus");
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), None).unwrap();
    let zero_trace = |rng: &mut ChaCha8Rng| {
        let mut x = random_state(rng, &d);
        for &v in d.boundary.vertices() {
            x.omega[v] = 0.0;
        }
        x
    };
    for _ in 0..20 {
        let x = zero_trace(&mut rng);
        let y = zero_trace(&mut rng);
        let s = g.energy_form(&g.apply(&x), &y) + g.energy_form(&x, &g.apply(&y));
        let norm = (g.energy_form(&x, &x) * g.energy_form(&y, &y)).sqrt();
        // ‖A‖ enters through the unscaled form; h^{-1} is the natural scale
        let h = d.metric.shortest_edge();
        assert!(s.abs() <= 1e-12 * norm / h, "{s}");
    }
}

#[test]
fn zero_state_is_a_fixed_point() {
    let d = disc("rect_8");
    let nb = d.boundary.vertex_count();
    let bc = BcSpec::impedance(nb, 1.0).unwrap();
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&bc)).unwrap();
    let z = State::zeros(g.nv(), g.ne());
    let next = step_midpoint(&z, 0.01, &g).unwrap();
    assert!(next.omega.iter().chain(&next.nu).all(|&x| x == 0.0));
}

#[test]
fn normal_zero_step_conserves_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = disc("rect_16");
    let nb = d.boundary.vertex_count();
    let bc = BcSpec::normal_zero(nb);
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&bc)).unwrap();
    let stepper = MidpointStepper::new(&g, g.default_dt(), DEFAULT_SOLVER_TOL).unwrap();
    for _ in 0..5 {
        let x = random_state(&mut rng, &d);
        let (next, res) = stepper.step(&x).unwrap();
        assert!(res <= DEFAULT_SOLVER_TOL);
        let (e0, e1) = (g.energy(&x), g.energy(&next));
        assert!((e1 - e0).abs() <= 1e-10 * e0, "{e0} → {e1}");
    }
}

#[test]
fn midpoint_constraint_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let d = disc("annulus");
    let nb = d.boundary.vertex_count();
    let bc = BcSpec::impedance(nb, 0.5).unwrap();
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&bc)).unwrap();
    let x = random_state(&mut rng, &d);
    let next = step_midpoint(&x, 0.02, &g).unwrap();
    let mid = State {
        omega: x.omega.iter().zip(&next.omega).map(|(a, b)| 0.5 * (a + b)).collect(),
        nu: x.nu.iter().zip(&next.nu).map(|(a, b)| 0.5 * (a + b)).collect(),
        time: 0.0,
    };
    let r = g.constraint_residual(&mid);
    let scale = x.omega.iter().chain(&x.nu).map(|v| v.abs()).fold(0.0, f64::max);
    assert!(r.iter().all(|v| v.abs() <= 1e-10 * scale));
}

#[test]
fn impedance_run_is_nonincreasing() {
    let d = disc("rect_16");
    let nb = d.boundary.vertex_count();
    let bc = BcSpec::impedance(nb, 1.0).unwrap();
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&bc)).unwrap();
    let x0 = gaussian(&d);
    let traj = simulate(&g, &x0, g.default_dt(), 200, SimOptions::default()).unwrap();
    assert!(traj.is_nonincreasing(1e-10));
    assert!(traj.energy[200] < traj.energy[0]);
}

/// Random states projected onto ker C.
fn constrained_states(g: &Generator, rng: &mut ChaCha8Rng, count: usize) -> Vec<State> {
    let svd = g.constraint().clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&r| svd.singular_values[r] > 1e-12 * smax)
        .collect();
    assert!(!rows.is_empty());
    (0..count)
        .map(|_| {
            let mut x = nalgebra::DVector::from_vec(random(rng, vt.ncols()));
            for &r in &rows {
                let row = vt.row(r).transpose();
                x -= &row * row.dot(&x);
            }
            State::from_stacked(x.as_slice(), g.nv(), 0.0)
        })
        .collect()
}

#[test]
fn admissible_constraints_make_power_nonpositive() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let d = disc("rect_8");
    let nb = d.boundary.vertex_count();
    let mat = MaterialFields::uniform(&d.complex, 1.5, 0.7).unwrap();
    for (bc, conservative) in [
        (BcSpec::velocity_zero(nb), true),
        (BcSpec::normal_zero(nb), true),
        (BcSpec::impedance(nb, 0.3).unwrap(), false),
        (BcSpec::impedance(nb, 4.0).unwrap(), false),
    ] {
        let g = assemble_generator(&d, &mat, Some(&bc)).unwrap();
        for x in constrained_states(&g, &mut rng, 20) {
            let p = g.boundary_power(&x);
            let e = g.energy(&x);
            assert!(p <= 1e-12 * e / d.metric.shortest_edge(), "{}: {p}", bc.label());
            if conservative {
                assert!(p.abs() <= 1e-12 * e / d.metric.shortest_edge(), "{}: {p}", bc.label());
            }
        }
    }
}

#[test]
fn initial_state_examples() {
    let d = disc("rect_8");
    let nv = d.complex.count(0);
    let id = MaterialFields::identity(&d.complex);
    let x = initial_state(&d, &vec![2.0; nv], &vec![0.0; nv], &id).unwrap();
    assert!(x.nu.iter().all(|&v| v == 0.0));
    assert!(x.omega.iter().all(|&v| v == 0.0));

    let u: Vec<f64> = (0..nv).map(|v| d.complex.point(v)[0]).collect();
    let x = initial_state(&d, &u, &vec![1.0; nv], &MaterialFields::uniform(&d.complex, 3.0, 1.0).unwrap()).unwrap();
    for (i, e) in d.complex.simplices(1).enumerate() {
        assert_eq!(x.nu[i], d.complex.point(e[1])[0] - d.complex.point(e[0])[0]);
    }
    assert!(x.omega.iter().all(|&v| v == 3.0));
    assert!(matches!(initial_state(&d, &u[1..], &u, &id), Err(Error::Shape(_))));
}

#[test]
fn zero_steps_keeps_only_the_initial_state() {
    let d = disc("square");
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&BcSpec::velocity_zero(4))).unwrap();
    let x = State {
        omega: vec![0.0; 4],
        nu: vec![1.0; 5],
        time: 0.0,
    };
    let t = simulate(&g, &x, 0.1, 0, SimOptions::default()).unwrap();
    assert_eq!(t.steps(), 0);
    assert_eq!(t.energy.len(), 1);
    assert_eq!(t.states.len(), 1);
    assert_eq!(t.final_state(), Some(&x));
}

#[test]
fn time_reversal() {
    let d = disc_kind("rect_16", DualKind::Circumcentric);
    let nb = d.boundary.vertex_count();
    for bc in [BcSpec::velocity_zero(nb), BcSpec::normal_zero(nb)] {
        let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&bc)).unwrap();
        let x0 = gaussian(&d);
        let dt = g.default_dt();
        let fwd = MidpointStepper::new(&g, dt, DEFAULT_SOLVER_TOL).unwrap();
        let back = MidpointStepper::new(&g, -dt, DEFAULT_SOLVER_TOL).unwrap();
        let mut x = x0.clone();
        for _ in 0..10 {
            x = fwd.step(&x).unwrap().0;
        }
        for _ in 0..10 {
            x = back.step(&x).unwrap().0;
        }
        let diff = State {
            omega: x.omega.iter().zip(&x0.omega).map(|(a, b)| a - b).collect(),
            nu: x.nu.iter().zip(&x0.nu).map(|(a, b)| a - b).collect(),
            time: 0.0,
        };
        assert!(g.energy(&diff).sqrt() <= 1e-9 * g.energy(&x0).sqrt(), "{}", bc.label());
    }
}

#[test]
fn conservative_run_holds_energy() {
    let d = disc_kind("rect_16", DualKind::Circumcentric);
    let nb = d.boundary.vertex_count();
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&BcSpec::normal_zero(nb))).unwrap();
    let t = simulate(&g, &gaussian(&d), g.default_dt(), 1000, SimOptions::default()).unwrap();
    assert!(t.max_relative_drift() <= 1e-8);
    assert!(t.residuals.iter().all(|&r| r <= DEFAULT_SOLVER_TOL));
    assert_eq!(t.times.len(), 1001);
    assert_eq!(t.times[1000], 1000.0 * t.dt);
}

#[test]
fn inadmissible_bc_is_refused_unless_unsafe() {
    let d = disc("rect_8");
    let nb = d.boundary.vertex_count();
    let bc = BcSpec::new(DMatrix::identity(nb, nb), -DMatrix::identity(nb, nb), "anti").unwrap();
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&bc)).unwrap();
    let x0 = gaussian(&d);
    match simulate(&g, &x0, 0.01, 10, SimOptions::default()) {
        Err(Error::Inadmissible { label }) => assert_eq!(label, "anti"),
        other => panic!("expected refusal, got {other:?}"),
    }
    let opts = SimOptions {
        unsafe_bc: true,
        ..SimOptions::default()
    };
    let (t, err) = simulate_partial(&g, &x0, 0.01, 10, opts);
    assert!(err.is_none());
    assert!(t.energy[10] > t.energy[0]);
}

#[test]
fn invalid_steps_are_rejected() {
    let d = disc("square");
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), None).unwrap();
    let x = State::zeros(4, 5);
    assert!(matches!(simulate(&g, &x, 0.0, 3, SimOptions::default()), Err(Error::InvalidStep(_))));
    assert!(matches!(simulate(&g, &x, f64::NAN, 3, SimOptions::default()), Err(Error::InvalidStep(_))));
    assert!(MidpointStepper::new(&g, 0.0, DEFAULT_SOLVER_TOL).is_err());
}

#[test]
fn stride_selects_snapshots() {
    let d = disc("rect_8");
    let nb = d.boundary.vertex_count();
    let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&BcSpec::velocity_zero(nb))).unwrap();
    let opts = SimOptions {
        stride: 4,
        ..SimOptions::default()
    };
    let t = simulate(&g, &gaussian(&d), 0.01, 10, opts).unwrap();
    let steps: Vec<usize> = t.states.iter().map(|(s, _)| *s).collect();
    assert_eq!(steps, vec![0, 4, 8]);
}

#[test]
fn sequential_and_parallel_runs_are_identical() {
    let m = read_off(bundled_mesh_dir().join("rect_16.off")).unwrap();
    let run = |exec| {
        let d = Discretization::with_execution(&m, DualKind::Barycentric, exec).unwrap();
        let nb = d.boundary.vertex_count();
        let bc = BcSpec::impedance(nb, 1.0).unwrap();
        let g = assemble_generator(&d, &MaterialFields::identity(&d.complex), Some(&bc)).unwrap();
        let t = simulate(&g, &gaussian(&d), 0.01, 20, SimOptions::default()).unwrap();
        (t.energy.clone(), t.last.unwrap())
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}
