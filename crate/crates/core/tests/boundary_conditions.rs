use hodgewave::boundary_conditions::DEFAULT_ADMISSIBILITY_TOL;
use hodgewave::operators::csr_to_dense;
use hodgewave::*;
use nalgebra::DMatrix;

fn disc(name: &str) -> Discretization {
    Discretization::new(
        &read_off(bundled_mesh_dir().join(format!("{name}.off"))).unwrap(),
        DualKind::Barycentric,
    )
    .unwrap()
}

fn report(bc: &BcSpec, d: &Discretization) -> AdmissibilityReport {
    check_admissible(bc, d.metric.boundary(), DEFAULT_ADMISSIBILITY_TOL).unwrap()
}

#[test]
fn velocity_and_normal_zero_are_conservative_everywhere() {
    for name in ["triangle", "square", "rect_8", "annulus", "tetrahedron", "cube_tets", "segment"] {
        let d = disc(name);
        let nb = d.boundary.vertex_count();
        for bc in [BcSpec::velocity_zero(nb), BcSpec::normal_zero(nb)] {
            let r = report(&bc, &d);
            assert!(r.admissible() && r.conservative, "{name} {}: {r}", bc.label());
            assert_eq!(r.kernel_dim, nb);
            assert_eq!(r.operator_min_eigenvalue, 0.0);
        }
    }
}

#[test]
fn anti_impedance_fails_both_conditions() {
    let d = disc("rect_8");
    let nb = d.boundary.vertex_count();
    let bc = BcSpec::new(DMatrix::identity(nb, nb), -DMatrix::identity(nb, nb), "anti").unwrap();
    let r = report(&bc, &d);
    assert!(!r.kernel_condition && !r.operator_inequality && !r.admissible());
    // θ = σ on the kernel: the pairing is M∂ itself, and G = −2 M∂^{-1}
    let mb = d.metric.boundary();
    let mb_max = mb.iter().cloned().fold(0.0, f64::max);
    let inv_max = mb.iter().map(|m| 1.0 / m).fold(0.0, f64::max);
    // the orthonormal kernel basis splits as (θ, θ)/√2
    assert!((r.kernel_max_eigenvalue - 0.5 * mb_max).abs() <= 1e-12 * mb_max);
    assert!((r.operator_min_eigenvalue + 2.0 * inv_max).abs() <= 1e-12 * inv_max);
}

#[test]
fn impedance_is_dissipative_for_positive_c() {
    let d = disc("annulus");
    let nb = d.boundary.vertex_count();
    for c in [0.1, 1.0, 10.0] {
        let r = report(&BcSpec::impedance(nb, c).unwrap(), &d);
        assert!(r.admissible() && !r.conservative, "c={c}: {r}");
        assert!(r.operator_min_eigenvalue > 0.0);
        assert!(r.kernel_max_eigenvalue < 0.0);
    }
    let r = report(&BcSpec::impedance(nb, -1.0).unwrap(), &d);
    assert!(!r.admissible());
}

#[test]
fn impedance_pairing_matches_closed_form() {
    // kernel σ = −θ/c; with orthonormal (θ, σ) columns the pairing eigenvalues
    // are −c/(1 + c²)·M∂
    let d = disc("rect_8");
    let nb = d.boundary.vertex_count();
    let c = 2.0;
    let r = report(&BcSpec::impedance(nb, c).unwrap(), &d);
    let mb_min = d.metric.boundary().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((r.kernel_max_eigenvalue + c / (1.0 + c * c) * mb_min).abs() < 1e-12);
}

#[test]
fn report_names_both_conditions() {
    let d = disc("square");
    let s = report(&BcSpec::velocity_zero(4), &d).to_string();
    assert!(s.contains("kernel condition: pass"));
    assert!(s.contains("operator inequality: pass"));
    assert!(s.contains("conservative: true"));
}

#[test]
fn spec_validation() {
    assert!(matches!(
        BcSpec::new(DMatrix::identity(2, 3), DMatrix::identity(3, 3), "bad"),
        Err(Error::InvalidBc(_))
    ));
    assert!(matches!(
        BcSpec::new(DMatrix::zeros(3, 3), DMatrix::zeros(3, 3), "nothing"),
        Err(Error::InvalidBc(_))
    ));
    assert!(matches!(
        BcSpec::new(DMatrix::identity(2, 2), DMatrix::from_element(2, 2, f64::NAN), "nan"),
        Err(Error::InvalidBc(_))
    ));
    let d = disc("square");
    assert!(matches!(
        check_admissible(&BcSpec::velocity_zero(3), d.metric.boundary(), 1e-10),
        Err(Error::Shape(_))
    ));
    let mat = MaterialFields::identity(&d.complex);
    assert!(matches!(
        constraint_matrix(&BcSpec::velocity_zero(5), &d.traces, &mat),
        Err(Error::Shape(_))
    ));
}

#[test]
fn constraint_matrix_blocks() {
    let d = disc("rect_8");
    let (nv, ne, nb) = (d.complex.count(0), d.complex.count(1), d.boundary.vertex_count());
    let mat = MaterialFields::identity(&d.complex);
    let t = csr_to_dense(d.traces.t());
    let n = csr_to_dense(d.traces.n());

    let c = constraint_matrix(&BcSpec::velocity_zero(nb), &d.traces, &mat).unwrap();
    assert_eq!(c.shape(), (nb, nv + ne));
    assert_eq!(c.columns(0, nv), t);
    assert!(c.columns(nv, ne).iter().all(|&x| x == 0.0));

    let c = constraint_matrix(&BcSpec::normal_zero(nb), &d.traces, &mat).unwrap();
    assert!(c.columns(0, nv).iter().all(|&x| x == 0.0));
    assert_eq!(c.columns(nv, ne), n);

    let c = constraint_matrix(&BcSpec::impedance(nb, 3.0).unwrap(), &d.traces, &mat).unwrap();
    assert_eq!(c.columns(0, nv), t);
    assert!((c.columns(nv, ne) - &n * 3.0).abs().max() < 1e-15);
}

#[test]
fn constraints_act_on_efforts() {
    let d = disc("rect_8");
    let (nv, ne, nb) = (d.complex.count(0), d.complex.count(1), d.boundary.vertex_count());
    let mat = MaterialFields::uniform(&d.complex, 2.0, 5.0).unwrap();
    let c = constraint_matrix(&BcSpec::impedance(nb, 1.0).unwrap(), &d.traces, &mat).unwrap();
    let t = csr_to_dense(d.traces.t());
    let n = csr_to_dense(d.traces.n());
    assert!((c.columns(0, nv) - &t * 0.5).abs().max() < 1e-15);
    assert!((c.columns(nv, ne) - &n * 5.0).abs().max() < 1e-12);
}

#[test]
fn transform_preserves_classification() {
    let d = disc("square");
    let p = DMatrix::from_row_slice(4, 4, &[
        2.0, 1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 3.0, //
        1.0, 0.0, -1.0, 0.0, //
        0.0, 0.0, 1.0, 1.0,
    ]);
    for bc in [
        BcSpec::velocity_zero(4),
        BcSpec::impedance(4, 0.5).unwrap(),
        BcSpec::impedance(4, -0.5).unwrap(),
    ] {
        let a = report(&bc, &d);
        let b = report(&bc.transformed(&p).unwrap(), &d);
        assert_eq!(a.kernel_condition, b.kernel_condition, "{}", bc.label());
        assert_eq!(a.operator_inequality, b.operator_inequality, "{}", bc.label());
    }
}

#[test]
fn closed_mesh_bc_is_empty() {
    let d = disc("icosphere_1");
    let bc = BcSpec::velocity_zero(0);
    let r = report(&bc, &d);
    assert!(r.admissible() && r.conservative);
    let c = constraint_matrix(&bc, &d.traces, &MaterialFields::identity(&d.complex)).unwrap();
    assert_eq!(c.nrows(), 0);
}
