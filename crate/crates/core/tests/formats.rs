use measbound::experiments::{maxcut_gen, maxcut_opt, parse_probability, test_function, MaxCutInstance};
use measbound::geoassume::{growth_exponent, RegionSpec};
use measbound::hierarchy::{upper_bound_pfm, Method};
use measbound::linalg::Precision;
use measbound::measures::Domain;
use measbound::polyring::MPoly;

#[test]
fn polynomial_text_round_trip_keeps_bounds() {
    let tf = test_function("camel").unwrap();
    let back = MPoly::from_text(&tf.poly.to_text(), Some(2)).unwrap();
    assert_eq!(back, tf.poly);
    let dom = Domain::unit_box(2);
    let a = upper_bound_pfm(&tf.poly, &dom, 3, Method::PfmHankel, Precision::DEFAULT).unwrap();
    let b = upper_bound_pfm(&back, &dom, 3, Method::PfmHankel, Precision::DEFAULT).unwrap();
    assert_eq!(a.value, b.value);
}

#[test]
fn polynomial_text_accepts_comments_and_integers() {
    let p = MPoly::from_text("# x1^2 + x2^2 - 1/2\n1 2 0\n1 0 2\n-1/2 0 0\n", None).unwrap();
    assert_eq!(p.nvars(), 2);
    assert_eq!(p.degree(), 2);
    assert_eq!(p.len(), 3);
}

#[test]
fn maxcut_instance_round_trip_keeps_opt() {
    let p = parse_probability("1/2").unwrap();
    let inst = maxcut_gen(6, &p, 11).unwrap();
    let back = MaxCutInstance::from_text(&inst.to_text()).unwrap();
    assert_eq!(back.weights, inst.weights);
    assert_eq!(maxcut_opt(&back).unwrap(), maxcut_opt(&inst).unwrap());
}

#[test]
fn region_file_matches_builtin_cusp() {
    let text = "nvars 2\nbbox 0 1 0 1\nineq 1 1 0\nineq 1 0 0 ; -1 1 0\nineq 1 0 1\nineq 1 exp 1 ; -1 0 1\n";
    let parsed = RegionSpec::from_text(text).unwrap();
    let builtin = RegionSpec::exponential_cusp();
    for i in 0..=20 {
        for j in 0..=20 {
            let x = [i as f64 / 20.0, j as f64 / 20.0];
            assert_eq!(parsed.contains(&x), builtin.contains(&x), "{x:?}");
        }
    }
}

#[test]
fn growth_fit_is_deterministic_in_the_seed() {
    let region = RegionSpec::unit_box(2);
    let ladder = [0.2, 0.1, 0.05];
    let a = growth_exponent(&region, &[0.0, 0.0], &ladder, 20_000, 5).unwrap();
    let b = growth_exponent(&region, &[0.0, 0.0], &ladder, 20_000, 5).unwrap();
    assert_eq!(a.to_csv("#"), b.to_csv("#"));
    let n = a.exponent.unwrap();
    assert!((n - 2.0).abs() < 0.1, "{n}");
}
