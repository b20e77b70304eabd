use std::f64::consts::PI;

use approx::assert_relative_eq;
use trispec::fem::SolverOptions;
use trispec::output::{render_svg, sweep_csv_string};
use trispec::sweep::*;
use trispec::Error;

fn aperture_spec(range: [f64; 2], samples: usize) -> SweepSpec {
    SweepSpec {
        family: Family::ApertureIsosceles,
        range,
        samples,
        n_values: vec![2, 3, 4, 5, 6],
        solver: SweepSolver::Fem { levels: vec![4, 5, 6] },
    }
}

fn rectangle_spec(n_values: Vec<usize>) -> SweepSpec {
    SweepSpec {
        family: Family::RectangleAspect,
        range: [1.0, 3.0],
        samples: 400,
        n_values,
        solver: SweepSolver::Exact,
    }
}

#[test]
fn spec_validation() {
    assert!(aperture_spec([0.5, 1.0], 3).validate().is_ok());
    assert!(aperture_spec([1.0, 0.5], 3).validate().is_err());
    assert!(aperture_spec([0.5, 1.0], 1).validate().is_err());
    assert!(aperture_spec([0.0, 1.0], 3).validate().is_err());
    assert!(aperture_spec([0.5, PI], 3).validate().is_err());
    let mut s = aperture_spec([0.5, 1.0], 3);
    s.solver = SweepSolver::Exact;
    assert!(matches!(s.validate(), Err(Error::Domain(_))));
    let mut r = rectangle_spec(vec![3]);
    r.solver = SweepSolver::Fem { levels: vec![4, 5, 6] };
    assert!(r.validate().is_err());
    assert!(rectangle_spec(vec![1]).validate().is_err());
    assert_eq!(aperture_spec([0.5, 1.0], 3).points(), [0.5, 0.75, 1.0]);
}

#[test]
fn aperture_sweep_points() {
    let opts = SolverOptions::default();
    let t = sweep_aperture(&aperture_spec([PI / 7.0, 2.0 * PI / 3.0], 3), &opts).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(t.failures(), 0);
    let v = |row: usize, k: usize| t.rows[row].values[k].unwrap();
    assert!((v(0, 0) - 15.1856).abs() < 0.01 * 15.1856);
    assert!((v(2, 0) - 21.4665).abs() < 0.01 * 21.4665);
    let (eq, _) = aperture_values(PI / 3.0, &[2, 4], &[4, 5, 6], &opts).unwrap();
    assert!((eq[0] - 17.5467).abs() < 0.01 * 17.5467);
    assert!((eq[1] - 52.6476).abs() < 0.01 * 52.6476);
    assert_eq!(t.column(0).len(), 3);
}

#[test]
fn aperture_triangle_convention() {
    let t = aperture_triangle(0.5).unwrap();
    let (a, _) = t.aperture_and_class();
    assert_relative_eq!(a.unwrap(), 0.5, epsilon = 1e-12);
    assert!(aperture_triangle(0.0).is_err());
}

#[test]
fn rectangle_examples() {
    let r = sweep_rectangle(&rectangle_spec((2..=12).collect())).unwrap();
    let beaten: Vec<usize> = r.beaten.iter().copied().filter(|&n| n >= 3).collect();
    assert_eq!(beaten, [5, 6, 7, 10, 11, 12]);
    assert_relative_eq!(rectangle_normalized_sum(1.0, 2).unwrap(), 2.0 * PI * PI, max_relative = 1e-14);
    let best5 = r.best_ratio.iter().find(|b| b.0 == 5).unwrap();
    assert!(best5.1 > 1.0 && best5.2 < 16.0 * PI * PI);
    assert!(rectangle_normalized_sum(1.3, 5).unwrap() < 16.0 * PI * PI);
}

#[test]
fn golden_section_on_parabola() {
    let m = golden_section(|x| Ok((x - 0.3).powi(2) + 1.0), 0.0, 1.0, 1e-6).unwrap();
    assert!((m.alpha - 0.3).abs() < 1e-5);
    assert!(m.evaluations > 9);
    assert!(matches!(golden_section(Ok, 0.0, 1.0, 1e-6), Err(Error::Bracket(_))));
    assert!(golden_section(Ok, 1.0, 0.0, 1e-6).is_err());
}

#[test]
fn mu4_brackets() {
    let opts = SolverOptions::default();
    let m = minimize_mu4([0.45, 0.65], &[4, 5, 6], &opts).unwrap();
    assert!((m.alpha - 0.5433).abs() < 0.01);
    assert!((m.value - 51.66).abs() < 0.005 * 51.66 && m.value < 52.64);
    let e = minimize_mu4([1.0, 1.1], &[4, 5, 6], &opts).unwrap();
    assert!((e.alpha - PI / 3.0).abs() < 1e-3);
    assert!(matches!(minimize_mu4([0.7, 0.9], &[4, 5, 6], &opts), Err(Error::Bracket(_))));
}

#[test]
fn csv_and_svg_are_deterministic() {
    let r = sweep_rectangle(&SweepSpec {
        samples: 40,
        ..rectangle_spec(vec![3, 5])
    })
    .unwrap();
    let a = sweep_csv_string(&r.table).unwrap();
    let b = sweep_csv_string(&sweep_rectangle(&SweepSpec { samples: 40, ..rectangle_spec(vec![3, 5]) }).unwrap().table).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("ratio,M3D2,M5D2"));
    assert_eq!(a.lines().count(), 41);
    let svg = render_svg(&a, "rectangles").unwrap();
    assert_eq!(svg, render_svg(&a, "rectangles").unwrap());
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("stroke-width=\"1.5\"").count(), 2);
}
