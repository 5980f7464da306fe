use nalgebra::{DMatrix, SymmetricEigen};
use polyens::charpoly::{moment_gap, zeros_with_powers};
use polyens::recurrence::{RecurrenceTable, TableForm};
use polyens::ReferenceMeasure;
use proptest::collection::vec;
use proptest::prelude::*;

fn op_table() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1usize..=8).prop_flat_map(|n| (Just(n), vec(0.5f64..1.5, n + 12), vec(-1.0f64..1.0, n + 13)))
}

fn banded_table() -> impl Strategy<Value = (usize, usize, Vec<Vec<f64>>)> {
    (1usize..=6, 0usize..=3).prop_flat_map(|(n, q)| {
        let row = (0.5f64..1.5, vec(-0.8f64..0.8, q + 1)).prop_map(|(lead, rest)| {
            let mut r = vec![lead];
            r.extend(rest);
            r
        });
        (Just(n), Just(q), vec(row, n + 12))
    })
}

/// ⟨x^l P_k, Q_m⟩ by walking every lattice path.
fn literal(t: &RecurrenceTable, l: usize, k: usize, m: usize) -> f64 {
    if l == 0 {
        return if k == m { 1.0 } else { 0.0 };
    }
    let q = t.bandwidth();
    let lo = k.saturating_sub(q);
    (lo..=k + 1)
        .map(|j| t.coeff(k, j).unwrap() * literal(t, l - 1, j, m))
        .sum()
}

/// Paths confined to `[0, n)`.
fn literal_below(t: &RecurrenceTable, n: usize, l: usize, k: usize, m: usize) -> f64 {
    if l == 0 {
        return if k == m { 1.0 } else { 0.0 };
    }
    let q = t.bandwidth();
    (k.saturating_sub(q)..=(k + 1).min(n - 1))
        .map(|j| t.coeff(k, j).unwrap() * literal_below(t, n, l - 1, j, m))
        .sum()
}

/// Gauss rule of the `size`-point Jacobi matrix as a discrete measure.
fn gauss_measure(a: &[f64], b: &[f64], size: usize) -> ReferenceMeasure<f64> {
    let j = DMatrix::from_fn(size, size, |r, c| match r.abs_diff(c) {
        0 => b[r],
        1 => a[r.min(c)],
        _ => 0.0,
    });
    let eig = SymmetricEigen::new(j);
    let w = (0..size).map(|i| eig.eigenvectors[(0, i)].powi(2)).collect();
    ReferenceMeasure::from_atoms(eig.eigenvalues.iter().copied().collect(), w).unwrap()
}

fn poly(a: &[f64], b: &[f64], k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let back = if j > 0 { a[j - 1] * prev } else { 0.0 };
        let next = ((x - b[j]) * cur - back) / a[j];
        prev = cur;
        cur = next;
    }
    cur
}

fn close(x: f64, y: f64, rel: f64, scale: f64) -> bool {
    (x - y).abs() <= rel * x.abs().max(y.abs()).max(scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn op_path_sums_match_enumeration_and_quadrature((n, a, b) in op_table(), l in 0usize..=4) {
        let t = RecurrenceTable::op(n, a.clone(), b.clone()).unwrap();
        let m = gauss_measure(&a, &b, n + 6);
        for k in 0..n {
            for j in 0..n + 2 {
                let got = t.path_sum_moment(l, k, j).unwrap();
                let paths = literal(&t, l, k, j);
                let quad = m
                    .inner_product(|x| x.powi(l as i32) * poly(&a, &b, k, x), |x| poly(&a, &b, j, x))
                    .unwrap();
                prop_assert!(close(got, paths, 1e-9, 1.0), "{got} vs paths {paths}");
                prop_assert!(close(got, quad, 1e-9, 1.0), "{got} vs quadrature {quad}");
            }
        }
    }

    #[test]
    fn banded_path_sums_match_enumeration((n, q, rows) in banded_table(), l in 0usize..=4) {
        let t = RecurrenceTable::banded(n, q, rows).unwrap();
        for k in 0..n + 2 {
            for j in 0..n + 4 {
                let got = t.path_sum_moment(l, k, j).unwrap();
                prop_assert!(close(got, literal(&t, l, k, j), 1e-9, 1e-12));
            }
        }
    }

    #[test]
    fn path_sums_are_local((n, a, b) in op_table(), l in 0usize..=4, k in 0usize..8, noise in vec(0.1f64..2.0, 40)) {
        let k = k.min(n + 3);
        let t = RecurrenceTable::op(n, a.clone(), b.clone()).unwrap();
        let lo = k.saturating_sub(l);
        let hi = k + l;
        let bump = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(i, x)| if i < lo || i > hi { x * noise[i % noise.len()] } else { *x })
                .collect()
        };
        let s = RecurrenceTable::op(n, bump(&a), bump(&b)).unwrap();
        prop_assert_eq!(
            t.path_sum_moment(l, k, k).unwrap().to_bits(),
            s.path_sum_moment(l, k, k).unwrap().to_bits()
        );
    }

    #[test]
    fn section_traces_are_confined_paths((n, q, rows) in banded_table(), l in 0usize..=4) {
        let t = RecurrenceTable::banded(n, q, rows).unwrap();
        let h = t.hessenberg_matrix().unwrap();
        let mut power: DMatrix<f64> = DMatrix::identity(n, n);
        for _ in 0..l {
            power *= &h;
        }
        let confined: f64 = (0..n).map(|k| literal_below(&t, n, l, k, k)).sum();
        let scale = power.abs().sum();
        prop_assert!(close(power.trace(), confined, 1e-10, scale.max(1.0)));
        prop_assert!(close(t.section_trace_power(l).unwrap(), confined, 1e-10, scale.max(1.0)));
    }

    #[test]
    fn power_sums_match_matrix_powers((n, a, b) in op_table()) {
        let t = RecurrenceTable::op(n, a, b).unwrap();
        let z = zeros_with_powers(&t, 6).unwrap();
        let h = t.hessenberg_matrix().unwrap();
        let mut power: DMatrix<f64> = DMatrix::identity(n, n);
        for l in 0..=6 {
            let p = z.power_sums()[l];
            let size: f64 = z.zeros().iter().map(|z| z.norm().powi(l as i32)).sum();
            prop_assert!((p.re - power.trace()).abs() <= 1e-8 * size.max(1e-12) + 1e-13);
            prop_assert!(p.im.abs() <= 1e-12 * size.max(1.0));
            power *= &h;
        }
    }

    #[test]
    fn banded_power_sums_match_traces((n, q, rows) in banded_table()) {
        let t = RecurrenceTable::banded(n, q, rows).unwrap();
        let z = zeros_with_powers(&t, 6).unwrap();
        let h = t.hessenberg_matrix().unwrap();
        let mut power: DMatrix<f64> = DMatrix::identity(n, n);
        for l in 0..=6 {
            let size: f64 = z.zeros().iter().map(|z| z.norm().powi(l as i32)).sum();
            prop_assert!((z.power_sums()[l].re - power.trace()).abs() <= 1e-8 * size.max(1.0));
            power *= &h;
        }
    }

    #[test]
    fn moment_gap_within_bound((n, a, b) in op_table(), l in 1usize..=6) {
        let t = RecurrenceTable::op(n, a, b).unwrap();
        let g = moment_gap(&t, l).unwrap();
        prop_assert!(g.gap <= g.bound);
    }

    #[test]
    fn banded_moment_gap_within_bound((n, q, rows) in banded_table(), l in 1usize..=4) {
        let t = RecurrenceTable::banded(n, q, rows).unwrap();
        let g = moment_gap(&t, l).unwrap();
        prop_assert!(g.gap <= g.bound * (1.0 + 1e-12));
    }

    #[test]
    fn zeros_interlace_with_smaller_section((n, a, b) in op_table()) {
        prop_assume!(n >= 2);
        let big = zeros_with_powers(&RecurrenceTable::op(n, a.clone(), b.clone()).unwrap(), 2).unwrap();
        let small = zeros_with_powers(&RecurrenceTable::op(n - 1, a, b).unwrap(), 2).unwrap();
        for i in 0..n - 1 {
            prop_assert!(big.zeros()[i].re <= small.zeros()[i].re);
            prop_assert!(small.zeros()[i].re <= big.zeros()[i + 1].re);
        }
    }

    #[test]
    fn json_roundtrip_preserves_tables((n, q, rows) in banded_table()) {
        let t = RecurrenceTable::banded(n, q, rows).unwrap();
        let json = serde_json::to_string(&t.to_json()).unwrap();
        let back = RecurrenceTable::from_json(&serde_json::from_str(&json).unwrap(), None).unwrap();
        prop_assert_eq!(t, back);
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn constant_coefficients_closed_form() {
    for (a, b) in [(1.0, 0.0), (0.5, 0.3), (1.3, -0.7)] {
        let t = RecurrenceTable::op(5, vec![a; 40], vec![b; 41]).unwrap();
        for l in 0..=8 {
            let expected: f64 = (0..=l / 2)
                .map(|m| binomial(l, 2 * m) * binomial(2 * m, m) * a.powi(2 * m as i32) * b.powi((l - 2 * m) as i32))
                .sum();
            // far from the boundary at 0
            let got = t.path_sum_moment(l, 20, 20).unwrap();
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "l = {l}: {got} vs {expected}");
        }
    }
}

#[test]
fn classical_tables_have_expected_shape() {
    let t = RecurrenceTable::gue(10, 4).unwrap();
    let TableForm::Op { a, b } = t.form() else { panic!("gue table is not OP") };
    assert!((a[3] - 0.4f64.sqrt()).abs() < 1e-15);
    assert!(b.iter().all(|x| *x == 0.0));
    assert!(!RecurrenceTable::unit_circle(4, 2).unwrap().is_op());
}
