use polyens::ensemble::ln_factorial;
use polyens::rng::replica_rng;
use polyens::sampler::{sample, sample_replicas, ConditionalState, SamplerConfig, SamplerMode, Scheme};
use polyens::{Complex64, PolynomialEnsemble, RecurrenceTable, ReferenceMeasure, Scalar};
use proptest::collection::vec;
use proptest::prelude::*;
use rand::Rng;

fn atoms() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (4usize..=12).prop_flat_map(|m| {
        (vec(0.2f64..1.0, m), vec(0.1f64..1.0, m)).prop_map(|(gaps, w)| {
            let mut x = Vec::with_capacity(gaps.len());
            let mut acc = -2.0;
            for g in gaps {
                acc += g;
                x.push(acc);
            }
            (x, w)
        })
    })
}

fn op_ensemble(x: Vec<f64>, w: Vec<f64>, n: usize) -> PolynomialEnsemble<f64> {
    let m = ReferenceMeasure::from_atoms(x, w).unwrap();
    let pad = (m.len() - n - 1).min(2);
    let t = RecurrenceTable::from_measure(&m, n, pad).unwrap();
    PolynomialEnsemble::new(m, t).unwrap()
}

/// Σ over ordered tuples of det[K]/N! · Π w.
fn total_mass<S: Scalar>(e: &PolynomialEnsemble<S>) -> f64 {
    let n = e.n();
    let atoms = e.measure().len();
    let w = e.measure().weights();
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let det = e.kernel().joint_density(&idx).unwrap();
        total += det * idx.iter().map(|&i| w[i]).product::<f64>();
        let mut pos = 0;
        loop {
            if pos == n {
                return total / ln_factorial(n).exp();
            }
            idx[pos] += 1;
            if idx[pos] < atoms {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn joint_density_integrates_to_one((x, w) in atoms(), n in 1usize..=3) {
        let e = op_ensemble(x, w, n);
        prop_assert!((total_mass(&e) - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn christoffel_darboux_agrees((x, w) in atoms(), n in 1usize..=3, seed in any::<u64>()) {
        let e = op_ensemble(x.clone(), w, n);
        let mut rng = replica_rng(seed, 0);
        for _ in 0..100 {
            let (i, j) = (rng.gen_range(0..x.len()), rng.gen_range(0..x.len()));
            if i == j {
                continue;
            }
            let k = e.eval_kernel(x[i], x[j]).unwrap();
            let cd = e.christoffel_darboux(x[i], x[j]).unwrap();
            prop_assert!((k - cd).abs() <= 1e-8 * k.abs().max(1.0), "{k} vs {cd}");
        }
    }

    #[test]
    fn kernel_is_idempotent((x, w) in atoms(), n in 1usize..=3, seed in any::<u64>()) {
        let e = op_ensemble(x.clone(), w.clone(), n);
        let k = e.kernel();
        let mut rng = replica_rng(seed, 1);
        for _ in 0..100 {
            let (i, j) = (rng.gen_range(0..x.len()), rng.gen_range(0..x.len()));
            let composed: f64 = (0..x.len()).map(|z| k.entry(i, z) * k.entry(z, j) * w[z]).sum();
            prop_assert!((composed - k.entry(i, j)).abs() <= 1e-9 * k.entry(i, i).abs().max(1.0));
        }
    }

    #[test]
    fn log_density_telescopes((x, w) in atoms(), n in 1usize..=4, seed in any::<u64>(), schur in any::<bool>()) {
        prop_assume!(n + 1 <= x.len());
        let e = op_ensemble(x, w, n);
        let mode = if schur { SamplerMode::Schur } else { SamplerMode::Hkpv };
        let cfg = SamplerConfig { mode, ..SamplerConfig::default() };
        let s = sample(e.kernel(), &cfg, &mut replica_rng(seed, 0)).unwrap();
        let direct = e.log_joint_density(&s.points).unwrap();
        prop_assert!((s.log_density.exp() / direct.exp() - 1.0).abs() <= 1e-6);
        let det = e.kernel().joint_density(&s.atoms).unwrap() / ln_factorial(n).exp();
        prop_assert!((s.log_density.exp() / det - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn incremental_conditionals_match_minor_ratios((x, w) in atoms(), n in 1usize..=4, seed in any::<u64>()) {
        prop_assume!(n + 1 <= x.len());
        let e = op_ensemble(x, w, n);
        let tilted = e.tilt_nonorthogonal(&[vec![0.05]], true, seed).ok();
        for kernel in std::iter::once(e.kernel()).chain(tilted.as_ref().map(|t| t.kernel())) {
            let path = sample(kernel, &SamplerConfig { mode: SamplerMode::Schur, ..SamplerConfig::default() }, &mut replica_rng(seed, 2)).unwrap();
            let mut state = ConditionalState::new(kernel, Scheme::Schur);
            for &atom in &path.atoms {
                for i in 0..kernel.n_atoms() {
                    let fast = state.conditional_density(i);
                    let slow = state.direct_conditional_density(i).unwrap();
                    prop_assert!((fast - slow).abs() <= 1e-8 * slow.abs().max(1.0), "{fast} vs {slow}");
                }
                state.push(atom).unwrap();
            }
        }
    }

    #[test]
    fn measure_integration_is_linear(points in vec((-2.0f64..2.0, -2.0f64..2.0), 3..10), c in -3.0f64..3.0) {
        let w: Vec<f64> = (0..points.len()).map(|i| 0.1 + i as f64).collect();
        let z: Vec<Complex64> = points.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
        let m = ReferenceMeasure::from_atoms(z, w).unwrap();
        let f = |z: Complex64| z * z;
        let g = |z: Complex64| z.conj() + 1.0;
        let lhs = m.integrate(|z| f(z) + g(z) * c).unwrap();
        let rhs = m.integrate(f).unwrap() + m.integrate(g).unwrap() * c;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        let fg = m.inner_product(f, g).unwrap();
        let gf = m.inner_product(g, f).unwrap();
        prop_assert!((fg - gf.conj()).norm() <= 1e-10 * (1.0 + fg.norm()));
    }
}

fn small() -> PolynomialEnsemble<f64> {
    op_ensemble(vec![-1.0, -0.3, 0.4, 1.2, 2.0], vec![0.2, 0.3, 0.1, 0.3, 0.1], 2)
}

fn pair_counts(e: &PolynomialEnsemble<f64>, seed: u64, draws: usize) -> Vec<usize> {
    let atoms = e.measure().len();
    let cfg = SamplerConfig { seed, ..SamplerConfig::default() };
    let mut counts = vec![0; atoms * atoms];
    for s in sample_replicas(e.kernel(), &cfg, draws).unwrap() {
        let (i, j) = (s.atoms[0].min(s.atoms[1]), s.atoms[0].max(s.atoms[1]));
        counts[i * atoms + j] += 1;
    }
    counts
}

#[test]
fn unordered_law_does_not_depend_on_seed() {
    let e = small();
    let draws = 50_000;
    let a = pair_counts(&e, 1, draws);
    let b = pair_counts(&e, 2, draws);
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (x, y) in a.iter().zip(&b) {
        if x + y > 0 {
            chi2 += (*x as f64 - *y as f64).powi(2) / (x + y) as f64;
            cells += 1;
        }
    }
    assert_eq!(cells, 10);
    // 99th percentile of chi-square with 9 degrees of freedom
    assert!(chi2 < 21.666, "chi2 = {chi2}");
}

#[test]
fn each_draw_position_has_the_mean_law() {
    let e = small();
    let cfg = SamplerConfig { seed: 9, ..SamplerConfig::default() };
    let draws = 50_000;
    let w = e.measure().weights();
    let exact: Vec<f64> = (0..5).map(|i| e.kernel().entry(i, i) * w[i] / 2.0).collect();
    let samples = sample_replicas(e.kernel(), &cfg, draws).unwrap();
    for position in 0..2 {
        let mut counts = vec![0usize; 5];
        for s in &samples {
            counts[s.atoms[position]] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&exact)
            .map(|(c, p)| (*c as f64 - draws as f64 * p).powi(2) / (draws as f64 * p))
            .sum();
        // 99th percentile with 4 degrees of freedom
        assert!(chi2 < 13.277, "position {position}: chi2 = {chi2}");
    }
}

#[test]
fn singleton_intensity_matches_kernel_diagonal() {
    let e = small();
    let tilted = e.tilt_nonorthogonal(&[vec![0.1], vec![0.0]], true, 3).unwrap();
    for ens in [&e, &tilted] {
        let draws = 100_000;
        let cfg = SamplerConfig { seed: 4, ..SamplerConfig::default() };
        let mut counts = vec![0usize; 5];
        for s in sample_replicas(ens.kernel(), &cfg, draws).unwrap() {
            for a in s.atoms {
                counts[a] += 1;
            }
        }
        let w = ens.measure().weights();
        for (i, c) in counts.iter().enumerate() {
            let p = ens.kernel().entry(i, i) * w[i];
            let se = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - draws as f64 * p).abs() <= 3.0 * se, "atom {i}: {c} vs {}", draws as f64 * p);
        }
    }
}

#[test]
fn categorical_draws_pass_chi_square() {
    let density: Vec<f64> = (0..16).map(|i| 1.0 + (i % 5) as f64).collect();
    let w = vec![1.0 / 16.0; 16];
    let m = ReferenceMeasure::from_atoms((0..16).map(|i| i as f64).collect(), w.clone()).unwrap();
    let mut rng = replica_rng(5, 0);
    let draws = 100_000;
    let mut counts = vec![0usize; 16];
    for _ in 0..draws {
        counts[m.sample_categorical(&density, &mut rng).unwrap()] += 1;
    }
    let total: f64 = density.iter().zip(&w).map(|(d, w)| d * w).sum();
    let chi2: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let expected = draws as f64 * density[i] * w[i] / total;
            (*c as f64 - expected).powi(2) / expected
        })
        .sum();
    // 99th percentile with 15 degrees of freedom
    assert!(chi2 < 30.578, "chi2 = {chi2}");
}

#[test]
fn large_samples_stay_consistent() {
    let e = PolynomialEnsemble::gue(40, 120, 2).unwrap();
    let cfg = SamplerConfig { seed: 11, refactor_every: 8, ..SamplerConfig::default() };
    let s = sample(e.kernel(), &cfg, &mut replica_rng(11, 0)).unwrap();
    let mut atoms = s.atoms.clone();
    atoms.sort_unstable();
    atoms.dedup();
    assert_eq!(atoms.len(), 40);
    let direct = e.log_joint_density(&s.points).unwrap();
    assert!((s.log_density - direct).abs() <= 1e-6 * direct.abs().max(1.0));
}

#[test]
fn circle_samples_are_complex_and_exact() {
    let e = PolynomialEnsemble::uniform_circle(5, 32, 2).unwrap();
    let cfg = SamplerConfig { seed: 3, check_normalization: true, ..SamplerConfig::default() };
    for s in sample_replicas(e.kernel(), &cfg, 50).unwrap() {
        assert!(s.points.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let direct = e.log_joint_density(&s.points).unwrap();
        assert!((s.log_density - direct).abs() <= 1e-8 * direct.abs().max(1.0));
    }
}
