//! Property tests for the library's invariants.

use std::sync::OnceLock;

use proptest::prelude::*;

use treefiid::dbar::{coupling_product_bound, dbar_lower_bound};
use treefiid::dunau::{dunau_inner, dunau_values, sphere_indicator_check, sphere_size, sphere_vector, DunauTable};
use treefiid::measures::{
    classify, gauss_markov_density, gauss_markov_is_fiid, hellinger_affinity, moment, total_mass, tv_distance, Atom,
    Classification, DensitySpec, SpectralMeasure,
};
use treefiid::quadrature::{build_quadrature, integrate, QuadratureRule, DEFAULT_NODES};
use treefiid::simulate::{
    apply_linear_factor, empirical_covariances, sample_iid_gaussian, FieldSampler, GaussMarkovSampler,
    LinearFactorSampler, MarkovSpec,
};
use treefiid::spectrum::{closed_walk_count, kesten_mckay_density, TreeModel};
use treefiid::transforms::{
    covariances_from_measure, moments_from_covariance, synthesize, CovarianceSequence, RadialCoefficients,
};
use treefiid::tree::TruncatedTree;

fn rule(d: usize) -> &'static QuadratureRule {
    static RULES: [OnceLock<QuadratureRule>; 7] = [const { OnceLock::new() }; 7];
    RULES[d].get_or_init(|| build_quadrature(TreeModel::new(d).unwrap(), DEFAULT_NODES).unwrap())
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 1..=max_len)
}

fn measure(d: usize) -> impl Strategy<Value = SpectralMeasure> {
    let thr = 1.0 / ((d - 1) as f64).sqrt();
    let density = prop_oneof![
        (0.0..2.0f64).prop_map(DensitySpec::Constant),
        (-thr..thr).prop_map(DensitySpec::GaussMarkov),
        coeffs(4).prop_map(DensitySpec::SquaredDunauSeries),
    ];
    let atoms = prop::collection::vec((prop::sample::select(vec![-2.5, -1.0, 0.0, 1.5, 2.0, 2.9]), 0.1..2.0f64), 0..3);
    (density, atoms).prop_map(move |(density, atoms)| {
        let mut atoms: Vec<Atom> = atoms.into_iter().map(|(location, mass)| Atom { location, mass }).collect();
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        atoms.dedup_by(|a, b| a.location == b.location);
        SpectralMeasure::new(atoms, density, rule(d)).unwrap()
    })
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn quadrature_moments_match_walk_counts(d in 2usize..=6, k in 0usize..=20) {
        let exact = closed_walk_count(TreeModel::new(d).unwrap(), k).unwrap() as f64;
        let got = integrate(rule(d), |t| t.powi(k as i32)).unwrap();
        prop_assert!((got - exact).abs() / exact.max(1.0) <= 1e-8);
        if k % 2 == 1 {
            prop_assert!(got.abs() <= 1e-10);
        }
    }

    #[test]
    fn walk_counts_parity_and_monotonicity(d in 2usize..=8, k in 0usize..=30) {
        let c = closed_walk_count(TreeModel::new(d).unwrap(), k).unwrap();
        if k % 2 == 1 {
            prop_assert_eq!(c, 0);
        } else {
            prop_assert!(c > 0);
            let bigger = closed_walk_count(TreeModel::new(d + 1).unwrap(), k).unwrap();
            prop_assert!(bigger >= c);
        }
    }

    #[test]
    fn density_nonnegative_and_symmetric(d in 2usize..=10, t in -12.0..12.0f64) {
        let m = TreeModel::new(d).unwrap();
        let h = kesten_mckay_density(m, t);
        prop_assert!(h >= 0.0);
        prop_assert_eq!(h, kesten_mckay_density(m, -t));
        let r = m.spectral_radius();
        prop_assert!((r * r - 4.0 * (d - 1) as f64).abs() <= 4.0 * f64::EPSILON * r * r);
    }

    #[test]
    fn quadrature_rule_shape(d in 2usize..=6, n in 2usize..300) {
        let q = build_quadrature(TreeModel::new(d).unwrap(), n).unwrap();
        let r = q.model().spectral_radius();
        prop_assert!((q.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(q.weights().iter().all(|&w| w > 0.0));
        prop_assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(q.nodes().iter().all(|t| t.abs() <= r));
    }

    #[test]
    fn dunau_orthogonality(n in 0usize..=15, m in 0usize..=15) {
        let table = DunauTable::new(3, 15).unwrap();
        let got = dunau_inner(&table, rule(3), n, m).unwrap();
        if n == m {
            let s = sphere_size(3, n).unwrap() as f64;
            prop_assert!((got - s).abs() <= 1e-6 * s);
        } else {
            prop_assert!(got.abs() <= 1e-6);
        }
    }

    #[test]
    fn dunau_matches_tree_inner_products(d in 3usize..=4, n in 0usize..=4, m in 0usize..=4) {
        let tree = TruncatedTree::new(d, 8).unwrap();
        let a = sphere_vector(&tree, n).unwrap();
        let b = sphere_vector(&tree, m).unwrap();
        let on_tree: i128 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let table = DunauTable::new(d, 4).unwrap();
        let q = dunau_inner(&table, rule(d), n, m).unwrap();
        prop_assert!((q - on_tree as f64).abs() <= 1e-9 * (on_tree as f64).max(1.0));
    }

    #[test]
    fn dunau_parity_and_low_orders(d in 2usize..=8, t in -10.0..10.0f64) {
        let a = dunau_values(d, 30, t);
        let b = dunau_values(d, 30, -t);
        prop_assert_eq!(a[0], 1.0);
        prop_assert_eq!(a[1], t);
        for n in 0..=30 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(a[n], sign * b[n]);
        }
    }

    #[test]
    fn dunau_degree_is_n(d in 2usize..=6, n in 0usize..=10) {
        // r_n is monic of degree n: r_n(t)/tⁿ -> 1
        let t = 1e7;
        let r = dunau_values(d, n, t)[n];
        prop_assert!((r / t.powi(n as i32) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn dunau_bounded_on_support(d in 2usize..=8, u in -1.0..1.0f64) {
        let t = u * TreeModel::new(d).unwrap().spectral_radius();
        for (n, v) in dunau_values(d, 64, t).iter().enumerate() {
            let growth = (n + 1) as f64 * ((d - 1) as f64).powf(n as f64 / 2.0);
            prop_assert!(v.is_finite());
            prop_assert!(v.abs() <= growth.max(2.0) * d as f64);
        }
    }

    #[test]
    fn tv_is_a_metric(a in measure(3), b in measure(3), c in measure(3)) {
        let q = rule(3);
        let ab = tv_distance(&a, &b, q).unwrap();
        prop_assert_eq!(ab, tv_distance(&b, &a, q).unwrap());
        let ac = tv_distance(&a, &c, q).unwrap();
        let cb = tv_distance(&c, &b, q).unwrap();
        prop_assert!(ab <= ac + cb + 1e-10);
        let (ma, mb) = (total_mass(&a, q).unwrap(), total_mass(&b, q).unwrap());
        prop_assert!(ab <= 0.5 * (ma + mb) + 1e-12);
        let h = hellinger_affinity(&a, &b, q).unwrap();
        prop_assert!(h * h <= ma * mb + 1e-10);
        prop_assert!((coupling_product_bound(&a, &a, q).unwrap() - ma).abs() <= 1e-12 * ma.max(1.0));
    }

    #[test]
    fn gauss_markov_series_converges(rho in -0.5..0.5f64, u in -0.95..0.95f64) {
        let d = 3;
        let x = u * TreeModel::new(d).unwrap().spectral_radius();
        let partial: f64 = dunau_values(d, 60, x).iter().enumerate().map(|(k, r)| rho.powi(k as i32) * r).sum();
        prop_assert!((partial - gauss_markov_density(d, rho, x).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn gauss_markov_classification(d in 3usize..=5, rho in -1.0..1.0f64) {
        let fiid = gauss_markov_is_fiid(d, rho).unwrap();
        match SpectralMeasure::absolutely_continuous(DensitySpec::GaussMarkov(rho), rule(d)) {
            Ok(mu) => {
                prop_assert!(fiid);
                prop_assert_eq!(classify(&mu).unwrap(), Classification::FactorOfIID);
            }
            Err(_) => prop_assert!(!fiid),
        }
    }

    #[test]
    fn covariance_moment_round_trip(rho in -0.7..0.7f64, which in 0usize..3, k in 0usize..=12) {
        let d = 3;
        let q = rule(d);
        let density = [DensitySpec::Constant(1.0), DensitySpec::GaussMarkov(rho), DensitySpec::GreenFunction][which].clone();
        let mu = SpectralMeasure::absolutely_continuous(density, q).unwrap();
        let c = covariances_from_measure(&mu, k, q).unwrap();
        let via_cov = moments_from_covariance(&c, k).unwrap();
        let direct = moment(&mu, k, q).unwrap();
        prop_assert!((via_cov - direct).abs() <= 1e-6 * direct.abs().max(1.0));
    }

    #[test]
    fn synthesis_parseval_and_bessel(rho in -0.7..0.7f64, r1 in 0usize..30, r2 in 0usize..30) {
        let q = rule(3);
        let g = DensitySpec::GaussMarkov(rho);
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let a = synthesize(&g, lo, q).unwrap();
        let b = synthesize(&g, hi, q).unwrap();
        prop_assert!(b.truncation_error <= a.truncation_error);
        let p = b.coefficients.polynomial();
        let norm = integrate(q, |t| p.eval(3, t).powi(2)).unwrap();
        prop_assert!((norm - b.coefficients.l2_norm_sq()).abs() <= 1e-9);
    }

    #[test]
    fn covariance_sequences_obey_cauchy_schwarz(values in prop::collection::vec(-2.0..2.0f64, 1..8)) {
        let ok = values.iter().all(|c| c.abs() <= values[0]);
        prop_assert_eq!(CovarianceSequence::new(3, values).is_ok(), ok);
    }

    #[test]
    fn tree_layout(d in 2usize..=5, depth in 0usize..=6) {
        let t = TruncatedTree::new(d, depth).unwrap();
        let expected: u64 = (0..=depth).map(|n| sphere_size(d, n).unwrap()).sum();
        prop_assert_eq!(t.len() as u64, expected);
        prop_assert_eq!(t.parent(0), None);
        for v in 0..t.len() {
            prop_assert_eq!(t.distance(0, v), t.level(v));
            let kids = t.children(v);
            let expected_kids = if t.level(v) == depth { 0 } else if v == 0 { d } else { d - 1 };
            prop_assert_eq!(kids.len(), expected_kids);
            for c in kids {
                prop_assert_eq!(t.parent(c), Some(v));
            }
        }
    }

    #[test]
    fn adjacency_reproduces_sphere_indicators(d in 2usize..=4, depth in 0usize..=8) {
        for n in 0..=depth / 2 {
            prop_assert!(sphere_indicator_check(d, n, depth).unwrap());
        }
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), index in 0u64..1000) {
        let t = TruncatedTree::new(3, 3).unwrap();
        let s = GaussMarkovSampler::new(t.clone(), 0.4).unwrap();
        prop_assert_eq!(s.sample(seed, index), s.sample(seed, index));
        prop_assert_eq!(sample_iid_gaussian(&t, seed), sample_iid_gaussian(&t, seed));
    }

    #[test]
    fn lumped_linear_factor_matches_full_field(
        values in prop::collection::vec(-1.0..1.0f64, 1..=4),
        extra in 0usize..=2,
        seed in any::<u64>(),
    ) {
        let c = RadialCoefficients::new(3, values).unwrap();
        let depth = c.radius() + extra;
        let full = TruncatedTree::new(3, depth).unwrap();
        let z = sample_iid_gaussian(&full, seed);
        let x = apply_linear_factor(&full, &c, &z).unwrap();
        let lumped = LinearFactorSampler::new(depth, c).unwrap();
        let core = lumped.tree().len();
        let mut noise = z.values[..core].to_vec();
        for i in 0..lumped.slots() - core {
            let (w, j, _) = lumped.lump(i);
            noise.push(z.values[full.descendants(w, j)].iter().sum());
        }
        let y = lumped.evaluate(&noise);
        for v in 0..core {
            prop_assert!((x.values[v] - y.values[v]).abs() <= 1e-12);
        }
    }

    #[test]
    fn markov_spec_checks(a in 0.0..1.0f64, b in 0.0..1.0f64, eps in 1e-9..1e-3f64) {
        // symmetric doubly stochastic 3x3 with parameters a, b
        let (a, b) = (a * 0.5, b * 0.5);
        let m = vec![
            vec![1.0 - a - b, a, b],
            vec![a, 1.0 - a - b, b],
            vec![b, b, 1.0 - 2.0 * b],
        ];
        prop_assert!(MarkovSpec::new(m.clone(), vec![1.0, 0.0, -1.0]).is_ok());
        let mut skew = m.clone();
        skew[0][1] += eps;
        skew[0][0] -= eps;
        prop_assert!(MarkovSpec::new(skew, vec![1.0, 0.0, -1.0]).is_err());
        let mut unbalanced = m;
        unbalanced[2][2] += eps;
        prop_assert!(MarkovSpec::new(unbalanced, vec![1.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn lower_bound_shape(vx in 0.0..5.0f64, vy in 0.0..5.0f64, u1 in 0.0..1.0f64, u2 in 0.0..1.0f64) {
        let s = vx + vy;
        let (lo, hi) = (u1.min(u2) * s / 2.0, u1.max(u2) * s / 2.0);
        let b_lo = dbar_lower_bound(vx, vy, lo).unwrap();
        let b_hi = dbar_lower_bound(vx, vy, hi).unwrap();
        prop_assert!(b_lo <= b_hi);
        prop_assert_eq!(b_lo == 0.0, lo == 0.0);
        prop_assert!((dbar_lower_bound(vx, vy, s / 2.0).unwrap() - s.sqrt()).abs() <= 1e-12 * s.sqrt().max(1.0));
    }

    #[test]
    fn singular_pairs_have_zero_affinity(loc in -3.0..3.0f64, mass in 0.1..3.0f64, rho in -0.7..0.7f64) {
        let q = rule(3);
        let atom = SpectralMeasure::dirac(3, loc, mass).unwrap();
        let ac = SpectralMeasure::absolutely_continuous(DensitySpec::GaussMarkov(rho), q).unwrap();
        prop_assert_eq!(coupling_product_bound(&atom, &ac, q).unwrap(), 0.0);
        let other = SpectralMeasure::dirac(3, loc * 0.5 + 0.25, mass).unwrap();
        if other.atoms()[0].location != loc {
            prop_assert_eq!(coupling_product_bound(&atom, &other, q).unwrap(), 0.0);
        }
    }
}

#[test]
fn synthesized_density_approximates_target() {
    let q = rule(3);
    let g = DensitySpec::GaussMarkov(0.5);
    let s = synthesize(&g, 40, q).unwrap();
    let p2 = s.coefficients.spectral_density();
    let gap = integrate(q, |t| (p2.eval(3, t) - g.eval(3, t)).abs()).unwrap();
    assert!(gap <= 1e-3, "{gap}");
    assert!(s.truncation_error <= 1e-4);
}

#[test]
fn gauss_markov_sampler_law() {
    let tree = TruncatedTree::new(3, 5).unwrap();
    for rho in [-0.5, 0.3, 1.0 / 2f64.sqrt()] {
        let s = GaussMarkovSampler::new(tree.clone(), rho).unwrap();
        let est = empirical_covariances(&s, 5, 100_000, 99).unwrap();
        for (n, e) in est.iter().enumerate() {
            assert!(e.agrees_with(rho.powi(n as i32), 0.0), "rho={rho} n={n}: {e:?}");
        }
    }
}
