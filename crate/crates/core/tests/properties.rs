use fracdual::duality::{duality_residual, riesz_pairing};
use fracdual::fraclap::{frac_laplacian_pv, TailModel};
use fracdual::grid::{distance, norm};
use fracdual::kernel::{mollify, riesz_kernel, GridSpec, MollifierProfile, MollifierSpec};
use fracdual::norms::{
    gagliardo_power_by_level, gagliardo_seminorm_on, lebesgue_norm_on, lebesgue_power_by_level, BallMesh,
};
use fracdual::potential::{potential_of_density, potential_of_measure, potential_on_grid};
use fracdual::{Atom, AtomicMeasure, Ball, FnField, FracParams, GridFunction};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(cases: u32, seed: u64) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn bump(x: &[f64], c: &[f64], rho: f64) -> f64 {
    let r2 = distance(x, c).powi(2) / (rho * rho);
    if r2 < 1.0 {
        (1.0 - r2).powi(4)
    } else {
        0.0
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn atoms2(points: &[(f64, f64, f64)]) -> AtomicMeasure {
    let atoms = points
        .iter()
        .map(|&(x, y, w)| Atom {
            point: vec![x, y],
            weight: w,
        })
        .collect();
    AtomicMeasure::new(2, atoms, 1.0).unwrap()
}

fn atom_strategy() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6, -2.0f64..2.0), 1..4)
}

#[test]
fn critical_exponents_over_a_parameter_grid() {
    for dim in 2..=10usize {
        let mut prev: Option<(f64, f64)> = None;
        for k in 1..50 {
            let s = 0.5 + 0.01 * k as f64;
            let par = FracParams::new(dim, s).unwrap();
            let c = par.critical_exponents();
            assert!(c.q_star < 2.0, "N={dim} s={s}");
            let n = dim as f64;
            if s > (2.0 + n - (4.0 + n * n).sqrt()) / 4.0 {
                assert!(c.eta_of(c.q_star * 0.99) > 0.0);
            }
            if let Some((r, q)) = prev {
                assert!(c.r_star > r && c.q_star > q, "N={dim} s={s}");
            }
            prev = Some((c.r_star, c.q_star));
        }
    }
}

proptest! {
    #![proptest_config(config(64, 11))]

    #[test]
    fn kernel_is_homogeneous(x in prop::collection::vec(-4.0f64..4.0, 3), lambda in 0.05f64..20.0, s in 0.51f64..0.99) {
        prop_assume!(norm(&x) > 1e-3);
        let par = FracParams::new(3, s).unwrap();
        let y: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let expect = lambda.powf(-par.riesz_exponent()) * riesz_kernel(&x, &par).unwrap();
        prop_assert!(close(riesz_kernel(&y, &par).unwrap(), expect, 1e-13));
    }

    #[test]
    fn atomic_potential_is_linear_and_translation_equivariant(
        a in atom_strategy(),
        b in atom_strategy(),
        (ca, cb) in (-3.0f64..3.0, -3.0f64..3.0),
        x in (1.5f64..4.0, 0.0f64..6.3),
        shift in (-0.3f64..0.3, -0.3f64..0.3),
    ) {
        let par = FracParams::new(2, 0.7).unwrap();
        let (mu, nu) = (atoms2(&a), atoms2(&b));
        let p = [x.0 * x.1.cos(), x.0 * x.1.sin()];
        let combo = mu.scaled(ca).sum(&nu.scaled(cb)).unwrap();
        let lhs = potential_of_measure(&combo, &p, &par).unwrap();
        let rhs = ca * potential_of_measure(&mu, &p, &par).unwrap() + cb * potential_of_measure(&nu, &p, &par).unwrap();
        let scale = mu.total_variation() * ca.abs() + nu.total_variation() * cb.abs();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale.max(1.0));

        let moved = mu.translated(&[shift.0, shift.1]).unwrap();
        let q = [p[0] + shift.0, p[1] + shift.1];
        prop_assert!(close(potential_of_measure(&moved, &q, &par).unwrap(), potential_of_measure(&mu, &p, &par).unwrap(), 1e-12));
    }

    #[test]
    fn mollify_is_linear_and_positive(a in atom_strategy(), b in atom_strategy(), ca in -2.0f64..2.0, cb in -2.0f64..2.0) {
        let spec = MollifierSpec::new(0.15, MollifierProfile::PolynomialBump).unwrap();
        let grid = GridSpec::centered(2, 1.5, 64);
        let (mu, nu) = (atoms2(&a), atoms2(&b));
        let combo = mollify(&mu.scaled(ca).sum(&nu.scaled(cb)).unwrap(), &spec, &grid).unwrap();
        let fm = mollify(&mu, &spec, &grid).unwrap();
        let fn_ = mollify(&nu, &spec, &grid).unwrap();
        let sup = fm.values().iter().chain(fn_.values()).fold(1.0f64, |m, v| m.max(v.abs()));
        for ((c, x), y) in combo.values().iter().zip(fm.values()).zip(fn_.values()) {
            prop_assert!((c - (ca * x + cb * y)).abs() <= 1e-12 * sup * (ca.abs() + cb.abs() + 1.0));
        }
        let positive: Vec<(f64, f64, f64)> = a.iter().map(|&(x, y, w)| (x, y, w.abs())).collect();
        let f = mollify(&atoms2(&positive), &spec, &grid).unwrap();
        prop_assert!(f.values().iter().all(|v| *v >= 0.0));
        prop_assert!(close(f.integral(), atoms2(&positive).total_mass(), 1e-12));
    }
}

proptest! {
    #![proptest_config(config(16, 12))]

    #[test]
    fn density_potential_is_linear_and_positive(
        c1 in (-0.3f64..0.3, -0.3f64..0.3),
        c2 in (-0.3f64..0.3, -0.3f64..0.3),
        (a, b) in (0.1f64..2.0, -2.0f64..2.0),
        x in (-1.5f64..1.5, -1.5f64..1.5),
    ) {
        let par = FracParams::new(2, 0.75).unwrap();
        let f = GridFunction::from_fn(vec![0.0; 2], 1.0, 32, |p| bump(p, &[c1.0, c1.1], 0.4)).unwrap();
        let g = GridFunction::from_fn(vec![0.0; 2], 1.0, 32, |p| bump(p, &[c2.0, c2.1], 0.5)).unwrap();
        let h = f.lin_comb(a, &g, b).unwrap();
        let p = [x.0, x.1];
        let wf = potential_of_density(&f, &p, &par).unwrap();
        let wg = potential_of_density(&g, &p, &par).unwrap();
        let wh = potential_of_density(&h, &p, &par).unwrap();
        prop_assert!((wh - (a * wf + b * wg)).abs() <= 1e-12 * (a.abs() * wf.abs() + b.abs() * wg.abs()));
        prop_assert!(wf > 0.0);
        let grid = potential_on_grid(&f, &par).unwrap();
        prop_assert!(grid.values().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn density_potential_is_continuous(c in (-0.3f64..0.3, -0.3f64..0.3), x in (-0.5f64..0.5, -0.5f64..0.5), dir in 0.0f64..6.3) {
        let par = FracParams::new(2, 0.75).unwrap();
        let f = GridFunction::from_fn(vec![0.0; 2], 1.0, 32, |p| bump(p, &[c.0, c.1], 0.5)).unwrap();
        let w0 = potential_of_density(&f, &[x.0, x.1], &par).unwrap();
        let diffs: Vec<f64> = (1..12)
            .map(|k| {
                let t = 0.5f64.powi(k);
                let p = [x.0 + t * dir.cos(), x.1 + t * dir.sin()];
                (potential_of_density(&f, &p, &par).unwrap() - w0).abs()
            })
            .collect();
        // Cauchy along the sequence: tail differences shrink toward zero.
        prop_assert!(diffs[10] <= 1e-2 * w0);
        prop_assert!(diffs[10] <= diffs[0].max(1e-14 * w0));
    }

    #[test]
    fn pv_is_linear_and_scales(a in -2.0f64..2.0, b in -2.0f64..2.0, s in 0.55f64..0.95, k in 0usize..6, lambda in prop::sample::select(vec![0.5f64, 2.0])) {
        let par = FracParams::new(2, s).unwrap();
        let u = GridFunction::from_fn(vec![0.0; 2], 8.0, 64, |x| (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let v = GridFunction::from_fn(vec![0.0; 2], 8.0, 64, |x| (-(x[0] - 0.3).powi(2) - x[1] * x[1]).exp()).unwrap();
        let w = u.lin_comb(a, &v, b).unwrap();
        let x = u.point(64 * 32 + 30 + k);
        let delta = 8.0 * u.spacing();
        let lu = frac_laplacian_pv(&u, &TailModel::Zero, &x, &par, delta).unwrap();
        let lv = frac_laplacian_pv(&v, &TailModel::Zero, &x, &par, delta).unwrap();
        let lw = frac_laplacian_pv(&w, &TailModel::Zero, &x, &par, delta).unwrap();
        prop_assert!((lw - (a * lu + b * lv)).abs() <= 1e-12 * (a.abs() * lu.abs() + b.abs() * lv.abs()).max(1e-300));

        // u(lambda .) sampled on the scaled box shares the value array.
        let scaled = GridFunction::new(vec![0.0; 2], 8.0 / lambda, 64, u.values().to_vec()).unwrap();
        let y: Vec<f64> = x.iter().map(|c| c / lambda).collect();
        let ls = frac_laplacian_pv(&scaled, &TailModel::Zero, &y, &par, delta / lambda).unwrap();
        prop_assert!(close(ls, lambda.powf(2.0 * s) * lu, 1e-9), "{} vs {}", ls, lambda.powf(2.0 * s) * lu);
    }
}

proptest! {
    #![proptest_config(config(16, 13))]

    #[test]
    fn norms_scale_and_ignore_constants(lambda in -3.0f64..3.0, c in -10.0f64..10.0, eta in 0.1f64..0.9, p in 1.0f64..3.0) {
        prop_assume!(lambda.abs() > 1e-3);
        let ball = Ball::centered(2, 1.0).unwrap();
        let mesh = BallMesh::cartesian(&ball, 20, None).unwrap();
        let u = |x: &[f64]| (1.3 * x[0] - x[1]).sin() + x[0] * x[1];
        let base_semi = gagliardo_seminorm_on(&FnField::new(2, u), eta, p, &mesh, 0.0).unwrap();
        let shifted = gagliardo_seminorm_on(&FnField::new(2, |x: &[f64]| u(x) + c), eta, p, &mesh, 0.0).unwrap();
        prop_assert!(close(shifted, base_semi, 1e-9));
        let scaled = gagliardo_seminorm_on(&FnField::new(2, |x: &[f64]| lambda * u(x)), eta, p, &mesh, 0.0).unwrap();
        prop_assert!(close(scaled, lambda.abs() * base_semi, 1e-12));
        let base_l = lebesgue_norm_on(&FnField::new(2, u), p, &mesh, 0.0).unwrap();
        let scaled_l = lebesgue_norm_on(&FnField::new(2, |x: &[f64]| lambda * u(x)), p, &mesh, 0.0).unwrap();
        prop_assert!(close(scaled_l, lambda.abs() * base_l, 1e-12));
    }

    #[test]
    fn norms_grow_as_excision_shrinks(s in 0.55f64..0.95, r in 1.0f64..6.0, q in 1.0f64..2.0) {
        let par = FracParams::new(2, s).unwrap();
        let u = fracdual::potential::FundamentalSolution::new(par);
        let ball = Ball::centered(2, 1.0).unwrap();
        let levels: Vec<f64> = (0..5).map(|j| 0.5f64.powi(3 + j)).collect();
        let mesh = BallMesh::log_polar(&ball, 4, levels[4]).unwrap();
        let lp = lebesgue_power_by_level(&u, r, &mesh, &levels).unwrap();
        let eta = par.critical_exponents().eta_of(q);
        let gp = gagliardo_power_by_level(&u, eta, q, &mesh, &levels).unwrap();
        prop_assert!(lp.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(gp.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn pairing_is_symmetric_and_duality_bilinear(
        c in prop::collection::vec(-0.4f64..0.4, 4),
        (a, b) in (-2.0f64..2.0, -2.0f64..2.0),
        s in 0.55f64..0.95,
    ) {
        let par = FracParams::new(2, s).unwrap();
        let g = GridFunction::from_fn(vec![0.0; 2], 1.0, 32, |x| bump(x, &c[..2], 0.4)).unwrap();
        let h = GridFunction::from_fn(vec![0.0; 2], 1.0, 32, |x| bump(x, &c[2..], 0.5) * (2.0 + x[1])).unwrap();
        let gh = riesz_pairing(&g, &h, &par).unwrap();
        let hg = riesz_pairing(&h, &g, &par).unwrap();
        prop_assert!(close(gh, hg, 1e-12));

        let u = fracdual::potential::FundamentalSolution::new(par);
        let mu = AtomicMeasure::dirac(vec![0.0, 0.0], 1.0, 0.1).unwrap();
        let combo = g.lin_comb(a, &h, b).unwrap();
        let rg = duality_residual(&u, &mu, &g, &par).unwrap();
        let rh = duality_residual(&u, &mu, &h, &par).unwrap();
        let rc = duality_residual(&u, &mu, &combo, &par).unwrap();
        let tol = 1e-10 * (a.abs() * rg.lhs.abs() + b.abs() * rh.lhs.abs()).max(1e-300);
        prop_assert!((rc.lhs - (a * rg.lhs + b * rh.lhs)).abs() <= tol);
        prop_assert!((rc.rhs - (a * rg.rhs + b * rh.rhs)).abs() <= 1e-10 * (a.abs() * rg.rhs.abs() + b.abs() * rh.rhs.abs()).max(1e-300));
        let doubled = duality_residual(&u, &mu.scaled(a), &g, &par).unwrap();
        prop_assert!(close(doubled.rhs, a * rg.rhs, 1e-12));
    }
}
