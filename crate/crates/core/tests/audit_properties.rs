use misig_core::audit::{block_maxima_null, test_influence, BlockMode};
use misig_core::evt::EvdModel;
use misig_core::influence::{first_order_influence, influence_set, refit_influence_oracle};
use misig_core::model::fit_ols;
use misig_core::report::report_json;
use misig_core::sim::{generate_synthetic, Dist, SimConfig};
use misig_core::{AuditConfig, Dataset, Family, Regime, SearchSpec};
use proptest::prelude::*;

fn normal(n: usize, rep: u64) -> Dataset {
    generate_synthetic(&SimConfig::new(Dist::Normal, Dist::Normal, n), rep).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn p_value_decreases_in_observed(
        a in -1.0f64..1.0, b in 0.01f64..1.0, g in 0.05f64..0.8,
        d in -2.0f64..5.0, step in 0.0f64..1.0,
    ) {
        for m in [EvdModel::gumbel(a, b).unwrap(), EvdModel::frechet(a, b, g).unwrap()] {
            let (p0, p1) = (m.sf(d), m.sf(d + step));
            prop_assert!((0.0..=1.0).contains(&p0));
            prop_assert!(p1 <= p0);
        }
    }

    #[test]
    fn observed_rows_never_enter_blocks(rep in 0u64..1000, k in 1usize..4) {
        let data = normal(400, rep);
        let config = AuditConfig { seed: rep, ..AuditConfig::new(SearchSpec::constant(k)) };
        let observed = misig_core::search::greedy_most_influential(&fit_ols(&data).unwrap(), &config.spec).unwrap();
        let maxima = block_maxima_null(&data, &config).unwrap();
        for block in &maxima.blocks {
            prop_assert!(observed.indices.iter().all(|i| !block.contains(i)));
        }
    }
}

#[test]
fn report_serialization_is_deterministic() {
    let data = normal(1200, 1);
    for spec in [SearchSpec::constant(2), SearchSpec::relative(0.01)] {
        let config = AuditConfig { seed: 3, ..AuditConfig::new(spec) };
        let a = report_json(&test_influence(&data, &config).unwrap()).unwrap();
        let b = report_json(&test_influence(&data, &config).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn relative_audit_uses_refit_blocks_and_gumbel() {
    let data = normal(3000, 2);
    let report = test_influence(&data, &AuditConfig::new(SearchSpec::relative(0.005))).unwrap();
    assert_eq!(report.regime, Regime::Relative);
    assert_eq!(report.family, Family::Gumbel);
    assert_eq!(report.block_mode, BlockMode::Refit);
}

#[test]
fn heavy_tails_select_frechet_near_one_fifth() {
    let t5 = Dist::StudentT(5.0);
    let reps = 20;
    let mut mean_shape = 0.0;
    for rep in 0..reps {
        let data = generate_synthetic(&SimConfig { seed: 5, ..SimConfig::new(t5, t5, 4000) }, rep).unwrap();
        let report = test_influence(&data, &AuditConfig { seed: rep, ..AuditConfig::default() }).unwrap();
        assert_eq!(report.family, Family::Frechet);
        mean_shape += report.null_model.shape / reps as f64;
    }
    assert!((mean_shape - 0.2).abs() < 0.07, "{mean_shape}");
}

#[test]
fn light_tails_select_gumbel() {
    let mut gumbel = 0;
    for rep in 0..20 {
        let report = test_influence(&normal(2000, rep), &AuditConfig::default()).unwrap();
        gumbel += usize::from(report.family == Family::Gumbel);
    }
    assert!(gumbel >= 18, "{gumbel}");
}

#[test]
fn first_order_underestimates_heavy_leverage_point() {
    let mut data = normal(99, 7);
    let (mut x, mut y) = (data.x().to_vec(), data.y().to_vec());
    x.push(6.0);
    y.push(12.0);
    data = Dataset::new(x, y).unwrap();
    let fit = fit_ols(&data).unwrap();
    let exact = refit_influence_oracle(&data, &[99]).unwrap();
    let closed = influence_set(&fit, &[99]).unwrap().delta;
    let linear = first_order_influence(&fit, &[99]).unwrap();
    assert!((exact - closed).abs() < 1e-12);
    assert!(exact > linear && linear > 0.0);
}
