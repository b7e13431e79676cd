mod support;

use vsi_achieve::montecarlo::{paired_improvement, CheckerKind, SamplingConfig};
use vsi_achieve::oracle::{TrajectoryOptions, DEFAULT_N_GRID};
use vsi_achieve::rng::{scale, streams, CounterRng};
use vsi_achieve::{
    achievability_rate, map_region, optimize_gain, sample_setpoints, Checker, Gain, GridSpec,
    PlantParams, PowerState, SearchOptions,
};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn acceptance_fraction_matches_cone_area() {
    let cfg = SamplingConfig {
        n_setpoints: 20_000,
        ..SamplingConfig::default()
    };
    let got = sample_setpoints(&cfg, 0).unwrap();

    // Replay the documented stream with an independent PF predicate.
    let rng = CounterRng::new(cfg.seed, streams::SETPOINTS);
    let tan = (1.0 - 0.95f64 * 0.95).sqrt() / 0.95;
    let mut accepted = Vec::new();
    let mut drawn = 0u64;
    while accepted.len() < cfg.n_setpoints {
        let [a, b] = rng.uniform2(drawn);
        drawn += 1;
        let p = scale(a, cfg.p_range[0], cfg.p_range[1]);
        let q = scale(b, cfg.q_range[0], cfg.q_range[1]);
        if p >= 0.0 && q.abs() <= p * tan * (1.0 + 1e-12) {
            accepted.push((p, q));
        }
    }
    assert_eq!(got.len(), accepted.len());
    for (s, (p, q)) in got.iter().zip(&accepted) {
        assert_eq!((s.p_ref, s.q_ref), (*p, *q));
        let pf = s.p_ref / s.p_ref.hypot(s.q_ref);
        assert!((0.95..=1.0).contains(&pf));
    }

    let frac = cfg.n_setpoints as f64 / drawn as f64;
    let area = support::pf_area_fraction(cfg.p_range, cfg.q_range, cfg.pf_range, 2000);
    let sigma = (area * (1.0 - area) / drawn as f64).sqrt();
    assert!(
        (frac - area).abs() <= 4.0 * sigma,
        "acceptance {frac} vs area {area}"
    );
}

#[test]
fn degenerate_box_is_the_origin() {
    let prm = PlantParams::nominal();
    let cfg = SamplingConfig {
        p_range: [0.0, 0.0],
        q_range: [0.0, 0.0],
        n_setpoints: 3,
        ..SamplingConfig::default()
    };
    let pts = sample_setpoints(&cfg, 0).unwrap();
    assert!(pts.iter().all(|s| s.p_ref == 0.0 && s.q_ref == 0.0));
    let r = achievability_rate(
        &Gain::ZERO,
        &pts,
        &Checker::SteadyState { n_grid: 101 },
        &prm,
    )
    .unwrap();
    assert_eq!((r.rate, r.n_achievable), (1.0, 3));
}

#[test]
fn open_loop_rates_agree_between_certificate_and_steady_state() {
    let prm = PlantParams::nominal();
    let pts = sample_setpoints(&SamplingConfig::default(), 0).unwrap();
    let a = achievability_rate(
        &Gain::ZERO,
        &pts,
        &Checker::Certificate(SearchOptions::default()),
        &prm,
    )
    .unwrap();
    let b = achievability_rate(
        &Gain::ZERO,
        &pts,
        &Checker::SteadyState {
            n_grid: DEFAULT_N_GRID,
        },
        &prm,
    )
    .unwrap();
    assert_eq!(a.achievable_mask(), b.achievable_mask());
    assert_eq!(a.n_achievable, b.n_achievable);
    assert!(a.rate > 0.0 && a.rate < 1.0);
    assert_eq!(a.rate, a.n_achievable as f64 / a.n_total as f64);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let prm = PlantParams::nominal();
    let cfg = SamplingConfig {
        n_setpoints: 120,
        n_gains: 24,
        ..SamplingConfig::default()
    };
    let checker = Checker::Trajectory {
        x0: PowerState::ZERO,
        opts: TrajectoryOptions::defaults(&prm, cfg.seed).unwrap(),
        max_horizon: 2.0,
    };
    let one = in_pool(1, || optimize_gain(&cfg, &prm, &checker).unwrap());
    let four = in_pool(4, || optimize_gain(&cfg, &prm, &checker).unwrap());
    assert_eq!(one.log, four.log);
    assert_eq!(one.best, four.best);
    assert_eq!(one.best_index, four.best_index);

    let grid = GridSpec {
        n_p: 20,
        n_q: 10,
        ..GridSpec::default()
    };
    let ss = Checker::SteadyState { n_grid: 201 };
    let m1 = in_pool(1, || map_region(&Gain::ZERO, &grid, &ss, &prm).unwrap());
    let m3 = in_pool(3, || map_region(&Gain::ZERO, &grid, &ss, &prm).unwrap());
    assert_eq!(m1, m3);
}

#[test]
fn optimizer_scores_every_gain_on_one_sample() {
    let prm = PlantParams::nominal();
    let cfg = SamplingConfig {
        n_setpoints: 60,
        n_gains: 30,
        checker: CheckerKind::Trajectory,
        ..SamplingConfig::default()
    };
    let checker = Checker::Trajectory {
        x0: PowerState::ZERO,
        opts: TrajectoryOptions::defaults(&prm, cfg.seed).unwrap(),
        max_horizon: 2.0,
    };
    let out = optimize_gain(&cfg, &prm, &checker).unwrap();
    assert_eq!(out.log.len(), 30);
    for e in &out.log {
        assert_eq!(e.verdicts.len(), 60);
        assert!((0.0..=1.0).contains(&e.rate));
        assert_eq!(
            e.n_achievable,
            e.verdicts.bytes().filter(|&b| b == b'1').count()
        );
        if e.status != "ok" {
            assert_eq!(e.n_achievable, 0);
        }
        assert!(out.best.n_achievable >= e.n_achievable);
    }
    let ol = out.open_loop.as_ref().unwrap();
    assert!(out.best.n_achievable >= ol.n_achievable);
    let (wins, losses, p) = paired_improvement(&out.best.achievable_mask(), &ol.achievable_mask());
    assert!(wins >= losses || wins + losses == 0);
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn single_zero_candidate() {
    let prm = PlantParams::nominal();
    let cfg = SamplingConfig {
        n_setpoints: 40,
        n_gains: 1,
        k_box: [0.0, 0.0],
        include_open_loop: false,
        ..SamplingConfig::default()
    };
    let checker = Checker::SteadyState { n_grid: 201 };
    let out = optimize_gain(&cfg, &prm, &checker).unwrap();
    assert_eq!(out.best.gain, Gain::ZERO);
    let direct = achievability_rate(&Gain::ZERO, &out.setpoints, &checker, &prm).unwrap();
    assert_eq!(out.best.rate, direct.rate);
}

#[test]
fn widened_band_grows_the_open_loop_map() {
    let prm = PlantParams::nominal();
    let wide = prm
        .with_u_bounds(prm.u_lo() - 3.0, prm.u_hi() + 3.0)
        .unwrap();
    let ss = Checker::SteadyState { n_grid: 201 };
    let a = map_region(&Gain::ZERO, &GridSpec::default(), &ss, &prm).unwrap();
    let b = map_region(&Gain::ZERO, &GridSpec::default(), &ss, &wide).unwrap();
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert!(!x.achievable || y.achievable, "{x:?}");
    }
    assert!(b.area() > a.area());
}
