use std::time::Duration;

use photonscan_core::reconstruct::RoiMap;
use photonscan_core::rng::{stream, StreamLabel};
use photonscan_core::sampler::{
    adapt_time_step, place_arrays, MhConfig, Sampler, ScanMode, ScanScenario, TimeStepController,
};

/// 32 x 32 map with a flat plateau over the lower half and a 2 x 2 spike.
fn two_scale_map() -> RoiMap {
    let mut s = vec![0.0; 32 * 32];
    for v in s.iter_mut().skip(16 * 32) {
        *v = 1.0;
    }
    for (r, c) in [(5, 5), (5, 6), (6, 5), (6, 6)] {
        s[r * 32 + c] = 40.0;
    }
    RoiMap::from_scores(32, 32, s).unwrap()
}

#[test]
fn spot_keeps_native_side_and_plateau_zooms_out() {
    let m = two_scale_map();
    let r = 4;
    let cfg = MhConfig { burn_in: 200, thin: 3, patience: 50 };
    let mut ok = 0;
    let trials = 1000;
    for t in 0..trials {
        let picks = place_arrays(&m, r, 2, 0.9, stream(t, StreamLabel::Test, 0, 0), &cfg).unwrap();
        let correct = picks.iter().all(|p| {
            let row = p.anchor / 32;
            if row < 16 {
                p.side == r
            } else {
                p.side == 2 * r
            }
        });
        if correct {
            ok += 1;
        }
    }
    assert!(ok as f64 >= 0.8 * trials as f64, "{ok}/{trials}");
}

#[test]
fn arrays_stay_on_the_grid() {
    let m = two_scale_map();
    let picks = place_arrays(&m, 8, 6, 0.9, stream(3, StreamLabel::Test, 0, 0), &MhConfig::default()).unwrap();
    assert_eq!(picks.len(), 6);
    for p in picks {
        assert!(p.anchor < 32 * 32);
        assert_eq!((p.anchor / 32) % 8, 0);
        assert_eq!((p.anchor % 32) % 8, 0);
    }
}

#[test]
fn sampler_plans_respect_budget_and_dwell_range() {
    let m = two_scale_map();
    let scenario = sampler_scenario();
    assert_eq!(scenario.mode, ScanMode::Sequential);
    let sampler = Sampler::new(scenario, 9);
    let plan = sampler.next_plan(&m, 0).unwrap();
    assert_eq!(plan.scanned_points(32, 32), 64);
    let cap = Duration::from_micros(1200);
    assert!(plan.placements.iter().all(|p| p.dwell >= Duration::from_micros(300) && p.dwell <= cap));
    assert!(plan.placements.iter().any(|p| p.dwell == cap));
    let again = Sampler::new(sampler_scenario(), 9).next_plan(&m, 0).unwrap();
    assert_eq!(plan, again);
}

fn sampler_scenario() -> ScanScenario {
    let mut scenario = ScanScenario::pixelwise(64, Duration::from_micros(300));
    scenario.importance = 4.0;
    scenario
}

#[test]
fn time_step_rule_moves_toward_the_band() {
    let t0 = Duration::from_micros(400);
    let min = Duration::from_micros(50);
    assert_eq!(adapt_time_step(0.8, t0, min), t0);
    assert_eq!(adapt_time_step(0.5, t0, min), Duration::from_micros(800));
    assert_eq!(adapt_time_step(0.95, t0, min), Duration::from_micros(200));
    assert_eq!(adapt_time_step(0.99, Duration::from_micros(60), min), min);
}

#[test]
fn controller_settles_in_band_for_exponential_detection() {
    // detection probability 1 - exp(-t / tau), band reached for t in [1.2, 2.3] tau
    let tau = 1e-3;
    for start_us in [10u64, 100, 1_180, 30_000, 500_000] {
        let mut c = TimeStepController::new(Duration::from_micros(start_us), Duration::from_micros(1), Duration::from_secs(1));
        let mut hit = false;
        for _ in 0..10 {
            let frac = 1.0 - (-c.t0.as_secs_f64() / tau).exp();
            if (0.7..=0.9).contains(&frac) {
                hit = true;
                break;
            }
            c.update(frac);
        }
        assert!(hit, "start {start_us}µs ended at {:?}", c.t0);
    }
}
