use ftcc::encoding::{cascade_mc, p_crit, pfail_bound, CascadeOptions};

fn mc(p: f64, seed: u64, trials: u64, input: bool) -> ftcc::netsim::TrialStats {
    let opts = CascadeOptions {
        input,
        ..CascadeOptions::default()
    };
    cascade_mc(p, seed, trials, &opts).unwrap()
}

#[test]
fn bound_is_increasing() {
    let mut prev = -1.0;
    for k in 0..=1000 {
        let p = 0.1 * k as f64 / 1000.0;
        let v = pfail_bound(p).unwrap().p_fail;
        assert!(v > prev, "p={p}");
        prev = v;
    }
}

#[test]
fn slope_at_zero() {
    let h = 1e-9;
    let slope = (pfail_bound(h).unwrap().p_fail - pfail_bound(0.0).unwrap().p_fail) / h;
    assert!((slope - 32.0 / 63.0).abs() < 1e-6, "{slope}");
}

#[test]
fn below_the_critical_point_encoding_helps() {
    let r = p_crit().unwrap();
    let grid = (1..200).map(|k| r.value * k as f64 / 200.0);
    for p in grid {
        assert!(pfail_bound(p).unwrap().p_fail < p, "p={p}");
    }
    assert!(r.hi - r.lo <= 1e-6);
    assert!(pfail_bound(r.lo).unwrap().p_fail < r.lo);
    assert!(pfail_bound(r.hi).unwrap().p_fail >= r.hi);
}

#[test]
fn simulation_stays_under_the_bound() {
    let p = 0.02;
    let s = mc(p, 1, 1_000_000, false);
    let bound = pfail_bound(p).unwrap().p_fail;
    assert!(s.p_hat <= bound + 3.0 * s.sigma(), "{} vs {bound}", s.p_hat);
    assert!(s.flips > 0);
}

#[test]
fn encoded_value_does_not_matter() {
    let zero = mc(0.02, 2, 200_000, false);
    let one = mc(0.02, 3, 200_000, true);
    let sigma = (zero.sigma().powi(2) + one.sigma().powi(2)).sqrt();
    assert!((zero.p_hat - one.p_hat).abs() <= 3.0 * sigma, "{zero:?} {one:?}");
}

#[test]
fn failures_grow_with_noise() {
    let ps = [0.005, 0.01, 0.02, 0.04];
    let runs: Vec<_> = ps.iter().map(|&p| mc(p, 4, 200_000, false)).collect();
    for w in runs.windows(2) {
        let sigma = (w[0].sigma().powi(2) + w[1].sigma().powi(2)).sqrt();
        assert!(w[1].p_hat >= w[0].p_hat - 3.0 * sigma, "{:?} {:?}", w[0], w[1]);
    }
}

#[test]
fn worker_count_does_not_change_counts() {
    let base = CascadeOptions {
        block: 1000,
        ..CascadeOptions::default()
    };
    let a = cascade_mc(0.03, 7, 10_500, &CascadeOptions { workers: 1, ..base }).unwrap();
    let b = cascade_mc(0.03, 7, 10_500, &CascadeOptions { workers: 4, ..base }).unwrap();
    assert_eq!(a, b);
}
