//! End-to-end detector scenarios on small hand-built streams.
//!
//! All streams are 1-D with W=5, k=2, the default sigmoid (α=β=2), λ_c=0.5
//! and the 0.9 block-quantile θ unless stated otherwise: landmark capacity is
//! ceil(2.5*5)=13 and the expansion plan is 5 -> 8 -> 11 -> 13.

use lookout_core::{
    CandidateStatus, DataVector, DecisionStatus, Detector, Mode, ThetaPolicy, TrendVerdict,
    WindowConfig,
};

fn stream(values: &[f64]) -> Vec<DataVector> {
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| DataVector::new(i as u64 + 1, vec![x]))
        .collect()
}

fn run(detector: &mut Detector, values: &[f64]) -> Vec<lookout_core::Decision> {
    let mut out = Vec::new();
    for v in stream(values) {
        out.extend(detector.observe(v).unwrap());
    }
    out
}

/// A gross outlier with no support anywhere in the landmark is confirmed at
/// landmark exhaustion, 13 arrivals after the episode block started.
#[test]
fn isolated_outlier_is_confirmed_by_episode_end() {
    let mut det = Detector::new(WindowConfig::new(5, 2)).unwrap();
    let values = [
        0.0, 0.1, 50.0, 0.05, 0.15, // block 1: candidate at t=3
        0.12, 0.08, 0.11, 0.14, 0.06, // block 2, all quiet
        0.09, 0.13, 0.07, // landmark fills to 13
    ];
    let decisions = run(&mut det, &values);
    assert_eq!(decisions.len(), 1);
    let d = &decisions[0];
    assert_eq!(d.t, 3);
    assert_eq!(d.status, DecisionStatus::ConfirmedOutlier);
    assert_eq!(d.resolved_at, 13);
    assert_eq!(d.trend, TrendVerdict::Neutral);
    assert!(d.d_final > 29.0, "distance never collapsed: {}", d.d_final);
    // episode is over: back to plain block processing
    assert_eq!(det.window().mode(), Mode::Sliding);
    assert!(det.pending().is_empty());
    assert_eq!(det.episode_theta(), None);
}

/// A point that looks isolated inside its block but is then followed by
/// enough near-duplicates is re-scored down and quietly returns to normal.
#[test]
fn soft_rescue_clears_the_candidate_early() {
    let mut det = Detector::new(WindowConfig::new(5, 2)).unwrap();
    let prefix = [0.0, 0.1, 0.05, 30.0, 0.15];
    let mut decisions = Vec::new();
    for v in stream(&prefix) {
        decisions.extend(det.observe(v).unwrap());
    }
    assert!(decisions.is_empty());
    assert_eq!(det.window().mode(), Mode::Landmark);
    assert_eq!(det.pending().len(), 1);
    assert_eq!(det.pending()[0].vector.t, 4);

    // near-duplicates of the candidate arrive; the first expansion step
    // (landmark size 8) sees them and resolves the candidate as normal
    for (i, x) in [30.2, 30.1, 29.9].iter().enumerate() {
        let got = det
            .observe(DataVector::new(6 + i as u64, vec![*x]))
            .unwrap();
        decisions.extend(got);
    }
    assert_eq!(decisions.len(), 1);
    assert_eq!(decisions[0].t, 4);
    assert_eq!(decisions[0].status, DecisionStatus::Normal);
    assert_eq!(decisions[0].resolved_at, 8);
    assert!(decisions[0].d_final < 1.0);
    // the episode emptied out early and the window left landmark mode
    assert_eq!(det.window().mode(), Mode::Sliding);
}

#[test]
fn quiet_stream_emits_nothing() {
    let mut det = Detector::new(WindowConfig::new(5, 2)).unwrap();
    let values: Vec<f64> = (0..20).map(|i| (i % 7) as f64 * 0.02).collect();
    let decisions = run(&mut det, &values);
    assert!(decisions.is_empty());
    assert_eq!(det.window().mode(), Mode::Sliding);
    assert!(det.pending().is_empty());
}

/// A second block completing inside a running episode contributes its
/// candidates to that episode instead of opening a new one; both resolve by
/// the shared exhaustion point.
#[test]
fn mid_episode_candidates_join_the_running_episode() {
    let mut det = Detector::new(WindowConfig::new(5, 2)).unwrap();
    let values = [
        0.0, 60.0, 0.1, 0.05, 0.15, // block 1: candidate at t=2
        0.12, -60.0, 0.08, 0.1, 0.14, // block 2: candidate at t=7 joins
        0.06, 0.11, 0.09, // landmark exhausts at 13
    ];
    let mut det2 = det.clone();
    let decisions = run(&mut det, &values);
    assert_eq!(decisions.len(), 2);
    let mut ts: Vec<u64> = decisions.iter().map(|d| d.t).collect();
    ts.sort_unstable();
    assert_eq!(ts, vec![2, 7]);
    for d in &decisions {
        assert_eq!(d.status, DecisionStatus::ConfirmedOutlier);
        assert_eq!(d.resolved_at, 13);
        // terminal within capacity observations of the flagging block start
        let block_start = (d.t - 1) / 5 * 5 + 1;
        assert!(d.resolved_at < block_start + 13);
    }
    assert_eq!(det.episode_theta(), None);

    // byte-for-byte determinism of the decision stream
    let again = run(&mut det2, &values);
    assert_eq!(again, decisions);
}

/// With an absolute θ the same streams confirm and rescue on the fixed
/// threshold instead of the block quantile.
#[test]
fn absolute_theta_policy_drives_resolution() {
    let mut cfg = WindowConfig::new(5, 2);
    cfg.theta = ThetaPolicy::Absolute(5.0);

    let mut det = Detector::new(cfg.clone()).unwrap();
    let confirm = [
        0.0, 0.1, 50.0, 0.05, 0.15, 0.12, 0.08, 0.11, 0.14, 0.06, 0.09, 0.13, 0.07,
    ];
    let decisions = run(&mut det, &confirm);
    assert_eq!(decisions.len(), 1);
    assert_eq!(decisions[0].status, DecisionStatus::ConfirmedOutlier);

    let mut det = Detector::new(cfg).unwrap();
    let rescue = [
        0.0, 0.1, 0.05, 30.0, 0.15, 30.2, 30.1, 29.9, 0.12, 0.08, 0.11, 0.14, 0.06,
    ];
    let decisions = run(&mut det, &rescue);
    assert!(decisions.iter().all(|d| d.status == DecisionStatus::Normal));
    assert!(decisions.iter().any(|d| d.t == 4));
}

/// When the stream dries up mid-episode, unresolved candidates simply stay
/// pending; nothing is fabricated.
#[test]
fn stream_end_leaves_unresolved_candidates_pending() {
    let mut det = Detector::new(WindowConfig::new(5, 2)).unwrap();
    let values = [0.0, 0.1, 40.0, 0.05, 0.15, 0.12, 0.08];
    let decisions = run(&mut det, &values);
    assert!(decisions.is_empty());
    assert_eq!(det.pending().len(), 1);
    assert_eq!(det.pending()[0].vector.t, 3);
    assert_eq!(det.pending()[0].status, CandidateStatus::Candidate);
    assert_eq!(det.window().mode(), Mode::Landmark);
}

/// An episode that clears early frees the detector to open a fresh episode
/// for the next suspicious block, each with its own θ.
#[test]
fn early_exit_allows_a_second_episode() {
    let mut det = Detector::new(WindowConfig::new(5, 2)).unwrap();
    let values = [
        0.0, 0.1, 0.05, 30.0, 0.15, // block 1: candidate at t=4
        30.2, 30.1, 29.9, // rescue at landmark size 8, episode 1 exits
        0.12, 0.1, // block 2 flags t=9,10 (minority inside the dupe cluster)
        0.11, 0.14, 0.06, 0.09, -45.0, // episode 2 clears at t=13; block 3 flags t=15
        0.13, 0.07, 0.12, 0.1, 0.08, 0.09, 0.11, 0.1, 0.13, 0.06, 0.08, 0.12, 0.07,
    ];
    let mut all = Vec::new();
    let mut saw_second_episode = false;
    for v in stream(&values) {
        let t = v.t;
        all.extend(det.observe(v).unwrap());
        if t == 15 {
            saw_second_episode = det.window().mode() == Mode::Landmark
                && det.window().landmark().first().is_some_and(|f| f.t == 11);
        }
    }
    assert!(saw_second_episode, "block 3 should have opened an episode");
    let normal: Vec<u64> = all
        .iter()
        .filter(|d| d.status == DecisionStatus::Normal)
        .map(|d| d.t)
        .collect();
    let confirmed: Vec<u64> = all
        .iter()
        .filter(|d| d.status == DecisionStatus::ConfirmedOutlier)
        .map(|d| d.t)
        .collect();
    assert!(normal.contains(&4), "t=4 rescued, got normals {normal:?}");
    assert_eq!(confirmed, vec![15], "t=15 stays isolated");
}

/// The same observation can only be decided once; decisions never duplicate
/// and never reference unseen arrivals.
#[test]
fn decisions_are_unique_and_well_formed() {
    let mut det = Detector::new(WindowConfig::new(5, 2)).unwrap();
    let mut values = Vec::new();
    // three bursts of outliers over a jittered baseline
    for i in 0..60 {
        let base = (i % 9) as f64 * 0.03;
        values.push(match i {
            7 => 25.0,
            23 => -31.0,
            24 => 47.0,
            41 => 18.5,
            _ => base,
        });
    }
    let decisions = run(&mut det, &values);
    let mut seen = std::collections::HashSet::new();
    for d in &decisions {
        assert!(seen.insert(d.t), "duplicate decision for t={}", d.t);
        assert!(d.resolved_at >= d.t);
        assert!(d.resolved_at as usize <= values.len());
        let block_start = (d.t - 1) / 5 * 5 + 1;
        assert!(
            d.resolved_at < block_start + 13,
            "t={} resolved at {} breaches the latency bound",
            d.t,
            d.resolved_at
        );
    }
}
