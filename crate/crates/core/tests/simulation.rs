use reqweaken::sim::*;

fn organ(i: usize) -> ScenarioConfig {
    generate_scenarios(CaseStudy::OrganDelivery, i + 1, 2024).pop().unwrap()
}

fn surveillance(i: usize) -> ScenarioConfig {
    generate_scenarios(CaseStudy::Surveillance, i + 1, 2024).pop().unwrap()
}

fn col(trace: &Trace, name: &str) -> Vec<f64> {
    trace.signal.column(name).unwrap()
}

#[test]
fn ample_battery_never_interacts() {
    let cfg = ScenarioConfig::parse("case = organ_delivery\nroute_length = 400\ndelivery_time = 60\nbattery = 95\n").unwrap();
    let (trace, m) = run_scenario(&cfg).unwrap();
    assert_eq!(m.ending, Ending::Arrived);
    assert!(!m.interaction());
    assert!(m.features.is_empty() && m.overall.is_none());
    assert!(trace.active.iter().all(|a| !a[0]));
}

#[test]
fn distant_chaser_never_interacts() {
    let text = "case = surveillance\nego = 100 100\nchaser = 190 190\npursuit_steps = 0\nwaypoints = 100 60; 60 60\n";
    let (_, m) = run_scenario(&ScenarioConfig::parse(text).unwrap()).unwrap();
    assert_eq!(m.ending, Ending::PatrolComplete);
    assert!(m.window.is_none());
}

#[test]
fn landing_first_violates_delivery() {
    let base = organ(1);
    let land_first = base.with_mode("priority(land>deliver)".parse().unwrap());
    let (_, m) = run_scenario(&land_first).unwrap();
    assert_eq!(m.ending, Ending::Landed);
    let deliver = m.features.iter().find(|f| f.feature == "deliver").unwrap();
    assert!(deliver.average < 0.0, "{}", deliver.average);

    let (_, w) = run_scenario(&base).unwrap();
    assert!(w.overall.unwrap() >= m.overall.unwrap());
}

#[test]
fn runs_are_deterministic() {
    for cfg in [organ(4), surveillance(0)] {
        let (t1, m1) = run_scenario(&cfg).unwrap();
        let (t2, m2) = run_scenario(&cfg).unwrap();
        assert_eq!(t1, t2);
        assert_eq!((m1.window, &m1.features, m1.overall), (m2.window, &m2.features, m2.overall));
    }
}

#[test]
fn overall_is_mean_of_normalized_values() {
    let cfg = surveillance(1);
    let (_, m) = run_scenario(&cfg).unwrap();
    let specs = scenario_features(&cfg);
    let mut sum = 0.0;
    for (f, s) in m.features.iter().zip(&specs) {
        let avg = f.series.iter().sum::<f64>() / f.series.len() as f64;
        assert!((f.average - avg).abs() < 1e-12);
        assert!((f.normalized_average - avg / normalization(s, &cfg)).abs() < 1e-12);
        sum += f.normalized_average;
    }
    assert!((m.overall.unwrap() - sum / 2.0).abs() < 1e-12);
    assert_eq!(normalization(&specs[0], &cfg), 8.0);
    assert_eq!(normalization(&specs[1], &cfg), 18.0);
}

#[test]
fn window_matches_activation_flags() {
    let (trace, m) = run_scenario(&surveillance(2)).unwrap();
    let (start, end) = m.window.unwrap();
    assert!(trace.active[..start].iter().all(|a| !(a[0] && a[1])));
    assert!(trace.active[start][0] && trace.active[start][1]);
    assert!(trace.active[start..end].iter().all(|a| a[0] || a[1]));
    if end < trace.active.len() {
        assert_eq!(trace.active[end], [false, false]);
    }
    assert!(m.features.iter().all(|f| f.series.len() == end - start));
}

#[test]
fn priority_executes_top_ranked_feature() {
    for cfg in [organ(1).with_mode("priority(land>deliver)".parse().unwrap()), surveillance(2).with_mode("priority(boundary>runaway)".parse().unwrap())] {
        let Mode::Priority { ordering } = cfg.mode.clone() else { unreachable!() };
        let (trace, _) = run_scenario(&cfg).unwrap();
        let mut conflicts = 0;
        for (t, req) in trace.requested.iter().enumerate() {
            if !(req[0].active && req[1].active) {
                continue;
            }
            conflicts += 1;
            let top = ordering.iter().find_map(|id| req.iter().find(|r| &r.feature == id)).unwrap();
            assert_eq!(Some(&trace.executed[t]), top.command.as_ref(), "step {t}");
        }
        assert!(conflicts > 0);
    }
}

#[test]
fn battery_never_increases_and_speed_is_bounded() {
    for mode in CaseStudy::OrganDelivery.modes() {
        let cfg = organ(5).with_mode(mode);
        let (trace, _) = run_scenario(&cfg).unwrap();
        let battery = col(&trace, "battery");
        assert!(battery.windows(2).all(|w| w[1] <= w[0]));
        assert!(col(&trace, "curr_speed").iter().all(|&v| (0.0..=cfg.max_speed + 1e-9).contains(&v)));
    }
    let cfg = surveillance(0);
    let (trace, _) = run_scenario(&cfg).unwrap();
    let (x, y) = (col(&trace, "x"), col(&trace, "y"));
    for t in 1..x.len() {
        assert!((x[t] - x[t - 1]).hypot(y[t] - y[t - 1]) <= cfg.max_speed + 1e-6, "step {t}");
    }
}

#[test]
fn weakened_plans_replay_within_their_requirements() {
    for cfg in [organ(8), surveillance(4)] {
        let (trace, m) = run_scenario(&cfg).unwrap();
        assert!(m.solver.weakened > 0);
        assert_eq!(m.solver.closure_failures, 0);
        assert!(m.solver.closure_min.unwrap() >= -1e-6);
        assert!(trace.decisions.iter().any(|d| *d == Decision::Weakened));
    }
}

#[test]
fn trace_csv_has_a_row_per_sample() {
    let (trace, _) = run_scenario(&organ(1)).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,distance_to_dest,battery,is_landing,curr_speed,remaining_delivery_time,required_speed,active_land,active_deliver,decision"
    );
    assert_eq!(lines.count(), trace.signal.len());
}

#[test]
fn experiment_rows_are_ordered_and_reproducible() {
    let opts = ExperimentOptions { cases: vec![CaseStudy::OrganDelivery], count: 3, seed: 7, workers: Some(3), modes: None };
    let a = run_experiment(&opts).unwrap();
    let b = run_experiment(&ExperimentOptions { workers: Some(1), ..opts.clone() }).unwrap();
    assert_eq!(a.rows.len(), 12);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_results(&mut ca).unwrap();
    b.write_results(&mut cb).unwrap();
    assert_eq!(ca, cb);
    let order: Vec<(usize, String)> = a.rows.iter().map(|r| (r.scenario, r.mode.clone())).collect();
    let modes: Vec<String> = CaseStudy::OrganDelivery.modes().iter().map(|m| m.to_string()).collect();
    let want: Vec<(usize, String)> = (0..3).flat_map(|i| modes.iter().map(move |m| (i, m.clone()))).collect();
    assert_eq!(order, want);
    assert_eq!(a.summaries.len(), 4);
}
