use chiplet_dse::esd::{
    min_diode_area, peak_gate_voltage, published_bench, sizing_table, SizingOptions, DEFAULT_V_BD,
};

#[test]
fn gate_peak_never_rises_with_area() {
    for generation in [0, 3, 5] {
        let b = published_bench(generation, 125.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=16 {
            let area = 0.5 * 2f64.powf(k as f64 * 0.75);
            let peak = peak_gate_voltage(&b.with_area(area)).unwrap();
            assert!(peak <= prev * (1.0 + 1e-9), "gen {generation} area {area}: {peak} > {prev}");
            prev = peak;
        }
    }
}

#[test]
fn required_area_grows_with_target() {
    let benches: Vec<_> = [1, 4]
        .into_iter()
        .map(|g| (g, published_bench(g, 0.0).unwrap()))
        .collect();
    let cells = sizing_table(&benches, &[5.0, 20.0, 80.0], &SizingOptions::default()).unwrap();
    for g in [1, 4] {
        let col: Vec<f64> = cells.iter().filter(|c| c.generation == g).map(|c| c.area).collect();
        assert!(col.windows(2).all(|w| w[0] <= w[1]), "{col:?}");
    }
    // target-major ordering independent of scheduling
    let order: Vec<(usize, f64)> = cells.iter().map(|c| (c.generation, c.target_v)).collect();
    assert_eq!(order, vec![(1, 5.0), (4, 5.0), (1, 20.0), (4, 20.0), (1, 80.0), (4, 80.0)]);
}

#[test]
fn trace_records_every_evaluation() {
    let b = published_bench(2, 50.0).unwrap();
    let r = min_diode_area(&b, &SizingOptions::default()).unwrap();
    assert_eq!(r.trace[0].0, 0.0);
    assert!(r.trace[0].1 >= DEFAULT_V_BD);
    assert!(r.trace.iter().any(|&(a, p)| a == r.area && p == r.peak));
}
