use chiplet_dse::dsl::{
    build_dsl_circuit, eye_metrics, simulate_bench, simulate_eye, AggressorMode, DslConfig,
    EyeDiagram, EyeMetrics, MASK_BAND,
};
use chiplet_dse::extraction::{extract_channel, ChannelParasitics, ExtractionParams};
use chiplet_dse::mna::ElementKind;
use chiplet_dse::techlib::{builtin_generation, InterfaceKind};
use proptest::prelude::*;

fn micro_bump(gen: usize, length: Option<f64>) -> (ChannelParasitics, f64) {
    let g = builtin_generation(InterfaceKind::MicroBump, gen).unwrap();
    let p = extract_channel(&g, &ExtractionParams::default(), length).unwrap();
    (p, length.unwrap_or(g.wire.length))
}

#[test]
fn element_count_matches_construction_rule() {
    let (par, len) = micro_bump(3, None);
    for channels in [1, 3, 5] {
        let cfg = DslConfig {
            channels,
            ..DslConfig::default()
        };
        let n = cfg.segments_for(len);
        let (c, _) = build_dsl_circuit(&par, len, &cfg).unwrap();
        let driver = 2; // source + R_drv
        let pads = 4; // R and C at each end
        let ladder = 2 * n + (n + 1); // series R/L per cell, n+1 shunt nodes
        let receiver = 1;
        let expected = channels * (driver + pads + ladder + receiver) + (channels - 1) * n;
        assert_eq!(c.elements.len(), expected, "{channels} channels");
        let count = |f: fn(&ElementKind) -> bool| c.elements.iter().filter(|e| f(&e.kind)).count();
        assert_eq!(count(|k| matches!(k, ElementKind::Inductor { .. })), channels * n);
        assert_eq!(count(|k| matches!(k, ElementKind::VoltageSource { .. })), channels);
    }
}

#[test]
fn ideal_channel_gives_open_eye() {
    let cfg = DslConfig {
        t_transition: 5e-12,
        ..DslConfig::default()
    };
    let m = eye_metrics(&simulate_eye(&ChannelParasitics::ZERO, 0.0, &cfg).unwrap()).unwrap();
    assert!((m.height - cfg.vdd).abs() < 1e-6 * cfg.vdd, "{m:?}");
    assert!(m.width >= 0.98 * cfg.ui(), "{m:?}");
    assert!(m.jitter < 1e-15, "{m:?}");
}

#[test]
fn zero_length_tracks_driver_rc() {
    let (par, _) = micro_bump(5, Some(0.0));
    assert_eq!((par.r_pkg, par.l_pkg, par.c_pkg), (0.0, 0.0, 0.0));
    let cfg = DslConfig::default();
    let (w, nodes) = simulate_bench(&par, 0.0, &cfg).unwrap();
    let v = w.voltage(&nodes.victim_rx).unwrap();
    // Only the driver RC remains: settled to a rail by mid-bit.
    let tau = cfg.r_drv * (2.0 * par.c_pad + cfg.c_rx);
    let spu = cfg.steps_per_ui;
    let settle = spu / 2;
    assert!(cfg.t_transition + 20.0 * tau < settle as f64 * w.dt);
    for j in cfg.warmup_bits..cfg.bits - 1 {
        let x = v[j * spu + settle];
        assert!(x.abs() < 1e-6 || (x - cfg.vdd).abs() < 1e-6, "bit {j}: {x}");
    }
}

#[test]
fn victim_ignores_aggressors_without_coupling() {
    let (par, len) = micro_bump(4, None);
    let par = ChannelParasitics {
        c_couple: 0.0,
        ..par
    };
    let run = |seeds: Vec<u8>| {
        let cfg = DslConfig {
            aggressor_mode: AggressorMode::Random,
            aggressor_seeds: seeds,
            bits: 64,
            ..DslConfig::default()
        };
        let (w, n) = simulate_bench(&par, len, &cfg).unwrap();
        w.voltage(&n.victim_rx).unwrap().into_owned()
    };
    let a = run(vec![0x11, 0x22]);
    let b = run(vec![0x6c, 0x03]);
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn coupling_costs_eye_height() {
    let (par, len) = micro_bump(0, None);
    let cfg = DslConfig {
        bits: 96,
        ..DslConfig::default()
    };
    let coupled = eye_metrics(&simulate_eye(&par, len, &cfg).unwrap()).unwrap();
    let isolated = ChannelParasitics {
        c_couple: 0.0,
        ..par
    };
    let clean = eye_metrics(&simulate_eye(&isolated, len, &cfg).unwrap()).unwrap();
    assert!(coupled.height < clean.height, "{coupled:?} vs {clean:?}");
}

/// Direct scan over every sample for the three metrics.
fn brute_force(eye: &EyeDiagram) -> EyeMetrics {
    let spu = eye.samples_per_ui();
    let band = MASK_BAND * eye.vdd;
    let len = 2 * spu + 1;
    let open: Vec<bool> = (0..len)
        .map(|i| {
            eye.traces.iter().zip(&eye.levels).all(|(t, &b)| {
                if b {
                    t[i] > eye.threshold + band
                } else {
                    t[i] < eye.threshold - band
                }
            })
        })
        .collect();
    let c = spu;
    let ones: Vec<f64> = eye.traces.iter().zip(&eye.levels).filter(|p| *p.1).map(|p| p.0[c]).collect();
    let zeros: Vec<f64> = eye.traces.iter().zip(&eye.levels).filter(|p| !*p.1).map(|p| p.0[c]).collect();
    let height = (ones.iter().cloned().fold(f64::INFINITY, f64::min)
        - zeros.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    .clamp(0.0, eye.vdd);
    let mut width = 0.0;
    for l in 0..=c {
        for r in c..len {
            if (l..=r).all(|i| open[i]) {
                width = f64::max(width, (r - l) as f64 * eye.dt);
            }
        }
    }
    let mut xs = Vec::new();
    for t in &eye.traces {
        for i in 1..=spu {
            let (a, b) = (t[i - 1] - eye.threshold, t[i] - eye.threshold);
            if (a < 0.0) != (b < 0.0) {
                xs.push(((i - 1) as f64 + a / (a - b)) * eye.dt);
            }
        }
    }
    let jitter = if xs.is_empty() {
        0.0
    } else {
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    EyeMetrics {
        height,
        width: width.min(eye.ui),
        jitter,
    }
}

fn synthetic_eye() -> impl Strategy<Value = EyeDiagram> {
    let spu = 16usize;
    (8usize..14).prop_flat_map(move |n| {
        (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(prop::collection::vec(-0.2f64..1.1, 2 * spu + 1), n),
        )
            .prop_filter("both levels", |(lv, _)| lv.iter().any(|b| *b) && lv.iter().any(|b| !*b))
            .prop_map(move |(levels, mut traces)| {
                // push traces towards their rail so some eyes are open
                for (t, &b) in traces.iter_mut().zip(&levels) {
                    for x in t.iter_mut() {
                        *x = if b { 0.55 + 0.3 * *x } else { 0.35 - 0.3 * *x };
                    }
                }
                EyeDiagram {
                    ui: 1e-9,
                    dt: 1e-9 / spu as f64,
                    vdd: 0.9,
                    threshold: 0.45,
                    traces,
                    levels,
                }
            })
    })
}

proptest! {
    #[test]
    fn metrics_match_exhaustive_scan(eye in synthetic_eye()) {
        let fast = eye_metrics(&eye).unwrap();
        let slow = brute_force(&eye);
        prop_assert!((fast.height - slow.height).abs() < 1e-15);
        prop_assert!((fast.width - slow.width).abs() < 1e-18, "{} vs {}", fast.width, slow.width);
        prop_assert!((fast.jitter - slow.jitter).abs() < 1e-18);
        prop_assert!(fast.height >= 0.0 && fast.height <= eye.vdd);
        prop_assert!(fast.width >= 0.0 && fast.width <= eye.ui);
    }
}
