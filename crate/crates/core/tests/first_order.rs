use matterwave_chaos::melnikov;
use matterwave_chaos::params::{DimensionlessParams, LatticeConfig, WaveRatio};
use matterwave_chaos::soliton::{self, FirstOrder, FirstOrderOptions, SolitonConfig};
use std::f64::consts::PI;

fn config(v1: f64, v2: f64, c0: f64) -> SolitonConfig {
    SolitonConfig::new(
        DimensionlessParams::new(-2.0, -0.5).unwrap(),
        LatticeConfig::new(v1, v2, 1.0, WaveRatio::integer(2).unwrap(), 0.0).unwrap(),
        c0,
        0.0,
    )
    .unwrap()
}

#[test]
fn wronskian_is_unity() {
    let cfg = config(0.0, 0.0, 0.37);
    let step = 1e-4;
    for i in 0..=30 {
        let xi = -8.0 + 0.5 * f64::from(i);
        let dh = (soliton::h(xi + step, &cfg) - soliton::h(xi - step, &cfg)) / (2.0 * step);
        let df = (soliton::f(xi + step, &cfg) - soliton::f(xi - step, &cfg)) / (2.0 * step);
        let w = soliton::f(xi, &cfg) * dh - df * soliton::h(xi, &cfg);
        assert!((w - 1.0).abs() < 1e-6, "xi={xi} w={w}");
    }
}

#[test]
fn h_solves_homogeneous_equation() {
    let cfg = config(0.0, 0.0, -0.2);
    let step = 1e-3;
    for i in 0..=24 {
        let xi = -6.0 + 0.5 * f64::from(i);
        let hv = |x| soliton::h(x, &cfg);
        let second = (-hv(xi - 2.0 * step) + 16.0 * hv(xi - step) - 30.0 * hv(xi)
            + 16.0 * hv(xi + step)
            - hv(xi + 2.0 * step))
            / (12.0 * step * step);
        let r0 = soliton::r0(xi, &cfg);
        let res = second - 2.0 * hv(xi) + 1.5 * r0 * r0 * hv(xi);
        assert!(res.abs() < 1e-7 * (1.0 + hv(xi).abs()), "xi={xi} res={res}");
    }
}

#[test]
fn bounded_only_at_melnikov_zero() {
    // single lattice: zeros at c0 = 0 and pi/2 within one period
    let opts = FirstOrderOptions::default();
    let zero = FirstOrder::new(&config(0.04, 0.0, PI / 2.0), &opts).unwrap();
    let off = FirstOrder::new(&config(0.04, 0.0, PI / 8.0), &opts).unwrap();
    assert!(zero.bounded);
    assert!(!off.bounded);

    let peak = -PI / 2.0;
    for dx in [20.0, 40.0, 80.0] {
        for side in [-1.0, 1.0] {
            let v = zero.r1(peak + side * dx).unwrap();
            assert!(v.abs() < 1e-3, "dx={dx} side={side} R1={v}");
        }
    }
    let peak = -PI / 8.0;
    let grow: Vec<f64> = [20.0, 40.0, 80.0]
        .iter()
        .map(|dx| off.r1(peak + dx).unwrap().abs())
        .collect();
    assert!(
        grow[1] > 1e6 * grow[0] && grow[2] > 1e6 * grow[1],
        "{grow:?}"
    );
    // the left flank stays bounded either way
    assert!(off.r1(peak - 80.0).unwrap().abs() < 1e-3);
}

#[test]
fn i_plus_matches_melnikov() {
    let cfg = config(0.04, 0.08, 0.3);
    let first = FirstOrder::new(&cfg, &FirstOrderOptions::default()).unwrap();
    let m = melnikov::melnikov(0.3, &cfg.params, &cfg.lattice).unwrap();
    assert!((first.i_plus - m).abs() < 1e-12);
}

#[test]
fn residual_is_second_order_in_drive() {
    let d = DimensionlessParams::new(-2.0, -0.5).unwrap();
    let strong = LatticeConfig::new(0.04, 0.08, 1.0, WaveRatio::integer(2).unwrap(), 0.0).unwrap();
    let zeros =
        melnikov::count_zeros_per_period(&d, &strong, melnikov::DEFAULT_RESOLUTION, None).unwrap();
    let c0 = zeros.zeros[1].c0;
    let residual = |scale: f64| {
        let l = LatticeConfig::new(
            0.04 * scale,
            0.08 * scale,
            1.0,
            WaveRatio::integer(2).unwrap(),
            0.0,
        )
        .unwrap();
        let cfg = SolitonConfig::new(d, l, c0, 0.0).unwrap();
        let first = FirstOrder::new(&cfg, &FirstOrderOptions::default()).unwrap();
        assert!(first.bounded);
        (0..=40)
            .map(|i| {
                soliton::equation_residual(-c0 - 10.0 + 0.5 * f64::from(i), &first, 1e-2)
                    .unwrap()
                    .abs()
            })
            .fold(0.0, f64::max)
    };
    let (full, half) = (residual(1.0), residual(0.5));
    eprintln!("full={full:e} half={half:e} ratio={}", half / full);
    assert!(half / full < 0.3);
}

#[test]
fn analytic_wronskian() {
    let cfg = config(0.0, 0.0, 0.37);
    for i in 0..=60 {
        let xi = -15.0 + 0.5 * f64::from(i);
        let w = soliton::wronskian(xi, &cfg);
        assert!((w - 1.0).abs() < 1e-8, "xi={xi} w={w}");
    }
}
