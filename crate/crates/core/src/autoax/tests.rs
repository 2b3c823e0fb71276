// SPDX-License-Identifier: Apache-2.0

use std::sync::OnceLock;

use proptest::prelude::*;

use super::*;
use crate::circuit::{build_exact_adder, build_exact_multiplier, Netlist};
use crate::cost::FpgaCost;
use crate::error::Error;
use crate::explorer::Target;
use crate::pareto::{pareto_front, Point};

fn small_palette() -> &'static Palette {
    static P: OnceLock<Palette> = OnceLock::new();
    P.get_or_init(|| {
        build_palette(&PaletteOptions {
            mult_size: 4,
            add_size: 3,
            library_size: 40,
            error_samples: 4096,
            seed: 1,
            ..Default::default()
        })
        .unwrap()
    })
}

fn default_palette() -> &'static Palette {
    static P: OnceLock<Palette> = OnceLock::new();
    P.get_or_init(|| build_palette(&PaletteOptions::default()).unwrap())
}

fn images(n: u64, side: usize) -> Vec<GrayImage> {
    (0..n).map(|s| synthetic_image(side, side, 50 + s).unwrap()).collect()
}

fn exact_component(n: &Netlist, id: &str, luts: u64) -> Component {
    let mut netlist = n.clone();
    netlist.set_name(id);
    Component {
        id: id.into(),
        netlist,
        cost: FpgaCost {
            luts,
            latency_ns: 1.0,
            power_mw: luts as f64 / 10.0,
        },
        med_norm_pct: 0.0,
    }
}

/// Single-component palettes holding the exact circuits.
fn unit_palette() -> Palette {
    let m = build_exact_multiplier(8).unwrap();
    let a = build_exact_adder(16).unwrap();
    Palette::new(vec![exact_component(&m, "m", 200)], vec![exact_component(&a, "a", 20)]).unwrap()
}

/// Direct 3×3 convolution over an explicitly edge-padded copy of the image.
fn padded_convolution(img: &GrayImage, kernel: &Kernel, shift: u32) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let (pw, ph) = (w + 2, h + 2);
    let mut padded = vec![0u32; pw * ph];
    for py in 0..ph {
        for px in 0..pw {
            let sx = px.saturating_sub(1).min(w - 1);
            let sy = py.saturating_sub(1).min(h - 1);
            padded[py * pw + px] = img.get(sx, sy) as u32;
        }
    }
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0u32;
            for ky in 0..3 {
                for kx in 0..3 {
                    acc += kernel[ky][kx] * padded[(y + ky) * pw + x + kx];
                }
            }
            out.push((acc >> shift).min(255) as u8);
        }
    }
    out
}

/// Per-window SSIM with two-pass statistics, averaged.
fn scalar_ssim(a: &GrayImage, b: &GrayImage) -> f64 {
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let mut sum = 0.0;
    let mut count = 0.0;
    for y in 0..=a.height() - 8 {
        for x in 0..=a.width() - 8 {
            let win = |img: &GrayImage| -> Vec<f64> { (0..64).map(|i| img.get(x + i % 8, y + i / 8) as f64).collect() };
            let (u, v) = (win(a), win(b));
            let mu = u.iter().sum::<f64>() / 64.0;
            let mv = v.iter().sum::<f64>() / 64.0;
            let su = u.iter().map(|p| (p - mu) * (p - mu)).sum::<f64>() / 64.0;
            let sv = v.iter().map(|p| (p - mv) * (p - mv)).sum::<f64>() / 64.0;
            let cov = u.iter().zip(&v).map(|(p, q)| (p - mu) * (q - mv)).sum::<f64>() / 64.0;
            sum += (2.0 * mu * mv + c1) * (2.0 * cov + c2) / ((mu * mu + mv * mv + c1) * (su + sv + c2));
            count += 1.0;
        }
    }
    sum / count
}

fn estimators_for(palette: &Palette, samples: usize, seed: u64) -> Estimators {
    let t = AcceleratorTemplate::default();
    let ev = Evaluator::new(&t, palette, images(1, 16)).unwrap();
    let evaluated = ev.evaluate_all(&sample_random(samples, &t, palette, seed)).unwrap();
    fit_estimators(&evaluated, &t, palette, &Target::ALL, &EstimatorOptions::default()).unwrap()
}

fn non_dominated(entries: &[ArchiveEntry]) -> bool {
    entries.iter().all(|a| {
        !entries.iter().any(|b| {
            b.objectives[0] <= a.objectives[0] && b.objectives[1] <= a.objectives[1] && b.objectives != a.objectives
        })
    })
}

#[test]
fn default_palettes_and_design_space() {
    let p = default_palette();
    assert_eq!(p.mult().len(), 9);
    assert_eq!(p.add().len(), 8);
    assert_eq!(p.design_space_size(), 9f64.powi(9) * 8f64.powi(8));
    assert_eq!(p.mult()[0].id, "mul8_exact");
    assert_eq!(p.add()[0].id, "add16_exact");
}

#[test]
fn identity_kernel_passes_images_through() {
    let t = build_template([[0, 0, 0], [0, 1, 0], [0, 0, 0]]).unwrap();
    let p = small_palette();
    let imgs = images(2, 12);
    let ev = Evaluator::new(&t, p, imgs.clone()).unwrap();
    for img in &imgs {
        assert_eq!(&ev.filter(&Configuration::exact(&t), img).unwrap(), img);
    }
}

#[test]
fn exact_filter_matches_direct_convolution() {
    let p = small_palette();
    for kernel in [
        GAUSSIAN_KERNEL,
        [[0, 0, 0], [1, 2, 1], [0, 0, 0]],
        [[3, 0, 1], [0, 8, 0], [1, 0, 3]],
    ] {
        let t = build_template(kernel).unwrap();
        let imgs = images(3, 11);
        let ev = Evaluator::new(&t, p, imgs.clone()).unwrap();
        for img in &imgs {
            let out = ev.filter(&Configuration::exact(&t), img).unwrap();
            assert_eq!(out.pixels(), padded_convolution(img, &kernel, t.shift).as_slice());
        }
    }
}

#[test]
fn exact_configuration_scores_one() {
    let t = AcceleratorTemplate::default();
    let ev = Evaluator::new(&t, default_palette(), images(2, 20)).unwrap();
    let e = ev.evaluate(&Configuration::exact(&t)).unwrap();
    assert_eq!(e.ssim, 1.0);
}

#[test]
fn equivalent_component_scores_one() {
    let m = build_exact_multiplier(8).unwrap();
    let a = build_exact_adder(16).unwrap();
    let p = Palette::new(
        vec![exact_component(&m, "m", 200), exact_component(&m, "m_copy", 150)],
        vec![exact_component(&a, "a", 20), exact_component(&a, "a_copy", 10)],
    )
    .unwrap();
    let t = AcceleratorTemplate::default();
    let ev = Evaluator::new(&t, &p, images(1, 16)).unwrap();
    let e = ev.evaluate(&Configuration(vec![1; 17])).unwrap();
    assert_eq!(e.ssim, 1.0);
    assert_eq!(e.cost.luts, 9 * 150 + 8 * 10);
}

#[test]
fn approximate_ssim_matches_scalar_oracle() {
    let t = AcceleratorTemplate::default();
    let p = default_palette();
    let imgs = images(2, 14);
    let ev = Evaluator::new(&t, p, imgs.clone()).unwrap();
    for c in sample_random(10, &t, p, 9) {
        let e = ev.evaluate(&c).unwrap();
        let oracle: f64 = imgs
            .iter()
            .zip(ev.references())
            .map(|(img, r)| scalar_ssim(&ev.filter(&c, img).unwrap(), r))
            .sum::<f64>()
            / imgs.len() as f64;
        assert!((e.ssim - oracle).abs() < 1e-9, "{c}: {} vs {oracle}", e.ssim);
        assert!((-1.0..=1.0).contains(&e.ssim));
    }
}

#[test]
fn cost_aggregation_rules() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    for c in sample_random(20, &t, p, 3) {
        let cost = aggregate_cost(&c, &t, p).unwrap();
        let comp = |n: usize| &p.role(t.role(n))[c.0[n]].cost;
        assert_eq!(cost.luts, (0..17).map(|n| comp(n).luts).sum::<u64>());
        let power: f64 = (0..17).map(|n| comp(n).power_mw).sum();
        assert!((cost.power_mw - power).abs() < 1e-9);
        // Longest of the nine multiplier-to-root paths.
        let depth = |m: usize| -> f64 {
            let adders: &[usize] = match m {
                8 => &[16],
                _ => &[9 + m / 2, 13 + m / 4, 15, 16],
            };
            comp(m).latency_ns + adders.iter().map(|&a| comp(a).latency_ns).sum::<f64>()
        };
        let longest = (0..9).map(depth).fold(f64::MIN, f64::max);
        assert!((cost.latency_ns - longest).abs() < 1e-9);
    }
}

#[test]
fn invalid_configurations_and_images() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    let ev = Evaluator::new(&t, p, images(1, 10)).unwrap();
    assert!(matches!(
        ev.evaluate(&Configuration(vec![0; 16])),
        Err(Error::Dimension { .. })
    ));
    let mut bad = Configuration::exact(&t);
    bad.0[3] = p.mult().len();
    assert!(ev.evaluate(&bad).is_err());
    assert!(Evaluator::new(&t, p, vec![]).is_err());
    assert!(Evaluator::new(&t, p, vec![GrayImage::filled(7, 9, 1).unwrap()]).is_err());
    assert!("1-x-3".parse::<Configuration>().is_err());
}

#[test]
fn sampling_basics() {
    let t = AcceleratorTemplate::default();
    let unit = unit_palette();
    assert_eq!(sample_random(1, &t, &unit, 4), vec![Configuration::exact(&t)]);
    let p = small_palette();
    assert_eq!(sample_random(50, &t, p, 8), sample_random(50, &t, p, 8));
    assert_ne!(sample_random(50, &t, p, 8), sample_random(50, &t, p, 9));
    for c in sample_random(50, &t, p, 8) {
        c.validate(&t, p).unwrap();
    }
}

#[test]
fn sampling_is_uniform_per_node() {
    let t = AcceleratorTemplate::default();
    let p = default_palette();
    let n = 10_000;
    let configs = sample_random(n, &t, p, 12);
    let k = p.mult().len();
    let prob = 1.0 / k as f64;
    let mean = n as f64 * prob;
    let sigma = (n as f64 * prob * (1.0 - prob)).sqrt();
    for node in 0..9 {
        let mut counts = vec![0usize; k];
        for c in &configs {
            counts[c.0[node]] += 1;
        }
        for &cnt in &counts {
            assert!((cnt as f64 - mean).abs() <= 3.0 * sigma, "node {node}: {counts:?}");
        }
        // Chi-square with k − 1 = 8 degrees of freedom, far below its 0.1% tail (26.1).
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
        assert!(chi2 < 26.1, "node {node}: chi2 {chi2}");
    }
}

#[test]
fn feature_layout() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    let names = config_feature_names(&t);
    assert_eq!(names.len(), 68);
    assert_eq!(names[0], "n0_med_norm_pct");
    assert_eq!(names[67], "n16_latency_ns");
    let c = sample_random(1, &t, p, 2).remove(0);
    let f = config_features(&c, &t, p).unwrap();
    let comp = &p.add()[c.0[16]];
    assert_eq!(
        &f[64..],
        &[
            comp.med_norm_pct,
            comp.cost.luts as f64,
            comp.cost.power_mw,
            comp.cost.latency_ns
        ]
    );
}

#[test]
fn estimators_on_degenerate_data() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    let ev = Evaluator::new(&t, p, images(1, 12)).unwrap();
    // One configuration repeated: every target is constant.
    let one = ev.evaluate(&sample_random(1, &t, p, 5)[0]).unwrap();
    let same = vec![one.clone(); 25];
    let est = fit_estimators(&same, &t, p, &Target::ALL, &EstimatorOptions::default()).unwrap();
    let f = config_features(&one.config, &t, p).unwrap();
    assert!((est.ssim.predict(&f).unwrap() - one.ssim).abs() < 1e-12);
    let luts = est.costs[&Target::Luts].predict(&f).unwrap();
    assert!((luts - one.cost.luts as f64).abs() < 1e-9);
    assert_eq!(est.ssim.fidelity, Some(1.0));

    // Only exact-quality samples: SSIM is 1 wherever the estimator is asked.
    let unit = unit_palette();
    let ev = Evaluator::new(&t, &unit, images(1, 12)).unwrap();
    let exact = vec![ev.evaluate(&Configuration::exact(&t)).unwrap(); 20];
    let est = fit_estimators(&exact, &t, &unit, &[Target::Power], &EstimatorOptions::default()).unwrap();
    for c in sample_random(5, &t, p, 1) {
        let f = config_features(&c, &t, p).unwrap();
        assert!((est.ssim.predict(&f).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(fit_estimators(&exact[..19], &t, &unit, &[], &EstimatorOptions::default()).is_err());
}

#[test]
fn ssim_estimator_fidelity_on_held_out_samples() {
    // Components gentle enough that random mixes do not saturate the output;
    // see the notes on saturation ties for the wide default palette.
    let p = build_palette(&PaletteOptions {
        max_med_norm_pct: 0.25,
        ..Default::default()
    })
    .unwrap();
    let t = AcceleratorTemplate::default();
    let ev = Evaluator::new(&t, &p, images(4, 64)).unwrap();
    let evaluated = ev.evaluate_all(&sample_random(500, &t, &p, 1)).unwrap();
    let est = fit_estimators(&evaluated, &t, &p, &[], &EstimatorOptions::default()).unwrap();
    let fid = est.ssim.fidelity.unwrap();
    assert!(fid >= 0.7, "ssim fidelity {fid}");
}

#[test]
fn hill_climb_degenerate_cases() {
    let t = AcceleratorTemplate::default();
    let unit = unit_palette();
    let est = estimators_for(small_palette(), 30, 1);
    let archive = hill_climb(&est, Target::Luts, &t, &unit, 50, 3).unwrap();
    assert_eq!(archive.len(), 1);
    assert_eq!(archive[0].config, Configuration::exact(&t));

    // Budget 0: the non-dominated subset of the two starting points.
    let p = small_palette();
    let archive = hill_climb(&est, Target::Power, &t, p, 0, 7).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let start = super::eval::random_config(&mut rng, &t, p);
    let seeds: Vec<ArchiveEntry> = [start, Configuration::exact(&t)]
        .into_iter()
        .map(|c| {
            let f = config_features(&c, &t, p).unwrap();
            ArchiveEntry {
                objectives: est.objectives(Target::Power, &f).unwrap(),
                config: c,
            }
        })
        .collect();
    let expected: Vec<&ArchiveEntry> = seeds
        .iter()
        .filter(|a| {
            !seeds.iter().any(|b| {
                b.objectives[0] <= a.objectives[0] && b.objectives[1] <= a.objectives[1] && b.objectives != a.objectives
            })
        })
        .collect();
    assert_eq!(archive.iter().collect::<Vec<_>>(), expected);
}

#[test]
fn hill_climb_archive_is_always_non_dominated() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    let est = estimators_for(p, 40, 2);
    let mut steps = 0;
    let archive = hill_climb_observed(&est, Target::Latency, &t, p, 300, 5, |a| {
        steps += 1;
        assert!(non_dominated(a), "step {steps}");
        let mut configs: Vec<_> = a.iter().map(|e| &e.config).collect();
        configs.sort();
        configs.dedup();
        assert_eq!(configs.len(), a.len());
    })
    .unwrap();
    assert_eq!(steps, 301);
    assert_eq!(archive, hill_climb(&est, Target::Latency, &t, p, 300, 5).unwrap());
    // Stored objectives are the estimates.
    for e in &archive {
        let f = config_features(&e.config, &t, p).unwrap();
        assert_eq!(e.objectives, est.objectives(Target::Latency, &f).unwrap());
    }
}

#[test]
fn random_search_properties() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    let est = estimators_for(p, 40, 3);
    let one = random_search(&est, Target::Luts, &t, p, 1, 11).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].config, sample_random(1, &t, p, 11)[0]);
    let a = random_search(&est, Target::Power, &t, p, 200, 4).unwrap();
    assert!(non_dominated(&a));
    assert_eq!(a, random_search(&est, Target::Power, &t, p, 200, 4).unwrap());
}

#[test]
fn finalize_matches_brute_force_front() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    let est = estimators_for(p, 40, 4);
    let ev = Evaluator::new(&t, p, images(1, 16)).unwrap();
    let mut archive = hill_climb(&est, Target::Luts, &t, p, 200, 6).unwrap();
    if !archive.iter().any(|e| e.config == Configuration::exact(&t)) {
        archive.push(ArchiveEntry {
            config: Configuration::exact(&t),
            objectives: [0.0, 0.0],
        });
    }
    let fin = finalize(&archive, Target::Luts, &ev).unwrap();
    assert!(fin.front.len() <= archive.len());
    assert_eq!(fin.evaluated.len(), archive.len());
    let pts: Vec<Point> = fin.evaluated.iter().map(|e| exact_point(e, Target::Luts)).collect();
    let mut brute: Vec<&str> = pts
        .iter()
        .filter(|a| {
            !pts.iter().any(|b| {
                b.objectives.iter().zip(&a.objectives).all(|(x, y)| x <= y)
                    && b.objectives.iter().zip(&a.objectives).any(|(x, y)| x < y)
            })
        })
        .map(|p| p.id.as_str())
        .collect();
    let mut got: Vec<&str> = fin.front.ids().collect();
    brute.sort();
    got.sort();
    assert_eq!(got, brute);
    // Exact values only: the front agrees with a fresh evaluation.
    for e in fin.front_configs() {
        assert_eq!(e, &ev.evaluate(&e.config).unwrap());
    }
    // The all-exact member anchors the zero-loss end.
    assert_eq!(fin.front.points[0].objectives[0], 0.0);
    assert!(finalize(&[], Target::Luts, &ev).is_err());
}

#[test]
fn run_and_export_round_trip() {
    let t = AcceleratorTemplate::default();
    let p = small_palette();
    let ev = Evaluator::new(&t, p, images(2, 16)).unwrap();
    let cfg = AutoaxConfig {
        samples: 40,
        budget: 60,
        seed: 2,
        ..Default::default()
    };
    let r = run_autoax(&ev, &cfg).unwrap();
    assert_eq!(r.comparisons.len(), 3);
    assert_eq!(r.estimator_fidelity.len(), 4);
    for c in &r.comparisons {
        assert!(c.hill_climb_hypervolume >= 0.0 && c.random_hypervolume >= 0.0);
        assert_eq!(c.reference.len(), 2);
    }
    let again = run_autoax(&ev, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&r).unwrap(),
        serde_json::to_string(&again).unwrap()
    );

    let dir = tempfile::tempdir().unwrap();
    let files = export_autoax(&r, dir.path()).unwrap();
    let before: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
    export_autoax(&again, dir.path()).unwrap();
    for (f, b) in files.iter().zip(&before) {
        assert_eq!(&std::fs::read(f).unwrap(), b);
    }
    assert_eq!(load_autoax_report(dir.path()).unwrap(), r);
    let csv = std::fs::read_to_string(dir.path().join("front_fpga_luts_hill_climb.csv")).unwrap();
    assert!(csv.starts_with("config,ssim,fpga_luts,fpga_latency_ns,fpga_power_mw\n"));
    assert!(summarize_autoax(&r).contains("hc hv"));

    assert!(run_autoax(
        &ev,
        &AutoaxConfig {
            samples: 5,
            ..cfg.clone()
        }
    )
    .is_err());
    assert!(run_autoax(&ev, &AutoaxConfig { budget: 0, ..cfg }).is_err());
}

#[test]
fn shared_reference_bounds_both_fronts() {
    let a = pareto_front(&[Point::new("a", vec![0.0, 10.0]), Point::new("b", vec![0.5, 2.0])]).unwrap();
    let b = pareto_front(&[Point::new("c", vec![0.2, 4.0])]).unwrap();
    let r = shared_reference(&[&a, &b]);
    assert_eq!(r.objectives, vec![0.55, 11.0]);
}

fn arb_cost() -> impl Strategy<Value = FpgaCost> {
    (1u64..500, 0.1f64..20.0, 0.1f64..20.0).prop_map(|(luts, latency_ns, power_mw)| FpgaCost {
        luts,
        latency_ns,
        power_mw,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_is_monotone_in_component_cost(
        base in arb_cost(),
        extra in (0u64..100, 0.0f64..5.0, 0.0f64..5.0),
        node in 0usize..17,
        others in prop::collection::vec(0usize..2, 17),
    ) {
        // Component 1 of each role costs at least as much as component 0 in every field.
        let m = build_exact_multiplier(8).unwrap();
        let a = build_exact_adder(16).unwrap();
        let worse = FpgaCost {
            luts: base.luts + extra.0,
            latency_ns: base.latency_ns + extra.1,
            power_mw: base.power_mw + extra.2,
        };
        let comp = |n: &Netlist, id: &str, cost: FpgaCost| Component { cost, ..exact_component(n, id, 0) };
        let p = Palette::new(
            vec![comp(&m, "m0", base), comp(&m, "m1", worse)],
            vec![comp(&a, "a0", base), comp(&a, "a1", worse)],
        ).unwrap();
        let t = AcceleratorTemplate::default();
        let mut lo = Configuration(others);
        lo.0[node] = 0;
        let mut hi = lo.clone();
        hi.0[node] = 1;
        let (cl, ch) = (aggregate_cost(&lo, &t, &p).unwrap(), aggregate_cost(&hi, &t, &p).unwrap());
        prop_assert!(ch.luts >= cl.luts);
        prop_assert!(ch.power_mw >= cl.power_mw);
        prop_assert!(ch.latency_ns >= cl.latency_ns);
    }

    #[test]
    fn configuration_strings_round_trip(idx in prop::collection::vec(0usize..20, 1..20)) {
        let c = Configuration(idx);
        prop_assert_eq!(c.to_string().parse::<Configuration>().unwrap(), c.clone());
        let json = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(serde_json::from_str::<Configuration>(&json).unwrap(), c);
    }

    #[test]
    fn ssim_is_bounded_symmetric_and_reflexive(
        w in 8usize..14,
        h in 8usize..12,
        seed in any::<u64>(),
        noise in prop::collection::vec(any::<u8>(), 168),
    ) {
        let a = synthetic_image(w, h, seed).unwrap();
        let b = GrayImage::new(w, h, noise[..w * h].to_vec()).unwrap();
        let ab = ssim(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert!((ab - ssim(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((ssim(&b, &b).unwrap() - 1.0).abs() < 1e-12);
    }
}
