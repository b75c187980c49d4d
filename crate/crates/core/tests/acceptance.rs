//! Acceptance suite. Each test pins one criterion at its stated
//! tolerance and prints a PASS line (visible with `--nocapture`).
//! The desk-scale codec experiment (criterion 8) needs the bundled
//! encoder binary and lives in the vprep-oh264 crate's acceptance suite.

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use vprep::dct::{
    adaptive_dct_filter, adaptive_dct_loss, adaptive_dct_loss_grad_multi, adaptive_dct_loss_multi,
    adaptive_dct_loss_report, blockize, dct2d_forward, dct2d_inverse, Block, DctConfig,
    Normalization,
};
use vprep::degrade::{apply_recipe, sample_recipe, DegradeRanges};
use vprep::frame::Frame;
use vprep::metrics::{ms_ssim, psnr, ssim, MetricReport};
use vprep::rd::{
    alpha_blend, bd_rate, read_csv, sweep, write_csv, BdInterpolation, BlendConfig, MetricKind,
    Preprocessor, RateInterpolant, RdCurve, RdPoint, SweepOptions,
};

fn pass(n: u32, what: &str) {
    println!("acceptance criterion {n} ({what}): PASS");
}

#[test]
fn c01_dct_forward_matches_naive_oracle_and_inverts() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xC1);
    for &n in &[8usize, 16] {
        let cfg_raw = DctConfig::with_block_size(n)
            .unwrap()
            .normalization(Normalization::PaperRaw);
        let cfg_ortho = DctConfig::with_block_size(n).unwrap();
        let mut max_raw_err = 0.0f64;
        let mut max_ortho_err = 0.0f64;
        let mut max_rt_err = 0.0f64;
        for _ in 0..1000 {
            let block = Block {
                n,
                block_row: 0,
                block_col: 0,
                data: (0..n * n).map(|_| rng.random::<f64>()).collect(),
            };
            let naive = naive_dct2d_raw(&block.data, n);
            let raw = dct2d_forward(&block, &cfg_raw).unwrap();
            let ortho = dct2d_forward(&block, &cfg_ortho).unwrap();
            for h in 0..n {
                for w in 0..n {
                    let idx = h * n + w;
                    max_raw_err = max_raw_err.max((raw.coeffs[idx] - naive[idx]).abs());
                    let aligned = ortho_scale(h, n) * ortho_scale(w, n) * naive[idx];
                    max_ortho_err = max_ortho_err.max((ortho.coeffs[idx] - aligned).abs());
                }
            }
            let back = dct2d_inverse(&ortho, &cfg_ortho).unwrap();
            for (a, b) in block.data.iter().zip(&back.data) {
                max_rt_err = max_rt_err.max((a - b).abs());
            }
        }
        assert!(max_raw_err < 1e-9, "N={n}: raw vs naive {max_raw_err}");
        assert!(
            max_ortho_err < 1e-9,
            "N={n}: ortho vs aligned naive {max_ortho_err}"
        );
        assert!(max_rt_err < 1e-9, "N={n}: inverse roundtrip {max_rt_err}");
    }
    pass(
        1,
        "DCT forward matches the naive oracle within 1e-9; inverse roundtrips",
    );
}

#[test]
fn c02_adaptive_loss_matches_brute_force_exactly() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xC2);
    let mut checked_blocks = 0usize;
    for case in 0..1000 {
        let n = if case % 2 == 0 { 8 } else { 16 };
        let s = [n / 2, n, 3 * n / 2][case % 3];
        let w = rng.random_range(32..=128);
        let h = rng.random_range(32..=128);
        let frame = random_gray(w, h, 0xC200 + case as u64);
        let cfg = DctConfig::new(n, s).unwrap();
        let report = adaptive_dct_loss_report(&frame, &cfg).unwrap();

        let grid = blockize(frame.plane(0), n);
        assert_eq!(report.blocks.len(), grid.blocks.len());
        let mut oracle_sum = 0.0;
        for (detail, block) in report.blocks.iter().zip(&grid.blocks) {
            let spectrum = dct2d_forward(block, &cfg).unwrap();
            let oracle = naive_block_loss(&spectrum.coeffs, n, s, false);
            assert_eq!(
                detail.threshold.to_bits(),
                oracle.threshold.to_bits(),
                "threshold mismatch (case {case})"
            );
            assert_eq!(
                detail.selected, oracle.selected,
                "selection mismatch (case {case})"
            );
            assert_eq!(
                detail.block_loss.to_bits(),
                oracle.block_loss.to_bits(),
                "block loss mismatch (case {case})"
            );
            oracle_sum += oracle.block_loss;
            checked_blocks += 1;
        }
        let oracle_loss = oracle_sum / grid.blocks.len() as f64;
        assert_eq!(
            report.loss.to_bits(),
            oracle_loss.to_bits(),
            "frame loss (case {case})"
        );
        let direct = adaptive_dct_loss(&frame, &cfg).unwrap();
        assert_eq!(direct.to_bits(), report.loss.to_bits());
    }
    assert!(checked_blocks > 10_000);
    pass(
        2,
        "loss, threshold, and selection match brute force bit-for-bit on 1000 frames",
    );
}

/// Selection fingerprint entries: (config*10000 + block index, selected
/// positions, exact coefficient signs).
type SelectionFingerprint = Vec<(usize, Vec<(usize, usize)>, Vec<i8>)>;

fn selection_fingerprint(frame: &Frame, configs: &[DctConfig]) -> SelectionFingerprint {
    let mut fp = Vec::new();
    for (ci, cfg) in configs.iter().enumerate() {
        let report = adaptive_dct_loss_report(frame, cfg).unwrap();
        for (bi, detail) in report.blocks.into_iter().enumerate() {
            fp.push((ci * 10_000 + bi, detail.selected, detail.selected_signs));
        }
    }
    fp
}

#[test]
fn c03_gradient_matches_finite_differences_on_stable_coordinates() {
    const STEP: f64 = 1e-6;
    let mut stable = 0usize;
    let mut unstable = 0usize;
    let mut worst_rel = 0.0f64;
    for frame_idx in 0..100u64 {
        let configs: Vec<DctConfig> = if frame_idx < 70 {
            vec![DctConfig::with_block_size(8).unwrap()]
        } else {
            DctConfig::default_pair()
        };
        let frame = random_gray(32, 32, 0xC300 + frame_idx);
        let grad = adaptive_dct_loss_grad_multi(&frame, &configs).unwrap();
        let base_fp = selection_fingerprint(&frame, &configs);
        let data = &frame.plane(0).data;
        for coord in 0..(32 * 32) {
            let v = data[coord];
            if !(STEP..=1.0 - STEP).contains(&v) {
                continue; // cannot take a symmetric step inside [0,1]
            }
            let mut plus = data.clone();
            plus[coord] = v + STEP;
            let mut minus = data.clone();
            minus[coord] = v - STEP;
            let f_plus = Frame::gray(32, 32, plus).unwrap();
            let f_minus = Frame::gray(32, 32, minus).unwrap();
            if selection_fingerprint(&f_plus, &configs) != base_fp
                || selection_fingerprint(&f_minus, &configs) != base_fp
            {
                unstable += 1;
                continue;
            }
            let l_plus = adaptive_dct_loss_multi(&f_plus, &configs).unwrap();
            let l_minus = adaptive_dct_loss_multi(&f_minus, &configs).unwrap();
            let fd = (l_plus - l_minus) / (2.0 * STEP);
            let g = grad[coord];
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-4);
            worst_rel = worst_rel.max(rel);
            assert!(
                rel < 1e-4,
                "frame {frame_idx} coord {coord}: grad {g} vs fd {fd} (rel {rel})"
            );
            stable += 1;
        }
    }
    assert!(
        stable > 50 * 1024,
        "too few stable coordinates ({stable}) for a meaningful check"
    );
    println!(
        "  gradient check: {stable} stable / {unstable} unstable coords, worst rel {worst_rel:.3e}"
    );
    pass(
        3,
        "frozen-selection gradient matches central differences (rel err < 1e-4)",
    );
}

#[test]
fn c04_full_strength_filter_never_increases_loss() {
    let mut frames = Vec::new();
    for i in 0..50u64 {
        let (w, h) = [(64, 64), (96, 72), (80, 88), (128, 64)][i as usize % 4];
        frames.push(natural_gray(w, h, 0xC400 + i));
    }
    for i in 0..50u64 {
        frames.push(random_gray(64, 64, 0xC450 + i));
    }
    let mut min_margin = f64::INFINITY;
    for cfg in [
        DctConfig::with_block_size(8).unwrap(),
        DctConfig::with_block_size(16).unwrap(),
    ] {
        for (i, frame) in frames.iter().enumerate() {
            let before = adaptive_dct_loss(frame, &cfg).unwrap();
            let filtered = adaptive_dct_filter(frame, &cfg, 1.0).unwrap();
            let after = adaptive_dct_loss(&filtered, &cfg).unwrap();
            assert!(
                after <= before,
                "violation: frame {i} N={} loss {before} -> {after}",
                cfg.block_size()
            );
            min_margin = min_margin.min(before - after);
        }
    }
    println!("  filter property: 100 frames x 2 configs, min loss decrease {min_margin:.3e}");
    pass(
        4,
        "strength=1 filtering never increases the recomputed loss (0 violations)",
    );
}

fn synthetic_curve(seed: u64, points: usize, rate_offset: f64) -> RdCurve {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let q_top = 40.0 + rng.random::<f64>() * 4.0;
    let dq = 1.5 + rng.random::<f64>() * 2.0;
    let slope = 0.05 + rng.random::<f64>() * 0.07;
    let base = 3.0 + rate_offset + rng.random::<f64>() * 0.3;
    let pts = (0..points)
        .map(|i| {
            let quality = q_top - dq * i as f64 - rng.random::<f64>() * 0.2;
            let jitter = (rng.random::<f64>() - 0.5) * 0.01;
            let log_rate = base + slope * (quality - q_top) + jitter;
            RdPoint {
                qp: 20 + 4 * i as u32,
                bitrate_kbps: 10f64.powf(log_rate),
                metrics: MetricReport {
                    psnr: quality,
                    ssim: None,
                    ms_ssim: None,
                    vmaf: None,
                },
            }
        })
        .collect();
    RdCurve {
        sequence: "synthetic".into(),
        codec: "model".into(),
        preset: "n/a".into(),
        label: "none".into(),
        points: pts,
    }
}

fn trapezoid_bd(baseline: &RdCurve, test: &RdCurve, interp: BdInterpolation) -> f64 {
    let samples = |c: &RdCurve| -> Vec<(f64, f64)> {
        let mut s: Vec<(f64, f64)> = c
            .points
            .iter()
            .map(|p| (p.metrics.psnr, p.bitrate_kbps.log10()))
            .collect();
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        s
    };
    let sb = samples(baseline);
    let st = samples(test);
    let lo = sb[0].0.max(st[0].0);
    let hi = sb[sb.len() - 1].0.min(st[st.len() - 1].0);
    let fb = RateInterpolant::fit(&sb, interp).unwrap();
    let ft = RateInterpolant::fit(&st, interp).unwrap();
    const STEPS: usize = 20_000;
    let trapz = |f: &RateInterpolant| -> f64 {
        let mut acc = 0.0;
        let dx = (hi - lo) / STEPS as f64;
        for i in 0..STEPS {
            let x0 = lo + dx * i as f64;
            let x1 = x0 + dx;
            acc += (f.eval(x0) + f.eval(x1)) * 0.5 * dx;
        }
        acc
    };
    let delta = (trapz(&ft) - trapz(&fb)) / (hi - lo);
    (10f64.powf(delta) - 1.0) * 100.0
}

#[test]
fn c05_bd_rate_analytic_cases() {
    for pair in 0..20u64 {
        let points = 4 + (pair as usize % 3);
        let baseline = synthetic_curve(0xC500 + pair, points, 0.0);
        let test = synthetic_curve(0xC5F0 + pair, points, -0.08);

        // Identical curves: exactly zero (within fp).
        let same = bd_rate(
            &baseline,
            &baseline,
            MetricKind::Psnr,
            BdInterpolation::Pchip,
        )
        .unwrap();
        assert!(
            same.percent.abs() <= 1e-9,
            "pair {pair}: identical gave {}",
            same.percent
        );

        // Uniform rate doubling: +100% in the log domain.
        let mut doubled = baseline.clone();
        for p in &mut doubled.points {
            p.bitrate_kbps *= 2.0;
        }
        let d = bd_rate(
            &baseline,
            &doubled,
            MetricKind::Psnr,
            BdInterpolation::Pchip,
        )
        .unwrap();
        assert!(
            (d.percent - 100.0).abs() <= 0.1,
            "pair {pair}: doubled gave {}",
            d.percent
        );

        // Antisymmetry through the log-domain identity.
        let ab = bd_rate(&baseline, &test, MetricKind::Psnr, BdInterpolation::Pchip)
            .unwrap()
            .percent;
        let ba = bd_rate(&test, &baseline, MetricKind::Psnr, BdInterpolation::Pchip)
            .unwrap()
            .percent;
        let anti = -ba / (1.0 + ba / 100.0);
        assert!((ab - anti).abs() <= 0.01, "pair {pair}: {ab} vs {anti}");

        // Analytic integration agrees with a fine-grid trapezoid oracle,
        // for both interpolation backends.
        let trap = trapezoid_bd(&baseline, &test, BdInterpolation::Pchip);
        assert!(
            (ab - trap).abs() <= 0.05,
            "pair {pair}: analytic {ab} vs trapezoid {trap}"
        );
        let cubic = bd_rate(
            &baseline,
            &test,
            MetricKind::Psnr,
            BdInterpolation::CubicFit,
        )
        .unwrap()
        .percent;
        let cubic_trap = trapezoid_bd(&baseline, &test, BdInterpolation::CubicFit);
        assert!(
            (cubic - cubic_trap).abs() <= 0.05,
            "pair {pair}: cubic analytic {cubic} vs trapezoid {cubic_trap}"
        );
    }
    pass(
        5,
        "BD-rate: zero/doubled/antisymmetry/quadrature agreement on 20 pairs",
    );
}

#[test]
fn c06_metrics_match_naive_oracles_and_msssim_is_noise_monotone() {
    use rand_distr::{Distribution, Normal};
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20u64 {
        let a = natural_gray(176, 176, 0xC600 + i);
        let b = {
            let mut rng = ChaCha12Rng::seed_from_u64(0xC6F0 + i);
            let normal = Normal::new(0.0, 0.01 + 0.002 * i as f64).unwrap();
            let data: Vec<f64> = a
                .plane(0)
                .data
                .iter()
                .map(|v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0))
                .collect();
            Frame::gray(176, 176, data).unwrap()
        };
        let dp = (psnr(&a, &b).unwrap() - naive_psnr(&a, &b)).abs();
        let ds = (ssim(&a, &b).unwrap() - naive_ssim(&a, &b)).abs();
        let dm = (ms_ssim(&a, &b).unwrap() - naive_ms_ssim(&a, &b)).abs();
        worst = (worst.0.max(dp), worst.1.max(ds), worst.2.max(dm));
        assert!(
            dp < 1e-9 && ds < 1e-9 && dm < 1e-9,
            "pair {i}: {dp} {ds} {dm}"
        );
    }
    println!("  metric oracles: worst |impl - naive| = {worst:?}");

    let clean = natural_gray(176, 176, 0xC699);
    let noisy = |sigma: f64| {
        let mut rng = ChaCha12Rng::seed_from_u64(0xC69A);
        let normal = Normal::new(0.0, sigma).unwrap();
        let data: Vec<f64> = clean
            .plane(0)
            .data
            .iter()
            .map(|v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0))
            .collect();
        Frame::gray(176, 176, data).unwrap()
    };
    let scores: Vec<f64> = [0.01, 0.05, 0.1]
        .iter()
        .map(|&s| ms_ssim(&clean, &noisy(s)).unwrap())
        .collect();
    assert!(scores[0] > scores[1] && scores[1] > scores[2], "{scores:?}");
    pass(
        6,
        "PSNR/SSIM/MS-SSIM match naive oracles within 1e-9; MS-SSIM noise-monotone",
    );
}

#[test]
fn c07_degradation_is_deterministic_across_runs_and_thread_counts() {
    let ranges = DegradeRanges::default();
    for i in 0..100u64 {
        let frame = natural_gray(64, 64, 0xC700 + i);
        let recipe = sample_recipe(0xC7F0 + i, &ranges).unwrap();
        let first = apply_recipe(&frame, &recipe).unwrap();
        let second = apply_recipe(&frame, &recipe).unwrap();
        assert!(first.samples_equal(&second), "rerun differs for seed {i}");
        for threads in [1usize, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let pooled = pool.install(|| apply_recipe(&frame, &recipe)).unwrap();
            assert!(
                first.samples_equal(&pooled),
                "thread count {threads} changed output for seed {i}"
            );
        }
    }
    pass(
        7,
        "100 (seed, frame) pairs reproduce bit-identically across runs and pools",
    );
}

#[test]
fn c09_blend_endpoints_bit_exact_and_alpha_zero_sweep_matches_baseline() {
    // Endpoint passthrough on gray and YUV frames.
    for seed in 0..10u64 {
        let fi = random_gray(32, 32, 0xC900 + seed);
        let fo = natural_gray(32, 32, 0xC950 + seed);
        assert!(alpha_blend(&fo, &fi, &BlendConfig::new(0.0).unwrap())
            .unwrap()
            .samples_equal(&fi));
        assert!(alpha_blend(&fo, &fi, &BlendConfig::new(1.0).unwrap())
            .unwrap()
            .samples_equal(&fo));
    }
    let seq = random_yuv_sequence("clip", 3, 32, 32, (25, 1), 0xC9AA);
    let fo = seq.frames()[0].clone();
    let fi = seq.frames()[1].clone();
    assert!(alpha_blend(&fo, &fi, &BlendConfig::new(0.0).unwrap())
        .unwrap()
        .samples_equal(&fi));

    // A sweep with alpha = 0 must hand the encoder the baseline bytes.
    let dir = tempfile::tempdir().unwrap();
    let profile = fake_codec_profile(dir.path());
    let clip = synthetic_clip("alpha0", 4, 176, 176, (25, 1), 0xC9BB);

    let base_dir = dir.path().join("baseline");
    let base = sweep(&clip, &profile, None, &base_dir, &SweepOptions::default()).unwrap();

    let pre = Preprocessor {
        dct_configs: vec![DctConfig::with_block_size(8).unwrap()],
        strength: 1.0,
        blend: BlendConfig::new(0.0).unwrap(),
    };
    let pre_dir = dir.path().join("alpha0");
    let curve = sweep(
        &clip,
        &profile,
        Some(&pre),
        &pre_dir,
        &SweepOptions::default(),
    )
    .unwrap();

    let baseline_bytes = std::fs::read(base_dir.join("source.y4m")).unwrap();
    let preprocessed_bytes = std::fs::read(pre_dir.join("preprocessed.y4m")).unwrap();
    assert_eq!(
        baseline_bytes, preprocessed_bytes,
        "alpha=0 encoder input differs from baseline"
    );
    for (a, b) in base.points.iter().zip(&curve.points) {
        assert_eq!(a.qp, b.qp);
        assert_eq!(a.bitrate_kbps, b.bitrate_kbps);
    }
    pass(
        9,
        "alpha endpoints bit-exact; alpha=0 sweep feeds baseline-identical bytes",
    );
}

#[test]
fn c10_io_roundtrips_are_bit_exact() {
    let dir = tempfile::tempdir().unwrap();

    // Y4M: sample-identical after one trip, byte-identical after two.
    let seq = random_yuv_sequence("rt", 3, 24, 16, (30000, 1001), 0xCA00);
    let p1 = dir.path().join("a.y4m");
    vprep::y4m::write_y4m(&seq, &p1).unwrap();
    let back = vprep::y4m::read_y4m(&p1).unwrap();
    assert_eq!(back.len(), seq.len());
    assert_eq!((back.fps_num, back.fps_den), (30000, 1001));
    for (a, b) in seq.frames().iter().zip(back.frames()) {
        assert!(a.samples_equal(b));
    }
    let p2 = dir.path().join("b.y4m");
    vprep::y4m::write_y4m(&back, &p2).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

    // PNG: gray and RGB, bit-exact.
    let gray = natural_gray(48, 32, 0xCA01);
    let gp = dir.path().join("g.png");
    vprep::png_io::write_png(&gray, &gp).unwrap();
    assert!(vprep::png_io::read_png(&gp).unwrap().samples_equal(&gray));
    let rgb = {
        let r = random_gray(20, 20, 1).plane(0).data.clone();
        let g = random_gray(20, 20, 2).plane(0).data.clone();
        let b = random_gray(20, 20, 3).plane(0).data.clone();
        let quant = |v: Vec<f64>| -> Vec<f64> {
            v.into_iter().map(|x| (x * 255.0).round() / 255.0).collect()
        };
        Frame::rgb(20, 20, [quant(r), quant(g), quant(b)]).unwrap()
    };
    let cp = dir.path().join("c.png");
    vprep::png_io::write_png(&rgb, &cp).unwrap();
    assert!(vprep::png_io::read_png(&cp).unwrap().samples_equal(&rgb));

    // CSV report: exact round trip including the infinity sentinel.
    let mut curve = synthetic_curve(0xCA02, 4, 0.0);
    curve.points[0].metrics.psnr = f64::INFINITY;
    curve.points[1].metrics.ms_ssim = Some(0.987654321012345);
    curve.points[2].metrics.vmaf = Some(93.125);
    let mut other = synthetic_curve(0xCA03, 5, -0.1);
    other.label = "filtered".into();
    let curves = vec![curve, other];
    let rp = dir.path().join("report.csv");
    write_csv(&curves, &rp).unwrap();
    assert_eq!(read_csv(&rp).unwrap(), curves);

    pass(10, "Y4M, PNG, and CSV report round-trips are bit-exact");
}
