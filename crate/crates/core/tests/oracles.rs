//! Independent oracles and property tests for the public API.

use gcp_denoise::codec::{decode_image, decode_ppm, encode_ppm};
use gcp_denoise::config::DenoiseConfig;
use gcp_denoise::denoise::{denoise_group, denoise_image, denoise_video, hard_threshold, threshold_value};
use gcp_denoise::image::{add_awgn, extract_patch, Image, Patch, PatchRef, Raster8, VideoSequence};
use gcp_denoise::metrics::ssim;
use gcp_denoise::rggb::{rgb_to_rggb, rggb_to_rgb, RggbGroup, RggbPatch};
use gcp_denoise::search::{find_similar, success_rate, SearchScheme};
use gcp_denoise::synth::{generate, Pattern};
use gcp_denoise::talg::{
    fft_mode3, forward_transform, inverse_transform, learn_slice_bases, t_product, t_product_bcirc, CoeffGroup,
    Tensor3, TransformSet,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// SSIM by explicit 11x11 window sums at every valid position.
fn ssim_direct(a: &Image, b: &Image) -> f64 {
    let (h, w, ch) = a.shape();
    let mut win = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in win.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let mut per_channel = 0.0;
    for c in 0..ch {
        let mut sum = 0.0;
        for y in 0..=h - 11 {
            for x in 0..=w - 11 {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let wt = win[i][j] / total;
                        let (p, q) = (a.get(c, y + i, x + j), b.get(c, y + i, x + j));
                        ma += wt * p;
                        mb += wt * q;
                        saa += wt * p * p;
                        sbb += wt * q * q;
                        sab += wt * p * q;
                    }
                }
                let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
                sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
        }
        per_channel += sum / ((h - 10) * (w - 10)) as f64;
    }
    per_channel / ch as f64
}

#[test]
fn ssim_matches_direct_window_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for i in 0..5 {
        let (h, w) = (16 + 5 * i, 30 - 2 * i);
        let a = Image::from_fn(h, w, 3, |_, _, _| rng.random_range(0.0..255.0));
        let b = add_awgn(&a, 10.0 + 10.0 * i as f64, i as u64);
        let (fast, slow) = (ssim(&a, &b).unwrap(), ssim_direct(&a, &b));
        assert!((fast - slow).abs() < 1e-6, "pair {i}: {fast} vs {slow}");
    }
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    m.qr().q()
}

/// Residual of projecting every member slice onto the leading `r` columns
/// of the row and column bases.
fn truncation_residual(slices: &[Vec<DMatrix<Complex64>>; 4], row: &[DMatrix<Complex64>], col: &[DMatrix<Complex64>], r: usize) -> f64 {
    let mut total = 0.0;
    for f in 0..4 {
        let u = row[f].columns(0, r).into_owned();
        let v = col[f].columns(0, r).into_owned();
        for p in &slices[f] {
            let approx = &u * (u.adjoint() * p * &v) * v.adjoint();
            total += (p - approx).norm_squared();
        }
    }
    total
}

#[test]
fn learned_slice_bases_beat_random_unitary_bases() {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let img = generate(Pattern::Shapes, 64, 64, 3);
    let noisy = add_awgn(&img, 10.0, 4);
    let members: Vec<PatchRef> = (0..30).map(|i| PatchRef::new(2 * (i / 6), 3 * (i % 6))).collect();
    let g = RggbGroup::from_image(&noisy, members, 8).unwrap();
    let slices: [Vec<DMatrix<Complex64>>; 4] =
        std::array::from_fn(|f| (0..g.len()).map(|k| fft_mode3(&g.member(k)).slice(f).clone()).collect());
    let (row, col) = learn_slice_bases(&g);

    // at full rank every unitary pair reconstructs exactly
    assert!(truncation_residual(&slices, &row, &col, 8) < 1e-6);
    for r in [1, 2, 4] {
        let learned = truncation_residual(&slices, &row, &col, r);
        for _ in 0..10 {
            let ur: Vec<_> = (0..4).map(|_| random_unitary(&mut rng, 8)).collect();
            let uc: Vec<_> = (0..4).map(|_| random_unitary(&mut rng, 8)).collect();
            let random = truncation_residual(&slices, &ur, &uc, r);
            assert!(learned <= random, "rank {r}: learned {learned} > random {random}");
        }
    }
}

#[test]
fn identical_noisy_copies_are_denoised() {
    let clean_img = generate(Pattern::Strokes, 48, 48, 11);
    let clean = extract_patch(&clean_img, PatchRef::new(20, 20), 8).unwrap();
    let cfg = DenoiseConfig::with_sigma(25.0);
    let tau = threshold_value(&cfg, 1);
    let (mut before, mut after) = (0.0, 0.0);
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let noisy: Vec<Patch> = (0..30)
            .map(|_| {
                Patch::from_fn(8, 3, |c, y, x| {
                    clean.get(c, y, x) + 25.0 * rng.sample::<f64, _>(rand_distr::StandardNormal)
                })
            })
            .collect();
        let rggb: Vec<RggbPatch> = noisy.iter().map(|p| rgb_to_rggb(p).unwrap()).collect();
        let out = denoise_group(&RggbGroup::from_patches(&rggb, None).unwrap(), tau).unwrap();
        for (k, p) in noisy.iter().enumerate() {
            let est = rggb_to_rgb(&out.member(k));
            let err = |q: &Patch| q.data().iter().zip(clean.data()).map(|(a, b)| (a - b).abs()).sum::<f64>();
            before += err(p);
            after += err(&est);
        }
    }
    assert!(after < before, "output error {after} >= input error {before}");
}

#[test]
fn white_noise_search_matches_random_overlap() {
    let (h, w, ps, k, window) = (64usize, 64usize, 8usize, 30usize, 20usize);
    let clean = generate(Pattern::Blobs, h, w, 5);
    let noisy = add_awgn(&clean, 1e6, 6);
    let cfg = DenoiseConfig {
        k,
        window,
        ..DenoiseConfig::default()
    };
    let rate = success_rate(&clean, &noisy, &cfg, SearchScheme::FullRgb, 1000, 7).unwrap();

    // A random (k-1)-subset of the n-1 non-reference candidates overlaps the
    // (k-1) true neighbours in (k-1)^2/(n-1) places on average; the
    // reference itself always matches.
    let axis = |p: usize, len: usize| {
        let lo = p.saturating_sub(window / 2);
        let hi = (p + window - window / 2 - 1).min(len - ps);
        hi - lo + 1
    };
    let mut expected = 0.0;
    let positions = (h - ps + 1) * (w - ps + 1);
    for r in 0..=h - ps {
        for c in 0..=w - ps {
            let n = (axis(r, h) * axis(c, w)) as f64;
            let kk = k as f64;
            expected += (1.0 + (kk - 1.0) * (kk - 1.0) / (n - 1.0)) / kk;
        }
    }
    expected /= positions as f64;
    assert!((rate - expected).abs() < 0.01, "rate {rate} vs random baseline {expected}");
}

#[test]
fn denoising_is_bit_deterministic() {
    let noisy = add_awgn(&generate(Pattern::Rings, 48, 40, 2), 20.0, 3);
    let cfg = DenoiseConfig::with_sigma(20.0);
    assert_eq!(denoise_image(&noisy, &cfg).unwrap(), denoise_image(&noisy, &cfg).unwrap());
}

#[test]
fn static_noisy_video_gives_matching_frames() {
    let noisy = add_awgn(&generate(Pattern::Shapes, 40, 40, 8), 20.0, 9);
    let video = VideoSequence::new(vec![noisy; 3]).unwrap();
    let out = denoise_video(&video, &DenoiseConfig::video(20.0)).unwrap();
    let f = out.frames();
    for other in &f[1..] {
        let d = max_abs_diff(f[0].data(), other.data());
        assert!(d < 1e-6, "frames differ by {d}");
    }
}

#[test]
fn noise_is_reduced_at_several_levels() {
    let clean = generate(Pattern::Gradient, 64, 64, 12);
    for (i, sigma) in [15.0, 25.0, 50.0].into_iter().enumerate() {
        let noisy = add_awgn(&clean, sigma, 40 + i as u64);
        let out = denoise_image(&noisy, &DenoiseConfig::with_sigma(sigma)).unwrap();
        let before = gcp_denoise::metrics::psnr(&clean, &noisy, 255.0).unwrap();
        let after = gcp_denoise::metrics::psnr(&clean, &out, 255.0).unwrap();
        assert!(after > before, "sigma {sigma}: {after} <= {before}");
    }
}

fn tensor_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Tensor3> {
    prop::collection::vec(-10.0f64..10.0, rows * cols * 4).prop_map(move |d| Tensor3::new(rows, cols, d).unwrap())
}

fn group_strategy() -> impl Strategy<Value = RggbGroup> {
    (2usize..6, 1usize..9)
        .prop_flat_map(|(side, k)| prop::collection::vec(0.0f64..255.0, side * side * 4 * k).prop_map(move |d| (side, k, d)))
        .prop_map(|(side, k, d)| {
            let n = side * side * 4;
            let patches: Vec<RggbPatch> = d
                .chunks(n)
                .map(|c| RggbPatch::new(Patch::new(side, 4, c.to_vec()).unwrap()).unwrap())
                .collect();
            debug_assert_eq!(patches.len(), k);
            RggbGroup::from_patches(&patches, None).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn t_product_paths_agree(
        (a, b) in (1usize..5, 1usize..5, 1usize..5)
            .prop_flat_map(|(n1, n2, n3)| (tensor_strategy(n1, n2), tensor_strategy(n2, n3)))
    ) {
        let fast = t_product(&a, &b).unwrap();
        let slow = t_product_bcirc(&a, &b).unwrap();
        prop_assert!(fast.sub(&slow).frobenius_norm() <= 1e-9 * (1.0 + slow.frobenius_norm()));
    }

    #[test]
    fn transform_preserves_norm_and_inverts(g in group_strategy()) {
        let t = TransformSet::learn(&g);
        prop_assert!(t.orthonormality_error() < 1e-9);
        let c = forward_transform(&g, &t).unwrap();
        prop_assert!((c.frobenius_norm() - g.frobenius_norm()).abs() <= 1e-9 * (1.0 + g.frobenius_norm()));
        let back = inverse_transform(&c, &t).unwrap();
        prop_assert!(max_abs_diff(back.data(), g.data()) < 1e-8);
    }

    #[test]
    fn member_order_does_not_change_estimates(
        g in group_strategy(),
        rot in 0usize..8,
        tau in 0.0f64..200.0,
    ) {
        let k = g.len();
        let order: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
        let permuted: Vec<RggbPatch> = order.iter().map(|&i| g.member(i)).collect();
        let pg = RggbGroup::from_patches(&permuted, None).unwrap();
        let a = denoise_group(&g, tau).unwrap();
        let b = denoise_group(&pg, tau).unwrap();
        for (j, &i) in order.iter().enumerate() {
            prop_assert!(max_abs_diff(a.member_data(i), b.member_data(j)) < 1e-6);
        }
    }

    #[test]
    fn retained_count_is_monotone(
        data in prop::collection::vec(-100.0f64..100.0, 64),
        t1 in 0.0f64..100.0,
        t2 in 0.0f64..100.0,
    ) {
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let c = CoeffGroup::new(2, vec![PatchRef::new(0, 0); 4], data).unwrap();
        let a = hard_threshold(c.clone(), lo).retained_count;
        let b = hard_threshold(c, hi).retained_count;
        prop_assert!(a >= b);
    }

    #[test]
    fn search_output_is_well_formed(
        pixels in prop::collection::vec(0u8..4, 3 * 20 * 22),
        row in 0usize..=14,
        col in 0usize..=16,
        k in 1usize..40,
        window in 6usize..16,
    ) {
        let img = Image::new(20, 22, 3, pixels.iter().map(|&v| v as f64).collect()).unwrap();
        let cfg = DenoiseConfig { ps: 6, k, window, ..DenoiseConfig::default() };
        let at = PatchRef::new(row, col);
        let found = find_similar(&img, at, &cfg, SearchScheme::FullRgb).unwrap();
        prop_assert_eq!(found[0].at, at);
        prop_assert_eq!(found[0].distance, 0.0);
        let span = |p: usize, len: usize| {
            let lo = p.saturating_sub(window / 2);
            (lo, (p + window - window / 2 - 1).min(len - 6))
        };
        let ((r0, r1), (c0, c1)) = (span(row, 20), span(col, 22));
        let pool = (r1 - r0 + 1) * (c1 - c0 + 1);
        prop_assert_eq!(found.len(), k.min(pool));
        for pair in found[1..].windows(2) {
            let key = |c: &gcp_denoise::search::Candidate| (c.distance, c.at.frame, c.at.row, c.at.col);
            prop_assert!(key(&pair[0]) < key(&pair[1]));
        }
        for c in &found {
            prop_assert!((r0..=r1).contains(&c.at.row) && (c0..=c1).contains(&c.at.col));
        }
    }

    #[test]
    fn green_dominant_guided_search_equals_green_only(
        g in prop::collection::vec(150.0f64..255.0, 24 * 24),
        rb in prop::collection::vec(0.0f64..60.0, 2 * 24 * 24),
        row in 0usize..=16,
        col in 0usize..=16,
    ) {
        let mut data = rb[..576].to_vec();
        data.extend_from_slice(&g);
        data.extend_from_slice(&rb[576..]);
        let img = Image::new(24, 24, 3, data).unwrap();
        let cfg = DenoiseConfig { k: 12, ..DenoiseConfig::default() };
        let at = PatchRef::new(row, col);
        let a = find_similar(&img, at, &cfg, SearchScheme::GreenGuided).unwrap();
        let b = find_similar(&img, at, &cfg, SearchScheme::GreenOnly).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ppm_roundtrip(h in 1usize..9, w in 1usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = Raster8 { height: h, width: w, channels: 3, data: (0..h * w * 3).map(|_| rng.random()).collect() };
        prop_assert_eq!(decode_ppm(&encode_ppm(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn decoders_reject_garbage_without_panicking(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let _ = decode_image(&bytes);
        let mut ppm = b"P6\n".to_vec();
        ppm.extend_from_slice(&bytes);
        let _ = decode_ppm(&ppm);
    }
}
