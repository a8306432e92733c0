//! Seeded synthetic test images.
//!
//! Each generator paints luminance structure with a modest per-element color
//! tint, so the three channels are strongly but not perfectly correlated.
//! Output is clamped to `[0, 255]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    Gradient,
    Checkerboard,
    Strokes,
    Blobs,
    Shapes,
    Rings,
}

impl Pattern {
    pub const ALL: [Pattern; 6] = [
        Pattern::Gradient,
        Pattern::Checkerboard,
        Pattern::Strokes,
        Pattern::Blobs,
        Pattern::Shapes,
        Pattern::Rings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Gradient => "gradient",
            Pattern::Checkerboard => "checkerboard",
            Pattern::Strokes => "strokes",
            Pattern::Blobs => "blobs",
            Pattern::Shapes => "shapes",
            Pattern::Rings => "rings",
        }
    }
}

type Rgb = [f64; 3];

fn tinted(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Rgb {
    let l = rng.random_range(lo..hi);
    std::array::from_fn(|_| l + rng.random_range(-25.0..25.0))
}

fn mix(a: Rgb, b: Rgb, t: f64) -> Rgb {
    std::array::from_fn(|c| a[c] * (1.0 - t) + b[c] * t)
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn paint(h: usize, w: usize, f: impl Fn(f64, f64) -> Rgb) -> Image {
    let mut data = vec![0.0; 3 * h * w];
    for y in 0..h {
        for x in 0..w {
            let v = f(y as f64, x as f64);
            for c in 0..3 {
                data[(c * h + y) * w + x] = v[c].clamp(0.0, 255.0);
            }
        }
    }
    Image::new(h, w, 3, data).expect("painted image is finite")
}

fn gradient(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    let corners = [
        tinted(rng, 20.0, 120.0),
        tinted(rng, 120.0, 235.0),
        tinted(rng, 60.0, 200.0),
        tinted(rng, 30.0, 220.0),
    ];
    let band = tinted(rng, 40.0, 220.0);
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    let (s, c) = angle.sin_cos();
    let offset = rng.random_range(0.3..0.7) * (h.max(w) as f64);
    paint(h, w, |y, x| {
        let (u, v) = (x / w as f64, y / h as f64);
        let top = mix(corners[0], corners[1], u);
        let bottom = mix(corners[2], corners[3], u);
        let base = mix(top, bottom, v);
        // a soft diagonal band
        let d = (x * c + y * s - offset).abs();
        mix(base, band, 1.0 - smoothstep(6.0, 14.0, d))
    })
}

fn checkerboard(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    let a = tinted(rng, 20.0, 90.0);
    let b = tinted(rng, 160.0, 235.0);
    let cell = rng.random_range(12..40) as f64;
    let tilt = rng.random_range(-0.3..0.3f64);
    let (s, c) = tilt.sin_cos();
    paint(h, w, |y, x| {
        let (u, v) = (x * c - y * s, x * s + y * c);
        let parity = ((u / cell).floor() + (v / cell).floor()).rem_euclid(2.0);
        if parity < 0.5 {
            a
        } else {
            b
        }
    })
}

fn strokes(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    let sheet = tinted(rng, 190.0, 240.0);
    let n = rng.random_range(25..45);
    let segs: Vec<(f64, f64, f64, f64, f64, Rgb)> = (0..n)
        .map(|_| {
            let y0 = rng.random_range(0.0..h as f64);
            let x0 = rng.random_range(0.0..w as f64);
            let len = rng.random_range(10.0..60.0);
            let ang = rng.random_range(0.0..std::f64::consts::TAU);
            let width = rng.random_range(1.5..4.0);
            (y0, x0, y0 + len * ang.sin(), x0 + len * ang.cos(), width, tinted(rng, 10.0, 90.0))
        })
        .collect();
    paint(h, w, |y, x| {
        let mut px = sheet;
        for &(y0, x0, y1, x1, width, ink) in &segs {
            let (dy, dx) = (y1 - y0, x1 - x0);
            let t = (((y - y0) * dy + (x - x0) * dx) / (dy * dy + dx * dx)).clamp(0.0, 1.0);
            let d = ((y - y0 - t * dy).powi(2) + (x - x0 - t * dx).powi(2)).sqrt();
            let a = 1.0 - smoothstep(width - 0.75, width + 0.75, d);
            if a > 0.0 {
                px = mix(px, ink, a);
            }
        }
        px
    })
}

fn blobs(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    let bg = tinted(rng, 60.0, 140.0);
    let n = rng.random_range(8..16);
    let list: Vec<(f64, f64, f64, Rgb)> = (0..n)
        .map(|_| {
            let col = tinted(rng, 0.0, 255.0);
            (
                rng.random_range(0.0..h as f64),
                rng.random_range(0.0..w as f64),
                rng.random_range(10.0..45.0),
                col,
            )
        })
        .collect();
    paint(h, w, |y, x| {
        let mut px = bg;
        for &(cy, cx, r, col) in &list {
            let d2 = ((y - cy).powi(2) + (x - cx).powi(2)) / (r * r);
            px = mix(px, col, (-d2).exp());
        }
        px
    })
}

fn shapes(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    let bg = tinted(rng, 100.0, 200.0);
    let n = rng.random_range(10..20);
    let list: Vec<(bool, f64, f64, f64, f64, Rgb, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_bool(0.5),
                rng.random_range(0.0..h as f64),
                rng.random_range(0.0..w as f64),
                rng.random_range(8.0..50.0),
                rng.random_range(8.0..50.0),
                tinted(rng, 10.0, 245.0),
                rng.random_range(0.02..0.2),
            )
        })
        .collect();
    paint(h, w, |y, x| {
        let mut px = bg;
        for &(round, cy, cx, a, b, col, freq) in &list {
            let inside = if round {
                ((y - cy) / a).powi(2) + ((x - cx) / b).powi(2) <= 1.0
            } else {
                (y - cy).abs() <= a && (x - cx).abs() <= b
            };
            if inside {
                let shade = 12.0 * (freq * (x + y)).sin();
                px = std::array::from_fn(|c| col[c] + shade);
            }
        }
        px
    })
}

fn rings(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    let a = tinted(rng, 30.0, 110.0);
    let b = tinted(rng, 150.0, 230.0);
    let cy = rng.random_range(0.2..0.8) * h as f64;
    let cx = rng.random_range(0.2..0.8) * w as f64;
    let period = rng.random_range(14.0..30.0);
    paint(h, w, |y, x| {
        let r = ((y - cy).powi(2) + (x - cx).powi(2)).sqrt();
        let t = 0.5 + 0.5 * (std::f64::consts::TAU * r / period).sin();
        mix(a, b, t)
    })
}

pub fn generate(pattern: Pattern, height: usize, width: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match pattern {
        Pattern::Gradient => gradient(&mut rng, height, width),
        Pattern::Checkerboard => checkerboard(&mut rng, height, width),
        Pattern::Strokes => strokes(&mut rng, height, width),
        Pattern::Blobs => blobs(&mut rng, height, width),
        Pattern::Shapes => shapes(&mut rng, height, width),
        Pattern::Rings => rings(&mut rng, height, width),
    }
}

/// `count` images cycling through every pattern, named `<pattern>-<index>`.
pub fn corpus(count: usize, height: usize, width: usize, seed: u64) -> Vec<(String, Image)> {
    (0..count)
        .map(|i| {
            let p = Pattern::ALL[i % Pattern::ALL.len()];
            let img = generate(p, height, width, seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            (format!("{}-{i:02}", p.name()), img)
        })
        .collect()
}
