//! Nonlocal similar-patch search.
//!
//! The guided scheme compares green planes when the reference patch is
//! green-dominant (`||G|| >= lambda * max(||R||, ||B||)`) and per-pixel RGB
//! means otherwise. Candidates are all top-left positions inside a
//! `window x window` box centred on the reference, truncated at the image
//! border. Ranking is by `(distance, frame, row, col)`; the reference is
//! always returned first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::DenoiseConfig;
use crate::error::{Error, Result};
use crate::image::{Image, Patch, PatchRef, VideoSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SearchScheme {
    /// Green plane for green-dominant references, RGB mean otherwise.
    GreenGuided,
    GreenOnly,
    /// Mean of the RGB planes, the luminance axis of the opponent space.
    OpponentMean,
    /// All three planes.
    FullRgb,
}

impl SearchScheme {
    pub const ALL: [SearchScheme; 4] = [
        SearchScheme::GreenGuided,
        SearchScheme::GreenOnly,
        SearchScheme::OpponentMean,
        SearchScheme::FullRgb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SearchScheme::GreenGuided => "green-guided",
            SearchScheme::GreenOnly => "green-only",
            SearchScheme::OpponentMean => "opponent-mean",
            SearchScheme::FullRgb => "full-rgb",
        }
    }
}

impl std::fmt::Display for SearchScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub at: PatchRef,
    /// Frobenius distance to the reference under the scheme in use.
    pub distance: f64,
}

/// Positions `0, stride, 2*stride, ...` with `len - ps` appended when off-grid.
pub fn grid_positions(len: usize, ps: usize, stride: usize) -> Vec<usize> {
    let last = len - ps;
    let mut v: Vec<usize> = (0..=last).step_by(stride.max(1)).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

/// Row-major grid of reference patches covering every pixel.
pub fn reference_grid(height: usize, width: usize, ps: usize, stride: usize) -> Result<Vec<PatchRef>> {
    if height < ps || width < ps {
        return Err(Error::TooSmall {
            height,
            width,
            side: ps,
        });
    }
    let rows = grid_positions(height, ps, stride);
    let cols = grid_positions(width, ps, stride);
    Ok(rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| PatchRef::new(r, c)))
        .collect())
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Whether the green plane of an RGB patch dominates red and blue.
pub fn channel_dominance(p: &Patch, lambda: f64) -> bool {
    let r = sq_norm(p.plane(0)).sqrt();
    let g = sq_norm(p.plane(1)).sqrt();
    let b = sq_norm(p.plane(2)).sqrt();
    g >= (lambda * r).max(lambda * b)
}

fn mean_plane(p: &Patch) -> Vec<f64> {
    p.plane(0)
        .iter()
        .zip(p.plane(1))
        .zip(p.plane(2))
        .map(|((r, g), b)| (r + g + b) / 3.0)
        .collect()
}

/// Distance between two RGB patches. Under [`SearchScheme::GreenGuided`] the
/// branch is chosen by the dominance of `reference`.
pub fn patch_distance(reference: &Patch, other: &Patch, scheme: SearchScheme, lambda: f64) -> f64 {
    let green = |a: &Patch, b: &Patch| sq_dist(a.plane(1), b.plane(1));
    let mean = |a: &Patch, b: &Patch| sq_dist(&mean_plane(a), &mean_plane(b));
    let d2 = match scheme {
        SearchScheme::GreenGuided => {
            if channel_dominance(reference, lambda) {
                green(reference, other)
            } else {
                mean(reference, other)
            }
        }
        SearchScheme::GreenOnly => green(reference, other),
        SearchScheme::OpponentMean => mean(reference, other),
        SearchScheme::FullRgb => sq_dist(reference.data(), other.data()),
    };
    d2.sqrt()
}

/// Which planes a search compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Planes {
    Green,
    Mean,
    Rgb,
}

/// Precomputed search planes for a stack of equally sized RGB frames.
pub(crate) struct Searcher<'a> {
    frames: &'a [Image],
    means: Vec<Vec<f64>>,
    height: usize,
    width: usize,
    ps: usize,
    window: usize,
    k: usize,
    lambda: f64,
}

impl<'a> Searcher<'a> {
    pub(crate) fn new(frames: &'a [Image], cfg: &DenoiseConfig) -> Result<Self> {
        cfg.validate()?;
        let first = frames
            .first()
            .ok_or_else(|| Error::Shape("no frames to search".into()))?;
        if frames.iter().any(|f| f.channels() != 3 || !f.same_shape(first)) {
            return Err(Error::Shape("search frames must be RGB and equally sized".into()));
        }
        let (height, width, _) = first.shape();
        if height < cfg.ps || width < cfg.ps {
            return Err(Error::TooSmall {
                height,
                width,
                side: cfg.ps,
            });
        }
        let means = frames
            .iter()
            .map(|f| {
                f.plane(0)
                    .iter()
                    .zip(f.plane(1))
                    .zip(f.plane(2))
                    .map(|((r, g), b)| (r + g + b) / 3.0)
                    .collect()
            })
            .collect();
        Ok(Searcher {
            frames,
            means,
            height,
            width,
            ps: cfg.ps,
            window: cfg.window,
            k: cfg.k,
            lambda: cfg.lambda,
        })
    }

    fn plane_norm(&self, at: PatchRef, c: usize) -> f64 {
        let plane = self.frames[at.frame].plane(c);
        let mut s = 0.0;
        for y in at.row..at.row + self.ps {
            let row = &plane[y * self.width + at.col..][..self.ps];
            s += sq_norm(row);
        }
        s.sqrt()
    }

    fn planes_for(&self, at: PatchRef, scheme: SearchScheme) -> Planes {
        match scheme {
            SearchScheme::GreenGuided => {
                let r = self.plane_norm(at, 0);
                let g = self.plane_norm(at, 1);
                let b = self.plane_norm(at, 2);
                if g >= (self.lambda * r).max(self.lambda * b) {
                    Planes::Green
                } else {
                    Planes::Mean
                }
            }
            SearchScheme::GreenOnly => Planes::Green,
            SearchScheme::OpponentMean => Planes::Mean,
            SearchScheme::FullRgb => Planes::Rgb,
        }
    }

    fn block_sq_dist(&self, a: &[f64], pa: PatchRef, b: &[f64], pb: PatchRef) -> f64 {
        let (w, ps) = (self.width, self.ps);
        let mut s = 0.0;
        for y in 0..ps {
            let ra = &a[(pa.row + y) * w + pa.col..][..ps];
            let rb = &b[(pb.row + y) * w + pb.col..][..ps];
            s += sq_dist(ra, rb);
        }
        s
    }

    fn sq_distance(&self, planes: Planes, a: PatchRef, b: PatchRef) -> f64 {
        let (fa, fb) = (&self.frames[a.frame], &self.frames[b.frame]);
        match planes {
            Planes::Green => self.block_sq_dist(fa.plane(1), a, fb.plane(1), b),
            Planes::Mean => self.block_sq_dist(&self.means[a.frame], a, &self.means[b.frame], b),
            Planes::Rgb => (0..3)
                .map(|c| self.block_sq_dist(fa.plane(c), a, fb.plane(c), b))
                .sum(),
        }
    }

    fn window_range(&self, center: usize, len: usize) -> std::ops::RangeInclusive<usize> {
        let half = self.window / 2;
        let lo = center.saturating_sub(half);
        let hi = (center + self.window - half - 1).min(len - self.ps);
        lo..=hi
    }

    /// The `k` best matches for `at`, reference first.
    pub(crate) fn find(&self, at: PatchRef, scheme: SearchScheme, all_frames: bool) -> Result<Vec<Candidate>> {
        if at.frame >= self.frames.len() {
            return Err(Error::Shape(format!("reference frame {} out of range", at.frame)));
        }
        at.check(self.height, self.width, self.ps)?;
        let planes = self.planes_for(at, scheme);
        let frames = if all_frames {
            0..self.frames.len()
        } else {
            at.frame..at.frame + 1
        };
        let rows = self.window_range(at.row, self.height);
        let cols = self.window_range(at.col, self.width);
        let mut pool: Vec<(f64, PatchRef)> = Vec::with_capacity(
            frames.len() * rows.clone().count() * cols.clone().count(),
        );
        for f in frames {
            for r in rows.clone() {
                for c in cols.clone() {
                    let cand = PatchRef::in_frame(f, r, c);
                    if cand != at {
                        pool.push((self.sq_distance(planes, at, cand), cand));
                    }
                }
            }
        }
        let cmp = |a: &(f64, PatchRef), b: &(f64, PatchRef)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let take = self.k.saturating_sub(1).min(pool.len());
        if take < pool.len() && take > 0 {
            pool.select_nth_unstable_by(take - 1, cmp);
        }
        pool.truncate(take);
        pool.sort_unstable_by(cmp);

        let mut out = Vec::with_capacity(take + 1);
        out.push(Candidate { at, distance: 0.0 });
        out.extend(pool.into_iter().map(|(d2, at)| Candidate {
            at,
            distance: d2.sqrt(),
        }));
        Ok(out)
    }
}

/// The `cfg.k` patches of `img` most similar to the one at `at`.
pub fn find_similar(img: &Image, at: PatchRef, cfg: &DenoiseConfig, scheme: SearchScheme) -> Result<Vec<Candidate>> {
    Searcher::new(std::slice::from_ref(img), cfg)?.find(at, scheme, false)
}

/// Spatio-temporal search: candidates come from the same window in every
/// frame.
pub fn find_similar_video(
    video: &VideoSequence,
    at: PatchRef,
    cfg: &DenoiseConfig,
    scheme: SearchScheme,
) -> Result<Vec<Candidate>> {
    Searcher::new(video.frames(), cfg)?.find(at, scheme, true)
}

/// Mean fraction of `scheme`'s matches on `noisy` that also appear among the
/// full-RGB matches on `clean`, over `n_refs` random references.
pub fn success_rate(
    clean: &Image,
    noisy: &Image,
    cfg: &DenoiseConfig,
    scheme: SearchScheme,
    n_refs: usize,
    seed: u64,
) -> Result<f64> {
    if !clean.same_shape(noisy) {
        return Err(Error::Shape("clean and noisy images differ in shape".into()));
    }
    if n_refs == 0 {
        return Err(Error::Config("n_refs must be >= 1".into()));
    }
    let clean_search = Searcher::new(std::slice::from_ref(clean), cfg)?;
    let noisy_search = Searcher::new(std::slice::from_ref(noisy), cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = (clean.height(), clean.width());
    let mut total = 0.0;
    for _ in 0..n_refs {
        let at = PatchRef::new(rng.random_range(0..=h - cfg.ps), rng.random_range(0..=w - cfg.ps));
        let truth = clean_search.find(at, SearchScheme::FullRgb, false)?;
        let found = noisy_search.find(at, scheme, false)?;
        let mut truth: Vec<PatchRef> = truth.into_iter().map(|c| c.at).collect();
        truth.sort_unstable();
        let hits = found
            .iter()
            .filter(|c| truth.binary_search(&c.at).is_ok())
            .count();
        total += hits as f64 / truth.len() as f64;
    }
    Ok(total / n_refs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{add_awgn, extract_patch};

    fn cfg(k: usize, window: usize) -> DenoiseConfig {
        DenoiseConfig {
            k,
            window,
            ..DenoiseConfig::default()
        }
    }

    fn textured(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, 3, |c, y, x| {
            let v = ((y * 31 + x * 17 + c * 7) % 97) as f64 * 2.3 + ((x * y) % 13) as f64;
            v.min(255.0)
        })
    }

    #[test]
    fn grid_single_position() {
        assert_eq!(reference_grid(8, 8, 8, 4).unwrap(), vec![PatchRef::new(0, 0)]);
        assert_eq!(reference_grid(8, 8, 8, 1).unwrap().len(), 1);
    }

    #[test]
    fn grid_on_and_off_stride() {
        assert_eq!(grid_positions(12, 8, 4), vec![0, 4]);
        assert_eq!(grid_positions(13, 8, 4), vec![0, 4, 5]);
        let g = reference_grid(13, 12, 8, 4).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], PatchRef::new(0, 0));
        assert_eq!(g[5], PatchRef::new(5, 4));
    }

    #[test]
    fn grid_rejects_small_image() {
        assert!(matches!(reference_grid(7, 20, 8, 4), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn grid_covers_every_pixel() {
        for (h, w, s) in [(13, 29, 4), (17, 8, 3), (40, 41, 7)] {
            let mut hit = vec![false; h * w];
            for r in reference_grid(h, w, 8, s).unwrap() {
                for y in r.row..r.row + 8 {
                    for x in r.col..r.col + 8 {
                        hit[y * w + x] = true;
                    }
                }
            }
            assert!(hit.iter().all(|&b| b));
        }
    }

    #[test]
    fn dominance_cases() {
        let gray = Patch::from_fn(4, 3, |_, _, _| 9.0);
        assert!(channel_dominance(&gray, 0.8));
        let no_green = Patch::from_fn(4, 3, |c, _, _| if c == 0 { 5.0 } else { 0.0 });
        assert!(!channel_dominance(&no_green, 0.8));
        // ||G|| = 0.8 ||R|| exactly with B = 0: inclusive boundary
        let edge = Patch::from_fn(4, 3, |c, _, _| [10.0, 8.0, 0.0][c]);
        assert!(channel_dominance(&edge, 0.8));
    }

    #[test]
    fn distance_of_equal_patches_is_zero() {
        let img = textured(16, 16);
        let p = extract_patch(&img, PatchRef::new(3, 4), 8).unwrap();
        for s in SearchScheme::ALL {
            assert_eq!(patch_distance(&p, &p, s, 0.8), 0.0);
        }
    }

    #[test]
    fn red_only_difference_is_invisible_to_green_branch() {
        let a = Patch::from_fn(4, 3, |c, y, x| [10.0 + (y + x) as f64, 50.0, 20.0][c]);
        let b = Patch::from_fn(4, 3, |c, y, x| [30.0 + (y * x) as f64, 50.0, 20.0][c]);
        assert!(channel_dominance(&a, 0.8));
        assert_eq!(patch_distance(&a, &b, SearchScheme::GreenGuided, 0.8), 0.0);
        assert!(patch_distance(&a, &b, SearchScheme::FullRgb, 0.8) > 0.0);
    }

    #[test]
    fn mean_branch_of_constant_patches() {
        // red-heavy references fail dominance; mean planes differ by |m1 - m2|
        let a = Patch::from_fn(8, 3, |c, _, _| [90.0, 10.0, 20.0][c]);
        let b = Patch::from_fn(8, 3, |c, _, _| [60.0, 15.0, 5.0][c]);
        assert!(!channel_dominance(&a, 0.8));
        let (m1, m2): (f64, f64) = (40.0, 80.0 / 3.0);
        let d = patch_distance(&a, &b, SearchScheme::GreenGuided, 0.8);
        assert!((d - 8.0 * (m1 - m2).abs()).abs() < 1e-12);
    }

    #[test]
    fn searcher_matches_patch_distance() {
        let img = add_awgn(&textured(32, 32), 10.0, 5);
        let at = PatchRef::new(12, 9);
        let reference = extract_patch(&img, at, 8).unwrap();
        for s in SearchScheme::ALL {
            let found = find_similar(&img, at, &cfg(40, 20), s).unwrap();
            for c in &found {
                let p = extract_patch(&img, c.at, 8).unwrap();
                let d = patch_distance(&reference, &p, s, 0.8);
                assert!((d - c.distance).abs() < 1e-9 * (1.0 + d));
            }
        }
    }

    #[test]
    fn constant_image_uses_row_major_ties() {
        let img = Image::filled(40, 40, 3, 100.0);
        let at = PatchRef::new(16, 16);
        let found = find_similar(&img, at, &cfg(5, 20), SearchScheme::GreenGuided).unwrap();
        let pos: Vec<(usize, usize)> = found.iter().map(|c| (c.at.row, c.at.col)).collect();
        assert_eq!(pos, vec![(16, 16), (6, 6), (6, 7), (6, 8), (6, 9)]);
        assert!(found.iter().all(|c| c.distance == 0.0));
    }

    #[test]
    fn exact_copy_ranks_first() {
        let mut img = textured(40, 40);
        // copy the patch at (10, 10) to (14, 18), inside its window
        let src = extract_patch(&img, PatchRef::new(10, 10), 8).unwrap();
        let (h, w, ch) = img.shape();
        let mut data = img.clone().into_data();
        for c in 0..ch {
            for y in 0..8 {
                for x in 0..8 {
                    data[(c * h + 14 + y) * w + 18 + x] = src.get(c, y, x);
                }
            }
        }
        img = Image::new(h, w, ch, data).unwrap();
        let found = find_similar(&img, PatchRef::new(10, 10), &cfg(10, 20), SearchScheme::FullRgb).unwrap();
        assert_eq!(found[0].at, PatchRef::new(10, 10));
        assert_eq!(found[1].at, PatchRef::new(14, 18));
        assert_eq!(found[1].distance, 0.0);
        assert!(found[2].distance > 0.0);
    }

    #[test]
    fn small_window_returns_all_candidates() {
        let img = textured(30, 30);
        // window 8 at a corner: rows 0..=3, cols 0..=3
        let found = find_similar(&img, PatchRef::new(0, 0), &cfg(30, 8), SearchScheme::GreenOnly).unwrap();
        assert_eq!(found.len(), 16);
        assert!(found.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn output_is_sorted_and_in_window() {
        let img = add_awgn(&textured(48, 48), 20.0, 9);
        let at = PatchRef::new(20, 25);
        let found = find_similar(&img, at, &cfg(30, 20), SearchScheme::GreenGuided).unwrap();
        assert_eq!(found.len(), 30);
        assert_eq!(found[0].at, at);
        assert!(found.windows(2).all(|w| w[0].distance <= w[1].distance));
        for c in &found {
            assert!((10..=29).contains(&c.at.row) && (15..=34).contains(&c.at.col));
        }
    }

    #[test]
    fn video_with_one_frame_matches_image() {
        let img = add_awgn(&textured(40, 40), 15.0, 2);
        let v = VideoSequence::new(vec![img.clone()]).unwrap();
        let at = PatchRef::new(11, 7);
        let a = find_similar(&img, at, &cfg(30, 20), SearchScheme::GreenGuided).unwrap();
        let b = find_similar_video(&v, at, &cfg(30, 20), SearchScheme::GreenGuided).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn static_video_ties_order_by_frame() {
        let img = add_awgn(&textured(40, 40), 15.0, 2);
        let v = VideoSequence::new(vec![img.clone(), img.clone(), img]).unwrap();
        let at = PatchRef::in_frame(1, 16, 16);
        let found = find_similar_video(&v, at, &cfg(5, 20), SearchScheme::GreenGuided).unwrap();
        let at: Vec<PatchRef> = found.iter().map(|c| c.at).collect();
        assert_eq!(
            at,
            vec![
                PatchRef::in_frame(1, 16, 16),
                PatchRef::in_frame(0, 16, 16),
                PatchRef::in_frame(2, 16, 16),
                at[3],
                at[4],
            ]
        );
        assert_eq!(found[1].distance, 0.0);
        assert_eq!(found[2].distance, 0.0);
        assert_eq!(found[3].distance, found[4].distance);
        assert_eq!(at[3].frame, 0);
        assert_eq!(at[4].frame, 1);
    }

    #[test]
    fn out_of_bounds_reference_errors() {
        let img = textured(20, 20);
        assert!(find_similar(&img, PatchRef::new(13, 0), &cfg(5, 20), SearchScheme::FullRgb).is_err());
    }

    #[test]
    fn identical_inputs_give_full_success() {
        let img = textured(40, 40);
        let r = success_rate(&img, &img, &cfg(20, 20), SearchScheme::FullRgb, 50, 1).unwrap();
        assert_eq!(r, 1.0);
    }
}
