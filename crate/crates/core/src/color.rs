//! Palette-based color transfer.
//!
//! Both images are compressed to `k` colors with Lloyd's k-means, the source palette
//! is pushed toward the target palette by a gradient flow, and every source pixel is
//! redrawn with the transported color of its cluster.

use std::collections::HashMap;
use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};
use ndarray::{Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{run_flow, FlowConfig, FlowTrace};
use crate::measure::EmpiricalMeasure;
use crate::sphere::RngStream;

/// Desk-scale palette size.
pub const DEFAULT_PALETTE_SIZE: usize = 512;
/// Largest palette size accepted by [`transfer_colors`].
pub const MAX_PALETTE_SIZE: usize = 3000;
pub const DEFAULT_KMEANS_ITERS: usize = 30;

/// Cluster centers in RGB space together with their pixel counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    centers: Array2<f64>,
    counts: Vec<usize>,
}

impl Palette {
    pub fn new(centers: Array2<f64>, counts: Vec<usize>) -> Result<Self> {
        if centers.ncols() != 3 || centers.nrows() == 0 {
            return Err(Error::InvalidParameter(format!("palette needs k >= 1 rows of 3 channels, got {:?}", centers.dim())));
        }
        if counts.len() != centers.nrows() {
            return Err(Error::DimensionMismatch { expected: centers.nrows(), found: counts.len() });
        }
        if let Some(v) = centers.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("palette channel {v} outside [0, 255]")));
        }
        Ok(Self { centers, counts })
    }

    pub fn len(&self) -> usize {
        self.centers.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.nrows() == 0
    }

    pub fn centers(&self) -> &Array2<f64> {
        &self.centers
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Uniform empirical measure over the centers (cluster sizes ignored).
    pub fn to_measure(&self) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::uniform(self.centers.clone())
    }

    /// Centers rounded to the nearest integer in `{0..255}`.
    pub fn rounded(&self) -> Array2<u8> {
        self.centers.mapv(round_channel)
    }
}

fn round_channel(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Per-pixel cluster indices into a [`Palette`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedImage {
    pub width: u32,
    pub height: u32,
    /// Row-major cluster index of every pixel.
    pub indices: Vec<usize>,
}

impl IndexedImage {
    /// Paints each pixel with row `indices[i]` of `colors` (k x 3).
    pub fn render(&self, colors: &Array2<u8>) -> Result<RgbImage> {
        if let Some(&bad) = self.indices.iter().find(|&&i| i >= colors.nrows()) {
            return Err(Error::InvalidParameter(format!("cluster index {bad} outside palette of {}", colors.nrows())));
        }
        let mut out = RgbImage::new(self.width, self.height);
        for (px, &idx) in out.pixels_mut().zip(&self.indices) {
            *px = Rgb([colors[[idx, 0]], colors[[idx, 1]], colors[[idx, 2]]]);
        }
        Ok(out)
    }
}

/// Result of a weighted Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centers: Array2<f64>,
    /// Cluster of every input point.
    pub assignments: Vec<usize>,
    /// Weighted within-cluster sum of squares after each assignment step.
    pub wcss_history: Vec<f64>,
}

impl KMeans {
    pub fn wcss(&self) -> f64 {
        self.wcss_history.last().copied().unwrap_or(0.0)
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center (lowest index on ties) and squared distance for every point.
fn assign(points: &Array2<f64>, centers: &Array2<f64>) -> Vec<(usize, f64)> {
    (0..points.nrows())
        .into_par_iter()
        .map(|i| {
            let x = points.row(i);
            let mut best = (0, f64::INFINITY);
            for (j, c) in centers.rows().into_iter().enumerate() {
                let dist = sq_dist(x, c);
                if dist < best.1 {
                    best = (j, dist);
                }
            }
            best
        })
        .collect()
}

/// k-means++ seeding with selection probability proportional to `weight * D^2`.
fn seed_centers(points: &Array2<f64>, weights: &[f64], k: usize, rng: &mut RngStream) -> Array2<f64> {
    let n = points.nrows();
    let mut chosen = Vec::with_capacity(k);
    let pick = |scores: &[f64], rng: &mut RngStream| -> usize {
        let total: f64 = scores.iter().sum();
        if total <= 0.0 {
            return 0;
        }
        let mut target = rng.uniform01() * total;
        for (i, &s) in scores.iter().enumerate() {
            if s > 0.0 && target < s {
                return i;
            }
            target -= s;
        }
        scores.iter().rposition(|&s| s > 0.0).unwrap_or(0)
    };
    chosen.push(pick(weights, rng));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let scores: Vec<f64> = d2.iter().zip(weights).map(|(d, w)| d * w).collect();
        let next = pick(&scores, rng);
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    points.select(Axis(0), &chosen)
}

/// Weighted Lloyd's algorithm with k-means++ seeding.
///
/// Stops after `iters` assignment/update rounds or when the assignment stops
/// changing. An empty cluster is moved onto the point farthest from its center.
pub fn kmeans(points: &Array2<f64>, weights: &[f64], k: usize, iters: usize, seed: u64) -> Result<KMeans> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k-means needs 1 <= k <= {n}, got k = {k}")));
    }
    if iters == 0 {
        return Err(Error::InvalidParameter("k-means needs at least one iteration".into()));
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    let mut rng = RngStream::new(seed, 0);
    let mut centers = seed_centers(points, weights, k, &mut rng);
    let mut wcss_history = Vec::with_capacity(iters + 1);
    let mut previous: Option<Vec<usize>> = None;
    for _ in 0..iters {
        let mut assigned = assign(points, &centers);
        wcss_history.push(weighted_cost(&assigned, weights));
        let labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        if previous.as_ref() == Some(&labels) {
            break;
        }
        let mut sums = Array2::<f64>::zeros((k, points.ncols()));
        let mut mass = vec![0.0; k];
        for (i, &(j, _)) in assigned.iter().enumerate() {
            sums.row_mut(j).scaled_add(weights[i], &points.row(i));
            mass[j] += weights[i];
        }
        for j in 0..k {
            if mass[j] > 0.0 {
                centers.row_mut(j).assign(&(&sums.row(j) / mass[j]));
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| assigned[a].1.total_cmp(&assigned[b].1).then(b.cmp(&a)))
                    .expect("k <= n implies points");
                log::debug!("k-means cluster {j} emptied; reseeding at point {far}");
                centers.row_mut(j).assign(&points.row(far));
                assigned[far].1 = 0.0;
            }
        }
        previous = Some(labels);
    }
    let assigned = assign(points, &centers);
    let final_cost = weighted_cost(&assigned, weights);
    if previous.is_some() {
        wcss_history.push(final_cost);
    }
    Ok(KMeans { centers, assignments: assigned.into_iter().map(|a| a.0).collect(), wcss_history })
}

fn weighted_cost(assigned: &[(usize, f64)], weights: &[f64]) -> f64 {
    assigned.iter().zip(weights).map(|(a, w)| a.1 * w).sum()
}

/// Distinct colors in first-seen order, their multiplicities, and each pixel's color id.
fn distinct_colors(image: &RgbImage) -> (Vec<[u8; 3]>, Vec<usize>, Vec<usize>) {
    let mut ids: HashMap<[u8; 3], usize> = HashMap::new();
    let mut colors = Vec::new();
    let mut counts = Vec::new();
    let mut pixel_ids = Vec::with_capacity((image.width() * image.height()) as usize);
    for px in image.pixels() {
        let id = *ids.entry(px.0).or_insert_with(|| {
            colors.push(px.0);
            counts.push(0);
            colors.len() - 1
        });
        counts[id] += 1;
        pixel_ids.push(id);
    }
    (colors, counts, pixel_ids)
}

/// Compresses `image` to at most `k` colors with k-means over its RGB triples.
///
/// Pixels sharing a color are clustered together, so k-means runs on distinct colors
/// weighted by multiplicity. `k` above the distinct-color count is clamped with a warning.
pub fn extract_palette(image: &RgbImage, k: usize, iters: usize, seed: u64) -> Result<(Palette, IndexedImage)> {
    if image.width() == 0 || image.height() == 0 {
        return Err(Error::InvalidParameter("image has no pixels".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("palette size k must be >= 1".into()));
    }
    let (colors, multiplicity, pixel_ids) = distinct_colors(image);
    let k = if k > colors.len() {
        log::warn!("k = {k} exceeds the {} distinct colors of the image; clamping", colors.len());
        colors.len()
    } else {
        k
    };
    let points = Array2::from_shape_fn((colors.len(), 3), |(i, c)| f64::from(colors[i][c]));
    let weights: Vec<f64> = multiplicity.iter().map(|&m| m as f64).collect();
    let mut km = kmeans(&points, &weights, k, iters, seed)?;
    km.centers.mapv_inplace(|v| v.clamp(0.0, 255.0));
    let mut counts = vec![0usize; k];
    for (&label, &m) in km.assignments.iter().zip(&multiplicity) {
        counts[label] += m;
    }
    let indices = pixel_ids.iter().map(|&id| km.assignments[id]).collect();
    let palette = Palette::new(km.centers, counts)?;
    Ok((palette, IndexedImage { width: image.width(), height: image.height(), indices }))
}

/// Palette size, Lloyd iterations and flow settings of a color transfer.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    pub k: usize,
    pub kmeans_iters: usize,
    /// The flow seed also seeds both k-means runs.
    pub flow: FlowConfig,
}

#[derive(Debug, Clone)]
pub struct Transfer {
    pub image: RgbImage,
    pub source_palette: Palette,
    pub target_palette: Palette,
    /// Transported source centers after rounding to `{0..255}`.
    pub transferred: Array2<u8>,
    pub trace: FlowTrace,
}

impl Transfer {
    /// Transported palette as a uniform measure, for scoring against the target palette.
    pub fn transferred_measure(&self) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::uniform(self.transferred.mapv(f64::from))
    }
}

/// Recolors `source` with the palette of `target`.
///
/// If either image has fewer than `k` distinct colors, both palettes are built with the
/// smaller size so the flow runs between measures of equal size.
pub fn transfer_colors(source: &RgbImage, target: &RgbImage, cfg: &TransferConfig) -> Result<Transfer> {
    if cfg.k == 0 || cfg.k > MAX_PALETTE_SIZE {
        return Err(Error::InvalidConfig(format!("palette size k must be in 1..={MAX_PALETTE_SIZE}, got {}", cfg.k)));
    }
    cfg.flow.validate()?;
    let seed = cfg.flow.seed;
    let (mut src_palette, mut src_index) = extract_palette(source, cfg.k, cfg.kmeans_iters, seed)?;
    let (mut tgt_palette, _) = extract_palette(target, cfg.k, cfg.kmeans_iters, seed)?;
    if src_palette.len() > tgt_palette.len() {
        (src_palette, src_index) = extract_palette(source, tgt_palette.len(), cfg.kmeans_iters, seed)?;
    } else if tgt_palette.len() > src_palette.len() {
        tgt_palette = extract_palette(target, src_palette.len(), cfg.kmeans_iters, seed)?.0;
    }
    let trace = run_flow(&src_palette.to_measure()?, &tgt_palette.to_measure()?, &cfg.flow)?;
    let transferred = trace.final_cloud.supports().mapv(round_channel);
    let image = src_index.render(&transferred)?;
    Ok(Transfer { image, source_palette: src_palette, target_palette: tgt_palette, transferred, trace })
}

/// Reads an image as 8-bit RGB, dropping any alpha channel.
pub fn read_rgb<P: AsRef<Path>>(path: P) -> Result<RgbImage> {
    Ok(image::open(path.as_ref())?.to_rgb8())
}

pub fn write_png<P: AsRef<Path>>(image: &RgbImage, path: P) -> Result<()> {
    image.save_with_format(path.as_ref(), ImageFormat::Png)?;
    Ok(())
}

/// Largest per-channel gap between each pixel and its palette center.
pub fn quantization_error(image: &RgbImage, palette: &Palette, indexed: &IndexedImage) -> f64 {
    image
        .pixels()
        .zip(&indexed.indices)
        .flat_map(|(px, &idx)| (0..3).map(move |c| (f64::from(px.0[c]) - palette.centers[[idx, c]]).abs()))
        .fold(0.0, f64::max)
}
