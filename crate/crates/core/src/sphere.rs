//! Random directions and linear algebra on the unit sphere.
//!
//! All samplers draw from an explicit [`RngStream`]. A stream is identified by
//! `(seed, stream_id)` and is backed by ChaCha8, so a given pair reproduces the
//! same draws on every platform. Independent sub-computations (projections,
//! chains, Euler steps) use [`RngStream::substream`] with their index as id.

use ndarray::{Array1, ArrayView1};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::measure::Direction;

/// Maximum number of proposals the vMF rejection loop may draw.
pub const VMF_MAX_PROPOSALS: usize = 1_000_000;

/// Below this norm a residual vector is treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Deterministic random stream keyed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream for child computation `id`; depends only on this stream's key, not its state.
    pub fn substream(&self, id: u64) -> RngStream {
        let derived = splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_F42D_4C95_7F2D)));
        RngStream::new(derived, id)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform01(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    fn normal_vector(&mut self, d: usize) -> Array1<f64> {
        Array1::from_shape_fn(d, |_| self.standard_normal())
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// von Mises-Fisher parameters: mean direction and concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfParams {
    location: Direction,
    concentration: f64,
}

impl VmfParams {
    pub fn new(location: Direction, concentration: f64) -> Result<Self> {
        if !(concentration >= 0.0) || !concentration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "vMF concentration must be finite and >= 0, got {concentration}"
            )));
        }
        Ok(Self { location, concentration })
    }

    pub fn location(&self) -> &Direction {
        &self.location
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }
}

#[inline]
fn norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

fn normalize(v: Array1<f64>, nrm: f64) -> Direction {
    Direction::from_normalized(v.mapv(|x| x / nrm))
}

/// `v / ||v||_2`.
pub fn retract_to_sphere(v: &Array1<f64>) -> Result<Direction> {
    let nrm = norm(v.view());
    if !nrm.is_finite() {
        return Err(Error::Numerical("non-finite vector cannot be retracted to the sphere".into()));
    }
    if nrm == 0.0 || v.is_empty() {
        return Err(Error::DegenerateInput("cannot normalize the zero vector"));
    }
    Ok(normalize(v.clone(), nrm))
}

/// Uniform direction on S^{d-1}: a standard Gaussian vector normalized.
pub fn sample_uniform_sphere(d: usize, rng: &mut RngStream) -> Result<Direction> {
    if d == 0 {
        return Err(Error::InvalidDimension(0, "the sphere needs d >= 1"));
    }
    loop {
        let g = rng.normal_vector(d);
        let nrm = norm(g.view());
        if nrm > 0.0 {
            return Ok(normalize(g, nrm));
        }
    }
}

fn sample_beta_symmetric(shape: f64, rng: &mut RngStream) -> f64 {
    // Beta(a, a) as X / (X + Y) with X, Y ~ Gamma(a, 1).
    let gamma = Gamma::new(shape, 1.0).expect("shape is positive");
    loop {
        let x: f64 = gamma.sample(&mut rng.rng);
        let y: f64 = gamma.sample(&mut rng.rng);
        let s = x + y;
        if s > 0.0 {
            return x / s;
        }
    }
}

/// Draws from vMF(location, concentration) on S^{d-1} by Wood's rejection scheme.
///
/// The first coordinate `omega` of a sample around `e_1` is found by rejection from
/// a Beta((d-1)/2, (d-1)/2) proposal, the remaining coordinates are a uniform
/// direction on S^{d-2} scaled by `sqrt(1 - omega^2)`, and a Householder
/// reflection carries `e_1` onto the location. Requires `d >= 2`.
pub fn sample_vmf(params: &VmfParams, rng: &mut RngStream) -> Result<Direction> {
    let d = params.location.dim();
    if d < 2 {
        return Err(Error::InvalidDimension(d, "vMF sampling needs d >= 2"));
    }
    let kappa = params.concentration;
    if kappa == 0.0 {
        return sample_uniform_sphere(d, rng);
    }

    let v = sample_uniform_sphere(d - 1, rng)?;

    let dm1 = (d - 1) as f64;
    let root = (4.0 * kappa * kappa + dm1 * dm1).sqrt();
    // (-2k + root) / (d-1), rewritten to avoid cancellation at large k.
    let b = dm1 / (2.0 * kappa + root);
    let a = (dm1 + 2.0 * kappa + root) / 4.0;
    let m = 4.0 * a * b / (1.0 + b) - dm1 * dm1.ln();

    let mut omega = None;
    for _ in 0..VMF_MAX_PROPOSALS {
        let psi = sample_beta_symmetric(0.5 * dm1, rng);
        let denom = 1.0 - (1.0 - b) * psi;
        let w = (1.0 - (1.0 + b) * psi) / denom;
        let t = 2.0 * a * b / denom;
        let u = rng.uniform01();
        if dm1 * t.ln() - t + m >= u.ln() {
            omega = Some(w);
            break;
        }
    }
    let omega = omega.ok_or_else(|| {
        Error::Numerical(format!(
            "vMF rejection sampler exceeded {VMF_MAX_PROPOSALS} proposals (d = {d}, kappa = {kappa})"
        ))
    })?
    .clamp(-1.0, 1.0);

    let radial = (1.0 - omega * omega).max(0.0).sqrt();
    let mut h = Array1::zeros(d);
    h[0] = omega;
    for (dst, src) in h.iter_mut().skip(1).zip(v.coords().iter()) {
        *dst = radial * src;
    }

    // Householder U = I - 2 u u^T with u = (e_1 - eps) / ||e_1 - eps||; identity when eps = e_1.
    let mut diff = params.location.coords().mapv(|x| -x);
    diff[0] += 1.0;
    let dn = norm(diff.view());
    if dn >= DEGENERATE_NORM {
        let u = diff / dn;
        let proj = u.dot(&h);
        h.scaled_add(-2.0 * proj, &u);
    }
    retract_to_sphere(&h)
}

/// Index of the first vector that became (near-)dependent during Gram-Schmidt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DependentVector(pub usize);

pub(crate) fn gram_schmidt_raw(
    vectors: &[Array1<f64>],
) -> std::result::Result<Vec<Direction>, DependentVector> {
    let mut out: Vec<Array1<f64>> = Vec::with_capacity(vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        for q in &out {
            let coef = q.dot(&w) / q.dot(q);
            w.scaled_add(-coef, q);
        }
        let nrm = norm(w.view());
        if !(nrm >= DEGENERATE_NORM) {
            return Err(DependentVector(k));
        }
        out.push(w.mapv(|x| x / nrm));
    }
    Ok(out.into_iter().map(Direction::from_normalized).collect())
}

/// Orthonormalizes `vectors` in order (modified Gram-Schmidt).
pub fn gram_schmidt(vectors: &[Array1<f64>]) -> Result<Vec<Direction>> {
    let d = vectors.first().map(|v| v.len()).unwrap_or(0);
    if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
    }
    if vectors.len() > d {
        return Err(Error::InvalidParameter(format!(
            "cannot orthonormalize {} vectors in dimension {d}",
            vectors.len()
        )));
    }
    gram_schmidt_raw(vectors).map_err(|_| Error::DegenerateInput("linearly dependent input to Gram-Schmidt"))
}

/// K orthonormal directions, uniform on the Stiefel manifold V_K(R^d).
pub fn sample_stiefel_uniform(d: usize, k: usize, rng: &mut RngStream) -> Result<Vec<Direction>> {
    if d == 0 {
        return Err(Error::InvalidDimension(0, "the sphere needs d >= 1"));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!("block size K = {k} must satisfy 1 <= K <= d = {d}")));
    }
    let mut vectors: Vec<Array1<f64>> = (0..k).map(|_| rng.normal_vector(d)).collect();
    loop {
        match gram_schmidt_raw(&vectors) {
            Ok(block) => return Ok(block),
            Err(DependentVector(i)) => vectors[i] = rng.normal_vector(d),
        }
    }
}

/// Projects `theta_new` onto the orthogonal complement of `theta_prev` and normalizes.
///
/// A residual below [`DEGENERATE_NORM`] yields [`Error::DegenerateInput`]; callers
/// draw a fresh `theta_new` and retry.
pub fn project_orthocomplement(theta_new: &Array1<f64>, theta_prev: &Direction) -> Result<Direction> {
    let prev = theta_prev.coords();
    if prev.len() != theta_new.len() {
        return Err(Error::DimensionMismatch { expected: prev.len(), found: theta_new.len() });
    }
    let coef = prev.dot(theta_new) / prev.dot(prev);
    let mut w = theta_new.clone();
    w.scaled_add(-coef, prev);
    let nrm = norm(w.view());
    if !(nrm >= DEGENERATE_NORM) {
        return Err(Error::DegenerateInput("new direction is parallel to the previous one"));
    }
    Ok(normalize(w, nrm))
}
