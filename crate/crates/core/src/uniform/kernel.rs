//! Boundary-corrected Epanechnikov kernel betting.
//!
//! Near the edges of `[0, 1]` the estimator switches to the smooth optimum
//! boundary kernels of the Epanechnikov family and applies the
//! multiplicative non-negativity correction `f_bar * exp(f_hat / f_bar - 1)`,
//! where `f_bar` is the cut-and-normalize estimate. The estimate is tabulated
//! on `0, 0.01, ..., 1`, rescaled to unit trapezoidal integral and evaluated
//! by linear interpolation. The bandwidth is the two-stage direct plug-in
//! rule computed from linearly binned data.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::strategy::{floor_mix, Lagged, ResidueBet};

use super::{check_unit, is_interior};

pub const DENSITY_GRID_POINTS: usize = 101;
const BIN_POINTS: usize = 401;
const WARMUP: usize = 10;

fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Boundary kernel on `[-1, q]` for `0 <= q < 1`.
fn boundary_kernel(u: f64, q: f64) -> f64 {
    if u < -1.0 || u > q {
        return 0.0;
    }
    let r = (1.0 - q) / (1.0 + q);
    6.0 * (1.0 + u) * (q - u) / (1.0 + q).powi(3)
        * (1.0 + 5.0 * r * r + 10.0 * (1.0 - q) / ((1.0 + q) * (1.0 + q)) * u)
}

/// `int_{-1}^{q} K(u) du` for the Epanechnikov kernel.
fn epanechnikov_mass(q: f64) -> f64 {
    let q = q.min(1.0);
    0.5 + 0.75 * q - 0.25 * q * q * q
}

/// Raw (unnormalized) non-negative estimate at `x` from sorted samples.
fn raw_density(sorted: &[f64], x: f64, b: f64) -> f64 {
    let n = sorted.len() as f64;
    let lo = sorted.partition_point(|&s| s < x - b);
    let hi = sorted.partition_point(|&s| s <= x + b);
    let window = &sorted[lo..hi];
    let (ql, qr) = (x / b, (1.0 - x) / b);
    if ql >= 1.0 && qr >= 1.0 {
        return window.iter().map(|&s| epanechnikov((x - s) / b)).sum::<f64>() / (n * b);
    }
    // Reflect so the nearer boundary sits at the left.
    let (q, sign) = if ql <= qr { (ql, 1.0) } else { (qr, -1.0) };
    let mut corrected = 0.0;
    let mut cut = 0.0;
    for &s in window {
        let u = sign * (x - s) / b;
        corrected += boundary_kernel(u, q);
        if u <= q {
            cut += epanechnikov(u);
        }
    }
    let corrected = corrected / (n * b);
    let cut = cut / (n * b * epanechnikov_mass(q));
    if cut <= 0.0 {
        0.0
    } else {
        cut * (corrected / cut - 1.0).exp()
    }
}

/// Linearly binned sample on a fixed grid over `[0, 1]`, with the
/// autocorrelation of the bin counts maintained incrementally.
#[derive(Debug, Clone)]
pub struct BinnedSample {
    counts: Vec<f64>,
    autocorr: Vec<f64>,
    sorted: Vec<f64>,
    sum: f64,
    sum_sq: f64,
}

impl Default for BinnedSample {
    fn default() -> Self {
        Self {
            counts: vec![0.0; BIN_POINTS],
            autocorr: vec![0.0; BIN_POINTS],
            sorted: Vec::new(),
            sum: 0.0,
            sum_sq: 0.0,
        }
    }
}

impl BinnedSample {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut b = Self::default();
        for &z in samples {
            b.push(z);
        }
        b
    }

    pub fn push(&mut self, x: f64) {
        let pos = x.clamp(0.0, 1.0) * (BIN_POINTS - 1) as f64;
        let j = (pos.floor() as usize).min(BIN_POINTS - 2);
        let frac = pos - j as f64;
        let (w0, w1) = (1.0 - frac, frac);
        let c = &self.counts;
        let m = BIN_POINTS;
        for d in 0..m {
            let mut delta = 0.0;
            if j + d < m {
                delta += w0 * c[j + d];
            }
            if j + 1 + d < m {
                delta += w1 * c[j + 1 + d];
            }
            if d <= j {
                delta += w0 * c[j - d];
            }
            if d <= j + 1 {
                delta += w1 * c[j + 1 - d];
            }
            self.autocorr[d] += delta;
        }
        self.autocorr[0] += w0 * w0 + w1 * w1;
        self.autocorr[1] += w0 * w1;
        self.counts[j] += w0;
        self.counts[j + 1] += w1;
        let at = self.sorted.partition_point(|&s| s < x);
        self.sorted.insert(at, x);
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    fn scale(&self) -> f64 {
        let n = self.len() as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        let sd = var.max(0.0).sqrt();
        let iqr = quantile7(&self.sorted, 0.75) - quantile7(&self.sorted, 0.25);
        sd.min(iqr / 1.349)
    }

    /// Binned estimate of the density functional `psi_r` with a Gaussian
    /// kernel of bandwidth `g`, `r` in {4, 6}.
    fn psi(&self, r: u32, g: f64) -> f64 {
        let n = self.len() as f64;
        let delta = 1.0 / (BIN_POINTS - 1) as f64;
        let norm = 1.0 / (2.0 * PI).sqrt();
        let deriv = |x: f64| {
            let x2 = x * x;
            let hermite = match r {
                4 => x2 * x2 - 6.0 * x2 + 3.0,
                6 => x2 * x2 * x2 - 15.0 * x2 * x2 + 45.0 * x2 - 15.0,
                _ => unreachable!(),
            };
            hermite * norm * (-0.5 * x2).exp()
        };
        let mut total = self.autocorr[0] * deriv(0.0);
        for d in 1..BIN_POINTS {
            let x = d as f64 * delta / g;
            if x > 12.0 {
                break;
            }
            total += 2.0 * self.autocorr[d] * deriv(x);
        }
        total / (n * n * g.powi(r as i32 + 1))
    }

    /// Two-stage direct plug-in bandwidth for the Epanechnikov kernel.
    pub fn plugin_bandwidth(&self) -> Option<f64> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let scale = self.scale();
        if !(scale > 0.0) {
            return None;
        }
        let psi8 = 105.0 / (32.0 * PI.sqrt() * scale.powi(9));
        let g1 = (30.0 / ((2.0 * PI).sqrt() * psi8 * nf)).powf(1.0 / 9.0);
        let psi6 = self.psi(6, g1);
        if !(psi6 < 0.0) {
            return None;
        }
        let g2 = (-6.0 / ((2.0 * PI).sqrt() * psi6 * nf)).powf(1.0 / 7.0);
        let psi4 = self.psi(4, g2);
        if !(psi4 > 0.0) {
            return None;
        }
        let h = (15.0 / (psi4 * nf)).powf(0.2);
        h.is_finite().then_some(h)
    }
}

/// Sample quantile, linear interpolation between order statistics.
fn quantile7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Plug-in bandwidth of a sample in `[0, 1]`.
pub fn plugin_bandwidth(samples: &[f64]) -> Result<f64> {
    check_unit(samples)?;
    BinnedSample::from_samples(samples)
        .plugin_bandwidth()
        .ok_or_else(|| Error::InsufficientData("bandwidth estimation failed".into()))
}

/// Tabulated, renormalized boundary-corrected density estimate.
#[derive(Debug, Clone)]
pub struct BoundaryKde {
    bandwidth: f64,
    table: Vec<f64>,
}

impl BoundaryKde {
    /// Fit with the plug-in bandwidth; boundary values are dropped.
    pub fn fit(samples: &[f64]) -> Result<Self> {
        check_unit(samples)?;
        let interior: Vec<f64> = samples.iter().copied().filter(|&z| is_interior(z)).collect();
        let binned = BinnedSample::from_samples(&interior);
        let b = binned
            .plugin_bandwidth()
            .ok_or_else(|| Error::InsufficientData("bandwidth estimation failed".into()))?;
        Self::with_bandwidth(binned.sorted(), b)
    }

    /// Fit on sorted samples with a given bandwidth.
    pub fn with_bandwidth(sorted: &[f64], bandwidth: f64) -> Result<Self> {
        if sorted.is_empty() || !(bandwidth > 0.0) {
            return Err(Error::InsufficientData("empty sample or non-positive bandwidth".into()));
        }
        let step = 1.0 / (DENSITY_GRID_POINTS - 1) as f64;
        let mut table: Vec<f64> = (0..DENSITY_GRID_POINTS)
            .map(|i| raw_density(sorted, i as f64 * step, bandwidth))
            .collect();
        let integral = trapezoid(&table);
        if !(integral > 0.0) || !integral.is_finite() {
            return Err(Error::InsufficientData("density estimate vanishes on the grid".into()));
        }
        table.iter_mut().for_each(|v| *v /= integral);
        Ok(Self { bandwidth, table })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Trapezoidal integral of the table (1 up to rounding).
    pub fn integral(&self) -> f64 {
        trapezoid(&self.table)
    }

    /// Linear interpolation of the table at `z` in `[0, 1]`.
    pub fn eval(&self, z: f64) -> f64 {
        let pos = z.clamp(0.0, 1.0) * (DENSITY_GRID_POINTS - 1) as f64;
        let i = (pos.floor() as usize).min(DENSITY_GRID_POINTS - 2);
        let frac = pos - i as f64;
        (1.0 - frac) * self.table[i] + frac * self.table[i + 1]
    }
}

fn trapezoid(table: &[f64]) -> f64 {
    let step = 1.0 / (table.len() - 1) as f64;
    let inner: f64 = table[1..table.len() - 1].iter().sum();
    step * (inner + 0.5 * (table[0] + table[table.len() - 1]))
}

/// Per-residue state of the kernel strategy.
#[derive(Debug, Clone)]
pub struct KernelBet {
    warmup: usize,
    consumed: usize,
    sample: BinnedSample,
    kde: Option<BoundaryKde>,
    stale: bool,
}

impl Default for KernelBet {
    fn default() -> Self {
        Self::with_warmup(WARMUP)
    }
}

impl KernelBet {
    pub fn with_warmup(warmup: usize) -> Self {
        Self { warmup, consumed: 0, sample: BinnedSample::default(), kde: None, stale: false }
    }

    pub fn current_density(&mut self) -> Option<&BoundaryKde> {
        if self.stale {
            self.kde = self
                .sample
                .plugin_bandwidth()
                .and_then(|b| BoundaryKde::with_bandwidth(self.sample.sorted(), b).ok());
            self.stale = false;
        }
        self.kde.as_ref()
    }
}

impl ResidueBet for KernelBet {
    type Obs = f64;

    fn bet(&mut self, t: usize, z: f64) -> f64 {
        let e = if self.consumed < self.warmup || !is_interior(z) {
            1.0
        } else {
            self.current_density().map_or(1.0, |kde| floor_mix(t, kde.eval(z)))
        };
        self.consumed += 1;
        if is_interior(z) {
            self.sample.push(z);
            self.stale = true;
        }
        e
    }
}

/// Kernel-density e-values at lag `h`.
pub fn kernel_betting_stream(zs: &[f64], lag: usize) -> Result<Vec<f64>> {
    check_unit(zs)?;
    Ok(Lagged::new(lag, KernelBet::default)?.run(zs.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let n = 2000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn boundary_kernels_have_unit_mass_and_zero_mean() {
        for &q in &[0.0, 0.1, 0.37, 0.5, 0.9, 0.999] {
            let mass = simpson(|u| boundary_kernel(u, q), -1.0, q);
            let mean = simpson(|u| u * boundary_kernel(u, q), -1.0, q);
            assert!((mass - 1.0).abs() < 1e-9, "q={q}: mass {mass}");
            assert!(mean.abs() < 1e-9, "q={q}: mean {mean}");
        }
        // at q = 1 the interior kernel is recovered
        for &u in &[-0.8, 0.0, 0.4] {
            assert!((boundary_kernel(u, 1.0 - 1e-12) - epanechnikov(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn incremental_autocorrelation_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let b = BinnedSample::from_samples(&xs);
        for d in [0usize, 1, 2, 17, 200, 400] {
            let direct: f64 =
                (0..BIN_POINTS - d).map(|i| b.counts[i] * b.counts[i + d]).sum();
            assert!((direct - b.autocorr[d]).abs() < 1e-9 * direct.max(1.0), "lag {d}");
        }
        assert!((b.counts.iter().sum::<f64>() - 50.0).abs() < 1e-12);
    }

    /// Exact (unbinned) psi functional as an oracle for the binned estimate.
    #[test]
    fn binned_psi_close_to_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..200).map(|_| rng.random::<f64>().powf(1.5)).collect();
        let b = BinnedSample::from_samples(&xs);
        let g = 0.08;
        let exact = {
            let mut s = 0.0;
            for &a in &xs {
                for &c in &xs {
                    let x = (a - c) / g;
                    let x2 = x * x;
                    s += (x2 * x2 - 6.0 * x2 + 3.0) * (-0.5 * x2).exp() / (2.0 * PI).sqrt();
                }
            }
            s / (200.0 * 200.0 * g.powi(5))
        };
        let binned = b.psi(4, g);
        assert!((binned - exact).abs() < 0.02 * exact.abs(), "{binned} vs {exact}");
    }

    #[test]
    fn bandwidth_reasonable_for_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let h = plugin_bandwidth(&xs).unwrap();
        assert!(h > 0.05 && h < 0.6, "h = {h}");
        assert!(plugin_bandwidth(&[0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn table_is_nonnegative_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [12, 40, 150] {
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(2)).collect();
            let kde = BoundaryKde::fit(&xs).unwrap();
            assert!(kde.table().iter().all(|&v| v >= 0.0));
            assert!((kde.integral() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn stream_warmup_and_mixing_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zs: Vec<f64> = (0..60).map(|_| 0.5 * rng.random::<f64>()).collect();
        let es = kernel_betting_stream(&zs, 1).unwrap();
        assert!(es[..10].iter().all(|&e| e == 1.0));
        for (i, &e) in es.iter().enumerate().skip(10) {
            assert!(e >= 1.0 / (i + 1) as f64 - 1e-15);
        }
    }
}
