use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::simulate::{Observable, TrajectoryEnsemble};
use crate::{OracleError, Result};

/// Minimum number of Welch segments for an estimate.
pub const MIN_SEGMENTS: usize = 8;

/// Running sums of Hann-windowed periodograms (50% overlap) for one record
/// or a merged set of records.
///
/// Normalization: P_k = dt·|FFT(w·x)|²/Σw², a two-sided density reported on
/// ω_k = 2πk/(N·dt) ≥ 0, so white noise of height ½ reads ½.
#[derive(Clone)]
pub struct Welch {
    n: usize,
    dt: f64,
    window: Arc<Vec<f64>>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    pending: Vec<f64>,
    held: Option<Vec<f64>>,
    scratch: Vec<Complex64>,
    sums: Vec<f64>,
    sumsq: Vec<f64>,
    segments: usize,
    sample_sum: f64,
    sample_sumsq: f64,
    samples: usize,
}

impl std::fmt::Debug for Welch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Welch")
            .field("segment_len", &self.n)
            .field("dt", &self.dt)
            .field("segments", &self.segments)
            .finish()
    }
}

impl Welch {
    pub fn new(segment_len: usize, dt: f64) -> Self {
        let n = segment_len;
        let window: Vec<f64> = (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        Self {
            n,
            dt,
            window: Arc::new(window),
            window_power,
            fft: FftPlanner::new().plan_fft_forward(n),
            pending: Vec::with_capacity(n),
            held: None,
            scratch: vec![Complex64::new(0.0, 0.0); n],
            sums: vec![0.0; n / 2 + 1],
            sumsq: vec![0.0; n / 2 + 1],
            segments: 0,
            sample_sum: 0.0,
            sample_sumsq: 0.0,
            samples: 0,
        }
    }

    /// Fresh accumulator sharing this one's window and FFT plan.
    pub fn empty_like(&self) -> Self {
        Self {
            n: self.n,
            dt: self.dt,
            window: Arc::clone(&self.window),
            window_power: self.window_power,
            fft: Arc::clone(&self.fft),
            pending: Vec::with_capacity(self.n),
            held: None,
            scratch: vec![Complex64::new(0.0, 0.0); self.n],
            sums: vec![0.0; self.n / 2 + 1],
            sumsq: vec![0.0; self.n / 2 + 1],
            segments: 0,
            sample_sum: 0.0,
            sample_sumsq: 0.0,
            samples: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.sample_sum += x;
        self.sample_sumsq += x * x;
        self.samples += 1;
        self.pending.push(x);
        if self.pending.len() == self.n {
            let segment = self.pending.clone();
            self.pending.drain(..self.n / 2);
            match self.held.take() {
                None => self.held = Some(segment),
                Some(first) => self.transform_pair(&first, Some(&segment)),
            }
        }
    }

    /// Ends the current record: flushes a held segment and drops the
    /// incomplete tail. Segments never straddle two records.
    pub fn end_record(&mut self) {
        if let Some(first) = self.held.take() {
            self.transform_pair(&first, None);
        }
        self.pending.clear();
    }

    // Two real segments share one complex FFT: a in the real part, b in
    // the imaginary part.
    fn transform_pair(&mut self, a: &[f64], b: Option<&[f64]>) {
        let n = self.n;
        for i in 0..n {
            let w = self.window[i];
            self.scratch[i] = Complex64::new(w * a[i], b.map_or(0.0, |b| w * b[i]));
        }
        self.fft.process(&mut self.scratch);
        let norm = self.dt / self.window_power;
        for k in 0..=n / 2 {
            let zk = self.scratch[k];
            let zc = self.scratch[(n - k) % n].conj();
            let fa = (zk + zc) * 0.5;
            let pa = fa.norm_sqr() * norm;
            self.sums[k] += pa;
            self.sumsq[k] += pa * pa;
            if b.is_some() {
                let fb = (zk - zc) * Complex64::new(0.0, -0.5);
                let pb = fb.norm_sqr() * norm;
                self.sums[k] += pb;
                self.sumsq[k] += pb * pb;
            }
        }
        self.segments += if b.is_some() { 2 } else { 1 };
    }

    pub fn merge(mut self, other: &Welch) -> Self {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *a += b;
        }
        self.segments += other.segments;
        self.sample_sum += other.sample_sum;
        self.sample_sumsq += other.sample_sumsq;
        self.samples += other.samples;
        self
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn finish(&self) -> Result<PsdEstimate> {
        if self.segments < MIN_SEGMENTS {
            let hop = self.n / 2;
            return Err(OracleError::TooFewSegments {
                available: self.segments,
                required: MIN_SEGMENTS,
                hint_duration: (self.n + (MIN_SEGMENTS - 1) * hop) as f64 * self.dt,
            });
        }
        let k = self.segments as f64;
        let psd: Vec<f64> = self.sums.iter().map(|s| s / k).collect();
        let stderr = self
            .sumsq
            .iter()
            .zip(&psd)
            .map(|(sq, m)| ((sq / k - m * m).max(0.0) / (k - 1.0)).sqrt())
            .collect();
        let omega = (0..=self.n / 2)
            .map(|i| 2.0 * PI * i as f64 / (self.n as f64 * self.dt))
            .collect();
        let mean = self.sample_sum / self.samples as f64;
        Ok(PsdEstimate {
            omega,
            psd,
            stderr,
            n_segments: self.segments,
            segment_len: self.n,
            dt: self.dt,
            variance: self.sample_sumsq / self.samples as f64 - mean * mean,
        })
    }
}

/// Pairwise (tree) reduction in index order, so the floating-point result
/// does not depend on how the parts were scheduled.
pub(crate) fn pairwise_merge(mut parts: Vec<Welch>) -> Option<Welch> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(&b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    /// Bin frequencies 2πk/(N·dt), rad/s, k = 0..=N/2.
    pub omega: Vec<f64>,
    pub psd: Vec<f64>,
    /// Standard error of each bin from the segment scatter.
    pub stderr: Vec<f64>,
    pub n_segments: usize,
    pub segment_len: usize,
    pub dt: f64,
    /// Sample variance of the record.
    pub variance: f64,
}

impl PsdEstimate {
    /// ∫ PSD dω/2π over both signs of ω.
    pub fn integrated_power(&self) -> f64 {
        let n = self.psd.len();
        let dw = self.omega[1] - self.omega[0];
        let inner: f64 = self.psd[1..n - 1].iter().sum();
        (self.psd[0] + 2.0 * inner + self.psd[n - 1]) * dw / (2.0 * PI)
    }

    pub fn bin_width(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }
}

/// Welch estimate for one recorded observable across all trajectories.
pub fn estimate_psd(ensemble: &TrajectoryEnsemble, observable: Observable) -> Result<PsdEstimate> {
    let template = Welch::new(ensemble.config.segment_len, ensemble.config.dt);
    let parts = ensemble
        .trajectories
        .iter()
        .map(|t| {
            let series = t
                .get(observable)
                .ok_or_else(|| OracleError::Config(format!("observable {} was not recorded", observable.name())))?;
            let mut w = template.empty_like();
            for &x in series {
                w.push(x);
            }
            w.end_record();
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    let merged = pairwise_merge(parts).unwrap_or(template);
    merged.finish()
}
