//! Zero-phase Butterworth low-pass filtering of pose sequences.
//!
//! The digital filter is designed from the analog Butterworth prototype via
//! the bilinear transform with frequency prewarping. Application is
//! forward-backward (filter, reverse, filter, reverse) so the result has no
//! phase lag and the effective magnitude response is |H|^2. Edges are handled
//! with odd reflective padding of length 3 * order, and each pass starts from
//! steady-state initial conditions, so constant channels pass through with
//! unit gain to rounding error.

use crate::error::{Error, Result};
use crate::skeleton::{PoseFrame, PoseSequence};

/// Complex arithmetic just big enough for pole manipulation.
#[derive(Debug, Clone, Copy)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }

    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }

    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    fn div(self, o: Self) -> Self {
        let d = o.re * o.re + o.im * o.im;
        Self::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }

    fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }
}

/// Digital low-pass Butterworth coefficients `(b, a)` with `a[0] == 1`,
/// both of length `order + 1`.
pub fn design_lowpass(cutoff_hz: f64, fs: f64, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "filter order must be a positive even number, got {order}"
        )));
    }
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
        return Err(Error::NyquistViolation { cutoff_hz, fps: fs });
    }

    // Analog prototype poles on the unit circle, scaled by the prewarped
    // cutoff, then mapped with the bilinear transform s = 2*fs*(z-1)/(z+1).
    let warped = 2.0 * fs * (std::f64::consts::PI * cutoff_hz / fs).tan();
    let k = 2.0 * fs;
    let mut z_poles = Vec::with_capacity(order);
    let mut gain = Complex::new(1.0, 0.0);
    for i in 0..order {
        let theta =
            std::f64::consts::PI * (2.0 * i as f64 + order as f64 + 1.0) / (2.0 * order as f64);
        let pole = Complex::new(theta.cos(), theta.sin()).scale(warped);
        let denom = Complex::new(k, 0.0).sub(pole);
        z_poles.push(Complex::new(k, 0.0).add(pole).div(denom));
        gain = gain.mul(Complex::new(warped, 0.0).div(denom));
    }

    let a = poly_from_roots(&z_poles);
    // All zeros at z = -1; numerator is gain * (z + 1)^order.
    let minus_one = vec![Complex::new(-1.0, 0.0); order];
    let b: Vec<f64> = poly_from_roots(&minus_one)
        .into_iter()
        .map(|c| c * gain.re)
        .collect();
    Ok((b, a))
}

/// Expands a monic polynomial from its roots; conjugate-paired roots make the
/// result real.
fn poly_from_roots(roots: &[Complex]) -> Vec<f64> {
    let mut coeffs = vec![Complex::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] = next[i].add(*c);
            next[i + 1] = next[i + 1].sub(c.mul(*r));
        }
        coeffs = next;
    }
    coeffs.iter().map(|c| c.re).collect()
}

/// Steady-state filter state for a unit-amplitude step, following the
/// companion-matrix construction: solve (I - A^T) zi = B with
/// B[j] = b[j+1] - a[j+1] * b[0].
fn steady_state(b: &[f64], a: &[f64]) -> Vec<f64> {
    let n = a.len() - 1;
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[0] = a[i + 1];
        if i + 1 < n {
            row[i + 1] = -1.0;
        }
        row[i] += 1.0;
    }
    let mut rhs: Vec<f64> = (0..n).map(|j| b[j + 1] - a[j + 1] * b[0]).collect();
    solve_linear(&mut m, &mut rhs);
    rhs
}

/// In-place Gaussian elimination with partial pivoting; systems here are at
/// most order x order.
#[allow(clippy::needless_range_loop)]
fn solve_linear(m: &mut [Vec<f64>], rhs: &mut [f64]) {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty system");
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let diag = m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / diag;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = rhs[col];
        for k in col + 1..n {
            v -= m[col][k] * rhs[k];
        }
        rhs[col] = v / m[col][col];
    }
}

/// Direct-form II transposed filtering with explicit initial state.
fn lfilter(b: &[f64], a: &[f64], x: &[f64], zi: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut z = zi.to_vec();
    let mut y = Vec::with_capacity(x.len());
    for &xv in x {
        let yv = b[0] * xv + z[0];
        for j in 0..n - 2 {
            z[j] = b[j + 1] * xv + z[j + 1] - a[j + 1] * yv;
        }
        z[n - 2] = b[n - 1] * xv - a[n - 1] * yv;
        y.push(yv);
    }
    y
}

/// Zero-phase filtering of one channel: odd reflective padding, forward pass
/// from steady state, reverse, second pass, reverse, then the padding is
/// stripped. `x.len()` must be at least 2.
pub fn filtfilt(b: &[f64], a: &[f64], x: &[f64]) -> Vec<f64> {
    let order = a.len() - 1;
    let pad = (3 * order).min(x.len() - 1);
    let last = x.len() - 1;
    let mut ext = Vec::with_capacity(x.len() + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[last] - x[last - i]);
    }

    let zi = steady_state(b, a);
    let scaled = |x0: f64| -> Vec<f64> { zi.iter().map(|z| z * x0).collect() };

    let mut y = lfilter(b, a, &ext, &scaled(ext[0]));
    y.reverse();
    let mut y = lfilter(b, a, &y, &scaled(y[0]));
    y.reverse();
    y[pad..pad + x.len()].to_vec()
}

/// Minimum sequence length for filtering at a given order; shorter sequences
/// are passed through unchanged with a warning.
pub fn min_filter_len(order: usize) -> usize {
    3 * order
}

/// Applies the zero-phase Butterworth low-pass independently to each of the
/// 61 x 3 coordinate channels. Frame count and fps are unchanged; sequences
/// shorter than `3 * order` frames are returned as-is with a warning.
#[allow(clippy::needless_range_loop)]
pub fn butterworth_lowpass(
    seq: &PoseSequence,
    cutoff_hz: f64,
    order: usize,
) -> Result<PoseSequence> {
    let (b, a) = design_lowpass(cutoff_hz, seq.fps(), order)?;
    if seq.len() < min_filter_len(order) {
        log::warn!(
            "sequence of {} frames is too short for order-{order} filtering (needs {}); skipping",
            seq.len(),
            min_filter_len(order)
        );
        return Ok(seq.clone());
    }
    let keypoints = seq.frames()[0].points().len();
    let mut out: Vec<Vec<[f64; 3]>> = seq.frames().iter().map(|f| f.points().to_vec()).collect();
    let mut channel = vec![0.0; seq.len()];
    for kp in 0..keypoints {
        for d in 0..3 {
            for (t, frame) in seq.frames().iter().enumerate() {
                channel[t] = frame.points()[kp][d];
            }
            let filtered = filtfilt(&b, &a, &channel);
            for (t, v) in filtered.into_iter().enumerate() {
                out[t][kp][d] = v;
            }
        }
    }
    let frames = out
        .into_iter()
        .map(PoseFrame::from_points_unchecked)
        .collect();
    Ok(PoseSequence::from_frames_unchecked(frames, seq.fps()))
}
