//! Second-order IIR sections designed by bilinear transform.

use std::f64::consts::PI;

/// Direct-form II transposed biquad with normalized `a0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
    s1: f64,
    s2: f64,
}

impl Biquad {
    pub fn new(b: [f64; 3], a: [f64; 2]) -> Self {
        Self { b, a, s1: 0.0, s2: 0.0 }
    }

    /// Discretizes `(b0 s² + b1 s + b2) / (a0 s² + a1 s + a2)`, prewarped so
    /// the analog and digital responses agree at `warp_hz`.
    pub fn from_analog(b: [f64; 3], a: [f64; 3], sample_rate: f64, warp_hz: f64) -> Self {
        let w = 2.0 * PI * warp_hz;
        let k = w / (w / (2.0 * sample_rate)).tan();
        let k2 = k * k;
        let nb = [
            b[0] * k2 + b[1] * k + b[2],
            2.0 * (b[2] - b[0] * k2),
            b[0] * k2 - b[1] * k + b[2],
        ];
        let na = [
            a[0] * k2 + a[1] * k + a[2],
            2.0 * (a[2] - a[0] * k2),
            a[0] * k2 - a[1] * k + a[2],
        ];
        Self::new(
            [nb[0] / na[0], nb[1] / na[0], nb[2] / na[0]],
            [na[1] / na[0], na[2] / na[0]],
        )
    }

    /// First-order analog section `(b0 s + b1) / (a0 s + a1)`, zero-padded.
    pub fn from_analog_first_order(b: [f64; 2], a: [f64; 2], sample_rate: f64, warp_hz: f64) -> Self {
        let w = 2.0 * PI * warp_hz;
        let k = w / (w / (2.0 * sample_rate)).tan();
        let nb = [b[0] * k + b[1], b[1] - b[0] * k];
        let na = [a[0] * k + a[1], a[1] - a[0] * k];
        Self::new([nb[0] / na[0], nb[1] / na[0], 0.0], [na[1] / na[0], 0.0])
    }

    /// Butterworth second-order lowpass.
    pub fn lowpass(cutoff_hz: f64, sample_rate: f64) -> Self {
        let wc = 2.0 * PI * cutoff_hz;
        Self::from_analog(
            [0.0, 0.0, wc * wc],
            [1.0, std::f64::consts::SQRT_2 * wc, wc * wc],
            sample_rate,
            cutoff_hz,
        )
    }

    /// Constant-peak bandpass, unity gain at `center_hz`, -3 dB width `center_hz / q`.
    pub fn bandpass(center_hz: f64, q: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * center_hz;
        Self::from_analog([0.0, w0 / q, 0.0], [1.0, w0 / q, w0 * w0], sample_rate, center_hz)
    }

    pub fn reset(&mut self) {
        self.s1 = 0.0;
        self.s2 = 0.0;
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.s1;
        self.s1 = self.b[1] * x - self.a[0] * y + self.s2;
        self.s2 = self.b[2] * x - self.a[1] * y;
        y
    }

    pub fn process_slice(&mut self, data: &mut [f64]) {
        for v in data {
            *v = self.process(*v);
        }
    }

    /// Complex frequency response magnitude at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate;
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (
            self.b[0] + self.b[1] * c1 + self.b[2] * c2,
            self.b[1] * s1 + self.b[2] * s2,
        );
        let den = (1.0 + self.a[0] * c1 + self.a[1] * c2, self.a[0] * s1 + self.a[1] * s2);
        (num.0.hypot(num.1)) / (den.0.hypot(den.1))
    }
}

/// Series connection of biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade(pub Vec<Biquad>);

impl Cascade {
    /// Third-order Butterworth lowpass: one real pole plus one conjugate pair.
    pub fn butterworth3_lowpass(cutoff_hz: f64, sample_rate: f64) -> Self {
        let wc = 2.0 * PI * cutoff_hz;
        let first = Biquad::from_analog_first_order([0.0, wc], [1.0, wc], sample_rate, cutoff_hz);
        let second = Biquad::from_analog([0.0, 0.0, wc * wc], [1.0, wc, wc * wc], sample_rate, cutoff_hz);
        Cascade(vec![first, second])
    }

    pub fn reset(&mut self) {
        self.0.iter_mut().for_each(Biquad::reset);
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        self.0.iter_mut().fold(x, |acc, s| s.process(acc))
    }

    pub fn process_slice(&mut self, data: &mut [f64]) {
        for v in data {
            *v = self.process(*v);
        }
    }

    pub fn magnitude(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        self.0.iter().map(|s| s.magnitude(freq_hz, sample_rate)).product()
    }
}
