/// 4th-order gammatone bandpass as four cascaded complex one-pole
/// resonators. Gain is unity at the center frequency; the real output is
/// twice the real part of the analytic response.
#[derive(Debug, Clone)]
pub struct GammatoneChannel {
    pole_re: f64,
    pole_im: f64,
    input_gain: f64,
    state: [(f64, f64); 4],
}

impl GammatoneChannel {
    pub fn new(center_hz: f64, bandwidth_hz: f64, sample_rate: f64) -> Self {
        let r = (-2.0 * std::f64::consts::PI * bandwidth_hz / sample_rate).exp();
        let omega = 2.0 * std::f64::consts::PI * center_hz / sample_rate;
        Self {
            pole_re: r * omega.cos(),
            pole_im: r * omega.sin(),
            input_gain: 1.0 - r,
            state: [(0.0, 0.0); 4],
        }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let (mut re, mut im) = (x, 0.0);
        for s in self.state.iter_mut() {
            let nr = self.input_gain * re + self.pole_re * s.0 - self.pole_im * s.1;
            let ni = self.input_gain * im + self.pole_im * s.0 + self.pole_re * s.1;
            *s = (nr, ni);
            re = nr;
            im = ni;
        }
        2.0 * re
    }

    pub fn reset(&mut self) {
        self.state = [(0.0, 0.0); 4];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn steady_amplitude(center: f64, probe: f64) -> f64 {
        let fs = 48_000.0;
        let mut g = GammatoneChannel::new(center, 1.019 * super::super::erb_bandwidth(center), fs);
        let n = 48_000;
        let mut peak: f64 = 0.0;
        for i in 0..n {
            let y = g.process((2.0 * PI * probe * i as f64 / fs).sin());
            if i > n / 2 {
                peak = peak.max(y.abs());
            }
        }
        peak
    }

    #[test]
    fn unity_gain_at_center() {
        for f in [200.0, 1000.0, 4000.0] {
            assert!((steady_amplitude(f, f) - 1.0).abs() < 0.02, "{f}");
        }
    }

    #[test]
    fn attenuates_off_frequency() {
        assert!(steady_amplitude(1000.0, 2000.0) < 0.01);
        assert!(steady_amplitude(1000.0, 500.0) < 0.05);
    }
}
