use std::f64::consts::PI;

use crate::model::CircuitParameters;

use super::{quadrature_rule, Waveform};

/// Sine/cosine series of the arc voltage and current, phase-referenced to the
/// start of the source period (where `E(t) = E_m sin(2π f t)` starts at zero).
///
/// Index `k - 1` of each vector holds harmonic `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    pub f: f64,
    pub k_max: usize,
    /// Voltage cosine coefficients (V).
    pub a: Vec<f64>,
    /// Voltage sine coefficients (V).
    pub b: Vec<f64>,
    /// Current cosine coefficients (A).
    pub c: Vec<f64>,
    /// Current sine coefficients (A).
    pub d: Vec<f64>,
    pub dc_voltage: f64,
    pub dc_current: f64,
    /// RMS reconstruction error over the period relative to the signal RMS.
    pub residual_voltage: f64,
    pub residual_current: f64,
}

impl FourierSpectrum {
    /// Truncated series at time `tau` after the period start.
    pub fn voltage(&self, tau: f64) -> f64 {
        series(&self.a, &self.b, 2.0 * PI * self.f * tau)
    }

    pub fn current(&self, tau: f64) -> f64 {
        series(&self.c, &self.d, 2.0 * PI * self.f * tau)
    }

    pub fn fundamental_current(&self) -> f64 {
        self.c[0].hypot(self.d[0])
    }

    /// Amplitude `√(c_k² + d_k²)` of current harmonic `k`.
    pub fn current_harmonic(&self, k: usize) -> f64 {
        self.c[k - 1].hypot(self.d[k - 1])
    }

    /// Same coefficients attributed to another fundamental frequency.
    pub fn with_frequency(&self, f: f64) -> Self {
        Self { f, ..self.clone() }
    }
}

fn series(cos: &[f64], sin: &[f64], x: f64) -> f64 {
    cos.iter()
        .zip(sin)
        .enumerate()
        .map(|(n, (p, q))| {
            let kx = (n + 1) as f64 * x;
            p * kx.cos() + q * kx.sin()
        })
        .sum()
}

/// Projects one period of `w` onto `cos/sin(2π f k t)`, `k = 1..=k_max`.
pub fn fourier_coefficients<W: Waveform + ?Sized>(w: &W, k_max: usize) -> FourierSpectrum {
    let (t0, t1) = w.span();
    let period = t1 - t0;
    let f = 1.0 / period;
    let omega = 2.0 * PI * f;

    let mut acc = vec![0.0; 4 * k_max + 2];
    for (t, wt) in quadrature_rule(w, t0, t1) {
        let (u, i) = (w.voltage(t), w.current(t));
        let x = omega * (t - t0);
        acc[0] += wt * u;
        acc[1] += wt * i;
        for k in 1..=k_max {
            let (s, c) = (k as f64 * x).sin_cos();
            let base = 2 + 4 * (k - 1);
            acc[base] += wt * u * c;
            acc[base + 1] += wt * u * s;
            acc[base + 2] += wt * i * c;
            acc[base + 3] += wt * i * s;
        }
    }
    let scale = 2.0 / period;
    let pick = |off: usize| (0..k_max).map(|n| scale * acc[2 + 4 * n + off]).collect::<Vec<_>>();
    let mut spec = FourierSpectrum {
        f,
        k_max,
        a: pick(0),
        b: pick(1),
        c: pick(2),
        d: pick(3),
        dc_voltage: acc[0] / period,
        dc_current: acc[1] / period,
        residual_voltage: 0.0,
        residual_current: 0.0,
    };

    let n = 4096;
    let (mut eu, mut nu, mut ei, mut ni) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let tau = period * k as f64 / n as f64;
        let (u, i) = (w.voltage(t0 + tau), w.current(t0 + tau));
        eu += (u - spec.voltage(tau)).powi(2);
        nu += u * u;
        ei += (i - spec.current(tau)).powi(2);
        ni += i * i;
    }
    spec.residual_voltage = if nu > 0.0 { (eu / nu).sqrt() } else { 0.0 };
    spec.residual_current = if ni > 0.0 { (ei / ni).sqrt() } else { 0.0 };
    spec
}

/// Which pair of trigonometric factors is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    SinSin,
    CosCos,
    /// `p cos(2π f k t) × q sin(2π f l t)`.
    CosSin,
}

/// Closed-form half-period integrals of harmonic products over `[0, T/2]`.
///
/// `SinSin` and `CosCos` give `p q / (4 f)` for `k = l` and zero otherwise;
/// `CosSin` gives zero for `k = l` and
/// `p q l [1 − cos(π k) cos(π l)] / (2π f (l² − k²))` otherwise.
pub fn half_period_product_integral(p: f64, k: usize, q: f64, l: usize, f: f64, kind: ProductKind) -> f64 {
    match kind {
        ProductKind::SinSin | ProductKind::CosCos => {
            if k == l {
                p * q / (4.0 * f)
            } else {
                0.0
            }
        }
        ProductKind::CosSin => {
            if k == l {
                0.0
            } else {
                let (kf, lf) = (k as f64, l as f64);
                p * q * lf * (1.0 - (PI * kf).cos() * (PI * lf).cos()) / (2.0 * PI * f * (lf * lf - kf * kf))
            }
        }
    }
}

/// Half-period loop area assembled from the voltage and current series by
/// substituting `di/dt = (E − u − R i)/L` and summing the closed-form product
/// integrals of every harmonic pair.
pub fn area_from_fourier(spec: &FourierSpectrum, circuit: &CircuitParameters) -> f64 {
    use ProductKind::*;
    let f = spec.f;
    let n = spec.k_max;
    let hp = half_period_product_integral;

    // u × E, with E = E_m sin(2π f t) the first sine harmonic
    let mut with_source = 0.0;
    for k in 1..=n {
        with_source += hp(spec.a[k - 1], k, circuit.e_m, 1, f, CosSin);
        with_source += hp(spec.b[k - 1], k, circuit.e_m, 1, f, SinSin);
    }

    // u × u and u × R i
    let mut with_voltage = 0.0;
    let mut with_current = 0.0;
    for k in 1..=n {
        let (ak, bk) = (spec.a[k - 1], spec.b[k - 1]);
        for l in 1..=n {
            let (al, bl) = (spec.a[l - 1], spec.b[l - 1]);
            let (cl, dl) = (spec.c[l - 1], spec.d[l - 1]);
            with_voltage += hp(ak, k, al, l, f, CosCos)
                + hp(ak, k, bl, l, f, CosSin)
                + hp(al, l, bk, k, f, CosSin)
                + hp(bk, k, bl, l, f, SinSin);
            with_current += hp(ak, k, cl, l, f, CosCos)
                + hp(ak, k, dl, l, f, CosSin)
                + hp(cl, l, bk, k, f, CosSin)
                + hp(bk, k, dl, l, f, SinSin);
        }
    }

    (with_source - with_voltage - circuit.r * with_current) / circuit.l
}
