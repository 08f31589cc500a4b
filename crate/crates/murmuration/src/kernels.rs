//! Smooth weight profile and the oscillatory kernels V1/V2.
//!
//! The profile bundles the C-infinity plateau V (supported on [1/4, 3],
//! identically 1 on [1/2, 2]), the Gaussian-windowed weight
//! u(x) = exp(-((x+1-K)/M)^2) · V(x/K), a fine discretization of its
//! Fourier transform û, and the scalars Ŵ(0), ĥ(0).
//!
//! V1(x) = ∫ û(v) sin(x cos 2πv) dv and V2(x) = ∫ û(v) sin(x sin 2πv) dv
//! are evaluated by the trapezoidal rule on the û grid; the integrand is
//! smooth and decays superpolynomially inside the truncated window, so the
//! rule converges superalgebraically once the oscillation in v is
//! resolved. A stride-2 Richardson comparison provides the error estimate.
//!
//! Weighted Bessel sums over the even-weight window come from one batch
//! transform per argument; `weighted_envelope` gives the certified series
//! bound on the same sum that the truncation certificates rely on.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::besselkit::bessel_batch;
use crate::error::{Error, Result};
use crate::util::{next_pow2, CompensatedSum};

/// Weights below this threshold are outside the k-window; the neglected
/// mass is accounted for by `window_defect_bound`.
const U_THRESHOLD: f64 = 1e-18;

/// Zero-padding factor for the û grid; fixes the finest resolvable
/// oscillation at roughly x <= PAD_FACTOR · 3K / 6.
const PAD_FACTOR: usize = 64;

/// The fixed C-infinity plateau: 0 off [1/4, 3], 1 on [1/2, 2], smooth-step
/// transitions built from exp(-1/t) on both shoulders.
pub fn plateau(x: f64) -> f64 {
    smooth_step((x - 0.25) / 0.25) * (1.0 - smooth_step(x - 2.0))
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Which weighting a Bessel sum over the k-window carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Σ u(k-1) J_{k-1}(x) over even k.
    Plain,
    /// Σ i^k u(k-1) J_{k-1}(x) over even k (i^k = (-1)^{k/2} is real).
    Sign,
    /// Σ over k ≡ a (mod 4) only, a ∈ {0, 2}.
    Class(u8),
}

/// Smooth weights of the experiment on a discretized grid.
///
/// Immutable after construction; all evaluation methods are pure.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    k_center: f64,
    width: f64,
    /// t-samples of u on [0, 3K] (step `dt`).
    u_samples: Vec<f64>,
    dt: f64,
    /// û(j·dv): positive side and, independently, the negative side.
    u_hat_pos: Vec<Complex64>,
    u_hat_neg: Vec<Complex64>,
    dv: f64,
    u_hat_zero: f64,
    w_hat_zero: f64,
    h_hat_zero: f64,
    k_min: u32,
    k_max: u32,
    /// Bound on the weight mass dropped by the window cut.
    window_defect_bound: f64,
    /// (m = k-1, ln u(m) - ln Γ(m+1)) per window k, for the certificates.
    envelope_terms: Vec<(f64, f64)>,
}

/// Build the profile; `grid_size` is the minimum number of t-samples
/// (rounded up internally to resolve the Gaussian and the plateau edges).
pub fn make_profile(k_center: f64, width: f64, grid_size: usize) -> Result<WeightProfile> {
    if !(k_center >= 2.0) {
        return Err(Error::Parameter(format!(
            "central weight K = {k_center} must be >= 2"
        )));
    }
    let lo = k_center.powf(1.0 / 3.0) * (1.0 - 1e-12);
    if !(width >= lo && width <= k_center) {
        return Err(Error::Parameter(format!(
            "window width M = {width} outside regime [K^(1/3), K] = [{lo:.3}, {k_center}]"
        )));
    }

    let span = 3.0 * k_center;
    let n_t = next_pow2(grid_size.max((32.0 * span / width).ceil() as usize));
    let dt = span / n_t as f64;
    let u_at = |t: f64| {
        let g = (t + 1.0 - k_center) / width;
        (-g * g).exp() * plateau(t / k_center)
    };
    let u_samples: Vec<f64> = (0..n_t).map(|j| u_at(j as f64 * dt)).collect();

    // padded forward DFT: û(v_k) = dt · Σ u(t_j) e(-t_j v_k)
    let n_fft = n_t * PAD_FACTOR;
    let mut buf: Vec<Complex64> = u_samples
        .iter()
        .map(|&u| Complex64::new(u, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n_fft)
        .collect();
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    let dv = 1.0 / (n_fft as f64 * dt);
    let u_hat_zero = buf[0].re * dt;

    // independent quadrature of ∫u as a construction-time cross-check
    let direct = simpson_integral(&u_at, 0.0, span, 1 << 16);
    if (u_hat_zero - direct).abs() > 1e-8 * direct.abs() {
        return Err(Error::Internal(format!(
            "û(0) = {u_hat_zero} disagrees with direct quadrature {direct}"
        )));
    }
    if u_at((0.25 * k_center - 10.0 * width).max(0.0)).abs() > 1e-12
        || u_at(3.0 * k_center) > 1e-12
    {
        return Err(Error::Internal("u fails to vanish at support edges".into()));
    }

    // truncate the û grid where the transform falls below the noise floor
    let floor = 1e-14 * u_hat_zero.abs();
    let mut cut = 1;
    for j in (1..n_fft / 2).rev() {
        if buf[j].norm() * dt >= floor || buf[n_fft - j].norm() * dt >= floor {
            cut = (j + 1024).min(n_fft / 2 - 1);
            break;
        }
    }
    let u_hat_pos: Vec<Complex64> = (0..=cut).map(|j| buf[j] * dt).collect();
    let u_hat_neg: Vec<Complex64> = (0..=cut)
        .map(|j| if j == 0 { buf[0] * dt } else { buf[n_fft - j] * dt })
        .collect();

    // even-weight window where u(k-1) is above threshold
    let mut k_min = 0u32;
    let mut k_max = 0u32;
    let mut k = 2u32;
    while (k as f64) <= span + 2.0 {
        if u_at(k as f64 - 1.0) >= U_THRESHOLD {
            if k_min == 0 {
                k_min = k;
            }
            k_max = k;
        }
        k += 2;
    }
    if k_min == 0 {
        return Err(Error::Internal("empty weight window".into()));
    }
    let window_defect_bound = U_THRESHOLD * (span / 2.0 + 2.0);
    let envelope_terms: Vec<(f64, f64)> = (k_min..=k_max)
        .step_by(2)
        .map(|k| {
            let m = k as f64 - 1.0;
            (
                m,
                u_at(m).max(f64::MIN_POSITIVE).ln() - crate::util::ln_gamma(m + 1.0),
            )
        })
        .collect();

    Ok(WeightProfile {
        k_center,
        width,
        u_samples,
        dt,
        u_hat_pos,
        u_hat_neg,
        dv,
        u_hat_zero,
        w_hat_zero: u_hat_zero / k_center,
        h_hat_zero: PI.sqrt() * width,
        k_min,
        k_max,
        window_defect_bound,
        envelope_terms,
    })
}

fn simpson_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = CompensatedSum::new();
    acc.add(f(a) + f(b));
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(a + j as f64 * h));
    }
    acc.value() * h / 3.0
}

impl WeightProfile {
    pub fn k_center(&self) -> f64 {
        self.k_center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// u(x) = exp(-((x+1-K)/M)^2) V(x/K), evaluated exactly.
    pub fn weight_u(&self, x: f64) -> f64 {
        let g = (x + 1.0 - self.k_center) / self.width;
        (-g * g).exp() * plateau(x / self.k_center)
    }

    /// The Gaussian factor h(k) = exp(-((k-K)/M)^2).
    pub fn weight_h(&self, k: f64) -> f64 {
        let g = (k - self.k_center) / self.width;
        (-g * g).exp()
    }

    /// û(0) = ∫ u.
    pub fn u_hat_zero(&self) -> f64 {
        self.u_hat_zero
    }

    /// Ŵ(0) = û(0)/K for W(x) = u(Kx).
    pub fn w_hat_zero(&self) -> f64 {
        self.w_hat_zero
    }

    /// ĥ(0) = sqrt(pi) · M.
    pub fn h_hat_zero(&self) -> f64 {
        self.h_hat_zero
    }

    /// û at signed grid index j (step `dv()`); conjugate-symmetric up to
    /// floating-point noise since u is real.
    pub fn u_hat(&self, j: i64) -> Complex64 {
        if j >= 0 {
            self.u_hat_pos[j as usize]
        } else {
            self.u_hat_neg[(-j) as usize]
        }
    }

    pub fn u_hat_cut(&self) -> usize {
        self.u_hat_pos.len() - 1
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn grid(&self) -> (&[f64], f64) {
        (&self.u_samples, self.dt)
    }

    /// Even-weight window [k_min, k_max] carrying all weight above 1e-18.
    pub fn k_window(&self) -> (u32, u32) {
        (self.k_min, self.k_max)
    }

    /// Bound on the weight mass excluded by the window cut.
    pub fn window_defect_bound(&self) -> f64 {
        self.window_defect_bound
    }

    /// Largest argument whose oscillation the û grid can resolve.
    pub fn max_argument(&self) -> f64 {
        1.0 / (6.0 * self.dv) - 1.0
    }

    /// V1(x) = ∫ û(v) sin(x cos 2πv) dv.
    pub fn v1(&self, x: f64) -> Result<Complex64> {
        self.kernel_quadrature(x, false)
    }

    /// V2(x) = ∫ û(v) sin(x sin 2πv) dv.
    pub fn v2(&self, x: f64) -> Result<Complex64> {
        self.kernel_quadrature(x, true)
    }

    fn kernel_quadrature(&self, x: f64, use_sin: bool) -> Result<Complex64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("kernel argument {x} must be > 0")));
        }
        if x > self.max_argument() {
            return Err(Error::Precision(format!(
                "argument {x} beyond grid resolution {}",
                self.max_argument()
            )));
        }
        // coarsen the stride while still resolving both the oscillation in
        // v (period ~ 1/x) and the structure of û (scale ~ 1/M)
        let stride_osc = (1.0 / (10.0 * (x + 1.0) * self.dv)).floor() as usize;
        let stride_hat = (0.005 / (self.width * self.dv)).floor() as usize;
        let stride = stride_osc.min(stride_hat).clamp(1, 1 << 12);
        let full = self.kernel_sum(x, use_sin, stride);
        let halved = self.kernel_sum(x, use_sin, stride * 2);
        let est = (full - halved).norm() / 3.0;
        let tol = 1e-8 * self.peak_times_support();
        if est > tol {
            return Err(Error::Precision(format!(
                "kernel quadrature error estimate {est:.3e} above tolerance {tol:.3e} at x = {x}"
            )));
        }
        Ok(full)
    }

    fn peak_times_support(&self) -> f64 {
        let peak = self
            .u_hat_pos
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        peak * (2.0 * self.u_hat_cut() as f64 * self.dv)
    }

    fn kernel_sum(&self, x: f64, use_sin: bool, stride: usize) -> Complex64 {
        let cut = self.u_hat_cut();
        let n = cut / stride;
        let h = stride as f64 * self.dv;
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for j in -(n as i64)..=(n as i64) {
            let v = j as f64 * h;
            let angle = 2.0 * PI * v;
            let inner = if use_sin { angle.sin() } else { angle.cos() };
            let s = (x * inner).sin();
            let z = self.u_hat(j * stride as i64) * s;
            let w = if j == -(n as i64) || j == n as i64 {
                0.5
            } else {
                1.0
            };
            re.add(z.re * w);
            im.add(z.im * w);
        }
        Complex64::new(re.value() * h, im.value() * h)
    }

    /// Finite weighted Bessel sum over the even-weight window, J values
    /// from one batch transform.
    pub fn weighted_bessel_sum(&self, x: f64, weighting: Weighting) -> Result<f64> {
        if let Weighting::Class(a) = weighting {
            if a != 0 && a != 2 {
                return Err(Error::Domain(format!("class must be 0 or 2, got {a}")));
            }
        }
        let batch = bessel_batch(x, (self.k_max - 1) as usize)?;
        Ok(self.weighted_sum_from_batch(&batch, weighting))
    }

    /// Same sum but reusing an existing batch for the argument.
    pub fn weighted_sum_from_batch(
        &self,
        batch: &crate::besselkit::BesselBatch,
        weighting: Weighting,
    ) -> f64 {
        debug_assert!(batch.n_max() >= (self.k_max - 1) as usize);
        let mut acc = CompensatedSum::new();
        let mut k = self.k_min;
        while k <= self.k_max {
            let sign = match weighting {
                Weighting::Plain => 1.0,
                Weighting::Sign => {
                    if k % 4 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Weighting::Class(a) => {
                    if k % 4 == a as u32 {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            if sign != 0.0 {
                acc.add(sign * self.weight_u(k as f64 - 1.0) * batch.value((k - 1) as usize));
            }
            k += 2;
        }
        acc.value()
    }

    /// Certified bound on Σ_{k even} u(k-1) |J_{k-1}(x)| (window terms via
    /// the series envelope, off-window mass via the defect bound).
    pub fn weighted_envelope(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.window_defect_bound;
        }
        let ln_half_x = (0.5 * x).ln();
        let mut total = 0.0f64;
        for &(m, ln_u_over_gamma) in &self.envelope_terms {
            let ln_term = ln_u_over_gamma + m * ln_half_x + x * x / (4.0 * (m + 1.0));
            if ln_term > 690.0 {
                return f64::INFINITY;
            }
            total += ln_term.exp();
        }
        total + self.window_defect_bound
    }

    /// Σ u(k-1) over even k in the window restricted to k ≡ b (mod 4).
    pub fn class_weight_sum(&self, b: u32) -> f64 {
        let mut acc = CompensatedSum::new();
        let mut k = self.k_min;
        while k <= self.k_max {
            if k % 4 == b {
                acc.add(self.weight_u(k as f64 - 1.0));
            }
            k += 2;
        }
        acc.value()
    }
}

/// Cubic-interpolation table of y ↦ V1(y) or V2(y) on a uniform grid.
///
/// V1 is real and V2 purely imaginary; the table stores the nonvanishing
/// component. Grid step M/128 keeps the Catmull-Rom error far below the
/// route-equivalence tolerances.
#[derive(Debug, Clone)]
pub struct KernelTable {
    step: f64,
    values: Vec<f64>,
}

/// Which kernel a table samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Real part of V1.
    V1,
    /// Imaginary part of V2.
    V2,
}

impl KernelTable {
    pub fn build(profile: &WeightProfile, kind: KernelKind, y_max: f64) -> Result<KernelTable> {
        let step = profile.width() / 128.0;
        let n = (y_max / step).ceil() as usize + 4;
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0); // both kernels vanish at 0
        for i in 1..=n {
            let y = i as f64 * step;
            let z = match kind {
                KernelKind::V1 => profile.v1(y)?.re,
                KernelKind::V2 => profile.v2(y)?.im,
            };
            values.push(z);
        }
        Ok(KernelTable { step, values })
    }

    pub fn y_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    /// Catmull-Rom interpolation; `y` must lie within the table.
    pub fn eval(&self, y: f64) -> f64 {
        assert!(y >= 0.0 && y <= self.y_max(), "table lookup out of range");
        let s = y / self.step;
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let t = s - i as f64;
        let p0 = self.values[i.saturating_sub(1)];
        let p1 = self.values[i];
        let p2 = self.values[i + 1];
        let p3 = self.values[(i + 2).min(self.values.len() - 1)];
        let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
        let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
        let c = -0.5 * p0 + 0.5 * p2;
        ((a * t + b) * t + c) * t + p1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn profile_200() -> WeightProfile {
        make_profile(200.0, 40.0, 1024).unwrap()
    }

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(1.0), 1.0);
        assert_eq!(plateau(0.2), 0.0);
        let mid = plateau(2.5);
        assert!(mid > 0.0 && mid < 1.0, "plateau(2.5) = {mid}");
        assert_eq!(plateau(3.1), 0.0);
    }

    #[test]
    fn weight_u_peaks_at_k_minus_one() {
        for k in [10.0f64, 50.0, 200.0] {
            let m = k.powf(0.5);
            let p = make_profile(k, m, 256).unwrap();
            assert_relative_eq!(p.weight_u(k - 1.0), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn regime_validation() {
        assert!(matches!(
            make_profile(10.0, 1.0, 256),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            make_profile(10.0, 20.0, 256),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn w_hat_zero_comparable_to_m_over_k() {
        let p = profile_200();
        let ratio = p.w_hat_zero() / (40.0 / 200.0);
        assert!(
            (0.5..=2.0).contains(&ratio),
            "Ŵ(0)/(M/K) = {ratio} outside [1/2, 2]"
        );
    }

    #[test]
    fn u_hat_conjugate_symmetry() {
        let p = profile_200();
        for j in [1i64, 7, 100, 2000] {
            let a = p.u_hat(j);
            let b = p.u_hat(-j);
            assert!((a - b.conj()).norm() <= 1e-10 * p.u_hat_zero());
        }
    }

    #[test]
    fn u_hat_decays_superpolynomially() {
        let p = profile_200();
        // far beyond 10/M·log^2 K the transform is at the noise floor
        let v_far = 10.0 / p.width() * (200.0f64).ln().powi(2);
        let j = ((v_far / p.dv()) as i64).min(p.u_hat_cut() as i64);
        assert!(p.u_hat(j).norm() <= 1e-8 * p.u_hat_zero());
    }

    #[test]
    fn kernels_vanish_at_small_argument() {
        let p = profile_200();
        let v1 = p.v1(1e-8).unwrap();
        let v2 = p.v2(1e-8).unwrap();
        assert!(v1.norm() <= 1e-6);
        assert!(v2.norm() <= 1e-6);
    }

    #[test]
    fn kernel_realness_at_center() {
        let p = profile_200();
        let v1 = p.v1(200.0).unwrap();
        let v2 = p.v2(200.0).unwrap();
        let dominant = v1.norm().max(v2.norm());
        assert!(v1.im.abs() <= 1e-8 * dominant, "Im V1 = {}", v1.im);
        assert!(v2.re.abs() <= 1e-8 * dominant, "Re V2 = {}", v2.re);
        assert!(v2.im.abs() > 0.0);
    }

    #[test]
    fn v2_localized_near_center() {
        let p = profile_200();
        let near = p.v2(200.0).unwrap().norm();
        let far = p.v2(200.0 / 1e4).unwrap().norm();
        assert!(far <= 1e-6 * near, "V2 far/near = {}", far / near);
    }

    #[test]
    fn class_sum_identity_small_profile() {
        // S_a = (i/2) V2 + ((-1)^{a/2+1}/2) V1 at a small profile; the
        // K = 200 grid of the same identity lives in the acceptance suite
        let p = make_profile(60.0, 12.0, 512).unwrap();
        for &x in &[35.0, 60.0, 90.0] {
            let v1 = p.v1(x).unwrap();
            let v2 = p.v2(x).unwrap();
            let scale = v1.norm().max(v2.norm());
            for a in [0u8, 2] {
                let lhs = p.weighted_bessel_sum(x, Weighting::Class(a)).unwrap();
                let sign = if a == 0 { -1.0 } else { 1.0 };
                // (i/2)V2 is real since V2 is purely imaginary
                let rhs = -0.5 * v2.im + sign * 0.5 * v1.re;
                assert!(
                    (lhs - rhs).abs() <= 1e-6 * scale,
                    "a={a}, x={x}: {lhs} vs {rhs} (scale {scale})"
                );
            }
            let plain = p.weighted_bessel_sum(x, Weighting::Plain).unwrap();
            let sign_sum = p.weighted_bessel_sum(x, Weighting::Sign).unwrap();
            assert!((plain - (-v2.im)).abs() <= 1e-6 * scale);
            assert!((sign_sum - (-v1.re)).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn weighted_envelope_dominates_sum() {
        let p = make_profile(60.0, 12.0, 512).unwrap();
        for &x in &[2.0, 5.0, 10.0] {
            let bound = p.weighted_envelope(x);
            let sum = p.weighted_bessel_sum(x, Weighting::Plain).unwrap().abs();
            assert!(sum <= bound, "x={x}: sum {sum} > envelope {bound}");
        }
    }

    #[test]
    fn kernel_table_matches_direct_evaluation() {
        let p = make_profile(60.0, 12.0, 512).unwrap();
        let table = KernelTable::build(&p, KernelKind::V2, 130.0).unwrap();
        let peak = p.v2(60.0).unwrap().im.abs();
        for &y in &[11.3, 47.0, 60.0, 91.7, 118.2] {
            let direct = p.v2(y).unwrap().im;
            let interp = table.eval(y);
            assert!(
                (direct - interp).abs() <= 1e-7 * peak,
                "y={y}: {interp} vs {direct}"
            );
        }
    }

    #[test]
    fn argument_beyond_resolution_is_rejected() {
        let p = make_profile(30.0, 8.0, 256).unwrap();
        assert!(matches!(
            p.v2(p.max_argument() * 2.0),
            Err(Error::Precision(_))
        ));
    }
}
