//! The end-to-end murmuration experiment: the sign-weighted numerator in
//! three independent evaluations, the weighted family size (denominator),
//! the diagonal Poisson check, and the final ratio report.
//!
//! All prime sums run over exact θ-weights (log p) from the sieve and are
//! reduced in fixed index order with compensated summation, so reports are
//! bit-stable across thread counts. Kloosterman tails beyond the computed
//! c-range are certified with the weighted Bessel series envelope: beyond
//! a cut c₀ every term is dominated by envelope(X/c₀)·(c₀/c)^{m_min}, so
//! the whole tail is at most envelope(X/(c₀+1)) · (1 + (c₀+1)/(m_min-1)).

pub mod series;

pub use series::{
    decorrelation_sum, euler_factor, l_series, l_series_euler, nu_density, zeta,
    DecorrelationReport, LSeriesValues, NuDensity, DEFAULT_PRIME_CUT, DEFAULT_TERM_CUT,
};

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::arithcore::{build_tables, kloosterman, ArithmeticTable};
use crate::besselkit::bessel_batch;
use crate::error::{Error, Result};
use crate::kernels::{make_profile, KernelKind, KernelTable, WeightProfile};
use crate::modforms::{
    eigen_data_batch, harmonic_weights, signed_spectral_average, WEIGHT_CAP,
};
use crate::util::{compensated_total, CompensatedSum};

/// The constraint window E = [A, B] for p/K².
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Parameter(format!(
                "window must satisfy 0 < A < B, got [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Everything `murmuration_report` produces.
#[derive(Debug, Clone, Serialize)]
pub struct MurmurationReport {
    pub k_center: f64,
    pub width: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub prime_count: usize,
    pub numerator_direct: f64,
    pub numerator_kernel: f64,
    pub numerator_mainterm: f64,
    pub mainterm_closed_form: f64,
    pub denominator: f64,
    pub denominator_diag: f64,
    pub denominator_offdiag: f64,
    pub ratio: f64,
    /// K^{-1} / (√B + √A)
    pub predicted: f64,
    /// K · ratio
    pub normalized_ratio: f64,
    /// |normalized_ratio - 1/(√B+√A)| · (√B+√A)
    pub deviation: f64,
}

/// Decomposition of the weighted family size.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DenominatorParts {
    pub total: f64,
    pub diag: f64,
    pub offdiag: f64,
    pub theta_mass: f64,
    pub k_weight_sum: f64,
}

/// The two main-term evaluations of the numerator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MainTerm {
    /// Quadrature of 2πi ∫ Σ_c μ²/(cφ) V2(4π√x/c) dx.
    pub quadrature: f64,
    /// The displayed closed form K²(√B-√A)·Ŵ(0), for scale comparison.
    pub closed_form: f64,
}

/// Residue-class diagonal sums against (K/4)·Ŵ(0).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoissonCheck {
    pub class0: f64,
    pub class2: f64,
    pub reference: f64,
    pub residual0: f64,
    pub residual2: f64,
}

fn prime_window(profile: &WeightProfile, window: Interval) -> (u64, u64) {
    let k2 = profile.k_center() * profile.k_center();
    ((window.lo * k2).ceil() as u64, (window.hi * k2).floor() as u64)
}

fn check_coverage(table: &ArithmeticTable, p_hi: u64) -> Result<()> {
    if table.limit() < p_hi {
        return Err(Error::Domain(format!(
            "table sieved to {} but the window needs primes to {p_hi}",
            table.limit()
        )));
    }
    Ok(())
}

/// Tail of Σ_{c > c0} envelope(X/c): geometric domination with exponent
/// `m_min` (the lowest Bessel order in the window).
fn c_tail_bound(first_term: f64, c_next: u64, m_min: f64) -> f64 {
    first_term * (1.0 + c_next as f64 / (m_min - 1.0))
}

/// Common skeleton of the numerator evaluations: for each prime p in the
/// window, sum S(1,p;c)/c · ksum(4π√p/c) over c until the certified tail
/// drops below the per-prime budget; then 2π Σ_p log p (...).
fn prime_kloosterman_sum<F>(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    tol: f64,
    m_min: f64,
    ksum: F,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (p_lo, p_hi) = prime_window(profile, window);
    check_coverage(table, p_hi)?;
    let (i0, i1) = table.prime_range(p_lo, p_hi);
    if i0 == i1 {
        return Ok(0.0);
    }
    let theta = table.theta_mass(p_lo, p_hi);
    let tol_pair = tol / (2.0 * std::f64::consts::PI * theta.max(1.0));

    let primes = &table.primes()[i0..i1];
    let logs = &table.log_weights()[i0..i1];
    let per_prime: Result<Vec<f64>> = primes
        .par_iter()
        .zip(logs.par_iter())
        .map(|(&p, &w)| {
            let x_top = 4.0 * std::f64::consts::PI * (p as f64).sqrt();
            let mut acc = CompensatedSum::new();
            let mut c = 0u64;
            loop {
                c += 1;
                if c > 1_000_000 {
                    return Err(Error::Precision(format!(
                        "c-sum certificate unreachable at p = {p}"
                    )));
                }
                let y = x_top / c as f64;
                acc.add(kloosterman(1, p as i64, c) / c as f64 * ksum(y)?);
                let next = profile.weighted_envelope(x_top / (c + 1) as f64);
                if c_tail_bound(next, c + 1, m_min) <= tol_pair {
                    break;
                }
            }
            Ok(w * acc.value())
        })
        .collect();
    Ok(2.0 * std::f64::consts::PI * compensated_total(&per_prime?))
}

/// k-sum over even weights in the (possibly clipped) window from a batch.
fn clipped_weighted_sum(
    profile: &WeightProfile,
    batch: &crate::besselkit::BesselBatch,
    k_hi: u32,
    sign_weighted: bool,
) -> f64 {
    let (k_min, _) = profile.k_window();
    let mut acc = CompensatedSum::new();
    let mut k = k_min;
    while k <= k_hi {
        let s = if !sign_weighted {
            1.0
        } else if k % 4 == 0 {
            1.0
        } else {
            -1.0
        };
        acc.add(s * profile.weight_u(k as f64 - 1.0) * batch.value((k - 1) as usize));
        k += 2;
    }
    acc.value()
}

/// Numerator Σ₁ by per-(p, c) batch Bessel transforms.
pub fn numerator_direct(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    tol: f64,
) -> Result<f64> {
    numerator_direct_clipped(profile, window, table, tol, None)
}

/// Same sum with the weight window clipped to k <= k_cap (used by the
/// toy-scale spectral cross-check, which must clip both routes alike).
pub fn numerator_direct_clipped(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    tol: f64,
    k_cap: Option<u32>,
) -> Result<f64> {
    let (k_min, k_max) = profile.k_window();
    let k_hi = k_cap.map_or(k_max, |cap| cap.min(k_max));
    if k_hi < k_min {
        return Ok(0.0);
    }
    let n_top = (k_hi - 1) as usize;
    let m_min = k_min as f64 - 1.0;
    prime_kloosterman_sum(profile, window, table, tol, m_min, |y| {
        let batch = bessel_batch(y, n_top)?;
        Ok(clipped_weighted_sum(profile, &batch, k_hi, false))
    })
}

/// Largest kernel argument the window can produce.
fn max_kernel_argument(profile: &WeightProfile, window: Interval) -> f64 {
    4.0 * std::f64::consts::PI * window.hi.sqrt() * profile.k_center() * 1.000_001
}

/// Numerator Σ₁ through the V2 kernel: the inner k-sum collapses to
/// i·V2(4π√p/c), interpolated from a table sampled by quadrature.
pub fn numerator_kernel(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    tol: f64,
) -> Result<f64> {
    let y_max = max_kernel_argument(profile, window);
    let v2 = KernelTable::build(profile, KernelKind::V2, y_max)?;
    numerator_kernel_with_table(profile, window, table, tol, &v2)
}

/// Kernel-route numerator reusing a prebuilt V2 table.
pub fn numerator_kernel_with_table(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    tol: f64,
    v2: &KernelTable,
) -> Result<f64> {
    let (k_min, _) = profile.k_window();
    let m_min = k_min as f64 - 1.0;
    // plain k-sum equals i·V2, whose real value is -Im V2
    prime_kloosterman_sum(profile, window, table, tol, m_min, |y| Ok(-v2.eval(y)))
}

/// The no-sign variant (i^k left in place): the k-sum collapses to -V1.
/// The murmuration signal lives in the plain route; this one exists for
/// the sign-structure comparison.
pub fn numerator_sign_kernel(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    tol: f64,
) -> Result<f64> {
    let y_max = max_kernel_argument(profile, window);
    let v1 = KernelTable::build(profile, KernelKind::V1, y_max)?;
    let (k_min, _) = profile.k_window();
    let m_min = k_min as f64 - 1.0;
    prime_kloosterman_sum(profile, window, table, tol, m_min, |y| Ok(-v1.eval(y)))
}

/// Toy-scale spectral evaluation of the numerator from exact eigen data:
/// Σ_p log p Σ_k u(k-1) Σ_f ω_f ε_f λ_f(p), with k clipped to `k_cap`.
pub fn numerator_spectral(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    k_cap: u32,
) -> Result<f64> {
    let (p_lo, p_hi) = prime_window(profile, window);
    check_coverage(table, p_hi)?;
    if p_hi > 4000 {
        return Err(Error::Domain(format!(
            "spectral route is a toy-scale check; needs primes to {p_hi} > 4000"
        )));
    }
    let (k_min, k_max) = profile.k_window();
    let k_hi = k_cap.min(k_max).min(WEIGHT_CAP);
    let weights: Vec<u32> = (k_min.max(12)..=k_hi)
        .filter(|k| k % 2 == 0 && crate::modforms::dim_cusp_forms(*k).unwrap_or(0) > 0)
        .collect();
    let data = eigen_data_batch(&weights, p_hi)?;
    let data: Vec<_> = data
        .into_iter()
        .map(harmonic_weights)
        .collect::<Result<_>>()?;

    let (i0, i1) = table.prime_range(p_lo, p_hi);
    let primes = &table.primes()[i0..i1];
    let logs = &table.log_weights()[i0..i1];
    let per_prime: Result<Vec<f64>> = primes
        .par_iter()
        .zip(logs.par_iter())
        .map(|(&p, &w)| {
            let mut acc = CompensatedSum::new();
            for d in &data {
                let u = profile.weight_u(d.weight() as f64 - 1.0);
                acc.add(u * signed_spectral_average(d, p)?);
            }
            Ok(w * acc.value())
        })
        .collect();
    Ok(compensated_total(&per_prime?))
}

/// Decorrelated main term of the numerator: per squarefree c,
/// -(1/4π) μ²(c) c/φ(c) ∫ y·Im V2(y) dy over the window image.
pub fn numerator_mainterm(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
) -> Result<MainTerm> {
    let kk = profile.k_center();
    let y_max = max_kernel_argument(profile, window);
    let v2 = KernelTable::build(profile, KernelKind::V2, y_max)?;
    let (k_min, _) = profile.k_window();
    let m_min = k_min as f64 - 1.0;
    let closed_form = kk * kk * (window.hi.sqrt() - window.lo.sqrt()) * profile.w_hat_zero();
    let tol = 1e-10 * closed_form.abs().max(1.0);

    let y_lo_at = |c: f64| 4.0 * std::f64::consts::PI * kk * window.lo.sqrt() / c;
    let y_hi_at = |c: f64| 4.0 * std::f64::consts::PI * kk * window.hi.sqrt() / c;
    let mut acc = CompensatedSum::new();
    let mut c = 0u64;
    loop {
        c += 1;
        if c > table.small_limit() {
            return Err(Error::Domain(format!(
                "main-term c-sum needs μ, φ beyond the table ({})",
                table.small_limit()
            )));
        }
        let mu = table.mu(c) as f64;
        if mu != 0.0 {
            let integral = moment_integral(&v2, y_lo_at(c as f64), y_hi_at(c as f64));
            acc.add(
                -mu * mu * c as f64 / table.phi(c) as f64 * integral
                    / (4.0 * std::f64::consts::PI),
            );
        }
        // certified bound for every later c: y·|V2(y)| integrated over a
        // shrinking window, with c/φ(c) <= 2 ln(c+2)
        let cn = (c + 1) as f64;
        let y_hi = y_hi_at(cn);
        let per_c = 2.0 * (cn + 2.0).ln() * y_hi * (y_hi - y_lo_at(cn)).abs()
            * profile.weighted_envelope(y_hi)
            / (4.0 * std::f64::consts::PI);
        if c_tail_bound(per_c, c + 1, m_min - 4.0) <= tol {
            break;
        }
    }
    Ok(MainTerm {
        quadrature: acc.value(),
        closed_form,
    })
}

/// Simpson quadrature of ∫ y · table(y) dy at the table's own resolution.
fn moment_integral(table: &KernelTable, y_lo: f64, y_hi: f64) -> f64 {
    let lo = y_lo.max(0.0);
    let hi = y_hi.min(table.y_max());
    if hi <= lo {
        return 0.0;
    }
    let n = (((hi - lo) / table.step_size() * 2.0).ceil() as usize).next_multiple_of(2);
    let n = n.clamp(8, 1 << 22);
    let h = (hi - lo) / n as f64;
    let mut acc = CompensatedSum::new();
    let f = |y: f64| y * table.eval(y);
    acc.add(f(lo) + f(hi));
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(lo + j as f64 * h));
    }
    acc.value() * h / 3.0
}

/// Weighted family size: exact diagonal product plus the certified
/// off-diagonal Kloosterman series.
pub fn denominator(
    profile: &WeightProfile,
    window: Interval,
    table: &ArithmeticTable,
    tol: f64,
) -> Result<DenominatorParts> {
    let (p_lo, p_hi) = prime_window(profile, window);
    check_coverage(table, p_hi)?;
    let theta = table.theta_mass(p_lo, p_hi);
    let k_weight_sum = profile.class_weight_sum(0) + profile.class_weight_sum(2);
    let diag = theta * k_weight_sum;

    let (k_min, k_max) = profile.k_window();
    let m_min = k_min as f64 - 1.0;
    let n_top = (k_max - 1) as usize;
    let x_top = 4.0 * std::f64::consts::PI;
    let tol_inner = tol / (2.0 * std::f64::consts::PI * theta.max(1.0));
    let mut acc = CompensatedSum::new();
    let mut c = 0u64;
    loop {
        c += 1;
        let y = x_top / c as f64;
        let batch = bessel_batch(y, n_top)?;
        acc.add(
            kloosterman(1, 1, c) / c as f64 * clipped_weighted_sum(profile, &batch, k_max, true),
        );
        let next = profile.weighted_envelope(x_top / (c + 1) as f64);
        if c_tail_bound(next, c + 1, m_min) <= tol_inner {
            break;
        }
    }
    let offdiag = 2.0 * std::f64::consts::PI * theta * acc.value();
    Ok(DenominatorParts {
        total: diag + offdiag,
        diag,
        offdiag,
        theta_mass: theta,
        k_weight_sum,
    })
}

/// Residue-class sums Σ_{k≡b(4)} u(k-1) against (K/4)·Ŵ(0) = û(0)/4.
pub fn diagonal_poisson_check(profile: &WeightProfile) -> PoissonCheck {
    let reference = profile.u_hat_zero() / 4.0;
    let class0 = profile.class_weight_sum(0);
    let class2 = profile.class_weight_sum(2);
    PoissonCheck {
        class0,
        class2,
        reference,
        residual0: (class0 - reference).abs() / reference,
        residual2: (class2 - reference).abs() / reference,
    }
}

/// Run the full experiment at one (K, M, E).
pub fn murmuration_report(
    k_center: f64,
    width: f64,
    window: Interval,
    tol: f64,
) -> Result<MurmurationReport> {
    if width > k_center.powf(0.9) {
        return Err(Error::Parameter(format!(
            "width M = {width} above K^0.9 = {:.3}",
            k_center.powf(0.9)
        )));
    }
    let profile = make_profile(k_center, width, 1024)?;
    let p_hi = (window.hi * k_center * k_center).floor() as u64;
    let table = build_tables(p_hi + 1, 4096)?;
    let (i0, i1) = table.prime_range((window.lo * k_center * k_center).ceil() as u64, p_hi);

    let direct = numerator_direct(&profile, window, &table, tol)?;
    let y_max = max_kernel_argument(&profile, window);
    let v2 = KernelTable::build(&profile, KernelKind::V2, y_max)?;
    let kernel = numerator_kernel_with_table(&profile, window, &table, tol, &v2)?;
    if (direct - kernel).abs() > 1e-4 * direct.abs() {
        return Err(Error::Consistency(format!(
            "numerator routes disagree: direct {direct} vs kernel {kernel}"
        )));
    }
    let main = numerator_mainterm(&profile, window, &table)?;
    let den = denominator(&profile, window, &table, tol)?;
    if !(den.diag > 0.0) || den.offdiag.abs() >= den.diag {
        return Err(Error::Consistency(format!(
            "diagonal dominance violated: diag {} vs offdiag {}",
            den.diag, den.offdiag
        )));
    }

    let ratio = direct / den.total;
    let limit = 1.0 / (window.hi.sqrt() + window.lo.sqrt());
    let normalized_ratio = k_center * ratio;
    Ok(MurmurationReport {
        k_center,
        width,
        window_lo: window.lo,
        window_hi: window.hi,
        prime_count: i1 - i0,
        numerator_direct: direct,
        numerator_kernel: kernel,
        numerator_mainterm: main.quadrature,
        mainterm_closed_form: main.closed_form,
        denominator: den.total,
        denominator_diag: den.diag,
        denominator_offdiag: den.offdiag,
        ratio,
        predicted: limit / k_center,
        normalized_ratio,
        deviation: (normalized_ratio - limit).abs() / limit,
    })
}

/// CSV emitter for decorrelation scans:
/// `c,x,sum,main_term,normalized_residual`.
pub fn write_decorrelation_csv<W: Write>(
    reports: &[DecorrelationReport],
    mut w: W,
) -> Result<()> {
    writeln!(w, "c,x,sum,main_term,normalized_residual")?;
    for r in reports {
        writeln!(
            w,
            "{},{:.6e},{:.17e},{:.17e},{:.6e}",
            r.c, r.x, r.kloosterman_prime_sum, r.main_term, r.normalized_residual
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy_profile() -> WeightProfile {
        make_profile(30.0, 8.0, 256).unwrap()
    }

    fn toy_table() -> ArithmeticTable {
        build_tables(2000, 256).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(1.0, 2.0).is_ok());
        assert!(Interval::new(0.0, 2.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
    }

    #[test]
    fn numerator_additive_over_split_window() {
        let profile = toy_profile();
        let table = toy_table();
        let tol = 1e-9;
        let whole =
            numerator_direct(&profile, Interval::new(1.0, 2.0).unwrap(), &table, tol).unwrap();
        let left =
            numerator_direct(&profile, Interval::new(1.0, 1.5).unwrap(), &table, tol).unwrap();
        let right =
            numerator_direct(&profile, Interval::new(1.5, 2.0).unwrap(), &table, tol).unwrap();
        assert_relative_eq!(left + right, whole, max_relative = 1e-10);
    }

    #[test]
    fn numerator_routes_agree_at_toy_scale() {
        let profile = toy_profile();
        let table = toy_table();
        let window = Interval::new(1.0, 2.0).unwrap();
        let direct = numerator_direct(&profile, window, &table, 1e-9).unwrap();
        let kernel = numerator_kernel(&profile, window, &table, 1e-9).unwrap();
        assert!(
            (direct - kernel).abs() <= 1e-4 * direct.abs(),
            "direct {direct} vs kernel {kernel}"
        );
    }

    #[test]
    fn empty_window_gives_zero() {
        let profile = toy_profile();
        let table = toy_table();
        // a window containing no primes
        let w = Interval::new(1.000001, 1.000002).unwrap();
        assert_eq!(numerator_direct(&profile, w, &table, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn mainterm_scales_like_sqrt_difference() {
        let profile = make_profile(100.0, 10.0, 512).unwrap();
        let table = build_tables(40_100, 512).unwrap();
        let wide = numerator_mainterm(&profile, Interval::new(1.0, 4.0).unwrap(), &table)
            .unwrap()
            .quadrature;
        let narrow = numerator_mainterm(&profile, Interval::new(1.0, 2.25).unwrap(), &table)
            .unwrap()
            .quadrature;
        // (√4-1)/(√2.25-1) = 2
        assert!(
            (wide / narrow - 2.0).abs() <= 0.05 * 2.0,
            "scaling ratio {}",
            wide / narrow
        );
    }

    #[test]
    fn mainterm_vanishes_on_empty_interval() {
        let profile = toy_profile();
        let table = toy_table();
        let m = numerator_mainterm(&profile, Interval::new(1.0, 1.0 + 1e-12).unwrap(), &table)
            .unwrap();
        assert!(m.quadrature.abs() < 1e-9);
    }

    #[test]
    fn denominator_is_exact_product_plus_offdiag() {
        let profile = toy_profile();
        let table = toy_table();
        let window = Interval::new(1.0, 2.0).unwrap();
        let den = denominator(&profile, window, &table, 1e-9).unwrap();
        // diag is the product θ · Σ u(k-1); recompute the double sum
        let (p_lo, p_hi) = prime_window(&profile, window);
        let (i0, i1) = table.prime_range(p_lo, p_hi);
        let mut direct = 0.0;
        for idx in i0..i1 {
            let w = table.log_weights()[idx];
            let (k_min, k_max) = profile.k_window();
            let mut k = k_min;
            while k <= k_max {
                direct += w * profile.weight_u(k as f64 - 1.0);
                k += 2;
            }
        }
        assert_relative_eq!(den.diag, direct, max_relative = 1e-11);
        assert_eq!(den.total, den.diag + den.offdiag);
        assert!(den.diag > 0.0);
        assert!(den.offdiag.abs() < den.diag);
    }

    #[test]
    fn poisson_check_small_residuals() {
        let profile = make_profile(200.0, 40.0, 1024).unwrap();
        let check = diagonal_poisson_check(&profile);
        assert!(check.residual0 <= 1e-6, "class 0 residual {}", check.residual0);
        assert!(check.residual2 <= 1e-6, "class 2 residual {}", check.residual2);
        assert_relative_eq!(check.class0, check.class2, max_relative = 1e-6);
    }

    #[test]
    fn poisson_sum_proportional_to_width() {
        // at large K the plateau clipping is negligible and Ŵ(0) ∝ M
        let wide = make_profile(800.0, 80.0, 1024).unwrap();
        let narrow = make_profile(800.0, 40.0, 1024).unwrap();
        let r = diagonal_poisson_check(&wide).class0 / diagonal_poisson_check(&narrow).class0;
        assert_relative_eq!(r, 2.0, max_relative = 1e-3);
    }

    #[test]
    fn report_prediction_fields() {
        let report =
            murmuration_report(30.0, 8.0, Interval::new(1.0, 4.0).unwrap(), 1e-7).unwrap();
        assert_relative_eq!(report.predicted, (1.0 / 3.0) / 30.0, max_relative = 1e-14);
        assert!(report.denominator_diag > 0.0);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"numerator_direct\""));
    }
}
