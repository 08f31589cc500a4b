//! Arithmetic series of the experiment: the Kloosterman-prime
//! decorrelation sum, the squarefree L-series in its two representations,
//! and the limiting density ν(E) in both its rational-sum and cosine-sum
//! forms.

use serde::Serialize;

use crate::arithcore::{build_tables, kloosterman, ArithmeticTable};
use crate::error::{Error, Result};
use crate::util::CompensatedSum;

/// Σ_{p<=x, p∤c} S(1,p;c) log p against its decorrelation main term.
#[derive(Debug, Clone, Serialize)]
pub struct DecorrelationReport {
    pub c: u64,
    pub x: f64,
    pub kloosterman_prime_sum: f64,
    pub main_term: f64,
    /// |sum - main| / (φ(c) sqrt(x) log²(cx))
    pub normalized_residual: f64,
}

/// Exact decorrelation sum; S(1, p; c) depends only on p mod c, so the
/// prime mass is accumulated per residue class first.
pub fn decorrelation_sum(c: u64, x: f64, table: &ArithmeticTable) -> Result<DecorrelationReport> {
    if c < 1 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    if x < 2.0 || x > table.limit() as f64 {
        return Err(Error::Domain(format!(
            "x = {x} outside table coverage [2, {}]",
            table.limit()
        )));
    }
    if c > table.small_limit() {
        return Err(Error::Domain(format!(
            "c = {c} beyond small-function table ({})",
            table.small_limit()
        )));
    }
    // θ mass per residue class mod c
    let mut class_theta = vec![CompensatedSum::new(); c as usize];
    let (i0, i1) = table.prime_range(2, x.floor() as u64);
    let primes = &table.primes()[i0..i1];
    let logs = &table.log_weights()[i0..i1];
    for (p, w) in primes.iter().zip(logs) {
        if c % p != 0 {
            class_theta[(p % c) as usize].add(*w);
        }
    }
    let mut acc = CompensatedSum::new();
    for (r, theta) in class_theta.iter().enumerate() {
        let mass = theta.value();
        if mass != 0.0 {
            acc.add(kloosterman(1, r as i64, c) * mass);
        }
    }
    let sum = acc.value();
    let mu = table.mu(c) as f64;
    let main_term = x * mu * mu / table.phi(c) as f64;
    let scale = table.phi(c) as f64 * x.sqrt() * (c as f64 * x).ln().powi(2);
    Ok(DecorrelationReport {
        c,
        x,
        kloosterman_prime_sum: sum,
        main_term,
        normalized_residual: (sum - main_term).abs() / scale,
    })
}

/// Default truncations for `l_series`.
pub const DEFAULT_TERM_CUT: u64 = 10_000_000;
pub const DEFAULT_PRIME_CUT: u64 = 100_000;

/// The two representations of L(s) = Σ μ(c)²/(φ(c) c^s).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LSeriesValues {
    pub dirichlet: f64,
    pub euler: f64,
}

/// Riemann zeta for real s > 0, s != 1, by Euler-Maclaurin.
pub fn zeta(s: f64) -> f64 {
    debug_assert!(s > 0.0 && s != 1.0);
    let n = 50usize;
    let mut acc = CompensatedSum::new();
    for k in 1..n {
        acc.add((k as f64).powf(-s));
    }
    let nf = n as f64;
    acc.add(nf.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * nf.powf(-s));
    // Bernoulli tail B_2, B_4, ..., B_12
    const BERN: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    let mut factorial = 1.0f64;
    for (j, b) in BERN.iter().enumerate() {
        let order = 2 * (j + 1);
        factorial *= (order - 1).max(1) as f64 * order as f64;
        acc.add(b / factorial * rising * power);
        rising *= (s + order as f64 - 1.0) * (s + order as f64);
        power /= nf * nf;
    }
    acc.value()
}

/// Both representations of L(s) at the stated truncations.
///
/// The partial Dirichlet sum needs s > 0; the product form is valid for
/// s > -1/2, s != 0 (simple pole at 0 with residue 1).
pub fn l_series(
    s: f64,
    prime_cut: u64,
    term_cut: u64,
    table: &ArithmeticTable,
) -> Result<LSeriesValues> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "Dirichlet partial sum diverges at s = {s}; need s > 0"
        )));
    }
    if term_cut > table.small_limit() {
        return Err(Error::Domain(format!(
            "term cut {term_cut} beyond small-function table ({})",
            table.small_limit()
        )));
    }
    if prime_cut > table.limit() {
        return Err(Error::Domain(format!(
            "prime cut {prime_cut} beyond sieve limit ({})",
            table.limit()
        )));
    }
    let mut acc = CompensatedSum::new();
    for c in 1..=term_cut {
        let mu = table.mu(c);
        if mu != 0 {
            acc.add((c as f64).powf(-s) / table.phi(c) as f64);
        }
    }
    let euler = l_series_euler(s, prime_cut, table)?;
    Ok(LSeriesValues {
        dirichlet: acc.value(),
        euler,
    })
}

/// Product form alone: ζ(s+1)/ζ(2s+2) · Π_p (1 + p^{-s-2}/((1-p^{-1})(1+p^{-1-s}))).
pub fn l_series_euler(s: f64, prime_cut: u64, table: &ArithmeticTable) -> Result<f64> {
    if !(s > -0.5) || s == 0.0 {
        return Err(Error::Domain(format!(
            "product form needs s > -1/2, s != 0; got {s}"
        )));
    }
    if prime_cut > table.limit() {
        return Err(Error::Domain(format!(
            "prime cut {prime_cut} beyond sieve limit ({})",
            table.limit()
        )));
    }
    let (i0, i1) = table.prime_range(2, prime_cut);
    let mut log_prod = CompensatedSum::new();
    for &p in &table.primes()[i0..i1] {
        let pf = p as f64;
        let factor = 1.0 + pf.powf(-s - 2.0) / ((1.0 - 1.0 / pf) * (1.0 + pf.powf(-1.0 - s)));
        log_prod.add(factor.ln());
    }
    Ok(zeta(s + 1.0) / zeta(2.0 * s + 2.0) * log_prod.value().exp())
}

/// Per-factor value of the Euler product, exposed for the factor-shape
/// checks.
pub fn euler_factor(s: f64, p: u64) -> f64 {
    let pf = p as f64;
    1.0 + pf.powf(-s - 2.0) / ((1.0 - 1.0 / pf) * (1.0 + pf.powf(-1.0 - s)))
}

/// ν(E) in both closed forms with truncation-error estimates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NuDensity {
    pub rational_form: f64,
    pub cosine_form: f64,
    pub rational_tail_estimate: f64,
    pub cosine_tail_estimate: f64,
}

/// Prime cut for the cosine-side products; the neglected factors change
/// the product by < 1e-9 relatively.
const NU_PRIME_CUT: u64 = 100_000;

/// Both forms of ν([A, B]).
///
/// The rational form sums μ(q)²/(φ(q)²σ(q)) (q/a)³ over coprime pairs
/// with (q/a)² strictly inside E, plus half-weight for the (at most one
/// per endpoint) coprime pair landing exactly on a boundary — the
/// convention that makes the symmetric cosine-sum limit and additivity
/// over adjacent windows exact. The cosine form integrates
/// cos(2πt/√y) with Filon-type panels so that accuracy is uniform in t.
pub fn nu_density(a: f64, b: f64, q_cut: u64, t_cut: u64, quad_tol: f64) -> Result<NuDensity> {
    if !(a > 0.0 && b > a) {
        return Err(Error::Domain(format!("need 0 < A < B, got [{a}, {b}]")));
    }
    let sqrt_a = a.sqrt();
    let sqrt_b = b.sqrt();
    let table = build_tables(NU_PRIME_CUT, q_cut.max(64))?;

    // prefix sums of m^{-3} up to the largest m the Möbius split can ask for
    let m_top = (q_cut as f64 / sqrt_a).ceil() as usize + 2;
    let mut s3 = vec![0.0f64; m_top + 1];
    let mut acc = CompensatedSum::new();
    for (m, slot) in s3.iter_mut().enumerate().skip(1) {
        acc.add(1.0 / (m as f64).powi(3));
        *slot = acc.value();
    }
    let s3_range = |lo: f64, hi: f64| -> f64 {
        // Σ m^{-3} over integers strictly inside (lo, hi)
        let m_lo = strict_floor_plus_one(lo);
        let m_hi = strict_ceil_minus_one(hi);
        if m_hi < m_lo {
            return 0.0;
        }
        s3[m_hi.min(m_top)] - s3[m_lo - 1]
    };

    let mut rational = CompensatedSum::new();
    let mut last_decade = CompensatedSum::new();
    for q in 1..=q_cut {
        if table.mu(q) == 0 {
            continue;
        }
        let qf = q as f64;
        let weight = qf.powi(3)
            / ((table.phi(q) as f64).powi(2) * table.sigma(q) as f64);
        let mut inner = 0.0;
        for (d, mu_d) in squarefree_divisors(q, &table) {
            let df = d as f64;
            inner += mu_d as f64 / df.powi(3) * s3_range(qf / (df * sqrt_b), qf / (df * sqrt_a));
        }
        let term = weight * inner;
        rational.add(term);
        if 10 * q >= 9 * q_cut {
            last_decade.add(term.abs());
        }
    }
    // half-weight boundary pairs where (q/a)² hits A or B exactly
    for &y in &[a, b] {
        if let Some((s, r)) = rational_sqrt(y) {
            if r <= q_cut && table.mu(r) != 0 {
                let rf = r as f64;
                rational.add(
                    0.5 * (rf / s as f64).powi(3)
                        / ((table.phi(r) as f64).powi(2) * table.sigma(r) as f64),
                );
            }
        }
    }
    let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let rational_form = rational.value() / zeta2;
    // terms decay like 1/q²; extrapolate the last decade harmonically
    let rational_tail_estimate = last_decade.value() * 9.0 / zeta2;

    // cosine side
    let (i0, i1) = table.prime_range(2, NU_PRIME_CUT);
    let mut log_global = CompensatedSum::new();
    for &p in &table.primes()[i0..i1] {
        let pf = p as f64;
        log_global.add((1.0 - 1.0 / (pf * (pf - 1.0))).ln());
    }
    let global = log_global.value().exp();
    let s_lo = 1.0 / sqrt_b;
    let s_hi = 1.0 / sqrt_a;
    let panels = FilonPanels::new(s_lo, s_hi, 64);
    let mut cosine = CompensatedSum::new();
    // t = 0: every prime divides 0, so the product over p ∤ t is empty
    cosine.add(0.5 * (b - a));
    let mut tail_probe = 0.0f64;
    for t in 1..=t_cut {
        // Π_{p|t} ρ_p^{-1} correction to the global product
        let mut correction = 1.0;
        let mut rest = t;
        for &p in table.primes() {
            if p * p > rest {
                break;
            }
            if rest % p == 0 {
                let pf = p as f64;
                correction /= 1.0 - 1.0 / (pf * (pf - 1.0));
                while rest % p == 0 {
                    rest /= p;
                }
            }
        }
        if rest > 1 {
            let pf = rest as f64;
            correction /= 1.0 - 1.0 / (pf * (pf - 1.0));
        }
        let integral = panels.oscillatory_integral(2.0 * std::f64::consts::PI * t as f64);
        let term = global * correction * integral;
        cosine.add(term);
        if 10 * t >= 9 * t_cut {
            tail_probe = tail_probe.max(term.abs());
        }
    }
    let cosine_form = cosine.value();
    let cosine_tail_estimate = tail_probe * t_cut as f64 * 0.25;

    let est = rational_tail_estimate + cosine_tail_estimate;
    if est > quad_tol {
        return Err(Error::Precision(format!(
            "ν(E) truncation estimate {est:.3e} above {quad_tol:.3e}; \
             try q_cut >= {} and t_cut >= {}",
            q_cut * 4,
            t_cut * 4
        )));
    }
    Ok(NuDensity {
        rational_form,
        cosine_form,
        rational_tail_estimate,
        cosine_tail_estimate,
    })
}

fn strict_floor_plus_one(x: f64) -> usize {
    let f = x.floor();
    if f == x {
        x as usize + 1
    } else {
        f as usize + 1
    }
}

fn strict_ceil_minus_one(x: f64) -> usize {
    let c = x.ceil();
    let v = if c == x { x as i64 - 1 } else { c as i64 - 1 };
    v.max(0) as usize
}

/// Squarefree divisors of squarefree q with their Möbius signs.
fn squarefree_divisors(q: u64, table: &ArithmeticTable) -> Vec<(u64, i8)> {
    let mut factors = Vec::new();
    let mut rest = q;
    for &p in table.primes() {
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            factors.push(p);
            rest /= p;
        }
    }
    if rest > 1 {
        factors.push(rest);
    }
    let mut divs = vec![(1u64, 1i8)];
    for &p in &factors {
        let mut next = Vec::with_capacity(divs.len() * 2);
        for &(d, s) in &divs {
            next.push((d, s));
            next.push((d * p, -s));
        }
        divs = next;
    }
    divs
}

/// √y = r/s in lowest terms, if y is the square of a small rational.
fn rational_sqrt(y: f64) -> Option<(u64, u64)> {
    let root = y.sqrt();
    for s in 1..=10_000u64 {
        let r = (root * s as f64).round();
        if r >= 1.0 && ((r / s as f64).powi(2) - y).abs() < 1e-12 * y {
            let g = num_integer::gcd(r as u64, s);
            return Some((s / g, r as u64 / g));
        }
    }
    None
}

/// Fixed Filon panels for ∫ 2 s^{-3} cos(c·s) ds over [lo, hi]: cubic
/// Hermite amplitude per panel against exact oscillatory moments, so the
/// error is independent of the frequency c.
struct FilonPanels {
    starts: Vec<f64>,
    width: f64,
    /// power-basis coefficients of the Hermite cubic per panel
    coeffs: Vec<[f64; 4]>,
}

impl FilonPanels {
    fn new(lo: f64, hi: f64, n: usize) -> FilonPanels {
        let width = (hi - lo) / n as f64;
        let g = |s: f64| 2.0 / (s * s * s);
        let dg = |s: f64| -6.0 / (s * s * s * s);
        let mut starts = Vec::with_capacity(n);
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let a = lo + i as f64 * width;
            let b = a + width;
            let (fa, fb, da, db) = (g(a), g(b), dg(a), dg(b));
            let h = width;
            // Hermite cubic in u = s - a: c0 + c1 u + c2 u² + c3 u³
            let c0 = fa;
            let c1 = da;
            let c2 = (3.0 * (fb - fa) / h - 2.0 * da - db) / h;
            let c3 = (2.0 * (fa - fb) / h + da + db) / (h * h);
            starts.push(a);
            coeffs.push([c0, c1, c2, c3]);
        }
        FilonPanels {
            starts,
            width,
            coeffs,
        }
    }

    /// Re ∫ g(s) e^{i c s} ds with the panelized cubic amplitude.
    fn oscillatory_integral(&self, c: f64) -> f64 {
        let h = self.width;
        let mut total = CompensatedSum::new();
        if c.abs() * h < 0.5 {
            // low frequency: five-point Simpson per panel is exact enough
            for (i, &a) in self.starts.iter().enumerate() {
                let cf = &self.coeffs[i];
                let eval = |u: f64| {
                    (cf[0] + u * (cf[1] + u * (cf[2] + u * cf[3]))) * (c * (a + u)).cos()
                };
                let q = h / 12.0
                    * (eval(0.0) + 4.0 * eval(0.25 * h) + 2.0 * eval(0.5 * h)
                        + 4.0 * eval(0.75 * h)
                        + eval(h));
                total.add(q);
            }
            return total.value();
        }
        for (i, &a) in self.starts.iter().enumerate() {
            let cf = &self.coeffs[i];
            // moments M_k = ∫_0^h u^k e^{icu} du by upward recurrence
            let ic = num_complex::Complex64::new(0.0, c);
            let eich = (ic * h).exp();
            let mut m = [num_complex::Complex64::new(0.0, 0.0); 4];
            m[0] = (eich - 1.0) / ic;
            let mut hk = 1.0;
            for k in 1..4 {
                hk *= h;
                m[k] = (eich * hk - k as f64 * m[k - 1]) / ic;
            }
            let inner: num_complex::Complex64 =
                (0..4).map(|k| m[k] * cf[k]).sum();
            let phase = num_complex::Complex64::new(0.0, c * a).exp();
            total.add((phase * inner).re);
        }
        total.value()
    }
}
