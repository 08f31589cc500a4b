//! Exact integer arithmetic substrate: prime sieving with Chebyshev
//! log-weights, the multiplicative functions μ, φ, σ, and Kloosterman sums.
//!
//! The sieve is segmented so that prime enumeration up to ~1e8 stays within
//! a fixed memory budget. Kloosterman sums are evaluated by the direct
//! O(c) loop with modular inverses from the extended Euclidean algorithm;
//! at the modulus sizes this crate ever needs the c-sum has constant
//! length, so nothing sub-linear is warranted.

use crate::error::{Error, Result};
use crate::util::CompensatedSum;

/// Rough cap on the memory the table may allocate (bytes).
const MEMORY_BUDGET_BYTES: u64 = 2 << 30;

const SEGMENT_SIZE: u64 = 1 << 20;

/// Sieved primes with log-weights plus μ(n), φ(n), σ(n) up to `small_limit`.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct ArithmeticTable {
    limit: u64,
    small_limit: u64,
    primes: Vec<u64>,
    log_weights: Vec<f64>,
    mu: Vec<i8>,
    phi: Vec<u32>,
    sigma: Vec<u64>,
}

impl ArithmeticTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn small_limit(&self) -> u64 {
        self.small_limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// ln p for `primes()[i]`.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    pub fn mu(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.small_limit, "mu({n}) outside table");
        self.mu[n as usize]
    }

    pub fn phi(&self, n: u64) -> u64 {
        assert!(n >= 1 && n <= self.small_limit, "phi({n}) outside table");
        self.phi[n as usize] as u64
    }

    pub fn sigma(&self, n: u64) -> u64 {
        assert!(n >= 1 && n <= self.small_limit, "sigma({n}) outside table");
        self.sigma[n as usize]
    }

    /// Indices `[i, j)` into `primes()` covering primes in `[lo, hi]`.
    pub fn prime_range(&self, lo: u64, hi: u64) -> (usize, usize) {
        let i = self.primes.partition_point(|&p| p < lo);
        let j = self.primes.partition_point(|&p| p <= hi);
        (i, j)
    }

    /// Chebyshev θ over `[lo, hi]`: Σ log p with compensated summation.
    pub fn theta_mass(&self, lo: u64, hi: u64) -> f64 {
        let (i, j) = self.prime_range(lo, hi);
        let mut acc = CompensatedSum::new();
        for &w in &self.log_weights[i..j] {
            acc.add(w);
        }
        acc.value()
    }
}

/// Build the table of primes <= `limit` and μ/φ/σ up to `small_limit`.
pub fn build_tables(limit: u64, small_limit: u64) -> Result<ArithmeticTable> {
    if limit < 2 {
        return Err(Error::Parameter(format!("limit must be >= 2, got {limit}")));
    }
    if small_limit < 1 {
        return Err(Error::Parameter("small_limit must be >= 1".into()));
    }
    // 16 bytes per prime, 13 bytes per small integer, segment scratch.
    let prime_estimate = (limit as f64 / (limit as f64).ln().max(1.0) * 1.2) as u64 + 64;
    let estimated = prime_estimate * 16 + small_limit * 13 + SEGMENT_SIZE;
    if estimated > MEMORY_BUDGET_BYTES {
        return Err(Error::Resource(format!(
            "table for limit {limit}, small_limit {small_limit} would need ~{estimated} bytes"
        )));
    }

    let primes = segmented_sieve(limit);
    let log_weights = primes.iter().map(|&p| (p as f64).ln()).collect();
    let (mu, phi, sigma) = multiplicative_tables(small_limit as usize);

    Ok(ArithmeticTable {
        limit,
        small_limit,
        primes,
        log_weights,
        mu,
        phi,
        sigma,
    })
}

/// Simple sieve of Eratosthenes for the base primes.
fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    primes
}

fn segmented_sieve(limit: u64) -> Vec<u64> {
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = simple_sieve(root);
    let mut primes = Vec::with_capacity((limit as f64 / (limit as f64).ln() * 1.15) as usize + 16);
    primes.extend(base.iter().copied().filter(|&p| p <= limit));

    let mut lo = root + 1;
    let mut flags = vec![false; SEGMENT_SIZE as usize];
    while lo <= limit {
        let hi = (lo + SEGMENT_SIZE - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        flags[..len].fill(false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut start = lo.div_ceil(p) * p;
            if start < p * p {
                start = p * p;
            }
            let mut q = start;
            while q <= hi {
                flags[(q - lo) as usize] = true;
                q += p;
            }
        }
        for (i, &c) in flags[..len].iter().enumerate() {
            if !c {
                primes.push(lo + i as u64);
            }
        }
        lo = hi + 1;
    }
    primes
}

/// Sieve μ, φ, σ up to `n` via smallest-prime-factor decomposition.
fn multiplicative_tables(n: usize) -> (Vec<i8>, Vec<u32>, Vec<u64>) {
    let mut mu = vec![0i8; n + 1];
    let mut phi = vec![0u32; n + 1];
    let mut sigma = vec![0u64; n + 1];
    if n >= 1 {
        mu[1] = 1;
        phi[1] = 1;
        sigma[1] = 1;
    }
    // linear sieve: spf-driven, each m visited once per (prime, multiple)
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    for m in 2..=n {
        if spf[m] == 0 {
            spf[m] = m as u32;
            primes.push(m);
        }
        for &p in &primes {
            let v = m * p;
            if p > spf[m] as usize || v > n {
                break;
            }
            spf[v] = p as u32;
        }
    }
    for m in 2..=n {
        // peel off the full power of the smallest prime factor
        let p = spf[m] as usize;
        let mut rest = m;
        let mut e = 0u32;
        let mut pe = 1u64;
        while rest % p == 0 {
            rest /= p;
            e += 1;
            pe *= p as u64;
        }
        let (mu_r, phi_r, sigma_r) = (mu[rest], phi[rest] as u64, sigma[rest]);
        mu[m] = if e > 1 { 0 } else { -mu_r };
        phi[m] = (phi_r * (pe - pe / p as u64)) as u32;
        sigma[m] = sigma_r * ((pe * p as u64 - 1) / (p as u64 - 1));
    }
    (mu, phi, sigma)
}

/// Modular inverse of `a` mod `m` (extended Euclid); `gcd(a, m)` must be 1.
fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "inverse of non-unit {a} mod {m}");
    old_s.rem_euclid(m as i128) as u64
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Kloosterman sum S(m, n; c) = Σ_{x mod c, (x,c)=1} e((m x + n x̄)/c).
///
/// The sum is real by the x ↔ -x symmetry; the accumulated imaginary part
/// is asserted to stay below 1e-10 · c and the real part is returned.
/// Pure and thread-safe.
pub fn kloosterman(m: i64, n: i64, c: u64) -> f64 {
    assert!(c >= 1, "modulus must be positive");
    if c == 1 {
        return 1.0;
    }
    let cm = c as i128;
    let two_pi_over_c = 2.0 * std::f64::consts::PI / c as f64;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for x in 1..=c {
        if gcd(x, c) != 1 {
            continue;
        }
        let xbar = mod_inverse(x, c);
        let num = (m as i128 * x as i128 + n as i128 * xbar as i128).rem_euclid(cm);
        let angle = two_pi_over_c * num as f64;
        re.add(angle.cos());
        im.add(angle.sin());
    }
    let imag = im.value();
    assert!(
        imag.abs() <= 1e-10 * c as f64,
        "Kloosterman imaginary residue {imag} too large for S({m},{n};{c})"
    );
    re.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Brute-force μ, φ, σ by divisor enumeration.
    fn mu_phi_sigma_naive(n: u64) -> (i64, u64, u64) {
        let mut phi = 0;
        for k in 1..=n {
            if gcd(k, n) == 1 {
                phi += 1;
            }
        }
        let sigma = (1..=n).filter(|d| n % d == 0).sum();
        // μ via factorization
        let mut m = n;
        let mut mu = 1i64;
        let mut p = 2;
        while p * p <= m {
            if m % p == 0 {
                m /= p;
                if m % p == 0 {
                    mu = 0;
                    break;
                }
                mu = -mu;
            }
            p += 1;
        }
        if mu != 0 && m > 1 {
            mu = -mu;
        }
        (mu, phi, sigma)
    }

    fn is_prime_naive(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    /// Direct O(c) oracle, returning both parts of the complex sum.
    fn kloosterman_naive(m: i64, n: i64, c: u64) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for x in 1..=c {
            if gcd(x, c) != 1 {
                continue;
            }
            let xbar = mod_inverse(x, c);
            let num = (m as i128 * x as i128 + n as i128 * xbar as i128).rem_euclid(c as i128);
            let angle = 2.0 * std::f64::consts::PI * num as f64 / c as f64;
            re += angle.cos();
            im += angle.sin();
        }
        (re, im)
    }

    #[test]
    fn empty_product_values() {
        let t = build_tables(10, 10).unwrap();
        assert_eq!(t.mu(1), 1);
        assert_eq!(t.phi(1), 1);
        assert_eq!(t.sigma(1), 1);
    }

    #[test]
    fn multiplicative_values_match_brute_force() {
        let t = build_tables(10, 400).unwrap();
        assert_eq!(t.mu(4), 0);
        assert_eq!(t.phi(12), 4);
        assert_eq!(t.sigma(6), 12);
        for n in 1..=400u64 {
            let (mu, phi, sigma) = mu_phi_sigma_naive(n);
            assert_eq!(t.mu(n) as i64, mu, "mu({n})");
            assert_eq!(t.phi(n), phi, "phi({n})");
            assert_eq!(t.sigma(n), sigma, "sigma({n})");
        }
    }

    #[test]
    fn multiplicativity_on_coprime_pairs() {
        let t = build_tables(10, 1000).unwrap();
        for a in 2..40u64 {
            for b in 2..40u64 {
                if gcd(a, b) == 1 && a * b <= 1000 {
                    assert_eq!(t.phi(a) * t.phi(b), t.phi(a * b));
                    assert_eq!(t.sigma(a) * t.sigma(b), t.sigma(a * b));
                }
            }
        }
    }

    #[test]
    fn chebyshev_theta_100() {
        // direct summation over the 25 primes <= 100
        let primes_to_100: [u64; 25] = [
            2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
            83, 89, 97,
        ];
        let expected: f64 = primes_to_100.iter().map(|&p| (p as f64).ln()).sum();
        let t = build_tables(100, 10).unwrap();
        assert_eq!(t.prime_count(), 25);
        assert_relative_eq!(t.theta_mass(2, 100), expected, max_relative = 1e-14);
    }

    #[test]
    fn sieve_completeness_to_1e6() {
        let t = build_tables(1_000_000, 10).unwrap();
        assert_eq!(t.prime_count(), 78_498);
        // trial-division spot check on a 1e4 stretch
        let (lo, hi) = (990_000u64, 1_000_000u64);
        let from_table: Vec<u64> = {
            let (i, j) = t.prime_range(lo, hi);
            t.primes()[i..j].to_vec()
        };
        let direct: Vec<u64> = (lo..=hi).filter(|&n| is_prime_naive(n)).collect();
        assert_eq!(from_table, direct);
    }

    #[test]
    fn table_memory_budget_enforced() {
        assert!(matches!(
            build_tables(u64::MAX / 4, 10),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn kloosterman_trivial_and_small_moduli() {
        assert_eq!(kloosterman(1, 1, 1), 1.0);
        // x = 1 and x = 2 both contribute e(integer) = 1
        assert_relative_eq!(kloosterman(1, 2, 3), 2.0, max_relative = 1e-12);
        let (re, im) = kloosterman_naive(1, 2, 3);
        assert_relative_eq!(re, 2.0, max_relative = 1e-12);
        assert!(im.abs() < 1e-12);
    }

    #[test]
    fn kloosterman_symmetry_against_oracle() {
        // S(1, p; c) = S(p, 1; c): substitution x <-> x̄ in the oracle
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..50 {
            let p = 2 + (next() % 500) as i64;
            let c = 1 + next() % 300;
            let a = kloosterman(1, p, c);
            let b = kloosterman(p, 1, c);
            assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-9);
            let (re, _) = kloosterman_naive(1, p, c);
            assert_relative_eq!(a, re, max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    #[test]
    fn kloosterman_prime_modulus_special_values() {
        // for prime modulus q | n - 1 the sum collapses onto Ramanujan-type
        // values; check exact agreement with the direct oracle
        for q in [3u64, 5, 7, 11, 13] {
            for k in 1..4 {
                let n = (1 + k * q) as i64;
                let (re, _) = kloosterman_naive(1, n, q);
                assert_relative_eq!(kloosterman(1, n, q), re, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn weil_bound_on_squarefree_moduli() {
        let t = build_tables(10, 1024).unwrap();
        let divisor_count = |c: u64| (1..=c).filter(|d| c % d == 0).count() as f64;
        // deterministic subsample of squarefree c <= 1000 and n <= 1000
        for c in (2..=1000u64).step_by(7) {
            if t.mu(c) == 0 {
                continue;
            }
            let bound = divisor_count(c) * (c as f64).sqrt();
            for n in (1..=1000i64).step_by(211) {
                assert!(
                    kloosterman(1, n, c).abs() <= bound + 1e-8,
                    "Weil bound violated at c={c}, n={n}"
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kloosterman_matches_oracle(m in -50i64..50, n in -50i64..50, c in 1u64..200) {
            let (re, im) = kloosterman_naive(m, n, c);
            prop_assert!(im.abs() <= 1e-10 * c as f64);
            let v = kloosterman(m, n, c);
            prop_assert!((v - re).abs() <= 1e-9 * (1.0 + re.abs()));
        }

        #[test]
        fn weil_bound_random_squarefree(c in 2u64..1000, n in 1i64..1000) {
            let squarefree = (2..=31u64).all(|d| d * d > c || c % (d * d) != 0);
            if squarefree {
                let d = (1..=c).filter(|k| c % k == 0).count() as f64;
                prop_assert!(kloosterman(1, n, c).abs() <= d * (c as f64).sqrt() + 1e-8);
            }
        }
    }
}
