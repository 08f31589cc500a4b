//! Exact integer q-expansions for level-1 modular forms.
//!
//! Everything here is big-integer arithmetic end to end: Eisenstein series
//! E4 and E6, the discriminant form, and the echelonized cusp-form basis
//! built from products Δ^i · E4^x · E6^y. Exactness only leaves at the
//! eigenvalue-extraction step in `eigen`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Truncated integer power series: coefficients of q^0 .. q^(len-1).
pub type Series = Vec<BigInt>;

pub fn series_mul(a: &Series, b: &Series, len: usize) -> Series {
    let mut out = vec![BigInt::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

fn divisor_power_sums(exponent: u32, len: usize) -> Vec<BigInt> {
    let mut sums = vec![BigInt::zero(); len];
    for d in 1..len {
        let dp = BigInt::from(d).pow(exponent);
        let mut m = d;
        while m < len {
            sums[m] += &dp;
            m += d;
        }
    }
    sums
}

/// E4 = 1 + 240 Σ σ₃(n) qⁿ.
pub fn eisenstein_e4(len: usize) -> Series {
    let s3 = divisor_power_sums(3, len);
    let mut e = vec![BigInt::zero(); len];
    e[0] = BigInt::one();
    for n in 1..len {
        e[n] = 240 * &s3[n];
    }
    e
}

/// E6 = 1 - 504 Σ σ₅(n) qⁿ.
pub fn eisenstein_e6(len: usize) -> Series {
    let s5 = divisor_power_sums(5, len);
    let mut e = vec![BigInt::zero(); len];
    e[0] = BigInt::one();
    for n in 1..len {
        e[n] = -504 * &s5[n];
    }
    e
}

/// Δ = (E4³ - E6²) / 1728, exactly.
pub fn discriminant(len: usize) -> Series {
    let e4 = eisenstein_e4(len);
    let e6 = eisenstein_e6(len);
    let e4_cubed = series_mul(&series_mul(&e4, &e4, len), &e4, len);
    let e6_squared = series_mul(&e6, &e6, len);
    (0..len)
        .map(|n| {
            let num = &e4_cubed[n] - &e6_squared[n];
            let (q, r) = num_integer::Integer::div_rem(&num, &BigInt::from(1728));
            debug_assert!(r.is_zero(), "discriminant coefficient not integral");
            q
        })
        .collect()
}

/// Dimension of the level-1 weight-k cusp space (k even).
pub fn dim_cusp_space(k: u32) -> usize {
    debug_assert!(k % 2 == 0);
    if k < 12 {
        0
    } else if k % 12 == 2 {
        (k / 12 - 1) as usize
    } else {
        (k / 12) as usize
    }
}

/// Exponents (x, y) with 4x + 6y = w for even w >= 0, w != 2.
fn eisenstein_exponents(w: u32) -> (u32, u32) {
    debug_assert!(w % 2 == 0 && w != 2);
    let y = if w % 4 == 0 { 0 } else { 1 };
    ((w - 6 * y) / 4, y)
}

/// Echelonized integral basis f_1, ..., f_d of the weight-k cusp space:
/// f_i = q^i + O(q^{d+1}), built from Δ^i E4^x E6^y and exact row
/// reduction (all pivots are 1, so integrality is preserved).
pub fn victor_miller_basis(k: u32, len: usize) -> Vec<Series> {
    let d = dim_cusp_space(k);
    if d == 0 {
        return Vec::new();
    }
    let e4 = eisenstein_e4(len);
    let e6 = eisenstein_e6(len);
    let delta = discriminant(len);

    let mut e4_pows: Vec<Series> = vec![unit_series(len)];
    let mut e6_pows: Vec<Series> = vec![unit_series(len)];
    let mut delta_pows: Vec<Series> = vec![unit_series(len)];
    let mut basis: Vec<Series> = Vec::with_capacity(d);
    for i in 1..=d {
        while delta_pows.len() <= i {
            let next = series_mul(delta_pows.last().unwrap(), &delta, len);
            delta_pows.push(next);
        }
        let w = k - 12 * i as u32;
        let (x, y) = eisenstein_exponents(w);
        while e4_pows.len() <= x as usize {
            let next = series_mul(e4_pows.last().unwrap(), &e4, len);
            e4_pows.push(next);
        }
        while e6_pows.len() <= y as usize {
            let next = series_mul(e6_pows.last().unwrap(), &e6, len);
            e6_pows.push(next);
        }
        let eis = series_mul(&e4_pows[x as usize], &e6_pows[y as usize], len);
        basis.push(series_mul(&delta_pows[i], &eis, len));
    }

    // row-reduce so that f_i = q^i + O(q^{d+1})
    for col in (1..=d).rev() {
        let pivot = basis[col - 1].clone();
        debug_assert!(pivot[col].is_one());
        for row in 0..col - 1 {
            let factor = basis[row][col].clone();
            if factor.is_zero() {
                continue;
            }
            for n in 0..len {
                let sub = &factor * &pivot[n];
                basis[row][n] -= sub;
            }
        }
    }
    basis
}

fn unit_series(len: usize) -> Series {
    let mut s = vec![BigInt::zero(); len];
    s[0] = BigInt::one();
    s
}

/// Coefficient of q^n in T_p f, for f with coefficients `c` of weight k:
/// a(pn) + p^{k-1} a(n/p).
pub fn hecke_coefficient(c: &Series, k: u32, p: u64, n: usize) -> BigInt {
    let pn = p as usize * n;
    assert!(pn < c.len(), "insufficient q-precision for T_{p} at q^{n}");
    let mut out = c[pn].clone();
    if n % p as usize == 0 {
        out += BigInt::from(p).pow(k - 1) * &c[n / p as usize];
    }
    out
}

/// Integer matrix of T_p on the echelonized basis: column i holds the
/// first d coefficients of T_p f_i.
pub fn hecke_matrix(basis: &[Series], k: u32, p: u64) -> Vec<Vec<BigInt>> {
    let d = basis.len();
    let mut m = vec![vec![BigInt::zero(); d]; d];
    for (i, f) in basis.iter().enumerate() {
        for j in 1..=d {
            m[j - 1][i] = hecke_coefficient(f, k, p, j);
        }
    }
    m
}
