//! Eigenvalue extraction for small integer Hecke matrices.
//!
//! Raw eigenform coefficients grow like n^{(k-1)/2}, so reading them off
//! through floating-point eigenvectors loses all significance to
//! cancellation. The pipeline here stays exact until the very end:
//!
//! 1. characteristic polynomial of the integer matrix by
//!    Faddeev-LeVerrier (all divisions exact),
//! 2. root bracketing on the normalized polynomial in f64 (roots lie in
//!    [-2, 2] after dividing by p^{(k-1)/2}),
//! 3. Newton refinement of the raw root in 1024-bit fixed point,
//! 4. kernel vector of (M - aI) by adjugate columns in fixed point.
//!
//! With ~300 decimal digits of working precision the 10^130-scale
//! cancellation in coefficient extraction still leaves the results exact
//! to far below every tolerance in the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Binary digits after the point.
const SHIFT: u32 = 1024;

/// Fixed-point number: value = mant / 2^SHIFT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fx(BigInt);

impl Fx {
    pub fn zero() -> Fx {
        Fx(BigInt::zero())
    }

    pub fn from_bigint(v: &BigInt) -> Fx {
        Fx(v << SHIFT)
    }

    pub fn from_i64(v: i64) -> Fx {
        Fx(BigInt::from(v) << SHIFT)
    }

    /// Exact for |x| < 2^63; adequate seeds come from f64 root brackets.
    pub fn from_f64(x: f64) -> Fx {
        assert!(x.is_finite() && x.abs() < 9.2e18);
        let scaled = (x * (1u64 << 32) as f64) as i128;
        Fx((BigInt::from(scaled)) << (SHIFT - 32))
    }

    pub fn to_f64(&self) -> f64 {
        // split the shift so neither factor over/underflows for the
        // magnitudes this crate produces
        let hi: BigInt = &self.0 >> (SHIFT / 2);
        hi.to_f64().unwrap_or(f64::NAN) / 2f64.powi((SHIFT / 2) as i32)
    }

    pub fn add(&self, rhs: &Fx) -> Fx {
        Fx(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &Fx) -> Fx {
        Fx(&self.0 - &rhs.0)
    }

    pub fn mul(&self, rhs: &Fx) -> Fx {
        Fx((&self.0 * &rhs.0) >> SHIFT)
    }

    pub fn mul_bigint(&self, rhs: &BigInt) -> Fx {
        Fx(&self.0 * rhs)
    }

    pub fn div(&self, rhs: &Fx) -> Fx {
        assert!(!rhs.0.is_zero(), "fixed-point division by zero");
        Fx((&self.0 << SHIFT) / &rhs.0)
    }

    pub fn neg(&self) -> Fx {
        Fx(-&self.0)
    }

    pub fn abs(&self) -> Fx {
        Fx(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn lt(&self, rhs: &Fx) -> bool {
        self.0 < rhs.0
    }

    /// sqrt by integer square root of the shifted mantissa.
    pub fn sqrt(&self) -> Fx {
        assert!(!self.0.is_negative());
        Fx((&self.0 << SHIFT).sqrt())
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut e: u32) -> Fx {
        let mut base = self.clone();
        let mut acc = Fx::from_i64(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

/// p^{(k-1)/2} for even k, as fixed point (half-integer exponent).
pub fn half_power(p: u64, k: u32) -> Fx {
    debug_assert!(k % 2 == 0 && k >= 2);
    let whole = Fx::from_bigint(&BigInt::from(p).pow((k - 2) / 2));
    whole.mul(&Fx::from_i64(p as i64).sqrt())
}

/// Characteristic polynomial of an integer matrix by Faddeev-LeVerrier.
/// Returns coefficients c[0..=d] of c_0 + c_1 x + ... + c_d x^d (monic).
pub fn char_poly(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let d = m.len();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::from(1);
    if d == 0 {
        return coeffs;
    }
    let mut aux = m.to_vec();
    for step in 1..=d {
        let trace: BigInt = (0..d).map(|i| aux[i][i].clone()).sum();
        let (c, rem) = trace.div_rem(&BigInt::from(step));
        debug_assert!(rem.is_zero(), "Faddeev-LeVerrier division not exact");
        let c = -c;
        coeffs[d - step] = c.clone();
        if step == d {
            break;
        }
        for i in 0..d {
            aux[i][i] += &c;
        }
        aux = mat_mul(m, &aux);
    }
    coeffs
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let d = a.len();
    let mut out = vec![vec![BigInt::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = BigInt::zero();
            for (l, bl) in b.iter().enumerate() {
                acc += &a[i][l] * &bl[j];
            }
            out[i][j] = acc;
        }
    }
    out
}

/// c / p^{half_exponents/2} as f64, for mantissas far beyond f64 range.
pub fn scaled_to_f64(c: &BigInt, p: u64, half_exponents: u32) -> f64 {
    let whole = half_exponents / 2;
    let denom = BigInt::from(p).pow(whole);
    let (q, r) = c.div_rem(&denom);
    let frac_num: BigInt = (r << 64u32) / &denom;
    let mut val = q.to_f64().unwrap_or(f64::NAN)
        + frac_num.to_f64().unwrap_or(f64::NAN) / 2f64.powi(64);
    if half_exponents % 2 == 1 {
        val /= (p as f64).sqrt();
    }
    val
}

/// Real roots of the monic integer polynomial, normalized by
/// s = p^{(k-1)/2} so they land in [-2-eps, 2+eps], refined in fixed
/// point. Returns (raw_root, normalized_root) sorted ascending by the
/// normalized value.
pub fn normalized_real_roots(coeffs: &[BigInt], p: u64, k: u32) -> Result<Vec<(Fx, f64)>> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    // normalized polynomial q(λ) = Σ c_j s^{j-d} λ^j in f64
    let qc: Vec<f64> = (0..=d)
        .map(|j| scaled_to_f64(&coeffs[j], p, (k - 1) * (d - j) as u32))
        .collect();
    let eval = |x: f64| {
        let mut acc = 0.0;
        for c in qc.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    // bracket sign changes on [-2.05, 2.05]
    let mut brackets = Vec::new();
    let steps = 200_000usize;
    let (lo, hi) = (-2.05f64, 2.05f64);
    let mut prev = eval(lo);
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let cur = eval(x);
        if prev == 0.0 {
            brackets.push(lo + (hi - lo) * (i - 1) as f64 / steps as f64);
        } else if prev * cur < 0.0 {
            // bisect a few times then take the midpoint as seed
            let mut a = lo + (hi - lo) * (i - 1) as f64 / steps as f64;
            let mut b = x;
            let mut fa = prev;
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = eval(mid);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            brackets.push(0.5 * (a + b));
        }
        prev = cur;
    }
    if brackets.len() != d {
        return Err(Error::Degeneracy(format!(
            "expected {d} simple real eigenvalues, bracketed {}",
            brackets.len()
        )));
    }
    for w in brackets.windows(2) {
        if (w[1] - w[0]).abs() < 1e-6 {
            return Err(Error::Degeneracy(format!(
                "eigenvalue gap {} below tolerance",
                w[1] - w[0]
            )));
        }
    }

    // refine raw roots a = λ·s in fixed point by Newton on the exact poly
    let s = half_power(p, k);
    let mut out = Vec::with_capacity(d);
    for &lam in &brackets {
        let mut a = Fx::from_f64(lam).mul(&s);
        for _ in 0..7 {
            let (val, deriv) = horner_fx(coeffs, &a);
            if deriv.is_zero() {
                return Err(Error::Degeneracy("vanishing derivative at root".into()));
            }
            a = a.sub(&val.div(&deriv));
        }
        let normalized = a.div(&s).to_f64();
        out.push((a, normalized));
    }
    out.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    Ok(out)
}

/// Polynomial and derivative at a fixed-point argument (Horner).
pub fn horner_fx(coeffs: &[BigInt], x: &Fx) -> (Fx, Fx) {
    let mut val = Fx::zero();
    let mut deriv = Fx::zero();
    for c in coeffs.iter().rev() {
        deriv = deriv.mul(x).add(&val);
        val = val.mul(x).add(&Fx::from_bigint(c));
    }
    (val, deriv)
}

/// Kernel vector of (M - aI) via the adjugate column of largest norm.
pub fn kernel_vector(m: &[Vec<BigInt>], a: &Fx) -> Result<Vec<Fx>> {
    let d = m.len();
    if d == 1 {
        return Ok(vec![Fx::from_i64(1)]);
    }
    let shifted: Vec<Vec<Fx>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let base = Fx::from_bigint(&m[i][j]);
                    if i == j {
                        base.sub(a)
                    } else {
                        base
                    }
                })
                .collect()
        })
        .collect();
    let mut best: Option<Vec<Fx>> = None;
    let mut best_norm = Fx::zero();
    for col in 0..d {
        // adjugate column: v_i = cofactor C_{col,i}
        let v: Vec<Fx> = (0..d)
            .map(|i| {
                let minor = minor_det(&shifted, col, i);
                if (col + i) % 2 == 0 {
                    minor
                } else {
                    minor.neg()
                }
            })
            .collect();
        let norm = v.iter().fold(Fx::zero(), |acc, x| acc.add(&x.abs()));
        if best_norm.lt(&norm) {
            best_norm = norm;
            best = Some(v);
        }
    }
    let v = best.ok_or_else(|| Error::Internal("adjugate vanished identically".into()))?;
    if v[0].is_zero() {
        return Err(Error::Internal(
            "eigenvector has vanishing leading coefficient".into(),
        ));
    }
    // normalize so the f_1 coordinate (= a_f(1)) is 1
    let lead = v[0].clone();
    Ok(v.iter().map(|x| x.div(&lead)).collect())
}

/// Determinant of the minor dropping `row` and `col`, by expansion.
fn minor_det(m: &[Vec<Fx>], row: usize, col: usize) -> Fx {
    let d = m.len();
    let rows: Vec<usize> = (0..d).filter(|&r| r != row).collect();
    let cols: Vec<usize> = (0..d).filter(|&c| c != col).collect();
    det_recursive(m, &rows, &cols)
}

fn det_recursive(m: &[Vec<Fx>], rows: &[usize], cols: &[usize]) -> Fx {
    match rows.len() {
        0 => Fx::from_i64(1),
        1 => m[rows[0]][cols[0]].clone(),
        _ => {
            let mut acc = Fx::zero();
            let rest_rows = &rows[1..];
            for (j, &c) in cols.iter().enumerate() {
                if m[rows[0]][c].is_zero() {
                    continue;
                }
                let rest_cols: Vec<usize> =
                    cols.iter().copied().filter(|&cc| cc != c).collect();
                let sub = det_recursive(m, rest_rows, &rest_cols);
                let term = m[rows[0]][c].mul(&sub);
                acc = if j % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            acc
        }
    }
}
