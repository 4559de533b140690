//! Bessel functions of the first kind `J_nu(x)` for integer order.
//!
//! Small arguments use the power series (in double-double arithmetic when
//! the terms grow before they decay); larger arguments use Miller's backward
//! recurrence normalised by `J_0 + 2 sum_k J_{2k} = 1`.

use crate::error::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: u32 = 10_000;

/// `ln(n!)`: exact sum of logarithms for small `n`, Stirling's series otherwise.
pub fn ln_factorial(n: u32) -> f64 {
    if n <= 20 {
        return (2..=n).map(|j| (j as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (std::f64::consts::TAU * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// The rigorous bound `(x/2)^nu / nu!` with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselBound {
    pub value: f64,
    pub ln_value: f64,
    /// Set when `value` flushed to zero although the bound itself is positive.
    pub underflow: bool,
}

/// `(x/2)^nu / nu!` evaluated in log space; `|J_nu(x)|` never exceeds it.
pub fn bessel_j_bound_detail(nu: u32, x: f64) -> BesselBound {
    if x == 0.0 {
        let v = if nu == 0 { 1.0 } else { 0.0 };
        return BesselBound { value: v, ln_value: v.ln(), underflow: false };
    }
    let ln_value = nu as f64 * (0.5 * x).ln() - ln_factorial(nu);
    let value = ln_value.exp();
    let underflow = value < f64::MIN_POSITIVE;
    BesselBound { value: if underflow { 0.0 } else { value }, ln_value, underflow }
}

pub fn bessel_j_bound(nu: u32, x: f64) -> f64 {
    bessel_j_bound_detail(nu, x).value
}

// Minimal double-double arithmetic for the cancelling series.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Dd { hi, lo }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        let (hi, lo) = Self::two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self.add(Dd::new(b).mul_f64(-q1));
        let q2 = r.hi / b;
        let (hi, lo) = Self::two_sum(q1, q2);
        Dd { hi, lo }
    }
}

// Leading series term (x/2)^nu / nu!, by direct product where that cannot
// overflow and in log space otherwise.
fn leading_term(nu: u32, half_x: f64) -> f64 {
    if nu <= 150 && half_x <= 64.0 {
        let mut t = 1.0;
        for j in 1..=nu {
            t *= half_x / j as f64;
        }
        t
    } else {
        (nu as f64 * half_x.ln() - ln_factorial(nu)).exp()
    }
}

/// Power series `sum_j (-1)^j (x/2)^{2j+nu} / (j! (j+nu)!)`.
pub fn bessel_j_series(nu: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    let h = 0.5 * x;
    let q = h * h;
    let t0 = leading_term(nu, h);
    if t0 == 0.0 {
        return 0.0;
    }
    let nuf = nu as f64;
    if q <= nuf + 1.0 {
        // terms decrease from the start: alternating, no cancellation
        let mut term = t0;
        let mut sum = t0;
        let mut j = 0.0f64;
        loop {
            j += 1.0;
            term *= -q / (j * (j + nuf));
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                return sum;
            }
        }
    }
    let mut term = Dd::new(t0);
    let mut sum = Dd::new(t0);
    let mut j = 0.0f64;
    loop {
        j += 1.0;
        term = term.mul_f64(-q).div_f64(j * (j + nuf));
        sum = sum.add(term);
        if j * (j + nuf) > q && term.hi.abs() <= 1e-34 * sum.hi.abs().max(f64::MIN_POSITIVE) {
            return sum.hi + sum.lo;
        }
        if j > 10_000.0 {
            return sum.hi + sum.lo;
        }
    }
}

/// Miller's backward recurrence, normalised by `J_0 + 2 sum J_{2k} = 1`.
pub fn bessel_j_miller(nu: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    let top = (nu as f64).max(x);
    let mut start = (top + 30.0 + (60.0 * top).sqrt()).ceil() as u64;
    if start % 2 == 1 {
        start += 1;
    }
    const BIG: f64 = 1e250;
    let two_over_x = 2.0 / x;
    let mut f_next = 0.0f64; // f_{j+1}
    let mut f = 1e-300f64; // f_j
    let mut norm = 0.0f64;
    let mut norm_comp = 0.0f64;
    let mut result = 0.0f64;
    let mut j = start;
    loop {
        if j == nu as u64 {
            result = f;
        }
        if j == 0 {
            norm += f;
        } else if j % 2 == 0 {
            // Kahan-style accumulation of the normalisation sum
            let y = 2.0 * f - norm_comp;
            let t = norm + y;
            norm_comp = (t - norm) - y;
            norm = t;
        }
        if j == 0 {
            break;
        }
        let f_prev = j as f64 * two_over_x * f - f_next;
        f_next = f;
        f = f_prev;
        j -= 1;
        if f.abs() > BIG {
            f /= BIG;
            f_next /= BIG;
            norm /= BIG;
            norm_comp /= BIG;
            result /= BIG;
        }
    }
    result / (norm - norm_comp)
}

/// `J_nu(x)` for `0 <= nu <= 10^4` and finite `x >= 0`.
pub fn bessel_j(nu: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j requires finite x >= 0, got {x}")));
    }
    if nu > MAX_ORDER {
        return Err(Error::Domain(format!("order {nu} exceeds {MAX_ORDER}")));
    }
    Ok(bessel_j_unchecked(nu, x))
}

/// [`bessel_j`] without the argument checks, for hot loops with validated input.
#[inline]
pub fn bessel_j_unchecked(nu: u32, x: f64) -> f64 {
    if x <= 12.0_f64.max(0.5 * nu as f64) {
        bessel_j_series(nu, x)
    } else {
        bessel_j_miller(nu, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert!((bessel_j(1, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
        let lead = 0.05f64.powi(11) / 39_916_800.0;
        let j = bessel_j(11, 0.1).unwrap();
        // the second series term is -(0.05)^2/12 of the first, so the leading
        // term alone is only accurate to about 2e-4 relative
        assert!(((j - lead) / lead).abs() <= 3e-4);
        assert!(((j - 1.222_992_661_035_645_3e-22) / j).abs() <= 1e-13);
        assert!((lead - 1.223e-22).abs() < 1e-25);
        assert!(bessel_j(3, -1.0).is_err());
        assert!(bessel_j(3, f64::NAN).is_err());
    }

    #[test]
    fn reference_values() {
        // values cross-checked with an arbitrary-precision evaluator
        let cases = [
            (0, 10.0, -0.245_935_764_451_348_3),
            (1, 10.0, 0.043_472_746_168_861_44),
            (5, 20.0, 0.151_169_767_982_394_97),
            (11, 4.0 * std::f64::consts::PI, 0.291_337_967_938_966_08),
            (0, 100.0, 0.019_985_850_304_223_12),
            (50, 100.0, -0.038_698_339_728_525_383),
        ];
        for (nu, x, want) in cases {
            let got = bessel_j(nu, x).unwrap();
            assert!((got - want).abs() < 1e-12, "J_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(bessel_j_bound(11, 0.0), 0.0);
        assert!((bessel_j_bound(11, 2.0) - 1.0 / 39_916_800.0).abs() < 1e-20);
        let b = bessel_j_bound_detail(2000, 1e-3);
        assert!(b.underflow && b.value == 0.0 && b.ln_value.is_finite());
    }

    #[test]
    fn ln_factorial_is_continuous_at_switch() {
        let exact: f64 = (2..=21).map(|j| (j as f64).ln()).sum();
        assert!((ln_factorial(21) - exact).abs() < 1e-12);
        let exact: f64 = (2..=300).map(|j| (j as f64).ln()).sum();
        assert!((ln_factorial(300) - exact).abs() < 1e-10);
    }

    #[test]
    fn recurrence_residual() {
        for nu in 2..=50u32 {
            let mut x = 0.1;
            while x <= 100.0 {
                let jm = bessel_j(nu - 1, x).unwrap();
                let j0 = bessel_j(nu, x).unwrap();
                let jp = bessel_j(nu + 1, x).unwrap();
                let r = jm + jp - 2.0 * nu as f64 / x * j0;
                assert!(r.abs() <= 1e-9 * j0.abs().max(1.0), "nu={nu} x={x} r={r}");
                x += 0.37;
            }
        }
    }

    #[test]
    fn paths_agree_on_overlap() {
        for nu in 0..=30u32 {
            let mut x = 8.0;
            while x <= 16.0 {
                let s = bessel_j_series(nu, x);
                let m = bessel_j_miller(nu, x);
                assert!((s - m).abs() <= 1e-10 * s.abs(), "nu={nu} x={x}: {s} vs {m}");
                x += 0.25;
            }
        }
    }

    #[test]
    fn bounded_by_bound_and_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let nu: u32 = rng.gen_range(1..=200);
            let x: f64 = rng.gen_range(0.0..=nu as f64);
            let j = bessel_j(nu, x).unwrap();
            assert!(j.abs() <= bessel_j_bound(nu, x) * (1.0 + 1e-12) + 1e-300);
            assert!(j.abs() <= 1.0);
        }
    }

    #[test]
    fn large_order_and_argument() {
        let j = bessel_j(10_000, 5000.0).unwrap();
        assert!(j.abs() < 1e-300 || j.abs() <= bessel_j_bound(10_000, 5000.0));
        let j = bessel_j(11, 12_566.0).unwrap();
        assert!(j.abs() < (2.0 / (std::f64::consts::PI * 12_566.0)).sqrt() * 1.01);
    }
}
