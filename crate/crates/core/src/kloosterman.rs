//! Kloosterman sums `S(m, n; c) = sum_{x mod c, (x,c)=1} e((m x + n x^{-1}) / c)`.
//!
//! [`kloosterman`] is the direct O(c) reference. [`kloosterman_crt`] splits
//! the modulus with twisted multiplicativity and [`KloostermanRows`] produces
//! a whole row `a -> S(a, n; c)` with one FFT; both accelerators are checked
//! against the direct sum in the tests.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use rustfft::{Fft, FftPlanner};

use crate::arith::{euler_phi, factor};
use crate::error::{Error, Result};
use crate::summation::ComplexNeumaierSum;

/// Largest modulus accepted by the Kloosterman routines.
pub const MAX_MODULUS: u64 = 1 << 40;

/// Inverse of `x` modulo `c`, in `[1, c)` (and `0` for `c = 1`).
pub fn mod_inverse(x: i64, c: u64) -> Result<u64> {
    if c == 0 {
        return Err(Error::Precondition("modulus must be positive".into()));
    }
    let a = (x as i128).rem_euclid(c as i128);
    let (mut r0, mut r1) = (c as i128, a);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NotInvertible { value: x, modulus: c });
    }
    Ok(s0.rem_euclid(c as i128) as u64)
}

fn check_modulus(c: u64) -> Result<()> {
    if c == 0 {
        return Err(Error::Precondition("modulus c must be >= 1".into()));
    }
    if c > MAX_MODULUS {
        return Err(Error::Overflow(c));
    }
    Ok(())
}

#[inline]
fn e_frac(num: u64, c: u64) -> Complex64 {
    // num < c; the angle is reduced in integers before the division
    let t = TAU * (num as f64 / c as f64);
    Complex64::new(t.cos(), t.sin())
}

/// The complex value of the defining sum, accumulated with compensation.
pub fn kloosterman_complex(m: i64, n: i64, c: u64) -> Result<Complex64> {
    check_modulus(c)?;
    let mm = (m as i128).rem_euclid(c as i128) as u128;
    let nn = (n as i128).rem_euclid(c as i128) as u128;
    let cc = c as u128;
    let mut acc = ComplexNeumaierSum::new();
    for x in 0..c {
        if x.gcd(&c) != 1 {
            continue;
        }
        let xbar = mod_inverse(x as i64, c)? as u128;
        let num = (mm * x as u128 + nn * xbar) % cc;
        acc.add(e_frac(num as u64, c));
    }
    Ok(acc.value())
}

/// `S(m, n; c)` by direct summation; the imaginary part is checked to be
/// below `1e-9 phi(c)` and discarded.
pub fn kloosterman(m: i64, n: i64, c: u64) -> Result<f64> {
    let z = kloosterman_complex(m, n, c)?;
    let phi = euler_phi(&factor(c)?) as f64;
    if z.im.abs() > 1e-9 * phi.max(1.0) {
        return Err(Error::Domain(format!(
            "Kloosterman sum S({m},{n};{c}) has imaginary residue {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `S(m, n; c)` via twisted multiplicativity over the prime-power factors
/// of `c`, each factor summed directly.
pub fn kloosterman_crt(m: i64, n: i64, c: u64) -> Result<f64> {
    check_modulus(c)?;
    let fc = factor(c)?;
    let mut value = 1.0;
    for &(p, e) in fc.factors() {
        let q = p.pow(e);
        let rest = c / q;
        let rbar = mod_inverse(rest as i64, q)? as i128;
        let mq = ((m as i128).rem_euclid(q as i128) * rbar).rem_euclid(q as i128);
        let nq = ((n as i128).rem_euclid(q as i128) * rbar).rem_euclid(q as i128);
        value *= kloosterman_complex(mq as i64, nq as i64, q)?.re;
    }
    Ok(value)
}

/// Batched evaluation of whole rows `a -> S(a, n; c)`, `0 <= a < c`.
///
/// With `g(x) = e(n x^{-1} / c)` on units and zero elsewhere,
/// `S(a, n; c) = sum_x g(x) e(a x / c)`, i.e. one unnormalised inverse DFT.
pub struct KloostermanRows {
    planner: FftPlanner<f64>,
    last: Option<(usize, Arc<dyn Fft<f64>>)>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Default for KloostermanRows {
    fn default() -> Self {
        Self::new()
    }
}

impl KloostermanRows {
    pub fn new() -> Self {
        KloostermanRows {
            planner: FftPlanner::new(),
            last: None,
            buffer: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Fills `out` with `S(a, n; c)` for `a = 0, ..., c-1`.
    pub fn row_into(&mut self, n: i64, c: u64, out: &mut Vec<f64>) -> Result<()> {
        check_modulus(c)?;
        let len = c as usize;
        let nn = (n as i128).rem_euclid(c as i128) as u128;
        self.buffer.clear();
        self.buffer.resize(len, Complex64::new(0.0, 0.0));
        for x in 0..c {
            if x.gcd(&c) != 1 {
                continue;
            }
            let xbar = mod_inverse(x as i64, c)? as u128;
            let num = (nn * xbar % c as u128) as u64;
            self.buffer[x as usize] = e_frac(num, c);
        }
        let fft = match &self.last {
            Some((l, f)) if *l == len => Arc::clone(f),
            _ => {
                let f = self.planner.plan_fft_inverse(len);
                self.last = Some((len, Arc::clone(&f)));
                f
            }
        };
        let need = fft.get_inplace_scratch_len();
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        fft.process_with_scratch(&mut self.buffer, &mut self.scratch[..need]);
        out.clear();
        out.extend(self.buffer.iter().map(|z| z.re));
        Ok(())
    }

    pub fn row(&mut self, n: i64, c: u64) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        self.row_into(n, c, &mut out)?;
        Ok(out)
    }
}
