//! Newform-dependent multiplicative functions and the coefficients
//! `xi_d(l)` of the orthonormal basis `{f_d : d | L}` of the oldspace
//! generated by a newform `f` of level `M` inside level `N = LM`.
//!
//! Eigenvalue data is an input: `lambda_f(p)` for the primes a computation
//! touches, with the Deligne constraints at `p | M` enforced on
//! construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{alpha, beta, moebius, rational_to_f64, squarefull_split, FactoredInteger};
use crate::error::{precondition, Error, Result};
use crate::summation::NeumaierSum;

/// Divisor-count ceiling for the brute-force `xi` sums.
pub const MAX_DIVISORS: u64 = 1_000_000;

const DELIGNE_SLACK: f64 = 1e-12;

/// Local eigenvalue data of a newform `f` in `H*_k(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewformLocalData {
    k: u32,
    level: FactoredInteger,
    lambda: BTreeMap<u64, f64>,
}

/// On-disk form: `{"k": 12, "M": 1, "lambda": {"2": -0.53}, "ramified_signs": {"5": -1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDataFile {
    pub k: u32,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(default)]
    pub lambda: BTreeMap<String, f64>,
    #[serde(default)]
    pub ramified_signs: BTreeMap<String, i8>,
}

fn parse_prime_key(key: &str) -> Result<u64> {
    let p: u64 = key
        .trim()
        .parse()
        .map_err(|_| Error::InvalidEigenData(format!("prime key {key:?} is not an integer")))?;
    if !crate::arith::is_prime(p) {
        return Err(Error::InvalidEigenData(format!("key {p} is not prime")));
    }
    Ok(p)
}

impl NewformLocalData {
    /// Builds and validates eigenvalue data.
    ///
    /// `lambda` lists `lambda_f(p)`; `ramified_signs` gives the sign of
    /// `lambda_f(p) = +-p^{-1/2}` for `p || M` where `lambda` omits it.
    /// Primes with `p^2 | M` are filled with zero.
    pub fn new(
        k: u32,
        level: FactoredInteger,
        lambda: BTreeMap<u64, f64>,
        ramified_signs: &BTreeMap<u64, i8>,
    ) -> Result<Self> {
        if k % 2 != 0 || k < 2 {
            return Err(Error::InvalidEigenData(format!("weight {k} must be even and positive")));
        }
        let mut table = BTreeMap::new();
        for (&p, &v) in &lambda {
            if !crate::arith::is_prime(p) {
                return Err(Error::InvalidEigenData(format!("{p} is not prime")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidEigenData(format!("lambda({p}) is not finite")));
            }
            match level.valuation(p) {
                0 => {
                    if v.abs() > 2.0 + DELIGNE_SLACK {
                        return Err(Error::InvalidEigenData(format!(
                            "|lambda({p})| = {} exceeds the Deligne bound 2",
                            v.abs()
                        )));
                    }
                    table.insert(p, v);
                }
                1 => {
                    let pf = p as f64;
                    if (v * v - 1.0 / pf).abs() > DELIGNE_SLACK {
                        return Err(Error::InvalidEigenData(format!(
                            "lambda({p})^2 must equal 1/{p} for p || M, got {v}"
                        )));
                    }
                    if let Some(&s) = ramified_signs.get(&p) {
                        if (s as f64) * v < 0.0 {
                            return Err(Error::InvalidEigenData(format!(
                                "sign of lambda({p}) contradicts ramified_signs"
                            )));
                        }
                    }
                    table.insert(p, v.signum() / pf.sqrt());
                }
                _ => {
                    if v != 0.0 {
                        return Err(Error::InvalidEigenData(format!(
                            "lambda({p}) must vanish when p^2 | M, got {v}"
                        )));
                    }
                    table.insert(p, 0.0);
                }
            }
        }
        for &(p, e) in level.factors() {
            if e >= 2 {
                table.insert(p, 0.0);
            } else if !table.contains_key(&p) {
                match ramified_signs.get(&p) {
                    Some(&s) if s == 1 || s == -1 => {
                        table.insert(p, s as f64 / (p as f64).sqrt());
                    }
                    Some(&s) => {
                        return Err(Error::InvalidEigenData(format!("sign for {p} must be +-1, got {s}")))
                    }
                    None => return Err(Error::MissingPrime(p)),
                }
            }
        }
        for &p in ramified_signs.keys() {
            if level.valuation(p) != 1 {
                return Err(Error::InvalidEigenData(format!("ramified sign given for {p}, but p does not exactly divide M")));
            }
        }
        Ok(NewformLocalData { k, level, lambda: table })
    }

    /// Synthetic data for identity tests: the forced values at `p | M` are
    /// applied as in [`NewformLocalData::new`], but `|lambda(p)| <= 2` is not
    /// enforced at `p !| M`.
    pub fn synthetic(k: u32, level: FactoredInteger, lambda: BTreeMap<u64, f64>, ramified_signs: &BTreeMap<u64, i8>) -> Result<Self> {
        let (free, forced): (BTreeMap<u64, f64>, BTreeMap<u64, f64>) =
            lambda.into_iter().partition(|(p, _)| !level.divides(*p));
        let mut data = Self::new(k, level, forced, ramified_signs)?;
        for (p, v) in free {
            if !crate::arith::is_prime(p) || !v.is_finite() {
                return Err(Error::InvalidEigenData(format!("bad synthetic entry lambda({p}) = {v}")));
            }
            data.lambda.insert(p, v);
        }
        Ok(data)
    }

    pub fn from_file(file: &EigenDataFile) -> Result<Self> {
        let level = crate::arith::factor(file.m)?;
        let mut lambda = BTreeMap::new();
        for (key, &v) in &file.lambda {
            lambda.insert(parse_prime_key(key)?, v);
        }
        let mut signs = BTreeMap::new();
        for (key, &s) in &file.ramified_signs {
            signs.insert(parse_prime_key(key)?, s);
        }
        Self::new(file.k, level, lambda, &signs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EigenDataFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidEigenData(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> EigenDataFile {
        let mut lambda = BTreeMap::new();
        let mut signs = BTreeMap::new();
        for (&p, &v) in &self.lambda {
            if self.level.valuation(p) == 1 {
                signs.insert(p.to_string(), if v < 0.0 { -1 } else { 1 });
            } else if self.level.valuation(p) == 0 {
                lambda.insert(p.to_string(), v);
            }
        }
        EigenDataFile { k: self.k, m: self.level.value(), lambda, ramified_signs: signs }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn level(&self) -> &FactoredInteger {
        &self.level
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.lambda.keys().copied()
    }

    /// `lambda_f(p)`.
    pub fn lambda_p(&self, p: u64) -> Result<f64> {
        self.lambda.get(&p).copied().ok_or(Error::MissingPrime(p))
    }

    fn chi(&self, p: u64) -> f64 {
        if self.level.divides(p) {
            0.0
        } else {
            1.0
        }
    }

    /// `lambda_f(p^e)` by the Hecke recurrence.
    pub fn lambda_prime_power(&self, p: u64, e: u32) -> Result<f64> {
        let lp = self.lambda_p(p)?;
        let chi = self.chi(p);
        let (mut prev, mut cur) = (0.0, 1.0);
        for _ in 0..e {
            let next = lp * cur - chi * prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// `lambda_f(n)`, multiplicative with the Hecke recurrence at each prime.
    pub fn hecke_lambda(&self, n: &FactoredInteger) -> Result<f64> {
        n.factors()
            .iter()
            .try_fold(1.0, |acc, &(p, e)| Ok(acc * self.lambda_prime_power(p, e)?))
    }

    /// Coefficients of `L(f, s)^{-1}`.
    pub fn mu_f(&self, c: &FactoredInteger) -> Result<f64> {
        let mut acc = 1.0;
        for &(p, e) in c.factors() {
            acc *= match e {
                1 => -self.lambda_p(p)?,
                2 => self.chi(p),
                _ => 0.0,
            };
        }
        Ok(acc)
    }

    fn sigma_twisted_p(&self, p: u64) -> f64 {
        1.0 + self.chi(p) / p as f64
    }

    /// `r_f(c) = prod_{p | c} (1 - lambda(p)^2 / (p sigma(p)^2))`.
    pub fn r_f(&self, c: &FactoredInteger) -> Result<f64> {
        c.primes().try_fold(1.0, |acc, p| {
            let l = self.lambda_p(p)?;
            let s = self.sigma_twisted_p(p);
            Ok(acc * (1.0 - l * l / (p as f64 * s * s)))
        })
    }

    /// `r_f(c)` from its defining divisor sum `sum_{b | c} mu(b) lambda(b)^2 / (b sigma(b)^2)`.
    pub fn r_f_divisor_sum(&self, c: &FactoredInteger) -> Result<f64> {
        let mut acc = NeumaierSum::new();
        for b in c.factored_divisors() {
            let mu = moebius(&b);
            if mu == 0 {
                continue;
            }
            let l = self.hecke_lambda(&b)?;
            let s = rational_to_f64(&crate::arith::sigma_twisted(&b, &self.level));
            acc.add(mu as f64 * l * l / (b.value() as f64 * s * s));
        }
        Ok(acc.value())
    }

    /// `rho_f(c) = prod_{p | c} (1 - p (lambda(p)/(p+1))^2)`.
    pub fn rho_f(&self, c: &FactoredInteger) -> Result<f64> {
        c.primes().try_fold(1.0, |acc, p| {
            let l = self.lambda_p(p)?;
            let pf = p as f64;
            Ok(acc * (1.0 - pf * (l / (pf + 1.0)).powi(2)))
        })
    }

    fn positive_r(&self, d: &FactoredInteger) -> Result<f64> {
        let r = self.r_f(d)?;
        if !(r > 0.0) {
            return Err(Error::InvalidEigenData(format!("r_f({}) = {r} is not positive", d.value())));
        }
        Ok(r)
    }

    fn xi_prime(&self, d: &FactoredInteger, ell: &FactoredInteger) -> Result<f64> {
        let q = d.quotient(ell)?;
        let mu = moebius(&q);
        if mu == 0 {
            return Ok(0.0);
        }
        let r = self.positive_r(d)?;
        let b = rational_to_f64(&beta(&q, &self.level));
        Ok(mu as f64 * self.hecke_lambda(&q)? / (r.sqrt() * (q.value() as f64).sqrt() * b))
    }

    fn xi_double_prime(&self, d: &FactoredInteger, ell: &FactoredInteger) -> Result<f64> {
        let q = d.quotient(ell)?;
        let r = self.positive_r(d)?;
        let a = rational_to_f64(&alpha(d, &self.level));
        Ok(self.mu_f(&q)? / ((q.value() as f64).sqrt() * (r * a).sqrt()))
    }

    /// `xi_d(l) = xi'_{d1}((d1, l)) xi''_{d2}((d2, l))` for `l | d`.
    pub fn xi(&self, d: &FactoredInteger, ell: &FactoredInteger) -> Result<f64> {
        if d.quotient(ell).is_err() {
            return precondition(format!("{} does not divide {}", ell.value(), d.value()));
        }
        let (d1, d2) = squarefull_split(d);
        Ok(self.xi_prime(&d1, &d1.gcd(ell))? * self.xi_double_prime(&d2, &d2.gcd(ell))?)
    }

    /// `sum_{d | L} xi_d(1)^2` by enumerating divisors.
    pub fn xi_one_sum_direct(&self, l: &FactoredInteger) -> Result<f64> {
        if l.divisor_count() > MAX_DIVISORS {
            return precondition(format!("{} has too many divisors", l.value()));
        }
        let one = FactoredInteger::one();
        let mut acc = NeumaierSum::new();
        for d in l.factored_divisors() {
            let x = self.xi(&d, &one)?;
            acc.add(x * x);
        }
        Ok(acc.value())
    }

    /// `prod_{p | L, p !| M} rho_f(p)^{-1} prod_{p^2 | N, p^2 !| M} p^2/(p^2 - 1)`.
    pub fn xi_one_sum_closed(&self, l: &FactoredInteger, n: &FactoredInteger) -> Result<f64> {
        if l.mul(&self.level)? != *n {
            return precondition(format!("N = {} is not L M = {} * {}", n.value(), l.value(), self.level.value()));
        }
        let mut acc = 1.0;
        for p in l.primes() {
            if !self.level.divides(p) {
                acc /= self.rho_f(&crate::arith::factor(p)?)?;
            }
        }
        for &(p, e) in n.factors() {
            if e >= 2 && self.level.valuation(p) < 2 {
                let p2 = (p * p) as f64;
                acc *= p2 / (p2 - 1.0);
            }
        }
        Ok(acc)
    }

    /// Local factor `Z_p(1, f)`, split by the exponent of `p` in the form's level.
    pub fn z_local(&self, p: u64) -> Result<f64> {
        let pf = p as f64;
        Ok(match self.level.valuation(p) {
            0 => {
                let l = self.lambda_p(p)?;
                let rho = 1.0 - pf * (l / (pf + 1.0)).powi(2);
                1.0 / ((1.0 + 1.0 / pf) * rho)
            }
            1 => 1.0 / ((1.0 + 1.0 / pf) * (1.0 - 1.0 / pf)),
            _ => 1.0,
        })
    }

    /// `Z_N(1, f) = prod_{p | N} Z_p(1, f)`.
    pub fn z_n(&self, n: &FactoredInteger) -> Result<f64> {
        n.primes().try_fold(1.0, |acc, p| Ok(acc * self.z_local(p)?))
    }

    /// `sum_j lambda_f(p^{2j}) p^{-j}` in closed form: with `F(X) = 1/(1 - lambda X + chi X^2)`
    /// and `s = p^{-1/2}` it equals `(F(s) + F(-s)) / 2`.
    pub fn z_local_series(&self, p: u64) -> Result<f64> {
        let l = self.lambda_p(p)?;
        let chi = self.chi(p);
        let s = 1.0 / (p as f64).sqrt();
        // the expansion converges iff both roots of 1 - l X + chi X^2 lie outside |X| <= s
        let smallest_root = if chi == 0.0 {
            if l == 0.0 {
                f64::INFINITY
            } else {
                1.0 / l.abs()
            }
        } else if l * l <= 4.0 {
            1.0
        } else {
            (l.abs() - (l * l - 4.0).sqrt()) / 2.0
        };
        if smallest_root <= s * (1.0 + 1e-12) {
            return Err(Error::DivergentSpectrum { p, lambda: l });
        }
        let f = |x: f64| 1.0 / (1.0 - l * x + chi * x * x);
        Ok(0.5 * (f(s) + f(-s)))
    }

    /// Fourier coefficient `a_{f_d}(n) = sum_{l | (d, n)} xi_d(l) l^{k/2} a_f(n/l)`
    /// with `a_f(n) = lambda_f(n) n^{(k-1)/2}`.
    pub fn fd_coefficient(&self, d: &FactoredInteger, n: &FactoredInteger) -> Result<f64> {
        let kf = self.k as f64;
        let mut acc = NeumaierSum::new();
        for ell in d.gcd(n).factored_divisors() {
            let rest = n.quotient(&ell)?;
            let a = self.hecke_lambda(&rest)? * (rest.value() as f64).powf((kf - 1.0) / 2.0);
            acc.add(self.xi(d, &ell)? * (ell.value() as f64).powf(kf / 2.0) * a);
        }
        Ok(acc.value())
    }

    /// Both sides of `MN/(phi(M) nu(N)) prod_{p | L, p !| M} rho^{-1} = Z_N(1,f) prod_{p^2 | M} p^2/(p^2-1)`
    /// for `N = LM` with `(L, M) = 1`.
    pub fn z_factorization_sides(&self, l: &FactoredInteger) -> Result<(f64, f64)> {
        if l.gcd(&self.level).value() != 1 {
            return precondition("the factorization identity assumes (L, M) = 1");
        }
        let n = l.mul(&self.level)?;
        let m = &self.level;
        let mut lhs = m.value() as f64 * n.value() as f64
            / (crate::arith::euler_phi(m) as f64 * crate::arith::nu(&n) as f64);
        for p in l.primes() {
            lhs /= self.rho_f(&crate::arith::factor(p)?)?;
        }
        let mut rhs = self.z_n(&n)?;
        for &(p, e) in m.factors() {
            if e >= 2 {
                let p2 = (p * p) as f64;
                rhs *= p2 / (p2 - 1.0);
            }
        }
        Ok((lhs, rhs))
    }
}
