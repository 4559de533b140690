//! One-level density of low-lying zeros for `H*_k(N)` via the explicit-formula
//! prime sum, and the random-matrix kernels it is compared against.
//!
//! The statistic averaged over the family is
//! `D1 = E(phi) - P*(phi) / |H*_k(N)|` with `E(phi) = phi_hat(0) + phi(0)/2` and
//! `P*(phi) = sum_{p !| N} Delta*_{k,N}(p) phi_hat(log p / log R) 2 log p / (sqrt p log R)`.
//! The `O(log log kN / log R)` error of the explicit formula cannot be
//! computed without the zeros themselves; it is reported, not subtracted.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{primes_up_to, FactoredInteger};
use crate::bessel::{bessel_j_bound, bessel_j_unchecked};
use crate::error::{precondition, Error, Result};
use crate::kloosterman::KloostermanRows;
use crate::newform_sums::{pure_sum_batch, PureSumRequest};
use crate::oracles::newform_dim;
use crate::petersson::{check_weight, TruncatedSum, TruncationPolicy};
use crate::summation::NeumaierSum;

/// Ceiling on `R^u`, the largest prime in the explicit formula.
pub const MAX_PRIME_RANGE: f64 = 1e7;
/// Half-periods of `phi` integrated explicitly on each side of the origin.
const TIME_SIDE_PERIODS: u32 = 20_000;
const QUAD_TOL: f64 = 1e-15;

fn sinc(t: f64) -> f64 {
    // sin(pi t) / (pi t)
    if t.abs() < 1e-8 {
        1.0 - (PI * t).powi(2) / 6.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestFamily {
    Fejer,
}

/// Even test function `phi` whose Fourier transform
/// `phi_hat(y) = int phi(x) e(-xy) dx` vanishes outside `(-sigma, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    sigma: f64,
    family: TestFamily,
    /// `int phi` by quadrature, recorded at construction.
    integral: f64,
}

impl TestFunction {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn family(&self) -> TestFamily {
        self.family
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self.family {
            TestFamily::Fejer => self.sigma * sinc(self.sigma * x).powi(2),
        }
    }

    pub fn phi_hat(&self, y: f64) -> f64 {
        match self.family {
            TestFamily::Fejer => (1.0 - y.abs() / self.sigma).max(0.0),
        }
    }

    // Points where phi_hat fails to be smooth, inside [-sigma, sigma].
    fn kinks(&self) -> Vec<f64> {
        vec![-self.sigma, 0.0, self.sigma]
    }
}

/// `int_{-inf}^{inf} phi(x) g(x) dx` over `TIME_SIDE_PERIODS` periods of
/// `phi` per side; `g` must be even.
fn time_side(phi: &TestFunction, g: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / phi.sigma;
    let mut acc = NeumaierSum::new();
    for j in 0..TIME_SIDE_PERIODS {
        let a = j as f64 * h;
        let out = quadrature::double_exponential::integrate(|x| phi.phi(x) * g(x), a, a + h, QUAD_TOL);
        acc.add(out.integral);
    }
    2.0 * acc.value()
}

/// `int phi` with the `phi ~ 1/(pi^2 sigma x^2)` mean tail added analytically.
fn integrate_phi(phi: &TestFunction) -> f64 {
    let head = time_side(phi, |_| 1.0);
    match phi.family {
        // beyond T = n pi the sinc^2 tail is 1/(2 pi^2 n) per side up to O(n^-3)
        TestFamily::Fejer => head + 1.0 / (PI * PI * TIME_SIDE_PERIODS as f64),
    }
}

/// `int phi_hat(y) g(y) dy` over the support, split at the kinks of `phi_hat`
/// and at `extra` break points.
fn fourier_side(phi: &TestFunction, extra: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    let mut pts = phi.kinks();
    pts.extend(extra.iter().copied().filter(|t| t.abs() < phi.sigma));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut acc = NeumaierSum::new();
    for w in pts.windows(2) {
        acc.add(quadrature::double_exponential::integrate(|y| phi.phi_hat(y) * g(y), w[0], w[1], QUAD_TOL).integral);
    }
    acc.value()
}

/// Fejér pair `phi(x) = sigma sinc^2(sigma x)`, `phi_hat(y) = max(0, 1 - |y|/sigma)`.
///
/// The pair is checked at construction: `int phi = phi_hat(0)` and the
/// inverse transform reproduces `phi` on a few points, both to `1e-8`.
pub fn fejer_pair(sigma: f64) -> Result<TestFunction> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return precondition(format!("sigma must be positive, got {sigma}"));
    }
    let mut phi = TestFunction { sigma, family: TestFamily::Fejer, integral: f64::NAN };
    phi.integral = integrate_phi(&phi);
    if (phi.integral - phi.phi_hat(0.0)).abs() > 1e-8 {
        return Err(Error::Quadrature(format!("int phi = {} but phi_hat(0) = 1", phi.integral)));
    }
    for x in [0.0, 0.37 / sigma, 1.7 / sigma] {
        let inv = fourier_side(&phi, &[], |y| (2.0 * PI * x * y).cos());
        if (inv - phi.phi(x)).abs() > 1e-8 {
            return Err(Error::Quadrature(format!("inverse transform at {x} gives {inv}, phi = {}", phi.phi(x))));
        }
    }
    Ok(phi)
}

/// `E(phi) = phi_hat(0) + phi(0)/2`.
pub fn e_phi(phi: &TestFunction) -> f64 {
    phi.phi_hat(0.0) + 0.5 * phi.phi(0.0)
}

/// Symmetry types of the random-matrix scaling limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Group {
    U,
    Sp,
    O,
    SOeven,
    SOodd,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::U, Group::Sp, Group::O, Group::SOeven, Group::SOodd];

    pub fn name(self) -> &'static str {
        match self {
            Group::U => "U",
            Group::Sp => "Sp",
            Group::O => "O",
            Group::SOeven => "SOeven",
            Group::SOodd => "SOodd",
        }
    }

    // W = 1 + epsilon sin(2 pi x)/(2 pi x) + atom delta_0
    fn epsilon(self) -> f64 {
        match self {
            Group::U | Group::O => 0.0,
            Group::SOeven => 1.0,
            Group::Sp | Group::SOodd => -1.0,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Precondition(format!("unknown group {s:?}; expected U, Sp, O, SOeven or SOodd")))
    }
}

/// Continuous part of the one-level density `W_1(G)(x)`; atoms are in [`rmt_atom`].
pub fn rmt_kernel(group: Group, x: f64) -> f64 {
    1.0 + group.epsilon() * sinc(2.0 * x)
}

/// Mass of the point mass at `x = 0` in `W_1(G)`.
pub fn rmt_atom(group: Group) -> f64 {
    match group {
        Group::SOodd => 1.0,
        Group::O => 0.5,
        _ => 0.0,
    }
}

/// `W_1(G)` on the Fourier side: a point mass at `t = 0` plus a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelHat {
    pub atom: f64,
    pub density: f64,
}

pub fn rmt_kernel_hat(group: Group, t: f64) -> KernelHat {
    // the transform of sin(2 pi x)/(2 pi x) is 1/2 on (-1, 1)
    let window = if t.abs() < 1.0 {
        0.5
    } else if t.abs() == 1.0 {
        0.25
    } else {
        0.0
    };
    KernelHat { atom: 1.0, density: group.epsilon() * window + rmt_atom(group) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmtIntegral {
    pub time_side: f64,
    pub fourier_side: f64,
}

/// `int phi(x) W_1(G)(x) dx`, once by quadrature in `x` and once as
/// `int phi_hat(t) W_hat(t) dt`.
pub fn rmt_integral(group: Group, phi: &TestFunction) -> Result<RmtIntegral> {
    let eps = group.epsilon();
    let oscillating = if eps == 0.0 { 0.0 } else { eps * time_side(phi, |x| sinc(2.0 * x)) };
    let time = phi.integral + oscillating + rmt_atom(group) * phi.phi(0.0);
    let fourier = phi.phi_hat(0.0) + fourier_side(phi, &[-1.0, 1.0], |t| rmt_kernel_hat(group, t).density);
    if !(time.is_finite() && fourier.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite integral for {group}")));
    }
    Ok(RmtIntegral { time_side: time, fourier_side: fourier })
}

/// `2 log(kN) / log(k^2 N)`, the support below which the family average is
/// governed by the diagonal.
pub fn support_limit(k: u32, level: f64) -> Result<f64> {
    let kf = k as f64;
    if !(level >= 1.0) || kf * kf * level <= 1.0 || kf * level <= 0.0 {
        return precondition("support_limit needs k^2 N > 1");
    }
    Ok(2.0 * (kf * level).ln() / (kf * kf * level).ln())
}

/// Parameters of the one-level density estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityConfig {
    pub k: u32,
    pub level: FactoredInteger,
    /// Scaling parameter, `k^2 N` by default.
    pub r: f64,
    /// Primes up to `R^u` enter the explicit formula.
    pub u: f64,
    pub x: Option<u64>,
    pub y: Option<u64>,
    pub policy: TruncationPolicy,
    /// Reject `u >= support_limit(k, N)`.
    pub strict: bool,
}

impl DensityConfig {
    pub fn new(k: u32, level: FactoredInteger, u: f64) -> Self {
        let r = (k as f64).powi(2) * level.value() as f64;
        DensityConfig { k, level, r, u, x: None, y: None, policy: TruncationPolicy::default(), strict: false }
    }

    pub fn validate(&self) -> Result<()> {
        check_weight(self.k)?;
        self.policy.validate()?;
        if !(self.r.is_finite() && self.r > 1.0) {
            return precondition(format!("R must exceed 1, got {}", self.r));
        }
        if !(self.u.is_finite() && self.u > 0.0) {
            return precondition(format!("u must be positive, got {}", self.u));
        }
        if self.strict {
            let limit = support_limit(self.k, self.level.value() as f64)?;
            if self.u >= limit {
                return precondition(format!("u = {} is not below the support limit {limit}", self.u));
            }
        }
        Ok(())
    }

    /// Largest prime considered, `min(R^u, 10^7)`.
    pub fn prime_range(&self) -> u64 {
        self.r.powf(self.u).min(MAX_PRIME_RANGE).floor() as u64
    }
}

/// Primes `p <= R^u`, `p !| N`, with their explicit-formula weights
/// `phi_hat(log p / log R) 2 log p / (sqrt p log R)`, zero weights dropped.
pub fn weighted_primes(cfg: &DensityConfig, phi: &TestFunction) -> Vec<(u64, f64)> {
    let log_r = cfg.r.ln();
    primes_up_to(cfg.prime_range())
        .into_iter()
        .filter(|&p| !cfg.level.divides(p))
        .filter_map(|p| {
            let lp = (p as f64).ln();
            let w = phi.phi_hat(lp / log_r) * 2.0 * lp / ((p as f64).sqrt() * log_r);
            (w != 0.0).then_some((p, w))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PStarReport {
    pub sum: TruncatedSum,
    /// `kN (1/X + Y^{-1/2}) (kNXY)^eps`, heuristic size of the neglected `m > Y` terms.
    pub heuristic_bound: f64,
    pub primes: usize,
}

/// `P*(phi) = sum_{p !| N, p <= R^u} Delta*_{k,N}(p) phi_hat(log p/log R) 2 log p/(sqrt p log R)`.
pub fn p_star(cfg: &DensityConfig, phi: &TestFunction) -> Result<PStarReport> {
    cfg.validate()?;
    let primes = weighted_primes(cfg, phi);
    let requests: Vec<PureSumRequest> = primes
        .iter()
        .map(|&(p, _)| PureSumRequest { k: cfg.k, level: cfg.level.clone(), n: p, x: cfg.x, y: cfg.y })
        .collect();
    let reports = pure_sum_batch(&requests, &cfg.policy)?;
    let mut acc = NeumaierSum::new();
    let (mut tail, mut terms, mut converged) = (0.0, 0, true);
    for (&(_, w), r) in primes.iter().zip(&reports) {
        acc.add(w * r.sum.value);
        tail += w.abs() * r.sum.tail_bound;
        terms += r.sum.terms_used;
        converged &= r.sum.converged;
    }
    let kn = cfg.k as f64 * cfg.level.value() as f64;
    let heuristic_bound = match reports.first() {
        Some(r) => {
            let (x, y) = (r.x as f64, r.y as f64);
            kn * (1.0 / x + 1.0 / y.sqrt()) * (kn * x * y).powf(crate::newform_sums::HEURISTIC_EPSILON)
        }
        None => 0.0,
    };
    Ok(PStarReport {
        sum: TruncatedSum { value: acc.value(), tail_bound: tail, terms_used: terms, converged },
        heuristic_bound,
        primes: primes.len(),
    })
}

/// Family-averaged one-level density and its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneLevelEstimate {
    pub e: f64,
    pub p_star: PStarReport,
    pub card: u64,
    pub p_star_over_card: f64,
    pub d1: f64,
    /// `log log kN / log R`, the size of the dropped explicit-formula error.
    pub heuristic_error: f64,
}

/// `D1 = E(phi) - P* / |H*|` from precomputed parts.
pub fn combine_one_level(e: f64, p_star: PStarReport, card: u64, heuristic_error: f64) -> Result<OneLevelEstimate> {
    if card == 0 {
        return precondition("H*_k(N) is empty; the family average is undefined");
    }
    let ratio = p_star.sum.value / card as f64;
    Ok(OneLevelEstimate { e, d1: e - ratio, p_star_over_card: ratio, p_star, card, heuristic_error })
}

pub fn one_level_estimate(cfg: &DensityConfig, phi: &TestFunction) -> Result<OneLevelEstimate> {
    let ps = p_star(cfg, phi)?;
    let card = newform_dim(cfg.k, &cfg.level)?;
    let kn = cfg.k as f64 * cfg.level.value() as f64;
    combine_one_level(e_phi(phi), ps, card, kn.ln().ln() / cfg.r.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QStarReport {
    pub value: f64,
    /// `2 pi sum_p |S(m^2,p;c)| (z_p/2)^{k-1}/(k-1)! w_p`, a rigorous bound.
    pub bessel_envelope: f64,
    /// Whether `3 z <= k` for `z = 4 pi m sqrt(P) / c`.
    pub in_regime: bool,
    /// `2^{-k} m sqrt(P) (kN)^eps (log 2c)^{-2}` when in the regime (heuristic, GRH-conditional).
    pub regime_bound: Option<f64>,
}

/// `Q*(m; c) = 2 pi i^k sum_{p !| N} S(m^2, p; c) J_{k-1}(4 pi m sqrt(p)/c) w_p`.
pub fn q_star(cfg: &DensityConfig, m: u64, c: u64, phi: &TestFunction) -> Result<QStarReport> {
    cfg.validate()?;
    if m == 0 || c == 0 {
        return precondition("m and c must be positive");
    }
    let primes = weighted_primes(cfg, phi);
    let sign = if (cfg.k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let nu = cfg.k - 1;
    let mut rows = KloostermanRows::new();
    // S(m^2, p; c) = row_p[m^2 mod c]; one row per residue of p
    let m2 = ((m as u128 * m as u128) % c as u128) as u64;
    let mut acc = NeumaierSum::new();
    let mut envelope = 0.0;
    let mut cache: std::collections::HashMap<u64, Vec<f64>> = Default::default();
    for &(p, w) in &primes {
        let row = match cache.get(&(p % c)) {
            Some(r) => r,
            None => {
                let r = rows.row(p as i64, c)?;
                cache.entry(p % c).or_insert(r)
            }
        };
        let s = row[m2 as usize];
        let z = 4.0 * PI * m as f64 * (p as f64).sqrt() / c as f64;
        acc.add(s * bessel_j_unchecked(nu, z) * w);
        envelope += s.abs() * bessel_j_bound(nu, z) * w;
    }
    let big_p = cfg.prime_range() as f64;
    let z = 4.0 * PI * m as f64 * big_p.sqrt() / c as f64;
    let in_regime = 3.0 * z <= cfg.k as f64;
    let kn = cfg.k as f64 * cfg.level.value() as f64;
    let regime_bound = in_regime.then(|| {
        2f64.powi(-(cfg.k as i32)) * m as f64 * big_p.sqrt() * kn.powf(crate::newform_sums::HEURISTIC_EPSILON)
            / (2.0 * c as f64).ln().powi(2)
    });
    Ok(QStarReport {
        value: 2.0 * PI * sign * acc.value(),
        bessel_envelope: 2.0 * PI * envelope,
        in_regime,
        regime_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;

    #[test]
    fn fejer_examples() {
        let phi = fejer_pair(1.0).unwrap();
        assert_eq!(phi.phi_hat(0.0), 1.0);
        assert_eq!(phi.phi(0.0), 1.0);
        assert!((phi.integral() - 1.0).abs() < 1e-8);
        assert_eq!(phi.phi_hat(1.0), 0.0);
        assert_eq!(phi.phi_hat(-3.0), 0.0);
        assert!((phi.phi(0.8) - phi.phi(-0.8)).abs() < 1e-16);
        assert!((e_phi(&phi) - 1.5).abs() < 1e-15);
        assert!((e_phi(&fejer_pair(2.0).unwrap()) - 2.0).abs() < 1e-15);
        assert!(fejer_pair(0.0).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(rmt_kernel(Group::U, 5.3), 1.0);
        assert_eq!(rmt_kernel(Group::SOeven, 0.0), 2.0);
        for x in [0.0, 0.2, 1.3, 7.9] {
            let avg = 0.5 * (rmt_kernel(Group::SOeven, x) + rmt_kernel(Group::SOodd, x));
            assert!((rmt_kernel(Group::O, x) - avg).abs() < 1e-15);
        }
        assert_eq!(rmt_atom(Group::O), 0.5 * (rmt_atom(Group::SOeven) + rmt_atom(Group::SOodd)));
        assert_eq!(rmt_kernel_hat(Group::O, 0.3), KernelHat { atom: 1.0, density: 0.5 });
        assert_eq!("soodd".parse::<Group>().unwrap(), Group::SOodd);
    }

    #[test]
    fn rmt_integral_exact_values() {
        let phi = fejer_pair(1.0).unwrap();
        for (g, want) in [(Group::U, 1.0), (Group::O, 1.5), (Group::Sp, 0.5)] {
            let r = rmt_integral(g, &phi).unwrap();
            assert!((r.fourier_side - want).abs() < 1e-12, "{g}: {r:?}");
            assert!((r.time_side - want).abs() < 1e-6, "{g}: {r:?}");
        }
    }

    #[test]
    fn support_limit_examples() {
        assert!((support_limit(12, 1e6).unwrap() - 2.0 * 1.2e7f64.ln() / 1.44e8f64.ln()).abs() < 1e-14);
        assert!((support_limit(12, 1e6).unwrap() - 1.74).abs() < 0.01);
        assert!((support_limit(20, 20.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(support_limit(4, 1e12).unwrap() > 1.9);
        assert!(support_limit(12, 1e8).unwrap() < support_limit(12, 1e10).unwrap());
    }

    #[test]
    fn empty_prime_sums() {
        let phi = fejer_pair(1.0).unwrap();
        let mut cfg = DensityConfig::new(12, factor(101).unwrap(), 1e-4);
        assert!(weighted_primes(&cfg, &phi).is_empty());
        let est = one_level_estimate(&cfg, &phi).unwrap();
        assert_eq!(est.d1, e_phi(&phi));
        assert_eq!(q_star(&cfg, 1, 5, &phi).unwrap().value, 0.0);
        // every prime up to R^u divides N
        cfg = DensityConfig::new(12, factor(30).unwrap(), 0.1);
        assert!(cfg.prime_range() < 7);
        assert_eq!(p_star(&cfg, &phi).unwrap().sum.value, 0.0);
    }

    #[test]
    fn strict_mode_rejects_large_support() {
        let mut cfg = DensityConfig::new(12, factor(101).unwrap(), 1.6);
        cfg.strict = true;
        assert!(cfg.validate().is_err());
        cfg.u = 0.5;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn q_star_regime_and_decay() {
        let phi = fejer_pair(1.0).unwrap();
        let cfg = DensityConfig::new(12, factor(101).unwrap(), 0.5);
        let q = q_star(&cfg, 1, 101, &phi).unwrap();
        assert!(q.in_regime);
        assert!(q.value.abs() <= q.bessel_envelope * (1.0 + 1e-12));
        let far = q_star(&cfg, 1, 101 * 1000, &phi).unwrap();
        assert!(far.value.abs() < 1e-30);
    }
}
