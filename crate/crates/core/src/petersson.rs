//! The Kloosterman–Bessel side of the Petersson formula,
//!
//! `Delta_{k,N}(m,n) = delta(m,n) + 2 pi i^k sum_{N | c} S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c)`,
//!
//! truncated at `c_max` with a rigorous tail bound. The bound uses only
//! `|S(m,n;c)| <= c` and `|J_nu(x)| <= (x/2)^nu / nu!`, so
//!
//! `sum_{c > C, N | c} <= 2 pi B sum_{j > C/N} j^{-nu} <= 2 pi B J^{1-nu} / (nu - 1)`
//!
//! with `B = (2 pi sqrt(mn) / N)^nu / nu!` and `J = C / N`.

use std::f64::consts::{PI, TAU};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factor, FactoredInteger};
use crate::bessel::{bessel_j_unchecked, ln_factorial};
use crate::error::{precondition, Result};
use crate::kloosterman::{kloosterman_complex, KloostermanRows, MAX_MODULUS};
use crate::summation::NeumaierSum;

/// Default ceiling on `c` in tolerance mode.
pub const DEFAULT_HARD_CAP: u64 = 50_000_000;

// Multiples of N per parallel work unit; fixed so that the reduction order
// does not depend on the thread count.
const CHUNK: u64 = 64;

/// Even weight `k >= 4` together with a factored level `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightLevel {
    k: u32,
    level: FactoredInteger,
}

impl WeightLevel {
    pub fn new(k: u32, level: u64) -> Result<Self> {
        Self::from_factored(k, factor(level)?)
    }

    pub fn from_factored(k: u32, level: FactoredInteger) -> Result<Self> {
        check_weight(k)?;
        Ok(WeightLevel { k, level })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn level(&self) -> &FactoredInteger {
        &self.level
    }

    pub fn n(&self) -> u64 {
        self.level.value()
    }
}

pub(crate) fn check_weight(k: u32) -> Result<()> {
    if k % 2 != 0 || k < 4 {
        return precondition(format!("weight must be even and >= 4, got {k}"));
    }
    if k > crate::bessel::MAX_ORDER {
        return precondition(format!("weight {k} exceeds the supported Bessel order"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationMode {
    /// Sum every multiple of the level up to this `c`.
    FixedCmax(u64),
    /// Smallest multiple of the level whose tail bound is below this value.
    TargetTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    pub hard_cap: u64,
}

impl TruncationPolicy {
    pub fn fixed(c_max: u64) -> Self {
        TruncationPolicy { mode: TruncationMode::FixedCmax(c_max), hard_cap: c_max.max(1) }
    }

    pub fn tolerance(tol: f64) -> Self {
        TruncationPolicy { mode: TruncationMode::TargetTolerance(tol), hard_cap: DEFAULT_HARD_CAP }
    }

    pub fn with_hard_cap(mut self, hard_cap: u64) -> Self {
        self.hard_cap = hard_cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            TruncationMode::FixedCmax(c) if c == 0 => precondition("c_max must be positive"),
            TruncationMode::TargetTolerance(t) if !(t > 0.0 && t.is_finite()) => {
                precondition(format!("tolerance must be positive, got {t}"))
            }
            _ if self.hard_cap == 0 => precondition("hard_cap must be positive"),
            _ if self.hard_cap > MAX_MODULUS => precondition("hard_cap exceeds the modulus range"),
            _ => Ok(()),
        }
    }

    /// The tolerance the result is judged against (`inf` in fixed mode).
    pub fn tolerance_value(&self) -> f64 {
        match self.mode {
            TruncationMode::FixedCmax(_) => f64::INFINITY,
            TruncationMode::TargetTolerance(t) => t,
        }
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::tolerance(1e-10)
    }
}

/// A truncated series with a rigorous bound on the omitted part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: u64,
    pub converged: bool,
}

impl TruncatedSum {
    pub fn exact(value: f64) -> Self {
        TruncatedSum { value, tail_bound: 0.0, terms_used: 0, converged: true }
    }
}

/// `ln` of the tail bound for `c > j N`.
pub fn ln_tail_bound(k: u32, level: u64, mn: f64, j: u64) -> f64 {
    let nu = (k - 1) as f64;
    let ln_b = nu * (TAU * mn.sqrt() / level as f64).ln() - ln_factorial(k - 1);
    let ln_zeta_tail = if j == 0 {
        // sum_{j >= 1} j^{-nu} <= 1 + 1/(nu - 1)
        (1.0 + 1.0 / (nu - 1.0)).ln()
    } else {
        (1.0 - nu) * (j as f64).ln() - (nu - 1.0).ln()
    };
    TAU.ln() + ln_b + ln_zeta_tail
}

/// Tail bound for `c > j N`.
pub fn tail_bound(k: u32, level: u64, mn: f64, j: u64) -> f64 {
    ln_tail_bound(k, level, mn, j).exp()
}

/// Truncation plan: the number of multiples of the level to sum, the tail
/// bound beyond them, and whether the policy's tolerance is met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPlan {
    pub multiples: u64,
    pub tail_bound: f64,
    pub converged: bool,
}

pub fn plan_truncation(k: u32, level: u64, mn: f64, policy: &TruncationPolicy) -> TruncationPlan {
    let cap = (policy.hard_cap / level).max(1);
    match policy.mode {
        TruncationMode::FixedCmax(c) => {
            let j = c / level;
            TruncationPlan { multiples: j, tail_bound: tail_bound(k, level, mn, j), converged: true }
        }
        TruncationMode::TargetTolerance(tol) => {
            let nu = (k - 1) as f64;
            let head = ln_tail_bound(k, level, mn, 1);
            let mut j = if head <= tol.ln() {
                1
            } else {
                let est = ((head - tol.ln()) / (nu - 1.0)).exp().ceil();
                if est >= cap as f64 {
                    cap
                } else {
                    est as u64
                }
            };
            while j < cap && ln_tail_bound(k, level, mn, j) > tol.ln() {
                j += 1;
            }
            let tail = tail_bound(k, level, mn, j);
            TruncationPlan { multiples: j, tail_bound: tail, converged: tail <= tol }
        }
    }
}

fn sign_ik(k: u32) -> f64 {
    if (k / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Delta_{k,N}(m,n)` with direct Kloosterman sums (the reference path).
pub fn delta_full(wl: &WeightLevel, m: u64, n: u64, policy: &TruncationPolicy) -> Result<TruncatedSum> {
    if m == 0 || n == 0 {
        return precondition("m and n must be positive");
    }
    policy.validate()?;
    let (k, level) = (wl.k, wl.n());
    let mn = m as f64 * n as f64;
    let plan = plan_truncation(k, level, mn, policy);
    let scale = 4.0 * PI * mn.sqrt();
    let chunks: Vec<u64> = (0..plan.multiples.div_ceil(CHUNK)).collect();
    let partials: Vec<Result<NeumaierSum>> = chunks
        .par_iter()
        .map(|&ch| {
            let mut acc = NeumaierSum::new();
            let lo = ch * CHUNK + 1;
            let hi = ((ch + 1) * CHUNK).min(plan.multiples);
            for j in lo..=hi {
                let c = j * level;
                let s = kloosterman_complex(m as i64, n as i64, c)?.re;
                acc.add(s / c as f64 * bessel_j_unchecked(k - 1, scale / c as f64));
            }
            Ok(acc)
        })
        .collect();
    let mut total = NeumaierSum::new();
    for p in partials {
        total.merge(&p?);
    }
    let diag = if m == n { 1.0 } else { 0.0 };
    Ok(TruncatedSum {
        value: diag + TAU * sign_ik(k) * total.value(),
        tail_bound: plan.tail_bound,
        terms_used: plan.multiples,
        converged: plan.converged,
    })
}

/// One `Delta_{k,level}(m, n)` request for [`delta_batch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeltaQuery {
    pub k: u32,
    pub level: u64,
    pub m: u64,
    pub n: u64,
}

struct Prepared {
    c_max: u64,
    scale: f64,
    m: u64,
    n: u64,
    nu: u32,
}

/// Evaluates many `Delta` values in one pass over `c`.
///
/// For each `c` the row `a -> S(a, 1; c)` is produced by one FFT and shared
/// by every query with `gcd(n, c) = 1` through `S(m, n; c) = S(mn, 1; c)`;
/// queries with `gcd(n, c) > 1` get a row of their own. Work is split into
/// fixed chunks of `c` and reduced in increasing `c`, so results do not
/// depend on the number of threads.
pub fn delta_batch(queries: &[DeltaQuery], policy: &TruncationPolicy) -> Result<Vec<TruncatedSum>> {
    policy.validate()?;
    let mut prepared = Vec::with_capacity(queries.len());
    let mut plans = Vec::with_capacity(queries.len());
    for q in queries {
        check_weight(q.k)?;
        if q.m == 0 || q.n == 0 || q.level == 0 {
            return precondition(format!("invalid query {q:?}"));
        }
        let mn = q.m as f64 * q.n as f64;
        let plan = plan_truncation(q.k, q.level, mn, policy);
        prepared.push(Prepared {
            c_max: plan.multiples * q.level,
            scale: 4.0 * PI * mn.sqrt(),
            m: q.m,
            n: q.n,
            nu: q.k - 1,
        });
        plans.push(plan);
    }
    // queries grouped by level, each group sorted by decreasing c_max
    let mut levels: Vec<u64> = queries.iter().map(|q| q.level).collect();
    levels.sort_unstable();
    levels.dedup();
    let groups: Vec<(u64, Vec<usize>)> = levels
        .iter()
        .map(|&l| {
            let mut idx: Vec<usize> = (0..queries.len()).filter(|&i| queries[i].level == l).collect();
            idx.sort_by(|&a, &b| prepared[b].c_max.cmp(&prepared[a].c_max).then(a.cmp(&b)));
            (l, idx)
        })
        .collect();
    let c_top = prepared.iter().map(|p| p.c_max).max().unwrap_or(0);
    const C_CHUNK: u64 = 256;
    let n_chunks = c_top.div_ceil(C_CHUNK);
    let wave = (4 * rayon::current_num_threads()) as u64;
    let mut totals = vec![NeumaierSum::new(); queries.len()];
    let mut start = 0u64;
    while start < n_chunks {
        let end = (start + wave).min(n_chunks);
        let partials: Vec<Result<Vec<(usize, NeumaierSum)>>> = (start..end)
            .into_par_iter()
            .map_init(KloostermanRows::new, |rows, ch| {
                let lo = ch * C_CHUNK + 1;
                let hi = ((ch + 1) * C_CHUNK).min(c_top);
                chunk_sums(lo, hi, &groups, &prepared, rows)
            })
            .collect();
        for p in partials {
            for (i, s) in p? {
                totals[i].merge(&s);
            }
        }
        start = end;
    }
    Ok(queries
        .iter()
        .zip(plans)
        .zip(totals)
        .map(|((q, plan), acc)| {
            let diag = if q.m == q.n { 1.0 } else { 0.0 };
            TruncatedSum {
                value: diag + TAU * sign_ik(q.k) * acc.value(),
                tail_bound: plan.tail_bound,
                terms_used: plan.multiples,
                converged: plan.converged,
            }
        })
        .collect())
}

fn chunk_sums(
    lo: u64,
    hi: u64,
    groups: &[(u64, Vec<usize>)],
    prepared: &[Prepared],
    rows: &mut KloostermanRows,
) -> Result<Vec<(usize, NeumaierSum)>> {
    let mut sums: std::collections::BTreeMap<usize, NeumaierSum> = Default::default();
    let mut row_one: Vec<f64> = Vec::new();
    let mut other_rows: Vec<(u64, Vec<f64>)> = Vec::new();
    for c in lo..=hi {
        let mut have_row_one = false;
        other_rows.clear();
        let cf = c as f64;
        for (level, idx) in groups {
            if c % level != 0 {
                continue;
            }
            for &i in idx {
                let p = &prepared[i];
                if p.c_max < c {
                    break;
                }
                let s = if p.n.gcd(&c) == 1 {
                    if !have_row_one {
                        rows.row_into(1, c, &mut row_one)?;
                        have_row_one = true;
                    }
                    row_one[((p.m as u128 * p.n as u128) % c as u128) as usize]
                } else {
                    let nr = p.n % c;
                    let pos = match other_rows.iter().position(|(key, _)| *key == nr) {
                        Some(pos) => pos,
                        None => {
                            let mut r = Vec::new();
                            rows.row_into(nr as i64, c, &mut r)?;
                            other_rows.push((nr, r));
                            other_rows.len() - 1
                        }
                    };
                    other_rows[pos].1[(p.m % c) as usize]
                };
                let term = s / cf * bessel_j_unchecked(p.nu, p.scale / cf);
                sums.entry(i).or_default().add(term);
            }
        }
    }
    Ok(sums.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(t: f64) -> TruncationPolicy {
        TruncationPolicy::tolerance(t)
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightLevel::new(2, 1).is_err());
        assert!(WeightLevel::new(13, 1).is_err());
        assert!(WeightLevel::new(12, 0).is_err());
        assert!(TruncationPolicy::tolerance(0.0).validate().is_err());
        assert!(TruncationPolicy::fixed(0).validate().is_err());
    }

    #[test]
    fn tail_bound_dominates_explicit_sum() {
        for (k, level, mn, j) in [(12u32, 1u64, 4.0f64, 3u64), (4, 5, 6.0, 10), (20, 12, 100.0, 1)] {
            let nu = k - 1;
            let explicit: f64 = (j + 1..j + 200_000)
                .map(|i| {
                    let c = (i * level) as f64;
                    TAU * crate::bessel::bessel_j_bound(nu, 4.0 * PI * mn.sqrt() / c)
                })
                .sum();
            let bound = tail_bound(k, level, mn, j);
            assert!(bound >= explicit, "k={k}: {bound} < {explicit}");
        }
    }

    #[test]
    fn tolerance_plan_is_minimal() {
        let policy = tol(1e-10);
        let plan = plan_truncation(12, 3, 25.0, &policy);
        assert!(plan.converged && plan.tail_bound <= 1e-10);
        assert!(tail_bound(12, 3, 25.0, plan.multiples - 1) > 1e-10);
        let capped = plan_truncation(12, 1, 1e6, &tol(1e-10).with_hard_cap(10));
        assert!(!capped.converged);
        assert_eq!(capped.multiples, 10);
    }

    #[test]
    fn level_one_weight_twelve_ratio() {
        let wl = WeightLevel::new(12, 1).unwrap();
        let d11 = delta_full(&wl, 1, 1, &tol(1e-12)).unwrap();
        let d21 = delta_full(&wl, 2, 1, &tol(1e-12)).unwrap();
        assert!(d11.converged && d11.value > 0.0);
        let expect = -24.0 / 2f64.powf(5.5);
        assert!((d21.value / d11.value - expect).abs() < 1e-9);
    }

    #[test]
    fn pinned_delta_one_one() {
        // Delta_{12,1}(1,1) = 12 / (11 Z(1, Delta)), frozen from a converged run
        let wl = WeightLevel::new(12, 1).unwrap();
        let d = delta_full(&wl, 1, 1, &tol(1e-14)).unwrap();
        assert!((d.value - 2.840_287_375_167_5).abs() < 1e-11, "{}", d.value);
    }

    #[test]
    fn large_weight_is_negligible() {
        let wl = WeightLevel::new(100, 5).unwrap();
        let d = delta_full(&wl, 2, 3, &tol(1e-20)).unwrap();
        assert!(d.converged && d.tail_bound <= 1e-20);
        assert!(d.value.abs() <= 1e-20);
    }

    #[test]
    fn symmetric_in_m_and_n() {
        for (k, n_level, m, n) in [(12u32, 1u64, 3u64, 7u64), (8, 6, 5, 11), (16, 4, 9, 2), (8, 9, 4, 10)] {
            let wl = WeightLevel::new(k, n_level).unwrap();
            let a = delta_full(&wl, m, n, &tol(1e-12)).unwrap();
            let b = delta_full(&wl, n, m, &tol(1e-12)).unwrap();
            assert!((a.value - b.value).abs() <= 1e-10);
        }
    }

    #[test]
    fn batch_matches_direct() {
        let policy = tol(1e-11);
        let mut queries = Vec::new();
        for &(k, level) in &[(12u32, 1u64), (8, 6), (16, 4), (20, 12), (8, 9)] {
            for &(m, n) in &[(1u64, 1u64), (4, 1), (9, 5), (2, 3), (25, 2), (6, 4)] {
                queries.push(DeltaQuery { k, level, m, n });
            }
        }
        let batch = delta_batch(&queries, &policy).unwrap();
        for (q, b) in queries.iter().zip(&batch) {
            let wl = WeightLevel::new(q.k, q.level).unwrap();
            let d = delta_full(&wl, q.m, q.n, &policy).unwrap();
            assert_eq!(b.terms_used, d.terms_used);
            assert!((b.value - d.value).abs() <= 1e-9, "{q:?}: {} vs {}", b.value, d.value);
        }
    }

    #[test]
    fn fixed_mode_sums_requested_range() {
        let wl = WeightLevel::new(12, 3).unwrap();
        let d = delta_full(&wl, 1, 1, &TruncationPolicy::fixed(30)).unwrap();
        assert_eq!(d.terms_used, 10);
        assert!(d.converged);
    }
}
