//! Sums of Hecke eigenvalues over newforms of exact level `N`.
//!
//! The pure sum `Delta*_{k,N}(n) = sum_{f in H*_k(N)} lambda_f(n) Z_N(1,f)/Z(1,f)`
//! is obtained from Petersson sums at the levels `M | N` by Moebius inversion:
//!
//! `Delta*_{k,N}(n) = (k-1)/12 sum_{LM=N} mu(L) M prod_{p^2|M} (1 - 1/p^2)
//!                    sum_{(m,M)=1} m^{-1} Delta_{k,M}(m^2, n)`.
//!
//! The `m`-sum converges only conditionally. It is cut at `m <= Y` and
//! summed in increasing `m`; the spread of the partial sums over the last
//! decade is reported next to the rigorous Petersson tails.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{artin_constant, euler_phi, eta, factor, moebius, FactoredInteger};
use crate::basis::NewformLocalData;
use crate::error::{precondition, Error, Result};
use crate::oracles::newform_dim;
use crate::petersson::{check_weight, delta_batch, DeltaQuery, TruncatedSum, TruncationPolicy};
use crate::summation::NeumaierSum;

/// Safety factor in the default choice of `Y`.
pub const Y_GUARD: f64 = 3.0;
/// Exponent used in the heuristic remainder estimate.
pub const HEURISTIC_EPSILON: f64 = 0.1;
/// `Y` used by [`cardinality_estimate`] when none is given.
pub const CARDINALITY_DEFAULT_Y: u64 = 1000;
/// Largest accepted `Y` (the inner arguments are `m^2 n`).
pub const MAX_Y: u64 = 1_000_000;

/// `prod_{p^2 | M} p^2 / (p^2 - 1)`.
pub fn squarefull_correction(m: &FactoredInteger) -> f64 {
    m.factors()
        .iter()
        .filter(|&&(_, e)| e >= 2)
        .map(|&(p, _)| {
            let p2 = (p * p) as f64;
            p2 / (p2 - 1.0)
        })
        .product()
}

/// `C_N = 12 / ((k-1) N) prod_{p^2 | N} p^2/(p^2-1)`.
pub fn petersson_normalisation(k: u32, n: &FactoredInteger) -> f64 {
    12.0 / ((k - 1) as f64 * n.value() as f64) * squarefull_correction(n)
}

/// `mu(L) M prod_{p^2|M} (1 - 1/p^2)`, the weight of level `M = N/L` in the
/// inversion formula (without the `(k-1)/12`).
fn inversion_weight(l: &FactoredInteger, m: &FactoredInteger) -> f64 {
    moebius(l) as f64 * m.value() as f64 / squarefull_correction(m)
}

/// A newform with its externally supplied global factor `Z(1, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralForm {
    pub data: NewformLocalData,
    pub z_global: f64,
}

/// Newforms of every level `M | N`, keyed by `M`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectralData {
    pub by_level: BTreeMap<u64, Vec<SpectralForm>>,
}

impl SpectralData {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, form: SpectralForm) {
        self.by_level.entry(form.data.level().value()).or_default().push(form);
    }

    /// Declares a level with no newforms.
    pub fn declare_empty(&mut self, level: u64) {
        self.by_level.entry(level).or_default();
    }
}

fn check_coprime(what: &str, a: u64, n: &FactoredInteger) -> Result<()> {
    if a == 0 {
        return precondition(format!("{what} must be positive"));
    }
    if n.gcd_u64(a) != 1 {
        return precondition(format!("{what} = {a} must be coprime to N = {}", n.value()));
    }
    Ok(())
}

/// `Delta_{k,N}(m,n) = C_N sum_{LM=N} sum_{f in H*(M)} Z_N(1,f)/Z(1,f) lambda_f(m) lambda_f(n)`
/// for `(mn, N) = 1`, from eigenvalue data and the global factors `Z(1,f)`.
///
/// Every `M | N` must be present with exactly `|H*_k(M)|` forms.
pub fn delta_star_weighted_via_eigendata(
    k: u32,
    n_level: &FactoredInteger,
    m: u64,
    n: u64,
    data: &SpectralData,
) -> Result<f64> {
    check_weight(k)?;
    check_coprime("m", m, n_level)?;
    check_coprime("n", n, n_level)?;
    let fm = factor(m)?;
    let fn_ = factor(n)?;
    let mut acc = NeumaierSum::new();
    for level in n_level.factored_divisors() {
        let forms = data
            .by_level
            .get(&level.value())
            .ok_or_else(|| Error::IncompleteData(format!("no entry for level {}", level.value())))?;
        let expected = newform_dim(k, &level)? as usize;
        if forms.len() != expected {
            return Err(Error::IncompleteData(format!(
                "level {} has {} forms, expected {expected}",
                level.value(),
                forms.len()
            )));
        }
        for form in forms {
            if form.data.k() != k || form.data.level() != &level {
                return Err(Error::InvalidEigenData(format!(
                    "form of weight {} and level {} filed under level {}",
                    form.data.k(),
                    form.data.level().value(),
                    level.value()
                )));
            }
            if !(form.z_global.is_finite() && form.z_global > 0.0) {
                return Err(Error::InvalidEigenData(format!("Z(1,f) = {} must be positive", form.z_global)));
            }
            let z_n = form.data.z_n(n_level)?;
            acc.add(z_n / form.z_global * form.data.hecke_lambda(&fm)? * form.data.hecke_lambda(&fn_)?);
        }
    }
    Ok(petersson_normalisation(k, n_level) * acc.value())
}

/// Parameters of one pure-sum evaluation; `None` selects the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct PureSumRequest {
    pub k: u32,
    pub level: FactoredInteger,
    pub n: u64,
    pub x: Option<u64>,
    pub y: Option<u64>,
}

/// Result of [`pure_sum`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureSumReport {
    /// Value with the aggregated rigorous Petersson tails.
    pub sum: TruncatedSum,
    /// `kN (1/X + Y^{-1/2}) (nkNXY)^eps`, a heuristic for the neglected `m > Y` part.
    pub heuristic_bound: f64,
    /// `max - min` of the partial sums over `Y/10 < m <= Y`.
    pub oscillation: f64,
    /// Contribution of the diagonal `m^2 = n` terms (already inside `sum.value`).
    pub diagonal: f64,
    pub x: u64,
    pub y: u64,
}

/// Largest square-free `L | N` with `L <= X`.
fn largest_squarefree_divisor(n: &FactoredInteger, x: u64) -> u64 {
    n.factored_divisors()
        .into_iter()
        .filter(|d| d.is_squarefree() && d.value() <= x)
        .map(|d| d.value())
        .max()
        .unwrap_or(1)
}

/// `Y = max(1, floor(guard k N_min / (12 pi sqrt n)))` with `N_min = N / L_max`.
pub fn default_y(k: u32, n_level: &FactoredInteger, n: u64, x: u64) -> u64 {
    let n_min = n_level.value() / largest_squarefree_divisor(n_level, x);
    let y = Y_GUARD * k as f64 * n_min as f64 / (12.0 * std::f64::consts::PI * (n as f64).sqrt());
    (y.floor() as u64).max(1)
}

pub fn heuristic_bound(k: u32, level: u64, n: u64, x: u64, y: u64) -> f64 {
    let kn = k as f64 * level as f64;
    let (xf, yf) = (x as f64, y as f64);
    kn * (1.0 / xf + 1.0 / yf.sqrt()) * (n as f64 * kn * xf * yf).powf(HEURISTIC_EPSILON)
}

struct Plan {
    k: u32,
    n: u64,
    x: u64,
    y: u64,
    level: u64,
    // (weight of the level, level M, (m, query index) pairs)
    terms: Vec<(f64, FactoredInteger, Vec<(u64, usize)>)>,
}

fn plan_request(req: &PureSumRequest, queries: &mut Vec<DeltaQuery>, index: &mut HashMap<DeltaQuery, usize>) -> Result<Plan> {
    check_weight(req.k)?;
    check_coprime("n", req.n, &req.level)?;
    let x = req.x.unwrap_or(req.level.value());
    if x == 0 {
        return precondition("X must be at least 1");
    }
    let y = match req.y {
        Some(0) => return precondition("Y must be at least 1"),
        Some(y) if y > MAX_Y => return precondition(format!("Y must be at most {MAX_Y}")),
        Some(y) => y,
        None => default_y(req.k, &req.level, req.n, x),
    };
    let mut terms = Vec::new();
    for l in req.level.factored_divisors() {
        if moebius(&l) == 0 || l.value() > x {
            continue;
        }
        let m_level = req.level.quotient(&l)?;
        let mut ms = Vec::new();
        for m in 1..=y {
            if m_level.gcd_u64(m) != 1 {
                continue;
            }
            let q = DeltaQuery { k: req.k, level: m_level.value(), m: m * m, n: req.n };
            let i = *index.entry(q).or_insert_with(|| {
                queries.push(q);
                queries.len() - 1
            });
            ms.push((m, i));
        }
        terms.push((inversion_weight(&l, &m_level), m_level, ms));
    }
    Ok(Plan { k: req.k, n: req.n, x, y, level: req.level.value(), terms })
}

fn reduce(plan: &Plan, values: &[TruncatedSum]) -> PureSumReport {
    let scale = (plan.k - 1) as f64 / 12.0;
    let y = plan.y;
    let window_start = y / 10;
    // running partial sums S(t) over all L at once, in increasing m
    let mut per_m: BTreeMap<u64, f64> = BTreeMap::new();
    let mut total = NeumaierSum::new();
    let mut tail = 0.0;
    let mut terms_used = 0;
    let mut converged = true;
    let mut diagonal = 0.0;
    let root = (plan.n as f64).sqrt().round() as u64;
    let n_is_square = root * root == plan.n;
    for (w, m_level, ms) in &plan.terms {
        let mut inner = NeumaierSum::new();
        let mut inner_tail = 0.0;
        for &(m, i) in ms {
            let v = &values[i];
            let t = v.value / m as f64;
            inner.add(t);
            *per_m.entry(m).or_default() += scale * w * t;
            inner_tail += v.tail_bound / m as f64;
            terms_used += v.terms_used;
            converged &= v.converged;
        }
        total.add(scale * w * inner.value());
        tail += scale * w.abs() * inner_tail;
        if n_is_square && root <= y && m_level.gcd_u64(root) == 1 {
            diagonal += scale * w / (plan.n as f64).sqrt();
        }
    }
    let mut running = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&m, &v) in &per_m {
        running += v;
        if m > window_start {
            lo = lo.min(running);
            hi = hi.max(running);
        }
    }
    let oscillation = if hi >= lo { hi - lo } else { 0.0 };
    PureSumReport {
        sum: TruncatedSum { value: total.value(), tail_bound: tail, terms_used, converged },
        heuristic_bound: heuristic_bound(plan.k, plan.level, plan.n, plan.x, plan.y),
        oscillation,
        diagonal,
        x: plan.x,
        y: plan.y,
    }
}

/// Evaluates several pure sums with one shared pass over the moduli.
pub fn pure_sum_batch(requests: &[PureSumRequest], policy: &TruncationPolicy) -> Result<Vec<PureSumReport>> {
    let mut queries = Vec::new();
    let mut index = HashMap::new();
    let plans = requests
        .iter()
        .map(|r| plan_request(r, &mut queries, &mut index))
        .collect::<Result<Vec<_>>>()?;
    let values = delta_batch(&queries, policy)?;
    Ok(plans.iter().map(|p| reduce(p, &values)).collect())
}

/// The truncated pure sum `Delta*_{k,N}(n)` with `L <= X` and `m <= Y`.
pub fn pure_sum(
    k: u32,
    level: &FactoredInteger,
    n: u64,
    x: Option<u64>,
    y: Option<u64>,
    policy: &TruncationPolicy,
) -> Result<PureSumReport> {
    let req = PureSumRequest { k, level: level.clone(), n, x, y };
    Ok(pure_sum_batch(&[req], policy)?.remove(0))
}

/// Pure sum at `n = 1` together with the main term and reference values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CardinalityReport {
    pub estimate: PureSumReport,
    /// `(k-1) eta(N) / 12`.
    pub main_term: f64,
    /// `(k-1)/12 phi(N) A` and `(k-1)/12 phi(N)`.
    pub sandwich: (f64, f64),
    pub oracle_dim: Option<u64>,
    pub rounded: i64,
}

pub fn main_term(k: u32, level: &FactoredInteger) -> f64 {
    (k - 1) as f64 * eta(level) as f64 / 12.0
}

fn cardinality_report(k: u32, level: &FactoredInteger, estimate: PureSumReport) -> CardinalityReport {
    let base = (k - 1) as f64 / 12.0 * euler_phi(level) as f64;
    CardinalityReport {
        main_term: main_term(k, level),
        sandwich: (base * artin_constant(), base),
        oracle_dim: newform_dim(k, level).ok(),
        rounded: estimate.sum.value.round() as i64,
        estimate,
    }
}

/// `|H*_k(N)|` estimated by the pure sum at `n = 1`; `Y` defaults to
/// [`CARDINALITY_DEFAULT_Y`] since the default of [`pure_sum`] is tuned for
/// small `n` relative to `kN` and is too short for counting.
pub fn cardinality_estimate(
    k: u32,
    level: &FactoredInteger,
    x: Option<u64>,
    y: Option<u64>,
    policy: &TruncationPolicy,
) -> Result<CardinalityReport> {
    Ok(cardinality_batch(&[(k, level.clone())], x, Some(y.unwrap_or(CARDINALITY_DEFAULT_Y)), policy)?.remove(0))
}

/// [`cardinality_estimate`] for many `(k, N)` with one shared pass.
pub fn cardinality_batch(
    cases: &[(u32, FactoredInteger)],
    x: Option<u64>,
    y: Option<u64>,
    policy: &TruncationPolicy,
) -> Result<Vec<CardinalityReport>> {
    let y = Some(y.unwrap_or(CARDINALITY_DEFAULT_Y));
    let requests: Vec<PureSumRequest> = cases
        .iter()
        .map(|(k, level)| PureSumRequest { k: *k, level: level.clone(), n: 1, x, y })
        .collect();
    let reports = pure_sum_batch(&requests, policy)?;
    Ok(cases
        .iter()
        .zip(reports)
        .map(|((k, level), r)| cardinality_report(*k, level, r))
        .collect())
}

/// A synthetic family of "newforms" at every level `M | N` with multiplicative
/// eigenvalues, used to test the inversion identities without real spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpectrum {
    pub k: u32,
    pub level: FactoredInteger,
    pub forms: Vec<NewformLocalData>,
}

impl SyntheticSpectrum {
    /// `forms_per_level` forms at each `M | N` with `lambda(p)` uniform in
    /// `(-spread, spread)` for `p !| M` among `primes` and the primes of `N`,
    /// random signs at `p || M`, zero at `p^2 | M`.
    pub fn generate(
        k: u32,
        level: &FactoredInteger,
        primes: &[u64],
        forms_per_level: usize,
        spread: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut all: Vec<u64> = primes.to_vec();
        all.extend(level.primes());
        all.sort_unstable();
        all.dedup();
        let mut forms = Vec::new();
        for m in level.factored_divisors() {
            for _ in 0..forms_per_level {
                let mut lambda = BTreeMap::new();
                let mut signs = BTreeMap::new();
                for &p in &all {
                    match m.valuation(p) {
                        0 => {
                            lambda.insert(p, rng.gen_range(-spread..spread));
                        }
                        1 => {
                            signs.insert(p, if rng.gen_bool(0.5) { 1 } else { -1 });
                        }
                        _ => {}
                    }
                }
                forms.push(NewformLocalData::synthetic(k, m.clone(), lambda, &signs)?);
            }
        }
        Ok(SyntheticSpectrum { k, level: level.clone(), forms })
    }

    /// Spectrum from explicit forms, all of levels dividing `N`.
    pub fn from_forms(k: u32, level: &FactoredInteger, forms: Vec<NewformLocalData>) -> Result<Self> {
        for f in &forms {
            if f.k() != k || level.value() % f.level().value() != 0 {
                return precondition(format!("form of level {} does not divide N = {}", f.level().value(), level.value()));
            }
        }
        Ok(SyntheticSpectrum { k, level: level.clone(), forms })
    }
}

/// A linear combination `sum_f c_f / Z(1, f)` over the forms of a spectrum.
type Coefficients = Vec<f64>;

/// `sum_{l | A^infty} lambda_f(l^2) / l` for the primes of `A` coprime to the
/// level of `f`, in closed form.
fn ell_series(form: &NewformLocalData, primes: impl Iterator<Item = u64>) -> Result<f64> {
    let mut acc = 1.0;
    for p in primes {
        if !form.level().divides(p) {
            acc *= form.z_local_series(p)?;
        }
    }
    Ok(acc)
}

// sum_{l | B^infty, (l, M) = 1} l^{-1} Delta_{k,M}(m l^2, n) with Delta_{k,M}
// expanded by the forward identity into forms of level M' | M; `b_primes`
// are the primes of B, all coprime to M.
fn forward_with_ell(
    spec: &SyntheticSpectrum,
    m_level: &FactoredInteger,
    b_primes: &[u64],
) -> Result<Coefficients> {
    let c = petersson_normalisation(spec.k, m_level);
    let mut out = vec![0.0; spec.forms.len()];
    for (i, g) in spec.forms.iter().enumerate() {
        if m_level.value() % g.level().value() != 0 {
            continue;
        }
        // l' | (M/M')^infty coprime to M' inside Delta_{k,M}, and l from B
        let inner = ell_series(g, m_level.primes())?;
        let outer = ell_series(g, b_primes.iter().copied())?;
        out[i] = c * g.z_n(g.level())? * inner * outer;
    }
    Ok(out)
}

/// Outcome of [`inversion_pair_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionReport {
    /// Largest deviation between the forward identity and
    /// `C_N sum Z_N/Z lambda lambda`, per `1/Z` coefficient.
    pub forward_error: f64,
    /// Largest deviation of the recovered `Delta*` coefficients, relative to their size.
    pub round_trip_error: f64,
    /// Recovered and expected `Delta*_{k,N}(m,n)` with the test weights `1/Z(f) = 1`.
    pub recovered: f64,
    pub expected: f64,
    pub passed: bool,
}

/// Tolerance of [`inversion_pair_check`].
pub const INVERSION_TOLERANCE: f64 = 1e-9;

/// Runs the forward identity (from `Delta*` at every level to `Delta_{k,N}`)
/// and its Moebius inverse on a synthetic spectrum, and checks that the
/// inverse recovers `Delta*_{k,N}(m,n) = sum_{f in H*(N)} lambda_f(m) lambda_f(n) Z_N(1,f)/Z(1,f)`.
///
/// Values are carried as coefficients of the unknown `1/Z(1,f)`, so the
/// check is exact in those unknowns.
pub fn inversion_pair_check(k: u32, n_level: &FactoredInteger, m: u64, n: u64, spec: &SyntheticSpectrum) -> Result<InversionReport> {
    check_weight(k)?;
    check_coprime("m", m, n_level)?;
    check_coprime("n", n, n_level)?;
    if spec.k != k || &spec.level != n_level {
        return precondition("synthetic spectrum was generated for another weight or level");
    }
    let (fm, fn_) = (factor(m)?, factor(n)?);
    let mut lm = Vec::with_capacity(spec.forms.len());
    for g in &spec.forms {
        lm.push(g.hecke_lambda(&fm)? * g.hecke_lambda(&fn_)?);
    }

    // forward: Delta_{k,N}(m,n) = C_N sum_{LM=N} sum_{l | L^infty, (l,M)=1} l^{-1} Delta*_{k,M}(m l^2, n)
    let c_n = petersson_normalisation(k, n_level);
    let mut forward = vec![0.0; spec.forms.len()];
    for m_level in n_level.factored_divisors() {
        let l = n_level.quotient(&m_level)?;
        for (i, g) in spec.forms.iter().enumerate() {
            if g.level() != &m_level {
                continue;
            }
            // Delta*_{k,M}(m l^2, n) = sum_g lambda_g(m l^2) lambda_g(n) Z_M(g)/Z(g)
            forward[i] += c_n * lm[i] * g.z_n(&m_level)? * ell_series(g, l.primes())?;
        }
    }
    let mut forward_error: f64 = 0.0;
    for (i, g) in spec.forms.iter().enumerate() {
        let closed = c_n * lm[i] * g.z_n(n_level)?;
        forward_error = forward_error.max((forward[i] - closed).abs() / closed.abs().max(1e-300).max(c_n * lm[i].abs()));
    }

    // inverse: Delta*_{k,N}(m,n) = (k-1)/12 sum_{LM=N} mu(L) M prod(1-1/p^2)
    //          sum_{l | L^infty, (l,M)=1} l^{-1} Delta_{k,M}(m l^2, n)
    let scale = (k - 1) as f64 / 12.0;
    let mut recovered: Coefficients = vec![0.0; spec.forms.len()];
    for l in n_level.factored_divisors() {
        if moebius(&l) == 0 {
            continue;
        }
        let m_level = n_level.quotient(&l)?;
        let b_primes: Vec<u64> = l.primes().filter(|&p| !m_level.divides(p)).collect();
        let w = scale * inversion_weight(&l, &m_level);
        let coeffs = forward_with_ell(spec, &m_level, &b_primes)?;
        for i in 0..recovered.len() {
            recovered[i] += w * lm[i] * coeffs[i];
        }
    }
    let mut round_trip_error: f64 = 0.0;
    let (mut rec_total, mut exp_total) = (NeumaierSum::new(), NeumaierSum::new());
    for (i, g) in spec.forms.iter().enumerate() {
        let expected = if g.level() == n_level { lm[i] * g.z_n(n_level)? } else { 0.0 };
        let size = (lm[i] * g.z_n(n_level)?).abs().max(f64::MIN_POSITIVE);
        round_trip_error = round_trip_error.max((recovered[i] - expected).abs() / size);
        rec_total.add(recovered[i]);
        exp_total.add(expected);
    }
    let passed = forward_error <= INVERSION_TOLERANCE && round_trip_error <= INVERSION_TOLERANCE;
    Ok(InversionReport {
        forward_error,
        round_trip_error,
        recovered: rec_total.value(),
        expected: exp_total.value(),
        passed,
    })
}
