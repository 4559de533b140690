//! Independent ground truth: Ramanujan's tau by q-expansion, the level-one
//! Hecke eigenforms of dimension-one weights, and the classical dimension
//! formulas for `S_k(Gamma_0(N))` and its newform subspace.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{euler_phi, factor, nu, FactoredInteger};
use crate::error::{precondition, Result};
use num_integer::Integer;

/// Largest table size accepted by [`ramanujan_tau`].
pub const MAX_TAU_BOUND: usize = 100_000;

// Jacobi: prod (1 - q^m)^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2}.
fn jacobi_cube(len: usize) -> Vec<(usize, i128)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out.push((k * (k + 1) / 2, sign * (2 * k as i128 + 1)));
        k += 1;
    }
    out
}

fn mul_sparse_i128(dense: &[i128], sparse: &[(usize, i128)]) -> Option<Vec<i128>> {
    let mut out = vec![0i128; dense.len()];
    for (n, slot) in out.iter_mut().enumerate() {
        let mut acc = 0i128;
        for &(e, s) in sparse {
            if e > n {
                break;
            }
            acc = acc.checked_add(dense[n - e].checked_mul(s)?)?;
        }
        *slot = acc;
    }
    Some(out)
}

fn mul_sparse_big(dense: &[BigInt], sparse: &[(usize, i128)]) -> Vec<BigInt> {
    (0..dense.len())
        .map(|n| {
            sparse
                .iter()
                .take_while(|(e, _)| *e <= n)
                .fold(BigInt::zero(), |acc, &(e, s)| acc + &dense[n - e] * s)
        })
        .collect()
}

/// `tau(n)` for `1 <= n <= bound`; index 0 of the result holds `tau(1)`.
///
/// The coefficients of `q prod (1 - q^m)^24 = q (sum (-1)^k (2k+1) q^{k(k+1)/2})^8`
/// are built by eight exact sparse multiplications; 128-bit integers are used
/// while no step overflows, big integers otherwise.
pub fn ramanujan_tau(bound: usize) -> Result<Vec<BigInt>> {
    if bound == 0 || bound > MAX_TAU_BOUND {
        return precondition(format!("tau table size must lie in 1..={MAX_TAU_BOUND}"));
    }
    let sparse = jacobi_cube(bound);
    let mut dense = vec![0i128; bound];
    dense[0] = 1;
    let mut fast = true;
    for _ in 0..8 {
        match mul_sparse_i128(&dense, &sparse) {
            Some(next) => dense = next,
            None => {
                fast = false;
                break;
            }
        }
    }
    if fast {
        return Ok(dense.into_iter().map(BigInt::from).collect());
    }
    let mut big = vec![BigInt::zero(); bound];
    big[0] = BigInt::from(1);
    for _ in 0..8 {
        big = mul_sparse_big(&big, &sparse);
    }
    Ok(big)
}

fn sigma_power(n: u64, e: u32) -> BigInt {
    let f = factor(n).expect("positive");
    f.divisors().into_iter().map(|d| BigInt::from(d).pow(e)).sum()
}

fn eisenstein(weight: u32, len: usize) -> Vec<BigInt> {
    let (c, e) = match weight {
        4 => (240i64, 3u32),
        6 => (-504, 5),
        _ => unreachable!(),
    };
    let mut out = vec![BigInt::zero(); len];
    out[0] = BigInt::from(1);
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = sigma_power(n as u64, e) * c;
    }
    out
}

fn mul_dense(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let len = a.len();
    (0..len)
        .map(|n| (0..=n).fold(BigInt::zero(), |acc, i| acc + &a[i] * &b[n - i]))
        .collect()
}

/// Weights whose level-one cusp space is one-dimensional.
pub const ONE_DIMENSIONAL_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Fourier coefficients `a(1..=bound)` of the normalised level-one eigenform
/// `Delta * E_{k-12}` for `k` in [`ONE_DIMENSIONAL_WEIGHTS`].
pub fn level_one_eigenform(k: u32, bound: usize) -> Result<Vec<BigInt>> {
    if !ONE_DIMENSIONAL_WEIGHTS.contains(&k) {
        return precondition(format!("S_{k}(1) is not one-dimensional"));
    }
    let delta = ramanujan_tau(bound)?;
    let eis: Vec<u32> = match k - 12 {
        0 => vec![],
        4 => vec![4],
        6 => vec![6],
        8 => vec![4, 4],
        10 => vec![4, 6],
        14 => vec![4, 4, 6],
        _ => unreachable!(),
    };
    // delta holds a(n) at index n-1, i.e. the series Delta / q
    let mut series = delta;
    for w in eis {
        series = mul_dense(&series, &eisenstein(w, bound));
    }
    Ok(series)
}

/// Normalised Hecke eigenvalues `lambda(n) = a(n) / n^{(k-1)/2}` of the
/// level-one form of weight `k`, for `1 <= n <= bound` (index 0 is `n = 1`).
pub fn level_one_lambdas(k: u32, bound: usize) -> Result<Vec<f64>> {
    let coeffs = level_one_eigenform(k, bound)?;
    Ok(coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let n = (i + 1) as f64;
            a.to_f64().unwrap_or(f64::NAN) / n.powf((k as f64 - 1.0) / 2.0)
        })
        .collect())
}

fn kronecker_minus4(p: u64) -> i64 {
    match p % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

fn kronecker_minus3(p: u64) -> i64 {
    match p % 3 {
        1 => 1,
        2 => -1,
        _ => 0,
    }
}

/// Number of elliptic points of order two of `Gamma_0(N)`.
pub fn epsilon2(n: &FactoredInteger) -> u64 {
    if n.valuation(2) >= 2 {
        return 0;
    }
    n.primes().map(|p| (1 + kronecker_minus4(p)) as u64).product()
}

/// Number of elliptic points of order three of `Gamma_0(N)`.
pub fn epsilon3(n: &FactoredInteger) -> u64 {
    if n.valuation(3) >= 2 {
        return 0;
    }
    n.primes().map(|p| (1 + kronecker_minus3(p)) as u64).product()
}

/// Number of cusps of `Gamma_0(N)`.
pub fn cusp_count(n: &FactoredInteger) -> u64 {
    n.divisors()
        .into_iter()
        .map(|d| euler_phi(&factor(d.gcd(&(n.value() / d))).expect("positive")))
        .sum()
}

fn check_weight(k: u32) -> Result<()> {
    if k % 2 != 0 || k < 4 {
        return precondition(format!("dimension formulas need even k >= 4, got {k}"));
    }
    Ok(())
}

/// `dim S_k(Gamma_0(N))` for even `k >= 4`.
pub fn dim_cusp(k: u32, n: &FactoredInteger) -> Result<u64> {
    check_weight(k)?;
    let k = k as i128;
    let twelve_dim = (k - 1) * nu(n) as i128
        + (12 * (k / 4) - 3 * (k - 1)) * epsilon2(n) as i128
        + (12 * (k / 3) - 4 * (k - 1)) * epsilon3(n) as i128
        - 6 * cusp_count(n) as i128;
    assert!(twelve_dim >= 0 && twelve_dim % 12 == 0, "dimension formula gave {twelve_dim}/12");
    Ok((twelve_dim / 12) as u64)
}

// Dirichlet inverse of tau: mu * mu, supported on cube-free numbers.
fn mu_mu(l: &FactoredInteger) -> i64 {
    l.factors()
        .iter()
        .map(|&(_, e)| match e {
            1 => -2,
            2 => 1,
            _ => 0,
        })
        .product()
}

/// `|H*_k(N)|`, inverting `dim S_k(N) = sum_{LM=N} tau(L) |H*_k(M)|`.
pub fn newform_dim(k: u32, n: &FactoredInteger) -> Result<u64> {
    check_weight(k)?;
    let mut total: i128 = 0;
    for l in n.factored_divisors() {
        let c = mu_mu(&l);
        if c == 0 {
            continue;
        }
        let m = n.quotient(&l)?;
        total += c as i128 * dim_cusp(k, &m)? as i128;
    }
    assert!(total >= 0, "negative newform dimension {total} for k={k}, N={}", n.value());
    Ok(total as u64)
}

/// Sanity helper: `sum_{LM=N} tau(L) newform_dim(k, M)`.
pub fn old_new_convolution(k: u32, n: &FactoredInteger) -> Result<u64> {
    let mut total = 0u64;
    for l in n.factored_divisors() {
        let m = n.quotient(&l)?;
        total += l.divisor_count() * newform_dim(k, &m)?;
    }
    Ok(total)
}
