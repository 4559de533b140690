//! Petersson sums at level 2 against the spectral side built from the
//! level-one weight-12 eigenform, the only source of S_12(Gamma_0(2)).

use std::collections::BTreeMap;

use heckesum::arith::{factor, primes_up_to};
use heckesum::basis::NewformLocalData;
use heckesum::newform_sums::{delta_star_weighted_via_eigendata, SpectralData, SpectralForm};
use heckesum::oracles::level_one_lambdas;
use heckesum::petersson::{delta_full, TruncationPolicy, WeightLevel};

#[test]
fn level_two_matches_level_one_eigenform() {
    let policy = TruncationPolicy::tolerance(1e-12);
    let lambdas = level_one_lambdas(12, 50).unwrap();
    let lambda: BTreeMap<u64, f64> = primes_up_to(50).into_iter().map(|p| (p, lambdas[p as usize - 1])).collect();
    let delta = NewformLocalData::new(12, factor(1).unwrap(), lambda, &BTreeMap::new()).unwrap();

    // Delta_{12,1}(1,1) = C_1 / Z(1, f) with C_1 = 12/11
    let d11 = delta_full(&WeightLevel::new(12, 1).unwrap(), 1, 1, &policy).unwrap().value;
    let z_global = 12.0 / 11.0 / d11;
    let mut spectrum = SpectralData::new();
    spectrum.insert(SpectralForm { data: delta, z_global });
    spectrum.declare_empty(2);

    let level = factor(2).unwrap();
    let wl = WeightLevel::new(12, 2).unwrap();
    for (m, n) in [(1u64, 1u64), (1, 3), (3, 5), (5, 7), (9, 1), (15, 21)] {
        let petersson = delta_full(&wl, m, n, &policy).unwrap();
        let spectral = delta_star_weighted_via_eigendata(12, &level, m, n, &spectrum).unwrap();
        assert!(
            (petersson.value - spectral).abs() <= petersson.tail_bound + 1e-9,
            "(m, n) = ({m}, {n}): {} vs {spectral}",
            petersson.value
        );
    }
}
