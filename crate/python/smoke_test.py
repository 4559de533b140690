"""Smoke test for the pyheckesum extension module.

Build first, e.g. `maturin develop -m crates/py/pyproject.toml`.
"""

import json
import math

import pyheckesum as hs


def main():
    assert hs.ramanujan_tau(3) == [1, -24, 252]
    assert hs.factor(360) == [(2, 3), (3, 2), (5, 1)]
    assert hs.moebius(30) == -1
    assert hs.newform_dim(4, 11) == 2
    assert hs.dim_cusp(12, 1) == 1

    assert abs(hs.kloosterman(1, 1, 3) + 1.0) < 1e-12
    assert abs(hs.bessel_j(1, 1.0) - 0.4400505857449335) < 1e-15

    d11 = hs.delta(12, 1, 1, 1, tol=1e-10)
    d21 = hs.delta(12, 1, 2, 1, tol=1e-10)
    assert d11.converged and d21.converged
    assert abs(d21.value / d11.value + 24 * 2 ** -5.5) < 1e-6

    time_side, fourier_side = hs.rmt_integral("O", 1.0)
    assert abs(fourier_side - 1.5) < 1e-10
    assert abs(time_side - fourier_side) < 1e-6

    assert hs.inversion_pair_check(12, 12, 5, 7)

    form = hs.NewformLocalData.from_json(
        json.dumps({"k": 12, "M": 5, "lambda": {"2": 1.0}, "ramified_signs": {"5": -1}})
    )
    assert abs(form.lambda_p(5) + 1 / math.sqrt(5)) < 1e-15
    assert abs(form.xi_one_sum_direct(2) - 9 / 7) < 1e-12

    try:
        hs.delta(13, 1, 1, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("odd weight accepted")

    print("pyheckesum", hs.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
