"""Smoke test for the selfrepel extension module.

Build and install first:

    pip install --no-build-isolation ./crates/py
    python python/smoke.py
"""

import math

import selfrepel as sr


def main():
    w2 = sr.Weight.exponential(2.0)
    w10 = sr.Weight.exponential(10.0)
    assert math.isclose(w2(3), 8.0)
    assert w2.step_probability_right(0) == 0.5

    try:
        sr.Weight.exponential(1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("constant weight accepted")

    # walk: the gradient identity holds and counters add up
    walk = sr.Walk(seed=1)
    path = walk.run(w2, 10_000)
    assert len(path) == 10_000 and path[-1] == walk.position
    walk.check_identity()
    assert sum(p + m for _, p, m in walk.field()) == walk.steps
    assert sr.Walk(seed=1).run(w2, 500) == path[:500]

    # exact position law
    law = sr.position_law(w2, 3)
    assert abs(sum(law.values()) - 1.0) < 1e-15
    assert abs(law[1] - 0.375) < 1e-15
    assert sr.starteq_error(w10, 8) < 1e-12

    # stationary law of the auxiliary chain
    rho = sr.stationary_rho(w2)
    assert abs(rho[0] - 0.3949852373) < 1e-9
    assert abs(sum(x * p for x, p in rho.items()) + 0.5) < 1e-9
    row = sr.eta_kernel_row(w2, 0)
    assert abs(sum(row.values()) - 1.0) < 1e-12 and min(row) == -1
    tv = sr.tv_decay(w2, 20)
    assert all(b <= a for a, b in zip(tv, tv[1:]))

    # stopped profiles, both routes
    prof = sr.stopped_profile(w2, j=0, r=1)
    assert prof.oriented(0) == 1 and prof.stopping_time == sum(prof.values().values())
    big = sr.stopped_profile(w2, j=100, r=800, seed=3)
    assert abs(big.peak / 1700 - 1) < 0.1, big
    eta = sr.stopped_profile(w2, j=4, r=3, sign="-", route="eta")
    assert eta.oriented(4) == 3

    mu = sr.coalescence_times(w2, 200, seed=4)
    assert all(m is not None for m in mu)
    taus = sr.mean_hitting_times(w2, [0, 10], replicates=200)
    assert taus[0] == 0.0 and taus[1] > 0

    # limit formulas
    assert sr.tent(0.5, 0.0, 2.0) == 4.5
    assert sr.t_limit(0.5, 2.0) == 4.5 ** 2
    assert abs(sr.phi_hat(1.0, 1 / math.sqrt(2)) - 0.281209) < 1e-6
    assert abs(sr.phi_hat_cdf(1.0, 0.0) - 0.5) < 1e-15

    out = sr.run_criterion(2)
    assert out["pass"], out["summary"]

    print(f"selfrepel {sr.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
