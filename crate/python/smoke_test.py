"""Smoke test for the tgcs_py extension module.

Build and install first:  maturin develop -m crates/python/Cargo.toml
"""

import math

import tgcs_py as t


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1.0)


def main():
    assert close(t.mittag_leffler(1.0, 1.0, 2.0), math.exp(2.0), 1e-13)

    fact = t.Sequence.factorial()
    coh = t.State(fact, 1.5)
    p = coh.distribution()
    assert close(sum(p), 1.0, 1e-12)
    assert abs(coh.mandel_q().q) < 1e-12

    s = t.State(t.Sequence.ml_gamma(0.5, 0.5), 0.8, k=5)
    r = s.mandel_q()
    assert r.regime in ("SubPoissonian", "Poissonian", "SuperPoissonian")
    assert close(r.q, r.q_series, 1e-10)
    assert close(s.g2(), 1.0 + r.q / r.mean_n, 1e-10)
    assert close(abs(s.overlap(s)), 1.0, 1e-13)

    run = s.sample(100_000, 42)
    assert sum(run.counts) == 100_000
    assert run.counts == s.sample(100_000, 42).counts

    roots, residuals = t.polynomial_roots(t.Sequence.wright_product(1.0, 1.0), 8)
    assert len(roots) == 8 and max(residuals) <= 1e-9

    ok, rows = t.verify()
    assert ok, [row for row in rows if not row[3]]

    try:
        t.Sequence.ml_gamma(-1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative alpha accepted")

    print(f"smoke test passed ({len(rows)} verification checks)")


if __name__ == "__main__":
    main()
