#!/usr/bin/env python3
"""Arbitrary-precision reference values for the shotqrng test suite.

Every number here comes from direct summation of the modified Bessel power
series (or mpmath's own besseli for extreme arguments) at 50+ significant
digits. Output files land in crates/core/tests/data/ and are committed; the
scalar values printed at the end are frozen into the Rust tests.

Run: python3 scripts/oracle.py
"""
import os
import sys

import mpmath as mp

mp.mp.dps = 60
OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "data")


def bessel_i_series(j, z):
    """I_j(z) = sum_m (z/2)^(2m+j) / (m! (m+j)!) summed until negligible."""
    z = mp.mpf(z)
    half = z / 2
    term = half ** j / mp.factorial(j)
    total = term
    m = 0
    while True:
        m += 1
        term = term * half * half / (m * (m + j))
        total += term
        if term < total * mp.mpf(10) ** (-mp.mp.dps) and m > half:
            return total


def scaled_bessel_i_quad(j, z):
    """e^{-z} I_j(z) = (1/pi) int_0^pi e^{z(cos t - 1)} cos(j t) dt, used where
    the series would need too many terms. The integrand is concentrated in
    t < ~40/sqrt(z), so the interval is split geometrically there."""
    z = mp.mpf(z)
    w = 1 / mp.sqrt(z)
    pts = [mp.mpf(0)]
    step = w / 4
    while step < mp.pi:
        pts.append(step)
        step *= 2
    pts.append(mp.pi)
    f = lambda t: mp.exp(-2 * z * mp.sin(t / 2) ** 2) * mp.cos(j * t)
    return mp.quad(f, pts, maxdegree=12) / mp.pi


def log_ive(j, z):
    if mp.mpf(z) <= 10 ** 6:
        return mp.log(bessel_i_series(j, z)) - mp.mpf(z)
    return mp.log(scaled_bessel_i_quad(j, z))


def skellam(mu, jmax):
    z = 2 * mp.mpf(mu)
    return {j: mp.exp(-z) * bessel_i_series(abs(j), z) for j in range(-jmax, jmax + 1)}


def poisson(mu, jmax):
    mu = mp.mpf(mu)
    return {j: mp.exp(-mu) * mu ** j / mp.factorial(j) for j in range(0, jmax + 1)}


def shannon_bits(ps):
    return -sum(p * mp.log(p, 2) for p in ps if p > 0)


def gauss(x, var):
    return mp.exp(-mp.mpf(x) ** 2 / (2 * var)) / mp.sqrt(2 * mp.pi * var)


def main():
    os.makedirs(OUT, exist_ok=True)

    orders = [0, 1, 2, 5, 10, 19, 20, 21, 29, 30, 31, 50, 100, 1000, 10000, 100000, 1000000]
    args = ["0.001", "0.5", "1", "5", "14.9", "15.1", "30", "100", "1000", "10000", "100000", "1000000", "100000000"]
    with open(os.path.join(OUT, "log_bessel_ive_oracle.csv"), "w") as f:
        f.write("order,argument,log_scaled\n")
        for j in orders:
            for z in args:
                if float(z) > 1e6 and j > 10000:
                    continue
                v = log_ive(j, z)
                f.write(f"{j},{z},{mp.nstr(v, 25, strip_zeros=False)}\n")
                sys.stdout.flush()

    # Skellam(50): z = 100
    sk = skellam(50, 130)
    tail = 1 - sum(sk.values())
    with open(os.path.join(OUT, "skellam_mu50_oracle.csv"), "w") as f:
        f.write("j,probability\n")
        for j in sorted(sk):
            f.write(f"{j},{mp.nstr(sk[j], 30)}\n")
    print("skellam50 missing mass beyond |j|<=130:", mp.nstr(tail, 5))

    p0 = sk[0]
    print("p0(mu=50) =", mp.nstr(p0, 25))
    print("min-entropy skellam(50) bits =", mp.nstr(-mp.log(p0, 2), 25))
    h50 = shannon_bits(sk.values())
    print("shannon skellam(50) bits =", mp.nstr(h50, 25))
    g100 = mp.log(2 * mp.pi * mp.e * 100, 2) / 2
    print("gaussian entropy var 100 bits =", mp.nstr(g100, 25), "gap =", mp.nstr(h50 - g100, 10))
    c3 = sk[-1] + sk[0] + sk[1]
    print("central a/k=3 mass =", mp.nstr(c3, 25), "R^L bits =", mp.nstr(-mp.log(c3, 2), 25))

    # Gaussian-limit gap for the Fig. 2 comparison.
    max_gap = max(abs(sk[j] - gauss(j, 100)) for j in sk)
    tv = sum(abs(sk[j] - gauss(j, 100)) for j in sk) / 2
    print("max |p_j - N(0,100)(j)| =", mp.nstr(max_gap, 10), " / p0 =", mp.nstr(max_gap / p0, 10))
    print("TV(skellam50, sampled gaussian) =", mp.nstr(tv, 10))

    # Skellam(200) entropy gap against the Gaussian approximation.
    sk200 = skellam(200, 300)
    h200 = shannon_bits(sk200.values())
    g400 = mp.log(2 * mp.pi * mp.e * 400, 2) / 2
    print("shannon skellam(200) bits =", mp.nstr(h200, 25), "gap =", mp.nstr(h200 - g400, 10))

    # Upper bound at 2mu = 100.
    po = poisson(100, 400)
    hp = shannon_bits(po.values())
    print("H(Poisson(100)) bits =", mp.nstr(hp, 25))
    print("R^U(2mu=100) bits =", mp.nstr(mp.log(101, 2) + hp, 25))

    po50 = poisson(50, 300)
    print("H(Poisson(50)) bits =", mp.nstr(shannon_bits(po50.values()), 25))


if __name__ == "__main__":
    main()
