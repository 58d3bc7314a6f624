"""Reference values for the special-function and Laplace-domain tests.

Evaluated with mpmath at 50 significant digits. The printed numbers are
frozen into the Rust tests; re-run this script to regenerate them.
"""
import mpmath as mp

mp.mp.dps = 50


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


def kummer_series(a, b, z, terms=200):
    a, b, z = mp.mpf(a), mp.mpf(b), mp.mpf(z)
    acc, term = mp.mpf(1), mp.mpf(1)
    for k in range(terms):
        term *= (a + k) / (b + k) * z / (k + 1)
        acc += term
    return acc


def u_via_kummer(a, x):
    a, x = mp.mpf(a), mp.mpf(x)
    c1 = mp.sqrt(mp.pi) / (2 ** (a / 2 + mp.mpf(1) / 4) * mp.gamma(mp.mpf(3) / 4 + a / 2))
    c2 = mp.sqrt(mp.pi) / (2 ** (a / 2 - mp.mpf(1) / 4) * mp.gamma(mp.mpf(1) / 4 + a / 2))
    e = mp.exp(-x * x / 4)
    return c1 * e * kummer_series(a / 2 + 0.25, 0.5, x * x / 2, 400) - c2 * x * e * kummer_series(a / 2 + 0.75, 1.5, x * x / 2, 400)


def digamma_ratio(s, eps):
    s, eps = mp.mpf(s), mp.mpf(eps)
    A = (s + 1) / (2 * eps)
    B = s / (2 * eps)
    return mp.gamma(A) * mp.gamma(B + 0.5) / (mp.gamma(B) * mp.gamma(A + 0.5))


print("# rate")
show("atan10_plus_half_pi", mp.atan(10) + mp.pi / 2)

print("# kummer")
show("m_05_15_2_series200", kummer_series(0.5, 1.5, 2.0, 200))
show("m_05_15_2_hyp1f1", mp.hyp1f1(0.5, 1.5, 2.0))
for a, b, z in [(1.3, 2.7, 5.0), (-2.5, 0.5, 3.0), (0.25, 0.5, -4.0), (2.0, 1.5, 80.0), (-0.75, 1.5, 120.0), (50.25, 0.5, 2.0)]:
    show(f"m({a},{b},{z})", mp.hyp1f1(a, b, z))

print("# pcf")
show("u_1_3_kummer", u_via_kummer(1.0, 3.0))
show("u_1_3_pcfu", mp.pcfu(1.0, 3.0))
show("v_05_1", mp.pcfv(0.5, 1.0))
for a in [-2.0, -1.5, -0.5, 0.0, 0.7, 1.0, 2.5, 5.0]:
    for x in [0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0]:
        print(f"U {a} {x} {mp.nstr(mp.pcfu(a, x), 20)}")
for a in [-2.0, -0.5, 0.0, 0.5, 1.5, 2.5, 5.0]:
    for x in [0.5, 1.0, 2.0, 3.0, 5.0]:
        print(f"V {a} {x} {mp.nstr(mp.pcfv(a, x), 20)}")
for a, x in [(199.5, 0.2), (199.5, 2.0), (1999.5, 0.5), (99.5, 10.0), (0.25, 40.0), (-0.25, 1.5)]:
    print(f"lnU {a} {x} {mp.nstr(mp.log(mp.pcfu(a, x)), 20)}")

print("# bessel")
show("i0_1", mp.besseli(0, 1))
show("n0_2_half_factor", mp.exp(-1) * (mp.besseli(0, 1) - mp.besseli(1, 1)) / 2)
for x in [0.1, 1.0, 5.0, 15.0, 25.0, 40.0, 100.0, 500.0]:
    print(f"I {x} {mp.nstr(mp.exp(-x) * mp.besseli(0, x), 20)} {mp.nstr(mp.exp(-x) * mp.besseli(1, x), 20)}")

print("# log_gamma")
show("lgamma_1e4", mp.loggamma(10000))
for z in [1e-6, 0.1, 0.5, 0.9, 1.2, 1.7, 2.3, 3.5, 7.3, 9.99, 12.5, 123.4, 1e5, 1e8]:
    print(f"LG {z} {mp.nstr(mp.loggamma(z), 22)}")

print("# laplace")
show("digamma_ratio_03_005", digamma_ratio(0.3, 0.05))
show("nhat_1_01", 1 / (2 * (1 + digamma_ratio(1.0, 0.1))))
for s, eps in [(0.01, 0.01), (1.0, 0.001), (5.0, 0.2)]:
    print(f"DG {s} {eps} {mp.nstr(digamma_ratio(s, eps), 20)}")

print("# far-field density transform")
def f_hat(x, s, eps):
    # continuity and unit derivative jump at the origin, solved directly
    r = lambda z: mp.exp(-eps * z * z / 4) * mp.pcfu((s + 1) / eps - 0.5, mp.sqrt(eps) * z)
    l = lambda z: mp.exp(-eps * z * z / 4) * mp.pcfu(s / eps - 0.5, -mp.sqrt(eps) * z)
    ar, al = (s + 1) / eps - 0.5, s / eps - 0.5
    dr = -mp.sqrt(eps) * mp.pcfu(ar - 1, 0)
    dl = mp.sqrt(eps) * mp.pcfu(al - 1, 0)
    # a r0 = b l0 and a dr - b dl = -1
    a = -l(0) / (dr * l(0) - dl * r(0))
    b = a * r(0) / l(0)
    return a * r(x) if x >= 0 else b * l(x)
show("fhat_m20_1_001", f_hat(-20, 1, 0.01))
show("fhat_20_1_001", f_hat(20, 1, 0.01))
