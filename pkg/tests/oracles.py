"""Independent reference computations used by the tests.

Nothing here imports the package's algebra: functions of x are stored as
complex-exponential coefficients ``{m: (re, im)}`` on ``exp(i m x)`` with
exact Fractions, and products are plain convolutions.
"""

from fractions import Fraction

HALF = Fraction(1, 2)


def cmul(p, q):
    return (p[0] * q[0] - p[1] * q[1], p[0] * q[1] + p[1] * q[0])


def cadd(p, q):
    return (p[0] + q[0], p[1] + q[1])


def cscale(p, f):
    return (p[0] * f, p[1] * f)


ZERO = (Fraction(0), Fraction(0))


def sin_exp(wavenumber, coef=Fraction(1)):
    # sin(nx) = (e^{inx} - e^{-inx}) / 2i
    coef = Fraction(coef)
    return {wavenumber: (Fraction(0), -coef * HALF), -wavenumber: (Fraction(0), coef * HALF)}


def cos_exp(wavenumber, coef=Fraction(1)):
    coef = Fraction(coef)
    return {wavenumber: (coef * HALF, Fraction(0)), -wavenumber: (coef * HALF, Fraction(0))}


def conv(f, g):
    out = {}
    for m, a in f.items():
        for n, b in g.items():
            out[m + n] = cadd(out.get(m + n, ZERO), cmul(a, b))
    return {m: c for m, c in out.items() if c != ZERO}


def fadd(f, g):
    out = dict(f)
    for m, c in g.items():
        out[m] = cadd(out.get(m, ZERO), c)
    return {m: c for m, c in out.items() if c != ZERO}


def real_coefficients(f):
    """``{(wave, wavenumber): value}`` from exponential coefficients of a real function."""
    out = {}
    for m in sorted({abs(m) for m in f}):
        cp, cm = f.get(m, ZERO), f.get(-m, ZERO)
        if m == 0:
            if cp[0]:
                out[("const", 0)] = cp[0]
            continue
        # a = i (c_m - c_-m), b = c_m + c_-m
        diff = (cp[0] - cm[0], cp[1] - cm[1])
        a = -diff[1]
        b = cp[0] + cm[0]
        if a:
            out[("sin", m)] = a
        if b:
            out[("cos", m)] = b
    return out


# series in (s1, s2) with exponential-coefficient values: {(a, b): {m: c}}


def smul(A, B, max_degree):
    out = {}
    for (a1, b1), f in A.items():
        for (a2, b2), g in B.items():
            if a1 + a2 + b1 + b2 > max_degree:
                continue
            key = (a1 + a2, b1 + b2)
            out[key] = fadd(out.get(key, {}), conv(f, g))
    return {k: v for k, v in out.items() if v}


def sadd(A, B):
    out = dict(A)
    for k, f in B.items():
        out[k] = fadd(out.get(k, {}), f)
    return {k: v for k, v in out.items() if v}


def u1_exp():
    return {(1, 0): sin_exp(2), (0, 1): cos_exp(2)}


def cube(W, max_degree):
    return smul(smul(W, W, max_degree), W, max_degree)


def center_part(series):
    """Reduced-field components (G1, G2) of ``-P W^3`` read off at wavenumber 2."""
    G1, G2 = {}, {}
    for mono, f in series.items():
        coeffs = real_coefficients(f)
        a = coeffs.get(("sin", 2), Fraction(0))
        b = coeffs.get(("cos", 2), Fraction(0))
        if a:
            G1[mono] = -a
        if b:
            G2[mono] = -b
    return G1, G2


def oracle_psi_eigen(lam=Fraction(9)):
    """Degree-3 manifold map: minus (stable part of u1^3) divided by the eigenvalue, per wavenumber."""
    lam = Fraction(lam)
    mu = lam - 9
    u3 = cube(u1_exp(), 3)
    psi = {}
    for mono, f in u3.items():
        g = {}
        for m, c in f.items():
            if abs(m) == 2 or m == 0:
                continue
            k = abs(m) // 2
            divisor = (1 - 4 * k * k) ** 2 - lam + 3 * mu
            g[m] = cscale(c, Fraction(-1) / divisor)
        if g:
            psi[mono] = g
    return psi


def oracle_psi_product(alphas):
    """The mixed-basis ansatz built literally from products of cosines and sines."""
    a1, a2, a3, a4 = (Fraction(a) for a in alphas)
    s2c4 = conv(sin_exp(2), cos_exp(4))
    c2c4 = conv(cos_exp(2), cos_exp(4))
    return {
        (3, 0): {m: cscale(c, a1) for m, c in s2c4.items()},
        (0, 3): {m: cscale(c, a2) for m, c in c2c4.items()},
        (2, 1): {m: cscale(c, a3) for m, c in c2c4.items()},
        (1, 2): {m: cscale(c, a4) for m, c in s2c4.items()},
    }


def oracle_reduced_field(psi, order=5):
    """(G1, G2) of ``P g(u1 + psi)`` through ``order`` by blind convolution."""
    W = sadd(u1_exp(), psi)
    return center_part(cube(W, order))


def cubic_radial_time(r0, t):
    """|s(t)| for ds/dt = -(3/4)|s|^2 s: 1/r^2 = 1/r0^2 + (3/2) t."""
    return (1.0 / r0**2 + 1.5 * t) ** -0.5
