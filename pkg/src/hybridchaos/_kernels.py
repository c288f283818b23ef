"""Compiled scalar kernels for the map family.

Every public step function in :mod:`hybridchaos.maps` is a thin wrapper over
the functions here, so interactive calls and long orbit loops share one
implementation bit for bit.

Configuration travels as plain arrays so numba can specialise once:

``weights``  float64[2, 2, 3]  indexed [axis, branch, (omega, alpha, beta)]
``selectors`` int64[2, 2, 4]   indexed [axis, branch, (f, g, h, F)]
"""

import math
from fractions import Fraction

import numpy as np
from numba import njit

AXIS_X = 0
AXIS_Y = 1

W_OMEGA, W_ALPHA, W_BETA = 0, 1, 2
S_F, S_G, S_H, S_BASE = 0, 1, 2, 3

# unary combination maps (f, h) and the outer composition phi1
U_IDENTITY, U_SIN_PI, U_COS_PI, U_ZERO = 0, 1, 2, 3
# transfer maps g(r, a, b)
G_PRODUCT, G_SUM = 0, 1
# base maps F(r, x)
B_LOGISTIC, B_SINE = 0, 1
# inner composition phi2(a, b)
P_SUM, P_PRODUCT, P_MEAN = 0, 1, 2

ZETA_XN, ZETA_XNEXT = 0, 1

EPS_SING = 1e-12
# branch 1 evaluates cot(x*x): guard on x*x < EPS_SING, i.e. x < sqrt(EPS_SING)
SING_X = 1e-6
# golden-ratio multiple of SING_X; a round value such as 1e-6 makes
# r*cot(x*x) an exact integer for decimal r and traps the orbit at 0
NUDGE_X = 1e-6 * 1.618033988749895
HCM1_SPLIT = 1.0 / 3.0
HCM1_AMPLITUDE = 1e5


@njit(cache=True, nogil=True)
def frac_abs(v):
    if not math.isfinite(v):
        return 0.0
    a = abs(v)
    return a - math.floor(a)


@njit(cache=True, nogil=True)
def mod1(v):
    if not math.isfinite(v):
        return 0.0
    m = v - math.floor(v)
    # tiny negative v rounds up to exactly 1.0
    if m >= 1.0:
        return 0.0
    return m


# -- double-double helpers ----------------------------------------------------
# HCM1 and the outer composition take the fractional part of values near 1e5
# (or far larger for small x). Plain float64 would leave ~36 fractional bits,
# so those paths carry a (hi, lo) pair until the wrap.

_SPLITTER = 134217729.0  # 2**27 + 1
PI_HI = 3.141592653589793
PI_LO = 1.2246467991473532e-16


def _dd_const(q):
    hi = float(q)
    return hi, float(q - Fraction(hi))


def _inv_factorials(parity, count):
    hi = np.empty(count)
    lo = np.empty(count)
    for k in range(count):
        hi[k], lo[k] = _dd_const(Fraction(1, math.factorial(2 * k + parity)))
    return hi, lo


# Taylor coefficients for |y| <= pi/4, truncation below 1e-30
SIN_C_HI, SIN_C_LO = _inv_factorials(1, 14)
COS_C_HI, COS_C_LO = _inv_factorials(0, 15)
# cot(w) - 1/w = -sum c_k w^(2k+1), w < 1/9
COT_TAIL = np.array([1 / 3, 1 / 45, 2 / 945, 1 / 4725, 2 / 93555,
                     1382 / 638512875, 4 / 18243225, 3617 / 162820783125])


@njit(cache=True, nogil=True)
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True)
def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, nogil=True)
def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, nogil=True)
def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, nogil=True)
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


@njit(cache=True, nogil=True)
def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e += ah * bl + al * bh
    return quick_two_sum(p, e)


@njit(cache=True, nogil=True)
def dd_recip(h, l):
    q = 1.0 / h
    p, pe = two_prod(q, h)
    e = ((1.0 - p) - pe) - q * l
    return quick_two_sum(q, q * e)


@njit(cache=True, nogil=True)
def dd_sqrt(x):
    s = math.sqrt(x)
    if s == 0.0:
        return 0.0, 0.0
    p, pe = two_prod(s, s)
    return quick_two_sum(s, ((x - p) - pe) / (2.0 * s))


@njit(cache=True, nogil=True)
def dd_frac_abs(h, l):
    if not (math.isfinite(h) and math.isfinite(l)):
        return 0.0
    if h < 0.0 or (h == 0.0 and l < 0.0):
        h, l = -h, -l
    f = h - math.floor(h)
    v = f + l
    if v < 0.0:
        v = (f + 1.0) + l
    if v >= 1.0:
        v -= 1.0
    if v < 0.0 or v >= 1.0:
        return 0.0
    return v


@njit(cache=True, nogil=True)
def _dd_series(yh, yl, c_hi, c_lo):
    # sum_k (-1)^k c_k y^(2k), Horner in -y^2
    zh, zl = dd_mul(yh, yl, yh, yl)
    zh, zl = -zh, -zl
    n = c_hi.shape[0]
    ah, al = c_hi[n - 1], c_lo[n - 1]
    for k in range(n - 2, -1, -1):
        ah, al = dd_mul(ah, al, zh, zl)
        ah, al = dd_add(ah, al, c_hi[k], c_lo[k])
    return ah, al


@njit(cache=True, nogil=True)
def dd_sin_pi(th, tl):
    """sin(pi*t) for a double-double t."""
    if not (math.isfinite(th) and math.isfinite(tl)):
        return 0.0, 0.0
    k = math.floor(th)
    uh, ul = quick_two_sum(th - k, tl)
    if uh < 0.0:
        uh, ul = dd_add(uh, ul, 1.0, 0.0)
        k -= 1.0
    elif uh >= 1.0:
        uh, ul = dd_add(uh, ul, -1.0, 0.0)
        k += 1.0
    sign = -1.0 if k % 2.0 != 0.0 else 1.0
    # u in [0, 1): fold onto [0, 1/2] then [0, 1/4]
    if uh > 0.5:
        uh, ul = dd_add(1.0, 0.0, -uh, -ul)
    if uh > 0.25:
        vh, vl = dd_add(0.5, 0.0, -uh, -ul)
        yh, yl = dd_mul(vh, vl, PI_HI, PI_LO)
        sh, sl = _dd_series(yh, yl, COS_C_HI, COS_C_LO)
    else:
        yh, yl = dd_mul(uh, ul, PI_HI, PI_LO)
        sh, sl = _dd_series(yh, yl, SIN_C_HI, SIN_C_LO)
        sh, sl = dd_mul(sh, sl, yh, yl)
    return sign * sh, sign * sl


@njit(cache=True, nogil=True)
def cot_tail(w):
    """cot(w) - 1/w by its Laurent series; accurate to ~1e-18 for w < 1/9."""
    z = w * w
    acc = 0.0
    for k in range(COT_TAIL.shape[0] - 1, -1, -1):
        acc = acc * z + COT_TAIL[k]
    return -w * acc


@njit(cache=True, nogil=True)
def sine(r, x):
    # reflect so pi*x is not rounded next to pi
    if x > 0.5:
        x = 1.0 - x
    return r * math.sin(math.pi * x) / 4.0


@njit(cache=True, nogil=True)
def logistic(r, x):
    return r * x * (1.0 - x)


@njit(cache=True, nogil=True)
def lt1(r, x):
    # factored form: both terms share a sign for |r| <= 4
    return x * ((4.0 + r) / 2.0 - r * x)


@njit(cache=True, nogil=True)
def lt2(r, x):
    u = 1.0 - x
    return u * ((4.0 + r) / 2.0 - r * u)


@njit(cache=True, nogil=True)
def lt(r, x):
    if x < 0.5:
        return lt1(r, x)
    return lt2(r, x)


@njit(cache=True, nogil=True)
def cot(v):
    return 1.0 / math.tan(v)


@njit(cache=True, nogil=True)
def hcm1_dd(r, x):
    """HCM1 before the wrap, as a double-double.

    Only the large terms (1/x^2 inside cot(x^2), and 1e5*sqrt(x)) are
    carried in double-double; the O(1) terms are plain doubles.
    """
    if x < HCM1_SPLIT:
        a = lt1(r, x)
        wh, wl = two_prod(x, x)
        small = math.sin(a) + cot_tail(wh) + sine(r, a)
        bh, bl = dd_recip(wh, wl)
        vh, vl = dd_add(bh, bl, small, 0.0)
        return dd_mul(vh, vl, r, 0.0)
    a = lt2(r, x)
    small = math.sin(a) + cot(x)
    sh, sl = dd_sqrt(x)
    bh, bl = dd_mul(sh, sl, HCM1_AMPLITUDE, 0.0)
    vh, vl = dd_add(bh, bl, small, 0.0)
    rh, rl = two_sum(r, 1.0)
    return dd_mul(vh, vl, rh, rl)


@njit(cache=True, nogil=True)
def hcm1_raw(r, x):
    h, l = hcm1_dd(r, x)
    return h + l


@njit(cache=True, nogil=True)
def is_singular(x):
    return x < SING_X


@njit(cache=True, nogil=True)
def nudge(x):
    if x < SING_X:
        return NUDGE_X
    return x


@njit(cache=True, nogil=True)
def hcm1(r, x):
    h, l = hcm1_dd(r, nudge(x))
    return dd_frac_abs(h, l)


@njit(cache=True, nogil=True)
def unary(code, t):
    if code == U_SIN_PI:
        return math.sin(math.pi * t)
    if code == U_COS_PI:
        return math.cos(math.pi * t)
    if code == U_ZERO:
        return 0.0
    return t


@njit(cache=True, nogil=True)
def transfer(code, r, a, b):
    if code == G_SUM:
        return r * (a + b)
    return r * a * b


@njit(cache=True, nogil=True)
def base_map(code, r, x):
    if code == B_SINE:
        return sine(r, x)
    return logistic(r, x)


@njit(cache=True, nogil=True)
def combine(code, a, b):
    if code == P_PRODUCT:
        return a * b
    if code == P_MEAN:
        return 0.5 * (a + b)
    return a + b


@njit(cache=True, nogil=True)
def hcm2x(r, x, y, weights, selectors, literal):
    if y < 0.5:
        br = 0
        arg = (weights[AXIS_X, 0, W_BETA] - r) * x / 2.0
    else:
        br = 1
        arg = (weights[AXIS_X, 1, W_BETA] - r) * (1.0 - x) / 2.0
    # literal: the printed second branch reads omega^y_2 f^y_2 o F^x_2
    head = AXIS_Y if (literal and br == 1) else AXIS_X
    v = (weights[head, br, W_OMEGA]
         * unary(selectors[head, br, S_F],
                 base_map(selectors[AXIS_X, br, S_BASE], r, x))
         + weights[AXIS_X, br, W_ALPHA]
         * transfer(selectors[AXIS_X, br, S_G], r, x, y)
         + unary(selectors[AXIS_X, br, S_H], arg))
    return mod1(v)


@njit(cache=True, nogil=True)
def hcm2y(r, y, zeta, weights, selectors, literal):
    if zeta < 0.5:
        br = 0
        arg = (weights[AXIS_Y, 0, W_BETA] - r) * zeta / 2.0
    else:
        br = 1
        arg = (weights[AXIS_Y, 1, W_BETA] - r) * (1.0 - zeta) / 2.0
    # literal: the printed second branch reuses alpha^y_1
    alpha_br = 0 if literal else br
    v = (weights[AXIS_Y, br, W_OMEGA]
         * unary(selectors[AXIS_Y, br, S_F],
                 base_map(selectors[AXIS_Y, br, S_BASE], r, y))
         + weights[AXIS_Y, alpha_br, W_ALPHA]
         * transfer(selectors[AXIS_Y, br, S_G], r, zeta, y)
         + unary(selectors[AXIS_Y, br, S_H], arg))
    return mod1(v)


@njit(cache=True, nogil=True)
def compose(gamma, phi1, phi2, t1, t2):
    if phi2 == P_PRODUCT:
        ch, cl = two_prod(t1, t2)
    else:
        ch, cl = two_sum(t1, t2)
        if phi2 == P_MEAN:
            ch, cl = 0.5 * ch, 0.5 * cl
    if phi1 == U_SIN_PI:
        ch, cl = dd_sin_pi(ch, cl)
    elif phi1 != U_IDENTITY:
        ch, cl = unary(phi1, ch + cl), 0.0
    vh, vl = dd_mul(ch, cl, gamma, 0.0)
    return dd_frac_abs(vh, vl)


@njit(cache=True, nogil=True)
def proposed(r1, r2, gamma, phi1, phi2, weights, selectors, zeta_mode,
             literal, x):
    rho0 = hcm1(r1, x)
    rho1 = hcm1(r1, rho0)
    t1 = hcm2x(r2, rho0, rho1, weights, selectors, literal)
    zeta = t1 if zeta_mode == ZETA_XNEXT else rho0
    t2 = hcm2y(r2, rho1, zeta, weights, selectors, literal)
    return compose(gamma, phi1, phi2, t1, t2)


@njit(cache=True, nogil=True)
def orbit(r1, r2, gamma, phi1, phi2, weights, selectors, zeta_mode, literal,
          x0, n, burn_in):
    out = np.empty(n, dtype=np.float64)
    x = x0
    for _ in range(burn_in):
        x = proposed(r1, r2, gamma, phi1, phi2, weights, selectors,
                     zeta_mode, literal, x)
    for i in range(n):
        x = proposed(r1, r2, gamma, phi1, phi2, weights, selectors,
                     zeta_mode, literal, x)
        out[i] = x
    return out


@njit(cache=True, nogil=True)
def step_batch(r1, r2, gamma, phi1, phi2, weights, selectors, zeta_mode,
               literal, x):
    """One step for each (r1[i], r2[i], x[i])."""
    out = np.empty(x.shape[0], dtype=np.float64)
    for i in range(x.shape[0]):
        out[i] = proposed(r1[i], r2[i], gamma, phi1, phi2, weights,
                          selectors, zeta_mode, literal, x[i])
    return out


@njit(cache=True, nogil=True)
def _circ(d):
    # signed difference on the unit circle; the wrap makes 0 and 1 neighbours
    return d - math.floor(d + 0.5)


@njit(cache=True, nogil=True)
def _rescale(d0, a, b, c, e):
    m = max(abs(a), abs(b), abs(c), abs(e))
    if m == 0.0:
        return 0.0, a, b, c, e
    s = d0 / m
    return m / d0, a * s, b * s, c * s, e * s


@njit(cache=True, nogil=True)
def staged_lyapunov(r1, r2, gamma, phi1, phi2, weights, selectors, zeta_mode,
                    literal, x0, n_iters, burn_in, d0):
    """Two-trajectory estimate renormalised after every pipeline stage.

    The composed step stretches separations by ~1e15, which saturates any
    double-precision companion offset in one step. Resetting the companion
    to size ``d0`` after each stage keeps every difference in the linear
    regime; the log of each rescale factor is accumulated.

    Returns (lambda_sum, n_counted, n_renorm, max_zero_run).
    """
    x = x0
    for _ in range(burn_in):
        x = proposed(r1, r2, gamma, phi1, phi2, weights, selectors,
                     zeta_mode, literal, x)
    total = 0.0
    counted = 0
    renorm = 0
    zero_run = 0
    worst_run = 0
    for _ in range(n_iters):
        xs = nudge(x)
        dx = d0 if xs + d0 < 1.0 else -d0
        step_log = 0.0
        dead = False

        rho0 = hcm1(r1, xs)
        d_rho0 = _circ(hcm1(r1, xs + dx) - rho0)
        g, d_rho0, _a, _b, _c = _rescale(d0, d_rho0, 0.0, 0.0, 0.0)
        renorm += 1
        if g == 0.0:
            dead = True
        else:
            step_log += math.log(g)

        if not dead:
            rho1 = hcm1(r1, rho0)
            d_rho1 = _circ(hcm1(r1, rho0 + d_rho0) - rho1)
            g, d_rho0, d_rho1, _b, _c = _rescale(d0, d_rho0, d_rho1, 0.0, 0.0)
            renorm += 1
            if g == 0.0:
                dead = True
            else:
                step_log += math.log(g)

        if not dead:
            t1 = hcm2x(r2, rho0, rho1, weights, selectors, literal)
            d_t1 = _circ(hcm2x(r2, rho0 + d_rho0, rho1 + d_rho1, weights,
                               selectors, literal) - t1)
            if zeta_mode == ZETA_XNEXT:
                zeta = t1
                d_zeta = d_t1
            else:
                zeta = rho0
                d_zeta = d_rho0
            t2 = hcm2y(r2, rho1, zeta, weights, selectors, literal)
            d_t2 = _circ(hcm2y(r2, rho1 + d_rho1, zeta + d_zeta, weights,
                               selectors, literal) - t2)
            g, d_t1, d_t2, d_rho0, d_rho1 = _rescale(d0, d_t1, d_t2, d_rho0,
                                                      d_rho1)
            renorm += 1
            if g == 0.0:
                dead = True
            else:
                step_log += math.log(g)

        if not dead:
            xn = compose(gamma, phi1, phi2, t1, t2)
            d_xn = _circ(compose(gamma, phi1, phi2, t1 + d_t1, t2 + d_t2) - xn)
            g, d_xn, _a, _b, _c = _rescale(d0, d_xn, 0.0, 0.0, 0.0)
            renorm += 1
            if g == 0.0:
                dead = True
            else:
                step_log += math.log(g)

        if dead:
            zero_run += 1
            if zero_run > worst_run:
                worst_run = zero_run
        else:
            zero_run = 0
            total += step_log
            counted += 1
        x = proposed(r1, r2, gamma, phi1, phi2, weights, selectors,
                     zeta_mode, literal, x)
    return total, counted, renorm, worst_run
