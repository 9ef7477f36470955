"""Numeric Bessel kernels: I_1, J_1, and the half-integral closed forms.

I_1 uses the ascending power series below x = 20 and the divergent
asymptotic expansion (optimally truncated) above; J_1 is a port of the
Cephes rational approximations (Stephen L. Moshier, Cephes 2.1), with the
two leading zeros factored out on [0, 5] and the Hankel phase form beyond.
Half-integral orders reduce to sinh and a decaying exponential.

Everything here is deterministic and stateless; scalar entry points are
mirrored by private numpy versions used by the Kloosterman tail sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AccuracyContract:
    """Tested accuracy: |computed - true| <= abs_tol + rel_tol * |true| on [lo, hi]."""

    abs_tol: float
    rel_tol: float
    lo: float
    hi: float

    def check(self, computed: float, true: float) -> bool:
        return abs(computed - true) <= self.abs_tol + self.rel_tol * abs(true)


I1_CONTRACT = AccuracyContract(abs_tol=1e-300, rel_tol=1e-12, lo=0.0, hi=700.0)
J1_CONTRACT = AccuracyContract(abs_tol=1e-13, rel_tol=1e-10, lo=0.0, hi=1e4)

_I1_SWITCH = 20.0
_I1_OVERFLOW = 700.0

# asymptotic coefficients a_k(1) = prod_{j<=k} (4 - (2j-1)^2) / (k! 8^k)
_I1_ASYM = [1.0]
for _k in range(1, 26):
    _I1_ASYM.append(_I1_ASYM[-1] * (4.0 - (2.0 * _k - 1.0) ** 2) / (8.0 * _k))


def bessel_i1(x: float) -> float:
    """Modified Bessel function I_1(x) for 0 <= x <= 700."""
    if x < 0:
        raise ValueError("bessel_i1 requires x >= 0")
    if x > _I1_OVERFLOW:
        raise OverflowError(f"I_1({x:g}) overflows double precision")
    if x <= _I1_SWITCH:
        t = 0.25 * x * x
        term = 0.5 * x
        total = term
        for k in range(1, 80):
            term *= t / (k * (k + 1))
            total += term
            if term < 1e-18 * total:
                break
        return total
    # optimally truncated asymptotic series, error ~ e^{-2x} relative
    inv = 1.0 / x
    s = 0.0
    p = 1.0
    prev = math.inf
    for k, a in enumerate(_I1_ASYM):
        t = a * p if k % 2 == 0 else -a * p
        if abs(t) > prev:
            break
        s += t
        prev = abs(t)
        p *= inv
    return math.exp(x) / math.sqrt(2.0 * math.pi * x) * s


def _i1_array(x: np.ndarray) -> np.ndarray:
    """Vector I_1 over nonnegative arguments (same branches as the scalar)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= _I1_SWITCH
    if np.any(small):
        xs = x[small]
        t = 0.25 * xs * xs
        term = 0.5 * xs
        total = term.copy()
        for k in range(1, 80):
            term = term * t / (k * (k + 1))
            total += term
            if np.all(term <= 1e-18 * np.maximum(total, 1e-300)):
                break
        out[small] = total
    if np.any(~small):
        xl = x[~small]
        inv = 1.0 / xl
        s = np.zeros_like(xl)
        p = np.ones_like(xl)
        for k, a in enumerate(_I1_ASYM):
            s += (a if k % 2 == 0 else -a) * p
            p = p * inv
        out[~small] = np.exp(xl) / np.sqrt(2.0 * np.pi * xl) * s
    return out


# Cephes bessj1 coefficient tables.
_RP1 = (-8.99971225705559398224e8, 4.52228297998194034323e11,
        -7.27494245221818276015e13, 3.68295732863852883286e15)
_RQ1 = (6.20836478118054335476e2, 2.56987256757748830383e5,
        8.35146791431949253037e7, 2.21511595479792499675e10,
        4.74914122079991414898e12, 7.84369607876235854894e14,
        8.95222336184627338078e16, 5.32278620332680085395e18)
_PP1 = (7.62125616208173112003e-4, 7.31397056940917570436e-2,
        1.12719608129684925192e0, 5.11207951146807644818e0,
        8.42404590141772420927e0, 5.21451598682361504063e0,
        1.00000000000000000254e0)
_PQ1 = (5.71323128072548699714e-4, 6.88455908754495404082e-2,
        1.10514232634061696926e0, 5.07386386128601488557e0,
        8.39985554327604159757e0, 5.20982848682361821619e0,
        9.99999999999999997461e-1)
_QP1 = (5.10862594750176621635e-2, 4.98213872951233449420e0,
        7.58238284132545283818e1, 3.66779609360150777800e2,
        7.10856304998926107277e2, 5.97489612400613639965e2,
        2.11688757100572135698e2, 2.52070205858023719784e1)
_QQ1 = (7.42373277035675149943e1, 1.05644886038262816351e3,
        4.98641058337653607651e3, 9.56231892404756170795e3,
        7.99704160447350683650e3, 2.82619278517639096600e3,
        3.36093607810698293419e2)
_Z1 = 1.46819706421238932572e1
_Z2 = 4.92184563216946036703e1
_THPIO4 = 2.35619449019234492885
_SQ2OPI = 7.9788456080286535587989e-1


def _polevl(x, coef):
    ans = coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x, coef):
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def bessel_j1(x: float) -> float:
    """Bessel function J_1(x) for x >= 0 (Cephes rational approximations)."""
    if x < 0:
        raise ValueError("bessel_j1 requires x >= 0")
    if x <= 5.0:
        z = x * x
        w = _polevl(z, _RP1) / _p1evl(z, _RQ1)
        return w * x * (z - _Z1) * (z - _Z2)
    w = 5.0 / x
    z = w * w
    p = _polevl(z, _PP1) / _polevl(z, _PQ1)
    q = _polevl(z, _QP1) / _p1evl(z, _QQ1)
    xn = x - _THPIO4
    p = p * math.cos(xn) - w * q * math.sin(xn)
    return _SQ2OPI * p / math.sqrt(x)


def _j1_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= 5.0
    if np.any(small):
        xs = x[small]
        z = xs * xs
        w = _polevl(z, _RP1) / _p1evl(z, _RQ1)
        out[small] = w * xs * (z - _Z1) * (z - _Z2)
    if np.any(~small):
        xl = x[~small]
        w = 5.0 / xl
        z = w * w
        p = _polevl(z, _PP1) / _polevl(z, _PQ1)
        q = _polevl(z, _QP1) / _p1evl(z, _QQ1)
        xn = xl - _THPIO4
        p = p * np.cos(xn) - w * q * np.sin(xn)
        out[~small] = _SQ2OPI * p / np.sqrt(xl)
    return out


def half_bessel(kind: str, y: float) -> float:
    """Half-integral Bessel closed forms.

    kind "I": sqrt(2/(pi y)) sinh(y);  kind "K": sqrt(pi/(2y)) e^{-y}.
    """
    if y <= 0:
        raise ValueError("half_bessel requires y > 0")
    if kind == "I":
        return math.sqrt(2.0 / (math.pi * y)) * math.sinh(y)
    if kind == "K":
        return math.sqrt(math.pi / (2.0 * y)) * math.exp(-y)
    raise ValueError("kind must be 'I' or 'K'")
