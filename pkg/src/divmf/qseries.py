"""Exact truncated Laurent series in q = e^{2 pi i tau}.

Coefficients live either in the exact domain (Python ints, promoted to
Fraction only when a division forces it) or in a complex-float domain used
for numeric work.  Series are immutable after construction and all
operations are pure, so values can be shared freely across threads.

Constructors cover the classical forms: Eisenstein series E_k, the
discriminant Delta and the j-function, and general eta quotients
prod eta(d tau)^{r_d} expanded through Euler's pentagonal number theorem.
The theta operator, logarithmic derivative, weight-0 Hecke action and
numeric point evaluation round out the toolkit.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

from .arith import bernoulli

EXACT = "exact"
COMPLEX = "complex"

_TWO_PI = 2.0 * math.pi


def _norm_exact(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


class QSeries:
    """Truncated Laurent series: coefficients for exponents val .. n_max."""

    __slots__ = ("val", "coeffs", "n_max", "domain")

    def __init__(self, val: int, coeffs, n_max: int, domain: str = EXACT):
        if domain not in (EXACT, COMPLEX):
            raise ValueError(f"unknown domain {domain!r}")
        coeffs = list(coeffs)
        if n_max - val + 1 != len(coeffs):
            raise ValueError("coefficient list does not span val..n_max")
        if domain == COMPLEX:
            coeffs = [complex(c) for c in coeffs]
        else:
            coeffs = [_norm_exact(c) for c in coeffs]
        self.val = val
        self.coeffs = coeffs
        self.n_max = n_max
        self.domain = domain

    # -- basic accessors ----------------------------------------------------

    def coeff(self, n: int):
        """Coefficient of q^n; exact zero below val, error beyond n_max."""
        if n > self.n_max:
            raise ValueError(f"coefficient {n} beyond truncation order {self.n_max}")
        if n < self.val:
            return 0j if self.domain == COMPLEX else 0
        return self.coeffs[n - self.val]

    def valuation(self):
        """Exponent of the first nonzero coefficient, or None for zero."""
        for i, c in enumerate(self.coeffs):
            if c:
                return self.val + i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def truncate(self, n_max: int) -> "QSeries":
        if n_max >= self.n_max:
            return self
        if n_max < self.val:
            return QSeries(n_max + 1, [], n_max, self.domain)
        return QSeries(self.val, self.coeffs[: n_max - self.val + 1], n_max, self.domain)

    def to_complex(self) -> "QSeries":
        if self.domain == COMPLEX:
            return self
        return QSeries(self.val, [complex(c) for c in self.coeffs], self.n_max, COMPLEX)

    def __repr__(self):
        head = []
        for i, c in enumerate(self.coeffs[:6]):
            if c:
                head.append(f"{c}*q^{self.val + i}")
        body = " + ".join(head) if head else "0"
        return f"QSeries({body} + O(q^{self.n_max + 1}), domain={self.domain})"

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        if self.domain != other.domain or self.n_max != other.n_max:
            return False
        lo = min(self.val, other.val)
        return all(self.coeff(n) == other.coeff(n) for n in range(lo, self.n_max + 1))

    def __hash__(self):
        return hash((self.val, self.n_max, self.domain, tuple(self.coeffs)))

    # -- ring operations ----------------------------------------------------

    def _zero_like(self, val, n_max):
        return QSeries(val, [0] * (n_max - val + 1), n_max, self.domain)

    def __neg__(self):
        return QSeries(self.val, [-c for c in self.coeffs], self.n_max, self.domain)

    def __add__(self, other):
        if isinstance(other, (int, Fraction, float, complex)):
            other = constant(other, self.n_max, self.domain)
        domain = COMPLEX if COMPLEX in (self.domain, other.domain) else EXACT
        f = self.to_complex() if domain == COMPLEX else self
        g = other.to_complex() if domain == COMPLEX else other
        n_max = min(f.n_max, g.n_max)
        val = min(f.val, g.val)
        out = [f.coeff(n) + g.coeff(n) for n in range(val, n_max + 1)]
        return QSeries(val, out, n_max, domain)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, float, complex)):
            return QSeries(self.val, [c * other for c in self.coeffs], self.n_max, self.domain)
        domain = COMPLEX if COMPLEX in (self.domain, other.domain) else EXACT
        f = self.to_complex() if domain == COMPLEX else self
        g = other.to_complex() if domain == COMPLEX else other
        val = f.val + g.val
        n_max = min(f.n_max + g.val, g.n_max + f.val)
        size = n_max - val + 1
        if size <= 0:
            return QSeries(n_max + 1, [], n_max, domain)
        out = [0] * size
        fc, gc = f.coeffs, g.coeffs
        for i, a in enumerate(fc):
            if not a or i >= size:
                continue
            top = min(len(gc), size - i)
            for j in range(top):
                b = gc[j]
                if b:
                    out[i + j] += a * b
        return QSeries(val, out, n_max, domain)

    __rmul__ = __mul__

    def inverse(self) -> "QSeries":
        return divide(constant(1, self.n_max - (self.valuation() or 0), self.domain), self)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, float, complex)):
            if self.domain == EXACT:
                inv = Fraction(1, 1) / Fraction(other)
                return QSeries(self.val, [c * inv for c in self.coeffs], self.n_max, EXACT)
            return QSeries(self.val, [c / other for c in self.coeffs], self.n_max, COMPLEX)
        return divide(self, other)

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("series powers must be integers")
        if e < 0:
            return (self ** (-e)).inverse()
        rel = self.n_max - self.val
        result = constant(1, rel, self.domain)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def dilate(self, d: int) -> "QSeries":
        """Substitute q -> q^d (exponent dilation with zero fill)."""
        if d < 1:
            raise ValueError("dilation factor must be >= 1")
        if d == 1:
            return self
        val = self.val * d
        n_max = self.n_max * d + (d - 1)
        out = [0] * (n_max - val + 1)
        for i, c in enumerate(self.coeffs):
            out[i * d] = c
        return QSeries(val, out, n_max, self.domain)

    def shift(self, k: int) -> "QSeries":
        """Multiply by q^k."""
        return QSeries(self.val + k, self.coeffs, self.n_max + k, self.domain)


def constant(value, n_max: int, domain: str = EXACT) -> QSeries:
    out = [0] * (n_max + 1)
    if n_max >= 0:
        out[0] = value
        return QSeries(0, out, n_max, domain)
    return QSeries(0, [value], 0, domain).truncate(n_max)


def divide(f: QSeries, g: QSeries) -> QSeries:
    """Laurent division f/g; g must have an invertible leading coefficient."""
    vg = g.valuation()
    if vg is None:
        raise ZeroDivisionError("division by the zero series")
    domain = COMPLEX if COMPLEX in (f.domain, g.domain) else EXACT
    f = f.to_complex() if domain == COMPLEX else f
    g = g.to_complex() if domain == COMPLEX else g
    lead = g.coeff(vg)
    if domain == EXACT:
        unit = lead in (1, -1)
        if not unit:
            lead = Fraction(lead)
    elif lead == 0:
        raise ZeroDivisionError("zero leading coefficient")
    vf = f.val
    rel = min(f.n_max - vf, g.n_max - vg)
    if rel < 0:
        raise ValueError("operands truncated too short to divide")
    den = [g.coeff(vg + j) for j in range(rel + 1)]
    num = [f.coeff(vf + j) for j in range(rel + 1)]
    out = [0] * (rel + 1)
    for k in range(rel + 1):
        acc = num[k]
        for j in range(1, k + 1):
            d = den[j]
            if d:
                acc -= d * out[k - j]
        if domain == COMPLEX:
            out[k] = acc / lead
        elif lead == 1:
            out[k] = acc
        elif lead == -1:
            out[k] = -acc
        else:
            out[k] = Fraction(acc) / lead
    return QSeries(vf - vg, out, vf - vg + rel, domain)


# ---------------------------------------------------------------------------
# classical constructors
# ---------------------------------------------------------------------------

def eisenstein(k: int, n_max: int) -> QSeries:
    """E_k = 1 - (2k/B_k) sum_{n>=1} sigma_{k-1}(n) q^n, exact."""
    if k < 2 or k % 2:
        raise ValueError("Eisenstein weight must be a positive even integer")
    factor = Fraction(-2 * k) / bernoulli(k)
    s = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        pw = d ** (k - 1)
        for m in range(d, n_max + 1, d):
            s[m] += pw
    coeffs = [factor * t for t in s]
    coeffs[0] = 1
    return QSeries(0, coeffs, n_max, EXACT)


def _pentagonal(limit: int, d: int):
    """Sparse exponents of prod_{n>=1}(1 - q^{dn}) up to exponent limit."""
    out = [(0, 1)]
    k = 1
    while True:
        hit = False
        for kk in (k, -k):
            e = d * kk * (3 * kk - 1) // 2
            if e <= limit:
                out.append((e, 1 if k % 2 == 0 else -1))
                hit = True
        if not hit:
            break
        k += 1
    out.sort()
    return out


def _mul_sparse(coeffs: list, sparse) -> list:
    out = [0] * len(coeffs)
    n = len(coeffs)
    for e, s in sparse:
        if s == 1:
            for i in range(n - e):
                out[i + e] += coeffs[i]
        else:
            for i in range(n - e):
                out[i + e] -= coeffs[i]
    return out


def _div_sparse(coeffs: list, sparse) -> list:
    # divisor has leading term (0, 1)
    tail = [t for t in sparse if t[0] > 0]
    out = list(coeffs)
    n = len(out)
    for k in range(n):
        acc = out[k]
        for e, s in tail:
            if e > k:
                break
            acc -= s * out[k - e]
        out[k] = acc
    return out


def eta_quotient(pairs, n_max: int, N: int | None = None) -> QSeries:
    """Exact expansion of prod_d eta(d tau)^{r_d} for pairs = [(d, r), ...].

    The q-valuation sum(d*r)/24 must be an integer; if a level N is given,
    every scale d must divide it.
    """
    pairs = [(int(d), int(r)) for d, r in pairs if r != 0]
    for d, _ in pairs:
        if d < 1:
            raise ValueError("eta scale must be >= 1")
        if N is not None and N % d != 0:
            raise ValueError(f"eta scale {d} does not divide the level {N}")
    val24 = sum(d * r for d, r in pairs)
    if val24 % 24:
        raise ValueError("eta quotient has non-integral q-valuation")
    v = val24 // 24
    rel = n_max - v
    if rel < 0:
        return QSeries(n_max + 1, [], n_max, EXACT)
    unit = [0] * (rel + 1)
    unit[0] = 1
    for d, r in pairs:
        sparse = _pentagonal(rel, d)
        for _ in range(abs(r)):
            unit = _mul_sparse(unit, sparse) if r > 0 else _div_sparse(unit, sparse)
    return QSeries(v, unit, n_max, EXACT)


def delta_and_j(n_max: int) -> tuple[QSeries, QSeries]:
    """(Delta, j) with Delta = eta(tau)^24 and j = E_4^3 / Delta."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    delta = eta_quotient([(1, 24)], n_max + 2)
    e4 = eisenstein(4, n_max + 2)
    j = divide(e4 * e4 * e4, delta).truncate(n_max)
    return delta.truncate(n_max), j


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def theta(f: QSeries) -> QSeries:
    """Theta = q d/dq = (1/2 pi i) d/dtau on q-expansions: a(n) -> n a(n)."""
    return QSeries(f.val, [(f.val + i) * c for i, c in enumerate(f.coeffs)],
                   f.n_max, f.domain)


def log_derivative(f: QSeries) -> QSeries:
    """-Theta(f)/f; exact (integral) whenever the leading coefficient is +-1."""
    return divide(-theta(f), f)


def hecke_T(f: QSeries, n: int, N: int = 1) -> QSeries:
    """Weight-0 Hecke action a'(m) = sum_{d | gcd(m,n)} (n/d) a(mn/d^2).

    Normalized so q^{-1} maps to q^{-n} + O(q); requires gcd(n, N) = 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if math.gcd(n, N) != 1:
        raise ValueError(f"T({n}) needs gcd(n, N) = 1 at level {N}")
    if n == 1:
        return f
    vf = f.valuation()
    if vf is None:
        return f.truncate(f.n_max // n)
    m_lo = n * vf if vf < 0 else 0
    m_hi = f.n_max // n
    out = []
    for m in range(m_lo, m_hi + 1):
        acc = 0
        g = math.gcd(abs(m), n) if m else n
        for d in range(1, g + 1):
            if g % d:
                continue
            idx = m * n // (d * d)
            if f.val <= idx <= f.n_max:
                acc += (n // d) * f.coeff(idx)
        out.append(acc)
    return QSeries(m_lo, out, m_hi, f.domain)


def _log_abs(coeff) -> float:
    if isinstance(coeff, Fraction):
        return math.log(abs(coeff.numerator)) - math.log(coeff.denominator)
    if isinstance(coeff, complex):
        return math.log(abs(coeff))
    return math.log(abs(coeff))


def _phase(coeff) -> complex:
    if isinstance(coeff, complex):
        return coeff / abs(coeff)
    return -1.0 if coeff < 0 else 1.0


def evaluate_at(f: QSeries, z, tol: float | None = None) -> tuple[complex, float]:
    """Partial sum sum a(n) e^{2 pi i n z} with a certified geometric tail bound.

    The tail constant is estimated from the trailing tenth of the stored
    coefficients: with b = max log|a(n)|/(2 pi n) over that window, the
    remainder beyond n_max is bounded by a geometric series in
    e^{-2 pi (Im z - b)}.  Raises if Im z is too small for the bound to
    close, or (when tol is given) if the bound exceeds tol.
    """
    z = complex(z)
    y = z.imag
    if y <= 0:
        raise ValueError("evaluation point must lie in the upper half-plane")
    b_hat = -math.inf
    c_hat = 0.0
    nz = [(f.val + i, c) for i, c in enumerate(f.coeffs) if c]
    window = [t for t in nz[-max(3, len(nz) // 10):] if t[0] > 0]
    for n, c in window:
        b_hat = max(b_hat, _log_abs(c) / (_TWO_PI * n))
    for n, c in window:
        c_hat = max(c_hat, math.exp(_log_abs(c) - _TWO_PI * n * b_hat))
    if window:
        if y <= b_hat + 1e-12:
            raise ValueError(
                f"Im z = {y:g} is not above the coefficient growth rate {b_hat:g}")
        r = math.exp(-_TWO_PI * (y - b_hat))
        tail = c_hat * r ** (f.n_max + 1) / (1.0 - r)
    else:
        tail = 0.0
    if tol is not None and tail > tol:
        raise ValueError(f"tail bound {tail:g} exceeds tolerance {tol:g}")
    total = 0.0 + 0.0j
    for n, c in nz:
        logmag = _log_abs(c) - _TWO_PI * n * y
        if logmag > 700.0:
            raise OverflowError("term too large to evaluate in double precision")
        total += _phase(c) * math.exp(logmag) * cmath.exp(2j * math.pi * n * z.real)
    return total, tail


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def dumps(f: QSeries) -> str:
    """Line-based text format: header 'val n_max domain', one coefficient/line."""
    lines = [f"{f.val} {f.n_max} {f.domain}"]
    for c in f.coeffs:
        if f.domain == COMPLEX:
            lines.append(f"{c.real!r} {c.imag!r}")
        elif isinstance(c, Fraction):
            lines.append(f"{c.numerator}/{c.denominator}")
        else:
            lines.append(str(c))
    return "\n".join(lines) + "\n"


def loads(text: str) -> QSeries:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    val_s, n_max_s, domain = lines[0].split()
    val, n_max = int(val_s), int(n_max_s)
    coeffs = []
    for ln in lines[1:]:
        if domain == COMPLEX:
            re_s, im_s = ln.split()
            coeffs.append(complex(float(re_s), float(im_s)))
        elif "/" in ln:
            p, q = ln.split("/")
            coeffs.append(Fraction(int(p), int(q)))
        else:
            coeffs.append(int(ln))
    return QSeries(val, coeffs, n_max, domain)
