"""Integer and group-theoretic kernels for Gamma_0(N).

Divisor sums, Bernoulli numbers, the index [SL2(Z):Gamma_0(N)], cusp
enumeration with widths and scaling matrices, elliptic fixed-point weights,
classical and cusp-pair Kloosterman sums, and reduction of points in the
upper half-plane to maximal imaginary part within their Gamma_0(N)-orbit.

All functions are pure.  The memoization caches (Bernoulli numbers, the
smallest-prime-factor sieve, cusp sets) are plain dicts/lru_caches guarded
by the GIL: concurrent readers plus a single winning writer are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

INFINITY_CUSP = (1, 0)

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# elementary multiplicative functions
# ---------------------------------------------------------------------------

def sigma(ell: int, n: int) -> int:
    """Divisor power sum sigma_ell(n) = sum_{d | n} d^ell."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            total += d ** ell
            e = n // d
            if e != d:
                total += e ** ell
    return total


_SPF = np.zeros(2, dtype=np.int32)  # smallest prime factor, grown on demand


def _spf(limit: int) -> np.ndarray:
    global _SPF
    if len(_SPF) <= limit:
        size = max(limit + 1, 2 * len(_SPF), 1 << 16)
        spf = np.zeros(size, dtype=np.int32)
        for p in range(2, math.isqrt(size - 1) + 1):
            if spf[p] == 0:
                block = spf[p::p]
                block[block == 0] = p
        untouched = spf == 0
        spf[untouched] = np.arange(size, dtype=np.int32)[untouched]
        spf[1] = 1
        _SPF = spf
    return _SPF


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization [(p, k), ...] by sieve lookup or trial division."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    if n < len(_SPF) or n < (1 << 21):
        spf = _spf(n)
        while n > 1:
            p = int(spf[n])
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        return out
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, k in factorize(n):
        divs = [d * p ** j for d in divs for j in range(k + 1)]
    return sorted(divs)


def mobius(n: int) -> int:
    res = 1
    for _, k in factorize(n):
        if k > 1:
            return 0
        res = -res
    return res


def euler_phi(n: int) -> int:
    res = n
    for p, _ in factorize(n):
        res = res // p * (p - 1)
    return res


@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """k-th Bernoulli number (B_1 = -1/2 convention) by the defining recurrence."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return Fraction(1)
    if k > 1 and k % 2 == 1:
        return Fraction(0)
    acc = Fraction(0)
    binom = 1
    for j in range(k):
        acc += binom * bernoulli(j)
        binom = binom * (k + 1 - j) // (j + 1)
    return -acc / (k + 1)


def index(N: int) -> int:
    """Index [SL2(Z) : Gamma_0(N)] = N * prod_{p | N} (1 + 1/p)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    res = 1
    for p, k in factorize(N):
        res *= p ** (k - 1) * (p + 1)
    return res


def nu2(N: int) -> int:
    """Number of order-2 elliptic classes of Gamma_0(N)."""
    if N % 4 == 0:
        return 0
    res = 1
    for p, _ in factorize(N):
        if p == 2:
            continue
        res *= 1 + (1 if p % 4 == 1 else -1)
    return res


def nu3(N: int) -> int:
    """Number of order-3 elliptic classes of Gamma_0(N)."""
    if N % 9 == 0:
        return 0
    res = 1
    for p, _ in factorize(N):
        if p == 3:
            continue
        res *= 1 + (1 if p % 3 == 1 else -1)
    return res


def num_cusps(N: int) -> int:
    return sum(euler_phi(math.gcd(d, N // d)) for d in divisors(N))


def genus(N: int) -> int:
    """Genus of X_0(N); equals dim S_2(Gamma_0(N))."""
    g = Fraction(index(N), 12) - Fraction(nu2(N), 4) - Fraction(nu3(N), 3) \
        - Fraction(num_cusps(N), 2) + 1
    assert g.denominator == 1
    return int(g)


# ---------------------------------------------------------------------------
# matrices and points
# ---------------------------------------------------------------------------

def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def complete_to_sl2(c: int, d: int) -> tuple[int, int]:
    """Some (a, b) with a*d - b*c = 1; requires gcd(c, d) = 1."""
    g, a, y = xgcd(d, c)
    if g != 1:
        raise ValueError("gcd(c, d) must be 1")
    return a, -y


def mat_mul(m1, m2):
    (a, b), (c, d) = m1
    (e, f), (g, h) = m2
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mat_apply(m, z: complex) -> complex:
    (a, b), (c, d) = m
    return (a * z + b) / (c * z + d)


IDENTITY = ((1, 0), (0, 1))


@dataclass(frozen=True)
class UHPoint:
    """Point x + iy in the upper half-plane with reduction bookkeeping.

    ``certificate`` is the Gamma_0(N) matrix that carried the original
    point to this one (identity when the point was produced directly).
    """

    x: float
    y: float
    reduced: bool = False
    certificate: tuple = IDENTITY

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("UHPoint requires y > 0")

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


def as_uhpoint(z) -> UHPoint:
    if isinstance(z, UHPoint):
        return z
    z = complex(z)
    return UHPoint(z.real, z.imag)


def reduce_to_fundamental_domain(N: int, z) -> tuple[UHPoint, tuple]:
    """Maximize Im over the Gamma_0(N)-orbit of z.

    Returns (Mz, M) with M in Gamma_0(N), Im(Mz) >= Im(gz) for all g, and
    Re(Mz) translated into [-1/2, 1/2).  The maximal height is found by
    minimizing |cz+d|^2 over lower rows (c, d) with N | c, which is an
    exhaustive search in the disc c^2 y^2 <= Q_best.
    """
    pt = as_uhpoint(z)
    x, y = pt.x, pt.y
    best = (1.0, 0, 1)  # (Q, c, d); identity row
    c = N if N > 0 else 1
    while (c * y) ** 2 < best[0] - 1e-15:
        rem = best[0] - (c * y) ** 2
        d_mid = -c * x
        span = math.sqrt(max(rem, 0.0))
        for d in range(math.ceil(d_mid - span - 1e-9), math.floor(d_mid + span + 1e-9) + 1):
            if math.gcd(c, d) != 1:
                continue
            Q = (c * x + d) ** 2 + (c * y) ** 2
            if Q < best[0] - 1e-12:
                best = (Q, c, d)
        c += N
    _, c, d = best
    if c == 0:
        M = IDENTITY
        w = complex(x, y)
    else:
        a, b = complete_to_sl2(c, d)
        M = ((a, b), (c, d))
        w = mat_apply(M, complex(x, y))
    k = -math.floor(w.real + 0.5)
    M = mat_mul(((1, k), (0, 1)), M)
    w = w + k
    M = mat_mul(M, pt.certificate)
    return UHPoint(w.real, w.imag, reduced=True, certificate=M), M


def elliptic_weight(N: int, z, tol: float = 1e-9) -> Fraction:
    """Weight e_{N,z} = 2 / #Stab_z(Gamma_0(N)) of an interior point.

    The point is reduced first; stabilizer elements are rotations (a b; c d)
    with |cz + d| = 1 and trace in {-1, 0, 1}, detected within ``tol`` of the
    fixed-point condition.  Generic points give 1, order-4 elliptic points
    1/2, order-6 points 1/3.
    """
    pt, _ = reduce_to_fundamental_domain(N, z)
    x, y = pt.x, pt.y
    zc = complex(x, y)
    order = 2
    c = N
    while (c * y) ** 2 <= 1.0 + tol:
        d_mid = -c * x
        span = math.sqrt(max(1.0 + tol - (c * y) ** 2, 0.0)) / 1.0
        for d in range(math.ceil(d_mid - span - 1), math.floor(d_mid + span + 1) + 1):
            if math.gcd(c, d) != 1:
                continue
            Q = abs(c * zc + d) ** 2
            if abs(Q - 1.0) > 10 * tol:
                continue
            a0, b0 = complete_to_sl2(c, d)
            # slide the completion to bring the trace into [-1, 1]
            t = round((a0 + d) / c) if c else 0
            for tr_shift in (0, 1, -1):
                a = a0 - (t + tr_shift) * c
                b = b0 - (t + tr_shift) * d
                if abs(a + d) > 1:
                    continue
                w = mat_apply(((a, b), (c, d)), zc)
                if abs(w - zc) < math.sqrt(tol) * (1 + abs(zc)):
                    if a + d == 0:
                        order = max(order, 4)
                    else:
                        order = max(order, 6)
        c += N
    return Fraction(2, order)


# ---------------------------------------------------------------------------
# cusps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cusp:
    """Cusp representative a/c of Gamma_0(N) (i-infinity encoded as 1/0).

    ``scaling`` is a matrix in SL2(Z) sending i-infinity to a/c; its first
    column is (a, c).  ``width`` is the cusp width, and widths over a full
    set of representatives sum to index(N).
    """

    a: int
    c: int
    width: int
    scaling: tuple
    level: int

    @property
    def is_infinity(self) -> bool:
        return self.c == 0

    def __str__(self):
        return "inf" if self.c == 0 else f"{self.a}/{self.c}"


def cusp_width(N: int, q: int) -> int:
    """Width of a cusp with denominator q (q = 0 means i-infinity)."""
    if q == 0:
        q = N
    return N // math.gcd(q * q, N)


def make_cusp(N: int, a: int, c: int) -> Cusp:
    if c == 0:
        a = 1
        scaling = IDENTITY
    else:
        g = math.gcd(a, c)
        if g != 1:
            a, c = a // g, c // g
        if c < 0:
            a, c = -a, -c
        _, s, t = xgcd(a, c)  # a*s + c*t = 1, so det (a, -t; c, s) = 1
        scaling = ((a, -t), (c, s))
    return Cusp(a=a, c=c, width=cusp_width(N, c), scaling=scaling, level=N)


def cusps_equivalent(N: int, cusp1: tuple[int, int], cusp2: tuple[int, int]) -> bool:
    """Gamma_0(N)-equivalence of p1/q1 and p2/q2 (inf = (1, 0)).

    Criterion: with s_i = p_i^{-1} (mod q_i), the cusps are equivalent iff
    s1*q2 = s2*q1 (mod gcd(q1*q2, N)).
    """
    p1, q1 = cusp1
    p2, q2 = cusp2
    if q1 == 0:
        p1, q1 = 1, N
    if q2 == 0:
        p2, q2 = 1, N
    g1 = math.gcd(p1, q1)
    p1, q1 = p1 // g1, q1 // g1
    g2 = math.gcd(p2, q2)
    p2, q2 = p2 // g2, q2 // g2
    if q1 == 0 or q2 == 0:  # level-1 infinity after normalization
        return q1 == q2
    s1 = pow(p1 % q1, -1, q1) if q1 > 1 else 0
    s2 = pow(p2 % q2, -1, q2) if q2 > 1 else 0
    g = math.gcd(q1 * q2, N)
    return (s1 * q2 - s2 * q1) % g == 0


@lru_cache(maxsize=None)
def cusps(N: int) -> tuple[Cusp, ...]:
    """Complete duplicate-free set of cusp representatives, i-infinity first.

    For each divisor q of N there are phi(gcd(q, N/q)) classes a/q with a
    coprime to q, distinguished by a mod gcd(q, N/q).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    reps: list[Cusp] = [make_cusp(N, 1, 0)]
    for q in divisors(N):
        if q == N:
            continue  # a/N is equivalent to i-infinity
        delta = math.gcd(q, N // q)
        want = euler_phi(delta)
        found: list[int] = []
        a = 0
        while len(found) < want:
            a += 1
            if math.gcd(a, q) != 1:
                continue
            if any((a - f) % delta == 0 for f in found):
                continue
            found.append(a)
        for a in found:
            reps.append(make_cusp(N, a % q if q > 1 else 0, q))
    assert sum(c.width for c in reps) == index(N)
    return tuple(reps)


def cusp_class(N: int, p: int, q: int) -> Cusp:
    """Canonical representative of the cusp p/q (q = 0 for i-infinity)."""
    for rep in cusps(N):
        if cusps_equivalent(N, (p, q), (rep.a, rep.c)):
            return rep
    raise AssertionError("cusp set incomplete")  # pragma: no cover


# ---------------------------------------------------------------------------
# Kloosterman sums
# ---------------------------------------------------------------------------

def ramanujan_sum(n: int, c: int) -> int:
    """c_c(n) = K(0, n; c), multiplicatively from prime powers."""
    res = 1
    n = abs(n)
    for p, k in factorize(c):
        q = p ** k
        e = 0
        m = n
        while m and m % p == 0:
            m //= p
            e += 1
        if n == 0 or e >= k:
            res *= q - q // p
        elif e == k - 1:
            res *= -(q // p)
        else:
            return 0
    return res


def _modpow_vec(base: np.ndarray, e: int, mod: int) -> np.ndarray:
    result = np.ones_like(base)
    b = base % mod
    while e:
        if e & 1:
            result = (result * b) % mod
        b = (b * b) % mod
        e >>= 1
    return result


def _units_and_inverses(q: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    units = np.arange(1, q, dtype=np.int64)
    if q != p:
        units = units[units % p != 0]
    inv = _modpow_vec(units, euler_phi(q) - 1, q)
    return units, inv


def _kloosterman_prime_power(ms: np.ndarray, n: int, p: int, k: int) -> np.ndarray:
    """K(m, n; p^k) for every m in ms, by direct unit summation."""
    q = p ** k
    units, inv = _units_and_inverses(q, p)
    na = (n % q) * units % q
    out = np.empty(len(ms))
    for i, m in enumerate(ms):
        theta = ((m % q) * inv + na) % q
        out[i] = np.cos((_TWO_PI / q) * theta).sum()
    return out


def kloosterman_many(ms, n: int, c: int) -> np.ndarray:
    """K(m, n; c) for each m in ms, sharing the setup across m.

    Splits c multiplicatively: for c = q*s with gcd(q, s) = 1 and
    s*sbar + q*qbar = 1, K(m, n; c) = K(sbar*m, sbar*n; q) * K(qbar*m, qbar*n; s).
    Prime-power blocks are summed directly over units with numpy; the
    pairwise-summed cosine accumulation keeps the roundoff at the level a
    compensated scalar loop would.
    """
    ms = np.asarray(ms, dtype=np.int64) % c
    if c == 1:
        return np.ones(len(ms))
    out = np.ones(len(ms))
    rest = c
    n = n % c
    for p, k in factorize(c):
        q = p ** k
        rest //= q
        if rest == 1:
            out *= _kloosterman_prime_power(ms % q, n % q, p, k)
        else:
            _, sbar, qbar = xgcd(rest, q)  # rest*sbar + q*qbar = 1
            out *= _kloosterman_prime_power((sbar % q) * ms % q, (sbar % q) * n % q, p, k)
            ms = (qbar % rest) * ms % rest
            n = (qbar % rest) * n % rest
    return out


def kloosterman(m: int, n: int, c: int) -> float:
    """Classical Kloosterman sum K(m, n; c) = sum_{ad = 1 (c)} e((md + na)/c)."""
    if c < 1:
        raise ValueError("c must be >= 1")
    if c == 1:
        return 1.0
    if m % c == 0 or n % c == 0:
        return float(ramanujan_sum(m + n, c))
    return float(kloosterman_many([m], n, c)[0])


@dataclass(frozen=True)
class KloostermanQuery:
    """Query for a (possibly cusp-pair) Kloosterman sum at modulus c.

    ``src`` and ``dst`` are either the string "inf" or a Cusp; pairs with
    neither equal to i-infinity are out of scope and rejected.
    """

    m: int
    n: int
    c: int
    level: int = 1
    src: object = "inf"
    dst: object = "inf"


def _is_inf(cusp) -> bool:
    return cusp == "inf" or (isinstance(cusp, Cusp) and cusp.is_infinity)


def kloosterman_cusp(query: KloostermanQuery) -> complex:
    """Generalized Kloosterman sum for a cusp pair involving i-infinity.

    The double coset Gamma_inf^{l_a} \\ M_a^{-1} Gamma_0(N) M_b / Gamma_inf^{l_b}
    at lower-left entry c is enumerated through the classes
    (a mod l_a*c, d mod l_b*c) with ad = 1 (mod c) whose completed matrix
    lands in the conjugated group; inadmissible c give the empty sum 0.
    """
    m, n, c, N = query.m, query.n, query.c, query.level
    if c < 1:
        raise ValueError("c must be >= 1")
    src_inf, dst_inf = _is_inf(query.src), _is_inf(query.dst)
    if src_inf and dst_inf:
        return complex(kloosterman(m, n, c)) if c % N == 0 else 0.0j
    if not src_inf and not dst_inf:
        raise ValueError("cusp pairs with neither side i-infinity are not supported")
    rho = query.dst if src_inf else query.src
    (p, beta), (q, delta) = rho.scaling
    ell = rho.width
    units = np.arange(c, dtype=np.int64)
    units = units[np.gcd(units, c) == 1]
    inv = _modpow_vec(units, euler_phi(c) - 1, c) if c > 1 else np.zeros(1, dtype=np.int64)
    total = 0.0 + 0.0j
    L = ell * c
    if src_inf:
        # classes (a mod c, d mod ell*c), membership N | c*delta - d*q
        for j in range(ell):
            d = (inv + j * c) % L
            mask = (c * delta - d * q) % N == 0
            if not np.any(mask):
                continue
            theta = ((m % L) * d[mask] % L) / L + ((n % c) * units[mask] % c) / c
            total += np.exp(2j * np.pi * theta).sum()
    else:
        # classes (a mod ell*c, d mod c), membership N | q*a + delta*c
        for j in range(ell):
            a = (units + j * c) % L
            mask = (q * a + delta * c) % N == 0
            if not np.any(mask):
                continue
            theta = ((m % c) * inv[mask] % c) / c + ((n % L) * a[mask] % L) / L
            total += np.exp(2j * np.pi * theta).sum()
    return complex(total)
