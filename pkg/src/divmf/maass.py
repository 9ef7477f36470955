"""The Hecke system j_{N,n} and the weight-2 polar harmonic forms H*.

j_{N,n}(z) = 2 pi sqrt(n) F_{N,-n}(z), where F is the analytic continuation
of Niebur's weight-0 Poincare series.  Evaluation splits at c* = sqrt(n)/y:

  * cosets of Gamma_inf \\ Gamma_0(N) with lower-left 0 <= c <= c* are kept
    in configuration space, each contributing
    2 e(-n Re Mz) sinh(2 pi n Im Mz);
  * larger c are summed in Fourier form through Kloosterman sums against
    I_1 / J_1 Bessel kernels (m != 0) and Ramanujan sums (m = 0).

The m-tails are only conditionally convergent; they are summed c ascending
with the cutoff doubled adaptively until two successive estimates agree.
Values that overflow double precision (2 pi n Im z beyond ~670) switch the
configuration-space block to mpmath at a precision scaled with n Im z.

Cusp values j_{N,n}(rho) use the closed Kloosterman-series formula; the
exact cross-route is the harmonic weight-2 Eisenstein basis E*_{2,N,rho},
solved by exact linear algebra over {d E_2*(d tau) : d | N}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .arith import (Cusp, UHPoint, as_uhpoint, complete_to_sl2, cusp_class,
                    cusps, divisors, euler_phi, factorize, index,
                    kloosterman_many, ramanujan_sum,
                    reduce_to_fundamental_domain, _modpow_vec)
from .qseries import QSeries, eisenstein
from .special import _i1_array, _j1_array, bessel_i1

_TWO_PI = 2.0 * math.pi
_FLOAT_EXP_CAP = 670.0  # beyond this, sinh terms leave double precision


@dataclass(frozen=True)
class TruncationParams:
    """Cutoffs for the split evaluation.

    C: Kloosterman modulus cutoff (0 = adaptive doubling); always at least
    the split point sqrt(n)/y.  M: Fourier cutoff (0 = adaptive).  tol is
    the absolute tail budget, rel_tol the relative one; the effective
    budget is max(tol, rel_tol * scale of the value).
    """

    C: int = 0
    M: int = 0
    tol: float = 1e-3
    rel_tol: float = 1e-6
    adaptive: bool = True
    c_cap: int = 1 << 18
    ramanujan_cap: int = 400_000


@dataclass
class JValue:
    """Evaluated j_{N,n}: value plus tail and realness diagnostics."""

    value: object  # complex or mpmath.mpc
    tail_estimate: float
    imag_residual: float
    C_used: int = 0
    M_used: int = 0

    def as_complex(self) -> complex:
        return complex(self.value)

    @property
    def real(self) -> float:
        return float(self.value.real)


@dataclass(frozen=True)
class CosetOrbitTerm:
    """One coset of Gamma_inf \\ Gamma_0(N) in the Ramanujan-like sums.

    Q = Q_z(c,d) = c^2|z|^2 + 2cd Re z + d^2 and r = r_z(c,d) =
    ac|z|^2 + (ad+bc) Re z + bd for a chosen completion (a, b); the phase
    e(-n r/Q) does not depend on the completion.  Im(Mz) = Im(z)/Q and
    Re(Mz) = r/Q.
    """

    c: int
    d: int
    a: int
    b: int
    Q: float
    r: float
    y: float

    @classmethod
    def from_cd(cls, z, c: int, d: int) -> "CosetOrbitTerm":
        z = complex(z)
        x, y = z.real, z.imag
        if c == 0:
            a, b = 1, 0
        else:
            a, b = complete_to_sl2(c, d)
        zz = x * x + y * y
        Q = c * c * zz + 2.0 * c * d * x + d * d
        r = a * c * zz + (a * d + b * c) * x + b * d
        return cls(c=c, d=d, a=a, b=b, Q=Q, r=r, y=y)

    def phase(self, n: int) -> complex:
        return cmath.exp(-2j * math.pi * n * self.r / self.Q)

    def magnitude_exponent(self, n: int) -> float:
        return _TWO_PI * n * self.y / self.Q


def coset_terms(N: int, z, q_bound: float) -> list[CosetOrbitTerm]:
    """All cosets with Q_z(c, d) <= q_bound (identity included)."""
    z = complex(z)
    x, y = z.real, z.imag
    out = []
    if q_bound >= 1.0:
        out.append(CosetOrbitTerm.from_cd(z, 0, 1))
    c = N
    while (c * y) ** 2 <= q_bound:
        room = q_bound - (c * y) ** 2
        mid = -c * x
        span = math.sqrt(max(room, 0.0))
        for d in range(math.ceil(mid - span - 1e-9), math.floor(mid + span + 1e-9) + 1):
            if math.gcd(c, d) != 1:
                continue
            term = CosetOrbitTerm.from_cd(z, c, d)
            if term.Q <= q_bound:
                out.append(term)
        c += N
    return out


def lambda_spectrum(N: int, z, q_bound: float, grouping_tol: float = 1e-9):
    """Group coset terms by their Q_z value: the multiset over the lattice."""
    groups: list[tuple[float, list[CosetOrbitTerm]]] = []
    for term in sorted(coset_terms(N, z, q_bound), key=lambda t: t.Q):
        if groups and abs(groups[-1][0] - term.Q) <= grouping_tol * max(term.Q, 1.0):
            groups[-1][1].append(term)
        else:
            groups.append((term.Q, [term]))
    return groups


# ---------------------------------------------------------------------------
# Niebur coefficients and the Fourier tails
# ---------------------------------------------------------------------------

def niebur_coeff(N: int, n: int, m: int, C: int) -> tuple[float, float]:
    """Partial sum of c_N(n, m) over N | c <= C, with a Weil-bound tail estimate.

    Kernel: I_1(4 pi sqrt(mn)/c)/sqrt(m) for m > 0, 2 pi sqrt(n)/c for
    m = 0, J_1(4 pi sqrt(|m|n)/c)/sqrt(|m|) for m < 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if C < N:
        return 0.0, math.inf if C >= 0 else 0.0
    cs = np.arange(N, C + 1, N, dtype=np.int64)
    if m == 0:
        vals = np.array([ramanujan_sum(-n, int(c)) for c in cs], dtype=float)
        total = float(np.sum(vals / cs * (_TWO_PI * math.sqrt(n) / cs)))
    else:
        arg = 4.0 * math.pi * math.sqrt(abs(m) * n) / cs
        kern = _i1_array(arg) if m > 0 else _j1_array(arg)
        K = np.array([float(kloosterman_many([m], -n, int(c))[0]) for c in cs])
        total = float(np.sum(K / cs * kern / math.sqrt(abs(m))))
    tail = _weil_c_tail(N, C) * (_TWO_PI * math.sqrt(n) if m == 0 else
                                 4.0 * math.pi * math.sqrt(n))
    return total, tail


def _weil_c_tail(N: int, C: int) -> float:
    """Heuristic bound for sum_{c > C, N | c} sigma_0(c) c^{-3/2}."""
    if C <= 0:
        return math.inf
    return 2.0 * (math.log(C) + 2.0) / (N * math.sqrt(C))


def _fourier_tails(N: int, n: int, x: float, y: float, c_lo: int,
                   budget: float, params: TruncationParams):
    """Kloosterman-Bessel tails over N | c >= c_lo.

    Returns (complex value, tail estimate, C_used, M_used).  Each m-block
    is summed with its own doubling cutoff; the m = 0 block uses the
    closed Ramanujan-sum form and may run to a much larger cutoff.
    """
    z = complex(x, y)
    est = 0.0

    # m = 0 block
    pref0 = 4.0 * math.pi ** 2 * n
    budget0 = max(budget / 3.0, 1e-300)
    cap0 = params.ramanujan_cap if params.C == 0 else max(params.C, c_lo)
    S0 = 0.0
    c = c_lo
    block = max(2 * c_lo, 1 << 11)
    delta0 = math.inf
    while c <= cap0:
        hi = min(block, cap0)
        s = 0.0
        while c <= hi:
            s += ramanujan_sum(-n, c) / (c * c)
            c += N
        S0 += s
        delta0 = pref0 * abs(s)
        if params.C == 0 and delta0 < budget0 and block >= (1 << 13):
            break
        block *= 2
    T0 = pref0 * S0
    est += delta0 + pref0 * 2.0 * (math.log(c) + 2.0) / (N * c)
    C_used = c
    M_used = 0

    # m != 0 blocks
    total = complex(T0, 0.0)
    m_cap = params.M if params.M else 64
    for m in range(1, m_cap + 1):
        decay = math.exp(-_TWO_PI * m * y)
        pref = _TWO_PI * math.sqrt(n / m)
        arg_lo = 4.0 * math.pi * math.sqrt(m * n) / c_lo
        crude = pref * decay * bessel_i1(min(arg_lo, _FLOAT_EXP_CAP)) * 4.0
        budget_m = max(budget / (3.0 * 2.0 ** m), 1e-300)
        if params.M == 0 and m > 3 and crude < budget_m:
            break
        M_used = m
        SI = 0.0 + 0.0j
        SJ = 0.0 + 0.0j
        c = c_lo
        cap = params.C if params.C else params.c_cap
        cap = max(cap, c_lo)
        block = max(2 * c_lo, 256)
        delta = math.inf
        while c <= cap:
            hi = min(block, cap)
            cs = np.arange(c, hi + 1, N, dtype=np.int64)
            if len(cs):
                arg = 4.0 * math.pi * math.sqrt(m * n) / cs
                kI = _i1_array(arg)
                kJ = _j1_array(arg)
                KI = np.empty(len(cs))
                KJ = np.empty(len(cs))
                for i, cc in enumerate(cs):
                    pair = kloosterman_many([m, -m], -n, int(cc))
                    KI[i], KJ[i] = pair[0], pair[1]
                dI = float(np.sum(KI / cs * kI))
                dJ = float(np.sum(KJ / cs * kJ))
                SI += dI
                SJ += dJ
                delta = pref * decay * (abs(dI) + abs(dJ))
                c = int(cs[-1]) + N
            else:
                c = hi + N
            if params.C == 0 and delta < budget_m and block >= 4 * c_lo + 512:
                break
            block *= 2
        C_used = max(C_used, c - N)
        phase = cmath.exp(2j * math.pi * m * x)
        total += pref * decay * (SI * phase + SJ / phase)
        est += delta + pref * decay * 4.0 * _weil_c_tail(N, c - N)
    return total, est, C_used, M_used


# ---------------------------------------------------------------------------
# the evaluator
# ---------------------------------------------------------------------------

def _sinh_block(N: int, n: int, x: float, y: float, split: float, budget: float):
    """Configuration-space block: cosets with 0 <= c <= split.

    Far translates contribute ~ 2 pi n y / d^2 each; the d-window is sized
    so the dropped mass stays below ``budget``.  Terms whose magnitude
    exponent exceeds double precision are accumulated in mpmath (the caller
    sets the working precision).
    """
    z = complex(x, y)
    max_log = _TWO_PI * n * y
    use_mp = max_log > _FLOAT_EXP_CAP
    mp_total = mpmath.mpc(0) if use_mp else None

    def add_mp(c, d, a, b):
        nonlocal mp_total
        zz = mpmath.mpc(x, y)
        w = (a * zz + b) / (c * zz + d)
        mp_total += 2 * mpmath.e ** (-2j * mpmath.pi * n * w.real) * mpmath.sinh(
            2 * mpmath.pi * n * w.imag)

    total = 0.0 + 0.0j
    trunc_err = 0.0
    # identity coset (c, d) = (0, 1)
    if use_mp:
        zz = mpmath.mpc(x, y)
        mp_total += 2 * mpmath.e ** (-2j * mpmath.pi * n * x) * mpmath.sinh(
            2 * mpmath.pi * n * y)
    else:
        total += 2.0 * cmath.exp(-2j * math.pi * n * x) * math.sinh(_TWO_PI * n * y)

    n_blocks = int(split // N) + 1
    per_c_budget = max(budget / (2.0 * n_blocks), 1e-300)
    c = N
    while c <= split:
        # dropped translates sum to ~ 4 pi n y / W; keep that below budget
        W = min(4.0 * math.pi * n * y / per_c_budget + 2.0, 4e6)
        trunc_err += 4.0 * math.pi * n * y / W
        mid = -c * x
        lo, hi = math.ceil(mid - W), math.floor(mid + W)
        ds = np.arange(lo, hi + 1, dtype=np.int64)
        ds = ds[np.gcd(ds, c) == 1]
        if len(ds) == 0:
            c += N
            continue
        Q = (c * x + ds) ** 2 + (c * y) ** 2
        arg = _TWO_PI * n * y / Q
        # inverse table mod c for the completions
        units = np.arange(c, dtype=np.int64)
        units = units[np.gcd(units, c) == 1]
        inv = _modpow_vec(units, euler_phi(c) - 1, c) if c > 1 else np.zeros(1, dtype=np.int64)
        table = np.zeros(c, dtype=np.int64)
        table[units % c] = inv
        a = table[ds % c]
        big = arg > _FLOAT_EXP_CAP
        if np.any(big):
            for d_big, a_big in zip(ds[big], a[big]):
                b_big = (int(a_big) * int(d_big) - 1) // c
                add_mp(c, int(d_big), int(a_big), b_big)
        small = ~big
        if np.any(small):
            dsm, am, Qm = ds[small], a[small], Q[small]
            w = 1.0 / (c * (c * z + dsm))
            # e(-n Re Mz) = e(-n a/c) * e(n Re w); the first factor is an
            # exact root of unity, computed from integer residues
            ph1 = np.exp(-2j * np.pi * ((n % c) * am % c) / c)
            ph2 = np.exp(2j * np.pi * n * w.real)
            total += complex(np.sum(2.0 * ph1 * ph2 * np.sinh(_TWO_PI * n * y / Qm)))
        c += N
    if mp_total is not None:
        return mp_total + total, trunc_err
    return total, trunc_err


def j_value(N: int, n: int, z, params: TruncationParams | None = None,
            reduce: bool = True) -> JValue:
    """Evaluate j_{N,n}(z) by the split formula.

    The point is reduced to maximal height in its orbit first (disable with
    reduce=False to exercise the slower unreduced convergence).  The value
    is complex in general; for points with z ~ -conj(z) in the orbit it is
    real up to the reported imaginary residual.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    params = params or TruncationParams()
    pt = as_uhpoint(z)
    if reduce and not pt.reduced:
        pt, _ = reduce_to_fundamental_domain(N, pt)
    x, y = pt.x, pt.y
    split = math.sqrt(n) / y
    log_scale = _TWO_PI * n * y
    scale = math.exp(min(log_scale, _FLOAT_EXP_CAP))
    budget = max(params.tol, params.rel_tol * scale)
    dps = int(log_scale / math.log(10)) + 30 if log_scale > _FLOAT_EXP_CAP else 0
    with mpmath.workdps(max(dps, 15)):
        sinh_part, trunc_err = _sinh_block(N, n, x, y, split, budget)
        c_lo = N * (int(split // N) + 1)
        tails, est, C_used, M_used = _fourier_tails(N, n, x, y, c_lo, budget, params)
        value = sinh_part + tails
        mag = abs(value)
        imag_res = float(abs(value.imag) / mag) if mag else 0.0
    return JValue(value=value, tail_estimate=est + trunc_err, imag_residual=imag_res,
                  C_used=C_used, M_used=M_used)


def j_asymptotic_main(N: int, n: int, z, reduce: bool = True) -> complex:
    """Main term of the n-aspect asymptotic: sum over Q_z(c,d) <= n of e^{-2 pi i n Mz}."""
    if n < 1:
        return 0.0 + 0.0j
    pt = as_uhpoint(z)
    if reduce and not pt.reduced:
        pt, _ = reduce_to_fundamental_domain(N, pt)
    zc = pt.as_complex()
    total = 0.0 + 0.0j
    for term in coset_terms(N, zc, float(n)):
        total += term.phase(n) * math.exp(term.magnitude_exponent(n))
    return total


def j_asymptotic_residual(N: int, n: int, z, params: TruncationParams | None = None,
                          reduce: bool = True) -> complex:
    """j_{N,n}(z) - main term, evaluated stably (no large cancellation).

    Cosets with Q <= n contribute only their decaying halves
    -e(-n Re Mz) e^{-2 pi n Im Mz}; cosets with Q > n below the split keep
    the full sinh term, which is bounded there.  Fourier tails are added
    as in j_value.  All terms stay O(e^{2 pi Im z}), so the difference is
    computable long after j itself overflows doubles.
    """
    params = params or TruncationParams(tol=max(1e-3, 0.005 * n))
    pt = as_uhpoint(z)
    if reduce and not pt.reduced:
        pt, _ = reduce_to_fundamental_domain(N, pt)
    x, y = pt.x, pt.y
    z = complex(x, y)
    split = math.sqrt(n) / y
    budget = params.tol
    total = 0.0 + 0.0j

    # identity coset, Q = 1 <= n: only its decaying half survives
    total += -cmath.exp(-2j * math.pi * n * x) * math.exp(-_TWO_PI * n * y)
    n_blocks = int(split // N) + 1
    per_c_budget = max(budget / (2.0 * n_blocks), 1e-300)
    c = N
    while c <= split:
        W = min(4.0 * math.pi * n * y / per_c_budget + 2.0, 2e6)
        mid = -c * x
        ds = np.arange(math.ceil(mid - W), math.floor(mid + W) + 1, dtype=np.int64)
        ds = ds[np.gcd(ds, c) == 1]
        if len(ds) == 0:
            c += N
            continue
        Q = (c * x + ds) ** 2 + (c * y) ** 2
        units = np.arange(c, dtype=np.int64)
        units = units[np.gcd(units, c) == 1]
        inv = _modpow_vec(units, euler_phi(c) - 1, c) if c > 1 else np.zeros(1, dtype=np.int64)
        table = np.zeros(c, dtype=np.int64)
        table[units % c] = inv
        a = table[ds % c]
        w = 1.0 / (c * (c * z + ds))
        ph = np.exp(-2j * np.pi * ((n % c) * a % c) / c) * np.exp(2j * np.pi * n * w.real)
        mag = _TWO_PI * n * y / Q
        main_set = Q <= n
        contrib = np.where(main_set, -ph * np.exp(-mag), 2.0 * ph * np.sinh(np.minimum(mag, 700.0)))
        total += complex(np.sum(contrib))
        c += N
    c_lo = N * (int(split // N) + 1)
    tails, _, _, _ = _fourier_tails(N, n, x, y, c_lo, budget, params)
    return total + tails


def term_sinh(term: CosetOrbitTerm, n: int):
    """Full configuration-space contribution 2 e(-n Re Mz) sinh(2 pi n Im Mz)."""
    return 2.0 * term.phase(n) * math.sinh(term.magnitude_exponent(n))


# ---------------------------------------------------------------------------
# cusp values
# ---------------------------------------------------------------------------

def j_cusp(N: int, n: int, rho, C: int = 0) -> tuple[float, float]:
    """j_{N,n}(rho) = (4 pi^2 n / l_rho) sum_c K_{i inf, rho}(0, -n; c)/c^2.

    Returns (value, tail estimate).  For rho = i-infinity the Kloosterman
    sums are Ramanujan sums c_c(n) over N | c and the cutoff defaults to
    10^5; for other cusps the double-coset sums are enumerated directly
    (inadmissible c contribute 0) with a default cutoff of 2*10^4.
    """
    return j_cusp_many(N, n, rho, C=C)[n - 1]


def j_cusp_many(N: int, n_max: int, rho, C: int = 0) -> list[tuple[float, float]]:
    """(j_{N,n}(rho), tail estimate) for n = 1..n_max in one sweep over c."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rho = _as_cusp(N, rho)
    ns = np.arange(1, n_max + 1, dtype=float)
    prefs = 4.0 * math.pi ** 2 * ns / rho.width
    if rho.is_infinity:
        C = C or 100_000
        sums = np.zeros(n_max)
        marks = []
        checkpoint = max(C // 8, N)
        nxt = checkpoint
        for c in range(N, C + 1, N):
            inv_c2 = 1.0 / (c * c)
            for i in range(n_max):
                sums[i] += ramanujan_sum(-(i + 1), c) * inv_c2
            if c >= nxt:
                marks.append(sums.copy())
                nxt += checkpoint
        osc = _mark_spread(sums, marks)
        ests = prefs * np.maximum(osc, 2.0 * math.log(C) / (N * C))
        return [(float(p * s), float(e)) for p, s, e in zip(prefs, sums, ests)]
    C = C or 20_000
    (p, beta), (q, delta) = rho.scaling
    ell = rho.width
    # use the symmetry K_{i inf, rho}(0,-n;c) = K_{rho, i inf}(n,0;c), whose
    # classes (a mod ell*c, d mod c) are cut out by q*a + delta*c = 0 (mod N)
    # directly on the phase variable a -- no modular inverses needed
    g = math.gcd(q, N)
    N1 = N // g
    q1 = (q // g) % N1 if N1 > 1 else 0
    q1inv = pow(q1, -1, N1) if N1 > 1 else 0
    obstructions = [pp for pp, _ in factorize(N1)] if N1 > 1 else []
    sums = np.zeros(n_max, dtype=complex)
    marks = []
    checkpoint = max(C // 8, 1)
    nxt = checkpoint
    for c in range(1, C + 1):
        if (delta * c) % g:
            continue
        if N1 > 1:
            r0 = ((-delta * c // g) * q1inv) % N1
            if any(c % pp == 0 and r0 % pp == 0 for pp in obstructions):
                continue
        L = ell * c
        if N1 > 1:
            avals = np.arange(r0 % N1, L, N1, dtype=np.int64)
        else:
            avals = np.arange(L, dtype=np.int64)
        avals = avals[np.gcd(avals % c if c > 1 else avals, max(c, 1)) == 1] if c > 1 \
            else avals
        if len(avals) == 0:
            pass
        else:
            w = np.exp(2j * np.pi * avals / L)
            cur = w / (c * c)
            for i in range(n_max):
                sums[i] += cur.sum()
                if i + 1 < n_max:
                    cur = cur * w
        if c >= nxt:
            marks.append(sums.copy())
            nxt += checkpoint
    osc = _mark_spread(sums, marks)
    ests = prefs * np.maximum(osc + np.abs(sums.imag),
                              0.5 * _weil_c_tail(1, C) * np.ones(n_max))
    return [(float(p * s.real), float(e)) for p, s, e in zip(prefs, sums, ests)]


def _mark_spread(final, marks):
    """Max distance of the last few partial-sum checkpoints from the final sum."""
    if len(marks) < 3:
        return np.abs(final) * 0 + np.inf
    return np.max(np.abs(np.stack(marks[-3:]) - final), axis=0)


def _as_cusp(N: int, rho) -> Cusp:
    if isinstance(rho, Cusp):
        return rho if rho.level == N else cusp_class(N, rho.a, rho.c)
    if rho == "inf":
        return cusps(N)[0]
    if isinstance(rho, tuple):
        return cusp_class(N, rho[0], rho[1])
    if isinstance(rho, Fraction):
        return cusp_class(N, rho.numerator, rho.denominator)
    raise TypeError(f"cannot interpret {rho!r} as a cusp of Gamma_0({N})")


# ---------------------------------------------------------------------------
# H* expansions
# ---------------------------------------------------------------------------

@dataclass
class HStarExpansion:
    """Fourier data of H*_{N,z}: 1/Im(tau) coefficient and q^n coefficients."""

    one_over_y: float
    coeffs: list  # JValue for interior points, (value, est) pairs at cusps
    constant_term: float = 0.0

    def coefficient(self, n: int):
        entry = self.coeffs[n - 1]
        return entry.value if isinstance(entry, JValue) else entry[0]


def hstar_expansion(N: int, z, n_max: int,
                    params: TruncationParams | None = None) -> HStarExpansion:
    """H*_{N,z}(tau) = 3/(pi [SL2:Gamma_0(N)] Im tau) + sum j_{N,n}(z) q^n.

    The series converges for Im(tau) > max(Im z, 1/Im z); the returned
    coefficients are j_{N,n}(z) for n = 1..n_max.
    """
    pt, _ = reduce_to_fundamental_domain(N, z)
    vals = [j_value(N, n, pt, params=params, reduce=False) for n in range(1, n_max + 1)]
    return HStarExpansion(one_over_y=3.0 / (math.pi * index(N)), coeffs=vals)


def hstar_cusp_expansion(N: int, rho, n_max: int, C: int = 0) -> HStarExpansion:
    """H*_{N,rho}: constant 3/(pi index(N)) on 1/Im tau, q^0 term -delta_{rho,inf},
    and q^n coefficients j_{N,n}(rho) from the Kloosterman route."""
    rho = _as_cusp(N, rho)
    vals = j_cusp_many(N, n_max, rho, C=C)
    return HStarExpansion(one_over_y=3.0 / (math.pi * index(N)), coeffs=vals,
                          constant_term=-1.0 if rho.is_infinity else 0.0)


class EisensteinSystemError(RuntimeError):
    """The weight-2 Eisenstein linear system is singular or non-square."""


@dataclass
class E2Star:
    """Harmonic weight-2 Eisenstein series attached to a cusp.

    holomorphic part as an exact QSeries plus the -3/(pi index(N) Im tau)
    correction; ``weights`` are the exact coordinates in the basis
    {d E_2*(d tau) : d | N}.
    """

    series: QSeries
    one_over_y: float
    weights: dict

    def coefficient(self, n: int):
        return self.series.coeff(n)


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise EisensteinSystemError("singular Eisenstein constant-term system")
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1, 1) / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [v - f * w for v, w in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def e2star_expansion(N: int, rho, n_max: int) -> E2Star:
    """E*_{2,N,rho}: width-normalized constant term 1 at rho, 0 elsewhere.

    Solved exactly in the basis {d E_2*(d tau): d | N} using the slash
    constant terms: d E_2*(d tau) has constant gcd(d, c_sigma)^2 / d at the
    cusp a/c_sigma (width-normalized: times l_sigma).  Validated by the
    mass identity sum_sigma l_sigma gcd(d, c_sigma)^2/d = index(N).
    """
    reps = cusps(N)
    ds = divisors(N)
    if len(reps) != len(ds):
        raise EisensteinSystemError(
            f"level {N}: {len(reps)} cusps but {len(ds)} divisors; the "
            "E_2(d tau) span cannot separate the cusps")
    rho = _as_cusp(N, rho)
    A = []
    for rep in reps:
        c_sigma = rep.c if rep.c else N
        A.append([Fraction(rep.width) * Fraction(math.gcd(d, c_sigma) ** 2, d)
                  for d in ds])
    b = [Fraction(1) if rep == rho else Fraction(0) for rep in reps]
    xs = _solve_exact(A, b)
    assert sum(xs) == Fraction(1, index(N))
    series = None
    for d, w in zip(ds, xs):
        if w == 0:
            continue
        part = eisenstein(2, max(n_max // d, 1)).dilate(d).truncate(n_max) * (w * d)
        series = part if series is None else series + part
    return E2Star(series=series, one_over_y=-3.0 / (math.pi * index(N)),
                  weights=dict(zip(ds, xs)))


# ---------------------------------------------------------------------------
# Hecke relations
# ---------------------------------------------------------------------------

@dataclass
class HeckeCheck:
    """Numeric comparison of both sides of a Hecke relation."""

    relation: str
    lhs: complex
    rhs: complex
    abs_residual: float
    rel_residual: float


def check_hecke_relations(N: int, n: int, target,
                          params: TruncationParams | None = None) -> HeckeCheck:
    """Check j_{N,n} = j_{N,1} | T(n) (gcd(n,N)=1) or j_{N,n} = j_{N/n,1}(n .)
    (n | N) at an interior point or cusp; the report carries the residual.

    The scaling relation holds as stated when every prime of n divides N/n;
    outside that range (e.g. N = n = 2) the report documents the defect.
    """
    if isinstance(target, (Cusp, str)) or (isinstance(target, tuple) and len(target) == 2
                                           and all(isinstance(v, int) for v in target)):
        return _check_hecke_cusp(N, n, _as_cusp(N, target))
    pt = as_uhpoint(target)
    z = pt.as_complex()
    if math.gcd(n, N) == 1:
        lhs = j_value(N, n, z, params=params).as_complex()
        rhs = 0.0 + 0.0j
        for a in divisors(n):
            d = n // a
            for b in range(d):
                rhs += j_value(N, 1, (a * z + b) / d, params=params).as_complex()
        rel = f"T({n})"
    elif N % n == 0:
        lhs = j_value(N, n, z, params=params).as_complex()
        rhs = j_value(N // n, 1, n * z, params=params).as_complex()
        rel = f"scaling {N}->{N // n}"
    else:
        raise ValueError(f"neither gcd({n},{N})=1 nor {n}|{N}")
    diff = abs(lhs - rhs)
    return HeckeCheck(relation=rel, lhs=lhs, rhs=rhs, abs_residual=diff,
                      rel_residual=diff / max(abs(lhs), 1e-300))


def _check_hecke_cusp(N: int, n: int, rho: Cusp) -> HeckeCheck:
    if math.gcd(n, N) == 1:
        lhs, _ = j_cusp(N, n, rho)
        rhs = 0.0
        p, q = (rho.a, rho.c) if not rho.is_infinity else (1, 0)
        for a in divisors(n):
            d = n // a
            for b in range(d):
                if q == 0:
                    img = cusps(N)[0]
                else:
                    img = cusp_class(N, a * p + b * q, d * q)
                rhs += j_cusp(N, 1, img)[0]
        rel = f"T({n}) at cusp"
    elif N % n == 0:
        lhs, _ = j_cusp(N, n, rho)
        M = N // n
        if rho.is_infinity:
            img = cusps(M)[0]
        else:
            img = cusp_class(M, n * rho.a, rho.c)
        rhs = j_cusp(M, 1, img)[0]
        rel = f"scaling {N}->{M} at cusp"
    else:
        raise ValueError(f"neither gcd({n},{N})=1 nor {n}|{N}")
    diff = abs(lhs - rhs)
    return HeckeCheck(relation=rel, lhs=lhs, rhs=rhs, abs_residual=diff,
                      rel_residual=diff / max(abs(lhs), 1e-300))
