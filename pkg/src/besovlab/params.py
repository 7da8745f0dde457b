"""Parameter algebra for anisotropic embeddings.

Every formula is written with reciprocal arithmetic so that ``inf`` exponents
stay exact, and so that :class:`fractions.Fraction` inputs produce exact
rational outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .errors import AdmissibilityError, PreconditionError

INF = math.inf


def recip(x):
    """``1/x`` with ``1/inf = 0``."""
    return 0 if x == INF else 1 / x


def unrecip(y):
    """``1/y`` with ``1/0 = inf``."""
    return INF if y == 0 else 1 / y


def _exact(x):
    if x == INF or isinstance(x, Fraction):
        return x
    return Fraction(str(x))


def parse_exponent(text) -> Real:
    """Number or ``inf``; rationals such as ``12/11`` are kept exact."""
    if isinstance(text, Real):
        return text
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "+inf"):
        return INF
    if "/" in s:
        return Fraction(s)
    return float(s)


@dataclass(frozen=True)
class AnisoParams:
    """Smoothness ``r_j``, integrability ``p_j`` and fine index ``theta_j`` per axis,
    together with the derived means ``r, p, theta`` and weights ``beta_j``."""

    n: int
    r_j: tuple
    p_j: tuple
    theta_j: tuple
    r: Real
    p: Real
    theta: Real
    beta: tuple

    @property
    def isotropic(self) -> bool:
        return len(set(self.r_j)) == 1 and len(set(self.p_j)) == 1 and len(set(self.theta_j)) == 1

    def beta_sum(self):
        return sum(self.beta)

    def lemma_delta(self):
        """Largest admissible equalisation slack: half of ``min_j beta_j r_j``."""
        return min(b * r for b, r in zip(self.beta, self.r_j)) / 2


def derive(n, r_j, p_j, theta_j, exact: bool = False) -> AnisoParams:
    """Derived exponents.

    ``r = n / sum(1/r_j)``, ``p = (n/r) / sum(1/(p_j r_j))``,
    ``theta = (n/r) / sum(1/(theta_j r_j))`` and
    ``beta_j = (r/n + 1/p_j - 1/p) / r_j``.  Raises
    :class:`AdmissibilityError` if some ``beta_j <= 0``.
    """
    r_j, p_j, theta_j = tuple(r_j), tuple(p_j), tuple(theta_j)
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if not (len(r_j) == len(p_j) == len(theta_j) == n):
        raise PreconditionError(f"r, p, theta must each have length n={n}")
    if exact:
        r_j = tuple(_exact(x) for x in r_j)
        p_j = tuple(_exact(x) for x in p_j)
        theta_j = tuple(_exact(x) for x in theta_j)
    for j, (rj, pj, tj) in enumerate(zip(r_j, p_j, theta_j), start=1):
        if not (0 < rj < INF):
            raise AdmissibilityError(f"r_{j} > 0 violated (r_{j} = {rj})", j)
        if not (1 <= pj < INF):
            raise AdmissibilityError(f"1 <= p_{j} < inf violated (p_{j} = {pj})", j)
        if not tj >= 1:
            raise AdmissibilityError(f"theta_{j} >= 1 violated (theta_{j} = {tj})", j)

    r = n / sum(recip(x) for x in r_j)
    p = (n / r) / sum(recip(pj * rj) for pj, rj in zip(p_j, r_j))
    inv_theta = sum(recip(tj) * recip(rj) for tj, rj in zip(theta_j, r_j))
    theta = INF if inv_theta == 0 else (n / r) / inv_theta
    beta = tuple((r / n + recip(pj) - recip(p)) / rj for pj, rj in zip(p_j, r_j))
    for j, b in enumerate(beta, start=1):
        if not b > 0:
            raise AdmissibilityError(
                f"beta-positivity violated: beta_{j} = (1/r_{j})(r/n + 1/p_{j} - 1/p) = {float(b):.17g} <= 0",
                j,
            )
    return AnisoParams(n, r_j, p_j, theta_j, r, p, theta, beta)


def limit_exponent(params: AnisoParams):
    """``q* = n p / (n - r p)``; requires ``p < n/r``."""
    n, r, p = params.n, params.r, params.p
    if not p < n / r:
        raise AdmissibilityError(
            f"no limit exponent: p < n/r violated (p = {float(p):.17g}, n/r = {float(n / r):.17g})"
        )
    return n * p / (n - r * p)


@dataclass(frozen=True)
class EmbeddingTarget:
    """Target exponents ``q_j``, ``kappa_j``, ``alpha_j = kappa_j r_j`` and ``theta'_j``."""

    q_j: tuple
    kappa: tuple
    alpha: tuple
    theta_prime: tuple


def embedding_target(params: AnisoParams, q_j) -> EmbeddingTarget:
    q_j = tuple(parse_exponent(q) for q in q_j)
    if isinstance(params.r, Fraction):
        q_j = tuple(_exact(q) for q in q_j)
    if len(q_j) != params.n:
        raise PreconditionError(f"q must have length n={params.n}")
    bound = recip(params.p) - params.r / params.n
    kappa, alpha, theta_p = [], [], []
    for j, (qj, pj, rj, tj, bj) in enumerate(
        zip(q_j, params.p_j, params.r_j, params.theta_j, params.beta), start=1
    ):
        if not bj > 0:
            raise AdmissibilityError(f"beta_{j} > 0 violated", j)
        if not (pj < qj < INF):
            raise AdmissibilityError(f"p_{j} < q_{j} < inf violated (p_{j} = {pj}, q_{j} = {qj})", j)
        if not recip(qj) > bound:
            raise AdmissibilityError(
                f"1/q_{j} > 1/p - r/n violated (1/q_{j} = {float(recip(qj)):.17g}, "
                f"1/p - r/n = {float(bound):.17g})",
                j,
            )
        kj = 1 - (recip(pj) - recip(qj)) / (bj * rj)
        kappa.append(kj)
        alpha.append(kj * rj)
        theta_p.append(unrecip((1 - kj) * recip(params.theta) + kj * recip(tj)))
    return EmbeddingTarget(q_j, tuple(kappa), tuple(alpha), tuple(theta_p))


def nikolskii_kappa(params: AnisoParams, q):
    """Isotropic-integrability exponent ``1 - (n/r)(1/p - 1/q)``."""
    if isinstance(params.r, Fraction) and isinstance(q, int):
        q = _exact(q)
    return 1 - (params.n / params.r) * (recip(params.p) - recip(q))
