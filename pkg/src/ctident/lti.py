"""Rational transfer-function models and basic LTI analysis.

Conventions used throughout the package:

- Polynomial coefficients are stored in descending powers, leading
  coefficient first.
- Denominators are normalized to monic form on construction.
- The parameter vector of an order ``n`` model stacks the numerator
  coefficients, zero-padded at the high-order end to length ``n``, on top of
  the ``n`` trailing denominator coefficients.  For

  ``G = (c_{n-1} x^{n-1} + ... + c_0) / (x^n + d_{n-1} x^{n-1} + ... + d_0)``

  the vector is ``theta = [c_{n-1}, ..., c_0, d_{n-1}, ..., d_0]`` of length
  ``2n``.  The same layout is used for continuous- and discrete-time models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov
from scipy.signal import lfilter

from .errors import UnstableSystem

__all__ = [
    "Polynomial",
    "CtModel",
    "DtModel",
    "StateSpace",
    "SampledDataset",
    "ct_to_ss",
    "dt_to_ss",
    "simulate_dt",
    "l2_norm_sq",
    "freq_response",
    "poles",
    "is_stable",
    "model_to_dict",
    "model_from_dict",
]


class Polynomial:
    """Real polynomial with coefficients in descending powers.

    Exact leading zeros are stripped on construction so that ``degree``
    always reflects the stored data.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must form a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        nz = np.flatnonzero(c != 0.0)
        c = c[nz[0]:].copy() if nz.size else c[-1:].copy()
        c.flags.writeable = False
        self.coeffs = c

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return np.polyval(self.coeffs, x)

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.array([], dtype=complex)
        return np.roots(self.coeffs)

    def __repr__(self):
        return "Polynomial(%s)" % self.coeffs.tolist()


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


class _RationalModel:
    """Shared behaviour of strictly proper single-input single-output models."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        num = _as_poly(num)
        den = _as_poly(den)
        if den.degree < 1:
            raise ValueError("denominator must have degree at least 1")
        lead = den.coeffs[0]
        if lead != 1.0:
            den = Polynomial(den.coeffs / lead)
            num = Polynomial(num.coeffs / lead)
        if num.degree > den.degree - 1:
            raise ValueError("model must be strictly proper")
        self.num = num
        self.den = den

    @property
    def n(self) -> int:
        """Model order (denominator degree)."""
        return self.den.degree

    @property
    def theta(self) -> np.ndarray:
        """Parameter vector, length ``2n``; see module docstring for layout."""
        pad = np.zeros(self.n - 1 - self.num.degree)
        return np.concatenate([pad, self.num.coeffs, self.den.coeffs[1:]])


class CtModel(_RationalModel):
    """Strictly proper continuous-time transfer function.

    Parameters
    ----------
    num, den : array_like or Polynomial
        Coefficients in descending powers of s.  The denominator is
        normalized to monic form, scaling the numerator accordingly.
    r : int, optional
        Declared relative degree.  When ``r > 1`` the first ``r - 1`` entries
        of the padded numerator must be exactly zero; models produced by the
        projection and truncation routines carry their target ``r`` here.
        Defaults to the actual relative degree of the stored coefficients.
    """

    __slots__ = ("r",)

    def __init__(self, num, den, r: int | None = None):
        super().__init__(num, den)
        actual = self.n - self.num.degree
        if r is None:
            r = actual
        if not 1 <= r <= self.n:
            raise ValueError("relative degree must lie in [1, n]")
        if r > actual:
            raise ValueError(
                "declared relative degree %d requires the %d leading numerator "
                "coefficients to be zero" % (r, r - 1)
            )
        self.r = int(r)

    @classmethod
    def from_theta(cls, theta, r: int = 1) -> "CtModel":
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.size % 2:
            raise ValueError("parameter vector must be 1-d of even length")
        n = theta.size // 2
        return cls(theta[:n], np.concatenate([[1.0], theta[n:]]), r=r)

    def __repr__(self):
        return "CtModel(num=%s, den=%s, r=%d)" % (
            self.num.coeffs.tolist(), self.den.coeffs.tolist(), self.r)


class DtModel(_RationalModel):
    """Strictly proper discrete-time transfer function sampled at period ``h``."""

    __slots__ = ("h",)

    def __init__(self, num, den, h: float):
        super().__init__(num, den)
        h = float(h)
        if not h > 0:
            raise ValueError("sampling period must be positive")
        self.h = h

    @classmethod
    def from_theta(cls, theta, h: float) -> "DtModel":
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.size % 2:
            raise ValueError("parameter vector must be 1-d of even length")
        n = theta.size // 2
        return cls(theta[:n], np.concatenate([[1.0], theta[n:]]), h=h)

    def __repr__(self):
        return "DtModel(num=%s, den=%s, h=%g)" % (
            self.num.coeffs.tolist(), self.den.coeffs.tolist(), self.h)


@dataclass(frozen=True)
class StateSpace:
    """State-space realization ``(A, B, C, D)`` with a domain tag.

    ``domain`` is ``"ct"`` or ``"dt"``; discrete realizations carry their
    sampling period in ``h``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    domain: str
    h: float | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float).reshape(A.shape[0], -1)
        C = np.asarray(self.C, dtype=float).reshape(-1, A.shape[0])
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", float(self.D))
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if B.shape != (A.shape[0], 1) or C.shape != (1, A.shape[0]):
            raise ValueError("B must be n-by-1 and C 1-by-n")
        if self.domain not in ("ct", "dt"):
            raise ValueError("domain must be 'ct' or 'dt'")
        if self.domain == "dt" and (self.h is None or not self.h > 0):
            raise ValueError("discrete realization needs a positive sampling period")

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class SampledDataset:
    """Input/output record sampled at a fixed period."""

    u: np.ndarray
    y: np.ndarray
    h: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "h", float(self.h))
        if u.ndim != 1 or y.ndim != 1 or u.size != y.size:
            raise ValueError("u and y must be 1-d arrays of equal length")
        if u.size < 1:
            raise ValueError("dataset must contain at least one sample")
        if not self.h > 0:
            raise ValueError("sampling period must be positive")

    @property
    def N(self) -> int:
        return int(self.u.size)


def _companion_realization(num: Polynomial, den: Polynomial):
    """Controllable canonical form with states ordered low derivative first.

    The last row of A carries the negated denominator coefficients in
    ascending order and C carries the ascending numerator coefficients.
    """
    n = den.degree
    A = np.eye(n, k=1)
    A[-1, :] = -den.coeffs[:0:-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = np.zeros((1, n))
    C[0, : num.degree + 1] = num.coeffs[::-1]
    return A, B, C, 0.0


def ct_to_ss(model: CtModel) -> StateSpace:
    """Controllable canonical realization of a continuous-time model."""
    A, B, C, D = _companion_realization(model.num, model.den)
    return StateSpace(A, B, C, D, domain="ct")


def dt_to_ss(model: DtModel) -> StateSpace:
    """Controllable canonical realization of a discrete-time model."""
    A, B, C, D = _companion_realization(model.num, model.den)
    return StateSpace(A, B, C, D, domain="dt", h=model.h)


def ss_to_numden(A, B, C, D=0.0):
    """Transfer-function coefficients of a SISO realization.

    Uses the determinant identity
    ``det(xI - A + B C) = det(xI - A) (1 + C (xI - A)^{-1} B)``,
    so ``num = poly(A - B C) - (1 - D) poly(A)``.  Only strictly proper
    results are supported; returns descending (num, den) arrays with den
    monic of length ``n + 1`` and num of length ``n``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], 1)
    C = np.asarray(C, dtype=float).reshape(1, A.shape[0])
    den = np.poly(A)
    full = np.poly(A - B @ C) - (1.0 - float(D)) * den
    if abs(full[0]) > 1e-9 * max(1.0, np.max(np.abs(full))):
        raise ValueError("realization is not strictly proper")
    return full[1:], den


def simulate_dt(model: DtModel, u) -> np.ndarray:
    """Output of a discrete-time model for input ``u``, zero initial conditions.

    Implements the difference equation of the transfer function directly;
    the first ``r`` output samples of a relative-degree ``r`` model are zero
    for inputs starting at the first sample.
    """
    u = np.asarray(u, dtype=float)
    n = model.n
    b = np.zeros(n + 1)
    b[n - model.num.degree:] = model.num.coeffs
    return lfilter(b, model.den.coeffs, u)


def l2_norm_sq(model: CtModel) -> float:
    """Squared L2 (impulse response energy) norm of a stable model.

    Solves the controllability Lyapunov equation
    ``A P + P A^T + B B^T = 0`` and returns ``C P C^T``.

    Raises
    ------
    UnstableSystem
        If any pole has nonnegative real part.
    """
    if not is_stable(model):
        raise UnstableSystem("L2 norm requires all poles strictly in the left half-plane")
    ss = ct_to_ss(model)
    P = solve_continuous_lyapunov(ss.A, -ss.B @ ss.B.T)
    val = (ss.C @ P @ ss.C.T).item()
    # tiny negative values can appear for (near-)zero numerators
    return max(val, 0.0)


def freq_response(model, omega) -> np.ndarray:
    """Frequency response on a grid of angular frequencies (rad/s).

    Continuous-time models are evaluated at ``s = j omega``, discrete-time
    models and realizations at ``z = exp(j omega h)``.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if isinstance(model, CtModel):
        pts = 1j * omega
        return model.num(pts) / model.den(pts)
    if isinstance(model, DtModel):
        pts = np.exp(1j * omega * model.h)
        return model.num(pts) / model.den(pts)
    if isinstance(model, StateSpace):
        pts = 1j * omega if model.domain == "ct" else np.exp(1j * omega * model.h)
        eye = np.eye(model.n)
        out = np.empty(pts.shape, dtype=complex)
        for k, p in enumerate(pts):
            out[k] = (model.C @ np.linalg.solve(p * eye - model.A, model.B) + model.D).item()
        return out
    raise TypeError("unsupported model type: %r" % type(model).__name__)


def poles(model) -> np.ndarray:
    """Denominator roots of a transfer-function model."""
    return model.den.roots()


def is_stable(model) -> bool:
    """Asymptotic stability: open left half-plane (ct) or open unit disc (dt)."""
    p = poles(model)
    if p.size == 0:
        return True
    if isinstance(model, DtModel):
        return bool(np.all(np.abs(p) < 1.0))
    return bool(np.all(p.real < 0.0))


def model_to_dict(model) -> dict:
    """JSON-ready dictionary form of a transfer-function model.

    Numerator coefficients are emitted unpadded, denominators monic with the
    leading one included.  Discrete-time models carry their period under
    ``"h"``; continuous-time models their declared relative degree under
    ``"r"``.
    """
    d = {"num": model.num.coeffs.tolist(), "den": model.den.coeffs.tolist()}
    if isinstance(model, DtModel):
        d["h"] = model.h
    else:
        d["r"] = model.r
    return d


def model_from_dict(d: dict):
    """Inverse of :func:`model_to_dict`."""
    if "h" in d and d["h"] is not None:
        return DtModel(d["num"], d["den"], h=d["h"])
    return CtModel(d["num"], d["den"], r=d.get("r"))
