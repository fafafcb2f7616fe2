"""Zero-order-hold sampling: discretization, its inverse, and its Jacobian.

The map between continuous-time and discrete-time parameter vectors induced
by zero-order-hold (step-invariant) sampling is the backbone of the indirect
identification route implemented by this package.  Both directions are
computed through state-space realizations:

- forward: augmented matrix exponential ``expm([[A, B], [0, 0]] h)``;
- inverse: principal matrix logarithm ``A = logm(Ad) / h`` followed by the
  input-map solve ``(integral of expm(A t) over one period) B = Bd``.

The inverse is well defined only when no discrete-time pole lies on the
closed negative real axis; offending models raise :class:`NonPrincipalLog`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import expm, logm

from .errors import DegenerateMap, NonPrincipalLog, SingularMap
from .lti import (
    CtModel,
    DtModel,
    SampledDataset,
    ct_to_ss,
    dt_to_ss,
    simulate_dt,
    ss_to_numden,
)

__all__ = [
    "NoiseSpec",
    "ZohMapPoint",
    "c2d_zoh",
    "d2c_zoh",
    "naive_truncate",
    "zoh_jacobian",
    "zoh_map_point",
    "simulate_ct_zoh",
    "sigma_for_snr_db",
    "save_dataset",
    "load_dataset",
]


@dataclass(frozen=True)
class NoiseSpec:
    """Additive output noise: iid zero-mean Gaussian with given deviation."""

    sigma: float
    seed: int

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class ZohMapPoint:
    """Linearization point of the sampling map.

    ``theta_d = c2d(theta_c, h)`` and ``J`` is the Jacobian of that map at
    ``theta_c``, both in the shared parameter-vector layout.
    """

    theta_c: np.ndarray
    h: float
    theta_d: np.ndarray
    J: np.ndarray


def c2d_zoh(model: CtModel, h: float) -> DtModel:
    """Step-invariant (zero-order-hold) discretization.

    The discrete model produces, at the sample instants, exactly the output
    of ``model`` driven by the staircase input.  Generically the result has
    relative degree one regardless of the relative degree of ``model``.
    """
    h = float(h)
    if not h > 0:
        raise ValueError("sampling period must be positive")
    ss = ct_to_ss(model)
    n = ss.n
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = ss.A
    aug[:n, n:] = ss.B
    E = expm(aug * h)
    num, den = ss_to_numden(E[:n, :n], E[:n, n:], ss.C, 0.0)
    return DtModel(num, den, h)


def d2c_zoh(model: DtModel) -> CtModel:
    """Inverse of :func:`c2d_zoh` through the principal matrix logarithm.

    Raises
    ------
    NonPrincipalLog
        If a pole of ``model`` lies on the closed negative real axis
        (including the origin), where no principal real logarithm exists,
        or if the logarithm cannot be evaluated reliably.
    SingularMap
        If the zero-order-hold input map is not invertible at this period.
    """
    zp = model.den.roots()
    for z in zp:
        if abs(z) <= 1e-12 or (z.real <= 0.0 and abs(z.imag) <= 1e-9 * max(1.0, abs(z))):
            raise NonPrincipalLog(
                "discrete-time pole %s lies on the closed negative real axis" % z)
    ss = dt_to_ss(model)
    n = ss.n
    h = model.h
    L = logm(ss.A)
    if np.abs(L.imag).max() > 1e-8 * max(1.0, np.abs(L.real).max()):
        raise NonPrincipalLog("matrix logarithm has a nontrivial imaginary part")
    A = L.real / h
    if np.abs(expm(A * h) - ss.A).max() > 1e-6 * max(1.0, np.abs(ss.A).max()):
        raise NonPrincipalLog("matrix logarithm evaluation failed to invert the exponential")
    # input map: Gamma B = Bd with Gamma the integral of expm(A t) over [0, h]
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = A
    aug[:n, n:] = np.eye(n)
    gamma = expm(aug * h)[:n, n:]
    if np.linalg.cond(gamma) > 1e12:
        raise SingularMap("zero-order-hold input map is singular at this sampling period")
    B = np.linalg.solve(gamma, ss.B)
    num, den = ss_to_numden(A, B, ss.C, 0.0)
    return CtModel(num, den, r=1)


def naive_truncate(model: CtModel, r: int) -> CtModel:
    """Zero the leading ``r - 1`` numerator parameters, leaving the rest alone.

    This is the crude way of enforcing relative degree ``r``; it ignores the
    correlation structure of the estimate and serves as the linearization
    point for the statistically weighted projection.
    """
    if not 1 <= r <= model.n:
        raise ValueError("relative degree must lie in [1, n]")
    th = model.theta.copy()
    th[: r - 1] = 0.0
    return CtModel.from_theta(th, r=r)


def zoh_jacobian(theta_c, h: float) -> np.ndarray:
    """Jacobian of the sampling map ``theta_c -> theta_d`` at ``theta_c``.

    Central finite differences with per-coordinate steps
    ``eps**(1/3) * max(1, |theta_c[i]|)``, the usual accuracy/rounding
    compromise for second-order differencing.

    Raises
    ------
    DegenerateMap
        If the map cannot be evaluated, or returns non-finite values, at one
        of the probe points.
    """
    theta_c = np.asarray(theta_c, dtype=float)
    if theta_c.ndim != 1 or theta_c.size % 2 or theta_c.size < 2:
        raise ValueError("parameter vector must be 1-d of even length")
    m = theta_c.size
    step_scale = np.finfo(float).eps ** (1.0 / 3.0)
    J = np.empty((m, m))
    for i in range(m):
        step = step_scale * max(1.0, abs(theta_c[i]))
        up = theta_c.copy()
        dn = theta_c.copy()
        up[i] += step
        dn[i] -= step
        try:
            f_up = c2d_zoh(CtModel.from_theta(up), h).theta
            f_dn = c2d_zoh(CtModel.from_theta(dn), h).theta
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise DegenerateMap("sampling map failed near the requested point: %s" % exc) from exc
        J[:, i] = (f_up - f_dn) / (2.0 * step)
    if not np.all(np.isfinite(J)):
        raise DegenerateMap("sampling map returned non-finite values")
    return J


def zoh_map_point(theta_c, h: float) -> ZohMapPoint:
    """Evaluate the sampling map and its Jacobian at one point."""
    theta_c = np.asarray(theta_c, dtype=float)
    theta_d = c2d_zoh(CtModel.from_theta(theta_c), h).theta
    J = zoh_jacobian(theta_c, h)
    return ZohMapPoint(theta_c=theta_c.copy(), h=float(h), theta_d=theta_d, J=J)


def simulate_ct_zoh(model: CtModel, u, h: float, noise: NoiseSpec) -> SampledDataset:
    """Sampled response of a continuous-time system to a staircase input.

    The noiseless output is exact at the sample instants (step invariance);
    measurement noise is then added from a generator seeded by
    ``noise.seed``, so identical arguments give bitwise identical data.
    """
    y = simulate_dt(c2d_zoh(model, h), u)
    rng = np.random.default_rng(noise.seed)
    y_m = y + noise.sigma * rng.standard_normal(y.size)
    return SampledDataset(u=np.asarray(u, dtype=float), y=y_m, h=h)


def sigma_for_snr_db(y, snr_db: float) -> float:
    """Noise deviation giving the requested signal-to-noise ratio.

    The convention is ``SNR = 10 log10(var(y) / sigma^2)`` with the
    population variance of the noiseless output record ``y``.
    """
    y = np.asarray(y, dtype=float)
    return float(np.sqrt(np.var(y) / 10.0 ** (snr_db / 10.0)))


def save_dataset(ds: SampledDataset, path, sigma=None, seed=None, system=None):
    """Write a dataset as ``k,t,u,y`` CSV plus a JSON sidecar of metadata.

    Floats are written in shortest round-trip form.  The sidecar (same stem,
    ``.json`` extension) records ``h``, ``N`` and, when given, the noise
    deviation, seed and true-system coefficients.
    """
    path = Path(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["k", "t", "u", "y"])
        for k in range(ds.N):
            w.writerow([k, repr(k * ds.h), repr(float(ds.u[k])), repr(float(ds.y[k]))])
    meta = {"h": ds.h, "N": ds.N, "sigma": sigma, "seed": seed, "system": system}
    with open(path.with_suffix(".json"), "w") as f:
        json.dump(meta, f, indent=1)
        f.write("\n")


def load_dataset(path):
    """Inverse of :func:`save_dataset`; returns ``(dataset, metadata)``."""
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, usecols=(2, 3), ndmin=2)
    with open(path.with_suffix(".json")) as f:
        meta = json.load(f)
    ds = SampledDataset(u=data[:, 0], y=data[:, 1], h=float(meta["h"]))
    return ds, meta
