"""Scalar and distribution-valued metrics on spin states.

Includes state fidelity, the Jz probability distribution, the
coherent-state quasi-probability distribution (QPD) over the sphere,
first and second spin moments, and the Fisher-information/Cramer-Rao
field-estimation bounds derived from them.
"""

import math
from dataclasses import dataclass

import numpy as np

from .operators import build_operator, spin_dimension
from .states import SpinState, css_magnitudes


def fidelity(a: SpinState, b: SpinState) -> float:
    """|<a|b>|^2; symmetric and invariant under global phases."""
    if a.j != b.j:
        raise ValueError(f"states have different spins: {a.j} vs {b.j}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def prob_distribution(state: SpinState) -> np.ndarray:
    """P(M) = |<J,M|state>|^2, indexed like the amplitudes (descending M)."""
    amps = state.amplitudes
    return amps.real**2 + amps.imag**2


@dataclass(frozen=True)
class SpinMoments:
    mean: np.ndarray  # (<Jx>, <Jy>, <Jz>)
    variance_z: float
    variance_y: float


def spin_moments(state: SpinState) -> SpinMoments:
    """First moments of (Jx, Jy, Jz) and the variances of Jz and Jy."""
    v = state.amplitudes
    means = []
    second = {}
    for axis in ("x", "y", "z"):
        op = build_operator(state.j, "J" + axis)
        ov = op.apply(v)
        means.append(float(np.vdot(v, ov).real))
        if axis in ("y", "z"):
            second[axis] = float(np.vdot(ov, ov).real)
    mean = np.array(means)
    var_z = max(second["z"] - mean[2] ** 2, 0.0)
    var_y = max(second["y"] - mean[1] ** 2, 0.0)
    return SpinMoments(mean=mean, variance_z=var_z, variance_y=var_y)


@dataclass(frozen=True, eq=False)
class QpdGrid:
    """|<CSS(phi, theta)|state>|^2 on a uniform grid.

    phi runs over [0, 2pi) (n_phi points, half-open) and theta over
    [0, pi] (n_theta points, endpoints included).  values has shape
    (n_phi, n_theta).
    """

    j: float
    phis: np.ndarray
    thetas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (len(self.phis), len(self.thetas)):
            raise ValueError("QPD value matrix does not match the grid")
        if vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
            raise ValueError("QPD values must lie in [0, 1]")
        for name in ("phis", "thetas", "values"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_phi(self) -> int:
        return len(self.phis)

    @property
    def n_theta(self) -> int:
        return len(self.thetas)

    def value_at(self, phi, theta) -> float:
        """Value at the grid node nearest to (phi, theta)."""
        ip = int(np.argmin(np.abs((self.phis - phi + math.pi) % (2 * math.pi) - math.pi)))
        it = int(np.argmin(np.abs(self.thetas - theta)))
        return float(self.values[ip, it])

    def to_json_dict(self) -> dict:
        return {
            "j": self.j,
            "n_phi": self.n_phi,
            "n_theta": self.n_theta,
            "phi": [float(p) for p in self.phis],
            "theta": [float(t) for t in self.thetas],
            "values": [[float(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_json_dict(cls, record: dict) -> "QpdGrid":
        grid = cls(j=float(record["j"]),
                   phis=np.asarray(record["phi"], dtype=float),
                   thetas=np.asarray(record["theta"], dtype=float),
                   values=np.asarray(record["values"], dtype=float))
        if grid.n_phi != record["n_phi"] or grid.n_theta != record["n_theta"]:
            raise ValueError("QPD metadata disagrees with the value matrix")
        return grid

    def csv_rows(self):
        """Yield (phi, theta, value) in row-major phi-then-theta order."""
        for ip, phi in enumerate(self.phis):
            for it, theta in enumerate(self.thetas):
                yield float(phi), float(theta), float(self.values[ip, it])


def qpd(state: SpinState, n_phi: int = 360, n_theta: int = 180) -> QpdGrid:
    """Quasi-probability distribution of the state over the Bloch sphere.

    The overlap with CSS(phi, theta) is a polynomial in e^{-i phi} with
    theta-dependent coefficients, so each theta column is evaluated for
    all phi at once with an FFT (after folding indices modulo n_phi).
    """
    if n_phi < 2 or n_theta < 2:
        raise ValueError("grid resolutions must be at least 2")
    n = spin_dimension(state.j)
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = 2 * math.pi * np.arange(n_phi) / n_phi
    mags = css_magnitudes(state.j, thetas)  # (n, n_theta)
    weighted = mags * state.amplitudes[:, None]
    if n <= n_phi:
        folded = weighted
    else:
        pad = (-n) % n_phi
        padded = np.pad(weighted, ((0, pad), (0, 0)))
        folded = padded.reshape(-1, n_phi, n_theta).sum(axis=0)
    spectrum = np.fft.fft(folded, n=n_phi, axis=0)
    values = np.clip(np.abs(spectrum) ** 2, 0.0, 1.0)
    return QpdGrid(j=state.j, phis=phis, thetas=thetas, values=values)


@dataclass(frozen=True)
class FieldEstimationParams:
    """Gyromagnetic ratio and interrogation time for field estimation."""

    gamma_s: float
    t: float

    def __post_init__(self):
        if not (self.gamma_s > 0 and math.isfinite(self.gamma_s)):
            raise ValueError("gamma_s must be positive and finite")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError("t must be positive and finite")


@dataclass(frozen=True)
class FisherBound:
    """Upper bound on the Fisher information and the implied lower bound
    on the field standard deviation.  These are bounds, not achieved
    estimator variances."""

    fisher_upper: float
    sigma_lower: float


def fisher_bound(variance_z, params: FieldEstimationParams) -> FisherBound:
    """fisher_upper = 4 (gamma_s t)^2 <(dJz)^2>; sigma_lower = fisher_upper^{-1/2}."""
    if variance_z < 0:
        raise ValueError("variance must be nonnegative")
    fisher = 4.0 * (params.gamma_s * params.t) ** 2 * variance_z
    sigma = math.inf if fisher == 0.0 else 1.0 / math.sqrt(fisher)
    return FisherBound(fisher_upper=fisher, sigma_lower=sigma)
