"""Evolution-time scans: locate the times optimizing each squeezing metric.

A scan evaluates its metric on a coarse tau grid, brackets the best grid
point (the first one when the grid optimum is ambiguous within 1e-12,
which targets the first peak rather than later revivals), and refines by
golden-section search.  Scans are deterministic: identical specs yield
bitwise-identical results.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import DEFAULT_CONFIG, DEFAULT_PROTOCOL, PropagatorConfig, make_sss
from .observables import fidelity, spin_moments
from .reference import default_tau_max
from .states import make_ewss, make_twin_fock
from .operators import validate_spin

_GRID_TIE_TOL = 1e-12
_INV_PHI = (math.sqrt(5) - 1) / 2  # 1/phi
_INV_PHI_SQ = (3 - math.sqrt(5)) / 2  # 1/phi^2

# metric -> +1 maximize, -1 minimize
METRICS = {
    "fid_ewss": 1.0,
    "fid_tfs": 1.0,
    "var_z_max": 1.0,
    "var_y_min": -1.0,
}


@lru_cache(maxsize=4096)
def _cached_sss(two_j, tau, chi, gamma, axis, angle, method, tolerance, max_substeps):
    cfg = PropagatorConfig(method=method, tolerance=tolerance,
                           max_substeps=max_substeps)
    from .dynamics import TwistProtocol

    protocol = TwistProtocol(chi=chi, gamma=gamma, rotation_axis=axis,
                             rotation_angle=angle)
    return make_sss(two_j / 2, tau=tau, protocol=protocol, cfg=cfg)


def squeezed_state(j, tau, cfg: PropagatorConfig = DEFAULT_CONFIG):
    """Cached canonical squeezed state (default protocol) at time tau."""
    axis = DEFAULT_PROTOCOL.rotation_axis
    return _cached_sss(validate_spin(j), float(tau), DEFAULT_PROTOCOL.chi,
                       DEFAULT_PROTOCOL.gamma, axis,
                       DEFAULT_PROTOCOL.rotation_angle, cfg.method,
                       cfg.tolerance, int(cfg.max_substeps))


@dataclass(frozen=True)
class ScanSpec:
    """What to scan: spin, metric, window, grid size, refinement tolerance."""

    j: float
    metric: str
    tau_min: float
    tau_max: float
    n_grid: int = 512
    refine_tol: float = 1e-8

    def __post_init__(self):
        validate_spin(self.j)
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; "
                             f"choose from {sorted(METRICS)}")
        if self.metric == "fid_tfs" and abs(self.j - round(self.j)) > 1e-9:
            raise ValueError("metric fid_tfs is undefined at half-integer j "
                             "(twin-Fock requires integer J)")
        if not (0 <= self.tau_min < self.tau_max):
            raise ValueError("need 0 <= tau_min < tau_max")
        if self.n_grid < 8:
            raise ValueError("n_grid must be at least 8")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")

    @classmethod
    def auto(cls, j, metric, n_grid: int = 512) -> "ScanSpec":
        """Default window [0, 3*predicted twin-Fock time], tol 1e-6*tau_max."""
        tau_max = default_tau_max(j)
        return cls(j=j, metric=metric, tau_min=0.0, tau_max=tau_max,
                   n_grid=n_grid, refine_tol=1e-6 * tau_max)

    def to_json_dict(self) -> dict:
        return {
            "j": self.j,
            "metric": self.metric,
            "tau_min": self.tau_min,
            "tau_max": self.tau_max,
            "n_grid": self.n_grid,
            "refine_tol": self.refine_tol,
        }

    @classmethod
    def from_json_dict(cls, record: dict) -> "ScanSpec":
        return cls(j=float(record["j"]), metric=record["metric"],
                   tau_min=float(record["tau_min"]),
                   tau_max=float(record["tau_max"]),
                   n_grid=int(record["n_grid"]),
                   refine_tol=float(record["refine_tol"]))


@dataclass(frozen=True, eq=False)
class ScanResult:
    spec: ScanSpec
    grid_taus: np.ndarray
    grid_values: np.ndarray
    tau_star: float
    value_star: float

    def __post_init__(self):
        if not self.spec.tau_min <= self.tau_star <= self.spec.tau_max:
            raise ValueError("tau_star fell outside the scan window")
        sign = METRICS[self.spec.metric]
        if sign * self.value_star < np.max(sign * np.asarray(self.grid_values)) - _GRID_TIE_TOL:
            raise ValueError("refined optimum is worse than the best grid sample")
        for name in ("grid_taus", "grid_values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "grid_taus": [float(t) for t in self.grid_taus],
            "grid_values": [float(v) for v in self.grid_values],
            "tau_star": self.tau_star,
            "value_star": self.value_star,
        }

    @classmethod
    def from_json_dict(cls, record: dict) -> "ScanResult":
        return cls(spec=ScanSpec.from_json_dict(record["spec"]),
                   grid_taus=np.asarray(record["grid_taus"], dtype=float),
                   grid_values=np.asarray(record["grid_values"], dtype=float),
                   tau_star=float(record["tau_star"]),
                   value_star=float(record["value_star"]))


def _metric_function(spec: ScanSpec, cfg: PropagatorConfig):
    if spec.metric == "fid_ewss":
        target = make_ewss(spec.j)
        return lambda tau: fidelity(target, squeezed_state(spec.j, tau, cfg))
    if spec.metric == "fid_tfs":
        target = make_twin_fock(spec.j)
        return lambda tau: fidelity(target, squeezed_state(spec.j, tau, cfg))
    if spec.metric == "var_z_max":
        return lambda tau: math.sqrt(
            spin_moments(squeezed_state(spec.j, tau, cfg)).variance_z
        )
    if spec.metric == "var_y_min":
        return lambda tau: math.sqrt(
            spin_moments(squeezed_state(spec.j, tau, cfg)).variance_y
        )
    raise ValueError(f"unknown metric {spec.metric!r}")


def _golden_section(f, lo, hi, tol, sign):
    """Deterministic golden-section optimization of sign*f on [lo, hi]."""
    a, b = lo, hi
    h = b - a
    if h <= tol:
        return (a + b) / 2
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc = sign * f(c)
    yd = sign * f(d)
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI_SQ * h
            yc = sign * f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = sign * f(d)
    return (a + d) / 2 if yc > yd else (c + b) / 2


def scan_tau(spec: ScanSpec, cfg: PropagatorConfig = DEFAULT_CONFIG) -> ScanResult:
    """Coarse grid plus golden-section refinement of one metric."""
    f = _metric_function(spec, cfg)
    sign = METRICS[spec.metric]
    taus = np.linspace(spec.tau_min, spec.tau_max, spec.n_grid)
    values = np.array([f(t) for t in taus])
    signed = sign * values
    best = float(signed.max())
    idx = int(np.nonzero(signed >= best - _GRID_TIE_TOL)[0][0])
    lo = taus[max(idx - 1, 0)]
    hi = taus[min(idx + 1, spec.n_grid - 1)]
    tau_ref = _golden_section(f, lo, hi, spec.refine_tol, sign)
    val_ref = f(tau_ref)
    # refinement must never lose to the best coarse sample
    if sign * val_ref >= signed[idx]:
        tau_star, value_star = float(tau_ref), float(val_ref)
    else:
        tau_star, value_star = float(taus[idx]), float(values[idx])
    return ScanResult(spec=spec, grid_taus=taus, grid_values=values,
                      tau_star=tau_star, value_star=value_star)


@dataclass(frozen=True)
class SweepRow:
    j: float
    metric: str
    tau_star: float
    value_star: float
    grid_size: int
    refine_tol: float
    status: str  # "ok" or "failed"
    error: str = None
    result: ScanResult = None

    def to_csv_dict(self) -> dict:
        return {
            "j": self.j,
            "metric": self.metric,
            "tau_star": self.tau_star,
            "value_star": self.value_star,
            "grid_size": self.grid_size,
            "tol": self.refine_tol,
            "status": self.status,
        }


def _run_row(j, metric, cfg, n_grid) -> SweepRow:
    try:
        spec = ScanSpec.auto(j, metric, n_grid=n_grid)
        res = scan_tau(spec, cfg)
        return SweepRow(j=j, metric=metric, tau_star=res.tau_star,
                        value_star=res.value_star, grid_size=n_grid,
                        refine_tol=spec.refine_tol, status="ok", result=res)
    except Exception as exc:  # row failures are recorded, never silent
        return SweepRow(j=j, metric=metric, tau_star=math.nan,
                        value_star=math.nan, grid_size=n_grid,
                        refine_tol=math.nan, status="failed", error=str(exc))


def scaling_sweep(j_list, metrics, cfg: PropagatorConfig = DEFAULT_CONFIG,
                  n_grid: int = 512, workers: int = 1):
    """Run scan_tau for every (j, metric) pair, in input order.

    Rows either complete or are explicitly marked failed.  With
    workers > 1 the rows run on a thread pool; aggregation order stays
    fixed by the input order.
    """
    j_list = list(j_list)
    metrics = list(metrics)
    if not j_list or not metrics:
        raise ValueError("j_list and metrics must be nonempty")
    pairs = [(j, m) for j in j_list for m in metrics]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda jm: _run_row(*jm, cfg, n_grid), pairs))
    else:
        rows = [_run_row(j, m, cfg, n_grid) for j, m in pairs]
    return rows
