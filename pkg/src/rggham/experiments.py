"""Monte Carlo trial farm and the limiting-law comparison.

Each trial draws its own substream from (master_seed, trial_index), so the
records are identical whatever the worker count or completion order.  The
CSV schema is fixed and versioned by its header; reruns of the same config
are byte-identical.
"""

import csv
import io
import json
import math
import multiprocessing
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .builder import BuilderConstants, build_hamilton_cycle
from .errors import CapacityError
from .geometry import NormSpec, mix_seed, sample_uniform_points
from .graph import build_edge_process
from .hitting import (Hit, connectivity_hit, hamiltonicity_hit, k_connectivity_hit,
                      min_degree_hit, x_statistic)
from .oracles import HAM_DP_MAX

CSV_HEADER = [
    "trial_index", "seed", "n", "d", "p",
    "rho_md1", "rho_md2", "rho_conn", "rho_2conn", "rho_ham",
    "flag_md2_eq_2conn", "flag_2conn_eq_ham", "flag_md2_eq_ham",
    "x_md2", "builder_status",
]


def limit_probability(x: float) -> float:
    """The limiting probability exp(-(sqrt(pi) + e^(-x/2)) * e^(-x/2)).

    Strictly increasing; tends to 0 at -inf and 1 at +inf.
    """
    if x < -1000.0:
        return 0.0
    t = math.exp(-0.5 * x)
    return math.exp(-(math.sqrt(math.pi) + t) * t)


def ks_distance(samples, cdf) -> float:
    """Sup-norm distance between the empirical CDF of samples and cdf."""
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    m = len(xs)
    if m == 0:
        raise ValueError("need at least one sample")
    f = np.array([cdf(x) for x in xs])
    hi = np.arange(1, m + 1) / m
    lo = np.arange(0, m) / m
    return float(max((hi - f).max(), (f - lo).max()))


@dataclass
class TrialConfig:
    n: int
    trials: int
    master_seed: int
    d: int = 2
    p: float = 2.0
    k_max: int = 3
    oracle_mode: str = "exact"          # exact | constructive | both
    workers: int = 1
    builder: Optional[dict] = None       # overrides for the desk profile
    out: Optional[str] = None

    def __post_init__(self):
        if self.p == "inf":
            self.p = math.inf
        self.p = float(self.p)
        if self.n < 3:
            raise ValueError("need n >= 3")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.oracle_mode not in ("exact", "constructive", "both"):
            raise ValueError(f"unknown oracle mode {self.oracle_mode!r}")
        if self.oracle_mode in ("exact", "both") and self.n > HAM_DP_MAX:
            raise CapacityError(f"exact mode needs n <= {HAM_DP_MAX}")

    @property
    def norm(self) -> NormSpec:
        return NormSpec(self.d, math.inf if self.p == "inf" else float(self.p))

    @classmethod
    def from_json(cls, path, **overrides):
        with open(path) as fh:
            data = json.load(fh)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    n: int
    d: int
    p: float
    rho_md: dict
    rho_conn: Optional[Hit]
    rho_2conn: Optional[Hit]
    rho_ham: Optional[Hit]
    x_md2: Optional[float]
    builder_status: str = ""
    error: str = ""

    @property
    def flags(self):
        md2, c2, ham = self.rho_md.get(2), self.rho_2conn, self.rho_ham
        f1 = int(md2 is not None and c2 is not None and md2.rank == c2.rank)
        f2 = int(c2 is not None and ham is not None and c2.rank == ham.rank)
        f3 = int(md2 is not None and ham is not None and md2.rank == ham.rank)
        return f1, f2, f3

    def csv_row(self):
        def fmt(x):
            return "" if x is None else repr(float(x))

        f1, f2, f3 = self.flags
        return [
            str(self.trial_index), str(self.seed), str(self.n), str(self.d),
            "inf" if math.isinf(self.p) else repr(float(self.p)),
            fmt(self.rho_md.get(1) and self.rho_md[1].radius),
            fmt(self.rho_md.get(2) and self.rho_md[2].radius),
            fmt(self.rho_conn and self.rho_conn.radius),
            fmt(self.rho_2conn and self.rho_2conn.radius),
            fmt(self.rho_ham and self.rho_ham.radius),
            str(f1), str(f2), str(f3),
            fmt(self.x_md2),
            self.builder_status,
        ]


def evaluate_point_set(points, norm: NormSpec, trial_index=0, seed=0, k_max=3,
                       oracle_mode="exact", builder_consts=None) -> TrialRecord:
    """Hitting radii, coincidence data and optional builder outcome for one
    explicit point set (the per-trial core, also usable on fixtures)."""
    n = len(points)
    proc = build_edge_process(points, norm)
    k_cap = min(k_max, n - 1)
    rho_md = {k: min_degree_hit(proc, k) for k in range(1, max(2, k_cap) + 1) if k <= n - 1}
    conn = connectivity_hit(proc)
    c2 = k_connectivity_hit(proc, 2) if n > 2 else None
    ham = None
    if oracle_mode in ("exact", "both") and 3 <= n <= HAM_DP_MAX:
        ham = hamiltonicity_hit(proc)
    x = None
    if norm.is_euclidean_plane and 2 in rho_md:
        x = x_statistic(n, rho_md[2].radius)
    status = ""
    if oracle_mode in ("constructive", "both") and c2 is not None:
        consts = builder_consts or BuilderConstants.desk(norm)
        try:
            res = build_hamilton_cycle(points, norm, c2.radius, consts)
            status = "ok" if res.success else f"fail:{res.failure.stage}"
        except ValueError as exc:
            status = f"invalid:{exc}"
    return TrialRecord(trial_index, seed, n, norm.d, norm.p, rho_md, conn, c2, ham, x, status)


def _run_one(args):
    cfg_dict, t = args
    cfg = TrialConfig(**cfg_dict)
    seed = mix_seed(cfg.master_seed, t)
    norm = cfg.norm
    pts = sample_uniform_points(cfg.n, norm, seed)
    consts = None
    if cfg.builder:
        consts = BuilderConstants.desk(norm, **cfg.builder)
    try:
        return evaluate_point_set(pts, norm, t, seed, cfg.k_max, cfg.oracle_mode, consts)
    except CapacityError as exc:
        return TrialRecord(t, seed, cfg.n, norm.d, norm.p, {}, None, None, None, None,
                           error=str(exc))


def run_trials(cfg: TrialConfig):
    """One record per trial plus summary statistics; order-independent."""
    cfg_dict = asdict(cfg)
    jobs = [(cfg_dict, t) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with multiprocessing.Pool(cfg.workers) as pool:
            records = pool.map(_run_one, jobs, chunksize=max(1, cfg.trials // (4 * cfg.workers)))
    else:
        records = [_run_one(j) for j in jobs]
    records.sort(key=lambda r: r.trial_index)
    summary = summarize(records, cfg)
    if cfg.out:
        write_csv(records, cfg.out)
    return records, summary


def summarize(records, cfg: TrialConfig) -> dict:
    ok = [r for r in records if not r.error]
    flags = np.array([r.flags for r in ok], dtype=np.float64) if ok else np.zeros((0, 3))
    xs = [r.x_md2 for r in ok if r.x_md2 is not None]
    out = {
        "trials": len(records),
        "failed_trials": len(records) - len(ok),
        "freq_md2_eq_2conn": float(flags[:, 0].mean()) if len(ok) else None,
        "freq_2conn_eq_ham": float(flags[:, 1].mean()) if len(ok) and cfg.oracle_mode != "constructive" else None,
        "freq_md2_eq_ham": float(flags[:, 2].mean()) if len(ok) and cfg.oracle_mode != "constructive" else None,
        "x_count": len(xs),
        "x_mean": float(np.mean(xs)) if xs else None,
        "ks_to_limit_law": ks_distance(xs, limit_probability) if xs else None,
    }
    if cfg.oracle_mode in ("constructive", "both"):
        out["builder_ok"] = sum(1 for r in ok if r.builder_status == "ok")
    return out


def render_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def write_csv(records, path):
    with open(path, "w", newline="") as fh:
        fh.write(render_csv(records))
