"""Rate-region boundary sweep, Pareto filter, and baselines.

The achievable-region boundary is traced by sweeping the per-node delivered
powers (z1, z2) over their feasible boxes and evaluating

    r1 = log2(1 + z2 / (sigma2 + beta * G1(z1)))
    r2 = log2(1 + z1 / (sigma2 + beta * G2(z2)))

where G_i is each node's minimal self-leakage at delivered power z_i.  Every
point of that sweep is achievable, and every Pareto-optimal rate pair appears
in it, so filtering the swept grid to its non-dominated subset approximates
the Pareto boundary to grid resolution.  G_i is evaluated once per grid value
(n1 + n2 solver calls, not n1 * n2); grid evaluations are independent and
could run in parallel, with the output order fixed by grid index.

The module also provides the half-duplex TDMA segment, the equal-rate point,
and a random-covariance domination oracle that checks no sampled achievable
pair escapes a computed curve.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .beamform import DecoupledProblem, min_leakage
from .channel import ChannelSet
from .rates import RatePoint, rate_pair, single_link_max

CSV_HEADER = "r1,r2,z1,z2,label"
_FMT = ".12g"


@dataclass(frozen=True)
class SweepGrid:
    """Grid over the feasible (z1, z2) box."""

    n1: int
    n2: int
    z1_max: float
    z2_max: float

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid sizes must be >= 2")
        if self.z1_max < 0 or self.z2_max < 0:
            raise ValueError("z ranges must be nonnegative")

    @classmethod
    def for_channel(cls, ch: ChannelSet, n1: int, n2: int | None = None) -> "SweepGrid":
        return cls(n1=n1, n2=n2 if n2 is not None else n1,
                   z1_max=ch.p1 * float(np.linalg.norm(ch.h12)) ** 2,
                   z2_max=ch.p2 * float(np.linalg.norm(ch.h21)) ** 2)

    def z1_values(self) -> np.ndarray:
        return np.linspace(0.0, self.z1_max, self.n1)

    def z2_values(self) -> np.ndarray:
        return np.linspace(0.0, self.z2_max, self.n2)


@dataclass(frozen=True)
class BoundaryCurve:
    """Pareto-filtered rate points sorted by r1 ascending, plus metadata."""

    points: list[RatePoint]
    metadata: dict = field(default_factory=dict)

    def r1_array(self) -> np.ndarray:
        return np.array([p.r1 for p in self.points])

    def r2_array(self) -> np.ndarray:
        return np.array([p.r2 for p in self.points])


def channel_fingerprint(ch: ChannelSet) -> str:
    """Short stable hash of the channel data, for curve provenance."""
    h = hashlib.sha256()
    for v in (ch.h11, ch.h12, ch.h21, ch.h22):
        h.update(np.ascontiguousarray(v).tobytes())
    h.update(json.dumps([ch.p1, ch.p2, ch.frontend.beta, ch.frontend.sigma2]).encode())
    return h.hexdigest()[:16]


def node_problem(ch: ChannelSet, node: int, z: float) -> DecoupledProblem:
    """The decoupled leakage problem of one node at delivered power z."""
    if node == 1:
        return DecoupledProblem(h_self=ch.h11, h_cross=ch.h12, p=ch.p1, z=z)
    if node == 2:
        return DecoupledProblem(h_self=ch.h22, h_cross=ch.h21, p=ch.p2, z=z)
    raise ValueError("node must be 1 or 2")


def sweep_rate_point(ch: ChannelSet, z1: float, z2: float,
                     leakage1: float | None = None,
                     leakage2: float | None = None) -> RatePoint:
    """Rate pair on the sweep surface at coordinates (z1, z2).

    The minimal leakages may be passed in when already known (the grid sweep
    computes each once per z value).
    """
    if leakage1 is None:
        leakage1 = min_leakage(node_problem(ch, 1, z1))
    if leakage2 is None:
        leakage2 = min_leakage(node_problem(ch, 2, z2))
    sigma2 = ch.frontend.sigma2
    beta = ch.frontend.beta
    r1 = float(np.log2(1.0 + z2 / (sigma2 + beta * leakage1)))
    r2 = float(np.log2(1.0 + z1 / (sigma2 + beta * leakage2)))
    return RatePoint(r1=r1, r2=r2, z1=float(z1), z2=float(z2), label="optimal")


def pareto_filter(points: list[RatePoint]) -> list[RatePoint]:
    """Maximal subset under componentwise domination, r1 ascending.

    Sort by r1 descending (r2 descending on ties), keep points whose r2
    strictly exceeds the running maximum, reverse.  Duplicates collapse to
    one point; the result is an antichain with r2 strictly decreasing.
    """
    ordered = sorted(points, key=lambda p: (-p.r1, -p.r2))
    kept: list[RatePoint] = []
    best_r2 = -np.inf
    for p in ordered:
        if p.r2 > best_r2:
            kept.append(p)
            best_r2 = p.r2
    kept.reverse()
    return kept


def boundary(ch: ChannelSet, grid: SweepGrid) -> BoundaryCurve:
    """Pareto boundary of the achievable region, to grid resolution."""
    z1s = grid.z1_values()
    z2s = grid.z2_values()
    leak1 = np.array([min_leakage(node_problem(ch, 1, z)) for z in z1s])
    leak2 = np.array([min_leakage(node_problem(ch, 2, z)) for z in z2s])
    sigma2 = ch.frontend.sigma2
    beta = ch.frontend.beta
    r1 = np.log2(1.0 + z2s[None, :] / (sigma2 + beta * leak1[:, None]))
    r2 = np.log2(1.0 + z1s[:, None] / (sigma2 + beta * leak2[None, :]))
    points = [
        RatePoint(r1=float(r1[i, j]), r2=float(r2[i, j]),
                  z1=float(z1s[i]), z2=float(z2s[j]), label="optimal")
        for i in range(grid.n1) for j in range(grid.n2)
    ]
    meta = {
        "channel": channel_fingerprint(ch),
        "grid": {"n1": grid.n1, "n2": grid.n2,
                 "z1_max": grid.z1_max, "z2_max": grid.z2_max},
        "beta": beta,
        "sigma2": sigma2,
        "tolerances": {"loading_bisect_rel": 1e-12, "constraint_rel": 1e-8},
    }
    return BoundaryCurve(points=pareto_filter(points), metadata=meta)


def tdma_boundary(ch: ChannelSet, n: int) -> BoundaryCurve:
    """Half-duplex time-sharing segment between the two one-way maxima.

    Each slot carries one direction at its own full power (no boosting
    across slots), so the segment joins the same axis intercepts as the
    full-duplex curves.
    """
    if n < 2:
        raise ValueError("need at least the two endpoints")
    r1_max = single_link_max(ch, 1)
    r2_max = single_link_max(ch, 2)
    ts = np.linspace(0.0, 1.0, n)
    points = [RatePoint(r1=float(t * r1_max), r2=float((1.0 - t) * r2_max),
                        label="tdma") for t in ts]
    meta = {"channel": channel_fingerprint(ch), "n": n,
            "r1_max": r1_max, "r2_max": r2_max}
    return BoundaryCurve(points=points, metadata=meta)


def equal_rate_point(curve: BoundaryCurve) -> RatePoint:
    """Crossing of the curve with the r1 = r2 diagonal.

    Linear interpolation between the bracketing points; when the curve does
    not cross the diagonal, the point maximizing min(r1, r2).
    """
    pts = curve.points
    if not pts:
        raise ValueError("empty curve")
    diffs = [p.r1 - p.r2 for p in pts]
    for k in range(len(pts) - 1):
        d0, d1 = diffs[k], diffs[k + 1]
        if d0 == 0.0:
            return pts[k]
        if d0 < 0.0 <= d1:
            t = d0 / (d0 - d1)
            a, b = pts[k], pts[k + 1]
            z1 = a.z1 + t * (b.z1 - a.z1) if a.z1 is not None and b.z1 is not None else None
            z2 = a.z2 + t * (b.z2 - a.z2) if a.z2 is not None and b.z2 is not None else None
            return RatePoint(r1=a.r1 + t * (b.r1 - a.r1),
                             r2=a.r2 + t * (b.r2 - a.r2),
                             z1=z1, z2=z2, label=pts[k].label)
    if diffs[-1] == 0.0:
        return pts[-1]
    return max(pts, key=lambda p: min(p.r1, p.r2))


def interpolated_r2(curve: BoundaryCurve, r1: np.ndarray | float) -> np.ndarray | float:
    """Piecewise-linear r2 of the curve at given r1 (clamped at the ends)."""
    return np.interp(r1, curve.r1_array(), curve.r2_array())


def interpolated_r1(curve: BoundaryCurve, r2: np.ndarray | float) -> np.ndarray | float:
    """Piecewise-linear r1 of the curve at given r2 (clamped at the ends)."""
    # r2 decreases along the curve; np.interp needs ascending abscissae
    return np.interp(r2, curve.r2_array()[::-1], curve.r1_array()[::-1])


def grid_slack(curve: BoundaryCurve) -> tuple[float, float]:
    """Half the largest adjacent gap in each rate coordinate.

    A finite sweep can miss the true boundary by up to the local spacing;
    containment and domination checks widen their tolerance by this much.
    """
    r1 = curve.r1_array()
    r2 = curve.r2_array()
    if r1.size < 2:
        return 0.0, 0.0
    return (float(np.max(np.abs(np.diff(r1)))) / 2.0,
            float(np.max(np.abs(np.diff(r2)))) / 2.0)


def curve_dominates(upper: BoundaryCurve, lower: BoundaryCurve,
                    slack: float = 0.0) -> bool:
    """True if `upper` componentwise dominates every point of `lower`.

    Compares each lower point against the upper curve interpolated at its
    r1, allowing `slack` plus the interpolation resolution of both curves.
    """
    s1_u, s2_u = grid_slack(upper)
    s1_l, s2_l = grid_slack(lower)
    tol = slack + s2_u + s2_l
    r1_l = lower.r1_array()
    r2_l = lower.r2_array()
    # beyond upper's r1 reach, only the r1 slack can excuse the overhang
    r1_reach = upper.r1_array()[-1] + s1_u + s1_l + slack
    if np.any(r1_l > r1_reach):
        return False
    return bool(np.all(interpolated_r2(upper, r1_l) >= r2_l - tol))


@dataclass(frozen=True)
class OracleReport:
    """Outcome of the random-covariance domination check."""

    samples: int
    max_violation: float
    tolerance: float
    slack1: float
    slack2: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"samples": self.samples, "max_violation": self.max_violation,
                "tolerance": self.tolerance, "slack1": self.slack1,
                "slack2": self.slack2, "violations": self.violations,
                "passed": self.passed}


def domination_oracle(ch: ChannelSet, curve: BoundaryCurve, samples: int,
                      seed: int, tolerance: float = 1e-6) -> OracleReport:
    """Check random achievable rate pairs against a computed curve.

    Draws random PSD covariance pairs (Gram matrices scaled to a uniform
    fraction of the power budgets), computes their rate pair, and measures
    how far each escapes the curve after allowing per-axis grid slack.  The
    violation of a sample is min over curve points of
    max(r1 - c1 - slack1, r2 - c2 - slack2); a positive value beyond
    `tolerance` counts as a violation.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    m = ch.m
    slack1, slack2 = grid_slack(curve)
    c1 = curve.r1_array() + slack1
    c2 = curve.r2_array() + slack2

    rates = np.empty((samples, 2))
    for k in range(samples):
        qs = []
        for p_budget in (ch.p1, ch.p2):
            g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            q = g @ g.conj().T
            q *= float(rng.uniform(0.0, 1.0)) * p_budget / float(np.trace(q).real)
            qs.append(q)
        pt = rate_pair(ch, qs[0], qs[1], label="sampled")
        rates[k] = (pt.r1, pt.r2)

    # escape distance per sample: min over curve points of max(d1, d2),
    # vectorized in chunks to bound the broadcast size
    max_violation = -np.inf
    violations = 0
    for start in range(0, samples, 2048):
        block = rates[start:start + 2048]
        d1 = block[:, None, 0] - c1[None, :]
        d2 = block[:, None, 1] - c2[None, :]
        viol = np.maximum(d1, d2).min(axis=1)
        max_violation = max(max_violation, float(viol.max()))
        violations += int(np.count_nonzero(viol > tolerance))

    return OracleReport(samples=samples, max_violation=max_violation,
                        tolerance=tolerance, slack1=slack1, slack2=slack2,
                        violations=violations)


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, _FMT)


def curve_to_csv(curve: BoundaryCurve) -> str:
    """Render a curve as CSV with 12-significant-digit fields."""
    lines = [CSV_HEADER]
    for p in curve.points:
        lines.append(",".join([_fmt(p.r1), _fmt(p.r2), _fmt(p.z1), _fmt(p.z2),
                               p.label]))
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str) -> BoundaryCurve:
    """Parse a curve written by curve_to_csv."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"expected header {CSV_HEADER!r}")
    points = []
    for ln in lines[1:]:
        r1, r2, z1, z2, label = ln.split(",")
        points.append(RatePoint(r1=float(r1), r2=float(r2),
                                z1=float(z1) if z1 else None,
                                z2=float(z2) if z2 else None,
                                label=label))
    return BoundaryCurve(points=points)


def curve_to_json(curve: BoundaryCurve) -> str:
    """Curve points plus metadata as a deterministic JSON document."""
    doc = {
        "metadata": curve.metadata,
        "points": [
            {"r1": p.r1, "r2": p.r2, "z1": p.z1, "z2": p.z2, "label": p.label}
            for p in curve.points
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
