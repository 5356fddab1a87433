"""Monte Carlo summaries, verification rows and their JSON/CSV forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

SCHEMA = "estimate-report/1"
Z95 = 1.96

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


def _plain(value: Any) -> Any:
    """JSON-safe form of numpy scalars, Fractions and nested containers."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class EstimateReport:
    quantity: str
    params: dict[str, Any]
    samples: int
    mean: float
    variance: float
    seed: int
    stream_start: int = 0
    extras: dict[str, Any] = field(default_factory=dict)
    wall_time: float | None = None

    @classmethod
    def from_values(cls, quantity: str, params: dict, values, seed: int, stream_start: int = 0, **extras) -> "EstimateReport":
        x = np.asarray(values, dtype=np.float64)
        n = x.size
        mean = float(x.mean()) if n else math.nan
        var = float(((x - mean) ** 2).sum() / (n - 1)) if n > 1 else 0.0
        return cls(quantity, dict(params), n, mean, var, seed, stream_start, dict(extras))

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.samples) if self.samples else math.nan

    @property
    def ci95(self) -> tuple[float, float]:
        half = Z95 * self.stderr
        return self.mean - half, self.mean + half

    def merge(self, other: "EstimateReport") -> "EstimateReport":
        """Combine reports over disjoint stream ranges (pairwise update of mean and M2)."""
        n1, n2 = self.samples, other.samples
        n = n1 + n2
        delta = other.mean - self.mean
        mean = self.mean + delta * n2 / n
        m2 = self.variance * (n1 - 1) + other.variance * (n2 - 1) + delta * delta * n1 * n2 / n
        return EstimateReport(
            self.quantity, dict(self.params), n, mean, m2 / (n - 1) if n > 1 else 0.0,
            self.seed, min(self.stream_start, other.stream_start), dict(self.extras),
        )

    def to_dict(self, *, timing: bool = False) -> dict:
        lo, hi = self.ci95
        out = {
            "schema": SCHEMA,
            "quantity": self.quantity,
            "params": _plain(self.params),
            "samples": self.samples,
            "mean": self.mean,
            "variance": self.variance,
            "stderr": self.stderr,
            "ci95": [lo, hi],
            "seed": self.seed,
            "stream_start": self.stream_start,
            "extras": _plain(self.extras),
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, *, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing=timing), sort_keys=True, indent=2)

    def summary(self) -> str:
        lo, hi = self.ci95
        return (f"{self.quantity} mean={self.mean:.6g} stderr={self.stderr:.3g} "
                f"ci95=[{lo:.6g}, {hi:.6g}] n={self.samples} seed={self.seed}")


@dataclass
class Check:
    """One verified inequality or identity."""

    name: str
    status: str
    observed: Any = None
    bound: Any = None
    stderr: float | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return _plain({
            "name": self.name, "status": self.status, "observed": self.observed,
            "bound": self.bound, "stderr": self.stderr, "detail": self.detail,
        })

    def line(self) -> str:
        return f"{self.status:<12} {self.name}: observed={_plain(self.observed)} bound={_plain(self.bound)} {self.detail}".rstrip()


def check_at_least(name: str, mean: float, stderr: float, bound: float, z: float = 3.0, detail: str = "") -> Check:
    """``mean >= bound`` at desk scale: PASS clear by ``z`` stderr, FAIL clear on the wrong side."""
    if mean - z * stderr >= bound:
        status = PASS
    elif mean + z * stderr < bound:
        status = FAIL
    else:
        status = INCONCLUSIVE
    return Check(name, status, mean, bound, stderr, detail)


def check_at_most(name: str, mean: float, stderr: float, bound: float, z: float = 3.0, detail: str = "") -> Check:
    if mean + z * stderr <= bound:
        status = PASS
    elif mean - z * stderr > bound:
        status = FAIL
    else:
        status = INCONCLUSIVE
    return Check(name, status, mean, bound, stderr, detail)


def check_true(name: str, ok: bool, observed: Any = None, bound: Any = None, detail: str = "") -> Check:
    return Check(name, PASS if ok else FAIL, observed, bound, None, detail)


def reports_to_csv(reports: Iterable[EstimateReport]) -> str:
    rows = [r.to_dict() for r in reports]
    param_keys = sorted({k for r in rows for k in r["params"]})
    extra_keys = sorted({k for r in rows for k in r["extras"]})
    header = ["schema", "quantity", *param_keys, "samples", "mean", "variance", "stderr",
              "ci95_low", "ci95_high", "seed", "stream_start", *extra_keys]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([
            r["schema"], r["quantity"], *[r["params"].get(k, "") for k in param_keys],
            r["samples"], repr(r["mean"]), repr(r["variance"]), repr(r["stderr"]),
            repr(r["ci95"][0]), repr(r["ci95"][1]), r["seed"], r["stream_start"],
            *[json.dumps(r["extras"][k]) if isinstance(r["extras"].get(k), (list, dict)) else r["extras"].get(k, "")
              for k in extra_keys],
        ])
    return buf.getvalue()


def checks_to_csv(checks: Iterable[Check]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["name", "status", "observed", "bound", "stderr", "detail"])
    for c in checks:
        d = c.to_dict()
        writer.writerow([d["name"], d["status"], d["observed"], d["bound"], d["stderr"], d["detail"]])
    return buf.getvalue()
