"""Existence / non-existence verdicts for polyharmonic Choquard inequalities.

Scalar problems have the form ``sign * (-Lap)^m u >= (Psi * u^p) u^q`` in R^N
with ``sign`` either ``+1`` ("plus") or ``-1`` ("minus").  Systems couple n
components through a symmetric 0/1 adjacency matrix in one of two forms:

* ``cross``: ``(-Lap)^m u_i >= sum_j e_ij (Psi_ij * u_j^p_ij) u_j^q_ij``
* ``self``:  ``(-Lap)^m u_i >= sum_j e_ij (Psi_ij * u_j^p_ij) u_i^q_ij``

Every verdict lists the clauses it evaluated.  Clause ids describe the
mechanism rather than a reference number:

``minus-sign``           any solution of the minus-sign inequality vanishes
``low-dimension``        N <= 2 forces non-negative supersolutions to vanish
``tail-integral``        divergence of ``int |y|^(-p(N-2m)) Psi``
``tail-growth``          ``limsup r^(2N-(N-2m)(p+q)) Psi(r) > 0``
``riesz-region``         sharp existence region for ``Psi = r^-alpha``
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .kernels import RieszPower, check_admissible, integral_condition_ii1, kernel_from_json, tail_condition_ii2


class Status(str, enum.Enum):
    NONE = "NoNontrivialSolution"
    EXISTS = "ExistsNontrivial"
    INCONCLUSIVE = "Inconclusive"


class NodeStatus(str, enum.Enum):
    MUST_VANISH = "MustVanish"
    AT_MOST_ONE = "AtMostOneNonzero"
    UNCONSTRAINED = "Unconstrained"


class InvalidParameters(ValueError):
    pass


TRIVIAL_ONLY = "only solution (0,...,0)"
AT_MOST_ONE = "at most one nonzero component"
INDEPENDENT = "nonzero components form an independent set"
PARTIAL = "some components vanish"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Clause:
    clause: str
    condition: str
    satisfied: bool | None
    decisive: bool = False

    def to_json_dict(self) -> dict:
        return {"clause": self.clause, "condition": self.condition,
                "satisfied": self.satisfied, "decisive": self.decisive}


@dataclass
class Verdict:
    status: Status
    clauses: list[Clause]

    def to_json_dict(self) -> dict:
        return {"status": self.status.value, "clauses": [c.to_json_dict() for c in self.clauses]}


@dataclass(frozen=True)
class ProblemParams:
    N: int
    m: int
    sign: str
    kernel: object
    p: float
    q: float

    def validate(self) -> None:
        if self.N < 1 or self.m < 1:
            raise InvalidParameters("N and m must be >= 1")
        if self.sign not in ("plus", "minus"):
            raise InvalidParameters(f"sign must be 'plus' or 'minus', got {self.sign!r}")
        if not (self.p > 0 and self.q > 0):
            raise InvalidParameters("p and q must be positive")
        rep = check_admissible(self.kernel, self.N)
        if not rep.passed:
            raise InvalidParameters("kernel not admissible: " + "; ".join(rep.messages))

    @classmethod
    def from_json_dict(cls, d: dict) -> "ProblemParams":
        try:
            sign = str(d.get("sign", "plus")).lower()
            return cls(int(d["N"]), int(d["m"]), sign, kernel_from_json(d["kernel"]),
                       float(d["p"]), float(d["q"]))
        except KeyError as exc:
            raise InvalidParameters(f"missing field {exc.args[0]!r}") from None

    def to_json_dict(self) -> dict:
        return {"N": self.N, "m": self.m, "sign": self.sign, "kernel": self.kernel.to_json_dict(),
                "p": self.p, "q": self.q}


def riesz_thresholds(N: int, m: int, alpha: float) -> tuple[float, float]:
    """``((N-alpha)/(N-2m), (2N-alpha)/(N-2m))``: bounds for min(p,q) and p+q."""
    d = N - 2 * m
    return (N - alpha) / d, (2 * N - alpha) / d


def in_riesz_region(N: int, m: int, alpha: float, p: float, q: float) -> bool:
    lo, total = riesz_thresholds(N, m, alpha)
    return min(p, q) > lo and p + q > total


def classify_single(params: ProblemParams) -> Verdict:
    """Strongest verdict supported by the proven clauses."""
    params.validate()
    N, m, p, q, k = params.N, params.m, params.p, params.q, params.kernel
    clauses: list[Clause] = []
    if params.sign == "minus":
        ok = p + q >= 2 or (N > 2 * m and p >= 1)
        clauses.append(Clause("minus-sign", "p+q >= 2, or N > 2m and p >= 1", ok, ok))
        return Verdict(Status.NONE if ok else Status.INCONCLUSIVE, clauses)

    exponent_ok = p >= 1 or p + q >= 2
    if N <= 2:
        ok = exponent_ok
        clauses.append(Clause("low-dimension", "N <= 2 and (p >= 1 or p+q >= 2)", ok, ok))
        return Verdict(Status.NONE if ok else Status.INCONCLUSIVE, clauses)
    if N <= 2 * m:
        clauses.append(Clause("dimension", "N > 2m required for the remaining clauses", False))
        return Verdict(Status.INCONCLUSIVE, clauses)

    ii1 = integral_condition_ii1(k, N, m, p)
    fired = bool(exponent_ok and ii1)
    clauses.append(Clause("tail-integral",
                          "(p >= 1 or p+q >= 2) and int_{|y|>1} |y|^(-p(N-2m)) Psi(|y|) dy = inf",
                          fired if ii1 is not None else None, fired))
    ii2 = tail_condition_ii2(k, N, m, p + q)
    fired2 = bool(p + q >= 2 and ii2)
    clauses.append(Clause("tail-growth", "p+q >= 2 and limsup r^(2N-(N-2m)(p+q)) Psi(r) > 0",
                          fired2, fired2))
    if fired or fired2:
        return Verdict(Status.NONE, clauses)

    if isinstance(k, RieszPower) and p >= 1 and q > 1:
        lo, total = riesz_thresholds(N, m, k.alpha)
        if in_riesz_region(N, m, k.alpha, p, q):
            clauses.append(Clause("riesz-region",
                                  f"p >= 1, q > 1, min(p,q) > {lo:.6g} and p+q > {total:.6g}",
                                  True, True))
            return Verdict(Status.EXISTS, clauses)
        clauses.append(Clause("riesz-region",
                              f"p >= 1, q > 1 and min(p,q) <= {lo:.6g} or p+q <= {total:.6g}",
                              True, True))
        return Verdict(Status.NONE, clauses)
    clauses.append(Clause("riesz-region", "Psi = r^-alpha, p >= 1 and q > 1", False))
    return Verdict(Status.INCONCLUSIVE, clauses)


# ---------------------------------------------------------------------------
# systems


@dataclass
class SystemSpec:
    N: int
    m: int
    adjacency: np.ndarray
    p: np.ndarray
    q: np.ndarray
    kernels: list
    form: str = "cross"

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=int)
        n = self.adjacency.shape[0]
        self.p = np.broadcast_to(np.asarray(self.p, dtype=float), (n, n)).copy()
        self.q = np.broadcast_to(np.asarray(self.q, dtype=float), (n, n)).copy()
        if not isinstance(self.kernels, list) or not self.kernels or not isinstance(self.kernels[0], list):
            self.kernels = [[self.kernels] * n for _ in range(n)]

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def validate(self) -> None:
        e = self.adjacency
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 1:
            raise InvalidParameters("adjacency must be a non-empty square matrix")
        if not np.all((e == 0) | (e == 1)) or not np.array_equal(e, e.T):
            raise InvalidParameters("adjacency must be symmetric with entries in {0, 1}")
        if self.form not in ("cross", "self"):
            raise InvalidParameters("form must be 'cross' or 'self'")
        if self.N <= 2 * self.m:
            raise InvalidParameters("system verdicts require N > 2m")
        if np.any(self.p <= 0) or np.any(self.q <= 0):
            raise InvalidParameters("exponents must be positive")
        for i, j in itertools.product(range(self.n), repeat=2):
            if e[i, j] and not check_admissible(self.kernels[i][j], self.N).passed:
                raise InvalidParameters(f"kernel ({i},{j}) is not admissible")

    def permuted(self, perm) -> "SystemSpec":
        perm = list(perm)
        P = np.ix_(perm, perm)
        ks = [[self.kernels[i][j] for j in perm] for i in perm]
        return SystemSpec(self.N, self.m, self.adjacency[P], self.p[P], self.q[P], ks, self.form)

    @classmethod
    def from_json_dict(cls, d: dict) -> "SystemSpec":
        try:
            e = np.asarray(d["adjacency"], dtype=int)
            n = e.shape[0]
            raw = d["kernels"]
            if isinstance(raw, dict):
                ks = [[kernel_from_json(raw)] * n for _ in range(n)]
            else:
                ks = [[kernel_from_json(x) for x in row] for row in raw]
            return cls(int(d["N"]), int(d["m"]), e, d["p"], d["q"], ks, str(d.get("form", "cross")).lower())
        except KeyError as exc:
            raise InvalidParameters(f"missing field {exc.args[0]!r}") from None

    def to_json_dict(self) -> dict:
        return {"N": self.N, "m": self.m, "form": self.form, "adjacency": self.adjacency.tolist(),
                "p": self.p.tolist(), "q": self.q.tolist(),
                "kernels": [[k.to_json_dict() for k in row] for row in self.kernels]}


@dataclass
class PairResult:
    k: int
    l: int
    exponents_ok: bool
    growth_ok: bool

    @property
    def fires(self) -> bool:
        return self.exponents_ok and self.growth_ok


@dataclass
class SystemVerdict:
    nodes: list[NodeStatus]
    structure: str
    explanation: str
    pairs: list[PairResult] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"nodes": [s.value for s in self.nodes], "structure": self.structure,
                "explanation": self.explanation,
                "pairs": [{"k": p.k, "l": p.l, "exponents_ok": p.exponents_ok,
                           "growth_ok": p.growth_ok, "fires": p.fires} for p in self.pairs]}


def _pair(spec: SystemSpec, k: int, l: int) -> PairResult:
    p, q = spec.p, spec.q
    if spec.form == "cross":
        exp_ok = p[k, l] + q[k, l] >= 2 and p[l, k] + q[l, k] >= 2
    else:
        exp_ok = min(p[k, l], q[k, l], p[l, k], q[l, k]) >= 1
    # for power-law tails the limsup of the minimum is positive iff both are
    grow = (tail_condition_ii2(spec.kernels[k][l], spec.N, spec.m, p[k, l] + q[k, l])
            and tail_condition_ii2(spec.kernels[l][k], spec.N, spec.m, p[l, k] + q[l, k]))
    return PairResult(k, l, bool(exp_ok), bool(grow))


def classify_system(spec: SystemSpec) -> SystemVerdict:
    """Node statuses and the structural conclusion for a coupled system."""
    spec.validate()
    n = spec.n
    status = [NodeStatus.UNCONSTRAINED] * n
    pairs = []
    exclusive = np.zeros((n, n), dtype=bool)
    for k in range(n):
        for l in range(k, n):
            if not spec.adjacency[k, l]:
                continue
            res = _pair(spec, k, l)
            pairs.append(res)
            if not res.fires:
                continue
            if spec.form == "cross" or k == l:
                status[k] = status[l] = NodeStatus.MUST_VANISH
            else:
                exclusive[k, l] = exclusive[l, k] = True
    for i in range(n):
        if status[i] is not NodeStatus.MUST_VANISH and exclusive[i].any():
            status[i] = NodeStatus.AT_MOST_ONE

    fired = [pr for pr in pairs if pr.fires]
    if not fired:
        return SystemVerdict(status, INCONCLUSIVE, "no pair satisfies the exponent and tail hypotheses",
                             pairs)
    if all(s is NodeStatus.MUST_VANISH for s in status):
        return SystemVerdict(status, TRIVIAL_ONLY,
                             "every component is forced to vanish by an adjacent pair satisfying "
                             "the hypotheses (this also covers connected networks with more than "
                             "two nodes)", pairs)
    alive = [i for i in range(n) if status[i] is not NodeStatus.MUST_VANISH]
    if all(exclusive[i, j] for i, j in itertools.combinations(alive, 2)):
        return SystemVerdict(status, AT_MOST_ONE,
                             "at most one component u_j is nonzero; it satisfies (-Lap)^m u_j >= 0 "
                             "and is therefore poly-superharmonic", pairs)
    if exclusive.any():
        return SystemVerdict(status, INDEPENDENT,
                             "the nonzero components form an independent set in the graph of "
                             "pairs that cannot both be nonzero", pairs)
    return SystemVerdict(status, PARTIAL, "components marked MustVanish are identically zero", pairs)


def region_boundary_csv(N: int, m: int, alpha: float, p_range=(1.0, 4.0), samples: int = 31,
                        q_range=None) -> list[dict]:
    """Rows ``{p, q, q_min_bound, q_sum_bound, verdict}`` on a (p, q) grid.

    ``q_min_bound = (N-alpha)/(N-2m)`` and ``q_sum_bound = (2N-alpha)/(N-2m) - p``
    are the two boundary curves of the existence region.
    """
    if N <= 2 * m:
        raise ValueError("region requires N > 2m")
    if not 0 < alpha < N:
        raise ValueError("region requires 0 < alpha < N")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    q_range = p_range if q_range is None else q_range
    lo, total = riesz_thresholds(N, m, alpha)
    rows = []
    kernel = RieszPower(alpha)
    for p in np.linspace(*p_range, samples):
        for q in np.linspace(*q_range, samples):
            v = classify_single(ProblemParams(N, m, "plus", kernel, float(p), float(q)))
            rows.append({"p": float(p), "q": float(q), "q_min_bound": lo, "q_sum_bound": total - p,
                         "verdict": v.status.value})
    return rows
