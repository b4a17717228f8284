"""Build and certify the explicit supersolutions, then check every level of
poly-superharmonicity.  Writes one JSON summary per case into --out."""

import argparse
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from polyharm.barrier import polysuperharmonic_check
from polyharm.builder import construct, verify_grid, verify_supersolution
from polyharm.classifier import ProblemParams
from polyharm.kernels import RieszPower


@dataclass
class Config:
    cases: list = field(default_factory=lambda: [(5, 1, 2.0, 2.0, 2.0), (9, 2, 3.0, 3.0, 3.0)])
    r_min: float = 1e-2
    r_max: float = 1e4
    points: int = 200
    tol: float = 1e-8


def certify(case, cfg: Config) -> dict:
    N, m, alpha, p, q = case
    t0 = time.perf_counter()
    cons = construct(ProblemParams(N, m, "plus", RieszPower(alpha), p, q))
    grid = verify_grid(cfg.r_min, cfg.r_max, cfg.points)
    cert = verify_supersolution(cons, grid, cfg.tol)
    levels = polysuperharmonic_check(cons, N, m, grid)
    return {
        "case": {"N": N, "m": m, "alpha": alpha, "p": p, "q": q},
        "kappa": cons.kappa, "a": cons.a, "R": cons.R, "M": cons.M, "C1": cons.C1, "C2": cons.C2,
        "scale": cons.scale,
        "certificate": cert.to_json_dict(include_samples=False),
        "polysuperharmonic": levels.to_json_dict(),
        "seconds": time.perf_counter() - t0,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/certify")
    ap.add_argument("--points", type=int, default=Config.points)
    args = ap.parse_args()
    cfg = Config(points=args.points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for case in cfg.cases:
        res = certify(case, cfg)
        name = "case_" + "_".join(f"{v:g}" for v in case) + ".json"
        (out / name).write_text(json.dumps(res, indent=2, sort_keys=True))
        print(f"{case}: {res['certificate']['status']}  polysuperharmonic={res['polysuperharmonic']['passed']}"
              f"  ({res['seconds']:.1f} s)")
    (out / "config.json").write_text(json.dumps(asdict(cfg), indent=2))


if __name__ == "__main__":
    main()
