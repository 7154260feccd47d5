"""Batch pipeline driver.

Subcommands wire the full chain -- parse, closure, companion system,
finite condition set, algebraic solve, numeric verification -- with a
JSON artifact per stage.  Artifacts are content-hashed and chained, so
re-running a stage with unchanged inputs is a no-op unless --force.

Exit codes: 0 ok, 2 input error, 3 resource limit, 4 no solution,
5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path as FilePath

import mpmath
import numpy as np
import sympy

from .errors import (HJHolonomicError, HamSyntaxError, NoSolution,
                     ResourceLimit, SingularBasePoint)
from .numeric import Evaluator, _newton_momentum, hamiltonian_flow, reconstruct_v, poisson_numeric
from .parser import build_h, parse
from .ring import Context, NumPoint
from .symplectic import (condition_set, extract_symplectic, gamma_basis,
                         solve_qbars)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_NO_SOLUTION = 4
EXIT_VERIFY = 5


class ConfigError(HJHolonomicError):
    pass


def fmt(x) -> str:
    """Fixed 17-significant-digit float formatting for artifacts."""
    return "%.17g" % float(x)


def _canon_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _hash(obj) -> str:
    return hashlib.sha256(_canon_json(obj).encode()).hexdigest()


# -- configuration ----------------------------------------------------

DEFAULT_TOLERANCES = {
    "poisson": 1e-6,
    "drift": 1e-6,
    "residual": 1e-6,
    "symmetry": 1e-4,
    "condition": 1e-10,
    "projectivity": 1e-9,
}
DEFAULT_BUDGETS = {"level_cap": 6, "gb_max_pairs": 20000, "gb_max_degree": 40}


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except OSError as e:
        raise ConfigError("cannot read config: %s" % e)
    except json.JSONDecodeError as e:
        raise ConfigError("config is not valid JSON: %s" % e)
    for key in ("hamiltonian", "n", "base_point"):
        if key not in cfg:
            raise ConfigError("config missing %r" % key)
    n = cfg["n"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError("n must be a positive integer")
    if len(cfg["base_point"]) != 2 * n:
        raise ConfigError("base_point must have 2n = %d entries" % (2 * n))
    cfg.setdefault("parameters", {})
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    if any(v <= 0 for v in tol.values()):
        raise ConfigError("tolerances must be positive")
    cfg["tolerances"] = tol
    budgets = dict(DEFAULT_BUDGETS)
    budgets.update(cfg.get("budgets", {}))
    cfg["budgets"] = budgets
    cfg.setdefault("seed", 0)
    cfg.setdefault("output", "artifacts")
    return cfg


def _eval_number(text, params: dict) -> mpmath.mpf:
    locs = {"pi": sympy.pi}
    locs.update({k: sympy.Rational(str(v)) if "/" in str(v) else sympy.sympify(str(v))
                 for k, v in params.items()})
    try:
        expr = sympy.sympify(str(text).replace("^", "**"), locals=locs)
        return mpmath.mpf(sympy.N(expr, mpmath.mp.dps).__str__())
    except (sympy.SympifyError, ValueError, TypeError) as e:
        raise ConfigError("cannot evaluate number %r: %s" % (text, e))


def base_point_from_config(cfg: dict) -> NumPoint:
    params = {k: _eval_number(v, {}) for k, v in cfg["parameters"].items()}
    coords = [_eval_number(t, cfg["parameters"]) for t in cfg["base_point"]]
    return NumPoint(coords, params=params)


# -- pipeline construction (shared by the stages) ---------------------

class PipelineState:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.ctx = Context(cfg["n"], tuple(cfg["parameters"].keys()))
        try:
            self.ast = parse(cfg["hamiltonian"], cfg["n"],
                             tuple(cfg["parameters"].keys()))
        except HamSyntaxError:
            raise
        self.zbar = base_point_from_config(cfg)
        self.h = None
        self.annihilators = None
        self.sym = None
        self.cert = None
        self.cond = None
        self.solution = None

    def ensure_system(self):
        if self.h is None:
            self.h, self.annihilators = build_h(self.ast, self.ctx, self.zbar)
        return self.h

    def ensure_gamma(self):
        if self.cert is None:
            h = self.ensure_system()
            self.sym = extract_symplectic(h.system)
            b = self.cfg["budgets"]
            self.cert = gamma_basis(h.system, self.sym, h=h,
                                    level_cap=b["level_cap"],
                                    gb_max_pairs=b["gb_max_pairs"],
                                    gb_max_degree=b["gb_max_degree"])
        return self.cert

    def ensure_solution(self):
        if self.solution is None:
            cert = self.ensure_gamma()
            self.cond = condition_set(cert, self.sym, self.h.system,
                                      self.h, self.zbar)
            self.solution = solve_qbars(self.cond, self.ctx.n, self.sym,
                                        det_tol=self.cfg["tolerances"]["projectivity"])
        return self.solution


# -- artifact plumbing ------------------------------------------------

def _artifact_path(out: FilePath, stage: str) -> FilePath:
    return out / ("%s.json" % stage)


def write_artifact(out: FilePath, stage: str, payload: dict,
                   config_hash: str, upstream_hash: str | None) -> dict:
    art = {
        "kind": stage,
        "version": 1,
        "config_hash": config_hash,
        "upstream_hash": upstream_hash,
        "payload": payload,
    }
    art["hash"] = _hash(payload)
    out.mkdir(parents=True, exist_ok=True)
    with open(_artifact_path(out, stage), "w") as f:
        json.dump(art, f, indent=2, sort_keys=True)
        f.write("\n")
    return art


def read_artifact(out: FilePath, stage: str) -> dict | None:
    p = _artifact_path(out, stage)
    if not p.exists():
        return None
    try:
        with open(p) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError):
        return None


def artifact_current(art: dict | None, config_hash: str,
                     upstream_hash: str | None) -> bool:
    return (art is not None
            and art.get("config_hash") == config_hash
            and art.get("upstream_hash") == upstream_hash
            and art.get("hash") == _hash(art.get("payload")))


def require_upstream(out: FilePath, stage: str, config_hash: str) -> dict:
    art = read_artifact(out, stage)
    if art is None:
        raise ConfigError("missing upstream artifact %r; run that stage first" % stage)
    if art.get("config_hash") != config_hash:
        raise ConfigError("upstream artifact %r does not match this config" % stage)
    return art


# -- stage payloads ---------------------------------------------------

def payload_annihilate(state: PipelineState) -> dict:
    h = state.ensure_system()
    return {
        "n": state.ctx.n,
        "parameters": {k: str(v) for k, v in state.cfg["parameters"].items()},
        "dim": h.system.dim,
        "basis": [list(b) for b in h.system.basis],
        "qbar": [fmt(v) for v in h.qbar],
        "base_point": [fmt(c) for c in state.zbar.coords],
        "annihilators": [op.to_text() for op in state.annihilators],
    }


def payload_pfaffian(state: PipelineState) -> dict:
    h = state.ensure_system()
    data = h.system.to_json()
    data["integrable"] = True  # construction-time check would have raised
    return data


def payload_gamma(state: PipelineState) -> dict:
    cert = state.ensure_gamma()
    return {
        "t": cert.t,
        "gamma": [list(g) for g in cert.gamma],
        "spanning": [list(g) for g in cert.spanning],
        "DOmega": [[[str(v) for v in row] for row in W] for W in cert.DOmega],
        "T": [[[str(v) for v in row] for row in M] for M in cert.T],
        "E": str(cert.E),
        "relations": [op.to_text() for op in cert.relations],
    }


def payload_solve(state: PipelineState) -> dict:
    sol = state.ensure_solution()
    return {
        "qbar1": [fmt(v) for v in state.cond.qbar1],
        "nullspace_basis": [[fmt(c) for c in v] for v in sol.basis],
        "admissible": sol.admissible,
        "determinants": [fmt(d) for d in sol.dets],
        "qbars": [[fmt(c) for c in v] for v in sol.qbars],
    }


# -- verification -----------------------------------------------------

def _sample_orthant_points(zb: np.ndarray, rng, count: int, radius: float):
    """Random points within the given radius of the base point that stay
    strictly inside the base point's coordinate orthant."""
    pts = []
    while len(pts) < count:
        dz = rng.uniform(-radius, radius, zb.size)
        if np.linalg.norm(dz) > radius:
            continue
        z = zb + dz
        if any(np.sign(a) != np.sign(b) for a, b in zip(z, zb) if b != 0):
            continue
        if np.min(np.abs(z[np.abs(zb) > 1e-12])) < 0.02:
            continue
        pts.append(z)
    return pts


def run_verification(state: PipelineState, rng, csv_path: FilePath | None):
    cfg = state.cfg
    tol = cfg["tolerances"]
    sol = state.ensure_solution()
    h = state.h
    S = h.system
    zb = np.array([float(c) for c in state.zbar.coords])
    evaluators = [Evaluator.from_holonomic(h)]
    for q in sol.qbars:
        evaluators.append(Evaluator(S, state.zbar, q))
    n = state.ctx.n

    metrics = {}
    rows = []

    # Poisson brackets at sampled points
    pts = _sample_orthant_points(zb, rng, cfg.get("verify_points", 20), 0.5)
    worst = 0.0
    for z in pts:
        grads = [ev.gradients(z) for ev in evaluators]
        local = max(abs(poisson_numeric(grads[i], grads[j]))
                    for i in range(len(grads)) for j in range(i + 1, len(grads))) \
            if len(grads) > 1 else 0.0
        worst = max(worst, local)
        rows.append(["poisson", fmt(0)] + [fmt(c) for c in z] + [fmt(local)])
    metrics["poisson_max"] = worst

    # conservation along the flow, started from a point on the manifold
    T = cfg.get("flow_time", 0.5)
    back = hamiltonian_flow(S, state.zbar, [h.qbar] + list(sol.qbars), -T / 2)
    z0 = back.states[-1]
    q0s = [ev.q_at(z0) for ev in evaluators]
    onset = max(abs(q[0]) for q in q0s)
    metrics["level_set_residual"] = onset
    flow = hamiltonian_flow(S, NumPoint(z0, params={k: float(v) for k, v in
                                                    state.zbar.params.items()}),
                            q0s, T)
    metrics["drift_max"] = flow.drift()
    for t, z, vals in zip(flow.times, flow.states, flow.integrals):
        rows.append(["flow", fmt(t)] + [fmt(c) for c in z] + [fmt(v) for v in vals])

    # momentum branch continuation and generating function
    if n >= 1:
        x0, p0 = zb[:n], zb[n:]
        direction = np.array([0.05 * ((-1) ** i) for i in range(n)])
        if np.all(direction == 0):
            direction = np.full(n, 0.05)
        xs = [x0 + k * direction for k in range(10)]
        ps, vs, resid = reconstruct_v(evaluators, xs, p0)
        metrics["hje_residual_max"] = float(np.max(resid))
        for x, p, v, r in zip(xs, ps, vs, resid):
            rows.append(["surface", fmt(0)] + [fmt(c) for c in x]
                        + [fmt(c) for c in p] + [fmt(v), fmt(r)])
        if n >= 2:
            eps = 1e-4
            mid = len(xs) // 2
            pb = ps[mid]
            defect = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    xi = xs[mid].copy(); xi[i] += eps
                    xj = xs[mid].copy(); xj[j] += eps
                    pi_ = _newton_momentum(evaluators, xi, pb, 1e-12, 25)
                    pj_ = _newton_momentum(evaluators, xj, pb, 1e-12, 25)
                    dij = (pj_[i] - pb[i]) / eps
                    dji = (pi_[j] - pb[j]) / eps
                    defect = max(defect, abs(dij - dji))
            metrics["symmetry_defect"] = defect

    checks = {
        "poisson_max": tol["poisson"],
        "drift_max": tol["drift"],
        "hje_residual_max": tol["residual"],
        "symmetry_defect": tol["symmetry"],
    }
    failures = [k for k, bound in checks.items()
                if k in metrics and metrics[k] >= bound]

    if csv_path is not None:
        with open(csv_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["kind", "t", "values..."])
            w.writerows(rows)
    return metrics, failures


# -- subcommand driver ------------------------------------------------

STAGES = ["annihilate", "pfaffian", "gamma", "solve"]
PAYLOADS = {
    "annihilate": payload_annihilate,
    "pfaffian": payload_pfaffian,
    "gamma": payload_gamma,
    "solve": payload_solve,
}
UPSTREAM = {"annihilate": None, "pfaffian": "annihilate",
            "gamma": "pfaffian", "solve": "gamma", "verify": "solve"}


def run_stage(stage: str, state: PipelineState, out: FilePath,
              config_hash: str, force: bool) -> dict:
    upstream = UPSTREAM[stage]
    upstream_hash = None
    if upstream is not None:
        upstream_hash = require_upstream(out, upstream, config_hash)["hash"]
    existing = read_artifact(out, stage)
    if not force and artifact_current(existing, config_hash, upstream_hash):
        print("%s: up to date (%s)" % (stage, existing["hash"][:12]))
        return existing
    payload = PAYLOADS[stage](state)
    art = write_artifact(out, stage, payload, config_hash, upstream_hash)
    print("%s: wrote artifact %s" % (stage, art["hash"][:12]))
    if stage == "annihilate":
        print("annihilate: dim = %d" % payload["dim"])
    if stage == "gamma":
        print("gamma: t = %d" % payload["t"])
    return art


def cmd_verify(state: PipelineState, out: FilePath, config_hash: str,
               seed: int) -> int:
    require_upstream(out, "solve", config_hash)
    rng = np.random.default_rng(seed)
    metrics, failures = run_verification(state, rng, out / "verify.csv")
    report = {
        "seed": seed,
        "metrics": {k: fmt(v) for k, v in metrics.items()},
        "failures": failures,
        "pass": not failures,
    }
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "verify.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    for k, v in sorted(metrics.items()):
        print("verify: %s = %s" % (k, fmt(v)))
    if failures:
        print("verify: FAILED (%s)" % ", ".join(failures), file=sys.stderr)
        return EXIT_VERIFY
    print("verify: all checks passed")
    return EXIT_OK


def _error_exit(out: FilePath | None, stage: str, exc: Exception, code: int) -> int:
    info = {"error": {"type": type(exc).__name__, "message": str(exc),
                      "stage": stage}}
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "error.json", "w") as f:
                json.dump(info, f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError:
            pass
    print("%s: %s: %s" % (stage, type(exc).__name__, exc), file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="hjholonomic",
        description="Hamilton-Jacobi first integrals via holonomic systems")
    ap.add_argument("command", choices=STAGES + ["verify", "run-all"])
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--force", action="store_true")
    ap.add_argument("--precision", choices=["double", "extended"],
                    default="double")
    args = ap.parse_args(argv)

    out = None
    try:
        cfg = load_config(args.config)
        out = FilePath(args.out if args.out is not None else cfg["output"])
        seed = args.seed if args.seed is not None else cfg["seed"]
        if args.precision == "extended":
            mpmath.mp.dps = max(mpmath.mp.dps, 50)
        config_hash = _hash({"hamiltonian": cfg["hamiltonian"], "n": cfg["n"],
                             "parameters": cfg["parameters"],
                             "base_point": cfg["base_point"],
                             "budgets": cfg["budgets"]})
        state = PipelineState(cfg)
        stages = ([args.command] if args.command in STAGES else
                  STAGES if args.command == "run-all" else [])
        for stage in stages:
            run_stage(stage, state, out, config_hash, args.force)
        if args.command in ("verify", "run-all"):
            return cmd_verify(state, out, config_hash, seed)
        return EXIT_OK
    except (ConfigError, HamSyntaxError, SingularBasePoint) as e:
        return _error_exit(out, args.command, e, EXIT_INPUT)
    except ResourceLimit as e:
        return _error_exit(out, args.command, e, EXIT_RESOURCE)
    except NoSolution as e:
        return _error_exit(out, args.command, e, EXIT_NO_SOLUTION)
    except HJHolonomicError as e:
        return _error_exit(out, args.command, e, EXIT_VERIFY)


if __name__ == "__main__":
    sys.exit(main())
