"""Command-line front end for kernel synthesis and the files derived from it.

Exit codes: 0 success (optimal and certified), 2 infeasible, 1 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys as _sys
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .dynamics import DiscreteAffineSystem, load_system
from .kernel import (
    KernelError,
    KernelMode,
    KernelProblem,
    KernelResult,
    certify,
    check_mode,
    prune,
    result_from_json,
    solve_kernel,
)
from .control import LeftTubeError, simulate, validate
from .lp import LPError
from .models import double_integrator_system, generator_basis, quadrotor_system, rotation_system
from .zonotope import project_polygon

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

log = logging.getLogger("zonokernel")


class CLIError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything one synthesis job needs; built from a JSON config and/or flags."""

    system: DiscreteAffineSystem
    template: np.ndarray
    mode: KernelMode
    horizon: int
    free_generators: Optional[np.ndarray] = None
    eta: float = 1.0
    use_phi: bool = True
    prune_threshold: Optional[float] = None
    out: Optional[Path] = None
    seed: int = 0
    system_json: dict = field(default_factory=dict)

    def problem(self) -> KernelProblem:
        prob = KernelProblem(self.system, self.template, self.horizon, self.free_generators,
                             self.eta, self.use_phi)
        check_mode(prob, self.mode)
        return prob


def _template(spec, dx: int, default_fan: str = "half_circle_fan") -> np.ndarray:
    if isinstance(spec, list):
        G = np.asarray(spec, dtype=float).T
    elif isinstance(spec, int) or (isinstance(spec, str) and spec.isdigit()):
        if dx != 2:
            raise CLIError("an integer generator count is only meaningful for planar systems")
        G = generator_basis(f"{default_fan}:{int(spec)}")
    else:
        G = generator_basis(str(spec))
    if G.shape[0] != dx:
        raise CLIError(f"template has {G.shape[0]} rows but the system has {dx} states")
    return G


def _mode(name: str, no_free: bool) -> KernelMode:
    mode = KernelMode(name)
    if no_free and mode == KernelMode.VIABLE:
        mode = KernelMode.VIABLE_NO_FREE
    return mode


def _free(spec, sys: DiscreteAffineSystem, no_free: bool) -> Optional[np.ndarray]:
    if no_free:
        return np.zeros((sys.du, 0))
    if spec is None:
        return None
    G = np.asarray(spec, dtype=float).T if isinstance(spec, list) else generator_basis(str(spec))
    if G.shape[0] != sys.du:
        raise CLIError(f"free generators have {G.shape[0]} rows but the system has {sys.du} inputs")
    return G


def config_from_args(args) -> RunConfig:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
    sys_src = args.system if args.system is not None else cfg.get("system")
    if sys_src is None:
        raise CLIError("no system given (use --system or a config file)")
    if isinstance(sys_src, dict):
        sys_json = sys_src
    else:
        with open(sys_src) as fh:
            sys_json = json.load(fh)
    system = load_system(sys_json)
    no_free = args.no_free or cfg.get("no_free", False)
    mode = _mode(args.mode or cfg.get("mode", "invariant"), no_free)
    spec = args.generators if args.generators is not None else cfg.get("template", f"axes:{system.dx}")
    prune_t = args.prune if args.prune is not None else cfg.get("prune_threshold")
    out = args.out or cfg.get("out")
    rc = RunConfig(
        system=system,
        template=_template(spec, system.dx),
        mode=mode,
        horizon=int(args.horizon if args.horizon is not None else cfg.get("T", 30)),
        free_generators=_free(cfg.get("free_generators"), system, no_free) if system.du else None,
        eta=float(args.eta if args.eta is not None else cfg.get("eta", 1.0)),
        use_phi=not (args.no_phi or cfg.get("no_phi", False)),
        prune_threshold=None if prune_t is None else float(prune_t),
        out=Path(out) if out else None,
        seed=int(args.seed if args.seed is not None else cfg.get("seed", 0)),
        system_json=sys_json,
    )
    rc.problem()
    return rc


# ---------------------------------------------------------------------------
# output helpers

def _dump(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1) + "\n")


def _polygon(Z, dims) -> list:
    return [[float(a), float(b)] for a, b in project_polygon(Z, dims)]


def write_projections(result: KernelResult, out: Path, reach: bool = False) -> List[Path]:
    """One polygon file per coordinate pair for ``I`` (and optionally every reach set)."""
    I = result.initial_set()
    sets = result.reach_sets() if reach else []
    paths = []
    for i, j in combinations(range(I.dim), 2):
        p = out / "projections" / f"x{i + 1}_x{j + 1}.json"
        _dump(p, _polygon(I, (i, j)))
        paths.append(p)
        for t, R in enumerate(sets):
            _dump(out / "projections" / f"reach_t{t:03d}_x{i + 1}_x{j + 1}.json", _polygon(R, (i, j)))
    return paths


def run_kernel(rc: RunConfig) -> int:
    result = solve_kernel(rc.problem(), rc.mode)
    if not result.optimal:
        print(f"no set found ({result.mode.value}: {result.status})")
        if rc.out:
            _dump(rc.out / "result.json", result.to_json())
        return EXIT_INFEASIBLE
    if rc.prune_threshold is not None:
        result = prune(result, rc.prune_threshold)
    cert = result.cert
    print(f"{result.mode.value}: objective {result.objective_value:.6g}, "
          f"{int(np.sum(result.gamma >= 0.01))}/{result.gamma.size} generators with gamma >= 0.01, "
          f"certified={cert.passed} (max violation {cert.max_violation:.2e})")
    if rc.out:
        _dump(rc.out / "system.json", rc.system_json)
        _dump(rc.out / "result.json", result.to_json())
        _dump(rc.out / "cert.json", cert.to_json())
        write_projections(result, rc.out)
    return EXIT_OK if cert.passed else EXIT_ERROR


def _load_result(system_path, result_path):
    with open(system_path) as fh:
        system = load_system(json.load(fh))
    with open(result_path) as fh:
        return result_from_json(json.load(fh), system)


def cmd_kernel(args) -> int:
    return run_kernel(config_from_args(args))


def cmd_certify(args) -> int:
    result = _load_result(args.system, args.result)
    if not result.optimal:
        raise CLIError(f"result status is {result.status!r}; nothing to certify")
    rep = certify(result.problem, result)
    print(f"certified={rep.passed} max_violation={rep.max_violation:.3e}")
    if args.out:
        _dump(Path(args.out) / "cert.json", rep.to_json())
    return EXIT_OK if rep.passed else EXIT_ERROR


def cmd_project(args) -> int:
    result = _load_result(args.system, args.result)
    if not result.optimal:
        raise CLIError("only optimal results can be projected")
    paths = write_projections(result, Path(args.out), reach=args.reach)
    print(f"wrote {len(paths)} projection(s) to {args.out}")
    return EXIT_OK


def _u_des_signal(kind: str, result: KernelResult, rng: np.random.Generator):
    sys = result.problem.system
    if kind == "center":
        return None
    if kind == "random":
        return rng.uniform(sys.U.lower, sys.U.upper, (result.horizon, sys.du))
    try:
        return np.array([float(v) for v in kind.split(",")]).reshape(sys.du)
    except ValueError:
        raise CLIError(f"invalid --u-des {kind!r}: use center, random or comma-separated values") from None


def run_rollouts(result: KernelResult, n: int, seed: int, disturbance: str = "random",
                 u_des: str = "center", start: str = "corner", out: Optional[Path] = None,
                 write_csv: bool = True) -> dict:
    """``n`` closed-loop rollouts from points of ``I``; returns the summary dict."""
    if not result.optimal:
        raise CLIError("simulation needs an optimal result")
    rep = certify(result.problem, result)
    if not rep.passed:
        raise CLIError(f"result is not certified (max violation {rep.max_violation:.3e})")
    if start not in ("corner", "random", "center"):
        raise CLIError(f"invalid start {start!r}")
    sys = result.problem.system
    rng = np.random.default_rng(seed)
    I = result.initial_set()
    viol_x = viol_u = 0
    worst_x = worst_u = np.inf
    for k in range(n):
        if start == "corner":
            lam = rng.choice([-1.0, 1.0], I.n_generators)
        elif start == "random":
            lam = rng.uniform(-1.0, 1.0, I.n_generators)
        else:
            lam = np.zeros(I.n_generators)
        x0 = I.center + I.generators @ lam
        traj = simulate(sys, result, x0, _u_des_signal(u_des, result, rng) if result.mode.has_input else None,
                        disturbance, rng=rng)
        v = validate(traj, sys.X, sys.U if result.mode.has_input else None)
        viol_x += int(not all(v.in_X))
        viol_u += int(not all(v.in_U))
        worst_x = min(worst_x, v.worst_state_margin)
        worst_u = min(worst_u, v.worst_input_margin)
        if out is not None and write_csv:
            p = out / "trajectories" / f"rollout_{k:04d}.csv"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(traj.to_csv())
    summary = {
        "rollouts": n,
        "seed": seed,
        "disturbance": disturbance,
        "u_des": u_des,
        "state_violations": viol_x,
        "input_violations": viol_u,
        "worst_state_margin": None if not np.isfinite(worst_x) else float(worst_x),
        "worst_input_margin": None if not np.isfinite(worst_u) else float(worst_u),
    }
    if out is not None:
        _dump(out / "summary.json", summary)
    return summary


def cmd_simulate(args) -> int:
    result = _load_result(args.system, args.result)
    s = run_rollouts(result, args.rollouts, args.seed if args.seed is not None else 0,
                     args.disturbance, args.u_des, args.start, Path(args.out) if args.out else None)
    print(f"{s['rollouts']} rollouts: {s['state_violations']} state and {s['input_violations']} input violations")
    return EXIT_OK if s["state_violations"] == s["input_violations"] == 0 else EXIT_ERROR


DEMOS = {
    # system factory, default mode, horizon, template spec, integer fan
    "rotation": ("invariant", 32, "half_circle_fan:9", "half_circle_fan"),
    "di": ("viable", 30, "quadrant_fan:8", "quadrant_fan"),
    "quadrotor": ("discriminating", 40, "quadrotor", None),
}


def cmd_demo(args) -> int:
    mode_name, T, spec, fan = DEMOS[args.name]
    mode_name = args.mode or mode_name
    if args.name == "rotation":
        system = rotation_system(disturbance=(mode_name == "invariant_disturbed"))
    elif args.name == "di":
        system = double_integrator_system()
    else:
        system = quadrotor_system()
    gens = args.generators if args.generators is not None else spec
    if isinstance(gens, str) and gens.isdigit():
        if fan is None:
            raise CLIError("the quadrotor demo needs a generator spec, not a count")
        gens = f"{fan}:{gens}"
    rc = RunConfig(
        system=system,
        template=_template(gens, system.dx),
        mode=_mode(mode_name, args.no_free),
        horizon=args.horizon if args.horizon is not None else T,
        free_generators=_free(None, system, args.no_free) if system.du else None,
        eta=args.eta if args.eta is not None else 1.0,
        use_phi=not args.no_phi,
        prune_threshold=args.prune,
        out=Path(args.out) if args.out else None,
        seed=args.seed if args.seed is not None else 0,
        system_json=system.to_json(),
    )
    rc.problem()
    code = run_kernel(rc)
    if code == EXIT_OK and args.rollouts:
        result = _load_result(rc.out / "system.json", rc.out / "result.json") if rc.out else None
        if result is None:
            raise CLIError("--rollouts needs --out")
        dist = "corner" if result.mode.has_disturbance else "none"
        s = run_rollouts(result, args.rollouts, rc.seed, dist, args.u_des, "corner", rc.out)
        print(f"{s['rollouts']} rollouts: {s['state_violations']} state and "
              f"{s['input_violations']} input violations")
        if s["state_violations"] or s["input_violations"]:
            code = EXIT_ERROR
    return code


# ---------------------------------------------------------------------------

def _synth_flags(p: argparse.ArgumentParser, modes=True) -> None:
    if modes:
        p.add_argument("--mode", choices=[m.value for m in KernelMode])
    p.add_argument("--horizon", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--generators", help="template spec, e.g. half_circle_fan:9 or axes:2+quadrant_fan:4")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--prune", type=float, metavar="THRESHOLD")
    p.add_argument("--no-phi", action="store_true", help="pin the state-to-input coupling to zero")
    p.add_argument("--no-free", action="store_true", help="omit the free-input generators")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zonokernel", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="solve a kernel program for a system file or config")
    k.add_argument("--system", help="system JSON file")
    k.add_argument("--config", help="run config JSON (flags override its fields)")
    _synth_flags(k)
    k.set_defaults(func=cmd_kernel)

    c = sub.add_parser("certify", help="re-check a result file against a system file")
    c.add_argument("--system", required=True)
    c.add_argument("--result", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("simulate", help="closed-loop rollouts under a certified result")
    s.add_argument("--system", required=True)
    s.add_argument("--result", required=True)
    s.add_argument("--rollouts", type=int, default=10)
    s.add_argument("--seed", type=int)
    s.add_argument("--disturbance", choices=["none", "random", "corner"], default="random")
    s.add_argument("--u-des", default="center", help="center, random or comma-separated constant")
    s.add_argument("--start", choices=["corner", "random", "center"], default="corner")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("project", help="write 2-D polygons of I (and optionally the reach sets)")
    pr.add_argument("--system", required=True)
    pr.add_argument("--result", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--reach", action="store_true")
    pr.set_defaults(func=cmd_project)

    d = sub.add_parser("demo", help="built-in examples")
    d.add_argument("name", choices=sorted(DEMOS))
    _synth_flags(d)
    d.add_argument("--rollouts", type=int, default=0)
    d.add_argument("--u-des", default="center")
    d.set_defaults(func=cmd_demo)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CLIError, KernelError, LPError, LeftTubeError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    _sys.exit(main())
