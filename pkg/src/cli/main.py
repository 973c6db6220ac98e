"""
Command-line front door.

Every subcommand prints a JSON report on stdout, writes its files into
--out-dir and records a manifest beside them. Values come from explicit
flags first, then the --config file, then the built-in defaults.

Exit codes: 0 success, 1 failed verification or construction, 2 usage error.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence
import argparse
import logging
import math
import sys

import numpy as np

from config import settings
from config.logging_config import setup_logging
from config.run_config import RunConfig, load_run_config, parse_complex
from src.core.henon import HenonMap
from src.core.slices import SliceSpec
from src.constructions import baker, oscillate, runge, wander
from src.constructions.manifolds import SaddleModel
from src.dynamics.orbit import classify, escape_direction, psh_probe
from src.dynamics.periodic import fixed_points, period2_points, saddle_period2
from src.render.renderer import ColorMode, Thresholds, render
from src.utils.error_handler import (
    ConfigurationError, ErrorHandler, ErrorSeverity, WorkbenchError, exit_code_for
)
from src.utils.performance_monitor import PerformanceMonitor
from src.cli.manifest import dumps, write_csv, write_json, write_manifest

logger = logging.getLogger(__name__)

MAP_CHOICES = ("baker", "wander", "wander-shifted", "saddle", "custom")


@dataclass
class CommandResult:
    payload: Dict[str, Any]
    outputs: List[Path] = field(default_factory=list)
    passed: bool = True


class Options:
    """Explicit flag, else config-file option, else default."""

    def __init__(self, args: argparse.Namespace, config: RunConfig):
        self.args = args
        self.config = config
        self.merged = config.merged({k: v for k, v in vars(args).items() if k != "func"})

    def get(self, name: str, default: Any = None) -> Any:
        value = self.merged.get(name)
        return default if value is None else value

    def get_int(self, name: str, default: Any = None) -> int:
        return self._number(name, default, int)

    def get_float(self, name: str, default: Any = None) -> float:
        return self._number(name, default, float)

    def _number(self, name: str, default: Any, kind: type) -> Any:
        value = self.get(name, default)
        try:
            return kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"option {name} is not a number: {value!r}", option=name) from exc

    @property
    def seed(self) -> int:
        return int(self.get("seed", 0))

    @property
    def workers(self) -> Optional[int]:
        value = self.get("workers")
        return None if value is None else int(value)


def flag_complex(text: Any) -> complex:
    """parse_complex for command-line values; bad text is a usage error."""
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise ConfigurationError(str(exc), value=str(text)) from exc


def parse_point(text: str) -> np.ndarray:
    parts = [p for p in str(text).split(",") if p.strip()]
    if len(parts) != 2:
        raise ConfigurationError(f"a point needs two comma-separated coordinates: {text!r}")
    return np.array([flag_complex(p.strip()) for p in parts], dtype=complex)


def parse_floats(text: str, count: int) -> List[float]:
    try:
        values = [float(p) for p in str(text).split(",")]
    except ValueError as exc:
        raise ConfigurationError(f"not a list of numbers: {text!r}") from exc
    if len(values) != count:
        raise ConfigurationError(f"expected {count} comma-separated numbers: {text!r}")
    return values


def resolve_map(opts: Options) -> HenonMap:
    try:
        return _build_map(opts)
    except ValueError as exc:
        raise ConfigurationError(f"invalid map: {exc}") from exc


def _build_map(opts: Options) -> HenonMap:
    name = opts.get("map", "baker")
    if name == "baker":
        return baker.baker_map()
    if name in ("wander", "wander-shifted"):
        F, G = wander.build_maps(wander.make_params(opts.get_float("delta", 0.05)))
        return F if name == "wander" else G
    if name == "saddle":
        return SaddleModel(opts.get_float("a", 0.5), opts.get_float("b", 1.0)).linear_map()
    block = opts.config.map
    f_text = opts.get("f") or (block.f if block else None)
    if not f_text:
        raise ConfigurationError("custom map needs --f or a map block in the config")
    form = opts.get("form") or (block.form if block else "standard")
    if form == "standard":
        delta = opts.get("delta") or (block.delta if block else None)
        if delta is None:
            raise ConfigurationError("standard form needs --delta")
        return HenonMap.standard(f_text, flag_complex(delta))
    a = opts.get("a") or (block.a if block else None)
    if a is None:
        raise ConfigurationError("alternative form needs --a")
    return HenonMap.alternative(f_text, flag_complex(a))


def resolve_slice(opts: Options) -> SliceSpec:
    """'w=<c>' is the z-line at fixed w, 'z=<c>' the w-line, 'real' the real (z, w) plane."""
    text = str(opts.get("slice", "w=0")).replace(" ", "")
    width, height = parse_floats(opts.get("extent", "10,10"), 2)
    px_w, px_h = (int(v) for v in parse_floats(opts.get("resolution", "256,256"), 2))
    center = parse_point(opts.get("center", "0,0"))
    if text.startswith("w="):
        origin = (center[0], flag_complex(text[2:]))
        return SliceSpec(origin, (1, 0), (1j, 0), (width, height), (px_w, px_h))
    if text.startswith("z="):
        origin = (flag_complex(text[2:]), center[1])
        return SliceSpec(origin, (0, 1), (0, 1j), (width, height), (px_w, px_h))
    if text == "real":
        return SliceSpec(tuple(center), (1, 0), (0, 1), (width, height), (px_w, px_h))
    raise ConfigurationError(f"unknown slice {text!r}; use w=<c>, z=<c> or real")


def cmd_orbit(opts: Options, out_dir: Path) -> CommandResult:
    m = resolve_map(opts)
    record = classify(m, parse_point(opts.get("point", "0,0")), opts.get_int("n_max", 200))
    rows = [{"n": n, "z_re": p[0].real, "z_im": p[0].imag, "w_re": p[1].real, "w_im": p[1].imag}
            for n, p in enumerate(record.points)]
    path = write_csv(out_dir / "orbit.csv", rows)
    payload = {"map": m.describe(), "class": record.escape.to_dict(), "steps": len(rows) - 1,
               "overflow": record.overflow, "escape_direction": escape_direction(record)}
    return CommandResult(payload, [path])


def cmd_fixpoints(opts: Options, out_dir: Path) -> CommandResult:
    m = resolve_map(opts)
    box = tuple(parse_floats(opts.get("box", "-20,20,-20,20"), 4))
    starts, tol = opts.get_int("starts", 41), opts.get_float("tol", 1e-9)
    period = opts.get_int("period", 1)
    if period == 1:
        points = fixed_points(m, box, starts, tol, opts.workers)
    elif opts.get("saddles"):
        points = saddle_period2(m, box, starts, tol, opts.get_float("threshold", 10.0),
                                workers=opts.workers)
    else:
        points = period2_points(m, box, starts, tol, opts.workers)
    rows = [p.to_dict() for p in points]
    passed = all((p.det_residual is None or p.det_residual < 1e-8)
                 and (p.trace_residual is None or p.trace_residual < 1e-8) for p in points)
    path = write_json(out_dir / "fixpoints.json", rows)
    return CommandResult({"map": m.describe(), "period": period, "count": len(rows),
                          "points": rows, "identities_ok": passed}, [path], passed)


def cmd_baker_verify(opts: Options, out_dir: Path) -> CommandResult:
    alpha = opts.get_float("alpha", 1.0)
    samples = opts.get_int("samples", 100_000)
    modulus = opts.get_float("max_modulus", 50.0)
    orbits = opts.get_int("orbits", min(samples, 1000))
    seed = opts.seed
    invariance = baker.verify_invariance(alpha, modulus, samples, seed, opts.workers)
    drift = baker.verify_drift(alpha, modulus, orbits, seed=seed)
    escape = baker.verify_escape(alpha, modulus, orbits, seed=seed)
    limits = baker.limit_point_report(alpha, min(orbits, 200), seed=seed)
    payload = {"alpha": alpha, "seed": seed, "invariance": invariance, "drift": drift,
               "escape": escape, "limit_point": limits, "violations": invariance["violations"]}
    passed = (invariance["violations"] == 0 and drift["step_violations"] == 0
              and drift["cumulative_violations"] == 0 and escape["failures"] == 0
              and limits["inside_to_limit"] == limits["inside_samples"])
    path = write_json(out_dir / "baker_verify.json", payload)
    return CommandResult(payload, [path], passed)


def cmd_baker_psi(opts: Options, out_dir: Path) -> CommandResult:
    point = parse_point(opts.get("point", "5,0"))
    result = baker.psi(point, opts.get_float("tol", 1e-8), pullback=bool(opts.get("pullback")))
    payload = {"point": point, **result.to_dict()}
    path = write_json(out_dir / "baker_psi.json", payload)
    return CommandResult(payload, [path], bool(result.in_Omega))


def cmd_psh_probe(opts: Options, out_dir: Path) -> CommandResult:
    m = resolve_map(opts)
    grid = resolve_slice(opts)
    field_ = psh_probe(m, grid, opts.get_int("n", 50), opts.workers)
    path = write_csv(out_dir / "psh.csv", field_.to_rows(grid))
    finite = field_.u[~field_.overflow]
    payload = {"map": m.describe(), "slice": grid.to_dict(), "n": field_.n,
               "overflowed": int(field_.overflow.sum()),
               "u_min": float(finite.min()) if finite.size else None,
               "u_max": float(finite.max()) if finite.size else None}
    return CommandResult(payload, [path])


def cmd_wander_escape(opts: Options, out_dir: Path) -> CommandResult:
    params = wander.make_params(opts.get_float("delta", 0.05))
    report = wander.probe_boundaries(params, opts.get_int("probes", 100), opts.seed,
                                     opts.get_int("n", 40), opts.workers)
    passed = report["misorderings"] == 0 and (report["min_rho_boundary"] or 0) > 0
    path = write_json(out_dir / "wander_escape.json", report)
    return CommandResult(report, [path], passed)


def _runge_case(case: str) -> Dict[str, Any]:
    from src.core.parser import parse_expr

    if case == "exp":
        exp = parse_expr("exp(z)")
        return {"disks": [runge.DiskTarget(0j, 1.0, exp)],
                "conditions": [runge.InterpCondition(0j, 1.0, 1.0)], "epsilon": 1e-6}
    if case == "two-disk":
        return {"disks": [runge.DiskTarget(0j, 1.0, 0.0), runge.DiskTarget(5.0, 1.0, 1.0)],
                "conditions": [runge.InterpCondition(0j, 0.0), runge.InterpCondition(5.0, 1.0)],
                "epsilon": 1e-3}
    raise ConfigurationError(f"unknown runge case {case!r}; use exp or two-disk")


def cmd_runge_demo(opts: Options, out_dir: Path) -> CommandResult:
    case = _runge_case(str(opts.get("case", "exp")))
    epsilon = opts.get_float("epsilon", case["epsilon"])
    fit = runge.approximate(case["disks"], case["conditions"], epsilon, workers=opts.workers)
    check = runge.validate(fit, case["disks"], case["conditions"], workers=opts.workers)
    payload = {"case": opts.get("case", "exp"), "epsilon": epsilon,
               "disks": [d.to_dict() for d in case["disks"]],
               "approximant": fit.to_dict(), "validation": check}
    passed = (fit.sup_error <= epsilon and check["sup_error"] <= 2 * epsilon
              and check["conditions_residual"] <= 1e-10)
    path = write_json(out_dir / "runge.json", payload)
    return CommandResult(payload, [path], passed)


def cmd_oscillate(opts: Options, out_dir: Path) -> CommandResult:
    rounds = opts.get_int("rounds", settings.OSC_ROUNDS)
    state = oscillate.seed_state(z0=flag_complex(opts.get("z0", 7.0)),
                                 c=opts.get("c") and opts.get_float("c"))
    state_path, orbit_path = out_dir / "state.json", out_dir / "orbit.csv"
    reports: List[Dict[str, Any]] = [oscillate.verify_round(state, opts.seed)]

    def save(current: oscillate.ConstructionState) -> None:
        write_json(state_path, current.to_dict())
        write_csv(orbit_path, current.orbit_rows())
        if current.k > 0:
            reports.append(oscillate.verify_round(current, opts.seed))

    save(state)
    error: Optional[WorkbenchError] = None
    try:
        state = oscillate.construct(rounds, state, opts.workers, opts.seed, on_round=save)
    except WorkbenchError as exc:
        error = exc
        logger.error("construction stopped", extra={"round": len(reports), "error": str(exc)})

    payload: Dict[str, Any] = {"rounds_requested": rounds, "rounds_completed": len(reports) - 1,
                               "verification": reports, "history": list(state.history)}
    passed = error is None and all(r["all_pass"] for r in reports)
    if error is None and state.k >= 2:
        witness = oscillate.oscillation_witness(state)
        payload["witness"] = witness.escape.to_dict()
        passed = passed and witness.escape.kind.name == "OSCILLATING"
    if error is not None:
        payload["error"] = {"type": type(error).__name__, "message": str(error)}
    return CommandResult(payload, [state_path, orbit_path], passed)


def cmd_render(opts: Options, out_dir: Path) -> CommandResult:
    m = resolve_map(opts)
    grid = resolve_slice(opts)
    mode = ColorMode(str(opts.get("mode", "escape-time")))
    thresholds = Thresholds(opts.get_float("r_escape", settings.ORBIT_R_ESCAPE),
                            opts.get_float("r_bound", settings.ORBIT_R_BOUND))
    monitor = PerformanceMonitor(throughput_warning=1e5 / 3)
    image = render(m, grid, mode, opts.get_int("n_max", 100), thresholds, opts.workers, monitor)
    out = Path(opts.get("out", "render.ppm"))
    path = image.write_ppm(out if out.is_absolute() else out_dir / out)
    payload = {"map": m.describe(), "slice": grid.to_dict(), **image.metrics,
               "output": path.name}
    return CommandResult(payload, [path])


COMMANDS: Dict[str, Callable[[Options, Path], CommandResult]] = {
    "orbit": cmd_orbit,
    "fixpoints": cmd_fixpoints,
    "baker-verify": cmd_baker_verify,
    "baker-psi": cmd_baker_psi,
    "psh-probe": cmd_psh_probe,
    "wander-escape": cmd_wander_escape,
    "runge-demo": cmd_runge_demo,
    "oscillate": cmd_oscillate,
    "render": cmd_render,
}


def _map_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", choices=MAP_CHOICES)
    p.add_argument("--f", help="expression text of f for --map custom")
    p.add_argument("--form", choices=("standard", "alternative"))
    p.add_argument("--delta", help="δ for standard-form and wander maps")
    p.add_argument("--a", help="a for alternative-form maps")


def _slice_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--slice", help="w=<c>, z=<c> or real")
    p.add_argument("--center", help="'z,w' centre of the slice")
    p.add_argument("--extent", help="'width,height' in parameter units")
    p.add_argument("--resolution", help="'px_w,px_h'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="henon-workbench",
                                     description="Transcendental Hénon map workbench")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run config merged under explicit flags")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out-dir", dest="out_dir", default=".")
    common.add_argument("--debug", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", parents=[common], help="classify one orbit")
    _map_flags(p)
    p.add_argument("--point")
    p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("fixpoints", parents=[common], help="fixed or period-2 points")
    _map_flags(p)
    p.add_argument("--box", help="'re_min,re_max,im_min,im_max'")
    p.add_argument("--starts", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--period", type=int, choices=(1, 2))
    p.add_argument("--saddles", action="store_true", default=None)
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("baker-verify", parents=[common], help="Baker region checks")
    p.add_argument("--alpha", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--orbits", type=int)
    p.add_argument("--max-modulus", dest="max_modulus", type=float)

    p = sub.add_parser("baker-psi", parents=[common], help="Fatou coordinate at a point")
    p.add_argument("--point")
    p.add_argument("--tol", type=float)
    p.add_argument("--pullback", action="store_true", default=None)

    p = sub.add_parser("psh-probe", parents=[common], help="u_n = −Re z_n / n on a slice")
    _map_flags(p)
    _slice_flags(p)
    p.add_argument("--n", type=int)

    p = sub.add_parser("wander-escape", parents=[common], help="basin boundary probes")
    p.add_argument("--delta", type=float)
    p.add_argument("--probes", type=int)
    p.add_argument("--n", type=int)

    p = sub.add_parser("runge-demo", parents=[common], help="polynomial approximation demo")
    p.add_argument("--case", choices=("exp", "two-disk"))
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("oscillate", parents=[common], help="oscillating wandering domain rounds")
    p.add_argument("--rounds", type=int)
    p.add_argument("--z0")
    p.add_argument("--c", type=float)

    p = sub.add_parser("render", parents=[common], help="render a slice to PPM")
    _map_flags(p)
    _slice_flags(p)
    p.add_argument("--mode", choices=[m.value for m in ColorMode])
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--r-escape", dest="r_escape", type=float)
    p.add_argument("--r-bound", dest="r_bound", type=float)
    p.add_argument("--out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2

    setup_logging(args.debug, settings.LOG_FILE, None if args.debug else settings.LOG_LEVEL)
    handler = ErrorHandler()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = {k: v for k, v in vars(args).items() if v is not None}
    seed = args.seed

    try:
        config = load_run_config(args.config) if args.config else RunConfig()
        opts = Options(args, config)
        seed = opts.seed
        result = COMMANDS[args.command](opts, out_dir)
    except (WorkbenchError, ValueError) as exc:
        # flag and config mistakes arrive as ConfigurationError; a bare ValueError is internal
        record = handler.handle_error(exc, {"component": args.command}, ErrorSeverity.HIGH)
        code = exit_code_for(exc)
        print(dumps({"error": {k: record[k] for k in ("error_type", "category", "message",
                                                      "details") if k in record}}))
        write_manifest(out_dir, args.command, inputs, seed, [], status="error")
        return code

    manifest = write_manifest(out_dir, args.command, inputs, seed, result.outputs,
                              status="ok" if result.passed else "failed")
    result.payload["manifest"] = manifest.name
    result.payload["passed"] = result.passed
    print(dumps(result.payload))
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
