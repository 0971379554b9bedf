"""
Command-line front end: metrics, contraction coefficients, entropy rates,
analyticity radius search, sweeps and certification runs.

Primary output goes to stdout and is deterministic given (args, seed); logs
and the certify run summary go to stderr. Usage: python -m src.cli --help
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.certification_report import CertificationReportGenerator
from src.contraction_checks import (
    certify_birkhoff_bound,
    certify_contraction,
    certify_invariance,
    lemma_aA_suite,
    lemma_maxone_suite,
)
from src.errors import ArgumentError, HmpError
from src.hmm import BscHmm, entropy_rate_exact, entropy_rate_mc, load_model
from src.matrix_action import (
    ComplexMatrix,
    MobiusMap,
    PositiveMatrix,
    birkhoff_phi,
    birkhoff_tau,
    halfplane_tau_closed_form,
    infinitesimal_dH_coeff,
    infinitesimal_dP_coeff,
    sup_coeff_search,
)
from src.metrics import (
    ComplexSimplexPoint,
    RealSimplexPoint,
    halfplane_hilbert,
    halfplane_poincare,
    hilbert_complex,
    hilbert_real,
    poincare_dp,
    uniform_disk,
)
from src.numerics_config import NumericsConfig
from src.parallel import chunk_rng
from src.radius_solver import (
    FeasibleTuple,
    RadiusProblem,
    cond1,
    cond2,
    cond3,
    load_problem,
    max_radius_search,
    s_interval,
    sweep,
    sweep_to_csv,
    verify_conditions_sampled,
    verify_tuple,
)
from src.serialization import dumps, to_jsonable

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(filename)s - %(levelname)s - %(message)s'
DEFAULT_BUDGET = 100_000
DEFAULT_SAMPLES = 10_000


@dataclass
class RunConfig:
    seed: int
    tolerances: Dict[str, float] = field(default_factory=dict)
    output_format: str = "text"
    workers: int = 1


@dataclass
class CheckResult:
    name: str
    status: str
    passed: Optional[bool] = None
    result: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    duration_seconds: Optional[float] = None


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _timeit(fn: Callable[[], Any]) -> Tuple[Any, float]:
    t0 = time.perf_counter()
    val = fn()
    return val, time.perf_counter() - t0


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "none"
    return "%.15g" % value


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits, got {text!r}")
    return value


def _parse_complex(text: str) -> complex:
    s = str(text).strip().replace(" ", "")
    if s.endswith("i"):
        s = s[:-1] + "j"
    try:
        return complex(s)
    except ValueError:
        raise ArgumentError(f"cannot parse number {text!r}")


def _parse_vector(text: str) -> np.ndarray:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ArgumentError(f"empty vector {text!r}")
    return np.array([_parse_complex(p) for p in parts], dtype=complex)


def _parse_point(text: str) -> complex:
    """A half-plane point: 're,im' or a complex literal such as '1+2j'."""
    if "," in text:
        parts = text.split(",")
        if len(parts) != 2:
            raise ArgumentError(f"expected 're,im', got {text!r}")
        try:
            return complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise ArgumentError(f"cannot parse point {text!r}")
    return _parse_complex(text)


def _json_number(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return _parse_complex(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ArgumentError(f"cannot parse JSON number {value!r}")


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).expanduser().read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ArgumentError(f"cannot read JSON file {path}: {e}") from e


def _as_matrix(values: np.ndarray):
    """Real input becomes a PositiveMatrix, anything else a ComplexMatrix."""
    if np.all(values.imag == 0):
        return PositiveMatrix(values.real)
    return ComplexMatrix(values)


def _parse_matrix(args) -> Any:
    if getattr(args, "matrix_file", None):
        data = _read_json(args.matrix_file)
        if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
            raise ArgumentError("matrix JSON must be a list of rows")
        values = np.array([[_json_number(v) for v in row] for row in data], dtype=complex)
    elif getattr(args, "matrix", None):
        flat = _parse_vector(args.matrix)
        size = math.isqrt(flat.size)
        if size * size != flat.size:
            raise ArgumentError(f"inline matrix needs a square number of entries, got {flat.size}")
        values = flat.reshape(size, size)
    else:
        raise ArgumentError("a matrix is required (--matrix or --matrix-file)")
    return _as_matrix(values)


def _parse_p_values(text: str) -> List[float]:
    """'a:b:step' (inclusive) or a comma list."""
    parts = text.split(":") if ":" in text else [p for p in text.split(",") if p.strip()]
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise ArgumentError(f"cannot parse p values {text!r}")
    if ":" not in text:
        return numbers
    if len(numbers) != 3:
        raise ArgumentError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = numbers
    if step <= 0 or stop < start:
        raise ArgumentError(f"range {text!r} is empty or has a nonpositive step")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _parse_tolerances(items: Optional[Sequence[str]]) -> Dict[str, float]:
    overrides = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ArgumentError(f"--tol expects name=value, got {item!r}")
        try:
            overrides[name.strip()] = float(value)
        except ValueError:
            raise ArgumentError(f"--tol value for {name!r} is not a number: {value!r}")
    return overrides


def _problem_from_args(args) -> RadiusProblem:
    if args.problem:
        return load_problem(args.problem)
    if args.eps0 is None:
        raise ArgumentError("--eps0 is required unless --problem is given")
    if args.pi:
        pi = _parse_vector(args.pi)
        if pi.size != 4 or np.any(pi.imag != 0):
            raise ArgumentError("--pi needs four real entries p00,p01,p10,p11")
        return RadiusProblem(pi.real.reshape(2, 2), args.eps0)
    if args.p is None:
        raise ArgumentError("give --p, --pi or --problem")
    return RadiusProblem.symmetric(args.p, args.eps0)


def _write_pdf(kind: str, payload: Dict[str, Any], path: Optional[str]) -> None:
    if not path:
        return
    info = CertificationReportGenerator().generate_report(kind, payload, path)
    logger.info(f"📄 PDF summary saved to: {info['pdf_path']}")


def _emit(config: RunConfig, values: Dict[str, Any]) -> None:
    """key = value lines, or one JSON object under --format json."""
    if config.output_format == "json":
        print(dumps(values))
        return
    for key, value in values.items():
        if isinstance(value, float) or value is None:
            print(f"{key} = {_fmt(value)}")
        else:
            print(f"{key} = {value}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_metric(args, config: RunConfig) -> int:
    points = _read_json(args.points) if args.points else {}
    if points and not isinstance(points, dict):
        raise ArgumentError("points JSON must be an object")

    if args.kind in ("half-h", "half-p"):
        raw1 = points.get("z1", args.z1)
        raw2 = points.get("z2", args.z2)
        if raw1 is None or raw2 is None:
            raise ArgumentError(f"{args.kind} needs --z1 and --z2")
        z1 = _parse_point(raw1) if isinstance(raw1, str) else _json_number(raw1)
        z2 = _parse_point(raw2) if isinstance(raw2, str) else _json_number(raw2)
        fn = halfplane_hilbert if args.kind == "half-h" else halfplane_poincare
        value = fn(z1, z2)
    else:
        raw_v = points.get("v", args.v)
        raw_w = points.get("w", args.w)
        if raw_v is None or raw_w is None:
            raise ArgumentError(f"{args.kind} needs --v and --w")
        v = _parse_vector(raw_v) if isinstance(raw_v, str) else np.array([_json_number(x) for x in raw_v])
        w = _parse_vector(raw_w) if isinstance(raw_w, str) else np.array([_json_number(x) for x in raw_w])
        if args.kind == "hilbert-real":
            if np.any(v.imag != 0) or np.any(w.imag != 0):
                raise ArgumentError("hilbert-real needs real coordinates")
            value = hilbert_real(RealSimplexPoint(v.real), RealSimplexPoint(w.real))
        elif args.kind == "hilbert-complex":
            value = hilbert_complex(ComplexSimplexPoint(v), ComplexSimplexPoint(w))
        else:
            value = poincare_dp(ComplexSimplexPoint(v), ComplexSimplexPoint(w))

    if config.output_format == "json":
        print(dumps({"metric": args.kind, "value": value}))
    else:
        print(_fmt(value))
    return 0


def cmd_tau(args, config: RunConfig) -> int:
    matrix = _parse_matrix(args)
    values: Dict[str, Any] = {}
    if isinstance(matrix, PositiveMatrix):
        values["phi"] = birkhoff_phi(matrix)
        values["tau"] = birkhoff_tau(matrix)
    else:
        logger.info("🔧 Complex matrix: phi and tau are defined for positive matrices only")

    if matrix.entries.shape[0] == 2:
        m = MobiusMap.from_matrix(matrix, action=args.action, degenerate_ok=True)
        if m.is_positive_real:
            values["halfplane_tau"] = halfplane_tau_closed_form(m)
        for which in ("dH", "dP"):
            try:
                values[f"sup_{which}"] = sup_coeff_search(m, which, args.grid).value
            except HmpError as e:
                logger.warning(f"⚠️  sup_{which} unavailable: {e}")
        if args.at_z is not None:
            z = _parse_point(args.at_z)
            values["dH_coeff"] = infinitesimal_dH_coeff(m, z)
            values["dP_coeff"] = infinitesimal_dP_coeff(m, z)
    elif args.at_z is not None:
        raise ArgumentError("--at-z applies to 2x2 matrices only")

    _emit(config, values)
    return 0


def cmd_entropy(args, config: RunConfig) -> int:
    if args.model:
        model = load_model(args.model)
    elif args.p is not None and args.epsilon is not None:
        model = BscHmm.symmetric(args.p, args.epsilon)
    else:
        raise ArgumentError("give --model or both --p and --epsilon")

    scale = 1.0 / math.log(2.0) if args.bits else 1.0
    values: Dict[str, Any] = {"units": "bits" if args.bits else "nats"}
    if args.exact is not None:
        values["method"] = f"exact n={args.exact}"
        values["entropy"] = entropy_rate_exact(model, args.exact, workers=config.workers) * scale
    else:
        estimate, stderr = entropy_rate_mc(model, args.mc, seed=config.seed, chains=args.chains,
                                           workers=config.workers)
        values["method"] = f"mc length={args.mc} chains={args.chains}"
        values["entropy"] = estimate * scale
        values["stderr"] = stderr * scale
    _emit(config, values)
    return 0


def cmd_radius(args, config: RunConfig) -> int:
    problem = _problem_from_args(args)
    result = max_radius_search(problem, args.budget, seed=config.seed, workers=config.workers)
    best = result.best
    values: Dict[str, Any] = {
        "r_max": result.r_max,
        "R": best.R if best else None,
        "rho": best.rho if best else None,
        "feasible_samples": result.feasible_samples,
    }
    conditions = None
    if args.verify and best is not None:
        conditions = verify_conditions_sampled(problem, best, args.verify, seed=config.seed)
        values["sampled_violations"] = conditions.violations
    if result.diagnostic:
        values["diagnostic"] = result.diagnostic
    _emit(config, values)

    _write_pdf("radius", {
        "parameters": {"pi": problem.pi.tolist(), "epsilon0": problem.epsilon0, "budget": args.budget,
                       "seed": config.seed},
        "search": to_jsonable(result),
        "conditions": to_jsonable(conditions) if conditions else None,
        "diagnostic": result.diagnostic,
    }, args.pdf)
    return 0


def cmd_sweep(args, config: RunConfig) -> int:
    p_values = _parse_p_values(args.p)
    if not p_values:
        raise ArgumentError("no p values to sweep")
    rows = sweep(p_values, args.eps0, args.budget, seed=config.seed, workers=config.workers)
    text = dumps(rows) + "\n" if config.output_format == "json" else sweep_to_csv(rows)
    if args.out:
        out = Path(args.out).expanduser()
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
        logger.info(f"📄 Sweep written to: {out}")
    else:
        sys.stdout.write(text)
    infeasible = sum(1 for r in rows if r.r_max == 0)
    if infeasible:
        logger.warning(f"⚠️  {infeasible} of {len(rows)} points have r_max = 0")

    _write_pdf("sweep", {
        "parameters": {"epsilon0": args.eps0, "p": args.p, "budget": args.budget, "seed": config.seed},
        "rows": to_jsonable(rows),
    }, args.pdf)
    return 0


def run_check(name: str, fn: Callable[[], Tuple[bool, Any]]) -> CheckResult:
    started = _timestamp()
    try:
        (passed, result), dur = _timeit(fn)
        return CheckResult(name=name, status="success", passed=bool(passed), result=to_jsonable(result),
                           started_at=started, finished_at=_timestamp(), duration_seconds=dur)
    except Exception as e:
        logger.exception(f"Check {name} failed")
        return CheckResult(name=name, status="error", error=str(e),
                           started_at=started, finished_at=_timestamp())


def _matrix_checks(args, config: RunConfig) -> Tuple[Dict[str, Any], List[Tuple[str, Callable]]]:
    matrix = _parse_matrix(args)
    if not isinstance(matrix, PositiveMatrix):
        raise ArgumentError("certify needs a real positive matrix")
    if args.delta is not None and not 0 < args.delta < 1:
        raise ArgumentError(f"--delta must lie in (0, 1), got {args.delta}")
    r, delta, n, seed = args.r, args.delta or 1e-3, args.samples, config.seed
    # Invariance is checked at perturbation size r * delta, well inside the invariant regime.
    rng = chunk_rng(seed, 11)
    t_hat = ComplexMatrix(matrix.entries + r * delta * uniform_disk(rng, matrix.entries.shape))

    def contraction():
        report = certify_contraction(matrix, r, delta, n, seed=seed)
        return report.passed, report

    def birkhoff():
        report = certify_birkhoff_bound(matrix, n, seed=seed)
        return report.passed, report

    def invariance():
        report = certify_invariance(t_hat, delta, n, seed=seed, T=matrix)
        return report.failed == 0, report

    def maxone():
        report = lemma_maxone_suite(n, seed=seed)
        return report.violations == 0, report

    def aA():
        report = lemma_aA_suite(n, seed=seed)
        return report.violations == 0, report

    parameters = {"matrix": matrix.entries.tolist(), "r": r, "delta": delta, "invariance_r": r * delta}
    jobs = [("birkhoff_bound", birkhoff), ("lemma_maxone", maxone), ("lemma_aA", aA)]
    if np.all(matrix.entries > 0):
        jobs = [("contraction", contraction), ("invariance", invariance)] + jobs
    else:
        logger.warning("⚠️  Matrix has zero columns; skipping complex contraction and invariance checks")
    return parameters, jobs


def _tuple_checks(args, config: RunConfig) -> Tuple[Dict[str, Any], List[Tuple[str, Callable]]]:
    problem = _problem_from_args(args)
    parts = _parse_vector(args.tuple)
    if parts.size != 3 or np.any(parts.imag != 0):
        raise ArgumentError("--tuple needs three real values r,R,rho")
    t = FeasibleTuple(r=float(parts[0].real), R=float(parts[1].real), rho=float(parts[2].real))
    if not (0 <= t.r < problem.r_cap and 0 < t.R < s_interval(problem).s1 and 0 < t.rho < 1):
        raise ArgumentError(f"tuple {t} is outside the condition domain")
    n, seed = args.samples, config.seed

    def relaxed():
        s = s_interval(problem)
        flags = {
            "cond1": cond1(problem, t.R, t.rho),
            "cond2": cond2(problem.epsilon0, t.r, t.R, t.rho, s.s2),
            "cond3": cond3(problem, t.r, t.R, t.rho),
        }
        return verify_tuple(problem, t), {"s1": s.s1, "s2": s.s2, **flags}

    def sampled():
        report = verify_conditions_sampled(problem, t, n, seed=seed)
        return report.violations == 0, report

    parameters = {"pi": problem.pi.tolist(), "epsilon0": problem.epsilon0, "tuple": asdict(t)}
    return parameters, [("relaxed_conditions", relaxed), ("sampled_conditions", sampled)]


def cmd_certify(args, config: RunConfig) -> int:
    if args.tuple:
        parameters, jobs = _tuple_checks(args, config)
    else:
        parameters, jobs = _matrix_checks(args, config)
    parameters.update({"samples": args.samples, "seed": config.seed})

    results: Dict[str, CheckResult] = {}
    with ThreadPoolExecutor(max_workers=max(1, min(config.workers, len(jobs)))) as ex:
        future_map = {ex.submit(run_check, name, fn): name for name, fn in jobs}
        for fut in as_completed(future_map):
            name = future_map[fut]
            try:
                res: CheckResult = fut.result()
            except Exception as e:
                logger.exception("Worker crashed")
                res = CheckResult(name=name, status="error", error=str(e))
            results[name] = res

    # Timestamps stay out of the primary output so reruns are byte-identical.
    report = {
        "command": "certify",
        "parameters": parameters,
        "passed": all(r.passed for r in results.values()),
        "checks": {name: {"status": r.status, "passed": r.passed, "result": r.result, "error": r.error}
                   for name, r in sorted(results.items())},
    }
    print(dumps(report))

    print("\n===== Certification Run Summary =====", file=sys.stderr)
    for name, _fn in jobs:
        r = results[name]
        status = "✅" if r.status == "success" and r.passed else "❌"
        line = f"{status} {name:20s} -> {r.status}"
        if r.duration_seconds is not None:
            line += f"  |  {r.duration_seconds:.2f}s"
        if r.error:
            line += f"  |  error: {r.error}"
        print(line, file=sys.stderr)

    if args.manifest_dir:
        outdir = Path(args.manifest_dir).expanduser().resolve()
        outdir.mkdir(parents=True, exist_ok=True)
        run_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        manifest = {
            "run_id": run_id,
            "created_at": _timestamp(),
            "parameters": to_jsonable(parameters),
            "results": {k: asdict(v) for k, v in results.items()},
        }
        manifest_path = outdir / f"manifest_{run_id}.json"
        manifest_path.write_text(json.dumps(manifest, indent=2))
        print(f"\n🗂  Manifest saved to: {manifest_path}", file=sys.stderr)

    _write_pdf("certify", report, args.pdf)

    if any(r.status == "error" for r in results.values()):
        return 1
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None,
                        help="Root seed (default: HMP_SEED or a fixed constant)")
    common.add_argument("--workers", type=_positive_int, default=None,
                        help="Worker threads (default: HMP_WORKERS or 1)")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="Override a named tolerance; repeatable")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Warnings and errors only")
    return common


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=float, default=None, help="Symmetric chain pi_00 = pi_11 = p")
    p.add_argument("--pi", default=None, help="Full chain as p00,p01,p10,p11")
    p.add_argument("--eps0", type=float, default=None, help="Base crossover probability")
    p.add_argument("--problem", default=None, help="Problem JSON ({pi, epsilon0} or {p, epsilon0})")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="python -m src.cli",
        description="Hilbert metrics, contraction certificates and analyticity radius bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", parents=[common], help="Evaluate a metric")
    p.add_argument("kind", choices=["hilbert-real", "hilbert-complex", "dp", "half-h", "half-p"])
    p.add_argument("--v", default=None, help="Comma-separated coordinates (complex as 0.5+0.1j)")
    p.add_argument("--w", default=None, help="Comma-separated coordinates")
    p.add_argument("--z1", default=None, help="Half-plane point: re,im or a complex literal")
    p.add_argument("--z2", default=None, help="Half-plane point")
    p.add_argument("--points", default=None, help="JSON file with {v, w} or {z1, z2}")
    p.add_argument("--format", dest="output_format", choices=["text", "json"], default="text")
    p.set_defaults(handler=cmd_metric)

    p = sub.add_parser("tau", parents=[common], help="Contraction coefficients of a matrix")
    p.add_argument("--matrix", default=None, help="Row-major entries, e.g. 2,1,1,2")
    p.add_argument("--matrix-file", default=None, help="JSON list of rows")
    p.add_argument("--at-z", default=None, help="Evaluate the infinitesimal coefficients at re,im")
    p.add_argument("--action", choices=["column", "row"], default="column",
                   help="2x2 Möbius convention (default: column)")
    p.add_argument("--grid", type=_positive_int, default=None, help="Grid points per axis for the sup search")
    p.add_argument("--format", dest="output_format", choices=["text", "json"], default="text")
    p.set_defaults(handler=cmd_tau)

    p = sub.add_parser("entropy", parents=[common], help="Entropy rate of a hidden Markov process")
    p.add_argument("--model", default=None, help="Model JSON ({pi, epsilon} or {delta, phi})")
    p.add_argument("--p", type=float, default=None, help="Symmetric chain parameter")
    p.add_argument("--epsilon", type=float, default=None, help="Crossover probability")
    method = p.add_mutually_exclusive_group(required=True)
    method.add_argument("--exact", type=_positive_int, default=None, help="Exact H_n at horizon n")
    method.add_argument("--mc", type=_positive_int, default=None, help="Monte Carlo path length")
    p.add_argument("--chains", type=_positive_int, default=1, help="Independent Monte Carlo chains")
    p.add_argument("--bits", action="store_true", help="Report in bits instead of nats")
    p.add_argument("--format", dest="output_format", choices=["text", "json"], default="text")
    p.set_defaults(handler=cmd_entropy)

    p = sub.add_parser("radius", parents=[common], help="Certified lower bound on the analyticity radius")
    _add_problem_args(p)
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET, help="Random samples")
    p.add_argument("--verify", type=_positive_int, default=None,
                   help="Also sample the un-relaxed conditions with this many points")
    p.add_argument("--pdf", default=None, help="Write a PDF summary")
    p.add_argument("--format", dest="output_format", choices=["text", "json"], default="text")
    p.set_defaults(handler=cmd_radius)

    p = sub.add_parser("sweep", parents=[common], help="Radius bound along the symmetric family")
    p.add_argument("--eps0", type=float, required=True, help="Base crossover probability")
    p.add_argument("--p", required=True, help="start:stop:step (inclusive) or a comma list")
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET, help="Random samples per point")
    p.add_argument("--out", default=None, help="Output file (default: stdout)")
    p.add_argument("--pdf", default=None, help="Write a PDF summary")
    p.add_argument("--format", dest="output_format", choices=["csv", "json"], default="csv")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("certify", parents=[common], help="Run a certification suite, print a JSON report")
    p.add_argument("--matrix", default=None, help="Row-major entries of a positive matrix")
    p.add_argument("--matrix-file", default=None, help="JSON list of rows")
    p.add_argument("--r", type=float, default=1e-3, help="Matrix perturbation radius")
    p.add_argument("--delta", type=float, default=None, help="Relative neighborhood radius (default 1e-3)")
    p.add_argument("--tuple", default=None, help="Feasible tuple r,R,rho (with --p/--pi/--problem)")
    _add_problem_args(p)
    p.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES, help="Samples per check")
    p.add_argument("--manifest-dir", default=None, help="Directory for a timestamped run manifest")
    p.add_argument("--pdf", default=None, help="Write a PDF summary")
    p.set_defaults(handler=cmd_certify, output_format="json")

    return parser


def _configure_logging(args) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        config = RunConfig(
            seed=NumericsConfig.get_seed() if args.seed is None else args.seed,
            tolerances=_parse_tolerances(args.tol),
            output_format=args.output_format,
            workers=NumericsConfig.get_workers() if args.workers is None else args.workers,
        )
        NumericsConfig.apply_overrides(config.tolerances)
        NumericsConfig.log_configuration(args.command, config.seed, config.workers)
        return args.handler(args, config)
    except HmpError as e:
        logger.error(f"❌ {e}")
        return e.exit_code
    finally:
        NumericsConfig.reset_overrides()


if __name__ == "__main__":
    raise SystemExit(main())
