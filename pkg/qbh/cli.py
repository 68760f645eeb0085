"""qbh CLI — verify quasi-biharmonic Lagrangian surface families from the terminal.

Usage:
    qbh <command> [args...]
    qbh --help

Examples:
    qbh families                                    # What can I verify?
    qbh verify --family thm9-i --grid 5x5 --out r.json
    qbh convergence --family thm9-i --step 0.1      # FD vs jets
    qbh curve --ode f=1 delta=0 --range 0:0.5       # Legendre ODE diagnostics
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Iterable

from qbh.checks import SCHEMA, VerificationReport, check_spec
from qbh.config import get_output_dir
from qbh.errors import CurveError, FamilyError, QbhError, UsageError
from qbh.families.registry import build_family, describe_family, family_names
from qbh.geometry import Window
from qbh.sessions import CURVE_PARAMS, ConvergenceSession, CurveSession, VerifySession

# ── Colors (disable with NO_COLOR env var) ──

_NO_COLOR = os.environ.get("NO_COLOR") or not sys.stderr.isatty()


def _dim(s: str) -> str:
    return s if _NO_COLOR else f"\033[2m{s}\033[0m"


def _bold(s: str) -> str:
    return s if _NO_COLOR else f"\033[1m{s}\033[0m"


def _cyan(s: str) -> str:
    return s if _NO_COLOR else f"\033[36m{s}\033[0m"


def _green(s: str) -> str:
    return s if _NO_COLOR else f"\033[32m{s}\033[0m"


def _yellow(s: str) -> str:
    return s if _NO_COLOR else f"\033[33m{s}\033[0m"


def _red(s: str) -> str:
    return s if _NO_COLOR else f"\033[31m{s}\033[0m"


def _err(message: str = "") -> None:
    print(message, file=sys.stderr)


EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_FAMILY = 3


# ── Help text ──

COMMANDS_HELP = {
    "families": {
        "usage": "qbh families",
        "desc": "List the registered surface families with ambient space, default window and provenance.",
        "example": (
            "  $ qbh families\n"
            "  thm9-i        CP²₁(4)   x∈[0.3, 1.3] y∈[0.3, 1.3]   paper-asserted\n"
            "  thm9-iii      CP²₁(4)   x∈[0.3, 1.3] y∈[0.3, 1.3]   paper-corrected"
        ),
        "hint": "Families marked paper-corrected are verified for internal consistency only.",
    },
    "verify": {
        "usage": (
            "qbh verify --family NAME [--param k=v ...] [--grid NxM] [--window a:b,c:d]\n"
            "           [--backend jet|fd] [--tol T] [--tol-check name=T ...] [--gauge G]\n"
            "           [--step H] [--threads N] [--out PATH|-] [--csv PATH] [--verbose]"
        ),
        "desc": (
            "Sweep a family over a grid and run every check at every point:\n"
            "first and second fundamental forms, Gauss curvature, the bitension field\n"
            "by three routes, Gauss/Codazzi equations, adapted-frame identities and\n"
            "the family's expected classification.\n\n"
            "Writes a JSON report (schema qbh-report/1). Exit codes:\n"
            "  0  all asserted checks pass\n"
            "  1  an asserted check failed (report still written)\n"
            "  2  bad flags\n"
            "  3  the family cannot be built (parameters, window, curve)"
        ),
        "example": (
            "  $ qbh verify --family thm9-i --param a=1 --grid 21x21 --out r.json\n"
            "  ✓ thm9-i [jet]: 28/28 checks pass, status pass\n\n"
            "  $ qbh verify --family thm7-flat-qbh --backend fd --out - | jq .status"
        ),
        "hint": "Per-check tolerances: --tol-check gauss-eq=1e-6. The CSV dump has one row per grid point.",
    },
    "convergence": {
        "usage": "qbh convergence --family NAME [--param k=v ...] [--step H] [--probes NxM] [--out PATH|-]",
        "desc": (
            "Compare the finite-difference backend at steps h, h/2, h/4 with exact jets\n"
            "on a probe grid and report the observed order per derivative level.\n"
            "Probes within 3h of the family's singular locus are flagged and left out."
        ),
        "example": (
            "  $ qbh convergence --family thm9-i --step 0.1\n"
            "  order 2: errors 3.1e-02 2.0e-03 1.3e-04  observed 3.97"
        ),
    },
    "curve": {
        "usage": (
            "qbh curve (--flat-null mu=M | --ode f=F delta=D) [--samples N] [--range a:b]\n"
            "          [--step H] [--drift-bound B] [--order-check] [--out PATH|-] [--csv PATH]\n"
            "          [--nodes PATH]"
        ),
        "desc": (
            "Light-cone curve diagnostics: cone, speed and Legendre residuals, κ̂², τ̂\n"
            "and ⟨z, iz'⟩ at sample parameters. --ode integrates the third-order Legendre\n"
            "curve equation with RK4 and reports constraint drift; --remark12 is an alias."
        ),
        "example": (
            "  $ qbh curve --ode f=1 delta=0 --range 0:0.5 --step 1e-3\n"
            "  κ̂² ∈ [6, 6]  τ̂ ∈ [-11.3137, -11.3137]  drift 3.2e-15"
        ),
        "hint": "--order-check integrates at h, h/2, h/4 and reports the observed step order.",
    },
}


def print_main_help() -> None:
    """Print the main help screen."""
    print(_bold("qbh") + " — Quasi-biharmonic Lagrangian surfaces, verified numerically\n")
    print(_dim("Lagrangian surfaces in C²₁, CP²₁(4) and CH²₁(−4), exact derivatives by Taylor jets."))
    print(_dim("Every identity is checked as a residual against a tolerance.\n"))

    print(_bold("Usage:") + " qbh <command> [args...]\n")

    groups = [
        (
            "Families",
            [
                ("families", "List registered families"),
            ],
        ),
        (
            "Verification",
            [
                ("verify --family NAME", "Run all checks over a grid"),
                ("convergence --family NAME", "FD backend vs jets"),
            ],
        ),
        (
            "Curves",
            [
                ("curve --flat-null mu=1", "Null Legendre curve in C²₁"),
                ("curve --ode f=1 delta=0", "Integrate the Legendre curve equation"),
            ],
        ),
    ]

    for group_name, cmds in groups:
        print(f"  {_cyan(group_name)}")
        for cmd, desc in cmds:
            print(f"    {cmd:<28} {_dim(desc)}")
        print()

    print(_bold("Quick start:"))
    print(_dim("  qbh families                               # What is registered"))
    print(_dim("  qbh verify --family thm9-i --grid 5x5      # Quick check"))
    print(_dim("  qbh verify --family thm9-i --out r.json    # Full 21x21 report"))
    print()
    print(_dim("Env: QBH_THREADS — cap grid concurrency"))
    print(_dim("     QBH_HOME — config directory (default: ~/.qbh)"))
    print(_dim("     NO_COLOR — disable colored output"))
    print()
    print(_dim("Run 'qbh <command> --help' for detailed help on any command."))


def print_command_help(cmd: str) -> None:
    """Print help for a specific command."""
    info = COMMANDS_HELP.get(cmd)
    if not info:
        print(f"Unknown command: {cmd}")
        print("Run 'qbh --help' to see all commands.")
        return

    print(_bold(info["usage"]))
    print()
    print(info["desc"])

    if "example" in info:
        print(f"\n{_cyan('Example:')}")
        print(info["example"])

    if "hint" in info:
        print(f"\n{_yellow('💡 Tip:')} {info['hint']}")


# ── Argument parsing ──


def _value(args: list[str], i: int) -> str:
    if i + 1 >= len(args):
        raise UsageError(f"{args[i]} needs a value")
    return args[i + 1]


def _float(text: str, flag: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{flag} expects a number, got '{text}'") from None


def _positive(text: str, flag: str) -> float:
    value = _float(text, flag)
    if not value > 0:
        raise UsageError(f"{flag} must be positive, got {text}")
    return value


def _int(text: str, flag: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"{flag} expects an integer, got '{text}'") from None
    if value < 1:
        raise UsageError(f"{flag} must be at least 1, got {value}")
    return value


def _key_value(text: str, flag: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise UsageError(f"{flag} expects key=value, got '{text}'")
    return key.strip(), _float(value, flag)


def _pair(text: str, sep: str, flag: str) -> tuple[str, str]:
    left, found, right = text.partition(sep)
    if not found:
        raise UsageError(f"{flag}: cannot parse '{text}'")
    return left, right


def _grid(text: str, flag: str = "--grid") -> tuple[int, int]:
    nx, ny = _pair(text.lower(), "x", flag)
    return _int(nx, flag), _int(ny, flag)


def _interval(text: str, flag: str) -> tuple[float, float]:
    lo, hi = _pair(text, ":", flag)
    a, b = _float(lo, flag), _float(hi, flag)
    if b <= a:
        raise UsageError(f"{flag}: empty interval {text}")
    return a, b


def _window(text: str) -> Window:
    xs, ys = _pair(text, ",", "--window")
    return _interval(xs, "--window"), _interval(ys, "--window")


def _check_params(params: dict[str, float], allowed: Iterable[str], what: str) -> None:
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        takes = ", ".join(sorted(allowed)) or "no parameters"
        raise UsageError(f"unknown parameter {', '.join(unknown)} for {what} (takes: {takes})")


def _trailing_pairs(args: list[str], i: int, flag: str) -> tuple[dict[str, float], int]:
    """k=v tokens after a flag, up to the next flag."""
    out: dict[str, float] = {}
    j = i + 1
    while j < len(args) and not args[j].startswith("--") and "=" in args[j]:
        key, value = _key_value(args[j], flag)
        out[key] = value
        j += 1
    return out, j


def _output_path(text: str) -> Path:
    """Bare file names resolve against the configured output directory."""
    path = Path(text).expanduser()
    if path.is_absolute() or path.parent != Path("."):
        return path
    return get_output_dir() / path


def _emit_json(payload: dict[str, Any] | str, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if out == "-":
        sys.stdout.write(text)
        return
    if out:
        path = _output_path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        _err(f"{_green('Report saved to:')} {path}")


def _enable_verbose() -> None:
    logger = logging.getLogger("qbh")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)


def _on_progress(stage: str, message: str) -> None:
    if stage == "failed":
        icon = "✗"
    elif stage in ("done", "sampled"):
        icon = "✓"
    else:
        icon = "⏳"
    _err(f"  {icon} {_dim(message)}")


# ── Commands ──


def run_families(args: list[str]) -> None:
    for name in family_names():
        info = describe_family(name)
        (x0, x1), (y0, y1) = info["window"]
        window = f"x∈[{x0:g}, {x1:g}] y∈[{y0:g}, {y1:g}]"
        print(f"  {_cyan(f'{name:<22}')} {info['ambient']:<10} {window:<26} {_dim(info['provenance'])}")
        print(f"  {'':<22} {_dim(info['description'])}")


def _print_report_summary(report: VerificationReport) -> None:
    for name, check in report.checks.items():
        mark = _green("✓") if check.passed else (_red("✗") if check.asserted else _yellow("•"))
        role = "" if check.asserted else _dim(" (informational)")
        _err(
            f"  {mark} {name:<24} max {check.max_abs_residual:.2e}  tol {check.tolerance:.0e}"
            f"  {_dim(f'{check.points} pts')}{role}"
        )
    summary = report.classification
    flags = [flag for flag, on in summary["all"].items() if on]
    _err()
    _err(f"  {_bold('Classification:')} {', '.join(flags) or 'mixed'}"
         f"  ({summary['evaluated']}/{summary['points']} points)")
    if summary["indeterminate"]:
        _err(_yellow(f"  {len(summary['indeterminate'])} points near a classification threshold"))
    for entry in summary["errors"]:
        _err(_yellow(f"  skipped ({entry['point'][0]:.3f}, {entry['point'][1]:.3f}): {entry['error']}"))
    expected = report.expected
    _err(f"  {_bold('Expected:')} {expected['provenance']}"
         f"{'' if expected['asserted'] else _dim(' (not asserted)')}")
    if expected.get("note"):
        _err(_dim(f"  {expected['note']}"))


def run_verify(args: list[str]) -> None:
    family: str | None = None
    params: dict[str, float] = {}
    overrides: dict[str, float] = {}
    grid = (21, 21)
    window: Window | None = None
    backend = "jet"
    tol: float | None = None
    gauge = 1.0
    step: float | None = None
    threads: int | None = None
    out: str | None = None
    csv_path: str | None = None

    i = 0
    while i < len(args):
        flag = args[i]
        if flag == "--verbose":
            _enable_verbose()
            i += 1
            continue
        value = _value(args, i)
        if flag == "--family":
            family = value
        elif flag == "--param":
            key, v = _key_value(value, flag)
            params[key] = v
        elif flag == "--grid":
            grid = _grid(value)
        elif flag == "--window":
            window = _window(value)
        elif flag == "--backend":
            if value not in ("jet", "fd"):
                raise UsageError(f"--backend must be jet or fd, got '{value}'")
            backend = value
        elif flag == "--tol":
            tol = _positive(value, flag)
        elif flag == "--tol-check":
            key, v = _key_value(value, flag)
            check_spec(key)
            if not v > 0:
                raise UsageError(f"{flag} {key} must be positive, got {v:g}")
            overrides[key] = v
        elif flag == "--gauge":
            gauge = _float(value, flag)
            if gauge == 0:
                raise UsageError("--gauge must be nonzero")
        elif flag == "--step":
            step = _positive(value, flag)
        elif flag == "--threads":
            threads = _int(value, flag)
        elif flag == "--out":
            out = value
        elif flag == "--csv":
            csv_path = value
        else:
            raise UsageError(f"Unknown flag for verify: {flag}")
        i += 2

    if not family:
        raise UsageError("verify needs --family (see 'qbh families')")
    _check_params(params, describe_family(family)["params"], family)

    _err(_bold(f"🔍 Verifying {family}") + _dim(f"  grid {grid[0]}x{grid[1]}, {backend} backend"))
    session = VerifySession(
        family,
        params,
        grid=grid,
        window=window,
        backend=backend,
        tol=tol,
        overrides=overrides,
        gauge=gauge,
        step=step,
        threads=threads,
        on_progress=_on_progress,
    )
    result = session.run()
    report: VerificationReport = result["report"]

    _err()
    _print_report_summary(report)
    _emit_json(report.to_json(), out or f"{family}.json")
    if csv_path:
        path = report.write_csv(_output_path(csv_path))
        _err(f"{_green('Grid dump saved to:')} {path}")

    _err()
    if report.status == "pass":
        _err(_green(f"✓ {report}") + _dim(f"  ({result['duration_seconds']:.1f}s)"))
        return
    _err(_red(f"✗ {report}"))
    _err(_red(f"  failed: {', '.join(report.failed)}"))
    sys.exit(EXIT_CHECK_FAILED)


def run_convergence_cli(args: list[str]) -> None:
    family: str | None = None
    params: dict[str, float] = {}
    step = 0.1
    probes = (3, 3)
    out: str | None = None

    i = 0
    while i < len(args):
        flag = args[i]
        value = _value(args, i)
        if flag == "--family":
            family = value
        elif flag == "--param":
            key, v = _key_value(value, flag)
            params[key] = v
        elif flag == "--step":
            step = _positive(value, flag)
        elif flag == "--probes":
            probes = _grid(value, flag)
        elif flag == "--out":
            out = value
        else:
            raise UsageError(f"Unknown flag for convergence: {flag}")
        i += 2

    if not family:
        raise UsageError("convergence needs --family (see 'qbh families')")
    _check_params(params, describe_family(family)["params"], family)

    _err(_bold(f"📐 FD convergence on {family}") + _dim(f"  steps {step:g}, {step / 2:g}, {step / 4:g}"))
    patch = build_family(family, params)
    result = ConvergenceSession(patch, step, probes, on_progress=_on_progress).run()

    for level, data in result["levels"].items():
        errors = " ".join(f"{e:.1e}" for e in data["errors"])
        order = data["observed_order"]
        shown = f"{order:.2f}" if order is not None else "at rounding floor"
        _err(f"  order {level}: errors {errors}  observed {shown}")
    if result["ill_conditioned"]:
        _err(_yellow(f"  {len(result['ill_conditioned'])} ill-conditioned probes left out"))

    payload = {
        "schema": SCHEMA,
        "command": "convergence",
        "family": family,
        "params": params,
        **{k: v for k, v in result.items() if k not in ("family", "duration_seconds")},
        "timings": {"total_seconds": result["duration_seconds"]},
    }
    _emit_json(payload, out)


def _write_samples_csv(samples: list[dict[str, float]], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        columns = list(samples[0]) if samples else []
        writer.writerow(columns)
        for row in samples:
            writer.writerow([repr(float(row[c])) for c in columns])
    return path


def run_curve(args: list[str]) -> None:
    mode: str | None = None
    params: dict[str, float] = {}
    samples = 50
    t_range = (0.0, 1.0)
    step = 1e-3
    drift_bound: float | None = 1e-8
    order_check = False
    out: str | None = None
    csv_path: str | None = None
    nodes: str | None = None

    i = 0
    while i < len(args):
        flag = args[i]
        if flag in ("--flat-null", "--ode", "--remark12"):
            if mode is not None:
                raise UsageError("choose one of --flat-null or --ode")
            mode = "flat-null" if flag == "--flat-null" else "ode"
            params, i = _trailing_pairs(args, i, flag)
            continue
        if flag == "--order-check":
            order_check = True
            i += 1
            continue
        value = _value(args, i)
        if flag == "--samples":
            samples = _int(value, flag)
        elif flag == "--range":
            t_range = _interval(value, flag)
        elif flag == "--step":
            step = _positive(value, flag)
        elif flag == "--drift-bound":
            drift_bound = _positive(value, flag)
        elif flag == "--out":
            out = value
        elif flag == "--csv":
            csv_path = value
        elif flag == "--nodes":
            nodes = value
        else:
            raise UsageError(f"Unknown flag for curve: {flag}")
        i += 2

    if mode is None:
        raise UsageError("curve needs --flat-null mu=… or --ode f=… delta=…")
    _check_params(params, CURVE_PARAMS[mode], f"--{mode}")

    _err(_bold(f"〰 Curve ({mode})") + _dim(f"  {params}"))
    session = CurveSession(
        mode,
        params,
        samples=samples,
        t_range=t_range,
        step=step,
        drift_bound=drift_bound,
        order_check=order_check,
        nodes_csv=str(_output_path(nodes)) if nodes else None,
        on_progress=_on_progress,
    )
    result = session.run()

    summary = result["summary"]
    _err(
        f"  κ̂² ∈ [{summary['kappa_sq'][0]:.10g}, {summary['kappa_sq'][1]:.10g}]"
        f"  τ̂ ∈ [{summary['tau_hat'][0]:.10g}, {summary['tau_hat'][1]:.10g}]"
        f"  ⟨z,iz'⟩ ∈ [{summary['pairing'][0]:.10g}, {summary['pairing'][1]:.10g}]"
    )
    drift = result["drift"]
    if drift is not None:
        line = f"  drift {drift['max']:.1e} (worst at t={drift['worst_t']:.4f})"
        _err(_yellow(line + " exceeds bound") if drift["exceeded"] else line)
    if result["step_order"] is not None and result["step_order"]["observed_order"] is not None:
        _err(f"  observed step order {result['step_order']['observed_order']:.2f}")

    payload = {
        "schema": SCHEMA,
        "command": "curve",
        **{k: v for k, v in result.items() if k != "duration_seconds"},
        "timings": {"total_seconds": result["duration_seconds"]},
    }
    _emit_json(payload, out)
    if csv_path:
        path = _write_samples_csv(result["samples"], _output_path(csv_path))
        _err(f"{_green('Samples saved to:')} {path}")


# ── Entry point ──


def main() -> None:
    """CLI entry point."""
    args = sys.argv[1:]

    # No args or help flag
    if not args or args[0] in ("--help", "-h", "help"):
        print_main_help()
        return

    cmd = args[0].lower()
    cmd_args = args[1:]

    # Per-command help
    if cmd_args and cmd_args[0] in ("--help", "-h"):
        print_command_help(cmd)
        return

    # Version
    if cmd in ("--version", "-V", "version"):
        from qbh import __version__
        print(f"qbh {__version__}")
        return

    try:
        if cmd == "families":
            run_families(cmd_args)
        elif cmd == "verify":
            run_verify(cmd_args)
        elif cmd == "convergence":
            run_convergence_cli(cmd_args)
        elif cmd == "curve":
            run_curve(cmd_args)
        else:
            raise UsageError(f"Unknown command: {cmd}. Run 'qbh --help' to see all commands.")
    except UsageError as e:
        _err(_red(f"✗ {e}"))
        sys.exit(EXIT_USAGE)
    except (FamilyError, CurveError) as e:
        _err(_red(f"✗ {e}"))
        sys.exit(EXIT_FAMILY)
    except QbhError as e:
        _err(_red(f"✗ {e}"))
        sys.exit(1)
    except KeyboardInterrupt:
        pass
    except Exception as e:
        _err(_red(f"✗ Error: {e}"))
        sys.exit(1)


if __name__ == "__main__":
    main()
