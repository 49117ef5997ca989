"""``fup``: command-line runner for the library.

Exit codes: 0 success, 2 usage error, 3 matrix-entry cap exceeded,
4 theorem violation or failed internal check (a reproduction payload is
written to stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .baker import (
    CutoffProfile,
    SupportSpec,
    build_baker,
    decay_exponent,
    propagation_check,
    spectrum,
)
from .cantor import Alphabet2D, GridSet, iterate
from .config import matrix_entry_cap
from .dft import GridFunction, beta_series, fup_norm, sharpness_witness
from .errors import (
    ConstructionFailedError,
    FUPError,
    PolySyntaxError,
    ResourceCapError,
    TheoremViolationError,
)
from .lines import (
    full_range_condition,
    line_in_cantor,
    line_margin,
    orthogonal_pair_condition,
)
from .polyexpr import PolyExpr, parse_poly, render_poly
from .polymethod import (
    BivarPoly,
    bezout_intersection,
    eval_zero_set,
    localize_to_line,
    separating_poly,
    seven_polynomials,
)

log = logging.getLogger("fup2d")

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_VIOLATION = 0, 2, 3, 4

__all__ = ["PolyExpr", "parse_poly", "render_poly", "RunConfig", "run", "main"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a command needs; serialized into every JSON output."""

    command: str
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    cap: int | None = None
    out: str = "json"
    output: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.out not in ("json", "csv"):
            raise UsageError(f"output format must be json or csv, got {self.out!r}")
        if self.cap is not None and int(self.cap) <= 0:
            raise UsageError("cap must be positive")
        for key in ("nmax", "nmin", "kmax", "kmin", "k", "count"):
            val = self.params.get(key)
            if val is not None and int(val) <= 0:
                raise UsageError(f"{key} must be positive")

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        known = {"command", "inputs", "params", "cap", "out", "output", "seed"}
        unknown = set(obj) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in obj:
            raise UsageError("config needs a command")
        return cls(**obj)

    def resolved(self) -> dict:
        d = asdict(self)
        d["cap"] = matrix_entry_cap(self.cap)
        d.pop("output")
        return d


# ---------------------------------------------------------------------------
# input helpers


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _alphabet(cfg: RunConfig, key: str) -> Alphabet2D:
    if key not in cfg.inputs:
        raise UsageError(f"--{key} is required")
    return Alphabet2D.from_json(_load_json(cfg.inputs[key]))


def _gridset(cfg: RunConfig, key: str) -> GridSet:
    return GridSet.from_json(_load_json(cfg.inputs[key]))


def _pair(text) -> tuple[int, int]:
    if isinstance(text, (list, tuple)):
        return int(text[0]), int(text[1])
    try:
        a, b = (int(t) for t in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"expected an integer pair like 1,2, got {text!r}") from exc
    return a, b


def _poly(cfg: RunConfig, key: str) -> BivarPoly:
    src = cfg.inputs.get(key)
    if src is None:
        raise UsageError(f"--{key} is required")
    if src.endswith(".json") and os.path.exists(src):
        return BivarPoly.from_json(_load_json(src))
    expr = parse_poly(src)
    if expr.degenerate:
        raise UsageError(f"--{key} is the zero polynomial (degenerate)")
    return expr.parsed


def _letters(cfg: RunConfig):
    dim = int(cfg.params.get("dim", 1))
    M = int(cfg.params["m"])
    if dim == 2:
        return M, _alphabet(cfg, "a"), dim
    text = cfg.params.get("alphabet")
    if text is None:
        raise UsageError("--alphabet is required for dim 1")
    return M, tuple(int(t) for t in str(text).split(",")), dim


def _cutoff(cfg: RunConfig) -> CutoffProfile:
    spec = cfg.params.get("cutoff")
    if spec is None:
        return CutoffProfile()
    return CutoffProfile.from_json(json.loads(spec) if isinstance(spec, str) else spec)


def _require_seed(cfg: RunConfig) -> np.random.Generator:
    if cfg.seed is None:
        raise UsageError(f"{cfg.command} battery needs --seed")
    return np.random.default_rng(cfg.seed)


def _random_function(rng: np.random.Generator, N: int) -> GridFunction:
    while True:
        density = rng.uniform(0.02, 1.0)
        mask = rng.random((N, N)) < density
        if mask.any():
            vals = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) * mask
            return GridFunction(N, 2, vals)


# ---------------------------------------------------------------------------
# commands; each returns (json_result, csv_rows or None)


def cmd_norm(cfg):
    if "x" in cfg.inputs:
        X, Y = _gridset(cfg, "x"), _gridset(cfg, "y")
    else:
        k = int(cfg.params.get("k", 1))
        A, B = _alphabet(cfg, "a"), _alphabet(cfg, "b")
        X, Y = iterate(A, k), iterate(B, k)
    nv = fup_norm(X, Y)
    return {"N": X.N, "norm": nv, "size_x": len(X), "size_y": len(Y)}, None


def cmd_beta(cfg):
    series = beta_series(_alphabet(cfg, "a"), _alphabet(cfg, "b"), int(cfg.params["kmax"]), cfg.cap)
    rows = [["k", "norm", "beta_k"]] + [[k, repr(n), repr(b)] for k, n, b in series.entries]
    return series.to_json(), rows


def cmd_line_check(cfg):
    A = _alphabet(cfg, "a")
    v = _pair(cfg.params["v"])
    w = line_in_cantor(A, v)
    out = {"v": list(v), "line": w is not None, "witness": w.to_json() if w else None}
    res = cfg.params.get("resolution")
    if res:
        out["margin"] = line_margin(A, v, int(res)).to_json()
    return out, None


def cmd_orthopair(cfg):
    return orthogonal_pair_condition(_alphabet(cfg, "a"), _alphabet(cfg, "b")).to_json(), None


def cmd_full_range(cfg):
    return full_range_condition(_alphabet(cfg, "a"), _alphabet(cfg, "b")).to_json(), None


def cmd_sharpness(cfg):
    A, B = _alphabet(cfg, "a"), _alphabet(cfg, "b")
    k = int(cfg.params["k"])
    v = _pair(cfg.params["v"])
    f = sharpness_witness(A, B, k, v)
    out = {"k": k, "v": list(v), "support_size": len(f.support()), "norm": fup_norm(iterate(A, k), iterate(B, k))}
    if cfg.params.get("full"):
        out["f"] = f.to_json()
    return out, None


def _localize_one(f: GridFunction) -> dict:
    loc = localize_to_line(f)
    return {"N": f.N, "support": len(f.support()), "line": loc.line.to_json(), "R": loc.R, "degree": loc.separation.F.degree}


def cmd_localize(cfg):
    if "f" in cfg.inputs:
        f = GridFunction.from_json(_load_json(cfg.inputs["f"]))
        return _localize_one(f), None
    rng = _require_seed(cfg)
    nmin, nmax = int(cfg.params.get("nmin", 4)), int(cfg.params.get("nmax", 16))
    rows = []
    for _ in range(int(cfg.params.get("count", 200))):
        N = int(rng.integers(nmin, nmax + 1))
        rows.append(_localize_one(_random_function(rng, N)))
    table = [["N", "support", "a", "b", "c", "size", "degree"]] + [
        [r["N"], r["support"], r["line"]["a"], r["line"]["b"], r["line"]["c"], r["line"]["size"], r["degree"]] for r in rows
    ]
    return {"passed": len(rows), "cases": rows}, table


def cmd_separate(cfg):
    if "s" in cfg.inputs:
        return separating_poly(_gridset(cfg, "s")).to_json(), None
    rng = _require_seed(cfg)
    nmin, nmax = int(cfg.params.get("nmin", 4)), int(cfg.params.get("nmax", 16))
    rows = []
    for _ in range(int(cfg.params.get("count", 200))):
        N = int(rng.integers(nmin, nmax + 1))
        mask = _random_function(rng, N).support_mask()
        sep = separating_poly(GridSet.from_mask(mask))
        rows.append({"N": N, "size": int(mask.sum()), "line": sep.line.to_json(), "degree": sep.F.degree, "R": sep.R})
    table = [["N", "size", "line_size", "degree", "R"]] + [
        [r["N"], r["size"], r["line"]["size"], r["degree"], r["R"]] for r in rows
    ]
    return {"passed": len(rows), "cases": rows}, table


def cmd_cyclo_count(cfg):
    F = _poly(cfg, "poly")
    nmin, nmax = int(cfg.params.get("nmin", 1)), int(cfg.params["nmax"])
    counts = [(N, eval_zero_set(F, N).count) for N in range(nmin, nmax + 1)]
    out = {
        "poly": render_poly(F),
        "degree": F.degree,
        "bound_22D2": 22 * F.degree**2,
        "max_count": max(c for _, c in counts),
        "counts": {str(N): c for N, c in counts},
    }
    return out, [["N", "count"]] + [[N, c] for N, c in counts]


def cmd_seven_cover(cfg):
    F = _poly(cfg, "poly")
    polys = seven_polynomials(F)
    nmax = int(cfg.params.get("nmax", 64))
    missed = []
    rows = []
    for N in range(1, nmax + 1):
        zf = eval_zero_set(F, N).zeros
        cover = np.zeros((N, N), dtype=bool)
        for G in polys:
            cover |= eval_zero_set(G, N).zeros.mask()
        miss = [list(p) for p in zf if not cover[p]]
        missed += [[N] + p for p in miss]
        rows.append([N, len(zf), len(miss)])
    out = {"poly": render_poly(F), "transforms": [render_poly(G) for G in polys], "covered": not missed, "missed": missed}
    return out, [["N", "zeros", "missed"]] + rows


def cmd_bezout(cfg):
    verdict = bezout_intersection(_poly(cfg, "f"), _poly(cfg, "g"), int(cfg.params["n"]))
    return verdict.to_json(), None


def cmd_baker_build(cfg):
    M, letters, dim = _letters(cfg)
    B = build_baker(M, letters, int(cfg.params["k"]), _cutoff(cfg), dim, cfg.cap)
    out = {"M": M, "k": B.k, "N": B.N, "dim": dim, "norm": B.norm(), "cutoff": B.cutoff.to_json(), "smooth": B.cutoff.smooth}
    return out, None


def cmd_baker_spectrum(cfg):
    M, letters, dim = _letters(cfg)
    cutoff = _cutoff(cfg)
    rows, table = [], []
    for k in range(int(cfg.params.get("kmin", 1)), int(cfg.params["kmax"]) + 1):
        B = build_baker(M, letters, k, cutoff, dim, cfg.cap)
        ev = spectrum(B, cfg.cap)
        radius = float(abs(ev[0]))
        rows.append({"k": k, "N": B.N, "radius": radius, "eigenvalues": [[float(z.real), float(z.imag)] for z in ev]})
        table.append([k, B.N, repr(radius)] + [repr(float(x)) for z in ev for x in (z.real, z.imag)])
    return {"cutoff": cutoff.to_json(), "rows": rows}, table


def cmd_propagation(cfg):
    M, letters, dim = _letters(cfg)
    cutoff = _cutoff(cfg)
    phi = SupportSpec.from_json(json.loads(cfg.params["phi"]))
    psi = SupportSpec.from_json(json.loads(cfg.params["psi"]))
    rows = []
    for k in range(int(cfg.params.get("kmin", 2)), int(cfg.params["kmax"]) + 1):
        res = propagation_check(phi, psi, build_baker(M, letters, k, cutoff, dim, cfg.cap))
        rows.append({"k": k, "N": M**k, "norm": res.norm})
    norms = [r["norm"] for r in rows]
    fit = decay_exponent([r["N"] for r in rows], norms) if len(rows) > 1 and min(norms) > 0 else None
    out = {
        "hypothesis_met": res.hypothesis_met,
        "separation": res.separation if math.isfinite(res.separation) else None,
        "decay_exponent": fit,
        "rows": rows,
    }
    return out, [["k", "N", "norm"]] + [[r["k"], r["N"], repr(r["norm"])] for r in rows]


COMMANDS = {
    "norm": cmd_norm,
    "beta": cmd_beta,
    "line-check": cmd_line_check,
    "orthopair": cmd_orthopair,
    "full-range": cmd_full_range,
    "sharpness": cmd_sharpness,
    "localize": cmd_localize,
    "separate": cmd_separate,
    "cyclo-count": cmd_cyclo_count,
    "seven-cover": cmd_seven_cover,
    "bezout": cmd_bezout,
    "baker-build": cmd_baker_build,
    "baker-spectrum": cmd_baker_spectrum,
    "propagation": cmd_propagation,
}


# ---------------------------------------------------------------------------
# output


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def render(cfg: RunConfig, result, table) -> str:
    if cfg.out == "csv":
        if table is None:
            raise UsageError(f"{cfg.command} has no tabular output; use --out json")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(table)
        return buf.getvalue()
    doc = {"command": cfg.command, "config": cfg.resolved(), "version": __version__, "result": result}
    return json.dumps(_to_plain(doc), sort_keys=True, indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fup-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        result, table = COMMANDS[cfg.command](cfg)
        text = render(cfg, result, table)
    except (UsageError, PolySyntaxError, ValueError, KeyError) as exc:
        msg = f"missing parameter {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"fup {cfg.command}: error: {msg}", file=stderr)
        return EXIT_USAGE
    except ResourceCapError as exc:
        print(f"fup {cfg.command}: {exc}", file=stderr)
        return EXIT_CAP
    except (TheoremViolationError, ConstructionFailedError) as exc:
        payload = {"command": cfg.command, "config": cfg.resolved(), "error": str(exc)}
        if isinstance(exc, TheoremViolationError):
            payload["payload"] = exc.payload
        else:
            payload["point"] = list(exc.point) if exc.point is not None else None
        print(f"fup {cfg.command}: {exc}", file=stderr)
        print(json.dumps(_to_plain(payload), sort_keys=True), file=stderr)
        return EXIT_VIOLATION
    except FUPError as exc:
        print(f"fup {cfg.command}: error: {exc}", file=stderr)
        return EXIT_USAGE
    if cfg.output:
        write_atomic(cfg.output, text)
    else:
        stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

_INPUT_FLAGS = ("a", "b", "x", "y", "f", "g", "s", "poly")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fup", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--out", choices=("json", "csv"), default="json", help="output format")
        sp.add_argument("--output", help="write to this path (atomically) instead of stdout")
        sp.add_argument("--cap", type=int, help="matrix-entry cap (default: FUP_CAP or 262144)")
        sp.add_argument("--verbose", action="store_true")
        if seed:
            sp.add_argument("--seed", type=int, help="required for randomized batteries")
        return sp

    def two_alphabets(sp):
        sp.add_argument("--a", required=True, help="alphabet JSON for the physical side")
        sp.add_argument("--b", required=True, help="alphabet JSON for the frequency side")

    sp = common(sub.add_parser("norm", help="FUP norm of two iterates or two grid sets"))
    sp.add_argument("--a")
    sp.add_argument("--b")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--x", help="grid-set JSON (instead of --a/--b/--k)")
    sp.add_argument("--y")

    sp = common(sub.add_parser("beta", help="norm series over k = 1..kmax"))
    two_alphabets(sp)
    sp.add_argument("--kmax", type=int, required=True)

    sp = common(sub.add_parser("line-check", help="does the Cantor set contain a line along v"))
    sp.add_argument("--a", required=True)
    sp.add_argument("--v", required=True, help="direction a,b")
    sp.add_argument("--resolution", type=int, help="also report the sampled line margin")

    sp = common(sub.add_parser("orthopair", help="orthogonal line-pair obstruction"))
    two_alphabets(sp)

    sp = common(sub.add_parser("full-range", help="does the exponent beat the trivial bound"))
    two_alphabets(sp)

    sp = common(sub.add_parser("sharpness", help="build and verify a norm-one witness"))
    two_alphabets(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--full", action="store_true", help="include the witness values")

    for name, key, what in (("localize", "f", "grid-function"), ("separate", "s", "grid-set")):
        sp = common(sub.add_parser(name, help=f"single {what} JSON or a seeded random battery"), seed=True)
        sp.add_argument(f"--{key}", help=f"{what} JSON; omit to run the battery")
        sp.add_argument("--count", type=int, default=200)
        sp.add_argument("--nmin", type=int, default=4)
        sp.add_argument("--nmax", type=int, default=16)

    sp = common(sub.add_parser("cyclo-count", help="grid zero counts for N = nmin..nmax"))
    sp.add_argument("--poly", required=True, help='expression like "z^2+4*z*w+w-1" or a JSON file')
    sp.add_argument("--nmin", type=int, default=1)
    sp.add_argument("--nmax", type=int, required=True)

    sp = common(sub.add_parser("seven-cover", help="check the seven-polynomial cover"))
    sp.add_argument("--poly", required=True)
    sp.add_argument("--nmax", type=int, default=64)

    sp = common(sub.add_parser("bezout", help="common grid zeros against the Bezout bound"))
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--n", type=int, required=True)

    def baker_args(sp):
        sp.add_argument("--m", type=int, required=True)
        sp.add_argument("--alphabet", help="1D letters, e.g. 0,2")
        sp.add_argument("--a", help="alphabet JSON for dim 2")
        sp.add_argument("--dim", type=int, choices=(1, 2), default=1)
        sp.add_argument("--cutoff", help='cutoff JSON, e.g. {"kind":"smooth-bump"}')

    sp = common(sub.add_parser("baker-build", help="assemble an open baker's map"))
    baker_args(sp)
    sp.add_argument("--k", type=int, required=True)

    sp = common(sub.add_parser("baker-spectrum", help="spectra for k = kmin..kmax"))
    baker_args(sp)
    sp.add_argument("--kmin", type=int, default=1)
    sp.add_argument("--kmax", type=int, required=True)

    sp = common(sub.add_parser("propagation", help="norms of phi B psi and their decay"))
    baker_args(sp)
    sp.add_argument("--phi", required=True, help='support JSON, e.g. {"interval":[0.55,0.9]}')
    sp.add_argument("--psi", required=True)
    sp.add_argument("--kmin", type=int, default=2)
    sp.add_argument("--kmax", type=int, required=True)

    sp = sub.add_parser("run", help="run a command described by a JSON config")
    sp.add_argument("--config", required=True)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.command == "run":
        return RunConfig.from_dict(_load_json(ns.config))
    args = vars(ns).copy()
    command = args.pop("command")
    inputs = {k: args.pop(k) for k in _INPUT_FLAGS if k in args}
    inputs = {k: v for k, v in inputs.items() if v is not None}
    out = args.pop("out")
    output = args.pop("output")
    cap = args.pop("cap")
    seed = args.pop("seed", None)
    args.pop("verbose", None)
    params = {k: v for k, v in args.items() if v is not None}
    return RunConfig(command, inputs, params, cap, out, output, seed)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(ns, "verbose", False) else logging.WARNING)
    try:
        cfg = config_from_args(ns)
    except (UsageError, TypeError) as exc:
        print(f"fup: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
