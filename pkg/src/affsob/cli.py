"""Command-line front end.

Every subcommand resolves its options in three layers: built-in defaults,
then ``--config FILE`` (a JSON object keyed by option name, with budgets
under ``"budget"``), then explicit flags. The resolved configuration, the
seed and the tool version are embedded in every output file; nothing
time-dependent is, so reruns are byte-identical.

Exit status: 0 pass, 1 verification failure, 2 usage or configuration error.
The environment variable ``AFFSOB_THREADS`` caps worker threads; results do
not depend on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import __version__
from . import sharp_constants as sc
from .acceptance import DEFAULT_SEED, run_checks
from .convex_geometry import bp_check, body_from_spec, random_symmetric_polygon
from .functionals import Budget
from .functions import FamilyError, convex_fn_from_spec, function_from_spec, gaussian
from .scalar_kernel import Params
from .verifier import (
    SuiteConfig,
    SuiteReport,
    _judge,
    run_suite,
    verify_corollary,
    verify_entropy,
    verify_gn,
    verify_invariance,
    verify_main_lemma,
    verify_nguyen,
    verify_p1_mollified,
    verify_sobolev,
    verify_stronger,
)

__all__ = ["main", "RunConfig", "UsageError", "DEFAULT_SEED"]

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

INEQUALITIES = ("sobolev", "corollary", "gn", "entropy", "stronger", "main-lemma", "nguyen", "p1")
LIMIT_GN_GAP = 1e-3  # G/N limits against the S limit

BUDGET_FIELDS = {f.name for f in fields(Budget)} - {"seed"}

# defaults per subcommand; anything not listed defaults to None
DEFAULTS = {
    "constants": {"n": [3], "p": [2.0], "a": [0.0], "alpha": [], "limit_p1": False,
                  "convention": "sharp", "theta_form": "derived", "format": "json"},
    "verify": {"expect": "holds", "which": "sobolev", "shape": "cylinder", "format": "json"},
    "sweep": {"n": [2, 3], "p": [1.5, 2.0, 3.0], "a": [0.0, 1.0], "alpha": [0.5, 2.0],
              "expensive": False, "fault": [], "format": "csv"},
    "centroid": {"body": [], "p": [1.0, 2.0, 3.0], "random": 0, "format": "json"},
    "invariance": {"n": 3, "p": 2.0, "a": 0.0, "count": 20, "format": "json"},
    "selftest": {"quick": False, "format": "json"},
}
COMMON = {"seed": DEFAULT_SEED, "budget": {}, "out": None, "csv_out": None, "verbose": 0}


class UsageError(Exception):
    """Bad flags, config or input specs; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved options of one invocation."""

    command: str
    options: tuple  # sorted (name, value) pairs
    budget: Budget
    seed: int

    def get(self, key, default=None):
        return dict(self.options).get(key, default)

    def as_dict(self) -> dict:
        b = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.budget.__dict__.items()}
        return {"command": self.command, "seed": self.seed, "budget": b, **dict(self.options)}


# ------------------------------------------------------------------ parsing


def _add_common(sp):
    sp.add_argument("--config", help="JSON file of option values (flags override it)")
    sp.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--format", choices=("json", "csv"))
    sp.add_argument("-v", "--verbose", action="count", help="progress on stderr")
    g = sp.add_argument_group("quadrature budget")
    g.add_argument("--rho-nodes", type=int, dest="b_rho_nodes")
    g.add_argument("--w-nodes", type=int, dest="b_w_nodes")
    g.add_argument("--angle-nodes", type=int, dest="b_angle_nodes")
    g.add_argument("--directions", type=int, dest="b_directions",
                   help="direction rule size (n=3: angles on the circle; n=4: polar nodes)")
    g.add_argument("--dstar-table", type=int, dest="b_dstar_table")
    g.add_argument("--hemisphere", type=int, dest="b_hemisphere")
    g.add_argument("--scheme", choices=("polar", "map_to_cube", "monte_carlo"), dest="b_scheme")
    g.add_argument("--node-budget", type=int, dest="b_node_budget")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="affsob",
        description="Numerical verification of sharp affine weighted Sobolev-type inequalities on the half-space.",
        epilog="Exit status: 0 pass, 1 verification failure, 2 usage error. "
               "AFFSOB_THREADS caps worker threads.",
    )
    ap.add_argument("--version", action="version", version=f"affsob {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    sp = sub.add_parser("constants", argument_default=S, help="sharp constants in two forms")
    sp.add_argument("--n", type=int, nargs="+")
    sp.add_argument("--p", type=float, nargs="+")
    sp.add_argument("--a", type=float, nargs="+")
    sp.add_argument("--alpha", type=float, nargs="+")
    sp.add_argument("--limit-p1", action="store_true", help="extrapolated p -> 1 limits instead")
    sp.add_argument("--convention", choices=("sharp", "printed"))
    sp.add_argument("--theta-form", choices=("derived", "printed"))
    _add_common(sp)

    sp = sub.add_parser("verify", argument_default=S, help="both sides of one inequality")
    sp.add_argument("inequality", choices=INEQUALITIES)
    sp.add_argument("--function", help="function spec: JSON file or inline JSON object")
    sp.add_argument("--C", dest="C", help="convex function spec for 'nguyen' (file or inline JSON)")
    sp.add_argument("--which", choices=("sobolev", "gn_a", "gn_b", "entropy"), help="form for 'nguyen'")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--a", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--shape", choices=("cylinder", "ball"), help="indicator shape for 'p1'")
    sp.add_argument("--expect", choices=("holds", "equality", "strict"))
    _add_common(sp)

    sp = sub.add_parser("sweep", argument_default=S, help="every inequality over a parameter grid")
    sp.add_argument("--n", type=int, nargs="+")
    sp.add_argument("--p", type=float, nargs="+")
    sp.add_argument("--a", type=float, nargs="+")
    sp.add_argument("--alpha", type=float, nargs="+")
    sp.add_argument("--expensive", action="store_true", help="include n = 4")
    sp.add_argument("--fault", action="append", metavar="NAME=FACTOR",
                    help="multiply a constant by FACTOR (fault injection)")
    _add_common(sp)

    sp = sub.add_parser("centroid", argument_default=S, help="L_p centroid inequality on bodies")
    sp.add_argument("--body", action="append", help="body spec: JSON file or inline JSON object")
    sp.add_argument("--p", type=float, nargs="+")
    sp.add_argument("--random", type=int, metavar="K", help="also test K random symmetric polygons")
    _add_common(sp)

    sp = sub.add_parser("invariance", argument_default=S, help="transformation laws under random affine maps")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--a", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--count", type=int)
    sp.add_argument("--function", help="function spec (default: centred Gaussian)")
    _add_common(sp)

    sp = sub.add_parser("selftest", argument_default=S, help="the acceptance suite")
    sp.add_argument("--quick", action="store_true", help="smaller grids and fewer maps")
    sp.add_argument("--csv-out", help="also write the row table as CSV here")
    _add_common(sp)
    return ap


def _load_json(text_or_path: str, what: str):
    """Inline JSON object or path to a JSON file."""
    s = text_or_path.strip()
    try:
        if s.startswith("{") or s.startswith("["):
            return json.loads(s)
        with open(text_or_path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise UsageError(f"{what} {text_or_path!r}: malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    except OSError as e:
        raise UsageError(f"{what} {text_or_path!r}: {e.strerror}") from None


def resolve(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    given = {k: v for k, v in vars(ns).items() if k != "command"}
    opts = {**COMMON, **DEFAULTS[cmd]}
    budget = {}
    if "config" in given:
        path = given.pop("config")
        cfg = _load_json(path, "config")
        if not isinstance(cfg, dict):
            raise UsageError(f"config {path!r}: expected a JSON object")
        if cfg.get("command", cmd) != cmd:
            raise UsageError(f"config {path!r} is for command {cfg['command']!r}, not {cmd!r}")
        known = set(opts) | {"command", "inequality", "function", "C", "which", "shape", "expect",
                             "n", "p", "a", "alpha", "count"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"config {path!r}: unknown keys {unknown}")
        cfg = dict(cfg)
        cfg.pop("command", None)
        b = cfg.pop("budget", {}) or {}
        if not isinstance(b, dict) or set(b) - BUDGET_FIELDS:
            raise UsageError(f"config {path!r}: budget keys must be among {sorted(BUDGET_FIELDS)}")
        budget.update(b)
        opts.update(cfg)
    for k in list(given):
        if k.startswith("b_"):
            budget[k[2:]] = given.pop(k)
    opts.update(given)
    opts.pop("budget", None)
    seed = opts.pop("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise UsageError(f"seed must be a non-negative integer, got {seed!r}")
    try:
        if "panel_nodes" in budget:
            budget["panel_nodes"] = tuple(budget["panel_nodes"])
        b = Budget(**budget, seed=seed)
    except TypeError as e:
        raise UsageError(f"bad budget: {e}") from None
    return RunConfig(cmd, tuple(sorted(opts.items())), b, seed)


# ------------------------------------------------------------------- output


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (np.floating, float)):
        x = float(o)
        return x if math.isfinite(x) else repr(x)  # 'nan', 'inf', '-inf'
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    return o


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_jsonable(v), sort_keys=True, separators=(",", ":"))
    return str(v)


def _header(cfg: RunConfig, status: str) -> dict:
    return {"tool": "affsob", "version": __version__, "command": cfg.command,
            "config": cfg.as_dict(), "seed": cfg.seed, "status": status}


def render_json(cfg: RunConfig, status: str, payload: dict) -> str:
    doc = {**_header(cfg, status), **payload}
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def render_csv(cfg: RunConfig, status: str, rows, columns) -> str:
    buf = io.StringIO()
    meta = json.dumps(_jsonable(_header(cfg, status)), sort_keys=True, separators=(",", ":"))
    buf.write("# " + meta + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _write(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(cfg: RunConfig, ok: bool, payload: dict, rows, columns) -> int:
    status = "pass" if ok else "fail"
    if cfg.get("format") == "csv":
        text = render_csv(cfg, status, rows, columns)
    else:
        text = render_json(cfg, status, payload)
    _write(cfg.get("out"), text)
    if cfg.get("csv_out"):
        _write(cfg.get("csv_out"), render_csv(cfg, status, rows, columns))
    return EXIT_PASS if ok else EXIT_FAIL


def _log(cfg: RunConfig, msg: str, level: int = 1):
    if (cfg.get("verbose") or 0) >= level:
        print(msg, file=sys.stderr, flush=True)


def _as_list(v):
    if v is None:
        return []
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _params(n, p, a, alpha=None) -> Params:
    try:
        return Params(int(n), float(p), float(a), None if alpha is None else float(alpha))
    except (TypeError, ValueError) as e:
        raise UsageError(f"invalid parameters n={n}, p={p}, a={a}, alpha={alpha}: {e}") from None


# ---------------------------------------------------------------- commands


def cmd_constants(cfg: RunConfig) -> int:
    conv, tf = cfg.get("convention"), cfg.get("theta_form")
    alphas = _as_list(cfg.get("alpha"))
    for al in alphas:
        if not al > 0 or al == 1:
            raise UsageError(f"alpha must be > 0 and != 1, got {al}")
    records = []
    if cfg.get("limit_p1"):
        for n, a in itertools.product(_as_list(cfg.get("n")), _as_list(cfg.get("a"))):
            _params(n, 1.0, a)
            s = sc.limit_p_to_1("S_cal", n, a, convention=conv, theta_form=tf)
            for name in ("S_cal", "R_cal", "K_cal", "L_cal"):
                lim = sc.limit_p_to_1(name, n, a, convention=conv, theta_form=tf)
                rec = {"n": n, "a": a, "alpha": None, **lim.to_dict()}
                if name in ("S_cal", "R_cal", "K_cal"):
                    c = sc.affine_constant(name, Params(n, 1.0, a), conv, tf)
                    rec["closed_form"] = c.simplified
                    rec["rel_gap"] = c.rel_gap
                    rec["flagged"] = c.flagged
                else:
                    rec["flagged"] = not lim.converged  # different homogeneity: reported only
                records.append(rec)
            for al in alphas:
                name = "G_cal" if al > 1 else "N_cal"
                lim = sc.limit_p_to_1(name, n, a, al, convention=conv, theta_form=tf)
                gap = abs(lim.value / s.value - 1) if lim.converged and s.converged else math.inf
                records.append({"n": n, "a": a, "alpha": al, **lim.to_dict(), "S_limit": s.value,
                                "gap_to_S": gap, "flagged": not gap <= LIMIT_GN_GAP})
        columns = ("name", "n", "a", "alpha", "value", "spread", "converged", "closed_form",
                   "rel_gap", "S_limit", "gap_to_S", "flagged")
    else:
        for n, p, a in itertools.product(_as_list(cfg.get("n")), _as_list(cfg.get("p")), _as_list(cfg.get("a"))):
            P = _params(n, p, a)
            if not P.sobolev_ok:
                raise UsageError(f"need 1 <= p < n + a, got n={n}, p={p}, a={a}")
            for name in ("S_cal", "K_cal", "R_cal", "L_cal"):
                if name == "L_cal" and p == 1:
                    continue
                records.append(sc.affine_constant(name, P, conv, tf).to_dict())
            for al in alphas:
                Pa = _params(n, p, a, al)
                name = "G_cal" if al > 1 else "N_cal"
                records.append(sc.affine_constant(name, Pa, conv, tf).to_dict())
        for r in records:
            r.update({k: r["params"][k] for k in ("n", "p", "a", "alpha")})
        columns = ("name", "n", "p", "a", "alpha", "defining", "simplified", "rel_gap", "flagged",
                   "marker", "convention", "theta_form")
    ok = not any(r["flagged"] for r in records)
    return _emit(cfg, ok, {"records": records}, records, columns)


def _function(spec_text):
    spec = _load_json(spec_text, "function spec")
    if not isinstance(spec, dict):
        raise UsageError(f"function spec {spec_text!r}: expected a JSON object")
    return spec


VERIFY_COLUMNS = ("inequality", "n", "p", "a", "alpha", "digest", "lhs", "rhs", "ratio", "deficit",
                  "err_estimate", "tolerance", "pass", "equal_within", "expect", "ok", "error")


def cmd_verify(cfg: RunConfig) -> int:
    ineq = cfg.get("inequality")
    budget = cfg.budget
    if ineq == "p1":
        n, a = cfg.get("n"), cfg.get("a") or 0.0
        if n is None:
            raise UsageError("verify p1 needs --n")
        _params(n, 1.0, a)
        run = lambda: verify_p1_mollified(int(n), float(a), shape=cfg.get("shape"), budget=budget)
        P, f = None, None
    else:
        if cfg.get("function") is None:
            raise UsageError(f"verify {ineq} needs --function")
        spec = cfg.get("function")
        spec = dict(spec) if isinstance(spec, dict) else _function(spec)
        for key in ("n", "p", "a", "alpha"):
            flag = cfg.get(key)
            if flag is None:
                continue
            if key == "n" and "n" in spec and int(spec["n"]) != flag:
                raise UsageError(f"--n {flag} contradicts the function spec (n={spec['n']})")
            if key == "n":
                spec["n"] = flag
        try:
            f = function_from_spec(spec)
        except FamilyError as e:
            raise UsageError(f"function spec: {e}") from None
        p = cfg.get("p") if cfg.get("p") is not None else spec.get("p")
        a = cfg.get("a") if cfg.get("a") is not None else spec.get("a", 0.0)
        al = cfg.get("alpha") if cfg.get("alpha") is not None else spec.get("alpha")
        if p is None:
            raise UsageError("no exponent: give --p or a 'p' field in the function spec")
        P = _params(f.n, p, a, al)
        if ineq in ("sobolev", "corollary", "gn", "main-lemma") and not P.sobolev_ok:
            raise UsageError(f"verify {ineq} needs p < n + a")
        if ineq == "gn" and P.alpha is None:
            raise UsageError("verify gn needs --alpha (or an 'alpha' field)")
        if ineq == "nguyen":
            c_spec = cfg.get("C") if cfg.get("C") is not None else spec.get("C")
            if c_spec is None:
                raise UsageError("verify nguyen needs --C (or a 'C' field in the function spec)")
            if isinstance(c_spec, str):
                c_spec = _load_json(c_spec, "C spec")
            try:
                C = convex_fn_from_spec(f.n, c_spec)
            except (KeyError, TypeError, ValueError) as e:
                raise UsageError(f"C spec: {e}") from None
            which = cfg.get("which")
            if which in ("gn_a", "gn_b") and P.alpha is None:
                raise UsageError("nguyen GN forms need --alpha")
        table = {
            "sobolev": lambda: verify_sobolev(f, P, budget),
            "corollary": lambda: verify_corollary(f, P, budget),
            "gn": lambda: verify_gn(f, P, None, budget),
            "entropy": lambda: verify_entropy(f, P, budget),
            "stronger": lambda: verify_stronger(f, P, budget),
            "main-lemma": lambda: verify_main_lemma(f, P, budget),
            "nguyen": lambda: verify_nguyen(f, C, P, cfg.get("which"), budget),
        }
        run = table[ineq]
    expect = cfg.get("expect")
    try:
        rep = run()
    except Exception as e:  # numeric failure: reported, status 1
        err = f"{type(e).__name__}: {e}"
        row = {"inequality": ineq, "expect": expect, "ok": False, "error": err}
        if P is not None:
            row.update(P.as_dict())
        return _emit(cfg, False, {"reports": [row]}, [row], VERIFY_COLUMNS)
    ok = _judge(rep, expect)
    d = rep.to_dict()
    d.update({"equal_within": rep.equal_within(), "expect": expect, "ok": ok})
    row = {**d, **rep.params.as_dict()}
    return _emit(cfg, ok, {"reports": [d]}, [row], VERIFY_COLUMNS)


def _faults(items):
    out = []
    for it in items:
        name, sep, fac = str(it).partition("=")
        if not sep or name not in sc.AFFINE_NAMES:
            raise UsageError(f"--fault expects NAME=FACTOR with NAME in {sc.AFFINE_NAMES}, got {it!r}")
        try:
            out.append((name, float(fac)))
        except ValueError:
            raise UsageError(f"--fault factor must be a number, got {fac!r}") from None
    return tuple(out)


def cmd_sweep(cfg: RunConfig) -> int:
    for n, p, a in itertools.product(_as_list(cfg.get("n")), _as_list(cfg.get("p")), _as_list(cfg.get("a"))):
        _params(n, p, a)
    for al in _as_list(cfg.get("alpha")):
        if not al > 0 or al == 1:
            raise UsageError(f"alpha must be > 0 and != 1, got {al}")
    sc_cfg = SuiteConfig(
        ns=tuple(int(n) for n in _as_list(cfg.get("n"))),
        ps=tuple(float(p) for p in _as_list(cfg.get("p"))),
        as_=tuple(float(a) for a in _as_list(cfg.get("a"))),
        alphas=tuple(float(x) for x in _as_list(cfg.get("alpha"))),
        expensive=bool(cfg.get("expensive")),
        seed=cfg.seed,
        budget=cfg.budget,
        constant_faults=_faults(_as_list(cfg.get("fault"))),
    )
    rep = run_suite(sc_cfg, progress=lambda k: _log(cfg, k))
    rows = list(rep.csv_rows())
    payload = {"failures": rep.failures, "rows": rows}
    return _emit(cfg, rep.failures == 0, payload, rows, SuiteReport.CSV_FIELDS)


def cmd_centroid(cfg: RunConfig) -> int:
    bodies = []
    for i, b in enumerate(_as_list(cfg.get("body"))):
        spec = b if isinstance(b, dict) else _load_json(b, "body spec")
        label = spec.get("label") if isinstance(spec, dict) else None
        if label is None:
            label = os.path.splitext(os.path.basename(b))[0] if isinstance(b, str) and not b.lstrip().startswith("{") else f"body[{i}]"
        try:
            bodies.append((label, body_from_spec(spec)))
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"body spec {label!r}: {e}") from None
    k = int(cfg.get("random") or 0)
    if k < 0:
        raise UsageError("--random must be >= 0")
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    bodies += [(f"random_polygon[{i}]", random_symmetric_polygon(rng)) for i in range(k)]
    if not bodies:
        raise UsageError("centroid needs --body or --random")
    ps = [float(p) for p in _as_list(cfg.get("p"))]
    if any(not p >= 1 for p in ps):
        raise UsageError("centroid needs p >= 1")
    rows = []
    for label, K in bodies:
        for p in ps:
            rows.append({"body": label, "p": p, **bp_check(K, p)})
    ok = all(r["pass"] for r in rows)
    return _emit(cfg, ok, {"rows": rows}, rows, ("body", "p", "vol_K", "vol_GpK", "ratio", "pass"))


def cmd_invariance(cfg: RunConfig) -> int:
    n, p, a, al = cfg.get("n"), cfg.get("p"), cfg.get("a"), cfg.get("alpha")
    if cfg.get("function") is not None:
        spec = cfg.get("function")
        spec = dict(spec) if isinstance(spec, dict) else _function(spec)
        spec.setdefault("n", n)
        try:
            f = function_from_spec(spec)
        except FamilyError as e:
            raise UsageError(f"function spec: {e}") from None
        n = f.n
    else:
        f = gaussian(int(n))
    P = _params(n, p, a, al)
    count = int(cfg.get("count"))
    if count < 1:
        raise UsageError("--count must be positive")
    rep = verify_invariance(f, P, seed=cfg.seed, count=count, budget=cfg.budget)
    rows = [dict(r) for r in rep.rows]
    cols = ["lambda", "B"] + sorted({k for r in rows for k in r} - {"lambda", "B"})
    return _emit(cfg, rep.passed, {"report": rep.to_dict()}, rows, cols)


def cmd_selftest(cfg: RunConfig) -> int:
    def show(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = run_checks(seed=cfg.seed, quick=bool(cfg.get("quick")), progress=show)
    ok = all(r.passed for r in results)
    rows = [{"check": r.name, **row.to_dict()} for r in results for row in r.rows]
    payload = {"checks": [r.to_dict() for r in results], "passed": sum(r.passed for r in results),
               "total": len(results)}
    return _emit(cfg, ok, payload, rows, ("check", "case", "metric", "value", "bound", "sense", "ok"))


COMMANDS = {
    "constants": cmd_constants,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "centroid": cmd_centroid,
    "invariance": cmd_invariance,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)  # exits 2 on bad flags
    try:
        cfg = resolve(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as e:
        print(f"affsob {ns.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
