"""Command-line front end: one subcommand per operation, JSON reports, batch runs."""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .circle import Arc, Ifs, IntervalDomain, Word, as_word, compose_word, fd_derivative
from .errors import ConfigError, IfsError

SCHEMA = 1
REQUIRED = object()

# ---------------------------------------------------------------------------
# values


_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log}
_CONSTS = {"pi": math.pi, "e": math.e}


def parse_number(text, field="value") -> float:
    """Float from a literal or a small arithmetic expression such as ``sqrt(2)-1`` or ``1/3``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError:
        raise ConfigError(field, f"cannot parse number {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            ops = {ast.Add: a.__add__, ast.Sub: a.__sub__, ast.Mult: a.__mul__,
                   ast.Div: a.__truediv__, ast.Pow: a.__pow__}
            if type(node.op) in ops:
                return float(ops[type(node.op)](b))
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(field, f"unsupported expression {text!r}")

    try:
        v = ev(tree)
    except ConfigError:
        raise
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise ConfigError(field, f"cannot evaluate {text!r}: {exc}") from None
    if not math.isfinite(v):
        raise ConfigError(field, f"{text!r} is not finite")
    return v


def parse_numbers(text, field) -> list:
    if isinstance(text, (list, tuple)):
        return [parse_number(v, field) for v in text]
    parts = [p for p in str(text).split(",")]
    if not parts or any(not p.strip() for p in parts):
        raise ConfigError(field, f"malformed list {text!r}")
    return [parse_number(p, field) for p in parts]


def _to_int(value, field):
    v = parse_number(value, field)
    if v != int(v):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    return int(v)


def _to_bool(value, field):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes"):
        return True
    if str(value).lower() in ("0", "false", "no"):
        return False
    raise ConfigError(field, f"expected a boolean, got {value!r}")


def _to_arc(value, field):
    """``left,length`` pair."""
    v = parse_numbers(value, field)
    if len(v) != 2:
        raise ConfigError(field, "expected left,length")
    try:
        return Arc(v[0] % 1.0, v[1])
    except IfsError as exc:
        raise ConfigError(field, str(exc)) from None


def _to_choice(*choices):
    def conv(value, field):
        if value not in choices:
            raise ConfigError(field, f"expected one of {list(choices)}, got {value!r}")
        return value
    return conv


CONVERTERS = {
    "float": lambda v, f: parse_number(v, f),
    "int": _to_int,
    "bool": _to_bool,
    "str": lambda v, f: str(v),
    "arc": _to_arc,
}


def convert(kind, value, field):
    if value is None:
        return None
    conv = kind if callable(kind) else CONVERTERS[kind]
    return conv(value, field)


# ---------------------------------------------------------------------------
# systems


def _map_kinds():
    from .families import arnold, mobius, north_south, rotation

    return {
        "rotation": (1, 1, rotation),
        "north_south": (3, 3, north_south),
        "ns": (3, 3, north_south),
        "arnold": (2, 3, lambda a, b, k=1: arnold(a, b, int(k))),
        "mobius": (4, 4, lambda *p: mobius(p)),
    }


def parse_system(text: str, depth=None, lift=None, probabilities=None):
    """``Ifs`` (and zoo system or ``None``) from ``kind:args;kind:args`` or ``zoo:name``.

    Map kinds: ``rotation:alpha``, ``north_south:attractor,repeller,strength``
    (alias ``ns``), ``arnold:shift,amplitude[,k]``, ``mobius:a,b,c,d``.
    """
    from .factorization import lift_to_cover

    if not text or not str(text).strip():
        raise ConfigError("system", "empty system descriptor")
    text = str(text).strip()
    Z = None
    if text.startswith("zoo:"):
        from . import zoo

        try:
            Z = zoo.build(text[4:], depth)
        except IfsError as exc:
            raise ConfigError("system", str(exc)) from None
        F = Z.ifs
    else:
        kinds = _map_kinds()
        gens = []
        for part in text.split(";"):
            kind, _, args = part.strip().partition(":")
            if kind not in kinds:
                raise ConfigError("system", f"unknown map kind {kind!r}; choose from {sorted(kinds)}")
            lo, hi, make = kinds[kind]
            vals = parse_numbers(args, "system") if args.strip() else []
            if not lo <= len(vals) <= hi:
                raise ConfigError("system", f"{kind} takes {lo}..{hi} parameters, got {len(vals)}")
            try:
                gens.append(make(*vals))
            except IfsError as exc:
                raise ConfigError("system", f"{kind}: {exc}") from None
        F = Ifs(tuple(gens))
    if lift is not None and lift > 1:
        F = lift_to_cover(F, int(lift))
    if probabilities is not None:
        p = parse_numbers(probabilities, "probabilities")
        try:
            F = F.with_probabilities(p)
        except IfsError as exc:
            raise ConfigError("probabilities", str(exc)) from None
    return F, Z


# ---------------------------------------------------------------------------
# operations


def _word(F, w, field="word"):
    try:
        w = as_word(w)
        compose_word(F, w)
    except IfsError as exc:
        raise ConfigError(field, str(exc)) from None
    return w


def op_rotnum(F, Z, p, seed):
    from .rotation import translation_number

    w = _word(F, p["word"])
    est = translation_number(compose_word(F, w), p["n"], p["t0"])
    return {"verdict": "ok", "word": str(w), **est.to_dict()}


def op_gap_search(F, Z, p, seed):
    from .rotation import verify_gap, gap_word_search

    r = gap_word_search(F, p["epsilon"], p["max_len"], p["beam"])
    out = {"verdict": "gap found" if r.found else "no gap found", **r.to_dict()}
    if r.found:
        out["reevaluated"] = verify_gap(F, r.witness)
    return out


def op_rho_cross(F, Z, p, seed):
    from .rotation import rho_crossing_search

    w = _word(F, p["word"])
    r = rho_crossing_search(F, w, p["target"], (p["delta_lo"], p["delta_hi"]), p["n"], p["width"])
    out = {"verdict": "crossed" if r.crossed else "not crossed", **r.to_dict()}
    if r.crossed:
        out["delta"] = r.midpoint
    return out


def op_absorbing(F, Z, p, seed):
    from .reachability import detect_strictly_absorbing

    starts = None if p["starts"] is None else parse_numbers(p["starts"], "starts")
    r = detect_strictly_absorbing(F, p["epsilon"], p["resolution"], starts)
    d = r.to_dict()
    return {"verdict": "absorbing domain" if r.found else "none", "n_components": len(d["components"]), **d}


def op_simulate(F, Z, p, seed):
    from .random_dynamics import backward_stationary, empirical_stationary, stationarity_residual

    make = empirical_stationary if p["direction"] == "forward" else backward_stationary
    mu = make(F, p["x0"], p["n"], None, seed)
    G = F if p["direction"] == "forward" else F.inverse()
    out = {"verdict": "ok", "direction": p["direction"], "atoms": len(mu),
           "stationarity_residual": stationarity_residual(G if G.probabilities else G.with_probabilities(), mu),
           "histogram": mu.histogram(p["bins"])}
    return out, {"csv": mu.to_csv()}


def op_sync(F, Z, p, seed):
    from .random_dynamics import synchronization_test

    s = synchronization_test(F, p["cloud_size"], p["n"], p["trials"], seed, p["tol"])
    verdict = "synchronizing" if s.mean_collapse > 0.99 else "not synchronized"
    return {"verdict": verdict, **s.to_dict()}


def op_estimate_d(F, Z, p, seed):
    from .random_dynamics import (averaged_repeller_measure, backward_stationary, circle_w1, estimate_d,
                                  repeller_pushforward_check, sample_words)

    r = estimate_d(F, p["partition_size"], p["n"], p["trials"], rng_seed=seed)
    out = {"verdict": f"d={r.d_estimate}" if r.conclusive else "inconclusive", **r.to_dict()}
    out.pop("repeller_samples")
    if p["measure_checks"] and r.conclusive:
        Fp = F if F.probabilities else F.with_probabilities()
        words = sample_words(F.s, Fp.probs, p["n"] + 1, 10, seed + 7)
        out["pushforward_hausdorff"] = max(repeller_pushforward_check(Fp, w, p["partition_size"]) for w in words)
        mm = backward_stationary(Fp, 0.0, 100_000, None, seed + 5)
        out["repeller_measure_w1"] = circle_w1(averaged_repeller_measure(r), mm)
    return out


def op_minimal(F, Z, p, seed):
    from . import zoo
    from .circle import circle_distance
    from .minimality import (closure_defect, essential_intersection, minimal_set_estimate,
                             symmetric_difference)

    def estimate(d, res):
        if Z is not None:
            return zoo.estimate_minimal(Z, d, res, rng_seed=seed)
        return minimal_set_estimate(F, d, res, p["max_depth"], p["seeds"], rng_seed=seed)

    dirs = ("forward", "backward") if p["direction"] == "both" else (p["direction"],)
    ests = {d: estimate(d, p["resolution"]) for d in dirs}
    out = {"verdict": ", ".join(f"{d}: {'full circle' if e.full else 'proper'}" for d, e in ests.items())}
    for d, e in ests.items():
        out[d] = {**e.to_dict(), "closure_defect": closure_defect(F, e)}
        out[f"{d}_measure"] = e.measure
        if p["halving"]:
            out[f"{d}_halving_difference"] = symmetric_difference(e, estimate(d, p["resolution"] / 2))
    if len(ests) == 2:
        kw = dict(Z.extras.get("intersection", {})) if Z is not None else {}
        pts = essential_intersection(ests["forward"], ests["backward"], **kw)
        out["essential_intersection"] = pts
        out["n_intersection_points"] = len(pts)
        target = Z.predictions.get("intersection") if Z is not None else None
        if target and pts:
            # distance, in cells, from each predicted point to the nearest reported one and back
            dist = circle_distance(np.asarray(target)[:, None], np.asarray(pts)[None, :])
            out["intersection_error_cells"] = float(max(dist.min(axis=1).max(), dist.min(axis=0).max())
                                                    / p["resolution"])
    lines = ["cell,left," + ",".join(ests)]
    e0 = next(iter(ests.values()))
    for k in range(e0.mask.size):
        lines.append(f"{k},{k * e0.resolution!r}," + ",".join(str(int(e.mask[k])) for e in ests.values()))
    return out, {"csv": "\n".join(lines) + "\n"}


def op_hutchinson(F, Z, p, seed):
    from .minimality import hutchinson_certificate, robust_minimality_check, rotation_family_words

    r, f = p["rotation_index"], p["ns_index"]
    for name, i in (("rotation_index", r), ("ns_index", f)):
        if not 1 <= i <= F.s:
            raise ConfigError(name, f"generator index {i} out of range 1..{F.s}")
    if p["mode"] == "robust":
        rep = robust_minimality_check(F, r, f, p["n"], delta=p["delta"])
        cert = rep.certificate
        return {**rep.to_dict(), "margin_min": min(rep.margins.values()) if rep.margins else None,
                "max_contraction": max(cert.contraction_factors) if getattr(cert, "valid", False) else None}
    if p["I"] is None or p["J"] is None:
        raise ConfigError("I" if p["I"] is None else "J", "family mode needs both arcs")
    words = rotation_family_words(F, r, f, p["J"], p["max_rotations"])
    cert = hutchinson_certificate(F, p["I"], p["J"], words)
    out = cert.to_dict()
    out["verdict"] = "certificate" if cert.valid else f"failure: {cert.condition}"
    if cert.valid:
        out["max_contraction"] = max(cert.contraction_factors)
        out["n_words"] = len(cert.words)
    return out


def op_factor(F, Z, p, seed):
    from .factorization import deck_rotation, factorization_report

    d = p["d"]
    T = deck_rotation(d) if p["deck"] and d else None
    arcs = None
    if Z is not None and "bump_arc" in Z.predictions:
        J = Z.predictions["bump_arc"]
        ts = list(Z.predictions["bump_translates"])
        arcs = [J, *ts, *IntervalDomain([J, *ts]).complement().arcs]
    r = factorization_report(F, p["partition_size"], p["n"], p["trials"], p["N"],
                             profile_arcs=arcs, rng_seed=seed, d=d, T=T)
    out = r.to_dict()
    if arcs is not None:
        vals = [v for _, v in r.residual_profile]
        k = 1 + len(ts)
        out["bump_residual_min"] = min(vals[:k])
        out["elsewhere_residual_max"] = max(vals[k:])
    return out


def op_multipliers(F, Z, p, seed):
    from .morse_smale import distinct_multipliers_check, multiplier_perturbation_experiment, word_multiplier

    w = _word(F, p["word"])
    rep = distinct_multipliers_check(F, w, p["tol"], p["prefix"], p["resolution"])
    out = rep.to_dict()
    if rep.fixed is not None and rep.fixed.points:
        g = compose_word(F, w)
        errs = []
        for q in rep.fixed.points:
            m = word_multiplier(F, w, q.x)
            fd = float(fd_derivative(g.lift, q.x, 1e-6))
            errs.append(abs(m - fd) / abs(fd))
        out["fd_relative_error_max"] = max(errs)
    if p["perturb_word"]:
        e = multiplier_perturbation_experiment(F, _word(F, p["perturb_word"], "perturb_word"),
                                               p["perturb_k"], p["perturb_m"], eta=p["eta"])
        out["perturbation"] = e.to_dict()
        out["others_max_relative_change"] = e.others_max_relative_change
        out["target_relative_change"] = e.target_relative_change
    return out


def op_zoo(F, Z, p, seed):
    from . import zoo

    out = Z.to_dict()
    out["checks"] = zoo.fidelity_checks(Z)
    out["verdict"] = "built"
    return out


NO_SYSTEM = {"zoo"}

# name -> (function, help, {param: (kind, default, help)})
OPS = {
    "rotnum": (op_rotnum, "translation number of a word (default: generator 1)", {
        "word": ("str", "1", "word over the generators, e.g. 12"),
        "n": ("int", 100_000, "iterations"),
        "t0": ("float", 0.0, "start point"),
    }),
    "gap-search": (op_gap_search, "beam search for a gap word", {
        "epsilon": ("float", 0.01, "uniform lift translation"),
        "max_len": ("int", 200, "longest word"),
        "beam": ("int", 64, "states kept per length"),
    }),
    "rho-cross": (op_rho_cross, "translation at which a word's rotation number crosses a target", {
        "word": ("str", "1", "word"),
        "target": ("str", REQUIRED, "target value, e.g. 1/3"),
        "delta_lo": ("float", -0.05, "left end of the translation range"),
        "delta_hi": ("float", 0.05, "right end of the translation range"),
        "n": ("int", 10_000, "iterations per estimate"),
        "width": ("float", 1e-10, "final bracket width"),
    }),
    "absorbing": (op_absorbing, "strictly absorbing interval-domain detection", {
        "epsilon": ("float", 0.01, "orbit error size"),
        "resolution": ("float", 1 / 4096, "grid cell size (at most epsilon/4)"),
        "starts": ("str", None, "comma-separated start points (default 16 equispaced)"),
    }),
    "simulate": (op_simulate, "empirical stationary measure", {
        "n": ("int", 100_000, "orbit length"),
        "x0": ("float", 0.0, "start point"),
        "bins": ("int", 64, "histogram bins"),
        "direction": (_to_choice("forward", "backward"), "forward", "forward or backward (inverse IFS)"),
    }),
    "sync": (op_sync, "synchronization of a point cloud under common random words", {
        "n": ("int", 1000, "word length"),
        "trials": ("int", 10, "words"),
        "cloud_size": ("int", 64, "points per cloud"),
        "tol": ("float", 1e-6, "collapse distance"),
    }),
    "estimate-d": (op_estimate_d, "repeller count d of random compositions", {
        "partition_size": ("int", 2048, "arcs in the partition"),
        "n": ("int", 2000, "word length"),
        "trials": ("int", 50, "sampled words"),
        "measure_checks": ("bool", False, "also check repeller pushforward and measure identity"),
    }),
    "minimal": (op_minimal, "forward/backward minimal-set covers and essential intersection", {
        "resolution": ("float", 1 / 4096, "grid cell size"),
        "direction": (_to_choice("forward", "backward", "both"), "both", "which minimal set"),
        "max_depth": ("int", 20, "orbit depth for plain systems"),
        "seeds": ("int", 4, "independent starts"),
        "halving": ("bool", False, "also compare with the estimate at half the resolution"),
    }),
    "hutchinson": (op_hutchinson, "Hutchinson certificate for rotation plus contraction", {
        "mode": (_to_choice("robust", "family"), "robust", "robust check or a rotation family on given arcs"),
        "rotation_index": ("int", 1, "1-based index of the rotation"),
        "ns_index": ("int", 2, "1-based index of the map with an attractor"),
        "n": ("int", 10_000, "iterations for the rotation number"),
        "delta": ("float", 1e-4, "translation the certificate must survive"),
        "I": ("arc", None, "contraction arc left,length (family mode)"),
        "J": ("arc", None, "covered arc left,length (family mode)"),
        "max_rotations": ("int", 4000, "longest rotation power (family mode)"),
    }),
    "factor": (op_factor, "factorization report", {
        "d": ("int", None, "repeller count (estimated when omitted)"),
        "deck": ("bool", False, "test the deck rotation by 1/d instead of the measure map"),
        "partition_size": ("int", 2048, "arcs in the partition"),
        "n": ("int", 2000, "word length"),
        "trials": ("int", 50, "sampled words"),
        "N": ("int", 100_000, "stationary sample size"),
    }),
    "multipliers": (op_multipliers, "fixed points and multipliers of a composition", {
        "word": ("str", REQUIRED, "word"),
        "tol": ("float", 1e-3, "relative gap for distinct multipliers"),
        "prefix": ("str", None, "word whose orbits must avoid the attractors"),
        "resolution": ("float", 1 / 4096, "fixed-point grid"),
        "perturb_word": ("str", None, "run the perturbation experiment with this w"),
        "perturb_k": ("int", 1, "power k of generator 1"),
        "perturb_m": ("int", 1, "power m of w"),
        "eta": ("float", 1e-2, "near-identity tolerance for w^m"),
    }),
    "zoo": (op_zoo, "build a zoo system and emit its descriptor", {
        "name": ("str", REQUIRED, "zoo system name"),
    }),
}

CONFIG_KEYS = {"name", "operation", "system", "depth", "lift", "probabilities", "seed",
               "parameters", "expect", "output", "runs", "repeat"}


def resolve(raw: dict) -> dict:
    """Validated config with every parameter filled in; unknown keys are rejected."""
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown config key")
    op = raw.get("operation")
    if op not in OPS:
        raise ConfigError("operation", f"unknown operation {op!r}; choose from {sorted(OPS)}")
    param_table = OPS[op][2]
    params = dict(raw.get("parameters") or {})
    bad = set(params) - set(param_table)
    if bad:
        raise ConfigError(sorted(bad)[0], f"unknown parameter for {op}")
    resolved = {}
    for k, (kind, default, _) in param_table.items():
        if k in params and params[k] is not None:
            resolved[k] = convert(kind, params[k], k)
        elif default is REQUIRED:
            raise ConfigError(k, "required")
        else:
            resolved[k] = default
    seed = convert("int", raw.get("seed", 0), "seed")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    cfg = {"operation": op, "seed": seed, "parameters": resolved}
    if op not in NO_SYSTEM:
        if raw.get("system") is None:
            raise ConfigError("system", "required")
        cfg["system"] = str(raw["system"])
    depth = convert("int", raw.get("depth"), "depth")
    lift = convert("int", raw.get("lift"), "lift")
    if depth is not None:
        cfg["depth"] = depth
    if lift is not None:
        if lift < 1:
            raise ConfigError("lift", "must be at least 1")
        cfg["lift"] = lift
    if raw.get("probabilities") is not None:
        probs = parse_numbers(raw["probabilities"], "probabilities")
        cfg["probabilities"] = probs
    return cfg


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (Arc, IntervalDomain)):
        return _jsonable(obj.to_dict())
    if isinstance(obj, (Word, Fraction)):
        return str(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def execute(cfg: dict):
    """Run one resolved config; returns ``(report, attachments)``."""
    op = cfg["operation"]
    fn = OPS[op][0]
    p = cfg["parameters"]
    if op == "zoo":
        from . import zoo

        try:
            Z = zoo.build(p["name"], cfg.get("depth"))
        except IfsError as exc:
            raise ConfigError("name", str(exc)) from None
        F = Z.ifs
    else:
        F, Z = parse_system(cfg["system"], cfg.get("depth"), cfg.get("lift"), cfg.get("probabilities"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = fn(F, Z, p, cfg["seed"])
    result, attach = res if isinstance(res, tuple) else (res, {})
    report = {
        "schema": SCHEMA,
        "operation": op,
        "config": cfg,
        "versions": {"ifs_lab": __version__, "numpy": np.__version__},
        "result": result,
    }
    if caught:
        report["warnings"] = sorted({str(w.message) for w in caught})
    return report, attach


# ---------------------------------------------------------------------------
# batch


def _lookup(result, path):
    cur = result
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        elif isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(path)
    return cur


def check_expectations(result: dict, expect: dict) -> list:
    """Messages for failed expectations; rules are a value or ``{"lt"|"le"|"gt"|"ge"|"eq"|"in"|"abs_tol"...}``."""
    failures = []
    for path, rule in sorted((expect or {}).items()):
        try:
            v = _lookup(result, path)
        except (KeyError, IndexError, ValueError):
            failures.append(f"{path}: missing")
            continue
        if not isinstance(rule, dict):
            rule = {"eq": rule}
        for op, ref in sorted(rule.items()):
            ok = {
                "eq": lambda: (abs(v - ref) <= rule.get("abs_tol", 0.0)
                               if isinstance(v, (int, float)) and isinstance(ref, (int, float))
                               and not isinstance(v, bool) else v == ref),
                "lt": lambda: v < ref, "le": lambda: v <= ref,
                "gt": lambda: v > ref, "ge": lambda: v >= ref,
                "in": lambda: v in ref, "abs_tol": lambda: True,
                "len": lambda: len(v) == ref,
            }.get(op)
            if ok is None:
                failures.append(f"{path}: unknown rule {op}")
            else:
                try:
                    passed = ok()
                except TypeError:
                    passed = False
                if not passed:
                    failures.append(f"{path}={_jsonable(v)!r} fails {op} {ref!r}")
    return failures


def run_config(raw: dict) -> dict:
    """One batch row: runs (several when ``runs`` is given), expectation checks and repeat checks."""
    name = raw.get("name", "?")
    row = {"name": name, "operation": "", "status": "ok", "verdict": "", "metrics": "", "detail": "",
           "reports": []}
    try:
        unknown = set(raw) - CONFIG_KEYS
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config key")
        runs = raw.get("runs")
        if runs is None:
            runs = [{k: v for k, v in raw.items() if k not in ("name", "runs", "repeat", "output")}]
        else:
            shared = {k: raw[k] for k in ("seed", "system", "depth", "lift", "probabilities") if k in raw}
            runs = [{**shared, **r} for r in runs]
        repeat = convert("int", raw.get("repeat", 1), "repeat")
        verdicts, metrics, failures = [], [], []
        for i, r in enumerate(runs):
            expect = r.get("expect")
            cfg = resolve({k: v for k, v in r.items() if k != "expect"})
            texts = []
            for _ in range(max(1, repeat)):
                report, _ = execute(cfg)
                texts.append(dumps(report))
            if len(set(texts)) > 1:
                failures.append(f"run {i}: repeated reports differ")
            report = json.loads(texts[0])
            row["reports"].append(report)
            res = report["result"]
            verdicts.append(str(res.get("verdict", "")))
            for k in sorted(res):
                v = res[k]
                if k != "verdict" and isinstance(v, (int, float, bool)):
                    metrics.append(f"{k}={v!r}" if len(runs) == 1 else f"{i}.{k}={v!r}")
            failures += [f"run {i}: {m}" for m in check_expectations(res, expect)]
            if repeat > 1:
                tag = "identical_repeats" if len(runs) == 1 else f"{i}.identical_repeats"
                metrics.append(f"{tag}={len(set(texts)) == 1}")
        row["operation"] = "+".join(r.get("operation", "") for r in runs)
        row["verdict"] = "; ".join(verdicts)
        row["metrics"] = ";".join(metrics)
        if failures:
            row["status"] = "FAILED"
            row["detail"] = "; ".join(failures)
    except (IfsError, ValueError, TypeError, KeyError) as exc:
        row["status"] = "FAILED"
        row["detail"] = f"{type(exc).__name__}: {exc}"
    return row


SUMMARY_FIELDS = ("name", "operation", "status", "verdict", "metrics", "detail")


def summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def max_jobs(requested: int) -> int:
    cap = os.environ.get("IFS_LAB_THREADS")
    jobs = max(1, int(requested))
    if cap:
        try:
            jobs = min(jobs, max(1, int(cap)))
        except ValueError:
            raise ConfigError("IFS_LAB_THREADS", f"expected an integer, got {cap!r}") from None
    return jobs


def load_configs(directory) -> list:
    d = Path(directory)
    if not d.is_dir():
        raise ConfigError("config_dir", f"{directory} is not a directory")
    out = []
    for path in sorted(d.glob("*.json")):
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raw = {"name": path.stem, "__error__": f"invalid JSON: {exc}"}
        if not isinstance(raw, dict):
            raw = {"name": path.stem, "__error__": "config must be a JSON object"}
        raw.setdefault("name", path.stem)
        out.append(raw)
    return out


def _run_loaded(raw):
    if "__error__" in raw:
        return {"name": raw["name"], "operation": "", "status": "FAILED", "verdict": "", "metrics": "",
                "detail": raw["__error__"], "reports": []}
    return run_config(raw)


def batch(directory, jobs: int = 1):
    """Rows for every ``*.json`` config in ``directory``, in file-name order."""
    configs = load_configs(directory)
    if not configs:
        return []
    jobs = min(max_jobs(jobs), len(configs))
    if jobs == 1:
        return [_run_loaded(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_run_loaded, configs))


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sp, with_system=True):
    sp.add_argument("--seed", default=0, help="random seed (64-bit)")
    sp.add_argument("--json-out", help="write the JSON report here instead of stdout")
    sp.add_argument("--csv-out", help="write CSV data (measures, indicator vectors) here")
    sp.add_argument("--timing", action="store_true", help="add wall time to the report")
    if with_system:
        sp.add_argument("--system", required=True,
                        help="generators 'kind:args;kind:args' or 'zoo:name'")
        sp.add_argument("--lift", help="lift to the d-fold cover")
        sp.add_argument("--probabilities", help="comma-separated probabilities")
    sp.add_argument("--depth", help="construction depth for zoo systems")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ifs", description="Iterated function systems on the circle.")
    ap.add_argument("--version", action="version", version=f"ifs_lab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, helptext, param_table) in OPS.items():
        if name == "zoo":
            continue
        sp = sub.add_parser(name, help=helptext)
        _add_common(sp)
        for k, (kind, default, h) in param_table.items():
            flag = "--" + k.replace("_", "-")
            if kind == "bool":
                sp.add_argument(flag, dest=k, action="store_true", default=None, help=h)
            else:
                sp.add_argument(flag, dest=k, default=None,
                                help=h + ("" if default in (None, REQUIRED) else f" (default {default!r})")
                                + (" [required]" if default is REQUIRED else ""))
    zp = sub.add_parser("zoo", help="zoo systems")
    zsub = zp.add_subparsers(dest="zoo_command", required=True)
    zb = zsub.add_parser("build", help="build a zoo system and emit its descriptor")
    zb.add_argument("name")
    _add_common(zb, with_system=False)
    zsub.add_parser("list", help="list zoo system names")
    bp = sub.add_parser("batch", help="run every JSON config in a directory")
    bp.add_argument("config_dir")
    bp.add_argument("--jobs", type=int, default=1, help="concurrent configs (capped by IFS_LAB_THREADS)")
    bp.add_argument("--csv-out", help="summary CSV path (default stdout)")
    bp.add_argument("--json-out", help="write all reports as one JSON document")
    return ap


def _raw_from_args(ns) -> dict:
    op = "zoo" if ns.command == "zoo" else ns.command
    param_table = OPS[op][2]
    params = {k: getattr(ns, k) for k in param_table if getattr(ns, k, None) is not None}
    if op == "zoo":
        params = {"name": ns.name}
    raw = {"operation": op, "seed": ns.seed, "parameters": params}
    for k in ("system", "depth", "lift", "probabilities"):
        if getattr(ns, k, None) is not None:
            raw[k] = getattr(ns, k)
    return raw


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        if ns.command == "zoo" and ns.zoo_command == "list":
            from . import zoo

            sys.stdout.write("\n".join(sorted(zoo.BUILDERS)) + "\n")
            return 0
        if ns.command == "batch":
            rows = batch(ns.config_dir, ns.jobs)
            if not rows:
                print(f"warning: no *.json configs in {ns.config_dir}", file=sys.stderr)
            _emit(summary_csv(rows), ns.csv_out)
            if ns.json_out:
                Path(ns.json_out).write_text(dumps({"schema": SCHEMA, "rows": rows}))
            return 1 if any(r["status"] == "FAILED" for r in rows) else 0
        cfg = resolve(_raw_from_args(ns))
        t = time.perf_counter()
        report, attach = execute(cfg)
        if ns.timing:
            report["wall_time"] = time.perf_counter() - t
        _emit(dumps(report), ns.json_out)
        if ns.csv_out and "csv" in attach:
            Path(ns.csv_out).write_text(attach["csv"])
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IfsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
