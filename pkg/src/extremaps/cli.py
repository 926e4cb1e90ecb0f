"""Command-line front end.

Every subcommand writes one JSON report (or CSV for ``reproduce``) and exits
with 0 when the check passed / the map is extreme, 1 when it failed / is not
extreme / nothing was found, and 2 on input errors.

Defaults for --tol, --restarts, --samples, --seed and --output may be put in
a JSON file named by the EXTREMAPS_CONFIG environment variable; command-line
flags override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .ballmaps import (
    ENDPOINT_MARGIN,
    AffineBallMap,
    ball_extremality_report,
    contact_points,
    max_norm_on_sphere,
    planar_example_check,
    planar_f,
    planar_f_second_derivative,
    planar_g,
)
from .catalog import (
    ellipsoid_samples,
    example33,
    qubit_family,
    to_bloch_affine,
    to_channel,
)
from .channels import (
    ChoiMatrix,
    KrausChannel,
    channel_from_dict,
    channel_to_dict,
    choi_from_dict,
    choi_of,
    choi_to_dict,
    depolarizing_map,
    identity_channel,
    is_trace_preserving,
    kraus_from_choi,
    superop_from_dict,
    superop_matrix,
    superop_to_dict,
    tp_unital_report,
    trace_invariants,
    transposition_map,
)
from .errors import InputError, NotBallPositive, NotCompletelyPositive
from .extremality import (
    MODE_ALIASES,
    choi_extremality,
    find_pure_images,
    fix_extreme_certificate,
    invertible_extreme_report,
)
from .operators import psd_report
from .wigner import classify_wigner, positivity_violation, preserves_transition_probs

CONFIG_ENV = "EXTREMAPS_CONFIG"


@dataclass
class RunConfig:
    tol: float = 1e-9
    restarts: int = 64
    samples: int = 200
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if self.restarts < 1:
            raise InputError(f"restarts must be >= 1, got {self.restarts}")
        if self.samples < 1:
            raise InputError(f"samples must be >= 1, got {self.samples}")


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def parse_channel_file(path):
    """KrausChannel, ChoiMatrix or SuperOpMatrix, depending on the document."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    try:
        if "kraus" in doc:
            return channel_from_dict(doc)
        kind = doc.get("type")
        if kind == "choi":
            return choi_from_dict(doc)
        if kind == "superop":
            return superop_from_dict(doc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
    raise InputError(f"{path}: unrecognized document; expected a 'kraus' list or type 'choi'/'superop'")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    if hasattr(obj, "_asdict"):
        return obj._asdict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_report(command: str, cfg: RunConfig, passed: bool, result: dict, source=None) -> str:
    doc = {
        "tool": {"name": "extremaps", "version": __version__},
        "command": command,
        "input": None if source is None else str(source),
        "config": {k: v for k, v in asdict(cfg).items() if k != "output"},
        "seed": cfg.seed,
        "passed": bool(passed),
        "result": result,
    }
    return json.dumps(doc, default=_jsonable, sort_keys=True, indent=2) + "\n"


def _kraus_or_none(m, tol):
    if isinstance(m, KrausChannel):
        return m
    try:
        return kraus_from_choi(choi_of(m), tol)
    except NotCompletelyPositive:
        return None


def _bloch_affine_of(m) -> AffineBallMap:
    s = superop_matrix(m).matrix
    return AffineBallMap(s[1:, 1:], s[1:, 0])


# --- subcommands: each returns (passed, result dict) ------------------------------


def cmd_choi(args, cfg):
    m = parse_channel_file(args.path)
    c = choi_of(m)
    rep = psd_report(c.matrix, cfg.tol)
    return True, {"choi": choi_to_dict(c), "psd": rep._asdict()}


def cmd_kraus(args, cfg):
    m = parse_channel_file(args.path)
    try:
        ch = kraus_from_choi(choi_of(m), cfg.tol)
    except NotCompletelyPositive as exc:
        return False, {"completely_positive": False, "min_eigenvalue": exc.min_eigenvalue}
    return True, {"completely_positive": True, "channel": channel_to_dict(ch), "trace_invariants": trace_invariants(ch)._asdict()}


def cmd_check(args, cfg):
    m = parse_channel_file(args.path)
    wanted = {k for k in ("cp", "tp", "unital", "positive_sample") if getattr(args, k)} or {"cp"}
    out = {}
    ok = True
    if "cp" in wanted:
        rep = psd_report(choi_of(m).matrix, cfg.tol)
        out["cp"] = {"passed": rep.is_psd, "min_choi_eigenvalue": rep.min_eigenvalue, "choi_rank": rep.numeric_rank}
        ok &= rep.is_psd
    k = _kraus_or_none(m, cfg.tol)
    if "tp" in wanted:
        tp, res = is_trace_preserving(m, cfg.tol)
        out["tp"] = {"passed": tp, "residual": res}
        ok &= tp
    if "unital" in wanted:
        unital_res = float(np.linalg.norm(m.act(np.eye(m.dim)) - np.eye(m.dim), 2))
        un = unital_res <= cfg.tol
        out["unital"] = {"passed": un, "residual": unital_res}
        ok &= un
    if "positive_sample" in wanted:
        tp, _ = is_trace_preserving(m, cfg.tol)
        if m.dim == 2 and tp:
            mx = max_norm_on_sphere(_bloch_affine_of(m))[0]
            pos = mx <= 1 + cfg.tol
            out["positive"] = {"passed": pos, "method": "exact: Bloch-ball image, n=2", "max_bloch_norm": mx}
        else:
            wit = positivity_violation(m, cfg.samples, cfg.seed, cfg.tol)
            pos = wit is None
            out["positive"] = {
                "passed": pos,
                "method": "sampled necessary check (pure states); not a proof of positivity",
                "samples": cfg.samples,
                "violating_state": None if wit is None else wit.vector,
            }
        ok &= pos
    if k is not None and isinstance(m, KrausChannel):
        out["tp_unital"] = tp_unital_report(k, cfg.tol)._asdict()
    return ok, out


def cmd_extremal(args, cfg):
    m = parse_channel_file(args.path)
    mode = MODE_ALIASES.get(args.mode, args.mode)
    rep = choi_extremality(m, mode, cfg.tol)
    return rep.extreme, rep.as_dict()


def cmd_theorem5(args, cfg):
    m = parse_channel_file(args.path)
    rep = invertible_extreme_report(m, budget=cfg.restarts, seed=cfg.seed, tol=cfg.tol)
    passed = rep.cond_a_inverse_cp and rep.cond_b_single_invertible_kraus and rep.cond_de_rank_one_images
    return passed, rep.as_dict()


def cmd_wigner(args, cfg):
    m = parse_channel_file(args.path)
    cls = classify_wigner(m, cfg.tol, cfg.samples, cfg.seed)
    tp = preserves_transition_probs(m, cfg.samples, cfg.seed)
    out = cls.as_dict()
    out["residuals"]["transition_probability"] = tp.max_deviation
    return cls.branch != "NotWigner", out


def cmd_pure_image(args, cfg):
    m = parse_channel_file(args.path)
    res = find_pure_images(m, cfg.restarts, cfg.seed)
    return bool(res.witnesses), {
        "witnesses": [{"state": w.state.vector, "image": w.image, "residual": w.residual} for w in res.witnesses],
        "best_residual": res.best_residual,
        "diagnostics": res.diagnostics,
    }


def cmd_fix_extreme(args, cfg):
    m = parse_channel_file(args.path)
    cert = fix_extreme_certificate(m, cfg.restarts, cfg.seed, cfg.tol)
    return cert.certified, cert._asdict()


def cmd_qubit(args, cfg):
    pm = qubit_family(args.case, args.u, args.v)
    q = to_channel(pm, cfg.tol)
    phi = to_bloch_affine(pm)
    out = {
        "params": dict(zip(("lambda1", "lambda2", "lambda3", "t"), pm.params())),
        "completely_positive": q.completely_positive,
        "min_choi_eigenvalue": q.min_choi_eigenvalue,
        "superop": superop_to_dict(q.superop),
    }
    try:
        contacts = contact_points(phi, cfg.tol, cfg.samples, cfg.seed)
        out["ball_positive"] = True
        out["contacts"] = {
            "clusters": contacts.clusters,
            "affine_rank": contacts.affine_rank,
            "max_norm": contacts.max_norm,
        }
    except NotBallPositive as exc:
        out["ball_positive"] = False
        out["max_norm"] = exc.max_norm
    if q.kraus is not None:
        out["channel"] = channel_to_dict(q.kraus)
        out["extremality_tp"] = choi_extremality(q.kraus, "trace_preserving", cfg.tol).as_dict()
    out["transition_probabilities"] = preserves_transition_probs(q.superop, cfg.samples, cfg.seed)._asdict()
    return bool(out["ball_positive"]), out


def _load_ball_map(path) -> AffineBallMap:
    doc = _load_json(path)
    try:
        return AffineBallMap(doc["linear"], doc.get("offset"))
    except (KeyError, TypeError):
        raise InputError(f"{path}: ball map needs 'linear' (n x n) and optional 'offset' (n)") from None


def cmd_ball(args, cfg):
    phi = _load_ball_map(args.map)
    try:
        rep = contact_points(phi, cfg.tol, cfg.samples, cfg.seed)
    except NotBallPositive as exc:
        return False, {"ball_positive": False, "max_norm": exc.max_norm}
    ext = ball_extremality_report(phi, cfg.tol, cfg.samples, cfg.seed)
    out = rep.as_dict()
    out.update(ball_positive=True, contact_count=len(rep.contact_points), **ext._asdict())
    out["contact_points"] = out["contact_points"][:50]
    return True, out


def cmd_plane(args, cfg):
    rep = planar_example_check(args.alpha, args.grid)
    return rep.f_ge_alpha_g_everywhere, rep._asdict()


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def reproduce_csv(what: str, grid: int = 2001, case: int = 1, u: float = np.pi / 6, v: float | None = np.pi / 3, count: int = 2000) -> str:
    x = np.linspace(-1, 1, grid)
    if what in ("fg", "fmg"):
        if what == "fmg":
            x = x[1:-1]
        f, g = planar_f(x), planar_g(x)
        return _csv(zip(x, f, g, f - 1.01 * g), ["x", "f", "g", "f_minus_1.01g"])
    if what == "fpp":
        x = x[np.abs(x) <= 1 - ENDPOINT_MARGIN]
        return _csv(zip(x, planar_f_second_derivative(x)), ["x", "f_second_derivative"])
    if what == "ellipsoid":
        return _csv(ellipsoid_samples(qubit_family(case, u, v), count), ["x", "y", "z", "x_image", "y_image", "z_image"])
    raise InputError(f"unknown reproduce target {what!r}")


EXAMPLES = {
    "example33": lambda a: example33(a.alpha),
    "identity": lambda a: identity_channel(a.n),
    "depolarizing": lambda a: depolarizing_map(a.n),
    "transpose": lambda a: transposition_map(a.n),
    "qubit": lambda a: to_channel(qubit_family(a.case, a.u, a.v)).superop,
}


def example_document(m) -> dict:
    if isinstance(m, KrausChannel):
        return channel_to_dict(m)
    if isinstance(m, ChoiMatrix):
        return choi_to_dict(m)
    return superop_to_dict(superop_matrix(m))


def cmd_fix_extreme_search(args, cfg):
    """Random channels that are fix-extreme but not Wigner; an open experiment, nothing is asserted."""
    root = np.random.SeedSequence(cfg.seed)
    hits = []
    certified = 0
    for i, child in enumerate(root.spawn(args.trials)):
        rng = np.random.default_rng(child)
        n = args.n
        g = rng.standard_normal((args.kraus * n, n)) + 1j * rng.standard_normal((args.kraus * n, n))
        q, _ = np.linalg.qr(g)  # isometry: stacked V_i^dagger blocks give a trace-preserving map
        ops = tuple(q[k * n : (k + 1) * n].conj().T for k in range(args.kraus))
        ch = KrausChannel(ops)
        cert = fix_extreme_certificate(ch, cfg.restarts, int(child.generate_state(1)[0]), cfg.tol)
        if not cert.certified:
            continue
        certified += 1
        if classify_wigner(ch, max(cfg.tol, 1e-8), cfg.samples, cfg.seed).branch == "NotWigner":
            hits.append({"trial": i, "channel": channel_to_dict(ch), "certificate": cert._asdict()})
    return True, {
        "trials": args.trials,
        "n": args.n,
        "kraus_count": args.kraus,
        "certified_fix_extreme": certified,
        "non_wigner_fix_extreme": hits,
        "note": "exploratory; the outcome is recorded, not asserted",
    }


COMMANDS = {
    "choi": cmd_choi,
    "kraus": cmd_kraus,
    "check": cmd_check,
    "extremal": cmd_extremal,
    "theorem5": cmd_theorem5,
    "wigner": cmd_wigner,
    "pure-image": cmd_pure_image,
    "fix-extreme": cmd_fix_extreme,
    "qubit": cmd_qubit,
    "ball": cmd_ball,
    "plane": cmd_plane,
    "fix-extreme-search": cmd_fix_extreme_search,
}


_ANGLE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def angle(text: str) -> float:
    """A float, or a multiple of pi such as 'pi/4', '2pi/3', '-0.5*pi'."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"not a number or multiple of pi: {text!r}")
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    return coef * np.pi / (float(m.group(2)) if m.group(2) else 1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="relative tolerance (default 1e-9)")
    common.add_argument("--restarts", type=int, default=None, help="multistart budget (default 64)")
    common.add_argument("--samples", type=int, default=None, help="sample count (default 200)")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")

    p = _Parser(prog="extremaps", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"extremaps {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in [
        ("choi", "Choi matrix of a channel / map file"),
        ("kraus", "spectral Kraus form from a Choi (or any map) file"),
        ("theorem5", "invertible-extreme characterizations with pure-image search"),
        ("wigner", "classify a trace-preserving map as unitary / antiunitary / not Wigner"),
        ("pure-image", "search for pure states with pure images"),
        ("fix-extreme", "certify extremality from affinely independent pure images"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("path")

    sp = sub.add_parser("check", parents=[common], help="CP / TP / unital / sampled positivity checks")
    sp.add_argument("path")
    sp.add_argument("--cp", action="store_true")
    sp.add_argument("--tp", action="store_true")
    sp.add_argument("--unital", action="store_true")
    sp.add_argument(
        "--positive-sample",
        dest="positive_sample",
        action="store_true",
        help="positivity on sampled pure states: a necessary check only (exact for TP qubit maps)",
    )

    sp = sub.add_parser("extremal", parents=[common], help="Choi extremality criteria")
    sp.add_argument("path")
    sp.add_argument("--mode", choices=["unital", "tp", "trace_preserving", "bistochastic", "cone"], default="tp")

    sp = sub.add_parser("qubit", parents=[common], help="Pauli-diagonal qubit families")
    sp.add_argument("--case", type=int, choices=[1, 2, 3], required=True)
    sp.add_argument("--u", type=angle, required=True, help="angle, e.g. 0.5 or pi/6")
    sp.add_argument("--v", type=angle, default=None)

    sp = sub.add_parser("ball", parents=[common], help="contact analysis of an affine unit-ball map")
    sp.add_argument("--map", required=True, help='JSON file {"linear": [[...]], "offset": [...]}')

    sp = sub.add_parser("plane", parents=[common], help="planar convex body example")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--grid", type=int, default=10_000)

    sp = sub.add_parser(
        "fix-extreme-search", parents=[common], help="experiment: look for fix-extreme channels that are not Wigner"
    )
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--kraus", type=int, default=2)

    sp = sub.add_parser("reproduce", parents=[common], help="CSV data for the figures")
    sp.add_argument("what", choices=["fg", "fpp", "fmg", "ellipsoid"])
    sp.add_argument("--grid", type=int, default=2001)
    sp.add_argument("--case", type=int, choices=[1, 2, 3], default=1)
    sp.add_argument("--u", type=angle, default=float(np.pi / 6))
    sp.add_argument("--v", type=angle, default=float(np.pi / 3))

    sp = sub.add_parser("example", parents=[common], help="write a built-in map as an input file")
    sp.add_argument("name", choices=sorted(EXAMPLES))
    sp.add_argument("--alpha", type=float, default=0.2)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--case", type=int, choices=[1, 2, 3], default=1)
    sp.add_argument("--u", type=angle, default=float(np.pi / 6))
    sp.add_argument("--v", type=angle, default=float(np.pi / 3))
    return p


def load_config(args) -> RunConfig:
    values = {}
    cfg_path = os.environ.get(CONFIG_ENV)
    if cfg_path:
        doc = _load_json(cfg_path)
        unknown = set(doc) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise InputError(f"{cfg_path}: unknown config keys {sorted(unknown)}")
        values.update(doc)
    for key in ("tol", "restarts", "samples", "seed", "output"):
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    return RunConfig(**values)


def _emit(text: str, cfg: RunConfig):
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "reproduce":
            _emit(reproduce_csv(args.what, args.grid, args.case, args.u, args.v), cfg)
            return 0
        if args.command == "example":
            _emit(json.dumps(example_document(EXAMPLES[args.name](args)), indent=2) + "\n", cfg)
            return 0
        passed, result = COMMANDS[args.command](args, cfg)
        source = getattr(args, "path", None) or getattr(args, "map", None)
        _emit(render_report(args.command, cfg, passed, result, source), cfg)
        return 0 if passed else 1
    except InputError as exc:
        print(f"extremaps: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
