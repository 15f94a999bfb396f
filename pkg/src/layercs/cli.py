"""Command-line interface: spectrum tables, coherent-state coefficients, checks and statistics.

Exit codes: 0 on success, 1 when any check falls outside ``--tol``, 2 on
usage errors. Numbers are written with 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import algebra, measures, stats
from .coherent import CSClass, CSLabel, CSTag, build_state, overlap, overlap_closed_form
from .errors import LayerCSError
from .reports import VerificationReport
from .spectrum import LayerParams, QuantumNumbers, degeneracy_probe, orthonormality_check

SCHEMA_VERSION = "1"
PI_17 = float("%.17g" % math.pi)


class UsageError(Exception):
    pass


@dataclass
class Report:
    command: str
    params: dict
    columns: list
    results: list = field(default_factory=list)
    tol: Optional[float] = None
    failures: list = field(default_factory=list)


# --- serialization ------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _json(v, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f'{pad}{_json_str(str(k))}: {_json(x, indent + 1)}' for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        return "[\n" + ",\n".join(pad + _json(x, indent + 1) for x in v) + "\n" + end + "]"
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        # JSON has no NaN or infinity
        return "%.17g" % v if math.isfinite(v) else "null"
    return _json_str(str(v))


def _json_str(s: str) -> str:
    import json

    return json.dumps(s, ensure_ascii=False)


def emit(report: Report, format: str = "csv", path: Optional[str] = None) -> str:
    """Render ``report`` as CSV (header row first) or JSON and write it to ``path`` or stdout."""
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.columns)
        for row in report.results:
            w.writerow([_fmt(row.get(c)) for c in report.columns])
        text = buf.getvalue()
    elif format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": report.command, "params": report.params, "results": report.results}
        if report.tol is not None:
            doc["tol"] = report.tol
        text = _json(doc) + "\n"
    else:
        raise UsageError(f"--format: unknown format {format!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text


# --- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(name):
    def conv(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {s!r}")
        if not (math.isfinite(v) and v > 0):
            raise argparse.ArgumentTypeError(f"{name} must be finite and positive, got {s!r}")
        return v

    return conv


def _nonneg(name):
    def conv(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {s!r}")
        if not (math.isfinite(v) and v >= 0):
            raise argparse.ArgumentTypeError(f"{name} must be finite and nonnegative, got {s!r}")
        return v

    return conv


def _common(sp):
    sp.add_argument("--B", type=_positive("--B"), default=1.0, help="magnetic intensity")
    sp.add_argument("--d", type=_positive("--d"), default=PI_17, help="layer width")
    sp.add_argument("--tol", type=_positive("--tol"), default=1e-8, help="pass/fail threshold")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", default=None, help="output path (default stdout)")


def _class_args(sp):
    sp.add_argument("--class", dest="cls", required=True, choices=[t.value for t in CSTag])
    sp.add_argument("--n", type=int, default=None, help="fixed n (fixed-n classes)")
    sp.add_argument("--m", type=int, default=None, help="fixed m (fixed-m classes)")


def _label_args(sp, prime: bool = False):
    flag = lambda s: s + ("-prime" if prime else "")
    dest = lambda s: s + ("_prime" if prime else "")
    for name in ("J", "J1", "J2"):
        sp.add_argument(flag("--" + name), dest=dest(name), type=_nonneg(flag("--" + name)), default=None)
    for name in ("alpha", "alpha1", "alpha2"):
        sp.add_argument(flag("--" + name), dest=dest(name), type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="layercs", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", help="energy table E(m, n) with coincident levels")
    _common(sp)
    sp.add_argument("--m-max", type=int, default=4)
    sp.add_argument("--n-max", type=int, default=4)

    sp = sub.add_parser("coeffs", help="truncated coherent-state coefficients")
    _common(sp)
    _class_args(sp)
    _label_args(sp)
    sp.add_argument("--trunc-eps", type=_positive("--trunc-eps"), default=1e-12)

    sp = sub.add_parser("overlap", help="overlap of two states of one class")
    _common(sp)
    _class_args(sp)
    _label_args(sp)
    _label_args(sp, prime=True)
    sp.add_argument("--trunc-eps", type=_positive("--trunc-eps"), default=1e-12)

    sp = sub.add_parser("verify-moments", help="moment identities of the weight functions")
    _common(sp)
    _class_args(sp)
    sp.add_argument("--k-max", type=int, default=6)
    sp.add_argument("--row", type=int, default=0, help="row m for a nested layer weight")

    sp = sub.add_parser("verify-orthonormality", help="orthonormality of the eigenfunctions")
    _common(sp)
    sp.add_argument("--m-max", type=int, default=3)
    sp.add_argument("--l-max", type=int, default=2)
    sp.add_argument("--n-max", type=int, default=2)

    sp = sub.add_parser("verify-commutators", help="ladder commutators and algebra classification")
    _common(sp)
    sp.add_argument("--triple", required=True, choices=("fixed-n", "fixed-m", "landau", "layer", "tensor", "product-triple"))
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--m", type=int, default=0)
    sp.add_argument("--index-range", type=int, default=200)

    sp = sub.add_parser("verify-resolution", help="diagonal resolution-of-identity checks")
    _common(sp)
    _class_args(sp)
    sp.add_argument("--basis-range", type=int, default=4)

    sp = sub.add_parser("stats", help="Mandel parameter sweep")
    _common(sp)
    _class_args(sp)
    sp.add_argument("--J", nargs="+", type=_nonneg("--J"), default=None)
    sp.add_argument("--J1", nargs="+", type=_nonneg("--J1"), default=None)
    sp.add_argument("--J2", nargs="+", type=_nonneg("--J2"), default=None)
    return ap


def _params(a) -> LayerParams:
    return LayerParams(a.B, a.d)


def _make_class(a) -> CSClass:
    tag = CSTag(a.cls)
    if tag in (CSTag.FIXED_N, CSTag.FIXED_N_SHIFTED):
        if a.m is not None:
            raise UsageError(f"--m: not used by {tag.value}; give --n")
        return CSClass(tag, a.n if a.n is not None else 0)
    if tag in (CSTag.FIXED_M, CSTag.FIXED_M_SHIFTED):
        if a.n is not None:
            raise UsageError(f"--n: not used by {tag.value}; give --m")
        return CSClass(tag, a.m if a.m is not None else 0)
    if a.n is not None or a.m is not None:
        raise UsageError(f"--n/--m: {tag.value} has no fixed index")
    return CSClass(tag)


def _make_label(a, cls: CSClass, suffix: str = "") -> CSLabel:
    g = lambda k: getattr(a, k + suffix)
    if cls.tag.one_degree:
        if g("J") is None:
            raise UsageError(f"--J{suffix}: required for {cls.tag.value}")
        return CSLabel.one(g("J"), g("alpha"))
    if g("J1") is None or g("J2") is None:
        raise UsageError(f"--J1{suffix}/--J2{suffix}: required for {cls.tag.value}")
    return CSLabel.two(g("J1"), g("J2"), g("alpha1"), g("alpha2"))


def _class_params(a, cls, p) -> dict:
    out = {"B": p.B, "d": p.d, "class": cls.tag.value}
    if cls.fixed_index is not None:
        out["fixed_index"] = cls.fixed_index
    return out


def _check_row(label, rep: VerificationReport, tol: float, relative: bool = True) -> dict:
    row = rep.to_dict()
    row["label"] = label or rep.label
    row["tol"] = tol
    row["pass"] = rep.passed(tol, relative)
    return row


# --- commands -----------------------------------------------------------------


def cmd_spectrum(a) -> Report:
    p = _params(a)
    if a.m_max < 0 or a.n_max < 0:
        raise UsageError("--m-max/--n-max: must be nonnegative")
    rep = degeneracy_probe(p, a.m_max, a.n_max, tol=a.tol)
    partners = {}
    for k1, k2 in rep.colliding_pairs:
        partners.setdefault(k1, []).append(k2)
        partners.setdefault(k2, []).append(k1)
    rows = []
    for m, n, e in rep.levels:
        rows.append(
            {"m": m, "n": n, "energy": e, "coincides_with": " ".join(f"({x},{y})" for x, y in sorted(partners.get((m, n), [])))}
        )
    ratio = rep.ratio_is_rational_within
    params = {"B": p.B, "d": p.d, "m_max": a.m_max, "n_max": a.n_max, "ratio": rep.ratio, "ratio_rational": f"{ratio[0]}/{ratio[1]}" if ratio else None}
    return Report("spectrum", params, ["m", "n", "energy", "coincides_with"], rows)


def cmd_coeffs(a) -> Report:
    p = _params(a)
    cls = _make_class(a)
    label = _make_label(a, cls)
    s = build_state(cls, label, p, a.trunc_eps)
    rows = []
    if cls.tag.one_degree:
        for k, c in enumerate(s.coeffs):
            rows.append({"index": str(k), "re": float(c.real), "im": float(c.imag)})
    else:
        for (m, n), c in zip(itertools.product(range(s.coeffs.shape[0]), range(s.coeffs.shape[1])), s.coeffs.ravel()):
            if s.mask is None or s.mask[m, n]:
                rows.append({"index": f"({m},{n})", "re": float(c.real), "im": float(c.imag)})
    params = _class_params(a, cls, p)
    params.update({"label": label.to_dict(), "trunc_eps": a.trunc_eps, "tail_bound": s.tail_bound, "mass": s.mass})
    return Report("coeffs", params, ["index", "re", "im"], rows)


def cmd_overlap(a) -> Report:
    p = _params(a)
    cls = _make_class(a)
    l1 = _make_label(a, cls)
    l2 = _make_label(a, cls, "_prime")
    s1 = build_state(cls, l1, p, a.trunc_eps)
    s2 = build_state(cls, l2, p, a.trunc_eps)
    ov = overlap(s1, s2)
    row = {"re": ov.real, "im": ov.imag, "abs": abs(ov)}
    cols = ["re", "im", "abs"]
    failures = []
    try:
        cf = overlap_closed_form(cls, l1, l2, p)
    except LayerCSError:
        cf = None
    if cf is not None:
        # the truncation tail bounds the difference
        err = abs(ov - cf)
        budget = a.tol + 2.0 * math.sqrt(s1.tail_bound + s2.tail_bound)
        row.update({"closed_re": cf.real, "closed_im": cf.imag, "abs_err": err, "tol": budget, "pass": err <= budget})
        cols += ["closed_re", "closed_im", "abs_err", "tol", "pass"]
        if err > budget:
            failures.append(f"overlap closed form differs by {err:.3g}")
    params = _class_params(a, cls, p)
    params.update({"label": l1.to_dict(), "label_prime": l2.to_dict()})
    return Report("overlap", params, cols, [row], a.tol, failures)


_CHECK_COLUMNS = ["label", "target", "computed", "abs_err", "rel_err", "tol", "pass"]


def _finish_checks(report: Report) -> Report:
    report.failures = [r["label"] for r in report.results if not r["pass"]]
    return report


def cmd_verify_moments(a) -> Report:
    p = _params(a)
    cls = _make_class(a)
    if a.k_max < 0:
        raise UsageError("--k-max: must be nonnegative")
    rows = []
    for w in measures.weight_specs(cls, p, row=a.row):
        for k in range(a.k_max + 1):
            rep = measures.moment_check(w, k)
            rows.append(_check_row(f"factor {w.factor} {w.form.value} k={k}", rep, a.tol))
    params = _class_params(a, cls, p)
    params["k_max"] = a.k_max
    return _finish_checks(Report("verify-moments", params, _CHECK_COLUMNS, rows, a.tol))


def cmd_verify_orthonormality(a) -> Report:
    p = _params(a)
    qs = [
        QuantumNumbers(m, l, n)
        for m in range(a.m_max + 1)
        for l in range(-a.l_max, a.l_max + 1)
        for n in range(a.n_max + 1)
    ]
    rows = []
    for q1, q2 in itertools.product(qs, qs):
        rep = orthonormality_check(q1, q2, p)
        rows.append(_check_row(rep.label, rep, a.tol, relative=False))
    params = {"B": p.B, "d": p.d, "m_max": a.m_max, "l_max": a.l_max, "n_max": a.n_max}
    return _finish_checks(Report("verify-orthonormality", params, _CHECK_COLUMNS, rows, a.tol))


def cmd_verify_commutators(a) -> Report:
    p = _params(a)
    if a.index_range < 2:
        raise UsageError("--index-range: must be at least 2")
    R = a.index_range
    cols = ["relation", "max_deviation", "classified_algebra", "tol", "pass"]
    rows = []
    if a.triple in ("tensor", "product-triple"):
        s1, s2 = algebra.wh_generators(p), algebra.su11_generators(p)
        if a.triple == "tensor":
            rep = algebra.classify_tensor(s1, s2, min(R, 50), a.tol)
            expected = algebra.Algebra.TENSOR_WH_SU11.value
        else:
            rep = algebra.classify_product_triple(s1, s2, min(R, 20), a.tol)
            expected = algebra.Algebra.UNCLASSIFIED.value
        ok = rep.classified_algebra == expected
        rows.append({"relation": rep.relation, "max_deviation": rep.max_deviation, "classified_algebra": rep.classified_algebra, "tol": a.tol, "pass": ok})
    else:
        spec = {
            "fixed-n": lambda: algebra.wh_generators(p, a.n),
            "fixed-m": lambda: algebra.su11_generators(p, a.m),
            "landau": lambda: algebra.wh_generators(p),
            "layer": lambda: algebra.su11_generators(p),
        }[a.triple]()
        for rel in algebra.Relation:
            rep = algebra.commutator_check(spec, rel.value, R)
            rows.append({"relation": rel.value, "max_deviation": rep.max_deviation, "classified_algebra": None, "tol": a.tol, "pass": rep.max_deviation <= a.tol})
        rep = algebra.classify_algebra(spec, R, a.tol)
        rows.append({"relation": "classify", "max_deviation": rep.max_deviation, "classified_algebra": rep.classified_algebra, "tol": a.tol, "pass": rep.classified_algebra != algebra.Algebra.UNCLASSIFIED.value})
    params = {"B": p.B, "d": p.d, "triple": a.triple, "index_range": R}
    if a.triple == "fixed-n":
        params["n"] = a.n
    if a.triple == "fixed-m":
        params["m"] = a.m
    report = Report("verify-commutators", params, cols, rows, a.tol)
    report.failures = [r["relation"] for r in rows if not r["pass"]]
    return report


def cmd_verify_resolution(a) -> Report:
    p = _params(a)
    cls = _make_class(a)
    if not 1 <= a.basis_range <= 12:
        raise UsageError("--basis-range: must lie in [1, 12]")
    reps = measures.resolution_diagonal_check(cls, a.basis_range, p=p)
    rows = [_check_row(r.label, r, a.tol) for r in reps]
    params = _class_params(a, cls, p)
    params["basis_range"] = a.basis_range
    return _finish_checks(Report("verify-resolution", params, _CHECK_COLUMNS, rows, a.tol))


def cmd_stats(a) -> Report:
    p = _params(a)
    cls = _make_class(a)
    if cls.tag.one_degree:
        if not a.J:
            raise UsageError(f"--J: required for {cls.tag.value}")
        labels = [CSLabel.one(J) for J in sorted(a.J)]
        cols = ["J"]
    else:
        if not a.J1 or not a.J2:
            raise UsageError(f"--J1/--J2: required for {cls.tag.value}")
        labels = [CSLabel.two(J1, J2) for J1, J2 in sorted(itertools.product(a.J1, a.J2))]
        cols = ["J1", "J2"]
    cols = cols + ["mean_n", "mean_n2", "mandel_q", "oracle_q", "oracle_deviation", "closed_form_used", "tol", "pass"]
    rows = []
    for lab in labels:
        r = stats.mandel_q(cls, lab, p, a.tol)
        row = dict(zip(("J",) if cls.tag.one_degree else ("J1", "J2"), lab.J))
        row.update(r.to_dict())
        row["tol"] = a.tol
        row["pass"] = bool(r.oracle_deviation <= a.tol)
        rows.append(row)
    report = Report("stats", _class_params(a, cls, p), cols, rows, a.tol)
    report.failures = [f"J={r.get('J', (r.get('J1'), r.get('J2')))}" for r in rows if not r["pass"]]
    return report


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "coeffs": cmd_coeffs,
    "overlap": cmd_overlap,
    "verify-moments": cmd_verify_moments,
    "verify-orthonormality": cmd_verify_orthonormality,
    "verify-commutators": cmd_verify_commutators,
    "verify-resolution": cmd_verify_resolution,
    "stats": cmd_stats,
}


def run(argv=None) -> int:
    """Parse ``argv``, run the subcommand and write its report; returns the exit code."""
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
        report = _COMMANDS[a.command](a)
        emit(report, a.format, a.output)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (LayerCSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if report.failures:
        for f in report.failures:
            print(f"FAIL {f} (tol {report.tol:g})", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
