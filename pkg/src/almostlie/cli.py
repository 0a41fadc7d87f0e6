"""Command-line front end.

::

    almostlie recipe tangent m=2 > t2.spec
    almostlie check t2.spec
    almostlie cohomology t2.spec --max-degree 3

``check`` exits 0 iff every check passed, 1 if one failed, 2 on bad input.
Reports depend only on the input bytes and the flags; phase timings, when
requested with ``--timings``, go to stderr so stdout stays reproducible.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from fractions import Fraction

from . import gallery
from .algebroid import AlgebroidSpec, KernelEscapeError, SpecError, check_axioms, jacobiator_tensor
from .cochain import check_d_squared, check_dj_zero, q_coordinate_check
from .cohomology import betti_table
from .scalars import Polynomial, PolynomialSyntaxError, format_polynomial, parse_polynomial
from .specfile import dumps, loads

__all__ = ["main", "run_check", "run_cohomology", "make_recipe", "RECIPES"]


class UsageError(Exception):
    pass


class _Timer:
    def __init__(self):
        self.phases: list[tuple[str, float]] = []

    def run(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.phases.append((name, time.perf_counter() - t0))


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _spec_dims(spec: AlgebroidSpec) -> dict:
    return {"base_dim": spec.base_dim, "rank": spec.rank, "kernel_rank": spec.kernel_rank}


# ---------------------------------------------------------------------------
# check


def _jacobiator_entries(J, spec) -> list[tuple[int, int, int, int, Polynomial]]:
    out = []
    for a, b, c in itertools.combinations(range(spec.rank), 3):
        for B in range(spec.kernel_rank):
            if J[a][b][c][B]:
                out.append((a, b, c, B, J[a][b][c][B]))
    return out


def run_check(spec: AlgebroidSpec, seed: int = 0, samples: int = 25, max_degree: int = 6,
              cutoff: int = 3, timer: _Timer | None = None) -> dict:
    """All checks on one spec, as a plain dict (the report)."""
    timer = timer or _Timer()
    checks = []

    def add(name, status, detail="", checked=None):
        entry = {"name": name, "status": status, "detail": detail}
        if checked is not None:
            entry["checked"] = checked
        checks.append(entry)

    axioms = timer.run("axioms", check_axioms, spec)
    for r in axioms.results:
        add(r.name, "PASS" if r.passed else "FAIL", r.detail)
    jac = []
    downstream = ("jacobiator", "dj_zero", "q_coordinate", "d_squared")
    if not axioms.passed:
        for name in downstream:
            add(name, "SKIP", "axioms failed")
    else:
        try:
            J = timer.run("jacobiator", jacobiator_tensor, spec)
        except KernelEscapeError as exc:
            add("jacobiator", "FAIL", str(exc))
            for name in downstream[1:]:
                add(name, "SKIP", "jacobiator failed")
        else:
            jac = _jacobiator_entries(J, spec)
            plural = "" if len(jac) == 1 else "s"
            add("jacobiator", "PASS", f"nonzero ({len(jac)} component{plural})" if jac else "zero")
            for name, fn, args in (
                ("dj_zero", check_dj_zero, (spec,)),
                ("q_coordinate", q_coordinate_check, (spec, cutoff)),
                ("d_squared", check_d_squared, (spec, seed, samples, max_degree)),
            ):
                rep = timer.run(name, fn, *args)
                detail = rep.mismatches[0] if rep.mismatches else ""
                add(name, "PASS" if rep.passed else "FAIL", detail, rep.checked)
    passed = all(c["status"] == "PASS" for c in checks)
    return {
        "spec": _spec_dims(spec),
        "seed": seed,
        "checks": checks,
        "jacobiator": [
            {"a": a + 1, "b": b + 1, "c": c + 1, "B": B + 1, "value": format_polynomial(v)}
            for a, b, c, B, v in jac
        ],
        "result": "PASS" if passed else "FAIL",
    }


def format_check(report: dict) -> str:
    s = report["spec"]
    lines = [f"{'spec':<20} base_dim={s['base_dim']} rank={s['rank']} kernel_rank={s['kernel_rank']}"]
    for c in report["checks"]:
        line = f"{c['name']:<20} {c['status']}"
        if "checked" in c:
            line += f" ({c['checked']} checked)"
        if c["detail"]:
            line += f"  {c['detail']}"
        lines.append(line)
        if c["name"] == "jacobiator":
            for e in report["jacobiator"]:
                lines.append(f"  J^{e['B']}_{e['a']},{e['b']},{e['c']} = {e['value']}")
    lines.append(f"{'result':<20} {report['result']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cohomology


def run_cohomology(spec: AlgebroidSpec, max_degree: int, timer: _Timer | None = None) -> dict:
    timer = timer or _Timer()
    table = timer.run("cohomology", betti_table, spec, max_degree)
    return {
        "spec": _spec_dims(spec),
        "max_degree": max_degree,
        "rows": [
            {"degree": r.degree, "kernel": r.kernel, "incoming_rank": r.incoming_rank, "betti": r.betti}
            for r in table.rows
        ],
        "composite_zero": table.composite_zero,
        "betti": list(table.betti),
    }


def format_cohomology(report: dict) -> str:
    s = report["spec"]
    head = ("degree", "dim ker", "rank in", "betti")
    data = [
        (str(r["degree"]), str(r["kernel"]), str(r["incoming_rank"]), str(r["betti"]))
        for r in report["rows"]
    ]
    widths = [max(len(h), *(len(d[i]) for d in data)) for i, h in enumerate(head)]
    lines = [f"spec base_dim={s['base_dim']} rank={s['rank']} kernel_rank={s['kernel_rank']}"]
    lines.append("  ".join(h.rjust(w) for h, w in zip(head, widths)))
    lines += ["  ".join(c.rjust(w) for c, w in zip(d, widths)) for d in data]
    lines.append(f"composite_zero {'PASS' if report['composite_zero'] else 'FAIL'}")
    lines.append("betti " + " ".join(str(b) for b in report["betti"]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# recipes


def _int(params: dict, key: str, default: int) -> int:
    raw = params.pop(key, None)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{key} must be an integer, got {raw!r}") from None


def _entries(text: str, nidx: int, m: int, what: str) -> list[tuple[tuple[int, ...], Polynomial]]:
    """Parse ``"i j : poly; k l : poly"`` into 0-based index tuples."""
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise UsageError(f"{what} entry {part!r} needs 'indices : polynomial'")
        idx, poly = part.split(":", 1)
        try:
            key = tuple(int(x) - 1 for x in idx.split())
            value = parse_polynomial(poly, m)
        except (ValueError, PolynomialSyntaxError) as exc:
            raise UsageError(f"bad {what} entry {part!r}: {exc}") from None
        if len(key) != nidx:
            raise UsageError(f"{what} entry {part!r} needs {nidx} indices")
        out.append((key, value))
    return out


def _vectors(text: str, what: str) -> list[list[Fraction]]:
    try:
        return [[Fraction(x) for x in v.split(",")] for v in text.split(";") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {what}: {exc}") from None


def _recipe_tangent(p):
    return gallery.build_tangent_model(_int(p, "m", 2))


def _recipe_product(p):
    m = _int(p, "m", 1)
    return gallery.build_product_model(m, gallery.named_algebra(p.pop("algebra", "abelian:1")))


def _recipe_b_twist(p):
    m = _int(p, "m", 1)
    base = gallery.build_product_model(m, gallery.named_algebra(p.pop("algebra", "abelian:1")))
    B = {}
    for (a, b, K), v in _entries(p.pop("B", "1 2 1 : x1"), 3, m, "B"):
        if not (0 <= K < base.kernel_rank and 0 <= a < base.rank and 0 <= b < base.rank):
            raise UsageError(f"B entry ({a + 1},{b + 1},{K + 1}) out of range")
        vec = B.setdefault((a, b), [0] * base.kernel_rank)
        vec[K] = v
    return gallery.build_b_twist(base, B)


def _reference_form():
    # Pfaffian 1 and not closed, so the inverse is polynomial and dw != 0
    return gallery.FormField(4, 2, {(0, 1): 1, (2, 3): 1, (0, 2): "x2"})


def _recipe_twisted_poisson(p):
    preset = p.pop("preset", None)
    if preset is None and "pi" not in p:
        preset = "symplectic"
    if preset == "symplectic":
        m = _int(p, "m", 2)
        if m % 2:
            raise UsageError("symplectic preset needs even m")
        Pi = gallery.BivectorField.from_entries(m, {(2 * i, 2 * i + 1): 1 for i in range(m // 2)})
        return gallery.build_twisted_poisson(Pi)
    if preset == "nonclosed":
        Pi, H = gallery.twisted_poisson_from_form(_reference_form())
        return gallery.build_twisted_poisson(Pi, H)
    if preset == "broken":
        Pi, H = gallery.twisted_poisson_from_form(_reference_form())
        return gallery.build_twisted_poisson(Pi, -H, validate=False)
    if preset == "degenerate":
        Pi = gallery.BivectorField.from_entries(5, {(0, 1): 1, (2, 3): 1})
        H = gallery.FormField(5, 3, {(1, 3, 4): "x1"})
        return gallery.build_twisted_poisson(
            Pi, H, kernel_frame=[[0], [0], [0], [0], [1]], kernel_projection=[[0, 0, 0, 0, 1]]
        )
    if preset is not None:
        raise UsageError(f"unknown twisted-poisson preset {preset!r}")
    m = _int(p, "m", 2)
    Pi = gallery.BivectorField.from_entries(m, dict(_entries(p.pop("pi"), 2, m, "pi")))
    H = gallery.FormField(m, 3, dict(_entries(p.pop("H", ""), 3, m, "H")))
    frame = proj = None
    if "kernel" in p or "projection" in p:
        cols = _vectors(p.pop("kernel", ""), "kernel")
        frame = [[col[a] for col in cols] for a in range(m)]
        proj = _vectors(p.pop("projection", ""), "projection")
    return gallery.build_twisted_poisson(Pi, H, kernel_frame=frame, kernel_projection=proj)


def _recipe_twisted_action(p):
    preset = p.pop("preset", "action")
    if preset == "action":
        # [e1,e2] = e1 acting on the line by d/dx1 and x1 d/dx1
        return gallery.build_twisted_action((2, {(0, 1): [1, 0]}), [[1], ["x1"]])
    if preset == "kernel-twist":
        return gallery.build_twisted_action(
            (3, {}),
            [[1, 0], [0, 1], [0, 0]],
            {(0, 1): [0, 0, "x1"]},
            kernel_frame=[[0], [0], [1]],
            kernel_projection=[[0, 0, 1]],
        )
    raise UsageError(f"unknown twisted-action preset {preset!r}")


def _recipe_random_algebra(p):
    return gallery.random_almost_lie_algebra(_int(p, "dim", 3), _int(p, "seed", 0))


RECIPES = {
    "tangent": _recipe_tangent,
    "product": _recipe_product,
    "b-twist": _recipe_b_twist,
    "twisted-poisson": _recipe_twisted_poisson,
    "twisted-action": _recipe_twisted_action,
    "random-algebra": _recipe_random_algebra,
}


def make_recipe(name: str, params: dict | None = None) -> AlgebroidSpec:
    if name not in RECIPES:
        raise UsageError(f"unknown recipe {name!r}; choose from {', '.join(RECIPES)}")
    params = dict(params or {})
    spec = RECIPES[name](params)
    if params:
        raise UsageError(f"unused parameters for {name}: {', '.join(sorted(params))}")
    return spec


def _parse_params(items: list[str]) -> dict:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"parameters are key=value, got {item!r}")
        params[key] = value
    return params


# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="almostlie", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run every identity check on a spec file")
    c.add_argument("path", help="spec file, or - for stdin")
    c.add_argument("--seed", type=int, default=0, help="seed for random cochains")
    c.add_argument("--samples", type=int, default=25, help="number of random cochains")
    c.add_argument("--max-degree", type=int, default=6, help="largest random cochain degree")
    c.add_argument("--cutoff", type=int, default=3, help="monomial degree cutoff for the Q check")

    h = sub.add_parser("cohomology", help="Betti numbers of a finite-type spec")
    h.add_argument("path", help="spec file, or - for stdin")
    h.add_argument("--max-degree", type=int, default=3)

    r = sub.add_parser("recipe", help="write a gallery spec file")
    r.add_argument("name", choices=sorted(RECIPES))
    r.add_argument("params", nargs="*", metavar="key=value")
    r.add_argument("-o", "--output", help="write here instead of stdout")

    for p in (c, h):
        p.add_argument("--structured", action="store_true", help="emit JSON instead of text")
        p.add_argument("--timings", action="store_true", help="print phase timings to stderr")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    timer = _Timer()
    try:
        if args.command == "recipe":
            text = dumps(make_recipe(args.name, _parse_params(args.params)))
            if args.output:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return 0
        spec = loads(_read_text(args.path))
        if args.command == "check":
            report = run_check(spec, args.seed, args.samples, args.max_degree, args.cutoff, timer)
            text = format_check(report)
            code = 0 if report["result"] == "PASS" else 1
        else:
            report = run_cohomology(spec, args.max_degree, timer)
            text = format_cohomology(report)
            code = 0 if report["composite_zero"] else 1
        if args.structured:
            text = json.dumps(report, indent=2, sort_keys=True) + "\n"
        sys.stdout.write(text)
        if args.timings:
            for name, secs in timer.phases:
                print(f"time {name} {secs:.3f}s", file=sys.stderr)
        return code
    except (UsageError, SpecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
