"""``ergogap`` command line: gap | geometry | classify | cheeger | semigroup.

Every subcommand builds a :class:`Table` and renders it as text, CSV or
JSON.  Exit codes: 0 ok, 2 input error, 3 non-certifiable, 4 invariant
violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import cheeger as ch
from . import classify as cl
from . import dualgap, exact, geombounds
from .bdchain import FiniteChain, load_chain, parse_chain, truncate
from .errors import InvariantViolation, NonCertifiable, SpecError

EXIT_OK, EXIT_INPUT, EXIT_NONCERT, EXIT_INVARIANT = 0, 2, 3, 4


# --------------------------------------------------------------------------
# config and rendering


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    inputs: tuple[str, ...] = ()
    horizon: Optional[int] = None
    ladder: Optional[tuple[int, ...]] = None
    q_param: float = 3.0
    fmt: str = "text"
    output: Optional[str] = None
    seed: int = 0
    audit: bool = False
    iterations: int = 8
    function: str = "eigen"
    samples: int = 41
    tmax: Optional[float] = None

    def __post_init__(self):
        if self.ladder is not None:
            if not self.ladder or any(n < 1 for n in self.ladder) or any(
                    b <= a for a, b in zip(self.ladder, self.ladder[1:])):
                raise SpecError("ladder sizes must be positive and strictly increasing")
        if self.fmt not in ("text", "csv", "json"):
            raise SpecError(f"unknown format {self.fmt!r}")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise SpecError("seed must be an unsigned 64-bit integer")


@dataclass
class Table:
    title: str
    columns: tuple[str, ...]
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise InvariantViolation(f"row has {len(values)} cells, table has {len(self.columns)}")
        self.rows.append(values)


def _cell_csv(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _cell_text(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, (float, np.floating)):
        return "%.10g" % float(v)
    return _cell_csv(v)


def _cell_json(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(tables: Sequence[Table], fmt: str) -> str:
    if fmt == "json":
        doc = [{"title": t.title, "columns": list(t.columns),
                "rows": [[_cell_json(v) for v in r] for r in t.rows], "notes": list(t.notes)}
               for t in tables]
        return json.dumps(doc if len(doc) > 1 else doc[0], indent=2, sort_keys=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for i, t in enumerate(tables):
            if len(tables) > 1:
                if i:
                    buf.write("\n")
                buf.write(f"# {t.title}\n")
            w.writerow(t.columns)
            for r in t.rows:
                w.writerow([_cell_csv(v) for v in r])
            for n in t.notes:
                buf.write(f"# {n}\n")
        return buf.getvalue()
    out = []
    for t in tables:
        cells = [[_cell_text(v) for v in r] for r in t.rows]
        widths = [max([len(c)] + [len(r[j]) for r in cells]) for j, c in enumerate(t.columns)]
        line = lambda r: "  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip()  # noqa: E731
        out.append(t.title)
        out.append(line(t.columns))
        out.append(line(["-" * w for w in widths]))
        out.extend(line(r) for r in cells)
        out.extend(f"  {n}" for n in t.notes)
        out.append("")
    return "\n".join(out)


# --------------------------------------------------------------------------
# subcommands


def _one_input(cfg: RunConfig) -> str:
    if len(cfg.inputs) != 1:
        raise SpecError(f"{cfg.subcommand} needs exactly one --input")
    return cfg.inputs[0]


def _finite(spec, N: Optional[int]) -> FiniteChain:
    if spec.finite:
        return truncate(spec, spec.states)
    if N is None:
        raise SpecError("an infinite chain needs --horizon for this command")
    return truncate(spec, N)


def cmd_gap(cfg: RunConfig) -> list[Table]:
    spec = load_chain(_one_input(cfg))
    H = None if spec.finite else (cfg.horizon or dualgap.DEFAULT_HORIZON)
    t = Table("spectral gap bracket", ("source", "n", "lower", "upper"))
    base = dualgap.explicit_bounds(spec, H)
    t.add("explicit-delta", base.horizon, base.lower, base.upper)
    for k, br in enumerate(dualgap.approx_sequence(spec, cfg.iterations, H), 1):
        t.add("approximation", k, br.lower, br.upper)
    if spec.finite:
        lam = exact.spectral_gap_exact(truncate(spec, spec.states))
        t.add("oracle", spec.states, lam, lam)
    else:
        sizes = cfg.ladder or (250, 500, 1000, 2000, 4000)
        lad = exact.gap_ladder(spec, sizes)
        for n, v in zip(lad.sizes, lad.values):
            t.add("oracle", n, v, v)
        t.add("oracle-extrapolated", lad.sizes[-1], lad.estimate - lad.spread,
              lad.estimate + lad.spread)
    return [t]


def _geometry_specs(cfg: RunConfig) -> list[geombounds.GeometrySpec]:
    if not cfg.inputs:
        return geombounds.default_grid()
    specs = []
    for path in cfg.inputs:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed JSON in {path} at line {exc.lineno} column {exc.colno}: "
                            f"{exc.msg}") from exc
        for item in doc if isinstance(doc, list) else [doc]:
            if not isinstance(item, dict) or set(item) != {"d", "D", "K"}:
                raise SpecError(f'{path}: each geometry needs exactly "d", "D", "K"')
            specs.append(geombounds.GeometrySpec(item["d"], item["D"], item["K"]))
    return specs


def cmd_geometry(cfg: RunConfig) -> list[Table]:
    specs = _geometry_specs(cfg)
    t = Table("lower bounds for the first eigenvalue",
              ("d", "D", "K") + geombounds.FORMULAS + ("best", "flags"))
    for s in specs:
        rep = geombounds.all_bounds(s)
        flags = [f"{k}: {why}" for k, why in sorted(rep.flags.items())]
        t.add(s.d, s.D, s.K, *(rep.get(k) for k in geombounds.FORMULAS), rep.best, "; ".join(flags))
    tables = [t]
    if cfg.audit:
        _, viol = geombounds.dominance_audit(specs, threads=ch._threads())
        a = Table("dominance audit", ("d", "D", "K", "better", "worse", "better_value", "worse_value"))
        for v in viol:
            a.add(v.spec.d, v.spec.D, v.spec.K, v.better, v.worse, v.better_value, v.worse_value)
        a.notes.append(f"{len(specs)} points, {len(viol)} violations")
        tables.append(a)
        if viol:
            raise _Report(tables, InvariantViolation(f"{len(viol)} dominance violations"))
    return tables


def cmd_classify(cfg: RunConfig) -> list[Table]:
    spec = load_chain(_one_input(cfg))
    rep = cl.classify_chain(spec, cfg.q_param, cfg.horizon or cl.DEFAULT_HORIZON)
    t = Table(f"ergodicity ladder (q = {cfg.q_param:g}, horizon {rep.horizon})",
              ("property", "criterion", "verdict", "quantity_lower", "quantity_upper",
               "method", "note"))
    for label, v in rep.labelled():
        q = v.quantity
        t.add(label, v.row, v.status, None if q is None else q.lower,
              None if q is None else q.upper, v.method, v.note)
    if rep.fubini_defect is not None:
        t.notes.append(f"Fubini identity relative defect {rep.fubini_defect:.3g}")
    if rep.delta_defect is not None:
        t.notes.append(f"delta cross-check relative gap {rep.delta_defect:.3g}")
    t.notes.extend(rep.diagnostics)
    return [t]


def _load_kernel(path: str, horizon: Optional[int]) -> ch.SymmetricKernel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON at line {exc.lineno} column {exc.colno} "
                        f"(char {exc.pos}): {exc.msg}") from exc
    if isinstance(doc, dict) and "J" in doc:
        return ch.kernel_from_json(doc)
    return ch.kernel_from_chain(_finite(parse_chain(text), horizon))


def cmd_cheeger(cfg: RunConfig) -> list[Table]:
    K = _load_kernel(_one_input(cfg), cfg.horizon)
    rows = ch.cheeger_table(K, q_param=cfg.q_param, seed=cfg.seed)
    t = Table("Cheeger constants", ("alpha", "constant", "parameter", "value", "method", "subset"))
    for r in rows:
        sub = "" if r.result.subset is None else " ".join(str(i) for i in np.flatnonzero(r.result.subset))
        t.add(float(r.alpha), r.name, None if r.parameter is None else float(r.parameter),
              r.result.value, r.result.method, sub)
    ls = ch.lawler_sokal_bound(K, seed=cfg.seed)
    gap = ch.kernel_gap(K)
    b = Table("spectral gap certificate", ("k", "M", "k^2/(2M)", "lambda_1", "method"))
    b.add(ls.k, ls.M, ls.bound, gap, "exhaustive" if ls.exact else "heuristic")
    if not ls.exact:
        b.notes.append("heuristic: k is an upper estimate, so k^2/(2M) is not certified")
    if ls.bound > gap * (1 + 1e-9) + 1e-12:
        raise _Report([t, b], InvariantViolation(f"k^2/(2M) = {ls.bound!r} exceeds lambda_1 = {gap!r}"))
    return [t, b]


def _test_function(chain: FiniteChain, kind: str, seed: int) -> np.ndarray:
    n = chain.size
    if kind == "eigen":
        return exact.eigenfunction(chain, 1)[1]
    if kind == "random":
        return np.random.default_rng(seed).standard_normal(n)
    if kind == "indicator":
        return (np.arange(n) == 0).astype(float)
    if kind == "constant":
        return np.ones(n)
    raise SpecError(f"unknown test function {kind!r}")


def cmd_semigroup(cfg: RunConfig) -> list[Table]:
    spec = load_chain(_one_input(cfg))
    chain = _finite(spec, cfg.horizon)
    lam = exact.spectral_gap_exact(chain)
    f = _test_function(chain, cfg.function, cfg.seed)
    if cfg.samples < 3:
        raise SpecError("need at least three time samples")
    T = cfg.tmax if cfg.tmax is not None else 4.0 / lam
    if not (T > 0 and math.isfinite(T)):
        raise SpecError("tmax must be finite and positive")
    times = np.linspace(0.0, T, cfg.samples)
    var0 = exact.variance(chain, f)
    t = Table("semigroup decay", ("t", "variance", "entropy", "variance_bound"))
    var = []
    for s in times:
        pf = exact.evolve(chain, f, float(s))
        v = exact.variance(chain, pf)
        var.append(v)
        # entropy of P_t(f - min f), a nonnegative function with the same variance
        ent = exact.entropy(chain, np.maximum(pf - float(np.min(f)), 0.0))
        t.add(float(s), v, ent, var0 * math.exp(-2 * lam * s))
    var = np.array(var)
    # samples drowned in evolution error carry no rate information
    keep = var > var0 * 1e-20
    s = Table("decay fit", ("fitted_rate", "two_lambda_1", "difference"))
    if var0 > 0 and keep.sum() >= 3:
        rate = exact.decay_rate_fit(times[keep], var[keep])
        s.add(rate, 2 * lam, rate - 2 * lam)
    else:
        s.add(None, 2 * lam, None)
        s.notes.append("variance vanishes: no decay rate to fit")
    return [t, s]


_COMMANDS = {"gap": cmd_gap, "geometry": cmd_geometry, "classify": cmd_classify,
             "cheeger": cmd_cheeger, "semigroup": cmd_semigroup}


class _Report(Exception):
    """Tables to print before failing with ``cause``."""

    def __init__(self, tables, cause):
        super().__init__(str(cause))
        self.tables, self.cause = tables, cause


# --------------------------------------------------------------------------
# entry point


def _ladder(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ladder must be comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ergogap", description="Spectral gap and ergodicity tools "
                                "for birth-death chains.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name, help_ in (("gap", "gap bracket, approximation procedure and oracle ladder"),
                        ("geometry", "eigenvalue lower bounds on (d, D, K) points"),
                        ("classify", "ergodicity ladder of an infinite chain"),
                        ("cheeger", "Cheeger constants of a finite chain or kernel"),
                        ("semigroup", "variance and entropy decay samples")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--input", action="append", default=[], metavar="PATH")
        s.add_argument("--horizon", type=int)
        s.add_argument("--ladder", type=_ladder, metavar="N1,N2,...")
        s.add_argument("--q", type=float, default=3.0, dest="q_param")
        s.add_argument("--format", choices=("text", "csv", "json"), default="text", dest="fmt")
        s.add_argument("--output", metavar="PATH")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--audit", action="store_true")
        if name == "gap":
            s.add_argument("--iterations", type=int, default=8)
        if name == "semigroup":
            s.add_argument("--function", choices=("eigen", "random", "indicator", "constant"),
                           default="eigen")
            s.add_argument("--samples", type=int, default=41)
            s.add_argument("--tmax", type=float)
    return p


def _emit(text: str, cfg: Optional[RunConfig]) -> None:
    if cfg is not None and cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    try:
        kw = {k: v for k, v in vars(args).items() if k not in ("subcommand", "input")}
        cfg = RunConfig(args.subcommand, tuple(args.input),
                        ladder=kw.pop("ladder"), **kw)
        _emit(render(_COMMANDS[cfg.subcommand](cfg), cfg.fmt), cfg)
        return EXIT_OK
    except _Report as rep:
        _emit(render(rep.tables, cfg.fmt), cfg)
        print(f"ergogap: invariant violation: {rep.cause}", file=sys.stderr)
        return EXIT_INVARIANT
    except SpecError as exc:
        print(f"ergogap: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonCertifiable as exc:
        print(f"ergogap: not certifiable: {exc}", file=sys.stderr)
        return EXIT_NONCERT
    except InvariantViolation as exc:
        print(f"ergogap: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
