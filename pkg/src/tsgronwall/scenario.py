"""Scenario documents: JSON in, validated :class:`Scenario` and runnable :class:`Problem` out.

Validation collects every problem it can find before raising, so a user
fixing a scenario sees all of them at once. The document layout is fixed by
``scenario.schema.json`` next to this module; ``docs/scenario.md`` walks
through it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from .errors import (
    BadParameter,
    BadScaleSpec,
    ExpressionError,
    MissingFunction,
    ParseError,
    ScenarioError,
    ShapeMismatch,
    TSGError,
)
from .expr import Expression
from .gridfun import Domain2, Domain3, GridFunction2, GridFunction3, tabulate2, tabulate3
from .oracle import KernelSpec
from .runner import REQUIRED_FUNCTIONS, FuzzConfig, Problem
from .timescale import TimeScale, make_scale, refine

PLANE_VARS = frozenset("xy")
SPACE_VARS = frozenset("xyz")
SOURCE_VARS = frozenset("stq")
KERNEL_VARS = frozenset("xyzstq")

# kernel components written in target (x, y, z) or source (s, t, q) coordinates
COMPONENT_VARS = {"r": SPACE_VARS, "f": SOURCE_VARS, "w": SOURCE_VARS, "K": KERNEL_VARS}

KERNEL_COMPONENTS = {
    "separable_linear": ("r", "f"),
    "separable_affine": ("r", "f", "w"),
    "tabulated_linear": ("K",),
}


@lru_cache(maxsize=None)
def schema() -> dict:
    text = resources.files("tsgronwall").joinpath("scenario.schema.json").read_text("utf-8")
    return json.loads(text)


@dataclass
class FunctionDef:
    """One function definition: an expression, a constant, an inline table or a CSV file."""

    kind: str
    raw: Any
    expr: Optional[Expression] = None
    ref: Optional[str] = None

    @property
    def refinable(self) -> bool:
        return self.kind in ("expression", "constant", "ref")


@dataclass
class Scenario:
    theorem: str
    scales: dict
    functions: dict
    kernels: dict = field(default_factory=dict)
    tol: float = 1e-9
    relative: bool = True
    seed: Optional[int] = None
    strict: bool = True
    jobs: int = 1
    fuzz: FuzzConfig = field(default_factory=FuzzConfig)
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def three_dim(self) -> bool:
        return self.theorem != "lemma"


def _parse_function(name: str, raw, allowed, defined, errors) -> Optional[FunctionDef]:
    if isinstance(raw, bool):
        errors.append(ParseError(f"{name}: booleans are not functions"))
        return None
    if isinstance(raw, (int, float)):
        return FunctionDef("constant", float(raw))
    if isinstance(raw, str):
        if raw.strip() in defined:
            return FunctionDef("ref", raw, ref=raw.strip())
        try:
            expr = Expression(raw)
        except ExpressionError as exc:
            errors.append(ParseError(f"{name}: {exc}"))
            return None
        unbound = expr.variables - allowed
        if unbound:
            errors.append(ExpressionError(
                f"{name}: variable {', '.join(sorted(unbound))} unbound in tabulation context "
                f"(allowed: {', '.join(sorted(allowed))})"))
            return None
        return FunctionDef("expression", raw, expr=expr)
    if isinstance(raw, dict) and "table" in raw:
        return FunctionDef("table", raw["table"])
    if isinstance(raw, dict) and "csv" in raw:
        return FunctionDef("csv", raw)
    errors.append(ParseError(f"{name}: unrecognised function definition {raw!r}"))
    return None


def load_scenario(text: str, base_dir=None) -> Scenario:
    """Parse and validate a scenario document.

    Raises ScenarioError listing every problem found (ParseError,
    MissingFunction, BadScaleSpec, ExpressionError, ShapeMismatch entries).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([ParseError(f"invalid JSON: {exc}")]) from None
    errors: list[TSGError] = []
    validator = jsonschema.Draft202012Validator(schema())
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append(ParseError(f"{where}: {err.message}"))
    if not isinstance(doc, dict):
        raise ScenarioError(errors)

    theorem = doc.get("theorem")
    if theorem not in REQUIRED_FUNCTIONS:
        raise ScenarioError(errors or [ParseError(f"unknown theorem {theorem!r}")])
    three = theorem != "lemma"

    scales = {}
    raw_scales = doc.get("scales") if isinstance(doc.get("scales"), dict) else {}
    for name in ("t1", "t2", "i") if three else ("t1", "t2"):
        spec = raw_scales.get(name)
        if spec is None:
            errors.append(BadScaleSpec(f"missing scale {name!r}"))
            continue
        try:
            scales[name] = make_scale(spec)
        except TSGError as exc:
            errors.append(BadScaleSpec(f"scale {name}: {exc}"))

    raw_funcs = doc.get("functions") if isinstance(doc.get("functions"), dict) else {}
    allowed = SPACE_VARS if three else PLANE_VARS
    functions = {}
    for name, raw in raw_funcs.items():
        fd = _parse_function(name, raw, allowed, set(), errors)
        if fd is not None:
            functions[name] = fd
    for name in REQUIRED_FUNCTIONS[theorem]:
        if name not in raw_funcs:
            errors.append(MissingFunction(name, theorem))

    kernels = {}
    raw_kernels = doc.get("kernel") if isinstance(doc.get("kernel"), dict) else {}
    if raw_kernels and theorem in ("lemma", "thm21"):
        errors.append(ParseError(f"a kernel section is not used by {theorem}"))
    for kname, kraw in raw_kernels.items():
        if not isinstance(kraw, dict):
            continue
        family = kraw.get("family")
        comps = KERNEL_COMPONENTS.get(family)
        if comps is None:
            continue
        parsed = {}
        for comp in comps:
            if comp not in kraw:
                errors.append(MissingFunction(comp, f"kernel {kname} ({family})"))
                continue
            fd = _parse_function(f"kernel.{kname}.{comp}", kraw[comp], COMPONENT_VARS[comp],
                                 set(raw_funcs), errors)
            if fd is not None:
                parsed[comp] = fd
        for extra in set(kraw) - set(comps) - {"family"}:
            errors.append(ParseError(f"kernel.{kname}: {family} takes no component {extra!r}"))
        kernels[kname] = (family, parsed)
    if theorem == "thm33" and "G" not in raw_kernels:
        errors.append(MissingFunction("kernel.G", "thm33 comparison equation"))

    opts = doc.get("options") if isinstance(doc.get("options"), dict) else {}
    fuzz_raw = opts.get("fuzz") if isinstance(opts.get("fuzz"), dict) else {}
    try:
        fuzz = FuzzConfig(**fuzz_raw)
    except TypeError as exc:
        errors.append(ParseError(f"options.fuzz: {exc}"))
        fuzz = FuzzConfig()

    if three and len(scales) == 3:
        shape = tuple(len(scales[k]) for k in ("t1", "t2", "i"))
    elif not three and len(scales) == 2:
        shape = tuple(len(scales[k]) for k in ("t1", "t2"))
    else:
        shape = None
    if shape is not None:
        for name, fd in functions.items():
            if fd.kind == "table" and np.shape(fd.raw) != shape:
                errors.append(ShapeMismatch(
                    f"{name}: table of shape {np.shape(fd.raw)} does not match grid {shape}"))
        for kname, (family, parsed) in kernels.items():
            for comp, fd in parsed.items():
                want = shape * 2 if comp == "K" else shape
                if fd.kind == "table" and np.shape(fd.raw) != want:
                    errors.append(ShapeMismatch(
                        f"kernel.{kname}.{comp}: table of shape {np.shape(fd.raw)}, expected {want}"))

    if errors:
        raise ScenarioError(errors)
    return Scenario(
        theorem=theorem,
        scales=scales,
        functions=functions,
        kernels=kernels,
        tol=float(opts.get("tol", 1e-9)),
        relative=opts.get("tol_mode", "relative") == "relative",
        seed=opts.get("seed"),
        strict=bool(opts.get("strict", True)),
        jobs=int(opts.get("jobs", 1)),
        fuzz=fuzz,
        base_dir=Path(base_dir) if base_dir is not None else Path.cwd(),
    )


def load_scenario_file(path) -> Scenario:
    path = Path(path)
    return load_scenario(path.read_text("utf-8"), base_dir=path.parent)


# -- tabulation ---------------------------------------------------------------------------

def _read_csv_table(spec: dict, base_dir: Path, shape) -> np.ndarray:
    path = Path(spec["csv"])
    if not path.is_absolute():
        path = base_dir / path
    column = spec.get("column")
    out = np.full(shape, np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        cols = reader.fieldnames or []
        if column is None:
            column = next((c for c in ("u", "value", "subject") if c in cols), None)
        if column not in cols:
            raise ShapeMismatch(f"{path}: no column {column!r} (have {', '.join(cols)})")
        for row in reader:
            idx = (int(row["i"]), int(row["j"])) + ((int(row["k"]),) if len(shape) == 3 else ())
            try:
                out[idx] = float(row[column])
            except IndexError:
                raise ShapeMismatch(f"{path}: node {idx} outside grid {shape}") from None
    if np.any(np.isnan(out)):
        raise ShapeMismatch(f"{path}: table does not cover every node of grid {shape}")
    return out


def _tabulate(fd: FunctionDef, domain, base_dir, resolved, source=False):
    if fd.kind == "ref":
        return resolved[fd.ref]
    if fd.kind == "constant":
        rule = fd.raw
    elif fd.kind == "expression":
        rule = fd.expr
        if source:
            expr = fd.expr
            rule = lambda x, y, z: expr(s=x, t=y, q=z)  # noqa: E731
    elif fd.kind == "table":
        rule = np.asarray(fd.raw, dtype=float)
    else:
        rule = _read_csv_table(fd.raw, base_dir, domain.shape)
    if isinstance(domain, Domain3):
        return tabulate3(domain, rule)
    return tabulate2(domain, rule)


def _tabulate_kernel_table(fd: FunctionDef, domain: Domain3, base_dir) -> np.ndarray:
    if fd.kind == "table":
        return np.asarray(fd.raw, dtype=float)
    if fd.kind == "constant":
        return np.full(domain.shape * 2, fd.raw)
    if fd.kind == "expression":
        x, y, z = (c[..., None, None, None] for c in domain.coords())
        s, t, q = (c[None, None, None] for c in domain.coords())
        env = {"x": x, "y": y, "z": z, "s": s, "t": t, "q": q}
        return np.broadcast_to(fd.expr(**env), domain.shape * 2)
    raise BadParameter("a tabulated_linear kernel table must be an expression or inline table")


def build_problem(sc: Scenario, factor: int = 1) -> Problem:
    """Tabulate every function of `sc` on its scales, each gap split into `factor` pieces."""
    if factor != 1:
        fixed = [n for n, fd in sc.functions.items() if not fd.refinable]
        fixed += [f"kernel.{k}.{c}" for k, (_, p) in sc.kernels.items()
                  for c, fd in p.items() if not fd.refinable]
        if fixed:
            raise BadParameter(
                f"tabulated functions cannot be refined: {', '.join(sorted(fixed))}")
    sc_scales = {k: refine(v, factor) for k, v in sc.scales.items()}
    if sc.three_dim:
        domain = Domain3(sc_scales["t1"], sc_scales["t2"], sc_scales["i"])
    else:
        domain = Domain2(sc_scales["t1"], sc_scales["t2"])
    resolved = {}
    for name, fd in sc.functions.items():
        resolved[name] = _tabulate(fd, domain, sc.base_dir, resolved)
    kernels = {}
    for kname, (family, parsed) in sc.kernels.items():
        if family == "tabulated_linear":
            K = _tabulate_kernel_table(parsed["K"], domain, sc.base_dir)
            kernels[kname] = KernelSpec.tabulated_linear(domain, K)
            continue
        comps = {c: _tabulate(fd, domain, sc.base_dir, resolved, source=c != "r")
                 for c, fd in parsed.items()}
        kernels[kname] = KernelSpec(family, domain, **comps)
    return Problem(sc.theorem, domain, resolved, kernels.get("F"), kernels.get("G"))


def refinement_study(sc: Scenario, levels: int, strict: bool = True):
    """Re-run `sc` with every gap halved ``0..levels`` times.

    Returns one row per level, matching :data:`emit.LIMIT_COLUMNS`, reporting
    the terminal node ``(max t1, max t2, a)``, and the list of reports.
    """
    from .runner import verify

    if levels < 0:
        raise BadParameter(f"refinement level must be >= 0, got {levels}")
    rows, reports = [], []
    for level in range(levels + 1):
        factor = 2 ** level
        problem = build_problem(sc, factor)
        report, ev = verify(problem, sc.tol, sc.relative, strict)
        d = problem.domain
        idx = (len(d.t1) - 1, len(d.t2) - 1) + ((0,) if sc.three_dim else ())
        subj, bnd = float(ev.subject.values[idx]), float(ev.bound.values[idx])
        z = d.i.min if sc.three_dim else None
        shape = (tuple(d.shape) + (0,))[:3]
        rows.append((level, factor) + shape + (d.t1.max, d.t2.max, z, subj, bnd, bnd - subj,
                                               report.verdict))
        reports.append(report)
    return rows, reports
