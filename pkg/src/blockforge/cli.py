"""Command-line interface.  Every command prints one JSON document.

Exit codes: 0 success (and match, with ``--expected``), 1 error (reported
as JSON on stderr), 2 mismatch against the ``--expected`` file.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import repmod
from .presentations import (SHIPPED, UserDefined, canonical_family, fixture_dir, instantiate,
                            instantiate_family, load_family, parse_presentation, print_expr)

COMMANDS = ("parse", "basis", "classify", "ext", "tube", "ubar", "lift", "udr")


@dataclass
class RunConfig:
    command: str
    family: Optional[str] = None
    file: Optional[str] = None
    n: Optional[int] = None
    scalars: dict = dc_field(default_factory=dict)
    field_degree: Optional[int] = None
    length_cap: int = 4
    degree_cap: Optional[int] = None
    tau_cap: int = 6
    max_order: int = 5
    module: Optional[str] = None
    target: Optional[str] = None
    ext_degree: int = 1
    direction: Optional[list] = None
    metadata: Optional[str] = None
    all_tops: bool = False
    brute: bool = False
    output: Optional[str] = None
    expected: Optional[str] = None
    pretty: bool = False
    seed: int = 0
    jobs: int = 1

    def validate(self) -> None:
        if (self.family is None) == (self.file is None):
            raise ValueError("give exactly one of --family and --file")
        for name in ("length_cap", "tau_cap", "max_order", "jobs", "ext_degree"):
            if getattr(self, name) < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if self.degree_cap is not None and self.degree_cap < 1:
            raise ValueError("--degree-cap must be positive")


# ---------------------------------------------------------------------------
# helpers


def _family_id(cfg: RunConfig):
    return UserDefined(cfg.file) if cfg.file else canonical_family(cfg.family)


def _presentation(cfg: RunConfig):
    fid = _family_id(cfg)
    return instantiate_family(fid, cfg.n, cfg.scalars, cfg.field_degree)


def _algebra(cfg: RunConfig) -> repmod.Algebra:
    return repmod.Algebra(_presentation(cfg), cfg.degree_cap)


def _module(alg: repmod.Algebra, name: Optional[str]) -> repmod.Representation:
    if not name:
        raise ValueError("--module is required for this command")
    if name.lstrip().startswith("{") or name.endswith(".json"):
        text = Path(name).read_text() if name.endswith(".json") else name
        return repmod.Representation.from_json(alg, json.loads(text))
    return repmod.construct(alg, name)


def _params(alg: repmod.Algebra) -> dict:
    return dict(alg.pres.values)


# ---------------------------------------------------------------------------
# commands


def cmd_parse(cfg: RunConfig) -> dict:
    fid = _family_id(cfg)
    pres = load_family(fid)
    values = dict(cfg.scalars)
    if cfg.n is not None:
        values["n"] = cfg.n
    if values or cfg.field_degree:
        pres = instantiate(pres, values, e=cfg.field_degree)
    q = pres.quiver
    return {
        "name": pres.name,
        "field": {"p": pres.p, "e": pres.e},
        "vertices": list(q.vertices),
        "arrows": [{"name": a.name, "source": a.source, "target": a.target} for a in q.arrows],
        "params": [{"name": x.name, "kind": x.kind, "value": x.value,
                    "constraints": [f"{op} {b}" for op, b in x.constraints]} for x in pres.params],
        "relations": [print_expr(r) for r in pres.relations],
        "instantiated": pres.is_instantiated,
    }


def cmd_basis(cfg: RunConfig) -> dict:
    from .rewriting import radical_nilpotency
    alg = _algebra(cfg)
    nb = alg.nb
    return {
        "family": alg.name,
        "params": _params(alg),
        "dimension": nb.dimension,
        "pair_counts": {f"{a}->{b}": c for (a, b), c in sorted(nb.pair_counts().items())},
        "nilpotency_index": radical_nilpotency(nb),
        "rules": len(alg.rewriting.rules),
    }


def cmd_classify(cfg: RunConfig) -> dict:
    from .classifier import brute_force_endok, enumerate_endok
    alg = _algebra(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = enumerate_endok(alg, cfg.length_cap, cfg.all_tops, cfg.tau_cap)
    out = rep.to_json()
    if cfg.brute:
        brute = brute_force_endok(alg, cfg.length_cap, cfg.tau_cap)
        out["brute_force"] = {"names": [m.name for m in brute],
                              "agrees": sorted(m.name for m in brute) == sorted(rep.names)}
    return out


def cmd_ext(cfg: RunConfig) -> dict:
    from .homology import ext_dim, hom_dim, stable_end_dim
    alg = _algebra(cfg)
    m = _module(alg, cfg.module)
    n = _module(alg, cfg.target) if cfg.target else m
    return {
        "family": alg.name,
        "params": _params(alg),
        "module": cfg.module,
        "target": cfg.target or cfg.module,
        "dims": {"module": m.dim_vector(), "target": n.dim_vector()},
        "degree": cfg.ext_degree,
        "ext": ext_dim(m, n, cfg.ext_degree),
        "hom": hom_dim(m, n),
        "stable_end": stable_end_dim(m) if n is m else None,
    }


def cmd_tube(cfg: RunConfig) -> dict:
    from .homology import tau_period
    alg = _algebra(cfg)
    m = _module(alg, cfg.module)
    period = tau_period(m, cfg.tau_cap)
    return {"family": alg.name, "params": _params(alg), "module": cfg.module, "cap": cfg.tau_cap,
            "period": period, "three_tube_end": period == 3}


def cmd_ubar(cfg: RunConfig) -> dict:
    from .deformation import build_Ubar
    alg = _algebra(cfg)
    m = _module(alg, cfg.module)
    u = build_Ubar(m)
    U = u.module
    return {
        "family": alg.name, "params": _params(alg), "module": cfg.module,
        "dims": U.dim_vector(),
        "top": dict(zip(alg.quiver.vertices, repmod.top(U))),
        "socle": dict(zip(alg.quiver.vertices, repmod.socle_dims(U))),
        "ubar": U.to_json(),
        "t": u.t.tolist(),
    }


def cmd_lift(cfg: RunConfig) -> dict:
    from .deformation import TruncatedLift, extend_lift, lift_profile, tangent_data
    alg = _algebra(cfg)
    m = _module(alg, cfg.module)
    td = tangent_data(m)
    direction = cfg.direction if cfg.direction is not None else [1] + [0] * (td.dimension - 1)
    if len(direction) != td.dimension:
        raise ValueError(f"direction needs {td.dimension} coordinates")
    profile = lift_profile(m, direction, cfg.max_order) if td.dimension else cfg.max_order
    return {"family": alg.name, "params": _params(alg), "module": cfg.module,
            "tangent_dim": td.dimension, "direction": list(direction), "max_order": cfg.max_order,
            "profile": profile, "obstructed_at": profile + 1 if profile < cfg.max_order else None}


def default_metadata_path(family: str) -> Path:
    return fixture_dir() / "metadata" / (Path(SHIPPED[family]).stem + ".json")


def cmd_udr(cfg: RunConfig) -> dict:
    from .classifier import classify_modules
    from .deformation import FamilyMetadata, classify_udr
    alg = _algebra(cfg)
    fam = alg.name
    n = alg.pres.values.get("n", 2)
    path = Path(cfg.metadata) if cfg.metadata else default_metadata_path(canonical_family(cfg.family))
    raw = json.loads(path.read_text())
    md = FamilyMetadata.from_json(raw, fam, n)
    m = _module(alg, cfg.module)
    if repmod.end_dim(m) != 1:
        raise ValueError(f"{cfg.module} does not have End = k")
    cm = classify_modules([m], cfg.tau_cap)[0]
    ring = classify_udr(md, cm)
    out = {"family": fam, "params": _params(alg), "module": cm.name, "d1": cm.d1, "tau3": cm.tau3}
    out.update(ring.to_json())
    out["provenance"] = {
        "computed": ["d1", "tau3"],
        "declared": {k: v for k, v in md.flags.get(cm.name, {}).items()},
        "metadata_file": str(path.name),
        "note": md.provenance,
    }
    if ring.proxy:
        out["provenance"]["proxy"] = "tau-period 3 used for 3-tube membership"
    return out


HANDLERS = {
    "parse": cmd_parse, "basis": cmd_basis, "classify": cmd_classify, "ext": cmd_ext,
    "tube": cmd_tube, "ubar": cmd_ubar, "lift": cmd_lift, "udr": cmd_udr,
}


# ---------------------------------------------------------------------------
# comparison and output


def matches(expected, actual) -> bool:
    """``expected`` is a sub-document of ``actual``; lists of strings compare as sets."""
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(k in actual and matches(v, actual[k]) for k, v in expected.items())
    if isinstance(expected, list):
        if not isinstance(actual, list) or len(expected) != len(actual):
            return False
        if all(isinstance(x, str) for x in expected + actual):
            return sorted(expected) == sorted(actual)
        return all(matches(a, b) for a, b in zip(expected, actual))
    return expected == actual


def render_pretty(doc: dict) -> str:
    lines = []
    if "modules" in doc and isinstance(doc["modules"], list):
        lines.append(f"{doc.get('family', '')} {doc.get('params', {})}: {doc.get('count')} modules")
        lines.append(f"{'name':<14}{'dims':<22}{'d1':>3}  tau3")
        for m in doc["modules"]:
            dims = ",".join(f"{k}:{v}" for k, v in m["dims"].items())
            lines.append(f"{m['name']:<14}{dims:<22}{m['d1']:>3}  {m['tau3']}")
        for cell, names in doc.get("partition", {}).items():
            lines.append(f"  {cell}: {', '.join(names) or '-'}")
        return "\n".join(lines)
    for k, v in doc.items():
        lines.append(f"{k}: {json.dumps(v) if isinstance(v, (dict, list)) else v}")
    return "\n".join(lines)


def resolve_data_path(path: str) -> Path:
    """``path`` as given, else relative to the installed package (``golden/...``)."""
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    shipped = Path(__file__).parent / p
    return shipped if shipped.exists() else p


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        repmod.set_seed(cfg.seed)
        doc = HANDLERS[cfg.command](cfg)
        text = render_pretty(doc) if cfg.pretty else json.dumps(doc, indent=2, sort_keys=False)
        if cfg.output:
            Path(cfg.output).write_text(text + "\n")
        else:
            print(text, file=stdout)
        if cfg.expected:
            exp = json.loads(resolve_data_path(cfg.expected).read_text())
            if not matches(exp, doc):
                print(json.dumps({"error": "mismatch", "expected": str(cfg.expected)}), file=stderr)
                return 2
        return 0
    except Exception as exc:  # reported, not raised: the CLI contract is exit code 1
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=stderr)
        return 1


def _scalar(text: str) -> tuple[str, int]:
    name, _, value = text.partition("=")
    if not value:
        raise argparse.ArgumentTypeError("scalars look like NAME=VALUE")
    return name.strip(), int(value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        src = s.add_argument_group("algebra")
        src.add_argument("--family", help=f"shipped family: {', '.join(SHIPPED)}")
        src.add_argument("--file", help="presentation file in the .qa format")
        src.add_argument("--n", type=int)
        src.add_argument("--c", type=int, help="shorthand for --scalar c=VALUE")
        src.add_argument("--scalar", type=_scalar, action="append", default=[])
        src.add_argument("--field-degree", type=int, help="work over GF(p^e)")
        src.add_argument("--degree-cap", type=int)
        s.add_argument("--output")
        s.add_argument("--expected")
        s.add_argument("--pretty", action="store_true")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--jobs", type=int, default=1)
        if name == "classify":
            s.add_argument("--cap", dest="length_cap", type=int, default=4)
            s.add_argument("--all-tops", action="store_true")
            s.add_argument("--brute", action="store_true", help="also run the brute-force oracle")
            s.add_argument("--tau-cap", type=int, default=6)
        if name in ("ext", "tube", "ubar", "lift", "udr"):
            s.add_argument("--module", required=True, help="S_…/T_… name or a JSON module")
        if name == "ext":
            s.add_argument("--target")
            s.add_argument("--degree", dest="ext_degree", type=int, default=1)
        if name in ("tube", "udr"):
            s.add_argument("--tau-cap", type=int, default=6)
        if name == "lift":
            s.add_argument("--max-order", type=int, default=5)
            s.add_argument("--direction", type=lambda t: [int(x) for x in t.split(",")])
        if name == "udr":
            s.add_argument("--metadata")
    return p


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    d = vars(ns)
    scalars = dict(d.pop("scalar"))
    c = d.pop("c")
    if c is not None:
        scalars["c"] = c
    cfg = RunConfig(command=d.pop("command"), scalars=scalars)
    for k, v in d.items():
        setattr(cfg, k, v)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 1
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
