"""Command-line entry point: ``graphprod [--config FILE] COMMAND ...``.

Every run writes its artifacts plus ``manifest.json`` into the output
directory (``--out``, else $GPG_OUTPUT_DIR, else the config's output.dir).
Outputs carry no timestamps, so identical inputs give identical bytes.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .cayley import build_ball, four_point_delta
from .config import ToolkitConfig, load_config
from .domains import (canonicalize, coning_family, relation, verify_clean_containers)
from .errors import ConfigError, GraphProdError
from .graph import enumerate_subgraphs
from .hhs import HhsInstance, check_axioms, grid_instance, maximize
from .morse import (detectability_probe, distortion_curve, local_to_global_probe, morse_gauge_table,
                    power_path, stability_verdict)
from .cayley import ball_elements, standard_geodesic
from .words import QGParams


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class Run:
    """Collects artifacts for one invocation and writes them with a manifest."""

    def __init__(self, command: str, args: dict, out_dir: Path, config: Optional[ToolkitConfig],
                 threads: int):
        self.command = command
        self.args = args
        self.out_dir = out_dir
        self.config = config
        self.threads = threads
        self.artifacts: dict[str, str] = {}

    def write(self, name: str, text: str) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        (self.out_dir / name).write_bytes(data)
        self.artifacts[name] = hashlib.sha256(data).hexdigest()

    def write_json(self, name: str, obj) -> None:
        self.write(name, dumps(obj))

    def manifest(self, status: str, error: Optional[dict] = None) -> None:
        m = {
            "command": self.command,
            "args": self.args,
            "config_sha256": self.config.sha256() if self.config else None,
            "seed": self.config.seed if self.config else self.args.get("seed"),
            "threads": self.threads,
            "versions": {"graphprod": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
            "status": status,
            "error": error,
            "artifacts": dict(sorted(self.artifacts.items())),
        }
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / "manifest.json").write_bytes(dumps(m).encode("utf-8"))


def _parse_class(gp, text: str):
    """``WORD|v1,v2`` (empty word or ``1`` for the identity)."""
    if "|" not in text:
        raise ConfigError(f"class literal must look like 'WORD|a,b': {text!r}")
    word, verts = text.split("|", 1)
    word = word.strip()
    g = gp.identity() if word in ("", "1") else gp.parse(word)
    members = [v.strip() for v in verts.split(",") if v.strip()]
    return canonicalize(g, gp.graph.subgraph(members))


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _need_config(cfg):
    if cfg is None:
        raise ConfigError("this command needs --config")
    return cfg


def cmd_normalize(run: Run, cfg, a) -> str:
    gp = _need_config(cfg).gp
    x = gp.parse(a.word)
    run.write_json("normalize.json", {"input": a.word, "normal_form": str(x), "length": x.length,
                                      "support": sorted(x.support.members)})
    return str(x)


def cmd_mul(run: Run, cfg, a) -> str:
    gp = _need_config(cfg).gp
    x, y = gp.parse(a.w1), gp.parse(a.w2)
    z = x * y
    run.write_json("mul.json", {"left": str(x), "right": str(y), "product": str(z), "length": z.length})
    return str(z)


def _ball(cfg, a):
    gp = cfg.gp
    center = gp.parse(a.center) if a.center else None
    return build_ball(gp, a.radius, "standard" if a.metric == "standard" else "cone", center=center,
                      node_limit=cfg.budgets["node_limit"])


def cmd_ball(run: Run, cfg, a) -> str:
    ball = _ball(_need_config(cfg), a)
    run.write("ball.csv", ball.to_csv())
    summary = {"radius": a.radius, "metric": a.metric, "center": str(ball.center), "size": len(ball),
               "max_dist": max(ball.dist)}
    run.write_json("ball.json", summary)
    return f"{len(ball)} points"


def cmd_delta(run: Run, cfg, a) -> str:
    cfg = _need_config(cfg)
    ball = _ball(cfg, a)
    budget = a.budget or cfg.budgets["quadruple_budget"]
    rep = four_point_delta(ball, budget, cfg.seed)
    out = rep.to_json()
    out.update({"radius": a.radius, "metric": a.metric, "points": len(ball)})
    run.write_json("delta.json", out)
    return f"delta = {rep.delta}"


def cmd_classes(run: Run, cfg, a) -> str:
    cfg = _need_config(cfg)
    gp = cfg.gp
    if a.relation:
        A, B = (_parse_class(gp, t) for t in a.relation)
        r = relation(A, B)
        run.write_json("relation.json", {"A": str(A), "B": str(B), "relation": str(r)})
        return str(r)
    subs = enumerate_subgraphs(gp.graph, limit=cfg.budgets["subgraph_limit"])
    seen = {}
    for k in ball_elements(gp, a.depth, node_limit=cfg.budgets["node_limit"]):
        for s in subs:
            c = canonicalize(k, s)
            seen.setdefault(str(c), c)
    classes = sorted(seen.values(), key=lambda c: (c.sub.sort_key(), c.rep.sort_key()))
    run.write_json("classes.json", {"depth": a.depth, "classes": [str(c) for c in classes]})
    return f"{len(classes)} classes"


def cmd_clean_containers(run: Run, cfg, a) -> str:
    cfg = _need_config(cfg)
    rep = verify_clean_containers(cfg.graph, a.depth, cfg.gp)
    run.write_json("clean_containers.json", rep.to_json())
    return f"{len(rep.entries)} pairs checked, {len(rep.violations)} violations"


def cmd_coning_family(run: Run, cfg, a) -> str:
    cfg = _need_config(cfg)
    fam = coning_family(cfg.graph)
    run.write_json("coning_family.json", {"family": [sorted(s.members) for s in fam]})
    return " ".join(repr(s) for s in fam)


def cmd_stability(run: Run, cfg, a) -> str:
    cfg = _need_config(cfg)
    g = cfg.gp.parse(a.element)
    slacks = _ints(a.slacks) if a.slacks else cfg.slacks
    v = stability_verdict(g, a.nmax, slacks, cfg.thresholds)
    out = v.to_json()
    out["element"] = str(g)
    run.write_json("stability.json", out)
    return v.verdict


def cmd_distortion(run: Run, cfg, a) -> str:
    cfg = _need_config(cfg)
    g = cfg.gp.parse(a.element)
    radii = _ints(a.radii) if a.radii else None
    curve = distortion_curve(g, a.nmax, radii, cfg.slacks)
    run.write("distortion.csv", curve.to_csv())
    run.write_json("distortion.json", curve.to_json())
    return curve.to_csv().rstrip("\n")


def cmd_hhs(run: Run, cfg, a) -> str:
    if a.hhs_command == "fixture":
        data = grid_instance(n=a.size, E=a.E, M=a.M)
        Path(a.file).write_text(dumps(data), encoding="utf-8")
        run.write_json("fixture.json", {"file": a.file, "points": len(data["space"]["points"])})
        return a.file
    try:
        with open(a.file, encoding="utf-8") as fh:
            inst = HhsInstance(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot load instance {a.file}: {exc}") from None
    if a.hhs_command == "check":
        rep = check_axioms(inst, seed=a.seed)
        run.write_json("axioms.json", rep.to_json())
        return "pass" if rep.passed else f"fail {sorted(rep.failing)}"
    m = maximize(inst, a.M)
    out = m.to_json()
    run.write_json("maximize.json", out)
    return "T = {" + ",".join(m.T) + "}"


def cmd_probe(run: Run, cfg, a) -> str:
    cfg = _need_config(cfg)
    gp = cfg.gp
    params = QGParams(a.lam, a.eps).check()
    if a.probe_command == "detect":
        path = power_path(gp.parse(a.element), a.n)
        rep = detectability_probe(path, params, a.R)
        run.write_json("detect.json", rep)
        return f"standard ok={rep['standard_fit']['ok']} cone ok={rep['cone_fit']['ok']}"
    if a.probe_command == "gauge":
        target = gp.parse(a.element) ** a.n
        geo = standard_geodesic(gp.identity(), target)
        grid = [tuple(float(v) for v in kc.split(":")) for kc in a.grid.split(",")]
        tab = morse_gauge_table(geo, grid, a.samples or cfg.budgets["gauge_samples"], cfg.seed)
        run.write("gauge.csv", tab.to_csv())
        return tab.to_csv().rstrip("\n")
    # mltg: consecutive geodesic segments, each given by a word
    pieces = []
    cur = gp.identity()
    for w in a.segments.split(";"):
        nxt = cur * gp.parse(w)
        pieces.append(standard_geodesic(cur, nxt))
        cur = nxt
    rep = local_to_global_probe(pieces, a.L, params)
    run.write_json("mltg.json", rep)
    return f"global fit lambda={rep['global_fit']['lambda']} epsilon={rep['global_fit']['epsilon']}"


COMMANDS = {
    "normalize": cmd_normalize, "mul": cmd_mul, "ball": cmd_ball, "delta": cmd_delta,
    "classes": cmd_classes, "clean-containers": cmd_clean_containers,
    "coning-family": cmd_coning_family, "stability": cmd_stability, "distortion": cmd_distortion,
    "hhs": cmd_hhs, "probe": cmd_probe,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphprod", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="toolkit JSON config")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker cap (recorded in the manifest)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("normalize")
    s.add_argument("word")
    s = sub.add_parser("mul")
    s.add_argument("w1")
    s.add_argument("w2")
    for name in ("ball", "delta"):
        s = sub.add_parser(name)
        s.add_argument("--radius", type=int, required=True)
        s.add_argument("--metric", choices=["standard", "cone"], default="standard")
        s.add_argument("--center")
        if name == "delta":
            s.add_argument("--budget", type=int)
    s = sub.add_parser("classes")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--list", action="store_true")
    g.add_argument("--relation", nargs=2, metavar=("A", "B"))
    s.add_argument("--depth", type=int, default=1)
    s = sub.add_parser("clean-containers")
    s.add_argument("--depth", type=int, default=1)
    sub.add_parser("coning-family")
    s = sub.add_parser("stability")
    s.add_argument("element")
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--slacks")
    s = sub.add_parser("distortion")
    s.add_argument("element")
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--radii")

    h = sub.add_parser("hhs")
    hs = h.add_subparsers(dest="hhs_command", required=True)
    s = hs.add_parser("check")
    s.add_argument("file")
    s.add_argument("--seed", type=int, default=0)
    s = hs.add_parser("maximize")
    s.add_argument("file")
    s.add_argument("--M", type=int)
    s = hs.add_parser("fixture")
    s.add_argument("kind", choices=["grid"])
    s.add_argument("file")
    s.add_argument("--size", type=int, default=4)
    s.add_argument("--E", type=int, default=2)
    s.add_argument("--M", type=int, default=1)

    pr = sub.add_parser("probe")
    ps = pr.add_subparsers(dest="probe_command", required=True)
    for name in ("detect", "gauge", "mltg"):
        s = ps.add_parser(name)
        s.add_argument("--lam", type=float, default=4.0 if name == "detect" else 1.0)
        s.add_argument("--eps", type=float, default=1.0 if name == "detect" else 0.0)
        if name in ("detect", "gauge"):
            s.add_argument("element")
            s.add_argument("--n", type=int, required=True)
        if name == "detect":
            s.add_argument("--R", type=int)
        if name == "gauge":
            s.add_argument("--grid", default="1:0,2:0,2:2")
            s.add_argument("--samples", type=int)
        if name == "mltg":
            s.add_argument("--segments", required=True, help="words separated by ';'")
            s.add_argument("--L", type=int, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    args = {k: v for k, v in sorted(vars(a).items()) if k not in ("config", "out")}
    cfg = None
    out_dir = Path(a.out) if a.out else None
    run = None
    try:
        if a.config:
            cfg = load_config(a.config)
        if out_dir is None:
            out_dir = _default_out(cfg)
        run = Run(a.command, args, out_dir, cfg, a.threads)
        text = COMMANDS[a.command](run, cfg, a)
        run.manifest("ok")
        print(text)
        return 0
    except GraphProdError as exc:
        err = {"error": exc.code, "message": str(exc)}
        if run is None:
            run = Run(a.command, args, out_dir or _default_out(None), cfg, a.threads)
        run.write_json("error.json", err)
        run.manifest("error", err)
        print(dumps(err), end="", file=sys.stderr)
        return 2


def _default_out(cfg: Optional[ToolkitConfig]) -> Path:
    if cfg is not None:
        return cfg.output_dir()
    import os
    return Path(os.environ.get("GPG_OUTPUT_DIR", "gpg_out"))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
