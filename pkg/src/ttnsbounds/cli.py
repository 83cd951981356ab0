"""Command-line interface: ``ttnsbounds {gen,decompose,certify,profile}``.

State files always use the site labels of the tree file; the tree is
canonicalized internally and states are permuted to match.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import report
from .dense import DenseState, from_tree_order, load_state, save_state, to_tree_order
from .errors import TtnsError
from .targets import HamiltonianSpec, ground_state, make_named
from .tree import TreeGraph, load_tree, tree_from_dict
from .truncation import TruncationPlan
from .ttns import exact_decompose, save_ttns

log = logging.getLogger("ttnsbounds")


def _parse_alphas(text: str | None) -> list[float]:
    if not text:
        return list(report.DEFAULT_ALPHAS)
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_plan(args, tree: TreeGraph) -> TruncationPlan:
    given = [x is not None for x in (args.caps, args.eps, args.delta)]
    if sum(given) != 1:
        raise SystemExit("give exactly one of --caps, --eps, --delta")
    if args.eps is not None:
        return TruncationPlan(eps_per_edge=args.eps)
    if args.delta is not None:
        return TruncationPlan(delta_total=args.delta, split=args.split)
    text = args.caps.strip()
    if text.isdigit():
        return TruncationPlan.uniform(int(text), tree)
    if Path(text).is_file():
        return TruncationPlan.from_dict(json.loads(Path(text).read_text()), tree)
    caps = {}
    for item in text.split(","):
        edge, m = item.split("=")
        caps[int(edge)] = int(m)
    return TruncationPlan(caps=caps)


def _load_pair(state_path, tree_path) -> tuple[DenseState, TreeGraph]:
    tree = load_tree(tree_path)
    state = load_state(state_path)
    if len(state.dims) != tree.n:
        raise TtnsError(f"state has {len(state.dims)} sites, tree has {tree.n}")
    return to_tree_order(state, tree.labeling), tree


def _load_spec(path: str) -> tuple[HamiltonianSpec, TreeGraph]:
    data = json.loads(Path(path).read_text())
    tree_data = data["tree"]
    if isinstance(tree_data, str):
        tree_data = json.loads((Path(path).parent / tree_data).read_text())
    tree = tree_from_dict(tree_data)
    new = dict(zip(range(1, tree.n + 1), tree.labeling))

    def per_edge(val):
        if isinstance(val, (int, float)):
            return {i: float(val) for i in tree.edges}
        out = {}
        for key, v in val.items():
            a, b = (int(x) for x in key.replace("-", ",").split(","))
            out[min(new[a], new[b])] = float(v)
        return out

    def per_vertex(val):
        if isinstance(val, (int, float)):
            return {v: float(val) for v in tree.vertices}
        return {new[int(k)]: float(v) for k, v in val.items()}

    spec = HamiltonianSpec(tree, data["model"], per_edge(data.get("J", 1.0)),
                           per_vertex(data.get("h", 0.0)), float(data.get("anisotropy", 1.0)))
    return spec, tree


def cmd_gen(args) -> int:
    if args.kind == "ground":
        if not args.spec:
            raise SystemExit("gen ground needs --spec")
        spec, tree = _load_spec(args.spec)
        gs = ground_state(spec)
        save_state(from_tree_order(gs.state, tree.labeling), args.out)
        sidecar = Path(str(args.out) + ".json")
        sidecar.write_text(report.dumps({"model": spec.model, "energy": gs.energy,
                                         "gap": gs.gap, "degenerate": gs.degenerate}))
        print(f"energy {gs.energy:.12f}  gap {gs.gap:.6g}")
        return 0
    if args.dims:
        dims = [int(x) for x in args.dims.split(",")]
    elif args.tree:
        dims = json.loads(Path(args.tree).read_text())["dims"]
    else:
        raise SystemExit("gen needs --dims or --tree")
    save_state(make_named(args.kind, dims, seed=args.seed), args.out)
    return 0


def cmd_decompose(args) -> int:
    state, tree = _load_pair(args.state, args.tree)
    ttns = exact_decompose(state, tree)
    if args.out:
        save_ttns(ttns, args.out)
    print(f"{'edge':>4} {'parent':>6} {'M':>5} {'lambda_max':>22} {'lambda_min_kept':>22}")
    for i in tree.edges:
        m = ttns.bond_dims[i]
        s = ttns.spectra[i].coefficients
        print(f"{i:>4} {tree.parent[i]:>6} {m:>5} {s[0]:>22.17g} {s[m - 1]:>22.17g}")
    return 0


def _certify_one(state: DenseState, tree: TreeGraph, plan: TruncationPlan, alphas,
                 full: bool) -> tuple[str, bool]:
    rep = report.certify(state, tree, plan, alphas, full_spectra=full)
    return report.dumps(rep), rep["verdict"]


def _certify_seed(job) -> tuple[int, str, bool]:
    seed, tree, plan, alphas, full = job
    state = make_named("random", tree.dims, seed=seed)
    text, ok = _certify_one(state, tree, plan, alphas, full)
    return seed, text, ok


def cmd_certify(args) -> int:
    alphas = _parse_alphas(args.alphas)
    if args.seed_range:
        lo, hi = (int(x) for x in args.seed_range.split(":"))
        tree = load_tree(args.tree)
        plan = _parse_plan(args, tree)
        out_dir = Path(args.out or "reports")
        out_dir.mkdir(parents=True, exist_ok=True)
        jobs = [(s, tree, plan, alphas, args.full_spectra) for s in range(lo, hi)]
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                results = list(pool.map(_certify_seed, jobs))
        else:
            results = [_certify_seed(j) for j in jobs]
        passed = 0
        for seed, text, ok in sorted(results):
            (out_dir / f"report_seed{seed}.json").write_text(text + "\n")
            passed += ok
            print(f"seed {seed}: {'PASS' if ok else 'FAIL'}")
        print(f"{passed}/{len(results)} instances pass")
        return 0 if passed == len(results) else 1

    state, tree = _load_pair(args.state, args.tree)
    plan = _parse_plan(args, tree)
    text, ok = _certify_one(state, tree, plan, alphas, args.full_spectra)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    rep = json.loads(text)
    g = rep["global"]
    print(f"delta {g['delta_projector']:.12g}  max_eps {g['max_eps']:.12g}  "
          f"sum_eps {g['sum_eps']:.12g}  verdict {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


def cmd_profile(args) -> int:
    state, tree = _load_pair(args.state, args.tree)
    prof = report.profile(state, tree, _parse_alphas(args.alphas), eps=args.eps)
    if args.out:
        Path(args.out).write_text(report.dumps(prof) + "\n")
    print(report.profile_text(prof))
    return 0 if all(e.get("bracket_holds", True) for e in prof["edges"]) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ttnsbounds", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a target state file")
    g.add_argument("kind", choices=["product", "bell_pair", "ghz", "w", "random", "ground"])
    g.add_argument("--dims", help="comma separated local dimensions")
    g.add_argument("--tree", help="tree JSON (dims are taken from it)")
    g.add_argument("--spec", help="Hamiltonian JSON for 'ground'")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decompose", help="exact TTNS and per-edge spectra")
    d.add_argument("--state", required=True)
    d.add_argument("--tree", required=True)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    c = sub.add_parser("certify", help="truncate and check all error bounds")
    c.add_argument("--state")
    c.add_argument("--tree", required=True)
    c.add_argument("--caps", help="uniform cap, 'edge=M,...' list, or plan JSON file")
    c.add_argument("--eps", type=float, help="per-edge error budget")
    c.add_argument("--delta", type=float, help="total error budget")
    c.add_argument("--split", choices=["even", "entropy"], default="even")
    c.add_argument("--alphas")
    c.add_argument("--seed-range", help="A:B, certify random states for seeds A..B-1")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--full-spectra", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    f = sub.add_parser("profile", help="per-edge Rényi entropy table")
    f.add_argument("--state", required=True)
    f.add_argument("--tree", required=True)
    f.add_argument("--alphas")
    f.add_argument("--eps", type=float, help="budget for the bond-dimension bracket")
    f.add_argument("--out")
    f.set_defaults(func=cmd_profile)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "certify" and not args.seed_range and not args.state:
        raise SystemExit("certify needs --state or --seed-range")
    try:
        return args.func(args)
    except TtnsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
