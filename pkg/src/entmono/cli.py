"""Command-line front end.

    entmono state make ghz --n 3 --out ghz3.json
    entmono measure tangle --state ghz3.json --cut "0|1,2"
    entmono monogamy ckw --state w3.json --focus 0
    entmono sweep haar --dims 2,2,2 --samples 1000 --seed 7 --out sweep.csv

Exit status: 0 on success, 1 on a domain error (bad state file, dimension
mismatch, ...), 2 on a usage error. Randomized commands need ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import entropy as ent
from . import monogamy as mono
from . import squashed as sq
from .qcore import (
    Bipartition,
    PureState,
    StateError,
    as_density,
    ginibre_random_density,
    group,
    haar_random_pure,
    load_state,
    partial_trace,
    save_state,
)
from .roof import MEASURES, RoofConfig, entropy_measure, roof_maximize, roof_minimize
from .states import parse_state_name
from .tangle import concurrence, eof_two_qubit, pure_tangle, two_qubit_tangle


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.12f}"


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dump(obj) -> None:
    # json floats are repr(): 17 significant digits
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _roof_cfg(args, seed_required: bool = True, base: Optional[RoofConfig] = None) -> RoofConfig:
    if args.seed is None and seed_required:
        raise UsageError("this command is randomized; pass --seed")
    kw = {"seed": args.seed if args.seed is not None else 0}
    if base is not None:
        kw.update(restarts=base.restarts, max_iterations=base.max_iterations, tolerance=base.tolerance)
    for name in ("restarts", "cardinality", "max_iterations", "tolerance", "workers"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    return RoofConfig(**kw)


def _add_roof_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="seed for the decomposition search (required when a search runs)")
    p.add_argument("--restarts", type=int)
    p.add_argument("--cardinality", type=int)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--workers", type=int)


def _cut(text: Optional[str], n: int) -> Bipartition:
    if text is None:
        return Bipartition.focus(0, n)
    return Bipartition.parse(text)


def _prepare_cut(state, cut: Bipartition, reduce: bool):
    """Return (state, cut) with the cut covering every subsystem of the state."""
    members = cut.members
    if members == frozenset(range(len(state.dims))):
        return state, cut
    if max(members) >= len(state.dims):
        raise StateError(f"cut {cut} refers to subsystems beyond {len(state.dims) - 1}")
    if not reduce:
        raise StateError(
            f"cut {cut} does not cover all {len(state.dims)} subsystems; pass --reduce to trace out the rest"
        )
    keep = sorted(members)
    red = partial_trace(state, keep)
    relabel = {old: new for new, old in enumerate(keep)}
    return red, Bipartition([relabel[i] for i in cut.side_a], [relabel[i] for i in cut.side_b])


# --------------------------------------------------------------------------
# verbs


def cmd_state(args) -> int:
    if args.action == "make":
        dims = _int_list(args.dims) if args.dims else None
        st = parse_state_name(args.name, n=args.n, dims=dims)
        save_state(st, args.out)
    elif args.action == "random":
        if args.seed is None:
            raise UsageError("state random needs --seed")
        if not args.dims:
            raise UsageError("state random needs --dims")
        dims = _int_list(args.dims)
        if args.name == "haar":
            st = haar_random_pure(dims, args.seed)
        elif args.name == "ginibre":
            st = ginibre_random_density(dims, args.rank or int(np.prod(dims)), args.seed)
        else:
            raise UsageError(f"unknown random family {args.name!r} (haar or ginibre)")
        save_state(st, args.out)
    elif args.action == "reduce":
        if not args.keep:
            raise UsageError("state reduce needs --keep")
        st = partial_trace(load_state(args.name), _int_list(args.keep))
        save_state(st, args.out)
    elif args.action == "show":
        st = load_state(args.name)
        rho = as_density(st)
        _dump({
            "dims": list(st.dims),
            "kind": "pure" if isinstance(st, PureState) else "mixed",
            "rank": rho.rank(),
            "purity": ent.purity(rho),
            "spectrum": sorted(rho.spectrum().tolist(), reverse=True),
        })
        return 0
    return 0


def cmd_measure(args) -> int:
    st = load_state(args.state)
    name = args.name
    if name in ("tau1", "tau2"):
        if not isinstance(st, PureState):
            raise StateError(f"{name} is defined for three-qubit pure states")
        print(_fmt(mono.tau1(st) if name == "tau1" else mono.tau2(st)))
        return 0
    if name in ("entropy", "purity"):
        keep = _int_list(args.keep) if args.keep else list(range(len(st.dims)))
        rho = partial_trace(st, keep) if len(keep) < len(st.dims) else as_density(st)
        if name == "purity":
            print(_fmt(ent.purity(rho)))
        else:
            print(_fmt(ent.EntropyKind.parse(args.entropy)(rho)))
        return 0
    st, cut = _prepare_cut(st, _cut(args.cut, len(st.dims)), args.reduce)
    if name == "tangle":
        if isinstance(st, PureState):
            val = pure_tangle(st, cut).value
        elif tuple(st.dims) == (2, 2):
            val = two_qubit_tangle(st).value
        else:
            val = roof_minimize(st, MEASURES["tangle"], cut, _roof_cfg(args)).value
    elif name in ("concurrence", "eof"):
        if tuple(st.dims) != (2, 2):
            raise StateError(f"{name} has a closed form for two qubits only; use `roof` otherwise")
        val = concurrence(st) if name == "concurrence" else eof_two_qubit(st)
    elif name == "entanglement":
        mu = entropy_measure(ent.EntropyKind.parse(args.entropy))
        if isinstance(st, PureState):
            val = mu(st, cut)
        else:
            val = roof_minimize(st, mu, cut, _roof_cfg(args)).value
    else:
        raise UsageError(f"unknown measure {name!r}")
    print(_fmt(val))
    return 0


def _report_out(rep) -> None:
    _dump(rep.to_dict())


def cmd_monogamy(args) -> int:
    st = load_state(args.state)
    if args.kind == "ckw":
        if isinstance(st, PureState):
            rep = mono.ckw_check_pure(st, args.focus)
        else:
            rep = mono.ckw_check_mixed(st, args.focus, _roof_cfg(args))
    elif args.kind == "nqubit":
        needs = not isinstance(st, PureState) and as_density(st).rank() > 1
        rep = mono.n_qubit_monogamy(st, args.focus, _roof_cfg(args, seed_required=needs))
    elif args.kind == "qudit":
        if not isinstance(st, PureState):
            raise StateError("qudit monogamy needs a tripartite pure state")
        rep = mono.qudit_monogamy(st, args.focus, _roof_cfg(args))
    else:
        raise UsageError(f"unknown monogamy kind {args.kind!r}")
    _report_out(rep)
    return 0


def cmd_polygamy(args) -> int:
    st = load_state(args.state)
    if not isinstance(st, PureState):
        raise StateError("polygamy checks need a pure state")
    cfg = _roof_cfg(args)
    if args.kind == "tangle":
        rep = mono.polygamy_tangle(st, args.focus, cfg)
    else:
        rep = mono.polygamy_vn(st, cfg, focus=args.focus)
    _report_out(rep)
    return 0


def _bound_dict(b: sq.SquashedBound) -> dict:
    return {"value": b.value, "direction": b.direction, "d_E": b.extension_dim, "converged": b.converged}


def cmd_squashed(args) -> int:
    st = as_density(load_state(args.state))
    if args.kind == "cmi":
        parts = [_int_list(p) if p else [] for p in args.parts.split("|")]
        if len(parts) != 3:
            raise UsageError("--parts needs three groups: A|B|E")
        _dump({"cmi": sq.cmi(st, parts), "direction": "exact"})
        return 0
    if args.kind == "chain":
        parts = [_int_list(p) for p in args.parts.split("|")]
        if len(parts) != 4:
            raise UsageError("--parts needs four groups: A|B|C|E")
        c = sq.chain_rule_check(st, parts)
        _dump({"lhs": c.lhs, "rhs": c.rhs, "residue": c.residue, "terms": list(c.terms)})
        return 0
    cfg = _roof_cfg(args, base=sq.DEFAULT_CFG)
    if args.kind == "bound":
        if st.n != 2:
            cut = _cut(args.cut, st.n)
            cut.validate_for(st.n)
            st = group(st, cut)
        _dump(_bound_dict(sq.squashed_upper_bound(st, args.dim_e, cfg)))
    elif args.kind == "mono":
        _dump(sq.squashed_monogamy_diag(st, args.dim_e, cfg).to_dict())
    elif args.kind == "superadd":
        _dump(sq.superadditivity_diag(st, cfg, d_e=args.dim_e).to_dict())
    else:
        raise UsageError(f"unknown squashed action {args.kind!r}")
    return 0


def cmd_roof(args) -> int:
    st = load_state(args.state)
    st, cut = _prepare_cut(st, _cut(args.cut, len(st.dims)), args.reduce)
    mu = entropy_measure(ent.EntropyKind.parse(args.measure)) if args.measure not in MEASURES else MEASURES[args.measure]
    fn = roof_minimize if args.direction == "min" else roof_maximize
    res = fn(st, mu, cut, _roof_cfg(args))
    if args.witness_out:
        Path(args.witness_out).write_text(json.dumps(res.ensemble.to_dict()) + "\n")
    _dump({
        "value": res.value,
        "direction": res.bound,
        "converged": res.converged,
        "restarts_converged": res.restarts_converged,
        "members": len(res.ensemble),
        "reconstruction_residue": res.ensemble.residue(st),
    })
    return 0


# --------------------------------------------------------------------------
# sweeps

SWEEP_FIXED = ["state_seed", "focus", "lhs"]
SWEEP_TAIL = ["residual", "satisfied", "tau1", "tau2", "method_tags"]


def sweep_header(n_partners: int) -> list[str]:
    return SWEEP_FIXED + [f"rhs_{k + 1}" for k in range(n_partners)] + SWEEP_TAIL


def _sweep_row(job) -> list[list]:
    kind, dims, rank, state_seed, foci = job
    if kind == "haar":
        st = haar_random_pure(dims, state_seed)
    else:
        st = ginibre_random_density(dims, rank, state_seed)
    cfg = RoofConfig(seed=state_seed)
    qubits = all(d == 2 for d in dims)
    rows = []
    t1 = t2 = ""
    if qubits and len(dims) == 3 and isinstance(st, PureState):
        t1, t2 = mono.tau1(st), mono.tau2(st)
    for focus in foci:
        if qubits:
            rep = mono.n_qubit_monogamy(st, focus, cfg)
        else:
            if not isinstance(st, PureState):
                raise StateError("mixed qudit sweeps are not supported")
            rep = mono.qudit_monogamy(st, focus, cfg)
        rows.append(
            [state_seed, focus, rep.lhs, *rep.rhs_terms, rep.residual, int(rep.satisfied), t1, t2, rep.method_tags()]
        )
    return rows


def run_sweep(kind: str, dims: Sequence[int], samples: int, seed: int, out, *, rank: Optional[int] = None,
              foci: Sequence[int] = (0,), workers: int = 1) -> int:
    """Write one CSV row per (sample, focus); returns the number of rows written."""
    dims = [int(d) for d in dims]
    if samples < 1:
        raise StateError("samples must be >= 1")
    if kind not in ("haar", "ginibre"):
        raise StateError(f"unknown sweep kind {kind!r}")
    if len(dims) < 3:
        raise StateError("monogamy sweeps need at least three subsystems")
    if not all(d == 2 for d in dims) and len(dims) != 3:
        raise StateError("qudit sweeps are tripartite only")
    rank = rank or int(np.prod(dims))
    state_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(samples)]
    jobs = [(kind, dims, rank, s, list(foci)) for s in state_seeds]
    out = Path(out)
    try:
        fh = out.open("w", newline="")
    except OSError as exc:
        raise StateError(f"cannot write {out}: {exc.strerror}") from None
    n = 0
    with fh:
        w = csv.writer(fh)
        w.writerow(sweep_header(len(dims) - 1))
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                results = pool.map(_sweep_row, jobs, chunksize=max(1, samples // (4 * workers)))
                for rows in results:
                    w.writerows(_csv_format(rows))
                    n += len(rows)
        else:
            for job in jobs:
                rows = _sweep_row(job)
                w.writerows(_csv_format(rows))
                n += len(rows)
    return n


def _csv_format(rows):
    return [[repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row] for row in rows]


def cmd_sweep(args) -> int:
    if args.seed is None:
        raise UsageError("sweep needs --seed")
    if args.focus == "all":
        foci = list(range(len(_int_list(args.dims))))
    else:
        foci = _int_list(args.focus)
    run_sweep(args.kind, _int_list(args.dims), args.samples, args.seed, args.out,
              rank=args.rank, foci=foci, workers=args.workers or 1)
    return 0


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="entmono", description="Entanglement measures and monogamy checks.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("state", help="construct, sample, reduce or inspect state files")
    s.add_argument("action", choices=["make", "random", "reduce", "show"])
    s.add_argument("name", help="state name (make), haar|ginibre (random) or a state file (reduce/show)")
    s.add_argument("--n", type=int, help="party count for ghz / w")
    s.add_argument("--dims", help="comma-separated subsystem dimensions")
    s.add_argument("--rank", type=int)
    s.add_argument("--keep", help="subsystems to keep (reduce)")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="output state file")
    s.set_defaults(func=cmd_state)

    m = sub.add_parser("measure", help="evaluate one entanglement quantity")
    m.add_argument("name", choices=["tangle", "concurrence", "eof", "entanglement", "entropy", "purity", "tau1", "tau2"])
    m.add_argument("--state", required=True)
    m.add_argument("--cut", help='cut such as "0|1,2" (default: 0 | rest)')
    m.add_argument("--reduce", action="store_true", help="trace out subsystems not named in --cut")
    m.add_argument("--keep", help="subsystems for entropy/purity")
    m.add_argument("--entropy", default="vn", help="linear | vn | renyi:a | tsallis:q")
    _add_roof_opts(m)
    m.set_defaults(func=cmd_measure)

    mo = sub.add_parser("monogamy", help="CKW-type monogamy report (JSON)")
    mo.add_argument("kind", choices=["ckw", "nqubit", "qudit"])
    mo.add_argument("--state", required=True)
    mo.add_argument("--focus", type=int, default=0)
    _add_roof_opts(mo)
    mo.set_defaults(func=cmd_monogamy)

    po = sub.add_parser("polygamy", help="polygamy report with assisted measures (JSON)")
    po.add_argument("kind", choices=["tangle", "vn"])
    po.add_argument("--state", required=True)
    po.add_argument("--focus", type=int, default=0)
    _add_roof_opts(po)
    po.set_defaults(func=cmd_polygamy)

    sqp = sub.add_parser("squashed", help="conditional mutual information and squashed bounds (JSON)")
    sqp.add_argument("kind", choices=["bound", "mono", "superadd", "cmi", "chain"])
    sqp.add_argument("--state", required=True)
    sqp.add_argument("--dim-e", dest="dim_e", type=int, default=4)
    sqp.add_argument("--cut", help="bipartition for bound on states with more than two subsystems")
    sqp.add_argument("--parts", help='index groups, e.g. "0|1|2" (cmi) or "0|1|2|3" (chain)')
    _add_roof_opts(sqp)
    sqp.set_defaults(func=cmd_squashed)

    sw = sub.add_parser("sweep", help="random-state monogamy sweep to CSV")
    sw.add_argument("kind", choices=["haar", "ginibre"])
    sw.add_argument("--dims", required=True)
    sw.add_argument("--samples", type=int, required=True)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--rank", type=int)
    sw.add_argument("--focus", default="0", help='focus index list or "all"')
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out", required=True)
    sw.set_defaults(func=cmd_sweep)

    r = sub.add_parser("roof", help="convex-roof minimum or maximum over decompositions")
    r.add_argument("direction", choices=["min", "max"])
    r.add_argument("--state", required=True)
    r.add_argument("--cut")
    r.add_argument("--reduce", action="store_true")
    r.add_argument("--measure", default="tangle", help="tangle | vn | renyi:a | tsallis:q")
    r.add_argument("--witness-out", dest="witness_out")
    _add_roof_opts(r)
    r.set_defaults(func=cmd_roof)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verb == "state" and args.action in ("make", "random", "reduce") and not args.out:
            parser.error(f"state {args.action} needs --out")
    except SystemExit as exc:  # argparse exits on --help and on usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"entmono: error: {exc}", file=sys.stderr)
        return 2
    except (StateError, OSError, ValueError, KeyError) as exc:
        print(f"entmono: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
