"""Command-line front end: ``gptembed <group> <command> [options]``.

Every command prints one JSON document (sorted keys) on stdout, carrying
the resolved configuration under ``config``. Domain errors exit with code 1
and a JSON error object on stderr; usage errors exit with code 2.
"""
import argparse
import csv
import json
import os
import sys

import numpy as np

from . import bell as BL
from . import context as CX
from . import embed as EM
from . import gpt as G
from . import simulate as SM
from . import tomo as TM
from .errors import GptError, InvalidArgument

PROG = "gptembed"


# ---------------------------------------------------------------- helpers

def resolve_gpt(ref):
    """A GPT from a JSON file path or a built-in name."""
    if os.path.isfile(ref):
        return G.load(ref)
    return G.named_gpt(ref)


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def resolve_functional(ref):
    if ref in ("chsh", "chsh-winprob"):
        return BL.chsh()
    if ref == "chsh-correlator":
        return BL.chsh(form="correlator")
    if os.path.isfile(ref):
        return BL.functional_from_dict(_read_json(ref))
    raise InvalidArgument(f"unknown functional {ref!r}")


def _tabular(columns, rows):
    return {"columns": list(columns), "rows": [list(map(_num, r)) for r in rows]}


def _num(x):
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def _vertex_table(V):
    V = np.atleast_2d(V)
    return _tabular([f"x{i}" for i in range(V.shape[1])], V.tolist())


def emit_plot_data(table, path, err=None):
    """Write a ``{"columns", "rows"}`` table as CSV; anything else is skipped with a notice."""
    err = sys.stderr if err is None else err
    if not isinstance(table, dict) or "columns" not in table or "rows" not in table:
        err.write("notice: result has no tabular data; no plot file written\n")
        return False
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table["columns"])
        for row in table["rows"]:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return True


def _write(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, sort_keys=True) + "\n")


# ---------------------------------------------------------------- gpt

def cmd_gpt_make(a):
    name = a.family
    param = {"classical": a.n, "quantum": a.n, "quaternionic": a.n, "spin": a.d, "polygon": a.k}
    if name in param:
        if param[name] is None:
            raise InvalidArgument(f"{name} needs its size parameter")
        name = f"{name}:{param[name]}"
    g = G.named_gpt(name)
    if a.out:
        G.save(g, a.out)
    return {"gpt": G.to_dict(g), "validation": G.validate(g).to_dict()}, _vertex_table(g.states)


def cmd_gpt_validate(a):
    g = resolve_gpt(a.gpt)
    rep = G.validate(g, tol=a.tol)
    return {"label": g.label, "dim": g.dim, "kind": g.kind, "validation": rep.to_dict()}, _vertex_table(g.states)


# ---------------------------------------------------------------- embed

def cmd_embed_verify(a):
    emb = EM.load(a.file)
    rep = EM.verify(emb, samples=a.samples, seed=a.seed)
    return {"report": rep.to_dict()}, None


def cmd_embed_make(a):
    kind = a.kind
    if kind == "classical-to-quantum":
        emb = EM.classical_to_quantum(a.n)
    elif kind == "subspace-isometry":
        emb = EM.subspace_isometry(a.n, a.m)
    elif kind == "spin-factor":
        emb = EM.spin_factor_embedding(a.d)
    else:
        emb = EM.quaternionic_embedding(a.n)
    rep = EM.verify(emb, samples=a.samples, seed=a.seed)
    if a.out:
        EM.save(emb, a.out)
    return {"embedding": EM.to_dict(emb), "report": rep.to_dict()}, None


def cmd_embed_unitalize(a):
    emb = EM.load(a.file)
    before = EM.verify(emb, samples=a.samples, seed=a.seed, facts=False)
    out = EM.unitalize(emb)
    after = EM.verify(out, samples=a.samples, seed=a.seed)
    if a.out:
        EM.save(out, a.out)
    return {"embedding": EM.to_dict(out), "input_epsilon": before.epsilon,
            "report": after.to_dict()}, None


# ---------------------------------------------------------------- simulate

def cmd_simulate_holevo(a):
    g = resolve_gpt(a.gpt)
    sim = SM.holevo_simulation(g, a.epsilon)
    chk = SM.check_simulation(sim, samples=a.samples, seed=a.seed)
    if a.out:
        SM.save(sim, a.out)
    return {"simulation": sim.to_dict(), "check": chk}, _vertex_table(sim.vertices.T)


def cmd_simulate_multivalence(a):
    sim = SM.load(a.file)
    found, w, dim = SM.is_preparation_multivalent(sim)
    return {"multivalent": found, "witness": None if w is None else w.tolist(), "dimension": dim,
            "detector": "barycenter and pairwise midpoints; a negative answer means no witness found"}, None


def cmd_simulate_sandwich(a):
    g = resolve_gpt(a.gpt)
    sw = SM.sandwich_polytope(g, a.lam)
    return {"sandwich": sw.to_dict()}, _vertex_table(sw.vertices)


# ---------------------------------------------------------------- bell

def cmd_bell_max(a):
    g = resolve_gpt(a.gpt)
    f = BL.with_measurements(resolve_functional(a.functional), g, g)
    val, st = BL.bell_max_gpt(f, g, g)
    out = {"gpt_max": val, "classical_max": BL.bell_max_classical(f), "state": st.w.tolist()}
    try:
        out["quantum_reference"], out["quantum_source"] = BL.quantum_reference_value(f)
    except GptError:
        out["quantum_reference"], out["quantum_source"] = None, "unavailable"
    P = BL.behaviour(f, st.w)
    rows = [[a_, b_, x, y, P[a_, b_, x, y]] for a_, b_, x, y in np.ndindex(*P.shape)]
    return out, _tabular(["a", "b", "x", "y", "p"], rows)


def cmd_bell_robustness(a):
    st = BL.bipartite_from_dict(_read_json(a.state))
    return {"robustness": BL.robustness(st), "residuals": st.residuals()}, None


def cmd_bell_threshold(a):
    g = resolve_gpt(a.gpt)
    f = resolve_functional(a.functional)
    rep = BL.embedding_threshold(f, g, a.reference, b_ref=a.b_ref)
    return {"bound": rep.to_dict()}, None


def cmd_bell_device(a):
    x = BL.gbit_device_bound()
    return {"root": x, "residual": float(BL.device_polynomial(x))}, None


# ---------------------------------------------------------------- context / tomo

def cmd_context_demo(a):
    sc = CX.rebit_scenario()
    out = CX.demo()
    out["scenario"] = sc.to_dict()
    return out, None


def cmd_tomo_run(a):
    t = TM.ingest(a.data, a.format)
    cand = resolve_gpt(a.candidate)
    f = None
    if a.functional:
        if os.path.isfile(a.functional):
            f = _read_json(a.functional)
        else:
            f = resolve_functional(a.functional)
    rep = TM.run_pipeline(t, a.rank, cand, f, reference=a.reference, b_ref=a.b_ref,
                          seed=a.seed, samples=a.samples)
    rows = TM.residual_vs_rank(t, seed=a.seed)
    return {"report": rep.to_dict(), "residual_vs_rank": [list(r) for r in rows]}, \
        _tabular(["rank", "residual"], rows)


# ---------------------------------------------------------------- parser

def _common(p, seed=True, samples=True):
    if seed:
        p.add_argument("--seed", type=int, default=0, help="seed for sampled checks (default 0)")
    if samples:
        p.add_argument("--samples", type=int, default=256,
                       help="random samples for oracle domains (default 256)")
    p.add_argument("--plot-data", metavar="CSV", help="write the tabular part of the result as CSV")


def build_parser():
    p = argparse.ArgumentParser(prog=PROG, description="Embeddings, simulations and "
                                "nonembeddability bounds for generalized probabilistic theories.")
    p.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    groups = p.add_subparsers(dest="group", metavar="GROUP", required=True)

    g = groups.add_parser("gpt", help="construct and validate GPTs")
    gs = g.add_subparsers(dest="command", metavar="COMMAND", required=True)
    m = gs.add_parser("make", help="build a named GPT")
    m.add_argument("family", choices=["classical", "quantum", "gbit", "qubit", "spin",
                                      "quaternionic", "polygon"])
    m.add_argument("--n", type=int, help="levels / outcomes (classical, quantum, quaternionic)")
    m.add_argument("--d", type=int, help="ball dimension (spin)")
    m.add_argument("--k", type=int, help="vertex count (polygon)")
    m.add_argument("--out", help="write the GPT JSON here")
    _common(m, seed=False, samples=False)
    m.set_defaults(func=cmd_gpt_make)
    v = gs.add_parser("validate", help="check the GPT invariants")
    v.add_argument("gpt", help="GPT JSON file or built-in name")
    v.add_argument("--tol", type=float, default=G.VALIDATE_TOL, help="validation tolerance")
    _common(v, seed=False, samples=False)
    v.set_defaults(func=cmd_gpt_validate)

    e = groups.add_parser("embed", help="build, verify and unitalize embeddings")
    es = e.add_subparsers(dest="command", metavar="COMMAND", required=True)
    v = es.add_parser("verify", help="measure epsilon, positivity and unitality")
    v.add_argument("file", help="embedding JSON")
    _common(v)
    v.set_defaults(func=cmd_embed_verify)
    m = es.add_parser("make", help="build a standard exact embedding")
    m.add_argument("kind", choices=["classical-to-quantum", "subspace-isometry", "spin-factor",
                                    "quaternionic"])
    m.add_argument("--n", type=int, default=2, help="domain size (default 2)")
    m.add_argument("--m", type=int, default=3, help="codomain size for subspace-isometry (default 3)")
    m.add_argument("--d", type=int, default=3, help="spin-factor dimension (default 3)")
    m.add_argument("--out", help="write the embedding JSON here")
    _common(m)
    m.set_defaults(func=cmd_embed_make)
    u = es.add_parser("unitalize", help="make an embedding unital")
    u.add_argument("file", help="embedding JSON")
    u.add_argument("--out", help="write the unital embedding JSON here")
    _common(u)
    u.set_defaults(func=cmd_embed_unitalize)

    s = groups.add_parser("simulate", help="classical simulations")
    ss = s.add_subparsers(dest="command", metavar="COMMAND", required=True)
    h = ss.add_parser("holevo", help="Holevo-style classical simulation")
    h.add_argument("gpt", help="GPT JSON file or built-in name")
    h.add_argument("--epsilon", type=float, default=0.0, help="allowed deviation (oracle GPTs)")
    h.add_argument("--out", help="write the simulation JSON here")
    _common(h)
    h.set_defaults(func=cmd_simulate_holevo)
    mv = ss.add_parser("multivalence", help="search for a multivalent preparation")
    mv.add_argument("file", help="simulation JSON")
    _common(mv, seed=False, samples=False)
    mv.set_defaults(func=cmd_simulate_multivalence)
    sw = ss.add_parser("sandwich", help="polytope between a shrunk state set and the state set")
    sw.add_argument("gpt", help="GPT JSON file or built-in name")
    sw.add_argument("--lambda", dest="lam", type=float, default=0.9, help="inner factor (default 0.9)")
    _common(sw, seed=False, samples=False)
    sw.set_defaults(func=cmd_simulate_sandwich)

    b = groups.add_parser("bell", help="Bell maxima, robustness and thresholds")
    bs = b.add_subparsers(dest="command", metavar="COMMAND", required=True)
    m = bs.add_parser("max", help="GPT, classical and quantum maxima of a functional")
    m.add_argument("--gpt", default="gbit", help="GPT JSON file or built-in name (default gbit)")
    m.add_argument("--functional", default="chsh", help="chsh, chsh-correlator or a JSON file")
    _common(m, seed=False, samples=False)
    m.set_defaults(func=cmd_bell_max)
    r = bs.add_parser("robustness", help="robustness of entanglement of a bipartite state")
    r.add_argument("--state", required=True, help="bipartite state JSON")
    _common(r, seed=False, samples=False)
    r.set_defaults(func=cmd_bell_robustness)
    t = bs.add_parser("threshold", help="epsilon below which no embedding exists")
    t.add_argument("--gpt", default="gbit", help="GPT JSON file or built-in name (default gbit)")
    t.add_argument("--functional", default="chsh", help="chsh, chsh-correlator or a JSON file")
    t.add_argument("--reference", choices=["quantum", "classical"], default="quantum")
    t.add_argument("--b-ref", type=float, help="externally supplied reference value")
    _common(t, seed=False, samples=False)
    t.set_defaults(func=cmd_bell_threshold)
    dv = bs.add_parser("device", help="minimal error of a gbit embedding into quantum theory")
    _common(dv, seed=False, samples=False)
    dv.set_defaults(func=cmd_bell_device)

    c = groups.add_parser("context", help="noncontextuality scenario")
    cs = c.add_subparsers(dest="command", metavar="COMMAND", required=True)
    d = cs.add_parser("demo", help="rebit scenario, its score and the classical bound")
    _common(d, seed=False, samples=False)
    d.set_defaults(func=cmd_context_demo)

    tm = groups.add_parser("tomo", help="theory-agnostic tomography pipeline")
    ts = tm.add_subparsers(dest="command", metavar="COMMAND", required=True)
    rr = ts.add_parser("run", help="fit, shrink-embed and certify")
    rr.add_argument("--data", required=True, help="counts file (CSV or JSON)")
    rr.add_argument("--format", choices=["csv", "json"], help="input format (default: by extension)")
    rr.add_argument("--rank", type=int, required=True, help="GPT dimension to fit")
    rr.add_argument("--candidate", default="qubit", help="GPT JSON file or built-in name (default qubit)")
    rr.add_argument("--functional", help="chsh or a functional JSON file")
    rr.add_argument("--reference", choices=["quantum", "classical"], default="quantum")
    rr.add_argument("--b-ref", type=float, help="externally supplied reference value")
    _common(rr)
    rr.set_defaults(func=cmd_tomo_run)
    return p


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def dispatch(argv, out=None, err=None):
    """Run one command; returns the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result, table = args.func(args)
    except GptError as exc:
        err.write(json.dumps(exc.to_dict(), sort_keys=True, default=str) + "\n")
        return 1
    except OSError as exc:
        err.write(json.dumps({"error": "io-error", "message": str(exc)}, sort_keys=True) + "\n")
        return 1
    result["config"] = _config(args)
    out.write(json.dumps(result, sort_keys=True, indent=2, default=_num) + "\n")
    if getattr(args, "plot_data", None):
        emit_plot_data(table, args.plot_data, err)
    return 0


def main(argv=None):
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
