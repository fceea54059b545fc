"""Theory-agnostic tomography: frequency data -> fitted GPT -> shrink embedding -> verdict.

Steps of :func:`run_pipeline`:

1. ingest the prepare-and-measure counts,
2. fit a rank-r GPT to the frequencies,
3. align it with a candidate theory and shrink until it fits inside,
4. attach a plug-in statistical half-width,
5. compare with a Bell-functional nonembeddability threshold.
"""
import csv
import io
import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import bell as BL
from . import embed as EM
from . import gpt as G
from .errors import GptError, InvalidArgument, NoAlignment, ParseError, PipelineError
from .hermitian import hermitian_basis
from .polytope import extreme_points

EMBEDDABLE = "EmbeddableWithinEps"
CERTIFIED = "CertifiedNonembeddable"
INCONCLUSIVE = "Inconclusive"
Z_95 = 1.96
SHRINK_TOL = 1e-6
FIT_TOL = 1e-12


# ---------------------------------------------------------------- data

@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """``counts[p, j]`` over preparations p and outcome columns j.

    Column j belongs to measurement ``column_meas[j]``; outcome labels per
    measurement are in ``outcomes``.
    """
    preparations: tuple
    measurements: tuple
    outcomes: tuple
    counts: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.counts, dtype=float)
        if C.shape != (len(self.preparations), sum(len(o) for o in self.outcomes)):
            raise InvalidArgument("count matrix does not match the labels")
        if np.any(C < 0) or not np.all(np.isfinite(C)):
            raise InvalidArgument("counts must be finite and nonnegative")
        object.__setattr__(self, "counts", C)
        tot = self.totals
        if np.any(tot <= 0):
            p, m = np.argwhere(tot <= 0)[0]
            raise InvalidArgument(f"cell ({self.preparations[p]}, {self.measurements[m]}) has zero total")

    @property
    def column_meas(self):
        return np.repeat(np.arange(len(self.measurements)), [len(o) for o in self.outcomes])

    @property
    def totals(self):
        """Shots per (preparation, measurement)."""
        cm = self.column_meas
        return np.stack([self.counts[:, cm == m].sum(axis=1) for m in range(len(self.measurements))], axis=1)

    @property
    def freqs(self):
        return self.counts / self.totals[:, self.column_meas]

    def normalization_residual(self):
        F = self.freqs
        cm = self.column_meas
        return float(max(np.abs(F[:, cm == m].sum(axis=1) - 1).max() for m in range(len(self.measurements))))

    def to_dict(self):
        out = {}
        k = 0
        for mi, m in enumerate(self.measurements):
            for oi, o in enumerate(self.outcomes[mi]):
                for pi, p in enumerate(self.preparations):
                    out.setdefault(p, {}).setdefault(m, {})[o] = float(self.counts[pi, k + oi])
            k += len(self.outcomes[mi])
        return out


def _from_cells(cells, where):
    """Build a table from ``{(p, m, o): count}`` keeping first-seen label order."""
    preps, meas, outs = [], [], {}
    for (p, m, o) in cells:
        if p not in preps:
            preps.append(p)
        if m not in meas:
            meas.append(m)
            outs[m] = []
        if o not in outs[m]:
            outs[m].append(o)
    cols = [(m, o) for m in meas for o in outs[m]]
    C = np.zeros((len(preps), len(cols)))
    for pi, p in enumerate(preps):
        for j, (m, o) in enumerate(cols):
            if (p, m, o) not in cells:
                raise ParseError(f"missing count for cell (prep={p}, meas={m}, outcome={o})",
                                 prep=p, meas=m, outcome=o, source=where)
            C[pi, j] = cells[(p, m, o)]
    try:
        return FrequencyTable(tuple(preps), tuple(meas), tuple(tuple(outs[m]) for m in meas), C)
    except InvalidArgument as exc:
        raise ParseError(str(exc), source=where) from exc


def _parse_count(raw, line):
    try:
        v = float(raw)
    except (TypeError, ValueError):
        raise ParseError(f"line {line}: count {raw!r} is not a number", line=line) from None
    if not np.isfinite(v):
        raise ParseError(f"line {line}: count must be finite", line=line)
    if v < 0:
        raise ParseError(f"line {line}: negative count {raw}", line=line)
    return v


def _read_csv(text, where):
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != ["prep", "meas", "outcome", "count"]:
        raise ParseError("line 1: header must be prep,meas,outcome,count", line=1)
    cells = {}
    for line, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(f"line {line}: expected 4 fields, got {len(row)}", line=line)
        key = tuple(c.strip() for c in row[:3])
        if key in cells:
            raise ParseError(f"line {line}: duplicate cell {key}", line=line)
        cells[key] = _parse_count(row[3].strip(), line)
    if not cells:
        raise ParseError("no data rows", line=1)
    return _from_cells(cells, where)


def _read_json(text, where):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}", line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object keyed by preparation", line=1)
    cells = {}
    for p, ms in data.items():
        if not isinstance(ms, dict):
            raise ParseError(f"preparation {p!r} must map measurements to outcome counts")
        for m, os_ in ms.items():
            if not isinstance(os_, dict):
                raise ParseError(f"cell ({p}, {m}) must map outcomes to counts")
            for o, c in os_.items():
                if isinstance(c, bool) or not isinstance(c, (int, float)):
                    raise ParseError(f"cell ({p}, {m}, {o}): count is not a number")
                if c < 0:
                    raise ParseError(f"cell ({p}, {m}, {o}): negative count {c}")
                cells[(str(p), str(m), str(o))] = float(c)
    if not cells:
        raise ParseError("no data")
    return _from_cells(cells, where)


def ingest(source, format=None):
    """Read counts from a path or a text stream (``csv`` or ``json``)."""
    where = "<stream>"
    if hasattr(source, "read"):
        text = source.read()
    else:
        where = str(source)
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
        if format is None:
            format = "json" if where.lower().endswith(".json") else "csv"
    fmt = (format or "csv").lower()
    if fmt == "csv":
        return _read_csv(text, where)
    if fmt == "json":
        return _read_json(text, where)
    raise InvalidArgument(f"unknown format {format!r}")


def table_to_csv(t):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["prep", "meas", "outcome", "count"])
    k = 0
    for mi, m in enumerate(t.measurements):
        for oi, o in enumerate(t.outcomes[mi]):
            for pi, p in enumerate(t.preparations):
                c = t.counts[pi, k + oi]
                w.writerow([p, m, o, int(c) if float(c).is_integer() else repr(float(c))])
        k += len(t.outcomes[mi])
    return buf.getvalue()


def synthesize(states, measurements, shots=None, seed=0, prep_labels=None, meas_labels=None):
    """Counts for the given states and measurements (``measurements[m]`` is an outcomes x dim array).

    ``shots=None`` stores the exact probabilities; otherwise each cell is a
    multinomial sample with ``shots`` trials.
    """
    S = np.atleast_2d(np.asarray(states, dtype=float))
    rng = np.random.default_rng(seed)
    blocks = []
    for M in measurements:
        P = np.clip(S @ np.asarray(M, dtype=float).T, 0.0, None)
        P = P / P.sum(axis=1, keepdims=True)
        if shots is None:
            blocks.append(P)
        else:
            blocks.append(np.array([rng.multinomial(int(shots), p) for p in P], dtype=float))
    preps = tuple(prep_labels or [f"p{i}" for i in range(len(S))])
    meas = tuple(meas_labels or [f"m{j}" for j in range(len(measurements))])
    outs = tuple(tuple(str(k) for k in range(len(M))) for M in measurements)
    return FrequencyTable(preps, meas, outs, np.hstack(blocks))


# ---------------------------------------------------------------- fitting

@dataclass
class FittedGpt:
    gpt: G.Gpt
    rank: int
    residual: float
    fit_log: dict = field(default_factory=dict)
    columns: tuple = ()

    def effects_for(self, meas_index, table_columns):
        return self.gpt.effects[table_columns == meas_index]

    def to_dict(self):
        return {"gpt": G.to_dict(self.gpt), "rank": self.rank, "residual": self.residual,
                "fit_log": self.fit_log}


def _lowrank(F, r, groups):
    """Affine rank-r factorization ``F ~ S E^T`` with states (1, x) and unit (1, 0, ...)."""
    c = F.mean(axis=0)
    U, s, Vt = np.linalg.svd(F - c, full_matrices=False)
    k = r - 1
    X = U[:, :k] * s[:k]
    Gm = Vt[:k].T
    # keep per-measurement effect sums equal to the unit exactly
    for g in groups:
        Gm[g] -= Gm[g].mean(axis=0)
    S = np.hstack([np.ones((F.shape[0], 1)), X])
    E = np.hstack([c[:, None], Gm])
    return S, E, s


def _renormalize(F, groups):
    F = np.clip(F, 0.0, 1.0)
    for g in groups:
        tot = F[:, g].sum(axis=1, keepdims=True)
        F[:, g] = np.where(tot > 0, F[:, g] / np.where(tot > 0, tot, 1.0), 1.0 / len(g))
    return F


def fit_gpt(t, rank, seed=0, clip=True, max_iter=200, tol=FIT_TOL):
    """Rank-``rank`` GPT reproducing the frequencies of ``t``.

    Centered truncated SVD gives states ``(1, x_p)`` and effects whose
    per-measurement sums equal the unit ``(1, 0, ...)``. If reconstructed
    probabilities leave [0, 1], the fit alternates between clipping and
    re-factorizing. The procedure is deterministic; ``seed`` is recorded.
    """
    F = t.freqs
    P, K = F.shape
    rank = int(rank)
    if rank < 1 or rank > min(P, K):
        raise InvalidArgument(f"rank must lie in [1, {min(P, K)}]", rank=rank)
    cm = t.column_meas
    groups = [np.flatnonzero(cm == m) for m in range(len(t.measurements))]
    S, E, sv = _lowrank(F, rank, groups)
    R = S @ E.T
    it = 0
    converged = True
    if clip:
        best = (S, E)
        while (R.min() < -tol or R.max() > 1 + tol):
            if it >= max_iter:
                converged = False
                break
            S, E, _ = _lowrank(_renormalize(R, groups), rank, groups)
            R = S @ E.T
            it += 1
            best = (S, E)
        S, E = best
        R = S @ E.T
    S[np.abs(S) < 1e-15] = 0.0
    E[np.abs(E) < 1e-15] = 0.0
    unit = np.zeros(rank)
    unit[0] = 1.0
    g = G.Gpt(unit, S, E, label=f"fitted:rank{rank}")
    resid = float(np.abs(F - R).max())
    log = {"iterations": it, "converged": converged, "seed": int(seed),
           "singular_values": [float(x) for x in sv[:max(rank, 1)]],
           "probability_range": [float(R.min()), float(R.max())]}
    return FittedGpt(g, rank, resid, log, tuple(int(x) for x in cm))


def residual_vs_rank(t, ranks=None, seed=0):
    P, K = t.freqs.shape
    ranks = range(1, min(P, K) + 1) if ranks is None else ranks
    return [(int(r), fit_gpt(t, r, seed=seed, clip=False).residual) for r in ranks]


# ---------------------------------------------------------------- alignment

def _mvee(Y, tol=1e-10, max_iter=10000):
    """Minimum-volume enclosing ellipsoid ``{y : (y - c)^T A (y - c) <= 1}`` (Khachiyan)."""
    n, d = Y.shape
    Q = np.hstack([Y, np.ones((n, 1))]).T
    u = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        X = Q @ (u[:, None] * Q.T)
        M = np.einsum("ij,ji->i", Q.T, np.linalg.solve(X, Q))
        j = int(np.argmax(M))
        step = (M[j] - d - 1) / ((d + 1) * (M[j] - 1))
        if step <= tol:
            break
        u = (1 - step) * u
        u[j] += step
    c = u @ Y
    A = np.linalg.inv((Y - c).T @ (u[:, None] * (Y - c))) / d
    return c, A


def _sqrtm_psd(A):
    lam, V = np.linalg.eigh(A)
    return (V * np.sqrt(np.clip(lam, 0, None))) @ V.T


def _ball_frame(cand):
    """Center and axis vectors mapping the unit ball onto a ball-type state set."""
    fam, p = cand.family
    if fam == "spin":
        c = np.zeros(p + 1)
        c[0] = 1.0
        H = np.eye(p + 1)[1:]
    elif fam == "quantum" and p == 2:
        basis = hermitian_basis(2)
        c = basis.vec(np.eye(2) / 2)
        paulis = [np.array([[0, 1], [1, 0]]), np.array([[1, 0], [0, -1]]), np.array([[0, -1j], [1j, 0]])]
        H = np.array([basis.vec(np.asarray(s, dtype=complex) / 2) for s in paulis])
    else:
        return None
    if cand.state_map is not None:
        c = cand.state_map @ c
        H = H @ cand.state_map.T
    return c, H


def _score(cand, S, E):
    rs = float(np.max(np.atleast_1d(G.state_cone_residual(cand, S)), initial=0.0))
    re = float(np.max(np.atleast_1d(G.effect_residual(cand, E)), initial=0.0))
    return max(rs, re)


def _dual(psi):
    return psi @ np.linalg.inv(psi.T @ psi)


def _balance(fitted, cand, psi):
    """Trade scale between the non-unit parts of states and effects."""
    S, E = fitted.gpt.states, fitted.gpt.effects
    r = psi.shape[1]

    def maps(la):
        D = np.full(r, np.exp(la))
        D[0] = 1.0
        return psi * D

    def f(la):
        ps = maps(la)
        return _score(cand, S @ ps.T, E @ _dual(ps).T)

    res = minimize_scalar(f, bounds=(-0.5, 0.5), method="bounded", options={"xatol": 1e-9})
    la = res.x if f(res.x) < f(0.0) else 0.0
    return maps(la)


def _align_polytope(fitted, cand, max_tuples=20000):
    S = fitted.gpt.states
    r = S.shape[1]
    ext = S[extreme_points(S)]
    base = []
    for v in ext:
        if np.linalg.matrix_rank(np.array(base + [v]), tol=1e-9) == len(base) + 1:
            base.append(v)
        if len(base) == r:
            break
    if len(base) < r:
        raise NoAlignment("fitted states are affinely degenerate")
    base = np.array(base)
    V = cand.states[extreme_points(cand.states)]
    best, best_score = None, np.inf
    for count, tup in enumerate(itertools.permutations(range(len(V)), r)):
        if count >= max_tuples:
            break
        psi = np.linalg.solve(base, V[list(tup)]).T
        if np.linalg.matrix_rank(psi, tol=1e-9) < r:
            continue
        sc = _score(cand, S @ psi.T, fitted.gpt.effects @ _dual(psi).T)
        if sc < best_score - 1e-12:
            best, best_score = psi, sc
    if best is None:
        raise NoAlignment("no vertex correspondence gives a full-rank map")
    # refine: least squares against the nearest candidate vertex for every fitted extreme state
    img = ext @ best.T
    near = V[np.argmin(((img[:, None, :] - V[None]) ** 2).sum(axis=2), axis=1)]
    ls = np.linalg.lstsq(ext, near, rcond=None)[0].T
    if np.linalg.matrix_rank(ls, tol=1e-9) == r and \
            _score(cand, S @ ls.T, fitted.gpt.effects @ _dual(ls).T) < best_score:
        best = ls
    return best


def _align_ball(fitted, cand, frame):
    c_b, H = frame
    Y = fitted.gpt.states[:, 1:]
    k = Y.shape[1]
    if k > len(H):
        raise NoAlignment("fitted dimension exceeds the candidate ball dimension")
    if k == 0:
        return c_b[:, None]
    cy, A = _mvee(Y)
    M = H[:k].T @ _sqrtm_psd(A)
    return np.hstack([(c_b - M @ cy)[:, None], M])


def _align_axes(fitted, cand):
    """Principal-axis alignment against the candidate's generator sample."""
    Y = fitted.gpt.states[:, 1:]
    k = Y.shape[1]
    W = cand.states
    c_b = G.center_state(cand)
    D = W - c_b
    _, sb, Vb = np.linalg.svd(D, full_matrices=False)
    if k > np.sum(sb > 1e-9):
        raise NoAlignment("fitted dimension exceeds the candidate's state-space dimension")
    if k == 0:
        return c_b[:, None]
    cy = Y.mean(axis=0)
    _, sy, Vy = np.linalg.svd(Y - cy, full_matrices=False)
    if np.any(sy[:k] <= 1e-12):
        raise NoAlignment("fitted states are affinely degenerate")
    scale_b = sb[:k] / np.sqrt(len(W))
    scale_y = sy[:k] / np.sqrt(len(Y))
    M = Vb[:k].T @ np.diag(scale_b / scale_y) @ Vy[:k]
    return np.hstack([(c_b - M @ cy)[:, None], M])


def align(fitted, cand):
    """Linear map ``psi`` from the fitted frame into the candidate; returns ``(psi, method)``."""
    r = fitted.rank
    if r > cand.dim:
        raise NoAlignment(f"fitted rank {r} exceeds candidate dimension {cand.dim}")
    frame = None if cand.is_polytopic else _ball_frame(cand)
    if cand.is_polytopic:
        psi, method = _align_polytope(fitted, cand), "vertex-correspondence"
    elif frame is not None:
        psi, method = _align_ball(fitted, cand, frame), "mvee"
    else:
        psi, method = _align_axes(fitted, cand), "principal-axes"
    if np.linalg.matrix_rank(psi, tol=1e-9) < r:
        raise NoAlignment("alignment map is rank deficient")
    return _balance(fitted, cand, psi), method


# ---------------------------------------------------------------- shrinking

@dataclass
class ShrinkResult:
    s: float
    epsilon: float
    embedding: EM.Embedding
    method: str
    report: EM.VerificationReport = None

    def to_dict(self):
        return {"s": self.s, "epsilon": self.epsilon, "alignment": self.method,
                "phi": self.embedding.phi.tolist(), "psi": self.embedding.psi.tolist(),
                "verification": None if self.report is None else self.report.to_dict()}


def shrunk_maps(fitted, cand, psi, s):
    """``psi_s w = (1-s) psi w + s (u'', w) c_B`` and ``phi_s e = (1-s) phi e + s (mu'', e) u_B``."""
    phi = _dual(psi)
    u = fitted.gpt.unit
    mu = fitted.gpt.states.mean(axis=0)
    c_b = G.center_state(cand)
    psi_s = (1 - s) * psi + s * np.outer(c_b, u)
    phi_s = (1 - s) * phi + s * np.outer(cand.unit, mu)
    return phi_s, psi_s


def _fits(fitted, cand, psi, s, tol):
    phi_s, psi_s = shrunk_maps(fitted, cand, psi, s)
    return _score(cand, fitted.gpt.states @ psi_s.T, fitted.gpt.effects @ phi_s.T) <= tol


def shrink_embedding(fitted, cand, psi=None, tol=G.MEMBER_TOL, samples=256, seed=0):
    """Smallest shrink s (to 1e-6) placing every fitted generator inside the candidate."""
    method = "given"
    if psi is None:
        psi, method = align(fitted, cand)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (cand.dim, fitted.rank) or np.linalg.matrix_rank(psi, tol=1e-9) < fitted.rank:
        raise NoAlignment("alignment map is rank deficient or has the wrong shape")
    if _fits(fitted, cand, psi, 0.0, tol):
        s = 0.0
    else:
        lo, hi = 0.0, 1.0
        if not _fits(fitted, cand, psi, 1.0, tol):
            raise NoAlignment("even the fully shrunk maps leave the candidate")
        while hi - lo > SHRINK_TOL:
            mid = 0.5 * (lo + hi)
            if _fits(fitted, cand, psi, mid, tol):
                hi = mid
            else:
                lo = mid
        s = hi
    phi_s, psi_s = shrunk_maps(fitted, cand, psi, s)
    emb = EM.Embedding(fitted.gpt, cand, phi_s, psi_s)
    rep = EM.verify(emb, samples=samples, seed=seed, facts=False)
    return ShrinkResult(float(s), float(rep.epsilon), emb, method, rep)


def epsilon_shrink(fitted, cand, psi=None, **kw):
    """Verified deviation of the shrink embedding of ``fitted`` into ``cand``."""
    return shrink_embedding(fitted, cand, psi, **kw).epsilon


def statistical_halfwidth(t, z=Z_95):
    """Plug-in binomial half-width ``z sqrt(f (1 - f) / N)``, maximized over cells."""
    F = t.freqs
    N = t.totals[:, t.column_meas]
    return float((z * np.sqrt(F * (1 - F) / N)).max())


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineReport:
    fitted: FittedGpt
    epsilon_shrink: float
    candidate: G.Gpt
    verdict: str
    shrink: ShrinkResult = None
    certificate: BL.BoundReport = None
    statistics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {"config": self.config,
                "step1_table": self.statistics.get("table"),
                "step2_fit": self.fitted.to_dict(),
                "step3_shrink": None if self.shrink is None else self.shrink.to_dict(),
                "epsilon_shrink": self.epsilon_shrink,
                "step4_statistics": {k: v for k, v in self.statistics.items() if k != "table"},
                "step5_certificate": None if self.certificate is None else self.certificate.to_dict(),
                "candidate": G.to_dict(self.candidate), "verdict": self.verdict, "notes": self.notes}


def _functional_for(f, fitted, table):
    """Resolve measurement labels of a functional description against the fitted effects."""
    if isinstance(f, BL.BellFunctional):
        return BL.with_measurements(f, fitted.gpt, fitted.gpt)
    cols = np.asarray(fitted.columns)
    desc = dict(f)
    labels = {}
    for side in ("a", "b"):
        lab = desc.pop(f"measurements_{side}", None)
        if lab is not None:
            idx = []
            for name in lab:
                if name not in table.measurements:
                    raise InvalidArgument(f"functional refers to unknown measurement {name!r}")
                idx.append(table.measurements.index(name))
            labels[side] = np.array([fitted.gpt.effects[cols == i] for i in idx])
    func = BL.functional_from_dict(desc)
    if "a" in labels or "b" in labels:
        func = BL.BellFunctional(func.coeffs, labels.get("a", func.effects_a),
                                 labels.get("b", labels.get("a", func.effects_b)), func.tag, func.b_q)
    return BL.with_measurements(func, fitted.gpt, fitted.gpt)


def _stage(step, name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except GptError as exc:
        raise PipelineError(f"step {step} ({name}): {exc}", step=step, stage=name,
                            cause=exc.to_dict()) from exc


def run_pipeline(t, rank, candidate, functional=None, reference="quantum", b_ref=None,
                 seed=0, samples=256):
    """Fit, shrink-embed into ``candidate`` and (optionally) certify nonembeddability."""
    config = {"rank": int(rank), "candidate": candidate.label or candidate.kind, "seed": int(seed),
              "reference": reference, "b_ref": b_ref, "samples": int(samples),
              "functional": functional is not None, "z": Z_95}
    table_info = {"preparations": list(t.preparations), "measurements": list(t.measurements),
                  "normalization_residual": t.normalization_residual()}
    fitted = _stage(2, "fit", fit_gpt, t, rank, seed=seed)
    notes = []
    shrink = None
    eps = None
    try:
        shrink = _stage(3, "shrink", shrink_embedding, fitted, candidate, samples=samples, seed=seed)
        eps = shrink.epsilon
    except PipelineError as exc:
        if exc.details.get("cause", {}).get("error") != NoAlignment.code:
            raise
        notes.append(str(exc))
    stats = {"table": table_info, "halfwidth": statistical_halfwidth(t), "halfwidth_z": Z_95,
             "estimator": "plug-in binomial half-width, max over cells"}
    cert = None
    if functional is not None:
        if fitted.gpt.is_polytopic:
            f = _stage(5, "functional", _functional_for, functional, fitted, t)
            cert = _stage(5, "certificate", BL.embedding_threshold, f, fitted.gpt, reference, b_ref)
        else:
            notes.append("certificate skipped: fitted GPT is not polytopic")
    if cert is not None and eps is not None and cert.threshold > eps:
        verdict = CERTIFIED
    elif cert is not None and eps is None and cert.threshold > 0:
        verdict = INCONCLUSIVE
        notes.append("certificate exists but no shrink epsilon was obtained")
    elif shrink is not None and shrink.s < 1.0:
        verdict = EMBEDDABLE
    else:
        verdict = INCONCLUSIVE
    return PipelineReport(fitted, eps, candidate, verdict, shrink, cert, stats, config, notes)
