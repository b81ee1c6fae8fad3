"""Labeled learning instances from a torus sample stream.

Each labeled sample is produced by the rejection core under one of two
branch parameter sets: with probability 1 - eta the label is +1 and the
branch is (psi = 0, B = [0, eps)); otherwise the label is -1 and the
branch is (psi = t/2, B = B_minus), where B_minus is [t/2, t/2 + eps)
with a family of slots carved out.

The carving exists because the +1 projection law has geometrically
spaced support translates whose decaying copies would otherwise land in
the middle of the -1 support and break the bounded-flip-noise property.
The map g below sends an ambient location to the spot in the base
interval from which the -1 branch would populate it, so removing
g-images of the +1 danger zones keeps the two supports apart.

The builder consumes one stream position at a time (the FAIL contract
depends on consumption order), but acceptance and the lattice transform
are vectorized.
"""

import hashlib
import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement
from typing import NamedTuple, Optional

import numpy as np

from .gaussians import DEFAULT_TRUNCATION
from .intervals import IntervalSet, merge_pairs, subtract_pairs
from .rejection import (
    ReductionParams,
    b_plus,
    invert_y,
    keep_probability,
    params_for_branch,
    transform_accepted,
    validate_condition,
)

LABELED_MAGIC = b"MLAB"
LABELED_VERSION = 1

# Monomial count above which veronese_lift refuses to materialize the
# lifted matrix.  Asymptotic parameter choices blow past any reasonable
# memory budget; the error is the honest outcome there.
DEFAULT_LIFT_CAP = 200_000


# --------------------------------------------------------------------- g map


def _band_index(u, t):
    return math.floor((u - t / 2) / t)


def g_map(u, t):
    """Slot position in [t/2, t) targeted by ambient location u.

    Decomposes u = i*t + t/2 + b with b in [0, t) and applies
        b/(i+1) + t/2        if i >= 0,
        (b-t)/(i+2) + t/2    if i < 0.
    The band i in {-1, -2} (u in [-1.5t, 0.5t)) is outside the domain:
    i = -2 puts a zero divisor in the second branch and i = -1 is the
    base cell itself.  Accepts scalars or arrays.
    """
    u = np.asarray(u, dtype=float)
    if t <= 0:
        raise ValueError("t must be positive")
    i = np.floor((u - t / 2.0) / t)
    if np.any((i == -1) | (i == -2)):
        raise ValueError(f"u in the excluded band [{-1.5 * t}, {0.5 * t})")
    b = u - i * t - t / 2.0
    out = np.where(i >= 0, b / (i + 1.0) + t / 2.0, (b - t) / (i + 2.0) + t / 2.0)
    return float(out) if out.ndim == 0 else out


def _g_image_exact(lo, hi, t):
    """Exact image pairs of [lo, hi] under g, split at band boundaries.

    Endpoints are Fractions; the image on a band with negative slope
    (i < -2) comes out endpoint-reversed and is normalized here.  Pieces
    falling in the excluded band are skipped: nothing can be populated
    from there, so there is nothing to carve.
    """
    if hi <= lo:
        return []
    half = t / 2
    pieces = []
    a = lo
    while a < hi:
        i = (a - half) // t  # Fraction floor division -> integer band index
        band_end = (i + 1) * t + half
        b = min(hi, band_end)
        if i not in (-1, -2):
            if i >= 0:
                ga = a - i * t - half
                gb = b - i * t - half
                va = ga / (i + 1) + half
                vb = gb / (i + 1) + half
            else:
                va = (a - i * t - half - t) / (i + 2) + half
                vb = (b - i * t - half - t) / (i + 2) + half
            if va > vb:
                va, vb = vb, va
            if vb > va:
                pieces.append((va, vb))
        a = b
    return pieces


def build_b_minus(t, eps, c_prime):
    """The -1 branch acceptance set: [t/2, t/2+eps) minus carved slots.

    Four slot families are removed, the g-images of
        [it - 2c'eps, it]                       i in [t/2eps - 1, t/eps - 1]
        [it + (i+1)eps, it + (i+1)eps + 2c'eps] same i range
        [it + (i+1)eps - 2c'eps, it + (i+1)eps] i in [-t/eps - 1, -t/2eps - 1]
        [it, it + 2c'eps]                       same i range
    Fractional range endpoints are widened to the enclosing integer range
    (carving a superset is the conservative direction).  All endpoint
    arithmetic is exact: float inputs are exact rationals, and carving in
    Fraction space avoids any dependence on subtraction order.

    Raises if the result is empty or its measure drops below
    eps*(1 - 16c'), the guaranteed floor.
    """
    if t <= 0 or eps <= 0 or c_prime < 0:
        raise ValueError("t, eps must be positive and c_prime nonnegative")
    if 16 * c_prime >= 1:
        raise ValueError("c_prime must satisfy 16*c_prime < 1")
    ft, fe, fc = Fraction(t), Fraction(eps), Fraction(c_prime)
    ratio = ft / fe
    w = 2 * fc * fe
    pos = range(math.floor(ratio / 2 - 1), math.ceil(ratio - 1) + 1)
    neg = range(math.floor(-ratio - 1), math.ceil(-ratio / 2 - 1) + 1)
    cuts = []
    for i in pos:
        cuts += _g_image_exact(i * ft - w, i * ft, ft)
        cuts += _g_image_exact(i * ft + (i + 1) * fe, i * ft + (i + 1) * fe + w, ft)
    for i in neg:
        cuts += _g_image_exact(i * ft + (i + 1) * fe - w, i * ft + (i + 1) * fe, ft)
        cuts += _g_image_exact(i * ft, i * ft + w, ft)
    base = [(ft / 2, ft / 2 + fe)]
    remaining = subtract_pairs(base, merge_pairs(cuts))
    measure = sum(b - a for a, b in remaining)
    floor_measure = fe * (1 - 16 * fc)
    if not remaining or measure < floor_measure:
        raise ValueError(
            f"carving left measure {float(measure)} < floor {float(floor_measure)}; "
            "reduce c_prime or increase t/eps"
        )
    pairs = [(float(a), float(b)) for a, b in remaining]
    return IntervalSet(tuple((a, b) for a, b in pairs if a < b))


# --------------------------------------------------------------- PTF region


def region_plus_intervals(t, eps, c_prime):
    """The +1 decision region of the threshold polynomial, as intervals.

    Central structure: [it - c'eps, it + (i+1)eps + c'eps] for i >= 0 and
    [it + (i+1)eps - c'eps, it + c'eps] for i <= -2, plus the degenerate
    i = -1 island around -t that covers the +1 projection atom.  Built
    out to |i+1| slightly past t/eps, where consecutive intervals merge
    and the region becomes two contiguous far rays.
    """
    if t <= 0 or eps <= 0 or c_prime < 0:
        raise ValueError("t, eps must be positive and c_prime nonnegative")
    reach = math.ceil(t / eps) + 2
    m = c_prime * eps
    pairs = [(i * t - m, i * t + (i + 1) * eps + m) for i in range(0, reach + 1)]
    pairs += [(i * t + (i + 1) * eps - m, i * t + m) for i in range(-reach - 2, -1)]
    if c_prime > 0:
        pairs.append((-t - m, -t + m))
    return IntervalSet(tuple(merge_pairs(pairs)))


def ptf_region(u, t, eps, c_prime):
    """Sign of the threshold polynomial at projection value u (+1/-1).

    Inside the built horizon membership in the interval union decides;
    beyond it the +1 intervals overlap into a cover of the whole line,
    so anything past the outermost edge is +1.
    """
    region = region_plus_intervals(t, eps, c_prime)
    u = np.asarray(u, dtype=float)
    plus = region.contains(u) | (u < region.lo) | (u >= region.hi)
    out = np.where(plus, 1, -1).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def region_aligned_edges(t, eps, c_prime, window, max_width=None):
    """Bin edges inside window aligned to the +1/-1 region boundaries.

    Every resulting bin lies entirely in one region, so a per-bin label
    mix estimates the actual flip rate instead of boundary mixing.
    Segments wider than max_width are subdivided evenly.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must be nonempty")
    cuts = {lo, hi}
    for a, b in region_plus_intervals(t, eps, c_prime):
        for e in (a, b):
            if lo < e < hi:
                cuts.add(e)
    edges = sorted(cuts)
    if max_width is None:
        return np.asarray(edges)
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        parts = max(1, math.ceil((b - a) / max_width))
        out.extend(a + (b - a) * j / parts for j in range(1, parts + 1))
    return np.asarray(out)


# ------------------------------------------------------------ Veronese lift


def veronese_lift(x, d, max_dim=DEFAULT_LIFT_CAP):
    """All monomials of total degree <= d, graded-lex, constant first.

    Output width is C(n+d, d).  Within each degree the monomial index
    tuples are nondecreasing (combinations with replacement in index
    order), so for n=2, d=2 the columns are 1, a, b, a^2, ab, b^2.  The
    original coordinates occupy columns 1..n, which lets consumers of a
    lifted matrix recover the ambient points.
    """
    if d < 1:
        raise ValueError("lift degree must be >= 1")
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    m, n = arr.shape
    width = math.comb(n + d, d)
    if width > max_dim:
        raise ValueError(
            f"lifted width C({n}+{d},{d}) = {width} exceeds cap {max_dim}"
        )
    cols = [np.ones(m)]
    for k in range(1, d + 1):
        for combo in combinations_with_replacement(range(n), k):
            cols.append(arr[:, combo].prod(axis=1))
    out = np.column_stack(cols)
    return out[0] if single else out


# ------------------------------------------------------------- the builder


class LabeledSample(NamedTuple):
    x: np.ndarray
    y: int


@dataclass(frozen=True)
class MassartConfig:
    """Inputs of the labeled-instance builder.

    params must be the +1 branch (psi = 0, B = [0, eps)); the -1 branch
    is derived here.  eta is the -1 mixing weight, c_prime the carving
    constant, m_prime the number of labeled samples, d the lift degree
    kept for bookkeeping (the builder itself emits ambient vectors).
    """

    params: ReductionParams
    eta: float
    c_prime: float
    m_prime: int
    d: int = 1

    def __post_init__(self):
        p = self.params
        if not 0.0 <= self.eta < 0.5:
            raise ValueError("eta must lie in [0, 1/2)")
        if self.m_prime < 1:
            raise ValueError("m_prime must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if p.psi != 0.0:
            raise ValueError("base params must use psi = 0")
        ref = b_plus(p.eps)
        if len(p.B) != 1 or not p.B.issubset(ref) or not ref.issubset(p.B):
            raise ValueError("base params must use B = [0, eps)")
        self.b_minus  # builds and validates the carving
        if p.mode == "strict":
            report = validate_condition(p, self.m_prime)
            bad = [c["clause"] for c in report["clauses"] if c["ok"] is False]
            if bad:
                raise ValueError(f"strict mode: failed clauses {bad}")

    @cached_property
    def b_minus(self):
        return build_b_minus(self.params.t, self.params.eps, self.c_prime)

    @property
    def params_plus(self):
        return self.params

    @property
    def params_minus(self):
        return params_for_branch(self.params, self.params.t / 2.0, self.b_minus)


@dataclass(frozen=True)
class InstanceResult:
    """Outcome of a builder run.  FAIL is a value, not an exception."""

    ok: bool
    x: Optional[np.ndarray]
    labels: Optional[np.ndarray]
    consumed: int
    draws: int

    def samples(self):
        if not self.ok:
            raise ValueError("FAIL outcome has no samples")
        return [LabeledSample(xi, int(yi)) for xi, yi in zip(self.x, self.labels)]


def generate_instance(batch, config, rng=None, trunc=DEFAULT_TRUNCATION):
    """Emit m' labeled samples from a torus batch, or FAIL if it runs dry.

    Per draw: label -1 with probability eta (branch psi = t/2, B_minus),
    else +1 (psi = 0, B_plus); stream positions are consumed in order
    until the branch accepts.  A position rejected by one draw is spent
    and never revisited.  If a draw needs a position past the end of the
    batch the result is FAIL with the full batch consumed.

    Randomness order is fixed (labels, per-position keep uniforms, +1
    group transform, -1 group transform) so one seed reproduces the
    instance bit for bit.
    """
    rng = np.random.default_rng() if rng is None else rng
    p_plus = config.params_plus
    p_minus = config.params_minus
    if batch.domain != "unit_torus":
        raise ValueError("instance builder needs a unit_torus batch")
    if not math.isclose(batch.sigma, p_plus.sigma, rel_tol=1e-9):
        raise ValueError(
            f"batch sigma {batch.sigma} does not match params sigma {p_plus.sigma}"
        )
    if batch.n != p_plus.n:
        raise ValueError("batch dimension does not match params")

    m_prime = config.m_prime
    labels = np.where(rng.random(m_prime) < config.eta, -1, 1).astype(np.int8)
    u_keep = rng.random(batch.m)

    k_plus = invert_y(batch.y, p_plus.t, p_plus.psi)
    k_minus = invert_y(batch.y, p_minus.t, p_minus.psi)
    ok_plus = p_plus.B.contains(k_plus) & (u_keep < keep_probability(k_plus, p_plus))
    ok_minus = p_minus.B.contains(k_minus) & (
        u_keep < keep_probability(k_minus, p_minus)
    )
    idx_plus = np.flatnonzero(ok_plus).tolist()
    idx_minus = np.flatnonzero(ok_minus).tolist()

    hits = np.empty(m_prime, dtype=np.int64)
    pos = 0
    for r in range(m_prime):
        idx = idx_plus if labels[r] > 0 else idx_minus
        j = bisect_left(idx, pos)
        if j >= len(idx):
            return InstanceResult(
                ok=False, x=None, labels=None, consumed=batch.m, draws=r
            )
        hits[r] = idx[j]
        pos = idx[j] + 1

    x = np.empty((m_prime, batch.n))
    for params, k_all, sign in ((p_plus, k_plus, 1), (p_minus, k_minus, -1)):
        rows = np.flatnonzero(labels == sign)
        if rows.size == 0:
            continue
        take = hits[rows]
        x[rows] = transform_accepted(batch.x[take], k_all[take], params, rng, trunc)
    return InstanceResult(
        ok=True, x=x, labels=labels, consumed=int(pos), draws=m_prime
    )


# ---------------------------------------------------------------- file I/O


def _record_dtype(width):
    return np.dtype([("x", "<f8", (width,)), ("label", "i1")])


def secret_digest(secret):
    return hashlib.sha256(np.asarray(secret, dtype="<f8").tobytes()).hexdigest()


def write_labeled_file(path, x, labels, d=1, lifted=False, sidecar=None):
    """Binary labeled-sample file plus optional JSON sidecar.

    Layout: magic, little-endian u32 header length, JSON header
    {magic, version, n, m_prime, d, lifted}, then m_prime packed records
    of n little-endian f8 followed by one signed label byte.
    """
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    if x.ndim != 2 or labels.shape != (x.shape[0],):
        raise ValueError("x must be (m, n) with matching labels")
    if not np.all(np.abs(labels) == 1):
        raise ValueError("labels must be +1/-1")
    m, width = x.shape
    header = {
        "magic": LABELED_MAGIC.decode(),
        "version": LABELED_VERSION,
        "n": width,
        "m_prime": m,
        "d": int(d),
        "lifted": bool(lifted),
    }
    head = json.dumps(header, sort_keys=True).encode()
    rec = np.zeros(m, dtype=_record_dtype(width))
    rec["x"] = x
    rec["label"] = labels.astype(np.int8)
    blob = LABELED_MAGIC + np.uint32(len(head)).tobytes() + head + rec.tobytes()
    with open(path, "wb") as fh:
        fh.write(blob)
    if sidecar is not None:
        write_sidecar(path, sidecar)


def read_labeled_file(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != LABELED_MAGIC:
        raise ValueError("not a labeled-sample file")
    hlen = int(np.frombuffer(blob[4:8], dtype=np.uint32)[0])
    header = json.loads(blob[8 : 8 + hlen].decode())
    if header.get("version") != LABELED_VERSION:
        raise ValueError(f"unsupported version {header.get('version')}")
    rec = np.frombuffer(blob[8 + hlen :], dtype=_record_dtype(header["n"]))
    if rec.shape[0] != header["m_prime"]:
        raise ValueError("record count does not match header")
    x = rec["x"].astype(float).reshape(header["m_prime"], header["n"])
    labels = rec["label"].astype(np.int8)
    return x, labels, header


def sidecar_path(path):
    return str(path) + ".meta.json"


def write_sidecar(path, meta):
    with open(sidecar_path(path), "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_sidecar(path):
    with open(sidecar_path(path)) as fh:
        return json.load(fh)
