"""The rejection-sampling core mapping torus LWE samples to reduced samples.

One input sample (x, y) with y = mod_1(<x, s> + z) either dies in one of
two rejection steps or is reshaped into x' whose projection onto the
hidden direction carries a discrete-Gaussian island structure determined
by the recovered offset k, while the orthogonal part stays a plain
Gaussian.  On null inputs (y independent of x) the same machinery outputs
a plain standard Gaussian vector, which is what makes the construction a
distribution-matching reduction rather than a heuristic.

Steps, for parameters (t, eps, psi, B) with B inside [psi, psi+eps]:

1. invert y -> k = y(t-psi)/(1-y); reject unless k is in B,
2. keep with probability t^2/(t+k-psi)^2,
3. emit x' = w/sigma_scale, where w is a lattice Gaussian draw on
   Z^n + (x + x_add), with k-dependent scales chosen so the signal ratio
   SR = 1 - 4(t+eps)^2 sigma^2 is the same for every accepted sample.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .gaussians import (
    DEFAULT_TRUNCATION,
    mod_1,
    sample_continuous,
    sample_lattice_rows,
)
from .intervals import IntervalSet

# "sufficiently large even integer": the smallest ratio we accept as such
# in strict mode; below it the carving geometry degenerates
MIN_STRICT_RATIO = 4


@dataclass(frozen=True)
class ReductionParams:
    """Inputs of the rejection core plus the validation-mode switch.

    c, c_prime, c_dprime are the universal constants of the parameter
    condition's clauses (iii) and (iv); they only matter for strict-mode
    validation and for carving widths (c_prime).  mode "strict" enforces
    the asymptotic parameter condition; "desk-scale" permits small-n runs
    and enforces only what Step 3 needs to be well defined.
    """

    n: int
    t: float
    eps: float
    psi: float
    B: IntervalSet
    delta: float
    sigma: float
    mode: str = "desk-scale"
    c: float = 2.0
    c_prime: float = 0.04
    c_dprime: float = 4.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        for name in ("t", "eps", "sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError("%s must be finite and positive" % name)
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 <= self.psi < self.t:
            raise ValueError("psi must lie in [0, t)")
        if self.psi + self.eps > self.t + 1e-12:
            raise ValueError("psi + eps must not exceed t")
        if not isinstance(self.B, IntervalSet):
            raise ValueError("B must be an IntervalSet")
        if not self.B.issubset(IntervalSet.single(self.psi, self.psi + self.eps), tol=1e-12):
            raise ValueError("B must be contained in [psi, psi+eps)")
        if self.B.measure <= 0:
            raise ValueError("B must have positive measure")
        if self.mode not in ("strict", "desk-scale"):
            raise ValueError("mode must be 'strict' or 'desk-scale'")
        # Step 3 must be well defined in every mode
        sr = self.signal_ratio
        if sr < 0.5:
            raise ValueError(
                "signal ratio %.4f < 1/2: (t+eps)*sigma = %.4f is too large for Step 3"
                % (sr, (self.t + self.eps) * self.sigma)
            )
        worst = _sigma_add_radicand(self.psi + self.eps, self)
        if worst < 0:
            raise ValueError("sigma_add radicand negative at k = psi+eps (infeasible scales)")
        if self.mode == "strict":
            report = validate_condition(self)
            bad = [c for c in report["clauses"] if c["ok"] is False]
            if bad:
                raise ValueError(
                    "strict mode: parameter condition violated: "
                    + "; ".join(c["clause"] + " " + c["detail"] for c in bad)
                )

    @property
    def signal_ratio(self):
        return 1.0 - 4.0 * ((self.t + self.eps) * self.sigma) ** 2

    @property
    def ratio(self):
        """t/eps, the island count scale."""
        return self.t / self.eps


@dataclass(frozen=True)
class DerivedScales:
    """Step-3 scales at a given recovered offset k."""

    sr: float
    sigma_scale: float
    sigma_add: float
    sigma_signal: float
    sigma_noise: float
    k: float


def validate_condition(params, m_prime=None):
    """Report on the four parameter-condition clauses.

    Clause (iv) needs the output sample count m'; when it is not supplied
    the clause is reported unevaluated (ok None).  Strict-mode construction
    of ReductionParams enforces clauses (i)-(iii); clause (iv) is enforced
    where m' first exists, at MassartConfig construction.
    """
    t, eps, n, sigma, delta = params.t, params.eps, params.n, params.sigma, params.delta
    clauses = []

    ratio = t / eps
    ratio_int = round(ratio)
    is_int = abs(ratio - ratio_int) <= 1e-9 * max(ratio, 1.0)
    ok = is_int and ratio_int % 2 == 0 and ratio_int >= MIN_STRICT_RATIO
    clauses.append(
        {
            "clause": "(i) t/eps large even integer",
            "ok": ok,
            "detail": "t/eps = %.6g" % ratio,
        }
    )

    clauses.append(
        {
            "clause": "(ii) sigma <= sqrt(n)",
            "ok": sigma <= math.sqrt(n),
            "detail": "sigma = %.6g, sqrt(n) = %.6g" % (sigma, math.sqrt(n)),
        }
    )

    lhs = 1.0 / (t * math.sqrt(n))
    rhs = math.sqrt(params.c * math.log(n / delta)) if n / delta > 1 else 0.0
    clauses.append(
        {
            "clause": "(iii) 1/(t sqrt(n)) >= sqrt(c log(n/delta))",
            "ok": lhs >= rhs,
            "detail": "lhs = %.6g, rhs = %.6g" % (lhs, rhs),
        }
    )

    if m_prime is None:
        clauses.append(
            {
                "clause": "(iv) (c'eps/(c''t sigma))^2 >= log(m'/delta)",
                "ok": None,
                "detail": "not evaluated (needs m')",
            }
        )
    else:
        lhs4 = (params.c_prime * eps / (params.c_dprime * t * sigma)) ** 2
        rhs4 = math.log(m_prime / delta)
        clauses.append(
            {
                "clause": "(iv) (c'eps/(c''t sigma))^2 >= log(m'/delta)",
                "ok": lhs4 >= rhs4,
                "detail": "lhs = %.6g, rhs = %.6g" % (lhs4, rhs4),
            }
        )

    evaluated = [c["ok"] for c in clauses if c["ok"] is not None]
    return {"mode": params.mode, "ok": all(evaluated), "clauses": clauses}


def invert_y(y, t, psi):
    """The unique k solving y = k/(t+k-psi), namely k = y(t-psi)/(1-y).

    Strictly increasing in y, so Step 1's membership test "y is in the
    image of B" is exactly "invert_y(y) is in B".  Accepts arrays.
    """
    y = np.asarray(y, dtype=float)
    if np.any((y < 0.0) | (y >= 1.0)):
        raise ValueError("y must lie in [0, 1)")
    k = y * (t - psi) / (1.0 - y)
    return float(k) if k.ndim == 0 else k


def keep_probability(k, params):
    """Step-2 keep probability t^2/(t+k-psi)^2; accepts arrays."""
    k = np.asarray(k, dtype=float)
    p = (params.t / (params.t + k - params.psi)) ** 2
    return float(p) if p.ndim == 0 else p


def derived_scales(k, params):
    """Step-3 scales at offset k (k anywhere in the closed [psi, psi+eps])."""
    if not params.psi - 1e-12 <= k <= params.psi + params.eps + 1e-12:
        raise ValueError("k outside [psi, psi+eps]")
    sr = params.signal_ratio
    sigma_scale = sr / ((params.t + k - params.psi) * math.sqrt(params.n))
    rad = _sigma_add_radicand(k, params)
    if rad < 0:
        raise ValueError("negative sigma_add radicand at k = %g" % k)
    return DerivedScales(
        sr=sr,
        sigma_scale=sigma_scale,
        sigma_add=math.sqrt(rad),
        sigma_signal=math.sqrt(sr),
        sigma_noise=math.sqrt(1.0 - sr),
        k=float(k),
    )


def _sigma_add_radicand(k, params):
    sr = params.signal_ratio
    sigma_scale = sr / ((params.t + k - params.psi) * math.sqrt(params.n))
    return ((1.0 - sr) * sigma_scale**2 - sr * (params.sigma**2 / params.n)) / sr


def reject_sample(sample, params, rng=None, trunc=DEFAULT_TRUNCATION):
    """Run Steps 1-3 on one torus sample (x, y); None means rejected."""
    x, y = sample
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng() if rng is None else rng
    k = invert_y(float(y), params.t, params.psi)
    if not params.B.contains(k):
        return None
    if rng.uniform() >= keep_probability(k, params):
        return None
    sc = derived_scales(k, params)
    if sc.sigma_add > 0.0:
        x_add = sample_continuous(params.n, sc.sigma_add, rng=rng)
    else:
        x_add = np.zeros(params.n)
    shift = mod_1(x + x_add)
    w = sample_lattice_rows(shift, sc.sigma_scale, trunc, rng)
    return w / sc.sigma_scale


@dataclass(frozen=True)
class ReductionResult:
    """Vectorized rejection output over a batch.

    x_prime rows follow the input stream order; indices maps each row back
    to its source sample; consumed is how far the stream was read (equal to
    m unless max_accepts cut the scan short).
    """

    x_prime: np.ndarray
    k: np.ndarray
    indices: np.ndarray
    consumed: int
    n_in: int

    @property
    def n_accepted(self):
        return len(self.indices)

    @property
    def acceptance_rate(self):
        return self.n_accepted / self.consumed if self.consumed else 0.0


def reduce_batch(batch, params, rng=None, max_accepts=None, want_outputs=True,
                 trunc=DEFAULT_TRUNCATION):
    """Vectorized Steps 1-3 over a unit-torus batch.

    Decisions for every stream position are drawn positionally (one keep
    uniform per sample, accepted or not), so the accept/reject pattern for
    a given seed does not depend on max_accepts.  want_outputs=False skips
    the Step-3 sampling, which never affects acceptance.
    """
    if batch.domain != "unit_torus":
        raise ValueError("reduce_batch expects a unit-torus batch")
    if batch.n != params.n:
        raise ValueError("batch dimension %d != params.n %d" % (batch.n, params.n))
    rng = np.random.default_rng() if rng is None else rng
    k_all = invert_y(batch.y, params.t, params.psi)
    accept = params.B.contains(k_all)
    u = rng.uniform(size=batch.m)
    accept &= u < keep_probability(k_all, params)
    idx = np.flatnonzero(accept)
    consumed = batch.m
    if max_accepts is not None and len(idx) > max_accepts:
        idx = idx[:max_accepts]
        consumed = int(idx[-1]) + 1
    k_acc = k_all[idx]
    if not want_outputs:
        return ReductionResult(
            x_prime=np.empty((0, params.n)),
            k=k_acc,
            indices=idx,
            consumed=consumed,
            n_in=batch.m,
        )
    x_prime = transform_accepted(batch.x[idx], k_acc, params, rng, trunc)
    return ReductionResult(x_prime=x_prime, k=k_acc, indices=idx, consumed=consumed, n_in=batch.m)


def transform_accepted(x, k, params, rng, trunc=DEFAULT_TRUNCATION):
    """Step 3 applied to already-accepted samples with per-sample offsets k.

    Used directly by the instance builder, which runs its own accept walk
    over a shared sample stream before transforming each label group.
    """
    m, n = x.shape
    if m == 0:
        return np.empty((0, n))
    sr = params.signal_ratio
    sigma_scale = sr / ((params.t + k - params.psi) * math.sqrt(n))
    rad = ((1.0 - sr) * sigma_scale**2 - sr * (params.sigma**2 / n)) / sr
    if np.any(rad < -1e-15):
        raise ValueError("negative sigma_add radicand in batch")
    sigma_add = np.sqrt(np.maximum(rad, 0.0))
    x_add = rng.normal(size=(m, n)) * (sigma_add / math.sqrt(2.0 * math.pi))[:, None]
    shift = mod_1(x + x_add)
    sig_rows = np.repeat(sigma_scale, n)
    w = sample_lattice_rows(shift.ravel(), sig_rows, trunc, rng).reshape(m, n)
    return w / sigma_scale[:, None]


def acceptance_probability(params):
    """(lower_bound, exact) overall acceptance probability of Steps 1-2.

    The recovered k of a uniform y has density (t-psi)/(t+k-psi)^2 (the
    inverse-map Jacobian), so the exact acceptance is the quadrature
        integral over B of (t-psi)/(t+k-psi)^2 * t^2/(t+k-psi)^2 dk,
    and the quick lower bound replaces both factors by their minima over
    [psi, psi+eps]: lambda(B) * (t-psi)/(t+eps)^2 * t^2/(t+eps)^2.
    """
    t, psi, eps = params.t, params.psi, params.eps

    def integrand(k):
        return (t - psi) * t**2 / (t + k - psi) ** 4

    exact = 0.0
    for a, b in params.B:
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-12, epsrel=1e-10)
        exact += val
    lower = params.B.measure * (t - psi) * t**2 / (t + eps) ** 4
    return lower, exact


def accepted_k_pdf(k, params, normalized=True):
    """Density of the recovered offset among accepted samples.

    Proportional to (t-psi)*t^2/(t+k-psi)^4 restricted to B.  The paper's
    analysis idealizes this as uniform on B, which it approaches only as
    eps/t -> 0; this is the exact law.  Accepts arrays.
    """
    k = np.asarray(k, dtype=float)
    t, psi = params.t, params.psi
    val = (t - psi) * t**2 / (t + k - psi) ** 4
    val = np.where(params.B.contains(k), val, 0.0)
    if normalized:
        _, total = acceptance_probability(params)
        val = val / total
    return float(val) if val.ndim == 0 else val


def b_plus(eps):
    """The +1-branch offset window [0, eps)."""
    return IntervalSet.single(0.0, eps)


def params_for_branch(params, psi, B):
    """Copy params with a different (psi, B) branch."""
    return replace(params, psi=psi, B=B)
