"""Statistical verification of the generated distributions.

The projection of an accepted output onto the planted direction has, per
accepted offset k, a discrete Gaussian law on the one-dimensional lattice
k + (t+k-psi)Z at width sigma_signal.  Mixing over the accepted-offset
law and substituting u = it + psi + (i+1)(k - psi) per translate index i
gives the continuous part

    sum over i != -1 of  f(k*) (t + k* - psi) rho(u) / |i+1|,
    k* = psi + (u - it - psi)/(i+1), restricted to k* in B,

where f is the accepted-offset density.  The i = -1 translate collapses:
k + (t+k-psi)(-1) = psi - t for every k, so the law carries a genuine
point mass at psi - t of size rho(psi - t) * integral of f(k)(t+k-psi).
Oracles here carry that atom explicitly; dropping it is the single
largest modeling error at desk scale (about 0.2 of the total mass).

The additive-noise part of the construction corresponds to convolving
this law with a centered Gaussian of width sigma_noise = 2(t+eps)sigma.

All statistical tests are pure functions over immutable sample buffers;
anything that needs randomness takes an explicit generator.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, signal, stats
from scipy.linalg import null_space

from .gaussians import DEFAULT_TRUNCATION, sample_lattice_rows
from .instances import ptf_region, veronese_lift
from .lwe import gen_continuous_lwe
from .rejection import acceptance_probability, reduce_batch

TWO_PI = 2.0 * math.pi
DEFAULT_LEVEL = 0.01


def _rho1(u, sigma):
    """Normalized one-dimensional Gaussian density of width sigma."""
    u = np.asarray(u, dtype=float)
    return np.exp(-math.pi * (u / sigma) ** 2) / sigma


# ------------------------------------------------------------------ reports


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    threshold: float
    passed: bool
    n_samples: int
    description: str = ""
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def to_dict(self):
        return {
            "test": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "pass": self.passed,
            "n": self.n_samples,
            "seed": self.seed,
            "description": self.description,
            "params": dict(self.params),
        }


def write_reports_json(path, reports):
    with open(path, "w") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_histogram_csv(path, edges, columns):
    """Per-bin CSV dump: lo, hi, then one column per named series."""
    names = list(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lo", "hi"] + names)
        for i in range(len(edges) - 1):
            writer.writerow(
                [repr(float(edges[i])), repr(float(edges[i + 1]))]
                + [repr(float(columns[k][i])) for k in names]
            )


# ------------------------------------------------------------------ oracles


class DensityOracle1D:
    """A one-dimensional density known pointwise plus optional point masses.

    The continuous part is normalized together with the atoms on the
    stated grid at construction; afterwards the grid integral of the pdf
    plus the atom masses is 1 to float precision (asserted).
    """

    def __init__(self, evaluator: Callable, grid, atoms=()):
        lo, hi, step = float(grid[0]), float(grid[1]), float(grid[2])
        if not (lo < hi and step > 0):
            raise ValueError("grid must be (lo, hi, step) with lo < hi, step > 0")
        self.xs = np.arange(lo, hi + step / 2.0, step)
        self.step = step
        raw = np.asarray(evaluator(self.xs), dtype=float)
        if raw.shape != self.xs.shape:
            raise ValueError("evaluator must be vectorized over the grid")
        if np.any(raw < 0) or any(m < 0 for _, m in atoms):
            raise ValueError("density values and atom masses must be nonnegative")
        total = float(np.trapezoid(raw, self.xs)) + sum(m for _, m in atoms)
        if total <= 0:
            raise ValueError("density integrates to zero on the grid")
        self._evaluator = evaluator
        self.normalization = total
        self.atoms = tuple((float(loc), float(m) / total) for loc, m in atoms)
        self._vals = raw / total
        cdf = integrate.cumulative_trapezoid(self._vals, self.xs, initial=0.0)
        self._cdf = cdf
        check = cdf[-1] + sum(m for _, m in self.atoms)
        assert abs(check - 1.0) <= 1e-6

    @property
    def grid(self):
        return (float(self.xs[0]), float(self.xs[-1]), self.step)

    def pdf(self, u):
        """Normalized continuous part (atoms are not smeared into this)."""
        return np.asarray(self._evaluator(u), dtype=float) / self.normalization

    def continuous_mass(self):
        return float(self._cdf[-1])

    def bin_masses(self, edges, lump_tails=True):
        """Probability mass per bin, optionally folding tails and atoms in."""
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be increasing with >= 2 entries")
        at_edges = np.interp(edges, self.xs, self._cdf, left=0.0, right=self._cdf[-1])
        masses = np.diff(at_edges)
        if lump_tails:
            masses[0] += at_edges[0]
            masses[-1] += self._cdf[-1] - at_edges[-1]
        for loc, m in self.atoms:
            j = int(np.searchsorted(edges, loc, side="right")) - 1
            if lump_tails:
                j = min(max(j, 0), len(masses) - 1)
            elif not 0 <= j < len(masses):
                continue
            masses[j] += m
        return masses


def gaussian_oracle(sigma=1.0, window=None, step=None):
    """Oracle for the centered width-sigma Gaussian (the null projection law)."""
    if window is None:
        window = (-4.5 * sigma, 4.5 * sigma)
    if step is None:
        step = sigma / 256.0
    return DensityOracle1D(lambda u: _rho1(u, sigma), (window[0], window[1], step))


def _branch_acceptance(t, psi, B):
    anti = lambda k: -(t - psi) * t**2 / (3.0 * (t + k - psi) ** 3)
    return sum(anti(b) - anti(a) for a, b in B)


def _k_density(k, t, psi, B, k_law):
    if k_law == "uniform":
        return np.full(np.shape(k), 1.0 / B.measure)
    if k_law == "accepted":
        acc = _branch_acceptance(t, psi, B)
        return (t - psi) * t**2 / (t + np.asarray(k) - psi) ** 4 / acc
    raise ValueError("k_law must be 'uniform' or 'accepted'")


def dprime_pdf(u, t, eps, psi, B, sigma_signal, k_law="accepted"):
    """Continuous part of the projected law (the i = -1 atom is separate).

    k_law selects the accepted-offset mixing density: "accepted" is the
    exact law of the rejection core, proportional to (t+k-psi)^-4 on B;
    "uniform" is the idealization used by the reference construction.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape if u.ndim else (1,), dtype=float)
    uu = np.atleast_1d(u)
    w_max = float(np.max(np.abs(uu))) if uu.size else 0.0
    reach = int(math.ceil((w_max + abs(psi) + t) / (t - eps))) + 2
    rho_u = _rho1(uu, sigma_signal)
    for i in range(-reach, reach + 1):
        if i == -1:
            continue
        k_star = psi + (uu - i * t - psi) / (i + 1)
        inside = B.contains(k_star)
        if not np.any(inside):
            continue
        ks = k_star[inside]
        out[inside] += (
            _k_density(ks, t, psi, B, k_law)
            * (t + ks - psi)
            * rho_u[inside]
            / abs(i + 1)
        )
    return float(out[0]) if u.ndim == 0 else out


def dprime_atom_mass(t, eps, psi, B, sigma_signal, k_law="accepted"):
    """Point mass at psi - t: rho(psi - t) times the mean of (t+k-psi)."""
    if k_law == "uniform":
        mean = sum((t + b - psi) ** 2 - (t + a - psi) ** 2 for a, b in B) / (
            2.0 * B.measure
        )
    elif k_law == "accepted":
        acc = _branch_acceptance(t, psi, B)
        mean = (
            (t - psi)
            * t**2
            * sum((t + a - psi) ** -2 - (t + b - psi) ** -2 for a, b in B)
            / (2.0 * acc)
        )
    else:
        raise ValueError("k_law must be 'uniform' or 'accepted'")
    return float(_rho1(psi - t, sigma_signal) * mean)


def dprime_oracle(t, eps, psi, B, sigma_signal, k_law="accepted",
                  window=None, step=None):
    """Raw (unconvolved) oracle for the projected law, atom included."""
    if window is None:
        w = 4.5 * sigma_signal + t + abs(psi)
        window = (-w, w)
    if step is None:
        step = min(min(b - a for a, b in B), eps) / 8.0
    atom = (psi - t, dprime_atom_mass(t, eps, psi, B, sigma_signal, k_law))
    return DensityOracle1D(
        lambda u: dprime_pdf(u, t, eps, psi, B, sigma_signal, k_law),
        (window[0], window[1], step),
        atoms=(atom,),
    )


def convolve_with_gaussian(oracle, sigma_noise):
    """Oracle for (law + independent width-sigma_noise Gaussian noise).

    Numeric convolution of the continuous part on an extended grid, with
    each atom added back as an analytic Gaussian bump.  The input grid
    must already resolve the kernel (step <= sigma_noise / 8).
    """
    if sigma_noise <= 0:
        raise ValueError("sigma_noise must be positive")
    step = oracle.step
    if step > sigma_noise / 8.0:
        raise ValueError(
            f"grid step {step} too coarse for sigma_noise {sigma_noise}; "
            "need step <= sigma_noise/8"
        )
    std = sigma_noise / math.sqrt(TWO_PI)
    r = int(math.ceil(6.0 * std / step))
    lo, hi, _ = oracle.grid
    xs = np.arange(lo - r * step, hi + r * step + step / 2.0, step)
    inside = (xs >= lo - step / 2.0) & (xs <= hi + step / 2.0)
    raw = oracle.pdf(np.clip(xs, lo, hi)) * inside
    kern = np.exp(-math.pi * (np.arange(-r, r + 1) * step / sigma_noise) ** 2)
    kern /= kern.sum()
    conv = signal.fftconvolve(raw, kern, mode="same")
    for loc, m in oracle.atoms:
        bump = np.exp(-math.pi * ((xs - loc) / sigma_noise) ** 2)
        conv = conv + m * bump / (bump.sum() * step)
    conv = np.maximum(conv, 0.0)
    # discrete-normalized kernel and bumps keep the Riemann mass exact up
    # to kernel truncation and edge spill, both far below this guard
    drift = abs(float(conv.sum() - raw.sum()) * step - sum(m for _, m in oracle.atoms))
    if drift > 1e-6:
        raise ValueError(f"convolution mass drift {drift}; widen the grid")
    interp = lambda u: np.interp(np.asarray(u, dtype=float), xs, conv, left=0.0, right=0.0)
    return DensityOracle1D(interp, (xs[0], xs[-1], step))


# -------------------------------------------------------- projection tests


def _unit(s):
    s = np.asarray(s, dtype=float)
    return s / np.linalg.norm(s)


def atom_safe_edges(lo, hi, bins, atom_locs, guard=None):
    """Uniform bin edges with edges too close to a point mass removed.

    A point mass on (or within blur reach of) an edge makes the sample
    histogram split what the model books wholly on one side.  Dropping
    the offending edge merges the two bins so the mass stays together.
    The outermost edges are kept regardless.
    """
    edges = np.linspace(lo, hi, bins + 1)
    locs = np.asarray(atom_locs, dtype=float)
    if locs.size == 0:
        return edges
    if guard is None:
        guard = (hi - lo) / bins / 4.0
    near = np.min(np.abs(edges[:, None] - locs[None, :]), axis=1) < guard
    near[0] = near[-1] = False
    return edges[~near]


def hidden_direction_test(samples, s, oracle, bins=64, window=None, tol_l1=0.05):
    """L1 distance between projected-sample histogram and the oracle.

    bins is a count (uniform over the window) or an explicit edge array.
    Tail mass on both sides is folded into the edge bins so the compared
    vectors each sum to one.
    """
    proj = np.asarray(samples, dtype=float) @ _unit(s)
    if np.ndim(bins) == 1:
        edges = np.asarray(bins, dtype=float)
    else:
        if window is None:
            lo, hi, _ = oracle.grid
            window = (lo, hi)
        edges = np.linspace(window[0], window[1], bins + 1)
    n_bins = len(edges) - 1
    counts, _ = np.histogram(proj, bins=edges)
    emp = counts.astype(float)
    emp[0] += np.sum(proj < edges[0])
    emp[-1] += np.sum(proj >= edges[-1])
    emp /= len(proj)
    model = oracle.bin_masses(edges, lump_tails=True)
    l1 = float(np.abs(emp - model).sum())
    note = "" if len(proj) >= 20 * n_bins else "underpowered: fewer than 20 samples/bin; "
    return TestReport(
        name="hidden-direction-l1",
        statistic=l1,
        threshold=tol_l1,
        passed=l1 <= tol_l1,
        n_samples=len(proj),
        description=note + f"{n_bins} bins on [{edges[0]:.4g}, {edges[-1]:.4g}]",
        params={"bins": n_bins, "window": [float(edges[0]), float(edges[-1])]},
    )


def orthogonal_gaussianity_test(samples, s, level=DEFAULT_LEVEL):
    """KS tests orthogonal to s: marginals plus quartile-conditioned slices.

    Every coordinate of an orthonormal basis of the complement is tested
    against the width-1 Gaussian, marginally and conditioned on quartiles
    of the projection onto s, with a Bonferroni-corrected level.
    """
    x = np.asarray(samples, dtype=float)
    n = x.shape[1]
    if n == 1:
        return TestReport(
            name="orthogonal-gaussianity", statistic=1.0, threshold=level,
            passed=True, n_samples=len(x), description="n=1: no complement, vacuous",
        )
    u = _unit(s)
    basis = null_space(u[None, :])
    coords = x @ basis
    proj = x @ u
    quartiles = np.quantile(proj, [0.25, 0.5, 0.75])
    groups = np.digitize(proj, quartiles)
    std = 1.0 / math.sqrt(TWO_PI)
    pvals = []
    for j in range(coords.shape[1]):
        pvals.append(stats.kstest(coords[:, j], "norm", args=(0.0, std)).pvalue)
        for g in range(4):
            sel = coords[groups == g, j]
            if len(sel) >= 25:
                pvals.append(stats.kstest(sel, "norm", args=(0.0, std)).pvalue)
    alpha = level / len(pvals)
    min_p = float(min(pvals))
    return TestReport(
        name="orthogonal-gaussianity",
        statistic=min_p,
        threshold=alpha,
        passed=min_p > alpha,
        n_samples=len(x),
        description=f"{len(pvals)} KS tests (marginal + quartile-conditioned)",
        params={"level": level, "tests": len(pvals)},
    )


def isotropic_gaussianity_test(samples, level=DEFAULT_LEVEL):
    """Per-coordinate KS against the width-1 Gaussian (null output law)."""
    x = np.asarray(samples, dtype=float)
    std = 1.0 / math.sqrt(TWO_PI)
    pvals = [
        stats.kstest(x[:, j], "norm", args=(0.0, std)).pvalue
        for j in range(x.shape[1])
    ]
    alpha = level / len(pvals)
    min_p = float(min(pvals))
    return TestReport(
        name="isotropic-gaussianity",
        statistic=min_p,
        threshold=alpha,
        passed=min_p > alpha,
        n_samples=len(x),
        description=f"{len(pvals)} per-coordinate KS tests",
        params={"level": level, "tests": len(pvals)},
    )


# ------------------------------------------------------- label-noise tests


@dataclass(frozen=True)
class MassartEstimate:
    """Per-bin label mix along the planted direction.

    bins holds (lo, hi, count_plus, count_minus, eta_hat) for every bin
    with at least one sample; violating_mass is the fraction of in-window
    mass sitting in bins (with >= min_count samples) whose minority-label
    rate exceeds the threshold.
    """

    bins: tuple
    violating_mass: float
    threshold: float
    min_count: int
    n_samples: int


def massart_condition_estimate(samples, labels, s, bins, eta,
                               threshold_mult=2.0, min_count=50, window=None,
                               target=None):
    """Per-bin flip-rate audit of the label noise along direction s.

    Without a target the flip rate of a bin is its minority-label rate,
    which certifies the Massart condition for whatever sign pattern the
    majorities define.  Passing target (a sign function of the projection,
    evaluated at bin midpoints) pins the rate to that specific classifier;
    this is the stronger audit and is not fooled by a global label flip.
    """
    proj = np.asarray(samples, dtype=float) @ _unit(s)
    labels = np.asarray(labels)
    if isinstance(bins, int):
        if window is None:
            window = (float(proj.min()), float(proj.max()) + 1e-12)
        edges = np.linspace(window[0], window[1], bins + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    plus, _ = np.histogram(proj[labels > 0], bins=edges)
    minus, _ = np.histogram(proj[labels < 0], bins=edges)
    total = plus + minus
    thresh = threshold_mult * eta
    rows = []
    violating = 0
    for j in range(len(total)):
        if total[j] == 0:
            continue
        if target is None:
            wrong = min(plus[j], minus[j])
        else:
            sign = target((edges[j] + edges[j + 1]) / 2.0)
            wrong = minus[j] if sign > 0 else plus[j]
        eta_hat = wrong / total[j]
        rows.append((float(edges[j]), float(edges[j + 1]),
                     int(plus[j]), int(minus[j]), float(eta_hat)))
        if total[j] >= min_count and eta_hat > thresh:
            violating += int(total[j])
    in_window = int(total.sum())
    return MassartEstimate(
        bins=tuple(rows),
        violating_mass=violating / in_window if in_window else 0.0,
        threshold=thresh,
        min_count=min_count,
        n_samples=in_window,
    )


def max_label_deviation(estimate, eta):
    """Largest |Pr[y=+1] - (1-eta)| over sufficiently populated bins."""
    worst = 0.0
    for lo, hi, plus, minus, _ in estimate.bins:
        if plus + minus >= estimate.min_count:
            worst = max(worst, abs(plus / (plus + minus) - (1.0 - eta)))
    return worst


def ptf_error_estimate(samples, labels, s, t, eps, c_prime):
    """Empirical disagreement between labels and the region classifier."""
    proj = np.asarray(samples, dtype=float) @ _unit(s)
    pred = ptf_region(proj, t, eps, c_prime)
    return float(np.mean(pred != np.asarray(labels)))


# ------------------------------------------------------------ distinguisher


class PlantedRegionLearner:
    """Classifies by the threshold-polynomial region along the planted s."""

    def __init__(self, s, t, eps, c_prime):
        self.s = _unit(s)
        self.t, self.eps, self.c_prime = t, eps, c_prime

    def fit(self, x, y):
        return self

    def predict(self, x):
        return ptf_region(np.asarray(x, dtype=float) @ self.s,
                          self.t, self.eps, self.c_prime)


class ConstantLearner:
    def __init__(self, label=1):
        self.label = int(label)

    def fit(self, x, y):
        return self

    def predict(self, x):
        return np.full(len(x), self.label, dtype=np.int8)


class SgdHalfspaceLearner:
    """Averaged hinge-loss SGD on degree-d lifted features.

    A plain exploratory baseline: feature standardization from the
    training split, one pass per epoch in a seeded shuffle, averaged
    iterate for prediction.
    """

    def __init__(self, d=2, epochs=5, lr=0.05, seed=0):
        self.d, self.epochs, self.lr, self.seed = d, epochs, lr, seed
        self.w = None

    def _features(self, x):
        v = veronese_lift(np.asarray(x, dtype=float), self.d)
        v = (v - self._mu) / self._sd
        v[:, 0] = 1.0
        return v

    def fit(self, x, y):
        v = veronese_lift(np.asarray(x, dtype=float), self.d)
        self._mu = v.mean(axis=0)
        self._sd = np.where(v.std(axis=0) > 1e-12, v.std(axis=0), 1.0)
        v = self._features(x)
        y = np.asarray(y, dtype=float)
        rng = np.random.default_rng(self.seed)
        w = np.zeros(v.shape[1])
        acc = np.zeros_like(w)
        steps = 0
        for _ in range(self.epochs):
            for i in rng.permutation(len(y)):
                if y[i] * (w @ v[i]) < 1.0:
                    w += self.lr * y[i] * v[i]
                acc += w
                steps += 1
        self.w = acc / steps
        return self

    def predict(self, x):
        v = self._features(x)
        return np.where(v @ self.w >= 0.0, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class DistinguishReport:
    p_alt: float
    p_null: float
    advantage: float
    trials: int
    tau: float
    alt_errors: tuple
    null_errors: tuple
    degenerate_trials: int

    def to_dict(self):
        return {
            "p_alt": self.p_alt,
            "p_null": self.p_null,
            "advantage": self.advantage,
            "trials": self.trials,
            "tau": self.tau,
            "alt_errors": list(self.alt_errors),
            "null_errors": list(self.null_errors),
            "degenerate_trials": self.degenerate_trials,
        }


def distinguish(make_instance, learner_factory, tau, trials, rng, train_frac=0.5):
    """Repeated-trial decision harness.

    make_instance(tag, rng) must return (x, labels) for a fresh instance;
    each trial fits a fresh learner on the training split of each pair
    member and decides "alternative" when the held-out error is below
    tau.  The advantage is the alternative-decision rate gap.  Learners
    that output a constant on some test split are counted, not rejected.
    """
    decisions = {"alternative": [], "null": []}
    errors = {"alternative": [], "null": []}
    degenerate = 0
    for _ in range(trials):
        for tag in ("alternative", "null"):
            x, y = make_instance(tag, rng)
            cut = max(1, int(len(y) * train_frac))
            learner = learner_factory()
            learner.fit(x[:cut], y[:cut])
            pred = np.asarray(learner.predict(x[cut:]))
            if np.all(pred == pred[0]):
                degenerate += 1
            err = float(np.mean(pred != y[cut:]))
            errors[tag].append(err)
            decisions[tag].append(err < tau)
    p_alt = float(np.mean(decisions["alternative"]))
    p_null = float(np.mean(decisions["null"]))
    return DistinguishReport(
        p_alt=p_alt,
        p_null=p_null,
        advantage=p_alt - p_null,
        trials=trials,
        tau=tau,
        alt_errors=tuple(errors["alternative"]),
        null_errors=tuple(errors["null"]),
        degenerate_trials=degenerate,
    )


# ------------------------------------------------------------- rate checks


def acceptance_rate_test(params, n_trials, rng):
    """Empirical acceptance vs the quadrature value and the closed bound."""
    batch = gen_continuous_lwe(params.n, n_trials, params.sigma, "null", rng=rng)
    res = reduce_batch(batch, params, rng=rng, want_outputs=False)
    lower, exact = acceptance_probability(params)
    rate = res.n_accepted / n_trials
    se = math.sqrt(exact * (1.0 - exact) / n_trials)
    ok = abs(rate - exact) <= 3.0 * se and rate >= lower
    return TestReport(
        name="acceptance-rate",
        statistic=rate,
        threshold=exact,
        passed=ok,
        n_samples=n_trials,
        description=f"exact {exact:.6g}, lower bound {lower:.6g}, 3-sigma band "
                    f"{3.0 * se:.2e}",
        params={"lower": lower, "exact": exact, "psi": params.psi},
    )


def dk21_reference_sample(t, eps, size, rng, trunc=DEFAULT_TRUNCATION):
    """Direct sampler for the uniform-offset mixture of lattice Gaussians.

    Draws u uniform on [0, eps) and then a width-1 discrete Gaussian on
    u + (t+u)Z, by rescaling the row sampler to unit spacing.
    """
    u = rng.uniform(0.0, eps, size=size)
    spacing = t + u
    w = sample_lattice_rows(u / spacing, 1.0 / spacing, trunc, rng)
    return w * spacing
