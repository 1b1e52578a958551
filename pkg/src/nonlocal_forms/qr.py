"""Numerical checks of the summability conditions that give strict quasi-regularity.

A condition of the form ``sum_i w_i * P(|X_i| > t_i) < inf`` cannot be decided
from finitely many terms.  Every series here is reported as a partial sum
plus, when the weights follow a known power law, a rigorous integral-test
bracket on the remainder (tail probabilities are at most one, so the weight
law is a majorant).  Without such an envelope the verdict comes from the
last decade of terms and is flagged non-rigorous:

* pass when the last-decade mass is below ``pass_tol``;
* fail when the weights alone look divergent (the last decade carries at
  least ``10**-0.05`` of the previous decade's mass, as the harmonic series
  does) and every last-decade tail probability is at least ``fail_floor``;
* inconclusive otherwise.

The weights are fixed by the input and both rules are monotone in the tail
probabilities, so enlarging them can never turn a fail into a pass.

Two exponent profiles are evaluated for the ``l^p`` case.  ``literal`` uses
weight ``beta^(2/p) gamma^2`` with threshold ``M0 beta^(-1/p) gamma^-1``;
``scaled`` uses ``beta^(2/p) gamma^(2/p)`` with ``M0 beta^(-1/p) gamma^(-1/p)``,
which at ``p = 2`` reduces to ``sum beta_i gamma_i``, the form the presets
are built around.  The headline verdict follows ``scaled``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np

from .measures import GaussianSpectralMeasure, Measure, ProductMeasure, density_bound
from .spaces import LINF, LP, PRODUCT, EigenSequence, PowerLaw, WeightedSpaceSpec, as_array

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

LITERAL = "literal"
SCALED = "scaled"
PROFILES = (LITERAL, SCALED)

M_CAP_LOG2 = 20


# -- tail probabilities ----------------------------------------------------------

BOUND = "bound"
CLOSED_FORM = "closed-form"
EMPIRICAL = "empirical"
CALLABLE = "callable"
TAIL_KINDS = (BOUND, CLOSED_FORM, EMPIRICAL, CALLABLE)


@dataclass(frozen=True)
class TailSource:
    """Where ``P(|X_i| > t)`` comes from.

    ``bound`` substitutes the trivial bound 1 for every probability; the
    resulting series is then exactly the weight series.  ``closed-form`` asks
    the measure (vectorized when it can).  ``empirical`` estimates from
    ``n_samples`` draws.  ``callable`` takes ``fn(idx, t)`` with 0-based
    coordinate indices.
    """

    kind: str
    measure: Measure | None = None
    fn: Callable | None = None
    n_samples: int = 0

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise ValueError(f"tail source kind must be one of {TAIL_KINDS}, got {self.kind!r}")
        if self.kind in (CLOSED_FORM, EMPIRICAL) and self.measure is None:
            raise ValueError(f"tail source {self.kind!r} needs a measure")
        if self.kind == EMPIRICAL and self.n_samples < 1:
            raise ValueError("empirical tail source needs n_samples >= 1")
        if self.kind == CALLABLE and self.fn is None:
            raise ValueError("callable tail source needs fn")

    @classmethod
    def bound(cls, measure=None):
        return cls(BOUND, measure)

    @classmethod
    def closed_form(cls, measure):
        return cls(CLOSED_FORM, measure)

    @classmethod
    def empirical(cls, measure, n_samples):
        return cls(EMPIRICAL, measure, n_samples=int(n_samples))

    @classmethod
    def from_function(cls, fn):
        return cls(CALLABLE, fn=fn)

    @property
    def exact(self) -> bool:
        """True when the probabilities used are all identically one."""
        return self.kind == BOUND

    def probs(self, thresholds, rng: np.random.Generator | None = None, samples=None) -> np.ndarray:
        t = np.asarray(thresholds, dtype=float)
        n = t.size
        if self.kind == BOUND:
            return np.ones(n)
        if self.kind == CALLABLE:
            out = np.asarray(self.fn(np.arange(n), t), dtype=float)
            return np.broadcast_to(out, (n,)).astype(float)
        m = self.measure
        if m.dim < n:
            raise ValueError(f"measure has {m.dim} coordinates, the series needs {n}")
        if self.kind == CLOSED_FORM:
            if isinstance(m, GaussianSpectralMeasure):
                return m.tail_probs(np.concatenate([t, np.full(m.dim - n, np.inf)]))[:n]
            if isinstance(m, ProductMeasure):
                return np.array([m.marginals[i].tail(t[i]) for i in range(n)])
            return np.array([float(m.tail_prob(i, t[i]).value) for i in range(n)])
        if samples is None:
            samples = m.sample(rng, size=self.n_samples)
        return np.mean(np.abs(samples[:, :n]) > t, axis=0)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.measure is not None:
            d["measure"] = type(self.measure).__name__
        if self.kind == EMPIRICAL:
            d["n_samples"] = self.n_samples
        return d


# -- input -----------------------------------------------------------------------


@dataclass(frozen=True)
class QRInput:
    """Weights, the auxiliary sequence gamma, and where tail probabilities come from.

    ``beta`` and ``gamma`` are arrays or PowerLaw sequences; with power laws
    the remainder of the series gets a rigorous bracket.  ``density_bounds``
    gives ``L_{M,i}``: a scalar, a length-n array, or ``fn(M, idx, halfwidth)``
    where ``halfwidth`` is the half-length of the compact window for each i.
    The string ``"auto"`` takes the sup of each conditional density.
    """

    flavor: str
    beta: object
    gamma: object
    n_terms: int
    M0: float = 1.0
    alpha: float = 1.0
    p: float = 2.0
    tail: TailSource | None = None
    density_bounds: object = None
    support_samples: int = 32
    seed: int = 0
    pass_tol: float = 1e-8
    fail_floor: float = 0.5
    m_cap_log2: int = M_CAP_LOG2
    name: str = ""

    def __post_init__(self):
        if self.flavor not in (LP, LINF, PRODUCT):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if self.n_terms < 1:
            raise ValueError("n_terms must be positive")
        if self.flavor == LP and not 1 <= self.p < math.inf:
            raise ValueError("the lp case needs 1 <= p < inf")
        if not self.M0 > 0:
            raise ValueError("M0 must be positive")
        g = self.gamma_array()
        if np.any(g <= 0) or not np.all(np.isfinite(g)):
            raise ValueError("gamma must be finite and strictly positive")
        if self.flavor != PRODUCT:
            b = self.beta_array()
            if np.any(b <= 0) or not np.all(np.isfinite(b)):
                raise ValueError("beta must be finite and strictly positive")
        if self.m_cap_log2 < 1 or self.m_cap_log2 > M_CAP_LOG2:
            raise ValueError(f"m_cap_log2 must lie in [1, {M_CAP_LOG2}]")

    def beta_array(self) -> np.ndarray:
        if self.flavor == PRODUCT and self.beta is None:
            return np.ones(self.n_terms)
        return as_array(self.beta, self.n_terms)

    def gamma_array(self) -> np.ndarray:
        return as_array(self.gamma, self.n_terms)

    @property
    def space(self) -> WeightedSpaceSpec:
        if self.flavor == LP:
            return WeightedSpaceSpec.lp(self.p, self.beta_array())
        if self.flavor == LINF:
            return WeightedSpaceSpec.linf(self.beta_array())
        return WeightedSpaceSpec.product(self.n_terms)

    def law(self, b_exp: float, g_exp: float) -> PowerLaw | None:
        """``beta^b_exp * gamma^g_exp`` as a PowerLaw, when both inputs are power laws."""
        beta = PowerLaw() if self.flavor == PRODUCT and self.beta is None else self.beta
        if isinstance(beta, PowerLaw) and isinstance(self.gamma, PowerLaw):
            return beta**b_exp * self.gamma**g_exp
        return None

    def describe(self) -> dict:
        def seq(s):
            return str(s) if isinstance(s, PowerLaw) else ("array", int(np.size(s))) if s is not None else None

        return {
            "name": self.name,
            "flavor": self.flavor,
            "p": self.p if self.flavor == LP else None,
            "beta": seq(self.beta),
            "gamma": seq(self.gamma),
            "n_terms": self.n_terms,
            "M0": self.M0,
            "alpha": self.alpha,
            "tail": self.tail.describe() if self.tail else None,
            "density_bounds": _describe_L(self.density_bounds),
            "seed": self.seed,
        }


def _describe_L(L):
    if L is None or isinstance(L, str):
        return L
    if callable(L):
        return getattr(L, "__name__", "callable")
    arr = np.asarray(L, dtype=float)
    return float(arr) if arr.ndim == 0 else ["array", int(arr.size)]


# -- series assessment -----------------------------------------------------------


@dataclass
class SeriesReport:
    partial_sum: float
    n_terms: int
    tail_lo: float | None
    tail_hi: float | None
    verdict: str
    rigorous: bool
    method: str
    last_decade_mass: float | None = None

    @property
    def bracket(self) -> tuple[float, float] | None:
        if self.tail_hi is None:
            return None
        return self.partial_sum + (self.tail_lo or 0.0), self.partial_sum + self.tail_hi


DIVERGENT_RATIO = 10**-0.05


def decade_ratio(w) -> float:
    """Mass of the last decade of terms over the mass of the decade before it."""
    w = np.asarray(w, dtype=float)
    n = w.size
    last, prev = math.fsum(w[n // 10:]), math.fsum(w[n // 100:n // 10])
    if prev == 0:
        return math.inf if last > 0 else 0.0
    return last / prev


def assess_series(s, envelope: PowerLaw | None = None, exact: bool = False,
                  pass_tol: float = 1e-8, fail_floor: float = 0.5, weights=None) -> SeriesReport:
    """Judge ``sum_i s_i`` from its first n terms.

    ``envelope`` is a power-law majorant of the summands; ``exact`` says the
    summands equal it, so a divergent envelope proves divergence.  ``weights``
    are the factors ``w_i`` with ``s_i = w_i * P_i`` (default: ``s`` itself).
    """
    s = np.asarray(s, dtype=float)
    n = s.size
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise ValueError("summands must be non-negative")
    if not np.all(np.isfinite(s)):
        return SeriesReport(math.inf, n, None, None, FAIL, True, "infinite summand")
    partial = math.fsum(s)
    if envelope is not None:
        lo, hi = envelope.tail_sum_bounds(n)
        if math.isfinite(hi):
            return SeriesReport(partial, n, lo if exact else 0.0, hi, PASS, True, "power-law majorant")
        if exact:
            return SeriesReport(partial, n, math.inf, math.inf, FAIL, True, "divergent power law")
    if n < 10:
        return SeriesReport(partial, n, None, None, INCONCLUSIVE, False, "too few terms")
    mass = math.fsum(s[n // 10:])
    if mass <= pass_tol:
        return SeriesReport(partial, n, None, None, PASS, False, "last-decade test", mass)
    w = s if weights is None else np.asarray(weights, dtype=float)
    verdict = INCONCLUSIVE
    if n >= 100 and decade_ratio(w) >= DIVERGENT_RATIO:
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = np.where(w[n // 10:] > 0, s[n // 10:] / w[n // 10:], 1.0)
        if float(np.min(probs)) >= fail_floor:
            verdict = FAIL
    return SeriesReport(partial, n, None, None, verdict, False, "decade test", mass)


def combine(*verdicts: str) -> str:
    if FAIL in verdicts:
        return FAIL
    if all(v == PASS for v in verdicts):
        return PASS
    return INCONCLUSIVE


# -- report ----------------------------------------------------------------------


@dataclass
class ConditionResult:
    name: str
    profile: str
    series: SeriesReport | None
    verdict: str
    detail: dict = field(default_factory=dict)


@dataclass
class QRReport:
    case: str
    verdict: str
    default_profile: str
    conditions: list[ConditionResult]
    input: dict
    diagnostics: dict = field(default_factory=dict)

    def condition(self, name: str, profile: str | None = None) -> ConditionResult:
        for c in self.conditions:
            if c.name == name and (profile is None or c.profile == profile):
                return c
        raise KeyError((name, profile))

    @property
    def headline(self) -> ConditionResult:
        return next(c for c in self.conditions if c.profile == self.default_profile and c.series is not None)

    def to_dict(self) -> dict:
        d = asdict(self)
        for c, cd in zip(self.conditions, d["conditions"]):
            if c.series is not None:
                cd["series"]["bracket"] = c.series.bracket
        return _jsonable(d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def table(self) -> str:
        rows = [("condition", "profile", "partial sum", "bracket", "verdict", "rigorous")]
        for c in self.conditions:
            s = c.series
            if s is None:
                rows.append((c.name, c.profile, "-", "-", c.verdict, "-"))
                continue
            br = s.bracket
            br_txt = "-" if br is None else f"[{br[0]:.12g}, {br[1]:.12g}]"
            rows.append((c.name, c.profile, f"{s.partial_sum:.12g}", br_txt, c.verdict, "yes" if s.rigorous else "no"))
        widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
        lines = ["  ".join(x.ljust(w) for x, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append(f"verdict ({self.case}, profile {self.default_profile}): {self.verdict}")
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# -- checks ----------------------------------------------------------------------


def _require_tail(inp: QRInput):
    if inp.tail is None:
        raise ValueError("missing tail source")


def _samples(inp: QRInput, rng):
    if inp.tail.kind == EMPIRICAL:
        return inp.tail.measure.sample(rng, size=inp.tail.n_samples)
    return None


def weighted_tail_sum(inp: QRInput, profile: str, M0: float | None = None, gamma_scale: float = 1.0,
                      rng=None, samples=None) -> tuple[np.ndarray, PowerLaw | None, np.ndarray]:
    """Summands ``w_i * P(|X_i| > t_i)``, the power law of ``w_i`` (if any) and ``w``.

    ``gamma_scale`` multiplies every gamma_i; it exists to verify the exact
    rescaling identity between thresholds.
    """
    M0 = inp.M0 if M0 is None else M0
    b = inp.beta_array()
    g = inp.gamma_array() * gamma_scale
    if inp.flavor == LP:
        p = inp.p
        if profile == LITERAL:
            w, t, exps = b ** (2 / p) * g**2, M0 * b ** (-1 / p) / g, (2 / p, 2.0)
        elif profile == SCALED:
            w, t, exps = b ** (2 / p) * g ** (2 / p), M0 * b ** (-1 / p) * g ** (-1 / p), (2 / p, 2 / p)
        else:
            raise ValueError(f"unknown profile {profile!r}")
    elif inp.flavor == LINF:
        w, t, exps = b**2 * g**2, M0 / (b * g), (2.0, 2.0)
    else:
        raise ValueError("the weighted tail sum is defined for lp and linf")
    law = inp.law(*exps)
    if law is not None:
        law = law * gamma_scale ** exps[1]
    return w * inp.tail.probs(t, rng, samples), law, w


def support_diagnostic(inp: QRInput, rng) -> dict:
    """Empirical ``M`` needed per sample so that every coordinate lies in the box.

    For each draw the smallest admissible M is ``max_i c_i |X_i|``; a finite
    value for every draw is consistent with full support of the union of boxes.
    """
    measure = inp.tail.measure if inp.tail else None
    if measure is None or inp.support_samples < 1:
        return {}
    b, g = inp.beta_array(), inp.gamma_array()
    if inp.flavor == LP:
        coefs = {SCALED: b ** (1 / inp.p) * g ** (1 / inp.p), LITERAL: b ** (1 / inp.p) * g}
    elif inp.flavor == LINF:
        coefs = {LINF: b * g}
    else:
        return {}
    S, n = inp.support_samples, inp.n_terms
    need = {k: np.zeros(S) for k in coefs}
    chunk = 1 << 16
    if isinstance(measure, GaussianSpectralMeasure):
        sd = np.sqrt(measure.variances[:n])
        for a in range(0, n, chunk):
            X = np.abs(sd[a:a + chunk] * rng.standard_normal((S, min(chunk, n - a))))
            for k, c in coefs.items():
                need[k] = np.maximum(need[k], np.max(c[a:a + chunk] * X, axis=1))
    else:
        X = np.abs(measure.sample(rng, size=S)[:, :n])
        for k, c in coefs.items():
            need[k] = np.max(c * X, axis=1)
    return {
        k: {"samples": S, "max": float(v.max()), "median": float(np.median(v)),
            "all_finite": bool(np.all(np.isfinite(v)))}
        for k, v in need.items()
    }


def _tail_condition(inp, profile, rng, samples) -> ConditionResult:
    s, law, w = weighted_tail_sum(inp, profile, rng=rng, samples=samples)
    rep = assess_series(s, law, inp.tail.exact, inp.pass_tol, inp.fail_floor, w)
    return ConditionResult("weighted_tail_sum", profile, rep, rep.verdict)


def check_lp_case(inp: QRInput) -> QRReport:
    """Both exponent profiles of the tail-sum condition on ``l^p_(beta)``, 0 < alpha <= 1."""
    if inp.flavor != LP:
        raise ValueError("check_lp_case needs flavor lp")
    if inp.alpha > 1:
        raise ValueError("check_lp_case covers alpha <= 1; use check_alpha_gt1")
    _require_tail(inp)
    rng = np.random.default_rng(inp.seed)
    samples = _samples(inp, rng)
    conds = [_tail_condition(inp, prof, rng, samples) for prof in (SCALED, LITERAL)]
    diag = {"support": support_diagnostic(inp, np.random.default_rng([inp.seed, 1]))}
    return QRReport("lp", conds[0].verdict, SCALED, conds, inp.describe(), diag)


def _check_gamma_unbounded(g):
    if np.any(np.diff(g) < 0):
        raise ValueError("gamma must be non-decreasing in the linf case")
    if g[-1] <= g[0]:
        raise ValueError("gamma must increase to infinity in the linf case; a constant sequence is excluded")


def check_linf_case(inp: QRInput) -> QRReport:
    """The tail-sum condition on ``l^inf_(beta)``; gamma must be non-decreasing and unbounded."""
    if inp.flavor != LINF:
        raise ValueError("check_linf_case needs flavor linf")
    if inp.alpha > 1:
        raise ValueError("check_linf_case covers alpha <= 1; use check_alpha_gt1")
    _check_gamma_unbounded(inp.gamma_array())
    _require_tail(inp)
    rng = np.random.default_rng(inp.seed)
    cond = _tail_condition(inp, LINF, rng, _samples(inp, rng))
    diag = {"support": support_diagnostic(inp, np.random.default_rng([inp.seed, 1]))}
    return QRReport("linf", cond.verdict, LINF, [cond], inp.describe(), diag)


def check_product_case(inp: QRInput) -> QRReport:
    """On ``R^N`` with 0 < alpha <= 1 there is nothing to check."""
    cond = ConditionResult("unconditional", PRODUCT, None, PASS, {"note": "no summability condition"})
    return QRReport("product", PASS, PRODUCT, [cond], inp.describe())


def _window_scale(inp: QRInput) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-coordinate threshold scale c_i (threshold = M c_i), weight base, weight exponent offset."""
    b, g = inp.beta_array(), inp.gamma_array()
    if inp.flavor == LP:
        base = b ** (1 / inp.p) * g ** (1 / inp.p)
        return 1.0 / base, base, 1.0
    if inp.flavor == LINF:
        return 1.0 / (b * g), b * g, 1.0
    return g, 1.0 / g, 0.0


def _density_table(inp: QRInput, M: float, halfwidth: np.ndarray) -> np.ndarray:
    L = inp.density_bounds
    n = inp.n_terms
    if L is None:
        raise ValueError("missing density bounds L_{M,i}; required when alpha > 1")
    if isinstance(L, str):
        if L != "auto":
            raise ValueError(f"unknown density bound mode {L!r}")
        measure = inp.tail.measure if inp.tail else None
        if measure is None:
            raise ValueError("density bounds 'auto' needs a measure in the tail source")
        return np.array([density_bound(measure.conditional(i), (-halfwidth[i], halfwidth[i]), "sup")
                         for i in range(n)])
    if callable(L):
        return np.broadcast_to(np.asarray(L(M, np.arange(n), halfwidth), dtype=float), (n,)).astype(float)
    return as_array(L, n)


def density_limsup(inp: QRInput, rng=None, samples=None) -> ConditionResult:
    """Probe ``M^-alpha sum_i L_{M,i} w_i^alpha P(|X_i| > M c_i)`` on ``M = 2^k``.

    The limsup is surrogated by the dyadic grid up to ``2^m_cap_log2``.  It
    fails when a fixed-M series diverges or when the values are still growing
    at the cap (doubling over the last five dyadic steps).
    """
    c, base, _ = _window_scale(inp)
    a = inp.alpha
    Ms = 2.0 ** np.arange(inp.m_cap_log2 + 1)
    values, verdicts = [], []
    L_const = isinstance(inp.density_bounds, (int, float)) and not isinstance(inp.density_bounds, bool)
    for M in Ms:
        L = _density_table(inp, M, 6.0 * M * c)
        w = M**-a * L * base**a
        s = w * inp.tail.probs(M * c, rng, samples)
        law = None
        if L_const:
            if inp.flavor == PRODUCT:
                law = inp.law(0.0, -a)
            else:
                ex = 1 / inp.p if inp.flavor == LP else 1.0
                law = inp.law(a * ex, a * ex)
            if law is not None:
                law = law * (M**-a * float(inp.density_bounds))
        rep = assess_series(s, law, inp.tail.exact and L_const, inp.pass_tol, inp.fail_floor, w)
        values.append(rep.partial_sum if rep.tail_hi is None else rep.partial_sum + rep.tail_hi)
        verdicts.append(rep.verdict)
    values = np.array(values)
    if FAIL in verdicts:
        verdict, why = FAIL, "divergent series at fixed M"
    elif INCONCLUSIVE in verdicts:
        verdict, why = INCONCLUSIVE, "undecided series at fixed M"
    elif values[-1] <= 2.0 * values[-6] or values[-1] <= inp.pass_tol:
        verdict, why = PASS, "bounded on the dyadic grid"
    else:
        verdict, why = FAIL, "still growing at the cap"
    detail = {"M": Ms, "values": values, "per_M": verdicts, "reason": why, "max": float(values.max())}
    return ConditionResult("density_limsup", inp.flavor, None, verdict, detail)


def check_alpha_gt1(inp: QRInput) -> QRReport:
    """The conditions for 1 < alpha < 2, which need density bounds ``L_{M,i}``."""
    if not 1 < inp.alpha < 2:
        raise ValueError("check_alpha_gt1 needs 1 < alpha < 2")
    if inp.density_bounds is None:
        raise ValueError("missing density bounds L_{M,i}; required when alpha > 1")
    _require_tail(inp)
    rng = np.random.default_rng(inp.seed)
    samples = _samples(inp, rng)
    conds = []
    if inp.flavor != PRODUCT:
        if inp.flavor == LINF:
            _check_gamma_unbounded(inp.gamma_array())
        c, base, _ = _window_scale(inp)
        w = base ** (inp.alpha + 1)
        s = w * inp.tail.probs(inp.M0 * c, rng, samples)
        ex = 1 / inp.p if inp.flavor == LP else 1.0
        e = ex * (inp.alpha + 1)
        rep = assess_series(s, inp.law(e, e), inp.tail.exact, inp.pass_tol, inp.fail_floor, w)
        conds.append(ConditionResult("weighted_tail_sum_alpha", inp.flavor, rep, rep.verdict))
    conds.append(density_limsup(inp, rng, samples))
    diag = {}
    if inp.flavor != PRODUCT:
        diag["support"] = support_diagnostic(inp, np.random.default_rng([inp.seed, 1]))
    verdict = combine(*(c.verdict for c in conds))
    return QRReport(inp.flavor + "-alpha>1", verdict, inp.flavor, conds, inp.describe(), diag)


def check(inp: QRInput) -> QRReport:
    """Dispatch on flavor and alpha."""
    if inp.alpha > 1:
        return check_alpha_gt1(inp)
    if inp.flavor == LP:
        return check_lp_case(inp)
    if inp.flavor == LINF:
        return check_linf_case(inp)
    return check_product_case(inp)


# -- presets ---------------------------------------------------------------------

PRESETS = ("example0", "example1")


def preset(name: str, eig: EigenSequence, alpha: float = 1.0, n_terms: int | None = None) -> QRInput:
    """Two standard parameter bindings on ``l^2``.

    example0: ``beta = lambda^4``, ``gamma = lambda^-2``, coordinates Gaussian
    with variances ``lambda^2``.  example1: ``beta = lambda^6``,
    ``gamma = lambda^-2``.  Both use the trivial tail bound.
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    n = len(eig) if n_terms is None else n_terms
    lam = eig.law if eig.law is not None else eig.lambdas[:n]
    if eig.law is None and n > len(eig):
        raise ValueError("n_terms exceeds the eigen sequence")
    k = 4 if name == "example0" else 6
    beta, gamma = lam**k, lam**-2
    measure = GaussianSpectralMeasure(as_array(lam, n) ** 2) if name == "example0" else None
    return QRInput(LP, beta, gamma, n, M0=1.0, alpha=alpha, p=2.0,
                   tail=TailSource.bound(measure), name=name)
