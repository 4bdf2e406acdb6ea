"""Copula samplers for the simulation study

Frank and Gaussian copulae indexed by their population Kendall tau or
Spearman rho, the independence copula, and two component mixtures of them
whose draws keep a label of the component they came from.
"""
import numpy as np
import pandas as pd
import scipy.integrate
import scipy.optimize
import scipy.stats

from .errors import ArgumentError, SizeError
from .rank import Sample
from .utils import derive_seed, stream

FAMILIES = ("frank", "gaussian", "independence")
KINDS = ("tau", "rho", "native")
SERIES_BELOW = 1e-3


def debye(k, x):
    """Debye function D_k(x) = k / x^k * integral_0^x t^k / (e^t - 1) dt"""
    if x == 0:
        return 1.0
    if x < 0:
        return debye(k, -x) + k * -x / (k + 1.0)

    value, _ = scipy.integrate.quad(lambda t: t ** k / np.expm1(t), 0, x,
                                    epsabs=0, epsrel=1e-12, limit=200)
    return k * value / x ** k


def frank_tau(theta):
    """Population Kendall tau of the Frank copula"""
    if theta == 0:
        return 0.0
    if abs(theta) < SERIES_BELOW:
        return theta / 9.0 - theta ** 3 / 900.0
    return 1 - 4.0 / theta * (1 - debye(1, theta))


def frank_rho(theta):
    """Population Spearman rho of the Frank copula"""
    if theta == 0:
        return 0.0
    if abs(theta) < SERIES_BELOW:
        return theta / 6.0 - theta ** 3 / 450.0
    return 1 - 12.0 / theta * (debye(1, theta) - debye(2, theta))


def _invert(func, target):
    """Positive root of func(theta) = |target|, signed like target"""
    if not 0 < abs(target) < 1:
        raise ArgumentError("Association {} must lie in (-1, 0) or "
                            "(0, 1).".format(target))
    goal = abs(target)
    high = 1.0
    while func(high) < goal:
        high *= 2
    theta = scipy.optimize.brentq(lambda t: func(t) - goal, 1e-12, high,
                                  xtol=1e-14, rtol=1e-14, maxiter=500)
    return float(np.copysign(theta, target))


def frank_theta_from_tau(tau):
    """Frank parameter with population Kendall tau `tau`

    tau = 0 is the independence copula and has no Frank parameter.
    """
    return _invert(frank_tau, tau)


def frank_theta_from_rho(rho):
    return _invert(frank_rho, rho)


def gaussian_tau(r):
    return 2 / np.pi * np.arcsin(r)


def gaussian_rho(r):
    return 6 / np.pi * np.arcsin(r / 2.0)


def gaussian_r_from(strength, kind="tau"):
    """Latent normal correlation for a Kendall tau or Spearman rho"""
    if not -1 < strength < 1:
        raise ArgumentError("Association {} must lie in (-1, 1).".format(
            strength))
    if kind == "tau":
        return float(np.sin(np.pi * strength / 2))
    if kind == "rho":
        return float(2 * np.sin(np.pi * strength / 6))
    raise ArgumentError("Unknown association kind `{}`.".format(kind))


class CopulaSpec(object):
    """A copula family with the strength of its association

    `kind` says what `strength` is: the population Kendall `tau`, the
    Spearman `rho` or the `native` parameter (Frank theta, Gaussian r).
    """
    def __init__(self, family, strength=None, kind="tau"):
        if family not in FAMILIES:
            raise ArgumentError("Unknown copula family `{}`.".format(family))
        if kind not in KINDS:
            raise ArgumentError("Unknown association kind `{}`.".format(kind))

        if family != "independence":
            if strength is None:
                raise ArgumentError("The {} copula needs a strength.".format(
                    family))
            strength = float(strength)
            if kind in ("tau", "rho") and not -1 < strength < 1:
                raise ArgumentError("{} must lie in (-1, 1).".format(kind))
            if family == "frank" and strength == 0:
                raise ArgumentError("A Frank copula without association is "
                                    "the independence copula.")
            if family == "gaussian" and kind == "native" and \
                    not -1 < strength < 1:
                raise ArgumentError("Gaussian r must lie in (-1, 1).")

        self.family = family
        self.strength = strength
        self.kind = kind

    @classmethod
    def independence(cls):
        return cls("independence")

    def parameter(self):
        """The native parameter (Frank theta, Gaussian r, 0 for independence)"""
        if self.family == "independence":
            return 0.0
        if self.kind == "native":
            return self.strength
        if self.family == "frank":
            return frank_theta_from_tau(self.strength) if self.kind == "tau" \
                else frank_theta_from_rho(self.strength)
        return gaussian_r_from(self.strength, self.kind)

    def tau(self):
        """Population Kendall tau"""
        if self.family == "frank":
            return frank_tau(self.parameter())
        if self.family == "gaussian":
            return float(gaussian_tau(self.parameter()))
        return 0.0

    def rho(self):
        """Population Spearman rho"""
        if self.family == "frank":
            return frank_rho(self.parameter())
        if self.family == "gaussian":
            return float(gaussian_rho(self.parameter()))
        return 0.0

    def __repr__(self):
        if self.family == "independence":
            return "CopulaSpec(independence)"
        return "CopulaSpec({}, {}={})".format(self.family, self.kind,
                                              self.strength)


def _frank_pairs(theta, n, rng):
    """Conditional inversion of a Frank copula with theta > 0

    Solves dC(u, v)/du = t for v, evaluated in the log domain so large theta
    can not overflow.
    """
    u = rng.random(n)
    t = rng.random(n)
    with np.errstate(divide="ignore"):
        log_t = np.log(t)
        log_rest = np.log1p(-t)
    numerator = np.logaddexp(log_t - theta, log_rest - theta * u)
    denominator = np.logaddexp(log_t, log_rest - theta * u)
    v = -(numerator - denominator) / theta
    return u, np.clip(v, 0.0, 1.0)


def _gaussian_pairs(r, n, rng):
    z = rng.standard_normal((n, 2))
    latent = r * z[:, 0] + np.sqrt(1 - r * r) * z[:, 1]
    return scipy.stats.norm.cdf(z[:, 0]), scipy.stats.norm.cdf(latent)


def sample(spec, n, seed):
    """n draws with uniform margins from a copula"""
    if n < 2:
        raise SizeError("Copula sample", n, 2)

    rng = stream(seed)
    if spec.family == "frank":
        theta = spec.parameter()
        u, v = _frank_pairs(abs(theta), n, rng)
        if theta < 0:
            v = 1 - v
    elif spec.family == "gaussian":
        u, v = _gaussian_pairs(spec.parameter(), n, rng)
    else:
        u, v = rng.random(n), rng.random(n)

    return Sample(u, v)


class LabeledSample(Sample):
    """A sample whose draws know which mixture component produced them

    `labels[i]` is true when observation `ids[i]` came from the associated
    component.
    """
    def __init__(self, x, y, labels, ids=None):
        Sample.__init__(self, x, y, ids)
        labels = np.array(labels, dtype=bool)
        if len(labels) != self.n:
            raise ArgumentError("Labels differ in length from the sample.")
        labels.setflags(write=False)
        self.labels = labels

    @property
    def associated(self):
        """Ids of the draws from the associated component"""
        return self.ids[self.labels]


class MixtureSpec(object):
    """Associated component mixed into a background with proportion p

    The background defaults to the independence copula.
    """
    def __init__(self, component, p, n, background=None):
        if not 0 < p <= 1:
            raise ArgumentError("Mixing proportion must lie in (0, 1].")
        if n < 2:
            raise ArgumentError("A mixture sample needs at least two draws.")
        self.component = component
        self.p = float(p)
        self.n = int(n)
        self.background = background or CopulaSpec.independence()


def sample_mixture(m, seed):
    """Labeled draws, each from the component with probability p"""
    labels = stream(seed).random(m.n) < m.p
    component = sample(m.component, m.n, derive_seed(seed, 1))
    background = sample(m.background, m.n, derive_seed(seed, 2))
    return LabeledSample(np.where(labels, component.x, background.x),
                         np.where(labels, component.y, background.y),
                         labels)


def correspondence(family, taus):
    """Population Spearman rho for each Kendall tau of a family

    Returns a frame with the family, tau, native parameter and rho columns.
    """
    rows = []
    for tau in taus:
        spec = CopulaSpec(family, tau, "tau")
        rows.append((family, float(tau), spec.parameter(), spec.rho()))
    return pd.DataFrame(rows, columns=["family", "tau", "parameter", "rho"])
