"""Random strictly convex quadratics with a factored Householder Hessian,
plus the raw BB solver for them.

An instance stores A = Q diag(v) Q' through three unit Householder
vectors and the spectrum v, so Hessian products cost O(n) and the
spectrum is known exactly.  Seven preset spectrum recipes place the
interior eigenvalues in different bands between v[0] = 1 and
v[n-1] = kappa.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels, trace
from .errors import (
    DimensionMismatchError,
    DimensionTooSmallError,
    InvalidParameterError,
    InvalidSettingError,
)
from .steps import SteplengthPolicy

SETTING_IDS = (1, 2, 3, 4, 5, 6, 7)

_FORMAT = "stlsbb-instance-v1"


@dataclass(frozen=True)
class SpectrumSetting:
    """Recipe id (1..7) and condition number kappa for instance spectra."""

    setting_id: int
    kappa: float

    def __post_init__(self):
        sid = int(self.setting_id)
        if sid not in SETTING_IDS:
            raise InvalidSettingError(f"setting_id must be in 1..7, got {self.setting_id!r}")
        k = float(self.kappa)
        if not (math.isfinite(k) and k > 1.0):
            raise InvalidParameterError(f"kappa must be finite and > 1, got {self.kappa!r}")
        object.__setattr__(self, "setting_id", sid)
        object.__setattr__(self, "kappa", k)


@dataclass(frozen=True)
class QuadraticInstance:
    """Factored quadratic f(x) = x'Ax/2 - b'x with A = Q diag(v) Q'.

    w1, w2, w3 are the unit Householder vectors composing Q, eigenvalues
    is v (positive), linear is b.  setting_id/kappa/seed record how a
    generated instance was drawn and are None for hand-built ones.
    """

    dim: int
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    eigenvalues: np.ndarray
    linear: np.ndarray
    setting_id: int | None = None
    kappa: float | None = None
    seed: int | None = None

    def __post_init__(self):
        n = int(self.dim)
        if n < 1:
            raise DimensionTooSmallError(f"dim must be >= 1, got {self.dim!r}")
        object.__setattr__(self, "dim", n)
        for name in ("w1", "w2", "w3", "eigenvalues", "linear"):
            arr = np.array(getattr(self, name), dtype=float, copy=True).reshape(-1)
            if arr.size != n:
                raise DimensionMismatchError(
                    f"{name} has length {arr.size}, expected {n}"
                )
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("w1", "w2", "w3"):
            nrm = float(np.linalg.norm(getattr(self, name)))
            if abs(nrm - 1.0) > 1e-12:
                raise InvalidParameterError(f"{name} must be a unit vector (norm {nrm:.3g})")
        if not np.all(self.eigenvalues > 0.0):
            raise InvalidParameterError("eigenvalues must all be positive")

    def to_dict(self):
        d = {
            "format": _FORMAT,
            "dim": self.dim,
            "setting_id": self.setting_id,
            "kappa": self.kappa,
            "seed": self.seed,
        }
        for name in ("w1", "w2", "w3", "eigenvalues", "linear"):
            d[name] = [float(v) for v in getattr(self, name)]
        return d

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != _FORMAT:
            raise InvalidParameterError(
                f"not a serialized instance (format {d.get('format')!r})"
            )
        return cls(
            dim=int(d["dim"]),
            w1=d["w1"],
            w2=d["w2"],
            w3=d["w3"],
            eigenvalues=d["eigenvalues"],
            linear=d["linear"],
            setting_id=d.get("setting_id"),
            kappa=d.get("kappa"),
            seed=d.get("seed"),
        )

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _interior_blocks(n, setting):
    """Half-open index blocks (lo, hi, low, high) tiling 1..n-2, each drawn
    uniformly from [low, high].  Ranges are increasing across blocks for
    every recipe, which for recipes 2..7 needs kappa > 200."""
    sid = setting.setting_id
    kappa = setting.kappa
    p5 = n // 5
    p2 = n // 2
    p45 = (4 * n) // 5
    if sid == 1:
        return [(1, n - 1, 1.0, kappa)]
    if sid == 2:
        return [(1, p5, 1.0, 100.0), (p5, n - 1, kappa / 2.0, kappa)]
    if sid == 3:
        return [(1, p2, 1.0, 100.0), (p2, n - 1, kappa / 2.0, kappa)]
    if sid == 4:
        return [(1, p45, 1.0, 100.0), (p45, n - 1, kappa / 2.0, kappa)]
    if sid == 5:
        return [
            (1, p5, 1.0, 100.0),
            (p5, p45, 100.0, kappa / 2.0),
            (p45, n - 1, kappa / 2.0, kappa),
        ]
    if sid == 6:
        return [(1, 10, 1.0, 100.0), (10, n - 1, kappa / 2.0, kappa)]
    return [(1, n - 10, 1.0, 100.0), (n - 10, n - 1, kappa / 2.0, kappa)]


def generate_instance(n, setting, seed):
    """Draw a random instance for a spectrum recipe.

    The Householder vectors are unit-normalized standard normals, b is
    uniform on [-10, 10]^n, and the spectrum fixes v[0] = 1 and
    v[n-1] = kappa with the interior drawn block-by-block per the recipe
    and then sorted ascending.  The seed is expanded with numpy's
    SeedSequence into five independent child streams, one per drawn field
    (w1, w2, w3, v, b), so every instance is reproducible bit-for-bit.

    Recipes 2..7 need n >= 10 (their interior breakpoints collapse below
    that) and kappa > 200 (so the block ranges stay increasing).
    """
    n = int(n)
    if not isinstance(setting, SpectrumSetting):
        raise InvalidParameterError("setting must be a SpectrumSetting")
    if n < 3:
        raise DimensionTooSmallError(f"n must be >= 3 to hold both extremes, got {n}")
    if setting.setting_id != 1:
        if n < 10:
            raise DimensionTooSmallError(
                f"recipe {setting.setting_id} needs n >= 10, got {n}"
            )
        if not setting.kappa > 200.0:
            raise InvalidSettingError(
                f"recipe {setting.setting_id} needs kappa > 200, got {setting.kappa:g}"
            )
    children = np.random.SeedSequence(int(seed)).spawn(5)
    rngs = [np.random.default_rng(c) for c in children]

    def unit(vec):
        return vec / np.linalg.norm(vec)

    w1 = unit(rngs[0].standard_normal(n))
    w2 = unit(rngs[1].standard_normal(n))
    w3 = unit(rngs[2].standard_normal(n))
    v = np.empty(n)
    v[0] = 1.0
    v[n - 1] = setting.kappa
    for lo, hi, low, high in _interior_blocks(n, setting):
        v[lo:hi] = rngs[3].uniform(low, high, hi - lo)
    v[1 : n - 1] = np.sort(v[1 : n - 1])
    b = rngs[4].uniform(-10.0, 10.0, n)
    return QuadraticInstance(
        dim=n,
        w1=w1,
        w2=w2,
        w3=w3,
        eigenvalues=v,
        linear=b,
        setting_id=setting.setting_id,
        kappa=setting.kappa,
        seed=int(seed),
    )


def _check_vec(inst, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != inst.dim:
        raise DimensionMismatchError(f"x has length {x.size}, expected {inst.dim}")
    return x


def apply_hessian(inst, x):
    """A x through the Householder factorization, O(n)."""
    x = _check_vec(inst, x)
    return np.asarray(
        kernels.hessian_apply(inst.w1, inst.w2, inst.w3, inst.eigenvalues, x.copy())
    )


def gradient(inst, x):
    """Gradient A x - b."""
    return apply_hessian(inst, x) - inst.linear


def objective(inst, x):
    """Objective value x'Ax/2 - b'x."""
    x = _check_vec(inst, x)
    ax = kernels.hessian_apply(inst.w1, inst.w2, inst.w3, inst.eigenvalues, x.copy())
    return 0.5 * float(x @ ax) - float(inst.linear @ x)


def dense_hessian(inst):
    """Dense reconstruction of A; reference oracle, O(n^2) memory."""
    n = inst.dim
    eye = np.eye(n)
    q = eye - 2.0 * np.outer(inst.w3, inst.w3)
    q = q @ (eye - 2.0 * np.outer(inst.w2, inst.w2))
    q = q @ (eye - 2.0 * np.outer(inst.w1, inst.w1))
    return q @ np.diag(inst.eigenvalues) @ q.T


def as_objective(inst, name=None):
    """Wrap an instance as a generic (f, grad) objective for the
    line-search solver."""
    from .solver import Objective

    def eval_(x):
        x = _check_vec(inst, x)
        ax = kernels.hessian_apply(inst.w1, inst.w2, inst.w3, inst.eigenvalues, x.copy())
        f = 0.5 * float(x @ ax) - float(inst.linear @ x)
        return f, np.asarray(ax) - inst.linear

    label = name or f"quadratic-n{inst.dim}"
    return Objective(label, inst.dim, eval_, x0=np.ones(inst.dim))


def default_alpha0(inst, x0):
    """Opening steplength 1 / ||g0||_inf (1.0 when already stationary)."""
    g0 = gradient(inst, x0)
    gi = float(np.max(np.abs(g0)))
    return 1.0 / gi if gi > 0.0 else 1.0


def solve_bb(inst, policy, epsilon, max_iter, x0=None, alpha0=None):
    """Raw BB iteration (no line search) on an instance.

    Stops when ||g_k|| <= epsilon * ||g_0|| or after max_iter steps; x0
    defaults to the all-ones vector and alpha0 to 1 / ||g0||_inf.
    Curvature s'y = s'As is structurally positive here, so the policy
    needs no fallback.  Returns a RunTrace whose rows carry f, ||g|| and
    the steplength taken from each iterate (backtracks and fevals are
    zero: the raw method never evaluates f to decide anything).
    """
    if not isinstance(policy, SteplengthPolicy):
        raise InvalidParameterError("policy must be a SteplengthPolicy")
    eps = float(epsilon)
    if not (0.0 < eps < 1.0):
        raise InvalidParameterError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    cap = int(max_iter)
    if cap < 1:
        raise InvalidParameterError(f"max_iter must be >= 1, got {max_iter!r}")
    x0 = np.ones(inst.dim) if x0 is None else _check_vec(inst, x0).copy()
    a0 = default_alpha0(inst, x0) if alpha0 is None else float(alpha0)
    if not (math.isfinite(a0) and a0 > 0.0):
        raise InvalidParameterError(f"alpha0 must be positive and finite, got {alpha0!r}")
    code, param, cycle = policy.kernel_args()
    rows_n, capped, f_hist, g_hist, a_hist, x = kernels.raw_bb_loop(
        inst.w1, inst.w2, inst.w3, inst.eigenvalues, inst.linear,
        x0, a0, eps, cap, code, param, cycle,
    )
    rows = [
        trace.TraceRow(k=k, f=float(f_hist[k]), grad_norm=float(g_hist[k]),
                       alpha=float(a_hist[k]))
        for k in range(rows_n)
    ]
    meta = {
        "solver": "raw_bb",
        "policy": policy.describe(),
        "stop_rule": "grad_rel",
        "epsilon": eps,
        "max_iter": cap,
        "alpha0": a0,
        "alpha0_rule": "inf_norm" if alpha0 is None else "fixed",
        "n": inst.dim,
        "setting_id": inst.setting_id,
        "kappa": inst.kappa,
        "seed": inst.seed,
    }
    term = trace.ITERATION_CAP if capped else trace.GRADIENT_TOLERANCE
    return trace.RunTrace(rows=rows, termination=term, final_x=np.asarray(x), meta=meta)
