"""Replay kernels, compiled when available.

The Cython extension ``fifarank._kernels`` is used if it imports; otherwise
the pure-Python loops in ``fifarank._kernels_py``.  Setting
``FIFARANK_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("FIFARANK_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "compiled" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _compiled is not None else [])


def get_backend(name: str | None = None):
    """Module implementing the kernels: ``'python'``, ``'compiled'`` or default."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _idx(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def fifa_replay(theta, home, away, y_home, y_away, step, knockout, scale, backend=None):
    return get_backend(backend).fifa_replay(
        theta, _idx(home), _idx(away), _f64(y_home), _f64(y_away), _f64(step),
        np.ascontiguousarray(knockout, dtype=np.uint8), float(scale),
    )


def davidson_replay(theta, home, away, venue_b, y_home, weight, K, eta, kappa, scale,
                    backend=None):
    return get_backend(backend).davidson_replay(
        theta, _idx(home), _idx(away), _f64(venue_b), _f64(y_home), _f64(weight),
        float(K), float(eta), float(kappa), float(scale),
    )


def skellam_replay(theta, home, away, venue_b, goal_diff, weight, K, c, eta, scale,
                   backend=None):
    return get_backend(backend).skellam_replay(
        theta, _idx(home), _idx(away), _f64(venue_b), _f64(goal_diff), _f64(weight),
        float(K), float(c), float(eta), float(scale),
    )
