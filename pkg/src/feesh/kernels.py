"""Hot per-tick kernels with two interchangeable backends.

The numba backend JIT-compiles the inner loops; the numpy backend is a pure
vectorized fallback. Selection: the ``FEESH_NUMBA`` environment variable
(``0``/``false``/``no`` disables numba) or :func:`set_backend` at runtime.

Both backends use only IEEE-exact elementwise arithmetic on the state-evolving
paths (advance, bounce, overlap), so simulations are bit-identical regardless
of backend. ``wobble_polygon`` goes through transcendental functions and is
only guaranteed equal to floating-point tolerance; it feeds rendering, never
simulation state.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "active_backend",
    "available_backends",
    "set_backend",
    "advance_enemies",
    "bounce_enemies",
    "overlapping_enemies",
    "wobble_polygon",
]


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _advance_enemies_np(pos, vel, rad, width, height):
    """Advance one tick and reflect at canvas edges, in place."""
    pos += vel
    for axis, limit in ((0, width), (1, height)):
        lo = pos[:, axis] < rad
        hi = pos[:, axis] > limit - rad
        if lo.any():
            pos[lo, axis] = 2.0 * rad[lo] - pos[lo, axis]
            vel[lo, axis] = -vel[lo, axis]
        if hi.any():
            pos[hi, axis] = 2.0 * (limit - rad[hi]) - pos[hi, axis]
            vel[hi, axis] = -vel[hi, axis]


def _colliding_pairs_np(pos, rad):
    n = pos.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    dx = pos[:, 0, None] - pos[None, :, 0]
    dy = pos[:, 1, None] - pos[None, :, 1]
    rr = rad[:, None] + rad[None, :]
    hit = dx * dx + dy * dy < rr * rr
    hit &= np.triu(np.ones((n, n), dtype=bool), k=1)
    return np.argwhere(hit)


def _bounce_enemies_np(pos, vel, rad):
    """Exchange velocities of every overlapping pair, in lexicographic pair order."""
    pairs = _colliding_pairs_np(pos, rad)
    for i, j in pairs:
        tmp = vel[i].copy()
        vel[i] = vel[j]
        vel[j] = tmp
    return pairs.shape[0]


def _overlapping_enemies_np(pos, rad, px, py, pr):
    """Boolean mask of enemies whose circle overlaps the player's."""
    dx = pos[:, 0] - px
    dy = pos[:, 1] - py
    rr = rad + pr
    return dx * dx + dy * dy < rr * rr


def _wobble_polygon_np(cx, cy, base_r, seed, vertices, tick, amp):
    """Closed noise-loop outline: radius modulated by seeded periodic harmonics."""
    k = np.arange(vertices, dtype=np.float64)
    theta = 2.0 * np.pi * k / vertices
    t = tick * 0.05
    wobble = (
        np.sin(3.0 * theta + seed + t)
        + 0.5 * np.sin(5.0 * theta + 1.7 * seed - 0.6 * t)
        + 0.25 * np.sin(8.0 * theta + 2.9 * seed + 1.3 * t)
    ) / 1.75
    r = base_r * (1.0 + amp * wobble)
    out = np.empty((vertices, 2), dtype=np.float64)
    out[:, 0] = cx + r * np.cos(theta)
    out[:, 1] = cy + r * np.sin(theta)
    return out


_NUMPY_IMPL = {
    "advance_enemies": _advance_enemies_np,
    "bounce_enemies": _bounce_enemies_np,
    "overlapping_enemies": _overlapping_enemies_np,
    "wobble_polygon": _wobble_polygon_np,
}

_IMPLS: dict[str, dict] = {"numpy": _NUMPY_IMPL}


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

def _build_numba_impl():
    from numba import njit

    @njit(cache=True)
    def advance_enemies(pos, vel, rad, width, height):
        n = pos.shape[0]
        for i in range(n):
            x = pos[i, 0] + vel[i, 0]
            y = pos[i, 1] + vel[i, 1]
            r = rad[i]
            if x < r:
                x = 2.0 * r - x
                vel[i, 0] = -vel[i, 0]
            elif x > width - r:
                x = 2.0 * (width - r) - x
                vel[i, 0] = -vel[i, 0]
            if y < r:
                y = 2.0 * r - y
                vel[i, 1] = -vel[i, 1]
            elif y > height - r:
                y = 2.0 * (height - r) - y
                vel[i, 1] = -vel[i, 1]
            pos[i, 0] = x
            pos[i, 1] = y

    @njit(cache=True)
    def bounce_enemies(pos, vel, rad):
        n = pos.shape[0]
        hits = 0
        for i in range(n):
            for j in range(i + 1, n):
                dx = pos[i, 0] - pos[j, 0]
                dy = pos[i, 1] - pos[j, 1]
                rr = rad[i] + rad[j]
                if dx * dx + dy * dy < rr * rr:
                    tx = vel[i, 0]
                    ty = vel[i, 1]
                    vel[i, 0] = vel[j, 0]
                    vel[i, 1] = vel[j, 1]
                    vel[j, 0] = tx
                    vel[j, 1] = ty
                    hits += 1
        return hits

    @njit(cache=True)
    def overlapping_enemies(pos, rad, px, py, pr):
        n = pos.shape[0]
        out = np.empty(n, dtype=np.bool_)
        for i in range(n):
            dx = pos[i, 0] - px
            dy = pos[i, 1] - py
            rr = rad[i] + pr
            out[i] = dx * dx + dy * dy < rr * rr
        return out

    @njit(cache=True)
    def wobble_polygon(cx, cy, base_r, seed, vertices, tick, amp):
        out = np.empty((vertices, 2), dtype=np.float64)
        t = tick * 0.05
        for k in range(vertices):
            theta = 2.0 * np.pi * k / vertices
            wobble = (
                np.sin(3.0 * theta + seed + t)
                + 0.5 * np.sin(5.0 * theta + 1.7 * seed - 0.6 * t)
                + 0.25 * np.sin(8.0 * theta + 2.9 * seed + 1.3 * t)
            ) / 1.75
            r = base_r * (1.0 + amp * wobble)
            out[k, 0] = cx + r * np.cos(theta)
            out[k, 1] = cy + r * np.sin(theta)
        return out

    return {
        "advance_enemies": advance_enemies,
        "bounce_enemies": bounce_enemies,
        "overlapping_enemies": overlapping_enemies,
        "wobble_polygon": wobble_polygon,
    }


def _numba_requested() -> bool:
    return os.environ.get("FEESH_NUMBA", "1").strip().lower() not in ("0", "false", "no")


if _numba_requested():
    try:
        _IMPLS["numba"] = _build_numba_impl()
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

_active = "numba" if "numba" in _IMPLS else "numpy"
_current = _IMPLS[_active]


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    """Switch kernel backend at runtime (used by the benchmark and tests)."""
    global _active, _current
    if name not in _IMPLS:
        if name == "numba":
            try:
                _IMPLS["numba"] = _build_numba_impl()
            except ImportError:
                raise ValueError("numba backend unavailable: numba is not importable") from None
        else:
            raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = name
    _current = _IMPLS[name]


def advance_enemies(pos, vel, rad, width, height):
    return _current["advance_enemies"](pos, vel, rad, width, height)


def bounce_enemies(pos, vel, rad):
    return _current["bounce_enemies"](pos, vel, rad)


def overlapping_enemies(pos, rad, px, py, pr):
    return _current["overlapping_enemies"](pos, rad, px, py, pr)


def wobble_polygon(cx, cy, base_r, seed, vertices, tick, amp=0.12):
    return _current["wobble_polygon"](
        float(cx), float(cy), float(base_r), float(seed), int(vertices), int(tick), float(amp)
    )
