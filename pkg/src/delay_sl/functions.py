"""Real/complex function descriptors with derivatives and antiderivatives.

Every descriptor is a vectorised callable that also knows its derivative,
an antiderivative, its internal non-smooth points and how to serialise
itself as a tagged record ``{"kind": ..., "payload": ...}``.
"""
from __future__ import annotations

import math

import numpy as np

from .numerics.piecewise import PanelPoly

PI = math.pi
SQRT10 = math.sqrt(10.0)


class Fn:
    kind = "abstract"
    breaks: tuple[float, ...] = ()

    def __call__(self, x):
        raise NotImplementedError

    def deriv(self, x):
        # central difference fallback
        x = np.asarray(x, dtype=float)
        h = 1e-6 * (1 + np.abs(x))
        return (self(x + h) - self(x - h)) / (2 * h)

    def antideriv(self, x):
        raise NotImplementedError

    def integral(self, lo, hi):
        return self.antideriv(hi) - self.antideriv(lo)

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def is_real(self) -> bool:
        return True


def _A(a: float) -> float:
    return 2 * PI - 5 * a


class Builtin(Fn):
    """Closed-form functions of the two explicit constructions.

    ``h1``  (6 pi^2 / A^2) cos(pi sqrt10 (pi - x) / A), on (5a/2, pi)
    ``e1``  cos(2 pi xi) + cos(pi xi),                    xi = (2x - 3a) / A
    ``e0``  sin(2 pi xi) + 2 sin(pi xi)
    ``const``  constant ``value``
    ``chi1`` (3 pi^2 / 2) cos(pi sqrt10 (1 - t) / 2), unit-interval kernel
    ``cosine-unit``  sum_k c_k cos(k pi t) (+ chi1 when ``base == "chi1"``)

    with ``A = 2 pi - 5a``.  Antiderivatives are anchored at ``pi`` for
    ``h1``, at ``3a/2`` for ``e0``/``e1`` and at 0 otherwise.
    """

    kind = "analytic-builtin"
    NAMES = ("h1", "e1", "e0", "const", "chi1", "cosine-unit")

    def __init__(self, name: str, a: float | None = None, scale: float = 1.0,
                 value: float = 1.0, coeffs=(), base: str | None = None):
        if name not in self.NAMES:
            raise ValueError(f"unknown builtin {name!r}")
        if name in ("h1", "e1", "e0") and a is None:
            raise ValueError(f"builtin {name!r} needs the delay a")
        self.name = name
        self.a = None if a is None else float(a)
        self.scale = float(scale)
        self.value = float(value)
        self.coeffs = tuple(float(c) for c in coeffs)
        self.base = base

    def __repr__(self):
        return f"Builtin({self.name!r}, a={self.a!r}, scale={self.scale!r})"

    def _xi(self, x):
        return (2 * np.asarray(x, dtype=float) - 3 * self.a) / _A(self.a)

    def _raw(self, x, order: int):
        """order 0: value, 1: derivative, -1: antiderivative."""
        x = np.asarray(x, dtype=float)
        n = self.name
        if n == "h1":
            A = _A(self.a)
            c = 6 * PI ** 2 / A ** 2
            k = PI * SQRT10 / A
            arg = k * (PI - x)
            if order == 0:
                return c * np.cos(arg)
            if order == 1:
                return c * k * np.sin(arg)
            return -(c / k) * np.sin(arg)
        if n in ("e1", "e0"):
            A = _A(self.a)
            xi = self._xi(x)
            s2, s1 = 2 * PI, PI
            if n == "e1":
                if order == 0:
                    return np.cos(s2 * xi) + np.cos(s1 * xi)
                if order == 1:
                    return -(2 / A) * (s2 * np.sin(s2 * xi) + s1 * np.sin(s1 * xi))
                return (A / 2) * (np.sin(s2 * xi) / s2 + np.sin(s1 * xi) / s1)
            if order == 0:
                return np.sin(s2 * xi) + 2 * np.sin(s1 * xi)
            if order == 1:
                return (2 / A) * (s2 * np.cos(s2 * xi) + 2 * s1 * np.cos(s1 * xi))
            return (A / 2) * ((1 - np.cos(s2 * xi)) / s2 + 2 * (1 - np.cos(s1 * xi)) / s1)
        if n == "const":
            if order == 0:
                return np.full(x.shape, self.value)
            if order == 1:
                return np.zeros(x.shape)
            return self.value * x
        out = np.zeros(x.shape)
        if n == "chi1" or self.base == "chi1":
            c, k = 1.5 * PI ** 2, PI * SQRT10 / 2
            arg = k * (1 - x)
            out = out + (c * np.cos(arg) if order == 0 else
                         c * k * np.sin(arg) if order == 1 else -(c / k) * np.sin(arg))
        for m, cm in enumerate(self.coeffs if n == "cosine-unit" else ()):
            if cm == 0:
                continue
            if m == 0:
                out = out + (cm if order == 0 else 0.0 if order == 1 else cm * x)
                continue
            w = m * PI
            out = out + cm * (np.cos(w * x) if order == 0 else
                              -w * np.sin(w * x) if order == 1 else np.sin(w * x) / w)
        return out

    def __call__(self, x):
        return self.scale * self._raw(x, 0)

    def deriv(self, x):
        return self.scale * self._raw(x, 1)

    def antideriv(self, x):
        return self.scale * self._raw(x, -1)

    def scaled(self, c: float) -> "Builtin":
        return Builtin(self.name, self.a, self.scale * c, self.value, self.coeffs, self.base)

    def to_dict(self) -> dict:
        payload = {"name": self.name, "scale": self.scale}
        if self.a is not None:
            payload["a"] = self.a
        if self.name == "const":
            payload["value"] = self.value
        if self.name == "cosine-unit":
            payload["coeffs"] = list(self.coeffs)
            payload["base"] = self.base
        return {"kind": self.kind, "payload": payload}


class PanelFn(Fn):
    """Piecewise polynomial known by values at composite-Gauss nodes."""

    kind = "samples"

    def __init__(self, breaks, values):
        self.poly = PanelPoly.from_nodal(breaks, values)
        self.values = np.asarray(values)
        self.breaks = tuple(float(b) for b in self.poly.breaks[1:-1])

    def __call__(self, x):
        return self.poly(x)

    def deriv(self, x):
        return self.poly.deriv(x)

    def antideriv(self, x):
        return self.poly.antideriv(x)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": {
            "interp": "gauss-panels",
            "breaks": self.poly.breaks.tolist(),
            "values": _encode_array(self.values)}}


class LinearFn(Fn):
    """Piecewise-linear interpolant of samples ``(x, y)``; zero outside."""

    kind = "samples"

    def __init__(self, x, y):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y)
        if len(self.x) < 2 or np.any(np.diff(self.x) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        self.breaks = tuple(float(v) for v in self.x[1:-1])
        dx = np.diff(self.x)
        self._cum = np.concatenate([[0.0], np.cumsum(dx * (self.y[1:] + self.y[:-1]) / 2)])

    def _seg(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.x, x, side="right") - 1, 0, len(self.x) - 2)
        return x, i

    def __call__(self, x):
        x, i = self._seg(x)
        x0, x1 = self.x[i], self.x[i + 1]
        y = self.y[i] + (self.y[i + 1] - self.y[i]) * (x - x0) / (x1 - x0)
        return np.where((x >= self.x[0]) & (x <= self.x[-1]), y, 0.0)

    def deriv(self, x):
        x, i = self._seg(x)
        d = (self.y[i + 1] - self.y[i]) / (self.x[i + 1] - self.x[i])
        return np.where((x >= self.x[0]) & (x <= self.x[-1]), d, 0.0)

    def antideriv(self, x):
        x, i = self._seg(x)
        xc = np.clip(x, self.x[0], self.x[-1])
        t = xc - self.x[i]
        slope = (self.y[i + 1] - self.y[i]) / (self.x[i + 1] - self.x[i])
        return self._cum[i] + self.y[i] * t + slope * t * t / 2

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.y)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": {
            "interp": "linear", "x": self.x.tolist(), "y": _encode_array(self.y)}}


class Scaled(Fn):
    """``c * f`` for a (possibly complex) constant ``c``."""

    kind = "scaled"

    def __init__(self, c, fn: Fn):
        self.c = complex(c) if np.iscomplexobj(c) or isinstance(c, complex) else float(c)
        if isinstance(self.c, complex) and self.c.imag == 0:
            self.c = self.c.real
        self.fn = fn
        self.breaks = fn.breaks

    def __call__(self, x):
        return self.c * self.fn(x)

    def deriv(self, x):
        return self.c * self.fn.deriv(x)

    def antideriv(self, x):
        return self.c * self.fn.antideriv(x)

    @property
    def is_real(self) -> bool:
        return not isinstance(self.c, complex) and self.fn.is_real

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": {"c": _encode_scalar(self.c), "fn": self.fn.to_dict()}}


class ProductIntegral(Fn):
    """``c * K_h(x + a/2) * int_{3a/2}^{x - a/2} e(t) dt`` with ``K_h(s) = int_s^pi h``."""

    kind = "product-integral"

    def __init__(self, c, h: Fn, e: Fn, a: float):
        self.c = c
        self.h, self.e, self.a = h, e, float(a)
        self.breaks = tuple(sorted({b - self.a / 2 for b in h.breaks}
                                   | {b + self.a / 2 for b in e.breaks}))

    def _K(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s < PI, self.h.antideriv(PI) - self.h.antideriv(np.minimum(s, PI)), 0.0)

    def _E(self, s):
        return self.e.antideriv(s) - self.e.antideriv(1.5 * self.a)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * self._K(x + self.a / 2) * self._E(x - self.a / 2)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        s, t = x + self.a / 2, x - self.a / 2
        return self.c * (-np.where(s < PI, self.h(s), 0.0) * self._E(t) + self._K(s) * self.e(t))

    @property
    def is_real(self) -> bool:
        return not isinstance(self.c, complex) and self.h.is_real and self.e.is_real

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": {
            "c": _encode_scalar(self.c), "a": self.a,
            "h": self.h.to_dict(), "e": self.e.to_dict()}}


class Affine(Fn):
    """``f(offset + factor * x) * scale``; used for unit-interval rescaling."""

    kind = "affine"

    def __init__(self, fn: Fn, offset: float, factor: float, scale: float = 1.0):
        self.fn, self.offset, self.factor, self.scale = fn, float(offset), float(factor), float(scale)
        self.breaks = tuple((b - self.offset) / self.factor for b in fn.breaks)

    def __call__(self, x):
        return self.scale * self.fn(self.offset + self.factor * np.asarray(x, dtype=float))

    def deriv(self, x):
        return self.scale * self.factor * self.fn.deriv(self.offset + self.factor * np.asarray(x, dtype=float))

    def antideriv(self, x):
        return self.scale / self.factor * self.fn.antideriv(self.offset + self.factor * np.asarray(x, dtype=float))

    @property
    def is_real(self) -> bool:
        return self.fn.is_real

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": {
            "offset": self.offset, "factor": self.factor, "scale": self.scale,
            "fn": self.fn.to_dict()}}


def _encode_scalar(c):
    if isinstance(c, complex):
        return [c.real, c.imag]
    return float(c)


def _decode_scalar(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1]) if v[1] != 0 else float(v[0])
    return float(v)


def _encode_array(y):
    y = np.asarray(y)
    if np.iscomplexobj(y):
        return {"re": y.real.tolist(), "im": y.imag.tolist()}
    return y.tolist()


def _decode_array(v):
    if isinstance(v, dict):
        return np.asarray(v["re"]) + 1j * np.asarray(v["im"])
    return np.asarray(v, dtype=float)


def fn_from_dict(d: dict) -> Fn:
    kind, p = d["kind"], d["payload"]
    if kind == "analytic-builtin":
        return Builtin(p["name"], p.get("a"), p.get("scale", 1.0), p.get("value", 1.0),
                       p.get("coeffs", ()), p.get("base"))
    if kind == "samples":
        if p.get("interp") == "gauss-panels":
            return PanelFn(p["breaks"], _decode_array(p["values"]))
        return LinearFn(p["x"], _decode_array(p["y"]))
    if kind == "scaled":
        return Scaled(_decode_scalar(p["c"]), fn_from_dict(p["fn"]))
    if kind == "product-integral":
        return ProductIntegral(_decode_scalar(p["c"]), fn_from_dict(p["h"]),
                               fn_from_dict(p["e"]), p["a"])
    if kind == "affine":
        return Affine(fn_from_dict(p["fn"]), p["offset"], p["factor"], p["scale"])
    raise ValueError(f"unknown function kind {kind!r}")
