"""Positive space-time coefficients h(x, t).

Supported forms, all separable into a spatial and a temporal factor:

* constant:          h = c > 0
* radial_temporal:   h = (1 + d(x, x0))^a * (1 + t)^b
* table:             per-vertex positive values, time independent
* zero:              identically 0; admitted only by the wave simulator and
                     the weak-form checker (linear-wave diagnostics), never
                     by the volume criteria, which need h^(-gamma).
"""

from __future__ import annotations

import numpy as np

__all__ = ["Potential"]


class Potential:
    """Evaluable coefficient h(x, t) > 0 (or the special zero form)."""

    FORMS = ("constant", "radial_temporal", "table", "zero")

    def __init__(self, form: str, *, c: float | None = None,
                 a: float | None = None, b: float | None = None,
                 values=None):
        if form not in self.FORMS:
            raise ValueError(f"unknown potential form {form!r}")
        self.form = form
        self.c = c
        self.a = a
        self.b = b
        self.values = None if values is None else np.asarray(values, dtype=float)
        if form == "constant":
            if c is None or c <= 0:
                raise ValueError("constant potential needs c > 0")
        elif form == "radial_temporal":
            if a is None or b is None:
                raise ValueError("radial_temporal potential needs exponents a and b")
        elif form == "table":
            if self.values is None or self.values.ndim != 1:
                raise ValueError("table potential needs a 1-d value array")
            if not (self.values > 0).all():
                raise ValueError("table potential must be positive everywhere")

    @classmethod
    def constant(cls, c: float) -> "Potential":
        return cls("constant", c=float(c))

    @classmethod
    def radial_temporal(cls, a: float, b: float) -> "Potential":
        return cls("radial_temporal", a=float(a), b=float(b))

    @classmethod
    def table(cls, values) -> "Potential":
        return cls("table", values=values)

    @classmethod
    def zero(cls) -> "Potential":
        return cls("zero")

    @property
    def time_independent(self) -> bool:
        return self.form != "radial_temporal" or self.b == 0.0

    @property
    def spatially_varying(self) -> bool:
        return self.form in ("radial_temporal", "table")

    def spatial(self, dvec) -> np.ndarray:
        """Spatial factor per vertex; needs the distance vector for radial forms."""
        if self.form == "constant":
            n = 1 if dvec is None else len(dvec)
            return np.full(n, self.c)
        if self.form == "zero":
            n = 1 if dvec is None else len(dvec)
            return np.zeros(n)
        if self.form == "table":
            return self.values
        if dvec is None:
            raise ValueError("radial potential needs distances to the base vertex")
        return (1.0 + np.asarray(dvec, dtype=float)) ** self.a

    def temporal(self, t):
        """Temporal factor (scalar or array in t)."""
        if self.form == "radial_temporal":
            return (1.0 + np.asarray(t, dtype=float)) ** self.b
        return np.ones_like(np.asarray(t, dtype=float))

    def eval(self, dvec, t):
        """h(x, t); broadcasting spatial (n,) against temporal t."""
        sp = self.spatial(dvec)
        tp = self.temporal(t)
        if np.ndim(tp) == 0:
            return sp * float(tp)
        return sp[:, None] * np.asarray(tp)[None, :] if np.ndim(tp) == 1 and sp.ndim == 1 \
            else sp * tp

    def spatial_neg_power(self, dvec, gamma: float) -> np.ndarray:
        """spatial(x)^(-gamma); raises on nonpositive samples."""
        sp = self.spatial(dvec)
        if not (sp > 0).all():
            raise ValueError("nonpositive potential sample: h^(-gamma) undefined")
        return sp ** (-gamma)

    def temporal_neg_power(self, t, gamma: float):
        tp = self.temporal(t)
        if not (np.asarray(tp) > 0).all():
            raise ValueError("nonpositive potential sample: h^(-gamma) undefined")
        return tp ** (-gamma)

    def to_config(self) -> dict:
        if self.form == "constant":
            return {"form": "constant", "c": self.c}
        if self.form == "radial_temporal":
            return {"form": "radial_temporal", "a": self.a, "b": self.b}
        if self.form == "table":
            return {"form": "table", "values": self.values.tolist()}
        return {"form": "zero"}

    @classmethod
    def from_config(cls, cfg: dict) -> "Potential":
        form = cfg.get("form")
        if form == "constant":
            return cls.constant(cfg["c"])
        if form == "radial_temporal":
            return cls.radial_temporal(cfg.get("a", 0.0), cfg.get("b", 0.0))
        if form == "table":
            return cls.table(cfg["values"])
        if form == "zero":
            return cls.zero()
        raise ValueError(f"unknown potential form {form!r}")

    def __repr__(self):
        return f"Potential({self.to_config()!r})"
