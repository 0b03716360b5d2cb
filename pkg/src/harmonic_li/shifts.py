"""Symbolic real shifts ``t`` built from rationals and a few named constants.

A :class:`Shift` is ``q + sum c_i * atom_i`` with ``q`` rational, integer
coefficients ``c_i`` and atoms drawn from ``gamma``, ``log<k>`` (``k`` a
positive integer), ``logmu`` and ``logalpha``.  Keeping the form symbolic lets
``H_k - gamma + t`` cancel exactly when ``t`` contains ``gamma``, and lets
``e^t`` be exact when ``t`` is a logarithm of a rational.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .numeric_core import ONE, Interval, gamma

_ATOM_RE = re.compile(r"^(gamma|logmu|logalpha|log\d+)$")
_TERM_RE = re.compile(r"^(?:(\d+)\*)?([a-z][a-z0-9]*)$")


def _atom_interval(atom: str) -> Interval:
    if atom == "gamma":
        return gamma()
    if atom == "logmu":
        from .special_functions import log_mu

        return log_mu()
    if atom == "logalpha":
        from .discretized_li import alpha_star

        return alpha_star().log()
    return Interval(int(atom[3:])).log()


def _atom_exp(atom: str) -> Interval:
    if atom == "gamma":
        from .numeric_core import exp_gamma

        return exp_gamma()
    if atom == "logmu":
        from .special_functions import mu

        return mu()
    if atom == "logalpha":
        from .discretized_li import alpha_star

        return alpha_star()
    return Interval(int(atom[3:]))


@dataclass(frozen=True)
class Shift:
    rational: Fraction = Fraction(0)
    atoms: tuple[tuple[str, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        merged: dict[str, int] = {}
        for name, coeff in self.atoms:
            if not _ATOM_RE.match(name):
                raise ValueError(f"unknown shift atom {name!r}")
            if name.startswith("log") and name[3:].isdigit() and int(name[3:]) < 1:
                raise ValueError("log atoms need a positive integer")
            merged[name] = merged.get(name, 0) + coeff
        if name_one := [n for n in merged if n == "log1"]:
            for n in name_one:
                merged.pop(n)
        canon = tuple(sorted((n, c) for n, c in merged.items() if c))
        object.__setattr__(self, "atoms", canon)
        object.__setattr__(self, "rational", Fraction(self.rational))

    @classmethod
    def parse(cls, text: str) -> "Shift":
        """Parse expressions such as ``gamma+1``, ``-log2``, ``logmu``, ``1.274``, ``1e-3``."""
        s = text.replace(" ", "").lower()
        if not s:
            raise ValueError("empty shift")
        try:
            return cls(Fraction(s))
        except (ValueError, ZeroDivisionError):
            pass
        rational = Fraction(0)
        atoms: list[tuple[str, int]] = []
        # split on + or - that are not part of an exponent
        parts = re.split(r"(?<![eE])(?=[+-])", s)
        for part in parts:
            if not part:
                continue
            sign = -1 if part[0] == "-" else 1
            body = part[1:] if part[0] in "+-" else part
            try:
                rational += sign * Fraction(body)
                continue
            except (ValueError, ZeroDivisionError):
                pass
            m = _TERM_RE.match(body)
            if not m or not _ATOM_RE.match(m.group(2)):
                raise ValueError(f"cannot parse shift term {part!r} in {text!r}")
            coeff = int(m.group(1)) if m.group(1) else 1
            atoms.append((m.group(2), sign * coeff))
        return cls(rational, tuple(atoms))

    def coefficient(self, atom: str) -> int:
        return dict(self.atoms).get(atom, 0)

    @property
    def is_logmu(self) -> bool:
        return self.rational == 0 and self.atoms == (("logmu", 1),)

    @property
    def is_rational(self) -> bool:
        return not self.atoms

    def interval(self) -> Interval:
        value = Interval(self.rational)
        for name, coeff in self.atoms:
            value = value + _atom_interval(name) * coeff
        return value

    def minus_gamma(self) -> "Shift":
        """The shift ``t - gamma`` (exact cancellation when ``t`` contains ``gamma``)."""
        return Shift(self.rational, self.atoms + (("gamma", -1),))

    def plus(self, other: "Shift") -> "Shift":
        return Shift(self.rational + other.rational, self.atoms + other.atoms)

    def exp(self) -> Interval:
        """Enclosure of ``e^t``; exact for sums of integer logarithms."""
        value = Interval(self.rational).exp() if self.rational else ONE
        for name, coeff in self.atoms:
            base = _atom_exp(name)
            value = value * (base.pow_int(coeff) if coeff > 0 else base.pow_int(-coeff).recip())
        return value

    def __float__(self) -> float:
        return float(self.interval().mid)

    def __str__(self) -> str:
        pieces = []
        for name, coeff in self.atoms:
            if coeff == 1:
                pieces.append(f"+{name}")
            elif coeff == -1:
                pieces.append(f"-{name}")
            else:
                pieces.append(f"{coeff:+d}*{name}")
        if self.rational or not pieces:
            r = self.rational
            txt = str(r) if r.denominator == 1 else _decimal_or_fraction(r)
            pieces.append(txt if txt.startswith("-") else f"+{txt}")
        out = "".join(pieces)
        return out[1:] if out.startswith("+") else out


def _decimal_or_fraction(r: Fraction) -> str:
    den = r.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{r.numerator}/{r.denominator}"
    places = max(twos, fives)
    scaled = r * 10**places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def as_shift(value) -> "Shift | Interval":
    """Coerce user input to a :class:`Shift`; intervals pass through unchanged."""
    if isinstance(value, (Shift, Interval)):
        return value
    if isinstance(value, str):
        return Shift.parse(value)
    if isinstance(value, bool):
        raise TypeError("bool is not a shift")
    if isinstance(value, (int, Fraction)):
        return Shift(Fraction(value))
    if isinstance(value, float):
        return Shift(Fraction(repr(value)))
    raise TypeError(f"cannot interpret {value!r} as a shift")


def shift_interval(t) -> Interval:
    s = as_shift(t)
    return s if isinstance(s, Interval) else s.interval()


def shift_minus_gamma(t) -> Interval:
    """Enclosure of ``t - gamma`` with exact cancellation for symbolic shifts."""
    s = as_shift(t)
    if isinstance(s, Interval):
        return s - gamma()
    return s.minus_gamma().interval()
