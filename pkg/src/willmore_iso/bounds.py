"""Scalar bound machinery: Li-Yau thresholds, the omega_g partition
minimum, and the admissibility threshold that gates the isoperimetric
sweep verdicts.

Everything here is exact arithmetic over a handful of scalars; the only
numerics are the interpolated sphere-family energy curve and the beta
table entries supplied by the user or by sweep runs. Both tables live in
two-column CSV with provenance recorded in comment lines, and +infinity
is always spelled "inf" in serialized form, never a sentinel value.
"""

from __future__ import annotations

import math
from typing import NamedTuple

FOUR_PI = 4.0 * math.pi
EIGHT_PI = 8.0 * math.pi
# relative slack accepted on the lower energy cutoff of curve samples
CURVE_LOW_SLACK = 0.02

_PROVENANCE_TAGS = ("exact", "numeric", "user-supplied")


def li_yau_bound(k: int) -> float:
    """Lower energy bound 4*pi*k for a surface with a k-fold point.

    k = 2 is the embeddedness threshold: staying strictly below 8*pi
    forbids double points.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"multiplicity must be an integer >= 1, got {k!r}")
    return FOUR_PI * k


class BetaTable:
    """Genus -> minimal-energy constant beta^3_g, with provenance per entry.

    Ships with the exact genus-1 value 2*pi^2. Entries must lie in
    [4*pi, 8*pi): the lower end is the absolute energy floor, the upper
    end is the Lawson-comparison ceiling. Instances are immutable;
    with_entry returns an extended copy.
    """

    def __init__(self, entries=None, provenance=None):
        base = {1: 2.0 * math.pi * math.pi}
        tags = {1: "exact"}
        if entries:
            for genus, beta in entries.items():
                base[int(genus)] = float(beta)
        if provenance:
            for genus, tag in provenance.items():
                tags[int(genus)] = str(tag)
        for genus, beta in base.items():
            if genus < 1:
                raise ValueError(f"genus must be >= 1, got {genus}")
            if not FOUR_PI <= beta < EIGHT_PI:
                raise ValueError(
                    f"beta for genus {genus} must lie in [4pi, 8pi), got {beta!r}"
                )
            tag = tags.get(genus, "user-supplied")
            if tag not in _PROVENANCE_TAGS:
                raise ValueError(f"unknown provenance tag {tag!r}")
            tags[genus] = tag
        self._entries = dict(sorted(base.items()))
        self._tags = tags

    def __contains__(self, genus: int) -> bool:
        return genus in self._entries

    def __getitem__(self, genus: int) -> float:
        try:
            return self._entries[genus]
        except KeyError:
            raise KeyError(f"no beta entry for genus {genus}") from None

    def __len__(self) -> int:
        return len(self._entries)

    def genera(self):
        return tuple(self._entries)

    def provenance(self, genus: int) -> str:
        if genus not in self._entries:
            raise KeyError(f"no beta entry for genus {genus}")
        return self._tags[genus]

    def with_entry(self, genus: int, beta: float, provenance: str = "user-supplied"):
        entries = dict(self._entries)
        tags = dict(self._tags)
        entries[int(genus)] = float(beta)
        tags[int(genus)] = provenance
        return BetaTable(entries, tags)

    def save(self, path) -> None:
        lines = [f"# {g}: {self._tags[g]}" for g in self._entries]
        lines.append("genus,beta")
        for g, beta in self._entries.items():
            lines.append(f"{g},{format(beta, '.17g')}")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path):
        entries = {}
        tags = {}
        with open(path, encoding="ascii") as fh:
            for raw in fh:
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if ":" in body:
                        head, _, tag = body.partition(":")
                        try:
                            tags[int(head)] = tag.strip()
                        except ValueError:
                            pass  # free-form comment, not a provenance line
                    continue
                if line.lower() == "genus,beta":
                    continue
                head, _, value = line.partition(",")
                entries[int(head)] = float(value)
        if not entries:
            raise ValueError(f"no beta entries found in {path}")
        return cls(entries, tags)


def omega_g(g: int, betas: BetaTable | None = None) -> float:
    """Minimum of 4pi + sum(beta_{g_i} - 4pi) over partitions of g into
    parts strictly smaller than g; +infinity for g = 1 (no such partition).

    Solved by an unbounded-knapsack DP over part sizes; the costs
    beta - 4pi are nonnegative by the table invariant, so the minimum is
    well posed.
    """
    if int(g) != g or g < 1:
        raise ValueError(f"genus must be an integer >= 1, got {g!r}")
    if g == 1:
        return math.inf
    table = betas if betas is not None else BetaTable()
    costs = {}
    for part in range(1, g):
        if part not in table:
            raise KeyError(f"beta table is missing genus {part} (needed for omega_{g})")
        costs[part] = table[part] - FOUR_PI
    best = [math.inf] * (g + 1)
    best[0] = 0.0
    for n in range(1, g + 1):
        for part in range(1, min(n, g - 1) + 1):
            candidate = best[n - part] + costs[part]
            if candidate < best[n]:
                best[n] = candidate
    return FOUR_PI + best[g]


class SchygullaCurve:
    """Monotone piecewise-linear interpolant of the sphere-family energy
    curve R -> W, anchored at W(36pi) = 4pi.

    Samples outside [4pi(1 - 0.02), 8pi) are rejected outright. Raw
    monotonicity violations are repaired by pool-adjacent-violators and
    kept in `violations` for inspection rather than silently discarded.
    Queries outside the sampled range raise instead of extrapolating.
    """

    def __init__(self, samples, provenance: str = "numeric"):
        cleaned = []
        for R, W in samples:
            R, W = float(R), float(W)
            if W >= EIGHT_PI:
                raise ValueError(f"sample W = {W!r} at R = {R!r} is not below 8pi")
            if W < FOUR_PI * (1.0 - CURVE_LOW_SLACK):
                raise ValueError(f"sample W = {W!r} at R = {R!r} is below the 4pi floor")
            if R < 36.0 * math.pi * (1.0 - CURVE_LOW_SLACK):
                raise ValueError(f"sample R = {R!r} is below 36pi")
            cleaned.append((R, W))
        if len(cleaned) < 2:
            raise ValueError("curve needs at least two samples")
        cleaned.sort()
        merged = []
        for R, W in cleaned:  # duplicate R: keep the lower envelope
            if merged and merged[-1][0] == R:
                merged[-1] = (R, min(merged[-1][1], W))
            else:
                merged.append((R, W))

        values = [w for _, w in merged]
        self.violations = [
            (merged[i][0], values[i], values[i + 1])
            for i in range(len(values) - 1)
            if values[i + 1] < values[i]
        ]
        self._radii = [r for r, _ in merged]
        self._values = _pava_nondecreasing(values)
        self.provenance = str(provenance)

    @property
    def samples(self):
        return tuple(zip(self._radii, self._values))

    def covers(self, R: float) -> bool:
        return self._radii[0] <= R <= self._radii[-1]

    def __call__(self, R: float) -> float:
        R = float(R)
        if not self.covers(R):
            raise ValueError(
                f"R = {R!r} outside the sampled range "
                f"[{self._radii[0]!r}, {self._radii[-1]!r}]; refusing to extrapolate"
            )
        import bisect

        i = bisect.bisect_right(self._radii, R) - 1
        if i == len(self._radii) - 1:
            return self._values[-1]
        r0, r1 = self._radii[i], self._radii[i + 1]
        w0, w1 = self._values[i], self._values[i + 1]
        if r1 == r0:
            return w0
        return w0 + (w1 - w0) * (R - r0) / (r1 - r0)

    def save(self, path) -> None:
        lines = [f"# {self.provenance}", "R,W"]
        for r, w in zip(self._radii, self._values):
            lines.append(f"{format(r, '.17g')},{format(w, '.17g')}")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path):
        samples = []
        provenance = "numeric"
        with open(path, encoding="ascii") as fh:
            for raw in fh:
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    provenance = line[1:].strip() or provenance
                    continue
                if line.lower() == "r,w":
                    continue
                head, _, value = line.partition(",")
                samples.append((float(head), float(value)))
        return cls(samples, provenance=provenance)


def _pava_nondecreasing(values):
    """Pool-adjacent-violators: least-squares non-decreasing fit."""
    blocks = [[v, 1] for v in values]  # (mean, weight)
    merged = []
    for mean, weight in blocks:
        merged.append([mean, weight])
        while len(merged) > 1 and merged[-2][0] > merged[-1][0]:
            m1, w1 = merged.pop()
            m0, w0 = merged.pop()
            merged.append([(m0 * w0 + m1 * w1) / (w0 + w1), w0 + w1])
    out = []
    for mean, weight in merged:
        out.extend([mean] * weight)
    return out


class ThresholdReport(NamedTuple):
    """The admissibility threshold and the three branches it minimizes."""

    threshold: float
    cap_branch: float  # always 8pi
    omega_branch: float  # +inf for genus 1
    curve_branch: float  # beta_g + W_curve(R) - 4pi


def ig_threshold(
    R: float,
    g: int,
    betas: BetaTable | None = None,
    curve: SchygullaCurve | None = None,
) -> ThresholdReport:
    """Energy threshold below which a W value certifies iso-ratio
    admissibility at (R, g): min of 8pi, omega_g, and
    beta_g + W_curve(R) - 4pi, each branch reported.
    """
    R = float(R)
    if R < 36.0 * math.pi:
        raise ValueError(f"R = {R!r} is below the isoperimetric floor 36pi")
    if curve is None:
        raise ValueError("a SchygullaCurve is required for the curve branch")
    table = betas if betas is not None else BetaTable()
    if g not in table:
        raise KeyError(f"beta table is missing genus {g}")
    omega = omega_g(g, table)
    curve_branch = table[g] + curve(R) - FOUR_PI
    threshold = min(EIGHT_PI, omega, curve_branch)
    return ThresholdReport(
        threshold=threshold,
        cap_branch=EIGHT_PI,
        omega_branch=omega,
        curve_branch=curve_branch,
    )
