"""Permutations, cycle structures, partitions, and the classification of
cycle structures of autotopisms of partial Latin squares.

The admissibility test is purely arithmetic: a triple of cycle structures can
belong to an autotopism of some non-empty partial Latin square exactly when
some triple (i, j, k) of cycle lengths with all three counts positive has
lcm(i, j) = lcm(i, k) = lcm(j, k) = lcm(i, j, k).  Everything in this module
is built on that test: enumeration and fast counting of admissible structures,
the minimal-part partition recursion, parastrophic (component-permutation)
class counting, and explicit conjugator construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, NamedTuple, Optional, Sequence


# ----------------------------------------------------------------------
# Permutations
# ----------------------------------------------------------------------

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True)
class Permutation:
    """A bijection of [n] = {1, ..., n}, stored as its image tuple.

    images[i - 1] is the image of point i.  Instances are immutable and
    hashable; composition follows the function convention, so
    (p * q)(x) = p(q(x)).
    """

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.images)
        if sorted(self.images) != list(range(1, n + 1)):
            raise ValueError(f"not a bijection of [{n}]: {self.images}")

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def __call__(self, point: int) -> int:
        return self.images[point - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise ValueError("degree mismatch in composition")
        return Permutation(tuple(self.images[x - 1] for x in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, img in enumerate(self.images, start=1):
            inv[img - 1] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(img == i for i, img in enumerate(self.images, start=1))

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Disjoint cycles in canonical order.

        Cycles are sorted by decreasing length, ties broken by their minimal
        point; each cycle starts at its minimal point.  One-cycles (fixed
        points) are included.
        """
        seen = [False] * self.degree
        out = []
        for start in range(1, self.degree + 1):
            if seen[start - 1]:
                continue
            cyc = [start]
            seen[start - 1] = True
            nxt = self(start)
            while nxt != start:
                cyc.append(nxt)
                seen[nxt - 1] = True
                nxt = self(nxt)
            out.append(tuple(cyc))
        out.sort(key=lambda c: (-len(c), c[0]))
        return tuple(out)

    def fixed_points(self) -> tuple[int, ...]:
        """Fixed points in natural order."""
        return tuple(i for i in range(1, self.degree + 1) if self(i) == i)

    def __str__(self) -> str:
        return "".join("(" + " ".join(str(p) for p in cyc) + ")" for cyc in self.cycles())

    @classmethod
    def parse(cls, text: str, degree: Optional[int] = None) -> "Permutation":
        """Parse either cycle notation or an explicit image list.

        Cycle notation looks like "(1 2 3)(4 5)"; points may be separated by
        spaces or commas and fixed points may be omitted, in which case the
        degree is the largest point mentioned unless given explicitly.  An
        image list looks like "[2,3,1,5,4]" and fixes the degree by itself.
        """
        text = text.strip()
        if not text:
            raise ValueError("empty permutation spec")
        if text.startswith("["):
            if not text.endswith("]"):
                raise ValueError(f"unterminated image list: {text!r}")
            body = text[1:-1].strip()
            images = tuple(int(tok) for tok in re.split(r"[,\s]+", body) if tok) if body else ()
            if degree is not None and degree != len(images):
                raise ValueError(f"image list has degree {len(images)}, expected {degree}")
            return cls(images)
        if not re.fullmatch(r"(\s*\([^()]*\)\s*)+", text):
            raise ValueError(f"not a permutation spec: {text!r}")
        cycles = []
        for body in _CYCLE_RE.findall(text):
            pts = [int(tok) for tok in re.split(r"[,\s]+", body.strip()) if tok]
            if pts:
                cycles.append(pts)
        maxpt = max((p for cyc in cycles for p in cyc), default=0)
        n = degree if degree is not None else maxpt
        if maxpt > n:
            raise ValueError(f"point {maxpt} exceeds degree {n}")
        images = list(range(1, n + 1))
        touched = set()
        for cyc in cycles:
            for p in cyc:
                if p < 1:
                    raise ValueError(f"points must be positive, got {p}")
                if p in touched:
                    raise ValueError(f"point {p} repeated across cycles")
                touched.add(p)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a - 1] = b
        return cls(tuple(images))


def conjugating_permutation(p: Permutation, q: Permutation) -> Optional[Permutation]:
    """A permutation g with q = g p g^{-1}, or None if none exists.

    Exists exactly when p and q share a cycle structure; built by aligning
    the canonical cycle decompositions pointwise.
    """
    if p.degree != q.degree:
        return None
    cp, cq = p.cycles(), q.cycles()
    if tuple(len(c) for c in cp) != tuple(len(c) for c in cq):
        return None
    images = [0] * p.degree
    for src, dst in zip(cp, cq):
        for a, b in zip(src, dst):
            images[a - 1] = b
    return Permutation(tuple(images))


def conjugating_isotopism(a, b):
    """Componentwise conjugator between two isotopisms.

    Returns an isotopism of the same type as ``a`` whose components g satisfy
    b = g a g^{-1} in each coordinate, or None when some component pair has
    differing cycle structures.
    """
    parts = []
    for pa, pb in zip((a.alpha, a.beta, a.gamma), (b.alpha, b.beta, b.gamma)):
        g = conjugating_permutation(pa, pb)
        if g is None:
            return None
        parts.append(g)
    return type(a)(parts[0], parts[1], parts[2])


# ----------------------------------------------------------------------
# Cycle structures
# ----------------------------------------------------------------------

_TOKEN_RE = re.compile(r"^(\d+)(?:\^(\d+))?$")


@dataclass(frozen=True)
class CycleStructure:
    """Multiset of cycle lengths of a degree-n permutation.

    counts[j - 1] is the number of j-cycles; sum of j * counts[j - 1] must
    equal the degree.
    """

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.counts)
        if any(c < 0 for c in self.counts):
            raise ValueError("negative cycle count")
        total = sum(j * c for j, c in enumerate(self.counts, start=1))
        if total != n:
            raise ValueError(f"cycle counts sum to {total}, expected degree {n}")

    @property
    def degree(self) -> int:
        return len(self.counts)

    def count(self, length: int) -> int:
        """Number of cycles of the given length."""
        if not 1 <= length <= self.degree:
            return 0
        return self.counts[length - 1]

    def support(self) -> frozenset[int]:
        """The set of cycle lengths that actually occur."""
        return frozenset(j for j, c in enumerate(self.counts, start=1) if c > 0)

    def parts(self) -> tuple[int, ...]:
        """Cycle lengths with multiplicity, in decreasing order."""
        out = []
        for j in range(self.degree, 0, -1):
            out.extend([j] * self.counts[j - 1])
        return tuple(out)

    def num_cycles(self) -> int:
        return sum(self.counts)

    def min_part(self) -> int:
        """The smallest cycle length present."""
        for j, c in enumerate(self.counts, start=1):
            if c > 0:
                return j
        raise ValueError("degree-0 structure has no parts")

    @classmethod
    def from_parts(cls, parts: Sequence[int], degree: Optional[int] = None) -> "CycleStructure":
        n = degree if degree is not None else sum(parts)
        counts = [0] * n
        for p in parts:
            if not 1 <= p <= n:
                raise ValueError(f"part {p} out of range for degree {n}")
            counts[p - 1] += 1
        return cls(tuple(counts))

    def __str__(self) -> str:
        toks = []
        for j in range(self.degree, 0, -1):
            c = self.counts[j - 1]
            if c == 1:
                toks.append(str(j))
            elif c > 1:
                toks.append(f"{j}^{c}")
        return ".".join(toks)

    @classmethod
    def parse(cls, text: str, degree: Optional[int] = None) -> "CycleStructure":
        """Parse dot-joined "L^M" tokens, M omitted when 1 (e.g. "3.2.1", "1^6")."""
        text = text.strip()
        if not text:
            raise ValueError("empty cycle-structure spec")
        parts: list[int] = []
        for tok in text.split("."):
            m = _TOKEN_RE.match(tok.strip())
            if not m:
                raise ValueError(f"bad cycle-structure token: {tok!r}")
            length = int(m.group(1))
            mult = int(m.group(2)) if m.group(2) else 1
            if length < 1 or mult < 1:
                raise ValueError(f"bad cycle-structure token: {tok!r}")
            parts.extend([length] * mult)
        n = degree if degree is not None else sum(parts)
        if sum(parts) != n:
            raise ValueError(f"parts of {text!r} sum to {sum(parts)}, expected degree {n}")
        return cls.from_parts(parts, n)


def cycle_structure(p: Permutation) -> CycleStructure:
    """Cycle structure of a permutation."""
    counts = [0] * p.degree
    for cyc in p.cycles():
        counts[len(cyc) - 1] += 1
    return CycleStructure(tuple(counts))


@dataclass(frozen=True)
class IsotopismStructure:
    """The triple of cycle structures of a row, column, and symbol permutation."""

    rows: CycleStructure
    cols: CycleStructure
    syms: CycleStructure

    def __post_init__(self) -> None:
        if not (self.rows.degree == self.cols.degree == self.syms.degree):
            raise ValueError("component degrees differ")

    @property
    def degree(self) -> int:
        return self.rows.degree

    @property
    def components(self) -> tuple[CycleStructure, CycleStructure, CycleStructure]:
        return (self.rows, self.cols, self.syms)

    def permuted(self, pi: Sequence[int]) -> "IsotopismStructure":
        """Component permutation: slot i of the result is component pi[i] of self.

        pi is a permutation of (1, 2, 3) given as a length-3 sequence, so
        permuted((2, 1, 3)) swaps the row and column structures.
        """
        comps = self.components
        if sorted(pi) != [1, 2, 3]:
            raise ValueError(f"not a permutation of (1,2,3): {pi}")
        return IsotopismStructure(comps[pi[0] - 1], comps[pi[1] - 1], comps[pi[2] - 1])

    def __str__(self) -> str:
        return f"{self.rows},{self.cols},{self.syms}"

    @classmethod
    def parse(cls, text: str, degree: Optional[int] = None) -> "IsotopismStructure":
        comps = text.split(",")
        if len(comps) != 3:
            raise ValueError(f"expected three comma-separated components: {text!r}")
        first = CycleStructure.parse(comps[0], degree)
        rest = [CycleStructure.parse(c, first.degree) for c in comps[1:]]
        return cls(first, rest[0], rest[1])


class LcmTriple(NamedTuple):
    """A triple of cycle lengths whose pairwise lcms all equal the full lcm."""

    i: int
    j: int
    k: int


# ----------------------------------------------------------------------
# Partitions and minimal-part counts
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def partitions_count(n: int) -> int:
    """The number p(n) of integer partitions of n, by Euler's pentagonal recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1
    total = 0
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 > n and g2 > n:
            break
        sign = -1 if k % 2 == 0 else 1
        if g1 <= n:
            total += sign * partitions_count(n - g1)
        if g2 <= n:
            total += sign * partitions_count(n - g2)
        k += 1
    return total


@lru_cache(maxsize=None)
def cs_nm_count(n: int, m: int) -> int:
    """Number of partitions of n whose minimal part is exactly m.

    Cases: 1 when m = n; 0 when n/2 < m < n (two parts of size > n/2 cannot
    fit); otherwise p(n - m) minus the partitions of n - m with minimal part
    below m.
    """
    if m < 1 or m > n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    if m == n:
        return 1
    if 2 * m > n:
        return 0
    return partitions_count(n - m) - sum(cs_nm_count(n - m, i) for i in range(1, m))


def partitions_desc(n: int, max_part: Optional[int] = None) -> list[tuple[int, ...]]:
    """All partitions of n as decreasing tuples, in descending lexicographic order."""
    if n < 0:
        raise ValueError("n must be non-negative")
    bound = n if max_part is None else min(max_part, n)
    if n == 0:
        return [()]
    out = []
    for first in range(bound, 0, -1):
        for rest in partitions_desc(n - first, first):
            out.append((first,) + rest)
    return out


# ----------------------------------------------------------------------
# Admissibility: which structures belong to autotopisms
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def lcm_triple_set(n: int) -> frozenset[LcmTriple]:
    """All (i, j, k) in [n]^3 with lcm(i,j) = lcm(i,k) = lcm(j,k) = lcm(i,j,k)."""
    if n < 1:
        raise ValueError("n must be positive")
    out = set()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            lij = lcm(i, j)
            for k in range(1, n + 1):
                if lcm(i, k) == lij and lcm(j, k) == lij:
                    out.add(LcmTriple(i, j, k))
    return frozenset(out)


@lru_cache(maxsize=None)
def _symbol_masks(n: int) -> dict[tuple[int, int], int]:
    """For each (i, j), the bitmask of lengths k with (i, j, k) admissible.

    Bit k-1 is set when (i, j, k) is in the lcm triple set of order n.
    """
    masks: dict[tuple[int, int], int] = {}
    for t in lcm_triple_set(n):
        masks[(t.i, t.j)] = masks.get((t.i, t.j), 0) | (1 << (t.k - 1))
    return masks


def _support_mask(parts: Iterable[int]) -> int:
    mask = 0
    for p in parts:
        mask |= 1 << (p - 1)
    return mask


def is_autotopism_structure(z: IsotopismStructure) -> bool:
    """Whether some non-empty partial Latin square admits an autotopism with this structure."""
    n = z.degree
    masks = _symbol_masks(n)
    sym_mask = _support_mask(z.syms.support())
    for i in z.rows.support():
        for j in z.cols.support():
            if masks.get((i, j), 0) & sym_mask:
                return True
    return False


def enumerate_autotopism_structures(n: int) -> list[IsotopismStructure]:
    """All admissible structures of order n.

    Components iterate over partitions in descending lexicographic order, the
    triple in row-major order over that sequence; the output order is part of
    the contract (the reference CSVs and the CLI listings rely on it).
    """
    if n < 1:
        raise ValueError("n must be positive")
    parts_list = partitions_desc(n)
    structs = [CycleStructure.from_parts(p, n) for p in parts_list]
    masks = _symbol_masks(n)
    supports = [_support_mask(p) for p in parts_list]
    out = []
    npart = len(parts_list)
    # Precompute, for each (row partition, column partition) pair, the mask of
    # admissible symbol lengths, then test symbol supports against it.
    for a in range(npart):
        sa = supports[a]
        for b in range(npart):
            sb = supports[b]
            kmask = 0
            for i in range(1, n + 1):
                if not sa & (1 << (i - 1)):
                    continue
                for j in range(1, n + 1):
                    if sb & (1 << (j - 1)):
                        kmask |= masks.get((i, j), 0)
            if not kmask:
                continue
            for c in range(npart):
                if supports[c] & kmask:
                    out.append(IsotopismStructure(structs[a], structs[b], structs[c]))
    return out


@lru_cache(maxsize=None)
def _support_weights(n: int) -> tuple[list[int], dict[int, int]]:
    """Distinct partition-support masks of order n with their multiplicities."""
    weights: dict[int, int] = {}
    for p in partitions_desc(n):
        m = _support_mask(p)
        weights[m] = weights.get(m, 0) + 1
    masks = sorted(weights)
    return masks, weights


@lru_cache(maxsize=None)
def _pair_kmask_table(n: int) -> dict[tuple[int, int], int]:
    """K(A, B): admissible-symbol mask for each ordered pair of support masks."""
    masks, _ = _support_weights(n)
    sym = _symbol_masks(n)
    lengths = list(range(1, n + 1))
    # row_or[i][B] = union of symbol masks over j in B, for a fixed row length i
    row_or: dict[tuple[int, int], int] = {}
    for i in lengths:
        for b_mask in masks:
            acc = 0
            for j in lengths:
                if b_mask & (1 << (j - 1)):
                    acc |= sym.get((i, j), 0)
            row_or[(i, b_mask)] = acc
    table: dict[tuple[int, int], int] = {}
    for a_mask in masks:
        for b_mask in masks:
            acc = 0
            for i in lengths:
                if a_mask & (1 << (i - 1)):
                    acc |= row_or[(i, b_mask)]
            table[(a_mask, b_mask)] = acc
    return table


def count_autotopism_structures(n: int) -> int:
    """|enumerate_autotopism_structures(n)| without materializing the structures.

    Groups partitions by support set; admissibility of a triple depends only
    on the three supports, so the count is a weighted sum over support pairs
    of the number of symbol partitions meeting the admissible-length mask.
    """
    masks, weights = _support_weights(n)
    table = _pair_kmask_table(n)
    hit_cache: dict[int, int] = {}

    def hits(kmask: int) -> int:
        if kmask not in hit_cache:
            hit_cache[kmask] = sum(w for m, w in weights.items() if m & kmask)
        return hit_cache[kmask]

    total = 0
    for a_mask in masks:
        wa = weights[a_mask]
        for b_mask in masks:
            total += wa * weights[b_mask] * hits(table[(a_mask, b_mask)])
    return total


def count_parastrophic_classes(n: int) -> int:
    """Number of parastrophic classes of admissible structures of order n.

    Burnside over the component-permuting action of S_3: the identity fixes
    every admissible structure, each transposition fixes those with the two
    swapped components equal, and each 3-cycle fixes those with all three
    equal.  The admissibility test is symmetric under coordinate permutation,
    so one transposition count serves for all three.
    """
    masks, weights = _support_weights(n)
    table = _pair_kmask_table(n)
    hit_cache: dict[int, int] = {}

    def hits(kmask: int) -> int:
        if kmask not in hit_cache:
            hit_cache[kmask] = sum(w for m, w in weights.items() if m & kmask)
        return hit_cache[kmask]

    full = 0
    for a_mask in masks:
        wa = weights[a_mask]
        for b_mask in masks:
            full += wa * weights[b_mask] * hits(table[(a_mask, b_mask)])
    two_equal = sum(w * hits(table[(m, m)]) for m, w in weights.items())
    all_equal = sum(w for m, w in weights.items() if m & table[(m, m)])
    numerator = full + 3 * two_equal + 2 * all_equal
    if numerator % 6:
        raise AssertionError("Burnside sum not divisible by the group order")
    return numerator // 6


_S3 = ((1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1))


def parastrophic_class_count(structures: Iterable[IsotopismStructure]) -> int:
    """Number of orbits of the given structures under component permutation.

    The input must be closed under the S_3 action; a non-closed input is
    rejected rather than silently completed.
    """
    pool = set(structures)
    reps = set()
    for z in pool:
        orbit = [z.permuted(pi) for pi in _S3]
        for member in orbit:
            if member not in pool:
                raise ValueError(
                    f"input not closed under component permutation: {member} missing"
                )
        reps.add(min(orbit, key=str))
    return len(reps)


def lower_bound_structures(n: int) -> int:
    """Sum over admissible length triples of the products of minimal-part partition counts."""
    total = 0
    for t in lcm_triple_set(n):
        total += cs_nm_count(n, t.i) * cs_nm_count(n, t.j) * cs_nm_count(n, t.k)
    return total


def structure_gcd_lcm(i: int, j: int) -> tuple[int, int]:
    """Convenience pair (gcd, lcm) used by block-size reasoning."""
    return gcd(i, j), lcm(i, j)
