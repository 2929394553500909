"""Exact symbolic *-algebra of graph-family generators and tail unitaries.

Elements are finite Gaussian-rational combinations of normal monomials
``s_alpha t^k s_beta*`` where ``alpha`` and ``beta`` are paths with a common
source, and a nonzero power ``k`` of a tail unitary requires that source to
be the tail's sink.  ``p_w`` is the degenerate monomial with two empty paths
based at ``w``.

Products are normalized by a local, length-reducing rewrite system over
words in the atoms ``p(w)``, ``s(e)``, ``s*(e)``, ``t(ns)^k``:

* ``s*(e) s(f) -> delta_{ef} p(source(e))``
* ``p``'s merge into adjacent atoms or kill them on a vertex mismatch
* ``t``-powers of one tail merge; ``t t* = t* t = p(sink)``
* ``s(e) s*(e) -> p(range(e))`` when ``e`` is the unique receiver at its
  range (sound by the receiver-sum relation; sums over several receivers
  are never contracted)
* adjacent atoms whose implicit boundary projections disagree collapse to
  zero (e.g. non-composable edges, or tail unitaries of different tails)

Every rule shortens the word, so rewriting terminates; confluence is
exercised in the test suite by exhausting all rewrite orders on small
words.  Coefficients are exact; no floating point enters this module.
"""

from __future__ import annotations

import abc
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .graph import Graph

Atom = tuple
Word = tuple  # tuple of atoms

#: sentinel distinct from any word: the zero element
ZERO = None


class ContextMismatchError(ValueError):
    """A term mentions a vertex, edge, or tail unknown to the context."""


class UnrepresentableTermError(ValueError):
    """An irreducible word falls outside the s t^k s* monomial span.

    This can only happen when a path dives through a tail sink next to a
    nonzero unitary power; no verification required here produces such
    words, but arbitrary word input can.
    """


class CK3ExpansionError(ValueError):
    """Receiver-sum expansion requested at a vertex with no receivers."""


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    real: Fraction = Fraction(0)
    imag: Fraction = Fraction(0)

    @classmethod
    def of(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(Fraction(value))
        raise TypeError(f"cannot coerce {value!r} to a Gaussian rational")

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.real + other.real, self.imag + other.imag)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.real - other.real, self.imag - other.imag)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.real * other.real - self.imag * other.imag,
            self.real * other.imag + self.imag * other.real,
        )

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.real, -self.imag)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.real, -self.imag)

    @property
    def is_zero(self) -> bool:
        return self.real == 0 and self.imag == 0

    def __complex__(self) -> complex:
        return complex(float(self.real), float(self.imag))

    def __str__(self) -> str:
        if self.imag == 0:
            return str(self.real)
        im = "i" if self.imag == 1 else "-i" if self.imag == -1 else f"{self.imag}i"
        if self.real == 0:
            return im
        sign = "+" if self.imag > 0 else "-"
        mag = abs(self.imag)
        im_part = "i" if mag == 1 else f"{mag}i"
        return f"({self.real}{sign}{im_part})"


ONE = GaussianRational(Fraction(1))


class StarContext(abc.ABC):
    """Lookups the rewrite rules need about the ambient graph and its tails.

    ``receivers`` must answer for the *full* graph the algebra lives over,
    including lazily generated tail levels, since the unique-receiver
    contraction is only sound against the full receiver set.
    """

    @abc.abstractmethod
    def has_vertex(self, v: str) -> bool: ...

    @abc.abstractmethod
    def edge_source(self, e: str) -> str: ...

    @abc.abstractmethod
    def edge_range(self, e: str) -> str: ...

    @abc.abstractmethod
    def receivers(self, v: str) -> frozenset[str]: ...

    @abc.abstractmethod
    def sink_vertex(self, namespace: str) -> str: ...

    @abc.abstractmethod
    def sink_namespace(self, v: str) -> str | None: ...

    def check_vertex(self, v: str) -> str:
        if not self.has_vertex(v):
            raise ContextMismatchError(f"unknown vertex {v!r}")
        return v

    def unique_receiver(self, v: str) -> str | None:
        rec = self.receivers(v)
        if len(rec) == 1:
            (e,) = rec
            return e
        return None


class GraphStarContext(StarContext):
    """Plain graph context: no tails, no unitaries."""

    def __init__(self, graph: Graph):
        self.graph = graph

    def has_vertex(self, v: str) -> bool:
        return self.graph.has_vertex(v)

    def edge_source(self, e: str) -> str:
        try:
            return self.graph.edge(e).source
        except Exception as exc:
            raise ContextMismatchError(str(exc)) from exc

    def edge_range(self, e: str) -> str:
        try:
            return self.graph.edge(e).range
        except Exception as exc:
            raise ContextMismatchError(str(exc)) from exc

    def receivers(self, v: str) -> frozenset[str]:
        try:
            return self.graph.receivers(v)
        except Exception as exc:
            raise ContextMismatchError(str(exc)) from exc

    def sink_vertex(self, namespace: str) -> str:
        raise ContextMismatchError(f"no tail named {namespace!r} in a plain graph context")

    def sink_namespace(self, v: str) -> str | None:
        return None

    def ck_family_graph(self) -> Graph:
        return self.graph


@dataclass(frozen=True)
class NormalMonomial:
    """``s_alpha t^power s_beta*`` with ``source = s(alpha) = s(beta)``.

    ``alpha == beta == ()`` with ``power == 0`` is the projection at
    ``source``; a nonzero power requires ``source`` to be a tail sink.
    """

    alpha: tuple[str, ...]
    power: int
    beta: tuple[str, ...]
    source: str

    @property
    def is_projection(self) -> bool:
        return not self.alpha and not self.beta and self.power == 0

    def adjoint(self) -> "NormalMonomial":
        return NormalMonomial(self.beta, -self.power, self.alpha, self.source)

    def sort_key(self):
        return (len(self.alpha), self.alpha, self.power, len(self.beta), self.beta, self.source)


class CKTerm:
    """Immutable finite combination of normal monomials.

    Zero coefficients are never stored; equality is exact coefficientwise
    equality on the stored monomials.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[NormalMonomial, GaussianRational] | None = None):
        clean = {}
        for m, c in (coeffs or {}).items():
            c = GaussianRational.of(c)
            if not c.is_zero:
                clean[m] = c
        self._coeffs = clean

    @classmethod
    def zero(cls) -> "CKTerm":
        return cls()

    @classmethod
    def of(cls, monomial: NormalMonomial, coeff=1) -> "CKTerm":
        return cls({monomial: GaussianRational.of(coeff)})

    def items(self) -> Iterator[tuple[NormalMonomial, GaussianRational]]:
        return iter(sorted(self._coeffs.items(), key=lambda mc: mc[0].sort_key()))

    def monomials(self) -> list[NormalMonomial]:
        return sorted(self._coeffs, key=NormalMonomial.sort_key)

    def coefficient(self, m: NormalMonomial) -> GaussianRational:
        return self._coeffs.get(m, GaussianRational())

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    def __add__(self, other: "CKTerm") -> "CKTerm":
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            out[m] = out.get(m, GaussianRational()) + c
        return CKTerm(out)

    def __sub__(self, other: "CKTerm") -> "CKTerm":
        return self + other.scale(-1)

    def scale(self, factor) -> "CKTerm":
        factor = GaussianRational.of(factor)
        return CKTerm({m: c * factor for m, c in self._coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, CKTerm) and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(tuple((m, c) for m, c in self.items()))

    def __repr__(self) -> str:
        return f"CKTerm({dict(self._coeffs)!r})"


# ---------------------------------------------------------------------------
# word-level rewriting


def _atom_check(ctx: StarContext, atom: Atom) -> None:
    tag = atom[0]
    if tag == "p":
        ctx.check_vertex(atom[1])
    elif tag in ("s", "s*"):
        ctx.edge_source(atom[1])
    elif tag == "t":
        if atom[2] == 0:
            raise ValueError("tail unitary power must be nonzero")
        ctx.sink_vertex(atom[1])
    else:
        raise ValueError(f"unknown atom tag {tag!r}")


def reduce_pair(ctx: StarContext, a: Atom, b: Atom):
    """One rewrite step on an adjacent atom pair.

    Returns a single replacement atom, ``ZERO`` for an annihilating pair, or
    ``"keep"`` when no rule applies.
    """
    ta, tb = a[0], b[0]
    if ta == "p":
        w = a[1]
        if tb == "p":
            return a if w == b[1] else ZERO
        if tb == "s":
            return b if w == ctx.edge_range(b[1]) else ZERO
        if tb == "s*":
            return b if w == ctx.edge_source(b[1]) else ZERO
        if tb == "t":
            return b if w == ctx.sink_vertex(b[1]) else ZERO
    if tb == "p":
        w = b[1]
        if ta == "s":
            return a if w == ctx.edge_source(a[1]) else ZERO
        if ta == "s*":
            return a if w == ctx.edge_range(a[1]) else ZERO
        if ta == "t":
            return a if w == ctx.sink_vertex(a[1]) else ZERO
    if ta == "s*" and tb == "s":
        return ("p", ctx.edge_source(a[1])) if a[1] == b[1] else ZERO
    if ta == "s" and tb == "s*":
        if ctx.edge_source(a[1]) != ctx.edge_source(b[1]):
            return ZERO
        if a[1] == b[1] and ctx.unique_receiver(ctx.edge_range(a[1])) == a[1]:
            return ("p", ctx.edge_range(a[1]))
        return "keep"
    if ta == "s" and tb == "s":
        return "keep" if ctx.edge_source(a[1]) == ctx.edge_range(b[1]) else ZERO
    if ta == "s*" and tb == "s*":
        return "keep" if ctx.edge_range(a[1]) == ctx.edge_source(b[1]) else ZERO
    if ta == "t" and tb == "t":
        if a[1] != b[1]:
            return ZERO
        k = a[2] + b[2]
        return ("t", a[1], k) if k else ("p", ctx.sink_vertex(a[1]))
    if ta == "s" and tb == "t":
        return "keep" if ctx.edge_source(a[1]) == ctx.sink_vertex(b[1]) else ZERO
    if ta == "t" and tb == "s*":
        return "keep" if ctx.edge_source(b[1]) == ctx.sink_vertex(a[1]) else ZERO
    if ta == "t" and tb == "s":
        return "keep" if ctx.edge_range(b[1]) == ctx.sink_vertex(a[1]) else ZERO
    if ta == "s*" and tb == "t":
        return "keep" if ctx.edge_range(a[1]) == ctx.sink_vertex(b[1]) else ZERO
    raise ValueError(f"unhandled atom pair {a!r}, {b!r}")


def reduce_word_at(ctx: StarContext, word: Word, i: int):
    """Apply the pair rule at position ``i``; ``"keep"`` if none applies."""
    step = reduce_pair(ctx, word[i], word[i + 1])
    if step == "keep":
        return "keep"
    if step is ZERO:
        return ZERO
    return word[:i] + (step,) + word[i + 2 :]


def normalize_word(ctx: StarContext, word: Iterable[Atom]):
    """Leftmost-first rewriting to an irreducible word, or ``ZERO``."""
    w = list(word)
    for atom in w:
        _atom_check(ctx, atom)
    if not w:
        raise ValueError("empty word has no meaning in a non-unital algebra")
    i = 0
    while i < len(w) - 1:
        step = reduce_pair(ctx, w[i], w[i + 1])
        if step == "keep":
            i += 1
            continue
        if step is ZERO:
            return ZERO
        w[i : i + 2] = [step]
        i = max(i - 1, 0)
    return tuple(w)


def word_of_monomial(ctx: StarContext, m: NormalMonomial) -> Word:
    atoms: list[Atom] = [("s", e) for e in m.alpha]
    if m.power:
        ns = ctx.sink_namespace(m.source)
        if ns is None:
            raise ContextMismatchError(f"monomial source {m.source!r} is not a tail sink")
        atoms.append(("t", ns, m.power))
    atoms.extend(("s*", e) for e in reversed(m.beta))
    if not atoms:
        atoms.append(("p", m.source))
    return tuple(atoms)


def monomial_of_word(ctx: StarContext, word: Word) -> NormalMonomial:
    """Parse an irreducible word back into a normal monomial."""
    if len(word) == 1 and word[0][0] == "p":
        return NormalMonomial((), 0, (), ctx.check_vertex(word[0][1]))
    i = 0
    alpha: list[str] = []
    while i < len(word) and word[i][0] == "s":
        alpha.append(word[i][1])
        i += 1
    power = 0
    sink: str | None = None
    if i < len(word) and word[i][0] == "t":
        power = word[i][2]
        sink = ctx.sink_vertex(word[i][1])
        i += 1
    beta_rev: list[str] = []
    while i < len(word) and word[i][0] == "s*":
        beta_rev.append(word[i][1])
        i += 1
    if i != len(word):
        raise UnrepresentableTermError(
            f"irreducible word is not of the form s..s t^k s*..s*: {word!r}"
        )
    beta = tuple(reversed(beta_rev))
    if power:
        source = sink  # type: ignore[assignment]
    elif alpha:
        source = ctx.edge_source(alpha[-1])
    else:
        source = ctx.edge_source(beta[-1])
    return NormalMonomial(tuple(alpha), power, beta, source)


# ---------------------------------------------------------------------------
# term-level operations


def make_monomial(
    ctx: StarContext,
    alpha: Iterable[str] = (),
    power: int = 0,
    beta: Iterable[str] = (),
    source: str | None = None,
) -> NormalMonomial:
    """Validated monomial constructor for callers assembling terms by hand."""
    alpha, beta = tuple(alpha), tuple(beta)

    def path_source(path: tuple[str, ...]) -> str | None:
        for i in range(len(path) - 1):
            if ctx.edge_source(path[i]) != ctx.edge_range(path[i + 1]):
                raise ValueError(f"edges do not compose: {path!r}")
        return ctx.edge_source(path[-1]) if path else None

    sa, sb = path_source(alpha), path_source(beta)
    candidates = {s for s in (sa, sb, source) if s is not None}
    if len(candidates) != 1:
        raise ValueError(f"inconsistent or missing monomial source: {candidates!r}")
    (src,) = candidates
    ctx.check_vertex(src)
    if power and ctx.sink_namespace(src) is None:
        raise ValueError(f"nonzero unitary power requires a tail sink source, got {src!r}")
    return NormalMonomial(alpha, power, beta, src)


def projection(ctx: StarContext, v: str) -> CKTerm:
    return CKTerm.of(NormalMonomial((), 0, (), ctx.check_vertex(v)))


def isometry(ctx: StarContext, e: str) -> CKTerm:
    return CKTerm.of(NormalMonomial((e,), 0, (), ctx.edge_source(e)))


def tail_unitary(ctx: StarContext, namespace: str, power: int = 1) -> CKTerm:
    if power == 0:
        return projection(ctx, ctx.sink_vertex(namespace))
    return CKTerm.of(NormalMonomial((), power, (), ctx.sink_vertex(namespace)))


def path_isometry(ctx: StarContext, edges: Iterable[str]) -> CKTerm:
    edges = tuple(edges)
    if not edges:
        raise ValueError("path isometry needs at least one edge")
    return CKTerm.of(make_monomial(ctx, alpha=edges))


def term_of_word(ctx: StarContext, word: Iterable[Atom], coeff=1) -> CKTerm:
    nf = normalize_word(ctx, word)
    if nf is ZERO:
        return CKTerm.zero()
    return CKTerm.of(monomial_of_word(ctx, nf), coeff)


def multiply(a: CKTerm, b: CKTerm, ctx: StarContext) -> CKTerm:
    """Product in normal form, by concatenating and rewriting monomial words."""
    out: dict[NormalMonomial, GaussianRational] = {}
    for m1, c1 in a.items():
        w1 = word_of_monomial(ctx, m1)
        for m2, c2 in b.items():
            nf = normalize_word(ctx, w1 + word_of_monomial(ctx, m2))
            if nf is ZERO:
                continue
            m = monomial_of_word(ctx, nf)
            out[m] = out.get(m, GaussianRational()) + c1 * c2
    return CKTerm(out)


def adjoint(a: CKTerm) -> CKTerm:
    return CKTerm({m.adjoint(): c.conjugate() for m, c in a.items()})


def expand_ck3(term: CKTerm, v: str, ctx: StarContext) -> CKTerm:
    """Rewrite each occurrence of ``p_v`` into its receiver sum.

    The substitution is literal: resulting ``s_e s_e*`` monomials are not
    re-contracted even at unique-receiver vertices, so the output exhibits
    the receiver-sum side of the relation as written.
    """
    ctx.check_vertex(v)
    rec = sorted(ctx.receivers(v))
    if not rec:
        raise CK3ExpansionError(f"vertex {v!r} has no receivers; the relation imposes nothing")
    target = NormalMonomial((), 0, (), v)
    expansion = CKTerm(
        {NormalMonomial((e,), 0, (e,), ctx.edge_source(e)): ONE for e in rec}
    )
    out = CKTerm.zero()
    for m, c in term.items():
        out = out + (expansion.scale(c) if m == target else CKTerm.of(m, c))
    return out


# ---------------------------------------------------------------------------
# term grammar: rendering and parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<atom>[pst]\*?)\((?P<id>[^()\s]+)\)(?:\^(?P<exp>-?\d+))?"
    r"|(?P<num>\d+(?:/\d+)?)(?P<numi>i)?"
    r"|(?P<i>i)"
    r"|(?P<op>[+\-()]))"
)


def monomial_to_str(m: NormalMonomial, ctx: StarContext) -> str:
    if m.is_projection:
        return f"p({m.source})"
    parts = [f"s({e})" for e in m.alpha]
    if m.power:
        ns = ctx.sink_namespace(m.source)
        sym = "t" if m.power > 0 else "t*"
        k = abs(m.power)
        parts.append(f"{sym}({ns})" + (f"^{k}" if k != 1 else ""))
    parts.extend(f"s*({e})" for e in reversed(m.beta))
    return " ".join(parts)


def term_to_str(term: CKTerm, ctx: StarContext) -> str:
    if term.is_zero:
        return "0"
    chunks = []
    for m, c in term.items():
        ms = monomial_to_str(m, ctx)
        if c == ONE:
            chunks.append(ms)
        else:
            chunks.append(f"{c} {ms}")
    return " + ".join(chunks)


class TermParseError(ValueError):
    pass


class _TermParser:
    """Recursive-descent parser for the term grammar.

    sum := ['-'] product (('+'|'-') product)* ; product := factor+ ;
    factor := coefficient | atom | '(' sum ')'.  Coefficients are rationals
    with an optional trailing ``i``; ``t`` atoms take an optional integer
    exponent.
    """

    def __init__(self, ctx: StarContext, text: str):
        self.ctx = ctx
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> list[tuple[str, object]]:
        tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise TermParseError(f"unexpected input at position {pos}: {text[pos:pos+20]!r}")
                break
            pos = m.end()
            if m.group("atom"):
                exp = int(m.group("exp")) if m.group("exp") else 1
                tokens.append(("atom", (m.group("atom"), m.group("id"), exp)))
            elif m.group("num"):
                frac = Fraction(m.group("num"))
                if m.group("numi"):
                    tokens.append(("coeff", GaussianRational(Fraction(0), frac)))
                else:
                    tokens.append(("coeff", GaussianRational(frac)))
            elif m.group("i"):
                tokens.append(("coeff", GaussianRational(Fraction(0), Fraction(1))))
            else:
                tokens.append(("op", m.group("op")))
        return tokens

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def parse(self) -> CKTerm:
        scalar, term = self.parse_sum()
        if self.peek() is not None:
            raise TermParseError(f"trailing tokens at {self.pos}")
        if term is None:
            if scalar.is_zero:
                return CKTerm.zero()
            raise TermParseError("a bare scalar is not a term in a non-unital algebra")
        return term

    # sums and products carry either a pure scalar (term part None) or a
    # term; this lets parenthesized Gaussian rationals like (1+i) act as
    # coefficients while parenthesized term sums distribute over products

    def parse_sum(self) -> tuple[GaussianRational, CKTerm | None]:
        sign = 1
        if self.peek() == ("op", "-"):
            self.pos += 1
            sign = -1
        total_scalar, total_term = self.parse_product()
        total_scalar = total_scalar * GaussianRational.of(sign)
        if total_term is not None:
            total_term = total_term.scale(sign)
        while True:
            tok = self.peek()
            if tok not in (("op", "+"), ("op", "-")):
                return total_scalar, total_term
            self.pos += 1
            sign = 1 if tok == ("op", "+") else -1
            scalar, term = self.parse_product()
            if (term is None) != (total_term is None):
                raise TermParseError("cannot add a bare scalar to a term")
            if term is None:
                total_scalar = total_scalar + scalar * GaussianRational.of(sign)
            else:
                total_term = total_term + term.scale(sign)

    def parse_product(self) -> tuple[GaussianRational, CKTerm | None]:
        scalar = ONE
        term: CKTerm | None = None
        empty = True
        while True:
            tok = self.peek()
            if tok == ("op", "-") and empty:
                # unary minus, e.g. the coefficient "-i"
                self.pos += 1
                scalar = scalar * GaussianRational.of(-1)
                empty = False
                continue
            if tok is None or tok in (("op", "+"), ("op", "-"), ("op", ")")):
                break
            kind, value = tok
            self.pos += 1
            empty = False
            if kind == "coeff":
                scalar = scalar * value
            elif kind == "atom":
                factor = self._atom_term(value)
                term = factor if term is None else multiply(term, factor, self.ctx)
            elif tok == ("op", "("):
                inner_scalar, inner_term = self.parse_sum()
                if self.peek() != ("op", ")"):
                    raise TermParseError("unbalanced parenthesis")
                self.pos += 1
                if inner_term is None:
                    scalar = scalar * inner_scalar
                else:
                    term = inner_term if term is None else multiply(term, inner_term, self.ctx)
            else:
                raise TermParseError(f"unexpected token {tok!r}")
        if empty:
            raise TermParseError("empty product")
        if term is None:
            return scalar, None
        return ONE, term.scale(scalar)

    def _atom_term(self, value) -> CKTerm:
        sym, name, exp = value
        if sym == "p":
            if exp != 1:
                raise TermParseError("exponents are only supported on t atoms")
            return projection(self.ctx, name)
        if sym == "s":
            if exp != 1:
                raise TermParseError("exponents are only supported on t atoms")
            return isometry(self.ctx, name)
        if sym == "s*":
            if exp != 1:
                raise TermParseError("exponents are only supported on t atoms")
            return adjoint(isometry(self.ctx, name))
        if sym == "t":
            return tail_unitary(self.ctx, name, exp)
        if sym == "t*":
            return tail_unitary(self.ctx, name, -exp)
        raise TermParseError(f"unknown atom {sym!r}")


def parse_term(text: str, ctx: StarContext) -> CKTerm:
    text = text.strip()
    if text == "0":
        return CKTerm.zero()
    return _TermParser(ctx, text).parse()
