"""SMILES tokenization, atom-map handling and syntactic normalization.

Everything in the engine that compares molecules or reactions goes through
the normal form produced here: atom maps stripped, dot-separated components
sorted lexicographically.  Validity is purely syntactic (tokenizable,
balanced brackets and branches, matched ring-closure digits); there is no
valence or aromaticity checking.  A real chemical canonicalizer can be
plugged in per component wherever a ``canonicalizer`` argument is accepted.

Grammar subset: organic-subset atoms (B, C, N, O, P, S, F, I, plus Cl and
Br, plus aromatic b, c, n, o, p, s), bracket atoms with optional isotope,
chirality (@/@@), H-count, charge and atom-map number, bonds ``- = # $ : / \\``,
ring closures (single digit or %NN), branches and the dot separator.
Anything else must be bracketed or is rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional


class MalformedSmiles(ValueError):
    """Raised when a string cannot be tokenized as SMILES."""


class MalformedReaction(ValueError):
    """Raised when a reaction string does not have reactants>agents>products shape."""


class TokenKind(Enum):
    BRACKET_ATOM = "bracket_atom"
    ORGANIC_ATOM = "organic_atom"
    BOND = "bond"
    RING_CLOSURE = "ring_closure"
    BRANCH = "branch"
    DOT = "dot"


# Bracket-atom interior, atom map excluded (it is stored separately so that
# tokens can be re-emitted with or without maps).  Alternation order matters:
# two-letter aromatics before single letters.
_BRACKET_RE = re.compile(
    r"(?P<isotope>\d+)?"
    r"(?P<symbol>\*|as|se|[A-Z][a-z]?|[bcnops])"
    r"(?P<chiral>@@|@)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\+|--|[+-]\d*)?"
)

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = frozenset("BCNOPSFIbcnops")
_BOND_CHARS = frozenset("-=#$:/\\")


@dataclass(frozen=True)
class SmilesToken:
    """One lexical unit of a SMILES string.

    ``text`` never contains an atom-map annotation; for bracket atoms the
    map number is kept in ``map_number`` and re-inserted on demand, so that
    joining token texts with maps re-inserted reproduces the input exactly.
    """

    kind: TokenKind
    text: str
    map_number: Optional[int] = None
    element: Optional[str] = None
    h_count: int = 0
    charge: int = 0

    def render(self, keep_maps: bool = True) -> str:
        if keep_maps and self.map_number is not None:
            return f"{self.text[:-1]}:{self.map_number}]"
        return self.text


@dataclass(frozen=True)
class Molecule:
    """A molecule keyed by its normalized SMILES string.

    Equality and hashing use ``id`` only; ``raw`` keeps the original input
    for reporting.  ``id`` is idempotent under :func:`normalize` and carries
    no atom-map numbers.
    """

    id: str
    raw: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True)
class MoleculeSet:
    """A multiset of molecule ids stored as a sorted tuple.

    Equality is order-insensitive multiset equality by construction.
    """

    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if list(self.members) != sorted(self.members):
            raise ValueError("MoleculeSet members must be sorted; use from_ids()")

    @classmethod
    def from_ids(cls, ids: Iterable[str]) -> "MoleculeSet":
        return cls(tuple(sorted(ids)))

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __str__(self) -> str:
        return ".".join(self.members)


def _parse_charge(text: str | None) -> int:
    if not text:
        return 0
    if text in ("++", "--"):
        return 2 if text == "++" else -2
    if len(text) == 1:
        return 1 if text == "+" else -1
    return int(text) if text[0] == "-" else int(text[1:] or "1")


def _parse_bracket(body: str, pos: int) -> SmilesToken:
    """Parse the interior of a bracket atom (brackets excluded)."""
    if not body:
        raise MalformedSmiles(f"empty bracket atom at position {pos}")
    map_number = None
    core = body
    if ":" in body:
        core, _, map_part = body.rpartition(":")
        if not map_part.isdigit():
            raise MalformedSmiles(f"bad atom map {body!r} at position {pos}")
        map_number = int(map_part)
    m = _BRACKET_RE.fullmatch(core)
    if m is None or not m.group("symbol"):
        raise MalformedSmiles(f"unparseable bracket atom [{body}] at position {pos}")
    hcount_text = m.group("hcount")
    h_count = 0
    if hcount_text is not None:
        h_count = int(hcount_text[1:]) if len(hcount_text) > 1 else 1
    return SmilesToken(
        kind=TokenKind.BRACKET_ATOM,
        text=f"[{core}]",
        map_number=map_number,
        element=m.group("symbol"),
        h_count=h_count,
        charge=_parse_charge(m.group("charge")),
    )


def tokenize(smiles: str) -> list[SmilesToken]:
    """Tokenize a SMILES string, or raise :class:`MalformedSmiles`.

    The token list covers the full input; unknown characters are an error,
    never silently skipped.
    """
    if not smiles:
        raise MalformedSmiles("empty SMILES string")
    if not smiles.isascii():
        raise MalformedSmiles("non-ASCII character in SMILES")

    tokens: list[SmilesToken] = []
    open_rings: set[int] = set()
    branch_depth = 0
    i = 0
    n = len(smiles)
    while i < n:
        ch = smiles[i]
        if ch == "[":
            end = smiles.find("]", i + 1)
            if end < 0:
                raise MalformedSmiles(f"unclosed bracket at position {i}")
            tokens.append(_parse_bracket(smiles[i + 1 : end], i))
            i = end + 1
        elif smiles[i : i + 2] in _ORGANIC_TWO:
            tokens.append(SmilesToken(TokenKind.ORGANIC_ATOM, smiles[i : i + 2], element=smiles[i : i + 2]))
            i += 2
        elif ch in _ORGANIC_ONE:
            tokens.append(SmilesToken(TokenKind.ORGANIC_ATOM, ch, element=ch))
            i += 1
        elif ch in _BOND_CHARS:
            tokens.append(SmilesToken(TokenKind.BOND, ch))
            i += 1
        elif ch.isdigit():
            ring = int(ch)
            open_rings.symmetric_difference_update({ring})
            tokens.append(SmilesToken(TokenKind.RING_CLOSURE, ch))
            i += 1
        elif ch == "%":
            if i + 2 >= n or not smiles[i + 1 : i + 3].isdigit():
                raise MalformedSmiles(f"%% ring closure needs two digits at position {i}")
            ring = int(smiles[i + 1 : i + 3])
            open_rings.symmetric_difference_update({ring})
            tokens.append(SmilesToken(TokenKind.RING_CLOSURE, smiles[i : i + 3]))
            i += 3
        elif ch == "(":
            branch_depth += 1
            tokens.append(SmilesToken(TokenKind.BRANCH, ch))
            i += 1
        elif ch == ")":
            branch_depth -= 1
            if branch_depth < 0:
                raise MalformedSmiles(f"unbalanced ')' at position {i}")
            if tokens and tokens[-1].text == "(":
                raise MalformedSmiles(f"empty branch at position {i}")
            tokens.append(SmilesToken(TokenKind.BRANCH, ch))
            i += 1
        elif ch == ".":
            if branch_depth > 0:
                raise MalformedSmiles(f"'.' inside branch at position {i}")
            if i == 0 or i == n - 1 or smiles[i - 1] == ".":
                raise MalformedSmiles(f"misplaced '.' at position {i}")
            tokens.append(SmilesToken(TokenKind.DOT, ch))
            i += 1
        else:
            raise MalformedSmiles(f"unexpected character {ch!r} at position {i}")

    if branch_depth != 0:
        raise MalformedSmiles("unbalanced '(' in SMILES")
    if open_rings:
        raise MalformedSmiles(f"unmatched ring closure(s): {sorted(open_rings)}")
    return tokens


def detokenize(tokens: Iterable[SmilesToken], keep_maps: bool = True) -> str:
    """Inverse of :func:`tokenize`; with ``keep_maps`` it is an exact inverse."""
    return "".join(t.render(keep_maps=keep_maps) for t in tokens)


def strip_atom_maps(smiles: str, maps: Optional[set[int]] = None) -> str:
    """Remove ``:N`` atom-map annotations from bracket atoms.

    Purely syntactic: bracket atoms whose brackets become redundant are not
    simplified.  ``maps`` restricts removal to the given map numbers;
    ``None`` removes all of them.
    """
    if maps is None:
        return detokenize(tokenize(smiles), keep_maps=False)
    out = []
    for tok in tokenize(smiles):
        keep = tok.map_number is not None and tok.map_number not in maps
        out.append(tok.render(keep_maps=keep))
    return "".join(out)


def count_atoms(smiles: str) -> int:
    """Number of atom tokens (bracket + organic subset).

    Hydrogen counts inside brackets are annotations, not atom tokens.
    """
    return sum(
        1
        for t in tokenize(smiles)
        if t.kind in (TokenKind.BRACKET_ATOM, TokenKind.ORGANIC_ATOM)
    )


def atom_maps(smiles: str) -> list[int]:
    """All atom-map numbers in order of appearance (with repeats)."""
    return [t.map_number for t in tokenize(smiles) if t.map_number is not None]


def normalize(smiles: str, canonicalizer: Optional[Callable[[str], str]] = None) -> Molecule:
    """Normalize to the engine-wide molecule identity.

    Strips atom maps, optionally canonicalizes each dot-separated component,
    then sorts the components lexicographically and rejoins them.  The
    strip -> canonicalize -> sort order is fixed; only the per-component
    transform is pluggable (default is the identity).
    """
    stripped = strip_atom_maps(smiles)
    components = stripped.split(".")
    if canonicalizer is not None:
        components = [canonicalizer(c) for c in components]
    return Molecule(id=".".join(sorted(components)), raw=smiles)


def parse_reaction(reaction_smiles: str) -> tuple[list[str], list[str], list[str]]:
    """Split ``reactants>agents>products`` into component lists.

    Accepts the agent-free ``reactants>>products`` form.  Raises
    :class:`MalformedReaction` on the wrong number of ``>`` fields.
    """
    fields = reaction_smiles.split(">")
    if len(fields) != 3:
        raise MalformedReaction(
            f"expected reactants>agents>products, got {len(fields)} field(s)"
        )
    return tuple(f.split(".") if f else [] for f in fields)  # type: ignore[return-value]


@dataclass(frozen=True)
class MapDiagnostics:
    """Summary of atom-map structure across the two sides of a reaction."""

    one_side_only_maps: frozenset[int]
    double_mapped: bool
    unmapped: bool
    contributing_reactants: tuple[bool, ...]


def map_diagnostics(reaction_smiles: str) -> MapDiagnostics:
    """Analyze atom maps of a reaction string.

    Reports map numbers appearing on exactly one of the two sides, whether
    any map occurs twice within one side, whether either side lacks maps
    entirely, and per reactant whether it shares at least one map number
    with the product side.  Agents are ignored.
    """
    reactants, _agents, products = parse_reaction(reaction_smiles)
    per_reactant = [atom_maps(r) for r in reactants]
    product_maps: list[int] = []
    for p in products:
        product_maps.extend(atom_maps(p))

    reactant_maps = [m for maps in per_reactant for m in maps]
    r_set, p_set = set(reactant_maps), set(product_maps)

    def _has_dup(values: list[int]) -> bool:
        return len(values) != len(set(values))

    return MapDiagnostics(
        one_side_only_maps=frozenset(r_set ^ p_set),
        double_mapped=_has_dup(reactant_maps) or _has_dup(product_maps),
        unmapped=not r_set or not p_set,
        contributing_reactants=tuple(bool(set(m) & p_set) for m in per_reactant),
    )
