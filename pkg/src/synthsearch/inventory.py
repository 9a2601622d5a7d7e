"""Purchasable building-block inventory with O(1) membership checks.

Stores normalized molecule ids only; everything upstream compares normalized
ids, so membership is a plain set lookup and the structure is immutable and
safe to share across parallel searches.
"""

from __future__ import annotations

import gzip
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

from .smiles import MalformedSmiles, Molecule, normalize

logger = logging.getLogger(__name__)


class IoError(OSError):
    """Raised when an inventory file cannot be read."""


def _digest(members: frozenset[str]) -> str:
    h = hashlib.sha256()
    for m in sorted(members):
        h.update(m.encode())
        h.update(b"\n")
    return h.hexdigest()


@dataclass(frozen=True)
class Inventory:
    """Immutable set of purchasable molecules, keyed by normalized id."""

    members: frozenset[str]
    source_digest: str
    skipped: int = 0

    @property
    def count(self) -> int:
        return len(self.members)

    def contains(self, molecule: Molecule | str) -> bool:
        mol_id = molecule.id if isinstance(molecule, Molecule) else molecule
        return mol_id in self.members

    __contains__ = contains

    @classmethod
    def from_smiles(
        cls,
        smiles: Iterable[str],
        canonicalizer: Optional[Callable[[str], str]] = None,
    ) -> "Inventory":
        members = set()
        skipped = 0
        for s in smiles:
            try:
                members.add(normalize(s, canonicalizer).id)
            except MalformedSmiles as exc:
                skipped += 1
                logger.warning("skipping malformed inventory entry %r: %s", s, exc)
        frozen = frozenset(members)
        return cls(members=frozen, source_digest=_digest(frozen), skipped=skipped)

    def dump(self, path: str | Path) -> None:
        """Write the normalized members, one per line, sorted."""
        Path(path).write_text("".join(f"{m}\n" for m in sorted(self.members)))


def load(
    path: str | Path,
    canonicalizer: Optional[Callable[[str], str]] = None,
) -> Inventory:
    """Load an inventory from a one-SMILES-per-line file (optionally gzipped).

    Lines are normalized, duplicates collapse, malformed lines are counted
    and skipped with a warning.  Loading the file produced by
    :meth:`Inventory.dump` reproduces the same member set and digest.
    """
    path = Path(path)
    try:
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "rt") as fh:  # type: ignore[operator]
            lines = [line.strip() for line in fh]
    except OSError as exc:
        raise IoError(f"cannot read inventory file {path}: {exc}") from exc
    return Inventory.from_smiles(
        (l for l in lines if l and not l.startswith("#")), canonicalizer
    )
