"""Lookup-table model backed by a TSV file.

Format: ``product<TAB>reactants(dot-joined)<TAB>probability`` with one
prediction per line, grouped by product; rank is file order.  Product keys
are normalized on load so that queries by normalized id resolve regardless
of atom maps or component order in the file.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional

from ..smiles import Molecule, normalize
from .base import BackwardModel, RawPrediction


class FileBackedModel(BackwardModel):
    def __init__(
        self,
        path: str | Path,
        canonicalizer: Optional[Callable[[str], str]] = None,
        name: Optional[str] = None,
    ) -> None:
        path = Path(path)
        self.name = name or f"file:{path.name}"
        self._table: dict[str, list[RawPrediction]] = {}
        for line_no, line in enumerate(path.read_text().splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 tab-separated fields")
            product, reactants, probability = parts
            key = normalize(product, canonicalizer).id
            self._table.setdefault(key, []).append(
                RawPrediction(tuple(reactants.split(".")), float(probability))
            )

    def query(self, product: Molecule, num_results: int) -> list[RawPrediction]:
        return self._table.get(product.id, [])[:num_results]
