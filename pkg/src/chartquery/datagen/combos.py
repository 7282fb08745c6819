"""Chart configuration combinations drawn from the domain vocabularies.

A combo fixes everything a chart document needs except the synthesized
values: the domain, the mark, the temporal granularity (None means a
categorical snapshot), which quantitative columns appear, and how many
category choices to keep.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from chartquery.datagen.vocabload import Domain, load_domains

MARKS = ("line", "area", "bar")


@dataclass(frozen=True)
class Combo:
    id: str
    domain: str
    mark: str
    granularity: str | None
    quant_idx: tuple[int, ...]
    n_choices: int | None = None  # None keeps every choice

    @property
    def temporal(self) -> bool:
        return self.granularity is not None


def _all_combos(domains: list[Domain]) -> list[Combo]:
    out: list[Combo] = []
    for dom in domains:
        for qi in range(len(dom.quants)):
            for mark in MARKS:
                for gran in dom.granularities:
                    out.append(
                        Combo(
                            id=f"{dom.name}-{mark}-{gran}-q{qi}",
                            domain=dom.name,
                            mark=mark,
                            granularity=gran,
                            quant_idx=(qi,),
                        )
                    )
                    if mark == "line":
                        # trimmed variant keeps charts with fewer series around
                        out.append(
                            Combo(
                                id=f"{dom.name}-{mark}-{gran}-q{qi}-k4",
                                domain=dom.name,
                                mark=mark,
                                granularity=gran,
                                quant_idx=(qi,),
                                n_choices=4,
                            )
                        )
            out.append(
                Combo(
                    id=f"{dom.name}-bar-snapshot-q{qi}",
                    domain=dom.name,
                    mark="bar",
                    granularity=None,
                    quant_idx=(qi,),
                )
            )
        if len(dom.quants) >= 2:
            out.append(
                Combo(
                    id=f"{dom.name}-bar-snapshot-q01",
                    domain=dom.name,
                    mark="bar",
                    granularity=None,
                    quant_idx=(0, 1),
                )
            )
    return out


def gen_combos(
    domains: list[Domain] | None = None, n: int = 486, seed: int = 11
) -> list[Combo]:
    """Deterministic selection of n chart configurations."""
    if domains is None:
        domains = load_domains()
    full = _all_combos(domains)
    full.sort(key=lambda c: c.id)
    if len(full) <= n:
        return full
    picked = random.Random(seed).sample(full, n)
    picked.sort(key=lambda c: c.id)
    return picked
