#!/usr/bin/env python3
"""Print the nerve/flag Betti tables along each preset's level chain."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nervelim.complexes import LambdaIndex
from nervelim.homology import betti_stabilization
from nervelim.presets import PRESETS
from nervelim.systems import build_system

for name, preset in PRESETS.items():
    _, family = preset.factory()
    system = build_system(family, max_dim=preset.max_dim)
    chain = [LambdaIndex.of(ids) for ids in preset.chain]
    table = betti_stabilization(system, chain)
    print(f"\n{name}  (nerve stabilized: {table.nerve_stabilized})")
    print(table.csv(), end="")
