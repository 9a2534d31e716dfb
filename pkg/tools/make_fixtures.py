# tools/make_fixtures.py
# Tulis ulang semua fixture di data/fixtures + checksums.json.
# Jalankan dari root repo:  python tools/make_fixtures.py [folder_tujuan]
from __future__ import annotations
import sys
from math import sqrt
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import numpy as np

from ssr_core.data_io import FIXTURES, FIXTURES_DIR, write_checksums, write_document
from ssr_core.fock import BlockedDensity, BlockedPureState, SectorSpace

ONE = SectorSpace((1, 1))
TWO = SectorSpace((1, 2, 1))
H = 1 / sqrt(2)


def build_all() -> dict:
    phi_plus = BlockedPureState(1, ONE, ONE, {0: [[H]], 1: [[H]]})
    return {
        "biased_pair": BlockedPureState(1, ONE, ONE, {0: [[sqrt(1 / 6)]], 1: [[sqrt(5 / 6)]]}),
        "phi_plus": phi_plus,
        "phi_minus": BlockedPureState(1, ONE, ONE, {0: [[H]], 1: [[-H]]}),
        # 1/4 (|00><00| + |11><11|) + 1/2 phi+ phi+^dagger
        "mixed_rho": BlockedDensity(ONE, ONE, {
            0: (0.25, [[1.0]]),
            1: (0.5, 0.5 * np.ones((2, 2))),
            2: (0.25, [[1.0]]),
        }),
        "singlet_const": BlockedPureState(2, TWO, TWO, {1: np.array([[0, H], [H, 0]])}),
        "product_01": BlockedPureState(1, ONE, ONE, {0: [[1.0]]}),
    }


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else FIXTURES_DIR
    for name, obj in build_all().items():
        p = write_document(obj, out_dir / FIXTURES[name])
        print(f"ditulis: {p}")
    sums = write_checksums(out_dir)
    print(f"checksums.json: {len(sums)} file")


if __name__ == "__main__":
    main()
