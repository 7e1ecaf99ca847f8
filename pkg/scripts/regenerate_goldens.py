"""
Golden File Script for exdyn
Rewrites the files under tests/golden from the current renderer and classifier. Run it after an
intended change to the palette, the PPM writer or the basin classifier, then review the diff
before committing.
"""

import json
import os
import shutil
import sys
import tempfile

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

import exdyn  # noqa: E402
from core.basin_grid import ClassifyParams, GridSpec, compute_basins  # noqa: E402
from core.complex_map import parse_map  # noqa: E402
from utils.render import build_palette, render, write_ppm  # noqa: E402

GOLDEN_DIR = os.path.join(ROOT, 'tests', 'golden')


def black_pixel():
    """1x1 all-black image"""
    return np.zeros((1, 1, 3), dtype=np.uint8)


def escape_window():
    """z^2-1 under the period-2 externology on a window that escapes entirely"""
    grid = compute_basins(parse_map('z^2-1'), GridSpec(2, 2, (2.5, 3.5, 2.5, 3.5)), 2,
                          ClassifyParams(max_iterations=50, workers=1))
    return render(grid, build_palette(grid.cycles))


GOLDENS = {
    'black_1x1.ppm': black_pixel,
    'escape_2x2.ppm': escape_window,
}

# z^2-1 under the period-2 externology, 32x32 over [-2, 2]^2, through the command line
BASINS_GOLDEN = 'basins_z2m1_p2_32'
BASINS_ARGS = ['basins', '--map', 'z^2-1', '--period', '2', '--grid', '32x32', '--window', '-2,2,-2,2',
               '--max-iterations', '200', '--workers', '1']


def basins_run():
    """Image and stats of BASINS_ARGS; the stats keep everything but the cycle list,
    whose root digits vary with the platform's floating point"""
    with tempfile.TemporaryDirectory() as scratch:
        image = os.path.join(scratch, 'basins.ppm')
        stats = os.path.join(scratch, 'basins.json')
        if exdyn.main(BASINS_ARGS + ['--out', image, '--stats', stats]) != 0:
            raise SystemExit("the basins run failed; see the log above")
        shutil.copyfile(image, os.path.join(GOLDEN_DIR, BASINS_GOLDEN + '.ppm'))
        with open(stats, 'r') as handle:
            data = json.load(handle)
    data.pop('cycles')
    with open(os.path.join(GOLDEN_DIR, BASINS_GOLDEN + '.json'), 'w') as handle:
        handle.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def main():
    """Regenerate every golden file"""
    print("=" * 60)
    print("exdyn - Golden File Regeneration")
    print("=" * 60)
    os.makedirs(GOLDEN_DIR, exist_ok=True)
    for name, build in GOLDENS.items():
        path = os.path.join(GOLDEN_DIR, name)
        write_ppm(build(), path)
        print(f"  - Wrote {name} ({os.path.getsize(path)} bytes)")
    basins_run()
    print(f"  - Wrote {BASINS_GOLDEN}.ppm and {BASINS_GOLDEN}.json")
    print("Done. Review the diff before committing.")


if __name__ == '__main__':
    main()
