"""Format downloaded river-flow records into the CSVs the river check reads.

The data are not bundled and nothing is fetched over the network. Obtain the
annual mean flows for 1861-1956 yourself (Hipel and McLeod, 1994, list the
series: Danube at Orshava, Gota near Sjotop-Vannersburg, Mississippi near
St. Louis, Rhine near Basle), save each as a two-column ``year,flow`` CSV in
1000 m^3/s, then run

    python3 scripts/format_river_data.py --gota g.csv --rhine r.csv \
        --danube d.csv --mississippi m.csv [--out data/rivers]

Each input is checked for exactly the years 1861..1956 and written as
``<out>/<river>.csv`` with a ``year,flow`` header. Point ``ENTROPLIN_RIVER_DIR``
at ``<out>`` if it is not ``data/rivers``.
"""

import argparse
import sys
from pathlib import Path

from entroplin.io import read_series_csv

RIVERS = ("gota", "rhine", "danube", "mississippi")
YEARS = list(range(1861, 1957))


def main(argv=None):
    ap = argparse.ArgumentParser(description="format annual river-flow CSVs")
    for r in RIVERS:
        ap.add_argument(f"--{r}", required=True, help=f"year,flow CSV for the {r.title()}")
    ap.add_argument("--out", default="data/rivers")
    ap.add_argument("--factor", type=float, default=1.0, help="multiply flows, e.g. 1e-3 for m^3/s input")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for r in RIVERS:
        sf = read_series_csv(getattr(args, r))
        years = [int(float(y)) for y in sf.labels or ()]
        if years != YEARS:
            sys.exit(f"{sf.source}: expected the years 1861..1956 in order in the first column")
        with (out / f"{r}.csv").open("w") as fh:
            fh.write("year,flow\n")
            for y, v in zip(years, sf.values * args.factor):
                fh.write(f"{y},{float(v)!r}\n")
        print(f"wrote {out / (r + '.csv')} ({sf.values.size} values)")


if __name__ == "__main__":
    main()
