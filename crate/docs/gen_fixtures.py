"""Batch driver for docs/gen_fixture.gp using cypari2 (pip install cypari2).

    python3 docs/gen_fixtures.py table     # the ten p < 3000 fixtures with n_p >= 3
    python3 docs/gen_fixtures.py scan      # every p < 1049177 with ord_p(2) = (p-1)/8 odd

Existing files are skipped, so the scan can be resumed.
"""
import os
import sys

import cypari2

TABLE = [89, 233, 937, 1289, 1433, 1609, 1721, 1913, 2441, 2969]
SCAN_LIMIT = 1049177
SCAN_SPLIT = 3000

pari = cypari2.Pari()
pari.allocatemem(10**9, 4 * 10**9)
pari('read("docs/gen_fixture.gp")')


def write(p, path):
    if os.path.exists(path):
        return
    tmp = path + ".tmp"
    if os.path.exists(tmp):
        os.remove(tmp)
    pari(f'writefixture({p}, "{tmp}")')
    os.replace(tmp, path)
    print(p, flush=True)


def scan_primes():
    sel = ("select(p -> p % 8 == 1 && (p-1)/znorder(Mod(2,p)) == 8 "
           f"&& ((p-1)/8) % 2 == 1, primes([3, {SCAN_LIMIT - 1}]))")
    return [int(p) for p in pari(sel)]


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "table"
    if which == "table":
        for p in TABLE:
            write(p, f"fixtures/p{p}.fx")
    else:
        for d in ("fixtures/scan-lt3000", "fixtures/scan-3000-1049177"):
            os.makedirs(d, exist_ok=True)
        for p in scan_primes():
            d = "fixtures/scan-lt3000" if p < SCAN_SPLIT else "fixtures/scan-3000-1049177"
            write(p, f"{d}/p{p}.fx")
