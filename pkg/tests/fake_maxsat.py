"""Stand-in external MaxSAT solver for tests: brute force over small WCNF files.

Usage: fake_maxsat.py MODE FILE, where MODE is one of
  literals  optimum with a signed-literal model line
  bits      optimum with a 0/1 string model line
  hang      print one cost line, then sleep forever
  garbage   print nothing recognizable
  rc2       optimum computed by PySAT's RC2, for larger files
"""
import sys
import time
from itertools import product

from salbp3pm.cnf import parse_wcnf


def main():
    mode, path = sys.argv[1], sys.argv[2]
    if mode == "garbage":
        print("hello")
        return
    with open(path) as fh:
        w = parse_wcnf(fh)
    n = w.hard.var_count
    if mode == "rc2":
        from salbp3pm.solvers.maxsat import solve_maxsat_rc2

        out = solve_maxsat_rc2(w)
        print(f"o {out.cost}")
        print("s OPTIMUM FOUND")
        print("v " + " ".join(str(v if out.model[v] else -v) for v in range(1, n + 1)))
        return
    if mode == "hang":
        print("o 99", flush=True)
        time.sleep(3600)
    best = None
    for bits in product([False, True], repeat=n):
        model = [False, *bits]
        if w.hard.satisfied_by(model):
            cost = w.cost(model)
            if best is None or cost < best[0]:
                best = (cost, model)
    if best is None:
        print("s UNSATISFIABLE")
        return
    cost, model = best
    print(f"o {cost}")
    print("s OPTIMUM FOUND")
    if mode == "bits":
        print("v " + "".join("1" if b else "0" for b in model[1:]))
    else:
        print("v " + " ".join(str(v if model[v] else -v) for v in range(1, n + 1)))


if __name__ == "__main__":
    main()
