#!/usr/bin/env python3
"""Reference external backend: solve an MPS file and emit `name value` lines.

Usage: mps_solve.py MODEL.mps SOLUTION.sol

Parses the MPS subset written by the fleetmix exporter (fixed or free format,
N/L/G/E rows, INTORG/INTEND markers, RHS, UP/LO/FX/MI/PL/BV bounds) and solves
with scipy.optimize.milp (HiGHS). Serves both as a cross-check against the
internal branch-and-bound and as a working example of the external-solver
command contract.
"""

import sys

import numpy as np
from scipy.optimize import LinearConstraint, milp


def parse_mps(path):
    obj_row = None
    rows = []  # (name, sense)
    row_idx = {}
    cols = {}  # name -> {row: coeff}
    objs = {}
    integrality = {}
    rhs = {}
    obj_const = 0.0
    bounds = {}
    section = None
    in_int = False
    with open(path) as fh:
        for line in fh:
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            tok = line.split()
            if section == "ROWS":
                sense, name = tok[0], tok[1]
                if sense == "N":
                    if obj_row is None:
                        obj_row = name
                else:
                    row_idx[name] = len(rows)
                    rows.append((name, sense))
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                cname = tok[0]
                if cname not in cols:
                    cols[cname] = {}
                    integrality[cname] = 1 if in_int else 0
                    bounds[cname] = [0.0, 1.0 if in_int else np.inf]
                for rname, val in zip(tok[1::2], tok[2::2]):
                    if rname == obj_row:
                        objs[cname] = objs.get(cname, 0.0) + float(val)
                    else:
                        cols[cname][rname] = cols[cname].get(rname, 0.0) + float(val)
            elif section == "RHS":
                for rname, val in zip(tok[1::2], tok[2::2]):
                    if rname == obj_row:
                        obj_const = -float(val)
                    else:
                        rhs[rname] = float(val)
            elif section == "BOUNDS":
                btype, _, cname = tok[0], tok[1], tok[2]
                if cname not in bounds:
                    bounds[cname] = [0.0, np.inf]
                    cols.setdefault(cname, {})
                    integrality.setdefault(cname, 0)
                val = float(tok[3]) if len(tok) > 3 else 0.0
                if btype in ("UP", "UI"):
                    bounds[cname][1] = val
                elif btype in ("LO", "LI"):
                    bounds[cname][0] = val
                elif btype == "FX":
                    bounds[cname] = [val, val]
                elif btype == "MI":
                    bounds[cname][0] = -np.inf
                elif btype == "PL":
                    bounds[cname][1] = np.inf
                elif btype == "BV":
                    integrality[cname] = 1
                    bounds[cname] = [0.0, 1.0]
    names = list(cols.keys())
    return names, cols, objs, integrality, bounds, rows, row_idx, rhs, obj_const


def main():
    mps_path, sol_path = sys.argv[1], sys.argv[2]
    names, cols, objs, integrality, bounds, rows, row_idx, rhs, obj_const = parse_mps(
        mps_path
    )
    n, m = len(names), len(rows)
    c = np.array([objs.get(x, 0.0) for x in names])
    a = np.zeros((m, n))
    for j, x in enumerate(names):
        for rname, val in cols[x].items():
            a[row_idx[rname], j] = val
    lo = np.full(m, -np.inf)
    hi = np.full(m, np.inf)
    for i, (rname, sense) in enumerate(rows):
        b = rhs.get(rname, 0.0)
        if sense in ("L", "E"):
            hi[i] = b
        if sense in ("G", "E"):
            lo[i] = b
    res = milp(
        c=c,
        constraints=LinearConstraint(a, lo, hi) if m else None,
        integrality=np.array([integrality[x] for x in names]),
        bounds=np.array([bounds[x] for x in names]) if n else None,
        options={"mip_rel_gap": 1e-9},
    )
    if not res.success:
        sys.stderr.write(f"milp failed: {res.message}\n")
        return 1
    with open(sol_path, "w") as out:
        for x, v in zip(names, res.x):
            out.write(f"{x} {v!r}\n")
    sys.stderr.write(f"objective {res.fun + obj_const!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
