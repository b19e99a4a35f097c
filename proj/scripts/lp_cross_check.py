#!/usr/bin/env python3
"""Solve routing LPs written by `nctomo lp` with scipy and compare objectives.

Usage: lp_cross_check.py NCTOMO_BINARY WORK_DIR [DATA_DIR]
"""
import math
import os
import subprocess
import sys

import numpy as np
from scipy.optimize import linprog


def parse_lp(path):
    names, cost, rows, bounds = [], [], [], {}
    section = None
    with open(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("\\") or not line.strip():
                continue
            if not line.startswith(" "):
                section = line.strip()
                continue
            tok = line.split()
            if section == "Minimize":
                for k in range(1, len(tok), 3):
                    sign = -1.0 if tok[k] == "-" else 1.0
                    names.append(tok[k + 2])
                    cost.append(sign * float(tok[k + 1]))
            elif section == "Subject To":
                terms, k = [], 1
                while tok[k] not in ("<=", ">=", "="):
                    sign = -1.0 if tok[k] == "-" else 1.0
                    terms.append((tok[k + 2], sign * float(tok[k + 1])))
                    k += 3
                rows.append((terms, tok[k], float(tok[k + 1])))
            elif section == "Bounds":
                if len(tok) == 3 and tok[1] == "=":
                    bounds[tok[0]] = (float(tok[2]), float(tok[2]))
                elif len(tok) == 3 and tok[1] == ">=":
                    bounds[tok[0]] = (float(tok[2]), None)
                else:
                    bounds[tok[2]] = (float(tok[0]), float(tok[4]))
    return names, cost, rows, bounds


def solve(path):
    names, cost, rows, bounds = parse_lp(path)
    index = {n: i for i, n in enumerate(names)}
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for terms, sense, rhs in rows:
        row = np.zeros(len(names))
        for name, c in terms:
            row[index[name]] += c
        if sense == "=":
            a_eq.append(row)
            b_eq.append(rhs)
        elif sense == "<=":
            a_ub.append(row)
            b_ub.append(rhs)
        else:
            a_ub.append(-row)
            b_ub.append(-rhs)
    res = linprog(
        cost,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=b_ub or None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=b_eq or None,
        bounds=[bounds.get(n, (0, None)) for n in names],
        method="highs",
    )
    return res


CASES = [
    ["tree5", "--targets", "CD"],
    ["tree5", "--targets", "AC,BC,CD,DE,DF", "--rho", "0.5"],
    ["tree5", "--targets", "DE", "--cost", "DE=3", "--cost", "AC=0.25"],
    ["tree9", "--targets", "7,9"],
    ["tree9", "--targets", "1,2,3", "--rho", "2"],
]


def main():
    binary, work = sys.argv[1], sys.argv[2]
    data = sys.argv[3] if len(sys.argv) > 3 else None
    cases = list(CASES)
    if data:
        cases.append([os.path.join(data, "topologies", "abilene_like.txt"), "--sources", "1", "--receivers", "9",
                      "--targets", "e,g"])
    failures = 0
    for i, case in enumerate(cases):
        out = os.path.join(work, f"lp_case{i}")
        proc = subprocess.run([binary, "lp", *case, "--out-dir", out], capture_output=True, text=True)
        status = dict(line.split(" ", 1) for line in proc.stdout.splitlines() if " " in line)
        ref = solve(os.path.join(out, "model.lp"))
        ours_optimal = status.get("status") == "optimal"
        if not ref.success:
            ok = not ours_optimal and proc.returncode == 1
            detail = f"scipy: {ref.message}; nctomo: {status.get('status')}"
        else:
            ours = float(status.get("objective", "nan"))
            ok = ours_optimal and math.isclose(ours, ref.fun, rel_tol=1e-7, abs_tol=1e-7)
            detail = f"scipy {ref.fun:.9g}, nctomo {ours:.9g}"
        print(("PASS" if ok else "FAIL"), " ".join(case), "->", detail)
        failures += not ok
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
