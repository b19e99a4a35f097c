#!/usr/bin/env python3
"""End-to-end checks of the nctomo command line: exit codes, output headers, determinism.

Usage: cli_test.py NCTOMO_BINARY DATA_DIR WORK_DIR CASE
"""
import json
import os
import shutil
import subprocess
import sys

BIN, DATA, WORK, CASE = sys.argv[1:5]
BIN, DATA, WORK = (os.path.abspath(p) for p in (BIN, DATA, WORK))
TOPO = os.path.join(DATA, "topologies")


def run(*args, code=0):
    proc = subprocess.run([BIN, *args], capture_output=True, text=True)
    if proc.returncode != code:
        sys.exit(f"{' '.join(args)}: exit {proc.returncode}, expected {code}\n{proc.stdout}{proc.stderr}")
    return proc


def out(name):
    d = os.path.join(WORK, CASE, name)
    shutil.rmtree(d, ignore_errors=True)
    return d


def first_line(path):
    with open(path) as f:
        return f.readline()


def check_header(path, comment="#"):
    line = first_line(path)
    if not line.startswith(f"{comment} nctomo 0.1.0; invocation: nctomo "):
        sys.exit(f"{path}: missing provenance header, got {line!r}")


def case_exit_codes():
    run("validate", "tree5")
    run("validate", os.path.join(TOPO, "chain.txt"), code=1)
    run("validate", os.path.join(TOPO, "malformed.txt"), code=2)
    run("validate", os.path.join(TOPO, "missing.txt"), code=2)
    run("validate", os.path.join(TOPO, "abilene_like.txt"), "--directed", code=1)
    run("validate", os.path.join(TOPO, "abilene_like.txt"), "--directed", "--sources", "1", "--receivers", "9")
    run("run", "--n", "0", "--out-dir", out("n0"), code=2)
    run("run", "--mode", "dag-coded", "--estimator", "mle", "--out-dir", out("mode"), code=2)
    run("run", "--topology", "tree9", "--estimator", "mle", "--out-dir", out("tree9"), code=1)
    run("run", "--estimator", "guess", "--out-dir", out("est"), code=2)
    run("run", "--bogus-flag", code=2)
    run("lp", "tree5", "--targets", "XY", "--out-dir", out("lp"), code=2)
    run("orient", "tree5", "--sources", "Q", "--out-dir", out("orient"), code=1)
    bad = os.path.join(WORK, CASE, "bad.json")
    with open(bad, "w") as f:
        f.write('{"topology": "tree5", "unknown": 1}')
    run("run", "--config", bad, code=2)
    with open(bad, "w") as f:
        f.write("{not json")
    run("run", "--config", bad, code=2)


def case_headers():
    d = out("run")
    run("run", "--trials", "2", "--n", "500", "--out-dir", d)
    check_header(os.path.join(d, "estimates.csv"))
    with open(os.path.join(d, "summary.json")) as f:
        summary = json.load(f)
    if not summary["header"].startswith("nctomo 0.1.0; invocation: nctomo run"):
        sys.exit("summary.json header missing")
    if len(summary["edges"]) != 5:
        sys.exit("summary.json should list five edges")
    d = out("orient")
    run("orient", os.path.join(TOPO, "butterfly_logical.txt"), "--sources", "s1,s2", "--out-dir", d)
    check_header(os.path.join(d, "oriented.txt"))
    check_header(os.path.join(d, "stats.csv"))
    d = out("codecheck")
    run("codecheck", os.path.join(TOPO, "abilene_like.txt"), "--directed", "--k", "2,6", "--seeds", "5", "--out-dir", d)
    check_header(os.path.join(d, "codecheck.csv"))
    d = out("lp")
    run("lp", "tree5", "--targets", "CD", "--out-dir", d)
    check_header(os.path.join(d, "model.lp"), "\\")
    check_header(os.path.join(d, "flows.csv"))


def case_determinism():
    args = ["run", "--topology", "tree9", "--estimator", "bp", "--n", "2000", "--trials", "3", "--seed", "17"]
    a, b = out("a"), out("b")
    run(*args, "--out-dir", a)
    run(*args, "--out-dir", b, "--workers", "3")
    with open(os.path.join(a, "estimates.csv")) as f:
        rows_a = f.readlines()[1:]
    with open(os.path.join(b, "estimates.csv")) as f:
        rows_b = f.readlines()[1:]
    if rows_a != rows_b:
        sys.exit("estimates differ between identical runs")
    c = out("c")
    run("orient", os.path.join(TOPO, "butterfly_logical.txt"), "--sources", "s1,s2", "--seed", "4", "--out-dir", c)
    d = out("d")
    run("orient", os.path.join(TOPO, "butterfly_logical.txt"), "--sources", "s1,s2", "--seed", "4", "--out-dir", d)
    for name in ("oriented.txt", "stats.csv"):
        with open(os.path.join(c, name)) as f, open(os.path.join(d, name)) as g:
            if f.readlines()[1:] != g.readlines()[1:]:
                sys.exit(f"{name} differs between identical runs")


def case_config_file():
    cfg = os.path.join(DATA, "configs", "abilene_bp.json")
    d = out("cfg")
    os.chdir(os.path.dirname(DATA))  # config paths are relative to the repository root
    run("run", "--config", cfg, "--trials", "1", "--n", "2000", "--out-dir", d)
    with open(os.path.join(d, "summary.json")) as f:
        summary = json.load(f)
    if summary["config"]["mode"] != "dag-coded" or summary["code_min_ratio"] != 1:
        sys.exit("coded run did not find a path-identifiable code")


CASES = {
    "exit_codes": case_exit_codes,
    "headers": case_headers,
    "determinism": case_determinism,
    "config_file": case_config_file,
}

if __name__ == "__main__":
    os.makedirs(os.path.join(WORK, CASE), exist_ok=True)
    CASES[CASE]()
    print(f"PASS {CASE}")
