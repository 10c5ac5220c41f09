#!/usr/bin/env python3
"""
Full verification pipeline: suites, canonical exponent fits, an eval sweep.

Every step runs `python -m meancut ...` as a subprocess and writes into
reports/. The first failing step aborts the pipeline.

Run:
  source venv/bin/activate
  python scripts/run_all.py            # uses .env if present
"""

import sys
import subprocess
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
REPORTS = ROOT / "reports"
ENV_FILE = ROOT / ".env"


# --- Helpers ---------------------------------------------------------------
def run(cmd, cwd=ROOT):
    print(f"\n$ {' '.join(cmd)}")
    res = subprocess.run(cmd, cwd=cwd)
    if res.returncode != 0:
        raise SystemExit(f"❌ Command failed with code {res.returncode}: {' '.join(cmd)}")
    return res


def require_file(path: Path, hint: str = ""):
    if not path.exists():
        msg = f"❌ Missing: {path}"
        if hint:
            msg += f"\n   Hint: {hint}"
        raise SystemExit(msg)


def meancut(*args):
    cmd = [sys.executable, "-m", "meancut", *args]
    if ENV_FILE.exists():
        cmd += ["--env-file", str(ENV_FILE)]
    return run(cmd)


# --- Settings --------------------------------------------------------------
REPORTS.mkdir(exist_ok=True)
if ENV_FILE.exists():
    print(f"▶ Using settings from {ENV_FILE}")
else:
    print("ℹ️  No .env found, running with default settings (see .env.example).")

# --- Step 1: verification suites -------------------------------------------
print("\n▶ Running verification suites")
meancut("verify", "--suite", "all", "--kmax", "30", "--lmax", "30",
        "--json", str(REPORTS / "verify_summary.json"),
        "--output", str(REPORTS / "verify_summary.csv"))
require_file(REPORTS / "verify_summary.json", "verify should have written its JSON summary.")

# --- Step 2: Karamata inequality on a long range ---------------------------
print("\n▶ Karamata inequality up to l=300")
meancut("verify", "--suite", "karamata", "--lmax", "300",
        "--output", str(REPORTS / "karamata.csv"))

# --- Step 3: bounds scan ---------------------------------------------------
print("\n▶ Scanning 1/4 <= P <= 1/2 on [1,200]^2")
meancut("scan", "--kmax", "200", "--lmax", "200", "--output", str(REPORTS / "bounds_scan.csv"))

# --- Step 4: error exponent fits -------------------------------------------
print("\n▶ Fitting approximation error exponents")
meancut("fit", "--kind", "eq1", "--k", "2", "--lgrid", "100:1600:x2",
        "--output", str(REPORTS / "fit_eq1.csv"))
meancut("fit", "--kind", "eq2", "--l", "1", "--kgrid", "100:800:x2",
        "--output", str(REPORTS / "fit_eq2.csv"))
meancut("fit", "--kind", "eq3", "--diag", "25:400:x2",
        "--output", str(REPORTS / "fit_eq3.csv"))

# --- Step 5: eval sweep ----------------------------------------------------
print("\n▶ Evaluating every method on [1,30]^2")
meancut("eval", "--k", "1:30", "--l", "1:30", "--method", "all", "--jobs", "-1",
        "--output", str(REPORTS / "eval_grid.csv"))

print("\n🎉 All steps completed successfully. Artifacts in reports/")
