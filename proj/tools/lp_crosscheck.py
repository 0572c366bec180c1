#!/usr/bin/env python3
"""Solve exported two-phase LP files with HiGHS and compare the optimum with
the tuples in expected.txt.

Phase 1 is solved as written. Phase 2 gets its penalty bound from the phase 1
optimum found here, so the comparison does not depend on the exporter's cap.
"""

import argparse
import re
import sys
import tempfile
from pathlib import Path

import highspy


def solve(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.5)
    if h.readModel(str(path)) != highspy.HighsStatus.kOk:
        raise RuntimeError(f"HiGHS cannot read {path}")
    h.run()
    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kInfeasible:
        return None
    if status != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError(f"{path}: {h.modelStatusToString(status)}")
    return round(h.getInfo().objective_function_value)


def with_cap(text, cap):
    # The cap row may wrap; its right-hand side ends the row.
    return re.sub(r"(pen_cap:.*?<=\s*)-?\d+", lambda m: m.group(1) + str(cap), text, count=1, flags=re.S)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dir", type=Path)
    args = ap.parse_args()

    failures = 0
    cases = 0
    for line in (args.dir / "expected.txt").read_text().splitlines():
        name, *want = line.split()
        cases += 1
        penalty = solve(args.dir / f"{name}.phase1.lp")
        if want == ["infeasible"]:
            ok = penalty is None
            got = "infeasible" if penalty is None else f"penalty {penalty}"
        else:
            usage = None
            if penalty is not None:
                text = (args.dir / f"{name}.phase2.lp").read_text()
                with tempfile.NamedTemporaryFile("w", suffix=".lp", delete=False) as tmp:
                    tmp.write(with_cap(text, penalty))
                usage = solve(tmp.name)
                Path(tmp.name).unlink()
            ok = [str(penalty), str(usage)] == want
            got = f"{penalty} {usage}"
        print(f"{'ok  ' if ok else 'FAIL'} {name}: highs {got}, expected {' '.join(want)}")
        failures += not ok
    print(f"{cases - failures}/{cases} instances agree")
    return 1 if failures or cases == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
