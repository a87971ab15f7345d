#!/usr/bin/env python3
"""Solve an LP/MILP file with HiGHS and write a p2a solution file.

usage: highs_adapter.py MODEL.lp SOLUTION.sol [TIME_LIMIT_S] [MIP_REL_GAP]

The solution file starts with `status <optimal|infeasible|unbounded|limit>`,
then `objective <value>` and one `name value` line per column when a primal
point is available.
"""
import sys

import highspy


def run(lp_path, time_limit, gap, presolve=True):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", float(time_limit))
    h.setOptionValue("mip_rel_gap", float(gap))
    h.setOptionValue("mip_feasibility_tolerance", 1e-7)
    h.setOptionValue("primal_feasibility_tolerance", 1e-8)
    h.setOptionValue("threads", 1)
    if not presolve:
        h.setOptionValue("presolve", "off")
    status = h.readModel(lp_path)
    if status == highspy.HighsStatus.kError:
        raise SystemExit(f"cannot read {lp_path}")
    h.run()
    return h


def main(argv):
    if len(argv) < 3:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    lp_path, sol_path = argv[1], argv[2]
    time_limit = float(argv[3]) if len(argv) > 3 else 600.0
    gap = float(argv[4]) if len(argv) > 4 else 1e-6

    h = run(lp_path, time_limit, gap)
    ms = h.getModelStatus()
    M = highspy.HighsModelStatus
    if ms == M.kUnboundedOrInfeasible:
        h = run(lp_path, time_limit, gap, presolve=False)
        ms = h.getModelStatus()

    if ms == M.kOptimal:
        status = "optimal"
    elif ms == M.kInfeasible:
        status = "infeasible"
    elif ms in (M.kUnbounded, M.kUnboundedOrInfeasible):
        status = "unbounded"
    elif ms in (M.kTimeLimit, M.kIterationLimit, M.kSolutionLimit, M.kInterrupt):
        status = "limit"
    else:
        print(f"unexpected HiGHS status: {h.modelStatusToString(ms)}", file=sys.stderr)
        return 1

    lines = [f"status {status}"]
    info = h.getInfo()
    has_point = status == "optimal" or (status == "limit" and info.primal_solution_status >= 1)
    if has_point:
        sol = h.getSolution()
        lp = h.getLp()
        lines.append(f"objective {info.objective_function_value!r}")
        for name, value in zip(lp.col_names_, sol.col_value):
            lines.append(f"{name} {float(value)!r}")
    with open(sol_path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
