"""Run the audit pipeline on every bundled scene and tabulate the verdicts."""

from coiso_quant.cli import run
from coiso_quant.scenes import bundled_names, load_bundled


def _verdict(step):
    if "coisotropic" in step:
        return step["coisotropic"]
    if step.get("status") != "computed":
        return step.get("status", "-")
    res = step["result"]
    return str(res.get("verdict", "ok"))


def main():
    cols = ["2-check-coisotropic", "4-obstruction", "6-lagrangian", "7-gamma"]
    print(f"{'scene':<32}" + "".join(f"{c.split('-', 1)[1]:<22}" for c in cols))
    for name in bundled_names():
        steps = run("audit", load_bundled(name)).results["steps"]
        print(f"{name:<32}" + "".join(f"{_verdict(steps[c]) if c in steps else '-':<22}" for c in cols))


if __name__ == "__main__":
    main()
