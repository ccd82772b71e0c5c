"""Recurrence fits on the plane wave g = 2 du dv + e^u x² du² + dx² + dy²."""

import numpy as np

from curvclass import catalog as cat
from curvclass.structure import TensorField, check_symmetric, fit_recurrence

NAMES = ("R", "W", "P", "M", "P*", "W0", "W1", "W3*")


def main() -> None:
    cm = cat.get("pp-wave:exp")
    pts = cm.sample_points(3)
    for name in NAMES:
        rep = fit_recurrence(TensorField(cm.field, name), pts)
        pi = np.round(rep.unknown("Pi"), 8)
        print(f"{name:<4} {rep.verdict:<10} Pi = {pi}")
    sym = check_symmetric(TensorField(cm.field, "R"), pts)
    print(f"nabla R = 0: {sym.verdict} (max residual {sym.max_residual:.3g})")


if __name__ == "__main__":
    main()
