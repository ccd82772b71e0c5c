"""Classify every built-in B-tensor row in a few dimensions."""

from curvclass import btensor as bt
from curvclass.catalog import all_tensor_names

DIMS = (3, 4, 5, 6)


def main() -> None:
    print("tensor  " + "  ".join(f"n={n}" for n in DIMS) + "  GCT(n=4)")
    for name in all_tensor_names():
        classes = [bt.classify(bt.generic(name, n)).value for n in DIMS]
        gct = bt.is_gct(bt.generic(name, 4))
        print(f"{name:<7} " + "  ".join(f"{c:>3}" for c in classes) + f"  {gct}")


if __name__ == "__main__":
    main()
