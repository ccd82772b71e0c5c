"""Reduced theorem-verification run; one PASS/FAIL line per block."""

from curvclass.theorems import SuiteConfig, run_suite


def main() -> None:
    cfg = SuiteConfig.from_cli(dims=(3, 4), seeds=(0,), points=1)
    run_suite(cfg, on_result=lambda res: print(res.line(), flush=True))


if __name__ == "__main__":
    main()
