"""Run the bound computations from the repository root: python run_bounds.py table1 --starts 8"""
from src.cli import main


if __name__ == "__main__":
    raise SystemExit(main())
