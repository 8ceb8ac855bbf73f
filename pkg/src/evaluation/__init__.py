from .verify import (
	OracleCase,
	default_cases,
	evaluate,
	load_cases,
	run_oracle_suite,
)

__all__ = [
	"OracleCase",
	"default_cases",
	"load_cases",
	"run_oracle_suite",
	"evaluate",
]
