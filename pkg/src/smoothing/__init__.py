from .functions import b, k, q_efron, r_delta

__all__ = [
	"k",
	"q_efron",
	"r_delta",
	"b",
]
