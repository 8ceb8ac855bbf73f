from .kernel import Phi, phi, z

__all__ = [
	"phi",
	"Phi",
	"z",
]
