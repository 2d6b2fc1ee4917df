"""Named kernels and scaling-exponent constants with their provenance"""
from dataclasses import dataclass
from typing import Callable, Dict, List

from src.core.field import default_field
from src.kernels.kernel import (Kernel, arikan_kernel, identity_kernel, kernel_power,
                                rs_kernel)
from src.utils.errors import ValidationError


@dataclass(frozen=True)
class MuStarPreset:
    """An imported scaling exponent and where it comes from."""
    name: str
    mu_star: float
    citation: str

    def to_dict(self) -> dict:
        return {"name": self.name, "mu_star": self.mu_star, "citation": self.citation}


FV14 = ("A. Fazeli and A. Vardy, On the scaling exponent of binary polarization kernels, "
        "Allerton 2014")
MHU16 = ("M. Mondelli, S. H. Hassani and R. L. Urbanke, Unified scaling of polar codes, "
         "IEEE Trans. IT 62(12), 2016")
FT17 = ("S. L. Fong and V. Y. F. Tan, Scaling exponent and moderate deviations asymptotics "
        "of polar codes for the AWGN channel, Entropy 19(7), 2017")

MU_STAR_PRESETS: Dict[str, MuStarPreset] = {
    "bec": MuStarPreset("bec", 3.627, f"[FV14] {FV14}"),
    "bdmc": MuStarPreset("bdmc", 4.714, f"[MHU16] {MHU16}"),
    "awgn": MuStarPreset("awgn", 4.714, f"[FT17] {FT17}"),
}

KERNEL_PRESETS: Dict[str, Callable[[], Kernel]] = {
    "arikan": arikan_kernel,
    "arikan2": lambda: kernel_power(arikan_kernel(), 2),
    "identity2": lambda: identity_kernel(default_field(2), 2),
    "rs4": lambda: rs_kernel(default_field(4)),
    "rs8": lambda: rs_kernel(default_field(8)),
}


@dataclass(frozen=True)
class TradeoffPreset:
    """A kernel paired with the mu* it is drawn against."""
    name: str
    kernel: str
    mu_star: str


TRADEOFF_PRESETS: Dict[str, TradeoffPreset] = {
    "arikan-bec": TradeoffPreset("arikan-bec", "arikan", "bec"),
    "arikan-bdmc": TradeoffPreset("arikan-bdmc", "arikan", "bdmc"),
    "arikan-awgn": TradeoffPreset("arikan-awgn", "arikan", "awgn"),
}


def get_kernel(name: str) -> Kernel:
    """
    Build a named kernel.

    Raises:
        ValidationError: unknown name
    """
    try:
        return KERNEL_PRESETS[name]()
    except KeyError:
        raise ValidationError(
            f"unknown kernel preset {name!r}; known: {', '.join(sorted(KERNEL_PRESETS))}") from None


def get_mu_star(name: str) -> MuStarPreset:
    try:
        return MU_STAR_PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown mu* preset {name!r}; known: {', '.join(sorted(MU_STAR_PRESETS))}") from None


def get_tradeoff_preset(name: str) -> TradeoffPreset:
    try:
        return TRADEOFF_PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown tradeoff preset {name!r}; known: {', '.join(sorted(TRADEOFF_PRESETS))}"
        ) from None


def citations_for(mu_star: float) -> List[str]:
    """Citations of every preset carrying this mu* value."""
    return [p.citation for p in MU_STAR_PRESETS.values() if abs(p.mu_star - mu_star) < 1e-12]
