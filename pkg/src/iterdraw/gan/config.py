"""Model dimensions and the ablation feature lattice."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Dict

FUSION_MODES = ("none", "concat", "subtract")

# Spatial size at which self-attention is inserted in both networks.
ATTN_RESOLUTION = 16


@dataclass(frozen=True)
class ModelDims:
    """Network sizes. Defaults are the full-scale values; `scaled` builds a
    desk-size variant (both image encoders downsample by 8x, so K = side/8)."""

    n_z: int = 100           # noise dimension
    n_c: int = 1024          # context vector dimension
    d_dim: int = 1024        # instruction encoding dimension
    k_g: int = 16            # canvas feature map side
    n_g: int = 128           # canvas feature channels
    k_d: int = 16            # pair-encoder feature map side
    n_d: int = 256           # pair-encoder feature channels
    image_side: int = 128
    num_classes: int = 24
    gen_width: int = 64
    disc_width: int = 64
    embed_dim: int = 300

    def __post_init__(self):
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        for k, label in ((self.k_g, "k_g"), (self.k_d, "k_d")):
            if self.image_side % k != 0:
                raise ValueError(f"{label}={k} must divide image_side")
        if self.image_side // self.k_g != 8 or self.image_side // self.k_d != 8:
            raise ValueError("image encoders downsample by 8, so k must be side/8")
        side = self.image_side
        if side < 32 or side & (side - 1) != 0:
            raise ValueError("image_side must be a power of two >= 32")

    @classmethod
    def scaled(cls, image_side: int = 64, num_classes: int = 24,
               n_c: int = 256, gen_width: int = 24, disc_width: int = 24,
               n_g: int = 64, n_d: int = 64, n_z: int = 64,
               embed_dim: int = 300) -> "ModelDims":
        return cls(n_z=n_z, n_c=n_c, d_dim=n_c, k_g=image_side // 8, n_g=n_g,
                   k_d=image_side // 8, n_d=n_d, image_side=image_side,
                   num_classes=num_classes, gen_width=gen_width,
                   disc_width=disc_width, embed_dim=embed_dim)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict) -> "ModelDims":
        return cls(**doc)


@dataclass(frozen=True)
class AblationConfig:
    """Which discriminator/generator components a model variant enables."""

    name: str
    use_wrong_loss: bool
    use_gprior: bool
    use_aux: bool
    fusion: str
    iterative: bool = True

    def __post_init__(self):
        if self.fusion not in FUSION_MODES:
            raise ValueError(f"fusion must be one of {FUSION_MODES}")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict) -> "AblationConfig":
        return cls(**doc)


ABLATIONS: Dict[str, AblationConfig] = {
    "baseline": AblationConfig("baseline", use_wrong_loss=False,
                               use_gprior=False, use_aux=False, fusion="none"),
    "mismatch": AblationConfig("mismatch", use_wrong_loss=True,
                               use_gprior=False, use_aux=False, fusion="none"),
    "gprior": AblationConfig("gprior", use_wrong_loss=True,
                             use_gprior=True, use_aux=False, fusion="none"),
    "aux": AblationConfig("aux", use_wrong_loss=True,
                          use_gprior=True, use_aux=True, fusion="none"),
    "dconcat": AblationConfig("dconcat", use_wrong_loss=True,
                              use_gprior=True, use_aux=True, fusion="concat"),
    "dsubtract": AblationConfig("dsubtract", use_wrong_loss=True,
                                use_gprior=True, use_aux=True, fusion="subtract"),
    # Same feature set as mismatch, but all instructions are concatenated
    # and the final image is generated in a single step.
    "noniterative": AblationConfig("noniterative", use_wrong_loss=True,
                                   use_gprior=False, use_aux=False,
                                   fusion="none", iterative=False),
}
