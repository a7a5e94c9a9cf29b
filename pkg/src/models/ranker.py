"""RankerModel data class: parameters of the Siamese scoring network."""

from dataclasses import dataclass, field

import numpy as np

from .features import NormalizerStats


@dataclass
class DenseLayer:
    """Affine layer y = x @ weight + bias.

    Attributes:
        weight: Array of shape (fan_in, fan_out).
        bias: Array of shape (fan_out,).
    """

    weight: np.ndarray = field(repr=False)
    bias: np.ndarray = field(repr=False)

    @property
    def fan_in(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weight.shape[1]

    def copy(self) -> "DenseLayer":
        return DenseLayer(weight=self.weight.copy(), bias=self.bias.copy())


@dataclass
class RankerModel:
    """MLP scoring network D -> hidden... -> 1 with ReLU hidden activations.

    Attributes:
        layers: Dense layers in order; the last maps to one scalar.
        normalizer: Feature z-score statistics applied before the first layer.
        extractor: Identity of the extractor pair the features come from.
    """

    layers: list[DenseLayer]
    normalizer: NormalizerStats
    extractor: str = ""

    def __post_init__(self):
        """Validate the dimension chain."""
        if not self.layers:
            raise ValueError("model needs at least one layer")
        if self.layers[-1].fan_out != 1:
            raise ValueError("output layer must produce a scalar")
        if self.normalizer.dim != self.layers[0].fan_in:
            raise ValueError(
                f"normalizer has {self.normalizer.dim} coordinates, "
                f"first layer expects {self.layers[0].fan_in}"
            )
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.fan_out != nxt.fan_in:
                raise ValueError(f"layer widths {prev.fan_out} -> {nxt.fan_in} do not chain")

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def dims(self) -> list[int]:
        """Layer widths including input and output, e.g. [D, 512, 256, 128, 1]."""
        return [self.input_dim] + [layer.fan_out for layer in self.layers]

    def parameters(self) -> list[np.ndarray]:
        """Flat list [W1, b1, W2, b2, ...] of parameter arrays (shared, not copied)."""
        params = []
        for layer in self.layers:
            params.extend([layer.weight, layer.bias])
        return params

    @property
    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def copy(self) -> "RankerModel":
        return RankerModel(
            layers=[layer.copy() for layer in self.layers],
            normalizer=NormalizerStats(self.normalizer.mean.copy(), self.normalizer.std.copy()),
            extractor=self.extractor,
        )

    def float32_exact(self) -> "RankerModel":
        """Copy with every parameter rounded to float32 precision.

        Checkpoints store float32, so a rounded model scores identically before
        saving and after loading.
        """

        def r(a: np.ndarray) -> np.ndarray:
            return a.astype(np.float32).astype(np.float64)

        return RankerModel(
            layers=[DenseLayer(r(layer.weight), r(layer.bias)) for layer in self.layers],
            normalizer=NormalizerStats(r(self.normalizer.mean), r(self.normalizer.std)),
            extractor=self.extractor,
        )


@dataclass(frozen=True)
class ValTriple:
    """Validation images of one style, one per bucket.

    Attributes:
        style_id: Shared style.
        studio_id: Studio image record id.
        good_id: Highly upvoted UGC record id.
        bad_id: Highly downvoted UGC record id.
    """

    style_id: str
    studio_id: str
    good_id: str
    bad_id: str

    @property
    def ordered_ids(self) -> tuple[str, str, str]:
        """Ids from best to worst expected quality."""
        return self.studio_id, self.good_id, self.bad_id
