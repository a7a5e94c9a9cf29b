"""DistortionSpec data class: one replayable image manipulation."""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional


class DistortionKind(Enum):
    """Image manipulation techniques that degrade quality."""

    RANDOM_CROP = "random_crop"
    VERTICAL_CROP = "vertical_crop"
    HORIZONTAL_CROP = "horizontal_crop"
    JITTER_BRIGHTNESS = "jitter_brightness"
    JITTER_CONTRAST = "jitter_contrast"
    JITTER_HUE = "jitter_hue"
    GAUSSIAN_BLUR = "gaussian_blur"
    GAUSSIAN_NOISE = "gaussian_noise"
    GRAYSCALE = "grayscale"
    ROTATION = "rotation"
    ROTATION_MIXUP = "rotation_mixup"

    @property
    def is_crop(self) -> bool:
        return self in CROP_KINDS

    @property
    def is_jitter(self) -> bool:
        return self in JITTER_KINDS

    @property
    def is_rotation(self) -> bool:
        return self in (DistortionKind.ROTATION, DistortionKind.ROTATION_MIXUP)


CROP_KINDS = frozenset(
    {DistortionKind.RANDOM_CROP, DistortionKind.VERTICAL_CROP, DistortionKind.HORIZONTAL_CROP}
)
JITTER_KINDS = frozenset(
    {DistortionKind.JITTER_BRIGHTNESS, DistortionKind.JITTER_CONTRAST, DistortionKind.JITTER_HUE}
)
ROTATION_ANGLES = (5, 10, 15, 20)

Interval = tuple[float, float]


@dataclass(frozen=True)
class DistortionRanges:
    """Legal parameter intervals per distortion family.

    Jitter factors use two intervals (darken/flatten and brighten/boost); a
    sampled factor picks one of them with probability 1/2.
    """

    crop: Interval = (0.4, 0.6)
    jitter: tuple[Interval, Interval] = ((0.3, 0.6), (1.2, 1.4))
    blur: Interval = (0.8, 1.2)
    noise: Interval = (0.2, 0.8)
    mixup: Interval = (0.2, 0.4)

    def intervals(self, kind: DistortionKind) -> tuple[Interval, ...]:
        """Intervals a parameter of ``kind`` may fall in (empty for grayscale)."""
        if kind.is_crop:
            return (self.crop,)
        if kind.is_jitter:
            return self.jitter
        if kind is DistortionKind.GAUSSIAN_BLUR:
            return (self.blur,)
        if kind is DistortionKind.GAUSSIAN_NOISE:
            return (self.noise,)
        if kind is DistortionKind.ROTATION_MIXUP:
            return (self.mixup,)
        return ()

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DistortionRanges":
        """Build ranges from a config table, falling back to defaults."""
        defaults = cls()
        jitter = data.get("jitter", defaults.jitter)
        return cls(
            crop=tuple(data.get("crop", defaults.crop)),
            jitter=(tuple(jitter[0]), tuple(jitter[1])),
            blur=tuple(data.get("blur", defaults.blur)),
            noise=tuple(data.get("noise", defaults.noise)),
            mixup=tuple(data.get("mixup", defaults.mixup)),
        )


DEFAULT_RANGES = DistortionRanges()


@dataclass(frozen=True)
class DistortionSpec:
    """A fully parameterized, replayable image manipulation.

    Attributes:
        kind: Manipulation technique.
        param: Strength parameter; None for grayscale, and for plain rotation.
        angle_degrees: Rotation magnitude for rotation kinds.
        seed: Seed of the generator all randomness of the manipulation is drawn from.
    """

    kind: DistortionKind
    param: Optional[float] = None
    angle_degrees: Optional[int] = None
    seed: int = 0

    def validate(self, ranges: DistortionRanges | None = None) -> None:
        """Check the parameter against the kind's legal range.

        Raises:
            ValueError: If the spec is inconsistent.
        """
        ranges = ranges or DEFAULT_RANGES
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

        intervals = ranges.intervals(self.kind)
        if intervals:
            if self.param is None:
                raise ValueError(f"{self.kind.value} requires a parameter")
            if not any(lo <= self.param <= hi for lo, hi in intervals):
                raise ValueError(
                    f"{self.kind.value} parameter {self.param} outside {list(intervals)}"
                )
        elif self.param is not None:
            raise ValueError(f"{self.kind.value} takes no parameter")

        if self.kind.is_rotation:
            if self.angle_degrees not in ROTATION_ANGLES:
                raise ValueError(
                    f"{self.kind.value} angle must be one of {ROTATION_ANGLES}, "
                    f"got {self.angle_degrees}"
                )
        elif self.angle_degrees is not None:
            raise ValueError(f"{self.kind.value} takes no angle")

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the structured-text object embedded in pair files."""
        return {
            "kind": self.kind.value,
            "param": self.param,
            "angle_degrees": self.angle_degrees,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DistortionSpec":
        """Parse a spec object; unknown kinds raise ValueError."""
        param = data.get("param")
        angle = data.get("angle_degrees")
        return cls(
            kind=DistortionKind(data["kind"]),
            param=None if param is None else float(param),
            angle_degrees=None if angle is None else int(angle),
            seed=int(data.get("seed", 0)),
        )
