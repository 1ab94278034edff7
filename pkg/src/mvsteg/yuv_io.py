"""Raw planar YUV 4:2:0 I/O and deterministic synthetic sequences."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates
from scipy.special import expit

from .errors import DimensionNotMacroblockAligned, EmptyVideo, TruncatedFile

MOTION_MODELS = ("global-pan", "multi-object", "static+noise")


@dataclass(frozen=True, eq=False)
class VideoSequence:
    """8-bit 4:2:0 video. ``y`` is (frames, height, width); ``u``/``v`` are half size."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        n, h, w = self.y.shape
        if self.y.dtype != np.uint8:
            raise ValueError("only 8-bit samples are supported")
        if h % 16 or w % 16:
            raise DimensionNotMacroblockAligned(f"{w}x{h} is not a multiple of 16")
        if n < 2:
            raise EmptyVideo("a sequence needs at least two frames")
        for plane in (self.u, self.v):
            if plane.shape != (n, h // 2, w // 2) or plane.dtype != np.uint8:
                raise ValueError("chroma planes must be uint8 at half resolution")

    @property
    def width(self) -> int:
        return self.y.shape[2]

    @property
    def height(self) -> int:
        return self.y.shape[1]

    @property
    def n_frames(self) -> int:
        return self.y.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VideoSequence):
            return NotImplemented
        return (np.array_equal(self.y, other.y) and np.array_equal(self.u, other.u)
                and np.array_equal(self.v, other.v))

    @classmethod
    def from_luma(cls, y: np.ndarray) -> "VideoSequence":
        """Wrap luma frames, deriving placeholder chroma by 2x2 averaging."""
        y = np.ascontiguousarray(y, dtype=np.uint8)
        n, h, w = y.shape
        u = y.reshape(n, h // 2, 2, w // 2, 2).mean(axis=(2, 4)).round().astype(np.uint8)
        return cls(y, u, (255 - u).astype(np.uint8))


def _frame_bytes(width, height):
    return width * height * 3 // 2


def _pad_to_macroblocks(plane, height, width):
    ph, pw = plane.shape[1:]
    return np.pad(plane, ((0, 0), (0, height - ph), (0, width - pw)), mode="edge")


def read_yuv(path, width: int, height: int, pad: bool = False) -> VideoSequence:
    """Read a headerless planar 4:2:0 file.

    With ``pad=True`` non-aligned dimensions are edge-replicated on the right
    and bottom up to the next multiple of 16.
    """
    if width <= 0 or height <= 0 or width % 2 or height % 2:
        raise ValueError("4:2:0 dimensions must be positive and even")
    aligned = width % 16 == 0 and height % 16 == 0
    if not aligned and not pad:
        raise DimensionNotMacroblockAligned(f"{width}x{height} is not a multiple of 16")
    size = os.path.getsize(path)
    fsize = _frame_bytes(width, height)
    if size == 0 or size % fsize:
        raise TruncatedFile(f"{size} bytes is not a multiple of the {fsize}-byte frame size")
    n = size // fsize
    raw = np.fromfile(path, dtype=np.uint8).reshape(n, fsize)
    ysz, csz = width * height, (width // 2) * (height // 2)
    y = raw[:, :ysz].reshape(n, height, width)
    u = raw[:, ysz:ysz + csz].reshape(n, height // 2, width // 2)
    v = raw[:, ysz + csz:].reshape(n, height // 2, width // 2)
    if not aligned:
        H, W = -(-height // 16) * 16, -(-width // 16) * 16
        y = _pad_to_macroblocks(y, H, W)
        u = _pad_to_macroblocks(u, H // 2, W // 2)
        v = _pad_to_macroblocks(v, H // 2, W // 2)
    return VideoSequence(np.ascontiguousarray(y), np.ascontiguousarray(u),
                         np.ascontiguousarray(v))


def write_yuv(path, seq: VideoSequence) -> None:
    with open(path, "wb") as fh:
        for t in range(seq.n_frames):
            fh.write(seq.y[t].tobytes())
            fh.write(seq.u[t].tobytes())
            fh.write(seq.v[t].tobytes())


def _smooth_field(rng, height, width, sigma):
    f = gaussian_filter(rng.standard_normal((height, width)), sigma, mode="wrap")
    return f / (f.std() + 1e-12)


def _texture(rng, height, width, coarse_sigma, fine_sigma, detail, contrast, flatness):
    """Band-limited noise whose local contrast varies, leaving some regions nearly flat."""
    base = _smooth_field(rng, height, width, coarse_sigma)
    fine = _smooth_field(rng, height, width, fine_sigma)
    activity = expit(3.0 * (_smooth_field(rng, height, width, 10.0) - flatness))
    return contrast * activity * (base + detail * fine)


def _texture_params(rng):
    return dict(coarse_sigma=rng.uniform(3.0, 8.0), fine_sigma=rng.uniform(0.8, 2.0),
                detail=rng.uniform(0.05, 0.5), contrast=rng.uniform(12.0, 40.0),
                flatness=rng.uniform(-0.5, 1.0))


def _to_uint8(frames):
    return np.clip(np.rint(frames), 0, 255).astype(np.uint8)


def _noise(rng, shape, amplitude):
    if amplitude <= 0:
        return 0
    return rng.integers(-amplitude, amplitude + 1, size=shape)


def _sample(canvas, oy, ox, height, width):
    """``canvas`` window with top-left (oy, ox); cubic interpolation for fractional origins."""
    if float(oy).is_integer() and float(ox).is_integer():
        oy, ox = int(oy), int(ox)
        return canvas[oy:oy + height, ox:ox + width]
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    return map_coordinates(canvas, [yy + oy, xx + ox], order=3, mode="nearest")


def _draw_velocity(rng, limit, taken=(), step=0.25):
    while True:
        vel = tuple(float(x) for x in np.round(rng.uniform(-limit, limit, size=2) / step) * step)
        if abs(vel[0]) + abs(vel[1]) >= 0.5 and vel not in taken:
            return vel


def generate_synthetic(width: int, height: int, n_frames: int, motion_model: str,
                       seed: int, pan: tuple[float, float] | None = None,
                       noise: int | None = None, n_objects: int = 3) -> VideoSequence:
    """Deterministic synthetic sequence.

    ``pan`` is the per-frame content displacement (dx, dy) for global-pan,
    possibly fractional; drawn from the seed (integer steps) when omitted.
    Objects in multi-object move with distinct fractional velocities and
    bounce off the borders. ``noise`` is the amplitude of i.i.d. integer
    noise added to every frame (default 0, or 2 for static+noise).
    """
    if n_frames < 2:
        raise EmptyVideo("n_frames must be at least 2")
    if motion_model not in MOTION_MODELS:
        raise ValueError(f"unknown motion model {motion_model!r}")
    if width % 16 or height % 16:
        raise DimensionNotMacroblockAligned(f"{width}x{height} is not a multiple of 16")
    rng = np.random.default_rng(seed)
    params = _texture_params(rng)
    if noise is None:
        noise = 2 if motion_model == "static+noise" else 0

    if motion_model == "global-pan":
        dx, dy = pan if pan is not None else _draw_velocity(rng, 2.5, step=1.0)
        span_y, span_x = abs(dy) * (n_frames - 1), abs(dx) * (n_frames - 1)
        ch, cw = height + int(np.ceil(span_y)) + 1, width + int(np.ceil(span_x)) + 1
        canvas = 128.0 + _texture(rng, ch, cw, **params)
        cy0, cx0 = (span_y if dy > 0 else 0), (span_x if dx > 0 else 0)
        frames = np.stack([_sample(canvas, cy0 - dy * t, cx0 - dx * t, height, width)
                           for t in range(n_frames)])
    elif motion_model == "multi-object":
        background = 128.0 + _texture(rng, height, width, **params)
        frames = np.repeat(background[None], n_frames, axis=0)
        taken = []
        for _ in range(max(n_objects, 3)):
            oh, ow = (int(s) for s in rng.integers(max(8, height // 6),
                                                   max(12, height // 3) + 1, size=2))
            oh, ow = min(oh, height - 1), min(ow, width - 1)
            vx, vy = _draw_velocity(rng, 3.0, taken)
            taken.append((vx, vy))
            tex = np.pad(rng.uniform(60, 200) + _texture(rng, oh, ow, **_texture_params(rng)),
                         2, mode="reflect")
            py, px = float(rng.integers(0, height - oh + 1)), float(rng.integers(0, width - ow + 1))
            for t in range(n_frames):
                iy, ix = int(np.floor(py)), int(np.floor(px))
                frames[t, iy:iy + oh, ix:ix + ow] = _sample(tex, 2 - (py - iy), 2 - (px - ix), oh, ow)
                # bounce off the frame border
                if not 0 <= px + vx <= width - ow:
                    vx = -vx
                if not 0 <= py + vy <= height - oh:
                    vy = -vy
                px, py = px + vx, py + vy
    else:
        still = 128.0 + _texture(rng, height, width, **params)
        frames = np.repeat(still[None], n_frames, axis=0)

    frames = frames + _noise(rng, frames.shape, noise)
    return VideoSequence.from_luma(_to_uint8(frames))


def corpus_item(index: int, width: int, height: int, n_frames: int, seed: int,
                motion_models=MOTION_MODELS, noise: int | None = None):
    """Item ``index`` of a synthetic corpus as (name, video); seeded by (seed, index)."""
    model = motion_models[index % len(motion_models)]
    item_seed = int(np.random.SeedSequence([seed, index]).generate_state(1)[0])
    return f"seq{index:03d}", generate_synthetic(width, height, n_frames, model, item_seed,
                                                 noise=noise)


def synthetic_corpus(count: int, width: int, height: int, n_frames: int, seed: int,
                     motion_models=MOTION_MODELS, noise: int | None = None):
    """``count`` sequences cycling through ``motion_models``."""
    if count < 1:
        raise EmptyVideo("corpus must contain at least one sequence")
    return [corpus_item(i, width, height, n_frames, seed, motion_models, noise)
            for i in range(count)]
