"""Complex-valued fully connected feed-forward wave function.

Every layer is ``y -> phi(W y + b)`` with ``phi`` acting separately on real
and imaginary parts; the final ``alpha * L`` outputs are reduced by a complex
logsumexp to ``log <x|psi>``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .basis import SectorBasis

__all__ = [
    "Architecture",
    "NetworkParams",
    "SELU_ALPHA",
    "SELU_LAMBDA",
    "backward",
    "complex_activation",
    "forward",
    "init_params",
    "load_params",
    "log_amplitude",
    "log_amplitudes",
    "num_params",
    "save_params",
    "selu",
]

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772
ACTIVATIONS = ("selu", "tanh")
CHECKPOINT_FORMAT = 1


def selu(x):
    """``lambda * x`` for ``x > 0``, ``lambda * a * (exp(x) - 1)`` otherwise."""
    x = np.asarray(x, dtype=float)
    return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def selu_grad(x):
    # right limit at x == 0
    x = np.asarray(x, dtype=float)
    return SELU_LAMBDA * np.where(x >= 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def _tanh_grad(x):
    t = np.tanh(x)
    return 1.0 - t * t


_REAL_ACT = {"selu": (selu, selu_grad), "tanh": (np.tanh, _tanh_grad)}


def complex_activation(z, kind: str = "selu"):
    """Apply the real activation to ``Re z`` and ``Im z`` separately."""
    f, _ = _REAL_ACT[kind]
    z = np.asarray(z, dtype=complex)
    return f(z.real) + 1j * f(z.imag)


def _activation_backward(z, gbar, kind):
    _, df = _REAL_ACT[kind]
    return df(z.real) * gbar.real + 1j * (df(z.imag) * gbar.imag)


@dataclass(frozen=True)
class Architecture:
    L: int
    alpha: int
    mu: int
    activation: str = "selu"
    skip_blocks: tuple[int, int] | None = None  # (n_blocks, layers_per_block)

    def __post_init__(self):
        for name in ("L", "alpha", "mu"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.skip_blocks is not None:
            n_b, ell = self.skip_blocks
            if n_b < 1 or ell < 1 or n_b * ell != self.mu:
                raise ValueError(f"skip_blocks {self.skip_blocks} incompatible with mu={self.mu}")
            object.__setattr__(self, "skip_blocks", (int(n_b), int(ell)))

    @property
    def width(self) -> int:
        return self.alpha * self.L

    def shapes(self) -> list[tuple[tuple[int, int], int]]:
        w = self.width
        return [((w, self.L if l == 0 else w), w) for l in range(self.mu)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["skip_blocks"] = list(self.skip_blocks) if self.skip_blocks else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        d = dict(d)
        if d.get("skip_blocks") is not None:
            d["skip_blocks"] = tuple(d["skip_blocks"])
        return cls(**d)


def num_params(arch: Architecture) -> int:
    """Number of complex parameters (weights and biases)."""
    w = arch.width
    return (w * arch.L + w) + (arch.mu - 1) * (w * w + w)


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """Weights and biases as views into one flat complex vector.

    Layout is ``W1, b1, W2, b2, ...`` with each ``W`` row-major.
    """

    arch: Architecture
    flat: np.ndarray = field(repr=False)
    weights: tuple = field(init=False, repr=False)
    biases: tuple = field(init=False, repr=False)

    def __post_init__(self):
        flat = np.asarray(self.flat, dtype=complex)
        if flat.shape != (num_params(self.arch),):
            raise ValueError(f"expected {num_params(self.arch)} parameters, got {flat.shape}")
        object.__setattr__(self, "flat", flat)
        ws, bs = [], []
        pos = 0
        for (rows, cols), nb in self.arch.shapes():
            ws.append(flat[pos:pos + rows * cols].reshape(rows, cols))
            pos += rows * cols
            bs.append(flat[pos:pos + nb])
            pos += nb
        object.__setattr__(self, "weights", tuple(ws))
        object.__setattr__(self, "biases", tuple(bs))

    @classmethod
    def from_layers(cls, arch: Architecture, weights, biases) -> "NetworkParams":
        parts = []
        for (shape, nb), W, b in zip(arch.shapes(), weights, biases, strict=True):
            W = np.asarray(W, dtype=complex)
            b = np.asarray(b, dtype=complex)
            if W.shape != shape or b.shape != (nb,):
                raise ValueError(f"layer shapes {W.shape}, {b.shape} do not match {shape}, ({nb},)")
            parts += [W.ravel(), b]
        return cls(arch, np.concatenate(parts))

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.arch, self.flat.copy())

    def real_vector(self) -> np.ndarray:
        """Interleaved ``(Re, Im)`` view of the parameters."""
        return self.flat.view(np.float64)

    @classmethod
    def from_real_vector(cls, arch: Architecture, vec: np.ndarray) -> "NetworkParams":
        return cls(arch, np.ascontiguousarray(vec, dtype=np.float64).view(complex))


def init_params(arch: Architecture, seed: int) -> NetworkParams:
    """Complex Gaussian weights with ``E|W|^2 = 1 / fan_in``; zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for (rows, cols), nb in arch.shapes():
        scale = np.sqrt(0.5 / cols)
        weights.append(scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))))
        biases.append(np.zeros(nb, dtype=complex))
    return NetworkParams.from_layers(arch, weights, biases)


def _as_inputs(L: int, x) -> np.ndarray:
    if isinstance(x, SectorBasis):
        if x.L != L:
            raise ValueError(f"basis has L={x.L}, network expects L={L}")
        return x.bits()
    x = np.asarray(x)
    if x.ndim == 0:
        w = int(x)
        if w < 0 or w >> L:
            raise ValueError(f"word {w} does not fit in L={L} bits")
        return ((w >> np.arange(L)) & 1).astype(float)[None, :]
    if x.shape[-1] != L:
        raise ValueError(f"input has {x.shape[-1]} sites, network expects L={L}")
    return np.atleast_2d(x).astype(float)


def _logsumexp(y: np.ndarray) -> np.ndarray:
    m = y.real.max(axis=1, keepdims=True)
    return m[:, 0] + np.log(np.exp(y - m).sum(axis=1))


def forward(params: NetworkParams, X: np.ndarray, cache: bool = False):
    """Log-amplitudes for the rows of ``X`` (``(D, L)`` occupations)."""
    arch = params.arch
    skip = arch.skip_blocks[1] if arch.skip_blocks else None
    y = X
    z_first = None
    inputs, pre = [], []
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = y @ W.T + b
        if l == 0:
            z_first = z
        inputs.append(y)
        pre.append(z)
        y = complex_activation(z, arch.activation)
        if skip and (l + 1) % skip == 0:
            y = y + z_first
    logpsi = _logsumexp(y)
    if cache:
        return logpsi, (inputs, pre, y)
    return logpsi


def backward(params: NetworkParams, logpsi: np.ndarray, cache, gbar_logpsi: np.ndarray) -> np.ndarray:
    """Reverse accumulation from ``dL/dRe logpsi + i dL/dIm logpsi``.

    Returns the flat complex gradient ``dL/dRe theta + i dL/dIm theta`` in
    the parameter layout of :class:`NetworkParams`.
    """
    arch = params.arch
    skip = arch.skip_blocks[1] if arch.skip_blocks else None
    inputs, pre, y_out = cache
    softmax = np.exp(y_out - logpsi[:, None])
    g = softmax.conj() * gbar_logpsi[:, None]
    g_first = 0
    grads = [None] * (2 * arch.mu)
    for l in range(arch.mu - 1, -1, -1):
        if skip and (l + 1) % skip == 0:
            g_first = g_first + g
        gz = _activation_backward(pre[l], g, arch.activation)
        if l == 0:
            gz = gz + g_first
        grads[2 * l] = gz.T @ inputs[l].conj()
        grads[2 * l + 1] = gz.sum(axis=0)
        if l > 0:
            g = gz @ params.weights[l].conj()
    return np.concatenate([np.ravel(a) for a in grads])


def log_amplitudes(params: NetworkParams, words) -> np.ndarray:
    """Log-amplitudes over a :class:`SectorBasis` or an array of bit rows."""
    return forward(params, _as_inputs(params.arch.L, words))


def log_amplitude(params: NetworkParams, x) -> complex:
    """``log <x|psi_theta>`` for one word (integer or length-``L`` bit vector)."""
    X = _as_inputs(params.arch.L, x)
    if X.shape[0] != 1:
        raise ValueError("log_amplitude takes a single configuration; use log_amplitudes")
    return complex(forward(params, X)[0])


def save_params(params: NetworkParams, path, lineage: dict | None = None) -> Path:
    """Versioned checkpoint: architecture, flat complex vector, seed lineage."""
    path = Path(path)
    np.savez(
        path,
        format_version=CHECKPOINT_FORMAT,
        architecture=json.dumps(params.arch.to_dict()),
        lineage=json.dumps(lineage or {}),
        flat=params.flat,
    )
    return path if path.suffix == ".npz" else path.with_name(path.name + ".npz")


def load_params(path) -> tuple[NetworkParams, dict]:
    with np.load(path) as f:
        if int(f["format_version"]) != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint version {int(f['format_version'])}")
        arch = Architecture.from_dict(json.loads(str(f["architecture"])))
        lineage = json.loads(str(f["lineage"]))
        return NetworkParams(arch, f["flat"].copy()), lineage
