"""Layered ansatz circuits acting on ``|+>^n``.

An ansatz is a block of layers repeated ``depth`` times. Blocks are applied to
the input state in order 0, 1, ..., depth-1 and layers within a block in list
order, so the operator product reads right-to-left: the first layer in a
block is the rightmost factor. Parameters are flattened block-major, i.e.
``params[block * len(block_layers) + layer]``.

Families
--------
``qaoa_tfi``   [ZZ on 1-based bonds (2,3),(4,5),..., ZZ on (1,2),(3,4),..., X]
``sb_tfi``     [ZZ ring, X, Z]                 Z breaks the global spin flip
``tfc_bare``   [ZXZ ring, X]
``sb_tfc``     [ZXZ ring, X, Z odd, Z even]     odd/even are 1-based site labels
``sb_cluster`` as ``sb_tfc`` with the open-chain ZXZ layer
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .hamiltonians import ModelSpec, parity_ops, sublattice_parity, zxz_terms
from .pauli import PauliString, PauliSum, strings_commute
from .statevector import LayerSpec, apply_layer_rows, plus_state

LAYOUT_VERSION = 1
FAMILIES = ("qaoa_tfi", "sb_tfi", "tfc_bare", "sb_tfc", "sb_cluster")


@dataclass(frozen=True, eq=False)
class AnsatzSpec:
    family: str
    n_qubits: int
    depth: int
    block: tuple[LayerSpec, ...]

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        for layer in self.block:
            if layer.n_qubits != self.n_qubits:
                raise ValueError(f"layer {layer.label} has wrong qubit count")

    @property
    def n_params(self) -> int:
        return self.depth * len(self.block)

    @property
    def layers(self) -> list[LayerSpec]:
        """Layer for every flat parameter index, in application order."""
        return list(self.block) * self.depth

    def param_index(self, block: int, layer: int) -> int:
        if not (0 <= block < self.depth and 0 <= layer < len(self.block)):
            raise IndexError((block, layer))
        return block * len(self.block) + layer

    def symmetry_breaking_mask(self) -> np.ndarray:
        flags = [layer.symmetry_breaking for layer in self.block]
        return np.array(flags * self.depth, dtype=bool)

    def with_depth(self, depth: int) -> "AnsatzSpec":
        return replace(self, depth=depth)

    def check_params(self, params: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {params.shape}")
        return params


def prepare_state(spec: AnsatzSpec, params) -> np.ndarray:
    """Output state of the circuit at ``params``."""
    params = spec.check_params(params)
    psi = plus_state(spec.n_qubits)[None, :].copy()
    for layer, theta in zip(spec.layers, params):
        apply_layer_rows(layer, theta, psi)
    return psi[0]


def _layer(label, n, terms, tags, breaking=False) -> LayerSpec:
    gen = PauliSum(n, [(1.0, s) for s in terms])
    tags = [t for t in tags if all(strings_commute(t, s) for s in gen.strings)]
    return LayerSpec(label, gen, tuple(tags), breaking)


def _x_layer(n, tags) -> LayerSpec:
    return _layer("x", n, [PauliString.on(n, "X", [i]) for i in range(n)], tags)


def _z_layer(label, n, sites, tags) -> LayerSpec:
    return _layer(label, n, [PauliString.on(n, "Z", [i]) for i in sites], tags, True)


def qaoa_tfi(n: int, depth: int) -> AnsatzSpec:
    if n % 2:
        raise ValueError(f"qaoa_tfi needs even n, got {n}")
    tags = parity_ops(ModelSpec("tfi", n))
    # 1-based Z_{2i}Z_{2i+1} -> internal bonds (1,2), (3,4), ..., (n-1, 0)
    even = [PauliString.on(n, "ZZ", [i, i + 1]) for i in range(1, n, 2)]
    odd = [PauliString.on(n, "ZZ", [i, i + 1]) for i in range(0, n, 2)]
    block = (
        _layer("zz_even", n, even, tags),
        _layer("zz_odd", n, odd, tags),
        _x_layer(n, tags),
    )
    return AnsatzSpec("qaoa_tfi", n, depth, block)


def sb_tfi(n: int, depth: int) -> AnsatzSpec:
    if n < 2:
        raise ValueError("sb_tfi needs n >= 2")
    tags = parity_ops(ModelSpec("tfi", n))
    ring = PauliSum(n, [(1.0, PauliString.on(n, "ZZ", [i, i + 1])) for i in range(n)])
    block = (
        LayerSpec("zz", ring, tuple(tags)),
        _x_layer(n, tags),
        _z_layer("z", n, range(n), tags),
    )
    return AnsatzSpec("sb_tfi", n, depth, block)


def _cluster_block(n: int, periodic: bool, breaking: bool) -> tuple[LayerSpec, ...]:
    if n % 2:
        raise ValueError(f"cluster ansatz needs even n, got {n}")
    tags = [sublattice_parity(n, 1), sublattice_parity(n, 0)]
    block = (_layer("zxz", n, zxz_terms(n, periodic), tags), _x_layer(n, tags))
    if not breaking:
        return block
    # 1-based odd sites are internal even sites and vice versa
    return block + (
        _z_layer("z_odd", n, range(0, n, 2), tags),
        _z_layer("z_even", n, range(1, n, 2), tags),
    )


def tfc_bare(n: int, depth: int) -> AnsatzSpec:
    return AnsatzSpec("tfc_bare", n, depth, _cluster_block(n, True, False))


def sb_tfc(n: int, depth: int) -> AnsatzSpec:
    return AnsatzSpec("sb_tfc", n, depth, _cluster_block(n, True, True))


def sb_cluster_open(n: int, depth: int) -> AnsatzSpec:
    return AnsatzSpec("sb_cluster", n, depth, _cluster_block(n, False, True))


_BUILDERS = {
    "qaoa_tfi": qaoa_tfi,
    "sb_tfi": sb_tfi,
    "tfc_bare": tfc_bare,
    "sb_tfc": sb_tfc,
    "sb_cluster": sb_cluster_open,
}

# (model, --ansatz flag) -> family
_CLI_FAMILIES = {
    ("tfi", "qaoa"): "qaoa_tfi",
    ("tfi", "sb"): "sb_tfi",
    ("tfc", "qaoa"): "tfc_bare",
    ("tfc", "sb"): "sb_tfc",
    ("cluster", "sb"): "sb_cluster",
}


def family_for(model: str, kind: str) -> str:
    try:
        return _CLI_FAMILIES[(model, kind)]
    except KeyError:
        raise ValueError(f"no {kind!r} ansatz for model {model!r}") from None


def build_ansatz(family: str, n: int, depth: int) -> AnsatzSpec:
    if family not in _BUILDERS:
        raise ValueError(f"unknown ansatz family {family!r}")
    return _BUILDERS[family](n, depth)


@dataclass(frozen=True)
class InitStrategy:
    """``normal``: N(0, sigma^2) everywhere. ``sb_offset``: additionally shift
    symmetry-breaking layer parameters by ``2 pi / depth``."""

    kind: str = "normal"
    sigma: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("normal", "sb_offset"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "InitStrategy":
        """Parse ``normal:SIGMA`` or ``sboffset:SIGMA``."""
        kind, _, sigma = text.partition(":")
        kind = {"normal": "normal", "sboffset": "sb_offset", "sb_offset": "sb_offset"}.get(
            kind.strip().lower()
        )
        if kind is None:
            raise ValueError(f"bad init spec {text!r}")
        return cls(kind, float(sigma) if sigma else 1e-3, seed)

    def __str__(self) -> str:
        return f"{'sboffset' if self.kind == 'sb_offset' else 'normal'}:{self.sigma:g}"


def init_params(spec: AnsatzSpec, strategy: InitStrategy) -> np.ndarray:
    rng = np.random.default_rng(strategy.seed)
    params = rng.normal(0.0, strategy.sigma, spec.n_params)
    if strategy.kind == "sb_offset":
        params[spec.symmetry_breaking_mask()] += 2 * np.pi / spec.depth
    return params


def insert_block(
    spec: AnsatzSpec,
    params,
    perturb_sigma: float = 0.01,
    rng: np.random.Generator | None = None,
    *,
    new_block_sigma: float = 1e-3,
    position: str = "floor",
) -> tuple[AnsatzSpec, np.ndarray]:
    """Grow a circuit by one block inserted in the middle, then perturb it.

    The new block sits at block index ``depth // 2`` (``position="floor"``) or
    ``ceil(depth / 2)`` (``"ceil"``) in application order. Its parameters are
    drawn from N(0, new_block_sigma^2); pass 0 for an identity block. Every
    parameter then receives independent N(0, perturb_sigma^2) noise.
    """
    params = spec.check_params(params)
    rng = np.random.default_rng() if rng is None else rng
    if position == "floor":
        at = spec.depth // 2
    elif position == "ceil":
        at = -(-spec.depth // 2)
    else:
        raise ValueError(f"position must be 'floor' or 'ceil', got {position!r}")
    width = len(spec.block)
    fresh = rng.normal(0.0, new_block_sigma, width) if new_block_sigma > 0 else np.zeros(width)
    grown = np.concatenate([params[: at * width], fresh, params[at * width :]])
    if perturb_sigma > 0:
        grown = grown + rng.normal(0.0, perturb_sigma, grown.size)
    return spec.with_depth(spec.depth + 1), grown
