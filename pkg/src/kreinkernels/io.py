"""JSON (de)serialization. Complex numbers are ``[re, im]`` pairs throughout."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from .dilation import HermitianLinearMap
from .errors import ValidationError
from .fock import PolynomialKernel
from .hankel import MomentSequence, TruncatedGNS
from .kernel import FiniteKernel
from .kolmogorov import KolmogorovDecomposition, SemigroupAction


def encode_complex(a) -> Any:
    """Nested lists with every scalar replaced by ``[re, im]``."""
    arr = np.asarray(a, dtype=complex)
    pairs = np.stack([arr.real, arr.imag], axis=-1)
    # normalize -0.0 so output is byte-stable
    return (pairs + 0.0).tolist()


def decode_complex(obj, shape: tuple[int, ...] | None = None, what: str = "value") -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what}: not a numeric array") from exc
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise ValidationError(f"{what}: complex entries must be [re, im] pairs")
    out = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and out.shape != tuple(shape):
        raise ValidationError(f"{what}: shape {out.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(out)):
        raise ValidationError(f"{what}: non-finite entries")
    return out


def _require(data: dict, *keys: str, what: str) -> None:
    if not isinstance(data, dict):
        raise ValidationError(f"{what}: expected a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ValidationError(f"{what}: missing field(s) {', '.join(missing)}")


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{what} must be an integer")
    return value


def kernel_to_json(k: FiniteKernel) -> dict:
    return {"labels": list(k.labels), "h": k.h, "hermitian": bool(k.is_hermitian()), "blocks": encode_complex(k.blocks)}


def kernel_from_json(data: dict) -> FiniteKernel:
    _require(data, "labels", "h", "blocks", what="kernel")
    labels = data["labels"]
    if not isinstance(labels, list) or not labels:
        raise ValidationError("kernel: labels must be a non-empty list")
    h = _int(data["h"], "kernel h")
    n = len(labels)
    k = FiniteKernel(tuple(str(x) for x in labels), h, decode_complex(data["blocks"], (n, n, h, h), "kernel blocks"))
    if data.get("hermitian") and not k.is_hermitian():
        raise ValidationError(f"kernel is declared hermitian but deviates by {k.hermitian_deviation():.3e}")
    return k


def decomposition_to_json(d: KolmogorovDecomposition) -> dict:
    return {
        "k": d.k,
        "J": [int(s) for s in d.J],
        "V": {x: encode_complex(d.V[i]) for i, x in enumerate(d.labels)},
    }


def decomposition_from_json(data: dict, labels=None) -> KolmogorovDecomposition:
    _require(data, "k", "J", "V", what="decomposition")
    k = _int(data["k"], "decomposition k")
    j = np.asarray(data["J"])
    if j.shape != (k,) or not np.all(np.isin(j, (-1, 1))):
        raise ValidationError("decomposition: J must list k entries of +1/-1")
    vmap = data["V"]
    if not isinstance(vmap, dict) or not vmap:
        raise ValidationError("decomposition: V must be a non-empty object keyed by label")
    order = list(labels) if labels is not None else list(vmap)
    if set(order) != set(vmap):
        raise ValidationError("decomposition labels do not match the kernel labels")
    mats = [decode_complex(vmap[x], what=f"V[{x}]") for x in order]
    if any(m.ndim != 2 or m.shape[0] != k for m in mats) or len({m.shape for m in mats}) != 1:
        raise ValidationError(f"decomposition: every V[x] must be a k x h matrix with k={k}")
    h = mats[0].shape[1]
    return KolmogorovDecomposition(tuple(order), h, np.stack(mats), j.astype(int))


def action_from_json(data: dict) -> SemigroupAction:
    _require(data, "generators", what="action")
    maps, inv = {}, {}
    for g in data["generators"]:
        _require(g, "name", "involution", "map", what="action generator")
        maps[str(g["name"])] = {str(a): str(b) for a, b in g["map"].items()}
        inv[str(g["name"])] = str(g["involution"])
    return SemigroupAction(maps, inv)


def action_to_json(act: SemigroupAction) -> dict:
    return {
        "generators": [
            {"name": g, "involution": act.involution[g], "map": dict(act.maps[g])} for g in act.generators
        ]
    }


def moments_from_json(data: dict) -> MomentSequence:
    _require(data, "N", "d", "entries", what="moments")
    n_gen, d = _int(data["N"], "moments N"), _int(data["d"], "moments d")
    values = {}
    for e in data["entries"]:
        _require(e, "word", "value", what="moment entry")
        w = tuple(_int(i, "word letter") for i in e["word"])
        if w in values:
            raise ValidationError(f"duplicate moment entry for word {list(w)}")
        values[w] = complex(decode_complex(e["value"], (), f"moment {list(w)}"))
    return MomentSequence(n_gen, d, values)


def moments_to_json(sigma: MomentSequence) -> dict:
    return {
        "N": sigma.N,
        "d": sigma.d,
        "entries": [{"word": list(w), "value": encode_complex(v)} for w, v in sorted(sigma.values.items(), key=lambda t: (len(t[0]), t[0]))],
    }


def map_from_json(data: dict) -> HermitianLinearMap:
    _require(data, "n", "h", "choi", what="map")
    n, h = _int(data["n"], "map n"), _int(data["h"], "map h")
    if n < 1 or h < 1:
        raise ValidationError("map: n and h must be positive")
    return HermitianLinearMap(n, h, decode_complex(data["choi"], (n * h, n * h), "map choi"))


def map_to_json(t: HermitianLinearMap) -> dict:
    return {"n": t.n, "h": t.h, "choi": encode_complex(t.choi)}


def polynomial_from_json(data: dict) -> PolynomialKernel:
    _require(data, "d", "terms", what="polynomial kernel")
    d = _int(data["d"], "polynomial d")
    coeffs = {}
    for t in data["terms"]:
        _require(t, "alpha", "beta", "value", what="polynomial term")
        a = tuple(_int(i, "alpha entry") for i in t["alpha"])
        b = tuple(_int(i, "beta entry") for i in t["beta"])
        if len(a) != d or len(b) != d or min(a + b, default=0) < 0:
            raise ValidationError(f"bad multi-index pair {list(a)}, {list(b)} for d={d}")
        coeffs[(a, b)] = coeffs.get((a, b), 0) + complex(decode_complex(t["value"], (), "term value"))
    return PolynomialKernel(d, coeffs)


def polynomial_to_json(k: PolynomialKernel) -> dict:
    return {
        "d": k.d,
        "terms": [{"alpha": list(a), "beta": list(b), "value": encode_complex(v)} for (a, b), v in sorted(k.coeffs.items())],
    }


def gns_to_json(g: TruncatedGNS) -> dict:
    """``pi`` matrices keyed by generator, plus ``Omega`` and the underlying decomposition."""
    return {
        "N": g.N,
        "d": g.depth,
        "k": g.k,
        "J": [int(s) for s in g.decomposition.J],
        "omega": encode_complex(g.omega),
        "pi": {str(i): encode_complex(m) for i, m in sorted(g.pi.items())},
        "decomposition": decomposition_to_json(g.decomposition),
    }


def load(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read JSON from {path}: {exc}") from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def save(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")


def digest(*paths: str | Path) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()

