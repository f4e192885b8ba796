"""On-disk formats: MPS / coefficient-train JSON, binary shadow batches,
sketch families, tomography reports and CSV tables.

All writers are deterministic byte for byte: JSON is dumped with sorted
keys and fixed indentation, floats go through Python's shortest-roundtrip
repr, and CSV uses explicit ``\\n`` line endings.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from shadowtt.mps import MPS
from shadowtt.paulitt import TTCoeff
from shadowtt.pauli import PauliString
from shadowtt.shadows import ShadowBatch
from shadowtt.sketch import SketchFamily, TomographyReport

_SHADOW_MAGIC = b"SHDW"
_SHADOW_VERSION = 1
_SHADOW_HEADER = struct.Struct("<4sB3xIIIQ")  # magic, version, pad, n, count, W, seed


def _dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_json(path: str | Path):
    return json.loads(Path(path).read_text())


def _complex_nested(arr: np.ndarray) -> list:
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _nested_complex(nested) -> np.ndarray:
    arr = np.asarray(nested, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def save_mps(psi: MPS, path: str | Path, meta: dict | None = None) -> None:
    obj = {
        "n": psi.n,
        "bonds": psi.bonds,
        "components": [_complex_nested(c) for c in psi.components],
    }
    if meta is not None:
        obj["meta"] = meta
    _dump_json(obj, path)


def load_mps(path: str | Path) -> MPS:
    obj = _load_json(path)
    psi = MPS([_nested_complex(c) for c in obj["components"]])
    if psi.n != obj["n"] or psi.bonds != list(obj["bonds"]):
        raise ValueError(f"{path}: inconsistent MPS header")
    return psi


def load_mps_meta(path: str | Path) -> dict:
    return _load_json(path).get("meta", {})


def save_tt(c: TTCoeff, path: str | Path) -> None:
    _dump_json(tt_to_obj(c), path)


def tt_to_obj(c: TTCoeff) -> dict:
    return {"n": c.n, "ranks": c.ranks, "components": [comp.tolist() for comp in c.components]}


def tt_from_obj(obj: dict) -> TTCoeff:
    c = TTCoeff([np.asarray(comp, dtype=float) for comp in obj["components"]])
    if c.n != obj["n"] or c.ranks != list(obj["ranks"]):
        raise ValueError("inconsistent coefficient-train header")
    return c


def load_tt(path: str | Path) -> TTCoeff:
    return tt_from_obj(_load_json(path))


def save_shadow(batch: ShadowBatch, path: str | Path) -> None:
    header = _SHADOW_HEADER.pack(
        _SHADOW_MAGIC, _SHADOW_VERSION, batch.n, batch.count, batch.w_groups, batch.seed
    )
    Path(path).write_bytes(header + batch.codes.tobytes(order="C"))


def load_shadow(path: str | Path) -> ShadowBatch:
    raw = Path(path).read_bytes()
    if len(raw) < _SHADOW_HEADER.size:
        raise ValueError(f"{path}: truncated shadow file")
    magic, version, n, count, w_groups, seed = _SHADOW_HEADER.unpack_from(raw)
    if magic != _SHADOW_MAGIC or version != _SHADOW_VERSION:
        raise ValueError(f"{path}: not a version-{_SHADOW_VERSION} shadow file")
    payload = np.frombuffer(raw, dtype=np.uint8, offset=_SHADOW_HEADER.size)
    if payload.size != count * n:
        raise ValueError(f"{path}: payload size mismatch")
    return ShadowBatch(n=n, codes=payload.reshape(count, n).copy(), w_groups=w_groups, seed=seed)


def _string_to_obj(p: PauliString) -> dict:
    return {
        "coefficient": p.coefficient,
        "sites": {str(site): label for site, label in sorted(p.support.items())},
    }


def _string_from_obj(obj: dict) -> PauliString:
    return PauliString(
        {int(site): label for site, label in obj["sites"].items()}, obj["coefficient"]
    )


def save_family(family: SketchFamily, path: str | Path) -> None:
    obj = {
        "n": family.n,
        "window": family.window,
        "seed": family.seed,
        "r_tilde": family.r_tilde,
        "cuts": [
            {
                "left": [[_string_to_obj(p) for p in obs] for obs in family.left_obs[c]],
                "right": [[_string_to_obj(p) for p in obs] for obs in family.right_obs[c]],
            }
            for c in range(family.n - 1)
        ],
    }
    _dump_json(obj, path)


def load_family(path: str | Path) -> SketchFamily:
    obj = _load_json(path)
    return SketchFamily(
        n=obj["n"],
        left_obs=[
            [[_string_from_obj(p) for p in obs] for obs in cut["left"]] for cut in obj["cuts"]
        ],
        right_obs=[
            [[_string_from_obj(p) for p in obs] for obs in cut["right"]] for cut in obj["cuts"]
        ],
        window=obj["window"],
        seed=obj["seed"],
    )


def save_report(report: TomographyReport, path: str | Path) -> None:
    obj = {
        "recovered": tt_to_obj(report.recovered),
        "singular_values": [np.asarray(s).tolist() for s in report.singular_values],
        "residuals": list(report.residuals),
        "ranks": list(report.ranks),
        "warnings": list(report.warnings),
        "c_z": report.c_z,
        "c_g": report.c_g,
        "family_info": report.family_info,
    }
    _dump_json(obj, path)


def load_report(path: str | Path) -> TomographyReport:
    obj = _load_json(path)
    return TomographyReport(
        recovered=tt_from_obj(obj["recovered"]),
        singular_values=[np.asarray(s) for s in obj["singular_values"]],
        residuals=obj["residuals"],
        ranks=obj["ranks"],
        warnings=obj["warnings"],
        c_z=obj["c_z"],
        c_g=obj["c_g"],
        family_info=obj["family_info"],
    )


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Deterministic CSV: repr for floats, quoted only when necessary, LF endings."""

    def cell(value) -> str:
        if isinstance(value, (float, np.floating)):
            return repr(float(value))
        if value is None:
            return ""
        text = str(value)
        if any(ch in text for ch in ',"\n'):
            text = '"' + text.replace('"', '""') + '"'
        return text

    lines = [",".join(cell(v) for v in header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")
