"""JSON encoding of spectra, states and protocols.

Complex matrices are stored as ``{"re": [[...]], "im": [[...]]}``. A state
document is either ``{"d": 2, "lambdas": [...]}`` or
``{"d": 2, "amplitudes_re": [...], "amplitudes_im": [...]}``; a protocol
document is::

    {
      "format": "qdense-protocol/1",
      "d": 2,
      "state": {"d": 2, "lambdas": [...]},          # optional
      "encodings": [{"kraus": [{"re": ..., "im": ...}, ...]}, ...],
      "measurement": {
        "has_inconclusive": true,
        "elements": [{"label": "0,0", "re": ..., "im": ...}, ...]
      }
    }
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .densecoding import DenseCodingProtocol
from .quantum import BipartiteState, Povm, QuantumChannel, SchmidtSpectrum, schmidt_decompose

PROTOCOL_FORMAT = "qdense-protocol/1"


class FormatError(ValueError):
    """A JSON document does not match the expected schema."""


def _field(doc, key, where):
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: expected an object")
    if key not in doc:
        raise FormatError(f"{where}: missing field {key!r}")
    return doc[key]


def _real_array(value, where, ndim):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: expected numbers ({exc})") from None
    if arr.ndim != ndim:
        raise FormatError(f"{where}: expected a {ndim}-D array, got {arr.ndim}-D")
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{where}: non-finite value")
    return arr


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(doc, where="matrix") -> np.ndarray:
    re = _real_array(_field(doc, "re", where), f"{where}.re", 2)
    im = _real_array(_field(doc, "im", where), f"{where}.im", 2)
    if re.shape != im.shape:
        raise FormatError(f"{where}: re has shape {re.shape} but im has shape {im.shape}")
    return re + 1j * im


def spectrum_to_json(spec: SchmidtSpectrum) -> dict:
    return {"d": spec.d, "lambdas": spec.lambdas.tolist()}


def state_to_json(psi: BipartiteState) -> dict:
    return {
        "d": psi.d,
        "amplitudes_re": psi.amplitudes.real.tolist(),
        "amplitudes_im": psi.amplitudes.imag.tolist(),
    }


def spectrum_from_json(doc, where="state") -> SchmidtSpectrum:
    """Spectrum from either state form; amplitude states are Schmidt-decomposed."""
    d = _field(doc, "d", where)
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise FormatError(f"{where}.d: expected a positive integer, got {d!r}")
    if "lambdas" in doc:
        lam = _real_array(doc["lambdas"], f"{where}.lambdas", 1)
        if lam.size != d:
            raise FormatError(f"{where}.lambdas: expected {d} values, got {lam.size}")
        try:
            return SchmidtSpectrum(lam)
        except ValueError as exc:
            raise FormatError(f"{where}.lambdas: {exc}") from None
    if "amplitudes_re" in doc:
        re = _real_array(doc["amplitudes_re"], f"{where}.amplitudes_re", 1)
        im = _real_array(doc.get("amplitudes_im", [0.0] * re.size), f"{where}.amplitudes_im", 1)
        if re.size != d * d or im.size != d * d:
            raise FormatError(f"{where}: expected {d * d} amplitudes")
        try:
            psi = BipartiteState(d, re + 1j * im)
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
        return schmidt_decompose(psi)[0]
    raise FormatError(f"{where}: needs either 'lambdas' or 'amplitudes_re'/'amplitudes_im'")


def protocol_to_json(proto: DenseCodingProtocol, spec: SchmidtSpectrum | None = None) -> dict:
    m = proto.measurement
    doc = {"format": PROTOCOL_FORMAT, "d": proto.d}
    if spec is not None:
        doc["state"] = spectrum_to_json(spec)
    doc["encodings"] = [{"kraus": [matrix_to_json(k) for k in ch.kraus]} for ch in proto.encodings]
    doc["measurement"] = {
        "has_inconclusive": m.has_inconclusive,
        "elements": [dict(label=lab, **matrix_to_json(e)) for lab, e in zip(m.labels, m.elements)],
    }
    return doc


def protocol_from_json(doc):
    """Parse a protocol document; returns ``(protocol, spectrum or None)``."""
    fmt = doc.get("format", PROTOCOL_FORMAT) if isinstance(doc, dict) else None
    if fmt != PROTOCOL_FORMAT:
        raise FormatError(f"protocol: unsupported format {fmt!r}")
    d = _field(doc, "d", "protocol")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise FormatError(f"protocol.d: expected a positive integer, got {d!r}")
    encodings = []
    for r, enc in enumerate(_field(doc, "encodings", "protocol")):
        where = f"protocol.encodings[{r}]"
        kraus = [
            matrix_from_json(k, f"{where}.kraus[{i}]")
            for i, k in enumerate(_field(enc, "kraus", where))
        ]
        try:
            encodings.append(QuantumChannel(tuple(kraus)))
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
    meas = _field(doc, "measurement", "protocol")
    flag = _field(meas, "has_inconclusive", "protocol.measurement")
    if not isinstance(flag, bool):
        raise FormatError("protocol.measurement.has_inconclusive: expected true or false")
    raw = _field(meas, "elements", "protocol.measurement")
    elements = [matrix_from_json(e, f"protocol.measurement.elements[{i}]") for i, e in enumerate(raw)]
    labels = [str(e.get("label", i)) for i, e in enumerate(raw)]
    try:
        povm = Povm(tuple(elements), has_inconclusive=flag, labels=tuple(labels))
        proto = DenseCodingProtocol(d, tuple(encodings), povm)
    except ValueError as exc:
        raise FormatError(f"protocol: {exc}") from None
    spec = spectrum_from_json(doc["state"], "protocol.state") if "state" in doc else None
    return proto, spec


def load_json(path) -> object:
    """Read a JSON file, reporting syntax errors with their line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"
