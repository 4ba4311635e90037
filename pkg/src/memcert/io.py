"""JSON and CSV formats for channels, witnesses, decompositions, games and correlations.

Matrices are ``{"re": [[...]], "im": [[...]]}`` in row-major order. Parse
failures raise :class:`FormatError` naming the offending field; physical
invariant violations propagate from the model classes with their measured
residuals.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Any

import numpy as np

from .certification import SparseDecomposition, Witness
from .channels import ChoiOperator, QuantumChannel, choi_to_kraus
from .games import Correlation, Game, Scenario


class FormatError(ValueError):
    pass


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def matrix_from_json(obj: Any, name: str) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise FormatError(f"{name}: expected an object with 're' (and optional 'im') arrays")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{name}: matrix entries must be numbers ({exc})") from None
    if re.ndim != 2 or re.shape != im.shape:
        raise FormatError(f"{name}: 're' and 'im' must be equal-shaped 2-d arrays, got {re.shape} and {im.shape}")
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise FormatError(f"{name}: matrix entries must be finite")
    return re + 1j * im


def _int_field(obj: dict, key: str, where: str) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise FormatError(f"{where}: '{key}' must be a positive integer, got {v!r}")
    return v


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def loads(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


# -- channels ---------------------------------------------------------------------------------------


def channel_to_json(channel: QuantumChannel) -> dict:
    return {"dA": channel.dA, "dB": channel.dB, "kraus": [matrix_to_json(k) for k in channel.kraus]}


def choi_to_json(choi: ChoiOperator) -> dict:
    return {"dA": choi.dA, "dB": choi.dB, "choi": matrix_to_json(choi.matrix)}


def channel_from_json(obj: Any) -> QuantumChannel:
    if not isinstance(obj, dict):
        raise FormatError("channel spec must be a JSON object")
    dA, dB = _int_field(obj, "dA", "channel spec"), _int_field(obj, "dB", "channel spec")
    if ("kraus" in obj) == ("choi" in obj):
        raise FormatError("channel spec needs exactly one of 'kraus' or 'choi'")
    if "kraus" in obj:
        if not isinstance(obj["kraus"], list) or not obj["kraus"]:
            raise FormatError("channel spec: 'kraus' must be a nonempty list of matrices")
        kraus = [matrix_from_json(k, f"kraus[{i}]") for i, k in enumerate(obj["kraus"])]
        for i, k in enumerate(kraus):
            if k.shape != (dB, dA):
                raise FormatError(f"kraus[{i}]: shape {k.shape} does not match dB x dA = {(dB, dA)}")
        return QuantumChannel(tuple(kraus))
    j = matrix_from_json(obj["choi"], "choi")
    return choi_to_kraus(ChoiOperator(j, dA, dB))


# -- witnesses and decompositions -------------------------------------------------------------------


def witness_to_json(w: Witness) -> dict:
    return {"dX": w.dims[0], "dY": w.dims[1], "matrix": matrix_to_json(w.matrix)}


def witness_from_json(obj: Any) -> Witness:
    if not isinstance(obj, dict):
        raise FormatError("witness spec must be a JSON object")
    dx, dy = _int_field(obj, "dX", "witness spec"), _int_field(obj, "dY", "witness spec")
    return Witness(matrix_from_json(obj.get("matrix"), "matrix"), (dx, dy))


def decomposition_to_json(dec: SparseDecomposition) -> dict:
    return {
        "states_x": [matrix_to_json(s) for s in dec.states_x],
        "states_y": [matrix_to_json(s) for s in dec.states_y],
        "omega": [{"x": x, "y": y, "value": v} for (x, y), v in sorted(dec.omega.items())],
    }


def decomposition_from_json(obj: Any) -> SparseDecomposition:
    try:
        xs = [matrix_from_json(s, f"states_x[{i}]") for i, s in enumerate(obj["states_x"])]
        ys = [matrix_from_json(s, f"states_y[{i}]") for i, s in enumerate(obj["states_y"])]
        omega = {(int(e["x"]), int(e["y"])): float(e["value"]) for e in obj["omega"]}
    except (KeyError, TypeError) as exc:
        raise FormatError(f"decomposition: missing or malformed field {exc}") from None
    return SparseDecomposition(tuple(xs), tuple(ys), omega)


# -- games and correlations -------------------------------------------------------------------------


def game_to_json(game: Game) -> dict:
    sc = game.scenario
    entries = [
        {"b": b, "x": x, "y": y, "value": float(game.payoff[bi, x, y])}
        for bi, b in enumerate(sc.outcomes)
        for x in range(len(sc.inputs_x))
        for y in range(len(sc.inputs_y))
        if game.payoff[bi, x, y] != 0
    ]
    return {
        "inputs_x": [matrix_to_json(s) for s in sc.inputs_x],
        "inputs_y": [matrix_to_json(s) for s in sc.inputs_y],
        "outcomes": list(sc.outcomes),
        "payoff": entries,
        "eb_threshold": float(game.eb_threshold),
    }


def scenario_from_json(obj: Any) -> Scenario:
    """Read the scenario part of a game (or bare scenario) document.

    Without an ``outcomes`` list the outcomes default to the Bell labels
    ``1..dY^2``.
    """
    if not isinstance(obj, dict):
        raise FormatError("scenario spec must be a JSON object")
    try:
        xs = [matrix_from_json(s, f"inputs_x[{i}]") for i, s in enumerate(obj["inputs_x"])]
        ys = [matrix_from_json(s, f"inputs_y[{i}]") for i, s in enumerate(obj["inputs_y"])]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"scenario: missing or malformed field {exc}") from None
    if not xs or not ys:
        raise FormatError("scenario: input families must be nonempty")
    outcomes = obj.get("outcomes")
    if outcomes is None:
        outcomes = list(range(1, ys[0].shape[0] ** 2 + 1))
    return Scenario(tuple(xs), tuple(ys), tuple(outcomes))


def game_from_json(obj: Any) -> Game:
    sc = scenario_from_json(obj)
    payoff = np.zeros(sc.shape)
    for n, e in enumerate(obj.get("payoff", [])):
        try:
            b, x, y, v = int(e["b"]), int(e["x"]), int(e["y"]), float(e["value"])
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"payoff[{n}]: needs integer b, x, y and numeric value") from None
        if b not in sc.outcomes or not (0 <= x < sc.shape[1]) or not (0 <= y < sc.shape[2]):
            raise FormatError(f"payoff[{n}]: index (b={b}, x={x}, y={y}) out of range")
        payoff[sc.outcome_index(b), x, y] = v
    return Game(sc, payoff, float(obj.get("eb_threshold", 0.0)))


def correlation_to_csv(corr: Correlation) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["b", "x", "y", "p"])
    nb, nx, ny = corr.p.shape
    for bi, b in enumerate(corr.outcomes):
        for x in range(nx):
            for y in range(ny):
                w.writerow([b, x, y, fmt_float(corr.p[bi, x, y])])
    return buf.getvalue()


def correlation_from_csv(text: str) -> Correlation:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["b", "x", "y", "p"]:
        raise FormatError("correlation CSV: header must be 'b,x,y,p'")
    entries = {}
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            if len(row) != 4:
                raise ValueError
            b, x, y, p = int(row[0]), int(row[1]), int(row[2]), float(row[3])
            if x < 0 or y < 0 or not np.isfinite(p):
                raise ValueError
        except ValueError:
            raise FormatError(f"correlation CSV: malformed row {n}: {','.join(row)!r}") from None
        if (b, x, y) in entries:
            raise FormatError(f"correlation CSV: duplicate entry at row {n}")
        entries[(b, x, y)] = p
    if not entries:
        raise FormatError("correlation CSV: no data rows")
    outcomes = sorted({b for b, _, _ in entries})
    nx = 1 + max(x for _, x, _ in entries)
    ny = 1 + max(y for _, _, y in entries)
    if len(entries) != len(outcomes) * nx * ny:
        raise FormatError(
            f"correlation CSV: expected {len(outcomes) * nx * ny} rows for a full tensor, got {len(entries)}"
        )
    p = np.zeros((len(outcomes), nx, ny))
    for (b, x, y), v in entries.items():
        p[outcomes.index(b), x, y] = v
    return Correlation(p, tuple(outcomes))
