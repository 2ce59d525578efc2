"""Plain-text model files.

Layout (space-separated, one record per line)::

    SSCL v1
    alpha <x> / beta <x> / gamma <x> / k <int> / max_outer <int> / tol <x>
    classes <C>            followed by C lines, one class name each
    status <s_0> ... <s_C-1>
    dims <n> <d>
    mean <d values>
    std <d values>
    w <c> <d values>       one line per class
    train                  followed by n lines: <label id> <d standardized values>
    end

Numbers carry 17 significant digits so a save/load cycle is exact.
"""

from __future__ import annotations

import numpy as np

from sscl._io import atomic_write_text, fmt
from sscl.data import Standardizer
from sscl.trainer import Hyperparams, Model

MAGIC = "SSCL v1"

__all__ = ["dumps_model", "loads_model", "save_model", "load_model", "ModelFormatError"]


class ModelFormatError(ValueError):
    pass


def _vec(xs) -> str:
    return " ".join(fmt(x) for x in xs)


def dumps_model(m: Model) -> str:
    h = m.hyper
    out = [MAGIC]
    out += [f"alpha {fmt(h.alpha)}", f"beta {fmt(h.beta)}", f"gamma {fmt(h.gamma)}",
            f"k {h.k}", f"max_outer {h.max_outer}", f"tol {fmt(h.tol)}"]
    out.append(f"classes {len(m.class_names)}")
    for name in m.class_names:
        if "\n" in name or "\r" in name:
            raise ModelFormatError("class names may not contain newlines")
        out.append(name)
    out.append("status " + " ".join(str(int(s)) for s in m.status))
    n, d = m.train_features.shape
    out.append(f"dims {n} {d}")
    out.append("mean " + _vec(m.standardizer.means))
    out.append("std " + _vec(m.standardizer.stddevs))
    for c, w in enumerate(m.weights):
        out.append(f"w {c} " + _vec(w))
    out.append("train")
    for lab, row in zip(m.train_labels, m.train_features):
        out.append(f"{int(lab)} " + _vec(row))
    out.append("end")
    return "\n".join(out) + "\n"


def loads_model(text: str) -> Model:
    lines = text.split("\n")
    pos = 0

    def take(key=None):
        nonlocal pos
        if pos >= len(lines):
            raise ModelFormatError("unexpected end of model file")
        line = lines[pos]
        pos += 1
        if key is None:
            return line
        parts = line.split(" ")
        if parts[0] != key:
            raise ModelFormatError(f"line {pos}: expected {key!r}, got {parts[0]!r}")
        return parts[1:]

    if take() != MAGIC:
        raise ModelFormatError(f"not a model file (missing {MAGIC!r} header)")
    try:
        h = Hyperparams(
            alpha=float(take("alpha")[0]), beta=float(take("beta")[0]),
            gamma=float(take("gamma")[0]), k=int(take("k")[0]),
            max_outer=int(take("max_outer")[0]), tol=float(take("tol")[0]),
        )
        C = int(take("classes")[0])
        names = tuple(take() for _ in range(C))
        status = np.array([int(s) for s in take("status")], dtype=np.int64)
        n, d = (int(v) for v in take("dims"))
        mean = np.array(take("mean"), dtype=float)
        std = np.array(take("std"), dtype=float)
        W = np.zeros((C, d))
        for c in range(C):
            parts = take("w")
            if int(parts[0]) != c:
                raise ModelFormatError(f"weight rows out of order at class {c}")
            W[c] = np.array(parts[1:], dtype=float)
        take("train")
        rows = [take().split(" ") for _ in range(n)]
        labels = np.array([int(r[0]) for r in rows], dtype=np.int64)
        X = np.array([r[1:] for r in rows], dtype=float).reshape(n, d)
        take("end")
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model file near line {pos}: {exc}") from None
    if status.shape != (C,) or mean.shape != (d,) or std.shape != (d,):
        raise ModelFormatError("inconsistent dimensions in model file")
    return Model(h, names, W, status, Standardizer(mean, std), X, labels)


def save_model(m: Model, path) -> None:
    atomic_write_text(path, dumps_model(m))


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())
