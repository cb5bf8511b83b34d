"""Curve JSON, bundled fixtures and SVG snapshots.

Curve JSON is an object with "kind" ("c2" or "plane"), "periodic" and
"points"; c2 points are [re_x, im_x, re_y, im_y], plane points [re, im].  An
optional "meta" object is carried along unchanged, and an optional "twist"
of -1 marks an antiperiodic lift.
"""

import json
from importlib import resources

import numpy as np

from .curve_core import CurveC2, PlaneCurve

SVG_SIZE = 400
SVG_MARGIN = 10


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} in curve JSON")


def curve_to_dict(curve, meta=None):
    if isinstance(curve, CurveC2):
        p = curve.points
        pts = np.stack([p[:, 0].real, p[:, 0].imag, p[:, 1].real, p[:, 1].imag], axis=1)
        kind = "c2"
    elif isinstance(curve, PlaneCurve):
        pts = np.stack([curve.points.real, curve.points.imag], axis=1)
        kind = "plane"
    else:
        raise TypeError(f"cannot serialize {type(curve).__name__}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("curve has non-finite points")
    out = {"kind": kind, "periodic": bool(curve.periodic), "points": pts.tolist()}
    if getattr(curve, "twist", 1) != 1:
        out["twist"] = curve.twist
    if meta:
        out["meta"] = meta
    return out


def curve_from_dict(data):
    """Build a curve from its JSON object.

    Returns
    -------
    (CurveC2 or PlaneCurve, dict)
        The curve and its "meta" object (empty if absent).
    """
    kind = data.get("kind")
    if kind not in ("c2", "plane"):
        raise ValueError(f'"kind" must be "c2" or "plane", got {kind!r}')
    periodic = data.get("periodic")
    if not isinstance(periodic, bool):
        raise ValueError('"periodic" must be a boolean')
    width = 4 if kind == "c2" else 2
    try:
        pts = np.array(data["points"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad points array: {exc}") from None
    if pts.ndim != 2 or pts.shape[1] != width:
        raise ValueError(f"{kind} points must be an (N, {width}) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain NaN or Inf")
    meta = data.get("meta", {})
    if kind == "c2":
        gamma = np.stack([pts[:, 0] + 1j * pts[:, 1], pts[:, 2] + 1j * pts[:, 3]], axis=1)
        return CurveC2(gamma, periodic, data.get("twist", 1)), meta
    return PlaneCurve(pts[:, 0] + 1j * pts[:, 1], periodic), meta


def dumps_curve(curve, meta=None):
    return json.dumps(curve_to_dict(curve, meta), allow_nan=False, indent=1) + "\n"


def loads_curve(text):
    return curve_from_dict(json.loads(text, parse_constant=_reject_constant))


def write_curve(curve, path, meta=None):
    with open(path, "w") as fh:
        fh.write(dumps_curve(curve, meta))


def read_curve(path):
    with open(path) as fh:
        return loads_curve(fh.read())


def _data_text(name):
    return resources.files("todacurves").joinpath("data", name).read_text()


def load_fixture(name):
    """Bundled curve fixture by file stem, e.g. ``"octagon_lift"``."""
    return loads_curve(_data_text(f"{name}.json"))


def load_parameters(name):
    """Bundled parameter file by stem, e.g. ``"elastica_sets"``."""
    return json.loads(_data_text(f"{name}.json"))


def _plane_points(curve):
    if isinstance(curve, CurveC2):
        x, y = curve.points[:, 0], curve.points[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            pts = np.where(y != 0, x / np.where(y != 0, y, 1), np.nan)
    else:
        pts = curve.points
    pts = pts[np.isfinite(pts)]
    if curve.periodic and len(pts):
        pts = np.append(pts, pts[0])
    return pts


def svg_polylines(curves, size=SVG_SIZE, margin=SVG_MARGIN):
    """SVG document with one polyline per curve, all scaled into one square viewport.

    Lifted curves are projected first and points at infinity are skipped.
    Coordinates have 4 decimals and the y axis points up.
    """
    polys = [_plane_points(c) for c in curves]
    allpts = np.concatenate(polys) if polys else np.zeros(0, complex)
    if allpts.size:
        lo_x, hi_x = allpts.real.min(), allpts.real.max()
        lo_y, hi_y = allpts.imag.min(), allpts.imag.max()
    else:
        lo_x = hi_x = lo_y = hi_y = 0.0
    span = max(hi_x - lo_x, hi_y - lo_y) or 1.0
    scale = (size - 2 * margin) / span
    cx, cy = (lo_x + hi_x) / 2, (lo_y + hi_y) / 2
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    ]
    for i, pts in enumerate(polys):
        x = size / 2 + scale * (pts.real - cx)
        y = size / 2 - scale * (pts.imag - cy)
        coords = " ".join(f"{a:.4f},{b:.4f}" for a, b in zip(x, y))
        lines.append(
            f'<polyline id="gen{i}" fill="none" stroke="black" stroke-width="1" points="{coords}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(curves, path, size=SVG_SIZE):
    with open(path, "w") as fh:
        fh.write(svg_polylines(curves, size))
