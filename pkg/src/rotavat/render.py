"""SVG front (perspective) and side (orthographic) views of a scene.

Front view pixels: ``x_px = width / 2 + x``, ``y_px = height / 2 - y`` with the
principal point at the image center. Side view drops one world axis and
keeps world up vertical, auto-fitted with a 5% margin.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

import numpy as np

from .errors import MissingCamera
from .geometry import build_projection, ground_horizon_y, project_points
from .scene import Scene

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)  # fmt: skip
MARGIN = 0.05
VIEWS = ("front", "side", "pair")


@dataclass(frozen=True)
class RenderOptions:
    view: str = "front"
    side_axis: str = "x"
    show_ground: bool = True
    stroke_width: float = 2.0
    palette_seed: int = 0

    def __post_init__(self):
        if self.view not in VIEWS:
            raise ValueError(f"view must be one of {VIEWS}, got {self.view!r}")
        if self.side_axis not in ("x", "z"):
            raise ValueError("side_axis must be 'x' or 'z'")


def _n(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _color(opts: RenderOptions, k: int) -> str:
    return PALETTE[(opts.palette_seed + k) % len(PALETTE)]


def to_pixels(scene: Scene, img_xy) -> np.ndarray:
    img_xy = np.asarray(img_xy, dtype=float)
    return np.stack([scene.width / 2 + img_xy[..., 0], scene.height / 2 - img_xy[..., 1]], axis=-1)


def _line(p, q, color, width, cls="seg"):
    return (
        f'<line class="{cls}" x1="{_n(p[0])}" y1="{_n(p[1])}" x2="{_n(q[0])}" y2="{_n(q[1])}" '
        f'stroke="{color}" stroke-width="{_n(width)}" stroke-linecap="round"/>'
    )


def _marker(p, color, cls, pid, r=3.0):
    return (
        f'<circle class="{cls}" data-person={quoteattr(pid)} cx="{_n(p[0])}" cy="{_n(p[1])}" '
        f'r="{_n(r)}" fill="{color}"/>'
    )


def _front_body(scene: Scene, opts: RenderOptions, clip_id: str) -> list[str]:
    if scene.camera is None:
        raise MissingCamera("front view needs a camera")
    cam = scene.camera
    P = build_projection(cam)
    W, H = scene.width, scene.height
    out = [
        f'<clipPath id="{clip_id}"><rect x="0" y="0" width="{W}" height="{H}"/></clipPath>',
        f'<rect class="background" x="0" y="0" width="{W}" height="{H}" fill="#ffffff" stroke="#000000"/>',
        f'<g clip-path="url(#{clip_id})">',
    ]
    if opts.show_ground:
        y_px = H / 2 - ground_horizon_y(cam)
        if 0 <= y_px <= H:
            out.append(_line((0, y_px), (W, y_px), "#999999", 1.0, "horizon"))
    for k, m in enumerate(scene.meshes):
        color = _color(opts, k)
        img, w = project_points(P, m.vertices)
        px = to_pixels(scene, img)
        ok = w > cam.eps_w
        out.append(f"<g class=\"person\" data-person={quoteattr(m.person_id)}>")
        for i, j in m.segments:
            if ok[i] and ok[j]:
                out.append(_line(px[i], px[j], color, opts.stroke_width))
        anchors, aw = project_points(P, np.stack([m.foot_mid, m.head]))
        apx = to_pixels(scene, anchors)
        if aw[0] > cam.eps_w:
            out.append(_marker(apx[0], color, "foot", m.person_id))
        if aw[1] > cam.eps_w:
            out.append(_marker(apx[1], color, "head", m.person_id))
        out.append("</g>")
    out.append("</g>")
    return out


@dataclass(frozen=True)
class SideLayout:
    """World (horizontal, up) to panel pixel mapping of the side view."""

    width: float
    height: float
    scale: float
    h0: float
    v0: float
    axis: str

    def horizontal(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts[..., 2] if self.axis == "x" else pts[..., 0]

    def to_pixels(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        u = self.horizontal(pts)
        x = self.width * MARGIN + (u - self.h0) * self.scale
        y = self.height * (1 - MARGIN) - (pts[..., 1] - self.v0) * self.scale
        return np.stack([x, y], axis=-1)

    @property
    def ground_y(self) -> float:
        return self.height * (1 - MARGIN) + self.v0 * self.scale


def side_layout(scene: Scene, opts: RenderOptions, width=None, height=None, fit=None) -> SideLayout:
    """Viewport fitted to ``fit`` meshes (default: the scene's own)."""
    W = float(width or scene.width)
    H = float(height or scene.height)
    axis = opts.side_axis
    meshes = scene.meshes if fit is None else fit
    if meshes:
        allv = np.concatenate([m.vertices for m in meshes])
        u = allv[:, 2] if axis == "x" else allv[:, 0]
        h0, h1 = float(u.min()), float(u.max())
        v0, v1 = min(0.0, float(allv[:, 1].min())), max(0.0, float(allv[:, 1].max()))
    else:
        h0, h1, v0, v1 = 0.0, 1.0, 0.0, 1.0
    span_h = max(h1 - h0, 1e-9)
    span_v = max(v1 - v0, 1e-9)
    inner = 1 - 2 * MARGIN
    scale = min(W * inner / span_h, H * inner / span_v)
    # center the content along the slack dimension
    h0 -= (W * inner / scale - span_h) / 2
    v0 -= (H * inner / scale - span_v) / 2
    return SideLayout(W, H, scale, h0, v0, axis)


def _side_body(scene: Scene, opts: RenderOptions, lay: SideLayout | None = None) -> list[str]:
    lay = lay or side_layout(scene, opts)
    W, H = lay.width, lay.height
    out = [f'<rect class="background" x="0" y="0" width="{_n(W)}" height="{_n(H)}" fill="#ffffff" stroke="#000000"/>']
    if opts.show_ground:
        gy = lay.ground_y
        out.append(_line((0, gy), (W, gy), "#555555", 1.0, "ground"))
    for k, m in enumerate(scene.meshes):
        color = _color(opts, k)
        px = lay.to_pixels(m.vertices)
        out.append(f"<g class=\"person\" data-person={quoteattr(m.person_id)}>")
        for i, j in m.segments:
            out.append(_line(px[i], px[j], color, opts.stroke_width))
        apx = lay.to_pixels(np.stack([m.foot_mid, m.head]))
        out.append(_marker(apx[0], color, "foot", m.person_id))
        out.append(_marker(apx[1], color, "head", m.person_id))
        out.append("</g>")
    return out


def _document(width, height, body) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_n(width)}" height="{_n(height)}" viewBox="0 0 {_n(width)} {_n(height)}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_front(scene: Scene, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions(view="front")
    return _document(scene.width, scene.height, _front_body(scene, opts, "frame"))


def render_side(scene: Scene, opts: RenderOptions | None = None) -> str:
    opts = opts or RenderOptions(view="side")
    return _document(scene.width, scene.height, _side_body(scene, opts))


def render_pair(scene: Scene, opts: RenderOptions | None = None) -> str:
    """Front and side panels next to each other in one document."""
    opts = opts or RenderOptions(view="pair")
    body = ['<g class="panel" id="front">', *_front_body(scene, opts, "frame"), "</g>"]
    body += [f'<g class="panel" id="side" transform="translate({scene.width},0)">', *_side_body(scene, opts), "</g>"]
    return _document(2 * scene.width, scene.height, body)


def render_comparison(before: Scene, after: Scene, opts: RenderOptions | None = None) -> str:
    """Two rows (before, after) of front and side panels.

    Both side panels share one viewport so heights above ground compare
    directly between rows.
    """
    opts = opts or RenderOptions(view="pair")
    lay = side_layout(after, opts, fit=before.meshes + after.meshes)
    W, H = after.width, after.height
    body = []
    for row, (name, sc) in enumerate((("before", before), ("after", after))):
        body += [f'<g class="row" id="{name}" transform="translate(0,{row * H})">']
        body += ['<g class="panel front">', *_front_body(sc, opts, f"frame-{name}"), "</g>"]
        body += [f'<g class="panel side" transform="translate({W},0)">', *_side_body(sc, opts, lay), "</g>"]
        body += ["</g>"]
    return _document(2 * W, 2 * H, body)


def render(scene: Scene, opts: RenderOptions) -> str:
    return {"front": render_front, "side": render_side, "pair": render_pair}[opts.view](scene, opts)
