"""Deterministic SVG storyboards of a group-formation trace.

Each frame draws the agents at their map positions: marker shape encodes
the sector (square, circle, triangle, then larger regular polygons for
extra sectors), marker area is proportional to the agent's resource, and
every multi-member group gets a convex-hull outline in the group's color
(a plain segment for two-member groups). Frames are rebuilt by replaying
accepted events, so any trace iteration can be rendered; keyframes are the
initialization, every composition change, and the final iteration.

Output is plain text with fixed float formatting and no external assets,
so identical inputs produce byte-identical files, which makes the figures
golden-file testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .dynamics import JOIN, UpdateEvent
from .model import Partition, Scenario

# Okabe-Ito palette: colorblind-safe, cycled by stable group index.
_PALETTE = (
    "#0072B2",
    "#E69F00",
    "#009E73",
    "#D55E00",
    "#CC79A7",
    "#56B4E9",
    "#F0E442",
    "#999999",
)

_MARGIN = 48.0
_HULL_PAD = 12.0


@dataclass(frozen=True)
class RenderSpec:
    """What to render: explicit iterations or auto-selected keyframes."""

    iterations: tuple[int, ...] | None = None  # None means keyframes
    canvas: int = 640
    legend: bool = True

    def __post_init__(self):
        if self.canvas < 100:
            raise ValueError("canvas must be at least 100 pixels")


def keyframe_iterations(events: list[UpdateEvent], total_iterations: int) -> list[int]:
    """Initialization, every accepted (composition-changing) event, final."""
    frames = [0]
    frames.extend(e.iteration for e in events if e.accepted_move is not None)
    if total_iterations not in frames:
        frames.append(total_iterations)
    return frames


def partition_at(events: list[UpdateEvent], n_agents: int, iteration: int) -> Partition:
    """Replay accepted events up to and including the given iteration.

    Iteration 0 is the all-singletons start; group indices follow the
    engine's stable-handle convention (initial group i belongs to agent i,
    split-off groups take fresh indices recorded in the event).
    """
    groups: dict[int, set[int]] = {i: {i} for i in range(n_agents)}
    member: dict[int, int] = {i: i for i in range(n_agents)}
    next_index = n_agents
    for e in events:
        if e.iteration > iteration:
            break
        move = e.accepted_move
        if move is None:
            continue
        old = member[e.agent]
        groups[old].discard(e.agent)
        if not groups[old]:
            del groups[old]
        if move.kind == JOIN:
            groups[move.target].add(e.agent)
            member[e.agent] = move.target
        else:
            groups[e.new_group] = {e.agent}
            member[e.agent] = e.new_group
            next_index = max(next_index, e.new_group + 1)
    return Partition({idx: frozenset(m) for idx, m in groups.items()},
                     next_index=next_index)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _marker_svg(shape: str, cx: float, cy: float, area: float, fill: str) -> str:
    if shape == "circle":
        r = math.sqrt(area / math.pi)
        return (f'<circle class="agent" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
                f'r="{_fmt(r)}" fill="{fill}"/>')
    if shape == "square":
        side = math.sqrt(area)
        x = cx - side / 2
        y = cy - side / 2
        return (f'<rect class="agent" x="{_fmt(x)}" y="{_fmt(y)}" '
                f'width="{_fmt(side)}" height="{_fmt(side)}" fill="{fill}"/>')
    sides = {"triangle": 3, "pentagon": 5, "hexagon": 6, "heptagon": 7}[shape]
    # circumradius of a regular polygon with the requested area
    r = math.sqrt(2 * area / (sides * math.sin(2 * math.pi / sides)))
    pts = []
    for i in range(sides):
        ang = -math.pi / 2 + 2 * math.pi * i / sides
        pts.append(f"{_fmt(cx + r * math.cos(ang))},{_fmt(cy + r * math.sin(ang))}")
    return f'<polygon class="agent" points="{" ".join(pts)}" fill="{fill}"/>'


_SHAPES = ("square", "circle", "triangle", "pentagon", "hexagon", "heptagon")


def shape_for_category(category: int) -> str:
    return _SHAPES[category % len(_SHAPES)]


def convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Andrew's monotone chain; returns hull vertices counterclockwise.

    Collinear inputs come back as the two extreme points (a segment).
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _expand(points: list[tuple[float, float]], pad: float) -> list[tuple[float, float]]:
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)
    out = []
    for x, y in points:
        dx = x - cx
        dy = y - cy
        d = math.sqrt(dx * dx + dy * dy)
        if d == 0:
            out.append((x, y))
        else:
            out.append((x + dx / d * pad, y + dy / d * pad))
    return out


def render_frame(scenario: Scenario, partition: Partition, spec: RenderSpec,
                 iteration: int) -> str:
    """One SVG frame of the partition over the scenario's map."""
    canvas = float(spec.canvas)
    xs = [a.x for a in scenario.agents]
    ys = [a.y for a in scenario.agents]
    span = max(max(xs) - min(xs), max(ys) - min(ys))
    if span <= 0:
        span = 1.0
    scale = (canvas - 2 * _MARGIN) / span
    x0 = (min(xs) + max(xs)) / 2
    y0 = (min(ys) + max(ys)) / 2

    def to_px(x: float, y: float) -> tuple[float, float]:
        return (canvas / 2 + (x - x0) * scale,
                canvas / 2 - (y - y0) * scale)  # y grows upward on the map

    max_resource = max(a.resource for a in scenario.agents)
    max_area = (0.045 * canvas) ** 2

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.canvas}" '
        f'height="{spec.canvas}" viewBox="0 0 {spec.canvas} {spec.canvas}">',
        f'<rect width="{spec.canvas}" height="{spec.canvas}" fill="#ffffff"/>',
        f'<text x="{_fmt(_MARGIN)}" y="28" font-family="sans-serif" '
        f'font-size="18">{"initialization" if iteration == 0 else f"iteration {iteration}"}'
        "</text>",
    ]
    # hulls first, in stable-index order, so markers land on top
    for gidx in sorted(partition.groups):
        members = sorted(partition.groups[gidx])
        if len(members) < 2:
            continue
        color = _PALETTE[gidx % len(_PALETTE)]
        pix = [to_px(scenario.agents[i].x, scenario.agents[i].y) for i in members]
        hull = _expand(convex_hull(pix), _HULL_PAD)
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in hull)
        if len(hull) == 2:
            (ax, ay), (bx, by) = hull
            parts.append(
                f'<line class="hull" x1="{_fmt(ax)}" y1="{_fmt(ay)}" '
                f'x2="{_fmt(bx)}" y2="{_fmt(by)}" stroke="{color}" '
                f'stroke-width="10" stroke-linecap="round" opacity="0.45"/>'
            )
        else:
            parts.append(
                f'<polygon class="hull" points="{pts}" fill="{color}" '
                f'fill-opacity="0.15" stroke="{color}" stroke-width="2" '
                f'stroke-linejoin="round"/>'
            )
    for a in scenario.agents:
        cx, cy = to_px(a.x, a.y)
        area = max_area * a.resource / max_resource
        parts.append(_marker_svg(shape_for_category(a.category), cx, cy, area,
                                 "#333333"))
    if spec.legend:
        for c in range(scenario.k):
            y = 52.0 + 26.0 * c
            parts.append(_marker_svg(shape_for_category(c), _MARGIN, y, 120.0,
                                     "#333333"))
            parts.append(
                f'<text x="{_fmt(_MARGIN + 16)}" y="{_fmt(y + 5)}" '
                f'font-family="sans-serif" font-size="14">sector {c}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_trace(scenario: Scenario, events: list[UpdateEvent], total_iterations: int,
                 spec: RenderSpec, out_dir: str | Path) -> list[Path]:
    """Write one SVG per requested iteration; returns the files written."""
    if spec.iterations is None:
        frames = keyframe_iterations(events, total_iterations)
    else:
        frames = list(spec.iterations)
        for t in frames:
            if not (0 <= t <= total_iterations):
                raise ValueError(
                    f"iteration {t} outside the trace (0..{total_iterations})"
                )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for t in frames:
        partition = partition_at(events, scenario.n, t)
        svg = render_frame(scenario, partition, spec, t)
        path = out_dir / f"frame_{t:04d}.svg"
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    return written
