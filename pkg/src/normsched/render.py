"""Gantt charts: plain text, SVG and (for the bench harness) PNG figures."""

from __future__ import annotations

from fractions import Fraction
from xml.sax.saxutils import escape

from .dyadic import fmt_time
from .timeline import Instance, IntervalSchedule


def job_labels(instance: Instance | None, schedule: IntervalSchedule) -> dict[int, str]:
    """``a{j}^{level}`` for the lower-bound family, plain ids otherwise."""
    ids = schedule.jobs()
    if instance is not None and instance.meta.get("family") in ("jp", "theorem"):
        p = instance.meta.get("p", 0)
        out = {}
        for j in ids:
            if j < 4 * (p + 1):
                out[j] = f"a{j % 4 + 1}^{j // 4}"
            elif j == 4 * (p + 1):
                out[j] = "a"
            else:
                out[j] = f"b{j - 4 * (p + 1)}"
        return out
    return {j: str(j) for j in ids}


def _boundaries(schedule: IntervalSchedule) -> list[Fraction]:
    pts = {Fraction(0)}
    for pc in schedule.pieces():
        pts.add(pc.start)
        pts.add(pc.end)
    return sorted(pts)


def render_ascii(schedule: IntervalSchedule, labels: dict[int, str] | None = None, width: int | None = None) -> str:
    """Two text lanes; ``|`` marks piece boundaries, the axis shows every event.

    ``width`` is the number of columns per time unit; by default the
    smallest power of two that gives every piece room for its label
    (capped at 64).
    """
    labels = labels or {j: str(j) for j in schedule.jobs()}
    pieces = schedule.pieces()
    end = max((pc.end for pc in pieces), default=Fraction(1))
    if width is None:
        width = 4
        for pc in pieces:
            while width < 64 and pc.length * width < len(labels[pc.job]) + 1:
                width *= 2
    cols = int(end * width + Fraction(1, 2)) + 1

    def col(t) -> int:
        return int(t * width + Fraction(1, 2))

    lines = []
    for m, lane in enumerate(schedule.machines):
        row = [" "] * cols
        for pc in lane:
            a, b = col(pc.start), col(pc.end)
            for c in range(a + 1, b):
                row[c] = "-"
            row[a] = "|"
            row[b] = "|"
            text = labels[pc.job][: max(0, b - a - 1)]
            for k, ch in enumerate(text):
                row[a + 1 + k] = ch
        lines.append((f"M{m + 1} " + "".join(row)).rstrip())
    axis = [" "] * cols
    ticks = [" "] * (cols + 16)
    for t in _boundaries(schedule):
        c = col(t)
        axis[c] = "+"
        text = fmt_time(t)
        if all(ch == " " for ch in ticks[max(0, c - 1): c + len(text) + 1]):
            ticks[c: c + len(text)] = list(text)
    lines.append("   " + "".join(axis).rstrip())
    lines.append("   " + "".join(ticks).rstrip())
    return "\n".join(lines) + "\n"


def render_svg(schedule: IntervalSchedule, labels: dict[int, str] | None = None, unit: int = 120,
               title: str | None = None) -> str:
    """Standalone SVG document; coordinates use three decimals so output is byte-stable."""
    labels = labels or {j: str(j) for j in schedule.jobs()}
    end = max((pc.end for pc in schedule.pieces()), default=Fraction(1))
    left, top, lane_h, gap = 40, 30 if title else 10, 36, 8
    width = left + float(end) * unit + 20
    axis_y = top + 2 * lane_h + gap + 10
    height = axis_y + 60

    def f(x) -> str:
        return f"{float(x):.3f}"

    palette = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{f(width)}" height="{f(height)}" '
        f'viewBox="0 0 {f(width)} {f(height)}" font-family="monospace" font-size="11">'
    ]
    if title:
        out.append(f'<text x="{left}" y="18">{escape(title)}</text>')
    for m, lane in enumerate(schedule.machines):
        y = top + m * (lane_h + gap)
        out.append(f'<text x="4" y="{f(y + lane_h / 2 + 4)}">M{m + 1}</text>')
        for pc in lane:
            x0 = left + float(pc.start) * unit
            w = float(pc.length) * unit
            color = palette[pc.job % len(palette)]
            out.append(
                f'<rect x="{f(x0)}" y="{f(y)}" width="{f(w)}" height="{lane_h}" '
                f'fill="{color}" stroke="#000" stroke-width="0.5"/>'
            )
            out.append(
                f'<text x="{f(x0 + w / 2)}" y="{f(y + lane_h / 2 + 4)}" text-anchor="middle">'
                f"{escape(labels[pc.job])}</text>"
            )
    out.append(f'<line x1="{left}" y1="{f(axis_y)}" x2="{f(left + float(end) * unit)}" y2="{f(axis_y)}" stroke="#000"/>')
    for t in _boundaries(schedule):
        x = left + float(t) * unit
        out.append(f'<line x1="{f(x)}" y1="{f(axis_y - 4)}" x2="{f(x)}" y2="{f(axis_y + 4)}" stroke="#000"/>')
        out.append(
            f'<text x="{f(x)}" y="{f(axis_y + 14)}" transform="rotate(60 {f(x)} {f(axis_y + 14)})">'
            f"{escape(fmt_time(t))}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_gantt(schedule: IntervalSchedule, fmt: str = "ascii", labels: dict[int, str] | None = None,
                 title: str | None = None) -> str:
    if fmt == "ascii":
        return render_ascii(schedule, labels)
    if fmt == "svg":
        return render_svg(schedule, labels, title=title)
    raise ValueError(f"unknown format {fmt!r}")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_gantt_png(schedule: IntervalSchedule, path, labels: dict[int, str] | None = None,
                   title: str | None = None) -> None:
    plt = _pyplot()
    labels = labels or {j: str(j) for j in schedule.jobs()}
    end = float(max((pc.end for pc in schedule.pieces()), default=1))
    fig, ax = plt.subplots(figsize=(max(6.0, end * 1.2), 2.2))
    cmap = plt.get_cmap("tab20")
    for m, lane in enumerate(schedule.machines):
        for pc in lane:
            ax.broken_barh([(float(pc.start), float(pc.length))], (1 - m - 0.4, 0.8),
                           facecolors=cmap(pc.job % 20), edgecolor="black", linewidth=0.5)
            if pc.length * 8 >= 1:
                ax.text(float(pc.start + pc.end) / 2, 1 - m, labels[pc.job], ha="center", va="center", fontsize=7)
    ax.set_yticks([1, 0], ["M1", "M2"])
    ax.set_xlim(0, end)
    ax.set_xlabel("time")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def save_line_plot(xs, series: dict[str, list], path, xlabel: str, ylabel: str, title: str,
                   logy: bool = False) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for name, ys in series.items():
        ax.plot(xs, ys, marker="o", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if logy:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
