"""SVG figures rendered from bundle tables.

Each plot kind reads one table of a :class:`~tislab.experiment.RunBundle`
and returns the SVG document as a string.  Rendering goes through
matplotlib's object API (no pyplot state), with a fixed hash salt and no
date metadata so identical bundles give identical bytes.
"""
from __future__ import annotations

import io

import matplotlib
from matplotlib.figure import Figure

from .errors import PlotError

matplotlib.rcParams["svg.hashsalt"] = "tislab"
matplotlib.rcParams["svg.fonttype"] = "path"

KINDS = ("fig1b", "fig4", "fig5", "proxy", "evolution")


def _table(bundle, name, kind):
    table = bundle.tables.get(name)
    if table is None:
        raise PlotError(f"{kind} plot needs the '{name}' series, which this bundle lacks")
    if not table.rows:
        raise PlotError(f"{kind} plot: no steps in the '{name}' series")
    return table


def _groups(records, *keys):
    out = {}
    for rec in records:
        out.setdefault(tuple(rec[k] for k in keys), []).append(rec)
    return out


def _to_svg(fig):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def plot_fig1b(bundle):
    """Realized gain per step against cumulative time, one line per scenario."""
    recs = [r for r in _table(bundle, "steps", "fig1b").records() if r["replicate"] == 0]
    stops = {(r["scenario"], r["policy"]): r["stop_reason"]
             for r in bundle.tables["runs"].records() if r["replicate"] == 0} if "runs" in bundle.tables else {}
    fig = Figure(figsize=(6.4, 4.2), layout="constrained")
    ax = fig.add_subplot()
    for (scen, pol), rows in _groups(recs, "scenario", "policy").items():
        rows.sort(key=lambda r: r["step"])
        xs = [r["time_cum"] for r in rows]
        ys = [r["u_realized"] for r in rows]
        label = scen if len({r["policy"] for r in recs}) == 1 else f"{scen} / {pol}"
        (line,) = ax.plot(xs, ys, marker="o", markersize=3, label=label)
        if stops.get((scen, pol)) in ("threshold_met", "terminal_reached"):
            ax.plot(xs[-1:], ys[-1:], marker="o", markersize=9, markerfacecolor="none",
                    color=line.get_color(), linestyle="none")
    ax.axhline(0.0, color="0.6", linewidth=0.8)
    ax.set_xlabel("cumulative time (subgoal units)")
    ax.set_ylabel("realized gain per node (bits)")
    ax.set_title("Time courses of per-node information gain")
    ax.legend(frameon=False)
    return _to_svg(fig)


def plot_fig4(bundle):
    """Mean intelligence against network size, one band per policy."""
    recs = _table(bundle, "sweep_summary", "fig4").records()
    fig = Figure(figsize=(6.4, 4.2), layout="constrained")
    ax = fig.add_subplot()
    for (scen, pol), rows in _groups(recs, "scenario", "policy").items():
        rows.sort(key=lambda r: r["size"])
        xs = [r["size"] for r in rows]
        label = pol if len({r["scenario"] for r in recs}) == 1 else f"{scen} / {pol}"
        (line,) = ax.plot(xs, [r["mean_intelligence"] for r in rows], marker="o", label=label)
        ax.fill_between(xs, [r["ci_low"] for r in rows], [r["ci_high"] for r in rows],
                        color=line.get_color(), alpha=0.2, linewidth=0)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("goal network size (nodes)")
    ax.set_ylabel("mean intelligence (index)")
    ax.set_title("Achievement against goal complexity")
    ax.legend(frameon=False)
    return _to_svg(fig)


def plot_fig5(bundle):
    """Per-step (one-shot planning ratio, weighted solving) with arrows, one path per policy."""
    recs = [r for r in _table(bundle, "steps", "fig5").records() if r["replicate"] == 0]
    fig = Figure(figsize=(6.4, 4.8), layout="constrained")
    ax = fig.add_subplot()
    for (scen, pol), rows in _groups(recs, "scenario", "policy").items():
        rows.sort(key=lambda r: r["step"])
        xs = [r["planning_a_global_raw_prefix"] for r in rows]
        ys = [r["solving_u_r_prefix"] for r in rows]
        label = pol if len({r["scenario"] for r in recs}) == 1 else f"{scen} / {pol}"
        (pts,) = ax.plot(xs, ys, marker="o", markersize=4, linestyle="none", label=label)
        for k in range(len(xs) - 1):
            ax.annotate("", xy=(xs[k + 1], ys[k + 1]), xytext=(xs[k], ys[k]),
                        arrowprops={"arrowstyle": "->", "color": pts.get_color(), "lw": 1.0})
    ax.axvline(1.0, color="0.6", linestyle="--", linewidth=0.8)
    ax.set_xlabel("one-shot planning ratio (index, unclamped)")
    ax.set_ylabel("weighted solving (index)")
    ax.set_title("Sequential changes in solving and planning")
    ax.legend(frameon=False)
    return _to_svg(fig)


def plot_proxy(bundle):
    """Proxy-modified against plain benchmark intelligence over proxy strength."""
    t = _table(bundle, "proxy_sweep", "proxy")
    fig = Figure(figsize=(6.4, 4.2), layout="constrained")
    ax = fig.add_subplot()
    ps = t.column("strength_p")
    ax.plot(ps, t.column("intelligence_hat_proxy"), label="with proxy")
    ax.plot(ps, t.column("intelligence_hat"), linestyle="--", label="without proxy")
    ax.set_xlabel("proxy strength P (bits)")
    ax.set_ylabel("difficulty-relative intelligence (index)")
    ax.set_title("Proxy-modified intelligence")
    ax.legend(frameon=False)
    return _to_svg(fig)


def plot_evolution(bundle):
    """Mean trait and mean benchmarked intelligence per generation."""
    t = _table(bundle, "evolution", "evolution")
    fig = Figure(figsize=(6.4, 5.2), layout="constrained")
    top, bottom = fig.subplots(2, 1, sharex=True)
    gens = t.column("generation")
    for name in t.columns:
        if name.startswith("mean_x"):
            top.plot(gens, t.column(name), label=name.replace("mean_x", "trait "))
    top.set_ylabel("mean trait (bits per subgoal)")
    top.legend(frameon=False)
    bottom.plot(gens, t.column("mean_I_hat"), color="tab:red")
    bottom.set_ylabel("mean benchmarked intelligence (index)")
    bottom.set_xlabel("generation")
    top.set_title("Selection on intelligence")
    return _to_svg(fig)


_PLOTTERS = {"fig1b": plot_fig1b, "fig4": plot_fig4, "fig5": plot_fig5, "proxy": plot_proxy,
             "evolution": plot_evolution}


def emit_plot(bundle, kind):
    try:
        plotter = _PLOTTERS[kind]
    except KeyError:
        raise PlotError(f"unknown plot kind {kind!r}; valid kinds: {', '.join(KINDS)}") from None
    return plotter(bundle)
