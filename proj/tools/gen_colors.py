#!/usr/bin/env python3
"""Writes src/named_colors.inc: the CSS named colors, sorted by name."""
import pathlib

from matplotlib.colors import CSS4_COLORS

out = pathlib.Path(__file__).resolve().parent.parent / "src" / "named_colors.inc"
lines = ["// Generated by tools/gen_colors.py. Do not edit.\n"]
for name in sorted(CSS4_COLORS):
    h = CSS4_COLORS[name].lstrip("#")
    r, g, b = (int(h[i:i + 2], 16) for i in (0, 2, 4))
    lines.append(f'{{"{name}", {{{r}, {g}, {b}, 255}}}},\n')
out.write_text("".join(lines))
