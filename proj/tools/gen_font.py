#!/usr/bin/env python3
"""Regenerates src/font_data.inc from DejaVu Sans Mono.

Each printable ASCII glyph (0x20..0x7e) is rasterized 1-bit into a 24x48
cell at a 40 px em, baseline on row 38. Rows are packed MSB-first into the
low 24 bits of a uint32.
"""
import sys
from PIL import Image, ImageDraw, ImageFont

EM = 40
CELL_W = 24
CELL_H = 48
BASELINE = 38
FONTS = {
    "kRegularGlyphs": "/usr/share/fonts/truetype/dejavu/DejaVuSansMono.ttf",
    "kBoldGlyphs": "/usr/share/fonts/truetype/dejavu/DejaVuSansMono-Bold.ttf",
}


def glyph_rows(font, ch):
    img = Image.new("L", (CELL_W, CELL_H), 0)
    draw = ImageDraw.Draw(img)
    draw.text((0, BASELINE), ch, font=font, fill=255, anchor="ls")
    rows = []
    for y in range(CELL_H):
        bits = 0
        for x in range(CELL_W):
            if img.getpixel((x, y)) >= 128:
                bits |= 1 << (CELL_W - 1 - x)
        rows.append(bits)
    return rows


def main(out_path):
    lines = [
        "// Generated by tools/gen_font.py from DejaVu Sans Mono (Bitstream Vera license).",
        "// Do not edit by hand.",
        "",
        f"inline constexpr int kGlyphEm = {EM};",
        f"inline constexpr int kGlyphCellWidth = {CELL_W};",
        f"inline constexpr int kGlyphCellHeight = {CELL_H};",
        f"inline constexpr int kGlyphBaseline = {BASELINE};",
        "inline constexpr int kGlyphFirst = 0x20;",
        "inline constexpr int kGlyphCount = 95;",
        "",
    ]
    for name, path in FONTS.items():
        font = ImageFont.truetype(path, EM)
        lines.append(
            f"inline constexpr std::uint32_t {name}[kGlyphCount][kGlyphCellHeight] = {{")
        for code in range(0x20, 0x7F):
            rows = glyph_rows(font, chr(code))
            body = ",".join(f"0x{r:06x}" for r in rows)
            lines.append(f"  {{{body}}},  // {code:#04x}")
        lines.append("};")
        lines.append("")
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/font_data.inc")
