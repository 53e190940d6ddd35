"""The published 16-color palette.

Frames are grids of color indices; every renderer (frame dumps, the
browser client) maps indices through this table so humans reviewing a
replay and humans playing live see identical pictures. The colors are
arbitrary but frozen: changing them would silently alter what human
participants saw when baselines were collected.
"""

PALETTE: tuple[tuple[int, int, int], ...] = (
    (0x00, 0x00, 0x00),  # 0  black (background)
    (0x55, 0x55, 0x55),  # 1  dim grey
    (0xE5, 0x39, 0x35),  # 2  red
    (0x43, 0xA0, 0x47),  # 3  green
    (0xFD, 0xD8, 0x35),  # 4  yellow
    (0x9E, 0x9E, 0x9E),  # 5  grey
    (0x00, 0xAC, 0xC1),  # 6  cyan
    (0xF5, 0xF5, 0xF5),  # 7  near-white
    (0x28, 0x35, 0x93),  # 8  deep blue
    (0xFB, 0x8C, 0x00),  # 9  orange
    (0x8E, 0x24, 0xAA),  # 10 purple
    (0x6D, 0x4C, 0x41),  # 11 brown
    (0xEF, 0x9A, 0x9A),  # 12 rose
    (0xEC, 0x40, 0x7A),  # 13 pink
    (0x90, 0xCA, 0xF9),  # 14 light blue
    (0xFF, 0xFF, 0xFF),  # 15 white
)

PALETTE_HEX: tuple[str, ...] = tuple(f"#{r:02x}{g:02x}{b:02x}" for r, g, b in PALETTE)
