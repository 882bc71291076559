"""Scan layouts, resolved by name from the trajectory planner's `layout` resource."""

import numpy as np

from src.models import ScanLine
from src.settings import StageConfig


def five_die_surrogate(settings: StageConfig) -> list[ScanLine]:
    """Five 120 mm exposure scans stacked in y, meandering in x."""
    out = []
    for i, y in enumerate(np.linspace(-0.1, 0.1, 5)):
        start, end = (-0.06, float(y)), (0.06, float(y))
        if i % 2:
            start, end = end, start
        out.append(ScanLine(start=start, end=end, die=f"die{i + 1}"))
    return out


def training_raster(settings: StageConfig) -> list[ScanLine]:
    """Meander over the full workspace width so every grid cell is crossed."""
    workspace = settings.workspace.rect()
    margin_x = 0.05 * (workspace.x_hi - workspace.x_lo)
    margin_y = 0.05 * (workspace.y_hi - workspace.y_lo)
    x_lo, x_hi = workspace.x_lo + margin_x, workspace.x_hi - margin_x
    lines = settings.weighting.raster_lines
    ys = np.linspace(workspace.y_lo + margin_y, workspace.y_hi - margin_y, lines)
    out = []
    for i, y in enumerate(ys):
        start, end = (x_lo, float(y)), (x_hi, float(y))
        if i % 2:
            start, end = end, start
        out.append(ScanLine(start=start, end=end, die=f"line{i + 1}"))
    return out
