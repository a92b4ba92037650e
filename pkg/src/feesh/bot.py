"""Scripted player policy for headless runs.

The policy is a pure function of the world view: flee the nearest enemy big
enough to kill us when one is close, otherwise chase the nearest enemy that is
comfortably smaller. No randomness, so replicates are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .world import WorldView


@dataclass(frozen=True)
class BotPolicy:
    # A threat inside danger_radius (center distance) overrides foraging.
    danger_radius: float = 120.0
    # Enemies count as prey only below this fraction of the player radius;
    # the band in between is edible but not worth the risk of a near miss.
    size_margin: float = 0.9

    def __post_init__(self):
        if self.danger_radius <= 0:
            raise ValueError("danger_radius must be positive")
        if not 0.0 < self.size_margin <= 1.0:
            raise ValueError("size_margin must lie in (0, 1]")

    def decide(self, view: WorldView) -> tuple[float, float]:
        """Steering direction with |v| <= 1. Zero vector when idle."""
        n = view.enemy_radius.shape[0]
        if n == 0:
            return (0.0, 0.0)

        dx = view.enemy_pos[:, 0] - view.player_x
        dy = view.enemy_pos[:, 1] - view.player_y
        dist = np.hypot(dx, dy)

        # argmin breaks distance ties at the lowest enemy index
        threats = view.enemy_radius >= view.player_radius
        if threats.any():
            masked = np.where(threats, dist, np.inf)
            i = int(np.argmin(masked))
            if masked[i] < self.danger_radius:
                return _unit(-float(dx[i]), -float(dy[i]))

        prey = view.enemy_radius < self.size_margin * view.player_radius
        if prey.any():
            masked = np.where(prey, dist, np.inf)
            i = int(np.argmin(masked))
            return _unit(float(dx[i]), float(dy[i]))

        return (0.0, 0.0)


def _unit(dx: float, dy: float) -> tuple[float, float]:
    h = math.hypot(dx, dy)
    if h == 0.0:
        return (0.0, 0.0)
    ux, uy = dx / h, dy / h
    h2 = math.hypot(ux, uy)
    if h2 > 1.0:  # guard the documented |v| <= 1 bound against rounding
        ux, uy = ux / h2, uy / h2
    return (ux, uy)
