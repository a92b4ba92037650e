"""Backend benchmark: identical workloads on the compiled and pure-numpy
kernel paths, with a state-hash check that both simulated the same world."""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import kernels
from .bot import BotPolicy
from .world import GameConfig, World


@dataclass(frozen=True)
class BenchResult:
    backend: str
    enemies: int
    ticks: int
    seconds: float
    us_per_tick: float
    final_hash: str


def _run_world(backend: str, seed: int, enemies: int, ticks: int) -> BenchResult:
    kernels.set_backend(backend)
    config = GameConfig(target_enemy_count=enemies)
    world = World.create(seed, config)
    policy = BotPolicy()
    # Warm the jit cache outside the timed region.
    world.step(policy.decide(world.view()))
    start = time.perf_counter()
    done = 1
    while world.running and done < ticks:
        world.step(policy.decide(world.view()))
        done += 1
    elapsed = time.perf_counter() - start
    return BenchResult(
        backend=backend,
        enemies=enemies,
        ticks=done,
        seconds=elapsed,
        us_per_tick=elapsed / max(done - 1, 1) * 1e6,
        final_hash=world.state_hash(),
    )


def run_bench(ticks: int = 2000, enemy_counts=(20, 300), seed: int = 7) -> list[BenchResult]:
    """Bench every available backend at each population size. Restores the
    previously active backend afterwards."""
    previous = kernels.active_backend()
    results = []
    try:
        for enemies in enemy_counts:
            for backend in kernels.available_backends():
                results.append(_run_world(backend, seed, enemies, ticks))
    finally:
        kernels.set_backend(previous)
    return results


def format_results(results) -> str:
    lines = [f"{'backend':<10} {'enemies':>7} {'ticks':>6} {'us/tick':>9}  hash"]
    for r in results:
        lines.append(f"{r.backend:<10} {r.enemies:>7} {r.ticks:>6} "
                     f"{r.us_per_tick:>9.2f}  {r.final_hash[:16]}")
    groups = {}
    for r in results:
        groups.setdefault(r.enemies, set()).add(r.final_hash)
    for enemies, hashes in sorted(groups.items()):
        tag = "identical" if len(hashes) == 1 else "DIVERGED"
        lines.append(f"state at {enemies} enemies: {tag} across backends")
    return "\n".join(lines)
