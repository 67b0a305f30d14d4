#!/usr/bin/env python3
"""Benchmark the compiled extension against the pure-python fallback.

Run twice to compare end to end:

    python3 benchmarks/bench_kernels.py
    CRYSTALGYM_KERNELS=python python3 benchmarks/bench_kernels.py

Within one process both kernel implementations are timed directly; the
training micro-benchmark uses whichever backend the process selected.
"""

import time

import numpy as np

import crystalgym as cg
from crystalgym import kernels
from crystalgym.kernels import (_neighbor_pairs_py, _segment_sum_py)


def timeit(fn, repeats=20):
    fn()  # warmup
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_neighbor_pairs():
    print("== neighbor_pairs (8 sites, shift_range 3) ==")
    structure = cg.load_structure("rocksalt")
    frac = structure.sites
    cell = structure.lattice.matrix
    for cutoff in (6.0, 8.0, 12.0):
        t_py = timeit(lambda: _neighbor_pairs_py(frac, cell, cutoff, 3))
        row = f"cutoff {cutoff:5.1f} A:  python {t_py * 1e3:8.3f} ms"
        if kernels.backend() == "compiled":
            from crystalgym import _ckernels
            t_c = timeit(lambda: _ckernels.neighbor_pairs(frac, cell, cutoff, 3))
            row += f"   compiled {t_c * 1e3:8.3f} ms   speedup {t_py / t_c:5.1f}x"
        print(row)


def bench_segment_sum():
    print("== segment_sum (edge aggregation shapes) ==")
    rng = np.random.default_rng(0)
    for n, d, segs in ((4608, 32, 256), (16384, 64, 512)):
        values = rng.standard_normal((n, d))
        seg = rng.integers(segs, size=n).astype(np.int64)
        t_py = timeit(lambda: _segment_sum_py(values, seg, segs))
        row = f"({n:5d},{d:3d}) -> {segs:4d}:  python {t_py * 1e3:8.3f} ms"
        if kernels.backend() == "compiled":
            from crystalgym import _ckernels
            t_c = timeit(lambda: _ckernels.segment_sum(values, seg, segs))
            row += f"   compiled {t_c * 1e3:8.3f} ms   speedup {t_py / t_c:5.1f}x"
        print(row)


def bench_training_step():
    print(f"== one DQN update (backend: {kernels.backend()}) ==")
    from crystalgym.agents import AgentConfig, Transition, make_agent
    from crystalgym.calculators import DensityCalculator

    space = cg.action_space("small")
    pool = [cg.load_structure("rocksalt")]
    env_cfg = cg.EpisodeConfig(prop="density", target=3.0, pool=pool,
                               action_space=space, seed=7)
    env = cg.CrystalEnv(env_cfg, DensityCalculator(), cutoff=4.2)
    cfg = AgentConfig(algorithm="dqn", min_buffer=32)
    agent = make_agent(env, cfg, 7)
    obs = env.reset()
    for _ in range(64):
        action = int(agent.rng.integers(env.n_actions))
        step = env.step(action)
        agent.buffer.push(Transition(obs, action, step.reward,
                                     step.observation, step.done))
        obs = env.reset() if step.done else step.observation
    t_update = timeit(agent._update, repeats=30)
    t_act = timeit(lambda: agent._q(obs), repeats=100)
    print(f"update (batch 32): {t_update * 1e3:8.2f} ms")
    print(f"action forward   : {t_act * 1e3:8.2f} ms")


if __name__ == "__main__":
    print(f"kernel backend selected at import: {kernels.backend()}\n")
    bench_neighbor_pairs()
    print()
    bench_segment_sum()
    print()
    bench_training_step()
