"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete. The two learning runs train real agents and take
a few minutes each; everything else is fast.
"""

import math
import time

import numpy as np

from crystalgym.actions import action_space
from crystalgym.agents import (AgentConfig, PrioritizedReplayBuffer, Transition,
                               dqn_target, ppo_loss, rainbow_target,
                               reinforce_loss, sac_losses, td_loss,
                               trailing_mean, train)
from crystalgym.calculators import (CachedCalculator, DensityCalculator,
                                    MockBandGapCalculator, ResultCache,
                                    fit_murnaghan, render_qe_input)
from crystalgym.constants import AVOGADRO
from crystalgym.env import (CrystalEnv, EpisodeConfig, benchmark_targets,
                            reward_band_gap, reward_bulk_modulus, reward_density)
from crystalgym.featurize import GraphFeatures
from crystalgym.nn import (copy_params, forward, init_params, no_grad,
                           zero_grads)
from crystalgym.pool import load_structure

from test_megnet import random_features, small_config

SMALL = action_space("small")
ROCKSALT = load_structure("rocksalt")

ACCEPT_NET = {"layers": 1, "node_embed": 16, "edge_embed": 16,
              "global_embed": 16, "mlp_hidden": 32, "head_hidden": [32]}


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {name}: {status}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


# -- closed-form criteria ------------------------------------------------------


def test_reward_formulas_match_direct_evaluation():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        ok = bool(rng.random() < 0.8)
        # bulk modulus over the paper's 100-1000 GPa regime
        p, p_hat = rng.uniform(0, 2000), rng.uniform(100, 1000)
        got = reward_bulk_modulus(p, p_hat, ok)
        want = max(-abs(p - p_hat) / p_hat, -5.0) if ok else -5.0
        worst = max(worst, abs(got - want))
        assert -5.0 <= got <= 0.0
        # density over 0-28 g/cm^3
        p, p_hat = rng.uniform(0, 28), rng.uniform(1, 10)
        got = reward_density(p, p_hat, ok)
        want = math.exp(-((p - p_hat) ** 2) / p_hat) if ok else -1.0
        worst = max(worst, abs(got - want))
        assert got == -1.0 or 0.0 < got <= 1.0
        # band gap over 0-5 eV
        p, p_hat = rng.uniform(0, 5), rng.uniform(0.5, 5)
        got = reward_band_gap(p, p_hat, ok)
        want = math.exp(-((p - p_hat) ** 2)) if ok else -1.0
        worst = max(worst, abs(got - want))
        assert got == -1.0 or 0.0 < got <= 1.0
    elapsed = time.perf_counter() - start
    report("reward-formulas", worst <= 1e-12 and elapsed < 1.0,
           f"max |diff| {worst:.2e}, {elapsed:.2f}s for 3000 triples")


def test_benchmark_targets_exact():
    easy = benchmark_targets("easy")
    hard = benchmark_targets("hard")
    ok = (easy == {"bulk_modulus": 300.0, "density": 3.0, "band_gap": 1.12}
          and hard == {"bulk_modulus": 500.0, "density": 5.0, "band_gap": 2.0})
    report("benchmark-targets", ok, f"easy={easy}, hard={hard}")


def test_murnaghan_roundtrip():
    from crystalgym.calculators import EOSFit, murnaghan_energy
    start = time.perf_counter()
    truth = EOSFit(E0=-100.0, V0=100.0, B0=300.0, B0p=4.0)
    volumes = np.linspace(92.0, 108.0, 9)
    clean = fit_murnaghan([(v, murnaghan_energy(v, truth)) for v in volumes])
    rels = [abs(clean.E0 + 100.0) / 100.0, abs(clean.V0 - 100.0) / 100.0,
            abs(clean.B0 - 300.0) / 300.0, abs(clean.B0p - 4.0) / 4.0]
    rng = np.random.default_rng(7)
    noisy = fit_murnaghan([(v, murnaghan_energy(v, truth) + rng.normal(0, 1e-4))
                           for v in volumes])
    noisy_rel = abs(noisy.B0 - 300.0) / 300.0
    elapsed = time.perf_counter() - start
    ok = max(rels) < 1e-3 and noisy_rel < 1e-2 and elapsed < 1.0
    report("murnaghan-roundtrip", ok,
           f"noiseless worst rel {max(rels):.2e}, noisy B0 rel {noisy_rel:.2e}, "
           f"{elapsed:.2f}s")


def test_density_oracle():
    # independent hand computation: mass 4*(22.98976928+35.45) g/mol,
    # volume 5.6402^3 A^3 = 1.79425...e-22 cm^3
    hand = (4 * (22.98976928 + 35.45)) / (AVOGADRO * (5.6402 ** 3) * 1e-24)
    result = DensityCalculator().compute(ROCKSALT, ["Na"] * 4 + ["Cl"] * 4)
    ok = (result.success and abs(result.value - hand) < 1e-12
          and abs(result.value - 2.163) <= 0.005)
    report("density-oracle", ok, f"computed {result.value:.6f}, hand {hand:.6f}")


def test_qe_golden_files():
    from pathlib import Path
    fixtures = Path(__file__).parent / "fixtures"
    text_bg = render_qe_input(ROCKSALT, ["Na"] * 4 + ["Cl"] * 4, "band_gap")
    golden_bg = (fixtures / "golden_rocksalt_band_gap.pwi").read_text("utf-8")
    perov = load_structure("perovskite")
    text_d = render_qe_input(perov, ["Sr", "Ca", "O", "O", "O"], "density")
    golden_d = (fixtures / "golden_perovskite_density.pwi").read_text("utf-8")
    settings = ("ecutwfc = 50", "ecutrho = 400", "degauss = 0.001",
                "mixing_beta = 0.7", "nbnd = 68")
    ok = (text_bg == golden_bg and text_d == golden_d
          and all(s in text_bg for s in settings))
    report("qe-golden-files", ok,
           "byte-identical" if ok else "MISMATCH against golden fixtures")


# -- gradient and network criteria -----------------------------------------------


def _fd_check(params_list, loss_fn, rng, probes=4, eps=1e-5):
    for params in params_list:
        zero_grads(params)
    loss_fn().backward()
    worst = 0.0
    for params in params_list:
        saved = {k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                 for k, p in params.items()}
        for key in sorted(params):
            p = params[key]
            for _ in range(probes):
                idx = tuple(rng.integers(d) for d in p.data.shape)
                orig = p.data[idx]
                p.data = p.data.copy()
                p.data[idx] = orig + eps
                with no_grad():
                    fp = float(loss_fn().data.sum())
                p.data[idx] = orig - eps
                with no_grad():
                    fm = float(loss_fn().data.sum())
                p.data[idx] = orig
                fd = (fp - fm) / (2 * eps)
                rel = abs(fd - saved[key][idx]) / max(abs(fd), abs(saved[key][idx]), 1e-7)
                worst = max(worst, rel)
    return worst


def test_gradient_suite_all_losses():
    from crystalgym.nn import autograd as ag
    start = time.perf_counter()
    rng = np.random.default_rng(99)
    n_actions = 6
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,))
    vcfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                        mlp_hidden=6, head_hidden=(6,), output=1)
    dueling_cfg = small_config(layers=1, node_embed=4, edge_embed=4,
                               global_embed=4, mlp_hidden=6, head_hidden=(6,),
                               dueling=True)

    def frozen_batch(n):
        return [Transition(random_features(rng, n_actions=n_actions),
                           int(rng.integers(n_actions)), float(rng.random()),
                           random_features(rng, n_actions=n_actions),
                           bool(rng.random() < 0.3)) for _ in range(n)]

    worsts = {}

    # megnet forward (plain and dueling heads) through a fixed projection
    for label, net_cfg in (("forward", cfg), ("forward-dueling", dueling_cfg)):
        params = init_params(net_cfg, rng)
        feats = random_features(rng, n_actions=n_actions)
        proj = rng.standard_normal((n_actions, 1))
        worsts[label] = _fd_check(
            [params],
            lambda p=params, c=net_cfg, f=feats, w=proj:
                ag.matmul(forward(p, c, f), ag.Tensor(w)), rng)

    # dqn / rainbow td losses
    online = init_params(cfg, rng)
    target = init_params(cfg, rng)
    batch = frozen_batch(4)
    t_dqn = dqn_target(batch, online, target, cfg, gamma=0.95)
    worsts["dqn"] = _fd_check([online],
                              lambda: td_loss(online, cfg, batch, t_dqn)[0], rng)
    dueling_online = init_params(dueling_cfg, rng)
    dueling_target = init_params(dueling_cfg, rng)
    t_rain = rainbow_target(batch, dueling_online, dueling_target, dueling_cfg, 0.95)
    weights = rng.random(4) + 0.5
    worsts["rainbow"] = _fd_check(
        [dueling_online],
        lambda: td_loss(dueling_online, dueling_cfg, batch, t_rain, weights)[0], rng)

    # ppo
    policy = init_params(cfg, rng)
    value = init_params(vcfg, rng)
    obs = [random_features(rng, n_actions=n_actions) for _ in range(4)]
    actions = np.array([0, 1, 2, 3])
    old = -1.8 + 0.1 * rng.standard_normal(4)
    adv = rng.standard_normal(4)
    rets = rng.standard_normal(4)
    worsts["ppo"] = _fd_check(
        [policy, value],
        lambda: ppo_loss(policy, value, cfg, vcfg, obs, actions, old, adv, rets,
                         0.2, 0.5, 0.01)[0], rng)

    # sac (policy and q losses)
    sac_policy = init_params(cfg, rng)
    q1, q2 = init_params(cfg, rng), init_params(cfg, rng)
    q1t, q2t = copy_params(q1), copy_params(q2)
    sac_batch = frozen_batch(3)
    worsts["sac-policy"] = _fd_check(
        [sac_policy],
        lambda: sac_losses(sac_batch, sac_policy, q1, q2, q1t, q2t, cfg,
                           0.9, 0.2, 1.0)[0], rng)
    worsts["sac-q"] = _fd_check(
        [q1],
        lambda: sac_losses(sac_batch, sac_policy, q1, q2, q1t, q2t, cfg,
                           0.9, 0.2, 1.0)[1], rng)

    # reinforce
    ref = init_params(cfg, rng)
    worsts["reinforce"] = _fd_check(
        [policy],
        lambda: reinforce_loss(policy, ref, cfg, obs, actions, 0.7,
                               0.05, 0.01)[0], rng)

    elapsed = time.perf_counter() - start
    worst = max(worsts.values())
    ok = worst < 1e-4 and elapsed < 60.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worsts.items())
    report("gradient-suite", ok, f"{detail}; {elapsed:.1f}s")


def test_network_permutation_invariance():
    rng = np.random.default_rng(123)
    cfg = small_config()
    params = init_params(cfg, rng)
    worst = 0.0
    for _ in range(10):
        f = random_features(rng, n_nodes=7, n_edges=24)
        perm = rng.permutation(7)
        inv = np.argsort(perm)
        f2 = GraphFeatures(node_features=f.node_features[perm],
                           edge_src=inv[f.edge_src], edge_dst=inv[f.edge_dst],
                           edge_shifts=f.edge_shifts,
                           edge_features=f.edge_features,
                           global_features=f.global_features, focus=f.focus,
                           n_actions=f.n_actions)
        with no_grad():
            diff = np.abs(forward(params, cfg, f).data
                          - forward(params, cfg, f2).data).max()
        worst = max(worst, float(diff))
    report("network-invariance", worst < 1e-10, f"max |diff| {worst:.2e}")


def test_per_sampling_frequencies():
    rng = np.random.default_rng(31)
    alpha = 0.6
    buf = PrioritizedReplayBuffer(16, rng, alpha=alpha, eps=0.0)
    for _ in range(10):
        buf.push(Transition(None, 0, 0.0, None, False))
    priorities = np.linspace(0.2, 3.0, 10)
    buf.update_priorities(np.arange(10), priorities)
    expected = priorities ** alpha
    expected /= expected.sum()
    counts = np.zeros(10)
    draws = 100_000
    for _ in range(draws // 100):
        _, idx, _ = buf.sample(100, beta=1.0)
        np.add.at(counts, idx, 1)
    max_abs = float(np.abs(counts / draws - expected).max())
    report("per-sampling", max_abs < 0.01, f"max abs dev {max_abs:.4f}")


# -- learning criteria -------------------------------------------------------------


def _density_env(seed):
    cfg = EpisodeConfig(prop="density", target=3.0, pool=[ROCKSALT],
                        action_space=SMALL, seed=seed)
    return CrystalEnv(cfg, DensityCalculator(), cutoff=3.0)


def _random_policy_mean(env_factory, episodes, seed):
    env = env_factory(seed)
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(episodes):
        env.reset()
        done = False
        while not done:
            step = env.step(int(rng.integers(env.n_actions)))
            done = step.done
        total += step.reward
    return total / episodes


def test_learning_sanity_density():
    # the null first: measured random-policy baseline on the same task
    baseline = _random_policy_mean(_density_env, episodes=300, seed=987)
    agent_cfg = AgentConfig(algorithm="dqn", lr=2e-3, min_buffer=200,
                            update_every=2, epsilon_decay_episodes=300,
                            epsilon_end=0.02, network=ACCEPT_NET)

    def stop(records):
        return len(records) >= 100 and trailing_mean(records) >= 0.9

    passes = 0
    results = []
    for seed in range(5):
        result = train(_density_env(seed), agent_cfg, episodes=5000, seed=seed,
                       stop_fn=stop)
        tm = trailing_mean(result.records)
        passed = tm >= 0.9 and len(result.records) <= 5000
        passes += passed
        results.append(f"seed{seed}: {len(result.records)}eps tm={tm:.3f}")
    ok = passes >= 3 and baseline < 0.9
    report("learning-sanity-density", ok,
           f"baseline {baseline:.3f}; {passes}/5 seeds; " + "; ".join(results))


def _bandgap_env(seed):
    cfg = EpisodeConfig(prop="band_gap", target=1.12, pool=[ROCKSALT],
                        action_space=SMALL, seed=seed)
    return CrystalEnv(cfg, MockBandGapCalculator(seed=0), cutoff=3.0)


def test_noisy_reward_robustness_band_gap():
    baseline = _random_policy_mean(_bandgap_env, episodes=300, seed=988)
    agent_cfg = AgentConfig(algorithm="dqn", lr=1e-3, min_buffer=200,
                            update_every=4, epsilon_decay_episodes=2000,
                            epsilon_end=0.05, network=ACCEPT_NET)
    result = train(_bandgap_env(0), agent_cfg, episodes=10_000, seed=0)
    tm = trailing_mean(result.records)
    ok = tm >= baseline + 0.1
    report("noisy-reward-robustness", ok,
           f"baseline {baseline:.3f}, trailing-100 after 10k {tm:.3f}")


# -- determinism and caching --------------------------------------------------------


def test_environment_determinism_and_cache(tmp_path):
    rng = np.random.default_rng(55)
    script = rng.integers(0, 18, size=200)

    def run_trace():
        cfg = EpisodeConfig(prop="density", target=3.0, pool=[ROCKSALT],
                            action_space=SMALL, seed=77, traversal="random",
                            mode="substitution")
        env = CrystalEnv(cfg, DensityCalculator(), cutoff=3.5)
        trace = []
        k = 0
        for _ in range(10):
            obs = env.reset()
            trace.append(obs.flat().tobytes())
            done = False
            while not done:
                res = env.step(int(script[k % len(script)]))
                k += 1
                trace.append(res.observation.flat().tobytes())
                trace.append(res.reward)
                done = res.done
        return trace

    identical = run_trace() == run_trace()

    cache = ResultCache(tmp_path / "cache.tsv")
    cached = CachedCalculator(DensityCalculator(), cache)
    cfg = EpisodeConfig(prop="density", target=3.0, pool=[ROCKSALT],
                        action_space=SMALL, seed=1)
    env = CrystalEnv(cfg, DensityCalculator(), cutoff=3.5)
    env.calculator = cached
    for _ in range(6):  # same greedy composition every episode
        env.reset()
        done = False
        while not done:
            done = env.step(4).done
    ok = identical and cached.invocations == 1
    report("environment-determinism", ok,
           f"traces identical={identical}, calculator invocations for 6 repeat "
           f"episodes={cached.invocations}")
