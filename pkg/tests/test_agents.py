import math

import numpy as np
import pytest
from scipy import stats

from crystalgym.actions import action_space
from crystalgym.agents import (AgentConfig, PrioritizedReplayBuffer,
                               ReplayBuffer, SumTree, Transition, dqn_target,
                               epsilon_greedy, gae_advantages,
                               importance_weights, make_agent, ppo_loss,
                               rainbow_target, reinforce_loss, sac_losses,
                               td_loss, trailing_mean, train)
from crystalgym.calculators import DensityCalculator
from crystalgym.env import CrystalEnv, EpisodeConfig
from crystalgym.errors import ConfigError
from crystalgym.nn import copy_params, init_params, load_checkpoint, zero_grads
from crystalgym.pool import load_structure

from test_megnet import random_features, small_config

SMALL = action_space("small")
N_ACTIONS = 6


def make_env(seed=0, prop="density", target=3.0):
    cfg = EpisodeConfig(prop=prop, target=target,
                        pool=[load_structure("cu3au")], action_space=SMALL,
                        seed=seed)
    return CrystalEnv(cfg, DensityCalculator(), cutoff=3.5)


def make_transitions(rng, n, reward_fn=None, done_prob=0.3):
    out = []
    for i in range(n):
        done = rng.random() < done_prob
        reward = rng.random() if reward_fn is None else reward_fn(i)
        out.append(Transition(random_features(rng, n_actions=N_ACTIONS),
                              int(rng.integers(N_ACTIONS)), float(reward),
                              random_features(rng, n_actions=N_ACTIONS), done))
    return out


# -- replay buffers ---------------------------------------------------------------


def test_ring_buffer_capacity_and_overwrite():
    rng = np.random.default_rng(0)
    buf = ReplayBuffer(5, rng)
    items = make_transitions(rng, 8)
    for t in items:
        buf.push(t)
    assert len(buf) == 5
    batch, idx, weights = buf.sample(3)
    assert len(batch) == 3
    assert np.array_equal(weights, np.ones(3))


def test_sum_tree_totals_and_find():
    tree = SumTree(4)
    for i, p in enumerate([1.0, 3.0, 2.0, 4.0]):
        tree.update(i, p)
    assert tree.total == pytest.approx(10.0)
    assert tree.find(0.5) == 0
    assert tree.find(1.5) == 1
    assert tree.find(4.5) == 2
    assert tree.find(9.9) == 3
    tree.update(1, 0.0)
    assert tree.total == pytest.approx(7.0)


def test_per_sampling_proportional_to_priority_alpha():
    rng = np.random.default_rng(1)
    alpha = 0.6
    buf = PrioritizedReplayBuffer(8, rng, alpha=alpha, eps=0.0)
    items = make_transitions(rng, 4)
    for t in items:
        buf.push(t)
    priorities = np.array([1.0, 3.0, 0.5, 2.0])
    buf.update_priorities(np.arange(4), priorities)
    expected = priorities ** alpha
    expected /= expected.sum()
    np.testing.assert_allclose(buf.probabilities(), expected, rtol=1e-12)

    counts = np.zeros(4)
    draws = 100_000
    for _ in range(draws // 50):
        _, idx, _ = buf.sample(50, beta=1.0)
        np.add.at(counts, idx, 1)
    np.testing.assert_allclose(counts / draws, expected, atol=0.01)


def test_per_priorities_example():
    # priorities [1, 3] at alpha=1 give P = [0.25, 0.75]
    rng = np.random.default_rng(2)
    buf = PrioritizedReplayBuffer(2, rng, alpha=1.0, eps=0.0)
    for t in make_transitions(rng, 2):
        buf.push(t)
    buf.update_priorities([0, 1], [1.0, 3.0])
    np.testing.assert_allclose(buf.probabilities(), [0.25, 0.75], rtol=1e-12)


def test_importance_weights_uniform_is_one():
    probs = np.full(4, 0.25)
    w = importance_weights(probs, 4, beta=0.7)
    np.testing.assert_allclose(w, np.ones(4))


def test_per_importance_weights_normalized_by_max():
    rng = np.random.default_rng(3)
    buf = PrioritizedReplayBuffer(8, rng, alpha=0.6)
    for t in make_transitions(rng, 8):
        buf.push(t)
    buf.update_priorities(np.arange(8), np.linspace(0.1, 2.0, 8))
    _, _, weights = buf.sample(6, beta=0.4)
    assert weights.max() == pytest.approx(1.0)
    assert np.all(weights > 0)


# -- targets and losses ------------------------------------------------------------


def _q_setup(rng, dueling=False):
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,), dueling=dueling)
    online = init_params(cfg, rng)
    target = init_params(cfg, rng)
    return cfg, online, target


def test_dqn_target_terminal_cuts_bootstrap():
    rng = np.random.default_rng(4)
    cfg, online, target = _q_setup(rng)
    t = make_transitions(rng, 1, reward_fn=lambda i: 1.0)[0]
    done = Transition(t.obs, t.action, 1.0, t.next_obs, True)
    assert dqn_target([done], online, target, cfg, gamma=0.9)[0] == 1.0


def test_dqn_target_arithmetic():
    # r=1, gamma=0.9, max Q' = 2 -> 2.8, checked through a rigged head
    rng = np.random.default_rng(5)
    cfg, online, target = _q_setup(rng)
    target["head.out.w1"].data = np.zeros_like(target["head.out.w1"].data)
    target["head.out.b1"].data = np.array([2.0, 0.0, -1.0, 0.0, 0.0, 0.0])
    t = make_transitions(rng, 1)[0]
    live = Transition(t.obs, t.action, 1.0, t.next_obs, False)
    assert dqn_target([live], online, target, cfg, gamma=0.9)[0] == pytest.approx(2.8)
    assert dqn_target([live], online, target, cfg, gamma=0.0)[0] == pytest.approx(1.0)


def test_rainbow_equals_dqn_when_params_shared():
    rng = np.random.default_rng(6)
    cfg, online, _ = _q_setup(rng)
    shared = copy_params(online)
    batch = make_transitions(rng, 6)
    np.testing.assert_allclose(
        rainbow_target(batch, online, shared, cfg, gamma=0.95),
        dqn_target(batch, online, shared, cfg, gamma=0.95), rtol=1e-12)


def test_td_loss_weighted_and_errors():
    rng = np.random.default_rng(7)
    cfg, online, target = _q_setup(rng)
    batch = make_transitions(rng, 5)
    targets = rng.standard_normal(5)
    loss, errs = td_loss(online, cfg, batch, targets)
    assert loss.data.shape == ()
    assert errs.shape == (5,)
    weights = np.full(5, 0.5)
    loss_w, _ = td_loss(online, cfg, batch, targets, weights)
    assert loss_w.data == pytest.approx(0.5 * float(loss.data), rel=1e-12)


def test_epsilon_greedy_extremes_and_ties():
    rng = np.random.default_rng(8)
    q = np.array([1.0, 1.0, 0.0])
    assert epsilon_greedy(q, 0.0, rng) == 0  # tie -> lowest index
    for _ in range(20):
        assert epsilon_greedy(np.array([0.1, 5.0, 2.0]), 0.0, rng) == 1
    with pytest.raises(ValueError):
        epsilon_greedy(q, 1.5, rng)


def test_epsilon_greedy_constant_shift_invariance():
    rng = np.random.default_rng(9)
    for _ in range(50):
        q = rng.standard_normal(7)
        assert epsilon_greedy(q, 0.0, rng) == epsilon_greedy(q + 123.4, 0.0, rng)


def test_epsilon_one_uniform_chi_squared():
    rng = np.random.default_rng(10)
    q = np.zeros(10)
    counts = np.zeros(10)
    for _ in range(10_000):
        counts[epsilon_greedy(q, 1.0, rng)] += 1
    assert stats.chisquare(counts).pvalue > 0.01


def test_gae_single_step_reduces_to_td():
    adv = gae_advantages(np.array([2.0]), np.array([0.5]), np.array([1.0]),
                         np.array([0.0]), gamma=0.9, lam=0.95)
    assert adv[0] == pytest.approx(2.0 + 0.9 * 1.0 - 0.5)
    adv_t = gae_advantages(np.array([2.0]), np.array([0.5]), np.array([7.0]),
                           np.array([1.0]), gamma=0.9, lam=0.95)
    assert adv_t[0] == pytest.approx(2.0 - 0.5)  # terminal cuts bootstrap


def test_gae_matches_direct_recursion():
    rng = np.random.default_rng(11)
    T = 6
    rewards = rng.standard_normal(T)
    values = rng.standard_normal(T)
    next_values = rng.standard_normal(T)
    dones = np.zeros(T)
    dones[-1] = 1.0
    gamma, lam = 0.97, 0.9
    adv = gae_advantages(rewards, values, next_values, dones, gamma, lam)
    # independent forward-sum oracle
    deltas = rewards + gamma * next_values * (1 - dones) - values
    for t in range(T):
        total = 0.0
        factor = 1.0
        for k in range(t, T):
            total += factor * deltas[k]
            if dones[k]:
                break
            factor *= gamma * lam
        assert adv[t] == pytest.approx(total, rel=1e-12)


def test_ppo_clip_example_and_flat_gradient():
    # per-item surrogate min(1.5, 1.2) when rho=1.5, eps=0.2, A=1
    rng = np.random.default_rng(12)
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,))
    vcfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                        mlp_hidden=6, head_hidden=(6,), output=1)
    policy = init_params(cfg, rng)
    value = init_params(vcfg, rng)
    obs = [random_features(rng, n_actions=N_ACTIONS) for _ in range(4)]
    actions = np.array([0, 1, 2, 3])
    # rig old log-probs so the ratio is far outside the clip window
    from crystalgym.nn import forward, no_grad
    from crystalgym.nn import autograd as ag
    from crystalgym.nn.megnet import GraphBatch
    with no_grad():
        logits = forward(policy, cfg, GraphBatch.from_features(obs)).data
    logp_now = (logits - np.log(np.exp(logits - logits.max(1, keepdims=True))
                                .sum(1, keepdims=True)) - logits.max(1, keepdims=True))
    current = logp_now[np.arange(4), actions]
    old = current - np.log(1.5)  # ratio = 1.5 everywhere
    adv = np.ones(4)
    total, pol, val, ent = ppo_loss(policy, value, cfg, vcfg, obs, actions, old,
                                    adv, np.zeros(4), clip_eps=0.2,
                                    value_coef=0.0, entropy_coef=0.0)
    assert float(pol.data) == pytest.approx(-1.2, rel=1e-9)
    # clipped-and-worse items contribute zero policy gradient
    zero_grads(policy)
    total.backward()
    grad_norm = sum(float(np.abs(p.grad).sum()) for p in policy.values()
                    if p.grad is not None)
    assert grad_norm < 1e-10


def test_ppo_ratio_one_gives_negative_mean_advantage():
    rng = np.random.default_rng(13)
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,))
    vcfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                        mlp_hidden=6, head_hidden=(6,), output=1)
    policy = init_params(cfg, rng)
    value = init_params(vcfg, rng)
    obs = [random_features(rng, n_actions=N_ACTIONS) for _ in range(5)]
    actions = np.array([0, 1, 2, 3, 4])
    from crystalgym.nn import forward, no_grad
    from crystalgym.nn.megnet import GraphBatch
    with no_grad():
        logits = forward(policy, cfg, GraphBatch.from_features(obs)).data
    shifted = logits - logits.max(1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(1, keepdims=True))
    old = logp[np.arange(5), actions]
    adv = rng.standard_normal(5)
    _, pol, _, _ = ppo_loss(policy, value, cfg, vcfg, obs, actions, old, adv,
                            np.zeros(5), clip_eps=0.2, value_coef=0.0,
                            entropy_coef=0.0)
    assert float(pol.data) == pytest.approx(-adv.mean(), rel=1e-9)


def test_sac_uniform_policy_entropy():
    assert math.log(18) == pytest.approx(2.8903, abs=1e-4)
    rng = np.random.default_rng(14)
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,))
    policy = init_params(cfg, rng)
    # zero final layer -> uniform categorical -> entropy log(n_actions)
    policy["head.out.w1"].data = np.zeros_like(policy["head.out.w1"].data)
    policy["head.out.b1"].data = np.zeros_like(policy["head.out.b1"].data)
    q1 = init_params(cfg, rng)
    q2 = init_params(cfg, rng)
    batch = make_transitions(rng, 4)
    _, _, _, _, entropy = sac_losses(batch, policy, q1, q2, copy_params(q1),
                                     copy_params(q2), cfg, gamma=0.9, alpha=0.2,
                                     target_entropy=1.0)
    assert entropy == pytest.approx(math.log(N_ACTIONS), rel=1e-9)


def test_sac_terminal_target_is_reward():
    rng = np.random.default_rng(15)
    cfg, q1, q2 = _q_setup(rng)
    policy = init_params(cfg, rng)
    t = make_transitions(rng, 1)[0]
    done = Transition(t.obs, t.action, 3.25, t.next_obs, True)
    from crystalgym.agents import sac_q_targets
    y = sac_q_targets([done], policy, q1, q2, cfg, gamma=0.9, alpha=0.3)
    assert y[0] == pytest.approx(3.25)


def test_sac_alpha_zero_policy_loss_is_neg_expected_q():
    rng = np.random.default_rng(16)
    cfg, q1, q2 = _q_setup(rng)
    policy = init_params(cfg, rng)
    batch = make_transitions(rng, 3)
    policy_loss, _, _, _, _ = sac_losses(batch, policy, q1, q2, copy_params(q1),
                                         copy_params(q2), cfg, gamma=0.9,
                                         alpha=0.0, target_entropy=1.0)
    # direct oracle: E_pi[-min(Q1,Q2)]
    from crystalgym.nn import forward, no_grad
    from crystalgym.nn.megnet import GraphBatch
    obs = [t.obs for t in batch]
    with no_grad():
        gb = GraphBatch.from_features(obs)
        logits = forward(policy, cfg, gb).data
        qmin = np.minimum(forward(q1, cfg, gb).data, forward(q2, cfg, gb).data)
    shifted = logits - logits.max(1, keepdims=True)
    probs = np.exp(shifted) / np.exp(shifted).sum(1, keepdims=True)
    oracle = -(probs * qmin).sum(1).mean()
    assert float(policy_loss.data) == pytest.approx(oracle, rel=1e-9)


def test_sac_alpha_autotune_direction():
    rng = np.random.default_rng(30)
    env = make_env(seed=30)
    cfg = AgentConfig(algorithm="sac", network=FAST_NET, min_buffer=8,
                      batch_size=4, update_every=2, sac_auto_alpha=True,
                      sac_target_entropy_scale=0.98)
    agent = make_agent(env, cfg, 30)
    # near-deterministic policy: entropy far below target -> alpha must rise
    agent.policy_params["head.out.w1"].data[:] = 0.0
    agent.policy_params["head.out.b1"].data[:] = 0.0
    agent.policy_params["head.out.b1"].data[0] = 60.0
    before = agent.alpha
    obs = env.reset()
    for _ in range(24):
        action = agent.act(obs)
        step = env.step(action)
        agent.observe(Transition(obs, action, step.reward, step.observation,
                                 step.done))
        obs = env.reset() if step.done else step.observation
    assert agent.alpha > before


def test_reinforce_loss_components():
    rng = np.random.default_rng(17)
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,))
    policy = init_params(cfg, rng)
    reference = copy_params(policy)
    obs = [random_features(rng, n_actions=N_ACTIONS) for _ in range(4)]
    actions = [0, 1, 2, 3]
    # pi == pi_ref -> zero KL
    _, kl, _ = reinforce_loss(policy, reference, cfg, obs, actions, 1.0,
                              kl_coef=0.05, entropy_coef=0.0)
    assert kl == pytest.approx(0.0, abs=1e-12)
    # A = 0 and coefs 0 -> zero loss
    loss, _, _ = reinforce_loss(policy, reference, cfg, obs, actions, 0.0,
                                kl_coef=0.0, entropy_coef=0.0)
    assert float(loss.data) == pytest.approx(0.0, abs=1e-12)
    # deterministic-ish policy: huge logits -> entropy ~ 0
    sharp = copy_params(policy)
    sharp["head.out.w1"].data = np.zeros_like(sharp["head.out.w1"].data)
    sharp["head.out.b1"].data = np.array([200.0, 0, 0, 0, 0, 0])
    _, _, entropy = reinforce_loss(sharp, reference, cfg, obs, actions, 1.0,
                                   kl_coef=0.0, entropy_coef=0.01)
    assert abs(entropy) < 1e-8


# -- loss gradient checks -----------------------------------------------------------


def _probe_gradients(params_list, loss_fn, rng, probes=3, eps=1e-5, tol=1e-4):
    for params in params_list:
        zero_grads(params)
    loss = loss_fn()
    loss.backward()
    grads = [{k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
              for k, p in params.items()} for params in params_list]
    from crystalgym.nn import no_grad
    worst = 0.0
    for params, saved in zip(params_list, grads):
        for key in sorted(params):
            p = params[key]
            for _ in range(probes):
                idx = tuple(rng.integers(d) for d in p.data.shape)
                orig = p.data[idx]
                p.data = p.data.copy()
                p.data[idx] = orig + eps
                with no_grad():
                    fp = float(loss_fn().data)
                p.data[idx] = orig - eps
                with no_grad():
                    fm = float(loss_fn().data)
                p.data[idx] = orig
                fd = (fp - fm) / (2 * eps)
                adg = saved[key][idx]
                rel = abs(fd - adg) / max(abs(fd), abs(adg), 1e-7)
                worst = max(worst, rel)
    assert worst < tol, worst


def test_td_loss_gradcheck():
    rng = np.random.default_rng(18)
    cfg, online, target = _q_setup(rng)
    batch = make_transitions(rng, 4)
    targets = dqn_target(batch, online, target, cfg, gamma=0.9)
    _probe_gradients([online], lambda: td_loss(online, cfg, batch, targets)[0], rng)


def test_ppo_loss_gradcheck():
    rng = np.random.default_rng(19)
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,))
    vcfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                        mlp_hidden=6, head_hidden=(6,), output=1)
    policy = init_params(cfg, rng)
    value = init_params(vcfg, rng)
    obs = [random_features(rng, n_actions=N_ACTIONS) for _ in range(4)]
    actions = np.array([0, 1, 2, 0])
    old = rng.standard_normal(4) * 0.1 - 1.8
    adv = rng.standard_normal(4)
    rets = rng.standard_normal(4)
    _probe_gradients(
        [policy, value],
        lambda: ppo_loss(policy, value, cfg, vcfg, obs, actions, old, adv, rets,
                         0.2, 0.5, 0.01)[0], rng)


def test_sac_losses_gradcheck():
    rng = np.random.default_rng(20)
    cfg, q1, q2 = _q_setup(rng)
    policy = init_params(cfg, rng)
    q1t, q2t = copy_params(q1), copy_params(q2)
    batch = make_transitions(rng, 3)
    _probe_gradients([policy],
                     lambda: sac_losses(batch, policy, q1, q2, q1t, q2t, cfg,
                                        0.9, 0.2, 1.0)[0], rng)
    _probe_gradients([q1],
                     lambda: sac_losses(batch, policy, q1, q2, q1t, q2t, cfg,
                                        0.9, 0.2, 1.0)[1], rng)


def test_reinforce_loss_gradcheck():
    rng = np.random.default_rng(21)
    cfg = small_config(layers=1, node_embed=4, edge_embed=4, global_embed=4,
                       mlp_hidden=6, head_hidden=(6,))
    policy = init_params(cfg, rng)
    reference = init_params(cfg, rng)
    obs = [random_features(rng, n_actions=N_ACTIONS) for _ in range(3)]
    actions = [0, 1, 2]
    _probe_gradients([policy],
                     lambda: reinforce_loss(policy, reference, cfg, obs, actions,
                                            0.7, 0.05, 0.01)[0], rng)


# -- training loop -----------------------------------------------------------------


FAST_NET = {"layers": 1, "node_embed": 6, "edge_embed": 6, "global_embed": 6,
            "mlp_hidden": 8, "head_hidden": [8]}


def test_budget_zero_empty_log_initial_checkpoint(tmp_path):
    env = make_env()
    cfg = AgentConfig(algorithm="dqn", network=FAST_NET)
    path = tmp_path / "initial.ckpt.npz"
    result = train(env, cfg, episodes=0, seed=0, checkpoint_path=path)
    assert result.records == []
    configs, groups, meta = load_checkpoint(path)
    fresh = make_agent(make_env(), cfg, 0)
    for key, tensor in fresh.params.items():
        np.testing.assert_array_equal(groups["q"][key].data, tensor.data)


def test_train_deterministic_per_seed():
    logs = []
    for _ in range(2):
        env = make_env(seed=5)
        cfg = AgentConfig(algorithm="dqn", network=FAST_NET, min_buffer=16,
                          batch_size=8, update_every=4)
        result = train(env, cfg, episodes=12, seed=5)
        logs.append([(r["reward"], r["composition"], r["loss"]) for r in result.records])
    assert logs[0] == logs[1]


@pytest.mark.parametrize("algorithm", ["dqn", "rainbow", "ppo", "sac", "reinforce"])
def test_all_agents_run_and_log(algorithm, tmp_path):
    env = make_env(seed=3)
    cfg = AgentConfig(algorithm=algorithm, network=FAST_NET, min_buffer=12,
                      batch_size=6, update_every=4, rollout_episodes=3,
                      epsilon_decay_episodes=10)
    log_path = tmp_path / "log.csv"
    ckpt = tmp_path / "agent.ckpt.npz"
    result = train(env, cfg, episodes=8, seed=3, log_path=log_path,
                   checkpoint_path=ckpt)
    assert len(result.records) == 8
    lines = log_path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0].startswith("episode,structure,composition,property,reward")
    assert len(lines) == 9
    assert any(r["loss"] is not None for r in result.records)
    configs, groups, meta = load_checkpoint(ckpt)
    assert meta["algorithm"] == algorithm


def test_unknown_algorithm_rejected():
    with pytest.raises(ConfigError):
        AgentConfig(algorithm="a2c")


def test_trailing_mean_window():
    records = [{"reward": float(i)} for i in range(10)]
    assert trailing_mean(records, window=4) == pytest.approx(7.5)
