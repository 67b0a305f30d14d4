"""Training targets and loss functions for the five algorithms.

All losses are scalar Tensors differentiable with respect to the supplied
parameter dicts; targets are plain arrays computed without gradients.
"""

from __future__ import annotations

import numpy as np

from ..nn import GraphBatch, MegnetConfig, Tensor, forward, no_grad
from ..nn import autograd as ag


def _batch(observations):
    return GraphBatch.from_features(list(observations))


def q_values(params, config: MegnetConfig, observations) -> np.ndarray:
    with no_grad():
        return forward(params, config, _batch(observations)).data


def dqn_target(transitions, online_params, target_params, config: MegnetConfig,
               gamma: float) -> np.ndarray:
    """delta_i = r_i + gamma * max_a Q_target(s'_i, a) * (1 - done_i)."""
    rewards = np.array([t.reward for t in transitions])
    dones = np.array([t.done for t in transitions], dtype=np.float64)
    next_q = q_values(target_params, config, [t.next_obs for t in transitions])
    return rewards + gamma * next_q.max(axis=1) * (1.0 - dones)


def rainbow_target(transitions, online_params, target_params, config: MegnetConfig,
                   gamma: float) -> np.ndarray:
    """Double-DQN target: bootstrap with Q_target at the online argmax."""
    rewards = np.array([t.reward for t in transitions])
    dones = np.array([t.done for t in transitions], dtype=np.float64)
    next_obs = [t.next_obs for t in transitions]
    online_next = q_values(online_params, config, next_obs)
    target_next = q_values(target_params, config, next_obs)
    chosen = target_next[np.arange(len(transitions)), online_next.argmax(axis=1)]
    return rewards + gamma * chosen * (1.0 - dones)


def td_loss(online_params, config: MegnetConfig, transitions, targets,
            weights=None):
    """(weighted) MSE between Q_online(s, a) and the targets.

    Returns (loss tensor, per-item TD errors) so priorities can be refreshed.
    """
    actions = np.array([t.action for t in transitions], dtype=np.int64)
    q = forward(online_params, config, _batch([t.obs for t in transitions]))
    q_sa = ag.pick(q, actions)
    err = ag.sub(q_sa, Tensor(np.asarray(targets)))
    sq = ag.square(err)
    if weights is not None:
        sq = ag.mul(sq, Tensor(np.asarray(weights)))
    return ag.tmean(sq), err.data.copy()


def importance_weights(probs: np.ndarray, n: int, beta: float) -> np.ndarray:
    """w_i = (N * P(i))^-beta, normalized by the batch maximum."""
    w = (n * probs) ** (-beta)
    return w / w.max()


def epsilon_greedy(q: np.ndarray, epsilon: float, rng) -> int:
    """Uniform with probability epsilon, else argmax (ties to lowest index)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(len(q)))
    return int(np.argmax(q))


def gae_advantages(rewards, values, next_values, dones, gamma: float,
                   lam: float) -> np.ndarray:
    """Generalized advantage estimates over one episode (time-ordered arrays)."""
    T = len(rewards)
    adv = np.zeros(T)
    running = 0.0
    for t in range(T - 1, -1, -1):
        nonterminal = 1.0 - float(dones[t])
        delta = rewards[t] + gamma * next_values[t] * nonterminal - values[t]
        running = delta + gamma * lam * nonterminal * running
        adv[t] = running
    return adv


def ppo_loss(policy_params, value_params, config: MegnetConfig,
             value_config: MegnetConfig, observations, actions, old_log_probs,
             advantages, returns, clip_eps: float, value_coef: float,
             entropy_coef: float):
    """Clipped surrogate + value MSE - entropy bonus.

    Advantages are expected pre-normalized; `returns` are the value targets.
    """
    batch = _batch(observations)
    actions = np.asarray(actions, dtype=np.int64)
    logits = forward(policy_params, config, batch)
    logp_all = ag.log_softmax(logits, axis=1)
    logp = ag.pick(logp_all, actions)
    ratio = ag.exp(ag.sub(logp, Tensor(np.asarray(old_log_probs))))
    adv = Tensor(np.asarray(advantages))
    unclipped = ag.mul(ratio, adv)
    clipped = ag.mul(ag.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps), adv)
    policy_term = ag.mul(ag.tmean(ag.minimum(unclipped, clipped)), -1.0)

    probs = ag.exp(logp_all)
    entropy = ag.tmean(ag.mul(ag.tsum(ag.mul(probs, logp_all), axis=1), -1.0))

    values = forward(value_params, value_config, batch)
    value_err = ag.sub(ag.tsum(values, axis=1), Tensor(np.asarray(returns)))
    value_term = ag.tmean(ag.square(value_err))

    total = ag.sub(ag.add(policy_term, ag.mul(value_term, value_coef)),
                   ag.mul(entropy, entropy_coef))
    return total, policy_term, value_term, entropy


def sac_q_targets(transitions, policy_params, q1_target, q2_target,
                  config: MegnetConfig, gamma: float, alpha: float) -> np.ndarray:
    """y = r + gamma(1-done) * E_pi[min Q' - alpha log pi] with exact expectations."""
    rewards = np.array([t.reward for t in transitions])
    dones = np.array([t.done for t in transitions], dtype=np.float64)
    next_obs = [t.next_obs for t in transitions]
    with no_grad():
        batch = _batch(next_obs)
        logits = forward(policy_params, config, batch)
        logp = ag.log_softmax(logits, axis=1).data
        probs = np.exp(logp)
        q1 = forward(q1_target, config, batch).data
        q2 = forward(q2_target, config, batch).data
    soft_value = (probs * (np.minimum(q1, q2) - alpha * logp)).sum(axis=1)
    return rewards + gamma * (1.0 - dones) * soft_value


def sac_losses(transitions, policy_params, q1_params, q2_params, q1_target,
               q2_target, config: MegnetConfig, gamma: float, alpha: float,
               target_entropy: float):
    """Returns (policy loss, q1 loss, q2 loss, alpha gradient, mean entropy).

    The alpha gradient is d/d(log alpha) of the temperature objective
    J(alpha) = alpha * (H(pi) - H_target); descending it raises alpha when
    entropy is below target and lowers it otherwise.
    """
    targets = sac_q_targets(transitions, policy_params, q1_target, q2_target,
                            config, gamma, alpha)
    obs = [t.obs for t in transitions]
    actions = np.array([t.action for t in transitions], dtype=np.int64)
    batch = _batch(obs)

    q1 = forward(q1_params, config, batch)
    q2 = forward(q2_params, config, batch)
    t_target = Tensor(targets)
    q1_loss = ag.tmean(ag.square(ag.sub(ag.pick(q1, actions), t_target)))
    q2_loss = ag.tmean(ag.square(ag.sub(ag.pick(q2, actions), t_target)))

    logits = forward(policy_params, config, batch)
    logp = ag.log_softmax(logits, axis=1)
    probs = ag.exp(logp)
    with no_grad():
        min_q = Tensor(np.minimum(forward(q1_params, config, batch).data,
                                  forward(q2_params, config, batch).data))
    inner = ag.sub(ag.mul(logp, alpha), min_q)
    policy_loss = ag.tmean(ag.tsum(ag.mul(probs, inner), axis=1))

    entropy = -(probs.data * logp.data).sum(axis=1).mean()
    alpha_grad = alpha * (entropy - target_entropy)
    return policy_loss, q1_loss, q2_loss, alpha_grad, entropy


def kl_categorical(logp, logq) -> "Tensor":
    """KL(p || q) per row from log-probabilities; summed over actions."""
    p = ag.exp(logp)
    return ag.tsum(ag.mul(p, ag.sub(logp, logq)), axis=1)


def reinforce_loss(policy_params, reference_params, config: MegnetConfig,
                   observations, actions, terminal_reward: float,
                   kl_coef: float, entropy_coef: float):
    """-A * sum log pi + c_KL * sum KL(pi || pi_ref) - c_H * sum H(pi)."""
    batch = _batch(list(observations))
    actions = np.asarray(actions, dtype=np.int64)
    logits = forward(policy_params, config, batch)
    logp_all = ag.log_softmax(logits, axis=1)
    logp_taken = ag.pick(logp_all, actions)
    pg_term = ag.mul(ag.tsum(logp_taken), -terminal_reward)

    with no_grad():
        ref_logits = forward(reference_params, config, batch)
        ref_logp = ag.log_softmax(ref_logits, axis=1).data
    kl_term = ag.tsum(kl_categorical(logp_all, Tensor(ref_logp)))

    probs = ag.exp(logp_all)
    entropy_term = ag.mul(ag.tsum(ag.mul(probs, logp_all)), -1.0)

    total = ag.sub(ag.add(pg_term, ag.mul(kl_term, kl_coef)),
                   ag.mul(entropy_term, entropy_coef))
    return total, float(kl_term.data), float(entropy_term.data)
