"""From-scratch float64 deep-RL toolkit on numpy.

Dense networks with exact hand-written backprop (parameter and input
gradients), bias-corrected Adam, a ring replay buffer, and three
off-policy learners: soft actor-critic with twin critics and learned
temperature, DQN over a discrete action set, and DDPG. Everything is
deterministic given the Generators passed in; nothing here owns global
random state.
"""

from .mlp import Mlp, MlpCache, mlp_init, mlp_forward, mlp_forward_cached, mlp_gradient, polyak_update
from .adam import AdamState, adam_init, adam_step, apply_gradients
from .replay import ReplayBuffer, TransitionBatch
from .sac import SacAgent, SacLosses, make_sac_agent, sac_select_action, sac_update
from .dqn import DqnAgent, make_dqn_agent, dqn_select_action, dqn_update
from .ddpg import DdpgAgent, make_ddpg_agent, ddpg_select_action, ddpg_update
from .snapshot import save_agent, load_agent, mlp_to_dict, mlp_from_dict

__all__ = [
    "Mlp",
    "MlpCache",
    "mlp_init",
    "mlp_forward",
    "mlp_forward_cached",
    "mlp_gradient",
    "polyak_update",
    "AdamState",
    "adam_init",
    "adam_step",
    "apply_gradients",
    "ReplayBuffer",
    "TransitionBatch",
    "SacAgent",
    "SacLosses",
    "make_sac_agent",
    "sac_select_action",
    "sac_update",
    "DqnAgent",
    "make_dqn_agent",
    "dqn_select_action",
    "dqn_update",
    "DdpgAgent",
    "make_ddpg_agent",
    "ddpg_select_action",
    "ddpg_update",
    "save_agent",
    "load_agent",
    "mlp_to_dict",
    "mlp_from_dict",
]
