"""Action selection policies"""

from natsearch.policy.actions import ActionCatalog, ActionSet, enumerate_action_set, travel_cost
from natsearch.policy.baselines import (
    PointSweep,
    bints_beliefs,
    bints_select,
    ig_select,
    information_gain,
    point_next,
    rnd_select,
)
from natsearch.policy.base import POLICIES, DecisionContext, Policy, make_policy
from natsearch.policy.nats import candidate_rewards, nats_reward, nats_select

__all__ = [
    "ActionCatalog",
    "ActionSet",
    "DecisionContext",
    "POLICIES",
    "PointSweep",
    "Policy",
    "bints_beliefs",
    "bints_select",
    "candidate_rewards",
    "enumerate_action_set",
    "ig_select",
    "information_gain",
    "make_policy",
    "nats_reward",
    "nats_select",
    "point_next",
    "rnd_select",
    "travel_cost",
]
