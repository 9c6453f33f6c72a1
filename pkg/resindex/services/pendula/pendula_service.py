"""
Pendula Service - Three coupled pendula benchmark

Linearized around the hanging equilibrium:
    m l th_i'' = -m g th_i - sum_{j in N_i} k l (th_i - th_j) - d_i th_i' + tau_i / l + F_i
with defender torques tau_i and attacker forces F_i. State ordering is
x = [th_1, th_2, th_3, th_1', th_2', th_3'].
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ...core.pendula.pendula_models import OPTION_NAMES, PENDULA, PendulaParams, parse_subset
from ...core.system.system_models import LtiSystem

# Springs between adjacent pendula only (chain 1-2-3)
CHAIN_EDGES = ((0, 1), (1, 2))


class PendulaService:
    """Service that builds the coupled-pendula system and its input options"""

    def __init__(self, params: Optional[PendulaParams] = None):
        self.logger = logger
        self.params = params or PendulaParams()

    def laplacian(self) -> np.ndarray:
        """Graph Laplacian of the spring chain"""
        lap = np.zeros((3, 3))
        for i, j in CHAIN_EDGES:
            lap[i, i] += 1
            lap[j, j] += 1
            lap[i, j] -= 1
            lap[j, i] -= 1
        return lap

    def dynamics(self, params: Optional[PendulaParams] = None) -> np.ndarray:
        """A = [[0, I], [-(g/l) I - (k/m) L, -diag(d)/(m l)]]"""
        p = params or self.params
        stiffness = -(p.gravity / p.length) * np.eye(3) - (p.spring / p.mass) * self.laplacian()
        damping = -np.diag(p.damping) / (p.mass * p.length)
        return np.block([[np.zeros((3, 3)), np.eye(3)], [stiffness, damping]])

    def input_matrix(self, pendula: Sequence[str], gain: float) -> np.ndarray:
        """One column per selected pendulum acting on its velocity row"""
        columns = []
        for name in pendula:
            column = np.zeros(6)
            column[3 + PENDULA.index(name)] = gain
            columns.append(column)
        return np.column_stack(columns)

    def attack_matrix(self, pendula: Sequence[str], params: Optional[PendulaParams] = None) -> np.ndarray:
        """Forces F_i enter as F_i / (m l)"""
        p = params or self.params
        return self.input_matrix(pendula, 1.0 / (p.mass * p.length))

    def defense_matrix(self, pendula: Sequence[str], params: Optional[PendulaParams] = None) -> np.ndarray:
        """Torques tau_i enter as tau_i / (m l^2)"""
        p = params or self.params
        return self.input_matrix(pendula, 1.0 / (p.mass * p.length ** 2))

    def build(self, params: Optional[PendulaParams] = None, attacker: Sequence[str] = PENDULA,
              defender: Sequence[str] = PENDULA) -> LtiSystem:
        """Coupled pendula with the selected attacker and defender access points"""
        if not attacker or not defender:
            raise ValueError("attacker and defender selections must be nonempty")
        p = params or self.params
        labels = [f"theta_{name}" for name in PENDULA] + [f"omega_{name}" for name in PENDULA]
        system = LtiSystem(
            a=self.dynamics(p),
            b_attack=self.attack_matrix(attacker, p),
            b_defend=self.defense_matrix(defender, p),
            labels=labels,
        )
        self.logger.debug(f"Pendula system: attacker={list(attacker)}, defender={list(defender)}")
        return system

    def build_from_names(self, attacker: str, defender: str, params: Optional[PendulaParams] = None) -> LtiSystem:
        """Selector form: 'all', 'left', 'left+right', ..."""
        return self.build(params, parse_subset(attacker), parse_subset(defender))

    def standard_option_set(self, params: Optional[PendulaParams] = None
                            ) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]:
        """Attacker and defender input matrices for left / middle / right / all"""
        p = params or self.params
        selections: List[Tuple[str, List[str]]] = [(name, parse_subset(name)) for name in OPTION_NAMES]
        attackers = {name: self.attack_matrix(subset, p) for name, subset in selections}
        defenders = {name: self.defense_matrix(subset, p) for name, subset in selections}
        return attackers, defenders

    def mirror_permutation(self) -> np.ndarray:
        """State permutation swapping the left and right pendulum"""
        order = [2, 1, 0, 5, 4, 3]
        return np.eye(6)[order]

    def mechanical_energy(self, x: np.ndarray, params: Optional[PendulaParams] = None) -> float:
        """Kinetic + gravitational + spring energy of a state (linearized)"""
        p = params or self.params
        theta, omega = np.asarray(x[:3]), np.asarray(x[3:])
        kinetic = 0.5 * p.mass * p.length ** 2 * float(omega @ omega)
        gravitational = 0.5 * p.mass * p.gravity * p.length * float(theta @ theta)
        spring = 0.5 * p.spring * p.length ** 2 * sum((theta[i] - theta[j]) ** 2 for i, j in CHAIN_EDGES)
        return kinetic + gravitational + spring


