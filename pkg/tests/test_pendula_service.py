"""
Tests for PendulaService - the three coupled pendula benchmark

Test Plan:
1. Dynamics structure: free block, spring coupling, damping, characteristic time
2. Input maps: column counts, gains, option set
3. Mirror symmetry between the left and right pendulum
4. Mechanical energy never increases along free motion
5. Parameter validation and subset parsing
"""

import numpy as np
import pytest
from pydantic import ValidationError

from resindex.core.pendula.pendula_models import PendulaParams, parse_subset
from resindex.services.minenergy.minenergy_service import MinEnergyService
from resindex.services.pendula.pendula_service import PendulaService
from resindex.services.system.system_service import SystemService


class TestDynamics:
    """State matrix of the linearized chain"""

    def test_block_structure(self, pendula_service):
        a = pendula_service.dynamics()
        assert a.shape == (6, 6)
        assert np.array_equal(a[:3, :3], np.zeros((3, 3)))
        assert np.array_equal(a[:3, 3:], np.eye(3))
        assert np.allclose(np.diag(a[3:, 3:]), [-0.1, -0.1, -0.3])

    def test_spring_chain(self, pendula_service):
        stiffness = pendula_service.dynamics()[3:, :3]
        expected = np.array([[-20.0, 10.0, 0.0], [10.0, -30.0, 10.0], [0.0, 10.0, -20.0]])
        assert np.allclose(stiffness, expected)

    def test_no_spring_decouples(self):
        a = PendulaService(PendulaParams(spring=0.0)).dynamics()
        stiffness = a[3:, :3]
        assert np.array_equal(stiffness, np.diag(np.diag(stiffness)))

    def test_characteristic_time(self, pendula_service):
        t_sys = SystemService().characteristic_time(pendula_service.dynamics())
        assert t_sys == pytest.approx(15.0, rel=0.05)

    def test_energy_never_increases(self, pendula_service, rng):
        trajectory = MinEnergyService().free_response(
            rng.standard_normal(6), pendula_service.dynamics(), 0.0, 30.0, samples=3001
        )
        energy = np.array([pendula_service.mechanical_energy(x) for x in trajectory.states])
        assert np.all(np.diff(energy) <= 1e-12 * energy[0])
        assert energy[-1] < energy[0]


class TestInputs:
    """Attacker forces and defender torques"""

    @pytest.mark.parametrize("name, columns", [("left", 1), ("middle", 1), ("right", 1), ("all", 3)])
    def test_column_counts(self, pendula_service, name, columns):
        system = pendula_service.build_from_names(name, name)
        assert system.m_attack == columns
        assert system.m_defend == columns

    def test_gains(self):
        service = PendulaService(PendulaParams(mass=2.0, length=0.5))
        system = service.build_from_names("left", "left")
        assert system.b_attack[3, 0] == pytest.approx(1.0)
        assert system.b_defend[3, 0] == pytest.approx(2.0)
        assert np.count_nonzero(system.b_attack) == 1

    def test_standard_option_set(self, pendula_service):
        attackers, defenders = pendula_service.standard_option_set()
        assert list(attackers) == ["left", "middle", "right", "all"]
        assert list(defenders) == ["left", "middle", "right", "all"]
        assert attackers["all"].shape == (6, 3)

    def test_labels(self, pendula_all):
        assert pendula_all.state_labels()[0] == "theta_left"
        assert pendula_all.state_labels()[-1] == "omega_right"


class TestMirror:
    """Swapping pendula 1 and 3"""

    def test_symmetric_damping_commutes(self, symmetric_params):
        service = PendulaService(symmetric_params)
        perm = service.mirror_permutation()
        a = service.dynamics()
        assert np.array_equal(perm @ a @ perm.T, a)
        assert np.array_equal(perm @ service.defense_matrix(["left"]), service.defense_matrix(["right"]))

    def test_default_damping_breaks_symmetry(self, pendula_service):
        perm = pendula_service.mirror_permutation()
        a = pendula_service.dynamics()
        assert not np.array_equal(perm @ a @ perm.T, a)


class TestParameters:
    """Validation and subset parsing"""

    @pytest.mark.parametrize("values", [
        {"mass": 0.0},
        {"length": -1.0},
        {"spring": -1.0},
        {"damping": (0.1, 0.0, 0.1)},
    ])
    def test_invalid_params(self, values):
        with pytest.raises(ValidationError):
            PendulaParams(**values)

    @pytest.mark.parametrize("text, expected", [
        ("all", ["left", "middle", "right"]),
        ("right+left", ["left", "right"]),
        ("Middle", ["middle"]),
        ("left,all", ["left", "middle", "right"]),
    ])
    def test_parse_subset(self, text, expected):
        assert parse_subset(text) == expected

    @pytest.mark.parametrize("text", ["", "+", "top"])
    def test_parse_subset_rejects(self, text):
        with pytest.raises(ValueError):
            parse_subset(text)
