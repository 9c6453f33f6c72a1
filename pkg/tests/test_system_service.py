"""
Tests for SystemService - system documents, controllability and stability

Test Plan:
1. Document loading: valid mappings, packaged YAML examples, malformed input
2. JSON save/load round trip is bit-exact
3. Kalman rank on textbook pairs and under similarity transforms
4. Stability verdicts and characteristic time
5. Builtin pendula selectors
"""

import numpy as np
import pytest

from resindex.core.config import ConfigLoader
from resindex.core.exceptions import ConfigError, DocumentError, NumericalError, UncontrollableError
from resindex.services.minenergy.minenergy_service import MinEnergyService
from resindex.services.system.system_service import SystemService


@pytest.fixture
def service():
    return SystemService()


class TestDocuments:
    """Loading and saving system documents"""

    def test_load_mapping(self, service):
        system = service.load_system({"A": [[-1.0]], "Ba": [[1.0]], "Bd": [[2.0]]})
        assert system.n == 1
        assert system.m_attack == 1 and system.m_defend == 1
        assert system.b_defend[0, 0] == 2.0

    def test_load_packaged_example(self, service):
        path = ConfigLoader().get_config_path("systems", "examples/decoupled")
        system = service.load_system(path)
        assert system.n == 2
        assert system.state_labels() == ["slow", "fast"]
        assert system.a[0, 0] > system.a[1, 1]

    def test_default_labels(self, service):
        system = service.load_system({"A": [[0.0, 1.0], [0.0, 0.0]], "Ba": [[0.0], [1.0]], "Bd": [[0.0], [1.0]]})
        assert system.state_labels() == ["x1", "x2"]

    @pytest.mark.parametrize("document", [
        {"A": [[1.0, 0.0]], "Ba": [[1.0]], "Bd": [[1.0]]},
        {"A": [[-1.0, 0.0], [0.0, -1.0]], "Ba": [[1.0]], "Bd": [[1.0], [1.0]]},
        {"A": [[-1.0, 0.0], [0.0]], "Ba": [[1.0], [1.0]], "Bd": [[1.0], [1.0]]},
        {"A": [[float("inf")]], "Ba": [[1.0]], "Bd": [[1.0]]},
        {"A": [[-1.0]], "Ba": [[1.0]]},
        {"A": [[-1.0]], "Ba": [[1.0]], "Bd": [[1.0]], "labels": ["a", "b"]},
    ], ids=["non-square", "row-mismatch", "ragged", "non-finite", "missing-key", "label-count"])
    def test_invalid_documents(self, service, document):
        with pytest.raises(DocumentError):
            service.load_system(document)

    def test_missing_file(self, service, tmp_path):
        with pytest.raises(DocumentError):
            service.load_system(tmp_path / "absent.yaml")

    def test_save_load_bit_exact(self, service, tmp_path, pendula_all):
        path = service.save_system(pendula_all, tmp_path / "pendula.json")
        loaded = service.load_system(path)
        assert np.array_equal(loaded.a, pendula_all.a)
        assert np.array_equal(loaded.b_attack, pendula_all.b_attack)
        assert np.array_equal(loaded.b_defend, pendula_all.b_defend)
        assert loaded.labels == pendula_all.labels

    def test_arrays_are_read_only(self, scalar_system):
        with pytest.raises(ValueError):
            scalar_system.a[0, 0] = 5.0


class TestControllability:
    """Kalman rank with the relative SVD cutoff"""

    def test_double_integrator(self, service):
        report = service.controllability([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]])
        assert report.numerical_rank == 2
        assert report.is_controllable

    def test_decoupled_single_input(self, service):
        report = service.controllability([[-1.0, 0.0], [0.0, -2.0]], [[1.0], [0.0]])
        assert report.numerical_rank == 1
        assert report.unreachable_dim == 1

    def test_zero_input(self, service):
        report = service.controllability([[-1.0]], [[0.0]])
        assert report.numerical_rank == 0

    def test_similarity_invariance(self, service, rng):
        n = 4
        q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
        q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
        t = q1 @ np.diag(np.linspace(1.0, 10.0, n)) @ q2
        t_inv = np.linalg.inv(t)

        a = rng.standard_normal((n, n))
        b_full = rng.standard_normal((n, 1))
        # Block-diagonal pair with one unreachable mode
        a_split = np.diag([-1.0, -2.0, -3.0, -4.0])
        b_split = np.array([[1.0], [1.0], [1.0], [0.0]])

        for a_, b_ in ((a, b_full), (a_split, b_split)):
            rank = service.controllability(a_, b_).numerical_rank
            assert service.controllability(t @ a_ @ t_inv, t @ b_).numerical_rank == rank

    def test_pendula_middle_attacker_matches_svd(self, service, pendula_service):
        system = pendula_service.build_from_names("middle", "middle")
        kalman = service.kalman_matrix(system.a, system.b_attack)
        sigma = np.linalg.svd(kalman, compute_uv=False)
        expected = int(np.sum(sigma > 1e-10 * sigma[0]))
        assert service.controllability(system.a, system.b_attack, tolerance=1e-10).numerical_rank == expected

    def test_require_controllable(self, service, decoupled_system):
        with pytest.raises(UncontrollableError) as excinfo:
            service.require_controllable(decoupled_system.a, decoupled_system.b_defend)
        assert excinfo.value.unreachable_dim == 1
        assert "dimension 1" in str(excinfo.value)

    def test_nonpositive_tolerance(self, service):
        with pytest.raises(ConfigError):
            service.controllability([[-1.0]], [[1.0]], tolerance=0.0)


class TestStability:
    """Spectral abscissa and characteristic time"""

    def test_stable_scalar(self, service):
        report = service.is_stable([[-2.0]])
        assert report.is_stable
        assert report.abscissa == pytest.approx(-2.0)
        assert report.characteristic_time == pytest.approx(0.5)

    def test_marginal_oscillator(self, service):
        report = service.is_stable([[0.0, 1.0], [-1.0, 0.0]])
        assert not report.is_stable
        assert report.abscissa == pytest.approx(0.0, abs=1e-12)
        assert np.isinf(report.characteristic_time)

    def test_non_finite(self, service):
        with pytest.raises(NumericalError):
            service.is_stable([[float("nan")]])

    def test_pendula_characteristic_time(self, service, pendula_all):
        assert service.characteristic_time(pendula_all.a) == pytest.approx(15.0, rel=0.05)


class TestSelectors:
    """Builtin pendula selectors"""

    def test_default_selector(self, service):
        system = service.resolve_selector("pendula")
        assert system.n == 6
        assert system.m_attack == 3 and system.m_defend == 3

    def test_single_pendula(self, service):
        system = service.resolve_selector("pendula:left/middle")
        assert system.b_attack.shape == (6, 1)
        assert np.flatnonzero(system.b_attack[:, 0]).tolist() == [3]
        assert np.flatnonzero(system.b_defend[:, 0]).tolist() == [4]

    @pytest.mark.parametrize("selector", ["pendula:left", "pendula:bogus/all", "pendula:a/b/c"])
    def test_bad_selectors(self, service, selector):
        with pytest.raises(ConfigError):
            service.resolve_selector(selector)


class TestStabilityAgreesWithSimulation:
    """Free response of a stable system decays over ten characteristic times"""

    def test_pendula_free_response_decays(self, service, pendula_all, rng):
        t_sys = service.characteristic_time(pendula_all.a)
        x0 = rng.standard_normal(pendula_all.n)
        trajectory = MinEnergyService().free_response(x0, pendula_all.a, 0.0, 10 * t_sys, samples=500)
        assert service.is_stable(pendula_all.a).is_stable
        assert np.linalg.norm(trajectory.final_state) < 0.01 * np.linalg.norm(x0)
