import numpy as np
import pytest

from oracles import qp_dual_optimum
from vowelkit.errors import InvalidInput
from vowelkit.kernels import Linear, Polynomial, Rbf, Sigmoid, gram_matrix
from vowelkit.svm import (
    BinaryModel,
    BinaryProblem,
    SvmParams,
    compute_slacks,
    decision_value,
    decision_values,
    dual_objective,
    predict_binary,
    smo_train,
)


@pytest.fixture
def two_point_problem():
    return BinaryProblem(np.array([[0.0, 0.0], [2.0, 2.0]]), np.array([-1.0, 1.0]))


@pytest.fixture
def two_point_model(two_point_problem):
    return smo_train(two_point_problem, SvmParams(C=100.0, kernel=Linear()))


class TestAnalyticTwoPoint:
    def test_alphas(self, two_point_model):
        assert np.allclose(np.sort(two_point_model.sv_alphas), [0.25, 0.25], atol=1e-6)

    def test_bias(self, two_point_model):
        assert two_point_model.bias == pytest.approx(-1.0, abs=1e-6)

    def test_dual_objective(self, two_point_model, two_point_problem):
        assert dual_objective(two_point_model, two_point_problem) == pytest.approx(0.25, abs=1e-6)

    def test_implicit_weight_vector(self, two_point_model):
        w = (two_point_model.sv_alphas * two_point_model.sv_labels) @ two_point_model.support_vectors
        assert np.allclose(w, [0.5, 0.5], atol=1e-6)

    def test_decision_values_on_line(self, two_point_model):
        assert decision_value(two_point_model, np.array([1.0, 1.0])) == pytest.approx(0.0, abs=1e-6)
        assert decision_value(two_point_model, np.array([2.0, 2.0])) == pytest.approx(1.0, abs=1e-6)
        assert decision_value(two_point_model, np.array([0.0, 0.0])) == pytest.approx(-1.0, abs=1e-6)


class TestPredictBinary:
    def test_sign_convention(self, two_point_model):
        assert predict_binary(two_point_model, np.array([3.0, 3.0])) == 1
        assert predict_binary(two_point_model, np.array([-1.0, -1.0])) == -1
        # f(x) = 0 on the midpoint: declared tie rule is +1
        assert predict_binary(two_point_model, np.array([1.0, 1.0])) == 1

    def test_dimension_mismatch(self, two_point_model):
        with pytest.raises(InvalidInput):
            decision_value(two_point_model, np.zeros(3))


class TestSlacks:
    def test_formula_cases(self):
        model = BinaryModel(
            support_vectors=np.array([[1.0]]),
            sv_alphas=np.array([1.0]),
            sv_labels=np.array([1.0]),
            bias=0.0,
            kernel=Linear(),
            C=1.0,
        )
        problem = BinaryProblem(
            np.array([[2.0], [1.0], [0.5]]), np.array([1.0, 1.0, -1.0])
        )
        # f(x) = x here; y*f = 2, 1, -0.5
        slacks = compute_slacks(model, problem)
        assert np.allclose(slacks, [0.0, 0.0, 1.5])

    def test_nonnegative_on_random_problems(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 2))
        y = np.sign(x[:, 0] + 0.1)
        y[y == 0] = 1.0
        problem = BinaryProblem(x, y)
        model = smo_train(problem, SvmParams(C=1.0, kernel=Rbf(0.5)))
        assert np.all(compute_slacks(model, problem) >= 0.0)


class TestInvariants:
    def test_box_and_equality_constraints(self):
        rng = np.random.default_rng(1)
        for trial in range(10):
            x = rng.normal(size=(12, 3))
            y = np.where(rng.random(12) < 0.5, -1.0, 1.0)
            y[0], y[1] = -1.0, 1.0
            c = float(rng.choice([0.1, 1.0, 10.0]))
            model = smo_train(BinaryProblem(x, y), SvmParams(C=c, kernel=Rbf(0.5)))
            assert np.all(model.sv_alphas > 0.0)
            assert np.all(model.sv_alphas <= c + 1e-12)
            balance = float(model.sv_alphas @ model.sv_labels)
            assert abs(balance) <= 1e-6 * max(model.sv_alphas.sum(), 1.0)

    def test_kkt_conditions_on_training_set(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(30, 2))
        y = np.where(x[:, 0] + x[:, 1] > 0, 1.0, -1.0)
        problem = BinaryProblem(x, y)
        c = 10.0
        params = SvmParams(C=c, kernel=Rbf(1.0), kkt_tol=1e-3)
        model = smo_train(problem, params)
        f = decision_values(model, x)
        margins = y * f
        alpha = np.zeros(30)
        for vec, a in zip(model.support_vectors, model.sv_alphas):
            idx = np.where((x == vec).all(axis=1))[0][0]
            alpha[idx] = a
        tol = 2e-3  # kkt_tol plus numerical slop
        assert np.all(margins[alpha == 0.0] >= 1.0 - tol)
        inside = (alpha > 0.0) & (alpha < c)
        assert np.all(np.abs(margins[inside] - 1.0) <= tol)
        assert np.all(margins[alpha >= c] <= 1.0 + tol)

    def test_hard_margin_limit_on_separable_data(self):
        rng = np.random.default_rng(3)
        x = np.vstack([rng.normal(-3, 0.3, size=(15, 2)), rng.normal(3, 0.3, size=(15, 2))])
        y = np.concatenate([-np.ones(15), np.ones(15)])
        model = smo_train(BinaryProblem(x, y), SvmParams(C=1e6, kernel=Linear()))
        margins = y * decision_values(model, x)
        assert np.all(margins >= 1.0 - 1e-3)

    def test_one_class_rejected(self):
        with pytest.raises(InvalidInput):
            BinaryProblem(np.zeros((3, 2)), np.ones(3))

    def test_sigmoid_training_terminates(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(-2, 2, size=(40, 3))
        y = np.where(rng.random(40) < 0.5, -1.0, 1.0)
        y[0], y[1] = -1.0, 1.0
        params = SvmParams(C=10.0, kernel=Sigmoid(2.0, 0.0), max_iter=2000)
        model = smo_train(BinaryProblem(x, y), params)
        assert model.n_iter <= 2000
        # usable regardless of convergence
        decision_values(model, x)


class TestDualObjectiveOracle:
    def test_empty_model_objective(self):
        model = BinaryModel(
            support_vectors=np.zeros((0, 2)),
            sv_alphas=np.zeros(0),
            sv_labels=np.zeros(0),
            bias=0.0,
            kernel=Linear(),
        )
        problem = BinaryProblem(np.zeros((2, 2)), np.array([-1.0, 1.0]))
        assert dual_objective(model, problem) == 0.0

    def test_matches_projected_gradient_oracle(self):
        rng = np.random.default_rng(5)
        kernels = [Rbf(0.5), Rbf(2.0), Polynomial(1.0, 1.0, 2), Polynomial(0.5, 0.0, 3)]
        for trial in range(25):
            n = int(rng.integers(3, 7))
            x = rng.normal(size=(n, 2))
            y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
            y[0], y[1] = -1.0, 1.0
            c = float(rng.choice([0.1, 1.0, 10.0]))
            kernel = kernels[trial % len(kernels)]
            problem = BinaryProblem(x, y)
            model = smo_train(problem, SvmParams(C=c, kernel=kernel, kkt_tol=1e-5))
            smo_obj = dual_objective(model, problem)
            oracle_obj, _ = qp_dual_optimum(gram_matrix(kernel, x), y, c)
            assert smo_obj == pytest.approx(oracle_obj, abs=1e-4)


class TestSeparableSanity:
    def test_two_blob_generalization(self):
        rng = np.random.default_rng(6)
        train_x = np.vstack(
            [rng.normal(0.0, 1.0, size=(50, 2)), rng.normal(10.0, 1.0, size=(50, 2))]
        )
        train_y = np.concatenate([-np.ones(50), np.ones(50)])
        model = smo_train(BinaryProblem(train_x, train_y), SvmParams(C=10.0, kernel=Rbf(0.1)))
        train_pred = np.where(decision_values(model, train_x) >= 0, 1.0, -1.0)
        assert np.all(train_pred == train_y)
        test_x = np.vstack(
            [rng.normal(0.0, 1.0, size=(100, 2)), rng.normal(10.0, 1.0, size=(100, 2))]
        )
        test_y = np.concatenate([-np.ones(100), np.ones(100)])
        test_pred = np.where(decision_values(model, test_x) >= 0, 1.0, -1.0)
        assert np.mean(test_pred == test_y) >= 0.99
