import numpy as np
import pytest

from fracfam.fracalc import (
    GridFunction,
    TimeGrid,
    caputo_derivative,
    numeric_laplace,
    rl_derivative,
    rl_integral,
    singular_convolution,
)
from fracfam.specfun import MLParams, gamma_fn, mittag_leffler_neg

from oracles import rl_integral_diethelm


@pytest.fixture
def grid():
    return TimeGrid(2.0, 512)


class TestTimeGrid:
    def test_nodes(self, grid):
        assert grid.h == pytest.approx(2.0 / 512)
        assert grid.nodes[0] == 0.0
        assert grid.nodes[-1] == 2.0
        assert len(grid.nodes) == 513

    def test_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 10)
        with pytest.raises(ValueError):
            TimeGrid(1.0, 0)

    def test_index_of(self, grid):
        assert grid.index_of(1.0) == 256
        with pytest.raises(ValueError):
            grid.index_of(1.0001)

    def test_gridfunction_shape_check(self, grid):
        with pytest.raises(ValueError):
            GridFunction(grid, np.zeros(5))


class TestRLIntegral:
    def test_constant_alpha1_exact(self, grid):
        u = GridFunction(grid, np.ones_like(grid.nodes))
        out = rl_integral(1.0, u).values
        assert np.abs(out - grid.nodes).max() <= 1e-13

    def test_monomial_formula(self, grid):
        t = grid.nodes
        out = rl_integral(1.5, GridFunction(grid, t ** 2)).values
        expected = 2.0 * t ** 3.5 / gamma_fn(4.5)
        assert np.abs(out - expected).max() <= 2e-5

    def test_semigroup_on_singular_kernel(self, grid):
        # J^0.5 g_0.5 = g_1 = 1; node-0 sample of g_0.5 replaced by 0, which
        # costs O(sqrt(h)) near the left end and in a shrinking boundary layer
        t = grid.nodes
        g_half = np.zeros_like(t)
        g_half[1:] = t[1:] ** (-0.5) / gamma_fn(0.5)
        out = rl_integral(0.5, GridFunction(grid, g_half)).values
        interior = t >= 0.5
        assert np.abs(out[interior] - 1.0).max() <= 5e-2
        assert np.abs(out[grid.n_steps // 8 :] - 1.0).max() <= 0.1

    def test_rejects_nonpositive_alpha(self, grid):
        with pytest.raises(ValueError):
            rl_integral(0.0, GridFunction(grid, grid.nodes))

    @pytest.mark.parametrize("pair", [(0.5, 0.5), (0.7, 1.1)])
    @pytest.mark.parametrize("profile", ["const", "linear", "sine"])
    def test_semigroup_property(self, grid, pair, profile):
        a, b = pair
        t = grid.nodes
        values = {"const": np.ones_like(t), "linear": t, "sine": np.sin(t)}[profile]
        u = GridFunction(grid, values)
        once = rl_integral(a + b, u).values
        twice = rl_integral(a, rl_integral(b, u)).values
        # gauge: single-application error of J^a on the exact intermediate
        # J^b u, whose t^(b+m) kink dominates the composed error; for sin the
        # leading monomial of the same kink class is used
        m = {"const": 0.0, "linear": 1.0, "sine": 1.0}[profile]
        inter = t ** (b + m) * (gamma_fn(m + 1.0) / gamma_fn(m + 1.0 + b))
        exact = t ** (a + b + m) * (gamma_fn(m + 1.0) / gamma_fn(m + 1.0 + a + b))
        gauge = np.abs(rl_integral(a, GridFunction(grid, inter)).values - exact).max()
        assert np.abs(once - twice).max() <= 5.0 * max(gauge, 1e-9)

    def test_mesh_halving_order_two(self):
        errs = []
        for n in (256, 512):
            g = TimeGrid(2.0, n)
            t = g.nodes
            out = rl_integral(1.5, GridFunction(g, t ** 3)).values
            expected = 6.0 * t ** 4.5 / gamma_fn(5.5)
            errs.append(np.abs(out - expected).max())
        assert 3.5 <= errs[0] / errs[1] <= 4.5

    def test_matches_diethelm_weights(self, grid):
        # independent assembly of the same product-trapezoidal rule
        rng = np.random.default_rng(7)
        values = rng.standard_normal(grid.n_steps + 1)
        ours = rl_integral(0.7, GridFunction(grid, values)).values
        theirs = rl_integral_diethelm(0.7, values, grid.h)
        assert np.abs(ours - theirs).max() <= 1e-11

    def test_field_valued(self, grid):
        t = grid.nodes
        field = np.column_stack([t, t ** 2])
        out = rl_integral(1.0, GridFunction(grid, field)).values
        assert np.abs(out[:, 0] - t ** 2 / 2.0).max() <= 1e-5
        assert out.shape == field.shape


class TestRLDerivative:
    def test_monomial(self):
        g = TimeGrid(2.0, 1024)
        t = g.nodes
        out = rl_derivative(1.5, GridFunction(g, t ** 2)).values
        expected = 2.0 * t ** 0.5 / gamma_fn(1.5)
        inner = slice(16, -16)
        assert np.abs(out[inner] - expected[inner]).max() <= 5e-4

    def test_alpha2_is_second_derivative(self, grid):
        t = grid.nodes
        out = rl_derivative(2.0, GridFunction(grid, t ** 3)).values
        assert np.abs(out[1:-1] - 6.0 * t[1:-1]).max() <= 1e-9

    def test_annihilates_g_alpha(self):
        # D^a g_a = (g_2)'' = 0; double differencing is only meaningful away
        # from the t^(a-1) kink at the origin
        g = TimeGrid(2.0, 512)
        t = g.nodes
        galpha = np.zeros_like(t)
        galpha[1:] = t[1:] ** 0.5 / gamma_fn(1.5)
        out = rl_derivative(1.5, GridFunction(g, galpha)).values
        window = t >= 0.5
        window[-2:] = False
        assert np.abs(out[window]).max() <= 5e-4

    def test_end_nodes_flagged(self, grid):
        out = rl_derivative(1.5, GridFunction(grid, grid.nodes ** 2))
        assert out.flags is not None
        assert out.flags[0] and out.flags[-1]
        assert not out.flags[1:-1].any()

    def test_alpha_range(self, grid):
        u = GridFunction(grid, grid.nodes)
        with pytest.raises(ValueError):
            rl_derivative(1.0, u)
        with pytest.raises(ValueError):
            rl_derivative(2.2, u)

    def test_needs_four_steps(self):
        g = TimeGrid(1.0, 3)
        with pytest.raises(ValueError):
            rl_derivative(1.5, GridFunction(g, g.nodes))


class TestCaputo:
    def test_affine_annihilation(self, grid):
        t = grid.nodes
        out = caputo_derivative(1.5, GridFunction(grid, 3.0 + 2.0 * t), 3.0, 2.0).values
        assert np.abs(out[1:-1]).max() <= 1e-10

    def test_monomial(self):
        g = TimeGrid(2.0, 1024)
        t = g.nodes
        out = caputo_derivative(1.5, GridFunction(g, t ** 2), 0.0, 0.0).values
        expected = 2.0 * t ** 0.5 / gamma_fn(1.5)
        inner = slice(16, -16)
        assert np.abs(out[inner] - expected[inner]).max() <= 5e-4

    def test_alpha2_cosine(self):
        g = TimeGrid(2.0, 1024)
        t = g.nodes
        out = caputo_derivative(2.0, GridFunction(g, np.cos(t)), 1.0, 0.0).values
        assert np.abs(out[1:-1] + np.cos(t)[1:-1]).max() <= 1e-5

    def test_bit_for_bit_rl_relation(self, grid):
        t = grid.nodes
        u = GridFunction(grid, np.sin(t) + 2.0)
        cap = caputo_derivative(1.5, u, 2.0, 1.0)
        corrected = GridFunction(grid, u.values - 2.0 - 1.0 * t)
        direct = rl_derivative(1.5, corrected)
        assert np.array_equal(cap.values, direct.values)

    def test_u0_mismatch_rejected(self, grid):
        with pytest.raises(ValueError):
            caputo_derivative(1.5, GridFunction(grid, grid.nodes + 1.0), 0.0, 1.0)

    def test_left_inverse_of_integral(self):
        # caputo(alpha, J^alpha u, 0, 0) recovers u with observed order >= 1
        errs = []
        for n in (256, 512):
            g = TimeGrid(1.0, n)
            t = g.nodes
            u = np.sin(t)
            j = rl_integral(1.5, GridFunction(g, u))
            rec = caputo_derivative(1.5, j, 0.0, 0.0).values
            inner = slice(max(2, n // 16), -max(2, n // 16))
            errs.append(np.abs(rec[inner] - u[inner]).max())
        order = np.log2(errs[0] / errs[1])
        assert order >= 1.0


class TestNumericLaplace:
    def test_constant(self):
        g = TimeGrid(40.0, 1 << 21)
        u = GridFunction(g, np.ones(g.n_steps + 1))
        est = numeric_laplace(u, 1.0, 1.0, 0.0)
        assert est.value == pytest.approx(1.0, abs=1e-10 + est.truncation_bound)

    def test_decaying_exponential(self):
        g = TimeGrid(40.0, 1 << 20)
        u = GridFunction(g, np.exp(-g.nodes))
        est = numeric_laplace(u, 1.0, 1.0, 0.0)
        assert est.value == pytest.approx(0.5, abs=1e-9 + est.truncation_bound)

    def test_mittag_leffler_transform(self):
        # hat of E_a(-t^a) is s^(a-1)/(s^a + 1): the cosine-family Laplace law
        g = TimeGrid(40.0, 1 << 15)
        u = GridFunction(g, mittag_leffler_neg(1.5, 1.0, g.nodes ** 1.5))
        est = numeric_laplace(u, 2.0, 1.0, 0.0)
        want = 2.0 ** 0.5 / (2.0 ** 1.5 + 1.0)
        assert est.value == pytest.approx(want, abs=1e-4 + est.truncation_bound)

    def test_domination_required(self):
        g = TimeGrid(1.0, 8)
        u = GridFunction(g, np.ones(9))
        with pytest.raises(ValueError):
            numeric_laplace(u, 0.5, 1.0, 0.5)
        with pytest.raises(ValueError):
            numeric_laplace(u, 1.0, 1.0, -0.1)


class TestSingularConvolution:
    def test_reduces_to_rl_integral(self, grid):
        t = grid.nodes
        k = np.sin(t)
        ones = np.ones_like(t)
        conv = singular_convolution(0.8, ones, k, grid) / gamma_fn(0.8)
        direct = rl_integral(0.8, GridFunction(grid, k)).values
        assert np.abs(conv - direct).max() <= 1e-14

    def test_polynomial_exactness(self, grid):
        # integrand tau^(a-1) * (linear in tau): the rule is exact
        t = grid.nodes
        a = 1.5
        smooth = 2.0 + 3.0 * t  # w(tau) linear, k constant: psi linear in tau
        k = np.ones_like(t)
        conv = singular_convolution(a, smooth, k, grid)
        exact = 2.0 * t ** a / a + 3.0 * t ** (a + 1.0) / (a + 1.0)
        assert np.abs(conv - exact).max() <= 1e-12

    def test_shape_mismatch(self, grid):
        with pytest.raises(ValueError):
            singular_convolution(
                1.5, np.ones((grid.n_steps + 1, 2)), np.ones((grid.n_steps + 1, 3)), grid
            )
