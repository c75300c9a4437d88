import pytest
from hypothesis import given, settings, strategies as st

from qtoroidal.fock import FockModule, HeisenbergMode, add_into, combine
from qtoroidal.rootdata import build_root_datum
from qtoroidal.scalar import ONE, Q, Scalar, d_pow, qint
from qtoroidal.vertex import BudgetExpired, Cfield, CurrentSpec, Gamma, ModeEngine, VertexError, assemble_current


def test_current_shapes():
    rd = build_root_datum(2, 1)
    assert assemble_current("E", 1, rd).atoms == (Gamma(1, 1),)
    f_m = assemble_current("F", 2, rd, convention="literal")
    assert f_m.atoms == (Gamma(-1, 2), Cfield(-1, 2, d_pow(2), True))
    f_0 = assemble_current("F", 0, rd, convention="literal")
    assert f_0.prefactor == d_pow(1)
    assert f_0.atoms == (Gamma(-1, 0), Cfield(1, 2, d_pow(1)))


def test_corrected_convention_only_flips_f_signs():
    rd = build_root_datum(2, 3)
    for i in rd.nodes:
        for role in ("E", "K+", "K-"):
            assert assemble_current(role, i, rd) == assemble_current(role, i, rd, convention="literal")
        lit = assemble_current("F", i, rd, convention="literal")
        cor = assemble_current("F", i, rd)
        flip = i == 0 or i in rd.minus
        assert cor.atoms == lit.atoms
        assert cor.prefactor == (-lit.prefactor if flip else lit.prefactor)


def test_unknown_role_and_convention():
    rd = build_root_datum(2, 1)
    with pytest.raises(VertexError):
        assemble_current("X", 1, rd)
    with pytest.raises(VertexError):
        assemble_current("E", 1, rd, convention="other")


def test_e1_on_vacuum():
    rd = build_root_datum(2, 1)
    mod = FockModule(rd, "L0")
    eng = ModeEngine(mod)
    e1 = assemble_current("E", 1, rd)
    out = eng.apply_mode(e1, -1, mod.vacuum())
    assert out == mod.vacuum((1, 0))
    # the creation part only raises the z-power, so k > -1 vanishes on the vacuum
    for k in range(0, 4):
        assert eng.apply_mode(e1, k, mod.vacuum()) == {}


def test_k_zero_mode_on_highest_weight():
    rd = build_root_datum(2, 1)
    mod = FockModule(rd, "L1")
    out = ModeEngine(mod).apply_mode(assemble_current("K+", 1, rd), 0, mod.vacuum())
    assert out == {k: v * Q for k, v in mod.vacuum().items()}


@pytest.mark.parametrize("sign", [1, -1])
def test_derivative_follows_qint_rule(sign):
    # d/dz on the mode expansion: coefficient of z^-k goes to -[k] at z^-(k+1)
    rd = build_root_datum(2, 3)
    mod = FockModule(rd, "L1")
    eng = ModeEngine(mod)
    scale = d_pow(2)
    plain = CurrentSpec("C", 1, ONE, (Cfield(sign, 3, scale),))
    deriv = CurrentSpec("dC", 1, ONE, (Cfield(sign, 3, scale, True),))
    for basis in mod.test_basis(2, 1)[:40]:
        v = {basis: ONE}
        for k in range(-3, 4):
            lhs = eng.apply_mode(deriv, k + 1, v)
            rhs = {}
            add_into(rhs, eng.apply_mode(plain, k, v), -qint(k))
            assert lhs == rhs


coeffs = st.integers(-4, 4).filter(bool)


@settings(max_examples=25, deadline=None)
@given(coeffs, coeffs, st.integers(-2, 2), st.sampled_from(["E", "F"]), st.integers(0, 2))
def test_mode_extraction_is_linear(a, b, k, role, i):
    rd = build_root_datum(2, 1)
    mod = FockModule(rd, "L0")
    eng = ModeEngine(mod)
    cur = assemble_current(role, i, rd)
    v = mod.vacuum((1, 0))
    w = mod.basis_vector([HeisenbergMode("H", 0, -1)], (0, 1))
    sa, sb = Scalar.from_number(a) * Q, Scalar.from_number(b)
    lhs = eng.apply_mode(cur, k, combine((sa, v), (sb, w)))
    rhs = combine((sa, eng.apply_mode(cur, k, v)), (sb, eng.apply_mode(cur, k, w)))
    assert lhs == rhs


def test_modes_shift_energy_by_mode_index():
    rd = build_root_datum(1, 2)
    mod = FockModule(rd, "aLm:1")
    eng = ModeEngine(mod)
    for basis in mod.test_basis(1, 1):
        for role in ("E", "F"):
            for i in rd.nodes:
                for k in range(-2, 3):
                    for out in eng.apply_mode(assemble_current(role, i, rd), k, {basis: ONE}):
                        assert mod.energy(out) == mod.energy(basis) - k


def test_engine_deadline_interrupts_application():
    rd = build_root_datum(2, 1)
    mod = FockModule(rd, "L0")
    eng = ModeEngine(mod)
    eng.deadline = 0.0
    with pytest.raises(BudgetExpired):
        eng.apply_mode(assemble_current("E", 1, rd), -1, mod.vacuum())
    eng.deadline = None
    assert eng.apply_mode(assemble_current("E", 1, rd), -1, mod.vacuum()) == mod.vacuum((1, 0))
