import pytest
from hypothesis import given, strategies as st

from mminf_switching.model import (MN, FullService, ModelParams, State, Table, ValidationError,
                                   action_arrays, parse_policy, policy_action, validate_params)


def test_example_params_valid(example):
    assert validate_params(example) is example
    assert example.rho == 2.0


@pytest.mark.parametrize("kwargs, field", [
    (dict(lam=1, mu=1, h=1, c=1, s0=0, s1=0), "s0+s1"),
    (dict(lam=0, mu=1, h=1, c=1, s0=1, s1=1), "lambda"),
    (dict(lam=1, mu=-1, h=1, c=1, s0=1, s1=1), "mu"),
    (dict(lam=1, mu=1, h=0, c=1, s0=1, s1=1), "h"),
    (dict(lam=1, mu=1, h=1, c=-1, s0=1, s1=1), "c"),
    (dict(lam=1, mu=1, h=1, c=1, s0=-1, s1=3), "s0"),
])
def test_invalid_params_name_field(kwargs, field):
    with pytest.raises(ValidationError) as err:
        validate_params(ModelParams(**kwargs))
    assert field in (err.value.field or "") or field in str(err.value)


def test_dict_round_trip(example):
    assert ModelParams.from_dict(example.to_dict()) == example
    assert ModelParams.from_dict({"lambda": 2, "mu": 1, "h": 1, "c": 100, "s0": 100,
                                  "s1": 100}) == example


def test_missing_key():
    with pytest.raises(ValidationError) as err:
        ModelParams.from_dict({"mu": 1, "h": 1, "c": 1, "s0": 1, "s1": 1})
    assert "lambda" in str(err.value)


def test_state_validation():
    with pytest.raises(ValidationError):
        State(-1, 0)
    with pytest.raises(ValidationError):
        State(0, 2)


@pytest.mark.parametrize("i, d, a", [(4, 1, 0), (5, 1, 1), (38, 0, 0), (39, 0, 1)])
def test_mn_actions(i, d, a):
    assert policy_action(MN(4, 39), State(i, d)) == a


def test_full_service_never_switches_off():
    pol = FullService(3)
    assert all(policy_action(pol, State(i, 1)) == 1 for i in range(50))
    assert [pol.action(i, 0) for i in range(5)] == [0, 0, 0, 1, 1]


@given(st.integers(0, 30), st.integers(1, 30))
def test_mn_rule_exhaustive(M, gap):
    N = M + gap
    pol = MN(M, N)
    for i in range(N + 11):
        assert (policy_action(pol, State(i, 1)) == 1) != (i <= M)
        assert (policy_action(pol, State(i, 0)) == 1) != (i < N)


def test_mn_requires_m_below_n():
    with pytest.raises(ValidationError):
        MN(5, 5)


def test_table_tail_runs():
    pol = Table((0, 1), (0, 0))
    assert pol.cutoff == 2
    assert pol.action(7, 0) == 1
    on, off = action_arrays(pol, 3)
    assert on == [0, 1, 1] and off == [0, 0, 1]


@pytest.mark.parametrize("text, pol", [
    ("4,39", MN(4, 39)), ("mn:0,47", MN(0, 47)), ("(1, 2)", MN(1, 2)),
    ("full", FullService(0)), ("full:3", FullService(3)),
])
def test_parse_policy(text, pol):
    assert parse_policy(text) == pol


def test_parse_policy_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_policy("abc")
