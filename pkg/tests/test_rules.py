"""Rule catalog, soundness checking, matching and application."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import b2_chain, crossing_state, swap_state, wire
from oracle import oracle_embeddings, oracle_orbit_keys
from zwcalc.diagram import (
    Black,
    Crossing,
    Diagram,
    DiagramBuilder,
    White,
    plug,
    validate,
)
from zwcalc.errors import InvalidMatchError, MatchScopeError
from zwcalc.fuzz import random_diagram
from zwcalc.rules import Rule, apply, catalog, find_matches, verify_soundness
from zwcalc.tensor import (
    INTEGERS,
    IntegersMod,
    eval_diagram,
    tensor_equal,
    wire_tensor,
)

# Rules whose lhs is small enough for the brute-force embedding oracle.
SMALL_LHS = [
    "0a", "0b", "1b", "1c", "1d", "2a", "2b", "3a", "3b", "5c", "6b", "7b",
    "X", "sp_W(1,1)", "sp_W(2,1)", "sp_Z(1,1)", "tr_W(2)", "tr_Z(4)",
    "am_W(2)", "ph(3)",
]

# Rules used for random application trials (lhs within matcher scope).
APPLY_POOL = SMALL_LHS + [
    "5a", "6a", "7a", "sp_W(2,2)", "sp_Z(0,3)", "tr_Z(0)", "am_Z(3)",
    "ba(1,1)", "ba_W(1,1)", "lp_W(2,1)", "lp(2)",
]


class TestCatalog:
    def test_size_and_unique_names(self, rules_by_name):
        assert len(rules_by_name) == 143

    def test_contains_the_fixed_rules(self, rules_by_name):
        for name in ("0a", "1a", "2b", "3a", "4b", "5a", "6a", "7b", "X"):
            assert name in rules_by_name

    def test_contains_every_spider_instance(self, rules_by_name):
        for n in range(5):
            for m in range(5):
                assert f"sp_W({n},{m})" in rules_by_name
                assert f"sp_Z({n},{m})" in rules_by_name

    def test_derived_flags(self, rules_by_name):
        assert rules_by_name["ph(3)"].derived
        assert rules_by_name["ba_braiding"].derived
        assert not rules_by_name["5a"].derived
        assert not rules_by_name["sp_W(2,2)"].derived

    def test_schema_params_recorded(self, rules_by_name):
        assert rules_by_name["sp_W(3,1)"].params == (3, 1)
        assert rules_by_name["ba(2,4)"].params == (2, 4)
        assert rules_by_name["2a"].params == ()

    def test_extension_rule_only_on_request(self, rules_by_name):
        assert "or(3)" not in rules_by_name
        extended = {r.name: r for r in catalog(4, extensions=3)}
        assert "or(3)" in extended
        assert extended["or(3)"].params == (3,)

    def test_bounds_are_validated(self):
        with pytest.raises(ValueError):
            catalog(1)
        with pytest.raises(ValueError):
            catalog(4, extensions=0)

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            Rule("bad", wire(), crossing_state(), (0, 1))
        with pytest.raises(ValueError):
            Rule("bad", wire(), wire(), (0, 0))


class TestSoundness:
    def test_involution_rule_holds(self, rules_by_name):
        assert verify_soundness(rules_by_name["2a"], INTEGERS)

    def test_full_catalog_over_the_integers(self, rules_by_name):
        unsound = [
            rule.name
            for rule in rules_by_name.values()
            if not verify_soundness(rule, INTEGERS)
        ]
        assert unsound == []

    def test_corrupted_crossing_rule_fails(self):
        stripped = Rule("bad-x", crossing_state(), swap_state(), (0, 1, 2, 3))
        assert not verify_soundness(stripped, INTEGERS)

    def test_disconnect_rule_is_modular_only(self):
        or2 = {r.name: r for r in catalog(4, extensions=2)}["or(2)"]
        assert not verify_soundness(or2, INTEGERS)
        assert verify_soundness(or2, IntegersMod(2))
        or3 = {r.name: r for r in catalog(4, extensions=3)}["or(3)"]
        assert not verify_soundness(or3, INTEGERS)
        assert verify_soundness(or3, IntegersMod(3))
        assert not verify_soundness(or3, IntegersMod(2))

    def test_tick_does_not_slide_plainly_through_the_crossing(self, rules_by_name):
        # Rule 7b inserts a sign changer because the Black-2 tick is odd; the
        # naive slide with the changer dropped must fail semantically.
        sound = rules_by_name["7b"]
        naive_rhs = Diagram(
            {
                vid: kind
                for vid, kind in sound.rhs.vertices.items()
                if not isinstance(kind, White)
            },
            tuple(_bypass_whites(sound.rhs)),
            sound.rhs.boundary,
        )
        naive = Rule("7b-naive", sound.lhs, naive_rhs, sound.boundary_map)
        assert not verify_soundness(naive, INTEGERS)
        assert verify_soundness(sound, INTEGERS)


def _bypass_whites(g: Diagram):
    """Edge list of ``g`` with every White-2 vertex contracted away."""
    partner = g.port_partner()
    whites = {vid for vid, kind in g.vertices.items() if isinstance(kind, White)}
    for p, q in g.edges:
        if p[0] in whites or q[0] in whites:
            if p[0] in whites:
                p, q = q, p
            if q[1] == 1:
                continue  # handled from the port-0 side
            yield (p, partner[(q[0], 1)])
        else:
            yield (p, q)


class TestFindMatches:
    def test_unique_involution_match(self, rules_by_name):
        assert len(find_matches(rules_by_name["2a"], b2_chain())) == 1

    def test_empty_host_has_no_matches(self, rules_by_name):
        empty = Diagram({}, (), ())
        for name in ("2a", "5a", "sp_W(1,1)", "X"):
            assert find_matches(rules_by_name[name], empty) == []

    def test_oversized_lhs_is_refused(self, rules_by_name):
        with pytest.raises(MatchScopeError):
            find_matches(rules_by_name["ba_W(4,4)"], b2_chain())

    def test_vertexless_lhs_is_refused(self):
        rule = Rule("wires", wire(), wire(), (0, 1))
        with pytest.raises(MatchScopeError):
            find_matches(rule, b2_chain())

    def test_disconnected_lhs_is_refused(self):
        b = DiagramBuilder()
        for i in range(2):
            b.edge((b.vertex(Black(1)), 0), b.leg(i))
        split = b.build()
        rule = Rule("split", split, split, (0, 1))
        with pytest.raises(MatchScopeError):
            find_matches(rule, b2_chain())

    @given(seed=st.integers(min_value=0, max_value=10**9))
    @settings(max_examples=120)
    def test_agrees_with_the_brute_force_enumerator(self, rules_by_name, seed):
        rng = random.Random(f"differential:{seed}")
        rule = rules_by_name[rng.choice(SMALL_LHS)]
        host = random_diagram(rng, max_vertices=6, max_arity=4, max_legs=4)
        mine = find_matches(rule, host)
        brute = oracle_embeddings(rule.lhs, host)
        expected = oracle_orbit_keys(rule.lhs, brute)
        got = oracle_orbit_keys(rule.lhs, [(m.vertices, m.legs) for m in mine])
        assert got == expected
        assert len(mine) == len(expected)


class TestApply:
    def test_involution_cancels_to_a_wire(self, rules_by_name):
        host = b2_chain()
        (match,) = find_matches(rules_by_name["2a"], host)
        result = apply(rules_by_name["2a"], host, match)
        assert not result.vertices and result.circles == 0
        assert tensor_equal(eval_diagram(result, INTEGERS), wire_tensor())

    def test_spider_fusion_merges_vertices(self, rules_by_name):
        rule = rules_by_name["sp_W(2,2)"]
        b = DiagramBuilder()
        legs = [b.leg(i) for i in range(4)]
        first, second, tick = b.vertex(Black(3)), b.vertex(Black(3)), b.vertex(Black(2))
        b.edge(legs[0], (first, 0))
        b.edge(legs[1], (first, 1))
        b.edge((first, 2), (tick, 0))
        b.edge((tick, 1), (second, 0))
        b.edge((second, 1), legs[2])
        b.edge((second, 2), legs[3])
        host = b.build()
        (match,) = find_matches(rule, host)
        result = apply(rule, host, match)
        assert list(result.vertices.values()) == [Black(4)]
        assert tensor_equal(
            eval_diagram(result, INTEGERS), eval_diagram(host, INTEGERS)
        )

    def test_double_boundary_edge_becomes_a_circle(self, rules_by_name):
        host = Diagram(
            {0: Black(2), 1: Black(2)},
            (((0, 0), (1, 0)), ((0, 1), (1, 1))),
            (),
        )
        (match,) = find_matches(rules_by_name["2a"], host)
        result = apply(rules_by_name["2a"], host, match)
        assert not result.vertices and not result.edges
        assert result.circles == 1

    def test_stale_match_is_rejected(self, rules_by_name):
        (match,) = find_matches(rules_by_name["2a"], b2_chain())
        other = Diagram({0: White(2), 1: White(2)}, b2_chain().edges, ("in", "out"))
        with pytest.raises(InvalidMatchError):
            apply(rules_by_name["2a"], other, match)

    def test_two_hundred_random_triples_preserve_eval(self, rules_by_name):
        # Graft each rule's own lhs onto a random diagram so that a match is
        # guaranteed, then check apply against the semantics.
        for i in range(200):
            rng = random.Random(f"triple:{i}")
            rule = rules_by_name[rng.choice(APPLY_POOL)]
            extra = random_diagram(rng, max_vertices=5, max_arity=4, max_legs=4)
            joint = min(len(rule.lhs.boundary), len(extra.boundary))
            count = rng.randint(0, joint)
            pairing = list(
                zip(
                    rng.sample(range(len(rule.lhs.boundary)), count),
                    rng.sample(range(len(extra.boundary)), count),
                )
            )
            host = plug(rule.lhs, extra, pairing)
            matches = find_matches(rule, host)
            assert matches, (i, rule.name)
            match = rng.choice(matches)
            result = apply(rule, host, match)
            assert result.boundary == host.boundary, (i, rule.name)
            assert validate(result) == [], (i, rule.name)
            assert tensor_equal(
                eval_diagram(host, INTEGERS), eval_diagram(result, INTEGERS)
            ), (i, rule.name)
