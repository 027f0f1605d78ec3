"""Acceptance gate: eight exact end-to-end checks, one test per criterion.

Every comparison is exact (integer tensors, structural equality); the only
pinned tolerances are wall-time budgets on the two long-running criteria.
Each test prints a single PASS line on success; a failure stops at the
offending assertion instead.
"""

from __future__ import annotations

import random
import time

from helpers import self_crossed_wire, triangle
from zwcalc.diagram import Black, Crossing, Diagram, DiagramBuilder, White, canonical_form
from zwcalc.fuzz import random_diagram, run_fuzz
from zwcalc.normalform import (
    deloop,
    eliminate_crossings,
    is_normal_form,
    negate_end,
    nf_of_tensor,
    nf_to_diagram,
    normalize,
    plug_normal_forms,
    reduce_mod,
    trace_ends,
    wire_nf,
)
from zwcalc.rules import catalog, verify_soundness
from zwcalc.tensor import (
    INTEGERS,
    IntegersMod,
    contract,
    eval_diagram,
    make_tensor,
    reduce_tensor,
    tensor_equal,
    trace_pair,
    wire_tensor,
)
from zwcalc.term import from_term, parse_term

MODULI = (2, 3, 5)


def random_tensor(rng: random.Random, max_legs: int = 4, span: int = 3):
    legs = rng.randint(1, max_legs)
    entries = {
        mask: rng.randint(-span, span)
        for mask in range(1 << legs)
        if rng.random() < 0.4
    }
    return make_tensor(legs, entries)


def test_criterion_1_every_rule_is_machine_checked_sound():
    started = time.perf_counter()
    unsound = [
        rule.name for rule in catalog(4) if not verify_soundness(rule, INTEGERS)
    ]
    assert unsound == []
    for n in MODULI:
        extended = {rule.name: rule for rule in catalog(4, extensions=n)}
        assert verify_soundness(extended[f"or({n})"], IntegersMod(n))
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    print(f"PASS criterion 1: 143 rules sound over Z, or(n) sound mod n ({elapsed:.1f}s)")


def test_criterion_2_decompose_then_rebuild_is_the_identity():
    for i in range(500):
        rng = random.Random(f"fn-id:{i}")
        psi = random_tensor(rng)
        again = eval_diagram(nf_to_diagram(nf_of_tensor(psi)), INTEGERS)
        assert tensor_equal(again, psi), i
    print("PASS criterion 2: 500 tensors rebuild exactly from their normal forms")


def test_criterion_3_seeded_diagrams_normalize_to_the_oracle_form():
    report = run_fuzz(1000, seed=20260814)
    assert report.ok, report.summary()
    assert report.count == 1000
    assert report.seconds < 300.0
    print(f"PASS criterion 3: {report.summary()} ({report.seconds:.1f}s)")


def test_criterion_4_lemma_operations_match_the_tensor_oracle():
    for i in range(200):
        rng = random.Random(f"lemma:{i}")
        psi = random_tensor(rng)
        form = nf_of_tensor(psi)

        j = rng.randrange(psi.legs)
        flipped = make_tensor(
            psi.legs,
            {m ^ (1 << (psi.legs - 1 - j)): c for m, c in psi.entries.items()},
        )
        assert negate_end(form, j) == nf_of_tensor(flipped), i

        wide = contract(psi, wire_tensor(), [])
        j, k = rng.sample(range(wide.legs), 2)
        assert trace_ends(nf_of_tensor(wide), j, k) == nf_of_tensor(
            trace_pair(wide, j, k)
        ), i

        other = random_tensor(rng, max_legs=3)
        count = rng.randint(0, min(psi.legs, other.legs))
        pairing = list(
            zip(rng.sample(range(psi.legs), count), rng.sample(range(other.legs), count))
        )
        assert plug_normal_forms(form, nf_of_tensor(other), pairing) == nf_of_tensor(
            contract(psi, other, pairing)
        ), i

        assert tensor_equal(eval_diagram(deloop(form), INTEGERS), psi), i

        n = MODULI[i % 3]
        assert reduce_mod(form, n) == nf_of_tensor(
            reduce_tensor(psi, IntegersMod(n)), IntegersMod(n)
        ), i
    print("PASS criterion 4: 200 rounds of lemma operations agree with the tensor oracle")


def test_criterion_5_crossing_elimination_is_exact_and_lazy():
    crossed = checked_free = 0
    i = 0
    while crossed < 200:
        g = random_diagram(random.Random(f"xing:{i}"), 8, 4, 6)
        i += 1
        if any(isinstance(k, Crossing) for k in g.vertices.values()):
            spliced = eliminate_crossings(g)
            assert not any(
                isinstance(k, Crossing) for k in spliced.vertices.values()
            ), i
            assert tensor_equal(
                eval_diagram(spliced, INTEGERS), eval_diagram(g, INTEGERS)
            ), i
            crossed += 1
        elif checked_free < 50:
            assert eliminate_crossings(g) is g, i
            _, trace = normalize(g, want_trace=True)
            assert "crossing-elim" not in [s.step for s in trace.steps], i
            checked_free += 1
    assert checked_free == 50
    print("PASS criterion 5: 200 crossing diagrams spliced exactly, 50 crossing-free untouched")


def test_criterion_6_the_triangle_reaches_its_exact_normal_form():
    """The triangle of ternary Black vertices is the ternary X-spider with a pi phase.

    Its tensor is the odd-parity indicator on three bits, pinned exactly
    together with its normal form.
    """
    g = triangle()
    psi = eval_diagram(g, INTEGERS)
    assert tensor_equal(
        psi, make_tensor(3, {0b001: 1, 0b010: 1, 0b100: 1, 0b111: 1})
    )
    out, _ = normalize(g)
    form = is_normal_form(out)
    assert form is not None
    assert [tuple(t) for t in form.terms] == [
        (0, 1, "001"),
        (0, 1, "010"),
        (0, 1, "100"),
        (0, 1, "111"),
    ]
    print("PASS criterion 6: triangle evaluates and normalizes to its frozen form")


def test_criterion_7_modular_evaluation_and_the_disconnect_rule():
    for n in MODULI:
        ring = IntegersMod(n)
        for i in range(200):
            g = random_diagram(random.Random(f"mod{n}:{i}"), 8, 4, 6)
            assert tensor_equal(
                eval_diagram(g, ring),
                reduce_tensor(eval_diagram(g, INTEGERS), ring),
            ), (n, i)
        disconnect = {r.name: r for r in catalog(4, extensions=n)}[f"or({n})"]
        assert verify_soundness(disconnect, ring)
        assert not verify_soundness(disconnect, INTEGERS)
        lhs = eval_diagram(disconnect.lhs, INTEGERS)
        rhs = eval_diagram(disconnect.rhs, INTEGERS)
        witnesses = {
            mask
            for mask in set(lhs.entries) | set(rhs.entries)
            if lhs.entries.get(mask, 0) != rhs.entries.get(mask, 0)
        }
        assert witnesses, n
    print("PASS criterion 7: 600 modular evaluations reduce exactly; or(n) modular-only")


def test_criterion_8_pinned_identities():
    zigzag = from_term(parse_term("id * cup ; cap * id"))
    assert tensor_equal(eval_diagram(zigzag, INTEGERS), wire_tensor())
    out, _ = normalize(zigzag)
    assert is_normal_form(out) == wire_nf()
    assert canonical_form(out) == canonical_form(
        nf_to_diagram(wire_nf(), dirs=zigzag.boundary)
    )

    b = DiagramBuilder()
    changer = b.vertex(White(2))
    b.edge(b.leg(0, "in"), (changer, 0))
    b.edge((changer, 1), b.leg(1))
    assert tensor_equal(
        eval_diagram(b.build(), INTEGERS),
        eval_diagram(self_crossed_wire(), INTEGERS),
    )

    zero = Diagram({0: Black(0)}, (), ())
    psi = eval_diagram(zero, INTEGERS)
    assert psi.legs == 0 and psi.is_zero()
    print("PASS criterion 8: zigzag, sign-changer and nullary-Black identities hold")
