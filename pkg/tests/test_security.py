import random

from tml.parser import parse_expr, parse_pattern
from tml.security import (
    TmlTriple,
    a_to_b,
    all_to_a,
    check_disclosure,
    check_negative_disclosure,
    check_negative_obfuscation,
    check_obfuscation,
    check_positive_disclosure,
    check_positive_obfuscation,
    delete_a,
    delete_alternates,
    disclosure_counterexample,
    enumerate_triples,
    even_b,
    in_query,
    no_aa_no_bb,
    no_abab,
    odd_a,
    out_query,
    strings,
)
from tml.syntax import INT
from tml.slicing import disc_view

U = strings("ab", 8)
NONEMPTY = strings("ab", 8, min_len=1)


def test_universe_size():
    assert len(U) == sum(2**n for n in range(9))


def test_replacing_by_a_obfuscates_even_b():
    assert check_obfuscation(NONEMPTY, all_to_a, even_b)
    assert not check_disclosure(NONEMPTY, all_to_a, even_b)


def test_empty_string_breaks_obfuscation():
    assert not check_obfuscation(U, all_to_a, even_b)


def test_deleting_a_discloses_even_b():
    assert check_disclosure(NONEMPTY, delete_a, even_b)
    assert not check_obfuscation(NONEMPTY, delete_a, even_b)


def test_deleting_alternates_hides_even_b():
    # the kept symbols never fix the parity: flipping a dropped one changes it
    assert not check_disclosure(NONEMPTY, delete_alternates, even_b)
    assert check_obfuscation(NONEMPTY, delete_alternates, even_b)


def test_delete_alternates_positively_discloses_no_abab():
    assert check_positive_disclosure(U, delete_alternates, no_abab, no_aa_no_bb)
    assert not check_negative_disclosure(U, delete_alternates, no_abab, no_aa_no_bb)
    assert delete_alternates("abab") == delete_alternates("bbbb") == "bb"


def test_a_to_b_positively_obfuscates_odd_a():
    assert check_positive_obfuscation(U, a_to_b, odd_a)
    assert not check_negative_obfuscation(U, a_to_b, odd_a)


def test_counterexample():
    pair = disclosure_counterexample(U, all_to_a, even_b)
    assert pair is not None
    t, t2 = pair
    assert all_to_a(t) == all_to_a(t2) and even_b(t) != even_b(t2)


def test_positive_and_negative_give_full_disclosure_and_obfuscation():
    rng = random.Random(7)
    for _ in range(200):
        universe = list(range(rng.randint(1, 8)))
        views = {t: rng.randint(0, 3) for t in universe}
        answers = {t: rng.random() < 0.5 for t in universe}
        pq = {o: rng.random() < 0.5 for o in range(4)}
        P, Q, q = views.__getitem__, answers.__getitem__, pq.__getitem__
        if check_positive_disclosure(universe, P, Q, q) and check_negative_disclosure(universe, P, Q, q):
            assert check_disclosure(universe, P, Q)
        if check_positive_obfuscation(universe, P, Q) and check_negative_obfuscation(universe, P, Q):
            assert check_obfuscation(universe, P, Q)


def test_disclosure_view_on_a_tml_program():
    e = parse_expr("if x < y then x else y")
    triples = enumerate_triples(e, [0, 1, 2], {"x": INT, "y": INT})
    assert len(triples) == 9
    p = parse_pattern("1")

    def view(tr: TmlTriple):
        return disc_view(p, tr.env, tr.trace, tr.value)

    assert check_disclosure(triples, view, out_query(p))


def test_input_query_from_a_pattern():
    e = parse_expr("x + y")
    triples = enumerate_triples(e, [0, 1], {"x": INT, "y": INT})
    q = in_query({"x": parse_pattern("1")})
    assert sum(map(q, triples)) == 2
