import pytest

from tml.errors import TypeCheckError
from tml.evaluate import evaluate
from tml.parser import parse_expr, parse_type, parse_value
from tml.prelude import H_SRC, prelude_expr
from tml.syntax import INT, Env, HOLE, TConst, TFst, TPair, TVar, list_type
from tml.typecheck import check_expr, check_expr_labels, check_trace, check_value


def ty(src: str, gamma=None):
    return check_expr(gamma or {}, parse_expr(src))


def test_arithmetic():
    assert ty("1 + 2") == INT


def test_factorial_application():
    assert ty(f"({H_SRC}) 4") == INT


def test_list_literal():
    assert ty("[1, 2, 3]") == list_type(INT)


def test_map_type():
    assert check_expr({}, prelude_expr("map")) == parse_type("(int -> int) -> int list -> int list")


@pytest.mark.parametrize("bad", ["fst 42", "1 + (1, 2)", "if 1 then 2 else 3", "(fn x => x + 1) (1, 2)", "inl 1"])
def test_rejected(bad):
    with pytest.raises(TypeCheckError):
        ty(bad)


def test_free_variables_use_the_context():
    assert ty("x + 1", {"x": INT}) == INT
    with pytest.raises(TypeCheckError):
        ty("x + 1")


def test_unannotated_lists_default_to_list_types():
    t = ty("fun len xs. case unroll xs of inl(u). 0 | inr(p). fst p + len (snd p)")
    assert t == parse_type("int list -> int")


def test_label_types():
    t, labels = check_expr_labels({}, parse_expr("(1@A, [2@B])"))
    assert labels == {"A": INT, "B": INT}
    assert t == parse_type("int * int list")


def test_values():
    assert check_value(parse_value("(1, [2])")) == parse_type("int * int list")
    assert check_value(parse_value("inl 3"), parse_type("int + bool")) == parse_type("int + bool")


def test_trace_of_a_run_has_the_result_type():
    e = parse_expr(f"({H_SRC}) 3")
    _, t = evaluate(Env(), e)
    assert check_trace({}, t) == INT


def test_nonsense_trace_is_rejected():
    with pytest.raises(TypeCheckError):
        check_trace({}, TFst(TConst(42)))


def test_holes_check_at_any_type():
    assert check_trace({"x": INT}, TFst(TPair(TVar("x"), HOLE))) == INT


def test_polymorphic_use_is_ambiguous():
    with pytest.raises(TypeCheckError, match="ambiguous"):
        ty("fun len xs. case unroll xs of inl(u). 0 | inr(p). 1 + len (snd p)")
