"""Parser behavior: grammar forms, defaults, and error positions."""

import pytest

from delaycrn import (
    NetworkSyntaxError,
    PointMassKernel,
    TableKernel,
    UniformKernel,
    parse_network,
    parse_network_file,
)

from conftest import REF_TEXT


def test_reference_network_parses():
    net = parse_network(REF_TEXT)
    assert net.species_names == ["X1", "X2"]
    assert net.r == 2
    assert net.reactions[0].source.coeffs == (2, 0)
    assert net.reactions[0].product.coeffs == (1, 1)
    assert isinstance(net.reactions[0].kernel, UniformKernel)
    assert net.reactions[1].kernel == PointMassKernel(0.0)
    assert net.max_delay == 1.0


def test_comments_and_blank_lines_ignored():
    net = parse_network(
        "# leading comment\n"
        "species A B  # trailing comment\n"
        "\n"
        "reaction A -> B ; rate 2.5 ; delay none  # another\n"
    )
    assert net.r == 1
    assert net.reactions[0].rate == 2.5


def test_reversible_arrow_expands_to_two_reactions():
    net = parse_network(
        "species A B\n"
        "reaction A <-> B ; rate 2 ; delay const(0.5)\n"
    )
    assert net.r == 2
    fwd, rev = net.reactions
    assert fwd.source.coeffs == (1, 0) and fwd.product.coeffs == (0, 1)
    assert rev.source.coeffs == (0, 1) and rev.product.coeffs == (1, 0)
    # reverse inherits rate and kernel unless overridden
    assert rev.rate == 2 and rev.kernel == PointMassKernel(0.5)


def test_rate2_and_delay2_override_the_reverse_direction():
    net = parse_network(
        "species A B\n"
        "reaction A <-> B ; rate 2, rate2 3 ; delay const(0.5), delay2 none\n"
    )
    fwd, rev = net.reactions
    assert (fwd.rate, rev.rate) == (2.0, 3.0)
    assert rev.kernel == PointMassKernel(0.0)


def test_rate2_on_one_way_arrow_rejected():
    with pytest.raises(NetworkSyntaxError, match="rate2"):
        parse_network("species A B\nreaction A -> B ; rate 1, rate2 2 ; delay none\n")


def test_zero_complex_and_coefficients():
    net = parse_network(
        "species A B\n"
        "reaction 0 -> A ; rate 1 ; delay none\n"
        "reaction 2 A + B -> 0 ; rate 1 ; delay none\n"
    )
    assert net.reactions[0].source.is_zero
    assert net.reactions[1].source.coeffs == (2, 1)
    assert net.reactions[1].product.is_zero


def test_repeated_species_terms_accumulate():
    net = parse_network("species A\nreaction A + A -> 3 A ; rate 1 ; delay none\n")
    assert net.reactions[0].source.coeffs == (2,)
    assert net.reactions[0].product.coeffs == (3,)


def test_uniform_kernel_arguments():
    net = parse_network("species A B\nreaction A -> B ; rate 1 ; delay uniform(0.25, 2)\n")
    kern = net.reactions[0].kernel
    assert kern == UniformKernel(0.25, 2.0)
    assert kern.support == (-2.0, -0.25)


def test_table_kernel_path_resolution(tmp_path):
    (tmp_path / "kern.csv").write_text("-1.0,0.0\n-0.5,1.0\n0.0,0.0\n")
    (tmp_path / "net.crn").write_text(
        "species A B\nreaction A -> B ; rate 1 ; delay table(kern.csv)\n"
    )
    net = parse_network_file(str(tmp_path / "net.crn"))
    kern = net.reactions[0].kernel
    assert isinstance(kern, TableKernel)
    assert kern.support == (-1.0, 0.0)


def test_error_positions_are_reported():
    with pytest.raises(NetworkSyntaxError) as err:
        parse_network("species A B\nreaction A -> C ; rate 1 ; delay none\n")
    assert err.value.line == 2
    assert "unknown species 'C'" in str(err.value)

    with pytest.raises(NetworkSyntaxError) as err:
        parse_network("species A B\nreaction A -> B ; rate 1\n")
    assert err.value.line == 2  # missing '; delay ...'


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "no species"),
        ("species A A\n", "duplicate species"),
        ("species A B\nreaction A -> B ; rate 0 ; delay none\n", "rate must be positive"),
        ("species A B\nreaction A -> B ; rate 1 ; delay gamma(1,2)\n", "unknown kernel"),
        ("species A B\nreaction A -> A ; rate 1 ; delay none\n", "must differ"),
        ("species A B\nreaction 1.5 A -> B ; rate 1 ; delay none\n", "positive integer"),
        ("species A B\nreaction A -> B ; rate 1 ; delay const(-1)\n", "unexpected character"),
        ("species A B\nfoo A -> B\n", "expected 'species' or 'reaction'"),
        ("species A B\nreaction A -> B ; rate 1 ; delay none extra\n", "trailing"),
    ],
)
def test_rejected_inputs(text, fragment):
    with pytest.raises(NetworkSyntaxError, match=fragment):
        parse_network(text)


def test_pretty_round_trip():
    net = parse_network(REF_TEXT)
    again = parse_network(net.pretty())
    assert again == net
    assert again.content_hash() == net.content_hash()


def test_content_hash_sees_rate_changes():
    a = parse_network("species A B\nreaction A -> B ; rate 1 ; delay none\n")
    b = parse_network("species A B\nreaction A -> B ; rate 2 ; delay none\n")
    assert a.content_hash() != b.content_hash()
