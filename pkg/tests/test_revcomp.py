"""Gate semantics, circuit bijectivity, synthesis, mutation, serialization."""

import numpy as np
import pytest

from caterpillar.revcomp import (Gate, MutationWeights, ReversibleCircuit,
                                 apply_circuit, apply_gate, cnot, fredkin,
                                 invert_circuit, is_bijective, mcx, mutate,
                                 not_gate, parse_circuit, random_circuit,
                                 serialize_circuit, swap_gate, synthesize,
                                 toffoli, truth_table)
from caterpillar.streams import stream


def test_not_gate():
    assert apply_gate(not_gate(0), 0b0) == 0b1
    assert apply_gate(not_gate(0), 0b1) == 0b0


def test_toffoli_gate():
    g = toffoli(0, 1, 2)
    assert apply_gate(g, 0b011) == 0b111   # both controls set: flip line 2
    assert apply_gate(g, 0b001) == 0b001   # one control unset: identity


def test_fredkin_gate():
    g = fredkin(0, 1, 2)
    # control set, lines (1, 2) = (0, 1): swapped to (1, 0)
    assert apply_gate(g, 0b101) == 0b011
    assert apply_gate(g, 0b100) == 0b100   # control clear: identity


def test_cnot_and_swap():
    assert apply_gate(cnot(0, 1), 0b01) == 0b11
    assert apply_gate(swap_gate(0, 1), 0b01) == 0b10


def test_mcx_polarities():
    g = mcx([0, 1], 2, polarities=[True, False])
    assert apply_gate(g, 0b001) == 0b101   # line0 set, line1 clear: fires
    assert apply_gate(g, 0b011) == 0b011   # line1 set: blocked


def test_gate_validation():
    with pytest.raises(ValueError):
        cnot(1, 1)
    with pytest.raises(ValueError):
        Gate("CNOT", (0,), (True,), (1, 2))
    with pytest.raises(ValueError):
        Gate("HADAMARD", targets=(0,))


def test_circuit_width_checked():
    with pytest.raises(ValueError):
        ReversibleCircuit(2, (toffoli(0, 1, 2),))
    with pytest.raises(ValueError):
        apply_circuit(ReversibleCircuit(2), 4)


def test_empty_circuit_is_identity():
    c = ReversibleCircuit(4)
    assert all(apply_circuit(c, x) == x for x in range(16))


def test_involution_pair_cancels():
    c = ReversibleCircuit(1, (not_gate(0), not_gate(0)))
    assert apply_circuit(c, 0) == 0
    assert apply_circuit(c, 1) == 1


def test_random_circuit_bijective():
    rng = stream(41, "rc")
    c = random_circuit(4, 5, rng)
    table = truth_table(c)
    assert sorted(table.tolist()) == list(range(16))


def test_truth_table_matches_scalar_application():
    rng = stream(43, "tt")
    for _ in range(20):
        c = random_circuit(5, 12, rng)
        table = truth_table(c)
        for x in range(32):
            assert apply_circuit(c, x) == int(table[x])


def test_invert_circuit():
    assert invert_circuit(ReversibleCircuit(3)).gates == ()
    c1 = ReversibleCircuit(2, (cnot(0, 1),))
    assert invert_circuit(c1).gates == c1.gates
    rng = stream(47, "inv")
    c = random_circuit(8, 10, rng)
    inv = invert_circuit(c)
    for x in range(256):
        assert apply_circuit(inv, apply_circuit(c, x)) == x


def test_invert_is_involution():
    rng = stream(53, "inv2")
    c = random_circuit(5, 9, rng)
    assert invert_circuit(invert_circuit(c)).gates == c.gates


def test_is_bijective():
    assert is_bijective(list(range(8)))
    assert not is_bijective([0, 0, 0, 0])
    rng = stream(59, "bij")
    assert is_bijective(truth_table(random_circuit(6, 15, rng)).tolist())
    with pytest.raises(ValueError):
        is_bijective([0] * (1 << 21))


def test_synthesize_identity_is_empty():
    assert len(synthesize(list(range(16)))) == 0


def test_synthesize_single_transposition():
    perm = [1, 0, 2, 3]
    assert truth_table(synthesize(perm)).tolist() == perm


def test_synthesize_random_permutations_exact():
    rng = stream(61, "synth")
    for n in (2, 3, 4, 6):
        perm = [int(v) for v in rng.permutation(1 << n)]
        assert truth_table(synthesize(perm)).tolist() == perm


def test_synthesize_rejects_bad_input():
    with pytest.raises(ValueError):
        synthesize([0, 0, 1, 1])
    with pytest.raises(ValueError):
        synthesize(list(range(6)))   # not a power of two
    with pytest.raises(ValueError):
        synthesize(list(range(1 << 9)))


def test_mutate_empty_inserts():
    rng = stream(67, "mut")
    c = mutate(ReversibleCircuit(3), rng)
    assert len(c) == 1


def test_mutate_edit_distance_and_bijectivity():
    rng = stream(71, "mut2")
    base = random_circuit(4, 5, rng)
    for _ in range(50):
        child = mutate(base, rng)
        assert len(base) == 5   # original untouched
        assert 4 <= len(child) <= 6
        assert sorted(truth_table(child).tolist()) == list(range(16))


def test_mutation_chain_stays_bijective():
    rng = stream(73, "mut3")
    c = ReversibleCircuit(4)
    target = list(range(16))
    for _ in range(1000):
        c = mutate(c, rng)
        assert sorted(truth_table(c).tolist()) == target


def test_mutation_weights_validated():
    rng = stream(79, "mut4")
    with pytest.raises(ValueError):
        mutate(ReversibleCircuit(2), rng, MutationWeights(0, 0, 0, 0))


def test_serialization_roundtrip():
    rng = stream(83, "ser")
    c = random_circuit(5, 20, rng)
    parsed = parse_circuit(serialize_circuit(c))
    assert parsed.width == c.width
    assert truth_table(parsed).tolist() == truth_table(c).tolist()
    assert [g.kind for g in parsed.gates] == [g.kind for g in c.gates]


def test_parse_errors_name_line():
    with pytest.raises(ValueError, match="line 2"):
        parse_circuit("lines 3\nWIBBLE 0\n")
    with pytest.raises(ValueError, match="lines"):
        parse_circuit("NOT 0\n")
    with pytest.raises(ValueError, match="polarity"):
        parse_circuit("lines 3\nMCX 0 1\n")
