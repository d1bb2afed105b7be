#include <doctest.h>

#include <set>
#include <vector>

#include "latticeperm/circuit.hpp"
#include "latticeperm/stats.hpp"

using namespace latticeperm;

TEST_CASE("gate sampling is deterministic and invertible") {
  StreamRng a(123), b(123);
  const Gate3 first = sample_gate(a, {0, 1, 2});
  const Gate3 second = sample_gate(b, {0, 1, 2});
  CHECK(first == second);

  const Gate3 inverse = first.inverted();
  for (int in = 0; in < 8; ++in) {
    CHECK(inverse.table[first.table[static_cast<std::size_t>(in)]] == in);
  }
  CHECK(first.inverted().inverted() == first);
}

TEST_CASE("gate tables look uniform under chi-square") {
  StreamRng rng(2718);
  std::vector<std::uint64_t> image_counts(8, 0);
  for (int i = 0; i < 200000; ++i) {
    ++image_counts[sample_gate(rng, {0, 1, 2}).table[0]];
  }
  const ChiSquareResult fit =
      chi_square_gof(image_counts, std::vector<double>(8, 1.0 / 8.0));
  CHECK(fit.dof == 7);
  CHECK(fit.p_value > 0.001);
}

TEST_CASE("brickwork tiling") {
  SUBCASE("width 6, one layer covers all wires with two gates") {
    const CircuitSpec spec = build_brickwork_1d(6, 1, StreamRng(1));
    REQUIRE(spec.layers.size() == 1);
    REQUIRE(spec.layers[0].size() == 2);
    std::set<int> wires;
    for (const Gate3& gate : spec.layers[0]) wires.insert(gate.wires.begin(), gate.wires.end());
    CHECK(wires == std::set<int>{0, 1, 2, 3, 4, 5});
  }
  SUBCASE("width 7, two layers: boundary wires idle") {
    const CircuitSpec spec = build_brickwork_1d(7, 2, StreamRng(1));
    REQUIRE(spec.layers.size() == 2);
    CHECK(spec.layers[0].size() == 2);  // (0,1,2) (3,4,5); wire 6 idle
    CHECK(spec.layers[1].size() == 2);  // (1,2,3) (4,5,6); wire 0 idle
    CHECK(spec.layers[1][0].wires == std::array<int, 3>{1, 2, 3});
  }
  SUBCASE("width below 3 is rejected") {
    CHECK_THROWS_AS(build_brickwork_1d(2, 1, StreamRng(1)), DomainError);
  }
}

TEST_CASE("inverse circuits round-trip") {
  const LatticeShape shape = LatticeShape::make(2, 4, 1);
  const CircuitSpec circuit = build_lattice_circuit(2, 4, 1, 2, StreamRng(5));
  const CircuitSpec inverse = invert(circuit);
  CHECK(invert(inverse) == circuit);

  StreamRng rng(6);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::uint64_t state = rng.next() & 0xffff;
    const BitLatticeTuple input = BitLatticeTuple::from_packed(shape, state);
    const BitLatticeTuple out = apply_tuple(inverse, apply_tuple(circuit, input));
    CHECK(out.packed() == state);
  }
}

TEST_CASE("sampled circuits are permutations on every input") {
  SUBCASE("1-d brickwork, width 7") {
    const CircuitSpec spec = build_brickwork_1d(7, 4, StreamRng(9));
    const CompiledCircuit compiled = compile(spec, 1, 7);
    std::vector<bool> seen(1u << 7, false);
    for (std::uint64_t in = 0; in < (1u << 7); ++in) {
      const std::uint64_t out = compiled.apply_packed(in, 1, 0);
      CHECK_FALSE(seen[out]);
      seen[out] = true;
    }
  }
  SUBCASE("2-d lattice circuit, 16 wires") {
    const CircuitSpec spec = build_lattice_circuit(2, 4, 1, 2, StreamRng(10));
    const CompiledCircuit compiled = compile(spec, 2, 4);
    std::vector<bool> seen(1u << 16, false);
    for (std::uint64_t in = 0; in < (1u << 16); ++in) {
      const std::uint64_t out = compiled.apply_packed(in, 1, 0);
      CHECK_FALSE(seen[out]);
      seen[out] = true;
    }
  }
}

TEST_CASE("tensor action applies the same permutation to every member") {
  const LatticeShape shape = LatticeShape::make(2, 4, 2);
  const CircuitSpec circuit = build_lattice_circuit(2, 4, 1, 2, StreamRng(11));
  StreamRng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    BitLatticeTuple input(shape);
    for (std::uint64_t f = 0; f < shape.sites(); ++f) input.set(f, rng.next() & 1);
    const BitLatticeTuple output = apply_tuple(circuit, input);
    for (int member = 0; member < shape.k; ++member) {
      BitLatticeTuple single(shape.with_arity(1));
      for (std::uint64_t site = 0; site < shape.n; ++site) {
        single.set(site, input.get(site * 2 + static_cast<std::uint64_t>(member)));
      }
      const BitLatticeTuple mapped = apply_tuple(circuit, single);
      for (std::uint64_t site = 0; site < shape.n; ++site) {
        CHECK(mapped.get(site) == output.get(site * 2 + static_cast<std::uint64_t>(member)));
      }
    }
  }
}

TEST_CASE("equal members stay equal under the tensor action") {
  const LatticeShape shape = LatticeShape::make(2, 4, 2);
  const PackedOps ops(shape);
  const CircuitSpec circuit = build_lattice_circuit(2, 4, 2, 2, StreamRng(13));
  StreamRng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t member = rng.next() & 0xffff;
    std::uint64_t state = 0;
    state = ops.with_member(state, 0, member);
    state = ops.with_member(state, 1, member);
    const BitLatticeTuple out =
        apply_tuple(circuit, BitLatticeTuple::from_packed(shape, state));
    CHECK(ops.grid_partition(out.packed()).block_count() == 1);
  }
}

TEST_CASE("axis-parallel layers stay inside their slices") {
  const LatticeShape shape = LatticeShape::make(2, 4, 1);
  for (int axis = 0; axis < 2; ++axis) {
    CircuitSpec layer;
    layer.kind = CircuitSpec::Kind::AxisParallel;
    layer.axis = axis;
    StreamRng rng(40 + axis);
    for (int i = 0; i < 4; ++i) {
      layer.children.push_back(build_brickwork_1d(4, 3, rng.split(static_cast<std::uint64_t>(i))));
    }
    const CompiledCircuit compiled = compile(layer, 2, 4);

    // Flipping bits inside one slice must not disturb any other slice.
    StreamRng state_rng(50 + axis);
    for (int trial = 0; trial < 20; ++trial) {
      const std::uint64_t base = state_rng.next() & 0xffff;
      for (int slice = 0; slice < 4; ++slice) {
        std::uint64_t slice_mask = 0;
        for (int pos = 0; pos < 4; ++pos) {
          const int site = axis == 0 ? slice * 4 + pos : pos * 4 + slice;
          slice_mask |= 1ull << site;
        }
        const std::uint64_t flipped = base ^ (state_rng.next() & slice_mask);
        const std::uint64_t out_a = compiled.apply_packed(base, 1, 0);
        const std::uint64_t out_b = compiled.apply_packed(flipped, 1, 0);
        CHECK((out_a & ~slice_mask) == (out_b & ~slice_mask));
      }
    }

    // Word-storage application agrees with the packed fast path.
    const std::uint64_t probe = 0xbadc;
    BitLatticeTuple tuple = BitLatticeTuple::from_packed(shape, probe);
    compiled.apply_member(tuple, 0);
    CHECK(tuple.packed() == compiled.apply_packed(probe, 1, 0));
  }
}

TEST_CASE("zero rounds build a single row layer") {
  const CircuitSpec spec = build_lattice_circuit(2, 4, 0, 3, StreamRng(8));
  REQUIRE(spec.kind == CircuitSpec::Kind::Sequence);
  REQUIRE(spec.children.size() == 1);
  CHECK(spec.children[0].kind == CircuitSpec::Kind::AxisParallel);
  CHECK(spec.children[0].axis == 0);
  CHECK(spec.children[0].children.size() == 4);
  CHECK(spec.depth() == 3);
}

TEST_CASE("depth accounting matches the closed form") {
  for (int dims : {2, 3, 4}) {
    for (int rounds : {0, 1, 2}) {
      const std::uint64_t predicted = predicted_depth(dims, rounds, 5);
      const CircuitSpec circuit = build_lattice_circuit(dims, 3, rounds, 5, StreamRng(17));
      INFO("dims ", dims, " rounds ", rounds);
      CHECK(circuit.depth() == predicted);
    }
  }
  CHECK(predicted_depth(2, 1, 5) == 15);
  CHECK(predicted_depth(3, 1, 5) == 45);
  CHECK(predicted_depth(4, 0, 7) == 7);
  // Each added dimension multiplies the two-dimensional depth by 2t+1.
  for (int dims : {3, 4}) {
    for (int rounds : {0, 1, 2}) {
      CHECK(predicted_depth(dims, rounds, 5) ==
            predicted_depth(dims - 1, rounds, 5) * static_cast<std::uint64_t>(2 * rounds + 1));
    }
  }
}

TEST_CASE("structural validation catches malformed circuits") {
  SUBCASE("duplicate wire within a layer") {
    CircuitSpec bad;
    bad.kind = CircuitSpec::Kind::Base1D;
    bad.width = 6;
    StreamRng rng(1);
    bad.layers = {{sample_gate(rng, {0, 1, 2}), sample_gate(rng, {2, 3, 4})}};
    CHECK_THROWS_AS(compile(bad, 1, 6), DomainError);
  }
  SUBCASE("width mismatch") {
    const CircuitSpec spec = build_brickwork_1d(6, 1, StreamRng(2));
    CHECK_THROWS_AS(compile(spec, 1, 7), DomainError);
  }
  SUBCASE("child count mismatch") {
    CircuitSpec parallel;
    parallel.kind = CircuitSpec::Kind::AxisParallel;
    parallel.axis = 0;
    parallel.children = {build_brickwork_1d(3, 1, StreamRng(3))};
    CHECK_THROWS_AS(compile(parallel, 2, 3), DomainError);
  }
  SUBCASE("empty sequence is the identity") {
    CircuitSpec empty;
    empty.kind = CircuitSpec::Kind::Sequence;
    const CompiledCircuit compiled = compile(empty, 2, 4);
    CHECK(compiled.gate_count() == 0);
    CHECK(compiled.apply_packed(0xbeef, 1, 0) == 0xbeef);
  }
}

TEST_CASE("circuit JSON round-trips losslessly") {
  const CircuitSpec circuit = build_lattice_circuit(3, 3, 1, 2, StreamRng(21));
  const std::string text = circuit_to_json_string(circuit, 21);
  const CircuitSpec parsed = circuit_from_json_string(text);
  CHECK(parsed == circuit);
  CHECK(circuit_to_json_string(parsed, 21) == text);

  CHECK_THROWS_AS(circuit_from_json_string("{\"format\":\"other\",\"version\":1}"), std::exception);
}

TEST_CASE("identical seeds reproduce identical circuits") {
  const CircuitSpec a = build_lattice_circuit(2, 4, 2, 3, StreamRng(1234));
  const CircuitSpec b = build_lattice_circuit(2, 4, 2, 3, StreamRng(1234));
  const CircuitSpec c = build_lattice_circuit(2, 4, 2, 3, StreamRng(1235));
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("suggested base depth grows with width and arity") {
  CHECK(suggest_base_layers(4, 2) == 16);  // ceil(4 * (2 + 2))
  CHECK(suggest_base_layers(8, 2) > suggest_base_layers(4, 2));
  CHECK(suggest_base_layers(4, 4) > suggest_base_layers(4, 2));
  CHECK_THROWS_AS(suggest_base_layers(2, 1), DomainError);
}
