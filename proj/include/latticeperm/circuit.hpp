#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latticeperm/lattice.hpp"
#include "latticeperm/rng.hpp"

namespace latticeperm {

// A reversible 3-bit gate: an arbitrary permutation of the 8 input states,
// wired to three distinct wires. Bit j of the table index carries wire j.
struct Gate3 {
  std::array<int, 3> wires{};
  std::array<std::uint8_t, 8> table{};

  Gate3 inverted() const;
  bool operator==(const Gate3&) const = default;
};

// Table drawn uniformly from all 8! permutations via Fisher-Yates.
Gate3 sample_gate(StreamRng& rng, const std::array<int, 3>& wires);

// Tree-structured circuit description.
//   Base1D:       brickwork layers of non-overlapping gates on `width` wires.
//   AxisParallel: `side` independent sub-circuits, one per slice along `axis`
//                 of the current view; each child acts on a view with that
//                 axis removed.
//   Sequence:     children applied in order.
struct CircuitSpec {
  enum class Kind { Base1D, AxisParallel, Sequence };

  Kind kind = Kind::Sequence;
  int width = 0;                          // Base1D
  std::vector<std::vector<Gate3>> layers; // Base1D
  int axis = -1;                          // AxisParallel
  std::vector<CircuitSpec> children;      // AxisParallel / Sequence

  // Base1D counts its layers; AxisParallel takes the max over children;
  // Sequence sums.
  std::uint64_t depth() const;

  bool operator==(const CircuitSpec&) const = default;
};

// Brickwork: even layers tile wires (3i, 3i+1, 3i+2), odd layers shift by
// one wire; boundary wires without a full triple idle.
CircuitSpec build_brickwork_1d(int width, int layers, StreamRng rng);

// The alternating lattice construction: 2*rounds+1 axis layers starting and
// ending with slice circuits along axis 0. For dims == 2 the layers are
// per-row / per-column brickworks; above that, axis-0 layers recurse one
// dimension down and the interleaved column layers run 1-D brickworks along
// every axis-0 line, deepened to the depth of the recursive layers so all
// 2*rounds+1 layers are slot-synchronized.
CircuitSpec build_lattice_circuit(int dims, int side, int rounds, int base_layers,
                                  StreamRng rng);

// (2*rounds+1)^(dims-1) * base_layers; equals the constructed depth exactly.
std::uint64_t predicted_depth(int dims, int rounds, int base_layers);

// Heuristic stand-in for a mixing-quality base depth:
// ceil(c * width * (k + log2(width))).
int suggest_base_layers(int width, int k, double c = 1.0);

CircuitSpec invert(const CircuitSpec& circuit);

// Execution-ready form: gates in application order with absolute lattice
// site indices. Tables can be resampled in place for fresh-circuit sweeps
// over a fixed architecture.
struct CompiledCircuit {
  std::uint64_t lattice_sites = 0;
  std::vector<std::array<std::uint32_t, 3>> gate_sites;
  std::vector<std::array<std::uint8_t, 8>> gate_tables;

  std::size_t gate_count() const { return gate_sites.size(); }
  void resample_tables(StreamRng& rng);
  // Acts on member `member` of a packed tuple state (sites() <= 63).
  std::uint64_t apply_packed(std::uint64_t state, int k, int member) const;
  void apply_member(BitLatticeTuple& tuple, int member) const;
};

// Flattens and structurally validates the tree against a dims-dimensional
// lattice of the given side: distinct in-range wires, bijective tables,
// wire-disjoint layers, and child counts matching slice counts.
CompiledCircuit compile(const CircuitSpec& circuit, int dims, int side);

// The k-fold tensor action: the same circuit applied to every member.
BitLatticeTuple apply_tuple(const CircuitSpec& circuit, const BitLatticeTuple& input);

// Versioned JSON round-trip; `seed` is carried as provenance when given.
std::string circuit_to_json_string(const CircuitSpec& circuit,
                                   std::optional<std::uint64_t> seed = std::nullopt,
                                   int indent = -1);
CircuitSpec circuit_from_json_string(std::string_view text);

}  // namespace latticeperm
