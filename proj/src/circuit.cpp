#include "latticeperm/circuit.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace latticeperm {

using nlohmann::json;

Gate3 Gate3::inverted() const {
  Gate3 out;
  out.wires = wires;
  for (int i = 0; i < 8; ++i) out.table[table[static_cast<std::size_t>(i)]] = static_cast<std::uint8_t>(i);
  return out;
}

Gate3 sample_gate(StreamRng& rng, const std::array<int, 3>& wires) {
  Gate3 gate;
  gate.wires = wires;
  for (int i = 0; i < 8; ++i) gate.table[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  for (int i = 7; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(gate.table[static_cast<std::size_t>(i)], gate.table[j]);
  }
  return gate;
}

std::uint64_t CircuitSpec::depth() const {
  switch (kind) {
    case Kind::Base1D:
      return layers.size();
    case Kind::AxisParallel: {
      std::uint64_t deepest = 0;
      for (const auto& child : children) deepest = std::max(deepest, child.depth());
      return deepest;
    }
    case Kind::Sequence: {
      std::uint64_t total = 0;
      for (const auto& child : children) total += child.depth();
      return total;
    }
  }
  return 0;
}

CircuitSpec build_brickwork_1d(int width, int layers, StreamRng rng) {
  if (width < 3) throw DomainError("brickwork needs at least 3 wires");
  if (layers < 1) throw DomainError("brickwork needs at least 1 layer");
  CircuitSpec spec;
  spec.kind = CircuitSpec::Kind::Base1D;
  spec.width = width;
  spec.layers.resize(static_cast<std::size_t>(layers));
  for (int layer = 0; layer < layers; ++layer) {
    const int offset = layer % 2;
    for (int w = offset; w + 2 < width; w += 3) {
      spec.layers[static_cast<std::size_t>(layer)].push_back(
          sample_gate(rng, {w, w + 1, w + 2}));
    }
  }
  return spec;
}

namespace {

std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Independent 1-D brickworks along every axis-0 line of a `view_dims`
// dimensional view, expressed by peeling trailing axes.
CircuitSpec lines_along_axis0(int view_dims, int side, int layers, StreamRng rng) {
  if (view_dims == 1) return build_brickwork_1d(side, layers, rng);
  CircuitSpec spec;
  spec.kind = CircuitSpec::Kind::AxisParallel;
  spec.axis = view_dims - 1;
  spec.children.reserve(static_cast<std::size_t>(side));
  for (int i = 0; i < side; ++i) {
    spec.children.push_back(lines_along_axis0(view_dims - 1, side,
                                              layers, rng.split(static_cast<std::uint64_t>(i))));
  }
  return spec;
}

CircuitSpec build_level(int level_dims, int side, int rounds, int base_layers, StreamRng rng) {
  const int layer_count = 2 * rounds + 1;
  const std::uint64_t column_layers =
      ipow(static_cast<std::uint64_t>(layer_count), level_dims - 2) *
      static_cast<std::uint64_t>(base_layers);
  CircuitSpec seq;
  seq.kind = CircuitSpec::Kind::Sequence;
  seq.children.reserve(static_cast<std::size_t>(layer_count));
  for (int layer = 0; layer < layer_count; ++layer) {
    StreamRng layer_rng = rng.split(static_cast<std::uint64_t>(layer));
    if (layer % 2 == 0) {
      CircuitSpec parallel;
      parallel.kind = CircuitSpec::Kind::AxisParallel;
      parallel.axis = 0;
      parallel.children.reserve(static_cast<std::size_t>(side));
      for (int i = 0; i < side; ++i) {
        StreamRng child_rng = layer_rng.split(static_cast<std::uint64_t>(i));
        if (level_dims == 2) {
          parallel.children.push_back(build_brickwork_1d(side, base_layers, child_rng));
        } else {
          parallel.children.push_back(
              build_level(level_dims - 1, side, rounds, base_layers, child_rng));
        }
      }
      seq.children.push_back(std::move(parallel));
    } else {
      seq.children.push_back(lines_along_axis0(level_dims, side,
                                               static_cast<int>(column_layers), layer_rng));
    }
  }
  return seq;
}

}  // namespace

CircuitSpec build_lattice_circuit(int dims, int side, int rounds, int base_layers,
                                  StreamRng rng) {
  if (dims < 2) throw DomainError("lattice circuits need dims >= 2");
  if (rounds < 0) throw DomainError("rounds must be >= 0");
  if (base_layers < 1) throw DomainError("base_layers must be >= 1");
  return build_level(dims, side, rounds, base_layers, rng);
}

std::uint64_t predicted_depth(int dims, int rounds, int base_layers) {
  if (dims < 2) throw DomainError("depth prediction needs dims >= 2");
  return ipow(static_cast<std::uint64_t>(2 * rounds + 1), dims - 1) *
         static_cast<std::uint64_t>(base_layers);
}

int suggest_base_layers(int width, int k, double c) {
  if (width < 3 || k < 1 || c <= 0.0) throw DomainError("bad base-layer parameters");
  return static_cast<int>(std::ceil(c * width * (k + std::log2(static_cast<double>(width)))));
}

CircuitSpec invert(const CircuitSpec& circuit) {
  CircuitSpec out;
  out.kind = circuit.kind;
  switch (circuit.kind) {
    case CircuitSpec::Kind::Base1D: {
      out.width = circuit.width;
      out.layers.reserve(circuit.layers.size());
      for (auto it = circuit.layers.rbegin(); it != circuit.layers.rend(); ++it) {
        std::vector<Gate3> layer;
        layer.reserve(it->size());
        for (const Gate3& gate : *it) layer.push_back(gate.inverted());
        out.layers.push_back(std::move(layer));
      }
      return out;
    }
    case CircuitSpec::Kind::AxisParallel: {
      out.axis = circuit.axis;
      out.children.reserve(circuit.children.size());
      for (const auto& child : circuit.children) out.children.push_back(invert(child));
      return out;
    }
    case CircuitSpec::Kind::Sequence: {
      out.children.reserve(circuit.children.size());
      for (auto it = circuit.children.rbegin(); it != circuit.children.rend(); ++it) {
        out.children.push_back(invert(*it));
      }
      return out;
    }
  }
  return out;
}

void CompiledCircuit::resample_tables(StreamRng& rng) {
  for (auto& table : gate_tables) {
    for (int i = 0; i < 8; ++i) table[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    for (int i = 7; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(table[static_cast<std::size_t>(i)], table[j]);
    }
  }
}

std::uint64_t CompiledCircuit::apply_packed(std::uint64_t state, int k, int member) const {
  const auto kk = static_cast<std::uint64_t>(k);
  const auto mm = static_cast<std::uint64_t>(member);
  for (std::size_t g = 0; g < gate_sites.size(); ++g) {
    const auto& sites = gate_sites[g];
    const std::uint64_t p0 = sites[0] * kk + mm;
    const std::uint64_t p1 = sites[1] * kk + mm;
    const std::uint64_t p2 = sites[2] * kk + mm;
    const unsigned idx = static_cast<unsigned>((state >> p0) & 1ull) |
                         (static_cast<unsigned>((state >> p1) & 1ull) << 1) |
                         (static_cast<unsigned>((state >> p2) & 1ull) << 2);
    const unsigned out = gate_tables[g][idx];
    state &= ~((1ull << p0) | (1ull << p1) | (1ull << p2));
    state |= (static_cast<std::uint64_t>(out & 1u) << p0) |
             (static_cast<std::uint64_t>((out >> 1) & 1u) << p1) |
             (static_cast<std::uint64_t>((out >> 2) & 1u) << p2);
  }
  return state;
}

void CompiledCircuit::apply_member(BitLatticeTuple& tuple, int member) const {
  const int k = tuple.shape().k;
  for (std::size_t g = 0; g < gate_sites.size(); ++g) {
    const auto& sites = gate_sites[g];
    const std::uint64_t p0 =
        static_cast<std::uint64_t>(sites[0]) * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(member);
    const std::uint64_t p1 =
        static_cast<std::uint64_t>(sites[1]) * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(member);
    const std::uint64_t p2 =
        static_cast<std::uint64_t>(sites[2]) * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(member);
    const unsigned idx = static_cast<unsigned>(tuple.get(p0)) |
                         (static_cast<unsigned>(tuple.get(p1)) << 1) |
                         (static_cast<unsigned>(tuple.get(p2)) << 2);
    const unsigned out = gate_tables[g][idx];
    tuple.set(p0, (out & 1u) != 0);
    tuple.set(p1, ((out >> 1) & 1u) != 0);
    tuple.set(p2, ((out >> 2) & 1u) != 0);
  }
}

namespace {

void check_gate(const Gate3& gate, int width) {
  if (gate.wires[0] == gate.wires[1] || gate.wires[0] == gate.wires[2] ||
      gate.wires[1] == gate.wires[2]) {
    throw DomainError("gate wires must be distinct");
  }
  for (int w : gate.wires) {
    if (w < 0 || w >= width) throw DomainError("gate wire out of range");
  }
  std::array<bool, 8> seen{};
  for (std::uint8_t v : gate.table) {
    if (v >= 8 || seen[v]) throw DomainError("gate table must be a bijection on [0,8)");
    seen[v] = true;
  }
}

void flatten(const CircuitSpec& node, const std::vector<std::uint32_t>& sites, int view_dims,
             int side, CompiledCircuit& out) {
  switch (node.kind) {
    case CircuitSpec::Kind::Base1D: {
      if (static_cast<std::uint64_t>(node.width) != sites.size()) {
        throw DomainError("base circuit width does not match its slice");
      }
      for (const auto& layer : node.layers) {
        std::vector<bool> used(sites.size(), false);
        for (const Gate3& gate : layer) {
          check_gate(gate, node.width);
          for (int w : gate.wires) {
            if (used[static_cast<std::size_t>(w)]) {
              throw DomainError("wire used twice within a layer");
            }
            used[static_cast<std::size_t>(w)] = true;
          }
          out.gate_sites.push_back({sites[static_cast<std::size_t>(gate.wires[0])],
                                    sites[static_cast<std::size_t>(gate.wires[1])],
                                    sites[static_cast<std::size_t>(gate.wires[2])]});
          out.gate_tables.push_back(gate.table);
        }
      }
      return;
    }
    case CircuitSpec::Kind::AxisParallel: {
      if (view_dims < 1) throw DomainError("axis-parallel node on a 0-dimensional view");
      if (node.axis < 0 || node.axis >= view_dims) throw DomainError("axis out of range");
      if (static_cast<int>(node.children.size()) != side) {
        throw DomainError("axis-parallel node needs one child per slice");
      }
      const std::uint64_t sub_count = sites.size() / static_cast<std::uint64_t>(side);
      std::vector<std::uint32_t> sub(sub_count);
      for (int i = 0; i < side; ++i) {
        for (std::uint64_t p = 0; p < sub_count; ++p) {
          // Insert slice index i at position `axis` of p's row-major coords.
          std::uint64_t lead = p, trail = 0, trail_scale = 1;
          for (int d = view_dims - 1; d > node.axis; --d) {
            trail += (lead % static_cast<std::uint64_t>(side)) * trail_scale;
            trail_scale *= static_cast<std::uint64_t>(side);
            lead /= static_cast<std::uint64_t>(side);
          }
          const std::uint64_t flat =
              (lead * static_cast<std::uint64_t>(side) + static_cast<std::uint64_t>(i)) * trail_scale +
              trail;
          sub[p] = sites[flat];
        }
        flatten(node.children[static_cast<std::size_t>(i)], sub, view_dims - 1, side, out);
      }
      return;
    }
    case CircuitSpec::Kind::Sequence: {
      for (const auto& child : node.children) flatten(child, sites, view_dims, side, out);
      return;
    }
  }
}

}  // namespace

CompiledCircuit compile(const CircuitSpec& circuit, int dims, int side) {
  if (dims < 1 || side < 1) throw DomainError("compile needs dims >= 1 and side >= 1");
  std::uint64_t n = 1;
  for (int d = 0; d < dims; ++d) n *= static_cast<std::uint64_t>(side);
  std::vector<std::uint32_t> sites(n);
  for (std::uint64_t i = 0; i < n; ++i) sites[i] = static_cast<std::uint32_t>(i);
  CompiledCircuit out;
  out.lattice_sites = n;
  flatten(circuit, sites, dims, side, out);
  return out;
}

BitLatticeTuple apply_tuple(const CircuitSpec& circuit, const BitLatticeTuple& input) {
  const LatticeShape& shape = input.shape();
  const CompiledCircuit compiled = compile(circuit, shape.dims, shape.side);
  BitLatticeTuple out = input;
  for (int m = 0; m < shape.k; ++m) compiled.apply_member(out, m);
  return out;
}

namespace {

json gate_to_json(const Gate3& gate) {
  return json{{"wires", gate.wires}, {"table", gate.table}};
}

Gate3 gate_from_json(const json& j) {
  Gate3 gate;
  const auto& wires = j.at("wires");
  const auto& table = j.at("table");
  if (wires.size() != 3 || table.size() != 8) throw DomainError("malformed gate record");
  for (std::size_t i = 0; i < 3; ++i) gate.wires[i] = wires[i].get<int>();
  for (std::size_t i = 0; i < 8; ++i) gate.table[i] = table[i].get<std::uint8_t>();
  return gate;
}

json node_to_json(const CircuitSpec& node) {
  switch (node.kind) {
    case CircuitSpec::Kind::Base1D: {
      json layers = json::array();
      for (const auto& layer : node.layers) {
        json gates = json::array();
        for (const Gate3& gate : layer) gates.push_back(gate_to_json(gate));
        layers.push_back(std::move(gates));
      }
      return json{{"kind", "base1d"}, {"width", node.width}, {"layers", std::move(layers)}};
    }
    case CircuitSpec::Kind::AxisParallel: {
      json children = json::array();
      for (const auto& child : node.children) children.push_back(node_to_json(child));
      return json{{"kind", "axis_parallel"}, {"axis", node.axis}, {"children", std::move(children)}};
    }
    case CircuitSpec::Kind::Sequence: {
      json children = json::array();
      for (const auto& child : node.children) children.push_back(node_to_json(child));
      return json{{"kind", "sequence"}, {"children", std::move(children)}};
    }
  }
  throw DomainError("unknown circuit node kind");
}

CircuitSpec node_from_json(const json& j) {
  CircuitSpec node;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "base1d") {
    node.kind = CircuitSpec::Kind::Base1D;
    node.width = j.at("width").get<int>();
    for (const auto& layer : j.at("layers")) {
      std::vector<Gate3> gates;
      for (const auto& gate : layer) gates.push_back(gate_from_json(gate));
      node.layers.push_back(std::move(gates));
    }
  } else if (kind == "axis_parallel") {
    node.kind = CircuitSpec::Kind::AxisParallel;
    node.axis = j.at("axis").get<int>();
    for (const auto& child : j.at("children")) node.children.push_back(node_from_json(child));
  } else if (kind == "sequence") {
    node.kind = CircuitSpec::Kind::Sequence;
    for (const auto& child : j.at("children")) node.children.push_back(node_from_json(child));
  } else {
    throw DomainError("unknown circuit node kind: " + kind);
  }
  return node;
}

}  // namespace

std::string circuit_to_json_string(const CircuitSpec& circuit, std::optional<std::uint64_t> seed,
                                   int indent) {
  json doc{{"format", "latticeperm-circuit"}, {"version", 1}, {"circuit", node_to_json(circuit)}};
  if (seed) doc["seed"] = *seed;
  return doc.dump(indent);
}

CircuitSpec circuit_from_json_string(std::string_view text) {
  const json doc = json::parse(text);
  if (doc.at("format").get<std::string>() != "latticeperm-circuit" ||
      doc.at("version").get<int>() != 1) {
    throw DomainError("unsupported circuit document");
  }
  return node_from_json(doc.at("circuit"));
}

}  // namespace latticeperm
