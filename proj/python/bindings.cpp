#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "latticeperm/circuit.hpp"
#include "latticeperm/mixing.hpp"
#include "latticeperm/walk.hpp"

namespace py = pybind11;
using namespace latticeperm;

namespace {

LatticeShape shape_of(int dims, int side, int k) { return LatticeShape::make(dims, side, k); }

py::dict census_dict(int dims, int side, int k) {
  const RegionCensus census = region_census(shape_of(dims, side, k));
  const ColorClassCount classes = count_color_classes(shape_of(dims, side, k));
  py::dict out;
  out["b_safe"] = big_count_to_string(census.b_safe);
  out["b_coll"] = big_count_to_string(census.b_coll);
  out["b_ident"] = big_count_to_string(census.b_ident);
  out["d_size"] = big_count_to_string(census.d_size);
  out["coll_over_d"] = census.coll_over_d;
  out["fact_bound"] = census.fact_bound;
  out["color_classes"] = big_count_to_string(classes.exact);
  out["class_bound"] = classes.upper_bound;
  out["enumerated"] = census.enumerated;
  out["closed_form"] = census.closed_form;
  return out;
}

// Exact walk laboratory over one enumerable shape.
class ExactWalk {
 public:
  ExactWalk(int dims, int side, int k) : space_(shape_of(dims, side, k)) {}

  std::uint64_t num_states() const { return space_.num_states(); }
  std::uint64_t d_size() const { return space_.d_size(); }
  std::uint64_t canonical_start() const { return canonical_safe_state(space_.shape()); }
  std::string region(std::uint64_t state) const {
    return region_label_name(space_.region(state, 0));
  }

  std::vector<std::pair<int, double>> tv_trajectory(int t_max,
                                                    std::optional<std::uint64_t> start) const {
    const std::uint64_t x = start.value_or(canonical_safe_state(space_.shape()));
    std::vector<std::pair<int, double>> out;
    for (const TvPoint& p : exact_tv_trajectory(space_, x, t_max).points) {
      out.emplace_back(p.t, p.tv);
    }
    return out;
  }

  double spectral_norm_power(std::uint64_t seed) const {
    SpectralOptions options;
    if (seed != 0) options.seed = seed;
    return space_.spectral_norm_power(sandwich_sequence(), options).value;
  }
  double spectral_norm_dense() const { return space_.spectral_norm_dense(sandwich_sequence()); }

  py::list identities() const {
    py::list out;
    for (const IdentityCheck& check : space_.check_operator_identities()) {
      py::dict d;
      d["identity"] = check.identity;
      d["residual"] = check.residual;
      d["tolerance"] = check.tolerance;
      d["pass"] = check.pass;
      out.append(std::move(d));
    }
    return out;
  }

  py::dict collision(std::optional<std::uint64_t> start) const {
    const std::uint64_t x = start.value_or(canonical_safe_state(space_.shape()));
    const CollisionExact result = space_.collision_probability_exact(x);
    py::dict out;
    out["probability"] = result.probability;
    out["union_bound"] = result.union_bound;
    return out;
  }

  std::vector<double> push_forward(std::uint64_t state, int t) const {
    return space_.push_forward(state, alternation_walk(t)).values;
  }

 private:
  WalkSpace space_;
};

py::dict mc_tv_dict(int dims, int side, int k, int t, std::uint64_t samples, std::uint64_t seed,
                    int base_layers, int threads) {
  const LatticeShape shape = shape_of(dims, side, k);
  const std::uint64_t start = canonical_safe_state(shape);
  std::unique_ptr<TrajectorySampler> sampler;
  if (base_layers > 0) {
    sampler = make_circuit_sampler(shape, start, t, base_layers);
  } else {
    sampler = make_idealized_sampler(shape, start, alternation_walk(t));
  }
  const McTvResult mc = mc_tv_estimate(shape, *sampler, samples, seed, threads);
  py::dict out;
  out["tv"] = mc.tv;
  out["bias_bound"] = mc.bias_bound;
  out["sigma_bound"] = mc.sigma_bound;
  out["samples"] = mc.samples;
  out["distinct_seen"] = mc.distinct_seen;
  out["low_sample_warning"] = mc.low_sample_warning;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random reversible lattice circuits: exact walk laboratory and Monte Carlo";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);

  m.def("census", &census_dict, py::arg("dims"), py::arg("side"), py::arg("k"),
        "Exact region census and color-class counts.");
  m.def("predicted_depth", &predicted_depth, py::arg("dims"), py::arg("rounds"),
        py::arg("base_layers"));
  m.def("suggest_base_layers", &suggest_base_layers, py::arg("width"), py::arg("k"),
        py::arg("c") = 1.0);

  m.def(
      "build_circuit",
      [](int dims, int side, int rounds, int base_layers, std::uint64_t seed) {
        const CircuitSpec spec =
            build_lattice_circuit(dims, side, rounds, base_layers, StreamRng(seed));
        return circuit_to_json_string(spec, seed);
      },
      py::arg("dims"), py::arg("side"), py::arg("rounds"), py::arg("base_layers"),
      py::arg("seed"), "Sample a lattice circuit; returns its JSON document.");
  m.def(
      "circuit_depth",
      [](const std::string& text) { return circuit_from_json_string(text).depth(); },
      py::arg("circuit_json"));
  m.def(
      "apply_circuit",
      [](const std::string& text, int dims, int side, int k, std::uint64_t state, bool inverse) {
        CircuitSpec spec = circuit_from_json_string(text);
        if (inverse) spec = invert(spec);
        const LatticeShape shape = shape_of(dims, side, k);
        return apply_tuple(spec, BitLatticeTuple::from_packed(shape, state)).packed();
      },
      py::arg("circuit_json"), py::arg("dims"), py::arg("side"), py::arg("k"), py::arg("state"),
      py::arg("inverse") = false,
      "Tensor-apply a circuit to a packed tuple state (sites <= 63).");
  m.def(
      "render_state",
      [](int dims, int side, int k, std::uint64_t state) {
        return render_tuple(BitLatticeTuple::from_packed(shape_of(dims, side, k), state));
      },
      py::arg("dims"), py::arg("side"), py::arg("k"), py::arg("state"));

  m.def("mc_tv_estimate", &mc_tv_dict, py::arg("dims"), py::arg("side"), py::arg("k"),
        py::arg("t"), py::arg("samples"), py::arg("seed"), py::arg("base_layers") = 0,
        py::arg("threads") = 0,
        "Plug-in TV estimate from fresh idealized or circuit trajectories.");

  py::class_<ExactWalk>(m, "ExactWalk",
                        "Exact transition operators over one enumerable shape.")
      .def(py::init<int, int, int>(), py::arg("dims"), py::arg("side"), py::arg("k"))
      .def_property_readonly("num_states", &ExactWalk::num_states)
      .def_property_readonly("d_size", &ExactWalk::d_size)
      .def("canonical_start", &ExactWalk::canonical_start)
      .def("region", &ExactWalk::region, py::arg("state"))
      .def("tv_trajectory", &ExactWalk::tv_trajectory, py::arg("t_max"),
           py::arg("start") = std::nullopt)
      .def("spectral_norm_power", &ExactWalk::spectral_norm_power, py::arg("seed") = 0)
      .def("spectral_norm_dense", &ExactWalk::spectral_norm_dense)
      .def("identities", &ExactWalk::identities)
      .def("collision", &ExactWalk::collision, py::arg("start") = std::nullopt)
      .def("push_forward", &ExactWalk::push_forward, py::arg("state"), py::arg("t"));
}
