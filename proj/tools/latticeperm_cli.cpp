// latticeperm: census, spectral, mixing, depth, and simulate experiments
// over random reversible lattice circuits and their idealized walks.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latticeperm/circuit.hpp"
#include "latticeperm/lattice.hpp"
#include "latticeperm/mixing.hpp"
#include "latticeperm/walk.hpp"

namespace {

using nlohmann::json;
using namespace latticeperm;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCapacity = 2;
constexpr int kExitViolation = 3;

struct CommonOptions {
  int dims = 2;
  int side = 2;
  int k = 2;
  int t = 1;
  int t_max = 4;
  int base_layers = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string format = "csv";
  bool invert_flag = false;
};

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

// One tabular result: CSV is the frozen schema, JSON mirrors it plus metadata.
class Table {
 public:
  Table(std::string command, std::string config, std::uint64_t seed,
        std::vector<std::string> columns)
      : command_(std::move(command)),
        config_(std::move(config)),
        seed_(seed),
        columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  void write(const std::string& path, const std::string& format) const {
    std::ostringstream body;
    if (format == "json") {
      json doc;
      doc["meta"] = {{"tool", "latticeperm"},
                     {"version", kVersion},
                     {"command", command_},
                     {"seed", seed_},
                     {"config", config_},
                     {"config_hash", fnv1a(config_)}};
      json rows = json::array();
      for (const auto& row : rows_) {
        json obj;
        for (std::size_t c = 0; c < columns_.size(); ++c) obj[columns_[c]] = row[c];
        rows.push_back(std::move(obj));
      }
      doc["rows"] = std::move(rows);
      body << doc.dump(2) << "\n";
    } else {
      body << "# latticeperm v" << kVersion << " cmd=" << command_ << " seed=" << seed_
           << " config_hash=" << fnv1a(config_) << "\n";
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        body << (c ? "," : "") << columns_[c];
      }
      body << "\n";
      for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) body << (c ? "," : "") << row[c];
        body << "\n";
      }
    }
    if (path.empty()) {
      std::cout << body.str();
    } else {
      std::ofstream file(path, std::ios::binary);
      file << body.str();
    }
  }

 private:
  std::string command_;
  std::string config_;
  std::uint64_t seed_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string config_line(const std::string& command, const CommonOptions& opt) {
  std::ostringstream os;
  os << command << " dims=" << opt.dims << " side=" << opt.side << " k=" << opt.k
     << " t=" << opt.t << " t_max=" << opt.t_max << " base_layers=" << opt.base_layers
     << " samples=" << opt.samples << " seed=" << opt.seed << " invert=" << opt.invert_flag;
  return os.str();
}

int run_census(const CommonOptions& opt) {
  const LatticeShape shape = LatticeShape::make(opt.dims, opt.side, opt.k);
  const RegionCensus census = region_census(shape, kDefaultEnumerationBits, opt.threads);
  const ColorClassCount classes = count_color_classes(shape);
  Table table("census", config_line("census", opt), opt.seed,
              {"b_safe", "b_coll", "b_ident", "d_size", "coll_over_d", "fact_bound",
               "color_classes", "class_bound", "enumerated", "closed_form"});
  table.add_row({big_count_to_string(census.b_safe), big_count_to_string(census.b_coll),
                 big_count_to_string(census.b_ident), big_count_to_string(census.d_size),
                 format_double(census.coll_over_d), format_double(census.fact_bound),
                 big_count_to_string(classes.exact), format_double(classes.upper_bound),
                 census.enumerated ? "1" : "0", census.closed_form ? "1" : "0"});
  table.write(opt.out, opt.format);
  if (census.coll_over_d > census.fact_bound) return kExitViolation;
  return kExitOk;
}

int run_spectral(const CommonOptions& opt) {
  const LatticeShape shape = LatticeShape::make(opt.dims, opt.side, opt.k);
  const WalkSpace space(shape);
  const auto seq = sandwich_sequence();

  Table table("spectral", config_line("spectral", opt), opt.seed,
              {"identity", "shape", "residual", "tolerance", "pass"});
  std::ostringstream shape_name;
  shape_name << "d" << opt.dims << "s" << opt.side << "k" << opt.k;

  bool all_pass = true;
  SpectralOptions options;
  options.seed = opt.seed == 0 ? SpectralOptions{}.seed : opt.seed;
  const SpectralResult power = space.spectral_norm_power(seq, options);
  table.add_row({"spectral_norm_power", shape_name.str(), format_double(power.value), "", "1"});
  if (space.num_states() <= (1ull << 12)) {
    const double dense = space.spectral_norm_dense(seq);
    const double delta = std::abs(power.value - dense);
    const bool pass = delta <= 1e-8;
    all_pass = all_pass && pass;
    table.add_row({"spectral_norm_dense", shape_name.str(), format_double(dense), "",
                   pass ? "1" : "0"});
    table.add_row({"oracle_delta", shape_name.str(), format_double(delta), "1e-08",
                   pass ? "1" : "0"});
    for (const IdentityCheck& check : space.check_operator_identities()) {
      all_pass = all_pass && check.pass;
      table.add_row({check.identity, shape_name.str(), format_double(check.residual),
                     format_double(check.tolerance), check.pass ? "1" : "0"});
    }
  }
  table.write(opt.out, opt.format);
  return all_pass ? kExitOk : kExitViolation;
}

int run_mixing(const CommonOptions& opt) {
  const LatticeShape shape = LatticeShape::make(opt.dims, opt.side, opt.k);
  const std::uint64_t start = canonical_safe_state(shape);
  const bool exact_possible = shape.enumerable();
  if (!exact_possible && opt.samples == 0) {
    throw CapacityError("shape exceeds exact enumeration; pass --samples for Monte Carlo");
  }

  Table table("mixing", config_line("mixing", opt), opt.seed,
              {"kind", "t", "tv", "bias_bound", "sigma_bound", "low_sample_warning"});
  bool monotone = true;
  if (exact_possible) {
    const WalkSpace space(shape);
    const TvTrajectory trajectory = exact_tv_trajectory(space, start, opt.t_max);
    monotone = trajectory.nonincreasing();
    for (const TvPoint& point : trajectory.points) {
      table.add_row({"exact", std::to_string(point.t), format_double(point.tv), "", "", ""});
    }
  }
  if (opt.samples > 0) {
    for (int t = 0; t <= opt.t_max; ++t) {
      std::unique_ptr<TrajectorySampler> sampler;
      if (opt.base_layers > 0) {
        sampler = make_circuit_sampler(shape, start, t, opt.base_layers);
      } else {
        sampler = make_idealized_sampler(shape, start, alternation_walk(t));
      }
      const McTvResult mc = mc_tv_estimate(shape, *sampler, opt.samples,
                                           opt.seed + static_cast<std::uint64_t>(t), opt.threads);
      table.add_row({opt.base_layers > 0 ? "mc_circuit" : "mc_idealized", std::to_string(t),
                     format_double(mc.tv), format_double(mc.bias_bound),
                     format_double(mc.sigma_bound), mc.low_sample_warning ? "1" : "0"});
    }
  }
  table.write(opt.out, opt.format);
  return monotone ? kExitOk : kExitViolation;
}

int run_depth(const CommonOptions& opt) {
  const int base = opt.base_layers > 0 ? opt.base_layers : 5;
  Table table("depth", config_line("depth", opt), opt.seed,
              {"dims", "t", "base_layers", "constructed", "predicted"});
  bool all_match = true;
  for (int dims = 2; dims <= opt.dims; ++dims) {
    for (int t = 0; t <= opt.t_max; ++t) {
      const CircuitSpec circuit =
          build_lattice_circuit(dims, opt.side, t, base, StreamRng(opt.seed));
      const std::uint64_t constructed = circuit.depth();
      const std::uint64_t predicted = predicted_depth(dims, t, base);
      all_match = all_match && constructed == predicted;
      table.add_row({std::to_string(dims), std::to_string(t), std::to_string(base),
                     std::to_string(constructed), std::to_string(predicted)});
    }
  }
  table.write(opt.out, opt.format);
  return all_match ? kExitOk : kExitViolation;
}

BitLatticeTuple parse_state_line(const std::string& line, const LatticeShape& shape) {
  BitLatticeTuple tuple(shape);
  std::uint64_t site = 0;
  int member = 0;
  for (char c : line) {
    if (c == '|') {
      if (site != shape.n) throw DomainError("short member in state line");
      site = 0;
      ++member;
      continue;
    }
    if (c != '+' && c != '-') throw DomainError("state characters must be '+' or '-'");
    if (member >= shape.k || site >= shape.n) throw DomainError("state line too long");
    tuple.set(site * static_cast<std::uint64_t>(shape.k) + static_cast<std::uint64_t>(member),
              c == '+');
    ++site;
  }
  if (member != shape.k - 1 || site != shape.n) throw DomainError("state line too short");
  return tuple;
}

std::string state_to_line(const BitLatticeTuple& tuple) {
  const LatticeShape& shape = tuple.shape();
  std::string line;
  for (int m = 0; m < shape.k; ++m) {
    if (m > 0) line.push_back('|');
    for (std::uint64_t site = 0; site < shape.n; ++site) {
      line.push_back(
          tuple.get(site * static_cast<std::uint64_t>(shape.k) + static_cast<std::uint64_t>(m))
              ? '+'
              : '-');
    }
  }
  return line;
}

int run_simulate(const CommonOptions& opt) {
  const LatticeShape shape = LatticeShape::make(opt.dims, opt.side, opt.k);
  CircuitSpec circuit =
      build_lattice_circuit(opt.dims, opt.side, opt.t,
                            opt.base_layers > 0 ? opt.base_layers : 2, StreamRng(opt.seed));
  if (opt.invert_flag) circuit = invert(circuit);

  std::ostringstream body;
  body << "# latticeperm v" << kVersion << " cmd=simulate seed=" << opt.seed
       << " config_hash=" << fnv1a(config_line("simulate", opt)) << "\n";
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty() || line[0] == '#') continue;
    const BitLatticeTuple input = parse_state_line(line, shape);
    body << state_to_line(apply_tuple(circuit, input)) << "\n";
  }
  if (opt.out.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream file(opt.out, std::ios::binary);
    file << body.str();
  }
  return kExitOk;
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_invert = false) {
  cmd->add_option("--dims", opt.dims, "Lattice dimension D");
  cmd->add_option("--side", opt.side, "Lattice side length");
  cmd->add_option("--k", opt.k, "Tuple arity");
  cmd->add_option("--t", opt.t, "Alternation rounds");
  cmd->add_option("--t-max", opt.t_max, "Largest t in sweeps");
  cmd->add_option("--base-layers", opt.base_layers, "1-D base circuit layers (0 = default)");
  cmd->add_option("--samples", opt.samples, "Monte Carlo sample count (0 = exact only)");
  cmd->add_option("--seed", opt.seed, "Random seed")->envname("LATTICEPERM_SEED");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = hardware)");
  cmd->add_option("--out", opt.out, "Output path (default stdout)");
  cmd->add_option("--format", opt.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  if (with_invert) cmd->add_flag("--invert", opt.invert_flag, "Apply the inverse circuit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random reversible lattice circuits: exact walk laboratory and Monte Carlo"};
  app.require_subcommand(1);
  CommonOptions opt;

  CLI::App* census = app.add_subcommand(
      "census", "Exact region census and color-class counts.\n"
                "CSV: b_safe,b_coll,b_ident,d_size,coll_over_d,fact_bound,"
                "color_classes,class_bound,enumerated,closed_form");
  add_common_flags(census, opt);
  CLI::App* spectral = app.add_subcommand(
      "spectral", "Spectral norm of the row-column-row vs global difference, "
                  "plus operator identity checks.\n"
                  "CSV: identity,shape,residual,tolerance,pass");
  add_common_flags(spectral, opt);
  CLI::App* mixing = app.add_subcommand(
      "mixing", "Exact and/or Monte Carlo TV trajectories from a canonical "
                "all-distinct start.\n"
                "CSV: kind,t,tv,bias_bound,sigma_bound,low_sample_warning\n"
                "--samples > 0 adds Monte Carlo rows; --base-layers > 0 switches "
                "them from idealized resampling to real circuits.");
  add_common_flags(mixing, opt);
  CLI::App* depth = app.add_subcommand(
      "depth", "Constructed vs predicted circuit depth over dims <= D, t <= t-max.\n"
               "CSV: dims,t,base_layers,constructed,predicted");
  add_common_flags(depth, opt);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Apply a seeded circuit to states read from stdin.\n"
                  "States are '+'/'-' strings, members separated by '|'; "
                  "'#' lines are ignored.");
  add_common_flags(simulate, opt, /*with_invert=*/true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (census->parsed()) return run_census(opt);
    if (spectral->parsed()) return run_spectral(opt);
    if (mixing->parsed()) return run_mixing(opt);
    if (depth->parsed()) return run_depth(opt);
    if (simulate->parsed()) return run_simulate(opt);
    return kExitUsage;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitViolation;
  }
}
