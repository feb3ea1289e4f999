#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wsample/conditioning.hpp"
#include "wsample/errors.hpp"
#include "wsample/polysys.hpp"
#include "wsample/rng.hpp"
#include "wsample/solver.hpp"
#include "wsample/tracker.hpp"
#include "wsample/witness.hpp"

#ifndef WSAMPLE_VERSION
#define WSAMPLE_VERSION "dev"
#endif

using namespace wsample;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

/// Comment header embedded in every output file. Only the timestamp line varies
/// between identical runs.
struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;

  std::vector<std::string> lines() const {
    std::ostringstream flags;
    for (std::size_t i = 0; i < args.size(); ++i) flags << (i ? " " : "") << args[i];
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream stamp;
    stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    return {"command: witness_sampler " + command, "flags: " + flags.str(), "seed: " + std::to_string(seed),
            "timestamp: " + stamp.str(), "version: " WSAMPLE_VERSION};
  }

  void write(std::ostream& out) const {
    for (const auto& line : lines()) out << "# " << line << '\n';
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  return out;
}

void close_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

PolySystem load_polysys(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_polysys(in);
}

struct TrackerFlags {
  double h = TrackerConfig{}.h0;
  double eps = TrackerConfig{}.eps;
  double delta = TrackerConfig{}.delta;
  double rho = TrackerConfig{}.rho;

  void add(CLI::App* app) {
    app->set_help_flag("--help", "print this help message and exit");
    app->add_option("--h", h, "initial step, a fraction of the move (0, 1]")->capture_default_str();
    app->add_option("--eps", eps, "corrector accuracy")->capture_default_str();
    app->add_option("--delta", delta, "a priori residual threshold")->capture_default_str();
    app->add_option("--rho", rho, "step reduction factor")->capture_default_str();
  }

  TrackerConfig config() const {
    TrackerConfig cfg;
    cfg.h0 = h;
    cfg.eps = eps;
    cfg.delta = delta;
    cfg.rho = rho;
    cfg.validate();
    return cfg;
  }
};


void write_stats(const std::string& path, const Manifest& manifest, const WitnessSet* moved,
                 const std::vector<PathStats>& stats) {
  auto out = open_output(path);
  manifest.write(out);
  out << "path,newton_iters,steps,rejected,final_residual,kappa_B,kappa_E\n";
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const PathStats& s = stats[i];
    double kb = std::nan(""), ke = std::nan("");
    if (moved) {
      kb = local_intrinsic_condition(moved->system, moved->points[i], moved->plane);
      ke = extrinsic_condition(moved->system, moved->points[i], moved->plane);
    }
    out << i << ',' << s.newton_iterations << ',' << s.steps_taken << ',' << s.steps_rejected << ','
        << s.final_residual << ',' << kb << ',' << ke << '\n';
  }
  close_output(out, path);
}

// generate

struct GenerateArgs {
  std::string out;
  int cols = 3;
  int n = 8;
  int d = 10;
  int t = 5;
  std::uint64_t seed = 1;
};

int run_generate(const std::string& family, const GenerateArgs& a, const Manifest& manifest) {
  PolySystem f;
  if (family == "minors") f = adjacent_minors(a.cols);
  else if (family == "cyclic") f = cyclic_roots(a.n);
  else f = random_sparse_hypersurface(a.n, a.d, a.t, a.seed);

  auto out = open_output(a.out);
  manifest.write(out);
  write_polysys(out, f);
  close_output(out, a.out);

  std::cout << "n " << f.num_vars() << " m " << f.num_equations() << '\n';
  if (family == "minors") std::cout << "expected witness degree " << (1LL << (a.cols - 1)) << '\n';
  return kOk;
}

// witness

struct WitnessArgs {
  std::string system;
  std::string out;
  int codim = 1;
  std::uint64_t seed = 1;
};

int run_witness(const WitnessArgs& a, const Manifest& manifest) {
  const PolySystem f = load_polysys(a.system);
  const GenerateResult r = witness_generate_report(f, a.codim, a.seed, TrackerConfig{});
  save_witness(r.witness, a.out, manifest.lines());
  std::cout << "degree " << r.witness.degree() << '\n';
  std::cout << "paths " << r.solve.paths.size() << " converged " << r.solve.count(PathStatus::converged)
            << " diverged " << r.solve.count(PathStatus::diverged) << " failed "
            << r.solve.count(PathStatus::failed) << '\n';
  if (r.rejected_residual || r.rejected_duplicate)
    std::cout << "rejected " << r.rejected_residual << " off the set, " << r.rejected_duplicate << " duplicates\n";
  std::map<std::string, int> reasons;
  for (const auto& p : r.solve.paths)
    if (p.status == PathStatus::failed) ++reasons[p.failure.substr(0, p.failure.find(" at t = "))];
  for (const auto& [reason, count] : reasons) std::cerr << count << " paths failed: " << reason << '\n';
  return kOk;
}

// sample

struct SampleArgs {
  std::string witness;
  std::string out;
  std::string stats;
  std::string mode = "local";
  std::uint64_t seed = 1;
  TrackerFlags tracker;
};

int run_sample(const SampleArgs& a, const Manifest& manifest) {
  const TrackMode mode = parse_track_mode(a.mode);
  const TrackerConfig cfg = a.tracker.config();
  const WitnessSet w = load_witness(a.witness);
  const AffinePlane target = random_plane(w.ambient_dim(), w.plane.dim(), a.seed);
  try {
    const MoveResult r = move_witness(w, target, cfg, mode);
    save_witness(r.moved, a.out, manifest.lines());
    if (!a.stats.empty()) write_stats(a.stats, manifest, &r.moved, r.stats);
    std::cout << "moved " << r.moved.degree() << " points (" << a.mode << ")\n";
    return kOk;
  } catch (const PathFailureError& e) {
    if (!a.stats.empty()) write_stats(a.stats, manifest, nullptr, e.stats());
    throw;
  }
}

// compare

struct CompareArgs {
  std::string witness;
  std::string out;
  int moves = 5;
  std::uint64_t seed = 1;
  TrackerFlags tracker;
};

struct ModeSummary {
  long long newton = 0;
  long long steps = 0;
  long long paths = 0;
  int failures = 0;
  double seconds = 0.0;
};

int run_compare(const CompareArgs& a, const Manifest& manifest) {
  if (a.moves < 0) throw InputError("--moves must be nonnegative");
  const TrackerConfig cfg = a.tracker.config();
  const WitnessSet w = load_witness(a.witness);
  const TrackMode modes[] = {TrackMode::local, TrackMode::global};
  ModeSummary summary[2];
  for (int m = 0; m < a.moves; ++m) {
    const AffinePlane target = random_plane(w.ambient_dim(), w.plane.dim(), derive_seed(a.seed, m));
    for (int i = 0; i < 2; ++i) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<PathStats> stats;
      try {
        stats = move_witness(w, target, cfg, modes[i]).stats;
      } catch (const PathFailureError& e) {
        stats = e.stats();
        ++summary[i].failures;
        std::cerr << "move " << m << " (" << to_string(modes[i]) << "): " << e.what() << '\n';
      }
      summary[i].seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (const auto& s : stats) {
        summary[i].newton += s.newton_iterations;
        summary[i].steps += s.steps_taken;
        ++summary[i].paths;
      }
    }
  }

  auto out = open_output(a.out);
  manifest.write(out);
  out << "mode,mean_newton_iters,mean_steps,failures,wall_time\n";
  for (int i = 0; a.moves > 0 && i < 2; ++i) {
    const auto& s = summary[i];
    const double paths = static_cast<double>(std::max<long long>(s.paths, 1));
    out << to_string(modes[i]) << ',' << static_cast<double>(s.newton) / paths << ','
        << static_cast<double>(s.steps) / paths << ',' << s.failures << ',' << s.seconds << '\n';
  }
  close_output(out, a.out);
  for (int i = 0; a.moves > 0 && i < 2; ++i)
    std::cout << to_string(modes[i]) << " mean newton iterations "
              << static_cast<double>(summary[i].newton) / static_cast<double>(std::max<long long>(summary[i].paths, 1))
              << '\n';
  return (summary[0].failures || summary[1].failures) ? kNumerical : kOk;
}

// condition

struct ConditionArgs {
  std::string out;
  int n = 10;
  int t = 5;
  std::vector<int> degrees{10, 20, 30, 40};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string balance = "scaling";
};

int run_condition(const ConditionArgs& a, const Manifest& manifest) {
  ConditionExperiment cfg;
  cfg.n = a.n;
  cfg.t = a.t;
  cfg.balance = parse_balance(a.balance);

  auto out = open_output(a.out);
  manifest.write(out);
  out << "# balance: " << to_string(cfg.balance) << "; local-shift: shift to the smallest-modulus nonzero root,"
      << " largest = root at 0, smallest = other roots\n";
  out << "seed,degree,regime,largest_inv_cond,smallest_inv_cond\n";
  std::vector<ConditionReport> all;
  int errors = 0;
  for (auto seed : a.seeds) {
    for (int d : a.degrees) {
      cfg.degrees = {d};
      try {
        const auto reports = run_condition_experiment(cfg, seed);
        if (!reports.empty()) out << "# seed " << seed << " degree " << d << ": " << reports[0].terms << " terms\n";
        for (const auto& r : reports) {
          out << seed << ',' << r.degree << ',' << to_string(r.regime) << ',' << r.largest_inverse_cond << ','
              << r.smallest_inverse_cond << '\n';
          all.push_back(r);
        }
      } catch (const std::runtime_error& e) {
        ++errors;
        out << "# seed " << seed << " degree " << d << ": " << e.what() << '\n';
        std::cerr << "seed " << seed << " degree " << d << ": " << e.what() << '\n';
      }
    }
  }
  close_output(out, a.out);

  const std::string table_path = a.out + ".table.csv";
  auto table = open_output(table_path);
  manifest.write(table);
  table << "# geometric means over seeds; ratios are origin / offset, spreads are largest / smallest\n";
  table << "degree,offset_largest,offset_smallest,origin_largest,origin_smallest,ratio_smallest,ratio_largest,"
        << "offset_spread,origin_spread\n";
  for (const auto& row : condition_table(all))
    table << row.degree << ',' << row.offset_largest << ',' << row.offset_smallest << ',' << row.origin_largest
          << ',' << row.origin_smallest << ',' << row.ratio_smallest << ',' << row.ratio_largest << ','
          << row.offset_spread << ',' << row.origin_spread << '\n';
  close_output(table, table_path);
  if (errors) std::cerr << errors << " rows skipped\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample positive-dimensional solution sets by moving witness sets."};
  app.require_subcommand(1);
  app.set_version_flag("--version", WSAMPLE_VERSION);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a benchmark system");
  generate->require_subcommand(1);
  auto* minors = generate->add_subcommand("minors", "adjacent 2x2 minors of a 2 x cols matrix");
  minors->add_option("--cols", gen.cols)->capture_default_str();
  auto* cyclic = generate->add_subcommand("cyclic", "cyclic n-roots");
  cyclic->add_option("--n", gen.n)->capture_default_str();
  auto* hyper = generate->add_subcommand("hypersurface", "random sparse hypersurface");
  hyper->add_option("--n", gen.n)->capture_default_str();
  hyper->add_option("--d", gen.d)->capture_default_str();
  hyper->add_option("--t", gen.t)->capture_default_str();
  hyper->add_option("--seed", gen.seed)->capture_default_str();
  for (auto* sub : {minors, cyclic, hyper}) sub->add_option("--out", gen.out, "output file")->required();

  WitnessArgs wit;
  auto* witness = app.add_subcommand("witness", "compute a witness set by total-degree homotopy");
  witness->add_option("--system", wit.system)->required();
  witness->add_option("--codim", wit.codim)->required();
  witness->add_option("--seed", wit.seed)->capture_default_str();
  witness->add_option("--out", wit.out)->required();

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "move a witness set to a random plane");
  sample->add_option("--witness", smp.witness)->required();
  sample->add_option("--seed", smp.seed)->capture_default_str();
  sample->add_option("--mode", smp.mode)->check(CLI::IsMember({"local", "global"}))->capture_default_str();
  smp.tracker.add(sample);
  sample->add_option("--out", smp.out)->required();
  sample->add_option("--stats", smp.stats, "per-path statistics CSV");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "paired plane moves in both modes");
  compare->add_option("--witness", cmp.witness)->required();
  compare->add_option("--moves", cmp.moves)->capture_default_str();
  compare->add_option("--seed", cmp.seed)->capture_default_str();
  cmp.tracker.add(compare);
  compare->add_option("--out", cmp.out)->required();

  ConditionArgs cnd;
  auto* condition = app.add_subcommand("condition", "root conditioning of univariate restrictions");
  condition->add_option("--n", cnd.n)->capture_default_str();
  condition->add_option("--degrees", cnd.degrees)->delimiter(',')->capture_default_str();
  condition->add_option("--t", cnd.t)->capture_default_str();
  condition->add_option("--seeds", cnd.seeds)->delimiter(',')->capture_default_str();
  condition->add_option("--balance", cnd.balance)->check(CLI::IsMember({"none", "scaling"}))->capture_default_str();
  condition->add_option("--out", cnd.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  Manifest manifest;
  for (int i = 2; i < argc; ++i) manifest.args.emplace_back(argv[i]);
  try {
    if (generate->parsed()) {
      const std::string family = minors->parsed() ? "minors" : cyclic->parsed() ? "cyclic" : "hypersurface";
      manifest.command = "generate " + family;
      manifest.seed = gen.seed;
      return run_generate(family, gen, manifest);
    }
    if (witness->parsed()) {
      manifest.command = "witness";
      manifest.seed = wit.seed;
      return run_witness(wit, manifest);
    }
    if (sample->parsed()) {
      manifest.command = "sample";
      manifest.seed = smp.seed;
      return run_sample(smp, manifest);
    }
    if (compare->parsed()) {
      manifest.command = "compare";
      manifest.seed = cmp.seed;
      return run_compare(cmp, manifest);
    }
    manifest.command = "condition";
    manifest.seed = cnd.seeds.empty() ? 0 : cnd.seeds.front();
    return run_condition(cnd, manifest);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
