// Command-line front end: mechanism specs in, tree dumps and CSV verdicts
// out.
//
// Exit codes: 0 success / all checks pass, 1 statistical failure, 2 usage
// error, 3 domain refusal (e.g. Grey's condition), 4 node-budget truncation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levygrow/cli_io.hpp"
#include "levygrow/suites.hpp"

namespace fs = std::filesystem;
using namespace levygrow;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitStatFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitTruncated = 4;

struct Cli {
  RunConfig cfg;
  bool newick = false;
  std::string suite;
  double colour_p = 0.5;
  std::string in_path;
};

void add_common(CLI::App* cmd, Cli& cli) {
  cmd->add_option("--mech", cli.cfg.mech_path, "mechanism spec file")
      ->required();
  cmd->add_option("--a", cli.cfg.a, "root immigration scale");
  cmd->add_option("--levels", cli.cfg.levels, "growth levels (increasing)")
      ->delimiter(',');
  cmd->add_option("--radius", cli.cfg.radius, "metric radius cap");
  cmd->add_option("--budget", cli.cfg.node_budget, "node budget per tree");
  cmd->add_option("--seed", cli.cfg.seed, "master seed (mandatory)")
      ->required();
  cmd->add_option("--reps", cli.cfg.reps, "replicate count");
  cmd->add_option("--out", cli.cfg.out_dir, "output directory");
  cmd->add_flag("--newick", cli.newick, "also export Newick files");
}

std::size_t frontier_nodes(const RealTree& t) {
  std::size_t n = 0;
  for (const auto& node : t.nodes)
    if (node.frontier) ++n;
  return n;
}

void write_tree(const fs::path& stem, const RealTree& t, bool newick) {
  write_text_file(stem.string() + ".tree", t.to_dump());
  if (newick) write_text_file(stem.string() + ".nwk", t.to_newick());
}

int cmd_sample(const Cli& cli) {
  if (cli.cfg.levels.size() != 1) {
    std::cerr << "sample needs exactly one level\n";
    return kExitUsage;
  }
  BranchingMechanism mech = mechanism_from_file(cli.cfg.mech_path);
  LevyFamilyParams params(mech, cli.cfg.a);
  fs::create_directories(cli.cfg.out_dir);
  nlohmann::json manifest = run_manifest(mech, cli.cfg);
  std::vector<std::size_t> frontier;
  int truncated = 0;
  for (int k = 0; k < cli.cfg.reps; ++k) {
    Rng rng = Rng::stream(cli.cfg.seed, static_cast<std::uint64_t>(k));
    try {
      RealTree t = sample_gw_real_forest(params, cli.cfg.levels[0], rng,
                                         cli.cfg.radius, cli.cfg.node_budget);
      write_tree(fs::path(cli.cfg.out_dir) / ("forest_" + std::to_string(k)),
                 t, cli.newick);
      frontier.push_back(frontier_nodes(t));
    } catch (const NumericError&) {
      ++truncated;
      frontier.push_back(0);
    }
  }
  manifest["frontier_counts"] = frontier;
  manifest["truncated_reps"] = truncated;
  write_text_file((fs::path(cli.cfg.out_dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");
  return truncated > 0 ? kExitTruncated : kExitPass;
}

int cmd_grow(const Cli& cli) {
  if (cli.cfg.levels.empty()) {
    std::cerr << "grow needs at least one level\n";
    return kExitUsage;
  }
  BranchingMechanism mech = mechanism_from_file(cli.cfg.mech_path);
  LevyFamilyParams params(mech, cli.cfg.a);
  fs::create_directories(cli.cfg.out_dir);
  nlohmann::json manifest = run_manifest(mech, cli.cfg);
  int truncated = 0;
  std::vector<std::size_t> frontier;
  for (int k = 0; k < cli.cfg.reps; ++k) {
    Rng rng = Rng::stream(cli.cfg.seed, static_cast<std::uint64_t>(k));
    fs::path dir = fs::path(cli.cfg.out_dir) / ("rep_" + std::to_string(k));
    fs::create_directories(dir);
    try {
      GrowthState st = grow(params, RealTree::point_tree(), cli.cfg.levels,
                            rng, cli.cfg.radius, cli.cfg.node_budget);
      write_text_file((dir / "state.json").string(),
                      state_to_json(st).dump(2) + "\n");
      for (std::size_t s = 0; s < st.levels.size(); ++s) {
        RealTree level = masked_subtree(
            st.forest, mask_after_step(st, static_cast<int>(s) + 1));
        write_tree(dir / ("level_" + std::to_string(s)), level, cli.newick);
      }
      frontier.push_back(frontier_nodes(st.forest));
    } catch (const NumericError&) {
      ++truncated;
      frontier.push_back(0);
    }
  }
  manifest["frontier_counts"] = frontier;
  manifest["truncated_reps"] = truncated;
  write_text_file((fs::path(cli.cfg.out_dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");
  return truncated > 0 ? kExitTruncated : kExitPass;
}

int cmd_colour(const Cli& cli) {
  BranchingMechanism mech = mechanism_from_file(cli.cfg.mech_path);
  if (cli.colour_p < 0 || cli.colour_p > 1) {
    std::cerr << "--p must lie in [0,1]\n";
    return kExitUsage;
  }
  RealTree t = RealTree::from_dump(read_text_file(cli.in_path));
  Rng rng = Rng::stream(cli.cfg.seed, 0);
  std::vector<int> black;
  for (int u : real_leaves(t))
    if (rng.uniform() < cli.colour_p) black.push_back(u);
  RealTree span = leaf_span(t, black);
  fs::create_directories(cli.cfg.out_dir);
  write_tree(fs::path(cli.cfg.out_dir) / "black", span, cli.newick);
  nlohmann::json manifest = run_manifest(mech, cli.cfg);
  manifest["input"] = cli.in_path;
  manifest["p"] = cli.colour_p;
  manifest["black_leaves"] = black.size();
  write_text_file((fs::path(cli.cfg.out_dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");
  return kExitPass;
}

int cmd_verify(const Cli& cli) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cli.suite) == names.end()) {
    std::cerr << "unknown suite: " << cli.suite << "\n";
    return kExitUsage;
  }
  BranchingMechanism mech = mechanism_from_file(cli.cfg.mech_path);
  LevyFamilyParams params(mech, cli.cfg.a);
  SuiteOptions opt;
  if (!cli.cfg.levels.empty()) opt.levels = cli.cfg.levels;
  opt.radius = cli.cfg.radius;
  opt.reps = cli.cfg.reps;
  opt.seed = cli.cfg.seed;
  opt.node_budget = cli.cfg.node_budget;
  std::vector<StatReport> reports = run_suite(cli.suite, params, opt);
  std::ostringstream csv;
  write_report_csv(csv, reports);
  fs::create_directories(cli.cfg.out_dir);
  write_text_file((fs::path(cli.cfg.out_dir) / "report.csv").string(),
                  csv.str());
  nlohmann::json manifest = run_manifest(mech, cli.cfg);
  manifest["suite"] = cli.suite;
  write_text_file((fs::path(cli.cfg.out_dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");
  bool failed = false;
  for (const auto& r : reports) {
    std::cout << r.name << ": " << verdict_name(r.verdict) << "\n";
    if (r.verdict == Verdict::kFail) failed = true;
  }
  return failed ? kExitStatFail : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton-Watson real forest growth and verification"};
  app.require_subcommand(1);
  Cli cli;

  CLI::App* c_sample =
      app.add_subcommand("sample", "sample real forests at one level");
  add_common(c_sample, cli);

  CLI::App* c_grow =
      app.add_subcommand("grow", "grow a forest through levels and persist it");
  add_common(c_grow, cli);

  CLI::App* c_colour =
      app.add_subcommand("colour", "colour leaves of a stored tree and span");
  add_common(c_colour, cli);
  c_colour->add_option("--in", cli.in_path, "stored tree dump")->required();
  c_colour->add_option("--p", cli.colour_p, "black-leaf probability");

  CLI::App* c_verify =
      app.add_subcommand("verify", "run a named verification suite");
  add_common(c_verify, cli);
  c_verify->add_option("--suite", cli.suite, "suite name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    cli.cfg.validate();
  } catch (const DomainError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (c_sample->parsed()) return cmd_sample(cli);
    if (c_grow->parsed()) return cmd_grow(cli);
    if (c_colour->parsed()) return cmd_colour(cli);
    return cmd_verify(cli);
  } catch (const DomainError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericError& e) {
    std::cerr << "truncated: " << e.what() << "\n";
    return kExitTruncated;
  }
}
