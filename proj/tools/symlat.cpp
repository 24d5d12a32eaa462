// Command-line front end for the experiment runners.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "symlat/experiments/config.hpp"
#include "symlat/experiments/ingest.hpp"
#include "symlat/experiments/runners.hpp"

namespace ex = symlat::experiments;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 1;
  std::string format = "both";
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "experiment config file")->required();
  sub->add_option("--seed", f.seed, "master seed (overrides experiment.seed)");
  sub->add_option("--out", f.out, "output directory (overrides output.dir)");
  sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--format", f.format, "csv, svg or both")->check(CLI::IsMember({"csv", "svg", "both"}));
}

void write_outputs(const ex::RunOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, contents] : out.files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << contents;
    std::cout << "wrote " << path.string() << '\n';
  }
}

int run(const CommonFlags& f, ex::ExperimentKind expected) {
  ex::ExperimentConfig cfg = ex::load_experiment(f.config);
  if (cfg.kind != expected)
    throw symlat::ConfigError(0, std::string("config describes a ") + ex::to_string(cfg.kind) +
                                     " experiment, expected " + ex::to_string(expected));
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  ex::RunOptions opt{f.jobs, ex::parse_format(f.format)};
  const ex::RunOutput out = ex::run_experiment(cfg, opt);
  if (!out.summary.empty()) std::cout << out.summary;
  write_outputs(out, cfg.out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symlat: subgroup lattice search for regression symmetries"};
  app.require_subcommand(1);

  CommonFlags power, recovery, compare, search;
  add_common(app.add_subcommand("power-curve", "rejection rates of both tests against n"), power);
  add_common(app.add_subcommand("group-recovery", "proportions of each estimated group against n"), recovery);
  add_common(app.add_subcommand("estimator-compare", "MSPE of estimators A, B and C"), compare);
  add_common(app.add_subcommand("search", "one annotated lattice search"), search);

  auto* ingest = app.add_subcommand("ingest-check", "validate a CSV or IDX dataset");
  std::string csv_path, idx_images, idx_labels;
  ingest->add_option("--csv", csv_path, "CSV file (header row, last column is the response)");
  ingest->add_option("--idx-images", idx_images, "IDX image file");
  ingest->add_option("--idx-labels", idx_labels, "IDX label file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("power-curve")) return run(power, ex::ExperimentKind::PowerCurve);
    if (app.got_subcommand("group-recovery")) return run(recovery, ex::ExperimentKind::GroupRecovery);
    if (app.got_subcommand("estimator-compare")) return run(compare, ex::ExperimentKind::EstimatorComparison);
    if (app.got_subcommand("search")) return run(search, ex::ExperimentKind::SingleSearch);
    if (app.got_subcommand("ingest-check")) {
      const bool use_csv = !csv_path.empty(), use_idx = !idx_images.empty() || !idx_labels.empty();
      if (use_csv == use_idx) throw symlat::ConfigError(0, "give either --csv or both --idx-images and --idx-labels");
      if (use_idx && (idx_images.empty() || idx_labels.empty()))
        throw symlat::ConfigError(0, "--idx-images and --idx-labels must be given together");
      const auto data = use_csv ? ex::read_csv_dataset(csv_path) : ex::read_idx_dataset(idx_images, idx_labels);
      const auto [lo, hi] = std::minmax_element(data.responses().begin(), data.responses().end());
      std::cout << "n = " << data.size() << "\nd = " << data.dim() << "\nresponse range = [" << *lo << ", " << *hi
                << "]\n";
      return 0;
    }
  } catch (const symlat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const symlat::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const symlat::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const symlat::DimensionMismatch& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
