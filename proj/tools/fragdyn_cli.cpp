// fragdyn: config-driven experiments, exact oracles, plots and gate tables.
//
//   fragdyn simulate --config run.cfg --out results/ [--seed N] [--resume] [--threads K]
//   fragdyn plot --csv identity.csv --x L --y p --x-axis cbrt --y-axis neg_ln --fit --out fig.svg
//   fragdyn table-dump --model bs
//
// Exit codes: 0 success, 2 invalid config or input, 3 budget exceeded, 1 other.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fragdyn/config.hpp"
#include "fragdyn/gate_table.hpp"
#include "fragdyn/plot.hpp"
#include "fragdyn/runner.hpp"

namespace {

using namespace fragdyn;

struct ExperimentArgs {
  std::string config, out = "fragdyn_out";
  std::optional<std::uint64_t> seed;
  bool resume = false;
  unsigned threads = 1;
};

int run_subcommand(const std::string& name, const ExperimentArgs& a) {
  std::ifstream f(a.config);
  if (!f) throw Error(Errc::InvalidConfig, "cannot read config " + a.config);
  std::stringstream ss;
  ss << f.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str());
  if (!kind_matches(name, cfg.kind()))
    throw Error(Errc::InvalidConfig, "kind '" + cfg.kind() + "' cannot run under '" + name + "'");
  if (a.seed) cfg.values["seed"] = std::to_string(*a.seed);

  RunOptions opt{a.out, std::max(1u, a.threads), a.resume};
  auto t0 = std::chrono::steady_clock::now();
  RunOutcome r = run_experiment(cfg, opt);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json rec = summary_record(cfg, r, wall, opt.threads);
  std::ofstream log(opt.out_dir / "summary.jsonl", std::ios::app);
  log << rec.dump() << '\n';
  std::cout << rec["results"].dump(2) << '\n';
  return 0;
}

int exit_code(Errc c) {
  switch (c) {
    case Errc::InvalidConfig:
    case Errc::ResumeMismatch:
    case Errc::SchemaMismatch:
    case Errc::UnknownSymbol:
      return 2;
    case Errc::BudgetExceeded: return 3;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fragmented group-word dynamics: simulation, exact oracles and figure data"};
  app.require_subcommand(1);

  ExperimentArgs args;
  for (const char* name : {"simulate", "oracle", "geometry", "motzkin", "scan"}) {
    auto* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment from a config file");
    sub->add_option("--config", args.config, "key = value experiment file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "root seed, overrides the config");
    sub->add_option("--out", args.out, "output directory");
    sub->add_flag("--resume", args.resume, "continue from checkpoints in the output directory");
    sub->add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
  }

  PlotSpec plot;
  std::string csv, svg = "plot.svg", x_axis, y_axis;
  auto* p = app.add_subcommand("plot", "render a CSV column pair as SVG");
  p->add_option("--csv", csv)->required();
  p->add_option("--x", plot.x)->required();
  p->add_option("--y", plot.y)->required();
  p->add_option("--x-axis", x_axis, "linear | cbrt | log2 | neg_ln");
  p->add_option("--y-axis", y_axis, "linear | cbrt | log2 | neg_ln");
  p->add_flag("--fit", plot.fit, "least-squares guide line");
  p->add_option("--title", plot.title);
  p->add_option("--out", svg);

  std::string table_model = "bs", table_out;
  auto* t = app.add_subcommand("table-dump", "print the window class table of a model");
  t->add_option("--model", table_model, "bs | itbs | star | chiral | pairflip");
  t->add_option("--out", table_out, "CSV path, stdout when omitted");

  CLI11_PARSE(app, argc, argv);

  try {
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "plot") {
      plot.x_axis = parse_axis(x_axis);
      plot.y_axis = parse_axis(y_axis);
      emit_plot(csv, plot, svg);
      return 0;
    }
    if (name == "table-dump") {
      ModelId m = parse_model(table_model);
      std::string text = table_csv(build_table(m), presentation(m).alphabet);
      if (table_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(table_out);
        f << text;
      }
      return 0;
    }
    return run_subcommand(name, args);
  } catch (const Error& e) {
    std::cerr << "fragdyn: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "fragdyn: " << e.what() << '\n';
    return 1;
  }
}
