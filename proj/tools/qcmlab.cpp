#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qcm/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::string fixture;
  std::size_t level = 0;
  std::vector<double> r;
  std::vector<double> p;
  std::vector<double> ratios;
  std::vector<std::string> words;
  std::vector<std::string> pieces;
  int window = 0;
  int l_start = 0;
  std::vector<std::size_t> sizes;
  double c = 1.0;
  std::size_t descent_budget = 0;
  int descent_iterations = 0;
  std::string output;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string kind;
};

struct Sub {
  CLI::App* app = nullptr;
  qcm::ExperimentKind kind{};
  bool is_validate = false;
  std::map<std::string, CLI::Option*> opts;
};

void add_common(Sub& s, Flags& f) {
  auto* a = s.app;
  s.opts["config"] = a->add_option("--config", f.config, "experiment config (JSON)");
  s.opts["output"] = a->add_option("--output", f.output, "directory for report files");
  s.opts["workers"] = a->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  s.opts["seed"] = a->add_option("--seed", f.seed, "seed for randomized parts");
}

void add_model(Sub& s, Flags& f, bool grid) {
  auto* a = s.app;
  s.opts["fixture"] = a->add_option("--fixture", f.fixture, "fixture name or IFS config path");
  s.opts["level"] = a->add_option("--level", f.level, "word length of the discretization");
  if (grid) s.opts["r"] = a->add_option("--r", f.r, "resolution grid, comma separated")->delimiter(',');
}

qcm::ExperimentConfig build_config(const Sub& s, const Flags& f) {
  qcm::ExperimentConfig c;
  if (s.opts.at("config")->count()) c = qcm::load_experiment_config(f.config);
  auto given = [&](const char* name) {
    auto it = s.opts.find(name);
    return it != s.opts.end() && it->second->count() > 0;
  };
  if (s.is_validate) {
    if (given("kind")) c.kind = qcm::parse_experiment_kind(f.kind);
  } else {
    c.kind = s.kind;
  }
  if (given("fixture")) c.fixture = f.fixture;
  if (given("level")) c.level = f.level;
  if (given("r")) c.r_grid = f.r;
  if (given("p")) {
    if (c.kind == qcm::ExperimentKind::counterexample || s.is_validate) c.p_values = f.p;
    if (c.kind != qcm::ExperimentKind::counterexample) {
      if (f.p.size() != 1) throw qcm::Error(qcm::ErrorKind::ConfigError, "--p takes one value here");
      c.p_override = f.p.front();
    }
  }
  if (given("ratios")) c.ratios = f.ratios;
  if (given("word")) {
    c.words.clear();
    for (const auto& w : f.words) c.words.push_back(qcm::parse_word(w));
  }
  if (given("piece")) {
    c.pieces.clear();
    for (const auto& p : f.pieces) c.pieces.push_back(qcm::parse_piece(p));
  }
  if (given("window")) c.window = f.window;
  if (given("l-start")) c.l_start = f.l_start;
  if (given("sizes")) c.family_sizes = f.sizes;
  if (given("c")) c.ratio_bound = f.c;
  if (given("descent-budget")) c.descent_budget = f.descent_budget;
  if (given("descent-iterations")) c.descent_iterations = f.descent_iterations;
  if (given("output")) c.output_dir = f.output;
  if (given("seed")) c.seed = f.seed;
  if (given("workers")) c.workers = f.workers;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcmlab: quasicentral modulus experiments on self-similar sets"};
  app.require_subcommand(1);
  Flags f;
  std::vector<Sub> subs;
  subs.reserve(9);

  auto make = [&](const char* name, const char* help, qcm::ExperimentKind kind) -> Sub& {
    subs.push_back(Sub{app.add_subcommand(name, help), kind, false, {}});
    add_common(subs.back(), f);
    return subs.back();
  };

  {
    Sub& s = make("dim", "Moran dimension of a fixture or ratio list", qcm::ExperimentKind::dim);
    add_model(s, f, false);
    s.opts["ratios"] = s.app->add_option("--ratios", f.ratios, "contraction ratios")->delimiter(',');
  }
  {
    Sub& s = make("words", "stopping sets or words of a given length", qcm::ExperimentKind::words);
    add_model(s, f, true);
  }
  {
    Sub& s = make("discretize", "dump the discretized model", qcm::ExperimentKind::discretize);
    add_model(s, f, false);
  }
  {
    Sub& s = make("estimate", "upper statistic and bound chain over an r grid",
                  qcm::ExperimentKind::estimate);
    add_model(s, f, true);
    s.opts["p"] = s.app->add_option("--p", f.p, "override p (default: Hausdorff dimension)");
    s.opts["descent-budget"] =
        s.app->add_option("--descent-budget", f.descent_budget, "extra directions for descent (0: off)");
    s.opts["descent-iterations"] =
        s.app->add_option("--descent-iterations", f.descent_iterations, "descent iteration cap");
  }
  {
    Sub& s = make("scaling", "cylinder pushforward scaling law", qcm::ExperimentKind::scaling);
    add_model(s, f, true);
    s.opts["p"] = s.app->add_option("--p", f.p, "override p");
    s.opts["word"] = s.app->add_option("--word", f.words, "cylinder word such as 1.2 (repeatable)");
  }
  {
    Sub& s = make("multiplicity", "multiplicity direct sums", qcm::ExperimentKind::multiplicity);
    add_model(s, f, true);
    s.opts["p"] = s.app->add_option("--p", f.p, "override p");
    s.opts["piece"] = s.app->add_option("--piece", f.pieces, "piece such as 1.2+3:2 (repeatable)");
  }
  {
    Sub& s = make("counterexample", "scan the S_l + T_m family", qcm::ExperimentKind::counterexample);
    s.opts["p"] = s.app->add_option("--p", f.p, "exponents, comma separated")->delimiter(',');
    s.opts["window"] = s.app->add_option("--window", f.window, "offsets d in [-window, window]");
    s.opts["l-start"] = s.app->add_option("--l-start", f.l_start, "first base index");
  }
  {
    Sub& s = make("lp4", "ratio-bounded diagonal families", qcm::ExperimentKind::lp4);
    add_model(s, f, true);
    s.opts["p"] = s.app->add_option("--p", f.p, "override p");
    s.opts["sizes"] = s.app->add_option("--sizes", f.sizes, "family sizes N_n")->delimiter(',');
    s.opts["c"] = s.app->add_option("--c", f.c, "ratio bound");
  }
  {
    Sub& s = make("validate", "report configuration problems without running",
                  qcm::ExperimentKind::estimate);
    s.is_validate = true;
    add_model(s, f, true);
    s.opts["kind"] = s.app->add_option("--kind", f.kind, "experiment kind");
    s.opts["p"] = s.app->add_option("--p", f.p, "override p");
  }

  CLI11_PARSE(app, argc, argv);

  for (const Sub& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      const qcm::ExperimentConfig config = build_config(s, f);
      if (s.is_validate) {
        const auto diags = qcm::validate(config);
        std::cout << qcm::format_diagnostics(diags);
        for (const auto& d : diags)
          if (d.severity == qcm::Severity::error) return 2;
        std::cout << "ok\n";
        return 0;
      }
      return qcm::run(config, std::cout, std::cerr);
    } catch (const qcm::Error& e) {
      std::cerr << e.what() << "\n";
      return qcm::exit_code_for(e.kind());
    }
  }
  return 1;
}
