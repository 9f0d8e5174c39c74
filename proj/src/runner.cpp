#include "qcm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "qcm/conjecture_probe.hpp"
#include "qcm/format.hpp"
#include "qcm/modulus_lab.hpp"

namespace qcm {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kScalingTolerance = 1e-9;
constexpr double kPartitionTolerance = 1e-12;
constexpr double kValidationEnumerationCap = 1e6;

bool needs_model_p(ExperimentKind k) {
  return k == ExperimentKind::estimate || k == ExperimentKind::scaling ||
         k == ExperimentKind::multiplicity || k == ExperimentKind::lp4;
}

bool needs_fixture(const ExperimentConfig& c) {
  if (c.kind == ExperimentKind::counterexample) return false;
  if (c.kind == ExperimentKind::dim && !c.ratios.empty()) return false;
  return true;
}

// An empty grid means {2, 4, 8, 16, 32} cut down to the resolutions the
// model level supports.
std::vector<double> effective_grid(const ExperimentConfig& c) {
  std::vector<double> g = c.r_grid;
  if (g.empty() && c.kind != ExperimentKind::words) {
    try {
      const Ifs ifs = resolve_ifs(c.fixture);
      for (double r : {2.0, 4.0, 8.0, 16.0, 32.0})
        if (stopping_depth(ifs, r) <= c.level) g.push_back(r);
    } catch (const Error&) {
    }
    if (g.empty()) g = {1.0};
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

std::string word_str(std::span<const Letter> letters) {
  if (letters.empty()) return "()";
  std::string s;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(letters[i]);
  }
  return s;
}

class Verdicts {
 public:
  void check(const std::string& name, const std::string& context, double value, double bound,
             bool pass) {
    invariants_.push_back({{"name", name},
                           {"context", context},
                           {"pass", pass},
                           {"value", value},
                           {"bound", bound},
                           {"slack", bound - value}});
    passed_ = passed_ && pass;
  }
  void fail(const std::string& name, const std::string& context, const std::string& detail) {
    invariants_.push_back({{"name", name}, {"context", context}, {"pass", false}, {"detail", detail}});
    passed_ = false;
  }
  void norm(const std::string& context, double p, NormMode mode, double value, std::int64_t rank) {
    norms_.push_back({{"context", context},
                      {"p", p},
                      {"mode", std::string(to_string(mode))},
                      {"value", value},
                      {"rank", rank}});
  }
  void measure(const std::string& name, const std::string& context, ojson data) {
    data["name"] = name;
    data["context"] = context;
    measurements_.push_back(std::move(data));
  }
  bool passed() const { return passed_; }

  std::string dump(const ExperimentConfig& c, const ojson& extra) const {
    ojson j;
    j["schema"] = "qcm-summary v1";
    j["kind"] = std::string(to_string(c.kind));
    j["fixture"] = c.fixture;
    j["seed"] = c.seed;
    j["passed"] = passed_;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    j["invariants"] = invariants_;
    j["norms"] = norms_;
    j["measurements"] = measurements_;
    return j.dump(2) + "\n";
  }

 private:
  ojson invariants_ = ojson::array();
  ojson norms_ = ojson::array();
  ojson measurements_ = ojson::array();
  bool passed_ = true;
};

// Runs job(i) for i < n on `workers` threads; the first failure in index order
// is rethrown after all jobs finish.
void parallel_jobs(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    try {
      job(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double model_p(const ExperimentConfig& c, const Ifs& ifs) {
  return c.p_override.value_or(ifs.hausdorff_dim());
}

struct Outcome {
  std::vector<Artifact> artifacts;
  std::string summary;
  bool passed = true;
};

Outcome run_dim(const ExperimentConfig& c) {
  Verdicts v;
  double p = 0.0;
  ojson extra;
  if (!c.ratios.empty()) {
    p = moran_dimension(c.ratios);
    extra["ratios"] = c.ratios;
  } else {
    const Ifs ifs = resolve_ifs(c.fixture);
    p = ifs.hausdorff_dim();
    extra["ratios"] = ifs.ratios();
  }
  const auto ratios = extra["ratios"].get<std::vector<double>>();
  double moran = 0.0;
  for (double r : ratios) moran += std::pow(r, p);
  v.check("moran_equation", "sum ratio^p = 1", std::abs(moran - 1.0), 1e-12,
          std::abs(moran - 1.0) <= 1e-12);
  extra["dimension"] = p;
  return {{{"dim.txt", fmt_double(p) + "\n"}}, v.dump(c, extra), v.passed()};
}

Outcome run_words(const ExperimentConfig& c) {
  const Ifs ifs = resolve_ifs(c.fixture);
  Verdicts v;
  std::ostringstream os;
  os << "# qcm-words v1\nr,word,ratio,weight\n";
  if (c.r_grid.empty()) {
    const auto words = words_of_length(ifs, c.level);
    double total = 0.0;
    for (const auto& w : words) {
      os << ',' << w.str() << ',' << fmt_double(w.ratio_product) << ',' << fmt_double(w.measure_weight)
         << '\n';
      total += w.measure_weight;
    }
    const double err = std::abs(total - 1.0);
    v.check("partition_identity", "level " + std::to_string(c.level), err, kPartitionTolerance,
            err <= kPartitionTolerance);
  } else {
    for (double r : effective_grid(c)) {
      const StoppingSet omega = stopping_set(ifs, r);
      double total = 0.0;
      for (const auto& w : omega.words) {
        os << fmt_double(r) << ',' << w.str() << ',' << fmt_double(w.ratio_product) << ','
           << fmt_double(w.measure_weight) << '\n';
        total += w.measure_weight;
      }
      const std::string ctx = "r=" + fmt_double(r);
      const double err = std::abs(total - 1.0);
      v.check("partition_identity", ctx, err, kPartitionTolerance, err <= kPartitionTolerance);
      const double card = static_cast<double>(omega.words.size());
      const double bound = std::pow(r / ifs.min_ratio(), ifs.hausdorff_dim());
      v.check("cardinality_bound", ctx, card, bound, card <= bound);
    }
  }
  return {{{"words.csv", os.str()}}, v.dump(c, {}), v.passed()};
}

Outcome run_discretize(const ExperimentConfig& c) {
  const Ifs ifs = resolve_ifs(c.fixture);
  const DiscretizedModel model = discretize(ifs, c.level);
  Verdicts v;
  const double err = std::abs(model.total_weight() - 1.0);
  v.check("total_weight", "level " + std::to_string(c.level), err, kPartitionTolerance,
          err <= kPartitionTolerance);
  ojson extra;
  extra["level"] = c.level;
  extra["dim"] = model.dim();
  return {{{"model.csv", model_csv(model)}}, v.dump(c, extra), v.passed()};
}

struct EstimateJob {
  bool chain_ok = true;
  std::string chain_error;
  ModulusStatistic st;
  bool has_descent = false;
  DescentResult descent;
};

Outcome run_estimate(const ExperimentConfig& c) {
  const Ifs ifs = resolve_ifs(c.fixture);
  const double p = model_p(c, ifs);
  const DiscretizedModel model = discretize(ifs, c.level);
  const auto grid = effective_grid(c);
  std::vector<EstimateJob> jobs(grid.size());

  parallel_jobs(grid.size(), c.workers, [&](std::size_t i) {
    EstimateJob& job = jobs[i];
    try {
      job.st = upper_statistic(model, grid[i], p);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BoundChainViolation) throw;
      job.chain_ok = false;
      job.chain_error = e.what();
      return;
    }
    if (c.descent_budget > 0) {
      DescentOptions opts;
      opts.seed = c.seed + i;
      opts.max_iterations = c.descent_iterations;
      job.descent = descent_refine(model, voiculescu_projection(model, grid[i]), p, c.descent_budget,
                                   opts);
      job.has_descent = true;
    }
  });

  Verdicts v;
  const double up = 1.0 + 1e-9;
  const double diam = diameter_bound(ifs);
  const double literal_c = explicit_constant(p, ifs.min_ratio(), 1.0);
  std::ostringstream os;
  os << "# qcm-report v1\nfixture,level,r,rank,sup_norm,u_lorentz,u_tilde,bound_rank,bound_count,"
        "bound_const,ratio_to_base\n";
  double base_tilde = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string ctx = "r=" + fmt_double(grid[i]);
    const EstimateJob& job = jobs[i];
    if (!job.chain_ok) {
      v.fail("bound_chain", ctx, job.chain_error);
      continue;
    }
    const ModulusStatistic& st = job.st;
    if (base_tilde == 0.0) base_tilde = st.u_tilde;
    const auto& b = st.bound_chain;
    v.check("sup_norm <= 2 diam/r", ctx, st.sup_norm, st.sup_bound, st.sup_norm <= st.sup_bound * up);
    v.check("rank <= 2 rank(P_r)", ctx, static_cast<double>(st.commutator_rank),
            2.0 * static_cast<double>(st.rank),
            st.commutator_rank <= 2 * static_cast<std::int64_t>(st.rank));
    v.check("u_lorentz <= rank bound", ctx, st.u_lorentz, b.rank_bound,
            st.u_lorentz <= b.rank_bound * up);
    v.check("rank bound <= counting bound", ctx, b.rank_bound, b.count_bound,
            b.rank_bound <= b.count_bound * up);
    if (st.const_bound_applicable)
      v.check("counting bound <= constant bound", ctx, b.count_bound, b.const_bound,
              b.count_bound <= b.const_bound * up);
    v.measure("counting bound vs C without diam", ctx,
              {{"count_bound", b.count_bound},
               {"literal_constant", literal_c},
               {"within", b.count_bound <= literal_c * up}});
    v.norm(ctx + " coordinate max", p, NormMode::lorentz_p1, st.u_lorentz, st.commutator_rank);
    v.norm(ctx + " tilde", p, NormMode::lorentz_p1, st.u_tilde, st.commutator_rank);
    v.norm(ctx + " coordinate max", p, NormMode::operator_sup, st.sup_norm, st.commutator_rank);
    if (job.has_descent) {
      const DescentResult& d = job.descent;
      const bool monotone = std::is_sorted(d.trace.rbegin(), d.trace.rend());
      v.check("descent <= seed", ctx, d.value, st.u_lorentz, d.value <= st.u_lorentz);
      v.check("descent trace monotone", ctx, monotone ? 0.0 : 1.0, 0.0, monotone);
      v.measure("descent", ctx,
                {{"initial", d.initial_value},
                 {"value", d.value},
                 {"iterations", d.iterations},
                 {"evaluations", d.evaluations}});
    }
    os << c.fixture << ',' << c.level << ',' << fmt_double(grid[i]) << ',' << st.rank << ','
       << fmt_double(st.sup_norm) << ',' << fmt_double(st.u_lorentz) << ','
       << fmt_double(st.u_tilde) << ',' << fmt_double(b.rank_bound) << ','
       << fmt_double(b.count_bound) << ','
       << (st.const_bound_applicable ? fmt_double(b.const_bound) : std::string()) << ','
       << fmt_double(st.u_tilde / base_tilde) << '\n';
  }
  ojson extra;
  extra["level"] = c.level;
  extra["p"] = p;
  extra["diam_bound"] = diam;
  extra["normalization"] = jobs.empty() || !jobs.front().chain_ok ? std::string()
                                                                  : jobs.front().st.normalization_note;
  return {{{"report.csv", os.str()}}, v.dump(c, extra), v.passed()};
}

Outcome run_scaling(const ExperimentConfig& c) {
  const Ifs ifs = resolve_ifs(c.fixture);
  const double p = model_p(c, ifs);
  const auto grid = effective_grid(c);
  const std::size_t n = c.words.size() * grid.size();
  std::vector<ScalingReport> reps(n);
  parallel_jobs(n, c.workers, [&](std::size_t i) {
    reps[i] = scaling_experiment(ifs, c.words[i / grid.size()], c.level, grid[i % grid.size()], p);
  });
  Verdicts v;
  std::ostringstream os;
  os << "# qcm-scaling v1\nfixture,word,level,r,p,base_tilde,pushed_tilde,ratio,expected,rel_error\n";
  for (const auto& r : reps) {
    const std::string ctx = "w=" + word_str(r.word) + " r=" + fmt_double(r.r);
    v.check(r.degenerate ? "both statistics vanish" : "ratio = lambda_w", ctx, r.rel_error,
            kScalingTolerance, r.rel_error <= kScalingTolerance);
    v.norm(ctx + " base tilde", p, NormMode::lorentz_p1, r.base_tilde, 0);
    os << c.fixture << ',' << word_str(r.word) << ',' << r.level << ',' << fmt_double(r.r) << ','
       << fmt_double(r.p) << ',' << fmt_double(r.base_tilde) << ',' << fmt_double(r.pushed_tilde)
       << ',' << fmt_double(r.ratio) << ',' << fmt_double(r.expected) << ','
       << fmt_double(r.rel_error) << '\n';
  }
  ojson extra;
  extra["level"] = c.level;
  extra["p"] = p;
  return {{{"scaling.csv", os.str()}}, v.dump(c, extra), v.passed()};
}

Outcome run_multiplicity(const ExperimentConfig& c) {
  const Ifs ifs = resolve_ifs(c.fixture);
  const double p = model_p(c, ifs);
  const DiscretizedModel model = discretize(ifs, c.level);
  const MultiplicityAssignment assignment{c.pieces};
  const auto grid = effective_grid(c);
  std::vector<MultiplicityReport> reps(grid.size());
  parallel_jobs(grid.size(), c.workers,
                [&](std::size_t i) { reps[i] = multiplicity_experiment(model, assignment, grid[i], p); });
  Verdicts v;
  std::ostringstream os;
  os << "# qcm-multiplicity v1\nfixture,level,r,dim,statistic,statistic_pow_p,integral_proxy,"
        "block_max,block_sum\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = reps[i];
    const std::string ctx = "r=" + fmt_double(grid[i]);
    v.check("block max <= statistic", ctx, r.block_max, r.statistic,
            r.block_max <= r.statistic * (1.0 + 1e-9));
    v.check("statistic <= block sum", ctx, r.statistic, r.block_sum,
            r.statistic <= r.block_sum * (1.0 + 1e-9));
    v.norm(ctx + " tilde", p, NormMode::lorentz_p1, r.statistic, 0);
    os << c.fixture << ',' << c.level << ',' << fmt_double(grid[i]) << ',' << r.dim << ','
       << fmt_double(r.statistic) << ',' << fmt_double(r.statistic_pow_p) << ','
       << fmt_double(r.integral_proxy) << ',' << fmt_double(r.block_max) << ','
       << fmt_double(r.block_sum) << '\n';
  }
  ojson extra;
  extra["level"] = c.level;
  extra["p"] = p;
  return {{{"multiplicity.csv", os.str()}}, v.dump(c, extra), v.passed()};
}

Outcome run_counterexample(const ExperimentConfig& c) {
  std::vector<Lp3Report> reps(c.p_values.size());
  Lp3Options opts;
  opts.d_min = -c.window;
  opts.d_max = c.window;
  opts.l_start = c.l_start;
  parallel_jobs(reps.size(), c.workers, [&](std::size_t i) { reps[i] = lp3_scan(c.p_values[i], opts); });

  Verdicts v;
  auto verdict = [](const Lp3Report& r) {
    ojson j;
    j["counterexample_confirmed"] = r.counterexample_confirmed;
    j["p"] = r.p;
    j["rhs"] = r.rhs;
    j["min_value"] = r.asymptotic_min;
    j["argmin"] = r.argmin;
    j["argmin_l"] = r.argmin_l;
    j["margin"] = r.margin;
    return j;
  };
  ojson out;
  bool all = true;
  for (const auto& r : reps) {
    v.check("lp3 margin > 0", "p=" + fmt_double(r.p), 0.0, r.margin, r.margin > 0.0);
    v.norm("p=" + fmt_double(r.p) + " min over window", r.p, NormMode::lorentz_p1, r.asymptotic_min,
           0);
    all = all && r.counterexample_confirmed;
  }
  if (reps.size() == 1) {
    out = verdict(reps.front());
  } else {
    out["counterexample_confirmed"] = all;
    out["results"] = ojson::array();
    for (const auto& r : reps) out["results"].push_back(verdict(r));
  }
  out["note"] = kConvexCombinationNote;
  ojson extra;
  extra["window"] = c.window;
  extra["note"] = kConvexCombinationNote;
  return {{{"counterexample.json", out.dump(2) + "\n"}, {"lp3.csv", lp3_csv(reps)}},
          v.dump(c, extra),
          v.passed()};
}

Outcome run_lp4(const ExperimentConfig& c) {
  const Ifs ifs = resolve_ifs(c.fixture);
  const double p = model_p(c, ifs);
  const DiscretizedModel model = discretize(ifs, c.level);
  const double r = effective_grid(c).front();
  std::vector<std::vector<double>> families;
  for (std::size_t n : c.family_sizes) families.push_back(uniform_family(p, n));
  const Lp4Report rep = lp4_family_check(p, tensor_diag_statistic(model, r, p), families, c.ratio_bound);
  Verdicts v;
  for (const auto& row : rep.rows) {
    const std::string ctx = "N=" + std::to_string(row.size);
    v.check("min a * stat(1) <= stat(a)", ctx, row.lower, row.statistic,
            row.lower <= row.statistic * (1.0 + 1e-9));
    v.check("stat(a) <= max a * stat(1)", ctx, row.statistic, row.upper,
            row.statistic <= row.upper * (1.0 + 1e-9));
    v.measure("ratio to base", ctx, {{"ratio", row.ratio_to_base}, {"n_pow", row.n_pow}});
  }
  ojson extra;
  extra["level"] = c.level;
  extra["p"] = p;
  extra["r"] = r;
  return {{{"lp4.csv", lp4_csv(rep)}}, v.dump(c, extra), v.passed()};
}

std::optional<std::string> validate_grid(const ExperimentConfig& c, const Ifs& ifs, double r) {
  if (!(r >= 1.0) || !std::isfinite(r)) return "r must be a finite value >= 1, got " + fmt_double(r);
  if (std::pow(r / ifs.min_ratio(), ifs.hausdorff_dim()) > kValidationEnumerationCap)
    return "r = " + fmt_double(r) + " gives too many stopping cells";
  if (c.kind != ExperimentKind::words) {
    const std::size_t depth = stopping_depth(ifs, r);
    if (depth > c.level)
      return "r = " + fmt_double(r) + " needs words of length " + std::to_string(depth) +
             ", deeper than level " + std::to_string(c.level);
  }
  return std::nullopt;
}

void validate_letters(std::vector<Diagnostic>& out, const std::string& field, const Ifs& ifs,
                      std::span<const Letter> letters) {
  for (Letter l : letters)
    if (l < 1 || l > ifs.size()) {
      out.push_back({Severity::error, field,
                     "letter " + std::to_string(l) + " outside 1.." + std::to_string(ifs.size())});
      return;
    }
}

template <class T>
T get_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string_view to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::dim: return "dim";
    case ExperimentKind::words: return "words";
    case ExperimentKind::discretize: return "discretize";
    case ExperimentKind::estimate: return "estimate";
    case ExperimentKind::scaling: return "scaling";
    case ExperimentKind::multiplicity: return "multiplicity";
    case ExperimentKind::counterexample: return "counterexample";
    case ExperimentKind::lp4: return "lp4";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::dim, ExperimentKind::words, ExperimentKind::discretize,
                 ExperimentKind::estimate, ExperimentKind::scaling, ExperimentKind::multiplicity,
                 ExperimentKind::counterexample, ExperimentKind::lp4})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::ConfigError, "unknown experiment kind '" + std::string(s) + "'");
}

int exit_code_for(ErrorKind kind) noexcept {
  if (kind == ErrorKind::ConfigError) return 2;
  if (kind == ErrorKind::InvariantFailure || kind == ErrorKind::BoundChainViolation) return 3;
  if (is_resource_cap(kind)) return 4;
  return 1;
}

std::vector<Letter> parse_word(std::string_view text) {
  std::vector<Letter> out;
  if (text.empty() || text == "()") return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dot = std::min(text.find('.', pos), text.size());
    const std::string part(text.substr(pos, dot - pos));
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size() || v < 1 || v > 65535)
      throw Error(ErrorKind::ConfigError, "bad word '" + std::string(text) + "'");
    out.push_back(static_cast<Letter>(v));
    pos = dot + 1;
  }
  return out;
}

MultiplicityPiece parse_piece(std::string_view text) {
  MultiplicityPiece piece;
  const std::size_t colon = text.rfind(':');
  std::string_view prefixes = text;
  if (colon != std::string_view::npos) {
    prefixes = text.substr(0, colon);
    const std::string k(text.substr(colon + 1));
    std::size_t used = 0;
    try {
      piece.multiplicity = std::stoi(k, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (k.empty() || used != k.size())
      throw Error(ErrorKind::ConfigError, "bad multiplicity in piece '" + std::string(text) + "'");
  }
  std::size_t pos = 0;
  while (pos <= prefixes.size()) {
    const std::size_t plus = std::min(prefixes.find('+', pos), prefixes.size());
    piece.prefixes.push_back(parse_word(prefixes.substr(pos, plus - pos)));
    pos = plus + 1;
  }
  return piece;
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "experiment config must be an object");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "kind") c.kind = parse_experiment_kind(get_field<std::string>(j, "kind"));
    else if (k == "fixture") c.fixture = get_field<std::string>(j, "fixture");
    else if (k == "level") c.level = get_field<std::size_t>(j, "level");
    else if (k == "r") c.r_grid = it->is_array() ? get_field<std::vector<double>>(j, "r")
                                                 : std::vector<double>{get_field<double>(j, "r")};
    else if (k == "p") c.p_override = get_field<double>(j, "p");
    else if (k == "ratios") c.ratios = get_field<std::vector<double>>(j, "ratios");
    else if (k == "words") {
      c.words.clear();
      for (const auto& w : get_field<std::vector<std::string>>(j, "words")) c.words.push_back(parse_word(w));
    } else if (k == "pieces") {
      c.pieces.clear();
      for (const auto& s : get_field<std::vector<std::string>>(j, "pieces")) c.pieces.push_back(parse_piece(s));
    } else if (k == "p_values") c.p_values = get_field<std::vector<double>>(j, "p_values");
    else if (k == "window") c.window = get_field<int>(j, "window");
    else if (k == "l_start") c.l_start = get_field<int>(j, "l_start");
    else if (k == "family_sizes") c.family_sizes = get_field<std::vector<std::size_t>>(j, "family_sizes");
    else if (k == "ratio_bound") c.ratio_bound = get_field<double>(j, "ratio_bound");
    else if (k == "descent_budget") c.descent_budget = get_field<std::size_t>(j, "descent_budget");
    else if (k == "descent_iterations") c.descent_iterations = get_field<int>(j, "descent_iterations");
    else if (k == "output") c.output_dir = get_field<std::string>(j, "output");
    else if (k == "seed") c.seed = get_field<std::uint64_t>(j, "seed");
    else if (k == "workers") c.workers = get_field<int>(j, "workers");
    else throw Error(ErrorKind::ConfigError, "unknown config field '" + k + "'");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read experiment config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string field, std::string msg) {
    out.push_back({Severity::error, std::move(field), std::move(msg)});
  };
  if (c.workers < 1) error("workers", "worker count must be >= 1");

  if (c.kind == ExperimentKind::dim && !c.ratios.empty()) {
    if (c.ratios.size() < 2) error("ratios", "need at least two ratios");
    for (double r : c.ratios)
      if (!(r > 0.0 && r < 1.0)) error("ratios", "ratio " + fmt_double(r) + " outside (0, 1)");
  }

  if (c.kind == ExperimentKind::counterexample) {
    for (double p : c.p_values)
      if (!(p > 1.0) || !std::isfinite(p)) error("p_values", "p must be strictly larger than 1");
    if (c.p_values.empty()) error("p_values", "need at least one p");
    if (c.window < 0) error("window", "window must be >= 0");
    if (c.l_start < 1) error("l_start", "l_start must be >= 1");
    if (c.l_start - c.window < 1 - 62 || c.l_start + c.window > 62)
      error("window", "offsets leave the representable index range");
  }

  if (!needs_fixture(c)) return out;
  std::optional<Ifs> ifs;
  try {
    ifs = resolve_ifs(c.fixture);
  } catch (const Error& e) {
    error("fixture", e.what());
    return out;
  }

  if (needs_model_p(c.kind)) {
    const double p = model_p(c, *ifs);
    if (c.p_override && !(*c.p_override > 1.0))
      error("p", "p_override = " + fmt_double(*c.p_override) +
                     " violates (A1): p must be strictly larger than 1");
    else if (!(p > 1.0))
      error("fixture", "Hausdorff dimension " + fmt_double(p) +
                           " violates (A1): p must be strictly larger than 1");
  }

  const bool uses_grid = c.kind != ExperimentKind::dim && c.kind != ExperimentKind::discretize;
  if (uses_grid)
    for (double r : effective_grid(c))
      if (auto msg = validate_grid(c, *ifs, r)) error("r", *msg);

  if (c.kind == ExperimentKind::scaling) {
    if (c.words.empty()) error("words", "scaling needs at least one word");
    for (const auto& w : c.words) validate_letters(out, "words", *ifs, w);
  }
  if (c.kind == ExperimentKind::multiplicity) {
    if (c.pieces.empty()) error("pieces", "multiplicity needs at least one piece");
    std::vector<const Prefix*> all;
    for (const auto& piece : c.pieces) {
      if (piece.multiplicity < 1) error("pieces", "multiplicities must be >= 1");
      for (const auto& pre : piece.prefixes) {
        validate_letters(out, "pieces", *ifs, pre);
        if (pre.size() > c.level) error("pieces", "prefix " + word_str(pre) + " longer than level");
        all.push_back(&pre);
      }
    }
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j)
        if (is_prefix(*all[i], *all[j]) || is_prefix(*all[j], *all[i]))
          error("pieces", "pieces " + word_str(*all[i]) + " and " + word_str(*all[j]) + " overlap");
  }
  if (c.kind == ExperimentKind::lp4) {
    if (c.family_sizes.empty()) error("family_sizes", "need at least one family");
    for (std::size_t n : c.family_sizes)
      if (n < 1) error("family_sizes", "family sizes must be >= 1");
    if (!(c.ratio_bound >= 1.0)) error("ratio_bound", "ratio bound c must be >= 1");
    if (c.r_grid.size() > 1)
      out.push_back({Severity::warning, "r", "lp4 uses the smallest r only"});
  }
  if (c.descent_budget > 0 && c.kind != ExperimentKind::estimate)
    out.push_back({Severity::warning, "descent_budget", "descent runs only with estimate"});
  return out;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string s;
  for (const auto& d : diags)
    s += std::string(d.severity == Severity::error ? "error" : "warning") + " [" + d.field + "] " +
         d.message + "\n";
  return s;
}

RunOutput execute(const ExperimentConfig& c) {
  RunOutput res;
  const auto diags = validate(c);
  res.message = format_diagnostics(diags);
  if (std::any_of(diags.begin(), diags.end(),
                  [](const Diagnostic& d) { return d.severity == Severity::error; })) {
    res.exit_code = 2;
    return res;
  }
  try {
    Outcome o;
    switch (c.kind) {
      case ExperimentKind::dim: o = run_dim(c); break;
      case ExperimentKind::words: o = run_words(c); break;
      case ExperimentKind::discretize: o = run_discretize(c); break;
      case ExperimentKind::estimate: o = run_estimate(c); break;
      case ExperimentKind::scaling: o = run_scaling(c); break;
      case ExperimentKind::multiplicity: o = run_multiplicity(c); break;
      case ExperimentKind::counterexample: o = run_counterexample(c); break;
      case ExperimentKind::lp4: o = run_lp4(c); break;
    }
    res.artifacts = std::move(o.artifacts);
    res.summary = std::move(o.summary);
    if (!o.passed) {
      res.exit_code = 3;
      res.message += "invariant failure, see summary.json\n";
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.message += std::string(e.what()) + "\n";
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.message += std::string(e.what()) + "\n";
  }
  return res;
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  RunOutput res = execute(c);
  if (!res.artifacts.empty()) out << res.artifacts.front().content;
  err << res.message;
  if (!c.output_dir.empty() && !res.summary.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    auto write = [&](const std::string& name, const std::string& content) {
      std::ofstream f(fs::path(c.output_dir) / name, std::ios::binary);
      f << content;
      if (!f) {
        err << "cannot write " << (fs::path(c.output_dir) / name).string() << "\n";
        return false;
      }
      return true;
    };
    bool ok = true;
    for (const auto& a : res.artifacts) ok = write(a.name, a.content) && ok;
    ok = write("summary.json", res.summary) && ok;
    if (!ok && res.exit_code == 0) return 1;
  }
  return res.exit_code;
}

}  // namespace qcm
