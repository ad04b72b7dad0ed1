#include "hicrit/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "hicrit/arw.hpp"
#include "hicrit/calibrate.hpp"
#include "hicrit/covtest.hpp"
#include "hicrit/csv.hpp"
#include "hicrit/errors.hpp"
#include "hicrit/hc.hpp"
#include "hicrit/hct.hpp"
#include "hicrit/numerics.hpp"
#include "hicrit/pairhc.hpp"
#include "hicrit/parallel.hpp"
#include "hicrit/phase.hpp"
#include "hicrit/rng.hpp"
#include "json.hpp"

#ifndef HICRIT_VERSION
#define HICRIT_VERSION "0.0.0"
#endif

namespace hicrit::cli {

std::string_view version() { return HICRIT_VERSION; }

// ---------------------------------------------------------------------------
// Ingestion

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row
};

bool parses_as_number(std::string_view s) {
  try {
    csv::parse_double(s, "");
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

// Splits a file into a header plus numeric rows. Blank lines are skipped.
// When `header_required` is false a first line that is entirely numeric is
// read as data.
Table read_table(const std::filesystem::path& path, bool header_required) {
  const auto lines = csv::read_lines(path);
  Table t;
  std::size_t first = 0;
  while (first < lines.size() && lines[first].find_first_not_of(" \t") == std::string::npos) ++first;
  if (first == lines.size()) throw ValidationError(fmt::format("{}: file is empty", path.string()));

  auto head = csv::split_line(lines[first]);
  const bool numeric_head = std::all_of(head.begin(), head.end(), [](const std::string& s) { return parses_as_number(s); });
  std::size_t data_start = first;
  if (!numeric_head) {
    t.header = std::move(head);
    data_start = first + 1;
  } else if (header_required) {
    throw ValidationError(fmt::format("{}:{}: expected a header row of column names", path.string(), first + 1));
  } else {
    for (std::size_t c = 0; c < head.size(); ++c) t.header.push_back(fmt::format("V{}", c + 1));
  }

  for (std::size_t ln = data_start; ln < lines.size(); ++ln) {
    if (lines[ln].find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = csv::split_line(lines[ln]);
    if (cells.size() != t.header.size()) {
      throw ValidationError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), ln + 1,
                                        t.header.size(), cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[c] = csv::parse_double(cells[c], fmt::format("{}:{}, column '{}'", path.string(), ln + 1, t.header[c]));
    }
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(ln + 1);
  }
  if (t.rows.empty()) throw ValidationError(fmt::format("{}: no data rows", path.string()));
  return t;
}

std::size_t find_column(const Table& t, std::string_view name, const std::filesystem::path& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw ValidationError(fmt::format("{}: no column named '{}'", path.string(), name));
  return static_cast<std::size_t>(it - t.header.begin());
}

Eigen::MatrixXd to_matrix(const Table& t, std::size_t first_col) {
  const auto rows = static_cast<Eigen::Index>(t.rows.size());
  const auto cols = static_cast<Eigen::Index>(t.header.size() - first_col);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = t.rows[i][first_col + j];
  }
  return m;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Ingested ingest_matrix(const std::filesystem::path& path, Schema schema, std::string_view column) {
  Ingested out;
  out.schema = schema;
  const auto where = path.string();

  switch (schema) {
    case Schema::pvalues: {
      const Table t = read_table(path, false);
      std::size_t col = 0;
      if (!column.empty()) {
        col = find_column(t, column, path);
      } else if (t.header.size() != 1) {
        throw ValidationError(fmt::format("{}: {} columns present; select one by name", where, t.header.size()));
      }
      out.columns = {t.header[col]};
      out.pvalues.reserve(t.rows.size());
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double v = t.rows[r][col];
        if (!(v > 0.0 && v <= 1.0)) {
          throw ValidationError(fmt::format("{}:{}, column '{}': P-value {} outside (0, 1]", where,
                                            t.line_numbers[r], t.header[col], v));
        }
        out.pvalues.push_back(v);
      }
      out.n = out.pvalues.size();
      out.p = 1;
      break;
    }
    case Schema::labeled: {
      const Table t = read_table(path, true);
      if (lower(t.header.front()) != "label") {
        throw ValidationError(fmt::format("{}:1: first column must be 'label', found '{}'", where, t.header.front()));
      }
      if (t.header.size() < 2) throw ValidationError(fmt::format("{}: no feature columns", where));
      bool saw_pm = false;
      bool saw_12 = false;
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double l = t.rows[r][0];
        if (l == -1.0) {
          saw_pm = true;
        } else if (l == 2.0) {
          saw_12 = true;
        } else if (l != 1.0) {
          throw ValidationError(fmt::format("{}:{}, column 'label': label {} not in {{-1, +1}} or {{1, 2}}", where,
                                            t.line_numbers[r], l));
        }
        if (saw_pm && saw_12) {
          throw ValidationError(fmt::format("{}:{}, column 'label': mixes {{-1, +1}} and {{1, 2}} labels", where,
                                            t.line_numbers[r]));
        }
      }
      out.labeled.labels.reserve(t.rows.size());
      for (const auto& row : t.rows) {
        const double l = row[0];
        out.labeled.labels.push_back(saw_12 ? (l == 1.0 ? 1 : -1) : static_cast<int>(l));
      }
      if (saw_12) out.warnings.push_back("labels {1, 2} remapped to {+1, -1}");
      out.labeled.data = to_matrix(t, 1);
      out.labeled.feature_names.assign(t.header.begin() + 1, t.header.end());
      out.columns = out.labeled.feature_names;
      out.n = out.labeled.samples();
      out.p = out.labeled.features();
      out.class_positive = out.labeled.class_count(1);
      out.class_negative = out.labeled.class_count(-1);
      break;
    }
    case Schema::plain: {
      const Table t = read_table(path, true);
      out.matrix = to_matrix(t, 0);
      out.columns = t.header;
      out.n = t.rows.size();
      out.p = t.header.size();
      break;
    }
    case Schema::pairs: {
      const Table t = read_table(path, true);
      std::size_t cx = 0;
      std::size_t cy = 1;
      if (t.header.size() != 2) {
        cx = find_column(t, "x", path);
        cy = find_column(t, "y", path);
      }
      out.matrix.resize(static_cast<Eigen::Index>(t.rows.size()), 2);
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out.matrix(static_cast<Eigen::Index>(r), 0) = t.rows[r][cx];
        out.matrix(static_cast<Eigen::Index>(r), 1) = t.rows[r][cy];
      }
      out.columns = {t.header[cx], t.header[cy]};
      out.n = t.rows.size();
      out.p = 2;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run plumbing

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Common {
  std::string out;
  std::string trace;
  std::string manifest;
  unsigned threads = 0;
  int precision = 6;
};

struct Run {
  Common common;
  std::ostringstream text;  // stdout summary
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::optional<std::uint64_t> seed;

  [[nodiscard]] std::string num(double v) const { return fmt::format("{:.{}g}", v, common.precision); }

  void write_file(const std::string& path, const std::string& contents) {
    csv::atomic_write(path, contents);
    outputs.emplace_back(path);
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "machine-readable output file");
  sub->add_option("--trace", c.trace, "per-index component trace (CSV)");
  sub->add_option("--manifest", c.manifest, "run manifest path (default: <out>.manifest.json, else stderr)");
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  sub->add_option("--precision", c.precision, "significant digits on stdout")->check(CLI::Range(1, 17));
}

std::string default_cache() {
  const char* env = std::getenv("HICRIT_CACHE");
  return env ? std::string(env) : std::string();
}

// Trace of i, p_(i), component for a P-value series.
std::string pvalue_trace(const PValueSeries& series, HcVariant variant) {
  std::vector<double> comp;
  const std::size_t n = series.size();
  switch (variant) {
    case HcVariant::star:
    case HcVariant::plus:
      comp = hc_components(series);
      break;
    case HcVariant::feature:
      comp = hc_feature_scores(series);
      break;
    case HcVariant::bj:
    case HcVariant::alr:
      comp.resize(n);
      for (std::size_t i = 1; i <= n; ++i) {
        comp[i - 1] = static_cast<double>(n) *
                      binomial_kl(series.order_stat(i), static_cast<double>(i) / static_cast<double>(n));
      }
      break;
  }
  comp.resize(n, std::numeric_limits<double>::quiet_NaN());  // feature scores stop at N - 1
  std::string s = "i,p,component\n";
  for (std::size_t i = 1; i <= n; ++i) {
    s += fmt::format("{},{},{}\n", i, csv::exact(series.order_stat(i)), csv::exact(comp[i - 1]));
  }
  return s;
}

std::string result_line(const Run& run, const HcResult& r, std::size_t n) {
  std::string s = fmt::format("variant={} alpha0={} n={} score={}", to_string(r.variant), run.num(r.alpha0), n,
                              run.num(r.score));
  s += r.argmax_index ? fmt::format(" argmax={}", *r.argmax_index) : std::string(" argmax=none");
  if (r.excluded > 0) s += fmt::format(" excluded={}", r.excluded);
  if (r.empty_range) s += " empty_range=true";
  return s;
}

// --- score ------------------------------------------------------------------

struct ScoreArgs {
  std::string input;
  std::string column;
  std::string variant = "plus";
  double alpha0 = 0.5;
  std::optional<double> alpha;
  std::string policy = "gumbel_fallback";
  std::string cache = default_cache();
  std::size_t reps = 100000;
  std::optional<std::uint64_t> seed;
};

void run_score(Run& run, const ScoreArgs& a) {
  run.inputs.emplace_back(a.input);
  const auto data = ingest_matrix(a.input, Schema::pvalues, a.column);
  const auto series = PValueSeries::from_unsorted(data.pvalues);
  const auto variant = parse_variant(a.variant);
  const auto r = hc_score(series, variant, a.alpha0);
  std::string line = result_line(run, r, series.size());

  if (a.alpha) {
    const auto policy = parse_policy(a.policy);
    if (policy == ResolvePolicy::simulate_if_missing && !a.seed) {
      throw UsageError("--seed is required when the critical value may be simulated");
    }
    run.seed = a.seed;
    CriticalValueCache cache = a.cache.empty() ? CriticalValueCache{} : CriticalValueCache{a.cache};
    const CriticalValueRequest req{series.size(), *a.alpha, variant, a.alpha0, a.reps, a.seed.value_or(0)};
    const auto crit = critical_value(req, policy, cache);
    const auto decision = level_alpha_test(series, crit);
    line += fmt::format(" alpha={} critical={} critical_source={} decision={}", run.num(*a.alpha), run.num(crit.value),
                        crit.from_gumbel ? "gumbel" : "simulated", decision == Decision::reject ? "reject" : "retain");
  }
  run.text << line << '\n';
  if (!run.common.trace.empty()) run.write_file(run.common.trace, pvalue_trace(series, variant));
  if (!run.common.out.empty()) {
    run.write_file(run.common.out,
                   fmt::format("variant,alpha0,n,score,argmax,excluded\n{},{},{},{},{},{}\n", to_string(r.variant),
                               csv::exact(r.alpha0), series.size(), csv::exact(r.score),
                               r.argmax_index ? std::to_string(*r.argmax_index) : std::string(), r.excluded));
  }
}

// --- calibrate --------------------------------------------------------------

struct CalibrateArgs {
  std::size_t n = 0;
  double alpha = 0.05;
  std::string variant = "plus";
  double alpha0 = 0.5;
  std::size_t reps = 100000;
  std::uint64_t seed = 0;
  std::string cache = default_cache();
  std::string policy = "simulate_if_missing";
};

void run_calibrate(Run& run, const CalibrateArgs& a) {
  run.seed = a.seed;
  const auto variant = parse_variant(a.variant);
  CriticalValueCache cache = a.cache.empty() ? CriticalValueCache{} : CriticalValueCache{a.cache};
  const bool hit = cache.find(a.n, a.alpha, variant, a.alpha0, a.reps).has_value();
  const CriticalValueRequest req{a.n, a.alpha, variant, a.alpha0, a.reps, a.seed};
  const auto crit = critical_value(req, parse_policy(a.policy), cache);
  const char* source = crit.from_gumbel ? "gumbel" : (hit ? "cache" : "simulated");
  std::string line = fmt::format("n={} alpha={} variant={} alpha0={} replicates={} seed={} quantile={} source={}", a.n,
                                 run.num(a.alpha), to_string(variant), run.num(a.alpha0), a.reps, a.seed,
                                 run.num(crit.value), source);
  if (a.n >= 16) line += fmt::format(" gumbel={}", run.num(gumbel_critical(a.n, a.alpha)));
  run.text << line << '\n';
  if (!a.cache.empty()) run.outputs.emplace_back(a.cache);
  if (!run.common.out.empty()) {
    run.write_file(run.common.out, fmt::format("{}\n{},{},{},{},{},{},{},{}\n", CriticalValueCache::header(), a.n,
                                               csv::exact(a.alpha), to_string(variant), csv::exact(a.alpha0), a.reps,
                                               a.seed, kRngVersion, csv::exact(crit.value)));
  }
}

// --- detect-sim -------------------------------------------------------------

struct DetectArgs {
  std::size_t n = 0;
  std::optional<double> epsilon;
  std::optional<double> tau;
  std::optional<double> vartheta;
  std::optional<double> r;
  std::size_t reps = 100;
  double alpha = 0.05;
  std::string variant = "plus";
  double alpha0 = 0.5;
  std::uint64_t seed = 0;
  std::optional<double> critical;
  std::size_t calibration_reps = 10000;
};

void run_detect(Run& run, const DetectArgs& a) {
  run.seed = a.seed;
  DetectionConfig cfg;
  cfg.n = a.n;
  if (a.epsilon && a.tau && !a.vartheta && !a.r) {
    cfg.epsilon = *a.epsilon;
    cfg.tau = *a.tau;
  } else if (a.vartheta && a.r && !a.epsilon && !a.tau) {
    const ArwParams params(a.n, *a.vartheta, *a.r);
    cfg.epsilon = params.epsilon();
    cfg.tau = params.tau();
  } else {
    throw UsageError("give either --epsilon and --tau, or --vartheta and --r");
  }
  cfg.reps = a.reps;
  cfg.alpha = a.alpha;
  cfg.variant = parse_variant(a.variant);
  cfg.alpha0 = a.alpha0;
  cfg.seed = a.seed;
  cfg.critical = a.critical;
  cfg.calibration_reps = a.calibration_reps;
  const auto s = detection_experiment(cfg);
  run.text << fmt::format(
      "n={} epsilon={} tau={} reps={} variant={} alpha={} critical={} power={} size={} separated={}\n", cfg.n,
      run.num(cfg.epsilon), run.num(cfg.tau), cfg.reps, to_string(cfg.variant), run.num(cfg.alpha),
      run.num(s.critical), run.num(s.power), run.num(s.size), s.separated() ? "true" : "false");
  if (!run.common.out.empty()) {
    std::string csv_text = "hypothesis,score\n";
    for (double v : s.null_scores) csv_text += "H0," + csv::exact(v) + '\n';
    for (double v : s.alt_scores) csv_text += "H1," + csv::exact(v) + '\n';
    run.write_file(run.common.out, csv_text);
  }
}

// --- permtest ---------------------------------------------------------------

struct PermArgs {
  std::string input;
  std::size_t shuffles = 1000;
  std::uint64_t seed = 0;
  std::string variant = "plus";
  double alpha0 = 0.5;
};

void run_permtest(Run& run, const PermArgs& a) {
  run.seed = a.seed;
  run.inputs.emplace_back(a.input);
  auto data = ingest_matrix(a.input, Schema::labeled);
  for (auto& w : data.warnings) run.warnings.push_back(std::move(w));
  const auto res = permutation_pvalue(data.labeled, a.shuffles, a.seed, parse_variant(a.variant), a.alpha0);
  run.text << fmt::format("n={} p={} variant={} shuffles={} observed={} p_value={}\n", data.n, data.p, a.variant,
                          a.shuffles, run.num(res.observed), run.num(res.p_value));
  if (!run.common.out.empty()) {
    std::string csv_text = "shuffle,score\n";
    for (std::size_t b = 0; b < res.shuffle_scores.size(); ++b) {
      csv_text += fmt::format("{},{}\n", b + 1, csv::exact(res.shuffle_scores[b]));
    }
    run.write_file(run.common.out, csv_text);
  }
}

// --- select / classify / evaluate -------------------------------------------

struct SelectArgs {
  std::string train;
  double alpha0 = 0.10;
};

void run_select(Run& run, const SelectArgs& a) {
  if (run.common.out.empty()) throw UsageError("select: --out <model.json> is required");
  run.inputs.emplace_back(a.train);
  auto data = ingest_matrix(a.train, Schema::labeled);
  for (auto& w : data.warnings) run.warnings.push_back(std::move(w));
  const auto model = train(data.labeled, a.alpha0);
  run.write_file(run.common.out, model.to_json().dump(2) + '\n');
  run.text << fmt::format("n={} p={} class_pos={} class_neg={} alpha0={} hct_index={} threshold={} hc_score={} selected={}",
                          data.n, data.p, data.class_positive, data.class_negative, run.num(a.alpha0), model.hct_index,
                          run.num(model.threshold), run.num(model.hc_score), model.selected());
  if (model.tie_at_threshold) run.text << " tie_at_threshold=true";
  run.text << '\n';
  if (!run.common.trace.empty()) {
    const auto z = feature_zscores(data.labeled);
    std::vector<double> pv;
    pv.reserve(z.standardized.size());
    for (double v : z.standardized) pv.push_back(two_sided_pvalue(std::fabs(v)));
    run.write_file(run.common.trace, pvalue_trace(PValueSeries::from_unsorted(std::move(pv)), HcVariant::feature));
  }
}

struct ModelArgs {
  std::string model;
  std::string test;
};

void check_width(const HctModel& model, std::size_t p, const std::string& path) {
  if (model.features() != p) {
    throw ValidationError(fmt::format("{}: {} feature columns, model expects {}", path, p, model.features()));
  }
}

void run_classify(Run& run, const ModelArgs& a) {
  run.inputs.emplace_back(a.model);
  run.inputs.emplace_back(a.test);
  const auto model = HctModel::load(a.model);
  // A leading label column is allowed and ignored.
  const auto lines = csv::read_lines(a.test);
  const auto head = csv::split_line(lines.empty() ? std::string() : lines.front());
  auto data = ingest_matrix(a.test, !head.empty() && lower(head.front()) == "label" ? Schema::labeled : Schema::plain);
  for (auto& w : data.warnings) run.warnings.push_back(std::move(w));
  const Eigen::MatrixXd& x = data.schema == Schema::labeled ? data.labeled.data : data.matrix;
  check_width(model, static_cast<std::size_t>(x.cols()), a.test);

  std::size_t pos = 0;
  std::string csv_text = "row,score,prediction\n";
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[j] = x(i, j);
    const double s = lda_score(model, row);
    const int label = s >= 0.0 ? 1 : -1;
    if (label == 1) ++pos;
    csv_text += fmt::format("{},{},{}\n", i + 1, csv::exact(s), label);
  }
  run.text << fmt::format("n={} predicted_pos={} predicted_neg={}\n", x.rows(), pos,
                          static_cast<std::size_t>(x.rows()) - pos);
  if (!run.common.out.empty()) run.write_file(run.common.out, csv_text);
}

void run_evaluate(Run& run, const ModelArgs& a) {
  run.inputs.emplace_back(a.model);
  run.inputs.emplace_back(a.test);
  const auto model = HctModel::load(a.model);
  auto data = ingest_matrix(a.test, Schema::labeled);
  for (auto& w : data.warnings) run.warnings.push_back(std::move(w));
  check_width(model, data.p, a.test);
  const auto ev = evaluate(model, data.labeled);
  run.text << fmt::format("n={} error_rate={} misclassified={} ties={} normalization={}\n", data.n,
                          run.num(ev.error_rate), ev.misclassified.size(), ev.ties, run.num(ev.normalization));
  if (!run.common.out.empty()) {
    std::string csv_text = "row,label,score,normalized_score,prediction\n";
    std::vector<double> row(data.p);
    for (std::size_t i = 0; i < data.n; ++i) {
      for (std::size_t j = 0; j < data.p; ++j) row[j] = data.labeled.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double s = lda_score(model, row);
      csv_text += fmt::format("{},{},{},{},{}\n", i + 1, data.labeled.labels[i], csv::exact(s),
                              csv::exact(s * ev.normalization), s >= 0.0 ? 1 : -1);
    }
    run.write_file(run.common.out, csv_text);
  }
}

// --- covariance -------------------------------------------------------------

struct CliqueArgs {
  std::string input;
  std::string mode = "pairwise";
  double alpha0 = 0.5;
  std::string tail = "two_sided";
};

void run_clique(Run& run, const CliqueArgs& a) {
  run.inputs.emplace_back(a.input);
  const auto data = ingest_matrix(a.input, Schema::plain);
  Tail tail;
  if (a.tail == "two_sided") {
    tail = Tail::two_sided;
  } else if (a.tail == "upper") {
    tail = Tail::upper;
  } else {
    throw UsageError("--tail must be two_sided or upper");
  }
  const auto r = clique_test(data.matrix, parse_clique_mode(a.mode), a.alpha0, tail);
  run.text << fmt::format("mode={} n={} p={} alpha0={} score={}", a.mode, data.n, data.p, run.num(a.alpha0),
                          run.num(r.score));
  run.text << (r.argmax_index ? fmt::format(" argmax={}", *r.argmax_index) : std::string(" argmax=none")) << '\n';
}

struct EigenArgs {
  std::string input;
  std::size_t null_reps = 500;
  std::uint64_t seed = 0;
  std::string profile_cache;
  double alpha0 = 0.5;
};

void run_eigen(Run& run, const EigenArgs& a) {
  run.seed = a.seed;
  run.inputs.emplace_back(a.input);
  const auto data = ingest_matrix(a.input, Schema::plain);
  std::optional<EigenNullProfile> profile;
  bool cached = false;
  if (!a.profile_cache.empty()) {
    profile = load_cached_profile(a.profile_cache, data.n, data.p, a.null_reps);
    cached = profile.has_value();
  }
  if (!profile) {
    profile = eigen_null_profile(data.n, data.p, a.null_reps, a.seed);
    if (!a.profile_cache.empty()) {
      store_cached_profile(a.profile_cache, *profile);
      run.outputs.emplace_back(a.profile_cache);
    }
  }
  const auto r = eigen_hc_test(data.matrix, *profile, a.alpha0);
  run.text << fmt::format("n={} p={} null_reps={} profile={} score={} argmax={}\n", data.n, data.p,
                          profile->replicates, cached ? "cached" : "simulated", run.num(r.score), r.argmax_index);
  if (!run.common.trace.empty()) {
    const auto lambda = sample_cov_eigenvalues(data.matrix);
    std::string csv_text = "i,eigenvalue,null_mean,null_sd,component\n";
    for (std::size_t i = 0; i < r.components.size(); ++i) {
      csv_text += fmt::format("{},{},{},{},{}\n", i + 1, csv::exact(lambda[i]), csv::exact(profile->means[i]),
                              csv::exact(profile->sds[i]), csv::exact(r.components[i]));
    }
    run.write_file(run.common.trace, csv_text);
  }
}

// --- pairs ------------------------------------------------------------------

struct PairsArgs {
  std::string input;
  bool simulate = false;
  std::size_t n = 1000;
  double epsilon = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  std::size_t reps = 1;
  std::optional<std::uint64_t> seed;
  double alpha0 = 0.5;
  std::string corner = "upper_right";
};

std::string pair_trace(const RankedPairs& pairs, Corner corner) {
  const auto oriented = orient(pairs, corner);
  const auto counts = corner_counts(oriented);
  const auto comp = pair_hc_components(oriented);
  std::string s = "k,S_k,component\n";
  for (std::size_t k = 1; k <= counts.size(); ++k) {
    s += fmt::format("{},{},{}\n", k, counts[k - 1], std::isnan(comp[k - 1]) ? std::string() : csv::exact(comp[k - 1]));
  }
  return s;
}

void run_pairs(Run& run, const PairsArgs& a) {
  const auto corner = parse_corner(a.corner);
  if (a.simulate == !a.input.empty()) throw UsageError("pairs: give exactly one of --input or --simulate");
  if (!a.simulate) {
    run.inputs.emplace_back(a.input);
    const auto data = ingest_matrix(a.input, Schema::pairs);
    std::vector<double> x(data.n), y(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
      x[i] = data.matrix(static_cast<Eigen::Index>(i), 0);
      y[i] = data.matrix(static_cast<Eigen::Index>(i), 1);
    }
    const auto pairs = RankedPairs::from_values(x, y);
    const auto r = pair_hc_star(pairs, a.alpha0, corner);
    run.text << fmt::format("n={} corner={} alpha0={} score={} argmax={}\n", data.n, a.corner, run.num(a.alpha0),
                            run.num(r.score), r.argmax_index.value_or(0));
    if (!run.common.out.empty()) run.write_file(run.common.out, pair_trace(pairs, corner));
    if (!run.common.trace.empty()) run.write_file(run.common.trace, pair_trace(pairs, corner));
    return;
  }

  if (!a.seed) throw UsageError("pairs --simulate requires --seed");
  if (a.reps < 1) throw UsageError("--reps must be positive");
  run.seed = a.seed;
  std::vector<double> scores(a.reps);
  std::optional<RankedPairs> first;
  for (std::size_t b = 0; b < a.reps; ++b) {
    const auto s = sample_bivariate_mixture(a.n, a.epsilon, a.tau, a.rho, RngSeed{*a.seed, b});
    const auto pairs = RankedPairs::from_values(s.x, s.y);
    scores[b] = pair_hc_star(pairs, a.alpha0, corner).score;
    if (b == 0) first = pairs;
  }
  double mean = 0.0;
  for (double v : scores) mean += v;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double v : scores) var += (v - mean) * (v - mean);
  const double sd = scores.size() > 1 ? std::sqrt(var / static_cast<double>(scores.size() - 1)) : 0.0;
  const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
  run.text << fmt::format("n={} epsilon={} tau={} rho={} reps={} corner={} mean={} sd={} min={} max={}\n", a.n,
                          run.num(a.epsilon), run.num(a.tau), run.num(a.rho), a.reps, a.corner, run.num(mean),
                          run.num(sd), run.num(*mn), run.num(*mx));
  if (!run.common.out.empty()) {
    std::string csv_text = "rep,score\n";
    for (std::size_t b = 0; b < scores.size(); ++b) csv_text += fmt::format("{},{}\n", b + 1, csv::exact(scores[b]));
    run.write_file(run.common.out, csv_text);
  }
  if (!run.common.trace.empty()) run.write_file(run.common.trace, pair_trace(*first, corner));
}

// --- phase ------------------------------------------------------------------

struct PhaseArgs {
  double theta = 0.0;
  std::size_t grid = 100;
  std::optional<double> r;
};

void run_phase(Run& run, const PhaseArgs& a) {
  const double r = a.r.value_or(0.5 * (1.0 - a.theta));
  const auto rows = boundary_table(a.theta, a.grid, r);
  const auto render = [&](auto&& fmt_num) {
    std::string s = "vartheta,rho,rho_theta,qideal_phase,qideal_value\n";
    for (const auto& row : rows) {
      s += fmt::format("{},{},{},{},{}\n", fmt_num(row.vartheta), fmt_num(row.rho), fmt_num(row.rho_theta),
                       row.qideal_phase, row.qideal_value ? fmt_num(*row.qideal_value) : std::string());
    }
    return s;
  };
  run.text << fmt::format("# theta={} grid={} r={}\n", run.num(a.theta), a.grid, run.num(r));
  run.text << render([&](double v) { return run.num(v); });
  if (!run.common.out.empty()) run.write_file(run.common.out, render([](double v) { return csv::exact(v); }));
}

// ---------------------------------------------------------------------------

nlohmann::json option_map(const CLI::App* sub) {
  nlohmann::json params = nlohmann::json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    const auto& res = opt->results();
    std::string key = opt->get_name();
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    params[key] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
  }
  return params;
}

}  // namespace

int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  Run run;

  CLI::App app{"Higher Criticism toolkit", argv.empty() ? "hicrit" : argv.front()};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(version()));

  ScoreArgs score_a;
  auto* score = app.add_subcommand("score", "HC statistic of a P-value file");
  score->add_option("--input", score_a.input, "P-value file")->required()->check(CLI::ExistingFile);
  score->add_option("--column", score_a.column, "column name when the file has several");
  score->add_option("--variant", score_a.variant, "star|plus|feature|bj|alr")->capture_default_str();
  score->add_option("--alpha0", score_a.alpha0)->capture_default_str();
  score->add_option("--alpha", score_a.alpha, "level; adds a reject/retain decision");
  score->add_option("--policy", score_a.policy, "cache_only|simulate_if_missing|gumbel_fallback")->capture_default_str();
  score->add_option("--cache", score_a.cache, "critical value cache (default $HICRIT_CACHE)");
  score->add_option("--reps", score_a.reps, "minimum replicates for a cached critical value")->capture_default_str();
  score->add_option("--seed", score_a.seed);

  CalibrateArgs cal_a;
  auto* cal = app.add_subcommand("calibrate", "simulated critical value h(N, alpha)");
  cal->add_option("--n", cal_a.n)->required();
  cal->add_option("--alpha", cal_a.alpha)->required();
  cal->add_option("--variant", cal_a.variant)->capture_default_str();
  cal->add_option("--alpha0", cal_a.alpha0)->capture_default_str();
  cal->add_option("--reps", cal_a.reps)->capture_default_str();
  cal->add_option("--seed", cal_a.seed)->required();
  cal->add_option("--cache", cal_a.cache, "cache file (default $HICRIT_CACHE)");
  cal->add_option("--policy", cal_a.policy)->capture_default_str();

  DetectArgs det_a;
  auto* det = app.add_subcommand("detect-sim", "HC under the null and a sparse mixture");
  det->add_option("--n", det_a.n)->required();
  det->add_option("--epsilon", det_a.epsilon);
  det->add_option("--tau", det_a.tau);
  det->add_option("--vartheta", det_a.vartheta);
  det->add_option("--r", det_a.r);
  det->add_option("--reps", det_a.reps)->capture_default_str();
  det->add_option("--alpha", det_a.alpha)->capture_default_str();
  det->add_option("--variant", det_a.variant)->capture_default_str();
  det->add_option("--alpha0", det_a.alpha0)->capture_default_str();
  det->add_option("--seed", det_a.seed)->required();
  det->add_option("--critical", det_a.critical, "skip calibration and use this critical value");
  det->add_option("--calibration-reps", det_a.calibration_reps)->capture_default_str();

  PermArgs perm_a;
  auto* perm = app.add_subcommand("permtest", "shuffle P-value for the HC score of a labeled matrix");
  perm->add_option("--input", perm_a.input)->required()->check(CLI::ExistingFile);
  perm->add_option("--shuffles", perm_a.shuffles)->capture_default_str();
  perm->add_option("--seed", perm_a.seed)->required();
  perm->add_option("--variant", perm_a.variant)->capture_default_str();
  perm->add_option("--alpha0", perm_a.alpha0)->capture_default_str();

  SelectArgs sel_a;
  auto* sel = app.add_subcommand("select", "train an HCT model");
  sel->add_option("--train", sel_a.train)->required()->check(CLI::ExistingFile);
  sel->add_option("--alpha0", sel_a.alpha0)->capture_default_str();

  ModelArgs cls_a;
  auto* cls = app.add_subcommand("classify", "predict labels with an HCT model");
  cls->add_option("--model", cls_a.model)->required()->check(CLI::ExistingFile);
  cls->add_option("--test", cls_a.test)->required()->check(CLI::ExistingFile);

  ModelArgs ev_a;
  auto* ev = app.add_subcommand("evaluate", "test error of an HCT model");
  ev->add_option("--model", ev_a.model)->required()->check(CLI::ExistingFile);
  ev->add_option("--test", ev_a.test)->required()->check(CLI::ExistingFile);

  CliqueArgs clq_a;
  auto* clq = app.add_subcommand("cov-clique", "HC over sample-correlation P-values");
  clq->add_option("--input", clq_a.input)->required()->check(CLI::ExistingFile);
  clq->add_option("--mode", clq_a.mode, "pairwise|rowmax")->capture_default_str();
  clq->add_option("--alpha0", clq_a.alpha0)->capture_default_str();
  clq->add_option("--tail", clq_a.tail, "two_sided|upper")->capture_default_str();

  EigenArgs eig_a;
  auto* eig = app.add_subcommand("cov-eigen", "HC over standardized sample-covariance eigenvalues");
  eig->add_option("--input", eig_a.input)->required()->check(CLI::ExistingFile);
  eig->add_option("--null-reps", eig_a.null_reps)->capture_default_str();
  eig->add_option("--seed", eig_a.seed)->required();
  eig->add_option("--profile-cache", eig_a.profile_cache);
  eig->add_option("--alpha0", eig_a.alpha0)->capture_default_str();

  PairsArgs pr_a;
  auto* pr = app.add_subcommand("pairs", "pairHC for correlated pairs in a corner");
  pr->add_option("--input", pr_a.input)->check(CLI::ExistingFile);
  pr->add_flag("--simulate", pr_a.simulate);
  pr->add_option("--n", pr_a.n)->capture_default_str();
  pr->add_option("--epsilon", pr_a.epsilon)->capture_default_str();
  pr->add_option("--tau", pr_a.tau)->capture_default_str();
  pr->add_option("--rho", pr_a.rho)->capture_default_str();
  pr->add_option("--reps", pr_a.reps)->capture_default_str();
  pr->add_option("--seed", pr_a.seed);
  pr->add_option("--alpha0", pr_a.alpha0)->capture_default_str();
  pr->add_option("--corner", pr_a.corner, "upper_right|upper_left|lower_right|lower_left")->capture_default_str();

  PhaseArgs ph_a;
  auto* ph = app.add_subcommand("phase", "phase-diagram boundary table");
  ph->add_option("--theta", ph_a.theta)->capture_default_str();
  ph->add_option("--grid", ph_a.grid)->capture_default_str();
  ph->add_option("--r", ph_a.r, "signal strength for the q_ideal columns (default (1 - theta) / 2)");

  for (auto* sub : app.get_subcommands({})) add_common(sub, run.common);

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  if (!args.empty() && !args.front().starts_with('-')) {
    try {
      (void)app.get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
      err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
      return kExitUsage;
    }
  }
  std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::ostringstream o, ignored;
      app.exit(e, o, ignored);
      out << o.str();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  int code = kExitOk;
  try {
    set_thread_limit(run.common.threads);
    if (name == "score") {
      run_score(run, score_a);
    } else if (name == "calibrate") {
      run_calibrate(run, cal_a);
    } else if (name == "detect-sim") {
      run_detect(run, det_a);
    } else if (name == "permtest") {
      run_permtest(run, perm_a);
    } else if (name == "select") {
      run_select(run, sel_a);
    } else if (name == "classify") {
      run_classify(run, cls_a);
    } else if (name == "evaluate") {
      run_evaluate(run, ev_a);
    } else if (name == "cov-clique") {
      run_clique(run, clq_a);
    } else if (name == "cov-eigen") {
      run_eigen(run, eig_a);
    } else if (name == "pairs") {
      run_pairs(run, pr_a);
    } else {
      run_phase(run, ph_a);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const CacheMiss& e) {
    err << "cache miss: " << e.what() << '\n';
    code = kExitCacheMiss;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    code = kExitValidation;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    code = kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitValidation;
  }

  for (const auto& w : run.warnings) err << "warning: " << w << '\n';
  const std::string text = run.text.str();
  out << text;

  nlohmann::json m;
  m["tool"] = "hicrit";
  m["version"] = std::string(version());
  m["rng_version"] = std::string(kRngVersion);
  m["subcommand"] = name;
  m["argv"] = std::vector<std::string>(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  m["parameters"] = option_map(sub);
  m["seed"] = run.seed ? nlohmann::json(*run.seed) : nlohmann::json(nullptr);
  m["threads"] = thread_limit();
  m["exit_code"] = code;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& p : run.inputs) {
    if (std::filesystem::exists(p)) inputs.push_back({{"path", p.string()}, {"sha256", sha256_hex(slurp(p))}});
  }
  m["inputs"] = inputs;
  nlohmann::json outputs = nlohmann::json::array();
  outputs.push_back({{"path", "-"}, {"sha256", sha256_hex(text)}});
  for (const auto& p : run.outputs) {
    if (std::filesystem::exists(p)) outputs.push_back({{"path", p.string()}, {"sha256", sha256_hex(slurp(p))}});
  }
  m["outputs"] = outputs;
  m["duration_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  std::string manifest_path = run.common.manifest;
  if (manifest_path.empty() && !run.common.out.empty()) manifest_path = run.common.out + ".manifest.json";
  if (manifest_path.empty()) {
    err << "manifest: " << m.dump() << '\n';
  } else {
    try {
      csv::atomic_write(manifest_path, m.dump(2) + '\n');
    } catch (const std::exception& e) {
      err << "warning: could not write manifest: " << e.what() << '\n';
    }
  }
  return code;
}

}  // namespace hicrit::cli
