#include "gearfd/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "gearfd/error.hpp"
#include "gearfd/rng.hpp"

namespace gearfd {

namespace {

enum SeedTag : std::uint64_t {
  kSession = 11,
  kSlots = 12,
  kRecord = 13,
  kSpeed = 14,
  kDomain = 15,
  kAutoencoder = 21,
  kBaseline = 22,
  kCutPaste = 23,
  kScaledCutPaste = 24,
  kFaultPaste = 25,
  kRegressor = 26,
  kStudy = 31,
  kStudyEval = 32,
};

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(const std::vector<double>& runs) {
  if (runs.empty()) return "-";
  const MeanStd m = mean_std(runs);
  return fixed(m.mean) + "±" + fixed(m.std);
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(what) + " produced a non-finite value");
}

struct EvalSet {
  std::vector<HDMap> maps;
  std::vector<int> labels;
};

EvalSet classification_set(const DomainData& d) {
  EvalSet s;
  s.maps = d.test_normal;
  s.maps.insert(s.maps.end(), d.test_fault1.begin(), d.test_fault1.end());
  s.labels.assign(d.test_normal.size(), 0);
  s.labels.resize(s.maps.size(), 1);
  return s;
}

TrainingRecipe seeded(TrainingRecipe r, std::uint64_t seed) {
  r.seed = seed;
  return r;
}

SynthesisConfig with_method(SynthesisConfig c, SynthesisMethod m) {
  c.method = m;
  return c;
}

// Per-run model and score caches shared by the tasks of one run.
class RunContext {
 public:
  RunContext(const EvalConfig& config, DatasetStore& store, int run, const ProgressFn& progress)
      : config_(config), store_(store), run_(run), progress_(progress) {}

  Network& autoencoder(char d) {
    auto it = ae_.find(d);
    if (it != ae_.end()) return it->second;
    say(std::string("autoencoder on ") + d);
    TrainingResult r = train_autoencoder(store_.get(d).train_normal, seeded(config_.ae_recipe, seed(kAutoencoder, d)));
    return ae_.emplace(d, std::move(r.net)).first->second;
  }

  const std::vector<FaultSignature>& signatures(char d) {
    auto it = sig_.find(d);
    if (it != sig_.end()) return it->second;
    const auto& faults = store_.get(d).train_fault;
    const std::size_t n = std::min<std::size_t>(faults.size(), static_cast<std::size_t>(config_.signatures));
    std::size_t skipped = 0;
    auto sigs = extract_fault_signatures(std::span<const HDMap>(faults).first(n), autoencoder(d), &skipped);
    if (sigs.empty()) throw DegenerateSignatureError(std::string("no usable fault signature in domain ") + d);
    return sig_.emplace(d, std::move(sigs)).first->second;
  }

  Network& baseline(char source) {
    auto it = baseline_.find(source);
    if (it != baseline_.end()) return it->second;
    say(std::string("baseline on ") + source);
    const DomainData& s = store_.get(source);
    TrainingResult r = train_supervised_classifier(s.train_normal, s.train_fault,
                                                   seeded(config_.recipe, seed(kBaseline, source)));
    return baseline_.emplace(source, std::move(r.net)).first->second;
  }

  const EvalSet& eval_set(char d) {
    auto it = eval_.find(d);
    if (it != eval_.end()) return it->second;
    return eval_.emplace(d, classification_set(store_.get(d))).first->second;
  }

  double accuracy_of(Network& net, char target) {
    const EvalSet& s = eval_set(target);
    const std::vector<int> pred = classify(net, s.maps);
    return accuracy(pred, s.labels);
  }

  // Target-only methods are cached per target domain.
  double ad_accuracy(char target) {
    return cached(ad_acc_, target, [&] {
      Network& ae = autoencoder(target);
      const AnomalyThreshold t = ad_threshold(ae, store_.get(target).train_normal);
      const EvalSet& s = eval_set(target);
      const std::vector<double> err = reconstruction_errors(ae, s.maps);
      require_finite(err, "reconstruction");
      std::vector<int> pred(err.size());
      for (std::size_t i = 0; i < err.size(); ++i) pred[i] = t.is_faulty(err[i]) ? 1 : 0;
      return accuracy(pred, s.labels);
    });
  }

  double cutpaste_accuracy(char target, SynthesisMethod m) {
    auto& cache = m == SynthesisMethod::cutpaste ? cp_acc_ : scp_acc_;
    return cached(cache, target, [&] {
      say(to_string(m) + " classifier on " + target);
      TrainingResult r = train_classifier(store_.get(target).train_normal, with_method(config_.synthesis, m), {},
                                          seeded(config_.recipe, seed(m == SynthesisMethod::cutpaste ? kCutPaste : kScaledCutPaste, target)));
      return accuracy_of(r.net, target);
    });
  }

  double faultpaste_accuracy(char source, char target) {
    say(std::string("faultpaste classifier ") + source + "->" + target);
    TrainingResult r = train_classifier(store_.get(target).train_normal,
                                        with_method(config_.synthesis, SynthesisMethod::faultpaste), signatures(source),
                                        seeded(config_.recipe, seed(kFaultPaste, source, target)));
    return accuracy_of(r.net, target);
  }

  struct Severity {
    double normal_fault1 = 0.0;
    double fault1_fault2 = 0.0;
    ScoreSeries scores;
  };

  Severity regression(char source, char target, SynthesisMethod m) {
    const bool fp = m == SynthesisMethod::faultpaste;
    if (!fp) {
      auto it = scp_reg_.find(target);
      if (it != scp_reg_.end()) return it->second;
    }
    say(to_string(m) + " regressor " + (fp ? std::string(1, source) + "->" : std::string("on ")) + target);
    const std::span<const FaultSignature> pool = fp ? std::span<const FaultSignature>(signatures(source))
                                                    : std::span<const FaultSignature>();
    TrainingResult r = train_regressor(store_.get(target).train_normal, with_method(config_.synthesis, m), pool,
                                       seeded(config_.recipe, fp ? seed(kRegressor, kFaultPaste, source, target)
                                                                 : seed(kRegressor, kScaledCutPaste, target)));
    const DomainData& t = store_.get(target);
    Severity s;
    s.scores.method = to_string(m);
    s.scores.normal = regress(r.net, t.test_normal);
    s.scores.fault1 = regress(r.net, t.test_fault1);
    s.scores.fault2 = regress(r.net, t.test_fault2);
    require_finite(s.scores.normal, "regressor");
    require_finite(s.scores.fault1, "regressor");
    require_finite(s.scores.fault2, "regressor");
    s.normal_fault1 = roc_auc(s.scores.fault1, s.scores.normal);
    s.fault1_fault2 = roc_auc(s.scores.fault2, s.scores.fault1);
    if (!fp) scp_reg_.emplace(target, s);
    return s;
  }

 private:
  template <typename Fn>
  double cached(std::map<char, double>& cache, char key, Fn&& fn) {
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double v = fn();
    cache.emplace(key, v);
    return v;
  }

  std::uint64_t seed(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return derive_seed(config_.seed, {tag, a, b, c, static_cast<std::uint64_t>(run_)});
  }

  void say(const std::string& what) const {
    if (progress_) progress_("run " + std::to_string(run_ + 1) + "/" + std::to_string(config_.runs) + ": " + what);
  }

  const EvalConfig& config_;
  DatasetStore& store_;
  int run_;
  const ProgressFn& progress_;
  std::map<char, Network> ae_, baseline_;
  std::map<char, std::vector<FaultSignature>> sig_;
  std::map<char, EvalSet> eval_;
  std::map<char, double> ad_acc_, cp_acc_, scp_acc_;
  std::map<char, Severity> scp_reg_;
};

}  // namespace

// --- metrics ---------------------------------------------------------------------------------

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw PreconditionError("accuracy of an empty set");
  if (predictions.size() != labels.size()) throw PreconditionError("accuracy: length mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

double roc_auc(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) throw PreconditionError("roc_auc needs both classes");
  std::vector<double> all(positive.begin(), positive.end());
  all.insert(all.end(), negative.begin(), negative.end());
  for (double v : all)
    if (std::isnan(v)) throw PreconditionError("roc_auc: NaN score");
  const std::vector<double> rank = midranks(all);
  double r = 0;
  for (std::size_t i = 0; i < positive.size(); ++i) r += rank[i];
  const double np = static_cast<double>(positive.size());
  const double nn = static_cast<double>(negative.size());
  return (r - np * (np + 1) / 2) / (np * nn);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("spearman: length mismatch");
  if (x.size() < 2) throw PreconditionError("spearman needs at least two points");
  const std::vector<double> rx = midranks(x), ry = midranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("mean of an empty set");
  MeanStd m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

// --- datasets --------------------------------------------------------------------------------

void RegionSplit::validate() const {
  if (bounds[0] < 0.0 || bounds[3] > 1.0) throw PreconditionError("regions must lie inside the session");
  for (int i = 0; i < 3; ++i)
    if (!(bounds[i] < bounds[i + 1])) throw PreconditionError("regions must be ordered and non-empty");
}

void DatasetOptions::validate() const {
  geometry.validate();
  regions.validate();
  if (faulty_planet_tooth < 1 || faulty_planet_tooth > geometry.planet_teeth)
    throw PreconditionError("faulty planet tooth out of range");
  if (hunting_cycles < 10) throw PreconditionError("slices must span at least 10 hunting cycles");
  if (!(slot_s > 0)) throw PreconditionError("slot length must be positive");
  if (counts.train < 1 || counts.test < 2) throw PreconditionError("need at least 1 training and 2 test maps per class");
}

std::vector<double> slice_starts(const DomainSpec& domain, const DatasetOptions& options, Region region, int count,
                                 std::uint64_t seed) {
  const double session = domain.drift.session_length_s;
  const double len = duration_for_hunting_cycles(options.geometry, domain, options.hunting_cycles);
  const double b = options.regions.begin(region) * session;
  const double e = options.regions.end(region) * session;
  const double room = e - b - len;
  const std::int64_t capacity = room < 0 ? 0 : static_cast<std::int64_t>(std::floor(room / options.slot_s)) + 1;
  if (count > capacity)
    throw PreconditionError("region holds only " + std::to_string(capacity) + " distinct slices, " +
                            std::to_string(count) + " requested");
  // Floyd's sampling of `count` distinct slots.
  Rng rng(seed);
  std::set<std::int64_t> slots;
  for (std::int64_t j = capacity - count; j < capacity; ++j) {
    const std::int64_t t = rng.uniform_int(0, j);
    if (!slots.insert(t).second) slots.insert(j);
  }
  std::vector<double> starts;
  starts.reserve(slots.size());
  for (std::int64_t s : slots) starts.push_back(b + static_cast<double>(s) * options.slot_s);
  return starts;
}

std::vector<HDMap> region_maps(char domain, HealthLevel level, Region region, int count,
                               const DatasetOptions& options, std::uint64_t seed) {
  options.validate();
  const DomainSpec spec = domain_spec(domain);
  const HealthState health = level == HealthLevel::normal ? HealthState::normal()
                                                          : HealthState::faulty(level, options.faulty_planet_tooth);
  const std::uint64_t session = derive_seed(seed, {kSession, static_cast<std::uint64_t>(domain),
                                                   static_cast<std::uint64_t>(level)});
  const std::vector<double> starts =
      slice_starts(spec, options, region, count, derive_seed(session, {kSlots, static_cast<std::uint64_t>(region)}));
  const double len = duration_for_hunting_cycles(options.geometry, spec, options.hunting_cycles);
  std::vector<HDMap> maps;
  maps.reserve(starts.size());
  for (double t0 : starts) {
    SimulationOptions sim;
    sim.session_time_s = t0;
    sim.speed_seed = derive_seed(session, {kSpeed});
    const std::uint64_t rs = derive_seed(session, {kRecord, std::bit_cast<std::uint64_t>(t0)});
    maps.push_back(record_to_hdmap(simulate_record(options.geometry, spec, health, len, rs, sim), options.preprocess));
  }
  return maps;
}

DomainData make_region_datasets(char domain, const DatasetOptions& options, std::uint64_t seed) {
  options.validate();
  const std::uint64_t s = derive_seed(seed, {kDomain, static_cast<std::uint64_t>(domain)});
  DomainData d;
  d.domain = domain;
  d.train_normal = region_maps(domain, HealthLevel::normal, train_region, options.counts.train, options, s);
  d.train_fault = region_maps(domain, HealthLevel::fault1, train_region, options.counts.train, options, s);
  const int n1 = options.counts.test / 2, n2 = options.counts.test - n1;
  auto test = [&](HealthLevel level) {
    std::vector<HDMap> a = region_maps(domain, level, test_region_1, n1, options, s);
    std::vector<HDMap> b = region_maps(domain, level, test_region_2, n2, options, s);
    a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
    return a;
  };
  d.test_normal = test(HealthLevel::normal);
  d.test_fault1 = test(HealthLevel::fault1);
  d.test_fault2 = test(HealthLevel::fault2);
  return d;
}

DatasetStore::DatasetStore(DatasetOptions options, std::uint64_t seed) : options_(std::move(options)), seed_(seed) {
  options_.validate();
}

const DomainData& DatasetStore::get(char domain) {
  auto it = data_.find(domain);
  if (it != data_.end()) return it->second;
  return data_.emplace(domain, make_region_datasets(domain, options_, seed_)).first->second;
}

// --- tasks -----------------------------------------------------------------------------------

std::string to_string(Method m) {
  switch (m) {
    case Method::baseline:
      return "baseline";
    case Method::ad:
      return "ad";
    case Method::cutpaste:
      return "cutpaste";
    case Method::scaled_cutpaste:
      return "scaled_cutpaste";
    case Method::faultpaste:
      return "faultpaste";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : kAllMethods)
    if (to_string(m) == s) return m;
  throw PreconditionError("unknown method '" + s + "'");
}

std::string TaskSpec::notation() const { return std::string(1, source) + "→" + std::string(1, target); }

const std::vector<TaskSpec>& all_tasks() {
  static const std::vector<TaskSpec> tasks = [] {
    std::vector<TaskSpec> t;
    int n = 1;
    for (char target : {'A', 'B', 'C', 'D'})
      for (char source : {'A', 'B', 'C', 'D'})
        if (source != target) t.push_back({n++, source, target});
    return t;
  }();
  return tasks;
}

TaskSpec task_by_notation(const std::string& s) {
  std::string letters;
  for (char c : s)
    if (c >= 'A' && c <= 'Z') letters += c;
  if (letters.size() == 2)
    for (const TaskSpec& t : all_tasks())
      if (t.source == letters[0] && t.target == letters[1]) return t;
  throw PreconditionError("unknown task '" + s + "'");
}

void EvalConfig::validate() const {
  data.validate();
  recipe.validate();
  ae_recipe.validate();
  synthesis.validate();
  if (runs < 1) throw PreconditionError("runs must be positive");
  if (signatures < 1) throw PreconditionError("signature count must be positive");
  if (methods.empty()) throw PreconditionError("no methods selected");
}

bool EvalConfig::has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

std::vector<TaskResult> run_tasks(std::span<const TaskSpec> tasks, const EvalConfig& config, DatasetStore& store,
                                  const ProgressFn& progress) {
  config.validate();
  std::vector<TaskResult> results(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].source == tasks[i].target) throw PreconditionError("task source and target must differ");
    results[i].task = tasks[i];
  }
  for (int run = 0; run < config.runs; ++run) {
    RunContext ctx(config, store, run, progress);
    for (TaskResult& res : results) {
      const char s = res.task.source, t = res.task.target;
      if (config.has(Method::baseline)) res.methods[Method::baseline].accuracy.push_back(ctx.accuracy_of(ctx.baseline(s), t));
      if (config.has(Method::ad)) res.methods[Method::ad].accuracy.push_back(ctx.ad_accuracy(t));
      if (config.has(Method::cutpaste))
        res.methods[Method::cutpaste].accuracy.push_back(ctx.cutpaste_accuracy(t, SynthesisMethod::cutpaste));
      if (config.has(Method::scaled_cutpaste)) {
        MethodResult& m = res.methods[Method::scaled_cutpaste];
        m.accuracy.push_back(ctx.cutpaste_accuracy(t, SynthesisMethod::scaled_cutpaste));
        if (config.regression) {
          auto sev = ctx.regression(s, t, SynthesisMethod::scaled_cutpaste);
          m.auc_normal_fault1.push_back(sev.normal_fault1);
          m.auc_fault1_fault2.push_back(sev.fault1_fault2);
          if (run == 0) res.scores.push_back(std::move(sev.scores));
        }
      }
      if (config.has(Method::faultpaste)) {
        MethodResult& m = res.methods[Method::faultpaste];
        m.accuracy.push_back(ctx.faultpaste_accuracy(s, t));
        if (config.regression) {
          auto sev = ctx.regression(s, t, SynthesisMethod::faultpaste);
          m.auc_normal_fault1.push_back(sev.normal_fault1);
          m.auc_fault1_fault2.push_back(sev.fault1_fault2);
          if (run == 0) res.scores.push_back(std::move(sev.scores));
        }
      }
    }
  }
  return results;
}

TaskResult run_task(const TaskSpec& task, const EvalConfig& config, DatasetStore& store, const ProgressFn& progress) {
  return run_tasks(std::span<const TaskSpec>(&task, 1), config, store, progress).front();
}

std::string accuracy_report(std::span<const TaskResult> results, std::span<const Method> methods) {
  std::ostringstream os;
  os << "task\tnotation";
  for (Method m : methods) os << '\t' << to_string(m);
  os << '\n';
  for (const TaskResult& r : results) {
    os << r.task.number << '\t' << r.task.notation();
    for (Method m : methods) {
      auto it = r.methods.find(m);
      os << '\t' << (it == r.methods.end() ? "-" : cell(it->second.accuracy));
    }
    os << '\n';
  }
  return os.str();
}

std::string severity_report(std::span<const TaskResult> results) {
  std::ostringstream os;
  os << "task\tnotation\tnormal_vs_fault1_scaled_cutpaste\tnormal_vs_fault1_faultpaste"
        "\tfault1_vs_fault2_scaled_cutpaste\tfault1_vs_fault2_faultpaste\n";
  for (const TaskResult& r : results) {
    auto col = [&](Method m, bool first) {
      auto it = r.methods.find(m);
      if (it == r.methods.end()) return std::string("-");
      return cell(first ? it->second.auc_normal_fault1 : it->second.auc_fault1_fault2);
    };
    os << r.task.number << '\t' << r.task.notation() << '\t' << col(Method::scaled_cutpaste, true) << '\t'
       << col(Method::faultpaste, true) << '\t' << col(Method::scaled_cutpaste, false) << '\t'
       << col(Method::faultpaste, false) << '\n';
  }
  return os.str();
}

std::string runs_report(std::span<const TaskResult> results) {
  std::ostringstream os;
  os << "task\tnotation\tmethod\tmetric\trun\tvalue\n";
  for (const TaskResult& r : results)
    for (const auto& [m, res] : r.methods) {
      auto emit = [&](const char* metric, const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
          os << r.task.number << '\t' << r.task.notation() << '\t' << to_string(m) << '\t' << metric << '\t' << i + 1
             << '\t' << exact(v[i]) << '\n';
      };
      emit("accuracy", res.accuracy);
      emit("auc_normal_fault1", res.auc_normal_fault1);
      emit("auc_fault1_fault2", res.auc_fault1_fault2);
    }
  return os.str();
}

std::string scores_report(std::span<const TaskResult> results) {
  std::ostringstream os;
  os << "task\tnotation\tmethod\thealth\tregion\tindex\tscore\n";
  for (const TaskResult& r : results)
    for (const ScoreSeries& s : r.scores) {
      auto emit = [&](const char* health, const std::vector<double>& v) {
        const std::size_t half = v.size() / 2;
        for (std::size_t i = 0; i < v.size(); ++i)
          os << r.task.number << '\t' << r.task.notation() << '\t' << s.method << '\t' << health << '\t'
             << (i < half ? 1 : 2) << '\t' << i << '\t' << exact(v[i]) << '\n';
      };
      emit("normal", s.normal);
      emit("fault1", s.fault1);
      emit("fault2", s.fault2);
    }
  return os.str();
}

// --- scaling study ---------------------------------------------------------------------------

void StudyConfig::validate() const {
  if (scales.empty()) throw PreconditionError("study needs at least one scale");
  for (double a : scales)
    if (!(a >= 0) || !std::isfinite(a)) throw PreconditionError("study scales must be nonnegative");
  if (methods.empty()) throw PreconditionError("study needs at least one method");
  if (runs < 1) throw PreconditionError("runs must be positive");
  for (SynthesisMethod m : methods)
    if (m == SynthesisMethod::faultpaste && signature_source == target)
      throw PreconditionError("signature source must differ from the study target");
}

std::vector<StudyPoint> scaling_study(const StudyConfig& study, const EvalConfig& config, DatasetStore& store,
                                      const ProgressFn& progress) {
  study.validate();
  config.validate();
  std::vector<StudyPoint> points;
  for (SynthesisMethod m : study.methods)
    for (double a : study.scales) points.push_back({m, a, {}, {}});
  const DomainData& target = store.get(study.target);
  const EvalSet real = classification_set(target);
  for (int run = 0; run < study.runs; ++run) {
    EvalConfig run_config = config;
    run_config.runs = study.runs;
    RunContext ctx(run_config, store, run, progress);
    for (StudyPoint& p : points) {
      SynthesisConfig syn = with_method(config.synthesis, p.method);
      syn.max_cutpaste_scale = p.max_scale;
      syn.max_faultpaste_scale = p.max_scale;
      const bool fp = p.method == SynthesisMethod::faultpaste;
      const std::span<const FaultSignature> pool =
          fp ? std::span<const FaultSignature>(ctx.signatures(study.signature_source)) : std::span<const FaultSignature>();
      const std::uint64_t key = derive_seed(config.seed, {kStudy, static_cast<std::uint64_t>(p.method),
                                                          std::bit_cast<std::uint64_t>(p.max_scale),
                                                          static_cast<std::uint64_t>(run)});
      if (progress)
        progress("run " + std::to_string(run + 1) + "/" + std::to_string(study.runs) + ": study " + to_string(p.method) +
                 " A=" + fixed(p.max_scale, 1));
      TrainingResult r = train_classifier(target.train_normal, syn, pool, seeded(config.recipe, key));
      // Held-out normals against synthesized counterparts drawn with an independent stream.
      Rng eval_rng(derive_seed(key, {kStudyEval}));
      std::vector<HDMap> maps = target.test_normal;
      for (const HDMap& x : target.test_normal) maps.push_back(synthesize(x, syn, pool, eval_rng).map);
      std::vector<int> labels(target.test_normal.size(), 0);
      labels.resize(maps.size(), 1);
      p.synthesized_accuracy.push_back(accuracy(classify(r.net, maps), labels));
      p.real_accuracy.push_back(accuracy(classify(r.net, real.maps), real.labels));
    }
  }
  return points;
}

std::string study_report(std::span<const StudyPoint> points) {
  std::ostringstream os;
  os << "method\tmax_scale\tsynthesized_mean\tsynthesized_std\treal_mean\treal_std\n";
  for (const StudyPoint& p : points) {
    const MeanStd s = mean_std(p.synthesized_accuracy), r = mean_std(p.real_accuracy);
    os << to_string(p.method) << '\t' << exact(p.max_scale) << '\t' << exact(s.mean) << '\t' << exact(s.std) << '\t'
       << exact(r.mean) << '\t' << exact(r.std) << '\n';
  }
  return os.str();
}

}  // namespace gearfd
