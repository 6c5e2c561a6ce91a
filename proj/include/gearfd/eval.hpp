#pragma once

// Metrics, region-based datasets, the 12 transfer tasks, and the scaling-factor study.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gearfd/hdmap.hpp"
#include "gearfd/models.hpp"
#include "gearfd/synth.hpp"

namespace gearfd {

/// Fraction of equal entries. Throws on empty or unequal-length input.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// P(pos > neg) + P(pos = neg) / 2 over all pairs, from midranks. Throws if a class is empty.
double roc_auc(std::span<const double> positive, std::span<const double> negative);

/// Pearson correlation of midranks. Throws on fewer than 2 points or unequal lengths; returns
/// 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

// --- datasets --------------------------------------------------------------------------------

/// Session fractions [begin, end) of the train region and the two test regions.
struct RegionSplit {
  std::array<double, 4> bounds{0.0, 0.6, 0.8, 1.0};

  void validate() const;
  double begin(int region) const { return bounds[region]; }
  double end(int region) const { return bounds[region + 1]; }
};

enum Region : int { train_region = 0, test_region_1 = 1, test_region_2 = 2 };

struct DatasetCounts {
  int train = 2000;  // per class: normal, and fault level 1 for the baseline and signatures
  int test = 200;    // per class (normal, fault 1, fault 2), split evenly over both test regions
};

struct DatasetOptions {
  GearGeometry geometry;
  int faulty_planet_tooth = 26;
  int hunting_cycles = 10;
  double slot_s = 0.01;  // slice start grid
  RegionSplit regions;
  DatasetCounts counts;
  PreprocessOptions preprocess;

  void validate() const;
};

struct DomainData {
  char domain = '?';
  std::vector<HDMap> train_normal;
  std::vector<HDMap> train_fault;   // fault level 1
  std::vector<HDMap> test_normal;   // first half from test region 1, second half from region 2
  std::vector<HDMap> test_fault1;
  std::vector<HDMap> test_fault2;
};

/// Start times (s) of `count` distinct slices inside a region, ascending. Throws when the
/// region cannot hold that many distinct slot-aligned slices.
std::vector<double> slice_starts(const DomainSpec& domain, const DatasetOptions& options, Region region, int count,
                                 std::uint64_t seed);

/// Maps of randomly placed slices of one recording session (one per domain and health level).
std::vector<HDMap> region_maps(char domain, HealthLevel level, Region region, int count,
                               const DatasetOptions& options, std::uint64_t seed);

DomainData make_region_datasets(char domain, const DatasetOptions& options, std::uint64_t seed);

/// Lazily generates domain datasets and keeps them.
class DatasetStore {
 public:
  DatasetStore(DatasetOptions options, std::uint64_t seed);

  const DomainData& get(char domain);
  const DatasetOptions& options() const { return options_; }

 private:
  DatasetOptions options_;
  std::uint64_t seed_;
  std::map<char, DomainData> data_;
};

// --- transfer tasks --------------------------------------------------------------------------

enum class Method { baseline, ad, cutpaste, scaled_cutpaste, faultpaste };

std::string to_string(Method m);
Method parse_method(const std::string& s);
inline constexpr std::array<Method, 5> kAllMethods{Method::baseline, Method::ad, Method::cutpaste,
                                                   Method::scaled_cutpaste, Method::faultpaste};

struct TaskSpec {
  int number = 0;  // 1-based row of the task table
  char source = 'B';
  char target = 'A';

  std::string notation() const;  // e.g. "B→A"
};

/// The 12 ordered domain pairs in table order (B→A, C→A, D→A, A→B, ...).
const std::vector<TaskSpec>& all_tasks();
TaskSpec task_by_notation(const std::string& s);  // "B->A", "B→A" or "BA"

struct EvalConfig {
  DatasetOptions data;
  TrainingRecipe recipe = TrainingRecipe::desk();
  TrainingRecipe ae_recipe = TrainingRecipe::desk();
  SynthesisConfig synthesis;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  bool regression = true;   // scaled CutPaste and FaultPaste regressors for the severity table
  int runs = 5;
  int signatures = 200;     // source fault maps turned into signatures per run
  std::uint64_t seed = 0;

  void validate() const;
  bool has(Method m) const;
};

struct MethodResult {
  std::vector<double> accuracy;           // one per run
  std::vector<double> auc_normal_fault1;  // regression, one per run
  std::vector<double> auc_fault1_fault2;
};

/// Regression scores of the first run, for trend/histogram plots.
struct ScoreSeries {
  std::string method;
  std::vector<double> normal, fault1, fault2;  // test order: region 1 half, then region 2 half
};

struct TaskResult {
  TaskSpec task;
  std::map<Method, MethodResult> methods;
  std::vector<ScoreSeries> scores;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the requested methods on the given tasks. Models that only depend on one domain are
/// trained once per run and shared by every task that uses them.
std::vector<TaskResult> run_tasks(std::span<const TaskSpec> tasks, const EvalConfig& config, DatasetStore& store,
                                  const ProgressFn& progress = {});
TaskResult run_task(const TaskSpec& task, const EvalConfig& config, DatasetStore& store,
                    const ProgressFn& progress = {});

/// Tab-separated reports: classification accuracy, regression AUCs, every per-run value,
/// and per-sample regression scores.
std::string accuracy_report(std::span<const TaskResult> results, std::span<const Method> methods);
std::string severity_report(std::span<const TaskResult> results);
std::string runs_report(std::span<const TaskResult> results);
std::string scores_report(std::span<const TaskResult> results);

// --- scaling-factor study --------------------------------------------------------------------

struct StudyConfig {
  char target = 'B';
  char signature_source = 'C';  // FaultPaste signatures come from this domain
  std::vector<double> scales{1, 5, 10, 15, 20, 25, 30};
  std::vector<SynthesisMethod> methods{SynthesisMethod::scaled_cutpaste, SynthesisMethod::faultpaste};
  int runs = 5;

  void validate() const;
};

struct StudyPoint {
  SynthesisMethod method = SynthesisMethod::scaled_cutpaste;
  double max_scale = 0.0;
  std::vector<double> synthesized_accuracy;  // held-out normals against fresh synthesized faults
  std::vector<double> real_accuracy;         // held-out normals against simulated fault level 1
};

std::vector<StudyPoint> scaling_study(const StudyConfig& study, const EvalConfig& config, DatasetStore& store,
                                      const ProgressFn& progress = {});
std::string study_report(std::span<const StudyPoint> points);

}  // namespace gearfd
