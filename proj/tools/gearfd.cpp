// gearfd command-line driver.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gearfd/config.hpp"
#include "gearfd/error.hpp"
#include "gearfd/eval.hpp"
#include "gearfd/gearsim.hpp"
#include "gearfd/hdmap.hpp"
#include "gearfd/models.hpp"
#include "gearfd/nn/weights.hpp"
#include "gearfd/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gearfd;

namespace {

enum Exit { kOk = 0, kUsage = 2, kFormat = 3, kNumeric = 4 };

void log_hash(const std::string& command, const json& params) {
  const std::string canon = params.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon)));
  std::cerr << command << ": config hash " << buf << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create directory " + dir.string());
}

char parse_domain(const std::string& s) {
  if (s.size() != 1 || s[0] < 'A' || s[0] > 'D') throw CLI::ValidationError("--domain", "must be one of A, B, C, D");
  return s[0];
}

std::vector<fs::path> record_inputs(const fs::path& in) {
  std::vector<fs::path> files;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::directory_iterator(in))
      if (e.path().extension() == ".gsr") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(in);
  }
  if (files.empty()) throw PreconditionError("no .gsr records in " + in.string());
  return files;
}

// Flag overrides shared by train, eval and study.
struct Overrides {
  std::string config;
  std::optional<int> iterations, batch, runs, train, test, signatures;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale_max;
  bool full_recipe = false;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--iterations", iterations, "training iterations");
    app->add_option("--batch", batch, "training batch size (even)");
    app->add_option("--seed", seed, "base seed");
    app->add_option("--scale-max", scale_max, "maximum synthesis scale for both methods");
    app->add_flag("--full-recipe", full_recipe, "3000 iterations of 128 with the rate drop at 2000");
  }
  void add_eval(CLI::App* app) {
    app->add_option("--runs", runs, "runs per task");
    app->add_option("--train", train, "training maps per class and domain");
    app->add_option("--test", test, "test maps per class and domain");
    app->add_option("--signatures", signatures, "source fault signatures per run");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : load_config(config);
    EvalConfig& e = c.eval;
    if (full_recipe) {
      e.recipe = TrainingRecipe::full();
      e.ae_recipe = TrainingRecipe::full();
    }
    if (iterations) e.recipe.iterations = e.ae_recipe.iterations = *iterations;
    if (batch) e.recipe.batch = e.ae_recipe.batch = *batch;
    if (seed) e.seed = *seed;
    if (scale_max) e.synthesis.max_cutpaste_scale = e.synthesis.max_faultpaste_scale = *scale_max;
    if (runs) e.runs = c.study.runs = *runs;
    if (train) e.data.counts.train = *train;
    if (test) e.data.counts.test = *test;
    if (signatures) e.signatures = *signatures;
    c.validate();
    return c;
  }
};

void progress_line(const std::string& s) { std::cerr << s << '\n'; }

// --- commands --------------------------------------------------------------------------------

struct SimulateArgs {
  std::string domain, health = "normal", out;
  int count = 1, tooth = 26, cycles = 10;
  std::uint64_t seed = 0;
  double session_time = 0.0;
};

int cmd_simulate(const SimulateArgs& a) {
  const char d = parse_domain(a.domain);
  HealthLevel level;
  try {
    level = parse_health(a.health);
  } catch (const PreconditionError&) {
    throw CLI::ValidationError("--health", "must be normal, fault1 or fault2");
  }
  if (a.count < 1) throw CLI::ValidationError("--count", "must be positive");
  const json params = {{"command", "simulate"}, {"domain", a.domain}, {"health", a.health}, {"count", a.count},
                       {"seed", a.seed},        {"tooth", a.tooth},   {"cycles", a.cycles}, {"session_time", a.session_time}};
  log_hash("simulate", params);
  const GearGeometry g;
  const DomainSpec spec = domain_spec(d);
  const HealthState health = level == HealthLevel::normal ? HealthState::normal() : HealthState::faulty(level, a.tooth);
  const double duration = duration_for_hunting_cycles(g, spec, a.cycles);
  ensure_dir(a.out);
  json files = json::array();
  for (int i = 0; i < a.count; ++i) {
    SimulationOptions opt;
    opt.session_time_s = a.session_time;
    const TimeSeriesRecord r = simulate_record(g, spec, health, duration, a.seed + static_cast<std::uint64_t>(i), opt);
    char name[32];
    std::snprintf(name, sizeof name, "record_%04d.gsr", i);
    write_record(fs::path(a.out) / name, r);
    files.push_back(name);
  }
  json manifest = params;
  manifest["files"] = files;
  write_text(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
  return kOk;
}

struct HdmapArgs {
  std::string in, out;
  PreprocessOptions pre;
};

int cmd_hdmap(const HdmapArgs& a) {
  log_hash("hdmap", {{"command", "hdmap"}, {"in", a.in}, {"samples_per_mesh", a.pre.samples_per_mesh},
                     {"harmonics", a.pre.harmonics}, {"sideband_orders", a.pre.sideband_orders}});
  HdmapSet set;
  bool first = true;
  for (const fs::path& f : record_inputs(a.in)) {
    const TimeSeriesRecord r = read_record(f);
    const auto label = static_cast<std::uint8_t>(r.health.level);
    if (first) {
      set.geometry = r.geometry;
      set.label = label;
      first = false;
    } else if (label != set.label || !(r.geometry == set.geometry)) {
      throw PreconditionError("records in one map file must share health level and geometry");
    }
    set.maps.push_back(record_to_hdmap(r, a.pre));
  }
  write_hdmaps(a.out, set);
  return kOk;
}

struct SynthArgs {
  std::string method, in, signatures, out;
  double scale_max = 30.0;
  std::uint64_t seed = 0;
};

std::vector<FaultSignature> load_signatures(const std::string& path) {
  const HdmapSet set = read_hdmaps(path);
  if (set.label != kSignatureLabel) throw PreconditionError(path + " is not a signature file");
  std::vector<FaultSignature> out;
  for (const HDMap& m : set.maps) out.push_back({m, '?', 0});
  return out;
}

int cmd_synth(const SynthArgs& a) {
  SynthesisConfig cfg;
  try {
    cfg.method = parse_synthesis_method(a.method);
  } catch (const PreconditionError&) {
    throw CLI::ValidationError("--method", "must be cutpaste, scaled_cutpaste or faultpaste");
  }
  cfg.max_cutpaste_scale = cfg.max_faultpaste_scale = a.scale_max;
  cfg.seed = a.seed;
  cfg.validate();
  log_hash("synth", {{"command", "synth"}, {"method", a.method}, {"scale_max", a.scale_max}, {"in", a.in},
                     {"signatures", a.signatures}, {"seed", a.seed}});
  const HdmapSet in = read_hdmaps(a.in);
  if (in.label != 0) throw PreconditionError("synthesis input must hold normal maps");
  std::vector<FaultSignature> pool;
  if (cfg.method == SynthesisMethod::faultpaste) {
    if (a.signatures.empty()) throw CLI::RequiredError("--signatures");
    pool = load_signatures(a.signatures);
  }
  Rng rng(a.seed);
  HdmapSet out{in.geometry, 1, {}};
  std::string scales = "index\tscale\n";
  for (std::size_t i = 0; i < in.maps.size(); ++i) {
    Synthesized s = synthesize(in.maps[i], cfg, pool, rng);
    scales += std::to_string(i) + '\t' + std::to_string(s.scale) + '\n';
    out.maps.push_back(std::move(s.map));
  }
  write_hdmaps(a.out, out);
  write_text(a.out + ".scales.tsv", scales);
  return kOk;
}

struct SignatureArgs {
  std::string ae, in, out;
};

int cmd_signatures(const SignatureArgs& a) {
  log_hash("signatures", {{"command", "signatures"}, {"ae", a.ae}, {"in", a.in}});
  Network ae = nn::read_network(a.ae);
  const HdmapSet in = read_hdmaps(a.in);
  if (in.label == 0 || in.label == kSignatureLabel) throw PreconditionError("signature input must hold faulty maps");
  std::size_t skipped = 0;
  const std::vector<FaultSignature> sigs = extract_fault_signatures(in.maps, ae, &skipped);
  if (skipped) std::cerr << "signatures: skipped " << skipped << " degenerate residuals\n";
  HdmapSet out{in.geometry, kSignatureLabel, {}};
  for (const FaultSignature& s : sigs) out.maps.push_back(s.grid);
  write_hdmaps(a.out, out);
  return kOk;
}

struct TrainArgs {
  std::string objective, in, faults, signatures, out, log;
  Overrides o;
};

int cmd_train(const TrainArgs& a) {
  const PipelineConfig c = a.o.resolve();
  json params = json::parse(config_to_json(c));
  params["command"] = "train";
  params["objective"] = a.objective;
  params["in"] = a.in;
  log_hash("train", params);
  const HdmapSet normals = read_hdmaps(a.in);
  if (normals.label != 0)
    throw PreconditionError("training input must hold normal maps only (label " + std::to_string(normals.label) + ")");
  TrainingRecipe recipe = c.eval.recipe;
  recipe.seed = c.eval.seed;
  SynthesisConfig syn = c.eval.synthesis;
  TrainingResult r;
  std::vector<FaultSignature> pool;
  const bool fp = a.objective == "clf-fp" || a.objective == "reg-fp";
  if (fp) {
    if (a.signatures.empty()) throw CLI::RequiredError("--signatures");
    pool = load_signatures(a.signatures);
  }
  syn.method = fp ? SynthesisMethod::faultpaste : SynthesisMethod::scaled_cutpaste;
  if (a.objective == "ae") {
    TrainingRecipe ae = c.eval.ae_recipe;
    ae.seed = c.eval.seed;
    r = train_autoencoder(normals.maps, ae);
  } else if (a.objective == "clf-cp" || a.objective == "clf-fp") {
    r = train_classifier(normals.maps, syn, pool, recipe);
  } else if (a.objective == "reg-cp" || a.objective == "reg-fp") {
    r = train_regressor(normals.maps, syn, pool, recipe);
  } else if (a.objective == "baseline") {
    if (a.faults.empty()) throw CLI::RequiredError("--faults");
    const HdmapSet faults = read_hdmaps(a.faults);
    if (faults.label == 0 || faults.label == kSignatureLabel) throw PreconditionError("--faults must hold faulty maps");
    r = train_supervised_classifier(normals.maps, faults.maps, recipe);
  } else {
    throw CLI::ValidationError("--objective", "unknown objective " + a.objective);
  }
  nn::write_network(a.out, r.net);
  if (!a.log.empty()) {
    std::ofstream log(a.log, std::ios::app);
    if (!log) throw std::runtime_error("cannot write " + a.log);
    const nn::AdamConfig& adam = a.objective == "ae" ? c.eval.ae_recipe.adam : recipe.adam;
    for (std::size_t i = 0; i < r.loss.size(); ++i)
      log << json{{"objective", a.objective}, {"iteration", i + 1}, {"loss", r.loss[i]},
                  {"lr", adam.lr_at(static_cast<std::int64_t>(i + 1))}}.dump()
          << '\n';
  }
  std::cerr << "train: final loss " << (r.loss.empty() ? 0.0 : r.loss.back()) << '\n';
  return kOk;
}

struct EvalArgs {
  std::string task, out;
  bool all = false;
  Overrides o;
};

int cmd_eval(const EvalArgs& a) {
  if (a.all == !a.task.empty()) throw CLI::ValidationError("eval", "give exactly one of --task and --all");
  PipelineConfig c = a.o.resolve();
  c.output_dir = a.out;
  const std::string hash = config_hash(c);
  std::cerr << "eval: config hash " << hash << '\n';
  std::vector<TaskSpec> tasks = a.all ? all_tasks() : std::vector<TaskSpec>{task_by_notation(a.task)};
  const auto t0 = std::chrono::steady_clock::now();
  DatasetStore store(c.eval.data, c.eval.seed);
  const std::vector<TaskResult> results = run_tasks(tasks, c.eval, store, progress_line);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ensure_dir(a.out);
  const fs::path out(a.out);
  write_text(out / "config.json", config_to_json(c) + "\n");
  write_text(out / "accuracy.tsv", accuracy_report(results, c.eval.methods));
  if (c.eval.regression) {
    write_text(out / "severity.tsv", severity_report(results));
    write_text(out / "scores.tsv", scores_report(results));
  }
  write_text(out / "runs.tsv", runs_report(results));
  std::cout << accuracy_report(results, c.eval.methods);
  if (c.eval.regression) std::cout << '\n' << severity_report(results);
  std::cerr << "eval: " << results.size() << " tasks in " << secs << " s, config hash " << hash << '\n';
  return kOk;
}

struct StudyArgs {
  std::string out, scales, target, source;
  Overrides o;
};

int cmd_study(const StudyArgs& a) {
  PipelineConfig c = a.o.resolve();
  c.output_dir = a.out;
  if (!a.scales.empty()) {
    c.study.scales.clear();
    std::stringstream ss(a.scales);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        c.study.scales.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--scales", "expected a comma-separated list of numbers");
      }
    }
  }
  if (!a.target.empty()) c.study.target = parse_domain(a.target);
  if (!a.source.empty()) c.study.signature_source = parse_domain(a.source);
  c.validate();
  std::cerr << "study: config hash " << config_hash(c) << '\n';
  DatasetStore store(c.eval.data, c.eval.seed);
  const std::vector<StudyPoint> points = scaling_study(c.study, c.eval, store, progress_line);
  ensure_dir(a.out);
  write_text(fs::path(a.out) / "config.json", config_to_json(c) + "\n");
  write_text(fs::path(a.out) / "study.tsv", study_report(points));
  std::cout << study_report(points);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planetary gearbox fault diagnosis from health data maps"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "write simulated vibration records");
  s->add_option("--domain", sim.domain, "domain A-D")->required();
  s->add_option("--health", sim.health, "normal, fault1 or fault2");
  s->add_option("--count", sim.count, "number of records");
  s->add_option("--seed", sim.seed, "seed of the first record; record i uses seed + i")->required();
  s->add_option("--out", sim.out, "output directory")->required();
  s->add_option("--tooth", sim.tooth, "faulty planet tooth (1-based)");
  s->add_option("--cycles", sim.cycles, "hunting-tooth cycles per record");
  s->add_option("--session-time", sim.session_time, "record start within the session (s)");

  HdmapArgs hd;
  auto* h = app.add_subcommand("hdmap", "turn records into health data maps");
  h->add_option("--in", hd.in, "record file or directory")->required()->check(CLI::ExistingPath);
  h->add_option("--out", hd.out, "HDM1 output file")->required();
  h->add_option("--samples-per-mesh", hd.pre.samples_per_mesh, "angular samples per meshing event");
  h->add_option("--harmonics", hd.pre.harmonics, "removed mesh harmonics");
  h->add_option("--sidebands", hd.pre.sideband_orders, "removed sideband orders");

  SynthArgs sy;
  auto* y = app.add_subcommand("synth", "synthesize faulty maps from normal maps");
  y->add_option("--method", sy.method, "cutpaste, scaled_cutpaste or faultpaste")->required();
  y->add_option("--scale-max", sy.scale_max, "maximum scale A");
  y->add_option("--in", sy.in, "normal maps (HDM1)")->required()->check(CLI::ExistingFile);
  y->add_option("--signatures", sy.signatures, "signature file for faultpaste")->check(CLI::ExistingFile);
  y->add_option("--out", sy.out, "HDM1 output file")->required();
  y->add_option("--seed", sy.seed, "seed");

  SignatureArgs sg;
  auto* g = app.add_subcommand("signatures", "extract fault signatures with a trained autoencoder");
  g->add_option("--ae", sg.ae, "autoencoder weights (GWT1)")->required()->check(CLI::ExistingFile);
  g->add_option("--in", sg.in, "faulty maps (HDM1)")->required()->check(CLI::ExistingFile);
  g->add_option("--out", sg.out, "signature file")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train one model");
  t->add_option("--objective", tr.objective, "ae, clf-cp, clf-fp, reg-cp, reg-fp or baseline")
      ->required()
      ->check(CLI::IsMember({"ae", "clf-cp", "clf-fp", "reg-cp", "reg-fp", "baseline"}));
  t->add_option("--in", tr.in, "normal training maps (HDM1)")->required()->check(CLI::ExistingFile);
  t->add_option("--faults", tr.faults, "faulty maps for the baseline")->check(CLI::ExistingFile);
  t->add_option("--signatures", tr.signatures, "signature file for FaultPaste objectives")->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "weights file (GWT1)")->required();
  t->add_option("--log", tr.log, "append per-iteration telemetry (JSON lines)");
  tr.o.add(t);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "run transfer tasks and write the result tables");
  e->add_option("--task", ev.task, "one task, e.g. B->A");
  e->add_flag("--all", ev.all, "all 12 tasks");
  e->add_option("--out", ev.out, "output directory")->required();
  ev.o.add(e);
  ev.o.add_eval(e);

  StudyArgs st;
  auto* u = app.add_subcommand("study", "maximum-scale parametric study");
  u->add_option("--scales", st.scales, "comma-separated maximum scales");
  u->add_option("--target", st.target, "target domain");
  u->add_option("--source", st.source, "signature source domain");
  u->add_option("--out", st.out, "output directory")->required();
  st.o.add(u);
  st.o.add_eval(u);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kUsage;
  }
  try {
    if (*s) return cmd_simulate(sim);
    if (*h) return cmd_hdmap(hd);
    if (*y) return cmd_synth(sy);
    if (*g) return cmd_signatures(sg);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*u) return cmd_study(st);
  } catch (const CLI::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const FormatError& err) {
    std::cerr << "format error: " << err.what() << '\n';
    return kFormat;
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return kNumeric;
  } catch (const DegenerateSignatureError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return kNumeric;
  } catch (const PreconditionError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
