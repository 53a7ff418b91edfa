#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "guifix/calibrate.hpp"
#include "guifix/detect.hpp"
#include "guifix/error.hpp"
#include "guifix/eval.hpp"
#include "guifix/fix.hpp"
#include "guifix/graph.hpp"
#include "guifix/io.hpp"
#include "guifix/layout.hpp"
#include "guifix/random.hpp"
#include "guifix/rgcn.hpp"
#include "guifix/synth.hpp"
#include "guifix/wireframe.hpp"

namespace guifix::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kManifestName = "manifest.json";

// The effective configuration as nested objects, echoed into reports.
ojson settings_json(const Settings& s) {
  ojson j = ojson::object();
  std::istringstream in(settings_to_ini(s));
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      j[section] = ojson::object();
      continue;
    }
    const auto eq = line.find(" = ");
    j[section][line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

const fs::path& require_out(const GlobalOptions& g, const char* command) {
  if (!g.out) throw Error(std::string(command) + " requires --out");
  return *g.out;
}

void emit(const GlobalOptions& g, Streams io, const std::string& text) {
  if (g.out) write_file_atomic(*g.out, text);
  else io.out << text;
}

std::vector<Issue> sorted_issues(std::vector<Issue> v) {
  std::sort(v.begin(), v.end(), issue_identity_less);
  return v;
}

// A `<stem>.png` next to the dump is taken as its screenshot and supplies
// the background and every missing component color.
ViewTree load_dump(const fs::path& path) {
  ViewTree tree = load_view_tree(path);
  auto shot = path;
  shot.replace_extension(".png");
  if (fs::exists(shot)) fill_colors_from_screenshot(tree, load_png(shot));
  return tree;
}

std::vector<NamedWireframe> load_corpus(const fs::path& dir) {
  std::vector<NamedWireframe> out;
  for (const auto& f : corpus_files(dir)) out.push_back({f.filename().string(), flatten(load_dump(f))});
  if (out.empty()) throw Error("corpus is empty: " + dir.string());
  return out;
}

struct GuiRun {
  FixReport report;
  Patch patch;
};

GuiRun fix_one(const std::string& name, const ViewTree& tree, const std::vector<Issue>& pre,
               const TrainedModel& model, const Calibration& cal, const Settings& s, std::uint64_t seed) {
  const Wireframe before = flatten(tree);
  const FixPlan plan = plan_fix(before, pre, model, cal, s.thresholds, s.fix_options(model, seed), &tree);
  const Wireframe after = flatten(apply_patch(tree, plan.patch));
  const auto post = detect_issues(after, s.thresholds);
  GuiRun run{classify(name, before, after, pre, post), plan.patch};
  run.report.partial = plan.patch.partial;
  return run;
}

// Runs `work(i)` for i in [0, n) on all hardware threads.  Each index writes
// only its own slot, so results do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& work) {
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Settings load_global_settings(const GlobalOptions& g) {
  Settings s = g.config ? load_settings(*g.config) : Settings{};
  s.train.seed = g.seed;
  s.synth.seed = g.seed;
  s.synth.thresholds = s.thresholds;
  return s;
}

std::vector<fs::path> corpus_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (e.path().filename() == kManifestName) continue;
    if (ext == ".json" || ext == ".xml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const CorpusError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& [name, is] : e.issues()) {
      err << "  " << name << ": " << to_string(is.kind) << " at " << is.component_id << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

int cmd_detect(const GlobalOptions& g, const fs::path& input, Streams io) {
  const Settings s = load_global_settings(g);
  const auto result = detect(flatten(load_dump(input)), s.thresholds);
  const auto issues = sorted_issues(result.issues);
  if (g.format == OutputFormat::Table) {
    emit(g, io, issues_to_table(issues));
  } else {
    ojson j;
    j["input"] = input.filename().string();
    j["issues"] = ojson::parse(issues_to_json(issues));
    j["unscanned"] = result.unscanned;
    j["config"] = settings_json(s);
    emit(g, io, j.dump(2) + "\n");
  }
  return issues.empty() ? kExitOk : kExitIssues;
}

int cmd_train(const GlobalOptions& g, const fs::path& corpus, Streams io) {
  const Settings s = load_global_settings(g);
  const fs::path& model_path = require_out(g, "train");
  std::vector<GuiGraph> graphs;
  for (const auto& nw : load_corpus(corpus)) graphs.push_back(build_graph(nw.wireframe));

  // Hold out the last fifth for link-prediction MRR when the corpus allows.
  const std::size_t held = graphs.size() >= 5 ? graphs.size() / 5 : 0;
  const std::span<const GuiGraph> all(graphs);
  const auto train_set = all.first(graphs.size() - held);
  const auto held_set = all.last(held);

  const TrainedModel model = train(train_set, s.train);
  save_model(model, model_path);
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < model.loss_curve.size(); ++e) csv << e + 1 << ',' << format_double(model.loss_curve[e]) << '\n';
  fs::path loss_path = model_path;
  loss_path += ".loss.csv";
  write_file_atomic(loss_path, csv.str());

  ojson j;
  j["model"] = model_path.filename().string();
  j["graphs_train"] = train_set.size();
  j["graphs_heldout"] = held;
  j["epochs"] = model.loss_curve.size();
  j["first_loss"] = model.loss_curve.empty() ? ojson(nullptr) : ojson(model.loss_curve.front());
  j["final_loss"] = model.loss_curve.empty() ? ojson(nullptr) : ojson(model.loss_curve.back());
  if (held > 0) {
    const auto ev = evaluate_link_prediction(model.params, held_set, s.train.removed_edges, mix_seed(g.seed, 0xE7));
    j["heldout"] = {{"model_mrr", ev.model_mrr}, {"random_mrr", ev.random_mrr}, {"queries", ev.queries}};
  } else {
    j["heldout"] = nullptr;
  }
  j["config"] = settings_json(s);
  io.out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_calibrate(const GlobalOptions& g, const std::optional<fs::path>& model_path,
                  const std::optional<fs::path>& corpus, bool preset, Streams io) {
  const Settings s = load_global_settings(g);
  const fs::path& out = require_out(g, "calibrate");
  Calibration cal;
  ojson j;
  if (preset) {
    cal = published_calibration();
  } else {
    if (!model_path || !corpus) throw Error("calibrate requires --model and --corpus unless --preset is given");
    const TrainedModel model = load_model(*model_path);
    const auto wfs = load_corpus(*corpus);
    const MappingSet set = build_mapping_set(model, wfs, s.mapping_protocol(model, g.seed), s.thresholds);
    cal = fit_calibration(set, s.calibrate_degree);
    fs::path csv = out;
    csv += ".mapping.csv";
    write_file_atomic(csv, mapping_set_csv(set));
    j["pairs"] = {{"size", set.size_pairs.size()},
                  {"interval", set.interval_pairs.size()},
                  {"contrast", set.contrast_pairs.size()}};
  }
  save_calibration(cal, out);
  j["calibration"] = out.filename().string();
  j["provenance"] = to_string(cal.provenance);
  auto curve = [](const PolyFit& f) {
    return ojson{{"coefficients", f.coefficients}, {"residual_rms", f.residual_rms}, {"samples", f.samples}};
  };
  j["curves"] = {{"size", curve(cal.f_size)}, {"interval", curve(cal.f_interval)}, {"color", curve(cal.f_color)}};
  j["config"] = settings_json(s);
  io.out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_fix(const GlobalOptions& g, const fs::path& input, const fs::path& model_path, const fs::path& calibration,
            Streams io) {
  const Settings s = load_global_settings(g);
  const fs::path& dir = require_out(g, "fix");
  const ViewTree tree = load_dump(input);
  const auto pre = sorted_issues(detect_issues(flatten(tree), s.thresholds));
  const TrainedModel model = load_model(model_path);
  const Calibration cal = load_calibration(calibration);
  const std::string stem = input.stem().string();
  const GuiRun run = fix_one(stem, tree, pre, model, cal, s, g.seed);

  fs::create_directories(dir);
  write_file_atomic(dir / (stem + ".patch.json"), patch_to_json(run.patch));
  write_file_atomic(dir / (stem + ".fixed.json"), serialize_json(apply_patch(tree, run.patch)));
  ojson report = ojson::parse(fix_report_to_json(run.report));
  report["config"] = settings_json(s);
  write_file_atomic(dir / (stem + ".report.json"), report.dump(2) + "\n");

  if (g.format == OutputFormat::Table) {
    io.out << stem << ": pre " << pre.size() << "  fixed " << run.report.count(Verdict::Fixed) << "  half-baked "
           << run.report.count(Verdict::HalfBaked) << "  unfixed " << run.report.count(Verdict::Unfixed)
           << "  extra " << run.report.extra.size() << (run.report.partial ? "  (partial)" : "") << '\n';
  } else {
    io.out << report.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_eval(const GlobalOptions& g, const fs::path& manifest_path, const fs::path& model_path,
             const fs::path& calibration, Streams io) {
  const Settings s = load_global_settings(g);
  const Manifest manifest = manifest_from_json(read_file(manifest_path));
  const fs::path dir = manifest_path.parent_path();

  const std::size_t n = manifest.entries.size();
  std::vector<ViewTree> trees(n);
  std::vector<std::vector<Issue>> pre(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = manifest.entries[i];
    trees[i] = load_dump(dir / e.file);
    pre[i] = sorted_issues(detect_issues(flatten(trees[i]), s.thresholds));
    const auto truth = sorted_issues(e.injected);
    const bool same = pre[i].size() == truth.size() &&
                      std::equal(pre[i].begin(), pre[i].end(), truth.begin(),
                                 [](const Issue& a, const Issue& b) { return a.same_identity(b); });
    if (!same) {
      throw Error("manifest mismatch: " + e.file + " has " + std::to_string(pre[i].size()) +
                  " detected issues, manifest lists " + std::to_string(truth.size()));
    }
  }

  const TrainedModel model = load_model(model_path);
  const Calibration cal = load_calibration(calibration);

  std::vector<GuiRun> runs(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    runs[i] = fix_one(fs::path(e.file).stem().string(), trees[i], pre[i], model, cal, s, mix_seed(g.seed, i));
  });

  std::vector<FixReport> reports;
  for (const auto& r : runs) reports.push_back(r.report);
  const EvalReport rep = aggregate(std::move(reports));
  ojson j = ojson::parse(eval_report_to_json(rep));
  j["config"] = settings_json(s);
  const std::string json = j.dump(2) + "\n";
  const std::string table = eval_report_to_table(rep);

  if (g.out) {
    const fs::path& out = *g.out;
    write_file_atomic(out / "report.json", json);
    write_file_atomic(out / "report.txt", table);
    for (std::size_t i = 0; i < n; ++i) {
      const auto stem = fs::path(manifest.entries[i].file).stem().string();
      write_file_atomic(out / "patches" / (stem + ".patch.json"), patch_to_json(runs[i].patch));
    }
  }
  io.out << (g.format == OutputFormat::Table ? table : json);
  return kExitOk;
}

int cmd_synth(const GlobalOptions& g, std::size_t n, bool inject, Streams io) {
  const Settings s = load_global_settings(g);
  const fs::path& dir = require_out(g, "synth");
  fs::create_directories(dir);
  Manifest manifest;
  manifest.seed = g.seed;
  manifest.injected = inject;
  std::size_t issues = 0;
  for (const auto& gui : gen_accessible(s.synth, n)) {
    ManifestEntry e;
    e.file = gui.name + ".json";
    e.seed = gui.seed;
    ViewTree tree = gui.tree;
    if (inject) {
      Injection inj = inject_issues(gui.tree, s.inject, mix_seed(gui.seed, 0x1B), s.thresholds);
      tree = std::move(inj.tree);
      e.injected = std::move(inj.issues);
      e.notes = std::move(inj.notes);
      issues += e.injected.size();
    }
    write_file_atomic(dir / e.file, serialize_json(tree));
    manifest.entries.push_back(std::move(e));
  }
  write_file_atomic(dir / kManifestName, manifest_to_json(manifest));
  write_file_atomic(dir / "settings.ini", settings_to_ini(s));
  ojson j;
  j["guis"] = n;
  j["injected"] = inject;
  j["issues"] = issues;
  j["manifest"] = kManifestName;
  io.out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace guifix::cli
