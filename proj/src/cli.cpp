#include "instrsynth/cli.hpp"

#include "instrsynth/baselines.hpp"
#include "instrsynth/compositor.hpp"
#include "instrsynth/corpus.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <thread>

namespace instrsynth {

using nlohmann::json;

namespace {

const std::map<std::string, Command> kCommands = {{"validate", Command::validate},
                                                  {"stats", Command::stats},
                                                  {"extract", Command::extract},
                                                  {"synth", Command::synth},
                                                  {"eval", Command::eval}};
const std::map<std::string, Method> kMethods = {
    {"context", Method::context}, {"naive", Method::naive}, {"switch", Method::instance_switch}};
const std::map<std::string, MiouMode> kMiouModes = {{"instance", MiouMode::instance}, {"pixel", MiouMode::pixel}};
const std::map<std::string, IouType> kIouTypes = {
    {"auto", IouType::automatic}, {"box", IouType::box}, {"mask", IouType::mask}};

template <typename T>
T lookup(const std::map<std::string, T>& table, const std::string& key, const char* what) {
  auto it = table.find(key);
  if (it == table.end()) throw DataError(std::string("unknown ") + what + " \"" + key + "\"");
  return it->second;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::context: return "context";
    case Method::naive: return "naive";
    case Method::instance_switch: return "switch";
  }
  return "context";
}

// Usage problems detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_input(const std::filesystem::path& p, const char* flag) {
  if (p.empty()) throw UsageError(std::string(flag) + " is required");
  if (!std::filesystem::exists(p)) throw IoError("input not found: " + p.string());
}

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

ComponentBank bank_for(const RunConfig& cfg) {
  if (!cfg.bank.empty()) {
    require_input(cfg.bank, "--bank");
    return load_bank(cfg.bank);
  }
  require_input(cfg.corpus, "--corpus (or --bank)");
  require_input(cfg.manifest, "--manifest");
  return extract_components(load_corpus(cfg.corpus), load_manifest(cfg.manifest), cfg.ink_threshold);
}

std::string page_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%06zu", prefix, i);
  return buf;
}

int do_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_input(cfg.corpus, "--corpus");
  const auto diagnostics = validate_corpus(cfg.corpus);
  for (const auto& d : diagnostics) err << d.str() << "\n";
  if (!diagnostics.empty()) {
    err << diagnostics.size() << " problem(s) found\n";
    return kExitInvalid;
  }
  const Corpus corpus = load_corpus(cfg.corpus, false);
  std::size_t instances = 0;
  for (const auto& p : corpus.pages) instances += p.instances.size();
  out << "ok: " << corpus.pages.size() << " pages, " << instances << " instances\n";
  return kExitOk;
}

int do_synth(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.method) throw UsageError("synth requires --method");
  if (cfg.out.empty()) throw UsageError("--out is required");
  if (cfg.count < 0) throw UsageError("--count must be non-negative");
  const auto count = static_cast<std::size_t>(cfg.count);
  const std::string method = method_name(*cfg.method);

  std::function<SynthPage(std::size_t)> make_page;
  ComponentBank bank;
  Corpus corpus;
  if (*cfg.method == Method::instance_switch) {
    require_input(cfg.corpus, "--corpus");
    corpus = load_corpus(cfg.corpus);
    make_page = [&](std::size_t i) {
      // Pages 2k and 2k+1 are the two halves of one switch.
      const std::uint64_t seed = derive_seed(cfg.seed, i / 2);
      Rng rng(seed);
      auto pair = instance_switch(rng, corpus);
      SynthPage page = i % 2 == 0 ? std::move(pair.first) : std::move(pair.second);
      page.id = page_name("switch", i);
      page.provenance.seed = seed;
      return page;
    };
  } else {
    bank = bank_for(cfg);
    make_page = [&](std::size_t i) {
      const std::uint64_t seed = derive_seed(cfg.seed, i);
      Rng rng(seed);
      SynthPage page = *cfg.method == Method::context
                           ? render(plan_page(rng, cfg.page_w, cfg.page_h, bank, cfg.layout), bank)
                           : naive_cut_paste(rng, bank, cfg.page_w, cfg.page_h);
      page.id = page_name(method.c_str(), i);
      page.provenance.seed = seed;
      return page;
    };
  }
  try {
    write_dataset(count, make_page, cfg.out, cfg.seed, method, worker_count(cfg.threads));
  } catch (const IoError& e) {
    throw std::system_error(std::make_error_code(std::errc::io_error), e.what());
  }
  out << "wrote " << count << " " << method << " pages to " << cfg.out.string() << "\n";
  return kExitOk;
}

int do_eval(const RunConfig& cfg, std::ostream& out) {
  require_input(cfg.corpus, "--gt");
  require_input(cfg.preds, "--preds");
  const Corpus truth = load_corpus(cfg.corpus, false);
  const auto preds = load_predictions(cfg.preds);
  EvalOptions opts;
  opts.miou_mode = cfg.miou_mode;
  opts.iou_type = cfg.iou_type;
  const EvalReport report = evaluate(preds, truth, opts);
  if (!cfg.report.empty()) {
    try {
      write_text(cfg.report, report.to_json());
    } catch (const IoError& e) {
      throw std::system_error(std::make_error_code(std::errc::io_error), e.what());
    }
  }
  out << (cfg.json_output ? report.to_json() : report.to_table());
  return kExitOk;
}

}  // namespace

void apply_config_json(RunConfig& cfg, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    try {
      if (key == "command") cfg.command = lookup(kCommands, v.get<std::string>(), "command");
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "count") cfg.count = v.get<long>();
      else if (key == "method") cfg.method = lookup(kMethods, v.get<std::string>(), "method");
      else if (key == "corpus" || key == "gt") cfg.corpus = v.get<std::string>();
      else if (key == "manifest") cfg.manifest = v.get<std::string>();
      else if (key == "bank") cfg.bank = v.get<std::string>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "preds") cfg.preds = v.get<std::string>();
      else if (key == "report") cfg.report = v.get<std::string>();
      else if (key == "page_width") cfg.page_w = v.get<int>();
      else if (key == "page_height") cfg.page_h = v.get<int>();
      else if (key == "margin") cfg.layout.margin = v.get<double>();
      else if (key == "scale_cap") cfg.layout.scale_cap = v.get<double>();
      else if (key == "attempts") cfg.layout.attempts = v.get<int>();
      else if (key == "ink_threshold") cfg.ink_threshold = v.get<int>();
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else if (key == "miou") cfg.miou_mode = lookup(kMiouModes, v.get<std::string>(), "miou mode");
      else if (key == "iou_type") cfg.iou_type = lookup(kIouTypes, v.get<std::string>(), "iou type");
      else if (key == "json") cfg.json_output = v.get<bool>();
      else throw DataError("unknown config key \"" + key + "\"");
    } catch (const json::exception& e) {
      throw DataError("config key \"" + key + "\": " + e.what());
    }
  }
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.page_w <= 0 || cfg.page_h <= 0) throw UsageError("page dimensions must be positive");
    if (cfg.method && cfg.command != Command::synth) throw UsageError("--method only applies to synth");
    switch (cfg.command) {
      case Command::none:
        throw UsageError("no command given (validate, stats, extract, synth, eval)");
      case Command::validate:
        return do_validate(cfg, out, err);
      case Command::stats: {
        require_input(cfg.corpus, "--corpus");
        out << format_stats(stats(load_corpus(cfg.corpus, false)));
        return kExitOk;
      }
      case Command::extract: {
        require_input(cfg.corpus, "--corpus");
        require_input(cfg.manifest, "--manifest");
        if (cfg.out.empty()) throw UsageError("--out is required");
        const ComponentBank bank =
            extract_components(load_corpus(cfg.corpus), load_manifest(cfg.manifest), cfg.ink_threshold);
        try {
          save_bank(bank, cfg.out);
        } catch (const IoError& e) {
          throw std::system_error(std::make_error_code(std::errc::io_error), e.what());
        }
        out << "extracted " << bank.size() << " components (bank " << bank.version() << ") to " << cfg.out.string()
            << "\n";
        return kExitOk;
      }
      case Command::synth:
        return do_synth(cfg, out);
      case Command::eval:
        return do_eval(cfg, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::system_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitWriteFailure;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadData;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  // Config file first so explicit flags win.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
    if (path.empty()) continue;
    try {
      apply_config_json(cfg, read_text(path));
    } catch (const IoError& e) {
      err << "error: " << e.what() << "\n";
      return kExitMissingInput;
    } catch (const DataError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }

  CLI::App app{"Synthesize and score annotated assembly-instruction pages", "instrsynth"};
  app.set_version_flag("--version", generator_version());
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with RunConfig fields; flags override it");
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string method, miou, iou_type;
  std::string corpus_str = cfg.corpus.string(), manifest_str = cfg.manifest.string(), bank_str = cfg.bank.string(),
              out_str = cfg.out.string(), preds_str = cfg.preds.string(), report_str = cfg.report.string();

  auto* validate = app.add_subcommand("validate", "Check a corpus against every annotation invariant");
  validate->add_option("--corpus", corpus_str, "Corpus directory");

  auto* stats_cmd = app.add_subcommand("stats", "Per-category instance and image counts");
  stats_cmd->add_option("--corpus", corpus_str, "Corpus directory");

  auto* extract = app.add_subcommand("extract", "Cut manifest crops into a component bank");
  extract->add_option("--corpus", corpus_str, "Corpus directory");
  extract->add_option("--manifest", manifest_str, "Component manifest JSON");
  extract->add_option("--out", out_str, "Bank output directory");
  extract->add_option("--ink-threshold", cfg.ink_threshold, "Pixels below this are foreground");

  auto* synth = app.add_subcommand("synth", "Generate an annotated dataset");
  synth->add_option("--method", method, "context, naive or switch")->check(CLI::IsMember({"context", "naive", "switch"}));
  synth->add_option("--count", cfg.count, "Pages to generate");
  synth->add_option("--seed", cfg.seed, "Master seed");
  synth->add_option("--out", out_str, "Dataset output directory");
  synth->add_option("--bank", bank_str, "Component bank directory");
  synth->add_option("--corpus", corpus_str, "Corpus directory (switch, or with --manifest)");
  synth->add_option("--manifest", manifest_str, "Component manifest JSON");
  synth->add_option("--page-width", cfg.page_w, "Output page width");
  synth->add_option("--page-height", cfg.page_h, "Output page height");
  synth->add_option("--margin", cfg.layout.margin, "Top/bottom area margin as a page-height fraction");
  synth->add_option("--scale-cap", cfg.layout.scale_cap, "Largest component size as an area fraction");
  synth->add_option("--attempts", cfg.layout.attempts, "Placement attempts per free component");
  synth->add_option("--ink-threshold", cfg.ink_threshold, "Pixels below this are foreground");
  synth->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--gt", corpus_str, "Ground-truth corpus directory");
  eval->add_option("--preds", preds_str, "Prediction JSON");
  eval->add_option("--report", report_str, "Write the JSON report here");
  eval->add_option("--miou", miou, "instance or pixel")->check(CLI::IsMember({"instance", "pixel"}));
  eval->add_option("--iou-type", iou_type, "auto, box or mask")->check(CLI::IsMember({"auto", "box", "mask"}));
  eval->add_flag("--json", cfg.json_output, "Print the JSON report instead of the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& [name, cmd] : kCommands)
    if (app.got_subcommand(name)) cfg.command = cmd;
  if (!method.empty()) cfg.method = kMethods.at(method);
  if (!miou.empty()) cfg.miou_mode = kMiouModes.at(miou);
  if (!iou_type.empty()) cfg.iou_type = kIouTypes.at(iou_type);
  cfg.corpus = corpus_str;
  cfg.manifest = manifest_str;
  cfg.bank = bank_str;
  cfg.out = out_str;
  cfg.preds = preds_str;
  cfg.report = report_str;
  return run(cfg, out, err);
}

}  // namespace instrsynth
