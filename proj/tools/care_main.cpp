#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "signals.hpp"
#include "voicesearch/caregiver/caregiver_client.hpp"
#include "voicesearch/caregiver/evaluation.hpp"
#include "voicesearch/caregiver/ui_api.hpp"
#include "voicesearch/common/files.hpp"
#include "voicesearch/keys/keyfile.hpp"

using namespace voicesearch;
using namespace voicesearch::caregiver;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

// file,word,mood,background
std::map<std::string, Label> read_labels_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  std::map<std::string, Label> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() < 4) throw Error(Errc::malformed_request, "bad labels.csv line: " + line);
    out[fs::path(cols[0]).filename().string()] = Label{cols[1], cols[2], cols[3], ""};
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Caregiver interface: browse, label, query and evaluate encrypted voice records"};
  app.require_subcommand(1);
  std::string config_path = "caregiver.json";
  bool as_json = false;
  app.add_option("--config", config_path, "Caregiver configuration");
  app.add_flag("--json", as_json, "Machine-readable output");

  std::string device_filter;
  auto* list = app.add_subcommand("list", "List records with local labels");
  list->add_option("--device", device_filter, "Only this device");

  std::string id;
  std::string out_path;
  auto* play = app.add_subcommand("play", "Fetch and decrypt a recording");
  play->add_option("id", id, "Record id")->required();
  play->add_option("--out", out_path, "Write the WAV here (default <id>.wav)");

  Label lbl;
  auto* label = app.add_subcommand("label", "Label a record");
  label->add_option("id", id, "Record id")->required();
  label->add_option("--word", lbl.word)->required();
  label->add_option("--mood", lbl.mood)->required();
  label->add_option("--background", lbl.background)->required();
  label->add_option("--notes", lbl.notes);

  std::string labels_csv, batch_json;
  auto* import = app.add_subcommand("import-labels", "Label records from a labels.csv and `device --json batch` output");
  import->add_option("--labels", labels_csv, "file,word,mood,background")->required();
  import->add_option("--batch", batch_json, "JSON list of {file, record_id}")->required();

  std::string record_src, wav_src;
  std::optional<double> tm, tw;
  auto* query = app.add_subcommand("query", "Rank every stored record by distance to a voice");
  auto* src_opt = query->add_option("--record", record_src, "Query with a stored record");
  query->add_option("--wav", wav_src, "Query with a local WAV file")->excludes(src_opt);
  query->add_option("--tm", tm, "Same-mood threshold");
  query->add_option("--tw", tw, "Same-word threshold");

  auto* learn = app.add_subcommand("learn-thresholds", "Learn T_m and T_w from labeled records and save them");

  std::string report_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Per-level accuracy, sensitivity and specificity");
  evaluate->add_option("--tm", tm, "Use this T_m instead of learning");
  evaluate->add_option("--tw", tw, "Use this T_w instead of learning");
  evaluate->add_option("--out-dir", report_dir, "Write metrics.csv and sweep.csv here");

  auto* sweep = app.add_subcommand("sweep", "Sensitivity/specificity of same-word detection per threshold (CSV)");

  std::vector<std::string> ids;
  auto* fetch = app.add_subcommand("fetch", "Fetch and decrypt several recordings into a directory");
  fetch->add_option("ids", ids, "Record ids")->required();
  fetch->add_option("--out-dir", out_path, "Directory")->required();

  std::string host = "127.0.0.1";
  int port = 8760;
  auto* serve = app.add_subcommand("serve", "Serve the localhost console API");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = CaregiverConfig::load(config_path);
    fs::create_directories(config.state_dir);
    const fs::path thresholds_file = config.state_dir / "thresholds.json";
    const auto keys = keys::load_key_file(config.key_file);
    net::HttpTransport transport(config.server_url);
    LabelStore labels(config.state_dir / "labels.json");
    SystemRandom rng;
    CaregiverClient client(keys, transport, labels, rng, config.mfcc);

    auto cli_thresholds = [&]() -> std::optional<matching::Thresholds> {
      if (tm.has_value() != tw.has_value()) throw Error(Errc::invalid_thresholds, "give both --tm and --tw");
      if (!tm) return std::nullopt;
      return matching::Thresholds{*tm, *tw};
    };

    if (list->parsed()) {
      server::RecordFilter filter;
      if (!device_filter.empty()) filter.device_id = device_filter;
      json out = json::array();
      for (const auto& r : client.list(filter)) {
        if (as_json) {
          out.push_back(json{{"record_id", r.summary.record_id},
                             {"created_at", format_rfc3339(r.summary.created_at)},
                             {"device_id", r.summary.device_id},
                             {"labels", r.label ? label_to_json(*r.label) : json()}});
        } else {
          std::cout << r.summary.record_id << '\t' << format_rfc3339(r.summary.created_at) << '\t'
                    << r.summary.device_id;
          if (r.label) std::cout << '\t' << r.label->word << '/' << r.label->mood << '/' << r.label->background;
          std::cout << '\n';
        }
      }
      if (as_json) std::cout << out.dump(2) << '\n';
    } else if (play->parsed()) {
      const Bytes wav = client.fetch_and_play(id);
      const fs::path dest = out_path.empty() ? fs::path(id + ".wav") : fs::path(out_path);
      write_file_atomic(dest, ByteView(wav), 0600);
      std::cout << dest.string() << '\n';
    } else if (label->parsed()) {
      client.label(id, lbl);
    } else if (import->parsed()) {
      const auto by_file = read_labels_csv(labels_csv);
      const json batch = json::parse(read_text_file(batch_json));
      int n = 0;
      for (const auto& row : batch) {
        if (!row.contains("record_id")) continue;
        const std::string file = fs::path(row.at("file").get<std::string>()).filename().string();
        auto it = by_file.find(file);
        if (it == by_file.end()) continue;
        labels.set(row.at("record_id").get<std::string>(), it->second);
        ++n;
      }
      std::cout << "labeled " << n << " records\n";
    } else if (query->parsed()) {
      auto t = cli_thresholds();
      if (!t) t = load_thresholds(thresholds_file);
      if (record_src.empty() && wav_src.empty()) throw Error(Errc::malformed_request, "give --record or --wav");
      const auto source = record_src.empty() ? QuerySource::wav_file(wav_src) : QuerySource::record(record_src);
      const auto session = client.run_query(source, t);
      if (as_json) {
        std::cout << session_to_json(session).dump(2) << '\n';
      } else {
        if (!t) std::cerr << "no thresholds saved or given; classes omitted\n";
        for (const auto& r : session.results) {
          std::printf("%s\t%.6f\t%s\n", r.record_id.c_str(), r.distance,
                      r.match_class ? std::string(matching::to_string(*r.match_class)).c_str() : "-");
        }
      }
    } else if (learn->parsed()) {
      const auto pairs = client.labeled_pairs();
      std::vector<matching::LabeledDistance> data;
      for (const auto& p : pairs) data.push_back({p.distance, true_class(p.label_a, p.label_b)});
      const auto t = matching::learn_thresholds(data);
      save_thresholds(thresholds_file, t);
      std::printf("T_m = %.6f\nT_w = %.6f\nsaved to %s\n", t.same_mood, t.same_word, thresholds_file.c_str());
    } else if (evaluate->parsed()) {
      const auto pairs = client.labeled_pairs();
      const auto report = evaluate_pairs(pairs, cli_thresholds());
      const std::string metrics = matching::metrics_csv(report.rows);
      const std::string sweep_text = matching::sweep_csv(report.sweep);
      if (!report_dir.empty()) {
        fs::create_directories(report_dir);
        write_file_atomic(fs::path(report_dir) / "metrics.csv", metrics);
        write_file_atomic(fs::path(report_dir) / "sweep.csv", sweep_text);
      }
      std::printf("thresholds: T_m = %.6f, T_w = %.6f (%s)\n", report.thresholds.same_mood, report.thresholds.same_word,
                  !report.thresholds_learned      ? "given"
                  : report.trained_on_all_pairs ? "learned on all pairs; training half had one class"
                                                : "learned on training half");
      std::printf("pairs: %zu train, %zu test\n", report.train_pairs, report.test_pairs);
      std::printf("%-22s %9s %12s %12s\n", "level", "accuracy", "sensitivity", "specificity");
      for (const auto& r : report.rows) {
        std::printf("%-22s %9s %12s %12s\n", r.similarity_level.c_str(), fmt_metric(r.values.accuracy).c_str(),
                    fmt_metric(r.values.sensitivity).c_str(), fmt_metric(r.values.specificity).c_str());
      }
      std::printf("three-class accuracy: %.4f\n", report.three_class_accuracy);
    } else if (sweep->parsed()) {
      const auto pairs = client.labeled_pairs();
      std::cout << matching::sweep_csv(same_word_sweep(pairs));
    } else if (fetch->parsed()) {
      fs::create_directories(out_path);
      int failures = 0;
      for (const auto& a : client.fetch(ids)) {
        if (a.wav) {
          const fs::path dest = fs::path(out_path) / (a.record_id + ".wav");
          write_file_atomic(dest, ByteView(*a.wav), 0600);
          std::cout << a.record_id << '\t' << dest.string() << '\n';
        } else {
          ++failures;
          std::cout << a.record_id << "\terror: " << to_string(*a.error) << '\n';
        }
      }
      return failures == 0 ? 0 : 2;
    } else if (serve->parsed()) {
      const sigset_t signals = tools::block_shutdown_signals();
      CaregiverUiApi api(client, thresholds_file);
      net::HttpService service(api.handler());
      const int bound = service.start(host, port);
      std::printf("console API on http://%s:%d/ui/\n", host.c_str(), bound);
      std::fflush(stdout);
      tools::wait_for_shutdown(signals, service);
    }
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
